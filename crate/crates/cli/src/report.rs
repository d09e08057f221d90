//! Report envelopes (JSON) and sweep tables (CSV).

use liyau_core::probe::SweepRow;
use liyau_core::{InequalityParams, Theorem, Variant};
use serde::Serialize;

use crate::error::CliError;

pub const SCHEMA: &str = "liyau-report/1";

/// Top-level JSON object of every report file.
#[derive(Debug, Serialize)]
pub struct Envelope<'a, T: Serialize> {
    pub schema: &'static str,
    pub command: &'a str,
    pub seed: Option<u64>,
    #[serde(flatten)]
    pub body: T,
}

pub fn to_json<T: Serialize>(command: &str, seed: Option<u64>, body: T) -> Vec<u8> {
    let env = Envelope { schema: SCHEMA, command, seed, body };
    let mut v = serde_json::to_vec_pretty(&env).expect("reports serialize");
    v.push(b'\n');
    v
}

/// Shortest round-trip rendering.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:?}")
}

pub fn theorem_name(t: Theorem) -> &'static str {
    match t {
        Theorem::Second => "second",
        Theorem::Fourth => "fourth",
    }
}

pub fn variant_name(v: Option<Variant>) -> &'static str {
    match v {
        None => "",
        Some(Variant::AsStated) => "as_stated",
        Some(Variant::Rederived) => "rederived",
    }
}

pub fn param_names(theorem: Theorem) -> &'static [&'static str] {
    match theorem {
        Theorem::Second => &["alpha", "beta", "gamma"],
        Theorem::Fourth => &["k1", "k2", "k3", "k4"],
    }
}

pub fn csv_header(theorem: Theorem, n: usize) -> Vec<String> {
    let mut h: Vec<String> = ["theorem", "variant", "scenario", "n", "t"].map(String::from).to_vec();
    h.extend((1..=n).map(|i| format!("x{i}")));
    h.extend(param_names(theorem).iter().map(|s| s.to_string()));
    h.extend(["lhs", "rhs", "slack", "err", "admissible"].map(String::from));
    h
}

pub fn csv_record(row: &SweepRow) -> Vec<String> {
    let r = &row.report;
    let mut rec = vec![
        theorem_name(r.theorem).to_string(),
        variant_name(r.variant).to_string(),
        row.scenario.to_string(),
        r.n.to_string(),
        fmt_f64(r.t),
    ];
    rec.extend(r.x.iter().map(|&v| fmt_f64(v)));
    rec.extend(r.params.values().into_iter().map(fmt_f64));
    rec.extend([r.lhs, r.rhs, r.slack, r.err].map(fmt_f64));
    rec.push(r.admissible.to_string());
    rec
}

pub fn sweep_csv(theorem: Theorem, n: usize, rows: &[SweepRow]) -> Result<Vec<u8>, CliError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let err = |e: csv::Error| CliError::Engine(format!("csv: {e}"));
    w.write_record(csv_header(theorem, n)).map_err(err)?;
    for row in rows {
        w.write_record(csv_record(row)).map_err(err)?;
    }
    w.into_inner().map_err(|e| CliError::Engine(format!("csv: {e}")))
}

/// Parameter tuple of a report in CSV order, tagged with names.
pub fn named_params(p: &InequalityParams) -> Vec<(&'static str, f64)> {
    param_names(p.theorem()).iter().copied().zip(p.values()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use liyau_core::inequalities::{check_second_order, CheckOptions};
    use liyau_core::{InitialData, SecondOrderParams};

    #[test]
    fn csv_shape() {
        let g = InitialData::constant(2, 1.0).unwrap();
        let r = check_second_order(&g, &[0.0, 0.5], 1.0, &SecondOrderParams::new(0.0, 0.0, 1.0), &CheckOptions::default())
            .unwrap();
        let bytes = sweep_csv(Theorem::Second, 2, &[SweepRow { scenario: 0, report: r }]).unwrap();
        let text = String::from_utf8(bytes).unwrap();
        let mut lines = text.lines();
        assert_eq!(
            lines.next().unwrap(),
            "theorem,variant,scenario,n,t,x1,x2,alpha,beta,gamma,lhs,rhs,slack,err,admissible"
        );
        let row: Vec<&str> = lines.next().unwrap().split(',').collect();
        assert_eq!(row[0], "second");
        assert_eq!(row[1], "");
        assert_eq!(row[12], "1.0");
        assert_eq!(row[14], "true");
    }

    #[test]
    fn floats_round_trip() {
        for v in [0.1, 1.0 / 3.0, -2.5e-17, 1e300, 6.0] {
            assert_eq!(fmt_f64(v).parse::<f64>().unwrap(), v);
        }
    }

    #[test]
    fn envelope_has_schema() {
        #[derive(Serialize)]
        struct B {
            x: u8,
        }
        let v: serde_json::Value = serde_json::from_slice(&to_json("check", Some(3), B { x: 1 })).unwrap();
        assert_eq!(v["schema"], SCHEMA);
        assert_eq!(v["seed"], 3);
        assert_eq!(v["x"], 1);
    }
}
