use std::path::{Path, PathBuf};

use liyau_core::inequalities::CheckReport;
use liyau_core::initial_data::InitialData;
use liyau_core::kernel_moments::{default_step, finite_difference_ratios, ratios_from_moments};
use liyau_core::probe::{
    minimize_slack, sharpness_curve, summarize, sweep, DynFamily, Frozen, Mixture, ParamGrid,
    ProbeOptions, Realization, SingleGaussianCenter, SweepRow, SweepSpec, SweepSummary, Target,
};
use liyau_core::{
    DerivativeRatios, Engine, FourthOrderParams, InequalityParams, SecondOrderParams, Theorem, Variant,
};
use serde::Serialize;

use crate::args::{
    CheckArgs, Cli, Command, DerivativesArgs, FamilyArg, Format, PointArgs, ProbeArgs, SelftestArgs,
    SweepArgs,
};
use crate::error::CliError;
use crate::exec::Pool;
use crate::io::{emit, read_scenario, scenario_json, write_atomic};
use crate::report::{sweep_csv, to_json};
use crate::selftest::{ratio_agrees, run_all};
use crate::{EXIT_OK, EXIT_VIOLATION};

pub fn run(cli: &Cli) -> i32 {
    let verbose = cli.verbose;
    let res = match &cli.command {
        Command::Check(a) => check(a, verbose),
        Command::Derivatives(a) => derivatives(a),
        Command::Sweep(a) => sweep_cmd(a, verbose),
        Command::Probe(a) => probe(a, verbose),
        Command::Selftest(a) => selftest(a),
    };
    match res {
        Ok(code) => code,
        Err(e) => {
            eprintln!("liyau: {e}");
            e.exit_code()
        }
    }
}

fn pool(jobs: Option<usize>) -> Result<Pool, CliError> {
    if jobs == Some(0) {
        return Err(CliError::input("--jobs must be positive"));
    }
    Pool::new(jobs).map_err(|e| CliError::Engine(format!("thread pool: {e}")))
}

fn load(points: &PointArgs) -> Result<(Vec<InitialData>, Vec<Vec<f64>>), CliError> {
    let data = points.scenario.iter().map(|p| read_scenario(p)).collect::<Result<Vec<_>, _>>()?;
    Ok((data, points.points()?))
}

/// One row with its scenario index inlined next to the report fields.
#[derive(Serialize)]
struct Row<'a> {
    scenario: usize,
    #[serde(flatten)]
    report: &'a CheckReport,
}

#[derive(Serialize)]
struct ReportBody<'a> {
    theorem: Theorem,
    engine: Engine,
    scenarios: &'a [PathBuf],
    reports: Vec<Row<'a>>,
    summary: &'a SweepSummary,
}

fn build_spec(
    points: &PointArgs,
    ineq: &crate::args::InequalityArgs,
    grid: ParamGrid,
    engine: Engine,
    jobs: usize,
) -> Result<SweepSpec, CliError> {
    let (scenarios, xs) = load(points)?;
    Ok(SweepSpec {
        theorem: ineq.theorem.into(),
        variant: ineq.variant.into(),
        pair_form: ineq.pair_form.into(),
        grid,
        scenarios,
        points: xs,
        times: points.t.clone(),
        engine,
        allow_inadmissible: ineq.allow_inadmissible,
        jobs,
    })
}

fn summary_line(s: &SweepSummary) -> String {
    let mut line = format!(
        "rows {}, guaranteed {}, violations {}, min slack {:e}",
        s.rows, s.guaranteed_rows, s.violations, s.min_slack
    );
    if let Some(w) = &s.witness {
        line.push_str(&format!(" at scenario {} x {:?} t {}", w.scenario, w.report.x, w.report.t));
    }
    line
}

fn verdict(s: &SweepSummary) -> i32 {
    if s.violations > 0 {
        EXIT_VIOLATION
    } else {
        EXIT_OK
    }
}

fn check(a: &CheckArgs, verbose: u8) -> Result<i32, CliError> {
    let engine = a.engine.engine()?;
    let grid = ParamGrid::List(vec![a.inequality.scalars()?]);
    let spec = build_spec(&a.points, &a.inequality, grid, engine, 1)?;
    let rows = sweep(&spec, &liyau_core::probe::Sequential)?;
    let summary = summarize(&rows);
    let body = ReportBody {
        theorem: spec.theorem,
        engine,
        scenarios: &a.points.scenario,
        reports: rows.iter().map(|r| Row { scenario: r.scenario, report: &r.report }).collect(),
        summary: &summary,
    };
    emit(a.out.as_deref(), &to_json("check", None, body))?;
    if verbose > 0 {
        eprintln!("{}", summary_line(&summary));
    }
    Ok(verdict(&summary))
}

#[derive(Serialize)]
struct EntryDelta {
    index: Vec<u32>,
    moment: f64,
    fd: f64,
    abs_delta: f64,
    /// `None` where the oracle value is below 1e-6 in magnitude.
    rel_delta: Option<f64>,
    agrees: bool,
}

#[derive(Serialize)]
struct DerivativeRecord {
    scenario: usize,
    x: Vec<f64>,
    t: f64,
    fd_step: f64,
    ratios: DerivativeRatios,
    fd_oracle: DerivativeRatios,
    entries: Vec<EntryDelta>,
    max_abs_delta: f64,
    all_agree: bool,
}

fn derivatives(a: &DerivativesArgs) -> Result<i32, CliError> {
    let engine = a.engine.engine()?;
    let (scenarios, xs) = load(&a.points)?;
    let mut records = Vec::new();
    for (si, data) in scenarios.iter().enumerate() {
        for x in &xs {
            for &t in &a.points.t {
                let mb = engine.moments(data, x, t)?;
                let ratios = ratios_from_moments(&mb, t)?;
                let h = a.fd_step.unwrap_or_else(|| default_step(t));
                let fd = finite_difference_ratios(data, x, t, h)?;
                let entries: Vec<EntryDelta> = ratios
                    .entries()
                    .zip(fd.entries())
                    .map(|((index, m), (_, f))| EntryDelta {
                        index,
                        moment: m,
                        fd: f,
                        abs_delta: (m - f).abs(),
                        rel_delta: (f.abs() >= 1e-6).then(|| (m - f).abs() / f.abs()),
                        agrees: ratio_agrees(m, f),
                    })
                    .collect();
                records.push(DerivativeRecord {
                    scenario: si,
                    x: x.clone(),
                    t,
                    fd_step: h,
                    max_abs_delta: entries.iter().map(|e| e.abs_delta).fold(0.0, f64::max),
                    all_agree: entries.iter().all(|e| e.agrees),
                    ratios,
                    fd_oracle: fd,
                    entries,
                });
            }
        }
    }
    #[derive(Serialize)]
    struct Body<'a> {
        engine: Engine,
        scenarios: &'a [PathBuf],
        records: Vec<DerivativeRecord>,
    }
    let body = Body { engine, scenarios: &a.points.scenario, records };
    emit(a.out.as_deref(), &to_json("derivatives", None, body))?;
    Ok(EXIT_OK)
}

fn write_witness(path: Option<&Path>, data: &InitialData) -> Result<(), CliError> {
    match path {
        Some(p) => write_atomic(p, scenario_json(data).as_bytes()),
        None => Ok(()),
    }
}

fn sweep_cmd(a: &SweepArgs, verbose: u8) -> Result<i32, CliError> {
    let engine = a.engine.engine()?;
    let grid = ParamGrid::Box(a.inequality.axes()?);
    let pool = pool(a.jobs)?;
    let jobs = pool_threads(a.jobs);
    let spec = build_spec(&a.points, &a.inequality, grid, engine, jobs)?;
    let rows: Vec<SweepRow> = sweep(&spec, &pool)?;
    let summary = summarize(&rows);
    let bytes = match a.format {
        Format::Csv => sweep_csv(spec.theorem, spec.points[0].len(), &rows)?,
        Format::Json => {
            let body = ReportBody {
                theorem: spec.theorem,
                engine,
                scenarios: &a.points.scenario,
                reports: rows.iter().map(|r| Row { scenario: r.scenario, report: &r.report }).collect(),
                summary: &summary,
            };
            to_json("sweep", Some(a.seed), body)
        }
    };
    emit(a.out.as_deref(), &bytes)?;
    if let Some(w) = &summary.witness {
        write_witness(a.witness_out.as_deref(), &spec.scenarios[w.scenario])?;
    }
    if verbose > 0 || a.out.is_some() {
        eprintln!("{}", summary_line(&summary));
    }
    Ok(verdict(&summary))
}

fn pool_threads(jobs: Option<usize>) -> usize {
    jobs.unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()))
}

fn probe(a: &ProbeArgs, verbose: u8) -> Result<i32, CliError> {
    let theorem: Theorem = a.theorem.into();
    let variant: Variant = a.variant.into();
    if a.n == 0 {
        return Err(CliError::input("--n must be positive"));
    }
    if a.family == FamilyArg::Sharpness {
        let curve = sharpness_curve(a.n, a.t, a.gamma_one, &a.sigmas)?;
        let max_abs_error = curve.iter().map(|p| (p.slack - p.predicted).abs()).fold(0.0, f64::max);
        #[derive(Serialize)]
        struct Body<'a> {
            family: &'static str,
            n: usize,
            t: f64,
            gamma_one: bool,
            curve: &'a [liyau_core::probe::SharpnessPoint],
            max_abs_error: f64,
        }
        let body = Body { family: "sharpness", n: a.n, t: a.t, gamma_one: a.gamma_one, curve: &curve, max_abs_error };
        emit(a.out.as_deref(), &to_json("probe", Some(a.seed), body))?;
        return Ok(EXIT_OK);
    }
    let fourth = FourthOrderParams::new(0.0, 0.0, 0.0, 0.0, variant).with_pair_form(a.pair_form.into());
    let family: DynFamily = match a.family {
        FamilyArg::SingleGaussian => {
            if theorem != Theorem::Second {
                return Err(CliError::input("the single-gaussian family targets --theorem second"));
            }
            if !(a.sigma_min >= 0.0 && a.sigma_min <= a.sigma_max && a.sigma_max.is_finite()) {
                return Err(CliError::input("need 0 <= --sigma-min <= --sigma-max"));
            }
            Box::new(SingleGaussianCenter { n: a.n, t: a.t, sigma: (a.sigma_min, a.sigma_max) })
        }
        FamilyArg::Constant => {
            let params = match theorem {
                Theorem::Second => InequalityParams::Second(SecondOrderParams::new(0.0, 0.0, 1.0)),
                Theorem::Fourth => InequalityParams::Fourth(fourth),
            };
            Box::new(Frozen(Realization {
                data: InitialData::constant(a.n, 1.0)?,
                x: vec![0.0; a.n],
                t: a.t,
                params,
            }))
        }
        FamilyArg::Mixture => {
            let target = match theorem {
                Theorem::Second => Target::Second,
                Theorem::Fourth => Target::Fourth { variant, pair_form: a.pair_form.into() },
            };
            Box::new(Mixture::new(a.n, a.components, target)?)
        }
        FamilyArg::Sharpness => unreachable!(),
    };
    let engine = a.engine.engine()?;
    let opts = ProbeOptions { budget: a.budget, seed: a.seed, engine };
    let pool = pool(a.jobs)?;
    let result = minimize_slack(&family, &opts, &pool)?;
    write_witness(a.witness_out.as_deref(), &result.argmin.data)?;
    let guaranteed = result.report.is_guaranteed();
    let violation = result.report.is_violation();
    #[derive(Serialize)]
    struct Body<'a> {
        family: FamilyArg,
        n: usize,
        theorem: Theorem,
        variant: Option<Variant>,
        budget: usize,
        engine: Engine,
        guaranteed: bool,
        violation: bool,
        result: &'a liyau_core::probe::ProbeResult,
    }
    let body = Body {
        family: a.family,
        n: a.n,
        theorem,
        variant: (theorem == Theorem::Fourth).then_some(variant),
        budget: a.budget,
        engine,
        guaranteed,
        violation,
        result: &result,
    };
    emit(a.out.as_deref(), &to_json("probe", Some(a.seed), body))?;
    if verbose > 0 || a.out.is_some() {
        eprintln!(
            "best slack {:e} after {} evaluations (scan best {:e}){}",
            result.best_slack,
            result.iterations,
            result.scan_best,
            if violation { ", VIOLATION" } else { "" }
        );
    }
    Ok(if violation { EXIT_VIOLATION } else { EXIT_OK })
}

fn selftest(a: &SelftestArgs) -> Result<i32, CliError> {
    let pool = pool(a.jobs)?;
    let outcomes = run_all(a.seed, a.scenarios, &pool);
    for o in &outcomes {
        eprintln!("{}", o.line());
    }
    let passed = outcomes.iter().all(|o| o.passed);
    if let Some(p) = &a.out {
        #[derive(Serialize)]
        struct Body<'a> {
            passed: bool,
            outcomes: &'a [crate::selftest::Outcome],
        }
        write_atomic(p, &to_json("selftest", Some(a.seed), Body { passed, outcomes: &outcomes }))?;
    }
    Ok(if passed { EXIT_OK } else { EXIT_VIOLATION })
}
