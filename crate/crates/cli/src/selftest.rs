//! Oracle battery behind `liyau selftest`.

use liyau_core::initial_data::closed_form_moments;
use liyau_core::kernel_moments::{
    default_step, finite_difference_ratios, heat_residual, jensen_gap, ordered_pair_square_sum,
    ratios_from_moments,
};
use liyau_core::probe::Executor;
use liyau_core::quadrature::{gauss_hermite_rule, quadrature_moments};
use liyau_core::{InitialData, QuadratureSpec};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::scenarios::{scenario_set, Sample};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Outcome {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

impl Outcome {
    fn new(name: &'static str, passed: bool, detail: String) -> Self {
        Self { name, passed, detail }
    }

    pub fn line(&self) -> String {
        format!("[{}] {}: {}", if self.passed { "PASS" } else { "FAIL" }, self.name, self.detail)
    }
}

/// Agreement rule for derivative ratios: relative 1e-5, or absolute 1e-8
/// where the reference is below 1e-6 in magnitude.
pub fn ratio_agrees(moment: f64, fd: f64) -> bool {
    let d = (moment - fd).abs();
    d <= 1e-5 * fd.abs() || (fd.abs() < 1e-6 && d <= 1e-8)
}

fn hermite_moment(d: u32) -> f64 {
    if d % 2 == 1 {
        0.0
    } else {
        liyau_core::math::lgamma((d as f64 + 1.0) / 2.0).exp()
    }
}

/// Every Gauss–Hermite rule in `orders` integrates `zᵈ`, `d < 2·order`, to relative 1e-12.
pub fn quadrature_exactness(orders: &[usize]) -> Outcome {
    let mut worst = 0.0f64;
    for &order in orders {
        let r = match gauss_hermite_rule(order) {
            Ok(r) => r,
            Err(e) => return Outcome::new("quadrature exactness", false, e.to_string()),
        };
        for d in 0..(2 * order as i32) {
            let q = r.integrate(|z| z.powi(d));
            let err = if d % 2 == 0 {
                (q - hermite_moment(d as u32)).abs() / hermite_moment(d as u32)
            } else {
                q.abs() / r.integrate(|z| z.abs().powi(d))
            };
            worst = worst.max(err);
        }
    }
    Outcome::new("quadrature exactness", worst <= 1e-12, format!("max rel err {worst:.2e}, orders {orders:?}"))
}

/// Quadrature `u` against the closed form, relative 1e-10.
pub fn normalization(samples: &[Sample]) -> Outcome {
    let spec = QuadratureSpec::default();
    let mut worst = 0.0f64;
    for s in samples {
        let (Ok(q), Ok(c)) = (quadrature_moments(&s.data, &s.x, s.t, &spec), closed_form_moments(&s.data, &s.x, s.t))
        else {
            return Outcome::new("measure normalization", false, "evaluation failed".into());
        };
        worst = worst.max((q.log_u - c.log_u).abs());
    }
    Outcome::new("measure normalization", worst <= 1e-10, format!("max |ln u_quad - ln u_exact| {worst:.2e} over {} points", samples.len()))
}

/// Moment-based ratios against Richardson finite differences.
pub fn derivative_oracle<E: Executor>(samples: &[Sample], exec: &E) -> Outcome {
    let results = exec.map(samples.len(), &|i| {
        let s = &samples[i];
        let m = ratios_from_moments(&closed_form_moments(&s.data, &s.x, s.t)?, s.t)?;
        let fd = finite_difference_ratios(&s.data, &s.x, s.t, default_step(s.t))?;
        let mut bad = 0usize;
        let mut worst = 0.0f64;
        let mut count = 0usize;
        for ((_, a), (_, b)) in m.entries().zip(fd.entries()) {
            count += 1;
            if !ratio_agrees(a, b) {
                bad += 1;
            }
            worst = worst.max((a - b).abs() / b.abs().max(1e-6));
        }
        Ok::<_, liyau_core::Error>((bad, worst, count))
    });
    let (mut bad, mut worst, mut count) = (0, 0.0f64, 0);
    for r in results {
        match r {
            Ok((b, w, c)) => {
                bad += b;
                worst = worst.max(w);
                count += c;
            }
            Err(e) => return Outcome::new("derivative ratios vs finite differences", false, e.to_string()),
        }
    }
    Outcome::new(
        "derivative ratios vs finite differences",
        bad == 0,
        format!("{count} entries over {} scenarios, {bad} outside tolerance, max scaled err {worst:.2e}", samples.len()),
    )
}

/// Canonical heat-flow states at `t = 1`: single Gaussians of several widths
/// and point masses, evaluated within distance 2 of the center.
pub fn heat_cases() -> Vec<Sample> {
    let mut out = Vec::new();
    for n in 1..=3usize {
        let center: Vec<f64> = (0..n).map(|i| 0.25 * i as f64).collect();
        for sigma in [0.0, 0.5, 1.0, 2.0] {
            let data = InitialData::single_gaussian(center.clone(), sigma, 1.0).expect("valid");
            for r in [0.3, 1.0, 2.0] {
                let mut x = center.clone();
                x[0] += r;
                out.push(Sample { data: data.clone(), x, t: 1.0 });
            }
        }
    }
    out
}

/// Central time difference minus the Laplacian, relative to `u`, at `h = 1e-3`.
pub fn heat_equation(samples: &[Sample]) -> Outcome {
    let mut worst = 0.0f64;
    for s in samples {
        match heat_residual(&s.data, &s.x, s.t, 1e-3) {
            Ok(r) => worst = worst.max(r.abs()),
            Err(e) => return Outcome::new("heat residual", false, e.to_string()),
        }
    }
    Outcome::new(
        "heat residual",
        worst <= 1e-5,
        format!("max |residual|/u {worst:.2e} at h = 1e-3 over {} states", samples.len()),
    )
}

pub fn pair_identity(rng: &mut ChaCha8Rng, trials: usize) -> Outcome {
    let mut worst = 0.0f64;
    for _ in 0..trials {
        let n = rng.random_range(1..=8usize);
        let z: Vec<f64> = (0..n).map(|_| rng.random_range(-5.0..5.0)).collect();
        let norm2: f64 = z.iter().map(|v| v * v).sum();
        let expect = 2.0 * (n as f64 - 1.0) * norm2;
        worst = worst.max((ordered_pair_square_sum(&z) - expect).abs() / expect.max(1.0));
    }
    Outcome::new("ordered pair identity", worst <= 1e-12, format!("max rel err {worst:.2e}, n <= 8"))
}

pub fn jensen(rng: &mut ChaCha8Rng, trials: usize) -> Outcome {
    let mut worst = f64::INFINITY;
    for _ in 0..trials {
        let k = rng.random_range(1..=12usize);
        let mut g: Vec<f64> = (0..k).map(|_| rng.random_range(0.0..1.0)).collect();
        let total: f64 = g.iter().sum();
        if total == 0.0 {
            continue;
        }
        g.iter_mut().for_each(|v| *v /= total);
        let f: Vec<f64> = (0..k).map(|_| rng.random_range(-10.0..10.0)).collect();
        for p in [1.0, 1.5, 2.0, 3.0] {
            worst = worst.min(jensen_gap(&g, &f, p));
        }
    }
    Outcome::new("jensen gap", worst >= -1e-12, format!("min gap {worst:.2e}"))
}

/// The full battery in a fixed order.
pub fn run_all<E: Executor>(seed: u64, scenarios: usize, exec: &E) -> Vec<Outcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let samples = scenario_set(&mut rng, scenarios);
    vec![
        quadrature_exactness(&[2, 5, 10, 20, 40, 64, 100, 128]),
        normalization(&samples),
        derivative_oracle(&samples, exec),
        heat_equation(&heat_cases()),
        pair_identity(&mut rng, 1000),
        jensen(&mut rng, 1000),
    ]
}
