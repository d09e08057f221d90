//! Sweeps, slack minimization and sharpness curves.
//!
//! Evaluation is pure, so parallelism is injected through [`Executor`]:
//! the core ships a sequential one and the CLI plugs in a thread pool.
//! Results never depend on the executor.

use alloc::boxed::Box;
use alloc::vec;
use alloc::vec::Vec;
use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};
use serde::{Deserialize, Serialize};

use crate::inequalities::{
    check_second_order, report_from_moments, CheckOptions, CheckReport, FourthOrderParams,
    InequalityParams, PairForm, SecondOrderParams, Theorem, Variant,
};
use crate::initial_data::{GaussianComponent, InitialData, RawInitialData};
use crate::math::{abs, powf};
use crate::quadrature::Engine;
use crate::{Error, Result, MIN_TIME};

/// Maps `f` over `0..n`, returning results in index order.
pub trait Executor: Sync {
    fn map<T: Send>(&self, n: usize, f: &(dyn Fn(usize) -> T + Sync)) -> Vec<T>;
}

#[derive(Debug, Clone, Copy, Default)]
pub struct Sequential;

impl Executor for Sequential {
    fn map<T: Send>(&self, n: usize, f: &(dyn Fn(usize) -> T + Sync)) -> Vec<T> {
        (0..n).map(f).collect()
    }
}

/// `steps` evenly spaced values from `min` to `max` inclusive.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridAxis {
    pub min: f64,
    pub max: f64,
    pub steps: usize,
}

impl GridAxis {
    pub const fn fixed(v: f64) -> Self {
        Self { min: v, max: v, steps: 1 }
    }

    pub const fn new(min: f64, max: f64, steps: usize) -> Self {
        Self { min, max, steps }
    }

    pub fn values(&self) -> Vec<f64> {
        if self.steps <= 1 {
            return vec![self.min];
        }
        let last = (self.steps - 1) as f64;
        (0..self.steps)
            .map(|i| {
                if i + 1 == self.steps {
                    self.max
                } else {
                    self.min + (self.max - self.min) * (i as f64 / last)
                }
            })
            .collect()
    }

    fn validate(&self) -> Result<()> {
        if self.steps == 0 {
            return Err(Error::InvalidSweep("grid axis with zero steps"));
        }
        if !(self.min.is_finite() && self.max.is_finite()) || self.min > self.max {
            return Err(Error::InvalidSweep("grid axis bounds must be finite with min <= max"));
        }
        Ok(())
    }
}

/// Inequality parameters to visit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ParamGrid {
    /// Cartesian product of axes: `(alpha, beta, gamma)` or `(k1, k2, k3, k4)`.
    Box(Vec<GridAxis>),
    /// Explicit parameter tuples in the same order.
    List(Vec<Vec<f64>>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSpec {
    pub theorem: Theorem,
    /// Fourth order only.
    pub variant: Variant,
    #[serde(default)]
    pub pair_form: PairForm,
    pub grid: ParamGrid,
    pub scenarios: Vec<InitialData>,
    pub points: Vec<Vec<f64>>,
    pub times: Vec<f64>,
    #[serde(default)]
    pub engine: Engine,
    #[serde(default)]
    pub allow_inadmissible: bool,
    /// Parallelism hint; honored by the executor the caller supplies.
    pub jobs: usize,
}

impl SweepSpec {
    pub fn param_arity(theorem: Theorem) -> usize {
        match theorem {
            Theorem::Second => 3,
            Theorem::Fourth => 4,
        }
    }

    fn make_params(&self, v: &[f64]) -> InequalityParams {
        match self.theorem {
            Theorem::Second => InequalityParams::Second(SecondOrderParams::new(v[0], v[1], v[2])),
            Theorem::Fourth => InequalityParams::Fourth(
                FourthOrderParams::new(v[0], v[1], v[2], v[3], self.variant)
                    .with_pair_form(self.pair_form),
            ),
        }
    }

    /// Parameter tuples in lexicographic grid order (last axis fastest).
    pub fn params(&self) -> Result<Vec<InequalityParams>> {
        let arity = Self::param_arity(self.theorem);
        let tuples = match &self.grid {
            ParamGrid::Box(axes) => {
                if axes.len() != arity {
                    return Err(Error::InvalidSweep("parameter axis count does not match theorem"));
                }
                for a in axes {
                    a.validate()?;
                }
                let values: Vec<Vec<f64>> = axes.iter().map(GridAxis::values).collect();
                cartesian(&values)
            }
            ParamGrid::List(list) => {
                if list.iter().any(|v| v.len() != arity) {
                    return Err(Error::InvalidSweep("parameter tuple length does not match theorem"));
                }
                list.clone()
            }
        };
        if tuples.is_empty() {
            return Err(Error::InvalidSweep("empty parameter grid"));
        }
        Ok(tuples.iter().map(|v| self.make_params(v)).collect())
    }

    pub fn validate(&self) -> Result<()> {
        if self.scenarios.is_empty() || self.points.is_empty() || self.times.is_empty() {
            return Err(Error::InvalidSweep("scenarios, points and times must be non-empty"));
        }
        if self.jobs == 0 {
            return Err(Error::InvalidSweep("jobs must be positive"));
        }
        if self.times.iter().any(|&t| !(t >= MIN_TIME && t.is_finite())) {
            return Err(Error::InvalidSweep("times must be finite and >= 1e-8"));
        }
        let n = self.scenarios[0].dim();
        for s in &self.scenarios {
            if s.dim() != n {
                return Err(Error::DimensionMismatch { expected: n, found: s.dim() });
            }
        }
        for p in &self.points {
            if p.len() != n {
                return Err(Error::DimensionMismatch { expected: n, found: p.len() });
            }
        }
        self.params().map(|_| ())
    }

    pub fn len(&self) -> usize {
        let np = self.params().map(|p| p.len()).unwrap_or(0);
        self.scenarios.len() * self.points.len() * self.times.len() * np
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

fn cartesian(values: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let mut out: Vec<Vec<f64>> = vec![Vec::new()];
    for axis in values {
        let mut next = Vec::with_capacity(out.len() * axis.len());
        for prefix in &out {
            for &v in axis {
                let mut row = prefix.clone();
                row.push(v);
                next.push(row);
            }
        }
        out = next;
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub scenario: usize,
    pub report: CheckReport,
}

/// Evaluate every grid point. Rows are ordered by scenario, point, time,
/// then parameters.
pub fn sweep<E: Executor>(spec: &SweepSpec, exec: &E) -> Result<Vec<SweepRow>> {
    spec.validate()?;
    let params = spec.params()?;
    let (ns, nx, nt) = (spec.scenarios.len(), spec.points.len(), spec.times.len());
    let cells = exec.map(ns * nx * nt, &|cell| -> Result<Vec<SweepRow>> {
        let (s, rest) = (cell / (nx * nt), cell % (nx * nt));
        let (xi, ti) = (rest / nt, rest % nt);
        let x = &spec.points[xi];
        let t = spec.times[ti];
        let (mb, comp) = spec.engine.moments_with_companion(&spec.scenarios[s], x, t)?;
        params
            .iter()
            .map(|p| {
                report_from_moments(&mb, comp.as_ref(), x, t, p, spec.allow_inadmissible)
                    .map(|report| SweepRow { scenario: s, report })
            })
            .collect()
    });
    let mut rows = Vec::with_capacity(spec.len());
    for c in cells {
        rows.extend(c?);
    }
    Ok(rows)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSummary {
    pub rows: usize,
    pub guaranteed_rows: usize,
    pub violations: usize,
    pub min_slack: f64,
    /// Row attaining `min_slack`.
    pub witness: Option<SweepRow>,
}

pub fn summarize(rows: &[SweepRow]) -> SweepSummary {
    let mut witness: Option<&SweepRow> = None;
    for r in rows {
        if witness.is_none_or(|w| r.report.slack < w.report.slack) {
            witness = Some(r);
        }
    }
    SweepSummary {
        rows: rows.len(),
        guaranteed_rows: rows.iter().filter(|r| r.report.is_guaranteed()).count(),
        violations: rows.iter().filter(|r| r.report.is_violation()).count(),
        min_slack: witness.map_or(f64::INFINITY, |w| w.report.slack),
        witness: witness.cloned(),
    }
}

/// A concrete evaluation point produced by a scenario family.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Realization {
    pub data: InitialData,
    pub x: Vec<f64>,
    pub t: f64,
    pub params: InequalityParams,
}

/// A bounded parameter box mapped onto evaluation points. Implementations
/// must return admissible inequality parameters for every point of the box.
pub trait ScenarioFamily: Sync {
    fn dim(&self) -> usize;
    fn bounds(&self) -> Vec<(f64, f64)>;
    fn realize(&self, p: &[f64]) -> Result<Realization>;
}

/// Single Gaussian of free width `σ₀`, evaluated at its center with the
/// classical parameters `(0, 0, 1)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SingleGaussianCenter {
    pub n: usize,
    pub t: f64,
    pub sigma: (f64, f64),
}

impl ScenarioFamily for SingleGaussianCenter {
    fn dim(&self) -> usize {
        1
    }

    fn bounds(&self) -> Vec<(f64, f64)> {
        vec![self.sigma]
    }

    fn realize(&self, p: &[f64]) -> Result<Realization> {
        let center = vec![0.0; self.n];
        Ok(Realization {
            data: InitialData::single_gaussian(center.clone(), p[0], 1.0)?,
            x: center,
            t: self.t,
            params: InequalityParams::Second(SecondOrderParams::new(0.0, 0.0, 1.0)),
        })
    }
}

/// A family with no free parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct Frozen(pub Realization);

impl ScenarioFamily for Frozen {
    fn dim(&self) -> usize {
        0
    }

    fn bounds(&self) -> Vec<(f64, f64)> {
        Vec::new()
    }

    fn realize(&self, _: &[f64]) -> Result<Realization> {
        Ok(self.0.clone())
    }
}

/// Which inequality a [`Mixture`] family targets.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "theorem")]
pub enum Target {
    Second,
    Fourth { variant: Variant, pair_form: PairForm },
}

/// Mixtures of up to three Gaussians with free weights, centers, widths,
/// evaluation point, time and inequality parameters.
///
/// Layout per component: `log₁₀ w ∈ [−1, 1]`, `μ ∈ [−5, 5]ⁿ`,
/// `log₁₀ σ ∈ [−2, 1]`. Then `x ∈ [−5, 5]ⁿ`, `log₁₀ t ∈ [−2, 1]`, then the
/// raw inequality parameters, which are projected onto the admissible set.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mixture {
    pub n: usize,
    pub components: usize,
    pub target: Target,
}

/// Largest component count for [`Mixture`].
pub const MAX_MIXTURE_COMPONENTS: usize = 3;
const K1_MAX: f64 = 4.0;
const K4_MIN: f64 = -2.0;
const K23_MARGIN: f64 = 1e-3;

impl Mixture {
    pub fn new(n: usize, components: usize, target: Target) -> Result<Self> {
        if n == 0 {
            return Err(Error::ZeroDimension);
        }
        if components == 0 || components > MAX_MIXTURE_COMPONENTS {
            return Err(Error::InvalidSweep("mixture needs 1..=3 components"));
        }
        Ok(Self { n, components, target })
    }

    fn param_bounds(&self) -> Vec<(f64, f64)> {
        let nf = self.n as f64;
        match self.target {
            Target::Second => vec![(0.0, 1.0); 3],
            Target::Fourth { .. } => {
                vec![(0.0, K1_MAX), (-1.0 / nf, 0.0), (-1.0 / nf, 0.0), (K4_MIN, 0.0)]
            }
        }
    }
}

/// Clamp and rescale `(α, β, γ)` into the admissible simplex.
pub fn project_second(n: usize, raw: &[f64]) -> SecondOrderParams {
    let mut p = SecondOrderParams::new(raw[0].max(0.0), raw[1].max(0.0), raw[2].max(0.0));
    let c = p.constraint_value(n);
    if c > 1.0 {
        p = SecondOrderParams::new(p.alpha / c, p.beta / c, p.gamma / c);
    }
    p
}

/// Clamp and rescale `(k₁..k₄)` into the admissible set of `variant`.
pub fn project_fourth(n: usize, raw: &[f64], variant: Variant) -> FourthOrderParams {
    let nf = n as f64;
    let (mut k2, mut k3) = (raw[1].min(0.0), raw[2].min(0.0));
    let floor = -(1.0 - K23_MARGIN) / nf;
    if k2 + k3 < floor {
        let s = floor / (k2 + k3);
        k2 *= s;
        k3 *= s;
    }
    let k1 = raw[0].max(0.0);
    let mut k4 = raw[3].min(0.0);
    let c = FourthOrderParams::k4_pair_constant(variant, n);
    if c > 0.0 && k1 < -c * k4 {
        k4 = -k1 / c;
    }
    FourthOrderParams::new(k1, k2, k3, k4, variant)
}

impl ScenarioFamily for Mixture {
    fn dim(&self) -> usize {
        self.components * (self.n + 2) + self.n + 1 + self.param_bounds().len()
    }

    fn bounds(&self) -> Vec<(f64, f64)> {
        let mut b = Vec::with_capacity(self.dim());
        for _ in 0..self.components {
            b.push((-1.0, 1.0));
            b.extend(core::iter::repeat_n((-5.0, 5.0), self.n));
            b.push((-2.0, 1.0));
        }
        b.extend(core::iter::repeat_n((-5.0, 5.0), self.n));
        b.push((-2.0, 1.0));
        b.extend(self.param_bounds());
        b
    }

    fn realize(&self, p: &[f64]) -> Result<Realization> {
        let n = self.n;
        let mut it = p.iter().copied();
        let mut next = || it.next().ok_or(Error::DimensionMismatch { expected: self.dim(), found: p.len() });
        let mut components = Vec::with_capacity(self.components);
        for _ in 0..self.components {
            let weight = powf(10.0, next()?);
            let center = (0..n).map(|_| next()).collect::<Result<Vec<_>>>()?;
            let sigma = powf(10.0, next()?);
            components.push(GaussianComponent { weight, center, sigma });
        }
        let x = (0..n).map(|_| next()).collect::<Result<Vec<_>>>()?;
        let t = powf(10.0, next()?);
        let raw: Vec<f64> = (0..self.param_bounds().len()).map(|_| next()).collect::<Result<_>>()?;
        let params = match self.target {
            Target::Second => InequalityParams::Second(project_second(n, &raw)),
            Target::Fourth { variant, pair_form } => {
                InequalityParams::Fourth(project_fourth(n, &raw, variant).with_pair_form(pair_form))
            }
        };
        let data = InitialData::validate(RawInitialData { n, constant_offset: 0.0, components })?;
        Ok(Realization { data, x, t, params })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProbeOptions {
    pub budget: usize,
    pub seed: u64,
    pub engine: Engine,
}

/// Minimum slack found by [`minimize_slack`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbeResult {
    pub best_slack: f64,
    /// Family parameters at the minimum.
    pub argmin_params: Vec<f64>,
    pub argmin: Realization,
    pub report: CheckReport,
    /// Best slack among the pre-scan points.
    pub scan_best: f64,
    pub iterations: usize,
    pub restarts: usize,
    pub converged: bool,
    /// `(evaluation index, best slack so far)` at each improvement.
    pub history: Vec<(usize, f64)>,
    pub seed: u64,
}

pub const MIN_BUDGET: usize = 50;
const SIMPLEX_STEP: f64 = 0.1;
const F_TOL: f64 = 1e-13;
const X_TOL: f64 = 1e-9;

struct Objective<'a, F: ScenarioFamily + ?Sized> {
    family: &'a F,
    bounds: Vec<(f64, f64)>,
    engine: Engine,
}

impl<F: ScenarioFamily + ?Sized> Objective<'_, F> {
    fn to_params(&self, u: &[f64]) -> Vec<f64> {
        u.iter()
            .zip(&self.bounds)
            .map(|(&ui, &(lo, hi))| if ui >= 1.0 { hi } else { lo + (hi - lo) * ui })
            .collect()
    }

    fn report(&self, u: &[f64]) -> Result<CheckReport> {
        let r = self.family.realize(&self.to_params(u))?;
        let opts = CheckOptions { engine: self.engine, allow_inadmissible: false };
        let (mb, comp) = opts.engine.moments_with_companion(&r.data, &r.x, r.t)?;
        report_from_moments(&mb, comp.as_ref(), &r.x, r.t, &r.params, false)
    }

    /// Failed or non-finite evaluations are treated as +∞.
    fn eval(&self, u: &[f64]) -> f64 {
        match self.report(u) {
            Ok(r) if r.slack.is_finite() => r.slack,
            _ => f64::INFINITY,
        }
    }
}

fn uniform(rng: &mut ChaCha8Rng) -> f64 {
    (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

fn clamp01(v: &mut [f64]) {
    for x in v {
        *x = x.clamp(0.0, 1.0);
    }
}

/// Pre-scan points in normalized coordinates: a full grid when the budget
/// allows at least two levels per axis, else seeded uniform samples.
fn scan_points(d: usize, count: usize, rng: &mut ChaCha8Rng) -> Vec<Vec<f64>> {
    if d == 0 {
        return vec![Vec::new()];
    }
    let mut m = 1usize;
    while (m + 1).checked_pow(d as u32).is_some_and(|v| v <= count) {
        m += 1;
    }
    if m >= 2 {
        let axis: Vec<f64> = (0..m).map(|i| i as f64 / (m - 1) as f64).collect();
        cartesian(&vec![axis; d])
    } else {
        let mut pts = vec![vec![0.5; d]];
        while pts.len() < count {
            pts.push((0..d).map(|_| uniform(rng)).collect());
        }
        pts
    }
}

struct RestartOutcome {
    best_u: Vec<f64>,
    best: f64,
    /// Slack after each evaluation.
    trace: Vec<f64>,
    converged: bool,
}

fn nelder_mead<F: ScenarioFamily + ?Sized>(
    obj: &Objective<'_, F>,
    start: &[f64],
    budget: usize,
) -> RestartOutcome {
    let d = start.len();
    let mut trace = Vec::with_capacity(budget);
    let f = |u: &[f64], trace: &mut Vec<f64>| {
        let v = obj.eval(u);
        trace.push(v);
        v
    };
    let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(d + 1);
    simplex.push((start.to_vec(), f(start, &mut trace)));
    for i in 0..d {
        if trace.len() >= budget {
            break;
        }
        let mut v = start.to_vec();
        v[i] = if v[i] + SIMPLEX_STEP <= 1.0 { v[i] + SIMPLEX_STEP } else { v[i] - SIMPLEX_STEP };
        let fv = f(&v, &mut trace);
        simplex.push((v, fv));
    }
    let mut converged = false;
    while simplex.len() == d + 1 && trace.len() + 2 <= budget {
        simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
        let (fbest, fworst) = (simplex[0].1, simplex[d].1);
        let size = simplex[1..]
            .iter()
            .flat_map(|(v, _)| v.iter().zip(&simplex[0].0).map(|(a, b)| abs(a - b)))
            .fold(0.0, f64::max);
        if (fworst - fbest).abs() <= F_TOL * (1.0 + fbest.abs()) && size <= X_TOL || size <= X_TOL * 1e-3 {
            converged = true;
            break;
        }
        let mut centroid = vec![0.0; d];
        for (v, _) in &simplex[..d] {
            for (c, x) in centroid.iter_mut().zip(v) {
                *c += x / d as f64;
            }
        }
        let along = |coef: f64| -> Vec<f64> {
            let mut p: Vec<f64> =
                centroid.iter().zip(&simplex[d].0).map(|(c, w)| c + coef * (w - c)).collect();
            clamp01(&mut p);
            p
        };
        let xr = along(-1.0);
        let fr = f(&xr, &mut trace);
        if fr < simplex[0].1 {
            let xe = along(-2.0);
            let fe = f(&xe, &mut trace);
            simplex[d] = if fe < fr { (xe, fe) } else { (xr, fr) };
        } else if fr < simplex[d - 1].1 {
            simplex[d] = (xr, fr);
        } else {
            let (xc, fc) = if fr < simplex[d].1 {
                let xc = along(-0.5);
                let fc = f(&xc, &mut trace);
                (xc, fc)
            } else {
                let xc = along(0.5);
                let fc = f(&xc, &mut trace);
                (xc, fc)
            };
            if fc < simplex[d].1.min(fr) {
                simplex[d] = (xc, fc);
            } else {
                // shrink toward the best vertex
                let best = simplex[0].0.clone();
                for k in 1..=d {
                    if trace.len() >= budget {
                        break;
                    }
                    let v: Vec<f64> =
                        best.iter().zip(&simplex[k].0).map(|(b, x)| b + 0.5 * (x - b)).collect();
                    let fv = f(&v, &mut trace);
                    simplex[k] = (v, fv);
                }
            }
        }
    }
    simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
    let (best_u, best) = simplex.swap_remove(0);
    RestartOutcome { best_u, best, trace, converged }
}

/// Derivative-free local search for the smallest slack over a family.
///
/// A coarse pre-scan seeds the first of `max(4, budget/200)` Nelder–Mead
/// restarts; the others start at seeded random points. Restarts run through
/// `exec`. The result is deterministic in `opts.seed` and makes no claim of
/// global optimality.
pub fn minimize_slack<F: ScenarioFamily + ?Sized, E: Executor>(
    family: &F,
    opts: &ProbeOptions,
    exec: &E,
) -> Result<ProbeResult> {
    if opts.budget < MIN_BUDGET {
        return Err(Error::BudgetTooSmall(opts.budget));
    }
    let bounds = family.bounds();
    let d = family.dim();
    if bounds.len() != d || bounds.iter().any(|&(lo, hi)| !(lo <= hi && lo.is_finite() && hi.is_finite())) {
        return Err(Error::InvalidSweep("family bounds must be finite with lo <= hi"));
    }
    let obj = Objective { family, bounds, engine: opts.engine };
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);

    let scan = scan_points(d, (opts.budget / 4).max(1), &mut rng);
    let scan_vals: Vec<f64> = exec.map(scan.len(), &|i| obj.eval(&scan[i]));
    let mut history = Vec::new();
    let mut best = f64::INFINITY;
    let mut best_u = scan[0].clone();
    for (i, (&v, u)) in scan_vals.iter().zip(&scan).enumerate() {
        if v < best {
            best = v;
            best_u = u.clone();
            history.push((i + 1, v));
        }
    }
    let scan_best = best;
    let mut evals = scan.len();
    let restarts = if d == 0 { 0 } else { 4usize.max(opts.budget / 200) };
    let mut converged = d == 0;

    if restarts > 0 && opts.budget > evals {
        let per = (opts.budget - evals) / restarts;
        let starts: Vec<Vec<f64>> = (0..restarts)
            .map(|r| if r == 0 { best_u.clone() } else { (0..d).map(|_| uniform(&mut rng)).collect() })
            .collect();
        let outcomes = exec.map(restarts, &|r| nelder_mead(&obj, &starts[r], per.max(d + 3)));
        for o in outcomes {
            for &v in &o.trace {
                evals += 1;
                if v < best {
                    best = v;
                    history.push((evals, v));
                }
            }
            if o.best <= best && o.best < f64::INFINITY {
                best_u = o.best_u;
                converged = o.converged;
            }
        }
    }

    let report = obj.report(&best_u)?;
    let params = obj.to_params(&best_u);
    let argmin = family.realize(&params)?;
    Ok(ProbeResult {
        best_slack: report.slack,
        argmin_params: params,
        argmin,
        report,
        scan_best,
        iterations: evals,
        restarts,
        converged,
        history,
        seed: opts.seed,
    })
}

/// Boxed family for dynamic dispatch from the CLI.
pub type DynFamily = Box<dyn ScenarioFamily>;

impl ScenarioFamily for DynFamily {
    fn dim(&self) -> usize {
        (**self).dim()
    }
    fn bounds(&self) -> Vec<(f64, f64)> {
        (**self).bounds()
    }
    fn realize(&self, p: &[f64]) -> Result<Realization> {
        (**self).realize(p)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SharpnessPoint {
    pub sigma0: f64,
    pub slack: f64,
    pub predicted: f64,
}

/// Second-order slack of single-Gaussian data at its center, against
/// `nσ₀²/(2t(σ₀²+2t))`. `σ₀ = 0` uses the point mass. With `gamma_one` the
/// parameters are `(0, 0, 1)`, otherwise `(0, 0, 0)`; the gradient vanishes
/// at the center so both give the same slack.
pub fn sharpness_curve(n: usize, t: f64, gamma_one: bool, sigmas: &[f64]) -> Result<Vec<SharpnessPoint>> {
    let p = SecondOrderParams::new(0.0, 0.0, if gamma_one { 1.0 } else { 0.0 });
    let opts = CheckOptions::default();
    let center = vec![0.0; n];
    sigmas
        .iter()
        .map(|&s| {
            let data = InitialData::single_gaussian(center.clone(), s, 1.0)?;
            let r = check_second_order(&data, &center, t, &p, &opts)?;
            let s2 = s * s;
            Ok(SharpnessPoint {
                sigma0: s,
                slack: r.slack,
                predicted: n as f64 * s2 / (2.0 * t * (s2 + 2.0 * t)),
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::inequalities::check_second_order;

    fn const_spec(theorem: Theorem, grid: ParamGrid) -> SweepSpec {
        SweepSpec {
            theorem,
            variant: Variant::Rederived,
            pair_form: PairForm::SquaredSum,
            grid,
            scenarios: vec![InitialData::constant(2, 1.0).unwrap()],
            points: vec![vec![0.0, 0.0]],
            times: vec![1.0],
            engine: Engine::ClosedForm,
            allow_inadmissible: false,
            jobs: 1,
        }
    }

    #[test]
    fn grid_axis_values() {
        assert_eq!(GridAxis::fixed(0.3).values(), vec![0.3]);
        assert_eq!(GridAxis::new(0.0, 1.0, 3).values(), vec![0.0, 0.5, 1.0]);
        assert!(GridAxis::new(1.0, 0.0, 3).validate().is_err());
    }

    #[test]
    fn one_point_sweep_matches_check() {
        let g = InitialData::single_gaussian(vec![0.2, -0.1], 0.7, 2.0).unwrap();
        let mut spec = const_spec(Theorem::Second, ParamGrid::List(vec![vec![0.1, 0.2, 0.3]]));
        spec.scenarios = vec![g.clone()];
        spec.points = vec![vec![0.5, 0.4]];
        spec.times = vec![0.6];
        let rows = sweep(&spec, &Sequential).unwrap();
        let direct = check_second_order(
            &g,
            &[0.5, 0.4],
            0.6,
            &SecondOrderParams::new(0.1, 0.2, 0.3),
            &CheckOptions::default(),
        )
        .unwrap();
        assert_eq!(rows.len(), 1);
        assert_eq!(rows[0].report, direct);
    }

    #[test]
    fn boundary_sweep_point_mass_is_sharp() {
        // (n−1)(α+β)+γ = 1 with n = 2
        let list: Vec<Vec<f64>> = (0..11)
            .map(|i| {
                let a = i as f64 / 10.0;
                let (alpha, beta) = (0.5 * a, 0.25 * (1.0 - a));
                vec![alpha, beta, 1.0 - alpha - beta]
            })
            .collect();
        let mut spec = const_spec(Theorem::Second, ParamGrid::List(list));
        spec.scenarios = vec![InitialData::point_mass(vec![0.3, -0.2], 1.0).unwrap()];
        spec.points = vec![vec![0.3, -0.2]];
        let rows = sweep(&spec, &Sequential).unwrap();
        assert_eq!(rows.len(), 11);
        for r in &rows {
            let v = r.report.params.values();
            assert!((v[0] + v[1] + v[2] - 1.0).abs() < 1e-15);
            assert!(r.report.slack.abs() <= 1e-12);
        }
    }

    #[test]
    fn rederived_k3_sweep_holds() {
        let n = 2.0;
        let grid = ParamGrid::Box(vec![
            GridAxis::fixed(0.0),
            GridAxis::fixed(0.0),
            GridAxis::new(-1.0 / (2.0 * n) + 1e-6, 0.0, 9),
            GridAxis::fixed(0.0),
        ]);
        let mut spec = const_spec(Theorem::Fourth, grid);
        spec.scenarios.push(InitialData::single_gaussian(vec![1.0, 0.0], 0.5, 1.0).unwrap());
        spec.points.push(vec![0.3, 1.2]);
        spec.times = vec![0.2, 1.0];
        let rows = sweep(&spec, &Sequential).unwrap();
        assert_eq!(rows.len(), 2 * 2 * 2 * 9);
        assert!(rows.iter().all(|r| r.report.slack >= -1e-8));
        // ordering: scenario, point, time, params
        assert_eq!(rows[9].report.t, 1.0);
        assert_eq!(rows[18].report.x, vec![0.3, 1.2]);
        assert_eq!(rows[36].scenario, 1);
    }

    #[test]
    fn sweep_rejects_bad_specs() {
        let mut spec = const_spec(Theorem::Second, ParamGrid::Box(vec![GridAxis::fixed(0.0); 4]));
        assert!(matches!(sweep(&spec, &Sequential), Err(Error::InvalidSweep(_))));
        spec.grid = ParamGrid::List(vec![vec![0.0, 0.0, 1.0]]);
        spec.times = vec![1e-9];
        assert!(sweep(&spec, &Sequential).is_err());
        spec.times = vec![1.0];
        spec.points = vec![vec![0.0]];
        assert!(matches!(sweep(&spec, &Sequential), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn projections_land_in_admissible_sets() {
        for n in 1..5 {
            let p = project_second(n, &[0.9, 0.8, 0.7]);
            assert!(crate::inequalities::admissible_second(n, &p));
            for v in [Variant::AsStated, Variant::Rederived] {
                let k = project_fourth(n, &[0.5, -1.0, -1.0, -2.0], v);
                assert!(k.admissible(n), "{n} {v:?} {k:?}");
            }
        }
    }

    #[test]
    fn budget_floor() {
        let f = SingleGaussianCenter { n: 1, t: 1.0, sigma: (0.01, 2.0) };
        let o = ProbeOptions { budget: 49, seed: 1, engine: Engine::ClosedForm };
        assert_eq!(minimize_slack(&f, &o, &Sequential).unwrap_err(), Error::BudgetTooSmall(49));
    }

    #[test]
    fn single_gaussian_probe_reaches_lower_bound() {
        let t = 1.0;
        let f = SingleGaussianCenter { n: 1, t, sigma: (0.01, 2.0) };
        let o = ProbeOptions { budget: 400, seed: 7, engine: Engine::ClosedForm };
        let r = minimize_slack(&f, &o, &Sequential).unwrap();
        let s = r.argmin_params[0];
        let predicted = s * s / (2.0 * t * (s * s + 2.0 * t));
        assert!((r.best_slack - predicted).abs() <= 1e-8);
        assert!((s - 0.01).abs() < 1e-6);
        assert!(r.best_slack <= r.scan_best);
        let again = minimize_slack(&f, &o, &Sequential).unwrap();
        assert_eq!(r, again);
    }

    #[test]
    fn frozen_constant_probe() {
        let p = InequalityParams::Second(SecondOrderParams::new(0.0, 0.0, 1.0));
        let f = Frozen(Realization {
            data: InitialData::constant(3, 2.0).unwrap(),
            x: vec![0.0; 3],
            t: 0.5,
            params: p,
        });
        let o = ProbeOptions { budget: 50, seed: 0, engine: Engine::ClosedForm };
        let r = minimize_slack(&f, &o, &Sequential).unwrap();
        assert_eq!(r.best_slack, 3.0);
    }

    #[test]
    fn mixture_probe_second_order_never_violates() {
        let f = Mixture::new(2, 2, Target::Second).unwrap();
        let o = ProbeOptions { budget: 600, seed: 3, engine: Engine::ClosedForm };
        let r = minimize_slack(&f, &o, &Sequential).unwrap();
        assert!(r.best_slack >= -1e-8, "{}", r.best_slack);
        let again = f.realize(&r.argmin_params).unwrap();
        let re = check_second_order(
            &again.data,
            &again.x,
            again.t,
            match &again.params {
                InequalityParams::Second(p) => p,
                _ => unreachable!(),
            },
            &CheckOptions::default(),
        )
        .unwrap();
        assert!((re.slack - r.best_slack).abs() <= 1e-10);
    }

    #[test]
    fn sharpness_examples() {
        let t = 0.8;
        let c = sharpness_curve(2, t, true, &[0.0, 0.1, 1.0, (2.0 * t).sqrt(), 2.0]).unwrap();
        assert!(c[0].slack.abs() < 1e-12);
        assert!((c[3].predicted - 2.0 / (4.0 * t)).abs() < 1e-14);
        for w in c.windows(2) {
            assert!(w[1].slack > w[0].slack);
        }
        for p in &c {
            assert!((p.slack - p.predicted).abs() <= 1e-10);
        }
        assert!(sharpness_curve(1, 1.0, true, &[-0.1]).is_err());
    }
}
