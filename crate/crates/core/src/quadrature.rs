//! Tensor-product integration of `∫ f dν_{x,t}`.
//!
//! Two independent engines share one discretization layout: every additive
//! term of `u` (the constant and each Gaussian component) factorizes over
//! axes, so each term gets its own per-axis rule of `(yⱼ, ln wⱼ)` pairs. The
//! numerator and the normalization `u` are accumulated on the same nodes.
//!
//! * Gauss–Hermite takes as the `e^{−z²}` weight whichever Gaussian factor of
//!   the term is narrower: the heat kernel (`y = x − 2√t·z`) or the
//!   component itself (`y = μ + √2σ·z`). The other factor stays smooth on
//!   the node scale.
//! * The trapezoid oracle integrates the box `|yᵢ − xᵢ| ≤ R·√(4t)` with a
//!   uniform composite rule.

use alloc::vec;
use alloc::vec::Vec;
use serde::{Deserialize, Serialize};

use crate::initial_data::{check_time, closed_form_moments, InitialData, MomentBundle};
use crate::linalg::SymMatrix;
use crate::math::{abs, exp, ln, log_sum_exp, sqrt, PI};
use crate::{Error, Result};

/// Largest order accepted by [`gauss_hermite_rule`].
pub const MAX_ORDER: usize = 128;
/// Largest dimension handled by the tensor-product engines.
pub const MAX_TENSOR_DIM: usize = 4;
/// Order increment used for the Gauss–Hermite error estimate.
pub const REFINE_ORDER_STEP: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum QuadEngine {
    GaussHermite,
    Trapezoid,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureSpec {
    pub engine: QuadEngine,
    pub order_per_axis: usize,
    /// Box half-width in units of `√(4t)`.
    pub truncation_radius: f64,
    pub steps_per_axis: usize,
    pub refine: bool,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self {
            engine: QuadEngine::GaussHermite,
            order_per_axis: 40,
            truncation_radius: 8.0,
            steps_per_axis: 512,
            refine: true,
        }
    }
}

impl QuadratureSpec {
    pub fn gauss_hermite(order: usize) -> Self {
        Self { engine: QuadEngine::GaussHermite, order_per_axis: order, ..Self::default() }
    }

    pub fn trapezoid(radius: f64, steps: usize) -> Self {
        Self {
            engine: QuadEngine::Trapezoid,
            truncation_radius: radius,
            steps_per_axis: steps,
            ..Self::default()
        }
    }

    pub fn with_refine(mut self, refine: bool) -> Self {
        self.refine = refine;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.order_per_axis < 2 {
            return Err(Error::InvalidQuadratureSpec("order_per_axis must be >= 2"));
        }
        if self.order_per_axis > MAX_ORDER {
            return Err(Error::OrderTooLarge(self.order_per_axis));
        }
        if self.steps_per_axis < 8 {
            return Err(Error::InvalidQuadratureSpec("steps_per_axis must be >= 8"));
        }
        if !(self.truncation_radius >= 4.0 && self.truncation_radius.is_finite()) {
            return Err(Error::InvalidQuadratureSpec("truncation_radius must be >= 4"));
        }
        Ok(())
    }

    /// The coarser/finer companion used for the error estimate.
    fn companion(&self) -> Self {
        let mut c = *self;
        match self.engine {
            QuadEngine::GaussHermite => c.order_per_axis += REFINE_ORDER_STEP,
            QuadEngine::Trapezoid => c.steps_per_axis = (self.steps_per_axis / 2).max(4),
        }
        c
    }
}

/// How moments are produced for an evaluation point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum Engine {
    #[default]
    ClosedForm,
    Quadrature(QuadratureSpec),
}

impl Engine {
    pub fn moments(&self, data: &InitialData, x: &[f64], t: f64) -> Result<MomentBundle> {
        Ok(self.moments_with_companion(data, x, t)?.0)
    }

    /// Moments plus, for refined quadrature, the companion-rule bundle the
    /// error estimate was taken from. Callers propagate the estimate through
    /// nonlinear functions of the moments by evaluating both.
    pub fn moments_with_companion(
        &self,
        data: &InitialData,
        x: &[f64],
        t: f64,
    ) -> Result<(MomentBundle, Option<MomentBundle>)> {
        match self {
            Engine::ClosedForm => Ok((closed_form_moments(data, x, t)?, None)),
            Engine::Quadrature(spec) => quadrature_moments_with_companion(data, x, t, spec),
        }
    }
}

/// Nodes and weights for `∫ h(z) e^{−z²} dz` on ℝ.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussHermiteRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussHermiteRule {
    pub fn order(&self) -> usize {
        self.nodes.len()
    }

    pub fn integrate(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.nodes.iter().zip(&self.weights).map(|(&z, &w)| w * f(z)).sum()
    }
}

/// Gauss–Hermite rule of the given order, exact for degree ≤ 2·order − 1.
pub fn gauss_hermite_rule(order: usize) -> Result<GaussHermiteRule> {
    if order == 0 {
        return Err(Error::InvalidQuadratureSpec("order must be >= 1"));
    }
    if order > MAX_ORDER {
        return Err(Error::OrderTooLarge(order));
    }
    Ok(hermite_rule_unchecked(order))
}

/// Newton iteration on the orthonormal Hermite recurrence, with the usual
/// asymptotic starting guesses for the largest roots.
pub(crate) fn hermite_rule_unchecked(order: usize) -> GaussHermiteRule {
    let n = order;
    let pim4 = 1.0 / libm::pow(PI, 0.25);
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let half = n.div_ceil(2);
    let nf = n as f64;
    let mut z = 0.0_f64;
    for i in 0..half {
        z = match i {
            0 => sqrt(2.0 * nf + 1.0) - 1.85575 * libm::pow(2.0 * nf + 1.0, -1.0 / 6.0),
            1 => z - 1.14 * libm::pow(nf, 0.426) / z,
            2 => 1.86 * z - 0.86 * nodes[0],
            3 => 1.91 * z - 0.91 * nodes[1],
            _ => 2.0 * z - nodes[i - 2],
        };
        let mut pp = 0.0;
        for _ in 0..200 {
            let mut p1 = pim4;
            let mut p2 = 0.0;
            for j in 1..=n {
                let p3 = p2;
                p2 = p1;
                let jf = j as f64;
                p1 = z * sqrt(2.0 / jf) * p2 - sqrt((jf - 1.0) / jf) * p3;
            }
            pp = sqrt(2.0 * nf) * p2;
            let dz = p1 / pp;
            z -= dz;
            if abs(dz) <= 1e-15 * abs(z).max(1e-300) {
                break;
            }
        }
        nodes[i] = z;
        nodes[n - 1 - i] = -z;
        weights[i] = 2.0 / (pp * pp);
        weights[n - 1 - i] = weights[i];
    }
    if n % 2 == 1 {
        // The middle root is exactly zero.
        nodes[n / 2] = 0.0;
    }
    // Ascending order.
    nodes.reverse();
    weights.reverse();
    GaussHermiteRule { nodes, weights }
}

/// One-dimensional discretization of one term along one axis.
struct AxisRule {
    /// Integration points `yⱼ`.
    y: Vec<f64>,
    /// `ln` of everything multiplying `f(y)` except the term amplitude.
    log_w: Vec<f64>,
}

/// All per-axis rules of one additive term of `u`.
struct TermRule {
    log_amp: f64,
    axes: Vec<AxisRule>,
}

fn check_inputs(data: &InitialData, x: &[f64], t: f64, spec: &QuadratureSpec) -> Result<()> {
    spec.validate()?;
    check_time(t)?;
    data.check_point(x)?;
    if data.is_closed_form_only() {
        return Err(Error::ClosedFormOnlyData);
    }
    if data.dim() > MAX_TENSOR_DIM {
        return Err(Error::DimensionTooLarge(data.dim()));
    }
    Ok(())
}

fn build_terms(data: &InitialData, x: &[f64], t: f64, spec: &QuadratureSpec) -> Vec<TermRule> {
    let n = data.dim();
    let gh = match spec.engine {
        QuadEngine::GaussHermite => Some(hermite_rule_unchecked(spec.order_per_axis)),
        QuadEngine::Trapezoid => None,
    };
    let kernel_scale = 2.0 * sqrt(t);
    let mut terms = Vec::new();

    // Factor ln of exp(−(y−μ)²/2σ²) or of the 1D heat kernel exp(−(x−y)²/4t).
    let comp_log = |y: f64, mu: f64, s: f64| -(y - mu) * (y - mu) / (2.0 * s * s);
    let kern_log = |y: f64, xi: f64| -(xi - y) * (xi - y) / (4.0 * t);

    let kernel_axis = |i: usize, comp: Option<(f64, f64)>| -> AxisRule {
        let xi = x[i];
        match &gh {
            Some(rule) => {
                let mut y = Vec::with_capacity(rule.order());
                let mut log_w = Vec::with_capacity(rule.order());
                for (&z, &w) in rule.nodes.iter().zip(&rule.weights) {
                    let yy = xi - kernel_scale * z;
                    let extra = comp.map_or(0.0, |(mu, s)| comp_log(yy, mu, s));
                    y.push(yy);
                    log_w.push(ln(w) - 0.5 * ln(PI) + extra);
                }
                AxisRule { y, log_w }
            }
            None => {
                let steps = spec.steps_per_axis;
                let half_width = spec.truncation_radius * kernel_scale;
                let h = 2.0 * half_width / steps as f64;
                let norm = -0.5 * ln(4.0 * PI * t);
                let mut y = Vec::with_capacity(steps + 1);
                let mut log_w = Vec::with_capacity(steps + 1);
                for j in 0..=steps {
                    let yy = xi - half_width + j as f64 * h;
                    let end = if j == 0 || j == steps { 0.5 } else { 1.0 };
                    let extra = comp.map_or(0.0, |(mu, s)| comp_log(yy, mu, s));
                    y.push(yy);
                    log_w.push(ln(end * h) + norm + kern_log(yy, xi) + extra);
                }
                AxisRule { y, log_w }
            }
        }
    };

    if data.constant_offset() > 0.0 {
        let axes = (0..n).map(|i| kernel_axis(i, None)).collect();
        terms.push(TermRule { log_amp: ln(data.constant_offset()), axes });
    }
    for c in data.components() {
        let s = c.sigma;
        let use_component_weight = gh.is_some() && s * s < 2.0 * t;
        let axes = (0..n)
            .map(|i| {
                if use_component_weight {
                    let rule = gh.as_ref().unwrap();
                    let mu = c.center[i];
                    let scale = core::f64::consts::SQRT_2 * s;
                    // (√2σ)·(4πt)^{−1/2} from the change of variables and kernel normalization.
                    let base = ln(scale) - 0.5 * ln(4.0 * PI * t);
                    let (y, log_w) = rule
                        .nodes
                        .iter()
                        .zip(&rule.weights)
                        .map(|(&z, &w)| {
                            let yy = mu + scale * z;
                            (yy, ln(w) + base + kern_log(yy, x[i]))
                        })
                        .unzip();
                    AxisRule { y, log_w }
                } else {
                    kernel_axis(i, Some((c.center[i], s)))
                }
            })
            .collect();
        terms.push(TermRule { log_amp: ln(c.weight), axes });
    }
    terms
}

/// Value of an integral and a nonnegative error estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub err_estimate: f64,
}

fn tensor_integral(
    terms: &[TermRule],
    n: usize,
    f: &dyn Fn(&[f64]) -> f64,
) -> Result<f64> {
    // Global log-scale so that no product underflows before normalization.
    let scales: Vec<f64> = terms
        .iter()
        .map(|tr| {
            tr.log_amp
                + tr.axes
                    .iter()
                    .map(|a| a.log_w.iter().copied().fold(f64::NEG_INFINITY, f64::max))
                    .sum::<f64>()
        })
        .collect();
    let global = scales.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut num = 0.0;
    let mut den = 0.0;
    let mut y = vec![0.0; n];
    let mut idx = vec![0usize; n];
    for tr in terms {
        let len: Vec<usize> = tr.axes.iter().map(|a| a.y.len()).collect();
        idx.iter_mut().for_each(|v| *v = 0);
        loop {
            let mut lw = tr.log_amp - global;
            for i in 0..n {
                y[i] = tr.axes[i].y[idx[i]];
                lw += tr.axes[i].log_w[idx[i]];
            }
            let w = exp(lw);
            if w > 0.0 {
                num += w * f(&y);
                den += w;
            }
            // Odometer increment over the multi-index.
            let mut axis = 0;
            while axis < n {
                idx[axis] += 1;
                if idx[axis] < len[axis] {
                    break;
                }
                idx[axis] = 0;
                axis += 1;
            }
            if axis == n {
                break;
            }
        }
    }
    if !(den > 0.0) {
        return Err(Error::Numerical("quadrature normalization vanished"));
    }
    Ok(num / den)
}

/// `∫ f dν_{x,t}` with the engine selected in `spec`.
pub fn integrate_weighted(
    f: impl Fn(&[f64]) -> f64,
    data: &InitialData,
    x: &[f64],
    t: f64,
    spec: &QuadratureSpec,
) -> Result<Estimate> {
    check_inputs(data, x, t, spec)?;
    let n = data.dim();
    let value = tensor_integral(&build_terms(data, x, t, spec), n, &f)?;
    let err_estimate = if spec.refine {
        let alt = tensor_integral(&build_terms(data, x, t, &spec.companion()), n, &f)?;
        abs(value - alt)
    } else {
        0.0
    };
    Ok(Estimate { value, err_estimate })
}

/// Same integral on the truncated box with the composite trapezoid rule,
/// whatever engine `spec` names.
pub fn trapezoid_oracle(
    f: impl Fn(&[f64]) -> f64,
    data: &InitialData,
    x: &[f64],
    t: f64,
    spec: &QuadratureSpec,
) -> Result<Estimate> {
    let spec = QuadratureSpec { engine: QuadEngine::Trapezoid, ..*spec };
    integrate_weighted(f, data, x, t, &spec)
}

/// Per-term log-masses and per-axis normalized power sums `E[zᵖ]`, p = 0..=4,
/// together with `ln u`.
struct AxisTables {
    log_mass: Vec<f64>,
    axis_moments: Vec<Vec<[f64; 5]>>,
    log_u: f64,
}

fn axis_tables(data: &InitialData, x: &[f64], t: f64, spec: &QuadratureSpec) -> Result<AxisTables> {
    let n = data.dim();
    let terms = build_terms(data, x, t, spec);
    let mut log_mass = Vec::with_capacity(terms.len());
    // per term, per axis: E[z^p] for p = 1..=4 under the term's axis law
    let mut axis_moments: Vec<Vec<[f64; 5]>> = Vec::with_capacity(terms.len());
    for tr in &terms {
        let mut lm = tr.log_amp;
        let mut per_axis = Vec::with_capacity(n);
        for (i, ax) in tr.axes.iter().enumerate() {
            let m = ax.log_w.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let mut s = [0.0; 5];
            for (&y, &lw) in ax.y.iter().zip(&ax.log_w) {
                let w = exp(lw - m);
                let z = x[i] - y;
                let mut zp = 1.0;
                for sp in s.iter_mut() {
                    *sp += w * zp;
                    zp *= z;
                }
            }
            if !(s[0] > 0.0) || !m.is_finite() {
                lm = f64::NEG_INFINITY;
            } else {
                lm += m + ln(s[0]);
            }
            let e = [1.0, s[1] / s[0], s[2] / s[0], s[3] / s[0], s[4] / s[0]];
            per_axis.push(e);
        }
        log_mass.push(lm);
        axis_moments.push(per_axis);
    }
    let log_u = log_sum_exp(&log_mass);
    if !log_u.is_finite() {
        return Err(Error::Numerical("quadrature normalization vanished"));
    }
    Ok(AxisTables { log_mass, axis_moments, log_u })
}

fn moments_once(data: &InitialData, x: &[f64], t: f64, spec: &QuadratureSpec) -> Result<MomentBundle> {
    let n = data.dim();
    let AxisTables { log_mass, axis_moments, log_u } = axis_tables(data, x, t, spec)?;
    let mut m1 = vec![0.0; n];
    let mut m2 = SymMatrix::zeros(n);
    let mut m3 = vec![0.0; n];
    let mut m4 = vec![0.0; n];
    let mut m4p = SymMatrix::zeros(n);
    for (lm, e) in log_mass.iter().zip(&axis_moments) {
        let w = exp(lm - log_u);
        if w == 0.0 {
            continue;
        }
        for i in 0..n {
            m1[i] += w * e[i][1];
            m3[i] += w * e[i][3];
            m4[i] += w * e[i][4];
            for j in 0..=i {
                if i == j {
                    m2.set(i, i, m2.get(i, i) + w * e[i][2]);
                } else {
                    m2.set(i, j, m2.get(i, j) + w * e[i][1] * e[j][1]);
                    m4p.set(i, j, m4p.get(i, j) + w * e[i][2] * e[j][2]);
                }
            }
        }
    }
    Ok(MomentBundle {
        u_value: exp(log_u),
        log_u,
        m1,
        m2,
        m3_diag: m3,
        m4_diag: m4,
        m4_pair: m4p,
        err_estimate: 0.0,
    })
}

/// Largest absolute difference between stored moments, together with the
/// relative difference of `u`.
pub fn bundle_distance(a: &MomentBundle, b: &MomentBundle) -> f64 {
    let mut d = abs(a.log_u - b.log_u);
    let pairs = a
        .m1
        .iter()
        .zip(&b.m1)
        .chain(a.m3_diag.iter().zip(&b.m3_diag))
        .chain(a.m4_diag.iter().zip(&b.m4_diag))
        .chain(a.m2.as_slice().iter().zip(b.m2.as_slice()))
        .chain(a.m4_pair.as_slice().iter().zip(b.m4_pair.as_slice()));
    for (p, q) in pairs {
        d = d.max(abs(p - q));
    }
    d
}

/// [`MomentBundle`] from a quadrature engine. Tensor sums over product
/// integrands are evaluated axis by axis, which is the same sum reordered.
pub fn quadrature_moments(
    data: &InitialData,
    x: &[f64],
    t: f64,
    spec: &QuadratureSpec,
) -> Result<MomentBundle> {
    Ok(quadrature_moments_with_companion(data, x, t, spec)?.0)
}

pub fn quadrature_moments_with_companion(
    data: &InitialData,
    x: &[f64],
    t: f64,
    spec: &QuadratureSpec,
) -> Result<(MomentBundle, Option<MomentBundle>)> {
    check_inputs(data, x, t, spec)?;
    let mut mb = moments_once(data, x, t, spec)?;
    if !spec.refine {
        return Ok((mb, None));
    }
    let alt = moments_once(data, x, t, &spec.companion())?;
    mb.err_estimate = bundle_distance(&mb, &alt);
    Ok((mb, Some(alt)))
}

fn monomials_once(tables: &AxisTables, exps: &[Vec<u32>]) -> Vec<f64> {
    let w: Vec<f64> = tables.log_mass.iter().map(|l| exp(l - tables.log_u)).collect();
    exps.iter()
        .map(|e| {
            w.iter()
                .zip(&tables.axis_moments)
                .filter(|(w, _)| **w > 0.0)
                .map(|(w, ax)| w * e.iter().zip(ax).map(|(&p, m)| m[p as usize]).product::<f64>())
                .sum()
        })
        .collect()
}

/// `∫ ∏ zᵢ^{pᵢ} dν` by quadrature for each exponent vector (per-axis power at
/// most 4), with the companion-rule difference as error estimate.
pub fn quadrature_monomials(
    data: &InitialData,
    x: &[f64],
    t: f64,
    spec: &QuadratureSpec,
    exps: &[Vec<u32>],
) -> Result<Vec<Estimate>> {
    check_inputs(data, x, t, spec)?;
    crate::initial_data::check_exponents(data.dim(), exps)?;
    let main = monomials_once(&axis_tables(data, x, t, spec)?, exps);
    let alt = if spec.refine {
        Some(monomials_once(&axis_tables(data, x, t, &spec.companion())?, exps))
    } else {
        None
    };
    Ok(main
        .iter()
        .enumerate()
        .map(|(i, &value)| Estimate { value, err_estimate: alt.as_ref().map_or(0.0, |a| abs(value - a[i])) })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::initial_data::{GaussianComponent, RawInitialData};
    use crate::math::lgamma;

    /// ∫ z^d e^{−z²} dz = Γ((d+1)/2) for even d, 0 for odd d.
    fn hermite_moment(d: u32) -> f64 {
        if d % 2 == 1 {
            0.0
        } else {
            exp(lgamma((d as f64 + 1.0) / 2.0))
        }
    }

    #[test]
    fn rule_examples() {
        let r1 = gauss_hermite_rule(1).unwrap();
        assert_eq!(r1.nodes, vec![0.0]);
        assert!((r1.weights[0] - sqrt(PI)).abs() < 1e-15);
        let r2 = gauss_hermite_rule(2).unwrap();
        assert!((r2.integrate(|z| z * z) - sqrt(PI) / 2.0).abs() < 1e-15);
        let r5 = gauss_hermite_rule(5).unwrap();
        assert!((r5.integrate(|z| z * z * z * z) - 0.75 * sqrt(PI)).abs() < 1e-14);
        assert_eq!(gauss_hermite_rule(129), Err(Error::OrderTooLarge(129)));
        assert!(gauss_hermite_rule(0).is_err());
    }

    #[test]
    fn rule_exactness_up_to_degree_2n_minus_1() {
        for &order in &[2usize, 3, 7, 16, 40, 48, 64, 100, 128] {
            let r = gauss_hermite_rule(order).unwrap();
            for d in 0..(2 * order as u32) {
                let q = r.integrate(|z| crate::math::powi(z, d));
                let exact = hermite_moment(d);
                if d % 2 == 0 {
                    let rel = (q - exact).abs() / exact;
                    assert!(rel <= 1e-12, "order {order} degree {d}: rel {rel:e}");
                } else {
                    let scale = r.integrate(|z| crate::math::powi(z.abs(), d));
                    assert!(q.abs() <= 1e-12 * scale, "order {order} degree {d}");
                }
            }
        }
    }

    fn mixture() -> InitialData {
        InitialData::validate(RawInitialData {
            n: 2,
            constant_offset: 0.3,
            components: vec![
                GaussianComponent { weight: 1.0, center: vec![0.5, -1.0], sigma: 0.2 },
                GaussianComponent { weight: 2.0, center: vec![-1.5, 0.7], sigma: 1.7 },
            ],
        })
        .unwrap()
    }

    #[test]
    fn integrate_examples() {
        let spec = QuadratureSpec::default();
        let d = mixture();
        let one = integrate_weighted(|_| 1.0, &d, &[0.2, 0.1], 0.8, &spec).unwrap();
        assert!((one.value - 1.0).abs() <= 1e-12);
        let c = InitialData::constant(2, 1.0).unwrap();
        let x = [0.3, -0.4];
        let odd = integrate_weighted(|y| x[0] - y[0], &c, &x, 0.5, &spec).unwrap();
        assert!(odd.value.abs() < 1e-13);
        let var = integrate_weighted(|y| (x[0] - y[0]).powi(2), &c, &x, 0.5, &spec).unwrap();
        assert!((var.value - 1.0).abs() < 1e-13);
    }

    #[test]
    fn trapezoid_examples() {
        let d = mixture();
        let x = [0.2, 0.1];
        let spec = QuadratureSpec::trapezoid(6.0, 256);
        let one = trapezoid_oracle(|_| 1.0, &d, &x, 0.8, &spec).unwrap();
        assert!((one.value - 1.0).abs() < 1e-6);
        let f = |y: &[f64]| (x[0] - y[0]).powi(4);
        let a = trapezoid_oracle(f, &d, &x, 0.8, &spec).unwrap();
        let b = integrate_weighted(f, &d, &x, 0.8, &QuadratureSpec::default()).unwrap();
        assert!((a.value - b.value).abs() < 1e-6, "{} vs {}", a.value, b.value);
        let p = InitialData::point_mass(vec![0.0, 0.0], 1.0).unwrap();
        assert_eq!(
            trapezoid_oracle(|_| 1.0, &p, &x, 0.8, &spec).unwrap_err(),
            Error::ClosedFormOnlyData
        );
    }

    #[test]
    fn spec_validation() {
        let d = InitialData::constant(1, 1.0).unwrap();
        let bad = QuadratureSpec { order_per_axis: 1, ..QuadratureSpec::default() };
        assert!(integrate_weighted(|_| 1.0, &d, &[0.0], 1.0, &bad).is_err());
        let bad = QuadratureSpec::trapezoid(3.0, 64);
        assert!(integrate_weighted(|_| 1.0, &d, &[0.0], 1.0, &bad).is_err());
        let d5 = InitialData::constant(5, 1.0).unwrap();
        assert_eq!(
            quadrature_moments(&d5, &[0.0; 5], 1.0, &QuadratureSpec::default()).unwrap_err(),
            Error::DimensionTooLarge(5)
        );
    }

    #[test]
    fn tensor_and_axiswise_paths_agree() {
        let d = mixture();
        let x = [0.4, -0.3];
        let t = 0.6;
        let spec = QuadratureSpec::gauss_hermite(24).with_refine(false);
        let mb = quadrature_moments(&d, &x, t, &spec).unwrap();
        let q = |f: &dyn Fn(&[f64]) -> f64| integrate_weighted(f, &d, &x, t, &spec).unwrap().value;
        assert!((q(&|y| x[0] - y[0]) - mb.m1[0]).abs() < 1e-13);
        assert!((q(&|y| (x[0] - y[0]) * (x[1] - y[1])) - mb.m2.get(0, 1)).abs() < 1e-13);
        let p = q(&|y| (x[0] - y[0]).powi(2) * (x[1] - y[1]).powi(2));
        assert!((p - mb.m4_pair.get(0, 1)).abs() < 1e-12);
    }
}
