//! Initial data `g = c + Σₖ wₖ·exp(−|y−μₖ|²/2σₖ²)` and exact heat-flow moments.
//!
//! Components with `σ = 0` are point masses `w·δ_μ`. They are the σ→0
//! limit of a normalized Gaussian and realize the equality case of the
//! classical inequality; only the closed-form path accepts them.

use alloc::vec;
use alloc::vec::Vec;
use serde::{Deserialize, Serialize};

use crate::linalg::SymMatrix;
use crate::math::{exp, ln, log_sum_exp, PI};
use crate::{Error, Result, MIN_TIME};

/// Serialized shape of a scenario file. Validate with [`InitialData::validate`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RawInitialData {
    pub n: usize,
    #[serde(default)]
    pub constant_offset: f64,
    #[serde(default)]
    pub components: Vec<GaussianComponent>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GaussianComponent {
    pub weight: f64,
    pub center: Vec<f64>,
    pub sigma: f64,
}

impl GaussianComponent {
    pub fn is_point_mass(&self) -> bool {
        self.sigma == 0.0
    }
}

/// Validated nonnegative initial data that does not vanish identically.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(into = "RawInitialData")]
pub struct InitialData {
    n: usize,
    constant_offset: f64,
    components: Vec<GaussianComponent>,
    closed_form_only: bool,
}

impl From<InitialData> for RawInitialData {
    fn from(d: InitialData) -> Self {
        RawInitialData { n: d.n, constant_offset: d.constant_offset, components: d.components }
    }
}

impl<'de> Deserialize<'de> for InitialData {
    fn deserialize<D: serde::Deserializer<'de>>(de: D) -> core::result::Result<Self, D::Error> {
        let raw = RawInitialData::deserialize(de)?;
        InitialData::validate(raw).map_err(serde::de::Error::custom)
    }
}

impl InitialData {
    pub fn validate(raw: RawInitialData) -> Result<Self> {
        let RawInitialData { n, constant_offset, components } = raw;
        if n == 0 {
            return Err(Error::ZeroDimension);
        }
        if !(constant_offset.is_finite() && constant_offset >= 0.0) {
            return Err(Error::InvalidOffset);
        }
        for (index, c) in components.iter().enumerate() {
            if !(c.weight.is_finite() && c.weight > 0.0) {
                return Err(Error::NonPositiveWeight { index });
            }
            if !(c.sigma.is_finite() && c.sigma >= 0.0) {
                return Err(Error::NegativeSigma { index });
            }
            if c.center.len() != n {
                return Err(Error::DimensionMismatch { expected: n, found: c.center.len() });
            }
            if c.center.iter().any(|v| !v.is_finite()) {
                return Err(Error::NonFinite);
            }
        }
        if constant_offset == 0.0 && components.is_empty() {
            return Err(Error::VanishingData);
        }
        let closed_form_only = components.iter().any(GaussianComponent::is_point_mass);
        Ok(Self { n, constant_offset, components, closed_form_only })
    }

    /// `g ≡ c` in dimension `n`.
    pub fn constant(n: usize, c: f64) -> Result<Self> {
        Self::validate(RawInitialData { n, constant_offset: c, components: vec![] })
    }

    pub fn single_gaussian(center: Vec<f64>, sigma: f64, weight: f64) -> Result<Self> {
        Self::validate(RawInitialData {
            n: center.len(),
            constant_offset: 0.0,
            components: vec![GaussianComponent { weight, center, sigma }],
        })
    }

    pub fn point_mass(center: Vec<f64>, weight: f64) -> Result<Self> {
        Self::single_gaussian(center, 0.0, weight)
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn constant_offset(&self) -> f64 {
        self.constant_offset
    }

    pub fn components(&self) -> &[GaussianComponent] {
        &self.components
    }

    /// Point masses present: only [`closed_form_moments`] may evaluate this data.
    pub fn is_closed_form_only(&self) -> bool {
        self.closed_form_only
    }

    pub fn to_raw(&self) -> RawInitialData {
        self.clone().into()
    }

    /// Same data with every amplitude multiplied by `lambda`.
    pub fn scaled(&self, lambda: f64) -> Result<Self> {
        let mut raw = self.to_raw();
        raw.constant_offset *= lambda;
        for c in &mut raw.components {
            c.weight *= lambda;
        }
        Self::validate(raw)
    }

    /// Same data with every center moved by `shift`.
    pub fn translated(&self, shift: &[f64]) -> Result<Self> {
        let mut raw = self.to_raw();
        for c in &mut raw.components {
            for (m, s) in c.center.iter_mut().zip(shift) {
                *m += s;
            }
        }
        Self::validate(raw)
    }

    pub fn eval_g(&self, y: &[f64]) -> Result<f64> {
        if self.closed_form_only {
            return Err(Error::ClosedFormOnlyData);
        }
        self.check_point(y)?;
        let mut g = self.constant_offset;
        for c in &self.components {
            let d2 = sq_dist(y, &c.center);
            g += c.weight * exp(-d2 / (2.0 * c.sigma * c.sigma));
        }
        Ok(g)
    }

    pub(crate) fn check_point(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.n {
            return Err(Error::DimensionMismatch { expected: self.n, found: x.len() });
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite);
        }
        Ok(())
    }

    /// Per-term Gaussian law of `z = x − y` under ν, restricted to each term.
    pub(crate) fn heat_terms(&self, x: &[f64], t: f64) -> Vec<HeatTerm> {
        let n = self.n as f64;
        let mut terms = Vec::with_capacity(self.components.len() + 1);
        if self.constant_offset > 0.0 {
            terms.push(HeatTerm {
                log_mass: ln(self.constant_offset),
                mean: vec![0.0; self.n],
                variance: 2.0 * t,
            });
        }
        for c in &self.components {
            let diff: Vec<f64> = x.iter().zip(&c.center).map(|(a, b)| a - b).collect();
            let d2: f64 = diff.iter().map(|d| d * d).sum();
            if c.is_point_mass() {
                terms.push(HeatTerm {
                    log_mass: ln(c.weight) - 0.5 * n * ln(4.0 * PI * t) - d2 / (4.0 * t),
                    mean: diff,
                    variance: 0.0,
                });
            } else {
                let s2 = c.sigma * c.sigma;
                let total = s2 + 2.0 * t;
                let shrink = 2.0 * t / total;
                terms.push(HeatTerm {
                    log_mass: ln(c.weight) + 0.5 * n * ln(s2 / total) - d2 / (2.0 * total),
                    mean: diff.iter().map(|d| d * shrink).collect(),
                    variance: shrink * s2,
                });
            }
        }
        terms
    }

    /// `ln u(x,t)` in closed form.
    pub fn log_u(&self, x: &[f64], t: f64) -> Result<f64> {
        check_time(t)?;
        self.check_point(x)?;
        let logs: Vec<f64> = self.heat_terms(x, t).iter().map(|h| h.log_mass).collect();
        Ok(log_sum_exp(&logs))
    }
}

/// One additive term of `u`: its mass and the (isotropic) Gaussian law of
/// `x − y` under the term's normalized measure.
#[derive(Debug, Clone)]
pub(crate) struct HeatTerm {
    pub log_mass: f64,
    pub mean: Vec<f64>,
    pub variance: f64,
}

pub(crate) fn check_time(t: f64) -> Result<()> {
    if t.is_finite() && t >= MIN_TIME {
        Ok(())
    } else {
        Err(Error::NonPositiveTime(t))
    }
}

#[inline]
pub(crate) fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(p, q)| (p - q) * (p - q)).sum()
}

/// `u(x,t)` together with the moments of `z = x − y` under ν.
///
/// `m4_pair` has a zero diagonal; its off-diagonal entries are `∫zᵢ²zⱼ² dν`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MomentBundle {
    pub u_value: f64,
    pub log_u: f64,
    pub m1: Vec<f64>,
    pub m2: SymMatrix,
    pub m3_diag: Vec<f64>,
    pub m4_diag: Vec<f64>,
    pub m4_pair: SymMatrix,
    pub err_estimate: f64,
}

impl MomentBundle {
    pub fn dim(&self) -> usize {
        self.m1.len()
    }

    /// Checks the moment inequalities every probability measure satisfies,
    /// with slack `tol` scaled by the magnitude of the compared quantities.
    pub fn check_invariants(&self, tol: f64) -> bool {
        let n = self.dim();
        let all = self
            .m1
            .iter()
            .chain(self.m3_diag.iter())
            .chain(self.m4_diag.iter())
            .chain(self.m2.as_slice())
            .chain(self.m4_pair.as_slice());
        if !(self.u_value >= 0.0 && all.copied().all(f64::is_finite)) {
            return false;
        }
        for i in 0..n {
            let m2 = self.m2.get(i, i);
            let scale = 1.0 + m2 * m2 + self.m4_diag[i];
            if m2 - self.m1[i] * self.m1[i] < -tol * (1.0 + m2) {
                return false;
            }
            if self.m4_diag[i] - m2 * m2 < -tol * scale {
                return false;
            }
            for j in 0..n {
                if i != j && self.m4_pair.get(i, j) < -tol * scale {
                    return false;
                }
            }
        }
        true
    }
}

/// Exact `u` and moments of `x − y` under ν for Gaussian-mixture data.
///
/// Restricted to one term the law of `z` is Gaussian with per-axis mean
/// `(xᵢ−μᵢ)·2t/(σ²+2t)` and variance `2tσ²/(σ²+2t)`; the constant term gives
/// mean 0 and variance `2t`, a point mass gives the fixed value `x − μ`.
/// Terms are mixed with posterior weights computed in the log domain.
pub fn closed_form_moments(data: &InitialData, x: &[f64], t: f64) -> Result<MomentBundle> {
    check_time(t)?;
    data.check_point(x)?;
    let terms = data.heat_terms(x, t);
    let logs: Vec<f64> = terms.iter().map(|h| h.log_mass).collect();
    let log_u = log_sum_exp(&logs);
    let n = data.dim();
    let mut m1 = vec![0.0; n];
    let mut m2 = SymMatrix::zeros(n);
    let mut m3 = vec![0.0; n];
    let mut m4 = vec![0.0; n];
    let mut m4p = SymMatrix::zeros(n);
    for term in &terms {
        let w = exp(term.log_mass - log_u);
        if w == 0.0 {
            continue;
        }
        let v = term.variance;
        for i in 0..n {
            let a = term.mean[i];
            let a2 = a * a;
            m1[i] += w * a;
            m3[i] += w * (a2 * a + 3.0 * a * v);
            m4[i] += w * (a2 * a2 + 6.0 * a2 * v + 3.0 * v * v);
            for j in 0..=i {
                let b = term.mean[j];
                if i == j {
                    m2.set(i, i, m2.get(i, i) + w * (a2 + v));
                } else {
                    m2.set(i, j, m2.get(i, j) + w * a * b);
                    m4p.set(i, j, m4p.get(i, j) + w * (a2 + v) * (b * b + v));
                }
            }
        }
    }
    if !log_u.is_finite() {
        return Err(Error::Numerical("u(x,t) is not representable"));
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

/// `E[zᵖ]` for `z ~ N(a, v)`, `p ≤ 4`.
pub(crate) fn gaussian_raw_moment(a: f64, v: f64, p: u32) -> f64 {
    let a2 = a * a;
    match p {
        0 => 1.0,
        1 => a,
        2 => a2 + v,
        3 => a2 * a + 3.0 * a * v,
        4 => a2 * a2 + 6.0 * a2 * v + 3.0 * v * v,
        _ => f64::NAN,
    }
}

/// Every exponent vector `p ∈ ℕⁿ` with `1 ≤ |p| ≤ max_degree`, by degree and
/// then lexicographically.
pub fn monomial_exponents(n: usize, max_degree: u32) -> Vec<Vec<u32>> {
    let mut out = Vec::new();
    for d in 1..=max_degree {
        let mut p = vec![0u32; n];
        compositions(&mut p, 0, d, &mut out);
    }
    out
}

fn compositions(p: &mut Vec<u32>, i: usize, left: u32, out: &mut Vec<Vec<u32>>) {
    if i + 1 == p.len() {
        p[i] = left;
        out.push(p.clone());
        return;
    }
    for k in (0..=left).rev() {
        p[i] = k;
        compositions(p, i + 1, left - k, out);
    }
}

pub(crate) fn check_exponents(n: usize, exps: &[Vec<u32>]) -> Result<()> {
    for e in exps {
        if e.len() != n {
            return Err(Error::DimensionMismatch { expected: n, found: e.len() });
        }
        if e.iter().any(|&p| p > 4) {
            return Err(Error::InvalidMultiIndex);
        }
    }
    Ok(())
}

/// Exact `∫ ∏ zᵢ^{pᵢ} dν` for each exponent vector (per-axis power at most 4).
pub fn closed_form_monomials(data: &InitialData, x: &[f64], t: f64, exps: &[Vec<u32>]) -> Result<Vec<f64>> {
    check_time(t)?;
    data.check_point(x)?;
    check_exponents(data.dim(), exps)?;
    let terms = data.heat_terms(x, t);
    let logs: Vec<f64> = terms.iter().map(|h| h.log_mass).collect();
    let log_u = log_sum_exp(&logs);
    if !log_u.is_finite() {
        return Err(Error::Numerical("u(x,t) is not representable"));
    }
    let weights: Vec<f64> = logs.iter().map(|l| exp(l - log_u)).collect();
    Ok(exps
        .iter()
        .map(|e| {
            terms
                .iter()
                .zip(&weights)
                .map(|(h, w)| {
                    w * e
                        .iter()
                        .zip(&h.mean)
                        .map(|(&p, &a)| gaussian_raw_moment(a, h.variance, p))
                        .product::<f64>()
                })
                .sum()
        })
        .collect())
}
