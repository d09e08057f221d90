//! Second- and fourth-order inequalities: admissibility, both sides, slack.
//!
//! Second order, for nonnegative α, β, γ with `(n−1)(α+β)+γ ≤ 1`:
//!
//! ```text
//! Δu/u − α Σ_{i≠j} u_{xᵢxⱼ}/u − β Σ_{i≠j} u_{xᵢ}u_{xⱼ}/u² − γ |∇u|²/u²  ≥  −n/2t
//! ```
//!
//! Fourth order:
//!
//! ```text
//! Σ u_{xᵢxᵢxᵢxᵢ}/u + k₁ Σ_{i≠j} u_{xᵢxᵢxⱼxⱼ}/u + k₂|∇u/u|⁴ + k₃|Δu/u|²
//!     + k₄ (Σ_{i≠j} u_{xᵢxⱼ}/u)²  ≥  F/4t²
//! ```
//!
//! The lower bound comes from writing the integrand as
//! `Ct² + Bt|z|² + A|z|⁴ + D·Σ_{i≠j}zᵢ²zⱼ²` and completing the square.
//! [`Variant::AsStated`] uses the published constants. [`Variant::Rederived`]
//! counts the `n(n−1)` ordered pairs in the `k₁` time term and in the
//! Cauchy–Schwarz bound for the `k₄` term, which changes `C`, `D` and the
//! `k₁`/`k₄` constraint.

use alloc::vec::Vec;
use serde::{Deserialize, Serialize};

use crate::initial_data::{InitialData, MomentBundle};
use crate::kernel_moments::{ratios_from_moments, DerivativeRatios};
use crate::linalg::SymMatrix;
use crate::math::abs;
use crate::quadrature::Engine;
use crate::{Error, Result};

/// Absolute slack tolerance for second-order claims.
pub const SECOND_ORDER_TOL: f64 = 1e-9;
/// Absolute slack tolerance for fourth-order (rederived) claims.
pub const FOURTH_ORDER_TOL: f64 = 1e-8;
/// Multiplier on the propagated error estimate in the slack tolerance.
pub const ERR_FACTOR: f64 = 10.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Theorem {
    Second,
    Fourth,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Variant {
    AsStated,
    Rederived,
}

/// Which aggregate of the off-diagonal Hessian ratios the `k₄` term uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum PairForm {
    /// `(Σ_{i≠j} u_{xᵢxⱼ}/u)²`
    #[default]
    SquaredSum,
    /// `Σ_{i≠j} (u_{xᵢxⱼ}/u)²`
    SumOfSquares,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SecondOrderParams {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
}

impl SecondOrderParams {
    pub const fn new(alpha: f64, beta: f64, gamma: f64) -> Self {
        Self { alpha, beta, gamma }
    }

    /// `(n−1)(α+β)+γ`
    pub fn constraint_value(&self, n: usize) -> f64 {
        (n as f64 - 1.0) * (self.alpha + self.beta) + self.gamma
    }
}

pub fn admissible_second(n: usize, p: &SecondOrderParams) -> bool {
    let finite = p.alpha.is_finite() && p.beta.is_finite() && p.gamma.is_finite();
    finite && p.alpha >= 0.0 && p.beta >= 0.0 && p.gamma >= 0.0 && p.constraint_value(n) <= 1.0
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FourthOrderParams {
    pub k1: f64,
    pub k2: f64,
    pub k3: f64,
    pub k4: f64,
    pub variant: Variant,
    #[serde(default)]
    pub pair_form: PairForm,
}

impl FourthOrderParams {
    pub const fn new(k1: f64, k2: f64, k3: f64, k4: f64, variant: Variant) -> Self {
        Self { k1, k2, k3, k4, variant, pair_form: PairForm::SquaredSum }
    }

    pub fn with_pair_form(mut self, pair_form: PairForm) -> Self {
        self.pair_form = pair_form;
        self
    }

    /// Multiplier `c` in the constraint `k₁ ≥ −c·k₄`.
    pub fn k4_pair_constant(variant: Variant, n: usize) -> f64 {
        let n = n as f64;
        match variant {
            Variant::AsStated => n,
            Variant::Rederived => n * (n - 1.0),
        }
    }

    /// First violated constraint, if any.
    pub fn admissibility(&self, n: usize) -> core::result::Result<(), &'static str> {
        let nf = n as f64;
        if ![self.k1, self.k2, self.k3, self.k4].iter().all(|v| v.is_finite()) {
            return Err("non-finite constant");
        }
        if !(self.k2 + self.k3 > -1.0 / nf) {
            return Err("k2 + k3 must exceed -1/n");
        }
        if self.k1 < -Self::k4_pair_constant(self.variant, n) * self.k4 {
            return Err(match self.variant {
                Variant::AsStated => "k1 must be >= -n*k4",
                Variant::Rederived => "k1 must be >= -n(n-1)*k4",
            });
        }
        if self.k2 > 0.0 {
            return Err("k2 must be <= 0");
        }
        if self.k3 > 0.0 {
            return Err("k3 must be <= 0");
        }
        if self.k4 > 0.0 {
            return Err("k4 must be <= 0");
        }
        Ok(())
    }

    pub fn admissible(&self, n: usize) -> bool {
        self.admissibility(n).is_ok()
    }
}

/// Parameters of either inequality, as echoed in reports.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum InequalityParams {
    Second(SecondOrderParams),
    Fourth(FourthOrderParams),
}

impl InequalityParams {
    pub fn theorem(&self) -> Theorem {
        match self {
            InequalityParams::Second(_) => Theorem::Second,
            InequalityParams::Fourth(_) => Theorem::Fourth,
        }
    }

    pub fn variant(&self) -> Option<Variant> {
        match self {
            InequalityParams::Second(_) => None,
            InequalityParams::Fourth(k) => Some(k.variant),
        }
    }

    pub fn admissible(&self, n: usize) -> bool {
        match self {
            InequalityParams::Second(p) => admissible_second(n, p),
            InequalityParams::Fourth(k) => k.admissible(n),
        }
    }

    /// Values in CSV column order (`alpha,beta,gamma` or `k1..k4`).
    pub fn values(&self) -> Vec<f64> {
        match self {
            InequalityParams::Second(p) => alloc::vec![p.alpha, p.beta, p.gamma],
            InequalityParams::Fourth(k) => alloc::vec![k.k1, k.k2, k.k3, k.k4],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadraticFormCoeffs {
    #[serde(rename = "A")]
    pub a: f64,
    #[serde(rename = "B")]
    pub b: f64,
    #[serde(rename = "C")]
    pub c: f64,
    /// Coefficient of `Σ_{i≠j} zᵢ²zⱼ²`.
    #[serde(rename = "D")]
    pub d: f64,
    /// `(4AC − B²)/16A`; the bound is `F/4t²`.
    #[serde(rename = "F")]
    pub f: f64,
}

pub fn quadratic_coeffs(n: usize, k: &FourthOrderParams) -> Result<QuadraticFormCoeffs> {
    k.admissibility(n).map_err(Error::InadmissibleParams)?;
    Ok(quadratic_coeffs_unchecked(n, k))
}

fn quadratic_coeffs_unchecked(n: usize, k: &FourthOrderParams) -> QuadraticFormCoeffs {
    let nf = n as f64;
    let pairs = nf * (nf - 1.0);
    let a = 1.0 / nf + k.k2 + k.k3;
    let b = -12.0 - 4.0 * (nf - 1.0) * k.k1 - 4.0 * nf * k.k3;
    let (c, d) = match k.variant {
        Variant::AsStated => (12.0 * nf + 4.0 * k.k1 + 4.0 * nf * nf * k.k3, k.k1 + nf * k.k4),
        Variant::Rederived => {
            (12.0 * nf + 4.0 * pairs * k.k1 + 4.0 * nf * nf * k.k3, k.k1 + pairs * k.k4)
        }
    };
    let f = (4.0 * a * c - b * b) / (16.0 * a);
    QuadraticFormCoeffs { a, b, c, d, f }
}

/// The published closed form `3n + k₁ + n²k₃ − n(3 + (n−1)k₁ + nk₃)²/(1 + n(k₂+k₃))`.
pub fn displayed_bound(n: usize, k: &FourthOrderParams) -> f64 {
    let nf = n as f64;
    let s = 3.0 + (nf - 1.0) * k.k1 + nf * k.k3;
    3.0 * nf + k.k1 + nf * nf * k.k3 - nf * s * s / (1.0 + nf * (k.k2 + k.k3))
}

/// `F` for the given variant: the published expression for `as_stated`,
/// the completed square of the rederived coefficients otherwise.
pub fn fourth_order_bound(n: usize, k: &FourthOrderParams) -> f64 {
    match k.variant {
        Variant::AsStated => displayed_bound(n, k),
        Variant::Rederived => quadratic_coeffs_unchecked(n, k).f,
    }
}

/// `Σ_{i≠j} hᵢⱼ`
pub fn pair_sum(hess: &SymMatrix) -> f64 {
    hess.off_diagonal_sum()
}

/// `Σ_{i≠j} hᵢⱼ²`
pub fn pair_square_sum(hess: &SymMatrix) -> f64 {
    hess.off_diagonal_square_sum()
}

pub fn second_order_lhs(r: &DerivativeRatios, p: &SecondOrderParams) -> f64 {
    let g = &r.grad;
    let gsum: f64 = g.iter().sum();
    let gsq = r.grad_norm_sq();
    // Σ_{i≠j} gᵢgⱼ = (Σgᵢ)² − |g|²
    let grad_pairs = gsum * gsum - gsq;
    r.hess.trace() - p.alpha * pair_sum(&r.hess) - p.beta * grad_pairs - p.gamma * gsq
}

pub fn second_order_rhs(n: usize, t: f64) -> f64 {
    -(n as f64) / (2.0 * t)
}

pub fn fourth_order_lhs(r: &DerivativeRatios, k: &FourthOrderParams) -> f64 {
    let diag: f64 = r.fourth_diag.iter().sum();
    let pairs = pair_sum(&r.fourth_pair);
    let g2 = r.grad_norm_sq();
    let lap = r.hess.trace();
    let off = match k.pair_form {
        PairForm::SquaredSum => {
            let s = pair_sum(&r.hess);
            s * s
        }
        PairForm::SumOfSquares => pair_square_sum(&r.hess),
    };
    diag + k.k1 * pairs + k.k2 * g2 * g2 + k.k3 * lap * lap + k.k4 * off
}

/// Options shared by the two checkers.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct CheckOptions {
    pub engine: Engine,
    /// Evaluate fourth-order parameters outside the admissible set instead of
    /// rejecting them. Reports still carry `admissible = false`.
    pub allow_inadmissible: bool,
}

/// One inequality evaluation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckReport {
    pub theorem: Theorem,
    pub variant: Option<Variant>,
    pub n: usize,
    pub x: Vec<f64>,
    pub t: f64,
    pub params: InequalityParams,
    pub lhs: f64,
    pub rhs: f64,
    pub slack: f64,
    pub err: f64,
    pub admissible: bool,
}

impl CheckReport {
    /// Whether the evaluated inequality is claimed to hold: admissible
    /// second-order parameters, or admissible rederived fourth-order ones.
    pub fn is_guaranteed(&self) -> bool {
        self.admissible
            && match self.theorem {
                Theorem::Second => true,
                Theorem::Fourth => self.variant == Some(Variant::Rederived),
            }
    }

    pub fn tolerance(&self) -> f64 {
        let base = match self.theorem {
            Theorem::Second => SECOND_ORDER_TOL,
            Theorem::Fourth => FOURTH_ORDER_TOL,
        };
        base.max(ERR_FACTOR * self.err)
    }

    /// A guaranteed inequality whose slack is below `−tolerance`.
    pub fn is_violation(&self) -> bool {
        self.is_guaranteed() && self.slack < -self.tolerance()
    }
}

const ROUNDOFF: f64 = 8.0 * f64::EPSILON;

/// Rough magnitude of the terms that cancel inside the second-order sides.
fn second_order_scale(mb: &MomentBundle, t: f64, p: &SecondOrderParams) -> f64 {
    let n = mb.dim() as f64;
    let tr = mb.m2.trace();
    let weight = 1.0 + abs(p.alpha) * (n - 1.0) + abs(p.beta) * n + abs(p.gamma);
    n / (2.0 * t) + weight * tr / (4.0 * t * t)
}

fn fourth_order_scale(mb: &MomentBundle, t: f64, k: &FourthOrderParams) -> f64 {
    let n = mb.dim() as f64;
    let tr2 = mb.m2.trace();
    let m4: f64 = mb.m4_diag.iter().sum::<f64>() + mb.m4_pair.as_slice().iter().sum::<f64>();
    let weight = 1.0 + abs(k.k1) + abs(k.k2) + abs(k.k3) * n + abs(k.k4) * n * n;
    let t2 = t * t;
    weight * n * (12.0 * n * t2 + 12.0 * t * tr2 + m4 + tr2 * tr2) / (16.0 * t2 * t2)
}

fn assemble(
    params: InequalityParams,
    x: &[f64],
    t: f64,
    n: usize,
    lhs: f64,
    rhs: f64,
    err: f64,
) -> CheckReport {
    CheckReport {
        theorem: params.theorem(),
        variant: params.variant(),
        n,
        x: x.to_vec(),
        t,
        params,
        lhs,
        rhs,
        slack: lhs - rhs,
        err,
        admissible: params.admissible(n),
    }
}

/// Second-order check on precomputed moments. `companion` carries the
/// coarser/finer quadrature bundle when available.
pub fn second_order_report(
    mb: &MomentBundle,
    companion: Option<&MomentBundle>,
    x: &[f64],
    t: f64,
    p: &SecondOrderParams,
) -> Result<CheckReport> {
    let n = mb.dim();
    let lhs = second_order_lhs(&ratios_from_moments(mb, t)?, p);
    let mut err = ROUNDOFF * second_order_scale(mb, t, p);
    if let Some(c) = companion {
        err += abs(lhs - second_order_lhs(&ratios_from_moments(c, t)?, p));
    }
    Ok(assemble(InequalityParams::Second(*p), x, t, n, lhs, second_order_rhs(n, t), err))
}

pub fn fourth_order_report(
    mb: &MomentBundle,
    companion: Option<&MomentBundle>,
    x: &[f64],
    t: f64,
    k: &FourthOrderParams,
    allow_inadmissible: bool,
) -> Result<CheckReport> {
    let n = mb.dim();
    match k.admissibility(n) {
        Ok(()) => {}
        Err(reason) if !allow_inadmissible => return Err(Error::InadmissibleParams(reason)),
        Err(_) if !(k.k2 + k.k3 > -1.0 / n as f64) => {
            return Err(Error::InadmissibleParams("k2 + k3 must exceed -1/n"));
        }
        Err(_) => {}
    }
    let lhs = fourth_order_lhs(&ratios_from_moments(mb, t)?, k);
    let rhs = fourth_order_bound(n, k) / (4.0 * t * t);
    let mut err = ROUNDOFF * fourth_order_scale(mb, t, k);
    if let Some(c) = companion {
        err += abs(lhs - fourth_order_lhs(&ratios_from_moments(c, t)?, k));
    }
    Ok(assemble(InequalityParams::Fourth(*k), x, t, n, lhs, rhs, err))
}

pub fn check_second_order(
    data: &InitialData,
    x: &[f64],
    t: f64,
    p: &SecondOrderParams,
    opts: &CheckOptions,
) -> Result<CheckReport> {
    let (mb, comp) = opts.engine.moments_with_companion(data, x, t)?;
    second_order_report(&mb, comp.as_ref(), x, t, p)
}

pub fn check_fourth_order(
    data: &InitialData,
    x: &[f64],
    t: f64,
    k: &FourthOrderParams,
    opts: &CheckOptions,
) -> Result<CheckReport> {
    let (mb, comp) = opts.engine.moments_with_companion(data, x, t)?;
    fourth_order_report(&mb, comp.as_ref(), x, t, k, opts.allow_inadmissible)
}

/// Dispatch on the parameter kind.
pub fn check(
    data: &InitialData,
    x: &[f64],
    t: f64,
    params: &InequalityParams,
    opts: &CheckOptions,
) -> Result<CheckReport> {
    let (mb, comp) = opts.engine.moments_with_companion(data, x, t)?;
    report_from_moments(&mb, comp.as_ref(), x, t, params, opts.allow_inadmissible)
}

pub fn report_from_moments(
    mb: &MomentBundle,
    companion: Option<&MomentBundle>,
    x: &[f64],
    t: f64,
    params: &InequalityParams,
    allow_inadmissible: bool,
) -> Result<CheckReport> {
    match params {
        InequalityParams::Second(p) => second_order_report(mb, companion, x, t, p),
        InequalityParams::Fourth(k) => {
            fourth_order_report(mb, companion, x, t, k, allow_inadmissible)
        }
    }
}
