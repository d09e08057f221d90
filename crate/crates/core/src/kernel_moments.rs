//! Derivative ratios `∂ᵅu/u` as affine functions of heat-kernel moments,
//! plus finite-difference oracles that differentiate `u` directly.

use alloc::vec;
use alloc::vec::Vec;
use serde::{Deserialize, Serialize};

use crate::dd::Dd;
use crate::initial_data::{check_time, InitialData, MomentBundle};
use crate::linalg::SymMatrix;
use crate::math::{abs, exp, powf, powi, sqrt};
use crate::{Error, Result};

/// Every ratio up to fourth order that the inequalities need.
///
/// `fourth_pair` has a zero diagonal and holds `u_{xᵢxᵢxⱼxⱼ}/u` off it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DerivativeRatios {
    pub t: f64,
    pub n: usize,
    pub grad: Vec<f64>,
    pub hess: SymMatrix,
    pub third_diag: Vec<f64>,
    pub fourth_diag: Vec<f64>,
    pub fourth_pair: SymMatrix,
}

impl DerivativeRatios {
    pub fn grad_norm_sq(&self) -> f64 {
        self.grad.iter().map(|g| g * g).sum()
    }

    pub fn all_finite(&self) -> bool {
        self.entries().all(|(_, v)| v.is_finite())
    }

    /// `trace(hess) + n/2t − |grad|² ≥ −eps`, the classical bound at ratio level.
    pub fn satisfies_classical(&self, eps: f64) -> bool {
        self.hess.trace() + self.n as f64 / (2.0 * self.t) - self.grad_norm_sq() >= -eps
    }

    /// Flat walk over every independent entry with its multi-index.
    pub fn entries(&self) -> impl Iterator<Item = (Vec<u32>, f64)> + '_ {
        let n = self.n;
        let unit = move |pairs: &[(usize, u32)]| {
            let mut m = vec![0u32; n];
            for &(i, p) in pairs {
                m[i] += p;
            }
            m
        };
        let grad = (0..n).map(move |i| (unit(&[(i, 1)]), self.grad[i]));
        let hess = (0..n).flat_map(move |i| {
            (0..=i).map(move |j| (unit(&[(i, 1), (j, 1)]), self.hess.get(i, j)))
        });
        let third = (0..n).map(move |i| (unit(&[(i, 3)]), self.third_diag[i]));
        let fourth = (0..n).map(move |i| (unit(&[(i, 4)]), self.fourth_diag[i]));
        let pair = (0..n).flat_map(move |i| {
            (0..i).map(move |j| (unit(&[(i, 2), (j, 2)]), self.fourth_pair.get(i, j)))
        });
        grad.chain(hess).chain(third).chain(fourth).chain(pair)
    }
}

/// `u_{xᵢxᵢxⱼxⱼ}/u` from the factored pair kernel `((zᵢ²−2t)(zⱼ²−2t))/16t⁴`.
pub fn fourth_pair_entry(mb: &MomentBundle, t: f64, i: usize, j: usize) -> f64 {
    let t2 = t * t;
    // (a + b) is commutative in floating point, so swapping i and j is exact
    (mb.m4_pair.get(i, j) - 2.0 * t * (mb.m2.get(i, i) + mb.m2.get(j, j)) + 4.0 * t2)
        / (16.0 * t2 * t2)
}

/// `u_{xᵢxᵢxᵢxᵢ}/u` written as the proof's split: the `z⁴ − 12tz²` part plus `3/4t²`.
pub fn fourth_diag_split(mb: &MomentBundle, t: f64, i: usize) -> f64 {
    let t2 = t * t;
    (mb.m4_diag[i] - 12.0 * t * mb.m2.get(i, i)) / (16.0 * t2 * t2) + 0.75 / t2
}

pub fn ratios_from_moments(mb: &MomentBundle, t: f64) -> Result<DerivativeRatios> {
    check_time(t)?;
    let n = mb.dim();
    let t2 = t * t;
    let t3 = t2 * t;
    let t4 = t2 * t2;
    let grad = mb.m1.iter().map(|m| -m / (2.0 * t)).collect();
    let mut hess = SymMatrix::zeros(n);
    let mut fourth_pair = SymMatrix::zeros(n);
    for i in 0..n {
        for j in 0..=i {
            if i == j {
                hess.set(i, i, -1.0 / (2.0 * t) + mb.m2.get(i, i) / (4.0 * t2));
            } else {
                hess.set(i, j, mb.m2.get(i, j) / (4.0 * t2));
                fourth_pair.set(i, j, fourth_pair_entry(mb, t, i, j));
            }
        }
    }
    let third_diag = (0..n)
        .map(|i| (6.0 * t * mb.m1[i] - mb.m3_diag[i]) / (8.0 * t3))
        .collect();
    let fourth_diag = (0..n)
        .map(|i| (12.0 * t2 - 12.0 * t * mb.m2.get(i, i) + mb.m4_diag[i]) / (16.0 * t4))
        .collect();
    Ok(DerivativeRatios { t, n, grad, hess, third_diag, fourth_diag, fourth_pair })
}

/// `Δ log u = trace(hess) − |grad|²`.
pub fn laplacian_log_u(r: &DerivativeRatios) -> f64 {
    r.hess.trace() - r.grad_norm_sq()
}

/// `h = 10⁻³·max(√t, 1)`.
pub fn default_step(t: f64) -> f64 {
    1e-3 * sqrt(t).max(1.0)
}

/// 1D stencils: (offset multiple, integer numerator), common denominator,
/// and accuracy order.
fn stencil(p: u32) -> (&'static [(i32, f64)], f64, u32) {
    match p {
        0 => (&[(0, 1.0)], 1.0, 8),
        1 => (&[(-2, 1.0), (-1, -8.0), (1, 8.0), (2, -1.0)], 12.0, 4),
        2 => (&[(-2, -1.0), (-1, 16.0), (0, -30.0), (1, 16.0), (2, -1.0)], 12.0, 4),
        3 => (&[(-2, -1.0), (-1, 2.0), (1, -2.0), (2, 1.0)], 2.0, 2),
        _ => (&[(-2, 1.0), (-1, -4.0), (0, 6.0), (1, -4.0), (2, 1.0)], 1.0, 2),
    }
}

/// Tensor-product stencil: offsets (in units of h) and numerators.
fn tensor_stencil(multi: &[u32]) -> (Vec<(Vec<i32>, f64)>, f64, u32) {
    let mut points: Vec<(Vec<i32>, f64)> = vec![(Vec::new(), 1.0)];
    let mut denom = 1.0;
    let mut order = u32::MAX;
    for &p in multi {
        let (st, d, q) = stencil(p);
        denom *= d;
        if p > 0 {
            order = order.min(q);
        }
        let mut next = Vec::with_capacity(points.len() * st.len());
        for (off, c) in &points {
            for &(m, cm) in st {
                let mut o = off.clone();
                o.push(m);
                next.push((o, c * cm));
            }
        }
        points = next;
    }
    (points, denom, order)
}

/// `(∂ᵅu)(x,t)/u(x,t)` from one stencil of step `h`, accumulated in
/// double-double. The constant term drops out because every stencil with a
/// nonzero order sums to zero.
fn stencil_ratio(data: &InitialData, x: &[f64], t: f64, multi: &[u32], h: f64) -> Result<f64> {
    let (points, denom, _) = tensor_stencil(multi);
    let total: u32 = multi.iter().sum();
    let log_u = data.log_u(x, t)?;
    let terms = data.heat_terms(x, t);
    // heat_terms lists the constant first when present; components follow.
    let skip = usize::from(data.constant_offset() > 0.0);
    let mut acc = 0.0;
    for (term, comp) in terms.iter().skip(skip).zip(data.components()) {
        let weight = exp(term.log_mass - log_u);
        if weight == 0.0 {
            continue;
        }
        let two_l2 = 2.0 * (comp.sigma * comp.sigma + 2.0 * t);
        let a: Vec<f64> = x.iter().zip(&comp.center).map(|(p, q)| p - q).collect();
        let mut sum = Dd::ZERO;
        for (off, c) in &points {
            // exponent −(2a·δ + |δ|²)/(2L²) with δ = off·h
            let mut q = Dd::ZERO;
            for (ai, &m) in a.iter().zip(off) {
                if m != 0 {
                    let d = m as f64 * h;
                    q = q + Dd::from_f64(*ai).mul_f64(2.0 * d) + Dd::from_f64(d).mul_f64(d);
                }
            }
            let e = (-q).div_f64(two_l2).exp();
            sum = sum + e.mul_f64(*c);
        }
        acc += weight * sum.to_f64();
    }
    Ok(acc / (denom * powi(h, total)))
}

/// Central finite differences of `u` divided by `u`, Richardson-extrapolated
/// from steps `h` and `h/2`.
///
/// Orders 1–2 per axis use fourth-order stencils, orders 3–4 second-order
/// ones; mixed derivatives use tensor products. `u` is evaluated in closed
/// form.
pub fn finite_difference_ratio(
    data: &InitialData,
    x: &[f64],
    t: f64,
    multi_index: &[u32],
    h: f64,
) -> Result<f64> {
    check_time(t)?;
    data.check_point(x)?;
    if multi_index.len() != data.dim() {
        return Err(Error::DimensionMismatch { expected: data.dim(), found: multi_index.len() });
    }
    let total: u32 = multi_index.iter().sum();
    if total == 0 || total > 4 {
        return Err(Error::InvalidMultiIndex);
    }
    if !(h.is_finite() && h >= 1e-6 * sqrt(t)) {
        return Err(Error::StepTooSmall { h });
    }
    let (_, _, order) = tensor_stencil(multi_index);
    let coarse = stencil_ratio(data, x, t, multi_index, h)?;
    let fine = stencil_ratio(data, x, t, multi_index, 0.5 * h)?;
    let k = powf(2.0, order as f64);
    Ok((k * fine - coarse) / (k - 1.0))
}

/// Every ratio of [`DerivativeRatios`] by finite differences.
pub fn finite_difference_ratios(data: &InitialData, x: &[f64], t: f64, h: f64) -> Result<DerivativeRatios> {
    let n = data.dim();
    let mi = |pairs: &[(usize, u32)]| {
        let mut m = vec![0u32; n];
        for &(i, p) in pairs {
            m[i] += p;
        }
        m
    };
    let fd = |pairs: &[(usize, u32)]| finite_difference_ratio(data, x, t, &mi(pairs), h);
    let mut grad = vec![0.0; n];
    let mut third_diag = vec![0.0; n];
    let mut fourth_diag = vec![0.0; n];
    let mut hess = SymMatrix::zeros(n);
    let mut fourth_pair = SymMatrix::zeros(n);
    for i in 0..n {
        grad[i] = fd(&[(i, 1)])?;
        third_diag[i] = fd(&[(i, 3)])?;
        fourth_diag[i] = fd(&[(i, 4)])?;
        for j in 0..=i {
            if i == j {
                hess.set(i, i, fd(&[(i, 2)])?);
            } else {
                hess.set(i, j, fd(&[(i, 1), (j, 1)])?);
                fourth_pair.set(i, j, fd(&[(i, 2), (j, 2)])?);
            }
        }
    }
    Ok(DerivativeRatios { t, n, grad, hess, third_diag, fourth_diag, fourth_pair })
}

/// Heat-equation residual `(u(t+h) − u(t−h))/2h − Δu`, divided by `u(x,t)`.
pub fn heat_residual(data: &InitialData, x: &[f64], t: f64, h: f64) -> Result<f64> {
    check_time(t)?;
    check_time(t - h)?;
    let lu = data.log_u(x, t)?;
    let up = libm::expm1(data.log_u(x, t + h)? - lu);
    let down = libm::expm1(data.log_u(x, t - h)? - lu);
    let dt = (up - down) / (2.0 * h);
    let n = data.dim();
    let mut lap = 0.0;
    for i in 0..n {
        let mut m = vec![0u32; n];
        m[i] = 2;
        lap += finite_difference_ratio(data, x, t, &m, h)?;
    }
    Ok(dt - lap)
}

/// `Σ_{i≠j} (zᵢ² + zⱼ²)` over ordered pairs; equals `2(n−1)|z|²`.
pub fn ordered_pair_square_sum(z: &[f64]) -> f64 {
    let mut s = 0.0;
    for (i, a) in z.iter().enumerate() {
        for (j, b) in z.iter().enumerate() {
            if i != j {
                s += a * a + b * b;
            }
        }
    }
    s
}

/// `Σ|fₖ|ᵖgₖ − (Σ|fₖ|gₖ)ᵖ` for a discrete probability vector `g`; nonnegative for p ≥ 1.
pub fn jensen_gap(weights: &[f64], values: &[f64], p: f64) -> f64 {
    let mean: f64 = weights.iter().zip(values).map(|(g, f)| g * abs(*f)).sum();
    let mean_p: f64 = weights.iter().zip(values).map(|(g, f)| g * powf(abs(*f), p)).sum();
    mean_p - powf(mean, p)
}
