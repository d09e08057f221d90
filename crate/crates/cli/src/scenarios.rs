//! Seeded random evaluation points for oracle batteries and acceptance runs.
//!
//! Ranges: `n ∈ {1, 2, 3}`, one to three components with `σ ∈ [0.2, 2]`,
//! weights in `[0.5, 2]`, `|μ| ≤ 3`, an occasional constant offset,
//! `t ∈ [0.1, 2]` and `|x| ≤ 3`.

use liyau_core::{GaussianComponent, InitialData, RawInitialData};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    pub data: InitialData,
    pub x: Vec<f64>,
    pub t: f64,
}

pub const SIGMA: (f64, f64) = (0.2, 2.0);
pub const TIME: (f64, f64) = (0.1, 2.0);
pub const RADIUS: f64 = 3.0;

/// Uniform point of the closed ball of radius `r`.
pub fn ball_point(rng: &mut ChaCha8Rng, n: usize, r: f64) -> Vec<f64> {
    loop {
        let p: Vec<f64> = (0..n).map(|_| rng.random_range(-r..=r)).collect();
        if p.iter().map(|v| v * v).sum::<f64>() <= r * r {
            return p;
        }
    }
}

pub fn sample_data(rng: &mut ChaCha8Rng, n: usize) -> InitialData {
    let k = rng.random_range(1..=3usize);
    let components = (0..k)
        .map(|_| GaussianComponent {
            weight: rng.random_range(0.5..=2.0),
            center: ball_point(rng, n, RADIUS),
            sigma: rng.random_range(SIGMA.0..=SIGMA.1),
        })
        .collect();
    let constant_offset = if rng.random_bool(0.25) { rng.random_range(0.0..=0.5) } else { 0.0 };
    InitialData::validate(RawInitialData { n, constant_offset, components })
        .expect("sampled data is valid")
}

pub fn sample(rng: &mut ChaCha8Rng, n: usize) -> Sample {
    let data = sample_data(rng, n);
    let x = ball_point(rng, n, RADIUS);
    let t = rng.random_range(TIME.0..=TIME.1);
    Sample { data, x, t }
}

/// `count` samples cycling through `n = 1, 2, 3`.
pub fn scenario_set(rng: &mut ChaCha8Rng, count: usize) -> Vec<Sample> {
    (0..count).map(|i| sample(rng, 1 + i % 3)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    #[test]
    fn samples_respect_ranges() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for s in scenario_set(&mut rng, 60) {
            assert!(s.t >= TIME.0 && s.t <= TIME.1);
            assert!(s.x.iter().map(|v| v * v).sum::<f64>() <= 9.0);
            for c in s.data.components() {
                assert!(c.sigma >= SIGMA.0 && c.sigma <= SIGMA.1);
            }
        }
    }

    #[test]
    fn seeded() {
        let a = scenario_set(&mut ChaCha8Rng::seed_from_u64(5), 9);
        let b = scenario_set(&mut ChaCha8Rng::seed_from_u64(5), 9);
        assert_eq!(a, b);
    }
}
