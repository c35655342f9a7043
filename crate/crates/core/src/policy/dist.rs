//! Squashed Gaussian over a box of action bounds.
//!
//! A pre-squash sample `u ~ N(mean, sd)` maps to `tanh(u)` in `[-1, 1]` and
//! then affinely onto `[lo, hi]`. Samples are stored as `u`, which keeps the
//! log-density exact even when `tanh(u)` rounds to ±1.

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use std::f64::consts::{LN_2, PI};

pub const LOG_SD_MIN: f64 = -5.0;
pub const LOG_SD_MAX: f64 = 2.0;

const HALF_LN_2PI: f64 = 0.918_938_533_204_672_8;

fn softplus(x: f64) -> f64 {
    if x > 30.0 {
        x
    } else {
        x.exp().ln_1p()
    }
}

/// `ln(1 - tanh(u)^2)` without cancellation for large `|u|`.
pub fn log_one_minus_tanh_sq(u: f64) -> f64 {
    2.0 * (LN_2 - u - softplus(-2.0 * u))
}

/// Log-density of `N(mean, exp(log_sd))` at `u`.
pub fn normal_log_pdf(u: f64, mean: f64, log_sd: f64) -> f64 {
    let z = (u - mean) * (-log_sd).exp();
    -0.5 * z * z - log_sd - HALF_LN_2PI
}

/// Density of `tanh(u)` on `[-1, 1]`, in log space.
pub fn squashed_log_prob(u: f64, mean: f64, log_sd: f64) -> f64 {
    normal_log_pdf(u, mean, log_sd) - log_one_minus_tanh_sq(u)
}

pub fn squash(u: f64, (lo, hi): (f64, f64)) -> f64 {
    lo + (u.tanh() + 1.0) * 0.5 * (hi - lo)
}

/// Inverse of [`squash`]; the result is clamped just inside the open box.
pub fn unsquash(a: f64, (lo, hi): (f64, f64)) -> f64 {
    let y = (2.0 * (a - lo) / (hi - lo) - 1.0).clamp(-1.0 + 1e-12, 1.0 - 1e-12);
    y.atanh()
}

/// Diagonal squashed Gaussian over a box.
#[derive(Debug, Clone, Copy)]
pub struct TanhNormal<'a> {
    pub mean: &'a [f64],
    pub log_sd: &'a [f64],
    pub bounds: &'a [(f64, f64)],
}

impl<'a> TanhNormal<'a> {
    pub fn new(mean: &'a [f64], log_sd: &'a [f64], bounds: &'a [(f64, f64)]) -> Self {
        assert_eq!(mean.len(), log_sd.len());
        assert_eq!(mean.len(), bounds.len());
        Self { mean, log_sd, bounds }
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    pub fn sample_u<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<f64> {
        self.mean
            .iter()
            .zip(self.log_sd)
            .map(|(&m, &ls)| {
                let eps: f64 = StandardNormal.sample(rng);
                m + ls.exp() * eps
            })
            .collect()
    }

    pub fn mode_u(&self) -> Vec<f64> {
        self.mean.to_vec()
    }

    pub fn to_action(&self, u: &[f64]) -> Vec<f64> {
        u.iter().zip(self.bounds).map(|(&u, &b)| squash(u, b)).collect()
    }

    /// Log-density of the rescaled action `squash(u)` in action coordinates.
    pub fn log_prob(&self, u: &[f64]) -> f64 {
        u.iter()
            .zip(self.mean)
            .zip(self.log_sd)
            .zip(self.bounds)
            .map(|(((&u, &m), &ls), &(lo, hi))| squashed_log_prob(u, m, ls) - (0.5 * (hi - lo)).ln())
            .sum()
    }

    /// Gradient of [`Self::log_prob`] with respect to `(mean, log_sd)`.
    /// The squash terms depend only on `u`, so only the Gaussian part moves.
    pub fn log_prob_grad(&self, u: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let mut d_mean = Vec::with_capacity(self.dim());
        let mut d_log_sd = Vec::with_capacity(self.dim());
        for ((&u, &m), &ls) in u.iter().zip(self.mean).zip(self.log_sd) {
            let inv_var = (-2.0 * ls).exp();
            let diff = u - m;
            d_mean.push(diff * inv_var);
            d_log_sd.push(diff * diff * inv_var - 1.0);
        }
        (d_mean, d_log_sd)
    }

    /// Entropy of the pre-squash Gaussian. The squashed entropy has no closed
    /// form; its gradient in `log_sd` matches this one up to a term that
    /// vanishes for small `sd`.
    pub fn entropy(&self) -> f64 {
        self.log_sd.iter().map(|ls| ls + 0.5 * (1.0 + (2.0 * PI).ln())).sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn standard_density_at_zero() {
        let lp = squashed_log_prob(0.0, 0.0, 0.0);
        assert!((lp - -0.918_938_533_204_672_8).abs() < 1e-12);
        assert!((lp - -0.9189).abs() < 1e-4);
    }

    #[test]
    fn stable_log_one_minus_tanh_sq() {
        for &u in &[-3.0, -0.5, 0.0, 0.2, 4.0] {
            let naive = (1.0 - f64::tanh(u).powi(2)).ln();
            assert!((log_one_minus_tanh_sq(u) - naive).abs() < 1e-10);
        }
        assert!(log_one_minus_tanh_sq(40.0).is_finite());
        assert!(log_one_minus_tanh_sq(-400.0).is_finite());
    }

    #[test]
    fn symmetric_about_zero_mean() {
        for &u in &[0.1, 0.7, 2.5] {
            assert!((squashed_log_prob(u, 0.0, -0.3) - squashed_log_prob(-u, 0.0, -0.3)).abs() < 1e-12);
        }
    }

    #[test]
    fn zero_mean_mode_is_box_midpoint() {
        let bounds = [(0.0, 5.0), (-PI, PI)];
        let d = TanhNormal::new(&[0.0, 0.0], &[LOG_SD_MIN; 2], &bounds);
        let a = d.to_action(&d.mode_u());
        assert_eq!(a, vec![2.5, 0.0]);
    }

    #[test]
    fn samples_within_bounds() {
        let bounds = [(0.0, 5.0), (-PI, PI)];
        let d = TanhNormal::new(&[3.0, -2.0], &[LOG_SD_MAX; 2], &bounds);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..1000 {
            let a = d.to_action(&d.sample_u(&mut rng));
            assert!((0.0..=5.0).contains(&a[0]));
            assert!((-PI..=PI).contains(&a[1]));
        }
    }

    #[test]
    fn unsquash_inverts_squash() {
        let b = (0.0, 5.0);
        for &u in &[-2.0, 0.0, 0.3, 1.7] {
            assert!((unsquash(squash(u, b), b) - u).abs() < 1e-9);
        }
    }
}
