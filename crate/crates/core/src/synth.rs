//! Synthetic series with known scaling: the binomial multiplicative
//! cascade (with its closed-form `h(q)`), and i.i.d. Gaussian and
//! Student-t noise as monofractal and heavy-tailed null models.

use rand::SeedableRng;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal, StudentT};
use serde::{Deserialize, Serialize};

use crate::error::{MfdfaError, Result};
use crate::series::ReturnSeries;

pub const MIN_CASCADE_LEVELS: u32 = 8;
pub const MAX_CASCADE_LEVELS: u32 = 24;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CascadeSpec {
    /// Series length is `2^levels`.
    pub levels: u32,
    /// Multiplier in `(0.5, 1)`.
    pub a: f64,
    pub seed: u64,
}

impl CascadeSpec {
    pub fn validate(&self) -> Result<()> {
        if !(MIN_CASCADE_LEVELS..=MAX_CASCADE_LEVELS).contains(&self.levels) {
            return Err(MfdfaError::Config(format!(
                "cascade levels must be in [{MIN_CASCADE_LEVELS}, {MAX_CASCADE_LEVELS}], got {}",
                self.levels
            )));
        }
        if !(self.a > 0.5 && self.a < 1.0) {
            return Err(MfdfaError::Config(format!(
                "cascade multiplier must lie in (0.5, 1), got {}",
                self.a
            )));
        }
        Ok(())
    }
}

/// Binomial cascade: at every level each interval hands fraction `a` of its
/// mass to one half and `1 - a` to the other, the side chosen by a seeded
/// coin. Position `k` ends with weight `a^n (1-a)^(levels-n)`, `n` being the
/// number of levels at which it took the `a` branch. The weights sum to 1.
pub fn binomial_cascade(spec: &CascadeSpec) -> Result<ReturnSeries> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut weights = vec![1.0f64];
    for _ in 0..spec.levels {
        let mut next = Vec::with_capacity(weights.len() * 2);
        for &w in &weights {
            let (left, right) = if rng.random::<bool>() {
                (spec.a, 1.0 - spec.a)
            } else {
                (1.0 - spec.a, spec.a)
            };
            next.push(w * left);
            next.push(w * right);
        }
        weights = next;
    }
    ReturnSeries::from_values(weights)
}

/// Closed-form `h(q)` of the binomial cascade:
/// `1/q - ln(a^q + (1-a)^q) / (q ln 2)`, with the `q -> 0` limit
/// `-(ln a + ln(1-a)) / (2 ln 2)`.
pub fn cascade_hurst_oracle(a: f64, q: f64) -> f64 {
    if q.abs() < 1e-12 {
        return -(a.ln() + (1.0 - a).ln()) / (2.0 * std::f64::consts::LN_2);
    }
    1.0 / q - (a.powf(q) + (1.0 - a).powf(q)).ln() / (q * std::f64::consts::LN_2)
}

/// `tau(q) = -log2(a^q + (1-a)^q)`.
pub fn cascade_tau_oracle(a: f64, q: f64) -> f64 {
    -(a.powf(q) + (1.0 - a).powf(q)).log2()
}

/// Exact `alpha(q) = d tau / dq`.
pub fn cascade_alpha_oracle(a: f64, q: f64) -> f64 {
    let b = 1.0 - a;
    let (wa, wb) = (a.powf(q), b.powf(q));
    -(wa * a.ln() + wb * b.ln()) / ((wa + wb) * std::f64::consts::LN_2)
}

/// I.i.d. standard normal draws.
pub fn gaussian_iid(n: usize, seed: u64) -> Result<ReturnSeries> {
    if n < 2 {
        return Err(MfdfaError::Config(format!("length must be >= 2, got {n}")));
    }
    let rng = ChaCha8Rng::seed_from_u64(seed);
    ReturnSeries::from_values(StandardNormal.sample_iter(rng).take(n).collect())
}

/// I.i.d. Student-t draws with `dof > 2` degrees of freedom.
pub fn student_t_iid(n: usize, dof: f64, seed: u64) -> Result<ReturnSeries> {
    if n < 2 {
        return Err(MfdfaError::Config(format!("length must be >= 2, got {n}")));
    }
    if !(dof.is_finite() && dof > 2.0) {
        return Err(MfdfaError::Config(format!(
            "Student-t degrees of freedom must exceed 2, got {dof}"
        )));
    }
    let dist = StudentT::new(dof).map_err(|e| MfdfaError::Config(e.to_string()))?;
    let rng = ChaCha8Rng::seed_from_u64(seed);
    ReturnSeries::from_values(dist.sample_iter(rng).take(n).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn moments(x: &[f64]) -> (f64, f64, f64) {
        let n = x.len() as f64;
        let mean = x.iter().sum::<f64>() / n;
        let m2 = x.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
        let m4 = x.iter().map(|v| (v - mean).powi(4)).sum::<f64>() / n;
        (mean, m2, m4 / (m2 * m2))
    }

    #[test]
    fn cascade_weights_follow_binomial_law() {
        let spec = CascadeSpec { levels: 10, a: 0.7, seed: 5 };
        let x = binomial_cascade(&spec).unwrap();
        assert_eq!(x.len(), 1024);
        assert!((x.values().iter().sum::<f64>() - 1.0).abs() < 1e-12);

        // multiset equals { a^popcount(k) (1-a)^(L - popcount(k)) }
        let mut expect: Vec<f64> = (0u32..1024)
            .map(|k| 0.7f64.powi(k.count_ones() as i32) * 0.3f64.powi(10 - k.count_ones() as i32))
            .collect();
        let mut got = x.values().to_vec();
        expect.sort_by(f64::total_cmp);
        got.sort_by(f64::total_cmp);
        for (g, e) in got.iter().zip(&expect) {
            assert!((g - e).abs() <= 1e-14 * e, "{g} vs {e}");
        }
    }

    #[test]
    fn cascade_is_seed_deterministic() {
        let spec = CascadeSpec { levels: 12, a: 0.75, seed: 9 };
        assert_eq!(binomial_cascade(&spec).unwrap(), binomial_cascade(&spec).unwrap());
        let other = CascadeSpec { seed: 10, ..spec };
        assert_ne!(binomial_cascade(&spec).unwrap(), binomial_cascade(&other).unwrap());
    }

    #[test]
    fn cascade_parameter_checks() {
        for (levels, a) in [(7, 0.75), (25, 0.75), (10, 0.5), (10, 1.0), (10, 0.3)] {
            assert!(binomial_cascade(&CascadeSpec { levels, a, seed: 0 }).is_err());
        }
    }

    #[test]
    fn oracle_at_q2() {
        // 0.5 - ln(0.625) / (2 ln 2), evaluated independently: 0.8390359525...
        let want = 0.5 - 0.625f64.ln() / (2.0 * 2.0f64.ln());
        assert!((cascade_hurst_oracle(0.75, 2.0) - want).abs() < 1e-15);
        assert!((cascade_hurst_oracle(0.75, 2.0) - 0.839_035_952_556_3).abs() < 1e-12);
    }

    #[test]
    fn oracle_limit_at_zero_is_continuous() {
        for a in [0.6, 0.75, 0.9] {
            let h0 = cascade_hurst_oracle(a, 0.0);
            let near = 0.5 * (cascade_hurst_oracle(a, 1e-4) + cascade_hurst_oracle(a, -1e-4));
            assert!((h0 - near).abs() < 1e-7, "a {a}: {h0} vs {near}");
            assert!((h0 - cascade_alpha_oracle(a, 0.0)).abs() < 1e-12);
        }
    }

    #[test]
    fn oracle_alpha_matches_finite_difference_of_tau() {
        for q in [-5.0, -1.0, 0.0, 2.0, 7.0] {
            let eps = 1e-5;
            let fd = (cascade_tau_oracle(0.75, q + eps) - cascade_tau_oracle(0.75, q - eps)) / (2.0 * eps);
            assert!((fd - cascade_alpha_oracle(0.75, q)).abs() < 1e-8);
        }
    }

    #[test]
    fn monofractal_limit() {
        // analytic width over q in [-10, 10] shrinks to zero as a -> 0.5
        let width = |a: f64| cascade_alpha_oracle(a, -10.0) - cascade_alpha_oracle(a, 10.0);
        let ws: Vec<f64> = [0.75, 0.6, 0.55, 0.51, 0.501].iter().map(|&a| width(a)).collect();
        assert!(ws.windows(2).all(|w| w[1] < w[0]), "{ws:?}");
        assert!(ws[4] < 0.05);
        assert!((cascade_hurst_oracle(0.500_001, 3.0) - 1.0).abs() < 1e-4);
    }

    #[test]
    fn gaussian_moments() {
        let x = gaussian_iid(1 << 16, 1).unwrap();
        let (mean, var, _) = moments(x.values());
        assert!(mean.abs() < 0.02, "{mean}");
        assert!((var - 1.0).abs() < 0.02, "{var}");
        assert_eq!(gaussian_iid(100, 4).unwrap(), gaussian_iid(100, 4).unwrap());
        assert!(gaussian_iid(1, 4).is_err());
    }

    #[test]
    fn student_t_heavy_tails() {
        let x = student_t_iid(1 << 16, 4.0, 2).unwrap();
        let (_, _, kurt) = moments(x.values());
        assert!(kurt > 3.5, "{kurt}");
        assert_eq!(student_t_iid(50, 4.0, 3).unwrap(), student_t_iid(50, 4.0, 3).unwrap());
        assert!(student_t_iid(50, 2.0, 3).is_err());
    }

    #[test]
    fn student_t_approaches_gaussian() {
        let mut t = student_t_iid(1 << 16, 200.0, 7).unwrap().values().to_vec();
        let mut g = gaussian_iid(1 << 16, 8).unwrap().values().to_vec();
        t.sort_by(f64::total_cmp);
        g.sort_by(f64::total_cmp);
        let n = t.len();
        for p in [0.01, 0.1, 0.25, 0.5, 0.75, 0.9, 0.99] {
            let i = (p * n as f64) as usize;
            // standard error of a normal quantile at n = 65536 is below 0.015
            // even at the 1% tail; dof = 200 widens the tails by ~0.5%
            assert!((t[i] - g[i]).abs() < 0.05, "p {p}: {} vs {}", t[i], g[i]);
        }
    }
}
