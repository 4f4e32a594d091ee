//! The MF-DFA engine: box segmentation, polynomial detrending, q-order
//! fluctuation functions and the log-log regression to `h(q)`.

mod config;
mod detrend;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{MfdfaError, Result};
use crate::regression::{fit_line, LineFit};
use crate::series::{is_constant, profile_of, Profile, ReturnSeries};

pub use config::{
    log_spaced_scales, q_range, Direction, MfdfaConfig, DEFAULT_MAX_SCALE, DEFAULT_MIN_SCALE,
    DEFAULT_POLY_ORDER, DEFAULT_Q_MAX, DEFAULT_Q_MIN, DEFAULT_Q_STEP, DEFAULT_SCALE_COUNT,
    MAX_POLY_ORDER,
};
pub use detrend::{box_starts, PolyBasis, DEGENERATE_RELATIVE};

/// Per-box mean-square residuals `F2(s, v)` of an order-`m` detrend.
/// With [`Direction::Both`] the result holds `2 * floor(N/s)` boxes.
pub fn box_fluctuations(
    profile: &Profile,
    s: usize,
    m: usize,
    direction: Direction,
) -> Result<Vec<f64>> {
    if profile.len() / s.max(1) == 0 {
        return Err(MfdfaError::Config(format!(
            "scale {s} exceeds profile length {}",
            profile.len()
        )));
    }
    detrend::box_fluctuations_raw(profile.values(), s, m, direction)
}

/// q-order average of per-box fluctuations:
/// `{ mean_v F2^(q/2) }^(1/q)`, and `exp{ mean_v ln F2 / 2 }` at `q = 0`.
///
/// Evaluated in log space so large `|q|` cannot overflow. Zero boxes are
/// skipped for `q > 0` and rejected for `q <= 0`. `scale` only labels errors.
pub fn q_moment(f2: &[f64], q: f64, scale: usize) -> Result<f64> {
    if f2.is_empty() {
        return Err(MfdfaError::Config(format!("no boxes at scale {scale}")));
    }
    let n = f2.len() as f64;
    if q <= 0.0 {
        if let Some(index) = f2.iter().position(|&v| v <= 0.0) {
            return Err(MfdfaError::DegenerateBox { scale, index, q });
        }
    }
    if q == 0.0 {
        let mean_log = f2.iter().map(|v| v.ln()).sum::<f64>() / n;
        return Ok((0.5 * mean_log).exp());
    }
    let logs: Vec<f64> = f2
        .iter()
        .filter(|&&v| v > 0.0)
        .map(|v| 0.5 * q * v.ln())
        .collect();
    if logs.is_empty() {
        return Err(MfdfaError::DegenerateBox { scale, index: 0, q });
    }
    let peak = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let sum: f64 = logs.iter().map(|l| (l - peak).exp()).sum();
    let log_mean = peak + sum.ln() - n.ln();
    Ok((log_mean / q).exp())
}

/// `F_q(s)` for a single scale and moment.
pub fn fluctuation_function(
    profile: &Profile,
    s: usize,
    q: f64,
    m: usize,
    direction: Direction,
) -> Result<f64> {
    let f2 = box_fluctuations(profile, s, m, direction)?;
    q_moment(&f2, q, s)
}

/// `F_q(s)` on the full (scale, q) grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FluctuationSurface {
    pub scales: Vec<usize>,
    pub q: Vec<f64>,
    /// `values[i][j] = F_{q[j]}(scales[i])`.
    pub values: Vec<Vec<f64>>,
    pub boxes_used: Vec<usize>,
}

impl FluctuationSurface {
    pub fn get(&self, scale_index: usize, q_index: usize) -> f64 {
        self.values[scale_index][q_index]
    }
}

/// Generalized Hurst exponents with per-q regression diagnostics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HurstCurve {
    pub q: Vec<f64>,
    pub h: Vec<f64>,
    pub fits: Vec<LineFit>,
    /// Scales that entered the regression.
    pub fit_scales: Vec<usize>,
}

impl HurstCurve {
    /// Builds a curve from bare values (no regression diagnostics).
    pub fn from_values(q: Vec<f64>, h: Vec<f64>) -> Result<Self> {
        if q.len() != h.len() {
            return Err(MfdfaError::InvalidInput(format!(
                "{} q values but {} h values",
                q.len(),
                h.len()
            )));
        }
        if let Some(i) = h.iter().position(|v| !v.is_finite()) {
            return Err(MfdfaError::InvalidInput(format!(
                "non-finite h at q = {}",
                q[i]
            )));
        }
        let fits = h
            .iter()
            .map(|&slope| LineFit {
                slope,
                intercept: 0.0,
                slope_stderr: 0.0,
                r_squared: 1.0,
            })
            .collect();
        Ok(Self {
            q,
            h,
            fits,
            fit_scales: Vec::new(),
        })
    }

    /// `h` at the grid point equal to `q`, if present.
    pub fn at(&self, q: f64) -> Option<f64> {
        self.q
            .iter()
            .position(|&x| (x - q).abs() < 1e-9)
            .map(|i| self.h[i])
    }
}

/// Full MF-DFA of a return series.
pub fn hurst_exponents(
    x: &ReturnSeries,
    cfg: &MfdfaConfig,
) -> Result<(FluctuationSurface, HurstCurve)> {
    hurst_exponents_of(x.values(), cfg)
}

/// [`hurst_exponents`] on a bare slice.
pub fn hurst_exponents_of(x: &[f64], cfg: &MfdfaConfig) -> Result<(FluctuationSurface, HurstCurve)> {
    let cfg = cfg.normalized()?;
    cfg.validate_for_len(x.len())?;
    if is_constant(x) {
        return Err(MfdfaError::ZeroVariance);
    }
    let profile = profile_of(x)?;
    let surface = fluctuation_surface(&profile, &cfg)?;
    let curve = fit_hurst(&surface, &cfg)?;
    Ok((surface, curve))
}

/// Evaluates `F_q(s)` for every configured scale and q. Scales run in
/// parallel; each scale is reduced sequentially, so output is independent
/// of the thread count.
pub fn fluctuation_surface(profile: &Profile, cfg: &MfdfaConfig) -> Result<FluctuationSurface> {
    let y = profile.values();
    let rows: Vec<Result<(Vec<f64>, usize)>> = cfg
        .scales
        .par_iter()
        .map(|&s| {
            if y.len() / s == 0 {
                return Err(MfdfaError::Config(format!(
                    "scale {s} exceeds profile length {}",
                    y.len()
                )));
            }
            let basis = PolyBasis::new(s, cfg.poly_order)?;
            let f2 = detrend::box_fluctuations_with(&basis, y, cfg.direction)?;
            let row = cfg
                .q
                .iter()
                .map(|&q| q_moment(&f2, q, s))
                .collect::<Result<Vec<f64>>>()?;
            Ok((row, f2.len()))
        })
        .collect();
    let mut values = Vec::with_capacity(rows.len());
    let mut boxes_used = Vec::with_capacity(rows.len());
    for r in rows {
        let (row, boxes) = r?;
        values.push(row);
        boxes_used.push(boxes);
    }
    Ok(FluctuationSurface {
        scales: cfg.scales.clone(),
        q: cfg.q.clone(),
        values,
        boxes_used,
    })
}

/// OLS of `ln F_q(s)` on `ln s` over the fit window, one line per q.
pub fn fit_hurst(surface: &FluctuationSurface, cfg: &MfdfaConfig) -> Result<HurstCurve> {
    let idx: Vec<usize> = surface
        .scales
        .iter()
        .enumerate()
        .filter(|(_, &s)| s >= cfg.min_scale && s <= cfg.max_scale)
        .map(|(i, _)| i)
        .collect();
    if idx.len() < 3 {
        return Err(MfdfaError::Config(format!(
            "only {} scales inside fit window [{}, {}]; need at least 3",
            idx.len(),
            cfg.min_scale,
            cfg.max_scale
        )));
    }
    let log_s: Vec<f64> = idx.iter().map(|&i| (surface.scales[i] as f64).ln()).collect();
    let mut h = Vec::with_capacity(surface.q.len());
    let mut fits = Vec::with_capacity(surface.q.len());
    for (j, &q) in surface.q.iter().enumerate() {
        let log_f: Vec<f64> = idx.iter().map(|&i| surface.values[i][j].ln()).collect();
        let fit = fit_line(&log_s, &log_f)
            .filter(|f| f.slope.is_finite())
            .ok_or_else(|| MfdfaError::Numerical(format!("log-log fit failed at q = {q}")))?;
        h.push(fit.slope);
        fits.push(fit);
    }
    Ok(HurstCurve {
        q: surface.q.clone(),
        h,
        fits,
        fit_scales: idx.iter().map(|&i| surface.scales[i]).collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn profile(values: &[f64]) -> Profile {
        Profile::from_raw(values.to_vec()).unwrap()
    }

    #[test]
    fn constant_boxes_give_sqrt_c_for_every_q() {
        let f2 = [2.25; 7];
        for q in [-10.0, -2.0, -0.5, 0.0, 0.5, 2.0, 10.0] {
            let f = q_moment(&f2, q, 8).unwrap();
            assert!((f - 1.5).abs() < 1e-14, "q {q}: {f}");
        }
    }

    #[test]
    fn q2_is_rms() {
        let f2 = [1.0, 4.0, 9.0];
        let f = q_moment(&f2, 2.0, 8).unwrap();
        assert!((f - (14.0f64 / 3.0).sqrt()).abs() < 1e-14);
    }

    #[test]
    fn negative_q_hand_value() {
        // {(1^-1 + 4^-1) / 2}^(-1/2) = (5/8)^(-1/2) = sqrt(8/5)
        let f = q_moment(&[1.0, 4.0], -2.0, 8).unwrap();
        assert!((f - (8.0f64 / 5.0).sqrt()).abs() < 1e-14);
    }

    #[test]
    fn zero_box_rules() {
        let f2 = [0.0, 4.0];
        // q > 0: zero contributes nothing but still counts in the mean
        let f = q_moment(&f2, 2.0, 5).unwrap();
        assert!((f - 2.0f64.sqrt()).abs() < 1e-14);
        for q in [0.0, -1.0] {
            match q_moment(&f2, q, 5) {
                Err(MfdfaError::DegenerateBox { scale, index, .. }) => {
                    assert_eq!((scale, index), (5, 0));
                }
                other => panic!("expected degenerate box, got {other:?}"),
            }
        }
    }

    #[test]
    fn large_q_does_not_overflow() {
        let f2 = [1e-30, 1e-29, 1e-31];
        let f = q_moment(&f2, -40.0, 5).unwrap();
        assert!(f.is_finite() && f > 0.0);
    }

    #[test]
    fn fluctuation_function_matches_boxes() {
        let y: Vec<f64> = (0..40).map(|i| ((i * 7919) % 13) as f64).collect();
        let p = profile(&y);
        let f2 = box_fluctuations(&p, 8, 1, Direction::Both).unwrap();
        assert_eq!(f2.len(), 10);
        let f = fluctuation_function(&p, 8, 2.0, 1, Direction::Both).unwrap();
        let rms = (f2.iter().sum::<f64>() / 10.0).sqrt();
        assert!((f - rms).abs() < 1e-14);
    }

    #[test]
    fn polynomial_profile_reports_degenerate_box() {
        let y: Vec<f64> = (0..200).map(|i| (i as f64).powi(2) * 0.01 - 3.0).collect();
        let p = profile(&y);
        let f2 = box_fluctuations(&p, 20, 2, Direction::Both).unwrap();
        assert!(f2.iter().all(|&v| v == 0.0));
        assert!(matches!(
            fluctuation_function(&p, 20, -2.0, 2, Direction::Both),
            Err(MfdfaError::DegenerateBox { .. })
        ));
        assert!(matches!(
            fluctuation_function(&p, 20, 0.0, 2, Direction::Both),
            Err(MfdfaError::DegenerateBox { .. })
        ));
    }

    #[test]
    fn zero_variance_series_is_reported() {
        let x = ReturnSeries::from_values(vec![0.01; 4000]).unwrap();
        let err = hurst_exponents(&x, &MfdfaConfig::default()).unwrap_err();
        assert_eq!(err, MfdfaError::ZeroVariance);
        assert_eq!(err.to_string(), "degenerate series (zero variance)");
    }

    #[test]
    fn too_few_fit_scales() {
        let x: Vec<f64> = (0..4000).map(|i| ((i * 37) % 11) as f64 - 5.0).collect();
        let cfg = MfdfaConfig { min_scale: 500, ..MfdfaConfig::default() };
        let err = hurst_exponents_of(&x, &cfg).unwrap_err();
        assert!(matches!(err, MfdfaError::Config(_)), "{err}");
    }

    #[test]
    fn short_series_rejected() {
        let x: Vec<f64> = (0..1000).map(|i| (i as f64).sin()).collect();
        assert!(matches!(
            hurst_exponents_of(&x, &MfdfaConfig::default()),
            Err(MfdfaError::Config(_))
        ));
    }

    fn lcg_series(n: usize, seed: u64) -> Vec<f64> {
        let mut s = seed.wrapping_mul(6364136223846793005).wrapping_add(1);
        (0..n)
            .map(|_| {
                s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                (s >> 11) as f64 / (1u64 << 53) as f64 - 0.5
            })
            .collect()
    }

    #[test]
    fn reversed_grid_gives_identical_curve() {
        let x = lcg_series(3000, 3);
        let cfg = MfdfaConfig::default();
        let mut rev = cfg.clone();
        rev.scales.reverse();
        let (_, a) = hurst_exponents_of(&x, &cfg).unwrap();
        let (_, b) = hurst_exponents_of(&x, &rev).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn repeat_runs_are_bit_identical() {
        let x = lcg_series(5000, 11);
        let cfg = MfdfaConfig::default();
        let a = hurst_exponents_of(&x, &cfg).unwrap();
        let b = rayon::ThreadPoolBuilder::new()
            .num_threads(1)
            .build()
            .unwrap()
            .install(|| hurst_exponents_of(&x, &cfg).unwrap());
        assert_eq!(a, b);
    }

    proptest! {
        #[test]
        fn moments_non_decreasing_in_q(
            f2 in prop::collection::vec(1e-6f64..1e3, 1..50),
        ) {
            let qs = q_range(-10.0, 10.0, 0.5).unwrap();
            let f: Vec<f64> = qs.iter().map(|&q| q_moment(&f2, q, 1).unwrap()).collect();
            for w in f.windows(2) {
                prop_assert!(w[1] >= w[0] * (1.0 - 1e-12), "{} < {}", w[1], w[0]);
            }
        }
    }
}
