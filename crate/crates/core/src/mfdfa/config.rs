use serde::{Deserialize, Serialize};

use crate::error::{MfdfaError, Result};

/// Which boxes tile the profile at each scale.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    /// `floor(N/s)` boxes from the start; the tail remainder is dropped.
    Forward,
    /// The forward boxes plus `floor(N/s)` boxes counted from the end.
    Both,
}

impl std::str::FromStr for Direction {
    type Err = MfdfaError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "forward" => Ok(Direction::Forward),
            "both" | "bidirectional" => Ok(Direction::Both),
            other => Err(MfdfaError::Config(format!(
                "unknown direction {other:?} (expected forward|both)"
            ))),
        }
    }
}

pub const DEFAULT_POLY_ORDER: usize = 2;
pub const DEFAULT_MIN_SCALE: usize = 40;
pub const DEFAULT_MAX_SCALE: usize = 600;
pub const DEFAULT_SCALE_COUNT: usize = 20;
pub const DEFAULT_Q_MIN: f64 = -10.0;
pub const DEFAULT_Q_MAX: f64 = 10.0;
pub const DEFAULT_Q_STEP: f64 = 0.5;
pub const MAX_POLY_ORDER: usize = 4;

/// Engine configuration: detrending order, scale grid, fit window, q-grid
/// and box direction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MfdfaConfig {
    pub poly_order: usize,
    /// Box sizes at which `F_q(s)` is evaluated.
    pub scales: Vec<usize>,
    pub q: Vec<f64>,
    /// Inclusive fit window for the log-log regression.
    pub min_scale: usize,
    pub max_scale: usize,
    pub direction: Direction,
}

impl Default for MfdfaConfig {
    fn default() -> Self {
        Self {
            poly_order: DEFAULT_POLY_ORDER,
            scales: log_spaced_scales(DEFAULT_MIN_SCALE, DEFAULT_MAX_SCALE, DEFAULT_SCALE_COUNT),
            q: q_range(DEFAULT_Q_MIN, DEFAULT_Q_MAX, DEFAULT_Q_STEP)
                .expect("default q-grid is valid"),
            min_scale: DEFAULT_MIN_SCALE,
            max_scale: DEFAULT_MAX_SCALE,
            direction: Direction::Both,
        }
    }
}

/// `count` logarithmically spaced integer scales in `[min, max]`, rounded
/// and deduplicated.
pub fn log_spaced_scales(min: usize, max: usize, count: usize) -> Vec<usize> {
    if count == 0 || min == 0 || max < min {
        return Vec::new();
    }
    if count == 1 || min == max {
        return vec![min];
    }
    let ratio = (max as f64 / min as f64).ln();
    let mut out: Vec<usize> = (0..count)
        .map(|i| {
            let t = i as f64 / (count - 1) as f64;
            ((min as f64) * (ratio * t).exp()).round() as usize
        })
        .map(|s| s.clamp(min, max))
        .collect();
    out.dedup();
    out
}

/// `min, min + step, ..., <= max`. Points are generated as `min + i*step`
/// and snapped to a 1e-9 lattice so that 0 lands exactly on 0.
pub fn q_range(min: f64, max: f64, step: f64) -> Result<Vec<f64>> {
    if !(min.is_finite() && max.is_finite() && step.is_finite()) || step <= 0.0 || max < min {
        return Err(MfdfaError::Config(format!(
            "invalid q-grid min={min} max={max} step={step}"
        )));
    }
    let n = ((max - min) / step + 1e-9).floor() as usize;
    if n > 100_000 {
        return Err(MfdfaError::Config(format!("q-grid too large ({} points)", n + 1)));
    }
    Ok((0..=n)
        .map(|i| {
            let q = min + i as f64 * step;
            (q * 1e9).round() / 1e9
        })
        .collect())
}

impl MfdfaConfig {
    /// Sorts and deduplicates both grids and checks the structural
    /// invariants that do not depend on the series length.
    pub fn normalized(&self) -> Result<MfdfaConfig> {
        let mut cfg = self.clone();
        if cfg.poly_order < 1 || cfg.poly_order > MAX_POLY_ORDER {
            return Err(MfdfaError::Config(format!(
                "poly_order must be in 1..={MAX_POLY_ORDER}, got {}",
                cfg.poly_order
            )));
        }
        cfg.scales.sort_unstable();
        cfg.scales.dedup();
        if cfg.scales.is_empty() {
            return Err(MfdfaError::Config("empty scale grid".into()));
        }
        if let Some(q) = cfg.q.iter().find(|q| !q.is_finite()) {
            return Err(MfdfaError::Config(format!("non-finite q value {q}")));
        }
        cfg.q.sort_by(f64::total_cmp);
        cfg.q.dedup();
        if cfg.q.is_empty() {
            return Err(MfdfaError::Config("empty q-grid".into()));
        }
        if cfg.min_scale > cfg.max_scale {
            return Err(MfdfaError::Config(format!(
                "fit window [{}, {}] is empty",
                cfg.min_scale, cfg.max_scale
            )));
        }
        let smallest = cfg.scales[0];
        if smallest < cfg.poly_order + 2 {
            return Err(MfdfaError::Config(format!(
                "scale {smallest} too small for order-{} detrending (need >= {})",
                cfg.poly_order,
                cfg.poly_order + 2
            )));
        }
        Ok(cfg)
    }

    /// Checks `m + 2 <= s <= len / 4` for every scale.
    pub fn validate_for_len(&self, len: usize) -> Result<()> {
        let cfg = self.normalized()?;
        let largest = *cfg.scales.last().expect("normalized grid is non-empty");
        if largest * 4 > len {
            return Err(MfdfaError::Config(format!(
                "series length {len} too short for scale {largest} (need >= {})",
                largest * 4
            )));
        }
        Ok(())
    }

    /// Drops scales above `len / 4` and pulls the fit window in accordingly.
    pub fn restricted_to_len(&self, len: usize) -> Result<MfdfaConfig> {
        let mut cfg = self.normalized()?;
        let limit = len / 4;
        cfg.scales.retain(|&s| s <= limit);
        if cfg.scales.is_empty() {
            return Err(MfdfaError::Config(format!(
                "series length {len} too short for any configured scale"
            )));
        }
        cfg.max_scale = cfg.max_scale.min(limit);
        if cfg.min_scale > cfg.max_scale {
            return Err(MfdfaError::Config(format!(
                "series length {len} leaves an empty fit window"
            )));
        }
        Ok(cfg)
    }

    /// Number of scales inside the fit window.
    pub fn fit_scale_count(&self) -> usize {
        self.scales
            .iter()
            .filter(|&&s| s >= self.min_scale && s <= self.max_scale)
            .count()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_scales_span_window() {
        let s = MfdfaConfig::default().scales;
        assert_eq!(s.first(), Some(&40));
        assert_eq!(s.last(), Some(&600));
        assert_eq!(s.len(), 20);
        assert!(s.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn default_q_grid() {
        let q = MfdfaConfig::default().q;
        assert_eq!(q.len(), 41);
        assert_eq!(q[0], -10.0);
        assert_eq!(q[20], 0.0);
        assert_eq!(q[40], 10.0);
        assert_eq!(q[21], 0.5);
    }

    #[test]
    fn q_range_handles_non_representable_steps() {
        let q = q_range(-1.0, 1.0, 0.1).unwrap();
        assert_eq!(q.len(), 21);
        assert_eq!(q[10], 0.0);
        assert_eq!(q[20], 1.0);
        assert!(q_range(1.0, -1.0, 0.1).is_err());
        assert!(q_range(-1.0, 1.0, 0.0).is_err());
    }

    #[test]
    fn dedup_after_rounding() {
        let s = log_spaced_scales(4, 8, 20);
        assert_eq!(s, vec![4, 5, 6, 7, 8]);
    }

    #[test]
    fn normalization_sorts_grids() {
        let mut cfg = MfdfaConfig::default();
        cfg.scales.reverse();
        cfg.q.reverse();
        assert_eq!(cfg.normalized().unwrap(), MfdfaConfig::default());
    }

    #[test]
    fn invalid_configs() {
        let mut cfg = MfdfaConfig { poly_order: 0, ..MfdfaConfig::default() };
        assert!(cfg.normalized().is_err());
        cfg.poly_order = 5;
        assert!(cfg.normalized().is_err());

        let cfg = MfdfaConfig { poly_order: 3, scales: vec![4, 10], ..MfdfaConfig::default() };
        assert!(cfg.normalized().is_err());

        let cfg = MfdfaConfig::default();
        assert!(cfg.validate_for_len(2399).is_err());
        assert!(cfg.validate_for_len(2400).is_ok());
    }

    #[test]
    fn restriction_drops_large_scales() {
        let cfg = MfdfaConfig::default().restricted_to_len(1600).unwrap();
        assert!(cfg.scales.iter().all(|&s| s <= 400));
        assert_eq!(cfg.max_scale, 400);
        assert!(MfdfaConfig::default().restricted_to_len(100).is_err());
    }

    #[test]
    fn direction_parsing_and_serde() {
        assert_eq!("forward".parse::<Direction>().unwrap(), Direction::Forward);
        assert_eq!("both".parse::<Direction>().unwrap(), Direction::Both);
        assert!("sideways".parse::<Direction>().is_err());
        assert_eq!(serde_json::to_string(&Direction::Both).unwrap(), "\"both\"");
    }
}
