//! Mass exponents `tau(q)`, the Legendre transform to `f(alpha)`, the
//! spectrum width and the before/after/surrogate comparison table.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{MfdfaError, Result};
use crate::mfdfa::HurstCurve;
use crate::regression::fit_line;

/// Fractal dimension of the support of a 1-D series.
pub const DEFAULT_SUPPORT_DIMENSION: f64 = 1.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TauCurve {
    pub q: Vec<f64>,
    pub tau: Vec<f64>,
    pub support_dimension: f64,
}

impl TauCurve {
    pub fn new(q: Vec<f64>, tau: Vec<f64>, support_dimension: f64) -> Result<Self> {
        if q.len() != tau.len() {
            return Err(MfdfaError::InvalidInput(format!(
                "{} q values but {} tau values",
                q.len(),
                tau.len()
            )));
        }
        Ok(Self {
            q,
            tau,
            support_dimension,
        })
    }
}

/// `tau(q) = q * h(q) - D_f`.
pub fn tau_from_hurst(h: &HurstCurve, support_dimension: f64) -> TauCurve {
    TauCurve {
        q: h.q.clone(),
        tau: h
            .q
            .iter()
            .zip(&h.h)
            .map(|(&q, &hq)| q * hq - support_dimension)
            .collect(),
        support_dimension,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectrumPoint {
    pub alpha: f64,
    pub f: f64,
    /// Moment the point was derived from.
    pub q: f64,
}

/// The q-grid a spectrum was computed on; widths are only comparable
/// between spectra sharing it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridStamp {
    pub q_min: f64,
    pub q_max: f64,
    pub q_points: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SingularitySpectrum {
    pub points: Vec<SpectrumPoint>,
    pub alpha_min: f64,
    pub alpha_max: f64,
    pub delta_alpha: f64,
    pub grid: GridStamp,
}

impl SingularitySpectrum {
    /// Assembles a spectrum from precomputed points.
    pub fn from_points(points: Vec<SpectrumPoint>) -> Result<Self> {
        if points.is_empty() {
            return Err(MfdfaError::InvalidInput("empty spectrum".into()));
        }
        let alpha_min = points.iter().map(|p| p.alpha).fold(f64::INFINITY, f64::min);
        let alpha_max = points
            .iter()
            .map(|p| p.alpha)
            .fold(f64::NEG_INFINITY, f64::max);
        let q_min = points.iter().map(|p| p.q).fold(f64::INFINITY, f64::min);
        let q_max = points.iter().map(|p| p.q).fold(f64::NEG_INFINITY, f64::max);
        Ok(Self {
            grid: GridStamp {
                q_min,
                q_max,
                q_points: points.len(),
            },
            alpha_min,
            alpha_max,
            delta_alpha: alpha_max - alpha_min,
            points,
        })
    }

    /// The point whose source moment is closest to `q = 0`.
    pub fn apex(&self) -> &SpectrumPoint {
        self.points
            .iter()
            .min_by(|a, b| a.q.abs().total_cmp(&b.q.abs()))
            .expect("spectrum is non-empty")
    }
}

/// `alpha = d tau / dq` (central differences inside, one-sided at the
/// ends) and `f = alpha * q - tau`.
pub fn legendre_spectrum(tau: &TauCurve) -> Result<SingularitySpectrum> {
    let q = &tau.q;
    let t = &tau.tau;
    let n = q.len();
    if n < 3 || t.len() != n {
        return Err(MfdfaError::InvalidInput(format!(
            "Legendre transform needs at least 3 grid points, got {n}"
        )));
    }
    if let Some(w) = q.windows(2).find(|w| w[1].partial_cmp(&w[0]) != Some(std::cmp::Ordering::Greater)) {
        return Err(MfdfaError::Numerical(format!(
            "non-finite derivative of tau at q = {}: grid not strictly increasing",
            w[1]
        )));
    }
    let alpha: Vec<f64> = (0..n)
        .map(|i| {
            let (lo, hi) = match i {
                0 => (0, 1),
                _ if i == n - 1 => (n - 2, n - 1),
                _ => (i - 1, i + 1),
            };
            (t[hi] - t[lo]) / (q[hi] - q[lo])
        })
        .collect();
    let mut points = Vec::with_capacity(n);
    for i in 0..n {
        if !alpha[i].is_finite() {
            return Err(MfdfaError::Numerical(format!(
                "non-finite derivative of tau at q = {}",
                q[i]
            )));
        }
        points.push(SpectrumPoint {
            alpha: alpha[i],
            f: alpha[i] * q[i] - t[i],
            q: q[i],
        });
    }
    SingularitySpectrum::from_points(points)
}

/// `alpha_max - alpha_min`.
pub fn delta_alpha(spec: &SingularitySpectrum) -> f64 {
    spec.alpha_max - spec.alpha_min
}

/// Largest absolute deviation of `tau` from its least-squares line; zero
/// exactly when `tau` is linear on the grid.
pub fn tau_nonlinearity(tau: &TauCurve) -> Result<f64> {
    if tau.q.len() < 3 {
        return Err(MfdfaError::InvalidInput(
            "nonlinearity needs at least 3 grid points".into(),
        ));
    }
    let fit = fit_line(&tau.q, &tau.tau)
        .ok_or_else(|| MfdfaError::Numerical("degenerate q-grid".into()))?;
    Ok(tau
        .q
        .iter()
        .zip(&tau.tau)
        .map(|(&q, &t)| (t - (fit.slope * q + fit.intercept)).abs())
        .fold(0.0, f64::max))
}

/// Role of a spectrum within one market's set of analyses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AnalysisLabel {
    Original,
    Surrogate,
    /// Before the excised window.
    PeriodA,
    /// After the excised window.
    PeriodB,
}

impl AnalysisLabel {
    pub const ALL: [AnalysisLabel; 4] = [
        AnalysisLabel::Original,
        AnalysisLabel::Surrogate,
        AnalysisLabel::PeriodA,
        AnalysisLabel::PeriodB,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            AnalysisLabel::Original => "original",
            AnalysisLabel::Surrogate => "surrogate",
            AnalysisLabel::PeriodA => "period_a",
            AnalysisLabel::PeriodB => "period_b",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabeledSpectrum {
    pub market: String,
    pub label: AnalysisLabel,
    pub spectrum: SingularitySpectrum,
}

/// One market's widths and the four differences.
///
/// `a` is after the excised window (period B), `b` before it (period A),
/// `o` the whole-period original and `s` its surrogate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonRow {
    pub market: String,
    pub delta_alpha_after: f64,
    pub delta_alpha_before: f64,
    pub delta_alpha_original: f64,
    pub delta_alpha_surrogate: f64,
    pub after_minus_before: f64,
    pub original_minus_surrogate: f64,
    pub after_minus_surrogate: f64,
    pub before_minus_surrogate: f64,
}

impl ComparisonRow {
    pub fn from_widths(market: &str, after: f64, before: f64, original: f64, surrogate: f64) -> Self {
        Self {
            market: market.to_string(),
            delta_alpha_after: after,
            delta_alpha_before: before,
            delta_alpha_original: original,
            delta_alpha_surrogate: surrogate,
            after_minus_before: after - before,
            original_minus_surrogate: original - surrogate,
            after_minus_surrogate: after - surrogate,
            before_minus_surrogate: before - surrogate,
        }
    }

    /// The four difference columns in table order.
    pub fn differences(&self) -> [f64; 4] {
        [
            self.after_minus_before,
            self.original_minus_surrogate,
            self.after_minus_surrogate,
            self.before_minus_surrogate,
        ]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonTable {
    pub rows: Vec<ComparisonRow>,
}

impl ComparisonTable {
    pub fn row(&self, market: &str) -> Option<&ComparisonRow> {
        self.rows.iter().find(|r| r.market == market)
    }

    /// Aligned plain-text rendering.
    pub fn to_text(&self) -> String {
        let width = self
            .rows
            .iter()
            .map(|r| r.market.len())
            .chain(std::iter::once("market".len()))
            .max()
            .unwrap_or(6);
        let mut out = String::new();
        let _ = writeln!(
            out,
            "{:<width$}  {:>10}  {:>10}  {:>10}  {:>10}",
            "market", "da_a-da_b", "da_o-da_s", "da_a-da_s", "da_b-da_s"
        );
        for r in &self.rows {
            let d = r.differences();
            let _ = writeln!(
                out,
                "{:<width$}  {:>10.4}  {:>10.4}  {:>10.4}  {:>10.4}",
                r.market, d[0], d[1], d[2], d[3]
            );
        }
        out
    }
}

/// Builds per-market difference rows. Every market needs all four labels;
/// rows are ordered by market name.
pub fn comparison_table(analyses: &[LabeledSpectrum]) -> Result<ComparisonTable> {
    let mut widths: BTreeMap<&str, BTreeMap<AnalysisLabel, f64>> = BTreeMap::new();
    for a in analyses {
        widths
            .entry(a.market.as_str())
            .or_default()
            .insert(a.label, delta_alpha(&a.spectrum));
    }
    if widths.is_empty() {
        return Err(MfdfaError::InvalidInput("no analyses supplied".into()));
    }
    let missing: Vec<String> = widths
        .iter()
        .flat_map(|(market, labels)| {
            AnalysisLabel::ALL
                .iter()
                .filter(|l| !labels.contains_key(l))
                .map(move |l| format!("{market}/{}", l.as_str()))
        })
        .collect();
    if !missing.is_empty() {
        return Err(MfdfaError::InvalidInput(format!(
            "missing analyses: {}",
            missing.join(", ")
        )));
    }
    let rows = widths
        .iter()
        .map(|(market, w)| {
            ComparisonRow::from_widths(
                market,
                w[&AnalysisLabel::PeriodB],
                w[&AnalysisLabel::PeriodA],
                w[&AnalysisLabel::Original],
                w[&AnalysisLabel::Surrogate],
            )
        })
        .collect();
    Ok(ComparisonTable { rows })
}
