use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::mfdfa::{hurst_exponents_of, FluctuationSurface, HurstCurve, MfdfaConfig};
use crate::series::ReturnSeries;
use crate::spectrum::{legendre_spectrum, tau_from_hurst, tau_nonlinearity, SingularitySpectrum, TauCurve};

/// Everything one MF-DFA run produces for a series.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Analysis {
    pub length: usize,
    pub surface: FluctuationSurface,
    pub hurst: HurstCurve,
    pub tau: TauCurve,
    pub tau_nonlinearity: f64,
    pub spectrum: SingularitySpectrum,
}

impl Analysis {
    pub fn delta_alpha(&self) -> f64 {
        self.spectrum.delta_alpha
    }
}

/// Profile, fluctuation surface, `h(q)`, `tau(q)` and `f(alpha)` in one go.
pub fn analyze(x: &ReturnSeries, cfg: &MfdfaConfig, support_dimension: f64) -> Result<Analysis> {
    analyze_values(x.values(), cfg, support_dimension)
}

pub fn analyze_values(x: &[f64], cfg: &MfdfaConfig, support_dimension: f64) -> Result<Analysis> {
    let (surface, hurst) = hurst_exponents_of(x, cfg)?;
    let tau = tau_from_hurst(&hurst, support_dimension);
    let spectrum = legendre_spectrum(&tau)?;
    Ok(Analysis {
        length: x.len(),
        tau_nonlinearity: tau_nonlinearity(&tau)?,
        surface,
        hurst,
        tau,
        spectrum,
    })
}
