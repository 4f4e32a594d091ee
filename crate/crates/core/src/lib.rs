//! Multifractal detrended fluctuation analysis (MF-DFA) of daily return
//! series.
//!
//! The pipeline runs prices → log returns → profile → per-box polynomial
//! detrending → `F_q(s)` → `h(q)` → `tau(q)` → `f(alpha)`. Around it sit
//! the usual experimental manipulations: shuffled surrogates, before/after
//! period splits and threshold filtering of extreme returns. [`synth`]
//! provides series with known scaling for validation.
//!
//! ```
//! use mfdfa_core::{analysis::analyze, mfdfa::MfdfaConfig, synth};
//!
//! let x = synth::gaussian_iid(4096, 1).unwrap();
//! let mut cfg = MfdfaConfig::default();
//! cfg.scales = mfdfa_core::mfdfa::log_spaced_scales(16, 256, 10);
//! cfg.min_scale = 16;
//! cfg.max_scale = 256;
//! let a = analyze(&x, &cfg, 1.0).unwrap();
//! assert!((a.hurst.at(2.0).unwrap() - 0.5).abs() < 0.1);
//! ```

pub mod analysis;
pub mod cli;
pub mod csv_io;
pub mod error;
pub mod mfdfa;
pub mod regression;
pub mod series;
pub mod spectrum;
pub mod synth;

pub use error::{MfdfaError, Result};
