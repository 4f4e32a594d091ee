//! Per-box polynomial detrending.
//!
//! All boxes at one scale share the same abscissae, so an orthonormal basis
//! for the degree-`m` polynomials on `s` equally spaced points is built once
//! per scale and each box is then detrended by projection. Abscissae are
//! mapped to `[-1, 1]` before orthogonalisation to keep the Vandermonde
//! columns well conditioned.

use crate::error::{MfdfaError, Result};

use super::config::Direction;

/// Boxes whose mean-square residual falls below this fraction of the
/// box's mean-square profile value are treated as exactly polynomial.
pub const DEGENERATE_RELATIVE: f64 = 1e-24;

/// Largest detrending order accepted by the low-level routines.
pub const MAX_ORDER: usize = 10;

/// Orthonormal polynomial basis on `s` equally spaced points.
#[derive(Debug, Clone)]
pub struct PolyBasis {
    len: usize,
    /// `order + 1` orthonormal columns, each of length `len`.
    columns: Vec<Vec<f64>>,
}

impl PolyBasis {
    pub fn new(len: usize, order: usize) -> Result<Self> {
        if order > MAX_ORDER {
            return Err(MfdfaError::Config(format!(
                "detrending order {order} exceeds {MAX_ORDER}"
            )));
        }
        if len < order + 2 {
            return Err(MfdfaError::Config(format!(
                "scale {len} too small for order-{order} detrending (need >= {})",
                order + 2
            )));
        }
        let half = (len - 1) as f64 / 2.0;
        let t: Vec<f64> = (0..len).map(|i| (i as f64 - half) / half).collect();
        let mut columns: Vec<Vec<f64>> = Vec::with_capacity(order + 1);
        for j in 0..=order {
            let mut v: Vec<f64> = t.iter().map(|&ti| ti.powi(j as i32)).collect();
            // two passes of modified Gram-Schmidt
            for _ in 0..2 {
                for c in &columns {
                    let d = dot(c, &v);
                    v.iter_mut().zip(c).for_each(|(vi, ci)| *vi -= d * ci);
                }
            }
            let norm = dot(&v, &v).sqrt();
            v.iter_mut().for_each(|vi| *vi /= norm);
            columns.push(v);
        }
        Ok(Self { len, columns })
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn order(&self) -> usize {
        self.columns.len() - 1
    }

    /// Residual of `y` after removing its least-squares polynomial fit.
    pub fn residual(&self, y: &[f64]) -> Vec<f64> {
        debug_assert_eq!(y.len(), self.len);
        let mut r = y.to_vec();
        for c in &self.columns {
            let d = dot(c, &r);
            r.iter_mut().zip(c).for_each(|(ri, ci)| *ri -= d * ci);
        }
        r
    }

    /// `F2 = (1/s) * sum of squared residuals`, snapped to 0 for boxes that
    /// are polynomial up to rounding.
    pub fn mean_square_residual(&self, y: &[f64]) -> f64 {
        let r = self.residual(y);
        let s = self.len as f64;
        let f2 = dot(&r, &r) / s;
        let scale = dot(y, y) / s;
        if f2 <= DEGENERATE_RELATIVE * scale {
            0.0
        } else {
            f2
        }
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Start offsets of the boxes at scale `s` for a profile of length `n`.
/// Forward boxes come first, then (for `Both`) the boxes counted from the end.
pub fn box_starts(n: usize, s: usize, direction: Direction) -> Vec<usize> {
    let count = n / s;
    let forward = (0..count).map(|v| v * s);
    match direction {
        Direction::Forward => forward.collect(),
        Direction::Both => forward.chain((0..count).map(|v| n - (v + 1) * s)).collect(),
    }
}

/// Per-box mean-square residuals `F2(s, v)` after order-`m` detrending.
pub fn box_fluctuations_raw(
    profile: &[f64],
    s: usize,
    order: usize,
    direction: Direction,
) -> Result<Vec<f64>> {
    let basis = PolyBasis::new(s, order)?;
    box_fluctuations_with(&basis, profile, direction)
}

pub(crate) fn box_fluctuations_with(
    basis: &PolyBasis,
    profile: &[f64],
    direction: Direction,
) -> Result<Vec<f64>> {
    let s = basis.len();
    if profile.len() < s {
        return Err(MfdfaError::Config(format!(
            "scale {s} exceeds profile length {}",
            profile.len()
        )));
    }
    Ok(box_starts(profile.len(), s, direction)
        .into_iter()
        .map(|start| basis.mean_square_residual(&profile[start..start + s]))
        .collect())
}
