//! C ABI over `mfdfa-core`.
//!
//! Every function returns an [`MfdfaStatus`]; on failure a message is kept
//! per thread and can be read with [`mfdfa_last_error_message`]. Analyses
//! live behind the opaque [`MfdfaAnalysis`] handle and must be released
//! with [`mfdfa_analysis_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use mfdfa_core::analysis::{analyze_values, Analysis};
use mfdfa_core::mfdfa::{
    log_spaced_scales, q_range, Direction, MfdfaConfig, DEFAULT_MAX_SCALE, DEFAULT_MIN_SCALE,
    DEFAULT_POLY_ORDER, DEFAULT_Q_MAX, DEFAULT_Q_MIN, DEFAULT_Q_STEP, DEFAULT_SCALE_COUNT,
};
use mfdfa_core::series::{shuffle_surrogate, threshold_filter, ReturnSeries};
use mfdfa_core::spectrum::DEFAULT_SUPPORT_DIMENSION;
use mfdfa_core::synth::{binomial_cascade, CascadeSpec};
use mfdfa_core::MfdfaError;

/// Result of every call. The first three values match the CLI exit codes.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MfdfaStatus {
    Ok = 0,
    InvalidInput = 1,
    Config = 2,
    Numerical = 3,
    NullPointer = 4,
    BufferTooSmall = 5,
    Panic = 6,
}

/// Direction code for [`MfdfaOptions::direction`]: forward boxes only.
pub const MFDFA_DIRECTION_FORWARD: u32 = 0;
/// Direction code for [`MfdfaOptions::direction`]: boxes from both ends.
pub const MFDFA_DIRECTION_BOTH: u32 = 1;

/// Engine settings. Obtain defaults from [`mfdfa_options_default`].
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MfdfaOptions {
    pub poly_order: u32,
    pub scale_min: usize,
    pub scale_max: usize,
    pub scale_count: usize,
    pub q_min: f64,
    pub q_max: f64,
    pub q_step: f64,
    pub direction: u32,
    pub support_dimension: f64,
}

/// Opaque analysis result.
pub struct MfdfaAnalysis {
    inner: Analysis,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(message: String) {
    let c = CString::new(message.replace('\0', " ")).expect("NUL bytes removed");
    LAST_ERROR.with(|slot| *slot.borrow_mut() = Some(c));
}

fn fail(status: MfdfaStatus, message: impl Into<String>) -> MfdfaStatus {
    set_error(message.into());
    status
}

fn from_error(e: MfdfaError) -> MfdfaStatus {
    let status = match e.exit_code() {
        2 => MfdfaStatus::Config,
        3 => MfdfaStatus::Numerical,
        _ => MfdfaStatus::InvalidInput,
    };
    fail(status, e.to_string())
}

fn guarded(body: impl FnOnce() -> MfdfaStatus) -> MfdfaStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(status) => status,
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            fail(MfdfaStatus::Panic, format!("panic: {msg}"))
        }
    }
}

/// # Safety
/// `x` must be null or point to `n` readable doubles.
unsafe fn input<'a>(x: *const f64, n: usize) -> Result<&'a [f64], MfdfaStatus> {
    if x.is_null() {
        return Err(fail(MfdfaStatus::NullPointer, "input pointer is null"));
    }
    Ok(std::slice::from_raw_parts(x, n))
}

/// # Safety
/// `out` must be null or point to `n` writable doubles.
unsafe fn output<'a>(out: *mut f64, n: usize) -> Result<&'a mut [f64], MfdfaStatus> {
    if out.is_null() {
        return Err(fail(MfdfaStatus::NullPointer, "output pointer is null"));
    }
    Ok(std::slice::from_raw_parts_mut(out, n))
}

fn config_from(o: &MfdfaOptions) -> Result<MfdfaConfig, MfdfaError> {
    let direction = match o.direction {
        MFDFA_DIRECTION_FORWARD => Direction::Forward,
        MFDFA_DIRECTION_BOTH => Direction::Both,
        d => return Err(MfdfaError::Config(format!("unknown direction code {d}"))),
    };
    Ok(MfdfaConfig {
        poly_order: o.poly_order as usize,
        scales: log_spaced_scales(o.scale_min, o.scale_max, o.scale_count),
        q: q_range(o.q_min, o.q_max, o.q_step)?,
        min_scale: o.scale_min,
        max_scale: o.scale_max,
        direction,
    })
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn mfdfa_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Message of the last failed call on this thread, or null if none.
/// The pointer stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn mfdfa_last_error_message() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

#[no_mangle]
pub extern "C" fn mfdfa_options_default() -> MfdfaOptions {
    MfdfaOptions {
        poly_order: DEFAULT_POLY_ORDER as u32,
        scale_min: DEFAULT_MIN_SCALE,
        scale_max: DEFAULT_MAX_SCALE,
        scale_count: DEFAULT_SCALE_COUNT,
        q_min: DEFAULT_Q_MIN,
        q_max: DEFAULT_Q_MAX,
        q_step: DEFAULT_Q_STEP,
        direction: MFDFA_DIRECTION_BOTH,
        support_dimension: DEFAULT_SUPPORT_DIMENSION,
    }
}

/// Runs the full analysis on `n` returns. `options` may be null for the
/// defaults. On success `*out` receives a handle owned by the caller.
///
/// # Safety
/// `x` must point to `n` doubles, `options` must be null or valid, and
/// `out` must be a valid pointer to writable storage.
#[no_mangle]
pub unsafe extern "C" fn mfdfa_analysis_run(
    x: *const f64,
    n: usize,
    options: *const MfdfaOptions,
    out: *mut *mut MfdfaAnalysis,
) -> MfdfaStatus {
    guarded(|| {
        if out.is_null() {
            return fail(MfdfaStatus::NullPointer, "output handle pointer is null");
        }
        *out = ptr::null_mut();
        let x = match input(x, n) {
            Ok(x) => x,
            Err(s) => return s,
        };
        let opts = if options.is_null() {
            mfdfa_options_default()
        } else {
            *options
        };
        let result = config_from(&opts).and_then(|cfg| analyze_values(x, &cfg, opts.support_dimension));
        match result {
            Ok(inner) => {
                *out = Box::into_raw(Box::new(MfdfaAnalysis { inner }));
                MfdfaStatus::Ok
            }
            Err(e) => from_error(e),
        }
    })
}

/// Releases a handle from [`mfdfa_analysis_run`]. Null is ignored.
///
/// # Safety
/// `handle` must be null or a live handle not freed before.
#[no_mangle]
pub unsafe extern "C" fn mfdfa_analysis_free(handle: *mut MfdfaAnalysis) {
    if !handle.is_null() {
        drop(Box::from_raw(handle));
    }
}

/// Number of q values, which is the length of every per-q array. Returns 0
/// for a null handle.
///
/// # Safety
/// `handle` must be null or live.
#[no_mangle]
pub unsafe extern "C" fn mfdfa_analysis_len(handle: *const MfdfaAnalysis) -> usize {
    handle.as_ref().map_or(0, |h| h.inner.hurst.q.len())
}

/// # Safety
/// `handle` must be null or live; `out` must be null or writable.
#[no_mangle]
pub unsafe extern "C" fn mfdfa_analysis_delta_alpha(
    handle: *const MfdfaAnalysis,
    out: *mut f64,
) -> MfdfaStatus {
    guarded(|| match (handle.as_ref(), out.is_null()) {
        (Some(h), false) => {
            *out = h.inner.delta_alpha();
            MfdfaStatus::Ok
        }
        _ => fail(MfdfaStatus::NullPointer, "null handle or output"),
    })
}

unsafe fn copy_series(
    handle: *const MfdfaAnalysis,
    out: *mut f64,
    len: usize,
    pick: impl Fn(&Analysis) -> Vec<f64>,
) -> MfdfaStatus {
    guarded(|| {
        let Some(h) = handle.as_ref() else {
            return fail(MfdfaStatus::NullPointer, "null handle");
        };
        let values = pick(&h.inner);
        if len < values.len() {
            return fail(
                MfdfaStatus::BufferTooSmall,
                format!("buffer holds {len} values, need {}", values.len()),
            );
        }
        match output(out, values.len()) {
            Ok(buf) => {
                buf.copy_from_slice(&values);
                MfdfaStatus::Ok
            }
            Err(s) => s,
        }
    })
}

/// Copies the q-grid into `out` (capacity `len`).
///
/// # Safety
/// `handle` must be null or live; `out` must hold `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn mfdfa_analysis_q(handle: *const MfdfaAnalysis, out: *mut f64, len: usize) -> MfdfaStatus {
    copy_series(handle, out, len, |a| a.hurst.q.clone())
}

/// Copies `h(q)`.
///
/// # Safety
/// As [`mfdfa_analysis_q`].
#[no_mangle]
pub unsafe extern "C" fn mfdfa_analysis_hurst(handle: *const MfdfaAnalysis, out: *mut f64, len: usize) -> MfdfaStatus {
    copy_series(handle, out, len, |a| a.hurst.h.clone())
}

/// Copies `tau(q)`.
///
/// # Safety
/// As [`mfdfa_analysis_q`].
#[no_mangle]
pub unsafe extern "C" fn mfdfa_analysis_tau(handle: *const MfdfaAnalysis, out: *mut f64, len: usize) -> MfdfaStatus {
    copy_series(handle, out, len, |a| a.tau.tau.clone())
}

/// Copies `alpha(q)`.
///
/// # Safety
/// As [`mfdfa_analysis_q`].
#[no_mangle]
pub unsafe extern "C" fn mfdfa_analysis_alpha(handle: *const MfdfaAnalysis, out: *mut f64, len: usize) -> MfdfaStatus {
    copy_series(handle, out, len, |a| a.spectrum.points.iter().map(|p| p.alpha).collect())
}

/// Copies `f(alpha(q))`.
///
/// # Safety
/// As [`mfdfa_analysis_q`].
#[no_mangle]
pub unsafe extern "C" fn mfdfa_analysis_f(handle: *const MfdfaAnalysis, out: *mut f64, len: usize) -> MfdfaStatus {
    copy_series(handle, out, len, |a| a.spectrum.points.iter().map(|p| p.f).collect())
}

/// Seeded uniform permutation of `x` written to `out`; both hold `n` values.
///
/// # Safety
/// `x` and `out` must each hold `n` doubles; they may not overlap.
#[no_mangle]
pub unsafe extern "C" fn mfdfa_shuffle(x: *const f64, n: usize, seed: u64, out: *mut f64) -> MfdfaStatus {
    guarded(|| {
        let (x, out) = match (input(x, n), output(out, n)) {
            (Ok(x), Ok(o)) => (x, o),
            (Err(s), _) | (_, Err(s)) => return s,
        };
        match ReturnSeries::from_values(x.to_vec()) {
            Ok(series) => {
                out.copy_from_slice(shuffle_surrogate(&series, seed).values());
                MfdfaStatus::Ok
            }
            Err(e) => from_error(e),
        }
    })
}

/// Replaces points with `|x| > k * sigma` by linear interpolation.
///
/// # Safety
/// `x` and `out` must each hold `n` doubles; they may not overlap.
#[no_mangle]
pub unsafe extern "C" fn mfdfa_threshold_filter(x: *const f64, n: usize, k: f64, out: *mut f64) -> MfdfaStatus {
    guarded(|| {
        let (x, out) = match (input(x, n), output(out, n)) {
            (Ok(x), Ok(o)) => (x, o),
            (Err(s), _) | (_, Err(s)) => return s,
        };
        match ReturnSeries::from_values(x.to_vec()).and_then(|s| threshold_filter(&s, k)) {
            Ok(f) => {
                out.copy_from_slice(f.values());
                MfdfaStatus::Ok
            }
            Err(e) => from_error(e),
        }
    })
}

/// Writes a `2^levels`-point binomial cascade into `out` (capacity `len`).
///
/// # Safety
/// `out` must hold `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn mfdfa_binomial_cascade(
    levels: u32,
    a: f64,
    seed: u64,
    out: *mut f64,
    len: usize,
) -> MfdfaStatus {
    guarded(|| {
        let series = match binomial_cascade(&CascadeSpec { levels, a, seed }) {
            Ok(s) => s,
            Err(e) => return from_error(e),
        };
        if len < series.len() {
            return fail(
                MfdfaStatus::BufferTooSmall,
                format!("buffer holds {len} values, need {}", series.len()),
            );
        }
        match output(out, series.len()) {
            Ok(buf) => {
                buf.copy_from_slice(series.values());
                MfdfaStatus::Ok
            }
            Err(s) => s,
        }
    })
}
