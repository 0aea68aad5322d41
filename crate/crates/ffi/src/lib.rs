//! C interface to `copsym`.
//!
//! Samples and test results are opaque handles owned by the caller and
//! released with the matching `*_free` function. Every fallible call returns
//! a [`CopsymStatus`]; on failure `copsym_last_error_message` describes the
//! error for the calling thread. Panics are caught at the boundary and
//! reported as `COPSYM_STATUS_PANIC`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use copsym::{
    modified_band_depth, pseudo_observations, run_test, tau_to_params, CopulaSpec, CurveMatrix,
    DataMatrix, Error, Provenance, Symmetry, TestConfig, TestResult, UniformSample,
};

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CopsymStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidParameter = 2,
    InvalidInput = 3,
    NumericFailure = 4,
    Panic = 5,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CopsymSymmetry {
    Reflection = 0,
    Radial = 1,
    Joint = 2,
}

impl From<CopsymSymmetry> for Symmetry {
    fn from(s: CopsymSymmetry) -> Self {
        match s {
            CopsymSymmetry::Reflection => Symmetry::Reflection,
            CopsymSymmetry::Radial => Symmetry::Radial,
            CopsymSymmetry::Joint => Symmetry::Joint,
        }
    }
}

impl From<Symmetry> for CopsymSymmetry {
    fn from(s: Symmetry) -> Self {
        match s {
            Symmetry::Reflection => CopsymSymmetry::Reflection,
            Symmetry::Radial => CopsymSymmetry::Radial,
            Symmetry::Joint => CopsymSymmetry::Joint,
        }
    }
}

/// Test configuration; fill with `copsym_test_config_default`.
#[repr(C)]
#[derive(Clone, Copy, Debug)]
pub struct CopsymTestConfig {
    pub symmetry: CopsymSymmetry,
    pub m: usize,
    pub m0: usize,
    pub p: usize,
    pub n_boot: usize,
    pub alpha: f64,
    pub seed: u64,
    pub share_null: bool,
    pub fixed_anchors: bool,
}

impl From<TestConfig> for CopsymTestConfig {
    fn from(c: TestConfig) -> Self {
        CopsymTestConfig {
            symmetry: c.sym.into(),
            m: c.m,
            m0: c.m0,
            p: c.p,
            n_boot: c.n_boot,
            alpha: c.alpha,
            seed: c.seed,
            share_null: c.share_null,
            fixed_anchors: c.fixed_anchors,
        }
    }
}

impl From<&CopsymTestConfig> for TestConfig {
    fn from(c: &CopsymTestConfig) -> Self {
        TestConfig {
            sym: c.symmetry.into(),
            m: c.m,
            m0: c.m0,
            p: c.p,
            n_boot: c.n_boot,
            alpha: c.alpha,
            seed: c.seed,
            share_null: c.share_null,
            fixed_anchors: c.fixed_anchors,
        }
    }
}

/// A bivariate sample on the unit square.
pub struct CopsymSample(UniformSample);

/// Outcome of one symmetry test.
pub struct CopsymTestResult(TestResult);

struct Failure(CopsymStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let status = match e {
            Error::InvalidParameter(_) | Error::UnsupportedTau { .. } | Error::InvalidConfig(_) => {
                CopsymStatus::InvalidParameter
            }
            Error::NumericFailure(_) => CopsymStatus::NumericFailure,
            _ => CopsymStatus::InvalidInput,
        };
        Failure(status, e.to_string())
    }
}

fn null(what: &str) -> Failure {
    Failure(CopsymStatus::NullPointer, format!("{what} is null"))
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    // interior NULs cannot cross the boundary
    let msg = CString::new(msg.replace('\0', " ")).expect("no interior NUL");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(msg));
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> CopsymStatus {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => CopsymStatus::Ok,
        Ok(Err(Failure(status, msg))) => {
            set_error(msg);
            status
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_error(format!("panic: {msg}"));
            CopsymStatus::Panic
        }
    }
}

unsafe fn slice<'a, T>(data: *const T, len: usize, what: &str) -> Result<&'a [T], Failure> {
    if len == 0 {
        return Ok(&[]);
    }
    if data.is_null() {
        return Err(null(what));
    }
    Ok(std::slice::from_raw_parts(data, len))
}

unsafe fn string<'a>(s: *const c_char, what: &str) -> Result<&'a str, Failure> {
    if s.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(s)
        .to_str()
        .map_err(|_| Failure(CopsymStatus::InvalidInput, format!("{what} is not UTF-8")))
}

unsafe fn put<T>(out: *mut *mut T, value: T) -> Result<(), Failure> {
    if out.is_null() {
        return Err(null("output pointer"));
    }
    *out = Box::into_raw(Box::new(value));
    Ok(())
}

unsafe fn write<T>(out: *mut T, value: T) -> Result<(), Failure> {
    if out.is_null() {
        return Err(null("output pointer"));
    }
    *out = value;
    Ok(())
}

unsafe fn handle<'a, T>(h: *const T, what: &str) -> Result<&'a T, Failure> {
    h.as_ref().ok_or_else(|| null(what))
}

/// Message of the last failed call on this thread, or NULL after a success.
/// The pointer stays valid until the next `copsym_*` call on the same thread.
#[no_mangle]
pub extern "C" fn copsym_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn copsym_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Wrap `n` points given as interleaved `u0, v0, u1, v1, ...` in `(0, 1]`.
///
/// # Safety
/// `uv` must point to `2 * n` readable doubles and `out` to writable storage.
#[no_mangle]
pub unsafe extern "C" fn copsym_sample_from_points(
    uv: *const f64,
    n: usize,
    out: *mut *mut CopsymSample,
) -> CopsymStatus {
    guard(|| {
        let flat = slice(uv, n.checked_mul(2).ok_or_else(|| null("uv"))?, "uv")?;
        let points = flat.chunks_exact(2).map(|c| [c[0], c[1]]).collect();
        put(out, CopsymSample(UniformSample::new(points, Provenance::Direct)?))
    })
}

/// Pseudo-observations (midranks divided by `n`) of two raw columns.
///
/// # Safety
/// `x` and `y` must each point to `n` readable doubles.
#[no_mangle]
pub unsafe extern "C" fn copsym_pseudo_observations(
    x: *const f64,
    y: *const f64,
    n: usize,
    out: *mut *mut CopsymSample,
) -> CopsymStatus {
    guard(|| {
        let columns = vec![slice(x, n, "x")?.to_vec(), slice(y, n, "y")?.to_vec()];
        let data = DataMatrix::new(columns, vec!["x".into(), "y".into()])?;
        put(out, CopsymSample(pseudo_observations(&data, 0, 1)?))
    })
}

/// Draw `n` points from a copula given as JSON, for example
/// `{"family":"clayton","params":[2.0]}` or
/// `{"family":"khoudraji","delta":0.5,"inner":{"family":"gumbel","params":[2.0]}}`.
///
/// # Safety
/// `spec_json` must be a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn copsym_simulate(
    spec_json: *const c_char,
    n: usize,
    seed: u64,
    out: *mut *mut CopsymSample,
) -> CopsymStatus {
    guard(|| {
        let text = string(spec_json, "spec_json")?;
        let spec: CopulaSpec = serde_json::from_str(text).map_err(|e| {
            Failure(CopsymStatus::InvalidParameter, format!("bad copula spec: {e}"))
        })?;
        put(out, CopsymSample(spec.sample(n, seed)?))
    })
}

/// Draw `n` points from the named family at Kendall's tau `tau`.
///
/// # Safety
/// `family` must be a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn copsym_simulate_tau(
    family: *const c_char,
    tau: f64,
    n: usize,
    seed: u64,
    out: *mut *mut CopsymSample,
) -> CopsymStatus {
    guard(|| {
        let family = string(family, "family")?.parse()?;
        put(out, CopsymSample(tau_to_params(family, tau)?.sample(n, seed)?))
    })
}

/// # Safety
/// `sample` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn copsym_sample_len(
    sample: *const CopsymSample,
    out: *mut usize,
) -> CopsymStatus {
    guard(|| write(out, handle(sample, "sample")?.0.len()))
}

/// Copy the points, interleaved, into `out`, which holds `capacity` doubles
/// and must have room for `2 * len`.
///
/// # Safety
/// `sample` must be a live handle and `out` must point to `capacity` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn copsym_sample_points(
    sample: *const CopsymSample,
    out: *mut f64,
    capacity: usize,
) -> CopsymStatus {
    guard(|| {
        let points = handle(sample, "sample")?.0.points();
        if capacity < 2 * points.len() {
            return Err(Failure(
                CopsymStatus::InvalidParameter,
                format!("buffer holds {capacity} doubles, need {}", 2 * points.len()),
            ));
        }
        if out.is_null() {
            return Err(null("out"));
        }
        let dst = std::slice::from_raw_parts_mut(out, 2 * points.len());
        for (d, p) in dst.chunks_exact_mut(2).zip(points) {
            d.copy_from_slice(p);
        }
        Ok(())
    })
}

/// # Safety
/// `sample` must come from this library and not be used afterwards. NULL is ignored.
#[no_mangle]
pub unsafe extern "C" fn copsym_sample_free(sample: *mut CopsymSample) {
    if !sample.is_null() {
        drop(Box::from_raw(sample));
    }
}

/// Empirical copula of `sample` at `(u, v)`.
///
/// # Safety
/// `sample` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn copsym_ecdf(
    sample: *const CopsymSample,
    u: f64,
    v: f64,
    out: *mut f64,
) -> CopsymStatus {
    guard(|| write(out, copsym::empirical::ecdf_copula(&handle(sample, "sample")?.0, u, v)))
}

/// Modified band depth of `k` curves stored row-major in `curves` (`k * p`
/// values); writes `k` depths to `depths`.
///
/// # Safety
/// `curves` must hold `k * p` readable doubles and `depths` `k` writable ones.
#[no_mangle]
pub unsafe extern "C" fn copsym_mbd(
    curves: *const f64,
    k: usize,
    p: usize,
    depths: *mut f64,
) -> CopsymStatus {
    guard(|| {
        let len = k
            .checked_mul(p)
            .ok_or_else(|| Failure(CopsymStatus::InvalidParameter, "k * p overflows".into()))?;
        let matrix = CurveMatrix::new(k, p, slice(curves, len, "curves")?.to_vec())?;
        let d = modified_band_depth(&matrix)?;
        if depths.is_null() {
            return Err(null("depths"));
        }
        std::slice::from_raw_parts_mut(depths, k).copy_from_slice(&d.depths);
        Ok(())
    })
}

/// Defaults for a sample of size `n`.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn copsym_test_config_default(
    symmetry: CopsymSymmetry,
    n: usize,
    out: *mut CopsymTestConfig,
) -> CopsymStatus {
    guard(|| write(out, TestConfig::new(symmetry.into(), n).into()))
}

/// Run the symmetry test on `sample`.
///
/// # Safety
/// `sample` and `config` must be live, `out` writable.
#[no_mangle]
pub unsafe extern "C" fn copsym_run_test(
    sample: *const CopsymSample,
    config: *const CopsymTestConfig,
    out: *mut *mut CopsymTestResult,
) -> CopsymStatus {
    guard(|| {
        let sample = handle(sample, "sample")?;
        let cfg = TestConfig::from(handle(config, "config")?);
        put(out, CopsymTestResult(run_test(&sample.0, &cfg)?))
    })
}

/// # Safety
/// `result` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn copsym_test_result_p_value(
    result: *const CopsymTestResult,
    out: *mut f64,
) -> CopsymStatus {
    guard(|| write(out, handle(result, "result")?.0.p_value))
}

/// # Safety
/// `result` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn copsym_test_result_w_observed(
    result: *const CopsymTestResult,
    out: *mut u64,
) -> CopsymStatus {
    guard(|| write(out, handle(result, "result")?.0.w_observed))
}

/// # Safety
/// `result` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn copsym_test_result_reject(
    result: *const CopsymTestResult,
    out: *mut bool,
) -> CopsymStatus {
    guard(|| write(out, handle(result, "result")?.0.reject))
}

/// JSON report of the result; `full` adds every bootstrap statistic.
/// Release the string with `copsym_string_free`.
///
/// # Safety
/// `result` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn copsym_test_result_to_json(
    result: *const CopsymTestResult,
    full: bool,
    out: *mut *mut c_char,
) -> CopsymStatus {
    guard(|| {
        let json = handle(result, "result")?.0.to_json(full).to_string();
        let s = CString::new(json).expect("JSON has no interior NUL");
        write(out, s.into_raw())
    })
}

/// # Safety
/// `result` must come from this library and not be used afterwards. NULL is ignored.
#[no_mangle]
pub unsafe extern "C" fn copsym_test_result_free(result: *mut CopsymTestResult) {
    if !result.is_null() {
        drop(Box::from_raw(result));
    }
}

/// # Safety
/// `s` must come from this library and not be used afterwards. NULL is ignored.
#[no_mangle]
pub unsafe extern "C" fn copsym_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}
