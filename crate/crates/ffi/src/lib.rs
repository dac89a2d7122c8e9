//! C ABI for polarfact.
//!
//! Objects are opaque handles created and freed through this interface.
//! Every fallible call returns a [`PfStatus`]; on failure the message is kept
//! per thread and can be read with [`pf_last_error_message`]. Array outputs
//! are written into caller buffers whose capacity is passed alongside.

use std::cell::RefCell;
use std::ffi::{c_char, CStr};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;
use std::slice;

use polarfact::io::to_json;
use polarfact::measures::{DiscreteMeasure, SampledMap};
use polarfact::polar::{gallery_instance, polar_factorize, Classification, PolarResult};
use polarfact::Error;

/// Opaque weighted point set.
pub struct PfMeasure(DiscreteMeasure);

/// Opaque sampled map.
pub struct PfMap(SampledMap);

/// Opaque output of [`pf_polar_factorize`].
pub struct PfPolarResult(PolarResult);

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PfStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidInput = 2,
    DimensionMismatch = 3,
    UnequalMass = 4,
    NumericalFailure = 5,
    InclusionNotCertified = 6,
    UnknownGalleryName = 7,
    BufferTooSmall = 8,
    NotAvailable = 9,
    Panic = 10,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PfClassification {
    Factorisation = 0,
    InclusionOnly = 1,
}

thread_local! {
    static LAST_ERROR: RefCell<String> = const { RefCell::new(String::new()) };
}

fn set_error(msg: impl Into<String>) {
    LAST_ERROR.with(|e| *e.borrow_mut() = msg.into());
}

fn status_of(e: &Error) -> PfStatus {
    match e {
        Error::DimensionMismatch { .. } => PfStatus::DimensionMismatch,
        Error::UnequalMass { .. } => PfStatus::UnequalMass,
        Error::NumericalFailure(_) | Error::CertificateMissing(_) => PfStatus::NumericalFailure,
        Error::InclusionNotCertified { .. } => PfStatus::InclusionNotCertified,
        Error::UnknownGalleryName(_) => PfStatus::UnknownGalleryName,
        _ => PfStatus::InvalidInput,
    }
}

fn fail(status: PfStatus, msg: impl Into<String>) -> PfStatus {
    set_error(msg);
    status
}

/// Runs `f`, turning errors and panics into status codes.
fn guard(f: impl FnOnce() -> Result<(), PfStatus>) -> PfStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_error("");
            PfStatus::Ok
        }
        Ok(Err(s)) => s,
        Err(_) => fail(PfStatus::Panic, "internal panic"),
    }
}

fn lift(e: Error) -> PfStatus {
    fail(status_of(&e), e.to_string())
}

unsafe fn input<'a, T>(p: *const T, name: &str) -> Result<&'a T, PfStatus> {
    p.as_ref().ok_or_else(|| fail(PfStatus::NullPointer, format!("`{name}` is null")))
}

unsafe fn array<'a, T>(p: *const T, len: usize, name: &str) -> Result<&'a [T], PfStatus> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(fail(PfStatus::NullPointer, format!("`{name}` is null")));
    }
    Ok(slice::from_raw_parts(p, len))
}

unsafe fn output<'a, T>(p: *mut T, cap: usize, need: usize, name: &str) -> Result<&'a mut [T], PfStatus> {
    if cap < need {
        return Err(fail(PfStatus::BufferTooSmall, format!("`{name}` holds {cap}, needs {need}")));
    }
    if need == 0 {
        return Ok(&mut []);
    }
    if p.is_null() {
        return Err(fail(PfStatus::NullPointer, format!("`{name}` is null")));
    }
    Ok(slice::from_raw_parts_mut(p, need))
}

fn rows(flat: &[f64], n: usize, dim: usize) -> Vec<Vec<f64>> {
    (0..n).map(|i| flat[i * dim..(i + 1) * dim].to_vec()).collect()
}

/// Copies the calling thread's last error message into `buf` (NUL
/// terminated, truncated to `cap`). Returns the full message length.
///
/// # Safety
/// `buf` must be null or valid for `cap` bytes.
#[no_mangle]
pub unsafe extern "C" fn pf_last_error_message(buf: *mut c_char, cap: usize) -> usize {
    LAST_ERROR.with(|e| {
        let msg = e.borrow();
        if !buf.is_null() && cap > 0 {
            let n = msg.len().min(cap - 1);
            ptr::copy_nonoverlapping(msg.as_ptr(), buf.cast(), n);
            *buf.add(n) = 0;
        }
        msg.len()
    })
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn pf_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Creates a measure of `n` points. With `dim == 0` the space is abstract and
/// `coords` is ignored (labels "x0", "x1", ...); otherwise `coords` holds
/// `n * dim` row-major values (labels "0", "1", ...).
///
/// # Safety
/// `coords` (when `dim > 0`) and `weights` must be valid for the stated
/// lengths; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn pf_measure_new(
    coords: *const f64,
    weights: *const f64,
    n: usize,
    dim: usize,
    out: *mut *mut PfMeasure,
) -> PfStatus {
    guard(|| {
        if out.is_null() {
            return Err(fail(PfStatus::NullPointer, "`out` is null"));
        }
        let w = array(weights, n, "weights")?.to_vec();
        let m = if dim == 0 {
            DiscreteMeasure::abstract_space(w).map_err(lift)?
        } else {
            let flat = array(coords, n * dim, "coords")?;
            DiscreteMeasure::from_points(rows(flat, n, dim), w).map_err(lift)?
        };
        *out = Box::into_raw(Box::new(PfMeasure(m)));
        Ok(())
    })
}

/// # Safety
/// `m` must be null or a handle from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn pf_measure_free(m: *mut PfMeasure) {
    if !m.is_null() {
        drop(Box::from_raw(m));
    }
}

/// Number of points, 0 for a null handle.
///
/// # Safety
/// `m` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn pf_measure_len(m: *const PfMeasure) -> usize {
    m.as_ref().map_or(0, |m| m.0.len())
}

/// # Safety
/// `m` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn pf_measure_total_mass(m: *const PfMeasure) -> f64 {
    m.as_ref().map_or(f64::NAN, |m| m.0.total_mass())
}

/// Creates a map on a copy of `domain` with `n * dim` row-major values.
///
/// # Safety
/// `domain` must be a live handle, `values` valid for `n * dim` doubles and
/// `out` writable.
#[no_mangle]
pub unsafe extern "C" fn pf_map_new(
    domain: *const PfMeasure,
    values: *const f64,
    n: usize,
    dim: usize,
    out: *mut *mut PfMap,
) -> PfStatus {
    guard(|| {
        let domain = input(domain, "domain")?;
        if out.is_null() {
            return Err(fail(PfStatus::NullPointer, "`out` is null"));
        }
        let flat = array(values, n * dim, "values")?;
        let map = SampledMap::new(domain.0.clone(), rows(flat, n, dim)).map_err(lift)?;
        *out = Box::into_raw(Box::new(PfMap(map)));
        Ok(())
    })
}

/// # Safety
/// `m` must be null or a handle from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn pf_map_free(m: *mut PfMap) {
    if !m.is_null() {
        drop(Box::from_raw(m));
    }
}

/// # Safety
/// `m` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn pf_map_len(m: *const PfMap) -> usize {
    m.as_ref().map_or(0, |m| m.0.len())
}

/// Builds a named gallery instance; both handles are owned by the caller.
///
/// # Safety
/// `name` must be a NUL-terminated string; `u_out` and `y_out` writable.
#[no_mangle]
pub unsafe extern "C" fn pf_gallery_instance(
    name: *const c_char,
    grid: usize,
    seed: u64,
    u_out: *mut *mut PfMap,
    y_out: *mut *mut PfMeasure,
) -> PfStatus {
    guard(|| {
        let name = input(name, "name")?;
        let name = CStr::from_ptr(name)
            .to_str()
            .map_err(|_| fail(PfStatus::InvalidInput, "`name` is not UTF-8"))?;
        if u_out.is_null() || y_out.is_null() {
            return Err(fail(PfStatus::NullPointer, "output pointer is null"));
        }
        let g = gallery_instance(name, grid, seed).map_err(lift)?;
        *u_out = Box::into_raw(Box::new(PfMap(g.u)));
        *y_out = Box::into_raw(Box::new(PfMeasure(g.y)));
        Ok(())
    })
}

/// Polar factorisation / inclusion of `u` through `y`.
///
/// # Safety
/// `u` and `y` must be live handles; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn pf_polar_factorize(
    u: *const PfMap,
    y: *const PfMeasure,
    tol: f64,
    out: *mut *mut PfPolarResult,
) -> PfStatus {
    guard(|| {
        let u = input(u, "u")?;
        let y = input(y, "y")?;
        if out.is_null() {
            return Err(fail(PfStatus::NullPointer, "`out` is null"));
        }
        let r = polar_factorize(&u.0, &y.0, tol).map_err(lift)?;
        *out = Box::into_raw(Box::new(PfPolarResult(r)));
        Ok(())
    })
}

/// # Safety
/// `r` must be null or a handle from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn pf_result_free(r: *mut PfPolarResult) {
    if !r.is_null() {
        drop(Box::from_raw(r));
    }
}

/// # Safety
/// `r` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn pf_result_classification(r: *const PfPolarResult) -> PfClassification {
    match r.as_ref().map(|r| r.0.classification) {
        Some(Classification::Factorisation) => PfClassification::Factorisation,
        _ => PfClassification::InclusionOnly,
    }
}

/// Largest Fenchel gap on the plan's support; NaN for a null handle.
///
/// # Safety
/// `r` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn pf_result_max_gap(r: *const PfPolarResult) -> f64 {
    r.as_ref().map_or(f64::NAN, |r| r.0.max_gap)
}

/// Transport cost I of the optimal plan; NaN for a null handle.
///
/// # Safety
/// `r` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn pf_result_objective(r: *const PfPolarResult) -> f64 {
    r.as_ref().map_or(f64::NAN, |r| r.0.certificate.objective)
}

/// # Safety
/// `r` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn pf_result_relative_gap(r: *const PfPolarResult) -> f64 {
    r.as_ref().map_or(f64::NAN, |r| r.0.certificate.relative_gap())
}

/// Number of support triplets.
///
/// # Safety
/// `r` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn pf_result_support_len(r: *const PfPolarResult) -> usize {
    r.as_ref().map_or(0, |r| r.0.plan.triplets().len())
}

/// Copies the plan's support into three parallel arrays of capacity `cap`.
///
/// # Safety
/// Each array must be valid for `cap` elements.
#[no_mangle]
pub unsafe extern "C" fn pf_result_triplets(
    r: *const PfPolarResult,
    rows: *mut usize,
    cols: *mut usize,
    mass: *mut f64,
    cap: usize,
) -> PfStatus {
    guard(|| {
        let t = input(r, "result")?.0.plan.triplets();
        let ri = output(rows, cap, t.len(), "rows")?;
        let cj = output(cols, cap, t.len(), "cols")?;
        let ms = output(mass, cap, t.len(), "mass")?;
        for (k, x) in t.iter().enumerate() {
            ri[k] = x.i;
            cj[k] = x.j;
            ms[k] = x.mass;
        }
        Ok(())
    })
}

/// Copies ψ at the target sites.
///
/// # Safety
/// `out` must be valid for `cap` doubles.
#[no_mangle]
pub unsafe extern "C" fn pf_result_psi(r: *const PfPolarResult, out: *mut f64, cap: usize) -> PfStatus {
    guard(|| {
        let psi = input(r, "result")?.0.psi.values();
        output(out, cap, psi.len(), "out")?.copy_from_slice(psi);
        Ok(())
    })
}

/// Copies the factor map s (target index per domain point). Returns
/// `NotAvailable` for inclusion-only results.
///
/// # Safety
/// `out` must be valid for `cap` elements.
#[no_mangle]
pub unsafe extern "C" fn pf_result_factor_map(r: *const PfPolarResult, out: *mut usize, cap: usize) -> PfStatus {
    guard(|| {
        let Some(s) = input(r, "result")?.0.factor_map.as_deref() else {
            return Err(fail(PfStatus::NotAvailable, "no factor map for an inclusion-only result"));
        };
        output(out, cap, s.len(), "out")?.copy_from_slice(s);
        Ok(())
    })
}

/// Writes the JSON report into `buf` (NUL terminated) and its length,
/// without the terminator, into `len`. Call with `cap = 0` to query the size.
///
/// # Safety
/// `buf` must be valid for `cap` bytes; `len` writable.
#[no_mangle]
pub unsafe extern "C" fn pf_result_to_json(
    r: *const PfPolarResult,
    buf: *mut c_char,
    cap: usize,
    len: *mut usize,
) -> PfStatus {
    guard(|| {
        let text = to_json(&input(r, "result")?.0.report());
        if !len.is_null() {
            *len = text.len();
        }
        let dst = output(buf.cast::<u8>(), cap, text.len() + 1, "buf")?;
        dst[..text.len()].copy_from_slice(text.as_bytes());
        dst[text.len()] = 0;
        Ok(())
    })
}
