//! C ABI for `grassmetric`.
//!
//! Every fallible function returns a [`GmStatus`]; on failure the message is
//! available from [`gm_last_error_message`] on the same thread. Objects are
//! opaque handles released with their `*_free` function, and strings returned
//! through `char **` out-parameters are released with [`gm_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use grassmetric::domains::{segment_hilbert_length, AnyDomain, DomainJson};
use grassmetric::grassmann::{arithmetic_distance, GrassmannContext, Plane, PlaneJson};
use grassmetric::metrics::{caratheodory_lower, kobayashi_closed_form, sample_duals, sandwich, SandwichConfig};
use grassmetric::numerics::Tolerance;
use grassmetric::rng::SplitRng;
use grassmetric::Error;

/// Result of every fallible call. `GM_STATUS_OK` is zero.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GmStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    Panic = 3,
    NoSignChange = 10,
    DimensionMismatch,
    IdenticalPlanes,
    DegenerateQuadruple,
    NonTransverseConfiguration,
    EmptyIntersection,
    NotPhotonRelated,
    DifferentComponents,
    NotInDomain,
    DualNotAdmissible,
    ChartDegeneracy,
    BoundaryProximity,
    EmptyDualSample,
    NoChainFound,
    UnknownPair,
    BindingOutOfRange,
    InvalidInput,
    InvariantViolation,
}

impl From<&Error> for GmStatus {
    fn from(e: &Error) -> Self {
        match e {
            Error::NoSignChange { .. } => GmStatus::NoSignChange,
            Error::DimensionMismatch { .. } => GmStatus::DimensionMismatch,
            Error::IdenticalPlanes => GmStatus::IdenticalPlanes,
            Error::DegenerateQuadruple => GmStatus::DegenerateQuadruple,
            Error::NonTransverseConfiguration { .. } => GmStatus::NonTransverseConfiguration,
            Error::EmptyIntersection => GmStatus::EmptyIntersection,
            Error::NotPhotonRelated => GmStatus::NotPhotonRelated,
            Error::DifferentComponents => GmStatus::DifferentComponents,
            Error::NotInDomain { .. } => GmStatus::NotInDomain,
            Error::DualNotAdmissible { .. } => GmStatus::DualNotAdmissible,
            Error::ChartDegeneracy => GmStatus::ChartDegeneracy,
            Error::BoundaryProximity { .. } => GmStatus::BoundaryProximity,
            Error::EmptyDualSample => GmStatus::EmptyDualSample,
            Error::NoChainFound { .. } => GmStatus::NoChainFound,
            Error::UnknownPair(_) => GmStatus::UnknownPair,
            Error::BindingOutOfRange(_) => GmStatus::BindingOutOfRange,
            Error::InvalidInput(_) => GmStatus::InvalidInput,
            Error::InvariantViolation(_) => GmStatus::InvariantViolation,
        }
    }
}

/// Opaque domain handle.
pub struct GmDomain(AnyDomain);

/// Opaque plane handle.
pub struct GmPlane(Plane);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

struct Fail(GmStatus, String);

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail(GmStatus::from(&e), e.to_string())
    }
}

fn guard<F: FnOnce() -> Result<(), Fail>>(f: F) -> GmStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            LAST_ERROR.with(|e| *e.borrow_mut() = None);
            GmStatus::Ok
        }
        Ok(Err(Fail(status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("panic inside grassmetric".into());
            GmStatus::Panic
        }
    }
}

unsafe fn borrow<'a, T>(p: *const T, what: &str) -> Result<&'a T, Fail> {
    // SAFETY: caller passes a handle created by this library or null.
    unsafe { p.as_ref() }.ok_or_else(|| Fail(GmStatus::NullPointer, format!("{what} is null")))
}

unsafe fn out<'a, T>(p: *mut T, what: &str) -> Result<&'a mut T, Fail> {
    // SAFETY: caller passes a writable location or null.
    unsafe { p.as_mut() }.ok_or_else(|| Fail(GmStatus::NullPointer, format!("{what} is null")))
}

unsafe fn text<'a>(p: *const c_char, what: &str) -> Result<&'a str, Fail> {
    if p.is_null() {
        return Err(Fail(GmStatus::NullPointer, format!("{what} is null")));
    }
    // SAFETY: non-null and NUL-terminated by contract.
    unsafe { CStr::from_ptr(p) }
        .to_str()
        .map_err(|_| Fail(GmStatus::InvalidUtf8, format!("{what} is not UTF-8")))
}

fn parse<T: serde::de::DeserializeOwned>(s: &str, what: &str) -> Result<T, Fail> {
    serde_json::from_str(s).map_err(|e| Fail(GmStatus::InvalidInput, format!("{what}: {e}")))
}

fn give_string(s: String, dst: &mut *mut c_char) -> Result<(), Fail> {
    *dst = CString::new(s)
        .map_err(|_| Fail(GmStatus::InvalidInput, "output contains NUL".into()))?
        .into_raw();
    Ok(())
}

fn require_symmetric(d: &AnyDomain) -> Result<&grassmetric::domains::SymmetricDomain, Fail> {
    d.as_symmetric()
        .ok_or_else(|| Fail(GmStatus::InvalidInput, "operation needs a symmetric domain".into()))
}

/// Message of the last failed call on this thread, or null. The pointer stays
/// valid until the next call into the library on this thread.
#[no_mangle]
pub extern "C" fn gm_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn gm_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Releases a string returned by this library. Null is ignored.
///
/// # Safety
/// `s` must come from this library and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn gm_string_free(s: *mut c_char) {
    if !s.is_null() {
        // SAFETY: produced by CString::into_raw in give_string.
        drop(unsafe { CString::from_raw(s) });
    }
}

/// Builds a domain from `{"kind": "symmetric", "form": [...]}` or
/// `{"kind": "complement", "duals": [...], "reference": {...}}`.
///
/// # Safety
/// `json` must be NUL-terminated; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn gm_domain_from_json(json: *const c_char, out_domain: *mut *mut GmDomain) -> GmStatus {
    guard(|| {
        let dst = unsafe { out(out_domain, "out_domain") }?;
        let j: DomainJson = parse(unsafe { text(json, "json") }?, "domain")?;
        *dst = Box::into_raw(Box::new(GmDomain(j.build(Tolerance::default())?)));
        Ok(())
    })
}

/// # Safety
/// `d` must come from [`gm_domain_from_json`] or be null.
#[no_mangle]
pub unsafe extern "C" fn gm_domain_free(d: *mut GmDomain) {
    if !d.is_null() {
        // SAFETY: allocated by Box::into_raw.
        drop(unsafe { Box::from_raw(d) });
    }
}

/// Builds a plane from `{"n": n, "k": k, "basis": [row-major n×k]}`.
///
/// # Safety
/// `json` must be NUL-terminated; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn gm_plane_from_json(json: *const c_char, out_plane: *mut *mut GmPlane) -> GmStatus {
    guard(|| {
        let dst = unsafe { out(out_plane, "out_plane") }?;
        let j: PlaneJson = parse(unsafe { text(json, "json") }?, "plane")?;
        *dst = Box::into_raw(Box::new(GmPlane(Plane::try_from(j)?)));
        Ok(())
    })
}

/// # Safety
/// `x` must come from [`gm_plane_from_json`] or be null.
#[no_mangle]
pub unsafe extern "C" fn gm_plane_free(x: *mut GmPlane) {
    if !x.is_null() {
        // SAFETY: allocated by Box::into_raw.
        drop(unsafe { Box::from_raw(x) });
    }
}

/// Ambient dimension `n` and plane dimension `k`.
///
/// # Safety
/// Handles must be valid; out-pointers writable.
#[no_mangle]
pub unsafe extern "C" fn gm_plane_shape(x: *const GmPlane, n: *mut usize, k: *mut usize) -> GmStatus {
    guard(|| {
        let x = unsafe { borrow(x, "x") }?;
        *unsafe { out(n, "n") }? = x.0.n();
        *unsafe { out(k, "k") }? = x.0.dim();
        Ok(())
    })
}

/// Closed-form Kobayashi distance in a symmetric domain.
///
/// # Safety
/// Handles must be valid; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn gm_kobayashi_closed_form(
    d: *const GmDomain,
    x: *const GmPlane,
    y: *const GmPlane,
    out_value: *mut f64,
) -> GmStatus {
    guard(|| {
        let (d, x, y) = unsafe { (borrow(d, "domain")?, borrow(x, "x")?, borrow(y, "y")?) };
        let dst = unsafe { out(out_value, "out_value") }?;
        *dst = kobayashi_closed_form(require_symmetric(&d.0)?, &x.0, &y.0)?;
        Ok(())
    })
}

/// Carathéodory lower bound from `dual_samples` sampled duals, optionally
/// locally optimized.
///
/// # Safety
/// Handles must be valid; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn gm_caratheodory_lower(
    d: *const GmDomain,
    x: *const GmPlane,
    y: *const GmPlane,
    dual_samples: usize,
    optimize: bool,
    seed: u64,
    out_value: *mut f64,
) -> GmStatus {
    guard(|| {
        let (d, x, y) = unsafe { (borrow(d, "domain")?, borrow(x, "x")?, borrow(y, "y")?) };
        let dst = unsafe { out(out_value, "out_value") }?;
        let rng = SplitRng::new(seed);
        let duals = sample_duals(&d.0, &x.0, &y.0, dual_samples, &rng.split(1))?;
        *dst = caratheodory_lower(&d.0, &x.0, &y.0, &duals, optimize, &rng.split(2))?.value;
        Ok(())
    })
}

/// Full metric report as JSON. `config_json` may be null for the defaults,
/// otherwise it is a sandwich configuration object.
///
/// # Safety
/// Handles must be valid; `config_json` null or NUL-terminated; `out_json`
/// writable. Free the result with [`gm_string_free`].
#[no_mangle]
pub unsafe extern "C" fn gm_sandwich_json(
    d: *const GmDomain,
    x: *const GmPlane,
    y: *const GmPlane,
    config_json: *const c_char,
    seed: u64,
    out_json: *mut *mut c_char,
) -> GmStatus {
    guard(|| {
        let (d, x, y) = unsafe { (borrow(d, "domain")?, borrow(x, "x")?, borrow(y, "y")?) };
        let dst = unsafe { out(out_json, "out_json") }?;
        let cfg: SandwichConfig = if config_json.is_null() {
            SandwichConfig::default()
        } else {
            parse(unsafe { text(config_json, "config_json") }?, "config")?
        };
        let report = sandwich(&d.0, &x.0, &y.0, &cfg, &SplitRng::new(seed))?;
        let s = serde_json::to_string(&report).map_err(|e| Fail(GmStatus::InvalidInput, e.to_string()))?;
        give_string(s, dst)
    })
}

/// Hilbert length of the photon segment from `x` to `y` inside the domain.
///
/// # Safety
/// Handles must be valid; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn gm_segment_length(
    d: *const GmDomain,
    x: *const GmPlane,
    y: *const GmPlane,
    out_value: *mut f64,
) -> GmStatus {
    guard(|| {
        let (d, x, y) = unsafe { (borrow(d, "domain")?, borrow(x, "x")?, borrow(y, "y")?) };
        let dst = unsafe { out(out_value, "out_value") }?;
        *dst = segment_hilbert_length(&d.0, &x.0, &y.0)?;
        Ok(())
    })
}

/// `p − dim(x ∩ y)`.
///
/// # Safety
/// Handles must be valid; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn gm_arithmetic_distance(x: *const GmPlane, y: *const GmPlane, out_value: *mut usize) -> GmStatus {
    guard(|| {
        let (x, y) = unsafe { (borrow(x, "x")?, borrow(y, "y")?) };
        let dst = unsafe { out(out_value, "out_value") }?;
        let (n, p) = (x.0.n(), x.0.dim());
        let ctx = GrassmannContext::new(p, n.saturating_sub(p))?;
        *dst = arithmetic_distance(&ctx, &x.0, &y.0)?;
        Ok(())
    })
}

/// The Nagano pair table as a JSON array, optionally only the real-type rows.
///
/// # Safety
/// `out_json` writable. Free the result with [`gm_string_free`].
#[no_mangle]
pub unsafe extern "C" fn gm_table_json(real_type_only: bool, out_json: *mut *mut c_char) -> GmStatus {
    guard(|| {
        let dst = unsafe { out(out_json, "out_json") }?;
        let rows: Vec<_> = if real_type_only {
            grassmetric::nagano::real_type_rows()
        } else {
            grassmetric::nagano::rows().iter().collect()
        };
        let s = serde_json::to_string(&rows).map_err(|e| Fail(GmStatus::InvalidInput, e.to_string()))?;
        give_string(s, dst)
    })
}
