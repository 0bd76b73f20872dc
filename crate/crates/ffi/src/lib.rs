//! C ABI over natcoh.
//!
//! Every function returns a `NatcohStatus`. On failure a message is kept per
//! thread and can be read with `natcoh_last_error` until the next call.
//! Handles come from a constructor and must be released with
//! `natcoh_monad_free`; strings returned through out-pointers with
//! `natcoh_string_free`. Panics never cross the boundary.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use natcoh::bigraded::Bidegree;
use natcoh::certify::{theorem_certify, CertifyConfig};
use natcoh::document::{MonadDocument, ParamsDoc};
use natcoh::error::NatcohError;
use natcoh::monad::{HilbertParams, Monad};
use natcoh::search::{search, SearchConfig};
use num_rational::Rational64;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NatcohStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Parse = 3,
    ShapeMismatch = 4,
    CompositionNonzero = 5,
    CheckFailed = 6,
    RetriesExhausted = 7,
    MixedCohomology = 8,
    Panic = 9,
}

/// Opaque monad handle.
pub struct NatcohMonad {
    monad: Monad,
    params: Option<HilbertParams>,
    seed: Option<u64>,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

type Failure = (NatcohStatus, String);

fn status_of(e: &NatcohError) -> NatcohStatus {
    match e {
        NatcohError::Parse(_) => NatcohStatus::Parse,
        NatcohError::ShapeMismatch(_) | NatcohError::EntryBidegree { .. } | NatcohError::BidegreeMismatch(..) => {
            NatcohStatus::ShapeMismatch
        }
        NatcohError::CompositionNonzero(..) => NatcohStatus::CompositionNonzero,
        NatcohError::RetriesExhausted { .. } => NatcohStatus::RetriesExhausted,
        NatcohError::MixedMonadCohomology(_) | NatcohError::NotAMonad(..) => NatcohStatus::MixedCohomology,
        NatcohError::SplitTypeMismatch(_) => NatcohStatus::CheckFailed,
        _ => NatcohStatus::InvalidArgument,
    }
}

fn fail(e: NatcohError) -> Failure {
    (status_of(&e), e.to_string())
}

fn guard<F: FnOnce() -> Result<(), Failure>>(f: F) -> NatcohStatus {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => NatcohStatus::Ok,
        Ok(Err((status, msg))) => {
            set_error(msg);
            status
        }
        Err(p) => {
            let msg = p
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| p.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            set_error(format!("internal panic: {msg}"));
            NatcohStatus::Panic
        }
    }
}

fn null() -> Failure {
    (NatcohStatus::NullPointer, "null pointer argument".into())
}

unsafe fn handle<'a>(m: *const NatcohMonad) -> Result<&'a NatcohMonad, Failure> {
    m.as_ref().ok_or_else(null)
}

unsafe fn put<T>(out: *mut T, v: T) -> Result<(), Failure> {
    if out.is_null() {
        return Err(null());
    }
    out.write(v);
    Ok(())
}

fn boxed(monad: Monad, params: Option<HilbertParams>, seed: Option<u64>) -> *mut NatcohMonad {
    Box::into_raw(Box::new(NatcohMonad { monad, params, seed }))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn natcoh_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Message for the last failed call on this thread, or NULL. Valid until the next call.
#[no_mangle]
pub extern "C" fn natcoh_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Parses a monad document. Fails with COMPOSITION_NONZERO when g∘f ≠ 0.
///
/// # Safety
/// `json` must be a valid NUL-terminated string and `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn natcoh_monad_from_json(json: *const c_char, out: *mut *mut NatcohMonad) -> NatcohStatus {
    guard(|| {
        if json.is_null() || out.is_null() {
            return Err(null());
        }
        let text = CStr::from_ptr(json)
            .to_str()
            .map_err(|_| (NatcohStatus::Parse, "input is not UTF-8".to_string()))?;
        let doc = MonadDocument::parse(text).map_err(fail)?;
        let m = doc.to_monad().map_err(fail)?;
        if let Some((i, j)) = m.composition_defect() {
            return Err(fail(NatcohError::CompositionNonzero(i, j)));
        }
        let params = doc.params.as_ref().map(|p| p.to_params()).transpose().map_err(fail)?;
        let seed = doc.params.as_ref().and_then(|p| p.seed);
        put(out, boxed(m, params, seed))
    })
}

/// Serializes a monad (without certificate). Free the result with `natcoh_string_free`.
///
/// # Safety
/// `m` must be a live handle and `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn natcoh_monad_to_json(m: *const NatcohMonad, out: *mut *mut c_char) -> NatcohStatus {
    guard(|| {
        let h = handle(m)?;
        let params = h.params.as_ref().map(|p| ParamsDoc::from_params(p, h.seed));
        let text = MonadDocument::from_monad(&h.monad, params, None).to_json();
        let c = CString::new(text).map_err(|e| (NatcohStatus::Panic, e.to_string()))?;
        put(out, c.into_raw())
    })
}

/// Searches for a monad with χ(E(x,y)) = r(xy - γ), γ = num/den. `r = 0` picks
/// the default rank.
///
/// # Safety
/// `out` must be a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn natcoh_search(
    gamma_num: i64,
    gamma_den: i64,
    r: u32,
    seed: u64,
    out: *mut *mut NatcohMonad,
) -> NatcohStatus {
    guard(|| {
        if out.is_null() {
            return Err(null());
        }
        if gamma_den == 0 {
            return Err((NatcohStatus::InvalidArgument, "zero denominator".into()));
        }
        let gamma = Rational64::new(gamma_num, gamma_den);
        let zero = Rational64::from_integer(0);
        let r = if r == 0 { HilbertParams::minimal_r(zero, zero, gamma) } else { r };
        let p = HilbertParams::new(r, gamma).map_err(fail)?;
        let cfg = SearchConfig {
            seed,
            ..SearchConfig::default()
        };
        let (m, _) = search(&p, &cfg).map_err(fail)?;
        put(out, boxed(m, Some(p), Some(seed)))
    })
}

/// # Safety
/// `m` must be a live handle and `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn natcoh_monad_rank(m: *const NatcohMonad, out: *mut i64) -> NatcohStatus {
    guard(|| put(out, handle(m)?.monad.rank()))
}

/// χ(E(a,b)).
///
/// # Safety
/// `m` must be a live handle and `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn natcoh_monad_euler_char(m: *const NatcohMonad, a: i64, b: i64, out: *mut i64) -> NatcohStatus {
    guard(|| put(out, handle(m)?.monad.euler_char(Bidegree::new(a, b))))
}

/// Writes (h0, h1, h2) of E(a,b) to `out[0..3]`.
///
/// # Safety
/// `m` must be a live handle and `out` must point to three writable `size_t`.
#[no_mangle]
pub unsafe extern "C" fn natcoh_monad_cohomology(m: *const NatcohMonad, a: i64, b: i64, out: *mut usize) -> NatcohStatus {
    guard(|| {
        let h = handle(m)?.monad.bundle_coh(Bidegree::new(a, b)).map_err(fail)?;
        if out.is_null() {
            return Err(null());
        }
        for (k, v) in h.into_iter().enumerate() {
            out.add(k).write(v);
        }
        Ok(())
    })
}

/// Serre dual as a new handle.
///
/// # Safety
/// `m` must be a live handle and `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn natcoh_monad_dual(m: *const NatcohMonad, out: *mut *mut NatcohMonad) -> NatcohStatus {
    guard(|| {
        let h = handle(m)?;
        put(out, boxed(h.monad.serre_dual(), h.params, h.seed))
    })
}

/// Runs the full certification on the default window. `passed` receives 1 or 0;
/// the status is OK either way unless the input is unusable.
///
/// # Safety
/// `m` must be a live handle and `passed` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn natcoh_monad_certify(m: *const NatcohMonad, passed: *mut i32) -> NatcohStatus {
    guard(|| {
        let h = handle(m)?;
        let p = match h.params {
            Some(p) => p,
            None => h.monad.infer_params().map_err(fail)?,
        };
        let cert = theorem_certify(&h.monad, &p, &CertifyConfig::default());
        if let Some(f) = cert.first_failure() {
            set_error(f);
        }
        put(passed, cert.passed() as i32)
    })
}

/// # Safety
/// `m` must come from this library and not be used afterwards. NULL is ignored.
#[no_mangle]
pub unsafe extern "C" fn natcoh_monad_free(m: *mut NatcohMonad) {
    if !m.is_null() {
        drop(Box::from_raw(m));
    }
}

/// # Safety
/// `s` must come from this library and not be used afterwards. NULL is ignored.
#[no_mangle]
pub unsafe extern "C" fn natcoh_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}
