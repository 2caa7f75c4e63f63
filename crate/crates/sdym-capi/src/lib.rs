//! C ABI over the core library: opaque solution handles, integer status
//! codes, and JSON strings for structured results.
//!
//! Every function is panic-safe and reports failures through the returned
//! status; a human-readable message for the most recent failure on the
//! current thread is available from `sdym_last_error`.  Strings returned
//! through `char**` out-parameters are owned by the caller and must be
//! released with `sdym_string_free`.

use std::cell::RefCell;
use std::ffi::{c_char, c_int, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use num_complex::Complex64;
use sdym::backlund::{BacklundTransform, Order, TransformSettings};
use sdym::charge::{backlund_density, initial_density, total_charge_radial};
use sdym::jet::RealSlicePoint;
use sdym::seeds::{SeedSpec, Solution};
use sdym::verify::{verify_solution, VerifySettings};
use sdym::SdymError;

/// Result of every fallible call.
#[repr(C)]
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum SdymStatus {
    Ok = 0,
    /// A required pointer argument was null.
    NullArgument = 1,
    /// Malformed input: seed JSON, encoding, or unsupported seed kind.
    InvalidInput = 2,
    /// The requested value does not exist at this point (singular locus).
    Singular = 3,
    /// A numerical check failed (symmetry probe, tail convergence, ...).
    Numerical = 4,
    /// An internal invariant was violated.
    Panic = 5,
}

/// Opaque handle to a seed solution.
pub struct SdymSolution {
    inner: Solution,
}

/// Values of the composed transformation at one point of the real slice.
#[repr(C)]
#[derive(Clone, Copy, Default)]
pub struct SdymGaussValues {
    pub alpha_re: f64,
    pub alpha_im: f64,
    pub tau_re: f64,
    pub tau_im: f64,
    pub beta_re: f64,
    pub beta_im: f64,
    pub hermiticity_residual: f64,
    pub commutativity_residual: f64,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: String) {
    let cleaned = msg.replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(cleaned).unwrap());
}

fn status_of(e: &SdymError) -> SdymStatus {
    match e {
        SdymError::SeedInvalid(_)
        | SdymError::Config(_)
        | SdymError::FullGaugeRequired
        | SdymError::DegreeBudgetExceeded { .. }
        | SdymError::OrderTooHigh { .. }
        | SdymError::BaseOffRealSlice => SdymStatus::InvalidInput,
        SdymError::DivisionBySingularValue { .. }
        | SdymError::LogOfZero { .. }
        | SdymError::SingularDecomposition { .. }
        | SdymError::SingularOnPath { .. }
        | SdymError::SingularTransform { .. } => SdymStatus::Singular,
        _ => SdymStatus::Numerical,
    }
}

/// Runs a closure, converting panics and errors into status codes.
fn guarded(f: impl FnOnce() -> Result<(), (SdymStatus, String)>) -> SdymStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => SdymStatus::Ok,
        Ok(Err((status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic".into());
            SdymStatus::Panic
        }
    }
}

unsafe fn solution<'a>(
    handle: *const SdymSolution,
) -> Result<&'a Solution, (SdymStatus, String)> {
    handle
        .as_ref()
        .map(|h| &h.inner)
        .ok_or((SdymStatus::NullArgument, "solution handle is null".into()))
}

unsafe fn out_ptr<'a, T>(p: *mut T, name: &str) -> Result<&'a mut T, (SdymStatus, String)> {
    p.as_mut().ok_or((SdymStatus::NullArgument, format!("{name} pointer is null")))
}

fn give_string(text: String) -> *mut c_char {
    CString::new(text.replace('\0', " ")).unwrap().into_raw()
}

/// Version of the library as a static string; do not free.
#[no_mangle]
pub extern "C" fn sdym_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

/// Message for the most recent failure on this thread; valid until the next
/// failing call on the same thread, do not free.
#[no_mangle]
pub extern "C" fn sdym_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Releases a string obtained from this library.
#[no_mangle]
pub unsafe extern "C" fn sdym_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Builds a solution from a seed description in JSON.
#[no_mangle]
pub unsafe extern "C" fn sdym_solution_from_seed_json(
    json: *const c_char,
    out: *mut *mut SdymSolution,
) -> SdymStatus {
    guarded(|| {
        let slot = out_ptr(out, "output handle")?;
        if json.is_null() {
            return Err((SdymStatus::NullArgument, "seed JSON is null".into()));
        }
        let text = CStr::from_ptr(json)
            .to_str()
            .map_err(|_| (SdymStatus::InvalidInput, "seed JSON is not valid UTF-8".into()))?;
        let sol = SeedSpec::from_json(text)
            .and_then(|spec| spec.build())
            .map_err(|e| (status_of(&e), e.to_string()))?;
        *slot = Box::into_raw(Box::new(SdymSolution { inner: sol }));
        Ok(())
    })
}

/// Builds the radial one-lump seed with parameter a.
#[no_mangle]
pub unsafe extern "C" fn sdym_solution_one_instanton(
    a_re: f64,
    a_im: f64,
    out: *mut *mut SdymSolution,
) -> SdymStatus {
    guarded(|| {
        let slot = out_ptr(out, "output handle")?;
        let sol = Solution::one_instanton(Complex64::new(a_re, a_im))
            .map_err(|e| (status_of(&e), e.to_string()))?;
        *slot = Box::into_raw(Box::new(SdymSolution { inner: sol }));
        Ok(())
    })
}

/// Releases a solution handle.
#[no_mangle]
pub unsafe extern "C" fn sdym_solution_free(handle: *mut SdymSolution) {
    if !handle.is_null() {
        drop(Box::from_raw(handle));
    }
}

unsafe fn density_at(
    handle: *const SdymSolution,
    y_re: f64,
    y_im: f64,
    z_re: f64,
    z_im: f64,
    out_re: *mut f64,
    out_im: *mut f64,
    which: fn(&Solution, RealSlicePoint) -> sdym::Result<Complex64>,
) -> SdymStatus {
    guarded(|| {
        let sol = solution(handle)?;
        let re = out_ptr(out_re, "density real part")?;
        let im = out_ptr(out_im, "density imaginary part")?;
        let p = RealSlicePoint::new(Complex64::new(y_re, y_im), Complex64::new(z_re, z_im));
        let q = which(sol, p).map_err(|e| (status_of(&e), e.to_string()))?;
        *re = q.re;
        *im = q.im;
        Ok(())
    })
}

/// Charge density of the seed itself at a point of the real slice.
#[no_mangle]
pub unsafe extern "C" fn sdym_initial_density(
    handle: *const SdymSolution,
    y_re: f64,
    y_im: f64,
    z_re: f64,
    z_im: f64,
    out_re: *mut f64,
    out_im: *mut f64,
) -> SdymStatus {
    density_at(handle, y_re, y_im, z_re, z_im, out_re, out_im, initial_density)
}

/// Charge density after the composed transformation.
#[no_mangle]
pub unsafe extern "C" fn sdym_backlund_density(
    handle: *const SdymSolution,
    y_re: f64,
    y_im: f64,
    z_re: f64,
    z_im: f64,
    out_re: *mut f64,
    out_im: *mut f64,
) -> SdymStatus {
    density_at(handle, y_re, y_im, z_re, z_im, out_re, out_im, backlund_density)
}

/// Total transformed charge by radial quadrature (the seed must be
/// radially symmetric).
#[no_mangle]
pub unsafe extern "C" fn sdym_total_charge(
    handle: *const SdymSolution,
    out_value: *mut f64,
    out_error_estimate: *mut f64,
) -> SdymStatus {
    guarded(|| {
        let sol = solution(handle)?;
        let value = out_ptr(out_value, "value")?;
        let estimate = out_ptr(out_error_estimate, "error estimate")?;
        let total = total_charge_radial(sol).map_err(|e| (status_of(&e), e.to_string()))?;
        *value = total.value;
        *estimate = total.error_estimate;
        Ok(())
    })
}

/// Gauss arguments and consistency residuals of the composed transformation
/// at a point of the real slice.
#[no_mangle]
pub unsafe extern "C" fn sdym_backlund_gauss_arguments(
    handle: *const SdymSolution,
    y_re: f64,
    y_im: f64,
    z_re: f64,
    z_im: f64,
    out: *mut SdymGaussValues,
) -> SdymStatus {
    guarded(|| {
        let sol = solution(handle)?;
        let slot = out_ptr(out, "output record")?;
        let p = RealSlicePoint::new(Complex64::new(y_re, y_im), Complex64::new(z_re, z_im));
        let bt = BacklundTransform::new(sol, TransformSettings::default(), Order::LeftThenRight);
        let run = || -> sdym::Result<SdymGaussValues> {
            let gp = bt.arguments(p)?;
            Ok(SdymGaussValues {
                alpha_re: gp.alpha.value().re,
                alpha_im: gp.alpha.value().im,
                tau_re: gp.tau.value().re,
                tau_im: gp.tau.value().im,
                beta_re: gp.beta.value().re,
                beta_im: gp.beta.value().im,
                hermiticity_residual: bt.hermiticity_residual(p)?,
                commutativity_residual: bt.commutativity_residual(p)?,
            })
        };
        *slot = run().map_err(|e| (status_of(&e), e.to_string()))?;
        Ok(())
    })
}

/// Runs the identity verification catalogue and hands back the report as a
/// JSON string.  `out_all_pass` (optional) receives 1 when no evaluated
/// identity failed.
#[no_mangle]
pub unsafe extern "C" fn sdym_verify_json(
    handle: *const SdymSolution,
    samples: u32,
    transform_samples: u32,
    rng_seed: u64,
    out_all_pass: *mut c_int,
    out_json: *mut *mut c_char,
) -> SdymStatus {
    guarded(|| {
        let sol = solution(handle)?;
        let slot = out_ptr(out_json, "output string")?;
        let st = VerifySettings {
            samples: samples as usize,
            transform_samples: transform_samples as usize,
            rng_seed,
            ..VerifySettings::default()
        };
        let report = verify_solution(sol, &st).map_err(|e| (status_of(&e), e.to_string()))?;
        if let Some(flag) = out_all_pass.as_mut() {
            *flag = report.all_pass() as c_int;
        }
        *slot = give_string(report.to_json());
        Ok(())
    })
}
