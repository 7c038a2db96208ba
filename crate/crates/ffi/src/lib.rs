//! C ABI for the dflux solver.
//!
//! Models and states are opaque heap handles created by `dflux_*_new`-style
//! functions and released with the matching `*_free`. Every fallible call
//! returns a [`DfluxStatus`]; on failure a message is kept per thread and can
//! be copied out with [`dflux_last_error_message`].

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use dflux::flux::{builtin_burgers, builtin_multiplicative, builtin_two_flux_rational};
use dflux::scheme::{check_cfl, lf_step, march, nt_step};
use dflux::{Coefficient, DfluxError, FluxModel, LimiterConfig, Mesh, SchemeConfig, StaggeredState};

/// Result code of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DfluxStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidParameter = 2,
    CflViolation = 3,
    ParityMismatch = 4,
    EmptyState = 5,
    BufferTooSmall = 6,
    Internal = 7,
}

/// Time-stepping scheme.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DfluxScheme {
    LaxFriedrichs = 0,
    NessyahuTadmor = 1,
}

/// Flux model together with its spatial coefficient.
pub struct DfluxModel {
    model: FluxModel,
    coeff: Coefficient,
}

/// Cell averages at one time level.
pub struct DfluxState {
    state: StaggeredState,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let msg = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(msg));
}

fn status_of(e: &DfluxError) -> DfluxStatus {
    match e {
        DfluxError::CflViolation { .. } => DfluxStatus::CflViolation,
        DfluxError::ParityMismatch(_) => DfluxStatus::ParityMismatch,
        DfluxError::EmptyState => DfluxStatus::EmptyState,
        DfluxError::InvalidParameter(_) | DfluxError::Config(_) | DfluxError::NonNestedGrids(_) => {
            DfluxStatus::InvalidParameter
        }
        DfluxError::Io(_) | DfluxError::Json(_) => DfluxStatus::Internal,
    }
}

/// Runs `f`, converting errors and panics into a status and a stored message.
fn guard(f: impl FnOnce() -> Result<(), (DfluxStatus, String)>) -> DfluxStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => DfluxStatus::Ok,
        Ok(Err((status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("panic inside dflux".to_string());
            DfluxStatus::Internal
        }
    }
}

fn lib<T>(r: dflux::Result<T>) -> Result<T, (DfluxStatus, String)> {
    r.map_err(|e| (status_of(&e), e.to_string()))
}

fn null(what: &str) -> (DfluxStatus, String) {
    (DfluxStatus::NullPointer, format!("{what} is null"))
}

unsafe fn emit<T>(out: *mut *mut T, value: T) -> Result<(), (DfluxStatus, String)> {
    if out.is_null() {
        return Err(null("output handle"));
    }
    *out = Box::into_raw(Box::new(value));
    Ok(())
}

fn scheme_config(scheme: DfluxScheme, lambda: f64) -> SchemeConfig {
    match scheme {
        DfluxScheme::LaxFriedrichs => SchemeConfig::lax_friedrichs(lambda),
        DfluxScheme::NessyahuTadmor => SchemeConfig::nessyahu_tadmor(lambda, LimiterConfig::minmod()),
    }
}

/// Copies the last error message of this thread into `buf` (NUL-terminated,
/// truncated to `cap`). Returns the full message length without the NUL,
/// or 0 when no error has been recorded.
///
/// # Safety
/// `buf` must be null or point to `cap` writable bytes.
#[no_mangle]
pub unsafe extern "C" fn dflux_last_error_message(buf: *mut c_char, cap: usize) -> usize {
    LAST_ERROR.with(|e| {
        let e = e.borrow();
        let Some(msg) = e.as_ref() else { return 0 };
        let bytes = msg.as_bytes();
        if !buf.is_null() && cap > 0 {
            let n = bytes.len().min(cap - 1);
            ptr::copy_nonoverlapping(bytes.as_ptr().cast::<c_char>(), buf, n);
            *buf.add(n) = 0;
        }
        bytes.len()
    })
}

/// `f(k, u) = k u (1 - u)` with `k` jumping from `k_left` to `k_right` at `x = 0`.
///
/// # Safety
/// `out` must be a valid pointer to a handle slot.
#[no_mangle]
pub unsafe extern "C" fn dflux_model_multiplicative(k_left: f64, k_right: f64, out: *mut *mut DfluxModel) -> DfluxStatus {
    guard(|| {
        let (model, coeff) = lib(builtin_multiplicative(k_left, k_right))?;
        emit(out, DfluxModel { model, coeff })
    })
}

/// Rational two-flux model switching at `x = 0`.
///
/// # Safety
/// `out` must be a valid pointer to a handle slot.
#[no_mangle]
pub unsafe extern "C" fn dflux_model_two_flux(out: *mut *mut DfluxModel) -> DfluxStatus {
    guard(|| {
        let (model, coeff) = lib(builtin_two_flux_rational())?;
        emit(out, DfluxModel { model, coeff })
    })
}

/// Burgers flux `k u^2 / 2` with constant `k`.
///
/// # Safety
/// `out` must be a valid pointer to a handle slot.
#[no_mangle]
pub unsafe extern "C" fn dflux_model_burgers(k: f64, out: *mut *mut DfluxModel) -> DfluxStatus {
    guard(|| {
        let (model, coeff) = lib(builtin_burgers(k))?;
        emit(out, DfluxModel { model, coeff })
    })
}

/// Supremum of `|f_u|` over the model's state box.
///
/// # Safety
/// `model` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn dflux_model_sup_fu(model: *const DfluxModel, out: *mut f64) -> DfluxStatus {
    guard(|| {
        let m = model.as_ref().ok_or_else(|| null("model"))?;
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        *out = m.model.bounds.sup_fu;
        Ok(())
    })
}

/// Releases a model handle. Null is ignored.
///
/// # Safety
/// `model` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn dflux_model_free(model: *mut DfluxModel) {
    if !model.is_null() {
        drop(Box::from_raw(model));
    }
}

/// State at `t = 0` on `n_cells` uniform cells of `[x_min, x_max]` with the
/// given cell averages (`len` must equal `n_cells`).
///
/// # Safety
/// `model` must be a live handle, `values` must point to `len` doubles and
/// `out` must be a valid pointer to a handle slot.
#[no_mangle]
pub unsafe extern "C" fn dflux_state_new(
    model: *const DfluxModel,
    x_min: f64,
    x_max: f64,
    n_cells: usize,
    values: *const f64,
    len: usize,
    out: *mut *mut DfluxState,
) -> DfluxStatus {
    guard(|| {
        let m = model.as_ref().ok_or_else(|| null("model"))?;
        if values.is_null() {
            return Err(null("values"));
        }
        let values = std::slice::from_raw_parts(values, len).to_vec();
        let mesh = lib(Mesh::new(x_min, x_max, n_cells))?;
        let state = lib(StaggeredState::from_values(mesh, values, &m.coeff))?;
        emit(out, DfluxState { state })
    })
}

/// Number of cells at the state's current parity.
///
/// # Safety
/// `state` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn dflux_state_len(state: *const DfluxState) -> usize {
    state.as_ref().map_or(0, |s| s.state.len())
}

/// Simulated time of the state.
///
/// # Safety
/// `state` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn dflux_state_time(state: *const DfluxState) -> f64 {
    state.as_ref().map_or(f64::NAN, |s| s.state.time)
}

/// Copies the cell averages into `buf`. Fails with `BUFFER_TOO_SMALL` when
/// `cap` is smaller than the cell count; `out_len` always receives the count.
///
/// # Safety
/// `state` must be a live handle, `buf` must point to `cap` writable doubles
/// and `out_len` must be null or a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn dflux_state_values(
    state: *const DfluxState,
    buf: *mut f64,
    cap: usize,
    out_len: *mut usize,
) -> DfluxStatus {
    guard(|| {
        let s = state.as_ref().ok_or_else(|| null("state"))?;
        let values = &s.state.values;
        if let Some(n) = out_len.as_mut() {
            *n = values.len();
        }
        if cap < values.len() {
            return Err((DfluxStatus::BufferTooSmall, format!("need {} doubles, got {cap}", values.len())));
        }
        if buf.is_null() {
            return Err(null("buf"));
        }
        ptr::copy_nonoverlapping(values.as_ptr(), buf, values.len());
        Ok(())
    })
}

/// Advances the state by one staggered step after checking the
/// maximum-principle CFL condition.
///
/// # Safety
/// `state` and `model` must be live handles.
#[no_mangle]
pub unsafe extern "C" fn dflux_state_step(
    state: *mut DfluxState,
    model: *const DfluxModel,
    scheme: DfluxScheme,
    lambda: f64,
) -> DfluxStatus {
    guard(|| {
        let s = state.as_mut().ok_or_else(|| null("state"))?;
        let m = model.as_ref().ok_or_else(|| null("model"))?;
        let cfg = scheme_config(scheme, lambda);
        lib(check_cfl(&m.model, &cfg))?;
        s.state = match scheme {
            DfluxScheme::LaxFriedrichs => lib(lf_step(&s.state, &m.model, &m.coeff, &cfg))?,
            DfluxScheme::NessyahuTadmor => lib(nt_step(&s.state, &m.model, &m.coeff, &cfg))?.0,
        };
        Ok(())
    })
}

/// Marches the state to `t_end` (snapped down to an even step count).
/// The state is left unchanged on failure.
///
/// # Safety
/// `state` and `model` must be live handles.
#[no_mangle]
pub unsafe extern "C" fn dflux_state_march(
    state: *mut DfluxState,
    model: *const DfluxModel,
    scheme: DfluxScheme,
    lambda: f64,
    t_end: f64,
) -> DfluxStatus {
    guard(|| {
        let s = state.as_mut().ok_or_else(|| null("state"))?;
        let m = model.as_ref().ok_or_else(|| null("model"))?;
        let cfg = scheme_config(scheme, lambda);
        let (next, _) = lib(march(s.state.clone(), &m.model, &m.coeff, &cfg, t_end, &mut []))?;
        s.state = next;
        Ok(())
    })
}

/// Releases a state handle. Null is ignored.
///
/// # Safety
/// `state` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn dflux_state_free(state: *mut DfluxState) {
    if !state.is_null() {
        drop(Box::from_raw(state));
    }
}
