//! C ABI over the floquet-rabi engine.
//!
//! Handles are opaque and owned by the caller, who releases them with the
//! matching `*_free`. Every fallible call returns an [`FrStatus`]; the message
//! of the most recent failure on the calling thread is available through
//! [`fr_last_error`].

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use floquet_rabi::floquet::{self, FloquetAnalysis};
use floquet_rabi::hamiltonian::{ModelParams, RabiModel, Waveform};
use floquet_rabi::{observables, Error};

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FrStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidConfig = 2,
    Solver = 3,
    BufferTooSmall = 4,
    Panic = 5,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FrWaveform {
    Sine = 0,
    Sawtooth = 1,
    Tophat = 2,
}

/// Model parameters; energies in units of the cavity frequency.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FrParams {
    pub omega_c: f64,
    pub omega_a: f64,
    pub eta0: f64,
    pub eta_m: f64,
    pub omega_m: f64,
    pub gamma: f64,
    pub n_fock: usize,
    pub n_j: usize,
    pub m_max: usize,
    pub l_max: usize,
    pub waveform: FrWaveform,
}

impl From<&ModelParams> for FrParams {
    fn from(p: &ModelParams) -> Self {
        Self {
            omega_c: p.omega_c,
            omega_a: p.omega_a,
            eta0: p.eta0,
            eta_m: p.eta_m,
            omega_m: p.omega_m,
            gamma: p.gamma,
            n_fock: p.n_fock,
            n_j: p.n_j,
            m_max: p.m_max,
            l_max: p.l_max,
            waveform: match p.waveform {
                Waveform::Sine => FrWaveform::Sine,
                Waveform::Sawtooth => FrWaveform::Sawtooth,
                Waveform::Tophat => FrWaveform::Tophat,
            },
        }
    }
}

impl From<&FrParams> for ModelParams {
    fn from(p: &FrParams) -> Self {
        Self {
            omega_c: p.omega_c,
            omega_a: p.omega_a,
            eta0: p.eta0,
            eta_m: p.eta_m,
            omega_m: p.omega_m,
            gamma: p.gamma,
            n_fock: p.n_fock,
            n_j: p.n_j,
            m_max: p.m_max,
            l_max: p.l_max,
            waveform: match p.waveform {
                FrWaveform::Sine => Waveform::Sine,
                FrWaveform::Sawtooth => Waveform::Sawtooth,
                FrWaveform::Tophat => Waveform::Tophat,
            },
        }
    }
}

/// A validated model.
pub struct FrModel {
    model: RabiModel,
}

/// A solved Floquet problem: dressed basis, quasienergies and modes.
pub struct FrFloquet {
    params: ModelParams,
    analysis: FloquetAnalysis,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let s = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(s).ok());
}

fn status_of(e: &Error) -> FrStatus {
    match e {
        Error::Config(_) => FrStatus::InvalidConfig,
        _ => FrStatus::Solver,
    }
}

/// Runs `f`, recording errors and turning panics into [`FrStatus::Panic`].
fn guard(f: impl FnOnce() -> Result<(), FrStatus>) -> FrStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            LAST_ERROR.with(|e| *e.borrow_mut() = None);
            FrStatus::Ok
        }
        Ok(Err(s)) => s,
        Err(_) => {
            set_error("internal panic");
            FrStatus::Panic
        }
    }
}

fn fail(e: Error) -> FrStatus {
    set_error(e.to_string());
    status_of(&e)
}

fn non_null<T>(p: *const T, what: &str) -> Result<(), FrStatus> {
    if p.is_null() {
        set_error(format!("{what} is null"));
        Err(FrStatus::NullPointer)
    } else {
        Ok(())
    }
}

/// Copies `values` into `out[..len]`; always writes the required length to `written`.
unsafe fn copy_out(values: &[f64], out: *mut f64, len: usize, written: *mut usize) -> Result<(), FrStatus> {
    if !written.is_null() {
        *written = values.len();
    }
    if len < values.len() {
        set_error(format!("buffer holds {len} values, {} needed", values.len()));
        return Err(FrStatus::BufferTooSmall);
    }
    non_null(out, "output buffer")?;
    ptr::copy_nonoverlapping(values.as_ptr(), out, values.len());
    Ok(())
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn fr_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Copies the calling thread's last error message into `buf` (truncated, NUL
/// terminated) and returns the full message length, 0 if there was none.
///
/// # Safety
/// `buf` must be null or valid for `len` bytes.
#[no_mangle]
pub unsafe extern "C" fn fr_last_error(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| {
        let e = e.borrow();
        let Some(msg) = e.as_ref() else {
            if !buf.is_null() && len > 0 {
                *buf = 0;
            }
            return 0;
        };
        let bytes = msg.as_bytes();
        if !buf.is_null() && len > 0 {
            let n = bytes.len().min(len - 1);
            ptr::copy_nonoverlapping(bytes.as_ptr().cast(), buf, n);
            *buf.add(n) = 0;
        }
        bytes.len()
    })
}

/// Fills `out` with the documented defaults.
///
/// # Safety
/// `out` must be null or point to writable memory for one `FrParams`.
#[no_mangle]
pub unsafe extern "C" fn fr_params_default(out: *mut FrParams) -> FrStatus {
    guard(|| {
        non_null(out, "out")?;
        *out = FrParams::from(&ModelParams::default());
        Ok(())
    })
}

/// Validates `params` and creates a model handle.
///
/// # Safety
/// `params` must point to an `FrParams`; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn fr_model_new(params: *const FrParams, out: *mut *mut FrModel) -> FrStatus {
    guard(|| {
        non_null(params, "params")?;
        non_null(out, "out")?;
        *out = ptr::null_mut();
        let model = RabiModel::new(ModelParams::from(&*params)).map_err(fail)?;
        *out = Box::into_raw(Box::new(FrModel { model }));
        Ok(())
    })
}

/// # Safety
/// `model` must be null or a handle from [`fr_model_new`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn fr_model_free(model: *mut FrModel) {
    if !model.is_null() {
        drop(Box::from_raw(model));
    }
}

/// Lowest `n_j` eigenvalues of the period-averaged Hamiltonian.
///
/// # Safety
/// `model` must be a live handle; `out` must hold `len` doubles; `written` may be null.
#[no_mangle]
pub unsafe extern "C" fn fr_model_static_energies(
    model: *const FrModel,
    out: *mut f64,
    len: usize,
    written: *mut usize,
) -> FrStatus {
    guard(|| {
        non_null(model, "model")?;
        let m = &(*model).model;
        let modes = m.fourier_modes().map_err(fail)?;
        let basis = floquet::DressedBasis::from_modes(&modes, m.params().n_j).map_err(fail)?;
        copy_out(basis.energies(), out, len, written)
    })
}

/// Solves the Floquet problem of `model`.
///
/// # Safety
/// `model` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn fr_floquet_new(model: *const FrModel, out: *mut *mut FrFloquet) -> FrStatus {
    guard(|| {
        non_null(model, "model")?;
        non_null(out, "out")?;
        *out = ptr::null_mut();
        let m = &(*model).model;
        let analysis = floquet::analyze(m).map_err(fail)?;
        *out = Box::into_raw(Box::new(FrFloquet {
            params: m.params().clone(),
            analysis,
        }));
        Ok(())
    })
}

/// # Safety
/// `floquet` must be null or a handle from [`fr_floquet_new`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn fr_floquet_free(floquet: *mut FrFloquet) {
    if !floquet.is_null() {
        drop(Box::from_raw(floquet));
    }
}

/// Quasienergies in the first zone, ascending.
///
/// # Safety
/// `floquet` must be a live handle; `out` must hold `len` doubles; `written` may be null.
#[no_mangle]
pub unsafe extern "C" fn fr_floquet_quasienergies(
    floquet: *const FrFloquet,
    out: *mut f64,
    len: usize,
    written: *mut usize,
) -> FrStatus {
    guard(|| {
        non_null(floquet, "floquet")?;
        copy_out(&(*floquet).analysis.solution.quasienergies(), out, len, written)
    })
}

/// Steady-state period averages of the cavity and atom excitation numbers
/// for the system prepared in the static ground state.
///
/// # Safety
/// `floquet` must be a live handle; `n_cav` and `n_tls` must be writable.
#[no_mangle]
pub unsafe extern "C" fn fr_floquet_mean_excitations(
    floquet: *const FrFloquet,
    n_cav: *mut f64,
    n_tls: *mut f64,
) -> FrStatus {
    guard(|| {
        non_null(floquet, "floquet")?;
        non_null(n_cav, "n_cav")?;
        non_null(n_tls, "n_tls")?;
        let f = &*floquet;
        let times = observables::default_time_grid(&f.params);
        let s = observables::ground_state_series(&f.analysis, &f.params, &times).map_err(fail)?;
        *n_cav = s.mean_cav;
        *n_tls = s.mean_tls;
        Ok(())
    })
}

/// Photon number of the undriven Rabi ground state at coupling `params->eta0`.
///
/// # Safety
/// `params` must point to an `FrParams`; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn fr_virtual_photons(params: *const FrParams, out: *mut f64) -> FrStatus {
    guard(|| {
        non_null(params, "params")?;
        non_null(out, "out")?;
        *out = observables::virtual_photons(&ModelParams::from(&*params)).map_err(fail)?;
        Ok(())
    })
}
