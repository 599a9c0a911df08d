//! C ABI over the qollide library.
//!
//! Baths are opaque handles created by `qollide_bath_*` constructors and
//! released with [`qollide_bath_free`]. Every fallible function returns a
//! [`QollideStatus`]; on failure a description is available from
//! [`qollide_last_error_message`] on the same thread.

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use qollide::coefficients::coefficients_for_bath;
use qollide::dynamics::{
    dicke_temperature, evolve_analytic, steady_temperature, temperature_trajectory, thermalization_time, QubitState,
};
use qollide::linalg::{ComplexMatrix, DensityMatrix, Tolerances};
use qollide::{BathSpec, CollisionParams, Error, MeqCoefficients, C64};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QollideStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    InvalidState = 3,
    Numerical = 4,
    Panic = 5,
}

/// Opaque bath description.
pub struct QollideBath {
    spec: BathSpec,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QollideParams {
    pub g: f64,
    pub tau: f64,
    pub p: f64,
    pub omega0: f64,
}

/// Master-equation coefficients; λ = ⟨J₋⟩ and ε = ⟨J₋²⟩ split into parts.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QollideCoefficients {
    pub lambda_re: f64,
    pub lambda_im: f64,
    pub epsilon_re: f64,
    pub epsilon_im: f64,
    pub r_e: f64,
    pub r_d: f64,
    pub mu: f64,
    pub pg_tau: f64,
}

impl From<QollideParams> for CollisionParams {
    fn from(p: QollideParams) -> Self {
        CollisionParams { g: p.g, tau: p.tau, p: p.p, omega0: p.omega0 }
    }
}

impl From<MeqCoefficients> for QollideCoefficients {
    fn from(c: MeqCoefficients) -> Self {
        QollideCoefficients {
            lambda_re: c.lambda.re,
            lambda_im: c.lambda.im,
            epsilon_re: c.epsilon.re,
            epsilon_im: c.epsilon.im,
            r_e: c.r_e,
            r_d: c.r_d,
            mu: c.mu,
            pg_tau: c.pg_tau,
        }
    }
}

impl From<QollideCoefficients> for MeqCoefficients {
    fn from(c: QollideCoefficients) -> Self {
        MeqCoefficients {
            lambda: C64::new(c.lambda_re, c.lambda_im),
            epsilon: C64::new(c.epsilon_re, c.epsilon_im),
            r_e: c.r_e,
            r_d: c.r_d,
            mu: c.mu,
            pg_tau: c.pg_tau,
        }
    }
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn status_of(e: &Error) -> QollideStatus {
    match e {
        Error::InvalidState { .. } => QollideStatus::InvalidState,
        Error::Numerical(_) | Error::NoConvergence(_) => QollideStatus::Numerical,
        _ => QollideStatus::InvalidArgument,
    }
}

enum Failure {
    Null(&'static str),
    Lib(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

/// Runs `f`, recording any failure or panic as the thread's last error.
fn guard(f: impl FnOnce() -> Result<(), Failure>) -> QollideStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_error("");
            QollideStatus::Ok
        }
        Ok(Err(Failure::Null(what))) => {
            set_error(&format!("null pointer passed for `{what}`"));
            QollideStatus::NullPointer
        }
        Ok(Err(Failure::Lib(e))) => {
            set_error(&e.to_string());
            status_of(&e)
        }
        Err(_) => {
            set_error("internal panic");
            QollideStatus::Panic
        }
    }
}

fn non_null<'a, T>(p: *const T, what: &'static str) -> Result<&'a T, Failure> {
    // SAFETY: callers pass pointers that are either null or valid for reads.
    unsafe { p.as_ref() }.ok_or(Failure::Null(what))
}

fn out_ptr<'a, T>(p: *mut T, what: &'static str) -> Result<&'a mut T, Failure> {
    // SAFETY: callers pass pointers that are either null or valid for writes.
    unsafe { p.as_mut() }.ok_or(Failure::Null(what))
}

fn new_bath(spec: BathSpec, out: *mut *mut QollideBath) -> Result<(), Failure> {
    let out = out_ptr(out, "out")?;
    if spec.n == 0 {
        return Err(Error::OutOfRange { name: "N", detail: "need at least one bath qubit".into() }.into());
    }
    // closed forms check the family parameters without materializing the state
    coefficients_for_bath(&spec, &CollisionParams::default())?;
    *out = Box::into_raw(Box::new(QollideBath { spec }));
    Ok(())
}

/// Message of the last failed call on this thread, or an empty string. The
/// pointer stays valid until the next call into this library on the thread.
#[no_mangle]
pub extern "C" fn qollide_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn qollide_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// g = 1, τ = 1/8, p = 64, ω₀ = 1, giving μ = 1.
#[no_mangle]
pub extern "C" fn qollide_params_default() -> QollideParams {
    let d = CollisionParams::default();
    QollideParams { g: d.g, tau: d.tau, p: d.p, omega0: d.omega0 }
}

/// Product bath ⊗(p_g|g⟩⟨g| + p_e|e⟩⟨e|) of `n` qubits.
///
/// # Safety
/// `out` must be null or valid for writing one pointer.
#[no_mangle]
pub unsafe extern "C" fn qollide_bath_product(n: usize, p_e: f64, out: *mut *mut QollideBath) -> QollideStatus {
    guard(|| new_bath(BathSpec::product_mixed(n, p_e), out))
}

/// Thermally prepared block-diagonal bath with mean photon number `n_bar`.
///
/// # Safety
/// `out` must be null or valid for writing one pointer.
#[no_mangle]
pub unsafe extern "C" fn qollide_bath_thermal_hec(n: usize, n_bar: f64, out: *mut *mut QollideBath) -> QollideStatus {
    guard(|| new_bath(BathSpec::thermal_hec(n, n_bar), out))
}

/// Symmetric Dicke bath with `k` excitations.
///
/// # Safety
/// `out` must be null or valid for writing one pointer.
#[no_mangle]
pub unsafe extern "C" fn qollide_bath_dicke(n: usize, k: usize, out: *mut *mut QollideBath) -> QollideStatus {
    guard(|| new_bath(BathSpec::dicke(n, k), out))
}

/// Bath from an explicit density matrix given as row-major real and
/// imaginary parts of length `len` = 4^n, in the excitation-sorted basis.
///
/// # Safety
/// `re` and `im` must be null or valid for reading `len` doubles; `out` must
/// be null or valid for writing one pointer.
#[no_mangle]
pub unsafe extern "C" fn qollide_bath_explicit(
    n: usize,
    re: *const f64,
    im: *const f64,
    len: usize,
    out: *mut *mut QollideBath,
) -> QollideStatus {
    guard(|| {
        if re.is_null() {
            return Err(Failure::Null("re"));
        }
        if im.is_null() {
            return Err(Failure::Null("im"));
        }
        if n == 0 || n > qollide::spin::DEFAULT_MAX_QUBITS {
            return Err(Error::TooManyQubits { n, max: qollide::spin::DEFAULT_MAX_QUBITS }.into());
        }
        let dim = 1usize << n;
        if len != dim * dim {
            return Err(Error::DimensionMismatch(format!("{len} entries for N = {n}")).into());
        }
        // SAFETY: both pointers are non-null and valid for `len` reads per the contract.
        let (re, im) = unsafe { (std::slice::from_raw_parts(re, len), std::slice::from_raw_parts(im, len)) };
        let data = re.iter().zip(im).map(|(&a, &b)| C64::new(a, b)).collect();
        let rho = DensityMatrix::validate(ComplexMatrix::from_vec(dim, dim, data)?, &Tolerances::default())?;
        new_bath(BathSpec::explicit(n, rho), out)
    })
}

/// Releases a bath handle. Null is ignored.
///
/// # Safety
/// `bath` must be null or a handle from a `qollide_bath_*` constructor that
/// has not been freed.
#[no_mangle]
pub unsafe extern "C" fn qollide_bath_free(bath: *mut QollideBath) {
    if !bath.is_null() {
        // SAFETY: the handle came from Box::into_raw and is freed once.
        drop(unsafe { Box::from_raw(bath) });
    }
}

/// Number of qubits in the bath, or 0 for a null handle.
///
/// # Safety
/// `bath` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn qollide_bath_qubits(bath: *const QollideBath) -> usize {
    // SAFETY: null or live handle per the contract.
    unsafe { bath.as_ref() }.map_or(0, |b| b.spec.n)
}

/// Master-equation coefficients of a bath.
///
/// # Safety
/// `bath` must be null or a live handle; `params` null or readable; `out`
/// null or writable.
#[no_mangle]
pub unsafe extern "C" fn qollide_coefficients(
    bath: *const QollideBath,
    params: *const QollideParams,
    out: *mut QollideCoefficients,
) -> QollideStatus {
    guard(|| {
        let bath = non_null(bath, "bath")?;
        let params: CollisionParams = (*non_null(params, "params")?).into();
        let out = out_ptr(out, "out")?;
        params.validate()?;
        *out = coefficients_for_bath(&bath.spec, &params)?.into();
        Ok(())
    })
}

/// t_q = 1/(μ(r_e + r_d)); +∞ for an uncoupled qubit.
///
/// # Safety
/// `c` must be null or readable; `out` null or writable.
#[no_mangle]
pub unsafe extern "C" fn qollide_thermalization_time(c: *const QollideCoefficients, out: *mut f64) -> QollideStatus {
    guard(|| {
        let c: MeqCoefficients = (*non_null(c, "coefficients")?).into();
        *out_ptr(out, "out")? = thermalization_time(&c);
        Ok(())
    })
}

/// Steady temperature −1/ln(r_e/r_d) in units of ħω₀/k_B.
///
/// # Safety
/// `c` must be null or readable; `out` null or writable.
#[no_mangle]
pub unsafe extern "C" fn qollide_steady_temperature(c: *const QollideCoefficients, out: *mut f64) -> QollideStatus {
    guard(|| {
        let c: MeqCoefficients = (*non_null(c, "coefficients")?).into();
        *out_ptr(out, "out")? = steady_temperature(&c);
        Ok(())
    })
}

/// Steady temperature of a Dicke bath; `inverted` receives 1 when r_e > r_d.
///
/// # Safety
/// `out` must be null or writable; `inverted` may be null.
#[no_mangle]
pub unsafe extern "C" fn qollide_dicke_temperature(n: usize, k: usize, out: *mut f64, inverted: *mut i32) -> QollideStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        let t = dicke_temperature(n, k)?;
        *out = t.value;
        // SAFETY: null or writable per the contract.
        if let Some(flag) = unsafe { inverted.as_mut() } {
            *flag = t.inverted as i32;
        }
        Ok(())
    })
}

/// Excited population at each of `len` times for a qubit starting in
/// diag(rho_ee0, 1 − rho_ee0). Requires λ = ε = 0.
///
/// # Safety
/// `c` must be null or readable; `times` and `out_rho_ee` null or valid for
/// `len` reads and writes respectively.
#[no_mangle]
pub unsafe extern "C" fn qollide_evolve_analytic(
    c: *const QollideCoefficients,
    rho_ee0: f64,
    times: *const f64,
    len: usize,
    out_rho_ee: *mut f64,
) -> QollideStatus {
    guard(|| {
        let c: MeqCoefficients = (*non_null(c, "coefficients")?).into();
        if !(0.0..=1.0).contains(&rho_ee0) {
            return Err(Error::OutOfRange { name: "rho_ee0", detail: format!("{rho_ee0} is not a probability") }.into());
        }
        if len == 0 {
            return Ok(());
        }
        non_null(times, "times")?;
        out_ptr(out_rho_ee, "out_rho_ee")?;
        // SAFETY: non-null and valid for `len` elements per the contract.
        let (times, out) =
            unsafe { (std::slice::from_raw_parts(times, len), std::slice::from_raw_parts_mut(out_rho_ee, len)) };
        let init = QubitState::diagonal(rho_ee0);
        for (t, o) in times.iter().zip(out.iter_mut()) {
            *o = evolve_analytic(&init, &c, *t)?.rho_ee();
        }
        Ok(())
    })
}

/// Temperature of a qubit starting in its ground state at each of `len`
/// strictly increasing times. Requires r_e > 0.
///
/// # Safety
/// `c` must be null or readable; `times` and `out` null or valid for `len`
/// reads and writes respectively.
#[no_mangle]
pub unsafe extern "C" fn qollide_temperature_trajectory(
    c: *const QollideCoefficients,
    times: *const f64,
    len: usize,
    out: *mut f64,
) -> QollideStatus {
    guard(|| {
        let c: MeqCoefficients = (*non_null(c, "coefficients")?).into();
        if len == 0 {
            return Ok(());
        }
        non_null(times, "times")?;
        out_ptr(out, "out")?;
        // SAFETY: non-null and valid for `len` elements per the contract.
        let (times, out) = unsafe { (std::slice::from_raw_parts(times, len), std::slice::from_raw_parts_mut(out, len)) };
        out.copy_from_slice(&temperature_trajectory(&c, times)?);
        Ok(())
    })
}
