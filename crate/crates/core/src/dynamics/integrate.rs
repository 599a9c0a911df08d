use crate::coefficients::{lindblad_rhs, MeqCoefficients};
use crate::error::{Error, Result};
use crate::linalg::{ComplexMatrix, C64, ONE};

use super::{check_grid, QubitState, TimeAxis, Trajectory};

const TRACE_DRIFT_LIMIT: f64 = 1e-8;
const MAX_HALVINGS: usize = 24;

fn rk4_step(rho: &ComplexMatrix, c: &MeqCoefficients, h: f64) -> Result<ComplexMatrix> {
    let half = C64::new(h / 2.0, 0.0);
    let full = C64::new(h, 0.0);
    let k1 = lindblad_rhs(rho, c)?;
    let k2 = lindblad_rhs(&(rho + &k1.scale(half)), c)?;
    let k3 = lindblad_rhs(&(rho + &k2.scale(half)), c)?;
    let k4 = lindblad_rhs(&(rho + &k3.scale(full)), c)?;
    let sum = &(&(&k1 + &k2.scale(C64::new(2.0, 0.0))) + &k3.scale(C64::new(2.0, 0.0))) + &k4;
    Ok(rho + &sum.scale(C64::new(h / 6.0, 0.0)))
}

/// Integrates the master equation with fixed-step fourth-order Runge–Kutta,
/// recording the state at each time of `times` (absolute time). Each interval
/// between recorded times is split into equal steps no longer than `dt`.
pub fn integrate_master(rho0: &QubitState, c: &MeqCoefficients, times: &[f64], dt: f64) -> Result<Trajectory> {
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::range("dt", format!("{dt} must be positive")));
    }
    check_grid(times)?;
    let mut rho = rho0.matrix().clone();
    let mut now = 0.0;
    let mut states = Vec::with_capacity(times.len());
    for &target in times {
        let span = target - now;
        if span > 0.0 {
            let steps = (span / dt).ceil().max(1.0) as usize;
            let h = span / steps as f64;
            for _ in 0..steps {
                rho = rk4_step(&rho, c, h)?;
            }
            now = target;
        }
        let drift = (rho.trace() - ONE).norm();
        if drift > TRACE_DRIFT_LIMIT {
            return Err(Error::Numerical(format!("trace drifted by {drift:e} at t = {target}")));
        }
        if !rho.is_hermitian(TRACE_DRIFT_LIMIT) {
            return Err(Error::Numerical(format!("state lost Hermiticity at t = {target}")));
        }
        states.push(QubitState::from_trusted(rho.clone()));
    }
    Ok(Trajectory::from_states(times.to_vec(), TimeAxis::Absolute, c.mu, states))
}

/// Halves `dt` until two successive runs agree to `tol` on every recorded
/// matrix entry, and returns the finer run.
pub fn integrate_master_converged(
    rho0: &QubitState,
    c: &MeqCoefficients,
    times: &[f64],
    dt: f64,
    tol: f64,
) -> Result<Trajectory> {
    let mut coarse = integrate_master(rho0, c, times, dt)?;
    let mut step = dt;
    for _ in 0..MAX_HALVINGS {
        step /= 2.0;
        let fine = integrate_master(rho0, c, times, step)?;
        let diff = coarse
            .states
            .iter()
            .zip(&fine.states)
            .map(|(a, b)| a.matrix().max_abs_diff(b.matrix()))
            .fold(0.0, f64::max);
        if diff <= tol {
            return Ok(fine);
        }
        coarse = fine;
    }
    Err(Error::Numerical(format!("no convergence to {tol:e} after {MAX_HALVINGS} step halvings")))
}
