use crate::coefficients::MeqCoefficients;
use crate::error::{Error, Result};
use crate::linalg::ComplexMatrix;

use super::{check_grid, QubitState};

const THERMAL_ONLY_TOL: f64 = 1e-12;

/// t_q = 1/(μ(r_e + r_d)); infinite when the qubit is uncoupled.
pub fn thermalization_time(c: &MeqCoefficients) -> f64 {
    let rate = c.mu * (c.r_e + c.r_d);
    if rate > 0.0 {
        1.0 / rate
    } else {
        f64::INFINITY
    }
}

fn require_coupled(c: &MeqCoefficients) -> Result<()> {
    if c.r_e + c.r_d > 0.0 {
        Ok(())
    } else {
        Err(Error::range("r_e + r_d", "the bath does not couple to the qubit"))
    }
}

/// diag(r_e, r_d)/(r_e + r_d).
pub fn steady_state(c: &MeqCoefficients) -> Result<QubitState> {
    require_coupled(c)?;
    Ok(QubitState::diagonal(c.r_e / (c.r_e + c.r_d)))
}

/// Temperature of a diagonal qubit state from its populations, in units of
/// ħω₀/k_B. Zero for an unpopulated excited level, +∞ for equal populations,
/// negative under inversion.
pub fn population_temperature(rho_ee: f64, rho_gg: f64) -> f64 {
    if rho_ee <= 0.0 {
        return 0.0;
    }
    if rho_ee == rho_gg {
        return f64::INFINITY;
    }
    1.0 / (rho_gg / rho_ee).ln()
}

/// −1/ln(r_e/r_d): 0 when r_e = 0, +∞ when r_e = r_d, negative when r_e > r_d.
pub fn steady_temperature(c: &MeqCoefficients) -> f64 {
    population_temperature(c.r_e, c.r_d)
}

/// Closed-form qubit evolution for a purely thermal channel (λ = ε = 0).
pub fn evolve_analytic(rho0: &QubitState, c: &MeqCoefficients, t: f64) -> Result<QubitState> {
    if !c.is_thermal_only(THERMAL_ONLY_TOL) {
        return Err(Error::range("lambda/epsilon", "closed-form evolution needs λ = ε = 0"));
    }
    if t.is_nan() || t < 0.0 {
        return Err(Error::range("t", format!("{t} must be non-negative")));
    }
    if t == 0.0 {
        return Ok(rho0.clone());
    }
    require_coupled(c)?;
    let rate = c.mu * (c.r_e + c.r_d);
    let decay = (-rate * t).exp();
    let c0 = c.r_d * rho0.rho_ee() - c.r_e * rho0.rho_gg();
    let ee = (c.r_e + c0 * decay) / (c.r_e + c.r_d);
    let eg = rho0.rho_eg() * (-rate * t / 2.0).exp();
    let mut m = ComplexMatrix::from_real_diag(&[ee, 1.0 - ee]);
    m[(0, 1)] = eg;
    m[(1, 0)] = eg.conj();
    Ok(QubitState::from_trusted(m))
}

/// Steady temperature of a symmetric Dicke bath together with the sign check.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DickeTemperature {
    pub value: f64,
    /// r_e > r_d: the steady state is population-inverted.
    pub inverted: bool,
    /// k ≤ ⌈N/2⌉ − 1, the condition for a positive temperature.
    pub within_bound: bool,
}

pub fn dicke_temperature(n: usize, k: usize) -> Result<DickeTemperature> {
    if k > n {
        return Err(Error::range("k", format!("{k} excitations for {n} qubits")));
    }
    let r_e = (k * (n - k + 1)) as f64;
    let r_d = ((k + 1) * (n - k)) as f64;
    Ok(DickeTemperature {
        value: population_temperature(r_e, r_d),
        inverted: r_e > r_d,
        within_bound: k < n.div_ceil(2),
    })
}

/// Large-N expansion r_d/(r_d − r_e) − ½ of the Dicke-bath temperature.
pub fn dicke_temperature_approx(n: usize, k: usize) -> f64 {
    let r_e = (k * (n - k + 1)) as f64;
    let r_d = ((k + 1) * (n - k)) as f64;
    r_d / (r_d - r_e) - 0.5
}

/// Temperature of a qubit starting in its ground state, on the given grid:
/// T(t) = 1/ln(ρ_gg(t)/ρ_ee(t)).
pub fn temperature_trajectory(c: &MeqCoefficients, t_grid: &[f64]) -> Result<Vec<f64>> {
    if c.r_e.is_nan() || c.r_e <= 0.0 {
        return Err(Error::range("r_e", "time-dependent temperature needs r_e > 0"));
    }
    check_grid(t_grid)?;
    let rate = c.mu * (c.r_e + c.r_d);
    Ok(t_grid
        .iter()
        .map(|&t| {
            if t == 0.0 {
                return 0.0;
            }
            // 1 − e^{−t/t_q}
            let filled = -(-rate * t).exp_m1();
            let ratio = (1.0 + c.r_d / c.r_e) / filled - 1.0;
            if ratio == 1.0 {
                f64::INFINITY
            } else {
                1.0 / ratio.ln()
            }
        })
        .collect())
}
