//! Target-qubit dynamics: closed-form evolution, numerical integration of the
//! master equation, the explicit collision model, and thermal preparation of
//! the bath ladder.

mod analytic;
mod collision;
mod integrate;
mod ladder;
mod sweep;

pub use analytic::{
    dicke_temperature, dicke_temperature_approx, evolve_analytic, population_temperature, steady_state,
    steady_temperature, temperature_trajectory, thermalization_time, DickeTemperature,
};
pub use collision::{collision_chain, collision_chain_for_state, CollisionMap, CollisionMode, Scheme, MAX_EXACT_QUBITS};
pub use integrate::{integrate_master, integrate_master_converged};
pub use ladder::{ladder_product_state, prepare_thermal_dicke, prepare_thermal_dicke_history, LadderRun, LadderState};
pub use sweep::{k_for_rule, loglog_slope, scaling_sweep, KRule, SweepFamily, SweepRow, SweepTable};

use crate::error::{Error, Result};
use crate::linalg::{ComplexMatrix, DensityMatrix, Tolerances, C64};

/// Coherence magnitude above which a population-based temperature is flagged.
pub const COHERENCE_FLAG: f64 = 1e-6;

/// Target-qubit state in the basis order (|e⟩, |g⟩).
#[derive(Debug, Clone, PartialEq)]
pub struct QubitState {
    rho: DensityMatrix,
}

impl QubitState {
    pub fn new(matrix: ComplexMatrix) -> Result<Self> {
        if matrix.rows() != 2 || matrix.cols() != 2 {
            return Err(Error::DimensionMismatch(format!("qubit state must be 2x2, got {}x{}", matrix.rows(), matrix.cols())));
        }
        Ok(QubitState { rho: DensityMatrix::validate(matrix, &Tolerances::default())? })
    }

    pub(crate) fn from_trusted(matrix: ComplexMatrix) -> Self {
        QubitState { rho: DensityMatrix::from_trusted(matrix) }
    }

    pub fn ground() -> Self {
        Self::diagonal(0.0)
    }

    pub fn excited() -> Self {
        Self::diagonal(1.0)
    }

    /// diag(ρ_ee, 1 − ρ_ee).
    pub fn diagonal(rho_ee: f64) -> Self {
        Self::from_trusted(ComplexMatrix::from_real_diag(&[rho_ee, 1.0 - rho_ee]))
    }

    pub fn rho_ee(&self) -> f64 {
        self.rho[(0, 0)].re
    }

    pub fn rho_gg(&self) -> f64 {
        self.rho[(1, 1)].re
    }

    pub fn rho_eg(&self) -> C64 {
        self.rho[(0, 1)]
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        self.rho.matrix()
    }

    pub fn density(&self) -> &DensityMatrix {
        &self.rho
    }

    pub fn temperature(&self) -> f64 {
        population_temperature(self.rho_ee(), self.rho_gg())
    }

    pub fn entropy(&self) -> f64 {
        entropy(self)
    }
}

/// von Neumann entropy in units of k_B, with 0·ln 0 = 0.
pub fn entropy(q: &QubitState) -> f64 {
    let m = q.matrix();
    let (a, d) = (m[(0, 0)].re, m[(1, 1)].re);
    let tr = a + d;
    let disc = ((a - d).powi(2) + 4.0 * m[(0, 1)].norm_sqr()).sqrt();
    [(tr + disc) / 2.0, (tr - disc) / 2.0]
        .into_iter()
        .filter(|&x| x > 0.0)
        .fold(0.0, |s, x| s - x * x.ln())
}

/// Whether trajectory times are absolute or already multiplied by μ.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TimeAxis {
    Absolute,
    Scaled,
}

/// States sampled on a time grid, with derived per-record quantities.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub axis: TimeAxis,
    /// μ used to convert between absolute and scaled time.
    pub mu: f64,
    pub states: Vec<QubitState>,
    pub excited_pop: Vec<f64>,
    pub temperature: Vec<f64>,
    pub entropy: Vec<f64>,
    /// Set when some recorded state had |ρ_eg| above [`COHERENCE_FLAG`], in
    /// which case its temperature reflects populations only.
    pub coherent: bool,
}

impl Trajectory {
    pub fn from_states(times: Vec<f64>, axis: TimeAxis, mu: f64, states: Vec<QubitState>) -> Self {
        assert_eq!(times.len(), states.len());
        let excited_pop = states.iter().map(QubitState::rho_ee).collect();
        let temperature = states.iter().map(QubitState::temperature).collect();
        let entropy = states.iter().map(entropy).collect();
        let coherent = states.iter().any(|s| s.rho_eg().norm() > COHERENCE_FLAG);
        Trajectory { times, axis, mu, states, excited_pop, temperature, entropy, coherent }
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn absolute_time(&self, i: usize) -> f64 {
        match self.axis {
            TimeAxis::Absolute => self.times[i],
            TimeAxis::Scaled => self.times[i] / self.mu,
        }
    }

    pub fn scaled_time(&self, i: usize) -> f64 {
        match self.axis {
            TimeAxis::Absolute => self.times[i] * self.mu,
            TimeAxis::Scaled => self.times[i],
        }
    }

    /// Largest |ρ_ee − other.ρ_ee| over common records.
    pub fn max_excited_deviation(&self, other: &Trajectory) -> f64 {
        self.excited_pop.iter().zip(&other.excited_pop).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
    }
}

/// Checks that a grid is non-negative and strictly increasing.
pub(crate) fn check_grid(times: &[f64]) -> Result<()> {
    if times.iter().any(|t| !(t.is_finite() && *t >= 0.0)) {
        return Err(Error::range("t_grid", "times must be finite and non-negative"));
    }
    if times.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::range("t_grid", "times must be strictly increasing"));
    }
    Ok(())
}

/// Evenly spaced grid of `n_points` times from 0 to `t_end` inclusive.
pub fn linear_grid(t_end: f64, n_points: usize) -> Vec<f64> {
    match n_points {
        0 => Vec::new(),
        1 => vec![0.0],
        n => (0..n).map(|i| t_end * i as f64 / (n - 1) as f64).collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn entropy_examples() {
        assert_eq!(entropy(&QubitState::ground()), 0.0);
        assert_abs_diff_eq!(entropy(&QubitState::diagonal(0.5)), 2f64.ln(), epsilon = 1e-15);
        assert_abs_diff_eq!(entropy(&QubitState::diagonal(0.4)), 0.673_011_667_009_256_4, epsilon = 1e-12);
        let s = 0.5;
        let pure = QubitState::new(ComplexMatrix::from_fn(2, 2, |_, _| C64::new(s, 0.0))).unwrap();
        assert!(entropy(&pure).abs() < 1e-7);
    }

    #[test]
    fn grid_checks() {
        assert!(check_grid(&[0.0, 0.1, 0.2]).is_ok());
        assert!(check_grid(&[0.0, 0.2, 0.1]).is_err());
        assert!(check_grid(&[-0.1, 0.2]).is_err());
        assert_eq!(linear_grid(1.0, 0), Vec::<f64>::new());
        assert_eq!(linear_grid(2.0, 3), vec![0.0, 1.0, 2.0]);
    }

    #[test]
    fn qubit_state_rejects_wrong_shape() {
        assert!(QubitState::new(ComplexMatrix::identity(3)).is_err());
        assert!(QubitState::new(ComplexMatrix::from_real_diag(&[1.2, -0.2])).is_err());
    }
}
