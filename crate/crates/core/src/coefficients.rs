//! Master-equation coefficients from collective-spin moments of the bath,
//! their closed forms for the standard bath families, and the generator of
//! the target-qubit dynamics.

use serde::{Deserialize, Serialize};

use crate::bath::{thermal_ratio, validate_bath, BathKind, BathSpec};
use crate::error::{Error, Result};
use crate::linalg::{expectation_sparse, sandwich_trace, ComplexMatrix, DensityMatrix, C64, I, ZERO};
use crate::spin::{build_collective_ops, CollectiveOps};

/// gτ above this value is outside the regime where the second-order
/// expansion of the propagator can be trusted.
pub const SECOND_ORDER_ADVISORY: f64 = 0.3;

/// Parameters of a single collision and of the collision process.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CollisionParams {
    /// Coupling rate (1/time).
    pub g: f64,
    /// Interaction duration.
    pub tau: f64,
    /// Collision rate (1/time).
    pub p: f64,
    /// Qubit frequency (1/time); temperatures are reported in units of ħω₀/k_B.
    pub omega0: f64,
}

impl Default for CollisionParams {
    /// gτ = 1/8 and μ = 1 (both exact in binary), so absolute and scaled
    /// time coincide.
    fn default() -> Self {
        CollisionParams { g: 1.0, tau: 0.125, p: 64.0, omega0: 1.0 }
    }
}

impl CollisionParams {
    /// Rejects negative or non-finite values. g = 0 is allowed (no interaction).
    pub fn validate(&self) -> Result<()> {
        let positive = |name: &'static str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(Error::range(name, format!("{v} must be positive and finite")))
            }
        };
        if !(self.g >= 0.0 && self.g.is_finite()) {
            return Err(Error::range("g", format!("{} must be non-negative and finite", self.g)));
        }
        positive("tau", self.tau)?;
        positive("p", self.p)?;
        positive("omega0", self.omega0)
    }

    pub fn g_tau(&self) -> f64 {
        self.g * self.tau
    }

    /// μ = p (gτ)², the rate scale of the dissipators.
    pub fn mu(&self) -> f64 {
        self.p * self.g_tau().powi(2)
    }

    /// p g τ, the prefactor of the effective Hamiltonian.
    pub fn pg_tau(&self) -> f64 {
        self.p * self.g_tau()
    }

    pub fn beyond_second_order(&self) -> bool {
        self.g_tau() > SECOND_ORDER_ADVISORY
    }

    /// Parameters with the given gτ and μ (τ = 1, p = μ/(gτ)²).
    pub fn from_g_tau_and_mu(g_tau: f64, mu: f64) -> Self {
        CollisionParams { g: g_tau, tau: 1.0, p: mu / (g_tau * g_tau), omega0: 1.0 }
    }
}

/// Coefficients (λ, ε, r_e, r_d) of the target-qubit master equation plus
/// the two rate prefactors.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(from = "MeqJson", into = "MeqJson")]
pub struct MeqCoefficients {
    /// ⟨J₋⟩
    pub lambda: C64,
    /// ⟨J₋²⟩
    pub epsilon: C64,
    /// ⟨J₊J₋⟩
    pub r_e: f64,
    /// ⟨J₋J₊⟩
    pub r_d: f64,
    pub mu: f64,
    pub pg_tau: f64,
}

#[derive(Serialize, Deserialize)]
struct MeqJson {
    lambda_re: f64,
    lambda_im: f64,
    epsilon_re: f64,
    epsilon_im: f64,
    r_e: f64,
    r_d: f64,
    mu: f64,
    pg_tau: f64,
}

impl From<MeqJson> for MeqCoefficients {
    fn from(j: MeqJson) -> Self {
        MeqCoefficients {
            lambda: C64::new(j.lambda_re, j.lambda_im),
            epsilon: C64::new(j.epsilon_re, j.epsilon_im),
            r_e: j.r_e,
            r_d: j.r_d,
            mu: j.mu,
            pg_tau: j.pg_tau,
        }
    }
}

impl From<MeqCoefficients> for MeqJson {
    fn from(c: MeqCoefficients) -> Self {
        MeqJson {
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

impl MeqCoefficients {
    pub fn thermal(r_e: f64, r_d: f64, params: &CollisionParams) -> Self {
        MeqCoefficients { lambda: ZERO, epsilon: ZERO, r_e, r_d, mu: params.mu(), pg_tau: params.pg_tau() }
    }

    /// True when only the thermal channel is present (λ = ε = 0).
    pub fn is_thermal_only(&self, tol: f64) -> bool {
        self.lambda.norm() <= tol && self.epsilon.norm() <= tol
    }
}

/// Extracts the coefficients from a bath state via Tr(J₋ρJ₊) and Tr(J₊ρJ₋).
pub fn coefficients_from_state(
    rho_b: &DensityMatrix,
    ops: &CollectiveOps,
    params: &CollisionParams,
) -> Result<MeqCoefficients> {
    if rho_b.dim() != ops.dim() {
        return Err(Error::DimensionMismatch(format!(
            "bath dimension {} vs operators for {} qubits",
            rho_b.dim(),
            ops.qubits()
        )));
    }
    Ok(MeqCoefficients {
        lambda: expectation_sparse(&ops.j_minus, rho_b)?,
        epsilon: expectation_sparse(&ops.j_minus_sq, rho_b)?,
        r_e: sandwich_trace(&ops.j_minus, rho_b)?,
        r_d: sandwich_trace(&ops.j_plus, rho_b)?,
        mu: params.mu(),
        pg_tau: params.pg_tau(),
    })
}

/// r_e = N p_e, r_d = N p_g.
pub fn coefficients_product_mixed(n: usize, p_e: f64, params: &CollisionParams) -> Result<MeqCoefficients> {
    if !(0.0..=1.0).contains(&p_e) {
        return Err(Error::range("p_e", format!("{p_e} is not a probability")));
    }
    let n = n as f64;
    Ok(MeqCoefficients::thermal(n * p_e, n * (1.0 - p_e), params))
}

/// Rates of the thermally prepared block-diagonal bath:
/// r_e = Σₖ (1−r) rᵏ k(N−k+1) / (1−r^{N+1}), and r_d the same with r^{k−1}.
pub fn coefficients_thermal_hec(n: usize, n_bar: f64, params: &CollisionParams) -> Result<MeqCoefficients> {
    if !(n_bar >= 0.0 && n_bar.is_finite()) {
        return Err(Error::range("n_bar", format!("{n_bar} must be finite and non-negative")));
    }
    let r = thermal_ratio(n_bar);
    let norm = (1.0 - r) / (1.0 - r.powi(n as i32 + 1));
    let (mut r_e, mut r_d) = (0.0, 0.0);
    for k in 1..=n {
        let w = norm * (k * (n - k + 1)) as f64;
        r_e += w * r.powi(k as i32);
        r_d += w * r.powi(k as i32 - 1);
    }
    Ok(MeqCoefficients::thermal(r_e, r_d, params))
}

/// r_e = k(N−k+1), r_d = (k+1)(N−k).
pub fn coefficients_dicke(n: usize, k: usize, params: &CollisionParams) -> Result<MeqCoefficients> {
    if k > n {
        return Err(Error::range("k", format!("{k} excitations for {n} qubits")));
    }
    Ok(MeqCoefficients::thermal((k * (n - k + 1)) as f64, ((k + 1) * (n - k)) as f64, params))
}

/// Coefficients of any bath description: closed forms for the standard
/// families, operator moments for explicit states.
pub fn coefficients_for_bath(bath: &BathSpec, params: &CollisionParams) -> Result<MeqCoefficients> {
    match &bath.kind {
        BathKind::ProductMixed { p_e } => coefficients_product_mixed(bath.n, *p_e, params),
        BathKind::ThermalHec { n_bar } => coefficients_thermal_hec(bath.n, *n_bar, params),
        BathKind::DickeBlock { k } => coefficients_dicke(bath.n, *k, params),
        BathKind::Explicit(_) => {
            let rho = validate_bath(bath)?;
            coefficients_from_state(&rho, &build_collective_ops(bath.n)?, params)
        }
    }
}

/// Effective spontaneous-emission rate μ r_d/(n̄+1) of a thermally prepared bath.
pub fn gamma_eff(c: &MeqCoefficients, n_bar: f64) -> f64 {
    c.mu * c.r_d / (n_bar + 1.0)
}

/// σ⁺ = |e⟩⟨g| in the (|e⟩, |g⟩) order.
pub fn sigma_plus() -> ComplexMatrix {
    let mut m = ComplexMatrix::zeros(2, 2);
    m[(0, 1)] = C64::new(1.0, 0.0);
    m
}

pub fn sigma_minus() -> ComplexMatrix {
    sigma_plus().adjoint()
}

/// Right-hand side of the target-qubit master equation (ħ = 1):
/// −i[H_eff, ρ] + L_s ρ + L_h ρ.
pub fn lindblad_rhs(rho: &ComplexMatrix, c: &MeqCoefficients) -> Result<ComplexMatrix> {
    if rho.rows() != 2 || rho.cols() != 2 {
        return Err(Error::DimensionMismatch(format!("qubit state must be 2x2, got {}x{}", rho.rows(), rho.cols())));
    }
    let (ee, eg, ge, gg) = (rho[(0, 0)], rho[(0, 1)], rho[(1, 0)], rho[(1, 1)]);
    let (lambda, eps) = (c.lambda, c.epsilon);
    let drive = C64::new(c.pg_tau, 0.0);
    let down = c.mu * c.r_d;
    let up = c.mu * c.r_e;
    let mu = C64::new(c.mu, 0.0);

    // H_eff = pgτ [[0, λ], [λ*, 0]]
    let h01 = drive * lambda;
    let h10 = drive * lambda.conj();
    let comm = [
        [h01 * ge - eg * h10, h01 * gg - ee * h01],
        [h10 * ee - gg * h10, h10 * eg - ge * h01],
    ];

    // σ⁺ρσ⁺ = ρ_ge |e⟩⟨g|, σ⁻ρσ⁻ = ρ_eg |g⟩⟨e|
    let squeeze = [[ZERO, mu * eps * ge], [mu * eps.conj() * eg, ZERO]];

    // decay at rate μ r_d, excitation at rate μ r_e
    let thermal = [
        [C64::new(up, 0.0) * gg - C64::new(down, 0.0) * ee, -eg * (0.5 * (up + down))],
        [-ge * (0.5 * (up + down)), C64::new(down, 0.0) * ee - C64::new(up, 0.0) * gg],
    ];

    Ok(ComplexMatrix::from_fn(2, 2, |i, j| -I * comm[i][j] + squeeze[i][j] + thermal[i][j]))
}
