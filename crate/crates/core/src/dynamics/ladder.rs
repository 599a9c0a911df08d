//! Thermal preparation of the bath on the symmetric Dicke ladder.
//!
//! Starting from |g…g⟩ the collective thermal master equation only populates
//! the symmetric states |N/2, m⟩ and creates no coherences between them, so
//! it reduces to rate equations for the N+1 ladder populations. With k = m + N/2
//! excitations, J₋ connects k → k−1 with |⟨k−1|J₋|k⟩|² = k(N−k+1).

use crate::error::{Error, Result};
use crate::linalg::{ComplexMatrix, DensityMatrix, C64};
use crate::spin::dicke_ladder_transform;

const NEGATIVITY_TOL: f64 = 1e-12;
const NORM_DRIFT_LIMIT: f64 = 1e-8;

/// Populations of the symmetric ladder, indexed by excitation number k.
#[derive(Debug, Clone, PartialEq)]
pub struct LadderState {
    pub n: usize,
    pub populations: Vec<f64>,
}

impl LadderState {
    /// All population in |N/2, −N/2⟩.
    pub fn ground(n: usize) -> Self {
        let mut populations = vec![0.0; n + 1];
        populations[0] = 1.0;
        LadderState { n, populations }
    }

    pub fn new(n: usize, populations: Vec<f64>) -> Result<Self> {
        if populations.len() != n + 1 {
            return Err(Error::DimensionMismatch(format!("{} populations for N = {n}", populations.len())));
        }
        if populations.iter().any(|&p| p < -NEGATIVITY_TOL) {
            return Err(Error::state("nonnegative", "negative ladder population"));
        }
        let total: f64 = populations.iter().sum();
        if (total - 1.0).abs() > NORM_DRIFT_LIMIT {
            return Err(Error::state("trace", format!("populations sum to {total}")));
        }
        Ok(LadderState { n, populations })
    }

    /// Accepts a ladder-basis density matrix only if it is diagonal, since the
    /// rate equations do not propagate coherences between ladder states.
    pub fn from_ladder_matrix(n: usize, m: &ComplexMatrix) -> Result<Self> {
        if m.rows() != n + 1 || m.cols() != n + 1 {
            return Err(Error::DimensionMismatch(format!("{}x{} ladder matrix for N = {n}", m.rows(), m.cols())));
        }
        for i in 0..=n {
            for j in 0..=n {
                if i != j && m[(i, j)].norm() > NEGATIVITY_TOL {
                    return Err(Error::state("ladder-diagonal", format!("coherence between k = {i} and k = {j}")));
                }
            }
        }
        Self::new(n, (0..=n).map(|k| m[(k, k)].re).collect())
    }
}

/// Σₖ Pₖ |D_k⟩⟨D_k| in the excitation-sorted product basis.
pub fn ladder_product_state(state: &LadderState) -> DensityMatrix {
    let t = dicke_ladder_transform(state.n);
    let diag: Vec<C64> = state.populations.iter().map(|&p| C64::new(p, 0.0)).collect();
    let m = &(&t * &ComplexMatrix::from_diag(&diag)) * &t.adjoint();
    DensityMatrix::from_trusted(m)
}

struct Rates {
    down: Vec<f64>,
    up: Vec<f64>,
}

impl Rates {
    fn new(n: usize, n_bar: f64, gamma0: f64) -> Self {
        // down[k]: k → k−1, up[k]: k → k+1
        let down = (0..=n).map(|k| gamma0 * (n_bar + 1.0) * (k * (n + 1 - k)) as f64).collect();
        let up = (0..=n).map(|k| gamma0 * n_bar * ((k + 1) * (n - k)) as f64).collect();
        Rates { down, up }
    }

    fn derivative(&self, p: &[f64], out: &mut [f64]) {
        let n = p.len() - 1;
        for k in 0..=n {
            let mut d = -(self.down[k] + self.up[k]) * p[k];
            if k < n {
                d += self.down[k + 1] * p[k + 1];
            }
            if k > 0 {
                d += self.up[k - 1] * p[k - 1];
            }
            out[k] = d;
        }
    }

    fn rk4(&self, p: &mut [f64], h: f64) {
        let n = p.len();
        let (mut k1, mut k2, mut k3, mut k4) = (vec![0.0; n], vec![0.0; n], vec![0.0; n], vec![0.0; n]);
        let mut tmp = vec![0.0; n];
        self.derivative(p, &mut k1);
        for i in 0..n {
            tmp[i] = p[i] + 0.5 * h * k1[i];
        }
        self.derivative(&tmp, &mut k2);
        for i in 0..n {
            tmp[i] = p[i] + 0.5 * h * k2[i];
        }
        self.derivative(&tmp, &mut k3);
        for i in 0..n {
            tmp[i] = p[i] + h * k3[i];
        }
        self.derivative(&tmp, &mut k4);
        for i in 0..n {
            p[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
    }
}

/// Output of a ladder preparation run.
#[derive(Debug, Clone)]
pub struct LadderRun {
    pub times: Vec<f64>,
    pub history: Vec<LadderState>,
    pub final_state: LadderState,
    pub product: DensityMatrix,
}

/// Integrates the ladder rate equations from the ground state up to `t_end`
/// and returns the final populations with their product-basis image.
pub fn prepare_thermal_dicke(n: usize, n_bar: f64, gamma0: f64, t_end: f64, dt: f64) -> Result<(LadderState, DensityMatrix)> {
    let run = prepare_thermal_dicke_history(n, n_bar, gamma0, t_end, dt, usize::MAX)?;
    Ok((run.final_state, run.product))
}

/// Like [`prepare_thermal_dicke`], additionally recording the populations
/// every `record_every` steps (and always at t = 0 and t_end).
pub fn prepare_thermal_dicke_history(
    n: usize,
    n_bar: f64,
    gamma0: f64,
    t_end: f64,
    dt: f64,
    record_every: usize,
) -> Result<LadderRun> {
    if n == 0 {
        return Err(Error::range("N", "need at least one bath qubit"));
    }
    if !(n_bar >= 0.0 && n_bar.is_finite()) {
        return Err(Error::range("n_bar", format!("{n_bar} must be finite and non-negative")));
    }
    if !(gamma0 > 0.0 && gamma0.is_finite()) {
        return Err(Error::range("gamma0", format!("{gamma0} must be positive")));
    }
    if !(t_end >= 0.0 && t_end.is_finite()) {
        return Err(Error::range("t_end", format!("{t_end} must be non-negative")));
    }
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::range("dt", format!("{dt} must be positive")));
    }
    let rates = Rates::new(n, n_bar, gamma0);
    let steps = if t_end > 0.0 { (t_end / dt).ceil() as usize } else { 0 };
    let h = if steps > 0 { t_end / steps as f64 } else { 0.0 };
    let record_every = record_every.max(1);

    let mut p = LadderState::ground(n).populations;
    let mut times = vec![0.0];
    let mut history = vec![LadderState { n, populations: p.clone() }];
    for step in 1..=steps {
        rates.rk4(&mut p, h);
        if let Some(min) = p.iter().copied().reduce(f64::min) {
            if min < -NEGATIVITY_TOL {
                return Err(Error::Numerical(format!("population went negative ({min:e}); step {h} is too large")));
            }
        }
        let total: f64 = p.iter().sum();
        if (total - 1.0).abs() > NORM_DRIFT_LIMIT {
            return Err(Error::Numerical(format!("population norm drifted to {total}")));
        }
        if step % record_every == 0 || step == steps {
            times.push(step as f64 * h);
            history.push(LadderState { n, populations: p.clone() });
        }
    }
    let final_state = LadderState { n, populations: p };
    let product = ladder_product_state(&final_state);
    Ok(LadderRun { times, history, final_state, product })
}
