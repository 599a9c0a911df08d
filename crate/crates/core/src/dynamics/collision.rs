//! Repeated collisions of the target qubit with fresh bath clusters.
//!
//! A collision acts on the qubit as the linear map
//! ρ_q ↦ Tr_b[U (ρ_q ⊗ ρ_b) U†]. Writing U = Σ_ab |a⟩⟨b| ⊗ U_ab with bath
//! operators U_ab, its 4×4 matrix has entries Tr(U_ac ρ_b U_a'd†), so the
//! joint 2^{N+1}-dimensional state is never formed.
//!
//! The interaction conserves the total number of excitations, so the exact
//! propagator is exponentiated one total-excitation block at a time.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::bath::{validate_bath, BathSpec};
use crate::coefficients::CollisionParams;
use crate::error::{Error, Result};
use crate::linalg::{matrix_exp, ComplexMatrix, DensityMatrix, C64, I, ONE, ZERO};
use crate::spin::{build_collective_ops_with_max, CollectiveOps};

use super::{check_grid, QubitState, TimeAxis, Trajectory};

pub const MAX_EXACT_QUBITS: usize = 10;
const EXP_TOL: f64 = 1e-14;
/// Trajectories summed sequentially inside one parallel work item.
const CHUNK: usize = 32;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CollisionMode {
    /// U = exp(−i H_int τ).
    Exact,
    /// U truncated after the (gτ)² term; not unitary.
    SecondOrder,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scheme {
    /// ρ ← p·dt·Φ(ρ) + (1 − p·dt)·ρ every step.
    Deterministic,
    /// Average over `trajectories` runs in which each step is a collision
    /// with probability p·dt. Run i draws from ChaCha stream i of `seed`.
    Stochastic { seed: u64, trajectories: usize },
}

/// Matrix of the single-collision map acting on row-major vec(ρ_q).
#[derive(Debug, Clone, PartialEq)]
pub struct CollisionMap {
    pub superop: [[C64; 4]; 4],
}

impl CollisionMap {
    pub fn identity() -> Self {
        let mut superop = [[ZERO; 4]; 4];
        for (i, row) in superop.iter_mut().enumerate() {
            row[i] = ONE;
        }
        CollisionMap { superop }
    }

    /// Builds the map for a materialized bath state.
    pub fn new(rho_b: &DensityMatrix, ops: &CollectiveOps, params: &CollisionParams, mode: CollisionMode) -> Result<Self> {
        if rho_b.dim() != ops.dim() {
            return Err(Error::DimensionMismatch(format!("bath dim {} vs {} operators", rho_b.dim(), ops.dim())));
        }
        let blocks = match mode {
            CollisionMode::Exact => exact_blocks(ops, params.g_tau())?,
            CollisionMode::SecondOrder => second_order_blocks(ops, params.g_tau()),
        };
        // products[a][c] = U_ac ρ_b
        let mut products: Vec<Vec<ComplexMatrix>> = Vec::with_capacity(2);
        for row in &blocks {
            let mut out = Vec::with_capacity(2);
            for u in row {
                out.push(u.matmul(rho_b.matrix())?);
            }
            products.push(out);
        }
        let mut superop = [[ZERO; 4]; 4];
        for a in 0..2 {
            for a2 in 0..2 {
                for c in 0..2 {
                    for d in 0..2 {
                        // Tr(X Y†) = Σ X_ij conj(Y_ij)
                        let x = products[a][c].as_slice();
                        let y = blocks[a2][d].as_slice();
                        let value: C64 = x.iter().zip(y).map(|(p, q)| p * q.conj()).sum();
                        superop[2 * a + a2][2 * c + d] = value;
                    }
                }
            }
        }
        Ok(CollisionMap { superop })
    }

    pub fn apply_vec(&self, v: &[C64; 4]) -> [C64; 4] {
        let mut out = [ZERO; 4];
        for (o, row) in out.iter_mut().zip(&self.superop) {
            *o = row.iter().zip(v).map(|(a, b)| a * b).sum();
        }
        out
    }

    pub fn apply(&self, rho: &ComplexMatrix) -> ComplexMatrix {
        let v = self.apply_vec(&to_vec(rho));
        from_vec(&v)
    }

    /// I + w (Φ − I).
    fn mixture(&self, w: f64) -> CollisionMap {
        let mut superop = [[ZERO; 4]; 4];
        for (i, (row, src)) in superop.iter_mut().zip(&self.superop).enumerate() {
            for (j, (s, &x)) in row.iter_mut().zip(src).enumerate() {
                let id = if i == j { ONE } else { ZERO };
                *s = id + (x - id) * w;
            }
        }
        CollisionMap { superop }
    }
}

fn to_vec(m: &ComplexMatrix) -> [C64; 4] {
    [m[(0, 0)], m[(0, 1)], m[(1, 0)], m[(1, 1)]]
}

fn from_vec(v: &[C64; 4]) -> ComplexMatrix {
    ComplexMatrix::from_vec(2, 2, v.to_vec()).expect("2x2")
}

type Blocks = [[ComplexMatrix; 2]; 2];

/// Bath operators U_ab of exp(−i gτ (J₊σ⁻ + J₋σ⁺)), qubit index 0 = e, 1 = g.
fn exact_blocks(ops: &CollectiveOps, g_tau: f64) -> Result<Blocks> {
    let n = ops.qubits();
    let dim = ops.dim();
    let basis = &ops.basis;
    let mut u = [[ComplexMatrix::zeros(dim, dim), ComplexMatrix::zeros(dim, dim)], [
        ComplexMatrix::zeros(dim, dim),
        ComplexMatrix::zeros(dim, dim),
    ]];
    // Total excitation m couples |e⟩⊗(block m−1) with |g⟩⊗(block m).
    for m in 0..=n + 1 {
        let mut members: Vec<(usize, usize)> = Vec::new();
        if m >= 1 {
            members.extend(basis.block_range(m - 1).map(|i| (0, i)));
        }
        if m <= n {
            members.extend(basis.block_range(m).map(|i| (1, i)));
        }
        let size = members.len();
        let local: std::collections::HashMap<(usize, usize), usize> =
            members.iter().enumerate().map(|(l, &key)| (key, l)).collect();
        let mut h = ComplexMatrix::zeros(size, size);
        // ⟨e,i|H|g,j⟩ = gτ (J₋)_ij and its conjugate
        for &(q, j) in &members {
            if q != 1 {
                continue;
            }
            let lj = local[&(1, j)];
            // row j of J₊ lists the i with (J₋)_ij = conj((J₊)_ji) ≠ 0
            for &(i, v) in ops.j_plus.row(j) {
                if let Some(&li) = local.get(&(0, i)) {
                    h[(li, lj)] = v.conj() * g_tau;
                    h[(lj, li)] = v * g_tau;
                }
            }
        }
        let block_u = matrix_exp(&h.scale(-I), EXP_TOL)?;
        for (l1, &(a, i)) in members.iter().enumerate() {
            for (l2, &(b, j)) in members.iter().enumerate() {
                u[a][b][(i, j)] = block_u[(l1, l2)];
            }
        }
    }
    Ok(u)
}

/// U ≈ 1 − i gτ (J₊σ⁻ + J₋σ⁺) − (gτ)²/2 (J₊J₋ σ⁻σ⁺ + J₋J₊ σ⁺σ⁻).
fn second_order_blocks(ops: &CollectiveOps, g_tau: f64) -> Blocks {
    let dim = ops.dim();
    let half_sq = C64::new(-g_tau * g_tau / 2.0, 0.0);
    let first = -I * g_tau;
    let id = ComplexMatrix::identity(dim);
    let u_ee = &id + &ops.j_minus_j_plus.to_dense().scale(half_sq);
    let u_gg = &id + &ops.j_plus_j_minus.to_dense().scale(half_sq);
    let u_eg = ops.j_minus.to_dense().scale(first);
    let u_ge = ops.j_plus.to_dense().scale(first);
    [[u_ee, u_eg], [u_ge, u_gg]]
}

/// Simulates the collision model for a bath description.
#[allow(clippy::too_many_arguments)]
pub fn collision_chain(
    rho0: &QubitState,
    bath: &BathSpec,
    params: &CollisionParams,
    times: &[f64],
    dt: f64,
    mode: CollisionMode,
    scheme: Scheme,
) -> Result<Trajectory> {
    params.validate()?;
    if mode == CollisionMode::Exact && bath.n > MAX_EXACT_QUBITS {
        return Err(Error::TooManyQubits { n: bath.n, max: MAX_EXACT_QUBITS });
    }
    check_step(params, dt)?;
    check_grid(times)?;
    let rho_b = validate_bath(bath)?;
    let ops = build_collective_ops_with_max(bath.n, MAX_EXACT_QUBITS)?;
    collision_chain_for_state(rho0, &rho_b, &ops, params, times, dt, mode, scheme)
}

fn check_step(params: &CollisionParams, dt: f64) -> Result<()> {
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::range("dt", format!("{dt} must be positive")));
    }
    if params.p * dt > 1.0 + 1e-12 {
        return Err(Error::range("dt", format!("p·dt = {} exceeds 1", params.p * dt)));
    }
    Ok(())
}

/// Collision model for an already materialized bath state.
#[allow(clippy::too_many_arguments)]
pub fn collision_chain_for_state(
    rho0: &QubitState,
    rho_b: &DensityMatrix,
    ops: &CollectiveOps,
    params: &CollisionParams,
    times: &[f64],
    dt: f64,
    mode: CollisionMode,
    scheme: Scheme,
) -> Result<Trajectory> {
    params.validate()?;
    check_step(params, dt)?;
    check_grid(times)?;
    let map = if params.g == 0.0 { CollisionMap::identity() } else { CollisionMap::new(rho_b, ops, params, mode)? };

    // step sizes per recorded interval
    let mut intervals = Vec::with_capacity(times.len());
    let mut now = 0.0;
    for &t in times {
        let span = t - now;
        let steps = if span > 0.0 { (span / dt * (1.0 - 1e-12)).ceil().max(1.0) as usize } else { 0 };
        intervals.push((steps, if steps > 0 { span / steps as f64 } else { 0.0 }));
        now = t.max(now);
    }

    let init = to_vec(rho0.matrix());
    let records: Vec<[C64; 4]> = match scheme {
        Scheme::Deterministic => {
            let mut v = init;
            let mut out = Vec::with_capacity(times.len());
            for &(steps, h) in &intervals {
                if steps > 0 {
                    let step = map.mixture(params.p * h);
                    for _ in 0..steps {
                        v = step.apply_vec(&v);
                    }
                }
                out.push(v);
            }
            out
        }
        Scheme::Stochastic { seed, trajectories } => {
            if trajectories == 0 {
                return Err(Error::range("trajectories", "need at least one trajectory"));
            }
            let n_chunks = trajectories.div_ceil(CHUNK);
            let partial: Vec<Vec<[C64; 4]>> = (0..n_chunks)
                .into_par_iter()
                .map(|chunk| {
                    let mut acc = vec![[ZERO; 4]; intervals.len()];
                    for run in chunk * CHUNK..((chunk + 1) * CHUNK).min(trajectories) {
                        let mut rng = ChaCha8Rng::seed_from_u64(seed);
                        rng.set_stream(run as u64);
                        let mut v = init;
                        for (slot, &(steps, h)) in acc.iter_mut().zip(&intervals) {
                            let prob = (params.p * h).min(1.0);
                            for _ in 0..steps {
                                if rng.random_bool(prob) {
                                    v = map.apply_vec(&v);
                                }
                            }
                            for (s, x) in slot.iter_mut().zip(&v) {
                                *s += x;
                            }
                        }
                    }
                    acc
                })
                .collect();
            let mut total = vec![[ZERO; 4]; intervals.len()];
            for chunk in &partial {
                for (t, c) in total.iter_mut().zip(chunk) {
                    for (a, b) in t.iter_mut().zip(c) {
                        *a += b;
                    }
                }
            }
            let inv = 1.0 / trajectories as f64;
            total.into_iter().map(|v| v.map(|x| x * inv)).collect()
        }
    };

    let mut states = Vec::with_capacity(records.len());
    for (v, t) in records.iter().zip(times) {
        let m = from_vec(v);
        let drift = (m.trace() - ONE).norm();
        if mode == CollisionMode::Exact && drift > 1e-8 {
            return Err(Error::Numerical(format!("trace drifted by {drift:e} at t = {t}")));
        }
        states.push(QubitState::from_trusted(m));
    }
    Ok(Trajectory::from_states(times.to_vec(), TimeAxis::Absolute, params.mu(), states))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bath::{dicke_block_state, product_mixed_state, thermal_hec_state};
    use crate::coefficients::{coefficients_from_state, lindblad_rhs};
    use crate::dynamics::linear_grid;
    use crate::linalg::{kron, partial_trace_second, random_density};
    use crate::spin::build_collective_ops;
    use approx::assert_abs_diff_eq;

    /// Dense reference: full joint Hamiltonian, full exponential, partial trace.
    fn dense_collision(rho_q: &ComplexMatrix, rho_b: &DensityMatrix, ops: &CollectiveOps, g_tau: f64) -> ComplexMatrix {
        let sp = crate::coefficients::sigma_plus();
        let sm = crate::coefficients::sigma_minus();
        let h = &kron(&sm, &ops.j_plus.to_dense()) + &kron(&sp, &ops.j_minus.to_dense());
        let u = matrix_exp(&h.scale(C64::new(0.0, -g_tau)), 1e-15).unwrap();
        let joint = kron(rho_q, rho_b.matrix());
        let evolved = &(&u * &joint) * &u.adjoint();
        partial_trace_second(&evolved, 2, rho_b.dim()).unwrap()
    }

    #[test]
    fn exact_map_matches_dense_reference() {
        for n in 1..=3 {
            let ops = build_collective_ops(n).unwrap();
            let rho_b = random_density(1 << n, 40 + n as u64);
            let params = CollisionParams { g: 0.7, tau: 0.5, p: 1.0, omega0: 1.0 };
            let map = CollisionMap::new(&rho_b, &ops, &params, CollisionMode::Exact).unwrap();
            for seed in 0..3 {
                let q = random_density(2, seed).into_matrix();
                let expected = dense_collision(&q, &rho_b, &ops, params.g_tau());
                assert!(map.apply(&q).max_abs_diff(&expected) < 1e-12, "N = {n}");
            }
        }
    }

    #[test]
    fn exact_map_is_trace_preserving() {
        let ops = build_collective_ops(4).unwrap();
        let rho_b = thermal_hec_state(4, 0.8).unwrap();
        let params = CollisionParams { g: 1.0, tau: 0.9, p: 1.0, omega0: 1.0 };
        let map = CollisionMap::new(&rho_b, &ops, &params, CollisionMode::Exact).unwrap();
        for seed in 0..5 {
            let q = random_density(2, seed).into_matrix();
            let out = map.apply(&q);
            assert_abs_diff_eq!(out.trace().re, 1.0, epsilon = 1e-12);
            assert!(out.is_hermitian(1e-12));
        }
    }

    #[test]
    fn second_order_one_collision_matches_generator() {
        // (Φ(ρ) − ρ)·p − rhs(ρ) is O(p (gτ)³): shrinks 4x per halving at fixed μ
        let ops = build_collective_ops(3).unwrap();
        let rho_b = random_density(8, 77);
        let q = random_density(2, 3).into_matrix();
        let residual = |g_tau: f64| {
            let params = CollisionParams::from_g_tau_and_mu(g_tau, 1.0);
            let map = CollisionMap::new(&rho_b, &ops, &params, CollisionMode::SecondOrder).unwrap();
            let c = coefficients_from_state(&rho_b, &ops, &params).unwrap();
            let change = (&map.apply(&q) - &q).scale(C64::new(params.p, 0.0));
            change.max_abs_diff(&lindblad_rhs(&q, &c).unwrap())
        };
        let (r1, r2, r3) = (residual(0.04), residual(0.02), residual(0.01));
        assert!(r1 < 1.0, "{r1}");
        assert!((r1 / r2 - 2.0).abs() < 0.3 && (r2 / r3 - 2.0).abs() < 0.3, "{r1} {r2} {r3}");
        // residual per collision is O((gτ)³)
        let per_collision = |g: f64, r: f64| r / CollisionParams::from_g_tau_and_mu(g, 1.0).p;
        let ratio = per_collision(0.02, r2) / per_collision(0.01, r3);
        assert!((ratio - 8.0).abs() < 1.0, "{ratio}");
    }

    #[test]
    fn zero_coupling_is_constant() {
        let params = CollisionParams { g: 0.0, tau: 0.1, p: 10.0, omega0: 1.0 };
        let q = QubitState::diagonal(0.3);
        let traj = collision_chain(
            &q,
            &BathSpec::dicke(3, 1),
            &params,
            &linear_grid(1.0, 11),
            0.1,
            CollisionMode::Exact,
            Scheme::Deterministic,
        )
        .unwrap();
        assert!(traj.states.iter().all(|s| s == &q));
    }

    #[test]
    fn stochastic_average_approaches_deterministic() {
        let params = CollisionParams::from_g_tau_and_mu(0.2, 1.0);
        let grid = linear_grid(0.3, 7);
        let bath = BathSpec::product_mixed(2, 0.2);
        let dt = 0.5 / params.p;
        let det = collision_chain(&QubitState::ground(), &bath, &params, &grid, dt, CollisionMode::Exact, Scheme::Deterministic).unwrap();
        let sto = collision_chain(
            &QubitState::ground(),
            &bath,
            &params,
            &grid,
            dt,
            CollisionMode::Exact,
            Scheme::Stochastic { seed: 9, trajectories: 4000 },
        )
        .unwrap();
        assert!(det.max_excited_deviation(&sto) < 0.01, "{}", det.max_excited_deviation(&sto));
    }

    #[test]
    fn stochastic_is_reproducible_across_pools() {
        let params = CollisionParams::from_g_tau_and_mu(0.2, 1.0);
        let grid = linear_grid(0.2, 5);
        let run = |threads: usize| {
            let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
            pool.install(|| {
                collision_chain(
                    &QubitState::ground(),
                    &BathSpec::dicke(2, 1),
                    &params,
                    &grid,
                    1.0 / params.p,
                    CollisionMode::SecondOrder,
                    Scheme::Stochastic { seed: 42, trajectories: 100 },
                )
                .unwrap()
            })
        };
        let (a, b) = (run(1), run(4));
        for (x, y) in a.states.iter().zip(&b.states) {
            assert_eq!(x.matrix(), y.matrix());
        }
    }

    #[test]
    fn step_and_size_limits() {
        let params = CollisionParams { g: 1.0, tau: 0.1, p: 10.0, omega0: 1.0 };
        let q = QubitState::ground();
        let err = collision_chain(&q, &BathSpec::dicke(2, 1), &params, &[0.0, 1.0], 0.2, CollisionMode::Exact, Scheme::Deterministic);
        assert!(matches!(err, Err(Error::OutOfRange { name: "dt", .. })));
        let err = collision_chain(&q, &BathSpec::dicke(11, 1), &params, &[0.0], 0.1, CollisionMode::Exact, Scheme::Deterministic);
        assert!(matches!(err, Err(Error::TooManyQubits { .. })));
    }

    #[test]
    fn dicke_block_bath_keeps_qubit_diagonal() {
        let ops = build_collective_ops(4).unwrap();
        let rho_b = dicke_block_state(4, 1).unwrap();
        let params = CollisionParams::from_g_tau_and_mu(0.1, 1.0);
        let map = CollisionMap::new(&rho_b, &ops, &params, CollisionMode::Exact).unwrap();
        let out = map.apply(QubitState::ground().matrix());
        assert!(out[(0, 1)].norm() < 1e-15);
        let mixed = product_mixed_state(4, 0.3).unwrap();
        let map = CollisionMap::new(&mixed, &ops, &params, CollisionMode::Exact).unwrap();
        assert!(map.apply(QubitState::ground().matrix())[(0, 1)].norm() < 1e-15);
    }
}
