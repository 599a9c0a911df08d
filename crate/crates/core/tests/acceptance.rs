//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.

use std::path::Path;
use std::process::ExitCode;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use qollide::bath::{
    classify_coherences, dicke_block_state, product_mixed_state, thermal_hec_state, Coherence,
};
use qollide::cli::figures;
use qollide::coefficients::{
    coefficients_dicke, coefficients_from_state, coefficients_product_mixed, coefficients_thermal_hec, gamma_eff,
    CollisionParams,
};
use qollide::dynamics::{
    collision_chain, evolve_analytic, prepare_thermal_dicke, scaling_sweep, steady_temperature, temperature_trajectory,
    thermalization_time, CollisionMode, KRule, QubitState, Scheme, SweepFamily, TimeAxis, Trajectory,
};
use qollide::linalg::{ComplexMatrix, DensityMatrix, Tolerances, C64};
use qollide::spin::{build_collective_ops, BasisOrdering};
use qollide::BathSpec;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

/// Closed-form coefficients against brute-force Tr(J∓ρJ±) for every family,
/// N ≤ 8, p_e ∈ {0, 0.2, 0.5}, n̄ ∈ {0, 0.5, 1, 2} and every k.
fn coefficient_oracle() -> Outcome {
    let params = CollisionParams::default();
    let mut worst: f64 = 0.0;
    let mut cases = 0;
    for n in 1..=8 {
        let ops = build_collective_ops(n).unwrap();
        let mut check = |rho: DensityMatrix, closed: qollide::MeqCoefficients| {
            let brute = coefficients_from_state(&rho, &ops, &params).unwrap();
            worst = worst.max((brute.r_e - closed.r_e).abs()).max((brute.r_d - closed.r_d).abs());
            worst = worst.max(brute.lambda.norm()).max(brute.epsilon.norm());
            cases += 1;
        };
        for p_e in [0.0, 0.2, 0.5] {
            check(product_mixed_state(n, p_e).unwrap(), coefficients_product_mixed(n, p_e, &params).unwrap());
        }
        for n_bar in [0.0, 0.5, 1.0, 2.0] {
            check(thermal_hec_state(n, n_bar).unwrap(), coefficients_thermal_hec(n, n_bar, &params).unwrap());
        }
        for k in 0..=n {
            check(dicke_block_state(n, k).unwrap(), coefficients_dicke(n, k, &params).unwrap());
        }
    }
    outcome(worst <= 1e-12, format!("{cases} cases, max |Δ| = {worst:.2e} (tol 1e-12)"))
}

/// Same temperature for thermal-HEC and thermal product baths; the time ratio
/// t_q^HEC / t_q^mix equals μN / (γ_eff (2n̄+1)).
fn thermal_equivalence() -> Outcome {
    let params = CollisionParams::default();
    let (mut temp_gap, mut ratio_gap, mut gamma_gap): (f64, f64, f64) = (0.0, 0.0, 0.0);
    for n in 1..=12 {
        for n_bar in [0.25, 0.5, 1.0, 2.0, 5.0] {
            let hec = coefficients_thermal_hec(n, n_bar, &params).unwrap();
            let mix = coefficients_product_mixed(n, n_bar / (2.0 * n_bar + 1.0), &params).unwrap();
            temp_gap = temp_gap.max((steady_temperature(&hec) - steady_temperature(&mix)).abs());
            let g = gamma_eff(&hec, n_bar);
            gamma_gap = gamma_gap.max((g - hec.mu * hec.r_e / n_bar).abs() / g);
            let ratio = thermalization_time(&hec) / thermalization_time(&mix);
            let predicted = hec.mu * n as f64 / (g * (2.0 * n_bar + 1.0));
            ratio_gap = ratio_gap.max((ratio - predicted).abs() / predicted);
        }
    }
    outcome(
        temp_gap <= 1e-10 && ratio_gap <= 1e-12 && gamma_gap <= 1e-12,
        format!(
            "max |ΔT| = {temp_gap:.2e} (tol 1e-10), time-ratio rel. error {ratio_gap:.2e}, γ_eff consistency {gamma_gap:.2e}"
        ),
    )
}

/// Log-log slopes over N = 4, 8, …, 64.
fn superthermal_scaling() -> Outcome {
    let params = CollisionParams::default();
    let ns: Vec<usize> = (4..=64).step_by(4).collect();
    let half = scaling_sweep(SweepFamily::Dicke(KRule::HalfMinusOne), &ns, &params).unwrap();
    let quarter = scaling_sweep(SweepFamily::Dicke(KRule::Quarter), &ns, &params).unwrap();
    let (t_half, tq_half, t_quarter) =
        (half.slope_temperature.unwrap(), half.slope_t_q.unwrap(), quarter.slope_temperature.unwrap());
    let pass = (t_half - 2.0).abs() <= 0.05 && (tq_half + 2.0).abs() <= 0.05 && (t_quarter - 1.0).abs() <= 0.05;
    outcome(
        pass,
        format!(
            "k=N/2-1: slope(T) = {t_half:.4} (want 2.00±0.05), slope(t_q) = {tq_half:.4} (want -2.00±0.05); \
             k=N/4: slope(T) = {t_quarter:.4} (want 1.00±0.05)"
        ),
    )
}

/// Decay curves reach e⁻¹ at the closed-form scaled times, and the archived
/// dataset is reproduced byte for byte.
fn decay_regression() -> Outcome {
    // mixed N=4, mixed N=8, Dicke k=N/4 for N=4 and 8, Dicke N=8 k=3
    let expected = [1.0 / 4.0, 1.0 / 8.0, 1.0 / 10.0, 1.0 / 32.0, 1.0 / 38.0];
    let mut worst: f64 = 0.0;
    for (curve, want) in figures::decay_curves().unwrap().iter().zip(expected) {
        let t_q = thermalization_time(&curve.coeffs);
        worst = worst.max((curve.coeffs.mu * t_q - want).abs());
        // decay term recovered from the evolved population
        let ee = evolve_analytic(&QubitState::ground(), &curve.coeffs, t_q).unwrap().rho_ee();
        let ee_inf = curve.coeffs.r_e / (curve.coeffs.r_e + curve.coeffs.r_d);
        if ee_inf > 0.0 {
            worst = worst.max((1.0 - ee / ee_inf - (-1f64).exp()).abs());
        }
    }
    let golden = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden").join(figures::DECAY_FILE);
    let archived = std::fs::read_to_string(&golden).unwrap_or_default();
    let fresh = figures::decay_dataset(figures::DEFAULT_POINTS).unwrap();
    let same = archived == fresh;
    outcome(
        worst <= 1e-10 && same,
        format!("max |Δ μt_q| = {worst:.2e} (tol 1e-10), golden file {}", if same { "identical" } else { "DIFFERS" }),
    )
}

/// Temperature trajectories of Dicke baths with k = N/2 − 1 approach the
/// exact steady values and lie within 2% of the quadratic estimates.
fn temperature_regression() -> Outcome {
    let exact = [1.0 / (6.0f64 / 4.0).ln(), 1.0 / (20.0f64 / 18.0).ln(), 1.0 / (42.0f64 / 40.0).ln()];
    let approx = [2.5, 9.5, 20.5];
    let (mut asym, mut rel): (f64, f64) = (0.0, 0.0);
    for (i, n) in figures::TEMPERATURE_SIZES.into_iter().enumerate() {
        let (dicke, _) = figures::temperature_pair(n).unwrap();
        let t_end = 40.0 * thermalization_time(&dicke);
        let traj = temperature_trajectory(&dicke, &[0.0, t_end]).unwrap();
        asym = asym.max((traj[1] - exact[i]).abs()).max((steady_temperature(&dicke) - exact[i]).abs());
        rel = rel.max((traj[1] - approx[i]).abs() / approx[i]);
    }
    outcome(
        asym <= 1e-6 && rel <= 0.02,
        format!("max |T(∞) − exact| = {asym:.2e} (tol 1e-6), max deviation from estimate {:.2}% (tol 2%)", 100.0 * rel),
    )
}

/// Exact-propagator collision chain against the closed form for gτ = 0.2, 0.1, 0.05 at μ = 1.
fn collision_convergence() -> Outcome {
    let bath = BathSpec::dicke(4, 1);
    let grid: Vec<f64> = (0..=13).map(|i| 0.04 * i as f64).collect();
    let mut errors = Vec::new();
    for g_tau in [0.2, 0.1, 0.05] {
        let params = CollisionParams::from_g_tau_and_mu(g_tau, 1.0);
        let c = coefficients_dicke(4, 1, &params).unwrap();
        let chain = collision_chain(
            &QubitState::ground(),
            &bath,
            &params,
            &grid,
            1.0 / params.p,
            CollisionMode::Exact,
            Scheme::Deterministic,
        )
        .unwrap();
        let states: Vec<QubitState> =
            grid.iter().map(|&t| evolve_analytic(&QubitState::ground(), &c, t).unwrap()).collect();
        let exact = Trajectory::from_states(grid.clone(), TimeAxis::Absolute, c.mu, states);
        let dev = chain
            .states
            .iter()
            .zip(&exact.states)
            .map(|(a, b)| a.matrix().max_abs_diff(b.matrix()))
            .fold(0.0, f64::max);
        errors.push(dev);
    }
    let ratios = [errors[0] / errors[1], errors[1] / errors[2]];
    let pass = ratios.iter().all(|r| (r - 4.0).abs() <= 1.0);
    outcome(
        pass,
        format!(
            "deviations {:.3e}, {:.3e}, {:.3e}; ratios {:.3}, {:.3} (want 4±1)",
            errors[0], errors[1], errors[2], ratios[0], ratios[1]
        ),
    )
}

/// Ladder preparation against the closed-form thermal-HEC state.
fn preparation_oracle() -> Outcome {
    let (mut entry, mut ratio): (f64, f64) = (0.0, 0.0);
    for n in 1..=8 {
        for n_bar in [0.5, 1.0] {
            let (ladder, rho) = prepare_thermal_dicke(n, n_bar, 1.0, 40.0, 0.002).unwrap();
            let target = thermal_hec_state(n, n_bar).unwrap();
            entry = entry.max(rho.matrix().max_abs_diff(target.matrix()));
            let r = n_bar / (n_bar + 1.0);
            for k in 0..n {
                ratio = ratio.max((ladder.populations[k + 1] / ladder.populations[k] - r).abs());
            }
        }
    }
    outcome(
        entry <= 1e-6 && ratio <= 1e-6,
        format!("max entry deviation {entry:.2e}, max ratio deviation {ratio:.2e} (tol 1e-6)"),
    )
}

fn random_density(dim: usize, rng: &mut ChaCha8Rng) -> DensityMatrix {
    let a = ComplexMatrix::from_fn(dim, dim, |_, _| C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)));
    let m = &a * &a.adjoint();
    let tr = m.trace().re;
    DensityMatrix::new(m.scale(C64::new(1.0 / tr, 0.0)), &Tolerances::default()).unwrap()
}

/// Exhaustive label rules for N ≤ 5 and invariance of the coefficients under
/// perturbations supported on ineffective entries.
fn classification_suite() -> Outcome {
    let mut mismatches = 0usize;
    let mut entries = 0usize;
    let mut drift: f64 = 0.0;
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let params = CollisionParams::default();
    for n in 1..=5 {
        let basis = BasisOrdering::new(n);
        let ops = build_collective_ops(n).unwrap();
        let dim = basis.dim();
        let map = classify_coherences(&DensityMatrix::maximally_mixed(dim), &ops).unwrap();
        for i in 0..dim {
            for j in 0..dim {
                let flips = (basis.binary_of(i) ^ basis.binary_of(j)).count_ones();
                let dk = basis.excitation(i) as i64 - basis.excitation(j) as i64;
                let want = match (flips, dk.abs()) {
                    (0, _) => Coherence::Population,
                    (1, _) => Coherence::Displacement,
                    (2, 2) => Coherence::Squeezing,
                    (2, 0) => Coherence::Hec,
                    _ => Coherence::Ineffective,
                };
                entries += 1;
                mismatches += (map.primary(i, j) != want) as usize;
            }
        }
        for _ in 0..20 {
            let rho = random_density(dim, &mut rng);
            let mut m = rho.matrix().clone();
            for i in 0..dim {
                for j in (i + 1)..dim {
                    if map.primary(i, j) == Coherence::Ineffective {
                        let z = C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
                        m[(i, j)] += z;
                        m[(j, i)] += z.conj();
                    }
                }
            }
            let perturbed = DensityMatrix::new(m, &Tolerances::default()).unwrap();
            let a = coefficients_from_state(&rho, &ops, &params).unwrap();
            let b = coefficients_from_state(&perturbed, &ops, &params).unwrap();
            drift = drift
                .max((a.lambda - b.lambda).norm())
                .max((a.epsilon - b.epsilon).norm())
                .max((a.r_e - b.r_e).abs())
                .max((a.r_d - b.r_d).abs());
        }
    }
    outcome(
        mismatches == 0 && drift <= 1e-12,
        format!("{entries} entries, {mismatches} label mismatches; max coefficient drift {drift:.2e} (tol 1e-12)"),
    )
}

/// N = 8: Dicke k = 3 against the product bath with the same steady temperature.
fn pointwise_advantage() -> Outcome {
    let params = CollisionParams::default();
    let dicke = coefficients_dicke(8, 3, &params).unwrap();
    let mixed = coefficients_product_mixed(8, 18.0 / 38.0, &params).unwrap();
    let grid: Vec<f64> = (0..=400).map(|i| i as f64 * 0.005).collect();
    let td = temperature_trajectory(&dicke, &grid).unwrap();
    let tm = temperature_trajectory(&mixed, &grid).unwrap();
    let violations = td.iter().zip(&tm).filter(|(d, m)| d < m).count();
    let probe = thermalization_time(&mixed) / 2.0;
    let at = temperature_trajectory(&dicke, &[probe]).unwrap()[0];
    let base = temperature_trajectory(&mixed, &[probe]).unwrap()[0];
    let gain = (at - base) / base;
    outcome(
        violations == 0 && gain >= 0.10,
        format!(
            "{violations} grid violations of {}; at μt = {:.4}: T_D = {at:.4}, T_mix = {base:.4}, gain {:.1}% (want ≥ 10%)",
            grid.len(),
            probe * dicke.mu,
            100.0 * gain
        ),
    )
}

fn main() -> ExitCode {
    type Criterion = (&'static str, fn() -> Outcome);
    let criteria: [Criterion; 9] = [
        ("coefficient oracle equivalence", coefficient_oracle),
        ("thermal equivalence", thermal_equivalence),
        ("superthermalization scaling", superthermal_scaling),
        ("decay-curve regression", decay_regression),
        ("temperature-curve regression", temperature_regression),
        ("collision-model convergence", collision_convergence),
        ("preparation oracle", preparation_oracle),
        ("classification property suite", classification_suite),
        ("pointwise advantage", pointwise_advantage),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let o = run();
        println!("[{}] {}. {name}: {}", if o.pass { "PASS" } else { "FAIL" }, i + 1, o.detail);
        failed += (!o.pass) as usize;
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
