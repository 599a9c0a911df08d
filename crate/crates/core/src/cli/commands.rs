use std::path::PathBuf;

use serde_json::{json, Value};

use super::settings::{parse_n_list, Settings};
use super::{figures, CliError, Emit, Sink};
use crate::bath::{classify_coherences, parse_explicit_csv, validate_bath, BathKind, BathSpec, Coherence};
use crate::coefficients::{coefficients_for_bath, CollisionParams, MeqCoefficients};
use crate::dynamics::{
    collision_chain, evolve_analytic, integrate_master, linear_grid, prepare_thermal_dicke_history, scaling_sweep,
    steady_temperature, thermalization_time, CollisionMode, KRule, QubitState, Scheme, SweepFamily, TimeAxis,
    Trajectory, COHERENCE_FLAG,
};
use crate::dynamics::MAX_EXACT_QUBITS;
use crate::io::{ladder_csv, product_matrix_csv, sweep_csv, trajectory_csv};
use crate::linalg::{ComplexMatrix, DensityMatrix, Tolerances, C64};
use crate::spin::{build_collective_ops, DEFAULT_MAX_QUBITS};

const BATH_KINDS: &[&str] = &["product", "thermal-hec", "dicke", "explicit"];

fn params(s: &Settings) -> Result<CollisionParams, CliError> {
    let d = CollisionParams::default();
    let p = CollisionParams {
        g: s.get_or("g", d.g)?,
        tau: s.get_or("tau", d.tau)?,
        p: s.get_or("p", d.p)?,
        omega0: s.get_or("omega0", d.omega0)?,
    };
    p.validate()?;
    Ok(p)
}

fn probability(field: &str, v: f64) -> Result<f64, CliError> {
    if (0.0..=1.0).contains(&v) {
        Ok(v)
    } else {
        Err(CliError::config(field, format!("{v} is not a probability")))
    }
}

fn n_bar(s: &Settings) -> Result<Option<f64>, CliError> {
    match s.get::<f64>("nbar")? {
        Some(v) if !(v >= 0.0 && v.is_finite()) => Err(CliError::config("nbar", format!("{v} must be non-negative"))),
        other => Ok(other),
    }
}

/// p_e from `pe`, or the thermal value n̄/(2n̄+1) from `nbar`.
fn product_pe(s: &Settings) -> Result<f64, CliError> {
    if let Some(pe) = s.get::<f64>("pe")? {
        return probability("pe", pe);
    }
    match n_bar(s)? {
        Some(nb) => Ok(nb / (2.0 * nb + 1.0)),
        None => Err(CliError::config("pe", "required (or give nbar for a thermal product bath)")),
    }
}

fn qubit_count(s: &Settings) -> Result<usize, CliError> {
    let n: usize = s.require("N")?;
    if n == 0 {
        return Err(CliError::config("N", "need at least one bath qubit"));
    }
    Ok(n)
}

fn bath(s: &Settings) -> Result<BathSpec, CliError> {
    let kind = s.choice("bath", BATH_KINDS, None)?;
    if kind == "explicit" {
        let file: PathBuf = s.require("file")?;
        let text = std::fs::read_to_string(&file)
            .map_err(|e| CliError::config("file", format!("cannot read {}: {e}", file.display())))?;
        let (n, m) = parse_explicit_csv(&text).map_err(|e| CliError::config("file", e.to_string()))?;
        if let Some(flag) = s.get::<usize>("N")? {
            if flag != n {
                return Err(CliError::config("N", format!("{flag} disagrees with N={n} in {}", file.display())));
            }
        }
        let rho = DensityMatrix::validate(m, &Tolerances::default()).map_err(|e| CliError::config("file", e.to_string()))?;
        return Ok(BathSpec::explicit(n, rho));
    }
    let n = qubit_count(s)?;
    Ok(match kind.as_str() {
        "product" => BathSpec::product_mixed(n, product_pe(s)?),
        "thermal-hec" => BathSpec::thermal_hec(n, n_bar(s)?.ok_or_else(|| CliError::config("nbar", "required"))?),
        _ => {
            let k: usize = s.require("k")?;
            if k > n {
                return Err(CliError::config("k", format!("{k} excitations for {n} qubits")));
            }
            BathSpec::dicke(n, k)
        }
    })
}

fn bath_json(b: &BathSpec, s: &Settings) -> Value {
    let mut v = json!({ "kind": b.kind_tag(), "N": b.n });
    match &b.kind {
        BathKind::ProductMixed { p_e } => v["pe"] = json!(p_e),
        BathKind::ThermalHec { n_bar } => v["nbar"] = json!(n_bar),
        BathKind::DickeBlock { k } => v["k"] = json!(k),
        BathKind::Explicit(_) => v["file"] = json!(s.raw("file")),
    }
    v
}

fn pretty(v: &Value) -> String {
    let mut text = serde_json::to_string_pretty(v).expect("JSON values serialize");
    text.push('\n');
    text
}

fn warn(emits: &mut Vec<Emit>, msg: impl AsRef<str>) {
    emits.push(Emit { sink: Sink::Stderr, text: format!("warning: {}\n", msg.as_ref()) });
}

pub(super) fn coeffs(s: &Settings) -> Result<Vec<Emit>, CliError> {
    let bath = bath(s)?;
    let params = params(s)?;
    let out = s.output_path("output")?;
    let c = coefficients_for_bath(&bath, &params)?;
    let doc = json!({
        "bath": bath_json(&bath, s),
        "params": params,
        "coefficients": c,
        "t_q": thermalization_time(&c),
        "steady_temperature": steady_temperature(&c),
        "beyond_second_order": params.beyond_second_order(),
    });
    Ok(vec![Emit::to(out, pretty(&doc))])
}

fn initial_state(s: &Settings) -> Result<QubitState, CliError> {
    match s.raw("init").unwrap_or("ground") {
        "ground" => Ok(QubitState::ground()),
        "excited" => Ok(QubitState::excited()),
        "plus" => {
            let h = C64::new(0.5, 0.0);
            Ok(QubitState::new(ComplexMatrix::from_fn(2, 2, |_, _| h))?)
        }
        other => {
            let ee: f64 = other.parse().map_err(|_| CliError::config("init", format!("`{other}` is not ground, excited, plus or a population")))?;
            Ok(QubitState::diagonal(probability("init", ee)?))
        }
    }
}

struct EvolvePlan {
    bath: BathSpec,
    params: CollisionParams,
    coeffs: MeqCoefficients,
    init: QubitState,
    engine: String,
    grid: Vec<f64>,
    dt: f64,
    mode: CollisionMode,
    scheme: Scheme,
}

fn plan_evolve(s: &Settings, emits: &mut Vec<Emit>) -> Result<EvolvePlan, CliError> {
    let bath = bath(s)?;
    let params = params(s)?;
    let engine = s.choice("engine", &["analytic", "ode", "collisions"], Some("analytic"))?;
    let init = initial_state(s)?;
    let scaled = s.choice("time", &["absolute", "scaled"], Some("absolute"))? == "scaled";
    let mode = match s.choice("mode", &["exact", "second-order"], Some("exact"))?.as_str() {
        "exact" => CollisionMode::Exact,
        _ => CollisionMode::SecondOrder,
    };
    let scheme = match s.choice("scheme", &["deterministic", "stochastic"], Some("deterministic"))?.as_str() {
        "deterministic" => Scheme::Deterministic,
        _ => {
            let trajectories: usize = s.get_or("trajectories", 1000)?;
            if trajectories == 0 {
                return Err(CliError::config("trajectories", "need at least one trajectory"));
            }
            Scheme::Stochastic { seed: s.get_or("seed", 0)?, trajectories }
        }
    };
    let n_points: usize = s.get_or("n_points", 101)?;

    let coeffs = coefficients_for_bath(&bath, &params)?;
    if engine == "analytic" && !coeffs.is_thermal_only(1e-12) {
        return Err(CliError::config("engine", "the bath has displacement or squeezing terms; use ode or collisions"));
    }
    if engine == "collisions" && bath.n > MAX_EXACT_QUBITS {
        return Err(CliError::config("N", format!("collisions engine supports N ≤ {MAX_EXACT_QUBITS}")));
    }
    let mu = params.mu();
    let unit = if scaled {
        if mu <= 0.0 {
            return Err(CliError::config("time", "scaled time needs μ > 0"));
        }
        1.0 / mu
    } else {
        1.0
    };
    let t_q = thermalization_time(&coeffs);
    let t_end = match s.get::<f64>("t_end")? {
        Some(t) if t >= 0.0 && t.is_finite() => t * unit,
        Some(t) => return Err(CliError::config("t_end", format!("{t} must be non-negative"))),
        None if t_q.is_finite() => 5.0 * t_q,
        None => return Err(CliError::config("t_end", "required when the qubit is uncoupled")),
    };
    if n_points > 1 && t_end == 0.0 {
        return Err(CliError::config("t_end", "must be positive for more than one output point"));
    }
    let dt = match s.get::<f64>("dt")? {
        Some(dt) if dt > 0.0 && dt.is_finite() => dt * unit,
        Some(dt) => return Err(CliError::config("dt", format!("{dt} must be positive"))),
        None if engine == "collisions" => 1.0 / params.p,
        None if t_q.is_finite() => t_q / 100.0,
        None => (t_end / 1000.0).max(f64::MIN_POSITIVE),
    };
    if engine == "collisions" && params.p * dt > 1.0 + 1e-12 {
        return Err(CliError::config("dt", format!("p·dt = {} exceeds 1", params.p * dt)));
    }
    if engine == "ode" && dt > t_q / 20.0 {
        warn(emits, format!("dt = {dt} exceeds t_q/20 = {}", t_q / 20.0));
    }
    if engine != "analytic" && params.beyond_second_order() {
        warn(emits, format!("gτ = {} is outside the second-order regime", params.g_tau()));
    }
    Ok(EvolvePlan { bath, params, coeffs, init, engine, grid: linear_grid(t_end, n_points), dt, mode, scheme })
}

pub(super) fn evolve(s: &Settings) -> Result<Vec<Emit>, CliError> {
    let mut emits = Vec::new();
    let plan = plan_evolve(s, &mut emits)?;
    let out = s.output_path("output")?;
    let traj = match plan.engine.as_str() {
        "analytic" => {
            let states =
                plan.grid.iter().map(|&t| evolve_analytic(&plan.init, &plan.coeffs, t)).collect::<crate::Result<Vec<_>>>()?;
            Trajectory::from_states(plan.grid.clone(), TimeAxis::Absolute, plan.coeffs.mu, states)
        }
        "ode" => integrate_master(&plan.init, &plan.coeffs, &plan.grid, plan.dt)?,
        _ => collision_chain(&plan.init, &plan.bath, &plan.params, &plan.grid, plan.dt, plan.mode, plan.scheme)?,
    };
    if traj.coherent {
        warn(&mut emits, format!("|ρ_eg| exceeds {COHERENCE_FLAG:e}; temperatures use populations only"));
    }
    emits.push(Emit::to(out, trajectory_csv(&traj)));
    Ok(emits)
}

pub(super) fn sweep(s: &Settings) -> Result<Vec<Emit>, CliError> {
    let family_name = s.choice("family", &["dicke", "product", "thermal-hec"], None)?;
    let ns = parse_n_list(&s.require::<String>("N")?).map_err(|e| CliError::config("N", e))?;
    let mut info = json!({ "family": family_name });
    let family = match family_name.as_str() {
        "dicke" => {
            let rule = s.choice("krule", &["quarter", "half-minus-one"], Some("half-minus-one"))?;
            info["krule"] = json!(rule);
            SweepFamily::Dicke(if rule == "quarter" { KRule::Quarter } else { KRule::HalfMinusOne })
        }
        "product" => {
            let p_e = product_pe(s)?;
            info["pe"] = json!(p_e);
            SweepFamily::ProductMixed { p_e }
        }
        _ => {
            let n_bar = n_bar(s)?.ok_or_else(|| CliError::config("nbar", "required"))?;
            info["nbar"] = json!(n_bar);
            SweepFamily::ThermalHec { n_bar }
        }
    };
    let params = params(s)?;
    let out = s.output_path("output")?;
    let slopes_path = s.output_path("slopes")?;
    let table = scaling_sweep(family, &ns, &params)?;
    info["N"] = json!(ns);
    info["slope_t_q"] = json!(table.slope_t_q);
    info["slope_T_q"] = json!(table.slope_temperature);
    let slopes = Emit { sink: slopes_path.map_or(Sink::Stderr, Sink::File), text: pretty(&info) };
    Ok(vec![Emit::to(out, sweep_csv(&table)), slopes])
}

const ENTRY_LIST_MAX_QUBITS: usize = 6;

fn label_letter(c: Coherence) -> char {
    match c {
        Coherence::Population => 'P',
        Coherence::Hec => 'H',
        Coherence::Displacement => 'D',
        Coherence::Squeezing => 'S',
        Coherence::Ineffective => '.',
    }
}

pub(super) fn classify(s: &Settings) -> Result<Vec<Emit>, CliError> {
    // classification depends only on the operators, so a bare N is enough
    let bath = if s.has("bath") { bath(s)? } else { BathSpec::product_mixed(qubit_count(s)?, 0.5) };
    let format = s.choice("format", &["json", "text"], Some("json"))?;
    let out = s.output_path("output")?;
    if bath.n > DEFAULT_MAX_QUBITS {
        return Err(CliError::config("N", format!("classification supports N ≤ {DEFAULT_MAX_QUBITS}")));
    }
    let rho = validate_bath(&bath)?;
    let ops = build_collective_ops(bath.n)?;
    let map = classify_coherences(&rho, &ops)?;
    let dim = map.dim();
    let occupied = |i: usize, j: usize| rho[(i, j)].norm() > crate::bath::EFFECTIVE_THRESHOLD;

    let text = if format == "text" {
        let width = bath.n;
        let mut t = format!("{:width$} ", "");
        for j in 0..dim {
            t.push_str(&format!(" {}", map.basis.label(j)));
        }
        t.push('\n');
        for i in 0..dim {
            t.push_str(&map.basis.label(i));
            t.push(' ');
            for j in 0..dim {
                let c = label_letter(map.primary(i, j));
                let c = if occupied(i, j) { c } else { c.to_ascii_lowercase() };
                t.push_str(&format!(" {c:>width$}"));
            }
            t.push('\n');
        }
        t
    } else {
        let mut counts = serde_json::Map::new();
        let mut occupied_counts = serde_json::Map::new();
        for c in Coherence::ALL {
            let (mut all, mut occ) = (0usize, 0usize);
            for i in 0..dim {
                for j in 0..dim {
                    if map.primary(i, j) == c {
                        all += 1;
                        occ += occupied(i, j) as usize;
                    }
                }
            }
            counts.insert(c.name().into(), json!(all));
            occupied_counts.insert(c.name().into(), json!(occ));
        }
        let mut doc = json!({
            "bath": bath_json(&bath, s),
            "N": bath.n,
            "dim": dim,
            "block_sizes": crate::spin::block_sizes(bath.n),
            "counts": counts,
            "occupied_counts": occupied_counts,
        });
        if bath.n <= ENTRY_LIST_MAX_QUBITS {
            let mut entries = Vec::with_capacity(dim * dim);
            for i in 0..dim {
                for j in 0..dim {
                    let (ki, kj) = map.block_index(i, j);
                    let labels: Vec<&str> = map.labels(i, j).labels().into_iter().map(Coherence::name).collect();
                    entries.push(json!({
                        "i": i, "j": j,
                        "row": map.basis.label(i), "col": map.basis.label(j),
                        "k_row": ki, "k_col": kj,
                        "primary": map.primary(i, j).name(),
                        "labels": labels,
                        "occupied": occupied(i, j),
                    }));
                }
            }
            doc["entries"] = Value::Array(entries);
        }
        pretty(&doc)
    };
    Ok(vec![Emit::to(out, text)])
}

pub(super) fn prepare(s: &Settings) -> Result<Vec<Emit>, CliError> {
    let n = qubit_count(s)?;
    if n > DEFAULT_MAX_QUBITS {
        return Err(CliError::config("N", format!("preparation supports N ≤ {DEFAULT_MAX_QUBITS}")));
    }
    let n_bar = n_bar(s)?.ok_or_else(|| CliError::config("nbar", "required"))?;
    let gamma0: f64 = s.get_or("gamma0", 1.0)?;
    if !(gamma0 > 0.0 && gamma0.is_finite()) {
        return Err(CliError::config("gamma0", format!("{gamma0} must be positive")));
    }
    let t_end: f64 = s.get_or("t_end", 40.0 / gamma0)?;
    if !(t_end >= 0.0 && t_end.is_finite()) {
        return Err(CliError::config("t_end", format!("{t_end} must be non-negative")));
    }
    let fastest = (0..=n)
        .map(|k| gamma0 * ((n_bar + 1.0) * (k * (n + 1 - k)) as f64 + n_bar * ((k + 1) * (n - k)) as f64))
        .fold(0.0, f64::max);
    let dt: f64 = s.get_or("dt", 0.5 / fastest)?;
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(CliError::config("dt", format!("{dt} must be positive")));
    }
    let steps = (t_end / dt).ceil() as usize;
    let record_every: usize = s.get_or("record_every", (steps / 200).max(1))?;
    if record_every == 0 {
        return Err(CliError::config("record_every", "must be positive"));
    }
    let out = s.output_path("output")?;
    let matrix = s.output_path("matrix")?;
    let run = prepare_thermal_dicke_history(n, n_bar, gamma0, t_end, dt, record_every)?;
    let mut emits = vec![Emit::to(out, ladder_csv(&run))];
    if let Some(path) = matrix {
        emits.push(Emit { sink: Sink::File(path), text: product_matrix_csv(&run) });
    }
    Ok(emits)
}

pub(super) fn figures(s: &Settings) -> Result<Vec<Emit>, CliError> {
    let dir: PathBuf = s.require("dir")?;
    if dir.exists() && !dir.is_dir() {
        return Err(CliError::config("dir", format!("{} is not a directory", dir.display())));
    }
    let n_points: usize = s.get_or("n_points", figures::DEFAULT_POINTS)?;
    let files = figures::all_datasets(n_points)?;
    Ok(files.into_iter().map(|(name, text)| Emit { sink: Sink::File(dir.join(name)), text }).collect())
}
