//! Command-line front end.
//!
//! Every subcommand reads its options from an optional flat config file
//! (`--config`) overlaid with flags, validates them completely, computes, and
//! only then writes its outputs.
//!
//! Exit codes: 0 success, 2 configuration error, 3 numeric invariant violation.

mod commands;
pub mod figures;
pub mod settings;

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Arg, ArgAction, Command};

use crate::error::Error;
use settings::Settings;

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_NUMERIC: i32 = 3;

/// Environment variable that caps the worker pool size.
pub const THREADS_ENV: &str = "QOLLIDE_THREADS";

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("invalid `{field}`: {detail}")]
    Config { field: String, detail: String },
    #[error(transparent)]
    Run(#[from] Error),
}

impl CliError {
    pub fn config(field: &str, detail: impl Into<String>) -> Self {
        CliError::Config { field: field.to_string(), detail: detail.into() }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Run(e) if e.is_numerical() => EXIT_NUMERIC,
            _ => EXIT_CONFIG,
        }
    }
}

/// Where a finished output goes.
#[derive(Debug)]
pub(crate) enum Sink {
    Stdout,
    Stderr,
    File(PathBuf),
}

pub(crate) struct Emit {
    pub sink: Sink,
    pub text: String,
}

impl Emit {
    pub fn to(path: Option<PathBuf>, text: String) -> Self {
        Emit { sink: path.map_or(Sink::Stdout, Sink::File), text }
    }
}

const BATH_OPTS: &[(&str, &str)] = &[
    ("bath", "bath family: product | thermal-hec | dicke | explicit"),
    ("N", "number of bath qubits"),
    ("k", "excitations of the Dicke bath"),
    ("pe", "excited-state probability of the product bath"),
    ("nbar", "mean photon number (thermal-hec, or product when pe is absent)"),
    ("file", "explicit bath matrix CSV"),
];
const PARAM_OPTS: &[(&str, &str)] = &[
    ("g", "coupling rate [default 1]"),
    ("tau", "interaction duration [default 0.125]"),
    ("p", "collision rate [default 64]"),
    ("omega0", "qubit frequency [default 1]"),
];
const GRID_OPTS: &[(&str, &str)] = &[
    ("t_end", "final time [default 5 t_q]"),
    ("dt", "step size"),
    ("n_points", "number of output times [default 101]"),
    ("time", "units of t_end and dt: absolute | scaled (μt) [default absolute]"),
];
const EVOLVE_OPTS: &[(&str, &str)] = &[
    ("engine", "analytic | ode | collisions [default analytic]"),
    ("init", "initial qubit state: ground | excited | plus | <rho_ee> [default ground]"),
    ("mode", "collision propagator: exact | second-order [default exact]"),
    ("scheme", "collision scheme: deterministic | stochastic [default deterministic]"),
    ("seed", "random seed of the stochastic scheme [default 0]"),
    ("trajectories", "trajectories of the stochastic scheme [default 1000]"),
];
const SWEEP_OPTS: &[(&str, &str)] = &[
    ("family", "dicke | product | thermal-hec"),
    ("krule", "Dicke excitation rule: quarter | half-minus-one [default half-minus-one]"),
    ("N", "cluster sizes: a:b:c, a:b, or a comma list"),
    ("pe", "excited-state probability (product)"),
    ("nbar", "mean photon number (thermal-hec, or product when pe is absent)"),
    ("slopes", "write the fitted slopes JSON here instead of stderr"),
];
const PREPARE_OPTS: &[(&str, &str)] = &[
    ("N", "number of bath qubits"),
    ("nbar", "mean photon number of the environment"),
    ("gamma0", "single-atom emission rate [default 1]"),
    ("t_end", "preparation time [default 40/gamma0]"),
    ("dt", "integration step [default: stable step for the ladder rates]"),
    ("record_every", "steps between recorded populations [default t_end/(200 dt)]"),
    ("matrix", "write the final product-basis matrix CSV here"),
];
const OUTPUT_OPT: (&str, &str) = ("output", "output file [default stdout]");

fn option(key: &'static str, help: &'static str) -> Arg {
    let mut arg =
        Arg::new(key).long(key).value_name("VALUE").help(help).action(ArgAction::Set).allow_negative_numbers(true);
    if key.contains('_') {
        arg = arg.alias(key.replace('_', "-"));
    }
    if key == "output" {
        arg = arg.short('o').value_name("PATH");
    }
    arg
}

fn subcommand(name: &'static str, about: &'static str, groups: &[&[(&'static str, &'static str)]]) -> Command {
    let mut cmd = Command::new(name).about(about);
    let mut seen = Vec::new();
    for (key, help) in groups.iter().flat_map(|g| g.iter()).chain(std::iter::once(&OUTPUT_OPT)) {
        if !seen.contains(key) {
            seen.push(*key);
            cmd = cmd.arg(option(key, help));
        }
    }
    cmd
}

pub fn command() -> Command {
    Command::new("qollide")
        .about("Collision-model thermalization of a qubit by N-qubit baths")
        .version(env!("CARGO_PKG_VERSION"))
        .subcommand_required(true)
        .arg(
            Arg::new("config")
                .long("config")
                .short('c')
                .value_name("PATH")
                .global(true)
                .help("flat key = value config file; flags win"),
        )
        .subcommand(subcommand("coeffs", "Master-equation coefficients of a bath as JSON", &[BATH_OPTS, PARAM_OPTS]))
        .subcommand(subcommand(
            "evolve",
            "Target-qubit trajectory as CSV",
            &[BATH_OPTS, PARAM_OPTS, GRID_OPTS, EVOLVE_OPTS],
        ))
        .subcommand(subcommand("sweep", "Rates, times and temperatures across cluster sizes", &[SWEEP_OPTS, PARAM_OPTS]))
        .subcommand(subcommand(
            "classify",
            "Role of every bath matrix entry as JSON or text",
            &[BATH_OPTS, &[("format", "json | text [default json]")]],
        ))
        .subcommand(subcommand("prepare", "Thermal preparation of the bath on the Dicke ladder", &[PREPARE_OPTS]))
        .subcommand(subcommand(
            "figures",
            "Regenerate the decay and temperature datasets into a directory",
            &[&[("dir", "output directory"), ("n_points", "points per curve [default 201]")]],
        ))
}

fn settings_from(matches: &clap::ArgMatches, sub: &clap::ArgMatches) -> Result<Settings, CliError> {
    let mut settings = match matches.get_one::<String>("config").or_else(|| sub.get_one::<String>("config")) {
        Some(path) => Settings::load(path.as_ref())?,
        None => Settings::default(),
    };
    for id in sub.ids() {
        let key = id.as_str();
        if key == "config" {
            continue;
        }
        if let Some(v) = sub.get_one::<String>(key) {
            settings.set(key, v.clone());
        }
    }
    Ok(settings)
}

fn configure_threads() -> Result<(), CliError> {
    let Ok(raw) = std::env::var(THREADS_ENV) else { return Ok(()) };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| CliError::config(THREADS_ENV, format!("`{raw}` is not a positive integer")))?;
    // a pool may already exist when embedded; keep it
    let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    Ok(())
}

fn dispatch(matches: &clap::ArgMatches) -> Result<Vec<Emit>, CliError> {
    configure_threads()?;
    let (name, sub) = matches.subcommand().expect("subcommand is required");
    let s = settings_from(matches, sub)?;
    match name {
        "coeffs" => commands::coeffs(&s),
        "evolve" => commands::evolve(&s),
        "sweep" => commands::sweep(&s),
        "classify" => commands::classify(&s),
        "prepare" => commands::prepare(&s),
        "figures" => commands::figures(&s),
        other => unreachable!("unknown subcommand {other}"),
    }
}

fn write_all(emits: Vec<Emit>) -> Result<(), CliError> {
    for e in emits {
        match e.sink {
            Sink::Stdout => {
                let mut out = std::io::stdout().lock();
                out.write_all(e.text.as_bytes()).and_then(|_| out.flush()).map_err(Error::from)?;
            }
            Sink::Stderr => eprint!("{}", e.text),
            Sink::File(path) => {
                if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
                    std::fs::create_dir_all(dir).map_err(Error::from)?;
                }
                crate::io::write_file(&path, &e.text)?;
            }
        }
    }
    Ok(())
}

/// Runs the command line and returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let matches = match command().try_get_matches_from(args) {
        Ok(m) => m,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
        }
    };
    match dispatch(&matches).and_then(write_all) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
