use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};

use kicked_rotor::{make_schedule, KickSchedule, ScheduleKind};
use serde::Serialize;

use crate::error::CliError;

/// Environment variable naming the default output root.
pub const OUT_ENV: &str = "KICKED_ROTOR_OUT";

pub const KEYS: [&str; 12] = [
    "kappa",
    "tau",
    "schedule",
    "kicks",
    "basis",
    "ensemble",
    "seed",
    "boundary-mult",
    "init",
    "out",
    "fit-window",
    "break-threshold",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    PhaseSpace,
    Evolve,
    Compare,
    Distribution,
    Sweep,
    Fit,
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::PhaseSpace => "phase-space",
            Mode::Evolve => "evolve",
            Mode::Compare => "compare",
            Mode::Distribution => "distribution",
            Mode::Sweep => "sweep",
            Mode::Fit => "fit",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum QuantumInit {
    Fock { m0: i64 },
    Gaussian { width_sq: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ClassicalInit {
    Uniform,
    Wigner,
}

/// Fully resolved and validated run configuration.
#[derive(Debug, Clone, Serialize)]
pub struct RunConfig {
    pub mode: Mode,
    pub kappa: Vec<f64>,
    pub tau: Vec<f64>,
    #[serde(serialize_with = "schedules_as_strings")]
    pub schedules: Vec<ScheduleKind>,
    pub kicks: usize,
    pub basis: usize,
    pub ensemble: usize,
    pub seed: u64,
    pub boundary_mult: u32,
    pub quantum_init: QuantumInit,
    pub classical_init: ClassicalInit,
    pub out: PathBuf,
    pub fit_window: Option<(usize, usize)>,
    pub break_threshold: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub input: Option<PathBuf>,
}

fn schedules_as_strings<S: serde::Serializer>(s: &[ScheduleKind], ser: S) -> Result<S::Ok, S::Error> {
    ser.collect_seq(s.iter().map(|k| k.to_string()))
}

pub fn schedule_for(kind: ScheduleKind) -> KickSchedule {
    let n_half = match kind {
        ScheduleKind::Gen { block } => Some(block / 2),
        _ => None,
    };
    make_schedule(kind, n_half).expect("schedule kinds are validated when parsed")
}

/// Reads a flat `key = value` file. Blank lines and `#` comments are skipped.
pub fn read_config_file(path: &Path) -> Result<BTreeMap<String, String>, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("cannot read config file {}: {e}", path.display())))?;
    parse_config(&text)
}

pub fn parse_config(text: &str) -> Result<BTreeMap<String, String>, CliError> {
    let mut map = BTreeMap::new();
    for (n, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(CliError::Config(format!("line {}: expected `key = value`, got `{line}`", n + 1)));
        };
        let key = key.trim().replace('_', "-");
        if !KEYS.contains(&key.as_str()) {
            return Err(CliError::Config(format!("unknown config key `{}` on line {}", key, n + 1)));
        }
        map.insert(key, value.trim().to_string());
    }
    Ok(map)
}

fn bad(key: &str, value: &str, why: impl fmt::Display) -> CliError {
    CliError::Config(format!("invalid value `{value}` for `{key}`: {why}"))
}

fn parse_one<T: std::str::FromStr>(key: &str, value: &str) -> Result<T, CliError>
where
    T::Err: fmt::Display,
{
    value.trim().parse().map_err(|e| bad(key, value, e))
}

fn parse_list<T: std::str::FromStr>(key: &str, value: &str) -> Result<Vec<T>, CliError>
where
    T::Err: fmt::Display,
{
    let items: Vec<T> = value
        .split(',')
        .filter(|s| !s.trim().is_empty())
        .map(|s| parse_one(key, s))
        .collect::<Result<_, _>>()?;
    if items.is_empty() {
        return Err(bad(key, value, "empty list"));
    }
    Ok(items)
}

fn parse_init(value: &str) -> Result<(QuantumInit, Option<ClassicalInit>), CliError> {
    let mut quantum = None;
    let mut classical = None;
    for item in value.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        let (name, arg) = match item.split_once(':') {
            Some((n, a)) => (n, Some(a)),
            None => (item, None),
        };
        match (name, arg) {
            ("fock", Some(a)) => quantum = Some(QuantumInit::Fock { m0: parse_one("init", a)? }),
            ("fock", None) => quantum = Some(QuantumInit::Fock { m0: 0 }),
            ("gaussian", a) => {
                let width_sq: f64 = a.map(|a| parse_one("init", a)).transpose()?.unwrap_or(9.0);
                if !(width_sq.is_finite() && width_sq > 0.0) {
                    return Err(bad("init", item, "Gaussian width must be positive"));
                }
                quantum = Some(QuantumInit::Gaussian { width_sq });
            }
            ("uniform", None) => classical = Some(ClassicalInit::Uniform),
            ("wigner", None) => classical = Some(ClassicalInit::Wigner),
            _ => return Err(bad("init", item, "expected fock:m0, gaussian:s, uniform or wigner")),
        }
    }
    Ok((quantum.unwrap_or(QuantumInit::Fock { m0: 0 }), classical))
}

fn parse_window(value: &str) -> Result<(usize, usize), CliError> {
    let Some((lo, hi)) = value.split_once(':') else {
        return Err(bad("fit-window", value, "expected LO:HI"));
    };
    Ok((parse_one("fit-window", lo)?, parse_one("fit-window", hi)?))
}

fn default_out(mode: Mode) -> PathBuf {
    let root = std::env::var_os(OUT_ENV)
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from("kicked-out"));
    root.join(mode.to_string())
}

/// Builds the run configuration from merged key/value settings.
pub fn resolve(mode: Mode, values: &BTreeMap<String, String>, input: Option<PathBuf>) -> Result<RunConfig, CliError> {
    for key in values.keys() {
        if !KEYS.contains(&key.as_str()) {
            return Err(CliError::Config(format!("unknown config key `{key}`")));
        }
    }
    let get = |k: &str| values.get(k).map(String::as_str);

    let kappa: Vec<f64> = get("kappa").map(|v| parse_list("kappa", v)).transpose()?.unwrap_or(vec![3.5]);
    let tau: Vec<f64> = get("tau").map(|v| parse_list("tau", v)).transpose()?.unwrap_or(vec![0.1]);
    let schedules: Vec<ScheduleKind> = match get("schedule") {
        Some(v) => parse_list("schedule", v)?,
        None if matches!(mode, Mode::PhaseSpace | Mode::Compare | Mode::Distribution) => {
            vec![ScheduleKind::Kr, ScheduleKind::Mkr]
        }
        None => vec![ScheduleKind::Mkr],
    };
    let (default_kicks, default_ensemble) = match mode {
        Mode::PhaseSpace => (300, 1600),
        _ => (2000, 100_000),
    };
    let kicks: usize = get("kicks").map(|v| parse_one("kicks", v)).transpose()?.unwrap_or(default_kicks);
    let basis: usize = get("basis").map(|v| parse_one("basis", v)).transpose()?.unwrap_or(1 << 17);
    let ensemble: usize = get("ensemble")
        .map(|v| parse_one("ensemble", v))
        .transpose()?
        .unwrap_or(default_ensemble);
    let seed: u64 = get("seed").map(|v| parse_one("seed", v)).transpose()?.unwrap_or(0);
    let boundary_mult: u32 = get("boundary-mult")
        .map(|v| parse_one("boundary-mult", v))
        .transpose()?
        .unwrap_or(1);
    let (quantum_init, classical_init) = get("init").map(parse_init).transpose()?.unwrap_or((QuantumInit::Fock { m0: 0 }, None));
    let classical_init = classical_init.unwrap_or(match quantum_init {
        QuantumInit::Fock { .. } => ClassicalInit::Uniform,
        QuantumInit::Gaussian { .. } => ClassicalInit::Wigner,
    });
    let out = get("out").map(PathBuf::from).unwrap_or_else(|| default_out(mode));
    let fit_window = get("fit-window").map(parse_window).transpose()?;
    let break_threshold: f64 = get("break-threshold")
        .map(|v| parse_one("break-threshold", v))
        .transpose()?
        .unwrap_or(0.2);

    let cfg = RunConfig {
        mode,
        kappa,
        tau,
        schedules,
        kicks,
        basis,
        ensemble,
        seed,
        boundary_mult,
        quantum_init,
        classical_init,
        out,
        fit_window,
        break_threshold,
        input,
    };
    validate(&cfg)?;
    Ok(cfg)
}

fn validate(cfg: &RunConfig) -> Result<(), CliError> {
    let fail = |key: &str, why: String| Err(CliError::Config(format!("invalid `{key}`: {why}")));
    if let Some(k) = cfg.kappa.iter().find(|k| !k.is_finite()) {
        return fail("kappa", format!("{k} is not finite"));
    }
    if let Some(t) = cfg.tau.iter().find(|t| !(t.is_finite() && **t > 0.0)) {
        return fail("tau", format!("{t} must be positive"));
    }
    if cfg.mode != Mode::Sweep && (cfg.kappa.len() > 1 || cfg.tau.len() > 1) {
        return fail("kappa", "lists of kappa or tau are only accepted by `sweep`".into());
    }
    if cfg.kicks == 0 {
        return fail("kicks", "must be at least 1".into());
    }
    if cfg.basis < 16 {
        return fail("basis", format!("half-size {} is below 16", cfg.basis));
    }
    if cfg.ensemble == 0 {
        return fail("ensemble", "must be at least 1".into());
    }
    if cfg.boundary_mult == 0 {
        return fail("boundary-mult", "must be at least 1".into());
    }
    if cfg.basis % cfg.boundary_mult as usize != 0 || cfg.basis / (cfg.boundary_mult as usize) < 16 {
        return fail(
            "basis",
            format!("half-size {} must be a multiple of boundary-mult {} with at least 16 per sublattice", cfg.basis, cfg.boundary_mult),
        );
    }
    if let QuantumInit::Fock { m0 } = cfg.quantum_init {
        let index = m0.unsigned_abs() * u64::from(cfg.boundary_mult);
        if index >= cfg.basis as u64 / 2 {
            return fail("init", format!("fock:{m0} lies outside the inner half of the basis"));
        }
    }
    if let Some((lo, hi)) = cfg.fit_window {
        if lo < 1 || hi <= lo || hi - lo + 1 < 10 {
            return fail("fit-window", format!("{lo}:{hi} needs 1 <= LO and at least 10 kicks"));
        }
        if cfg.mode != Mode::Fit && hi > cfg.kicks {
            return fail("fit-window", format!("{lo}:{hi} ends after the last kick {}", cfg.kicks));
        }
    }
    if !(cfg.break_threshold.is_finite() && cfg.break_threshold > 0.0) {
        return fail("break-threshold", format!("{} must be positive", cfg.break_threshold));
    }
    if cfg.mode == Mode::Fit && cfg.input.is_none() {
        return fail("input", "fit needs --input FILE".into());
    }
    Ok(())
}
