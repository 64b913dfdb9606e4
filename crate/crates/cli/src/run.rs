use kicked_rotor::analysis::{break_time, default_fit_window, energy_ratio, loglog_fit, FitResult};
use kicked_rotor::classical::{evolve_ensemble, poincare_section, sample_wigner_gaussian, Cell, ClassicalEnsemble};
use kicked_rotor::quantum::{
    evolve, evolve_extended, init_fock, init_gaussian, init_gaussian_sublattice, momentum_distribution, QuantumState,
    RunOptions,
};
use kicked_rotor::{EnergyKind, EnergySeries, ScheduleKind};
use rayon::prelude::*;
use serde::Serialize;

use crate::config::{schedule_for, ClassicalInit, Mode, QuantumInit, RunConfig};
use crate::error::CliError;
use crate::output::{read_csv, Csv, FailureRecord, Manifest, Outputs};
use crate::plot::{envelope, thin, Plot, Series, Style};

const BREAK_SUSTAINED: usize = 10;
const START_HALF: usize = 4096;
const PLOT_POINTS: usize = 4000;
const SECTION_PLOT_POINTS: usize = 60_000;

#[derive(Serialize)]
struct Metadata<'a> {
    tool: &'static str,
    library_version: &'static str,
    config: &'a RunConfig,
}

pub fn execute(cfg: &RunConfig) -> Result<Manifest, CliError> {
    let mut out = Outputs::create(&cfg.out)?;
    out.write_json(
        "metadata.json",
        &Metadata {
            tool: "kicked",
            library_version: kicked_rotor::VERSION,
            config: cfg,
        },
    )?;
    match cfg.mode {
        Mode::PhaseSpace => phase_space(cfg, &mut out)?,
        Mode::Evolve => evolve_mode(cfg, &mut out, false)?,
        Mode::Compare => evolve_mode(cfg, &mut out, true)?,
        Mode::Distribution => distribution(cfg, &mut out)?,
        Mode::Sweep => sweep(cfg, &mut out)?,
        Mode::Fit => fit_file(cfg, &mut out)?,
    }
    let failures: Vec<String> = out.failures.iter().map(|f| format!("{}: {}", f.arm, f.message)).collect();
    let manifest = out.finish()?;
    if failures.is_empty() {
        Ok(manifest)
    } else {
        Err(CliError::Guard(failures.join("; ")))
    }
}

struct Arm {
    label: String,
    quantum: EnergySeries,
    classical: EnergySeries,
    state: Option<QuantumState>,
    failure: Option<String>,
}

fn initial_state(cfg: &RunConfig, half: usize, tau: f64) -> kicked_rotor::Result<QuantumState> {
    match cfg.quantum_init {
        QuantumInit::Fock { m0 } => init_fock(m0, half, cfg.boundary_mult, tau),
        QuantumInit::Gaussian { width_sq } => init_gaussian(width_sq, half, cfg.boundary_mult, tau),
    }
}

fn classical_ensemble(cfg: &RunConfig, tau: f64) -> kicked_rotor::Result<ClassicalEnsemble> {
    match (cfg.classical_init, cfg.quantum_init) {
        (ClassicalInit::Uniform, QuantumInit::Fock { m0 }) => Ok(ClassicalEnsemble::uniform_theta(cfg.ensemble, tau * m0 as f64)),
        (ClassicalInit::Uniform, QuantumInit::Gaussian { .. }) => Ok(ClassicalEnsemble::uniform_theta(cfg.ensemble, 0.0)),
        (ClassicalInit::Wigner, QuantumInit::Gaussian { width_sq }) => {
            sample_wigner_gaussian((width_sq / 2.0).sqrt(), tau, cfg.ensemble, cfg.seed)
        }
        (ClassicalInit::Wigner, QuantumInit::Fock { .. }) => Err(kicked_rotor::Error::Parameter(
            "Wigner sampling needs a Gaussian initial state".into(),
        )),
    }
}

/// Quantum energy series, optionally with the final state grown to the full basis.
fn quantum_arm(
    cfg: &RunConfig,
    kind: ScheduleKind,
    kappa: f64,
    tau: f64,
    keep_state: bool,
) -> Result<(EnergySeries, Option<QuantumState>, Option<String>), CliError> {
    let schedule = schedule_for(kind);
    let k = kappa / tau;
    let mult = cfg.boundary_mult;

    if let (QuantumInit::Gaussian { width_sq }, false, true) = (cfg.quantum_init, keep_state, mult > 1) {
        let per_ladder = cfg.basis / mult as usize;
        let start = per_ladder.min(1024);
        let run = evolve_extended(
            mult,
            |j| init_gaussian_sublattice(width_sq, start, mult, j, tau),
            &schedule,
            k,
            cfg.kicks,
            &RunOptions::growing_to(per_ladder),
        );
        return match run {
            Ok(r) => {
                let values = r.energy.values.iter().map(|e| e / r.total_norm).collect();
                Ok((EnergySeries::new(EnergyKind::Quantum, values), None, None))
            }
            Err(kicked_rotor::Error::Parameter(m)) => Err(CliError::Config(m)),
            Err(e) => Ok((EnergySeries::new(EnergyKind::Quantum, Vec::new()), None, Some(e.to_string()))),
        };
    }

    let start = if keep_state { cfg.basis } else { cfg.basis.min(START_HALF) };
    let psi = match initial_state(cfg, start, tau) {
        Ok(p) => p,
        Err(_) if start < cfg.basis => initial_state(cfg, cfg.basis, tau)?,
        Err(e) => return Err(e.into()),
    };
    let mut run = evolve(psi, &schedule, k, cfg.kicks, &RunOptions::growing_to(cfg.basis))?;
    if keep_state && run.state.basis_half() < cfg.basis {
        run.state.grow(cfg.basis)?;
    }
    let failure = run.failure.map(|e| e.to_string());
    Ok((run.energy, keep_state.then_some(run.state), failure))
}

fn run_arm(cfg: &RunConfig, kind: ScheduleKind, kappa: f64, tau: f64, keep_state: bool) -> Result<Arm, CliError> {
    let ens = classical_ensemble(cfg, tau)?;
    let (quantum, state, mut failure) = quantum_arm(cfg, kind, kappa, tau, keep_state)?;
    let classical = match evolve_ensemble(&ens, &schedule_for(kind), kappa, cfg.kicks) {
        Ok((_, series)) => series,
        Err(e) => {
            failure.get_or_insert(e.to_string());
            EnergySeries::new(EnergyKind::Classical, Vec::new())
        }
    };
    Ok(Arm {
        label: kind.to_string(),
        quantum,
        classical,
        state,
        failure,
    })
}

fn energy_csv(arm: &Arm) -> Vec<u8> {
    let mut csv = Csv::new(&[("kick_index", "kicks"), ("E_q", "scaled energy"), ("E_c", "scaled energy")]);
    let n = arm.quantum.len().min(arm.classical.len());
    for i in 0..n {
        csv.row(i, &[arm.quantum.values[i], arm.classical.values[i]]);
    }
    csv.into_bytes()
}

fn log_points(series: &EnergySeries) -> Vec<(f64, f64)> {
    let pts: Vec<(f64, f64)> = series.values.iter().enumerate().skip(1).map(|(i, &e)| (i as f64, e)).collect();
    thin(&pts, PLOT_POINTS)
}

fn energy_plot(title: &str, arms: &[&Arm]) -> String {
    let mut series = Vec::new();
    for arm in arms {
        series.push(Series {
            label: format!("{} quantum", arm.label),
            points: log_points(&arm.quantum),
            style: Style::Line,
        });
        series.push(Series {
            label: format!("{} classical", arm.label),
            points: log_points(&arm.classical),
            style: Style::Line,
        });
    }
    Plot {
        title: title.to_string(),
        x_label: "kicks N".into(),
        y_label: "scaled energy".into(),
        x_log: true,
        y_log: true,
        y_min: None,
        series,
    }
    .render()
}

#[derive(Serialize)]
struct FitReport {
    a: f64,
    b: f64,
    r2: f64,
}

impl From<FitResult> for FitReport {
    fn from(f: FitResult) -> Self {
        Self { a: f.a, b: f.b, r2: f.r2 }
    }
}

#[derive(Serialize)]
struct ArmReport {
    schedule: String,
    kicks: usize,
    break_time: Option<usize>,
    break_threshold: f64,
    break_sustained: usize,
    fit_window: Option<(usize, usize)>,
    quantum_fit: Option<FitReport>,
    classical_fit: Option<FitReport>,
    quantum_above_classical_in_window: Option<bool>,
    final_quantum_energy: Option<f64>,
    final_classical_energy: Option<f64>,
    notes: Vec<String>,
}

fn analyse(label: &str, q: &EnergySeries, c: &EnergySeries, cfg: &RunConfig) -> ArmReport {
    let mut notes = Vec::new();
    let n = q.len().min(c.len()).saturating_sub(1);
    let mut report = ArmReport {
        schedule: label.to_string(),
        kicks: n,
        break_time: None,
        break_threshold: cfg.break_threshold,
        break_sustained: BREAK_SUSTAINED,
        fit_window: None,
        quantum_fit: None,
        classical_fit: None,
        quantum_above_classical_in_window: None,
        final_quantum_energy: q.values.last().copied(),
        final_classical_energy: c.values.last().copied(),
        notes: Vec::new(),
    };
    if n < 10 {
        report.notes.push("fewer than 10 kicks; no analysis".into());
        return report;
    }
    let (q, c) = (q.truncated(n), c.truncated(n));
    match break_time(&q, &c, cfg.break_threshold, BREAK_SUSTAINED) {
        Ok(b) => report.break_time = b.t_b,
        Err(e) => notes.push(format!("break time: {e}")),
    }
    let window = match cfg.fit_window {
        Some((lo, hi)) if hi <= n => (lo, hi),
        Some(w) => {
            notes.push(format!("fit window {w:?} exceeds the {n} recorded kicks; using the default"));
            default_fit_window(report.break_time, n)
        }
        None => default_fit_window(report.break_time, n),
    };
    report.fit_window = Some(window);
    match loglog_fit(&q, window) {
        Ok(f) => report.quantum_fit = Some(f.into()),
        Err(e) => notes.push(format!("quantum fit: {e}")),
    }
    match loglog_fit(&c, window) {
        Ok(f) => report.classical_fit = Some(f.into()),
        Err(e) => notes.push(format!("classical fit: {e}")),
    }
    report.quantum_above_classical_in_window = Some((window.0..=window.1).all(|i| q.values[i] > c.values[i]));
    report.notes = notes;
    report
}

fn record_failure(out: &mut Outputs, arm: &Arm) {
    if let Some(f) = &arm.failure {
        out.failures.push(FailureRecord {
            arm: arm.label.clone(),
            message: f.clone(),
        });
    }
}

fn evolve_mode(cfg: &RunConfig, out: &mut Outputs, analyse_arms: bool) -> Result<(), CliError> {
    let (kappa, tau) = (cfg.kappa[0], cfg.tau[0]);
    let mut arms = Vec::new();
    for &kind in &cfg.schedules {
        let arm = run_arm(cfg, kind, kappa, tau, false)?;
        out.write(&format!("energy_{}.csv", arm.label), &energy_csv(&arm))?;
        record_failure(out, &arm);
        arms.push(arm);
    }
    let refs: Vec<&Arm> = arms.iter().collect();
    out.write_plot("energy.svg", energy_plot(&format!("Energy growth, kappa = {kappa}, tau = {tau}"), &refs));
    if !analyse_arms {
        return Ok(());
    }

    #[derive(Serialize)]
    struct Ratio {
        numerator: String,
        denominator: String,
        kick: usize,
        quantum: Option<f64>,
        classical: Option<f64>,
    }
    #[derive(Serialize)]
    struct Report {
        kappa: f64,
        tau: f64,
        arms: Vec<ArmReport>,
        ratios: Vec<Ratio>,
    }
    let reports = arms
        .iter()
        .filter(|a| a.failure.is_none())
        .map(|a| analyse(&a.label, &a.quantum, &a.classical, cfg))
        .collect();
    let mut ratios = Vec::new();
    if let Some(base) = arms.iter().find(|a| a.label == "kr" && a.failure.is_none()) {
        for a in arms.iter().filter(|a| a.label != "kr" && a.failure.is_none()) {
            ratios.push(Ratio {
                numerator: a.label.clone(),
                denominator: base.label.clone(),
                kick: cfg.kicks,
                quantum: energy_ratio(&a.quantum, &base.quantum, cfg.kicks).ok(),
                classical: energy_ratio(&a.classical, &base.classical, cfg.kicks).ok(),
            });
        }
    }
    out.write_json(
        "report.json",
        &Report {
            kappa,
            tau,
            arms: reports,
            ratios,
        },
    )
}

fn distribution(cfg: &RunConfig, out: &mut Outputs) -> Result<(), CliError> {
    let (kappa, tau) = (cfg.kappa[0], cfg.tau[0]);
    let mut series = Vec::new();
    for &kind in &cfg.schedules {
        let arm = run_arm(cfg, kind, kappa, tau, true)?;
        out.write(&format!("energy_{}.csv", arm.label), &energy_csv(&arm))?;
        record_failure(out, &arm);
        let Some(state) = &arm.state else { continue };
        let p = momentum_distribution(state);
        let mut csv = Csv::new(&[("m", "grid index"), ("P_m", "probability")]);
        let mut pts = Vec::with_capacity(p.probabilities.len());
        for (m, prob) in p.iter() {
            csv.row(m, &[prob]);
            pts.push((m as f64, prob));
        }
        out.write(&format!("distribution_{}.csv", arm.label), &csv.into_bytes())?;
        series.push(Series {
            label: arm.label.clone(),
            points: envelope(&pts, PLOT_POINTS),
            style: Style::Line,
        });
    }
    let plot = Plot {
        title: format!("Momentum distribution after {} kicks, kappa = {kappa}, tau = {tau}", cfg.kicks),
        x_label: "m".into(),
        y_label: "P(m)".into(),
        x_log: false,
        y_log: true,
        y_min: Some(1e-30),
        series,
    };
    out.write_plot("distribution.svg", plot.render());
    Ok(())
}

fn phase_space(cfg: &RunConfig, out: &mut Outputs) -> Result<(), CliError> {
    let kappa = cfg.kappa[0];
    let res = ((cfg.ensemble as f64).sqrt().round() as usize).max(1);
    let grid = ClassicalEnsemble::grid(Cell::UNIT, res)?;
    for &kind in &cfg.schedules {
        let section = poincare_section(&grid, &schedule_for(kind), kappa, cfg.kicks)?;
        let mut csv = Csv::new(&[("theta_mod", "rad"), ("L_mod", "scaled momentum mod 2pi")]);
        for &(t, l) in &section {
            write_section_row(&mut csv, t, l);
        }
        out.write(&format!("section_{kind}.csv"), &csv.into_bytes())?;
        let plot = Plot {
            title: format!("{kind} section, kappa = {kappa}, {res}x{res} starts, {} kicks", cfg.kicks),
            x_label: "theta mod 2pi".into(),
            y_label: "L mod 2pi".into(),
            x_log: false,
            y_log: false,
            y_min: None,
            series: vec![Series {
                label: kind.to_string(),
                points: thin(&section, SECTION_PLOT_POINTS),
                style: Style::Dots,
            }],
        };
        out.write_plot(&format!("section_{kind}.svg"), plot.render());
    }
    Ok(())
}

fn write_section_row(csv: &mut Csv, theta: f64, l: f64) {
    struct F(f64);
    impl std::fmt::Display for F {
        fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
            write!(f, "{:?}", self.0)
        }
    }
    csv.row(F(theta), &[l]);
}

fn sweep(cfg: &RunConfig, out: &mut Outputs) -> Result<(), CliError> {
    let mut points = Vec::new();
    for &kappa in &cfg.kappa {
        for &tau in &cfg.tau {
            for &kind in &cfg.schedules {
                points.push((kappa, tau, kind));
            }
        }
    }
    let results: Vec<Result<(String, Outputs, ArmReport), CliError>> = points
        .par_iter()
        .map(|&(kappa, tau, kind)| {
            let name = format!("kappa{kappa}_tau{tau}_{kind}");
            let mut sub = Outputs::create(&out.root().join(&name))?;
            let arm = run_arm(cfg, kind, kappa, tau, false)?;
            sub.write("energy.csv", &energy_csv(&arm))?;
            record_failure(&mut sub, &arm);
            let report = analyse(&arm.label, &arm.quantum, &arm.classical, cfg);
            sub.write_json("report.json", &report)?;
            sub.write_plot("energy.svg", energy_plot(&format!("{kind}, kappa = {kappa}, tau = {tau}"), &[&arm]));
            Ok((name, sub, report))
        })
        .collect();

    let mut summary = Csv::new(&[
        ("point", "name"),
        ("kappa", "1"),
        ("tau", "1"),
        ("break_time", "kicks, NaN if none"),
        ("a_quantum", "1"),
        ("a_classical", "1"),
    ]);
    for (r, &(kappa, tau, _)) in results.into_iter().zip(&points) {
        let (name, sub, report) = r?;
        let nan = f64::NAN;
        summary.row(
            &name,
            &[
                kappa,
                tau,
                report.break_time.map_or(nan, |t| t as f64),
                report.quantum_fit.as_ref().map_or(nan, |f| f.a),
                report.classical_fit.as_ref().map_or(nan, |f| f.a),
            ],
        );
        out.adopt(&name, sub);
    }
    out.write("summary.csv", &summary.into_bytes())
}

fn fit_file(cfg: &RunConfig, out: &mut Outputs) -> Result<(), CliError> {
    let path = cfg.input.as_ref().expect("validated");
    let (header, rows) = read_csv(path)?;
    let col = |name: &str| header.iter().position(|h| h == name);
    let series = |i: usize, kind| EnergySeries::new(kind, rows.iter().map(|r| r[i]).collect());
    let (Some(qi), Some(ci)) = (col("E_q"), col("E_c")) else {
        return Err(CliError::Input(format!("{} needs E_q and E_c columns", path.display())));
    };
    if let Some(ki) = col("kick_index") {
        if rows.iter().enumerate().any(|(n, r)| r[ki] != n as f64) {
            return Err(CliError::Input("kick_index must run 0, 1, 2, ...".into()));
        }
    }
    let q = series(qi, EnergyKind::Quantum);
    let c = series(ci, EnergyKind::Classical);
    let label = path.file_stem().map_or("input".into(), |s| s.to_string_lossy().into_owned());
    out.write_json("fit.json", &analyse(&label, &q, &c, cfg))
}
