//! WebAssembly bindings for the browser demo. Every export returns a flat
//! `Float64Array` so the page can draw it straight onto a canvas.

use kicked_rotor::classical::{evolve_ensemble, poincare_section, Cell, ClassicalEnsemble};
use kicked_rotor::quantum::{evolve, init_fock, momentum_distribution, RunOptions};
use kicked_rotor::{make_schedule, KickSchedule, ScheduleKind};
use wasm_bindgen::prelude::*;

const MAX_POINTS: usize = 2_000_000;
const MAX_HALF: usize = 1 << 16;

fn schedule(name: &str) -> Result<KickSchedule, String> {
    let kind: ScheduleKind = name.parse().map_err(|e: kicked_rotor::Error| e.to_string())?;
    let n_half = match kind {
        ScheduleKind::Gen { block } => Some(block / 2),
        _ => None,
    };
    make_schedule(kind, n_half).map_err(|e| e.to_string())
}

/// Section points as `[theta0, L0, theta1, L1, ...]`, both reduced mod 2π.
pub fn section_points(name: &str, kappa: f64, resolution: usize, kicks: usize) -> Result<Vec<f64>, String> {
    if resolution * resolution * kicks > MAX_POINTS {
        return Err(format!("at most {MAX_POINTS} section points"));
    }
    let grid = ClassicalEnsemble::grid(Cell::UNIT, resolution).map_err(|e| e.to_string())?;
    let pts = poincare_section(&grid, &schedule(name)?, kappa, kicks).map_err(|e| e.to_string())?;
    Ok(pts.into_iter().flat_map(|(t, l)| [t, l]).collect())
}

/// `[E_q(0..=kicks), E_c(0..=kicks)]` from `|0>` and a uniform ring at `L = 0`.
pub fn energy_curves(name: &str, kappa: f64, tau: f64, kicks: usize, ensemble: usize) -> Result<Vec<f64>, String> {
    let s = schedule(name)?;
    let psi = init_fock(0, 1024, 1, tau).map_err(|e| e.to_string())?;
    let run = evolve(psi, &s, kappa / tau, kicks, &RunOptions::growing_to(MAX_HALF))
        .and_then(|r| r.into_result())
        .map_err(|e| e.to_string())?;
    let (_, classical) =
        evolve_ensemble(&ClassicalEnsemble::uniform_theta(ensemble, 0.0), &s, kappa, kicks).map_err(|e| e.to_string())?;
    let mut out = run.energy.values;
    out.extend(classical.values);
    Ok(out)
}

/// `[m_first, P(m_first), P(m_first + 1), ...]` after `kicks` kicks from `|0>`.
pub fn distribution(name: &str, kappa: f64, tau: f64, kicks: usize) -> Result<Vec<f64>, String> {
    let psi = init_fock(0, 1024, 1, tau).map_err(|e| e.to_string())?;
    let run = evolve(psi, &schedule(name)?, kappa / tau, kicks, &RunOptions::growing_to(MAX_HALF))
        .and_then(|r| r.into_result())
        .map_err(|e| e.to_string())?;
    let p = momentum_distribution(&run.state);
    let mut out = Vec::with_capacity(p.probabilities.len() + 1);
    out.push(p.first_index as f64);
    out.extend(p.probabilities);
    Ok(out)
}

#[wasm_bindgen]
pub fn section(schedule: &str, kappa: f64, resolution: usize, kicks: usize) -> Result<Vec<f64>, JsValue> {
    section_points(schedule, kappa, resolution, kicks).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen]
pub fn energies(schedule: &str, kappa: f64, tau: f64, kicks: usize, ensemble: usize) -> Result<Vec<f64>, JsValue> {
    energy_curves(schedule, kappa, tau, kicks, ensemble).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen]
pub fn momentum(schedule: &str, kappa: f64, tau: f64, kicks: usize) -> Result<Vec<f64>, JsValue> {
    distribution(schedule, kappa, tau, kicks).map_err(|e| JsValue::from_str(&e))
}
