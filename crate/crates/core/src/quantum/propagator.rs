use std::f64::consts::TAU;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use super::phase::{pi_phase, scaled_phase};
use super::{QuantumState, EDGE_TOL};
use crate::error::{param, Error, Result};
use crate::model::KickSchedule;
use crate::series::{CompensatedSum, EnergyKind, EnergySeries};

/// Precomputed transforms and phase tables for one grid layout and kick strength.
pub struct Propagator {
    n: usize,
    half: usize,
    mult: u32,
    stride: u32,
    offset: u32,
    tau: f64,
    k: f64,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
    scratch: Vec<Complex64>,
    /// `exp(-i k cos θ_j) / n` on the spatial grid.
    kick: Vec<Complex64>,
    /// `exp(-i τ p² / 2)` on the momentum grid.
    free: Vec<Complex64>,
    /// `exp(-i π p²)` on the momentum grid.
    parity: Vec<Complex64>,
    /// `(τ p)² / 2` on the momentum grid.
    energy: Vec<f64>,
}

impl Propagator {
    pub fn new(state: &QuantumState, k: f64) -> Result<Self> {
        if !k.is_finite() {
            return param(format!("kick strength must be finite, got {k}"));
        }
        let n = state.amps.len();
        let mut planner = FftPlanner::<f64>::new();
        let forward = planner.plan_fft_forward(n);
        let inverse = planner.plan_fft_inverse(n);
        let scratch_len = forward
            .get_inplace_scratch_len()
            .max(inverse.get_inplace_scratch_len());

        // Spatial sample j sits at θ_j = 2π L j / n, L = M / stride.
        let coupling = (state.mult / state.stride) as u128;
        let scale = 1.0 / n as f64;
        let kick = (0..n)
            .map(|j| {
                let idx = (coupling * j as u128) % n as u128;
                let theta = TAU * idx as f64 / n as f64;
                Complex64::from_polar(scale, -k * theta.cos())
            })
            .collect();

        let m_sq = u128::from(state.mult) * u128::from(state.mult);
        let mut free = Vec::with_capacity(n);
        let mut parity = Vec::with_capacity(n);
        let mut energy = Vec::with_capacity(n);
        for i in 0..n {
            let m = state.grid_index(i);
            let q = (m.unsigned_abs() as u128).pow(2);
            free.push(Complex64::from_polar(1.0, -scaled_phase(state.tau, q, 2 * m_sq)));
            parity.push(Complex64::from_polar(1.0, -pi_phase(q, m_sq)));
            let l = state.tau * state.momentum(i);
            energy.push(l * l / 2.0);
        }

        Ok(Self {
            n,
            half: state.half,
            mult: state.mult,
            stride: state.stride,
            offset: state.offset,
            tau: state.tau,
            k,
            forward,
            inverse,
            scratch: vec![Complex64::new(0.0, 0.0); scratch_len],
            kick,
            free,
            parity,
            energy,
        })
    }

    pub fn k(&self) -> f64 {
        self.k
    }

    fn check_layout(&self, psi: &QuantumState) {
        assert!(
            psi.amps.len() == self.n
                && psi.half == self.half
                && psi.mult == self.mult
                && psi.stride == self.stride
                && psi.offset == self.offset
                && psi.tau == self.tau,
            "state layout does not match the propagator"
        );
    }

    /// `exp(-i sign k cos θ)`.
    pub fn kick(&mut self, psi: &mut QuantumState, sign: f64) {
        self.check_layout(psi);
        let amps = &mut psi.amps;
        self.inverse.process_with_scratch(amps, &mut self.scratch);
        if sign >= 0.0 {
            for (c, f) in amps.iter_mut().zip(&self.kick) {
                *c *= f;
            }
        } else {
            for (c, f) in amps.iter_mut().zip(&self.kick) {
                *c *= f.conj();
            }
        }
        self.forward.process_with_scratch(amps, &mut self.scratch);
    }

    /// `exp(-i τ p² / 2)`.
    pub fn free(&self, psi: &mut QuantumState) {
        self.check_layout(psi);
        for (c, f) in psi.amps.iter_mut().zip(&self.free) {
            *c *= f;
        }
    }

    /// `exp(-i π p²)`; on the integer ladder this is `(-1)^m`.
    pub fn parity(&self, psi: &mut QuantumState) {
        self.check_layout(psi);
        for (c, f) in psi.amps.iter_mut().zip(&self.parity) {
            *c *= f;
        }
    }

    /// One kick period: kick, then free evolution.
    pub fn step(&mut self, psi: &mut QuantumState, sign: f64) {
        self.kick(psi, sign);
        self.free(psi);
    }

    pub fn mkr_cycle(&mut self, psi: &mut QuantumState) {
        for sign in [1.0, 1.0, -1.0, -1.0] {
            self.step(psi, sign);
        }
    }

    pub fn delay_cycle(&mut self, psi: &mut QuantumState) {
        for _ in 0..2 {
            self.step(psi, 1.0);
            self.step(psi, 1.0);
            self.parity(psi);
        }
    }

    /// `(energy, norm²)` in one pass.
    pub fn observe(&self, psi: &QuantumState) -> (f64, f64) {
        self.check_layout(psi);
        let mut e = CompensatedSum::default();
        let mut norm = CompensatedSum::default();
        for (chunk, w) in psi.amps.chunks(1024).zip(self.energy.chunks(1024)) {
            let mut ce = 0.0;
            let mut cn = 0.0;
            for (c, w) in chunk.iter().zip(w) {
                let p = c.norm_sqr();
                ce += p * w;
                cn += p;
            }
            e.add(ce);
            norm.add(cn);
        }
        (e.value(), norm.value())
    }
}

/// Guards and basis growth for [`evolve`].
#[derive(Debug, Clone, PartialEq)]
pub struct RunOptions {
    /// Largest allowed `|norm² - reference|`.
    pub norm_tol: f64,
    /// Largest allowed edge-band probability.
    pub edge_tol: f64,
    /// When set, the basis doubles (up to this half-size) whenever the outer
    /// [`RunOptions::growth_band`] of indices holds more than `growth_threshold`.
    pub max_half: Option<usize>,
    pub growth_band: f64,
    pub growth_threshold: f64,
}

impl Default for RunOptions {
    fn default() -> Self {
        Self {
            norm_tol: 1e-10,
            edge_tol: EDGE_TOL,
            max_half: None,
            growth_band: 0.25,
            growth_threshold: 1e-24,
        }
    }
}

impl RunOptions {
    pub fn growing_to(max_half: usize) -> Self {
        Self {
            max_half: Some(max_half),
            ..Self::default()
        }
    }
}

/// Result of [`evolve`]. If a guard tripped, `failure` is set and the series
/// stops at the last kick that passed.
#[derive(Debug, Clone)]
pub struct QuantumRun {
    pub state: QuantumState,
    pub energy: EnergySeries,
    pub max_norm_drift: f64,
    pub max_edge_probability: f64,
    pub failure: Option<Error>,
}

impl QuantumRun {
    pub fn into_result(self) -> Result<Self> {
        match self.failure {
            Some(e) => Err(e),
            None => Ok(self),
        }
    }
}

/// Propagates `state` through `n_kicks` kicks of `schedule`, recording the
/// scaled energy after every kick and enforcing the norm and edge guards.
pub fn evolve(
    mut state: QuantumState,
    schedule: &KickSchedule,
    k: f64,
    n_kicks: usize,
    opts: &RunOptions,
) -> Result<QuantumRun> {
    if n_kicks == 0 {
        return param("n_kicks must be at least 1");
    }
    if let Some(max) = opts.max_half {
        if max < state.half {
            return param(format!("max_half {max} is below the initial half-size {}", state.half));
        }
    }
    let mut prop = Propagator::new(&state, k)?;
    let reference = state.reference_norm;
    let (e0, _) = prop.observe(&state);
    let mut values = Vec::with_capacity(n_kicks + 1);
    values.push(e0);
    let mut max_drift: f64 = 0.0;
    let mut max_edge: f64 = 0.0;
    let mut failure = None;

    for n in 1..=n_kicks {
        prop.step(&mut state, schedule.sign(n));
        if let Some(max) = opts.max_half {
            while state.half < max && state.band_probability(opts.growth_band) > opts.growth_threshold {
                state.grow((2 * state.half).min(max))?;
                prop = Propagator::new(&state, k)?;
            }
        }
        let (e, norm) = prop.observe(&state);
        let drift = (norm - reference).abs();
        max_drift = max_drift.max(drift);
        if !(drift <= opts.norm_tol) {
            failure = Some(Error::NormDrift { drift, kick: n });
            break;
        }
        let edge = state.edge_probability();
        max_edge = max_edge.max(edge);
        if edge > opts.edge_tol {
            failure = Some(Error::Truncation {
                edge_probability: edge,
            });
            break;
        }
        values.push(e);
    }

    Ok(QuantumRun {
        state,
        energy: EnergySeries::new(EnergyKind::Quantum, values),
        max_norm_drift: max_drift,
        max_edge_probability: max_edge,
        failure,
    })
}
