//! Quantum kicked rotor on a momentum ladder.
//!
//! A [`QuantumState`] holds amplitudes `C_m` for grid indices
//! `m = -B ..= B - 1`. The physical momentum (in units of ħ) of index `m` is
//! `m / M`, where `M` is the boundary multiplier: the wavefunction lives on a
//! spatial domain of length `2πM`, and `M = 1` is the ordinary rotor.
//!
//! Because `cos θ` has period `2π`, a kick only couples indices that differ by
//! a multiple of `M`. The `M` interleaved sublattices (fixed quasi-momentum
//! `j / M`) therefore evolve independently, and a state may also hold a single
//! sublattice ([`QuantumState::sublattices`]).
//!
//! One kick period applies `exp(-i sign k cos θ)` on the spatial grid
//! followed by `exp(-i τ p² / 2)` on the momentum grid.

mod extended;
mod phase;
mod propagator;

pub use extended::{evolve_extended, ExtendedRun};
pub use propagator::{evolve, Propagator, QuantumRun, RunOptions};

use num_complex::Complex64;

use crate::error::{param, Error, Result};
use crate::series::{compensated_sum, CompensatedSum};
use crate::special;

/// Fraction of grid indices (split between both ends) watched by the edge guard.
pub const EDGE_BAND: f64 = 0.01;

/// Largest probability allowed in the edge band.
pub const EDGE_TOL: f64 = 1e-12;

/// Complex amplitudes over a (quasi-)momentum ladder.
#[derive(Debug, Clone, PartialEq)]
pub struct QuantumState {
    pub(crate) amps: Vec<Complex64>,
    pub(crate) half: usize,
    pub(crate) mult: u32,
    pub(crate) stride: u32,
    pub(crate) offset: u32,
    pub(crate) tau: f64,
    pub(crate) reference_norm: f64,
}

impl QuantumState {
    /// Wraps amplitudes for grid indices `-B ..= B - 1` (so `amps.len() == 2B`).
    ///
    /// `reference_norm` is taken from the amplitudes; nothing is renormalised.
    pub fn from_amplitudes(amps: Vec<Complex64>, mult: u32, tau: f64) -> Result<Self> {
        if amps.is_empty() || amps.len() % 2 != 0 {
            return param(format!("amplitude count must be even and positive, got {}", amps.len()));
        }
        validate_common(mult, tau)?;
        let mut s = Self {
            half: amps.len() / 2,
            amps,
            mult,
            stride: 1,
            offset: 0,
            tau,
            reference_norm: 0.0,
        };
        s.reference_norm = s.norm_sq();
        Ok(s)
    }

    /// Half the basis size, `B`.
    pub fn basis_half(&self) -> usize {
        self.half
    }

    pub fn len(&self) -> usize {
        self.amps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.amps.is_empty()
    }

    pub fn boundary_multiplier(&self) -> u32 {
        self.mult
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    /// `true` when this state holds one quasi-momentum sublattice of an extended state.
    pub fn is_sublattice(&self) -> bool {
        self.stride != 1
    }

    /// Sublattice offset `j` (zero for full states).
    pub fn sublattice_offset(&self) -> u32 {
        self.offset
    }

    /// Global grid index of storage slot `i`.
    pub fn grid_index(&self, i: usize) -> i64 {
        i64::from(self.stride) * (i as i64 - self.half as i64) + i64::from(self.offset)
    }

    /// Physical momentum (units of ħ) of storage slot `i`.
    pub fn momentum(&self, i: usize) -> f64 {
        self.grid_index(i) as f64 / f64::from(self.mult)
    }

    pub fn norm_sq(&self) -> f64 {
        compensated_sum(self.amps.iter().map(|c| c.norm_sqr()))
    }

    /// Norm at construction; propagation must preserve it.
    pub fn reference_norm(&self) -> f64 {
        self.reference_norm
    }

    /// Probability in the outermost [`EDGE_BAND`] of indices.
    pub fn edge_probability(&self) -> f64 {
        self.band_probability(EDGE_BAND)
    }

    pub(crate) fn band_probability(&self, fraction: f64) -> f64 {
        let n = self.amps.len();
        let per_side = ((n as f64 * fraction / 2.0).ceil() as usize).clamp(1, n / 2);
        let lo = self.amps[..per_side].iter().map(|c| c.norm_sqr());
        let hi = self.amps[n - per_side..].iter().map(|c| c.norm_sqr());
        compensated_sum(lo.chain(hi))
    }

    /// Fails with [`Error::Truncation`] if the edge band holds more than [`EDGE_TOL`].
    pub fn check_edges(&self) -> Result<()> {
        let edge = self.edge_probability();
        if edge > EDGE_TOL {
            Err(Error::Truncation {
                edge_probability: edge,
            })
        } else {
            Ok(())
        }
    }

    /// Zero-pads the grid to half-size `new_half`. Amplitudes are unchanged.
    pub fn grow(&mut self, new_half: usize) -> Result<()> {
        if new_half < self.half {
            return param(format!("cannot shrink basis from {} to {new_half}", self.half));
        }
        let pad = new_half - self.half;
        let mut amps = vec![Complex64::new(0.0, 0.0); 2 * new_half];
        amps[pad..pad + self.amps.len()].copy_from_slice(&self.amps);
        self.amps = amps;
        self.half = new_half;
        Ok(())
    }

    /// Splits a full state into its `M` quasi-momentum sublattices (offset `j = 0..M`).
    pub fn sublattices(&self) -> Result<Vec<QuantumState>> {
        if self.is_sublattice() {
            return param("state is already a sublattice");
        }
        let m = self.mult as usize;
        if self.half % m != 0 {
            return param(format!("basis half {} is not a multiple of M = {m}", self.half));
        }
        let sub_half = self.half / m;
        Ok((0..m)
            .map(|j| {
                // Global index stride*n + j sits at slot (M n + j) + B.
                let amps: Vec<Complex64> = (0..2 * sub_half)
                    .map(|i| self.amps[m * i + j])
                    .collect();
                let mut s = QuantumState {
                    amps,
                    half: sub_half,
                    mult: self.mult,
                    stride: self.mult,
                    offset: j as u32,
                    tau: self.tau,
                    reference_norm: 0.0,
                };
                s.reference_norm = s.norm_sq();
                s
            })
            .collect())
    }

    /// Inverse of [`QuantumState::sublattices`].
    pub fn from_sublattices(parts: &[QuantumState]) -> Result<Self> {
        let Some(first) = parts.first() else {
            return param("no sublattices given");
        };
        let m = first.mult as usize;
        if parts.len() != m
            || parts.iter().enumerate().any(|(j, p)| {
                p.stride != first.mult || p.offset as usize != j || p.half != first.half || p.mult != first.mult
            })
        {
            return param("sublattices do not form a complete, consistent set");
        }
        let half = first.half * m;
        let mut amps = vec![Complex64::new(0.0, 0.0); 2 * half];
        for (j, p) in parts.iter().enumerate() {
            for (i, &c) in p.amps.iter().enumerate() {
                amps[m * i + j] = c;
            }
        }
        let mut s = QuantumState {
            amps,
            half,
            mult: first.mult,
            stride: 1,
            offset: 0,
            tau: first.tau,
            reference_norm: 0.0,
        };
        s.reference_norm = parts.iter().map(|p| p.reference_norm).sum();
        Ok(s)
    }

    /// `(θ, |ψ(θ)|² weight)` on the spatial grid, `θ ∈ [-πM, πM)`. Full states only.
    pub fn position_density(&self) -> Result<Vec<(f64, f64)>> {
        if self.is_sublattice() {
            return param("position density needs a full state");
        }
        let n = self.amps.len();
        let mut buf = self.amps.clone();
        let mut planner = rustfft::FftPlanner::<f64>::new();
        planner.plan_fft_inverse(n).process(&mut buf);
        let total = compensated_sum(buf.iter().map(|c| c.norm_sqr()));
        let span = std::f64::consts::TAU * f64::from(self.mult);
        let mut out: Vec<(f64, f64)> = buf
            .iter()
            .enumerate()
            .map(|(j, c)| {
                let mut theta = span * j as f64 / n as f64;
                if theta >= span / 2.0 {
                    theta -= span;
                }
                (theta, c.norm_sqr() / total)
            })
            .collect();
        out.sort_by(|a, b| a.0.total_cmp(&b.0));
        Ok(out)
    }
}

fn validate_common(mult: u32, tau: f64) -> Result<()> {
    if mult == 0 {
        return param("boundary multiplier must be at least 1");
    }
    if !(tau.is_finite() && tau > 0.0) {
        return param(format!("tau must be positive, got {tau}"));
    }
    Ok(())
}

fn validate_half(half: usize) -> Result<()> {
    if half == 0 {
        return param("basis half-size must be positive");
    }
    Ok(())
}

/// Momentum eigenstate with integer physical momentum `m0` (grid index `m0 * M`).
pub fn init_fock(m0: i64, half: usize, mult: u32, tau: f64) -> Result<QuantumState> {
    validate_half(half)?;
    validate_common(mult, tau)?;
    let index = m0 * i64::from(mult);
    if index < -(half as i64) || index >= half as i64 {
        return param(format!("m0 = {m0} lies outside the grid of half-size {half}"));
    }
    let mut amps = vec![Complex64::new(0.0, 0.0); 2 * half];
    amps[(index + half as i64) as usize] = Complex64::new(1.0, 0.0);
    QuantumState::from_amplitudes(amps, mult, tau)
}

/// Gaussian `ψ(θ) ∝ exp(-θ² / (2 s))` on `[-πM, πM)`, with `s = width_sq`.
///
/// The momentum amplitudes are `∝ exp(-s p² / 2)`, which are the exact
/// Fourier coefficients of the periodically continued Gaussian.
pub fn init_gaussian(width_sq: f64, half: usize, mult: u32, tau: f64) -> Result<QuantumState> {
    validate_half(half)?;
    validate_common(mult, tau)?;
    let z = gaussian_normaliser(width_sq, half, mult)?;
    let amps = (0..2 * half)
        .map(|i| {
            let p = (i as f64 - half as f64) / f64::from(mult);
            Complex64::new((-width_sq * p * p / 2.0).exp() / z, 0.0)
        })
        .collect();
    let state = QuantumState::from_amplitudes(amps, mult, tau)?;
    state.check_edges()?;
    Ok(state)
}

/// Sublattice `j` of [`init_gaussian`]`(width_sq, half_per_ladder * M, M, tau)`,
/// built without materialising the other sublattices.
pub fn init_gaussian_sublattice(
    width_sq: f64,
    half_per_ladder: usize,
    mult: u32,
    j: u32,
    tau: f64,
) -> Result<QuantumState> {
    validate_half(half_per_ladder)?;
    validate_common(mult, tau)?;
    if j >= mult {
        return param(format!("sublattice offset {j} must be below M = {mult}"));
    }
    let full_half = half_per_ladder * mult as usize;
    let z = gaussian_normaliser(width_sq, full_half, mult)?;
    let amps: Vec<Complex64> = (0..2 * half_per_ladder)
        .map(|i| {
            let m = i64::from(mult) * (i as i64 - half_per_ladder as i64) + i64::from(j);
            let p = m as f64 / f64::from(mult);
            Complex64::new((-width_sq * p * p / 2.0).exp() / z, 0.0)
        })
        .collect();
    let mut s = QuantumState {
        amps,
        half: half_per_ladder,
        mult,
        stride: mult,
        offset: j,
        tau,
        reference_norm: 0.0,
    };
    s.reference_norm = s.norm_sq();
    s.check_edges()?;
    Ok(s)
}

/// Square root of `Σ_m exp(-s (m/M)²)` over the full grid, after checking the spatial tail.
fn gaussian_normaliser(width_sq: f64, half: usize, mult: u32) -> Result<f64> {
    if !(width_sq.is_finite() && width_sq > 0.0) {
        return param(format!("Gaussian width must be positive, got {width_sq}"));
    }
    // |ψ|² has variance s/2; mass beyond ±πM is erfc(πM / sqrt(s)).
    let leakage = special::erfc(std::f64::consts::PI * f64::from(mult) / width_sq.sqrt());
    if leakage > EDGE_TOL {
        return param(format!(
            "Gaussian tail {leakage:e} crosses the spatial boundary ±{}π",
            mult
        ));
    }
    let reach = ((800.0 / width_sq).sqrt() * f64::from(mult)).ceil() as i64 + 1;
    let lo = (-(half as i64)).max(-reach);
    let hi = (half as i64 - 1).min(reach);
    let mut acc = CompensatedSum::default();
    for m in lo..=hi {
        let p = m as f64 / f64::from(mult);
        acc.add((-width_sq * p * p).exp());
    }
    Ok(acc.value().sqrt())
}

/// Scaled energy `Σ P(m) (τ m / M)² / 2`.
pub fn quantum_energy(psi: &QuantumState) -> f64 {
    let tau = psi.tau;
    compensated_sum(psi.amps.iter().enumerate().map(|(i, c)| {
        let l = tau * psi.momentum(i);
        c.norm_sqr() * l * l / 2.0
    }))
}

/// Occupation probabilities on the state's grid.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentumDistribution {
    /// Grid index of the first entry; entry `i` has index `first_index + stride * i`.
    pub first_index: i64,
    pub stride: u32,
    pub boundary_multiplier: u32,
    pub probabilities: Vec<f64>,
}

impl MomentumDistribution {
    pub fn grid_index(&self, i: usize) -> i64 {
        self.first_index + i64::from(self.stride) * i as i64
    }

    /// `(grid index, P)` pairs.
    pub fn iter(&self) -> impl Iterator<Item = (i64, f64)> + '_ {
        self.probabilities
            .iter()
            .enumerate()
            .map(|(i, &p)| (self.grid_index(i), p))
    }

    pub fn total(&self) -> f64 {
        compensated_sum(self.probabilities.iter().copied())
    }
}

pub fn momentum_distribution(psi: &QuantumState) -> MomentumDistribution {
    MomentumDistribution {
        first_index: psi.grid_index(0),
        stride: psi.stride,
        boundary_multiplier: psi.mult,
        probabilities: psi.amps.iter().map(|c| c.norm_sqr()).collect(),
    }
}

/// One kick period with kick sign `sign`.
pub fn kr_step(psi: &QuantumState, k: f64, sign: f64) -> Result<QuantumState> {
    let mut out = psi.clone();
    let mut prop = Propagator::new(&out, k)?;
    prop.step(&mut out, sign);
    out.check_edges()?;
    Ok(out)
}

/// Four kick periods with signs `(+, +, -, -)`.
pub fn mkr_cycle(psi: &QuantumState, k: f64) -> Result<QuantumState> {
    let mut out = psi.clone();
    let mut prop = Propagator::new(&out, k)?;
    prop.mkr_cycle(&mut out);
    out.check_edges()?;
    Ok(out)
}

/// Four kick periods with all signs `+`, the parity phase `exp(-iπ p²)` applied after
/// every second kick.
pub fn delay_cycle(psi: &QuantumState, k: f64) -> Result<QuantumState> {
    let mut out = psi.clone();
    let mut prop = Propagator::new(&out, k)?;
    prop.delay_cycle(&mut out);
    out.check_edges()?;
    Ok(out)
}

/// `<m| exp(-i k cos θ) |mp> = (-i)^(m - mp) J_(m - mp)(k)` on the integer ladder.
pub fn kick_matrix_element(m: i64, mp: i64, k: f64) -> Complex64 {
    let d = m - mp;
    let j = special::bessel_j(d, k);
    let phase = match d.rem_euclid(4) {
        0 => Complex64::new(1.0, 0.0),
        1 => Complex64::new(0.0, -1.0),
        2 => Complex64::new(-1.0, 0.0),
        _ => Complex64::new(0.0, 1.0),
    };
    phase * j
}
