//! Energy evolution of extended-boundary states, one quasi-momentum
//! sublattice at a time.

use super::propagator::{evolve, RunOptions};
use super::QuantumState;
use crate::error::{param, Result};
use crate::model::KickSchedule;
use crate::series::{CompensatedSum, EnergyKind, EnergySeries};

/// Summary of [`evolve_extended`].
#[derive(Debug, Clone)]
pub struct ExtendedRun {
    pub energy: EnergySeries,
    /// Sum of sublattice norms at the start.
    pub total_norm: f64,
    pub max_norm_drift: f64,
    pub max_edge_probability: f64,
    /// Sublattices actually propagated (mirror pairs are propagated once).
    pub sublattices_evolved: usize,
    pub largest_half: usize,
}

/// Evolves an extended state given sublattice by sublattice.
///
/// `make(j)` must return sublattice `j` (`0 <= j < M`). If sublattices `j` and
/// `M - j` are exact mirror images (`C(p) = C(-p)`), only one of them is
/// propagated; parity-even kicks keep them mirrored, so their energies agree.
pub fn evolve_extended<F>(
    mult: u32,
    make: F,
    schedule: &KickSchedule,
    k: f64,
    n_kicks: usize,
    opts: &RunOptions,
) -> Result<ExtendedRun>
where
    F: Fn(u32) -> Result<QuantumState> + Sync,
{
    if mult == 0 {
        return param("boundary multiplier must be at least 1");
    }
    // (offset, weight) pairs to propagate.
    let mut jobs: Vec<(u32, f64)> = Vec::new();
    let mut j = 0;
    while j < mult {
        let partner = (mult - j) % mult;
        if partner == j {
            jobs.push((j, 1.0));
        } else if partner > j {
            let a = make(j)?;
            let b = make(partner)?;
            if is_mirror(&a, &b) {
                jobs.push((j, 2.0));
            } else {
                jobs.push((j, 1.0));
                jobs.push((partner, 1.0));
            }
        }
        j += 1;
    }

    let run_one = |&(j, weight): &(u32, f64)| -> Result<(f64, f64, f64, f64, usize, Vec<f64>)> {
        let state = make(j)?;
        let norm = state.reference_norm();
        let run = evolve(state, schedule, k, n_kicks, opts)?.into_result()?;
        Ok((
            weight,
            weight * norm,
            run.max_norm_drift,
            run.max_edge_probability,
            run.state.basis_half(),
            run.energy.values,
        ))
    };

    #[cfg(feature = "parallel")]
    let results: Vec<_> = {
        use rayon::prelude::*;
        jobs.par_iter().map(run_one).collect()
    };
    #[cfg(not(feature = "parallel"))]
    let results: Vec<_> = jobs.iter().map(run_one).collect();

    let mut total_norm = 0.0;
    let mut max_drift: f64 = 0.0;
    let mut max_edge: f64 = 0.0;
    let mut largest_half = 0;
    let mut acc = vec![CompensatedSum::default(); n_kicks + 1];
    for r in results {
        let (weight, norm, drift, edge, half, values) = r?;
        total_norm += norm;
        max_drift = max_drift.max(drift);
        max_edge = max_edge.max(edge);
        largest_half = largest_half.max(half);
        for (slot, v) in acc.iter_mut().zip(values) {
            slot.add(weight * v);
        }
    }
    Ok(ExtendedRun {
        energy: EnergySeries::new(EnergyKind::Quantum, acc.iter().map(|a| a.value()).collect()),
        total_norm,
        max_norm_drift: max_drift,
        max_edge_probability: max_edge,
        sublattices_evolved: jobs.len(),
        largest_half,
    })
}

fn is_mirror(a: &QuantumState, b: &QuantumState) -> bool {
    a.amps.len() == b.amps.len() && a.amps.iter().zip(b.amps.iter().rev()).all(|(x, y)| x == y)
}
