//! Power-law fits, quantum-classical break times and distribution comparisons.

use crate::error::{param, Error, Result};
use crate::quantum::MomentumDistribution;
use crate::series::EnergySeries;

/// Least-squares fit of `ln E = a ln N + b`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitResult {
    pub a: f64,
    pub b: f64,
    /// Inclusive kick window `[lo, hi]`.
    pub window: (usize, usize),
    pub r2: f64,
}

/// Fits the series over kicks `window.0 ..= window.1` in log-log space.
pub fn loglog_fit(series: &EnergySeries, window: (usize, usize)) -> Result<FitResult> {
    let (lo, hi) = window;
    if lo < 1 || hi <= lo {
        return param(format!("fit window {window:?} must satisfy 1 <= lo < hi"));
    }
    if hi >= series.len() {
        return param(format!("fit window ends at {hi} but the series has {} kicks", series.n_kicks()));
    }
    if hi - lo + 1 < 10 {
        return param(format!("fit window {window:?} has fewer than 10 points"));
    }
    let mut xs = Vec::with_capacity(hi - lo + 1);
    let mut ys = Vec::with_capacity(hi - lo + 1);
    for n in lo..=hi {
        let e = series.values[n];
        if !(e > 0.0) {
            return Err(Error::Domain(format!("energy {e} at kick {n} is not positive")));
        }
        xs.push((n as f64).ln());
        ys.push(e.ln());
    }
    let count = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / count;
    let my = ys.iter().sum::<f64>() / count;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    let a = sxy / sxx;
    let b = my - a * mx;
    let ss_res: f64 = xs.iter().zip(&ys).map(|(x, y)| (y - (a * x + b)).powi(2)).sum();
    let r2 = if syy > 0.0 { (1.0 - ss_res / syy).clamp(0.0, 1.0) } else { 1.0 };
    Ok(FitResult { a, b, window, r2 })
}

/// Floor on the denominator of the relative deviation.
pub const BREAK_EPSILON: f64 = 1e-12;

/// First kick from which the quantum and classical energies stay apart.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BreakTime {
    /// `None` when the deviation never persisted long enough.
    pub t_b: Option<usize>,
    pub threshold: f64,
    pub sustained: usize,
}

/// Smallest `N` with `|E_q - E_c| / max(E_c, ε) > threshold` at kicks
/// `N, N+1, ..., N + sustained - 1`.
pub fn break_time(
    quantum: &EnergySeries,
    classical: &EnergySeries,
    threshold: f64,
    sustained: usize,
) -> Result<BreakTime> {
    if quantum.len() != classical.len() {
        return param(format!(
            "series lengths differ: {} vs {}",
            quantum.len(),
            classical.len()
        ));
    }
    if !(threshold > 0.0) {
        return param(format!("threshold must be positive, got {threshold}"));
    }
    let sustained = sustained.max(1);
    let mut run = 0;
    let mut t_b = None;
    for (n, (q, c)) in quantum.values.iter().zip(&classical.values).enumerate() {
        let dev = (q - c).abs() / c.max(BREAK_EPSILON);
        if dev > threshold {
            run += 1;
            if run == sustained {
                t_b = Some(n + 1 - sustained);
                break;
            }
        } else {
            run = 0;
        }
    }
    Ok(BreakTime {
        t_b,
        threshold,
        sustained,
    })
}

/// Probabilities below this are treated as numerically zero.
pub const PROBABILITY_FLOOR: f64 = 1e-300;

/// Summary of `p1(m) / p2(m)` over a band of `|m|`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RatioSummary {
    pub min_ratio: f64,
    pub max_ratio: f64,
    pub geometric_mean: f64,
    /// Bins that entered the statistics.
    pub count: usize,
    /// Bins in the band skipped because `p2` was below [`PROBABILITY_FLOOR`].
    pub excluded: usize,
}

/// Ratios `p1(m) / p2(m)` over grid indices with `band.0 < |m| < band.1`.
pub fn distribution_ratio(
    p1: &MomentumDistribution,
    p2: &MomentumDistribution,
    band: (u64, u64),
) -> Result<RatioSummary> {
    if p1.first_index != p2.first_index
        || p1.stride != p2.stride
        || p1.probabilities.len() != p2.probabilities.len()
    {
        return param("distributions live on different grids");
    }
    if band.1 <= band.0 {
        return param(format!("empty band {band:?}"));
    }
    let mut min_ratio = f64::INFINITY;
    let mut max_ratio = 0.0f64;
    let mut log_sum = 0.0;
    let mut count = 0;
    let mut excluded = 0;
    for ((m, a), (_, b)) in p1.iter().zip(p2.iter()) {
        let am = m.unsigned_abs();
        if am <= band.0 || am >= band.1 {
            continue;
        }
        if b < PROBABILITY_FLOOR {
            excluded += 1;
            continue;
        }
        let r = a / b;
        min_ratio = min_ratio.min(r);
        max_ratio = max_ratio.max(r);
        log_sum += r.ln();
        count += 1;
    }
    if count == 0 {
        return Err(Error::Domain(format!(
            "no usable bins in band {band:?} ({excluded} below the floor)"
        )));
    }
    Ok(RatioSummary {
        min_ratio,
        max_ratio,
        geometric_mean: (log_sum / count as f64).exp(),
        count,
        excluded,
    })
}

/// `q1[at] / q2[at]`.
pub fn energy_ratio(q1: &EnergySeries, q2: &EnergySeries, at: usize) -> Result<f64> {
    let (Some(a), Some(b)) = (q1.at(at), q2.at(at)) else {
        return param(format!("kick {at} outside the series"));
    };
    if b.abs() < PROBABILITY_FLOOR {
        return Err(Error::Domain(format!("denominator {b} at kick {at} is zero")));
    }
    Ok(a / b)
}

/// Default fit window `[2 t_b, N_max]`, falling back to `[N_max / 10, N_max]`
/// when no break time was found or it leaves fewer than 10 points.
pub fn default_fit_window(t_b: Option<usize>, n_max: usize) -> (usize, usize) {
    match t_b {
        Some(t) if 2 * t.max(1) + 9 <= n_max => (2 * t.max(1), n_max),
        _ => ((n_max / 10).max(1), n_max),
    }
}
