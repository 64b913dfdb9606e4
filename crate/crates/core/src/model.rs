//! Dimensionless parameters, kick-sign schedules and marginally stable points.
//!
//! Kick indices are 1-based throughout the crate: the first kick is `n = 1`,
//! and [`KickSchedule::sign`] maps `n` to `pattern[(n - 1) % period]`.

use std::f64::consts::{FRAC_PI_2, PI, TAU};
use std::fmt;
use std::str::FromStr;

use crate::error::{param, Error, Result};

/// Dimensionless kick parameters.
///
/// The classical stochasticity `kappa` is primary; the quantum kick strength
/// `k = kappa / tau` is derived from it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimParams {
    kappa: f64,
    tau: f64,
    k: f64,
    boundary_multiplier: u32,
}

impl SimParams {
    /// Builds parameters from the classical strength `kappa` and the effective Planck constant `tau`.
    pub fn new(kappa: f64, tau: f64, boundary_multiplier: u32) -> Result<Self> {
        if !(kappa.is_finite() && kappa > 0.0) {
            return param(format!("kappa must be positive and finite, got {kappa}"));
        }
        if !(tau.is_finite() && tau > 0.0) {
            return param(format!("tau must be positive and finite, got {tau}"));
        }
        if boundary_multiplier == 0 {
            return param("boundary multiplier must be at least 1");
        }
        Ok(Self {
            kappa,
            tau,
            k: kappa / tau,
            boundary_multiplier,
        })
    }

    /// Builds parameters from the quantum kick strength `k` and `tau`.
    pub fn from_quantum(k: f64, tau: f64, boundary_multiplier: u32) -> Result<Self> {
        if !(k.is_finite() && k > 0.0) {
            return param(format!("k must be positive and finite, got {k}"));
        }
        let mut p = Self::new(k * tau, tau, boundary_multiplier)?;
        // Keep the caller's k exactly; kappa carries the rounding.
        p.k = k;
        Ok(p)
    }

    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    pub fn k(&self) -> f64 {
        self.k
    }

    pub fn boundary_multiplier(&self) -> u32 {
        self.boundary_multiplier
    }
}

/// Which family a [`KickSchedule`] belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ScheduleKind {
    /// Unmodulated kicking, every sign `+1`.
    Kr,
    /// Sign reversed after every two kicks: `(+1, +1, -1, -1)`.
    Mkr,
    /// Sign reversed after every `block` kicks.
    Gen { block: usize },
}

impl fmt::Display for ScheduleKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ScheduleKind::Kr => write!(f, "kr"),
            ScheduleKind::Mkr => write!(f, "mkr"),
            ScheduleKind::Gen { block } => write!(f, "gen{block}"),
        }
    }
}

/// Parses `kr`, `mkr` or `genN` where `N` is the block length (6, 10, 14, ...).
impl FromStr for ScheduleKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let lower = s.trim().to_ascii_lowercase();
        match lower.as_str() {
            "kr" => Ok(ScheduleKind::Kr),
            "mkr" => Ok(ScheduleKind::Mkr),
            other => {
                let Some(rest) = other.strip_prefix("gen") else {
                    return param(format!("unknown schedule `{s}` (expected kr, mkr or genN)"));
                };
                let block: usize = rest
                    .parse()
                    .map_err(|_| Error::Parameter(format!("bad block length in `{s}`")))?;
                if block % 2 != 0 {
                    return param(format!("block length {block} must be twice an odd number"));
                }
                let schedule = make_schedule(ScheduleKind::Gen { block }, Some(block / 2))?;
                Ok(schedule.kind())
            }
        }
    }
}

/// A periodic sequence of kick signs.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KickSchedule {
    kind: ScheduleKind,
    pattern: Vec<i8>,
}

impl KickSchedule {
    pub fn kr() -> Self {
        Self {
            kind: ScheduleKind::Kr,
            pattern: vec![1],
        }
    }

    pub fn mkr() -> Self {
        Self {
            kind: ScheduleKind::Mkr,
            pattern: vec![1, 1, -1, -1],
        }
    }

    pub fn kind(&self) -> ScheduleKind {
        self.kind
    }

    pub fn pattern(&self) -> &[i8] {
        &self.pattern
    }

    pub fn period(&self) -> usize {
        self.pattern.len()
    }

    /// Sign of kick `n` (1-based).
    ///
    /// # Panics
    ///
    /// Panics if `n == 0`.
    pub fn sign(&self, n: usize) -> f64 {
        assert!(n >= 1, "kick indices are 1-based");
        f64::from(self.pattern[(n - 1) % self.pattern.len()])
    }

    /// Signs for kicks `1..=n_kicks`.
    pub fn signs(&self, n_kicks: usize) -> impl Iterator<Item = f64> + '_ {
        (1..=n_kicks).map(move |n| self.sign(n))
    }
}

/// Builds a kick schedule.
///
/// For [`ScheduleKind::Gen`], `n_half` must be odd and at least 3; the block
/// length is `2 * n_half` (6, 10, 14, ...). The `block` carried by the kind is
/// ignored in favour of `n_half`.
pub fn make_schedule(kind: ScheduleKind, n_half: Option<usize>) -> Result<KickSchedule> {
    match kind {
        ScheduleKind::Kr => Ok(KickSchedule::kr()),
        ScheduleKind::Mkr => Ok(KickSchedule::mkr()),
        ScheduleKind::Gen { .. } => {
            let Some(n_half) = n_half else {
                return param("generalized schedule requires n_half");
            };
            if n_half < 3 || n_half % 2 == 0 {
                return param(format!("n_half must be odd and >= 3, got {n_half}"));
            }
            let block = 2 * n_half;
            let mut pattern = vec![1i8; block];
            pattern.extend(std::iter::repeat(-1i8).take(block));
            Ok(KickSchedule {
                kind: ScheduleKind::Gen { block },
                pattern,
            })
        }
    }
}

/// A classical phase-space point: scaled angular momentum and angle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhasePoint {
    pub l_tilde: f64,
    pub theta: f64,
}

impl PhasePoint {
    pub const fn new(l_tilde: f64, theta: f64) -> Self {
        Self { l_tilde, theta }
    }

    pub fn is_finite(&self) -> bool {
        self.l_tilde.is_finite() && self.theta.is_finite()
    }

    /// Angle reduced to `[0, 2π)`.
    pub fn theta_wrapped(&self) -> f64 {
        wrap_angle(self.theta)
    }
}

/// Reduces an angle to `[0, 2π)`.
pub fn wrap_angle(x: f64) -> f64 {
    let r = x.rem_euclid(TAU);
    // rem_euclid can round up to exactly TAU for tiny negative inputs.
    if r >= TAU {
        0.0
    } else {
        r
    }
}

/// Marginally stable points and the `kappa` at which they exist.
///
/// KR: `kappa = 2π l2`, points `(2π l1, ±π/2)`.
/// MKR (and the generalized schedules): `kappa = (2 l2 + 1) π`, points `((2 l1 + 1) π, ±π/2)`.
/// The `-π/2` point is reported as `3π/2`.
pub fn marginal_points(kind: ScheduleKind, l1: i64, l2: i64) -> (f64, [PhasePoint; 2]) {
    let (kappa, l_tilde) = match kind {
        ScheduleKind::Kr => (TAU * l2 as f64, TAU * l1 as f64),
        ScheduleKind::Mkr | ScheduleKind::Gen { .. } => {
            ((2 * l2 + 1) as f64 * PI, (2 * l1 + 1) as f64 * PI)
        }
    };
    (
        kappa,
        [
            PhasePoint::new(l_tilde, FRAC_PI_2),
            PhasePoint::new(l_tilde, 3.0 * FRAC_PI_2),
        ],
    )
}
