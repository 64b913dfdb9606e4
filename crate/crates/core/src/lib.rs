//! Classical and quantum dynamics of the kicked rotor and the sign-modulated
//! kicked rotor, with the analysis tools used to compare them.
//!
//! All quantities are dimensionless: `kappa` is the classical kick strength,
//! `tau` the effective Planck constant and `k = kappa / tau` the quantum kick
//! strength. Kick indices are 1-based.

pub mod analysis;
pub mod classical;
pub mod error;
pub mod model;
pub mod quantum;
pub mod series;
pub mod special;

mod par;

pub use error::{Error, Result};
pub use model::{make_schedule, marginal_points, KickSchedule, PhasePoint, ScheduleKind, SimParams};
pub use series::{EnergyKind, EnergySeries};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
