//! Classical kicked-rotor maps.
//!
//! One kick of strength `sign * kappa` followed by free rotation:
//!
//! ```text
//! L' = L + sign * kappa * sin(theta)
//! theta' = theta + L'
//! ```
//!
//! With all signs `+1` this is the standard map; with the `(+, +, -, -)`
//! schedule it is the four-step sign-modulated map. Trajectories keep `theta`
//! in `[0, 2π)` and carry both coordinates in double-double precision.

mod sampling;

pub use sampling::sample_wigner_gaussian;

use std::f64::consts::{PI, TAU};

use crate::error::{param, Error, Result};
use crate::model::{wrap_angle, KickSchedule, PhasePoint, ScheduleKind};
use crate::par;
use crate::series::{CompensatedSum, EnergyKind, EnergySeries};

/// A set of phase-space points evolved together.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassicalEnsemble {
    points: Vec<PhasePoint>,
    seed: Option<u64>,
}

impl ClassicalEnsemble {
    pub fn from_points(points: Vec<PhasePoint>) -> Self {
        Self { points, seed: None }
    }

    pub(crate) fn with_seed(points: Vec<PhasePoint>, seed: u64) -> Self {
        Self {
            points,
            seed: Some(seed),
        }
    }

    /// `n` points at `L = l_tilde` with equally spaced angles `2π (i + 1/2) / n`.
    pub fn uniform_theta(n: usize, l_tilde: f64) -> Self {
        let points = (0..n)
            .map(|i| PhasePoint::new(l_tilde, TAU * (i as f64 + 0.5) / n as f64))
            .collect();
        Self::from_points(points)
    }

    /// `n` points at `L = l_tilde` with independent uniform random angles.
    pub fn uniform_theta_random(n: usize, l_tilde: f64, seed: u64) -> Self {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let points = (0..n)
            .map(|_| PhasePoint::new(l_tilde, rng.gen_range(0.0..TAU)))
            .collect();
        Self::with_seed(points, seed)
    }

    /// Cell-centred `res x res` grid over a rectangle.
    pub fn grid(cell: Cell, res: usize) -> Result<Self> {
        cell.validate()?;
        if res == 0 {
            return param("grid resolution must be positive");
        }
        let dt = (cell.theta.1 - cell.theta.0) / res as f64;
        let dl = (cell.l_tilde.1 - cell.l_tilde.0) / res as f64;
        let mut points = Vec::with_capacity(res * res);
        for i in 0..res {
            let l = cell.l_tilde.0 + (i as f64 + 0.5) * dl;
            for j in 0..res {
                points.push(PhasePoint::new(l, cell.theta.0 + (j as f64 + 0.5) * dt));
            }
        }
        Ok(Self::from_points(points))
    }

    pub fn points(&self) -> &[PhasePoint] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn seed(&self) -> Option<u64> {
        self.seed
    }
}

/// An axis-aligned rectangle in `(theta, L)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Cell {
    pub theta: (f64, f64),
    pub l_tilde: (f64, f64),
}

impl Cell {
    /// The unit cell `[0, 2π) x [0, 2π)`.
    pub const UNIT: Cell = Cell {
        theta: (0.0, TAU),
        l_tilde: (0.0, TAU),
    };

    fn validate(&self) -> Result<()> {
        let ok = |(lo, hi): (f64, f64)| lo.is_finite() && hi.is_finite() && hi > lo;
        if ok(self.theta) && ok(self.l_tilde) {
            Ok(())
        } else {
            param(format!("degenerate cell {self:?}"))
        }
    }
}

/// One kick followed by free rotation. `theta` is not reduced.
pub fn map_step(p: PhasePoint, kappa: f64, sign: f64) -> Result<PhasePoint> {
    if !p.is_finite() || !kappa.is_finite() {
        return Err(Error::Numeric(format!(
            "non-finite map input {p:?}, kappa={kappa}"
        )));
    }
    if sign != 1.0 && sign != -1.0 {
        return param(format!("kick sign must be +1 or -1, got {sign}"));
    }
    Ok(step(p, sign * kappa))
}

/// Inverse of [`map_step`].
pub fn map_step_inverse(p: PhasePoint, kappa: f64, sign: f64) -> PhasePoint {
    let theta = p.theta - p.l_tilde;
    PhasePoint::new(p.l_tilde - sign * kappa * theta.sin(), theta)
}

#[inline(always)]
fn step(p: PhasePoint, strength: f64) -> PhasePoint {
    let l_tilde = p.l_tilde + strength * p.theta.sin();
    PhasePoint::new(l_tilde, p.theta + l_tilde)
}

// 2π = TAU + TAU_LO to about 1e-32.
const TAU_LO: f64 = 2.449_293_598_294_706_4e-16;

#[inline(always)]
fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    (s, (a - (s - bb)) + (b - bb))
}

#[inline(always)]
fn renorm(hi: f64, lo: f64) -> (f64, f64) {
    let s = hi + lo;
    (s, lo - (s - hi))
}

/// Trajectory state with both coordinates carried as unevaluated sums
/// `hi + lo`, and the angle kept in `[0, 2π)`.
///
/// Marginally stable orbits are driven off by rounding: an angle error `δ`
/// costs `κ δ² / 2` of momentum per kick, which feeds back through the shear.
/// Plain doubles lose `ulp(L)` per kick and leave the orbit within ~10⁴ kicks.
#[derive(Debug, Clone, Copy)]
struct Orbit {
    l: (f64, f64),
    theta: (f64, f64),
}

impl Orbit {
    fn new(p: PhasePoint) -> Self {
        Self {
            l: (p.l_tilde, 0.0),
            theta: (wrap_angle(p.theta), 0.0),
        }
    }

    #[inline(always)]
    fn l_tilde(&self) -> f64 {
        self.l.0 + self.l.1
    }

    #[inline(always)]
    fn point(&self) -> PhasePoint {
        PhasePoint::new(self.l_tilde(), self.theta.0)
    }

    #[inline(always)]
    fn step(&mut self, strength: f64) {
        let (sin, cos) = self.theta.0.sin_cos();
        let force = strength * (sin + cos * self.theta.1);
        let (s, e) = two_sum(self.l.0, force);
        self.l = renorm(s, e + self.l.1);

        // Reduce L mod 2π before adding it to the angle.
        let n = (self.l.0 / TAU).round();
        let prod = n * TAU;
        let prod_err = n.mul_add(TAU, -prod);
        let r_hi = self.l.0 - prod;
        let r_lo = self.l.1 - prod_err - n * TAU_LO;
        let (s, e) = two_sum(self.theta.0, r_hi);
        let (mut hi, mut lo) = renorm(s, e + self.theta.1 + r_lo);
        while hi < 0.0 {
            let (s, e) = two_sum(hi, TAU);
            (hi, lo) = renorm(s, e + lo + TAU_LO);
        }
        while hi >= TAU {
            let (s, e) = two_sum(hi, -TAU);
            (hi, lo) = renorm(s, e + lo - TAU_LO);
        }
        self.theta = (hi, lo);
    }
}

/// Iterates a single trajectory, calling `visit(n, point)` after every kick `n`.
pub fn iterate(
    p0: PhasePoint,
    schedule: &KickSchedule,
    kappa: f64,
    n_kicks: usize,
    mut visit: impl FnMut(usize, PhasePoint),
) -> PhasePoint {
    let strengths: Vec<f64> = schedule.pattern().iter().map(|&s| f64::from(s) * kappa).collect();
    let mut orbit = Orbit::new(p0);
    for n in 1..=n_kicks {
        orbit.step(strengths[(n - 1) % strengths.len()]);
        visit(n, orbit.point());
    }
    orbit.point()
}

/// Mean of `L^2 / 2` over the ensemble.
pub fn classical_energy(e: &ClassicalEnsemble) -> Result<f64> {
    if e.is_empty() {
        return param("energy of an empty ensemble");
    }
    let mut acc = CompensatedSum::default();
    for p in e.points() {
        acc.add(0.5 * p.l_tilde * p.l_tilde);
    }
    Ok(acc.value() / e.len() as f64)
}

/// Evolves every point through `n_kicks` kicks, recording the ensemble energy after each.
pub fn evolve_ensemble(
    e: &ClassicalEnsemble,
    schedule: &KickSchedule,
    kappa: f64,
    n_kicks: usize,
) -> Result<(ClassicalEnsemble, EnergySeries)> {
    if e.is_empty() {
        return param("cannot evolve an empty ensemble");
    }
    if n_kicks == 0 {
        return param("n_kicks must be at least 1");
    }
    if let Some(bad) = e.points().iter().find(|p| !p.is_finite()) {
        return Err(Error::Numeric(format!("non-finite initial point {bad:?}")));
    }
    let strengths: Vec<f64> = schedule.pattern().iter().map(|&s| f64::from(s) * kappa).collect();
    let mut points = e.points.clone();

    let partials = par::map_chunks_mut(&mut points, |chunk| {
        let mut acc = vec![CompensatedSum::default(); n_kicks + 1];
        for p in chunk.iter_mut() {
            let mut orbit = Orbit::new(*p);
            let l = orbit.l_tilde();
            acc[0].add(0.5 * l * l);
            for (n, slot) in acc.iter_mut().enumerate().skip(1) {
                orbit.step(strengths[(n - 1) % strengths.len()]);
                let l = orbit.l_tilde();
                slot.add(0.5 * l * l);
            }
            *p = orbit.point();
        }
        acc.into_iter().map(|a| a.value()).collect::<Vec<f64>>()
    });

    let count = points.len() as f64;
    let values = (0..=n_kicks)
        .map(|n| {
            let mut total = CompensatedSum::default();
            for part in &partials {
                total.add(part[n]);
            }
            total.value() / count
        })
        .collect();
    if let Some(bad) = points.iter().find(|p| !p.is_finite()) {
        return Err(Error::Numeric(format!("trajectory diverged to {bad:?}")));
    }
    Ok((
        ClassicalEnsemble {
            points,
            seed: e.seed,
        },
        EnergySeries::new(EnergyKind::Classical, values),
    ))
}

/// Stroboscopic section: `(theta mod 2π, L mod 2π)` after every kick of every trajectory.
///
/// Points are ordered trajectory by trajectory.
pub fn poincare_section(
    grid: &ClassicalEnsemble,
    schedule: &KickSchedule,
    kappa: f64,
    n_kicks: usize,
) -> Result<Vec<(f64, f64)>> {
    if grid.is_empty() {
        return param("cannot section an empty ensemble");
    }
    if n_kicks == 0 {
        return param("n_kicks must be at least 1");
    }
    let chunks = par::map_chunks(grid.points(), |chunk| {
        let mut out = Vec::with_capacity(chunk.len() * n_kicks);
        for &p0 in chunk {
            iterate(p0, schedule, kappa, n_kicks, |_, p| {
                out.push((p.theta, wrap_angle(p.l_tilde)));
            });
        }
        out
    });
    let section: Vec<(f64, f64)> = chunks.into_iter().flatten().collect();
    if section.iter().any(|(t, l)| !t.is_finite() || !l.is_finite()) {
        return Err(Error::Numeric("non-finite section point".into()));
    }
    Ok(section)
}

/// Outcome of the ballistic-transport test for one trajectory.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Transport {
    pub is_transporting: bool,
    /// `(L_N - L_0) / N`.
    pub mean_gain: f64,
    /// Per-kick gain magnitude the trajectory was tested against.
    pub target: f64,
}

/// Default tolerance on `| |mean_gain| - target |`.
pub const DEFAULT_TRANSPORT_TOL: f64 = 0.05 * PI;

/// Per-kick momentum gain of the primary transporting orbit near `kappa`.
///
/// KR: the nearest nonzero multiple of `2π`. Sign-modulated schedules: the
/// nearest odd multiple of `π`.
pub fn transport_target(kind: ScheduleKind, kappa: f64) -> f64 {
    let kappa = kappa.abs();
    match kind {
        ScheduleKind::Kr => TAU * (kappa / TAU).round().max(1.0),
        ScheduleKind::Mkr | ScheduleKind::Gen { .. } => {
            let l2 = ((kappa / PI - 1.0) / 2.0).round().max(0.0);
            (2.0 * l2 + 1.0) * PI
        }
    }
}

/// Classifies a trajectory as ballistic when its mean gain per kick matches
/// the schedule's transport target within `tol`.
pub fn transport_classify(
    p0: PhasePoint,
    schedule: &KickSchedule,
    kappa: f64,
    n_kicks: usize,
    tol: f64,
) -> Result<Transport> {
    transport_classify_with_target(
        p0,
        schedule,
        kappa,
        n_kicks,
        tol,
        transport_target(schedule.kind(), kappa),
    )
}

pub fn transport_classify_with_target(
    p0: PhasePoint,
    schedule: &KickSchedule,
    kappa: f64,
    n_kicks: usize,
    tol: f64,
    target: f64,
) -> Result<Transport> {
    if n_kicks == 0 {
        return param("n_kicks must be at least 1");
    }
    if !(tol > 0.0) {
        return param(format!("tolerance must be positive, got {tol}"));
    }
    if !p0.is_finite() {
        return Err(Error::Numeric(format!("non-finite start {p0:?}")));
    }
    let end = iterate(p0, schedule, kappa, n_kicks, |_, _| {});
    let mean_gain = (end.l_tilde - p0.l_tilde) / n_kicks as f64;
    Ok(Transport {
        is_transporting: (mean_gain.abs() - target).abs() < tol,
        mean_gain,
        target,
    })
}

/// Fraction of a `resolution x resolution` grid over `cell` whose trajectories are transporting.
pub fn island_fraction(
    cell: Cell,
    resolution: usize,
    schedule: &KickSchedule,
    kappa: f64,
    n_kicks: usize,
    tol: f64,
) -> Result<f64> {
    if resolution < 32 {
        return param(format!("resolution must be at least 32, got {resolution}"));
    }
    let grid = ClassicalEnsemble::grid(cell, resolution)?;
    let target = transport_target(schedule.kind(), kappa);
    let counts = par::map_chunks(grid.points(), |chunk| {
        chunk
            .iter()
            .map(|&p| transport_classify_with_target(p, schedule, kappa, n_kicks, tol, target))
            .try_fold(0usize, |n, t| t.map(|t| n + usize::from(t.is_transporting)))
    });
    let mut hits = 0;
    for c in counts {
        hits += c?;
    }
    Ok(hits as f64 / grid.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::marginal_points;
    use approx::assert_relative_eq;
    use proptest::prelude::*;
    use std::f64::consts::FRAC_PI_2;

    #[test]
    fn single_step_examples() {
        let p = map_step(PhasePoint::new(0.0, FRAC_PI_2), 3.5, 1.0).unwrap();
        assert_eq!(p.l_tilde, 3.5);
        assert_eq!(p.theta, FRAC_PI_2 + 3.5);

        let p = map_step(PhasePoint::new(1.7, 0.3), 0.0, 1.0).unwrap();
        assert_eq!(p, PhasePoint::new(1.7, 2.0));
    }

    #[test]
    fn step_rejects_bad_input() {
        assert!(matches!(
            map_step(PhasePoint::new(f64::NAN, 0.0), 1.0, 1.0),
            Err(Error::Numeric(_))
        ));
        assert!(map_step(PhasePoint::new(0.0, 0.0), 1.0, 0.5).is_err());
    }

    #[test]
    fn marginal_point_four_kicks() {
        let s = KickSchedule::mkr();
        let mut p = PhasePoint::new(PI, FRAC_PI_2);
        let mut ls = Vec::new();
        for n in 1..=4 {
            p = map_step(p, PI, s.sign(n)).unwrap();
            ls.push(p.l_tilde);
        }
        for (l, expect) in ls.iter().zip([2.0 * PI, 3.0 * PI, 4.0 * PI, 5.0 * PI]) {
            assert_relative_eq!(*l, expect, max_relative = 1e-15);
        }
        let d = wrap_angle(p.theta - FRAC_PI_2);
        assert!(d.min(TAU - d) < 1e-12);
    }

    #[test]
    fn marginal_energy_closed_form() {
        let (kappa, pts) = marginal_points(ScheduleKind::Mkr, 0, 0);
        let e = ClassicalEnsemble::from_points(vec![pts[0]]);
        let (_, series) = evolve_ensemble(&e, &KickSchedule::mkr(), kappa, 200).unwrap();
        for (n, v) in series.values.iter().enumerate() {
            let expect = (PI * (n as f64 + 1.0)).powi(2) / 2.0;
            assert_relative_eq!(*v, expect, max_relative = 1e-12);
        }
    }

    #[test]
    fn zero_kappa_keeps_energy() {
        let e = ClassicalEnsemble::uniform_theta(64, 1.25);
        for s in [KickSchedule::kr(), KickSchedule::mkr()] {
            let (_, series) = evolve_ensemble(&e, &s, 0.0, 50).unwrap();
            assert!(series.values.iter().all(|&v| v == series.values[0]));
        }
    }

    #[test]
    fn energy_examples() {
        let e = ClassicalEnsemble::from_points(vec![
            PhasePoint::new(2.0, 0.1),
            PhasePoint::new(-2.0, 4.0),
        ]);
        assert_eq!(classical_energy(&e).unwrap(), 2.0);
        assert_eq!(
            classical_energy(&ClassicalEnsemble::uniform_theta(10, 0.0)).unwrap(),
            0.0
        );
        let e = ClassicalEnsemble::from_points(vec![PhasePoint::new(PI, 0.0)]);
        assert_eq!(classical_energy(&e).unwrap(), PI * PI / 2.0);
        assert!(classical_energy(&ClassicalEnsemble::from_points(vec![])).is_err());
    }

    #[test]
    fn evolve_errors() {
        let empty = ClassicalEnsemble::from_points(vec![]);
        assert!(evolve_ensemble(&empty, &KickSchedule::kr(), 1.0, 10).is_err());
        let one = ClassicalEnsemble::uniform_theta(1, 0.0);
        assert!(evolve_ensemble(&one, &KickSchedule::kr(), 1.0, 0).is_err());
    }

    #[test]
    fn section_count_and_marginal_cycle() {
        let grid = ClassicalEnsemble::grid(Cell::UNIT, 10).unwrap();
        let pts = poincare_section(&grid, &KickSchedule::mkr(), 3.5, 500).unwrap();
        assert_eq!(pts.len(), 50_000);

        let e = ClassicalEnsemble::from_points(vec![PhasePoint::new(PI, FRAC_PI_2)]);
        let pts = poincare_section(&e, &KickSchedule::mkr(), PI, 40).unwrap();
        let expected = [
            (FRAC_PI_2, 0.0),
            (3.0 * FRAC_PI_2, PI),
            (3.0 * FRAC_PI_2, 0.0),
            (FRAC_PI_2, PI),
        ];
        let circ = |a: f64, b: f64| {
            let d = wrap_angle(a - b);
            d.min(TAU - d)
        };
        for (i, &(t, l)) in pts.iter().enumerate() {
            let (et, el) = expected[i % 4];
            assert!(circ(t, et) < 1e-9, "kick {}: theta {t}", i + 1);
            assert!(circ(l, el) < 1e-9, "kick {}: L {l}", i + 1);
        }
    }

    #[test]
    fn transport_examples() {
        let s = KickSchedule::mkr();
        let t = transport_classify(PhasePoint::new(PI, FRAC_PI_2), &s, PI, 1000, DEFAULT_TRANSPORT_TOL)
            .unwrap();
        assert!(t.is_transporting);
        assert_relative_eq!(t.mean_gain, PI, max_relative = 1e-12);

        let t = transport_classify(PhasePoint::new(0.0, 1.0), &s, 3.5, 10_000, DEFAULT_TRANSPORT_TOL)
            .unwrap();
        assert!(!t.is_transporting);
        assert!(t.mean_gain.abs() < 0.5, "mean gain {}", t.mean_gain);

        let t = transport_classify(PhasePoint::new(2.0, 1.0), &s, 0.0, 100, DEFAULT_TRANSPORT_TOL)
            .unwrap();
        assert_eq!(t.mean_gain, 0.0);
        assert!(!t.is_transporting);
        assert!(transport_classify(PhasePoint::new(2.0, 1.0), &s, 1.0, 100, 0.0).is_err());
    }

    #[test]
    fn transport_targets() {
        assert_eq!(transport_target(ScheduleKind::Mkr, 3.5), PI);
        assert_eq!(transport_target(ScheduleKind::Mkr, 0.0), PI);
        assert_eq!(transport_target(ScheduleKind::Mkr, 9.0), 3.0 * PI);
        assert_eq!(transport_target(ScheduleKind::Kr, 3.5), TAU);
        assert_eq!(transport_target(ScheduleKind::Kr, 13.0), 2.0 * TAU);
    }

    #[test]
    fn island_fraction_examples() {
        let mkr = island_fraction(Cell::UNIT, 48, &KickSchedule::mkr(), 3.5, 2000, DEFAULT_TRANSPORT_TOL)
            .unwrap();
        assert!(mkr > 0.01, "MKR island fraction {mkr}");
        let kr = island_fraction(Cell::UNIT, 48, &KickSchedule::kr(), 3.5, 2000, DEFAULT_TRANSPORT_TOL)
            .unwrap();
        assert!(kr < 1e-3, "KR island fraction {kr}");
        let free = island_fraction(Cell::UNIT, 32, &KickSchedule::mkr(), 0.0, 100, DEFAULT_TRANSPORT_TOL)
            .unwrap();
        assert_eq!(free, 0.0);

        let flat = Cell {
            theta: (0.0, 1.0),
            l_tilde: (1.0, 1.0),
        };
        assert!(island_fraction(flat, 32, &KickSchedule::mkr(), 3.5, 10, 0.1).is_err());
        assert!(island_fraction(Cell::UNIT, 8, &KickSchedule::mkr(), 3.5, 10, 0.1).is_err());
    }

    #[test]
    fn marginal_point_exact_over_long_runs() {
        for (l1, l2) in [(0, 0), (1, 0), (-2, 1)] {
            let (kappa, pts) = marginal_points(ScheduleKind::Mkr, l1, l2);
            let gain = (2 * l2 + 1) as f64 * PI;
            let mut worst: f64 = 0.0;
            iterate(pts[0], &KickSchedule::mkr(), kappa, 10_000, |n, p| {
                let expect = pts[0].l_tilde + gain * n as f64;
                worst = worst.max((p.l_tilde - expect).abs());
            });
            assert!(worst < 1e-8, "l1={l1} l2={l2} drift {worst}");
        }
    }

    #[test]
    fn kr_accelerator_point_gains_kappa() {
        let (kappa, pts) = marginal_points(ScheduleKind::Kr, 1, 1);
        let end = iterate(pts[0], &KickSchedule::kr(), kappa, 100, |_, _| {});
        assert_relative_eq!(end.l_tilde, pts[0].l_tilde + 100.0 * kappa, max_relative = 1e-12);
    }

    fn jacobian_det(p: PhasePoint, kappa: f64, sign: f64) -> f64 {
        // Five-point central differences.
        let h = 1e-3;
        let f = |dl: f64, dt: f64| map_step(PhasePoint::new(p.l_tilde + dl, p.theta + dt), kappa, sign).unwrap();
        let d = |g: &dyn Fn(f64) -> f64| (-g(2.0 * h) + 8.0 * g(h) - 8.0 * g(-h) + g(-2.0 * h)) / (12.0 * h);
        let a = d(&|x| f(x, 0.0).l_tilde);
        let b = d(&|x| f(0.0, x).l_tilde);
        let c = d(&|x| f(x, 0.0).theta);
        let e = d(&|x| f(0.0, x).theta);
        a * e - b * c
    }

    proptest! {
        #[test]
        fn area_preserving(l in -20.0f64..20.0, th in 0.0f64..TAU, kappa in 0.0f64..10.0, neg in any::<bool>()) {
            let sign = if neg { -1.0 } else { 1.0 };
            let det = jacobian_det(PhasePoint::new(l, th), kappa, sign);
            prop_assert!((det - 1.0).abs() < 1e-8, "det {}", det);
        }

        #[test]
        fn inverse_recovers_input(l in -50.0f64..50.0, th in -10.0f64..10.0, kappa in 0.0f64..10.0, neg in any::<bool>()) {
            let sign = if neg { -1.0 } else { 1.0 };
            let p = PhasePoint::new(l, th);
            let back = map_step_inverse(map_step(p, kappa, sign).unwrap(), kappa, sign);
            prop_assert!((back.l_tilde - l).abs() < 1e-12 * (1.0 + l.abs() + kappa));
            prop_assert!((back.theta - th).abs() < 1e-12 * (1.0 + l.abs() + th.abs()));
        }

        #[test]
        fn theta_shift_by_two_pi(l in -5.0f64..5.0, th in 0.0f64..TAU, kappa in 0.0f64..5.0) {
            let s = KickSchedule::mkr();
            let mut a = Vec::new();
            let mut b = Vec::new();
            iterate(PhasePoint::new(l, th), &s, kappa, 8, |_, p| a.push(p.l_tilde));
            iterate(PhasePoint::new(l, th + TAU), &s, kappa, 8, |_, p| b.push(p.l_tilde));
            for (x, y) in a.iter().zip(&b) {
                prop_assert!((x - y).abs() < 1e-6, "{} vs {}", x, y);
            }
        }

        #[test]
        fn energy_permutation_invariant(seed in 0u64..1000, kappa in 0.5f64..5.0) {
            let e = ClassicalEnsemble::uniform_theta_random(5000, 0.0, seed);
            let mut shuffled = e.points().to_vec();
            use rand::{seq::SliceRandom, SeedableRng};
            shuffled.shuffle(&mut rand_chacha::ChaCha8Rng::seed_from_u64(seed + 1));
            let s = KickSchedule::mkr();
            let (_, a) = evolve_ensemble(&e, &s, kappa, 30).unwrap();
            let (_, b) = evolve_ensemble(&ClassicalEnsemble::from_points(shuffled), &s, kappa, 30).unwrap();
            for (x, y) in a.values.iter().zip(&b.values) {
                prop_assert!((x - y).abs() <= 1e-12 * x.abs().max(1e-300));
            }
        }
    }
}
