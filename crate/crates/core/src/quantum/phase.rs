//! Phases `coef * q / den (mod 2π)` for integer `q`, reduced without
//! losing the low bits when `coef * q` is large.

use std::f64::consts::{PI, TAU};

// 2π = TAU + TAU_LO to about 1e-32.
const TAU_LO: f64 = 2.449_293_598_294_706_4e-16;

/// `coef * q / den` reduced to `(-π, π]`-ish (within a few ulps of the true residue).
pub(crate) fn scaled_phase(coef: f64, q: u128, den: u128) -> f64 {
    debug_assert!(den > 0);
    let whole = q / den;
    let rem = q % den;
    debug_assert!(whole < (1u128 << 53), "phase numerator out of range");
    let a = whole as f64;
    let hi = coef * a;
    let lo = coef.mul_add(a, -hi);
    let n = (hi / TAU).round();
    let mut x = (-n).mul_add(TAU, hi);
    x = (-n).mul_add(TAU_LO, x);
    x + lo + coef * (rem as f64 / den as f64)
}

/// `π * q / den (mod 2π)`, exact in the integer part.
pub(crate) fn pi_phase(q: u128, den: u128) -> f64 {
    let r = q % (2 * den);
    PI * (r as f64 / den as f64)
}
