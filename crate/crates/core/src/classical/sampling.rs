use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use super::ClassicalEnsemble;
use crate::error::{param, Result};
use crate::model::PhasePoint;

/// Samples the Wigner function of a minimum-uncertainty Gaussian centred at the origin.
///
/// The Wigner function is the product Gaussian with standard deviation
/// `sigma_theta` in angle and `tau / (2 sigma_theta)` in scaled momentum.
/// For `psi(theta) ∝ exp(-theta^2 / (2 s))` use `sigma_theta = sqrt(s / 2)`.
pub fn sample_wigner_gaussian(sigma_theta: f64, tau: f64, n: usize, seed: u64) -> Result<ClassicalEnsemble> {
    if !(sigma_theta.is_finite() && sigma_theta > 0.0) {
        return param(format!("sigma_theta must be positive, got {sigma_theta}"));
    }
    if !(tau.is_finite() && tau > 0.0) {
        return param(format!("tau must be positive, got {tau}"));
    }
    if n == 0 {
        return param("sample count must be at least 1");
    }
    let theta = Normal::new(0.0, sigma_theta).expect("validated width");
    let l_tilde = Normal::new(0.0, tau / (2.0 * sigma_theta)).expect("validated width");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let points = (0..n)
        .map(|_| {
            let th = theta.sample(&mut rng);
            PhasePoint::new(l_tilde.sample(&mut rng), th)
        })
        .collect();
    Ok(ClassicalEnsemble::with_seed(points, seed))
}
