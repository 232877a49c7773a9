//! Samplers and densities shared by every Gibbs step.

mod ess;
mod truncnorm;
mod wishart;

pub use ess::ess_sample;
pub(crate) use ess::ess_step;
pub use truncnorm::{sample_truncated_normal, Interval};
pub use wishart::sample_wishart;

use rand::Rng;
use rand_distr::{Distribution, Gamma, StandardNormal};
use statrs::function::erf::{erfc, erfc_inv};

use crate::error::{Error, Result};

const SQRT_2: f64 = std::f64::consts::SQRT_2;
pub(crate) const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_8;

/// Standard normal CDF.
pub fn normal_cdf(x: f64) -> f64 {
    0.5 * erfc(-x / SQRT_2)
}

/// Standard normal upper tail `1 - Φ(x)`, accurate far into the right tail.
pub fn normal_sf(x: f64) -> f64 {
    0.5 * erfc(x / SQRT_2)
}

/// Standard normal quantile `Φ⁻¹(p)` for `p` in (0, 1).
pub fn probit(p: f64) -> f64 {
    -SQRT_2 * erfc_inv(2.0 * p)
}

/// Inverse of [`normal_sf`].
pub(crate) fn normal_isf(q: f64) -> f64 {
    SQRT_2 * erfc_inv(2.0 * q)
}

pub fn normal_logpdf(x: f64, mean: f64, sd: f64) -> f64 {
    let z = (x - mean) / sd;
    -0.5 * z * z - sd.ln() - LN_SQRT_2PI
}

/// Standard normal draw.
pub fn std_normal<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    StandardNormal.sample(rng)
}

/// Inverse gamma draw with density ∝ x^{-shape-1} exp(-scale/x).
pub fn sample_inverse_gamma<R: Rng + ?Sized>(shape: f64, scale: f64, rng: &mut R) -> Result<f64> {
    if !(shape > 0.0 && shape.is_finite() && scale > 0.0 && scale.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "inverse gamma needs positive finite shape and scale, got shape={shape}, scale={scale}"
        )));
    }
    let g = Gamma::new(shape, 1.0 / scale)
        .map_err(|e| Error::InvalidParameter(format!("gamma({shape}, {scale}): {e}")))?;
    let x: f64 = g.sample(rng);
    Ok(1.0 / x)
}

pub(crate) fn sample_gamma<R: Rng + ?Sized>(shape: f64, scale: f64, rng: &mut R) -> Result<f64> {
    let g = Gamma::new(shape, scale)
        .map_err(|e| Error::InvalidParameter(format!("gamma({shape}, {scale}): {e}")))?;
    Ok(g.sample(rng))
}
