use rand::distributions::Open01;
use rand::Rng;

use super::{normal_cdf, normal_isf, normal_sf, probit, std_normal};
use crate::error::{Error, Result};

/// Open interval `(lower, upper)` with possibly infinite ends.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Interval {
    pub lower: f64,
    pub upper: f64,
}

impl Interval {
    pub const REAL_LINE: Interval = Interval {
        lower: f64::NEG_INFINITY,
        upper: f64::INFINITY,
    };
    pub const POSITIVE: Interval = Interval {
        lower: 0.0,
        upper: f64::INFINITY,
    };
    pub const NEGATIVE: Interval = Interval {
        lower: f64::NEG_INFINITY,
        upper: 0.0,
    };

    pub fn new(lower: f64, upper: f64) -> Result<Self> {
        if lower.is_nan() || upper.is_nan() || lower >= upper {
            return Err(Error::InvalidParameter(format!(
                "interval needs lower < upper, got ({lower}, {upper})"
            )));
        }
        Ok(Self { lower, upper })
    }

    pub fn contains(&self, x: f64) -> bool {
        x > self.lower && x < self.upper
    }
}

// Past this many standard deviations the inverse-CDF loses relative precision
// and the exponential rejection sampler takes over.
const TAIL_CUTOFF: f64 = 6.0;
const MAX_RETRIES: usize = 1000;

/// Draw from N(mean, sd²) restricted to the open interval.
pub fn sample_truncated_normal<R: Rng + ?Sized>(
    mean: f64,
    sd: f64,
    interval: Interval,
    rng: &mut R,
) -> Result<f64> {
    if !mean.is_finite() || !sd.is_finite() || sd <= 0.0 {
        return Err(Error::InvalidParameter(format!(
            "truncated normal needs finite mean and positive sd, got mean={mean}, sd={sd}"
        )));
    }
    if interval.lower.is_nan() || interval.upper.is_nan() || interval.lower >= interval.upper {
        return Err(Error::InvalidParameter(format!(
            "invalid interval ({}, {})",
            interval.lower, interval.upper
        )));
    }
    let a = (interval.lower - mean) / sd;
    let b = (interval.upper - mean) / sd;
    for _ in 0..MAX_RETRIES {
        let z = standard_truncated(a, b, rng)?;
        let x = mean + sd * z;
        // Roundoff in the affine map can land exactly on a bound; redraw.
        if interval.contains(x) {
            return Ok(x);
        }
    }
    Err(Error::Sampler(format!(
        "truncated normal could not place a draw strictly inside ({}, {}) for mean={mean}, sd={sd}",
        interval.lower, interval.upper
    )))
}

fn standard_truncated<R: Rng + ?Sized>(a: f64, b: f64, rng: &mut R) -> Result<f64> {
    if a == f64::NEG_INFINITY && b == f64::INFINITY {
        return Ok(std_normal(rng));
    }
    if b <= 0.0 {
        // Mirror so the tail of interest is always on the right.
        return Ok(-upper_side(-b, -a, rng)?);
    }
    if a >= 0.0 {
        return upper_side(a, b, rng);
    }
    // Interval straddles zero, so the CDF orientation is well conditioned.
    let fa = normal_cdf(a);
    let fb = normal_cdf(b);
    let u: f64 = rng.sample(Open01);
    Ok(probit(fa + u * (fb - fa)))
}

// Sample on (a, b) with a >= 0.
fn upper_side<R: Rng + ?Sized>(a: f64, b: f64, rng: &mut R) -> Result<f64> {
    if a > TAIL_CUTOFF {
        return exponential_tail(a, b, rng);
    }
    let qa = normal_sf(a);
    let qb = normal_sf(b);
    let u: f64 = rng.sample(Open01);
    Ok(normal_isf(qb + u * (qa - qb)))
}

// Robert (1995) translated-exponential rejection, truncated at b.
fn exponential_tail<R: Rng + ?Sized>(a: f64, b: f64, rng: &mut R) -> Result<f64> {
    let alpha = 0.5 * (a + (a * a + 4.0).sqrt());
    let span = b - a;
    let mass = if span.is_finite() {
        -(-alpha * span).exp_m1()
    } else {
        1.0
    };
    // Envelope peak of exp(-(z - alpha)^2 / 2) restricted to (a, b).
    let peak = if alpha < b { alpha } else { b };
    let log_bound = -0.5 * (peak - alpha) * (peak - alpha);
    for _ in 0..MAX_RETRIES {
        let u: f64 = rng.sample(Open01);
        let z = a - (-u * mass).ln_1p() / alpha;
        if z <= a || z >= b {
            continue;
        }
        let v: f64 = rng.sample(Open01);
        if v.ln() <= -0.5 * (z - alpha) * (z - alpha) - log_bound {
            return Ok(z);
        }
    }
    Err(Error::Sampler(format!(
        "tail sampler exhausted retries on ({a}, {b})"
    )))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::RngStream;

    fn draws(mean: f64, sd: f64, iv: Interval, n: usize, seed: u64) -> Vec<f64> {
        let mut rng = RngStream::new(seed, 0);
        (0..n)
            .map(|_| sample_truncated_normal(mean, sd, iv, &mut rng).unwrap())
            .collect()
    }

    fn mean(v: &[f64]) -> f64 {
        v.iter().sum::<f64>() / v.len() as f64
    }

    #[test]
    fn untruncated_is_standard_normal() {
        let d = draws(0.0, 1.0, Interval::REAL_LINE, 100_000, 1);
        assert!(mean(&d).abs() < 0.02);
    }

    #[test]
    fn half_normal_mean() {
        let d = draws(0.0, 1.0, Interval::POSITIVE, 100_000, 2);
        // phi(0) / (1 - Phi(0)) = sqrt(2/pi)
        let analytic = (2.0 / std::f64::consts::PI).sqrt();
        assert!((mean(&d) - analytic).abs() < 0.01);
        assert!(d.iter().all(|&x| x > 0.0));
    }

    #[test]
    fn far_mean_stays_in_support() {
        let d = draws(2.0, 1.0, Interval::NEGATIVE, 50_000, 3);
        assert!(d.iter().all(|&x| x < 0.0));
    }

    #[test]
    fn extreme_tail_mean_matches_mills_ratio() {
        // Lower bound 8 sd above the mean: E[Z | Z > a] = phi(a) / Q(a).
        let a = 8.0;
        let d = draws(0.0, 1.0, Interval::new(a, f64::INFINITY).unwrap(), 50_000, 4);
        let phi = (-0.5 * a * a).exp() / (2.0 * std::f64::consts::PI).sqrt();
        let analytic = phi / normal_sf(a);
        assert!((mean(&d) - analytic).abs() < 5e-3, "{} vs {}", mean(&d), analytic);
        let d = draws(0.0, 1.0, Interval::new(f64::NEG_INFINITY, -a).unwrap(), 10_000, 5);
        assert!(d.iter().all(|&x| x < -a));
    }

    #[test]
    fn narrow_far_interval() {
        let iv = Interval::new(30.0, 30.001).unwrap();
        let d = draws(0.0, 1.0, iv, 2_000, 6);
        assert!(d.iter().all(|&x| iv.contains(x)));
        let iv = Interval::new(-0.2, -0.1999).unwrap();
        let d = draws(0.0, 1.0, iv, 2_000, 7);
        assert!(d.iter().all(|&x| iv.contains(x)));
    }

    #[test]
    fn rejects_bad_parameters() {
        let mut rng = RngStream::new(0, 0);
        assert!(sample_truncated_normal(f64::NAN, 1.0, Interval::POSITIVE, &mut rng).is_err());
        assert!(sample_truncated_normal(0.0, 0.0, Interval::POSITIVE, &mut rng).is_err());
        assert!(sample_truncated_normal(0.0, f64::INFINITY, Interval::POSITIVE, &mut rng).is_err());
        assert!(Interval::new(1.0, 1.0).is_err());
    }
}
