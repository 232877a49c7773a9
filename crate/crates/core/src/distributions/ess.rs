use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use rand::distributions::Open01;
use rand::Rng;

use super::std_normal;
use crate::error::{Error, Result};

const MAX_SHRINKS: usize = 100;

/// One elliptical slice sampling transition (Murray, Adams and MacKay 2010)
/// targeting `N(prior_mean, L Lᵀ) × exp(log_lik)`, where `prior_chol` is `L`.
pub fn ess_sample<R, F>(
    current: &DVector<f64>,
    prior_mean: &DVector<f64>,
    prior_chol: &DMatrix<f64>,
    mut log_lik: F,
    rng: &mut R,
) -> Result<DVector<f64>>
where
    R: Rng + ?Sized,
    F: FnMut(&DVector<f64>) -> f64,
{
    let dim = current.len();
    let draw = |rng: &mut R| {
        let e = DVector::from_fn(dim, |_, _| std_normal(rng));
        prior_chol * e
    };
    ess_step(current, None, prior_mean, draw, &mut log_lik, rng).map(|(x, _)| x)
}

/// Generic transition. `draw_deviation` returns a zero-mean draw from the
/// Gaussian reference. Returns the new state and its log-likelihood.
pub(crate) fn ess_step<R, D, F>(
    current: &DVector<f64>,
    current_ll: Option<f64>,
    mean: &DVector<f64>,
    mut draw_deviation: D,
    log_lik: &mut F,
    rng: &mut R,
) -> Result<(DVector<f64>, f64)>
where
    R: Rng + ?Sized,
    D: FnMut(&mut R) -> DVector<f64>,
    F: FnMut(&DVector<f64>) -> f64,
{
    let ll0 = match current_ll {
        Some(v) => v,
        None => log_lik(current),
    };
    if ll0.is_nan() {
        return Err(Error::Sampler(format!(
            "log-likelihood is NaN at the current state {:?}",
            current.as_slice()
        )));
    }
    let nu = draw_deviation(rng);
    let offset = current - mean;
    let u: f64 = rng.sample(Open01);
    let threshold = ll0 + u.ln();
    let t: f64 = rng.sample(Open01);
    let mut angle = 2.0 * PI * t;
    let mut lo = angle - 2.0 * PI;
    let mut hi = angle;
    for _ in 0..MAX_SHRINKS {
        let proposal = mean + &offset * angle.cos() + &nu * angle.sin();
        let ll = log_lik(&proposal);
        if ll.is_nan() {
            return Err(Error::Sampler(format!(
                "log-likelihood is NaN at proposal {:?} (current {:?})",
                proposal.as_slice(),
                current.as_slice()
            )));
        }
        if ll > threshold {
            return Ok((proposal, ll));
        }
        if angle < 0.0 {
            lo = angle;
        } else {
            hi = angle;
        }
        let t: f64 = rng.sample(Open01);
        angle = lo + t * (hi - lo);
    }
    Err(Error::Sampler(format!(
        "elliptical slice bracket did not accept after {MAX_SHRINKS} shrinks at {:?} (log-lik {ll0})",
        current.as_slice()
    )))
}
