use nalgebra::DMatrix;
use rand::Rng;

use super::config::{SpikeSlabHyper, VSampling};
use super::expansion::project_back;
use super::omega::update_omega_ss;
use super::state::EdgeMask;
use super::updates::update_delta;
use crate::distributions::sample_inverse_gamma;
use crate::error::{Error, Result};

/// Quantiles of the realized edge fraction under the spike-and-slab prior.
#[derive(Clone, Debug)]
pub struct PriorEdgeSummary {
    pub median: f64,
    pub lower: f64,
    pub upper: f64,
    /// Edge fraction of every retained draw, in sampling order.
    pub fractions: Vec<f64>,
}

/// Run the correlation and graph updates without data and report the
/// distribution of the fraction of pairs with δ = 1.
pub fn simulate_prior_edge_probability<R: Rng + ?Sized>(
    p: usize,
    hyper: &SpikeSlabHyper,
    burn_in: usize,
    n_iter: usize,
    rng: &mut R,
) -> Result<PriorEdgeSummary> {
    hyper.validate()?;
    if p < 2 || n_iter == 0 {
        return Err(Error::InvalidParameter(
            "prior simulation needs p >= 2 and at least one retained draw".into(),
        ));
    }
    let pairs = (p * (p - 1) / 2) as f64;
    let shape = (p as f64 + 1.0) / 2.0;
    let s = DMatrix::zeros(p, p);
    let fixed = EdgeMask::empty(p);
    let mut r = DMatrix::identity(p, p);
    let mut k = DMatrix::identity(p, p);
    let mut delta = EdgeMask::empty(p);
    let mut fractions = Vec::with_capacity(n_iter);
    for t in 0..burn_in + n_iter {
        let mut step = || -> Result<()> {
            let d: Vec<f64> = (0..p)
                .map(|_| sample_inverse_gamma(shape, 0.5, rng).map(f64::sqrt))
                .collect::<Result<_>>()?;
            let mut omega = DMatrix::from_fn(p, p, |j, l| k[(j, l)] / (d[j] * d[l]));
            let mut sigma = DMatrix::from_fn(p, p, |j, l| r[(j, l)] * d[j] * d[l]);
            update_omega_ss(
                &mut omega,
                &mut sigma,
                &s,
                0,
                &delta,
                hyper,
                VSampling::ExactReweighted,
                rng,
            )?;
            let (new_r, sd) = project_back(&omega)?;
            r = new_r;
            k = DMatrix::from_fn(p, p, |j, l| sd[j] * sd[l] * omega[(j, l)]);
            delta = update_delta(&k, hyper, &fixed, rng);
            Ok(())
        };
        step().map_err(|e| e.at_iteration(t))?;
        if t >= burn_in {
            fractions.push(delta.count() as f64 / pairs);
        }
    }
    let mut sorted = fractions.clone();
    sorted.sort_by(f64::total_cmp);
    Ok(PriorEdgeSummary {
        median: quantile(&sorted, 0.5),
        lower: quantile(&sorted, 0.025),
        upper: quantile(&sorted, 0.975),
        fractions,
    })
}

/// Linear-interpolation quantile of sorted data.
pub(crate) fn quantile(sorted: &[f64], q: f64) -> f64 {
    if sorted.is_empty() {
        return f64::NAN;
    }
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    let frac = pos - lo as f64;
    sorted[lo] * (1.0 - frac) + sorted[hi] * frac
}
