//! Conditional updates for the latent values, scales, means and graph.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, RngCore};
use rayon::prelude::*;

use super::config::SpikeSlabHyper;
use super::state::{cell_interval, CorrelationState, EdgeMask};
use crate::data::MixedDataset;
use crate::distributions::{ess_step, sample_truncated_normal, std_normal, Interval};
use crate::error::{Error, Result};
use crate::linalg::{cholesky, spd_inverse};
use crate::rng::RngStream;

/// Resample every latent cell from its univariate conditional given the rest
/// of its row. Observed continuous cells are left untouched.
///
/// Rows are split into `row_blocks` contiguous blocks processed in parallel,
/// each with its own stream keyed by one draw from `rng`.
pub fn update_z<R: RngCore + ?Sized>(
    z: &mut DMatrix<f64>,
    data: &MixedDataset,
    mu: &DMatrix<f64>,
    y: &[usize],
    corr: &CorrelationState,
    row_blocks: usize,
    rng: &mut R,
) -> Result<()> {
    let (n, p) = (z.nrows(), z.ncols());
    if n == 0 {
        return Ok(());
    }
    let k = spd_inverse(&corr.latent_covariance(), "latent covariance")?;
    let sweep_seed = rng.next_u64();
    let blocks = row_blocks.clamp(1, n);
    let per_block = n.div_ceil(blocks);
    let z_ref = &*z;
    type Block = Result<Vec<(usize, Vec<f64>)>>;
    let rows: Vec<Block> = (0..blocks)
        .into_par_iter()
        .map(|b| {
            let mut stream = RngStream::new(sweep_seed, b as u64);
            let lo = b * per_block;
            let hi = ((b + 1) * per_block).min(n);
            let mut out = Vec::with_capacity(hi.saturating_sub(lo));
            for i in lo..hi {
                let mut row: Vec<f64> = (0..p).map(|j| z_ref[(i, j)]).collect();
                let m = mu.row(y[i]);
                for j in 0..p {
                    let Some(iv) = cell_interval(data, i, j) else {
                        continue;
                    };
                    let kjj = k[(j, j)];
                    let mut acc = 0.0;
                    for l in 0..p {
                        if l != j {
                            acc += k[(j, l)] * (row[l] - m[l]);
                        }
                    }
                    let mean = m[j] - acc / kjj;
                    let sd = 1.0 / kjj.sqrt();
                    row[j] = if iv == Interval::REAL_LINE {
                        mean + sd * std_normal(&mut stream)
                    } else {
                        sample_truncated_normal(mean, sd, iv, &mut stream)?
                    };
                }
                out.push((i, row));
            }
            Ok(out)
        })
        .collect();
    for block in rows {
        for (i, row) in block? {
            for (j, v) in row.into_iter().enumerate() {
                z[(i, j)] = v;
            }
        }
    }
    Ok(())
}

/// Resample Λ_jj for each continuous variable under a flat prior.
///
/// With `x = 1/Λ_jj`, `e_i = z_ij − μ_j` and the other standardized columns
/// held fixed, the conditional is `x^{n−2} · N(x; Σ e_i β_i / Σ e_i², τ² / Σ e_i²)`
/// on `x > 0`, where `β_i` and `τ²` are the regression mean and variance of the
/// standardized column j on the others.
pub fn update_lambda<R: Rng + ?Sized>(
    z: &DMatrix<f64>,
    data: &MixedDataset,
    mu: &DMatrix<f64>,
    y: &[usize],
    corr: &mut CorrelationState,
    rng: &mut R,
) -> Result<()> {
    let continuous = data.continuous_indices();
    let n = z.nrows();
    if continuous.is_empty() || n == 0 {
        return Ok(());
    }
    let p = z.ncols();
    let k = spd_inverse(&corr.r, "correlation matrix")?;
    let mut e = DMatrix::zeros(n, p);
    for i in 0..n {
        for j in 0..p {
            e[(i, j)] = z[(i, j)] - mu[(y[i], j)];
        }
    }
    for j in continuous {
        let kjj = k[(j, j)];
        let mut see = 0.0;
        let mut seb = 0.0;
        for i in 0..n {
            let mut acc = 0.0;
            for l in 0..p {
                if l != j {
                    acc += k[(j, l)] * e[(i, l)] / corr.lambda[l];
                }
            }
            let beta = -acc / kjj;
            see += e[(i, j)] * e[(i, j)];
            seb += e[(i, j)] * beta;
        }
        if see <= 0.0 {
            continue;
        }
        let m = seb / see;
        let s2 = 1.0 / (kjj * see);
        let power = n as f64 - 2.0;
        let log_target = move |x: f64| {
            if x > 0.0 {
                power * x.ln() - 0.5 * (x - m) * (x - m) / s2
            } else {
                f64::NEG_INFINITY
            }
        };
        // Reference: the normal factor recentred at the mode. The remainder
        // (n-2) ln x plus a linear term is concave, so the slice likelihood
        // has no runaway tail.
        let ref_mean = if power > 0.0 {
            0.5 * (m + (m * m + 4.0 * power * s2).sqrt())
        } else {
            m
        };
        let ref_sd = s2.sqrt();
        let mut log_lik =
            |x: &DVector<f64>| log_target(x[0]) + 0.5 * ((x[0] - ref_mean) / ref_sd).powi(2);
        let current = DVector::from_element(1, 1.0 / corr.lambda[j]);
        let (x, _) = ess_step(
            &current,
            None,
            &DVector::from_element(1, ref_mean),
            |r: &mut R| DVector::from_element(1, ref_sd * std_normal(r)),
            &mut log_lik,
            rng,
        )
        .map_err(|err| Error::Sampler(format!("scale of variable {j}: {err}")))?;
        corr.lambda[j] = 1.0 / x[0];
    }
    Ok(())
}

/// Draw each class mean from its conjugate normal conditional
/// `N(P⁻¹(σ_c⁻² μ0_c + K̃ Σ_{i∈c} Z_i), P⁻¹)` with `P = σ_c⁻² I + n_c K̃`
/// and `K̃ = (ΛRΛ)⁻¹`. Empty classes draw from their prior.
pub fn update_mu<R: Rng + ?Sized>(
    z: &DMatrix<f64>,
    y: &[usize],
    mu0: &DMatrix<f64>,
    sigma2: &[f64],
    corr: &CorrelationState,
    rng: &mut R,
) -> Result<DMatrix<f64>> {
    let (classes, p) = (mu0.nrows(), mu0.ncols());
    let k = spd_inverse(&corr.latent_covariance(), "latent covariance")?;
    let mut sums = DMatrix::<f64>::zeros(classes, p);
    let mut counts = vec![0usize; classes];
    for (i, &c) in y.iter().enumerate() {
        counts[c] += 1;
        for j in 0..p {
            sums[(c, j)] += z[(i, j)];
        }
    }
    let mut out = DMatrix::zeros(classes, p);
    for c in 0..classes {
        let prec0 = 1.0 / sigma2[c];
        let prior_mean: DVector<f64> = mu0.row(c).transpose();
        let draw = if counts[c] == 0 {
            let sd = sigma2[c].sqrt();
            DVector::from_fn(p, |j, _| prior_mean[j] + sd * std_normal(rng))
        } else {
            let mut prec = &k * counts[c] as f64;
            for j in 0..p {
                prec[(j, j)] += prec0;
            }
            let chol = cholesky(&prec, "class-mean precision")?;
            let rhs = &prior_mean * prec0 + &k * sums.row(c).transpose();
            let mean = chol.solve(&rhs);
            let e = DVector::from_fn(p, |_, _| std_normal(rng));
            let dev = chol
                .l()
                .transpose()
                .solve_upper_triangular(&e)
                .ok_or_else(|| Error::Decomposition("class-mean precision factor".into()))?;
            mean + dev
        };
        out.set_row(c, &draw.transpose());
    }
    Ok(out)
}

/// Posterior probability that an edge is in the slab given its inverse
/// correlation entry.
pub fn inclusion_probability(r_inv_jk: f64, hyper: &SpikeSlabHyper) -> f64 {
    if hyper.pi_delta >= 1.0 {
        return 1.0;
    }
    let log_slab = hyper.pi_delta.ln() - 0.5 * (r_inv_jk / hyper.v1).powi(2) - hyper.v1.ln();
    let log_spike =
        (-hyper.pi_delta).ln_1p() - 0.5 * (r_inv_jk / hyper.v0).powi(2) - hyper.v0.ln();
    let t = log_slab - log_spike;
    if t >= 0.0 {
        1.0 / (1.0 + (-t).exp())
    } else {
        let e = t.exp();
        e / (1.0 + e)
    }
}

/// Draw every free edge indicator given the inverse correlation matrix;
/// fixed edges stay in the graph.
pub fn update_delta<R: Rng + ?Sized>(
    r_inv: &DMatrix<f64>,
    hyper: &SpikeSlabHyper,
    fixed_edges: &EdgeMask,
    rng: &mut R,
) -> EdgeMask {
    let p = r_inv.nrows();
    let mut delta = EdgeMask::empty(p);
    for j in 0..p {
        for k in (j + 1)..p {
            let on = fixed_edges.get(j, k) || {
                let u: f64 = rng.gen();
                u < inclusion_probability(r_inv[(j, k)], hyper)
            };
            delta.set(j, k, on);
        }
    }
    delta
}
