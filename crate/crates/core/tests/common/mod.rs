//! Shared helpers for the integration tests.
#![allow(dead_code)]

use lggm::data::{MixedDataset, VariableSchema};
use lggm::distributions::{normal_cdf, normal_sf, std_normal};
use lggm::model::{run_chain, ChainConfig, EdgeMask, MarginalPrior, PriorKind, SpikeSlabHyper, VSampling};
use lggm::RngStream;
use nalgebra::DVector;
use rayon::prelude::*;

/// Monte Carlo standard error of a series mean by non-overlapping batch means.
pub fn batch_means_se(series: &[f64], batches: usize) -> f64 {
    let size = series.len() / batches;
    let means: Vec<f64> = (0..batches)
        .map(|b| series[b * size..(b + 1) * size].iter().sum::<f64>() / size as f64)
        .collect();
    let m = means.iter().sum::<f64>() / batches as f64;
    let var = means.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (batches - 1) as f64;
    (var / batches as f64).sqrt()
}

pub fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

fn log_phi_cdf(x: f64) -> f64 {
    if x > -5.0 {
        normal_cdf(x).ln()
    } else {
        // Right-tail form keeps precision where Φ(x) underflows.
        normal_sf(-x).ln()
    }
}

/// Brute-force posterior of the two-variable model (binary x1, continuous z2)
/// on a rectangular grid over (μ1, ρ, μ2, Λ2), with the latent binary value
/// integrated out analytically:
///
/// p(x1 = 1 | z2) = Φ((μ1 + ρ y2) / sqrt(1 − ρ²)),  y2 = (z2 − μ2) / Λ2.
///
/// Priors: μ ~ N(μ0, σ² I), flat on Λ2, and `log_prior_rho` on ρ.
/// Returns posterior means of (μ1, ρ, μ2, Λ2) and the mass on the grid edge.
pub struct GridOracle {
    pub mu1: (f64, f64, usize),
    pub rho: (f64, f64, usize),
    pub mu2: (f64, f64, usize),
    pub lam: (f64, f64, usize),
}

fn axis((lo, hi, n): (f64, f64, usize)) -> Vec<f64> {
    (0..n).map(|k| lo + (hi - lo) * k as f64 / (n - 1) as f64).collect()
}

impl GridOracle {
    pub fn posterior_means(
        &self,
        x1: &[bool],
        z2: &[f64],
        mu0: [f64; 2],
        sigma2: f64,
        log_prior_rho: impl Fn(f64) -> f64 + Sync,
    ) -> ([f64; 4], f64) {
        let (m1, rr, m2, ll) = (axis(self.mu1), axis(self.rho), axis(self.mu2), axis(self.lam));
        // log density per (rho, mu2, lam, mu1), flattened with rho outermost.
        let blocks: Vec<Vec<f64>> = rr
            .par_iter()
            .map(|&rho| {
                let lp_rho = log_prior_rho(rho);
                let sr = (1.0 - rho * rho).sqrt();
                let mut out = Vec::with_capacity(m2.len() * ll.len() * m1.len());
                let mut y = vec![0.0; z2.len()];
                for &b in &m2 {
                    for &lam in &ll {
                        let mut base = lp_rho - (b - mu0[1]).powi(2) / (2.0 * sigma2);
                        for (i, &z) in z2.iter().enumerate() {
                            y[i] = (z - b) / lam;
                            base += -0.5 * y[i] * y[i] - lam.ln();
                        }
                        for &a in &m1 {
                            let mut lp = base - (a - mu0[0]).powi(2) / (2.0 * sigma2);
                            for (i, &x) in x1.iter().enumerate() {
                                let t = (a + rho * y[i]) / sr;
                                lp += log_phi_cdf(if x { t } else { -t });
                            }
                            out.push(lp);
                        }
                    }
                }
                out
            })
            .collect();
        let max = blocks
            .iter()
            .flat_map(|b| b.iter())
            .fold(f64::NEG_INFINITY, |m, &v| m.max(v));
        let mut total = 0.0;
        let mut sums = [0.0; 4];
        let mut edge = 0.0;
        for (ir, block) in blocks.iter().enumerate() {
            let mut k = 0;
            for (i2, &b) in m2.iter().enumerate() {
                for (il, &lam) in ll.iter().enumerate() {
                    for (i1, &a) in m1.iter().enumerate() {
                        let w = (block[k] - max).exp();
                        k += 1;
                        total += w;
                        sums[0] += w * a;
                        sums[1] += w * rr[ir];
                        sums[2] += w * b;
                        sums[3] += w * lam;
                        let on_edge = |i: usize, n: usize| i == 0 || i == n - 1;
                        if on_edge(i1, m1.len())
                            || on_edge(i2, m2.len())
                            || on_edge(il, ll.len())
                            || (on_edge(ir, rr.len()) && rr[ir].abs() < 0.97)
                        {
                            edge += w;
                        }
                    }
                }
            }
        }
        (sums.map(|s| s / total), edge / total)
    }
}

pub struct Instance {
    pub data: MixedDataset,
    pub x1: Vec<bool>,
    pub z2: Vec<f64>,
}

/// Two-variable instance: n = 50, ρ = 0.6, μ = (0.3, 0.5), Λ2 = 1.5.
pub fn instance(seed: u64) -> Instance {
    let (n, rho, mu, lam): (usize, f64, [f64; 2], f64) = (50, 0.6, [0.3, 0.5], 1.5);
    let mut rng = RngStream::new(seed, 0);
    let mut x1 = Vec::new();
    let mut z2 = Vec::new();
    for _ in 0..n {
        let a = std_normal(&mut rng);
        let b = rho * a + (1.0 - rho * rho).sqrt() * std_normal(&mut rng);
        x1.push(a + mu[0] > 0.0);
        z2.push(mu[1] + lam * b);
    }
    let rows = x1
        .iter()
        .zip(&z2)
        .map(|(&x, &z)| vec![Some(if x { 1.0 } else { 0.0 }), Some(z)])
        .collect();
    let schema = vec![VariableSchema::binary("x1"), VariableSchema::continuous("z2", None)];
    Instance {
        data: MixedDataset::new(schema, rows).unwrap(),
        x1,
        z2,
    }
}

pub fn oracle_grid(z2: &[f64]) -> GridOracle {
    let m = mean(z2);
    let sd = (z2.iter().map(|z| (z - m).powi(2)).sum::<f64>() / (z2.len() - 1) as f64).sqrt();
    GridOracle {
        mu1: (-1.3, 1.9, 49),
        rho: (-0.985, 0.985, 80),
        mu2: (m - 5.0 * sd / 7.0, m + 5.0 * sd / 7.0, 33),
        lam: (0.55 * sd, 1.7 * sd, 33),
    }
}

/// Posterior mean, quadrature value and batch-means standard error of one
/// parameter.
pub struct OracleComparison {
    pub name: &'static str,
    pub chain: f64,
    pub exact: f64,
    pub se: f64,
}

impl OracleComparison {
    pub fn z(&self) -> f64 {
        (self.chain - self.exact) / self.se
    }
}

/// Run a 60k-sweep chain on the seed-2024 instance and compare the posterior
/// means of (μ1, ρ, μ2, Λ2) with grid quadrature under `log_prior_rho`.
pub fn oracle_compare(
    prior_kind: PriorKind,
    hyper: SpikeSlabHyper,
    log_prior_rho: impl Fn(f64) -> f64 + Sync,
) -> Vec<OracleComparison> {
    let inst = instance(2024);
    let mu0 = [0.2, 0.4];
    let (exact, edge) = oracle_grid(&inst.z2).posterior_means(&inst.x1, &inst.z2, mu0, 1.0, log_prior_rho);
    assert!(edge < 1e-4, "grid edge mass {edge}");
    let cfg = ChainConfig {
        n_iter: 60_000,
        burn_in: 5_000,
        prior_kind,
        v_sampling: VSampling::ExactReweighted,
        keep_draws: true,
        seed: 99,
        row_blocks: 1,
        ..Default::default()
    };
    let prior = MarginalPrior::new(DVector::from_row_slice(&mu0), 1.0).unwrap();
    let out = run_chain(&inst.data, &prior, &hyper, &cfg, &EdgeMask::empty(2)).unwrap();
    let d = &out.draws.unwrap()[0];
    let series = [
        d.mu.iter().map(|m| m[(0, 0)]).collect::<Vec<_>>(),
        d.r.iter().map(|r| r[(0, 1)]).collect(),
        d.mu.iter().map(|m| m[(0, 1)]).collect(),
        d.lambda.iter().map(|l| l[1]).collect(),
    ];
    ["mu1", "rho", "mu2", "lambda2"]
        .into_iter()
        .enumerate()
        .map(|(k, name)| OracleComparison {
            name,
            chain: mean(&series[k]),
            exact: exact[k],
            se: batch_means_se(&series[k], 50),
        })
        .collect()
}

/// Implied prior on ρ for p = 2 under the spike-and-slab prior: the
/// spike/slab mixture on r^{12}, exp(−λ r^{jj}/2) per diagonal entry and
/// |R|^{−(p+1)}.
pub fn spike_slab_log_prior_rho(h: SpikeSlabHyper) -> impl Fn(f64) -> f64 + Sync {
    move |rho| {
        let det = 1.0 - rho * rho;
        let r12 = -rho / det;
        let r11 = 1.0 / det;
        let comp = |v: f64, w: f64| w * (-0.5 * (r12 / v).powi(2)).exp() / v;
        let mix = comp(h.v1, h.pi_delta) + comp(h.v0, 1.0 - h.pi_delta);
        mix.ln() - h.lambda * r11 - 3.0 * det.ln()
    }
}

/// Moderate spike-and-slab settings under which a p = 2 chain moves between
/// spike and slab within a test budget.
pub fn mixing_hyper() -> SpikeSlabHyper {
    SpikeSlabHyper {
        v0: 0.3,
        v1: 3.0,
        lambda: 1.0,
        pi_delta: 0.5,
    }
}
