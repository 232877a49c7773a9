use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

use super::config::{ChainConfig, MarginalPrior, PriorKind, SpikeSlabHyper};
use super::expansion::correlation_step;
use super::state::{init_state, EdgeMask, ModelState};
use super::updates::{update_delta, update_lambda, update_mu, update_z};
use crate::data::MixedDataset;
use crate::error::{Error, Result};
use crate::rng::RngStream;

/// Saved draws, kept only when [`ChainConfig::keep_draws`] is set.
#[derive(Clone, Debug, Default)]
pub struct Draws {
    pub r: Vec<DMatrix<f64>>,
    pub mu: Vec<DMatrix<f64>>,
    pub lambda: Vec<DVector<f64>>,
    pub delta: Vec<EdgeMask>,
}

/// Per-iteration scalar series for one chain.
#[derive(Clone, Debug, Default)]
pub struct ChainTrace {
    /// Number of edges in δ after every sweep.
    pub edges: Vec<usize>,
    /// Mean absolute off-diagonal correlation after every sweep.
    pub mean_abs_r: Vec<f64>,
}

/// Posterior summaries pooled over the saved draws of all chains.
#[derive(Clone, Debug)]
pub struct ChainOutput {
    pub n_saved: usize,
    pub posterior_mean_r: DMatrix<f64>,
    /// C×p; one row for the single-class model.
    pub posterior_mean_mu: DMatrix<f64>,
    pub posterior_mean_lambda: DVector<f64>,
    /// Posterior mean of the partial correlations −r^{jk} / sqrt(r^{jj} r^{kk}).
    pub posterior_mean_partial: DMatrix<f64>,
    /// Frequency of δ_jk = 1 over the saved draws.
    pub inclusion_prob: DMatrix<f64>,
    pub traces: Vec<ChainTrace>,
    pub draws: Option<Vec<Draws>>,
}

#[derive(Clone, Debug)]
pub(crate) struct Accumulator {
    count: usize,
    r: DMatrix<f64>,
    mu: DMatrix<f64>,
    lambda: DVector<f64>,
    partial: DMatrix<f64>,
    incl: DMatrix<f64>,
    trace: ChainTrace,
    draws: Option<Draws>,
}

impl Accumulator {
    pub(crate) fn new(p: usize, classes: usize, keep_draws: bool) -> Self {
        Self {
            count: 0,
            r: DMatrix::zeros(p, p),
            mu: DMatrix::zeros(classes, p),
            lambda: DVector::zeros(p),
            partial: DMatrix::zeros(p, p),
            incl: DMatrix::zeros(p, p),
            trace: ChainTrace::default(),
            draws: keep_draws.then(Draws::default),
        }
    }

    pub(crate) fn record_trace(&mut self, state: &ModelState) {
        let p = state.corr.r.nrows();
        let pairs = (p * p.saturating_sub(1) / 2).max(1) as f64;
        let mut s = 0.0;
        for j in 0..p {
            for k in (j + 1)..p {
                s += state.corr.r[(j, k)].abs();
            }
        }
        self.trace.edges.push(state.corr.delta.count());
        self.trace.mean_abs_r.push(s / pairs);
    }

    pub(crate) fn save(&mut self, state: &ModelState, r_inv: &DMatrix<f64>) {
        let p = state.corr.r.nrows();
        self.count += 1;
        self.r += &state.corr.r;
        self.mu += &state.mu;
        self.lambda += &state.corr.lambda;
        for j in 0..p {
            for k in 0..p {
                if j == k {
                    self.partial[(j, k)] += 1.0;
                } else {
                    self.partial[(j, k)] -= r_inv[(j, k)] / (r_inv[(j, j)] * r_inv[(k, k)]).sqrt();
                    if state.corr.delta.get(j, k) {
                        self.incl[(j, k)] += 1.0;
                    }
                }
            }
        }
        if let Some(d) = &mut self.draws {
            d.r.push(state.corr.r.clone());
            d.mu.push(state.mu.clone());
            d.lambda.push(state.corr.lambda.clone());
            d.delta.push(state.corr.delta.clone());
        }
    }

    /// Pool several chains into posterior means.
    pub(crate) fn finish(parts: Vec<Accumulator>) -> ChainOutput {
        let total: usize = parts.iter().map(|a| a.count).sum();
        let first = &parts[0];
        let mut r = DMatrix::zeros(first.r.nrows(), first.r.ncols());
        let mut mu = DMatrix::zeros(first.mu.nrows(), first.mu.ncols());
        let mut lambda = DVector::zeros(first.lambda.len());
        let mut partial = r.clone();
        let mut incl = r.clone();
        for a in &parts {
            r += &a.r;
            mu += &a.mu;
            lambda += &a.lambda;
            partial += &a.partial;
            incl += &a.incl;
        }
        let t = total.max(1) as f64;
        let keep = parts.iter().all(|a| a.draws.is_some());
        let (traces, draws): (Vec<_>, Vec<_>) =
            parts.into_iter().map(|a| (a.trace, a.draws)).unzip();
        ChainOutput {
            n_saved: total,
            posterior_mean_r: r / t,
            posterior_mean_mu: mu / t,
            posterior_mean_lambda: lambda / t,
            posterior_mean_partial: partial / t,
            inclusion_prob: incl / t,
            traces,
            draws: keep.then(|| draws.into_iter().map(Option::unwrap).collect()),
        }
    }
}

/// The lggm part of one Gibbs sweep, shared by the single-class model and
/// the mixture classifier. Class assignments and class-mean prior variances
/// are read from the state and left untouched.
pub(crate) struct Sweeper<'a> {
    pub data: &'a MixedDataset,
    pub mu0: &'a DMatrix<f64>,
    pub cfg: &'a ChainConfig,
    pub hyper: &'a SpikeSlabHyper,
    pub freeze_delta: bool,
}

impl Sweeper<'_> {
    /// Z → Λ → μ → expanded R update → δ. Returns R⁻¹ after the update.
    pub(crate) fn sweep(&self, s: &mut ModelState, rng: &mut RngStream) -> Result<DMatrix<f64>> {
        update_z(&mut s.z, self.data, &s.mu, &s.y, &s.corr, self.cfg.row_blocks, rng)?;
        update_lambda(&s.z, self.data, &s.mu, &s.y, &mut s.corr, rng)?;
        s.mu = update_mu(&s.z, &s.y, self.mu0, &s.sigma2, &s.corr, rng)?;
        let r_inv = correlation_step(s, self.data, self.mu0, self.cfg, self.hyper, rng)?;
        if self.cfg.prior_kind == PriorKind::SpikeSlab && !self.freeze_delta {
            s.corr.delta = update_delta(&r_inv, self.hyper, &s.corr.fixed_edges, rng);
        }
        Ok(r_inv)
    }
}

fn check_inputs(
    data: &MixedDataset,
    prior: &MarginalPrior,
    hyper: &SpikeSlabHyper,
    cfg: &ChainConfig,
    fixed_edges: &EdgeMask,
) -> Result<()> {
    cfg.validate()?;
    hyper.validate()?;
    prior.validate()?;
    if prior.mu0.len() != data.p() {
        return Err(Error::Config(format!(
            "prior has {} means, data has {} variables",
            prior.mu0.len(),
            data.p()
        )));
    }
    if fixed_edges.p() != data.p() {
        return Err(Error::Config("fixed-edge mask does not match the data".into()));
    }
    Ok(())
}

fn single_chain(
    data: &MixedDataset,
    prior: &MarginalPrior,
    hyper: &SpikeSlabHyper,
    cfg: &ChainConfig,
    fixed_edges: &EdgeMask,
    frozen: Option<&EdgeMask>,
    chain: usize,
) -> Result<Accumulator> {
    let mut rng = RngStream::new(cfg.seed, chain as u64);
    let mu0 = DMatrix::from_row_slice(1, data.p(), prior.mu0.as_slice());
    let mut state = init_state(data, &mu0, vec![0; data.n()], vec![prior.sigma2], fixed_edges, &mut rng)?;
    if let Some(g) = frozen {
        state.corr.delta = g.union(fixed_edges);
    }
    let sweeper = Sweeper {
        data,
        mu0: &mu0,
        cfg,
        hyper,
        freeze_delta: frozen.is_some(),
    };
    let mut acc = Accumulator::new(data.p(), 1, cfg.keep_draws);
    for t in 0..cfg.n_iter {
        let r_inv = sweeper.sweep(&mut state, &mut rng).map_err(|e| e.at_iteration(t))?;
        acc.record_trace(&state);
        if cfg.is_saved(t) {
            acc.save(&state, &r_inv);
        }
    }
    Ok(acc)
}

/// Run `cfg.n_chains` independent chains of the single-class model in
/// parallel and pool their saved draws.
///
/// Chain c uses the stream `(cfg.seed, c)`. With `cfg.two_stage`, a second
/// round of chains runs with δ frozen at the first-round median graph
/// (inclusion probability above one half).
pub fn run_chain(
    data: &MixedDataset,
    prior: &MarginalPrior,
    hyper: &SpikeSlabHyper,
    cfg: &ChainConfig,
    fixed_edges: &EdgeMask,
) -> Result<ChainOutput> {
    check_inputs(data, prior, hyper, cfg, fixed_edges)?;
    let run = |frozen: Option<&EdgeMask>, offset: usize| -> Result<ChainOutput> {
        let parts: Result<Vec<Accumulator>> = (0..cfg.n_chains)
            .into_par_iter()
            .map(|c| single_chain(data, prior, hyper, cfg, fixed_edges, frozen, offset + c))
            .collect();
        Ok(Accumulator::finish(parts?))
    };
    let first = run(None, 0)?;
    if !cfg.two_stage || cfg.prior_kind != PriorKind::SpikeSlab {
        return Ok(first);
    }
    let graph = median_graph(&first.inclusion_prob);
    run(Some(&graph), cfg.n_chains)
}

/// Edges whose inclusion probability exceeds one half.
pub fn median_graph(inclusion_prob: &DMatrix<f64>) -> EdgeMask {
    let p = inclusion_prob.nrows();
    let mut g = EdgeMask::empty(p);
    for j in 0..p {
        for k in (j + 1)..p {
            if inclusion_prob[(j, k)] > 0.5 {
                g.set(j, k, true);
            }
        }
    }
    g
}
