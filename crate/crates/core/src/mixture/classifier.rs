use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::condprob::ConditionalProbabilityPrior;
use super::naive_bayes::naive_bayes_classify;
use super::updates::{
    assignment_probabilities, sample_class, update_assignments, update_csmf, update_sigma2_c, CsmfState,
};
use crate::data::MixedDataset;
use crate::error::{Error, Result};
use crate::model::{
    init_state, quantile, Accumulator, ChainConfig, ChainOutput, EdgeMask, SpikeSlabHyper, Sweeper,
};
use crate::rng::RngStream;

/// How the prior variance of each class mean is handled.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SigmaMode {
    /// Keep σ_c² at this value for every class.
    Fixed(f64),
    /// σ_c² ~ InvGamma(0.001, 0.001), updated every sweep.
    Hyper,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClassifierConfig {
    pub chain: ChainConfig,
    pub sigma_mode: SigmaMode,
    /// Weight assignment probabilities by π_c. Switching this off gives the
    /// assignment rule that uses the class densities alone.
    pub include_pi: bool,
    /// Give labeled rows their own class fractions so they do not inform the
    /// unlabeled population.
    pub split_populations: bool,
}

impl Default for ClassifierConfig {
    fn default() -> Self {
        Self {
            chain: ChainConfig::default(),
            sigma_mode: SigmaMode::Hyper,
            include_pi: true,
            split_populations: false,
        }
    }
}

#[derive(Clone, Debug)]
pub struct ClassificationOutput {
    pub class_names: Vec<String>,
    /// n×C posterior class probabilities; labeled rows are one-hot.
    pub individual_probs: DMatrix<f64>,
    /// Posterior mean class fractions of the unlabeled population.
    pub csmf_mean: DVector<f64>,
    /// 2.5% and 97.5% posterior quantiles per class.
    pub csmf_ci: Vec<(f64, f64)>,
    /// Saved fraction draws pooled over chains.
    pub csmf_draws: Vec<DVector<f64>>,
    /// Per chain, the fraction vector after every sweep.
    pub traces: Vec<Vec<DVector<f64>>>,
}

impl ClassificationOutput {
    /// Most probable class of each row, ties to the lower index.
    pub fn map_classes(&self) -> Vec<usize> {
        self.individual_probs
            .row_iter()
            .map(|r| {
                let mut best = 0;
                for c in 1..r.len() {
                    if r[c] > r[best] {
                        best = c;
                    }
                }
                best
            })
            .collect()
    }

    /// Trace of one class fraction for every chain, dropping `burn_in` sweeps.
    pub fn class_trace(&self, class: usize, burn_in: usize) -> Vec<Vec<f64>> {
        self.traces
            .iter()
            .map(|t| t.iter().skip(burn_in).map(|v| v[class]).collect())
            .collect()
    }
}

struct ChainResult {
    acc: Accumulator,
    prob_sum: DMatrix<f64>,
    saved: usize,
    csmf_draws: Vec<DVector<f64>>,
    trace: Vec<DVector<f64>>,
}

/// Fit the latent Gaussian mixture to rows with and without class labels.
///
/// All classes share one latent correlation matrix; class means are centred
/// at the probit of `prior`. Unlabeled rows get posterior class
/// probabilities averaged over the saved draws and the class fractions of the
/// unlabeled population are reported as the CSMF.
pub fn run_classifier(
    data: &MixedDataset,
    prior: &ConditionalProbabilityPrior,
    hyper: &SpikeSlabHyper,
    cfg: &ClassifierConfig,
    fixed_edges: &EdgeMask,
) -> Result<(ClassificationOutput, ChainOutput)> {
    cfg.chain.validate()?;
    hyper.validate()?;
    let classes = prior.n_classes();
    if classes < 2 {
        return Err(Error::Config("classification needs at least two classes".into()));
    }
    if prior.probs.ncols() != data.p() {
        return Err(Error::Config(format!(
            "prior has {} variables, data has {}",
            prior.probs.ncols(),
            data.p()
        )));
    }
    if (0..data.p()).any(|j| prior.binary[j] != data.is_binary(j)) {
        return Err(Error::Config("prior and data disagree on which variables are binary".into()));
    }
    if let SigmaMode::Fixed(v) = cfg.sigma_mode {
        if !(v > 0.0 && v.is_finite()) {
            return Err(Error::InvalidParameter(format!("fixed class-mean variance {v} must be positive")));
        }
    }
    if fixed_edges.p() != data.p() {
        return Err(Error::Config("fixed-edge mask does not match the data".into()));
    }
    let labeled = data.labeled_mask();
    if labeled.iter().all(|&l| l) {
        return Err(Error::Config("every row is labeled; nothing to classify".into()));
    }
    if !data.class_names().is_empty() && data.class_names().len() != classes {
        return Err(Error::Config(format!(
            "data declares {} classes, prior has {classes}",
            data.class_names().len()
        )));
    }
    let mu0 = prior.build_mu0()?;
    let class_names = if data.class_names().is_empty() {
        (1..=classes).map(|c| format!("class{c}")).collect()
    } else {
        data.class_names().to_vec()
    };

    let parts: Vec<ChainResult> = (0..cfg.chain.n_chains)
        .into_par_iter()
        .map(|c| classifier_chain(data, prior, &mu0, &labeled, hyper, cfg, fixed_edges, c))
        .collect::<Result<_>>()?;

    let (n, total_saved) = (data.n(), parts.iter().map(|p| p.saved).sum::<usize>());
    let mut probs = DMatrix::zeros(n, classes);
    let mut csmf_draws = Vec::new();
    let mut traces = Vec::new();
    let mut accs = Vec::new();
    for part in parts {
        probs += part.prob_sum;
        csmf_draws.extend(part.csmf_draws);
        traces.push(part.trace);
        accs.push(part.acc);
    }
    probs /= total_saved.max(1) as f64;
    if let Some(l) = data.labels() {
        for (i, label) in l.iter().enumerate() {
            if let Some(c) = label {
                probs.row_mut(i).fill(0.0);
                probs[(i, *c)] = 1.0;
            }
        }
    }
    let mut csmf_mean = DVector::zeros(classes);
    for d in &csmf_draws {
        csmf_mean += d;
    }
    csmf_mean /= csmf_draws.len().max(1) as f64;
    let csmf_ci = (0..classes)
        .map(|c| {
            let mut v: Vec<f64> = csmf_draws.iter().map(|d| d[c]).collect();
            v.sort_by(f64::total_cmp);
            (quantile(&v, 0.025), quantile(&v, 0.975))
        })
        .collect();
    Ok((
        ClassificationOutput {
            class_names,
            individual_probs: probs,
            csmf_mean,
            csmf_ci,
            csmf_draws,
            traces,
        },
        Accumulator::finish(accs),
    ))
}

#[allow(clippy::too_many_arguments)]
fn classifier_chain(
    data: &MixedDataset,
    prior: &ConditionalProbabilityPrior,
    mu0: &DMatrix<f64>,
    labeled: &[bool],
    hyper: &SpikeSlabHyper,
    cfg: &ClassifierConfig,
    fixed_edges: &EdgeMask,
    chain: usize,
) -> Result<ChainResult> {
    let ccfg = &cfg.chain;
    let classes = mu0.nrows();
    let mut rng = RngStream::new(ccfg.seed, chain as u64);

    // Start assignments from the conditional-independence classifier.
    let uniform = vec![1.0 / classes as f64; classes];
    let start = naive_bayes_classify(data, prior, &uniform)?;
    let labels = data.labels();
    let y: Vec<usize> = (0..data.n())
        .map(|i| match labels.and_then(|l| l[i]) {
            Some(c) => c,
            None => sample_class(start.probs.row(i).iter().copied(), &mut rng),
        })
        .collect();
    let sigma0 = match cfg.sigma_mode {
        SigmaMode::Fixed(v) => v,
        SigmaMode::Hyper => 1.0,
    };
    let mut state = init_state(data, mu0, y, vec![sigma0; classes], fixed_edges, &mut rng)?;
    // The CSMF starts at the fractions implied by the starting assignments, so
    // that π and y agree from the first sweep.
    let fractions = |pick: bool| {
        let mut counts = vec![0.0; classes];
        for (i, &c) in state.y.iter().enumerate() {
            if labeled[i] == pick || !cfg.split_populations {
                counts[c] += 1.0;
            }
        }
        let total: f64 = counts.iter().sum();
        counts.iter().map(|c| c / total.max(1.0)).collect::<Vec<f64>>()
    };
    let mut unlabeled_csmf = CsmfState::from_fractions(&fractions(false));
    let mut labeled_csmf = CsmfState::from_fractions(&fractions(true));
    let has_labeled = labeled.iter().any(|&l| l);

    let sweeper = Sweeper {
        data,
        mu0,
        cfg: ccfg,
        hyper,
        freeze_delta: false,
    };
    let mut acc = Accumulator::new(data.p(), classes, ccfg.keep_draws);
    let mut out = ChainResult {
        acc: Accumulator::new(0, 0, false),
        prob_sum: DMatrix::zeros(data.n(), classes),
        saved: 0,
        csmf_draws: Vec::new(),
        trace: Vec::with_capacity(ccfg.n_iter),
    };
    for t in 0..ccfg.n_iter {
        let mut sweep = || -> Result<_> {
            let r_inv = sweeper.sweep(&mut state, &mut rng)?;
            if cfg.sigma_mode == SigmaMode::Hyper {
                state.sigma2 = update_sigma2_c(&state.mu, mu0, &mut rng)?;
            }
            let pi = unlabeled_csmf.pi();
            let probs = assignment_probabilities(&state.z, &state.mu, &state.corr, cfg.include_pi.then_some(&pi))?;
            update_assignments(&probs, labeled, &mut state.y, &mut rng);
            let mut unlabeled_counts = vec![0usize; classes];
            let mut labeled_counts = vec![0usize; classes];
            for (i, &c) in state.y.iter().enumerate() {
                if labeled[i] {
                    labeled_counts[c] += 1;
                } else {
                    unlabeled_counts[c] += 1;
                }
            }
            if cfg.split_populations {
                update_csmf(&mut unlabeled_csmf, &unlabeled_counts, &mut rng)?;
                if has_labeled {
                    update_csmf(&mut labeled_csmf, &labeled_counts, &mut rng)?;
                }
            } else {
                let all: Vec<usize> = unlabeled_counts.iter().zip(&labeled_counts).map(|(a, b)| a + b).collect();
                update_csmf(&mut unlabeled_csmf, &all, &mut rng)?;
            }
            Ok((r_inv, probs))
        };
        let (r_inv, probs) = sweep().map_err(|e| e.at_iteration(t))?;
        let pi = unlabeled_csmf.pi();
        acc.record_trace(&state);
        if ccfg.is_saved(t) {
            acc.save(&state, &r_inv);
            out.prob_sum += probs;
            out.saved += 1;
            out.csmf_draws.push(pi.clone());
        }
        out.trace.push(pi);
    }
    out.acc = acc;
    Ok(out)
}
