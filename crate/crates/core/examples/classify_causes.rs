//! Assign unlabeled rows to classes and estimate the class fractions.
//!
//! Each class comes with a table of P(variable = 1 | class). The latent
//! mixture model shares one correlation matrix across classes, which the
//! conditional-independence baseline cannot represent.

use lggm::distributions::normal_cdf;
use lggm::metrics::{csmf_accuracy, top_k_accuracy};
use lggm::mixture::{naive_bayes_classify, run_classifier, ClassifierConfig, ConditionalProbabilityPrior};
use lggm::model::{ChainConfig, EdgeMask, SpikeSlabHyper};
use lggm::simgen::{simulate, SimScenario};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let classes = 4;
    let p = 15;
    let sim = simulate(&SimScenario {
        n: 200,
        p,
        n_classes: classes,
        seed: 8,
        ..SimScenario::default()
    })?;

    // The table a domain expert would supply: here, the truth.
    let binary: Vec<bool> = (0..p).map(|j| sim.data.is_binary(j)).collect();
    let prior = ConditionalProbabilityPrior::new(sim.truth.mu0.map(normal_cdf), binary)?
        .with_continuous_means(sim.truth.mu0.clone())?
        .clamped((0.5, 0.5))?;

    // Reveal a quarter of the labels.
    let data = sim.labeled(|i| i % 4 == 0)?;
    let cfg = ClassifierConfig {
        chain: ChainConfig {
            n_iter: 400,
            burn_in: 200,
            seed: 8,
            ..ChainConfig::default()
        },
        ..ClassifierConfig::default()
    };
    let (out, _) = run_classifier(&data, &prior, &SpikeSlabHyper::default(), &cfg, &EdgeMask::empty(p))?;
    let nb = naive_bayes_classify(&sim.data, &prior, &vec![1.0 / classes as f64; classes])?;

    println!("class   true    model  [95% interval]   naive Bayes");
    for c in 0..classes {
        println!(
            "{:<6} {:.3}   {:.3}  [{:.3}, {:.3}]   {:.3}",
            out.class_names[c], sim.truth.pi[c], out.csmf_mean[c], out.csmf_ci[c].0, out.csmf_ci[c].1, nb.csmf[c]
        );
    }
    println!(
        "CSMF accuracy: model {:.3}, naive Bayes {:.3}",
        csmf_accuracy(&out.csmf_mean, &sim.truth.pi)?,
        csmf_accuracy(&nb.csmf, &sim.truth.pi)?
    );

    let unlabeled: Vec<usize> = (0..sim.data.n()).filter(|i| i % 4 != 0).collect();
    let probs = out.individual_probs.select_rows(&unlabeled);
    let truth: Vec<usize> = unlabeled.iter().map(|&i| sim.truth.labels[i]).collect();
    println!(
        "top-1 accuracy on unlabeled rows {:.3}, top-2 {:.3}",
        top_k_accuracy(&probs, &truth, 1)?,
        top_k_accuracy(&probs, &truth, 2)?
    );
    Ok(())
}

#[allow(dead_code)]
fn main() {
    if let Err(e) = run_example() {
        eprintln!("{e}");
        std::process::exit(1);
    }
}
