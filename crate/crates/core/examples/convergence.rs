//! Run several classifier chains from different starting points and check
//! that their class-fraction traces agree.

use lggm::distributions::normal_cdf;
use lggm::metrics::gelman_rubin;
use lggm::mixture::{run_classifier, ClassifierConfig, ConditionalProbabilityPrior};
use lggm::model::{ChainConfig, EdgeMask, SpikeSlabHyper};
use lggm::simgen::{simulate, SimScenario};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let p = 12;
    let sim = simulate(&SimScenario {
        n: 150,
        p,
        n_classes: 3,
        seed: 17,
        ..SimScenario::default()
    })?;
    let binary: Vec<bool> = (0..p).map(|j| sim.data.is_binary(j)).collect();
    let prior = ConditionalProbabilityPrior::new(sim.truth.mu0.map(normal_cdf), binary)?
        .with_continuous_means(sim.truth.mu0.clone())?;

    let cfg = ClassifierConfig {
        chain: ChainConfig {
            n_iter: 400,
            burn_in: 200,
            n_chains: 3,
            seed: 17,
            ..ChainConfig::default()
        },
        ..ClassifierConfig::default()
    };
    let (out, _) = run_classifier(&sim.data, &prior, &SpikeSlabHyper::default(), &cfg, &EdgeMask::empty(p))?;

    for c in 0..3 {
        let traces = out.class_trace(c, cfg.chain.burn_in);
        let means: Vec<String> = traces
            .iter()
            .map(|t| format!("{:.3}", t.iter().sum::<f64>() / t.len() as f64))
            .collect();
        println!(
            "class {}: true {:.3}, chain means [{}], R-hat {:.3}",
            c + 1,
            sim.truth.pi[c],
            means.join(", "),
            gelman_rubin(&traces)?
        );
    }
    Ok(())
}

#[allow(dead_code)]
fn main() {
    if let Err(e) = run_example() {
        eprintln!("{e}");
        std::process::exit(1);
    }
}
