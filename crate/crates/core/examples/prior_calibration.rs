//! How sparse is the graph prior before seeing data?
//!
//! Runs the correlation and graph updates with no data and reports the
//! fraction of pairs selected as edges, for a few values of the exponential
//! rate λ on the precision diagonal.

use lggm::model::{simulate_prior_edge_probability, SpikeSlabHyper};
use lggm::RngStream;

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let p = 10;
    for (label, base) in [
        ("default", SpikeSlabHyper::default()),
        (
            "wide spike",
            SpikeSlabHyper {
                v0: 0.05,
                v1: 1.0,
                lambda: 2.0,
                pi_delta: 0.2,
            },
        ),
    ] {
        println!("{label}: v0 = {}, v1 = {}, pi_delta = {}", base.v0, base.v1, base.pi_delta);
        for (k, lambda) in [2.0, 10.0, 40.0].into_iter().enumerate() {
            let hyper = SpikeSlabHyper { lambda, ..base };
            let mut rng = RngStream::new(5, k as u64);
            let s = simulate_prior_edge_probability(p, &hyper, 200, 300, &mut rng)?;
            println!(
                "  lambda {lambda:>4}: median edge fraction {:.3} (95% range {:.3} to {:.3})",
                s.median, s.lower, s.upper
            );
        }
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
