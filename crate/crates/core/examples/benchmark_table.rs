//! Compare the spike-and-slab and uniform correlation priors over a small
//! grid of scenarios and missingness levels.

use lggm::benchmark::{run_benchmark, BenchmarkConfig, GridCell, Scenario};
use lggm::model::ChainConfig;

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let cells: Vec<GridCell> = [(Scenario::Correct, 0.0), (Scenario::Misspecified, 0.2)]
        .into_iter()
        .map(|(s, m)| GridCell {
            n: 80,
            p: 8,
            ..GridCell::new(s, m)
        })
        .collect();
    let cfg = BenchmarkConfig {
        replicates: 3,
        chain: ChainConfig {
            n_iter: 200,
            burn_in: 100,
            ..ChainConfig::default()
        },
        ..BenchmarkConfig::default()
    };
    let res = run_benchmark(&cells, &cfg)?;

    println!("scenario missing  method      max    spectral frobenius  AUC");
    for row in &res.summary {
        println!(
            "{:<8} {:>6.2}  {:<10} {:>6.3} {:>8.3} {:>9.3}  {}",
            row.cell.scenario.label(),
            row.cell.missing,
            format!("{:?}", row.method),
            row.max_norm,
            row.spectral,
            row.frobenius,
            row.auc.map_or("-".to_string(), |a| format!("{a:.3}"))
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
