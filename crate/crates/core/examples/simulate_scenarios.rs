//! Generate synthetic data with a known graph, correctly specified and
//! misspecified, and write it in the command-line file formats.

use lggm::io::emit_simulation;
use lggm::simgen::{simulate, SimScenario};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    for misspecified in [false, true] {
        let sc = SimScenario {
            n: 200,
            p: 50,
            missing_fraction: 0.2,
            misspecified,
            seed: 4,
            ..SimScenario::default()
        };
        let sim = simulate(&sc)?;
        let g = &sim.truth.graph;
        let degree = 2.0 * g.edges.count() as f64 / sc.p as f64;
        let prior_gap = (&sim.truth.mu0 - &sim.truth.mu).abs().max();
        println!(
            "misspecified={misspecified}: {} edges (mean degree {degree:.2}), diagonal shift t = {}, \
             {} missing cells, largest prior-mean error {prior_gap:.3}",
            g.edges.count(),
            g.t,
            sim.data.missing_count()
        );
    }

    // Three classes, 10% of rows labeled, written out for `lggm classify`.
    let sim = simulate(&SimScenario {
        n: 120,
        p: 10,
        n_classes: 3,
        seed: 4,
        ..SimScenario::default()
    })?;
    let dir = tempfile::tempdir()?;
    emit_simulation(dir.path(), &sim, 0.1)?;
    let mut files: Vec<String> = std::fs::read_dir(dir.path())?
        .map(|e| e.map(|e| e.file_name().to_string_lossy().into_owned()))
        .collect::<Result<_, _>>()?;
    files.sort();
    println!("class fractions {:.3?}", sim.truth.pi.as_slice());
    println!("files: {}", files.join(", "));
    Ok(())
}

#[allow(dead_code)]
fn main() {
    if let Err(e) = run_example() {
        eprintln!("{e}");
        std::process::exit(1);
    }
}
