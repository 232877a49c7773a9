//! Acceptance run: every criterion at its stated tolerance, one line each.
//!
//! Runs as a plain binary (`harness = false`). Set `LGGM_ACCEPTANCE=1,5,9` to
//! run a subset. Criteria listed in `EXPECTED_FAIL` are known to be out of
//! reach under the default hyperparameters (see the decisions ledger); they
//! are still run and reported, and the binary fails if one of them starts to
//! pass so that the list cannot go stale.

mod common;

use std::collections::BTreeMap;
use std::path::Path;
use std::process::Command;
use std::time::Instant;

use common::{mixing_hyper, oracle_compare, spike_slab_log_prior_rho};
use lggm::benchmark::{run_benchmark, BenchmarkConfig, GridCell, Scenario};
use lggm::distributions::normal_cdf;
use lggm::metrics::{csmf_accuracy, gelman_rubin, top_k_accuracy};
use lggm::mixture::{
    independence_bias_table, naive_bayes_classify, run_classifier, ClassifierConfig, ConditionalProbabilityPrior,
    Rational,
};
use lggm::model::{
    run_chain, simulate_prior_edge_probability, ChainConfig, EdgeMask, PriorKind, SpikeSlabHyper, VSampling,
};
use lggm::simgen::{simulate, SimScenario, Simulation};
use lggm::RngStream;
use nalgebra::DMatrix;

const EXPECTED_FAIL: &[u32] = &[1, 2];

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn main() {
    let only: Option<Vec<u32>> = std::env::var("LGGM_ACCEPTANCE")
        .ok()
        .map(|s| s.split(',').filter_map(|t| t.trim().parse().ok()).collect());
    type Criterion = (u32, &'static str, fn() -> Outcome);
    let criteria: [Criterion; 9] = [
        (1, "prior calibration", prior_calibration),
        (2, "scenario (i) ordering", scenario_i_ordering),
        (3, "misspecification robustness", misspecification),
        (4, "v-sampling approximation audit", approximation_audit),
        (5, "small-instance oracle", small_instance_oracle),
        (6, "mixture classification", mixture_classification),
        (7, "independence bias", independence_bias),
        (8, "convergence diagnostics", convergence),
        (9, "determinism", determinism),
    ];
    let mut unexpected = 0;
    for (id, name, run) in criteria {
        if only.as_ref().is_some_and(|o| !o.contains(&id)) {
            continue;
        }
        let start = Instant::now();
        let o = run();
        let expected_fail = EXPECTED_FAIL.contains(&id);
        let tag = match (o.pass, expected_fail) {
            (true, false) => "PASS",
            (false, false) => "FAIL",
            (false, true) => "XFAIL",
            (true, true) => "XPASS",
        };
        if tag == "FAIL" || tag == "XPASS" {
            unexpected += 1;
        }
        println!(
            "criterion {id} {tag}: {name}: {} ({:.0} s)",
            o.detail,
            start.elapsed().as_secs_f64()
        );
    }
    if unexpected > 0 {
        println!("{unexpected} unexpected result(s)");
        std::process::exit(1);
    }
}

fn prior_calibration() -> Outcome {
    let lambdas = [2.0, 10.0, 40.0];
    let medians: Vec<f64> = lambdas
        .iter()
        .enumerate()
        .map(|(k, &lambda)| {
            let hyper = SpikeSlabHyper {
                lambda,
                ..SpikeSlabHyper::default()
            };
            let mut rng = RngStream::new(1, k as u64);
            simulate_prior_edge_probability(50, &hyper, 1000, 1000, &mut rng).unwrap().median
        })
        .collect();
    let in_band = (0.02..=0.30).contains(&medians[1]);
    let monotone = medians.windows(2).all(|w| w[1] <= w[0]);
    outcome(
        in_band && monotone,
        format!("median edge fraction at lambda 2/10/40 = {medians:.4?}, band [0.02, 0.30], monotone {monotone}"),
    )
}

/// Scenario (i) and (ii), m in {0, 0.2}, 10 replicates of 3000 sweeps. Shared
/// by criteria 2 and 3 and computed once.
fn table1() -> &'static lggm::benchmark::BenchmarkResult {
    static RESULT: std::sync::OnceLock<lggm::benchmark::BenchmarkResult> = std::sync::OnceLock::new();
    RESULT.get_or_init(|| {
        let cells = [
            GridCell::new(Scenario::Correct, 0.0),
            GridCell::new(Scenario::Correct, 0.2),
            GridCell::new(Scenario::Misspecified, 0.0),
            GridCell::new(Scenario::Misspecified, 0.2),
        ];
        run_benchmark(&cells, &BenchmarkConfig::default()).unwrap()
    })
}

fn scenario_i_ordering() -> Outcome {
    let res = table1();
    let mut pass = true;
    let mut parts = Vec::new();
    for cell in 0..2 {
        let ss = res.row(cell, PriorKind::SpikeSlab).unwrap();
        let un = res.row(cell, PriorKind::MarginalUniform).unwrap();
        pass &= ss.frobenius < un.frobenius;
        parts.push(format!(
            "m={}: frobenius spike-slab {:.2} vs uniform {:.2}",
            res.cells[cell].missing, ss.frobenius, un.frobenius
        ));
    }
    let auc = res.row(0, PriorKind::SpikeSlab).unwrap().auc.unwrap_or(f64::NAN);
    pass &= auc > 0.6 && (auc - 0.74).abs() <= 0.1;
    parts.push(format!("AUC at m=0 {auc:.3} (target 0.74 +/- 0.1)"));
    outcome(pass, parts.join("; "))
}

fn misspecification() -> Outcome {
    let res = table1();
    let mut pass = true;
    let mut parts = Vec::new();
    for (correct, wrong) in [(0, 2), (1, 3)] {
        let a = res.row(correct, PriorKind::SpikeSlab).unwrap().frobenius;
        let b = res.row(wrong, PriorKind::SpikeSlab).unwrap().frobenius;
        let rel = b / a - 1.0;
        pass &= rel < 0.15;
        parts.push(format!(
            "m={}: frobenius (i) {a:.2} vs (ii) {b:.2}, change {:+.1}%",
            res.cells[correct].missing,
            100.0 * rel
        ));
    }
    outcome(pass, parts.join("; "))
}

fn approximation_audit() -> Outcome {
    let sim = simulate(&SimScenario {
        missing_fraction: 0.2,
        misspecified: true,
        seed: 7,
        ..SimScenario::default()
    })
    .unwrap();
    let prior = sim.marginal_prior(1.0).unwrap();
    let fit = |v_sampling| {
        let cfg = ChainConfig {
            n_iter: 10_000,
            burn_in: 5_000,
            v_sampling,
            seed: 7,
            ..ChainConfig::default()
        };
        run_chain(&sim.data, &prior, &SpikeSlabHyper::default(), &cfg, &EdgeMask::empty(50))
            .unwrap()
            .posterior_mean_r
    };
    let gaussian = fit(VSampling::GaussianApprox);
    let exact = fit(VSampling::ExactReweighted);
    let max = (gaussian - exact).abs().max();
    outcome(max < 0.05, format!("max |R_gaussian - R_exact| = {max:.4} (< 0.05)"))
}

fn small_instance_oracle() -> Outcome {
    let mut pass = true;
    let mut parts = Vec::new();
    let mut check = |label: &str, comps: Vec<common::OracleComparison>| {
        for c in comps {
            pass &= c.z().abs() < 3.0;
            parts.push(format!("{label} {} z={:+.2}", c.name, c.z()));
        }
    };
    check(
        "uniform",
        oracle_compare(PriorKind::MarginalUniform, SpikeSlabHyper::default(), |_| 0.0),
    );
    let h = mixing_hyper();
    check("spike-slab", oracle_compare(PriorKind::SpikeSlab, h, spike_slab_log_prior_rho(h)));
    outcome(pass, format!("{} (all |z| < 3)", parts.join(", ")))
}

/// Synthetic C=5, p=30, n=400 design with the true condprob table as prior.
fn mixture_design(seed: u64) -> (Simulation, ConditionalProbabilityPrior) {
    let sim = simulate(&SimScenario {
        n: 400,
        p: 30,
        n_classes: 5,
        seed,
        ..SimScenario::default()
    })
    .unwrap();
    let binary: Vec<bool> = (0..30).map(|j| sim.data.is_binary(j)).collect();
    let probs = sim.truth.mu0.map(normal_cdf);
    let prior = ConditionalProbabilityPrior::new(probs, binary)
        .unwrap()
        .with_continuous_means(sim.truth.mu0.clone())
        .unwrap();
    (sim, prior)
}

fn classifier_config(seed: u64, chains: usize) -> ClassifierConfig {
    ClassifierConfig {
        chain: ChainConfig {
            n_iter: 2000,
            burn_in: 1000,
            seed,
            n_chains: chains,
            ..ChainConfig::default()
        },
        ..ClassifierConfig::default()
    }
}

fn mixture_classification() -> Outcome {
    let mut wins = 0;
    let mut top1_plain = 0.0;
    let mut top1_labeled = 0.0;
    let mut accs = Vec::new();
    let replicates = 10;
    for seed in 1..=replicates {
        let (sim, prior) = mixture_design(seed);
        let hyper = SpikeSlabHyper::default();
        let cfg = classifier_config(seed, 1);
        let none = EdgeMask::empty(30);
        let (out, _) = run_classifier(&sim.data, &prior, &hyper, &cfg, &none).unwrap();
        let nb = naive_bayes_classify(&sim.data, &prior, &[0.2; 5]).unwrap();
        let acc = csmf_accuracy(&out.csmf_mean, &sim.truth.pi).unwrap();
        let acc_nb = csmf_accuracy(&nb.csmf, &sim.truth.pi).unwrap();
        if acc > 0.8 && acc > acc_nb {
            wins += 1;
        }
        accs.push(format!("{acc:.2}/{acc_nb:.2}"));

        // Reveal the first quarter of the rows; score both runs on the rest.
        let revealed = 100;
        let labeled = sim.labeled(|i| i < revealed).unwrap();
        let (out_lab, _) = run_classifier(&labeled, &prior, &hyper, &cfg, &none).unwrap();
        let rest = |m: &DMatrix<f64>| m.rows(revealed, 400 - revealed).into_owned();
        let truth = &sim.truth.labels[revealed..];
        top1_plain += top_k_accuracy(&rest(&out.individual_probs), truth, 1).unwrap();
        top1_labeled += top_k_accuracy(&rest(&out_lab.individual_probs), truth, 1).unwrap();
    }
    let r = replicates as f64;
    let (plain, lab) = (top1_plain / r, top1_labeled / r);
    outcome(
        wins >= 7 && lab > plain,
        format!(
            "CSMF accuracy model/naive-Bayes per seed [{}], {wins}/10 wins (need 7); \
             mean top-1 {plain:.3} unlabeled vs {lab:.3} with 25% labels",
            accs.join(" ")
        ),
    )
}

fn independence_bias() -> Outcome {
    let r = Rational::new;
    let b = independence_bias_table(r(4, 5), r(1, 5), r(1, 5), r(4, 5)).unwrap();
    let equal = b.class1[1][1] == b.class2[1][1] && b.class2[1][1] == b.class3[1][1];
    let pass = b.theta11() == r(4, 25) && b.theta11_independent() == r(1, 4) && equal;
    outcome(
        pass,
        format!(
            "theta11 true {} vs independence {}; P11 per class {} {} {}",
            b.theta11(),
            b.theta11_independent(),
            b.class1[1][1],
            b.class2[1][1],
            b.class3[1][1]
        ),
    )
}

fn convergence() -> Outcome {
    let seed = 3;
    let (sim, prior) = mixture_design(seed);
    let cfg = classifier_config(seed, 4);
    let (out, _) = run_classifier(&sim.data, &prior, &SpikeSlabHyper::default(), &cfg, &EdgeMask::empty(30)).unwrap();
    let mut pass = true;
    let mut parts = Vec::new();
    for c in 0..5 {
        let rhat = gelman_rubin(&out.class_trace(c, cfg.chain.burn_in)).unwrap();
        let pi = sim.truth.pi[c];
        if pi > 0.1 {
            pass &= rhat < 1.1;
        }
        parts.push(format!("pi={pi:.3} rhat={rhat:.3}"));
    }
    outcome(pass, format!("{} (rhat < 1.1 where pi > 0.1)", parts.join(", ")))
}

fn read_tree(dir: &Path) -> BTreeMap<String, Vec<u8>> {
    std::fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            (e.file_name().to_string_lossy().into_owned(), std::fs::read(e.path()).unwrap())
        })
        .collect()
}

fn determinism() -> Outcome {
    let tmp = tempfile::tempdir().unwrap();
    let root = tmp.path();
    let bin = env!("CARGO_BIN_EXE_lggm");
    let run = |args: &[&str], out: &Path| {
        let status = Command::new(bin)
            .args(args)
            .arg("--out")
            .arg(out)
            .stderr(std::process::Stdio::null())
            .status()
            .unwrap();
        assert!(status.success(), "lggm {args:?} failed");
    };
    let sim = root.join("sim");
    run(
        &["simulate", "--scenario", "ii", "--n", "60", "--p", "8", "--classes", "3", "--labeled", "0.2", "--missing", "0.1"],
        &sim,
    );
    std::fs::write(root.join("grid.csv"), "scenario,missing,n,p\ni,0,40,6\nii,0.1,40,6\n").unwrap();
    let data = sim.join("data.csv");
    let schema = sim.join("data_schema.csv");
    let s = |p: &Path| p.to_str().unwrap().to_string();
    let chain = ["--iters", "60", "--burn-in", "30", "--seed", "5"];
    let mut commands: Vec<(&str, Vec<String>)> = vec![
        ("simulate", ["simulate", "--scenario", "i", "--n", "50", "--p", "6", "--seed", "4"].map(String::from).to_vec()),
        ("prior-sim", ["prior-sim", "--p", "6", "--lambda", "2,10", "--burn-in", "20", "--iters", "20"].map(String::from).to_vec()),
    ];
    let mut fit = vec!["fit-graph".to_string(), "--data".into(), s(&data), "--schema".into(), s(&schema)];
    fit.extend(["--prior".into(), s(&sim.join("marginal_prior.csv")), "--chains".into(), "2".into()]);
    fit.extend(chain.map(String::from));
    commands.push(("fit-graph", fit));
    let mut classify = vec!["classify".to_string(), "--data".into(), s(&data), "--schema".into(), s(&schema)];
    classify.extend(["--condprob".into(), s(&sim.join("condprob.csv")), "--chains".into(), "2".into()]);
    classify.extend(chain.map(String::from));
    commands.push(("classify", classify));
    let mut bench = vec!["benchmark".to_string(), "--grid".into(), s(&root.join("grid.csv")), "--replicates".into(), "2".into()];
    bench.extend(chain.map(String::from));
    commands.push(("benchmark", bench));

    let mut pass = true;
    let mut parts = Vec::new();
    for (name, args) in &commands {
        let args: Vec<&str> = args.iter().map(String::as_str).collect();
        let (a, b) = (root.join(format!("{name}_a")), root.join(format!("{name}_b")));
        run(&args, &a);
        run(&args, &b);
        let (ta, tb) = (read_tree(&a), read_tree(&b));
        let same = ta == tb && !ta.is_empty();
        pass &= same;
        parts.push(format!("{name} {} files {}", ta.len(), if same { "identical" } else { "DIFFER" }));
    }
    outcome(pass, parts.join(", "))
}
