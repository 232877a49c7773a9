//! Replicated simulation study comparing the two correlation priors.
//!
//! Each grid cell names a scenario (correct or misspecified marginal priors)
//! and a missing-cell fraction. Replicate `r` simulates with seed
//! `base_seed + r`, fits both priors and scores the posterior mean correlation
//! matrix against the truth; graph recovery is scored for the spike-and-slab
//! fit only, since the uniform prior has no selection indicators.

use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::io::{fmt_f64, open, write_table};
use crate::metrics::{graph_recovery, matrix_error_norms};
use crate::model::{run_chain, ChainConfig, EdgeMask, PriorKind, SpikeSlabHyper};
use crate::simgen::{simulate, SimScenario};

/// The two simulation designs: (i) prior means equal the truth, (ii) prior
/// means distorted to sign(μ)μ² and continuous margins cube-rooted.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Scenario {
    #[serde(rename = "i")]
    Correct,
    #[serde(rename = "ii")]
    Misspecified,
}

impl Scenario {
    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "i" | "1" => Some(Scenario::Correct),
            "ii" | "2" => Some(Scenario::Misspecified),
            _ => None,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Scenario::Correct => "i",
            Scenario::Misspecified => "ii",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridCell {
    pub scenario: Scenario,
    pub missing: f64,
    pub n: usize,
    pub p: usize,
}

impl GridCell {
    pub fn new(scenario: Scenario, missing: f64) -> Self {
        Self {
            scenario,
            missing,
            n: 200,
            p: 50,
        }
    }

    fn sim_scenario(&self, seed: u64) -> SimScenario {
        SimScenario {
            n: self.n,
            p: self.p,
            missing_fraction: self.missing,
            misspecified: self.scenario == Scenario::Misspecified,
            seed,
            ..SimScenario::default()
        }
    }
}

/// Read a grid file with header `scenario,missing[,n,p]`. Missing fractions
/// may be written as `0.2` or `20%`; n and p default to 200 and 50.
pub fn load_grid(path: &Path) -> Result<Vec<GridCell>> {
    let parse_err = |line: usize, message: String| Error::Parse {
        file: path.display().to_string(),
        line,
        message,
    };
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(open(path)?);
    let header = reader.headers().map_err(|e| parse_err(1, e.to_string()))?.clone();
    let cols: Vec<&str> = header.iter().collect();
    if !(cols == ["scenario", "missing"] || cols == ["scenario", "missing", "n", "p"]) {
        return Err(parse_err(1, "header must be 'scenario,missing' or 'scenario,missing,n,p'".into()));
    }
    let mut cells = Vec::new();
    for (i, rec) in reader.records().enumerate() {
        let line = i + 2;
        let rec = rec.map_err(|e| parse_err(line, e.to_string()))?;
        let scenario = Scenario::parse(&rec[0])
            .ok_or_else(|| parse_err(line, format!("unknown scenario '{}' (use i or ii)", &rec[0])))?;
        let m = &rec[1];
        let missing = match m.strip_suffix('%') {
            Some(pct) => pct.parse::<f64>().map(|v| v / 100.0),
            None => m.parse::<f64>(),
        }
        .map_err(|_| parse_err(line, format!("malformed missing fraction '{m}'")))?;
        let mut cell = GridCell::new(scenario, missing);
        if rec.len() == 4 {
            let int = |k: usize| {
                rec[k]
                    .parse::<usize>()
                    .map_err(|_| parse_err(line, format!("malformed integer '{}'", &rec[k])))
            };
            cell.n = int(2)?;
            cell.p = int(3)?;
        }
        cell.sim_scenario(0)
            .validate()
            .map_err(|e| parse_err(line, e.to_string()))?;
        cells.push(cell);
    }
    if cells.is_empty() {
        return Err(parse_err(1, "grid has no rows".into()));
    }
    Ok(cells)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkConfig {
    pub replicates: usize,
    pub base_seed: u64,
    pub chain: ChainConfig,
    pub hyper: SpikeSlabHyper,
    /// Prior variance of the latent means around the supplied prior means.
    pub prior_sigma2: f64,
}

impl Default for BenchmarkConfig {
    fn default() -> Self {
        Self {
            replicates: 10,
            base_seed: 1,
            chain: ChainConfig::default(),
            hyper: SpikeSlabHyper::default(),
            prior_sigma2: 1.0,
        }
    }
}

/// Scores of one method on one replicate.
#[derive(Clone, Debug, PartialEq)]
pub struct ReplicateScore {
    pub cell: usize,
    pub replicate: usize,
    pub method: PriorKind,
    pub max_norm: f64,
    pub spectral: f64,
    pub frobenius: f64,
    pub auc: Option<f64>,
    pub max_f1: Option<f64>,
}

/// Mean scores over replicates for one cell and method.
#[derive(Clone, Debug, PartialEq)]
pub struct SummaryRow {
    pub cell: GridCell,
    pub method: PriorKind,
    pub replicates: usize,
    pub max_norm: f64,
    pub spectral: f64,
    pub frobenius: f64,
    pub auc: Option<f64>,
    pub max_f1: Option<f64>,
}

#[derive(Clone, Debug)]
pub struct BenchmarkResult {
    pub cells: Vec<GridCell>,
    pub scores: Vec<ReplicateScore>,
    pub summary: Vec<SummaryRow>,
}

impl BenchmarkResult {
    pub fn row(&self, cell: usize, method: PriorKind) -> Option<&SummaryRow> {
        self.summary.iter().find(|r| r.cell == self.cells[cell] && r.method == method)
    }
}

fn method_label(m: PriorKind) -> &'static str {
    match m {
        PriorKind::SpikeSlab => "spike_slab",
        PriorKind::MarginalUniform => "uniform",
    }
}

fn score_one(cell_idx: usize, cell: &GridCell, rep: usize, method: PriorKind, cfg: &BenchmarkConfig) -> Result<ReplicateScore> {
    let seed = cfg.base_seed + rep as u64;
    let sim = simulate(&cell.sim_scenario(seed))?;
    let prior = sim.marginal_prior(cfg.prior_sigma2)?;
    let chain = ChainConfig {
        prior_kind: method,
        seed,
        ..cfg.chain.clone()
    };
    let out = run_chain(&sim.data, &prior, &cfg.hyper, &chain, &EdgeMask::empty(cell.p))?;
    let err = matrix_error_norms(&out.posterior_mean_r, &sim.truth.graph.r)?;
    let (auc, max_f1) = if method == PriorKind::SpikeSlab {
        match graph_recovery(&out.inclusion_prob, &sim.truth.graph.edges, None) {
            Ok(g) => (Some(g.auc), Some(g.max_f1)),
            Err(Error::UndefinedRate(_)) => (None, None),
            Err(e) => return Err(e),
        }
    } else {
        (None, None)
    };
    Ok(ReplicateScore {
        cell: cell_idx,
        replicate: rep,
        method,
        max_norm: err.max,
        spectral: err.spectral,
        frobenius: err.frobenius,
        auc,
        max_f1,
    })
}

/// Run every (cell, replicate, method) combination, concurrently, and
/// average the scores per cell and method.
pub fn run_benchmark(cells: &[GridCell], cfg: &BenchmarkConfig) -> Result<BenchmarkResult> {
    if cfg.replicates == 0 {
        return Err(Error::Config("benchmark needs at least one replicate".into()));
    }
    cfg.chain.validate()?;
    cfg.hyper.validate()?;
    let methods = [PriorKind::SpikeSlab, PriorKind::MarginalUniform];
    let jobs: Vec<(usize, usize, PriorKind)> = (0..cells.len())
        .flat_map(|c| (0..cfg.replicates).flat_map(move |r| methods.map(|m| (c, r, m))))
        .collect();
    let scores = jobs
        .par_iter()
        .map(|&(c, r, m)| score_one(c, &cells[c], r, m, cfg))
        .collect::<Result<Vec<_>>>()?;

    let mean = |xs: Vec<f64>| xs.iter().sum::<f64>() / xs.len() as f64;
    let mean_opt = |xs: Vec<Option<f64>>| {
        let v: Vec<f64> = xs.into_iter().flatten().collect();
        (!v.is_empty()).then(|| v.iter().sum::<f64>() / v.len() as f64)
    };
    let mut summary = Vec::new();
    for (c, cell) in cells.iter().enumerate() {
        for m in methods {
            let rows: Vec<&ReplicateScore> = scores.iter().filter(|s| s.cell == c && s.method == m).collect();
            summary.push(SummaryRow {
                cell: cell.clone(),
                method: m,
                replicates: rows.len(),
                max_norm: mean(rows.iter().map(|s| s.max_norm).collect()),
                spectral: mean(rows.iter().map(|s| s.spectral).collect()),
                frobenius: mean(rows.iter().map(|s| s.frobenius).collect()),
                auc: mean_opt(rows.iter().map(|s| s.auc).collect()),
                max_f1: mean_opt(rows.iter().map(|s| s.max_f1).collect()),
            });
        }
    }
    Ok(BenchmarkResult {
        cells: cells.to_vec(),
        scores,
        summary,
    })
}

/// Write `benchmark_replicates.csv` (one row per replicate and method) and
/// `benchmark_summary.csv` (means per cell and method, laid out like the
/// usual results table). Methods without graph scores get empty cells.
pub fn write_benchmark(dir: &Path, result: &BenchmarkResult) -> Result<()> {
    let opt = |x: Option<f64>| x.map(fmt_f64).unwrap_or_default();
    let header = [
        "scenario", "missing", "n", "p", "replicate", "method", "max_norm", "spectral", "frobenius", "auc", "max_f1",
    ]
    .map(String::from);
    write_table(
        &dir.join("benchmark_replicates.csv"),
        &header,
        result.scores.iter().map(|s| {
            let cell = &result.cells[s.cell];
            vec![
                cell.scenario.label().to_string(),
                fmt_f64(cell.missing),
                cell.n.to_string(),
                cell.p.to_string(),
                s.replicate.to_string(),
                method_label(s.method).to_string(),
                fmt_f64(s.max_norm),
                fmt_f64(s.spectral),
                fmt_f64(s.frobenius),
                opt(s.auc),
                opt(s.max_f1),
            ]
        }),
    )?;
    let header = [
        "scenario", "missing", "n", "p", "method", "replicates", "max_norm", "spectral", "frobenius", "auc", "max_f1",
    ]
    .map(String::from);
    write_table(
        &dir.join("benchmark_summary.csv"),
        &header,
        result.summary.iter().map(|r| {
            vec![
                r.cell.scenario.label().to_string(),
                fmt_f64(r.cell.missing),
                r.cell.n.to_string(),
                r.cell.p.to_string(),
                method_label(r.method).to_string(),
                r.replicates.to_string(),
                fmt_f64(r.max_norm),
                fmt_f64(r.spectral),
                fmt_f64(r.frobenius),
                opt(r.auc),
                opt(r.max_f1),
            ]
        }),
    )
}
