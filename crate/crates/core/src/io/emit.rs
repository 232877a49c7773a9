use std::collections::BTreeMap;
use std::fs::File;
use std::path::Path;

use nalgebra::DMatrix;
use serde::Serialize;

use super::dataset::save_dataset;
use super::fmt_f64;
use crate::distributions::normal_cdf;
use crate::error::{Error, Result};
use crate::mixture::ClassificationOutput;
use crate::model::{ChainOutput, EdgeMask};
use crate::simgen::Simulation;

/// Write a CSV file with a header row.
pub fn write_table<I>(path: &Path, header: &[String], rows: I) -> Result<()>
where
    I: IntoIterator<Item = Vec<String>>,
{
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = csv::Writer::from_writer(file);
    let io_err = |e: csv::Error| Error::io(path, std::io::Error::other(e));
    w.write_record(header).map_err(io_err)?;
    for row in rows {
        w.write_record(&row).map_err(io_err)?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// Write a labelled matrix: the first column holds `row_names` under the
/// heading `corner`, the remaining columns are headed by `col_names`.
pub fn write_matrix(
    path: &Path,
    corner: &str,
    row_names: &[String],
    col_names: &[String],
    m: &DMatrix<f64>,
) -> Result<()> {
    if m.shape() != (row_names.len(), col_names.len()) {
        return Err(Error::Config(format!(
            "matrix is {:?} but {} row and {} column names were given",
            m.shape(),
            row_names.len(),
            col_names.len()
        )));
    }
    let header: Vec<String> = std::iter::once(corner.to_string()).chain(col_names.iter().cloned()).collect();
    let rows = m.row_iter().zip(row_names).map(|(r, name)| {
        std::iter::once(name.clone()).chain(r.iter().map(|&x| fmt_f64(x))).collect()
    });
    write_table(path, &header, rows)
}

/// Everything needed to rerun a command: its name, seed, input files and the
/// complete configuration. Deliberately free of timestamps and host details so
/// that reruns produce identical bytes.
#[derive(Clone, Debug, Serialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub subcommand: String,
    pub seed: u64,
    pub inputs: BTreeMap<String, String>,
    pub config: serde_json::Value,
}

impl RunManifest {
    pub fn new(subcommand: &str, seed: u64, config: serde_json::Value) -> Self {
        Self {
            tool: env!("CARGO_PKG_NAME").to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            subcommand: subcommand.to_string(),
            seed,
            inputs: BTreeMap::new(),
            config,
        }
    }

    pub fn input(mut self, key: &str, path: Option<&Path>) -> Self {
        if let Some(p) = path {
            self.inputs.insert(key.to_string(), p.display().to_string());
        }
        self
    }
}

pub fn write_manifest(dir: &Path, manifest: &RunManifest) -> Result<()> {
    let path = dir.join("run_manifest.json");
    let mut body = serde_json::to_string_pretty(manifest)
        .map_err(|e| Error::io(&path, std::io::Error::other(e)))?;
    body.push('\n');
    std::fs::write(&path, body).map_err(|e| Error::io(&path, e))
}

/// Write the correlation-model summaries of a run.
///
/// Files: `posterior_mean_R.csv`, `posterior_mean_mu.csv` (one row per class,
/// labelled by `class_names`), `inclusion_prob.csv`, `pairs_report.csv` and
/// `trace_graph.csv`. The pairs report lists every pair with inclusion
/// probability above one half or fixed by the caller, with its posterior mean
/// partial correlation; fixed pairs are flagged.
pub fn emit_fit(
    dir: &Path,
    names: &[String],
    class_names: &[String],
    out: &ChainOutput,
    fixed: &EdgeMask,
) -> Result<()> {
    write_matrix(&dir.join("posterior_mean_R.csv"), "variable", names, names, &out.posterior_mean_r)?;
    write_matrix(
        &dir.join("posterior_mean_mu.csv"),
        "class",
        class_names,
        names,
        &out.posterior_mean_mu,
    )?;
    write_matrix(&dir.join("inclusion_prob.csv"), "variable", names, names, &out.inclusion_prob)?;

    let p = names.len();
    let mut pairs: Vec<(usize, usize)> = (0..p)
        .flat_map(|j| ((j + 1)..p).map(move |k| (j, k)))
        .filter(|&(j, k)| out.inclusion_prob[(j, k)] > 0.5 || fixed.get(j, k))
        .collect();
    pairs.sort_by(|a, b| {
        let key = |&(j, k): &(usize, usize)| (out.inclusion_prob[(j, k)], out.posterior_mean_partial[(j, k)].abs());
        key(b).partial_cmp(&key(a)).unwrap_or(std::cmp::Ordering::Equal).then(a.cmp(b))
    });
    let header = ["variable1", "variable2", "inclusion_prob", "partial_correlation", "correlation", "fixed"]
        .map(String::from);
    write_table(
        &dir.join("pairs_report.csv"),
        &header,
        pairs.into_iter().map(|(j, k)| {
            vec![
                names[j].clone(),
                names[k].clone(),
                fmt_f64(out.inclusion_prob[(j, k)]),
                fmt_f64(out.posterior_mean_partial[(j, k)]),
                fmt_f64(out.posterior_mean_r[(j, k)]),
                fixed.get(j, k).to_string(),
            ]
        }),
    )?;

    let header = ["chain", "iteration", "edges", "mean_abs_r"].map(String::from);
    write_table(
        &dir.join("trace_graph.csv"),
        &header,
        out.traces.iter().enumerate().flat_map(|(c, t)| {
            t.edges.iter().zip(&t.mean_abs_r).enumerate().map(move |(i, (e, m))| {
                vec![c.to_string(), i.to_string(), e.to_string(), fmt_f64(*m)]
            })
        }),
    )
}

/// Write the classification outputs on top of [`emit_fit`]:
/// `csmf_summary.csv` (mean and 95% interval per class), `assignments.csv`
/// (n×C probabilities) and `trace_csmf.csv` (per chain and sweep).
pub fn emit_classification(
    dir: &Path,
    names: &[String],
    cls: &ClassificationOutput,
    chain: &ChainOutput,
    fixed: &EdgeMask,
) -> Result<()> {
    emit_fit(dir, names, &cls.class_names, chain, fixed)?;
    let header = ["cause", "mean", "lower", "upper"].map(String::from);
    write_table(
        &dir.join("csmf_summary.csv"),
        &header,
        cls.class_names.iter().enumerate().map(|(c, name)| {
            vec![
                name.clone(),
                fmt_f64(cls.csmf_mean[c]),
                fmt_f64(cls.csmf_ci[c].0),
                fmt_f64(cls.csmf_ci[c].1),
            ]
        }),
    )?;
    let row_names: Vec<String> = (1..=cls.individual_probs.nrows()).map(|i| i.to_string()).collect();
    write_matrix(
        &dir.join("assignments.csv"),
        "row",
        &row_names,
        &cls.class_names,
        &cls.individual_probs,
    )?;
    let header: Vec<String> = ["chain", "iteration"]
        .map(String::from)
        .into_iter()
        .chain(cls.class_names.iter().cloned())
        .collect();
    write_table(
        &dir.join("trace_csmf.csv"),
        &header,
        cls.traces.iter().enumerate().flat_map(|(c, t)| {
            t.iter().enumerate().map(move |(i, v)| {
                [c.to_string(), i.to_string()]
                    .into_iter()
                    .chain(v.iter().map(|&x| fmt_f64(x)))
                    .collect()
            })
        }),
    )
}

/// Write a simulated data set with its ground truth.
///
/// Files: `data.csv` and `data_schema.csv`, `truth_omega.csv`, `truth_R.csv`,
/// `truth_edges.csv`, `truth_mu.csv`, `truth_pi.csv`, `truth_labels.csv`,
/// plus the prior files the model would be given: `marginal_prior.csv`
/// (latent means of class 1) and, for several classes, `condprob.csv` (Φ of
/// the prior means). With several classes the first
/// `round(labeled_fraction · n)` rows carry their class in the `cause`
/// column of `data.csv`.
pub fn emit_simulation(dir: &Path, sim: &Simulation, labeled_fraction: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&labeled_fraction) {
        return Err(Error::InvalidParameter(format!(
            "labeled fraction {labeled_fraction} must lie in [0, 1]"
        )));
    }
    let t = &sim.truth;
    let classes = t.mu.nrows();
    let class_names: Vec<String> = (1..=classes).map(|c| format!("class{c}")).collect();
    let reveal = (labeled_fraction * sim.data.n() as f64).round() as usize;
    let data = if classes > 1 && reveal > 0 {
        sim.labeled(|i| i < reveal)?
    } else {
        sim.data.clone()
    };
    save_dataset(&data, dir, "data")?;
    write_table(
        &dir.join("truth_labels.csv"),
        &["row", "cause"].map(String::from),
        t.labels.iter().enumerate().map(|(i, &c)| vec![(i + 1).to_string(), class_names[c].clone()]),
    )?;
    let names: Vec<String> = sim.data.names().into_iter().map(String::from).collect();
    write_matrix(&dir.join("truth_omega.csv"), "variable", &names, &names, &t.graph.omega)?;
    write_matrix(&dir.join("truth_R.csv"), "variable", &names, &names, &t.graph.r)?;
    write_table(
        &dir.join("truth_edges.csv"),
        &["variable1", "variable2"].map(String::from),
        t.graph.edges.pairs().into_iter().map(|(j, k)| vec![names[j].clone(), names[k].clone()]),
    )?;
    write_matrix(&dir.join("truth_mu.csv"), "class", &class_names, &names, &t.mu)?;
    write_table(
        &dir.join("truth_pi.csv"),
        &["cause", "pi"].map(String::from),
        class_names.iter().zip(t.pi.iter()).map(|(c, &p)| vec![c.clone(), fmt_f64(p)]),
    )?;
    write_table(
        &dir.join("marginal_prior.csv"),
        &["variable", "latent_mean"].map(String::from),
        names.iter().zip(t.mu0.row(0).iter()).map(|(n, &m)| vec![n.clone(), fmt_f64(m)]),
    )?;
    if classes > 1 {
        let probs = DMatrix::from_fn(classes, names.len(), |c, j| {
            if sim.data.is_binary(j) {
                normal_cdf(t.mu0[(c, j)])
            } else {
                t.mu0[(c, j)]
            }
        });
        write_matrix(&dir.join("condprob.csv"), "cause", &class_names, &names, &probs)?;
    }
    Ok(())
}
