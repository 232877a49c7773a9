//! Command-line interface. `main.rs` only forwards to [`main_entry`].

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::benchmark::{load_grid, run_benchmark, write_benchmark, BenchmarkConfig};
use crate::error::{Error, Result};
use crate::io::{
    align_labels, emit_classification, emit_fit, emit_simulation, ensure_dir, fmt_f64, load_condprob_prior,
    load_dataset, load_fixed_edges, load_marginal_prior, write_manifest, write_table, RunManifest,
};
use crate::mixture::{run_classifier, ClassifierConfig, SigmaMode};
use crate::model::{
    run_chain, simulate_prior_edge_probability, ChainConfig, EdgeMask, MarginalPrior, PriorKind, SpikeSlabHyper,
    VSampling,
};
use crate::rng::RngStream;
use crate::simgen::{simulate, SimScenario};

#[derive(Debug, Parser)]
#[command(name = "lggm", version, about = "Latent Gaussian graphical models for mixed binary and continuous data")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Estimate the latent correlation matrix and graph of one population.
    FitGraph(FitGraphArgs),
    /// Fit the latent mixture and report class fractions and assignments.
    Classify(ClassifyArgs),
    /// Generate a synthetic data set with its ground truth.
    Simulate(SimulateArgs),
    /// Simulate the edge fraction implied by the spike-and-slab prior.
    PriorSim(PriorSimArgs),
    /// Replicated comparison of the two correlation priors on simulated data.
    Benchmark(BenchmarkArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum PriorKindArg {
    SpikeSlab,
    Uniform,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum VSamplingArg {
    Gaussian,
    Exact,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
pub enum ScenarioArg {
    #[value(name = "i")]
    I,
    #[value(name = "ii")]
    Ii,
}

#[derive(Clone, Debug, Args, Serialize)]
pub struct HyperArgs {
    /// Spike scale.
    #[arg(long, default_value_t = 0.01)]
    pub v0: f64,
    /// Slab scale.
    #[arg(long, default_value_t = 1.0)]
    pub v1: f64,
    /// Exponential rate on the diagonal of the expanded precision.
    #[arg(long, default_value_t = 10.0)]
    pub lambda: f64,
    /// Prior edge inclusion probability.
    #[arg(long, default_value_t = 1e-4)]
    pub pi_delta: f64,
}

impl HyperArgs {
    fn hyper(&self) -> SpikeSlabHyper {
        SpikeSlabHyper {
            v0: self.v0,
            v1: self.v1,
            lambda: self.lambda,
            pi_delta: self.pi_delta,
        }
    }
}

#[derive(Clone, Debug, Args, Serialize)]
pub struct ChainArgs {
    #[arg(long, default_value_t = 3000)]
    pub iters: usize,
    #[arg(long, default_value_t = 1500)]
    pub burn_in: usize,
    #[arg(long, default_value_t = 1)]
    pub thin: usize,
    #[arg(long, default_value_t = 1)]
    pub chains: usize,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[arg(long, value_enum, default_value_t = PriorKindArg::SpikeSlab)]
    pub prior_kind: PriorKindArg,
    /// How the Schur complement of each column update is drawn.
    #[arg(long, value_enum, default_value_t = VSamplingArg::Gaussian)]
    pub v_sampling: VSamplingArg,
    /// Refit with the graph frozen at the first-round median graph.
    #[arg(long)]
    pub two_stage: bool,
    #[command(flatten)]
    pub hyper: HyperArgs,
}

impl ChainArgs {
    fn chain(&self) -> ChainConfig {
        ChainConfig {
            n_iter: self.iters,
            burn_in: self.burn_in,
            thin: self.thin,
            n_chains: self.chains,
            seed: self.seed,
            prior_kind: match self.prior_kind {
                PriorKindArg::SpikeSlab => PriorKind::SpikeSlab,
                PriorKindArg::Uniform => PriorKind::MarginalUniform,
            },
            v_sampling: match self.v_sampling {
                VSamplingArg::Gaussian => VSampling::GaussianApprox,
                VSamplingArg::Exact => VSampling::ExactReweighted,
            },
            two_stage: self.two_stage,
            ..ChainConfig::default()
        }
    }
}

#[derive(Clone, Debug, Args, Serialize)]
pub struct FitGraphArgs {
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long)]
    pub schema: PathBuf,
    /// Marginal prior file (`variable,value` or `variable,latent_mean`).
    #[arg(long)]
    pub prior: Option<PathBuf>,
    /// Prior variance of the latent means.
    #[arg(long, default_value_t = 1.0)]
    pub prior_var: f64,
    /// Header-less CSV of variable pairs whose edge is fixed in the graph.
    #[arg(long)]
    pub fixed_edges: Option<PathBuf>,
    #[command(flatten)]
    pub chain: ChainArgs,
    #[arg(long)]
    #[serde(skip)]
    pub out: PathBuf,
}

#[derive(Clone, Debug, Args, Serialize)]
pub struct ClassifyArgs {
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long)]
    pub schema: PathBuf,
    /// Class-conditional probability table with a leading `cause` column.
    #[arg(long)]
    pub condprob: PathBuf,
    #[arg(long)]
    pub fixed_edges: Option<PathBuf>,
    /// Give labeled rows their own class fractions.
    #[arg(long)]
    pub split_populations: bool,
    /// `hyper` or `fixed:VALUE`.
    #[arg(long, default_value = "hyper", value_parser = parse_sigma_mode)]
    pub sigma_c: SigmaMode,
    /// Leave the class fractions out of the assignment probabilities.
    #[arg(long)]
    pub no_pi: bool,
    /// Zeros become this fraction of the smallest interior probability.
    #[arg(long, default_value_t = 0.5)]
    pub clamp_low: f64,
    /// Ones become one minus this fraction of (1 − largest interior probability).
    #[arg(long, default_value_t = 0.5)]
    pub clamp_high: f64,
    #[command(flatten)]
    pub chain: ChainArgs,
    #[arg(long)]
    #[serde(skip)]
    pub out: PathBuf,
}

fn parse_sigma_mode(s: &str) -> std::result::Result<SigmaMode, String> {
    if s == "hyper" {
        return Ok(SigmaMode::Hyper);
    }
    match s.strip_prefix("fixed:").map(str::parse::<f64>) {
        Some(Ok(v)) if v > 0.0 && v.is_finite() => Ok(SigmaMode::Fixed(v)),
        _ => Err(format!("expected 'hyper' or 'fixed:VALUE' with VALUE > 0, got '{s}'")),
    }
}

#[derive(Clone, Debug, Args, Serialize)]
pub struct SimulateArgs {
    #[arg(long, value_enum, default_value_t = ScenarioArg::I)]
    pub scenario: ScenarioArg,
    #[arg(long, default_value_t = 200)]
    pub n: usize,
    #[arg(long, default_value_t = 50)]
    pub p: usize,
    /// Fraction of cells set missing.
    #[arg(long, default_value_t = 0.0)]
    pub missing: f64,
    #[arg(long, default_value_t = 1)]
    pub classes: usize,
    #[arg(long, default_value_t = 0.1)]
    pub continuous_fraction: f64,
    /// Length scale of the random geometric graph.
    #[arg(long, default_value_t = 0.2)]
    pub c_graph: f64,
    /// Fraction of rows (taken from the top) whose class is written to the
    /// `cause` column when there are several classes.
    #[arg(long, default_value_t = 0.0)]
    pub labeled: f64,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[arg(long)]
    #[serde(skip)]
    pub out: PathBuf,
}

#[derive(Clone, Debug, Args, Serialize)]
pub struct PriorSimArgs {
    #[arg(long, default_value_t = 50)]
    pub p: usize,
    #[arg(long, default_value_t = 0.01)]
    pub v0: f64,
    #[arg(long, default_value_t = 1.0)]
    pub v1: f64,
    /// One or more rates, comma separated.
    #[arg(long, value_delimiter = ',', default_value = "10")]
    pub lambda: Vec<f64>,
    #[arg(long, default_value_t = 1e-4)]
    pub pi_delta: f64,
    #[arg(long, default_value_t = 1000)]
    pub burn_in: usize,
    #[arg(long, default_value_t = 1000)]
    pub iters: usize,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[arg(long)]
    #[serde(skip)]
    pub out: PathBuf,
}

#[derive(Clone, Debug, Args, Serialize)]
pub struct BenchmarkArgs {
    /// CSV with header `scenario,missing[,n,p]`.
    #[arg(long)]
    pub grid: PathBuf,
    #[arg(long, default_value_t = 10)]
    pub replicates: usize,
    /// Prior variance of the latent means.
    #[arg(long, default_value_t = 1.0)]
    pub prior_var: f64,
    #[command(flatten)]
    pub chain: ChainArgs,
    #[arg(long)]
    #[serde(skip)]
    pub out: PathBuf,
}

fn config_json<T: Serialize>(args: &T) -> serde_json::Value {
    serde_json::to_value(args).expect("argument structs serialize to JSON")
}

fn fixed_edges(path: Option<&Path>, data: &crate::data::MixedDataset) -> Result<EdgeMask> {
    match path {
        Some(p) => load_fixed_edges(p, data.schema()),
        None => Ok(EdgeMask::empty(data.p())),
    }
}

fn owned_names(data: &crate::data::MixedDataset) -> Vec<String> {
    data.names().into_iter().map(String::from).collect()
}

fn fit_graph(args: &FitGraphArgs) -> Result<()> {
    let data = load_dataset(&args.data, &args.schema)?;
    eprintln!("fit-graph: {} rows, {} variables, {} missing cells", data.n(), data.p(), data.missing_count());
    let prior = match &args.prior {
        Some(p) => load_marginal_prior(p, data.schema(), args.prior_var)?,
        None => MarginalPrior::new(MarginalPrior::standard(data.p()).mu0, args.prior_var)?,
    };
    let fixed = fixed_edges(args.fixed_edges.as_deref(), &data)?;
    let cfg = args.chain.chain();
    let out = run_chain(&data, &prior, &args.chain.hyper.hyper(), &cfg, &fixed)?;
    ensure_dir(&args.out)?;
    emit_fit(&args.out, &owned_names(&data), &["all".to_string()], &out, &fixed)?;
    let manifest = RunManifest::new("fit-graph", cfg.seed, config_json(args))
        .input("data", Some(&args.data))
        .input("schema", Some(&args.schema))
        .input("prior", args.prior.as_deref())
        .input("fixed_edges", args.fixed_edges.as_deref());
    write_manifest(&args.out, &manifest)
}

fn classify(args: &ClassifyArgs) -> Result<()> {
    let data = load_dataset(&args.data, &args.schema)?;
    let (prior, names) = load_condprob_prior(&args.condprob, data.schema(), (args.clamp_low, args.clamp_high))?;
    let data = align_labels(data, &names)?;
    let labeled = data.labeled_mask().iter().filter(|&&l| l).count();
    eprintln!(
        "classify: {} rows ({labeled} labeled), {} variables, {} classes",
        data.n(),
        data.p(),
        names.len()
    );
    let continuous = data.continuous_indices();
    if !continuous.is_empty() {
        eprintln!(
            "warning: {} continuous variable(s) are left out of the naive Bayes starting values",
            continuous.len()
        );
    }
    let fixed = fixed_edges(args.fixed_edges.as_deref(), &data)?;
    let cfg = ClassifierConfig {
        chain: args.chain.chain(),
        sigma_mode: args.sigma_c,
        include_pi: !args.no_pi,
        split_populations: args.split_populations,
    };
    let (cls, chain) = run_classifier(&data, &prior, &args.chain.hyper.hyper(), &cfg, &fixed)?;
    ensure_dir(&args.out)?;
    emit_classification(&args.out, &owned_names(&data), &cls, &chain, &fixed)?;
    let manifest = RunManifest::new("classify", cfg.chain.seed, config_json(args))
        .input("data", Some(&args.data))
        .input("schema", Some(&args.schema))
        .input("condprob", Some(&args.condprob))
        .input("fixed_edges", args.fixed_edges.as_deref());
    write_manifest(&args.out, &manifest)
}

fn simulate_cmd(args: &SimulateArgs) -> Result<()> {
    let sc = SimScenario {
        n: args.n,
        p: args.p,
        continuous_fraction: args.continuous_fraction,
        missing_fraction: args.missing,
        misspecified: args.scenario == ScenarioArg::Ii,
        c_graph: args.c_graph,
        n_classes: args.classes,
        seed: args.seed,
        ..SimScenario::default()
    };
    let sim = simulate(&sc)?;
    ensure_dir(&args.out)?;
    emit_simulation(&args.out, &sim, args.labeled)?;
    eprintln!(
        "simulate: {} rows, {} variables, {} true edges",
        sim.data.n(),
        sim.data.p(),
        sim.truth.graph.edges.count()
    );
    write_manifest(&args.out, &RunManifest::new("simulate", args.seed, config_json(args)))
}

fn prior_sim(args: &PriorSimArgs) -> Result<()> {
    if args.lambda.is_empty() {
        return Err(Error::Config("give at least one --lambda".into()));
    }
    let mut summaries = Vec::new();
    for (k, &lambda) in args.lambda.iter().enumerate() {
        let hyper = SpikeSlabHyper {
            v0: args.v0,
            v1: args.v1,
            lambda,
            pi_delta: args.pi_delta,
        };
        let mut rng = RngStream::new(args.seed, k as u64);
        let s = simulate_prior_edge_probability(args.p, &hyper, args.burn_in, args.iters, &mut rng)?;
        eprintln!("prior-sim: lambda {lambda}: median edge fraction {:.4}", s.median);
        summaries.push((lambda, s));
    }
    ensure_dir(&args.out)?;
    write_table(
        &args.out.join("prior_edge_summary.csv"),
        &["lambda", "median", "lower", "upper"].map(String::from),
        summaries
            .iter()
            .map(|(l, s)| vec![fmt_f64(*l), fmt_f64(s.median), fmt_f64(s.lower), fmt_f64(s.upper)]),
    )?;
    write_table(
        &args.out.join("prior_edge_trace.csv"),
        &["lambda", "draw", "edge_fraction"].map(String::from),
        summaries.iter().flat_map(|(l, s)| {
            s.fractions
                .iter()
                .enumerate()
                .map(move |(i, f)| vec![fmt_f64(*l), i.to_string(), fmt_f64(*f)])
        }),
    )?;
    write_manifest(&args.out, &RunManifest::new("prior-sim", args.seed, config_json(args)))
}

fn benchmark(args: &BenchmarkArgs) -> Result<()> {
    let cells = load_grid(&args.grid)?;
    let chain = args.chain.chain();
    let cfg = BenchmarkConfig {
        replicates: args.replicates,
        base_seed: chain.seed,
        chain,
        hyper: args.chain.hyper.hyper(),
        prior_sigma2: args.prior_var,
    };
    eprintln!("benchmark: {} cells x {} replicates x 2 priors", cells.len(), cfg.replicates);
    let result = run_benchmark(&cells, &cfg)?;
    ensure_dir(&args.out)?;
    write_benchmark(&args.out, &result)?;
    let manifest = RunManifest::new("benchmark", cfg.base_seed, config_json(args)).input("grid", Some(&args.grid));
    write_manifest(&args.out, &manifest)
}

/// Execute a parsed command line.
pub fn run(cli: &Cli) -> Result<()> {
    match &cli.command {
        Command::FitGraph(a) => fit_graph(a),
        Command::Classify(a) => classify(a),
        Command::Simulate(a) => simulate_cmd(a),
        Command::PriorSim(a) => prior_sim(a),
        Command::Benchmark(a) => benchmark(a),
    }
}

/// Parse `args`, run, and return the process exit code: 0 on success, 2 on
/// invalid arguments or input files, 1 on any other failure.
pub fn main_entry<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match run(&cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            if e.is_validation() {
                2
            } else {
                1
            }
        }
    }
}
