//! Synthetic data with a known sparse latent graph.
//!
//! Node positions are drawn uniformly on the unit square and each pair is
//! joined with a probability that decays with their distance. The precision
//! matrix has unit diagonal and `t` on every edge, with `t` as large as the
//! eigenvalue floor allows, and is finally rescaled so that its inverse is a
//! correlation matrix. Mixed data are thresholded draws from the latent
//! normal, optionally with misspecified priors and distorted continuous
//! columns.

use nalgebra::{DMatrix, DVector};
use rand::seq::index::sample;
use rand::Rng;
use rand_distr::{Dirichlet, Distribution};
use serde::{Deserialize, Serialize};

use crate::data::{MixedDataset, VariableSchema};
use crate::distributions::std_normal;
use crate::error::{Error, Result};
use crate::linalg::{cholesky, spd_inverse, symmetrize};
use crate::model::{EdgeMask, MarginalPrior};
use crate::rng::RngStream;

/// Smallest eigenvalue the precision matrix must keep before rescaling.
const EIGEN_FLOOR: f64 = 0.01;

/// How the probability of an edge depends on the distance `d` between nodes.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EdgeRule {
    /// `(2π)^{-1/2} exp(−d / (2c))`; gives about 6.4 edges per node at
    /// c = 0.2 and p = 50.
    #[default]
    Distance,
    /// `(2π)^{-1/2} exp(−d² / (2c))`.
    SquaredDistance,
    /// `(2π)^{-1/2} exp(d) / (2c)` capped at 1, as the formula is sometimes
    /// printed. Kept for comparison only: it links almost every pair.
    Literal,
}

impl EdgeRule {
    pub fn probability(self, d: f64, c: f64) -> f64 {
        let norm = 1.0 / (2.0 * std::f64::consts::PI).sqrt();
        match self {
            EdgeRule::Distance => norm * (-d / (2.0 * c)).exp(),
            EdgeRule::SquaredDistance => norm * (-d * d / (2.0 * c)).exp(),
            EdgeRule::Literal => (norm * d.exp() / (2.0 * c)).min(1.0),
        }
    }
}

/// Settings for one synthetic data set.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimScenario {
    pub n: usize,
    pub p: usize,
    pub continuous_fraction: f64,
    pub missing_fraction: f64,
    /// Distort the prior means and the continuous columns.
    pub misspecified: bool,
    pub c_graph: f64,
    pub n_classes: usize,
    pub seed: u64,
    pub edge_rule: EdgeRule,
}

impl Default for SimScenario {
    fn default() -> Self {
        Self {
            n: 200,
            p: 50,
            continuous_fraction: 0.1,
            missing_fraction: 0.0,
            misspecified: false,
            c_graph: 0.2,
            n_classes: 1,
            seed: 1,
            edge_rule: EdgeRule::Distance,
        }
    }
}

impl SimScenario {
    pub fn validate(&self) -> Result<()> {
        if self.n == 0 || self.p < 2 || self.n_classes == 0 {
            return Err(Error::InvalidParameter(
                "simulation needs n >= 1, p >= 2 and at least one class".into(),
            ));
        }
        if !(0.0..=1.0).contains(&self.continuous_fraction) {
            return Err(Error::InvalidParameter("continuous fraction must lie in [0, 1]".into()));
        }
        if !(0.0..1.0).contains(&self.missing_fraction) {
            return Err(Error::InvalidParameter("missing fraction must lie in [0, 1)".into()));
        }
        if !(self.c_graph > 0.0) {
            return Err(Error::InvalidParameter("graph scale c must be positive".into()));
        }
        Ok(())
    }

    pub fn n_continuous(&self) -> usize {
        (self.continuous_fraction * self.p as f64).round() as usize
    }

    /// Continuous variables occupy the last columns.
    pub fn is_continuous(&self, j: usize) -> bool {
        j >= self.p - self.n_continuous()
    }
}

/// A sparse precision matrix and what it implies.
#[derive(Clone, Debug)]
pub struct PrecisionGraph {
    /// Rescaled precision matrix, so that `omega⁻¹` is a correlation matrix.
    pub omega: DMatrix<f64>,
    pub r: DMatrix<f64>,
    pub edges: EdgeMask,
    /// Edge weight before rescaling.
    pub t: f64,
}

/// Everything a benchmark needs to score a fit.
#[derive(Clone, Debug)]
pub struct GroundTruth {
    pub graph: PrecisionGraph,
    /// C×p true latent means.
    pub mu: DMatrix<f64>,
    /// C×p prior means handed to the model (equal to `mu` unless misspecified).
    pub mu0: DMatrix<f64>,
    pub pi: DVector<f64>,
    pub labels: Vec<usize>,
}

#[derive(Clone, Debug)]
pub struct Simulation {
    /// Unlabeled data.
    pub data: MixedDataset,
    pub truth: GroundTruth,
}

impl Simulation {
    /// Single-class prior for the estimation experiments.
    pub fn marginal_prior(&self, sigma2: f64) -> Result<MarginalPrior> {
        MarginalPrior::new(self.truth.mu0.row(0).transpose(), sigma2)
    }

    /// Copy of the data with the true class of the rows selected by `reveal`
    /// attached; other rows stay unlabeled.
    pub fn labeled(&self, reveal: impl Fn(usize) -> bool) -> Result<MixedDataset> {
        let labels = self
            .truth
            .labels
            .iter()
            .enumerate()
            .map(|(i, &c)| reveal(i).then_some(c))
            .collect();
        let names = (1..=self.truth.mu.nrows()).map(|c| format!("class{c}")).collect();
        self.data.clone().with_labels(labels, names)
    }
}

/// Draw a random geometric graph and its precision matrix.
pub fn gen_precision_graph<R: Rng + ?Sized>(p: usize, c: f64, rule: EdgeRule, rng: &mut R) -> Result<PrecisionGraph> {
    if p < 2 || !(c > 0.0) {
        return Err(Error::InvalidParameter("graph needs p >= 2 and c > 0".into()));
    }
    let pts: Vec<(f64, f64)> = (0..p).map(|_| (rng.gen(), rng.gen())).collect();
    let mut edges = EdgeMask::empty(p);
    for j in 0..p {
        for k in (j + 1)..p {
            let d = ((pts[j].0 - pts[k].0).powi(2) + (pts[j].1 - pts[k].1).powi(2)).sqrt();
            if rng.gen::<f64>() < rule.probability(d, c) {
                edges.set(j, k, true);
            }
        }
    }
    let build = |t: f64| DMatrix::from_fn(p, p, |j, k| if j == k { 1.0 } else if edges.get(j, k) { t } else { 0.0 });
    let min_eig = |m: &DMatrix<f64>| m.clone().symmetric_eigenvalues().min();
    let mut t = 0.5;
    let mut step = 0;
    while min_eig(&build(t)) <= EIGEN_FLOOR {
        step += 1;
        // 0.5, 0.4, ..., 0.1, then halving.
        t = if step < 5 { 0.5 - 0.1 * step as f64 } else { 0.1 * 0.5f64.powi(step - 4) };
    }
    let raw = build(t);
    let sigma = spd_inverse(&raw, "generated precision matrix")?;
    let sd = sigma.diagonal().map(f64::sqrt);
    let omega = symmetrize(DMatrix::from_fn(p, p, |j, k| raw[(j, k)] * sd[j] * sd[k]));
    let r = symmetrize(DMatrix::from_fn(p, p, |j, k| {
        if j == k {
            1.0
        } else {
            sigma[(j, k)] / (sd[j] * sd[k])
        }
    }));
    Ok(PrecisionGraph { omega, r, edges, t })
}

/// `sign(μ)·μ²`, the distorted prior mean of the misspecified scenario.
pub fn misspecify(mu: f64) -> f64 {
    mu.signum() * mu * mu
}

fn uniform_means<R: Rng + ?Sized>(rows: usize, p: usize, rng: &mut R) -> DMatrix<f64> {
    DMatrix::from_fn(rows, p, |_, _| rng.gen_range(-1.0..=1.0))
}

/// Draw the observed table given the graph, class means and labels.
fn draw_table<R: Rng + ?Sized>(
    sc: &SimScenario,
    graph: &PrecisionGraph,
    mu: &DMatrix<f64>,
    labels: &[usize],
    rng: &mut R,
) -> Result<MixedDataset> {
    let (n, p) = (sc.n, sc.p);
    let l = cholesky(&graph.r, "true correlation matrix")?.l();
    let mut rows: Vec<Vec<Option<f64>>> = Vec::with_capacity(n);
    for &c in labels {
        let e = DVector::from_fn(p, |_, _| std_normal(rng));
        let z = &l * e;
        rows.push(
            (0..p)
                .map(|j| {
                    let v = z[j] + mu[(c, j)];
                    Some(if !sc.is_continuous(j) {
                        if v > 0.0 {
                            1.0
                        } else {
                            0.0
                        }
                    } else if sc.misspecified {
                        v.cbrt()
                    } else {
                        v
                    })
                })
                .collect(),
        );
    }
    let n_missing = (sc.missing_fraction * (n * p) as f64).round() as usize;
    for cell in sample(rng, n * p, n_missing) {
        rows[cell / p][cell % p] = None;
    }
    let schema = (0..p)
        .map(|j| {
            if sc.is_continuous(j) {
                VariableSchema::continuous(format!("x{}", j + 1), None)
            } else {
                VariableSchema::binary(format!("x{}", j + 1))
            }
        })
        .collect();
    MixedDataset::new(schema, rows)
}

/// One data set from a single latent class with μ_j ~ Unif[−1, 1].
pub fn gen_mixed_data<R: Rng + ?Sized>(sc: &SimScenario, graph: &PrecisionGraph, rng: &mut R) -> Result<Simulation> {
    sc.validate()?;
    if graph.r.nrows() != sc.p {
        return Err(Error::Config("graph dimension does not match the scenario".into()));
    }
    let mu = uniform_means(1, sc.p, rng);
    let labels = vec![0; sc.n];
    let data = draw_table(sc, graph, &mu, &labels, rng)?;
    Ok(Simulation {
        data,
        truth: truth(sc, graph.clone(), mu, DVector::from_element(1, 1.0), labels),
    })
}

/// Several classes sharing one correlation matrix, class fractions from a
/// flat Dirichlet and class means drawn independently per class.
pub fn gen_mixture_data<R: Rng + ?Sized>(sc: &SimScenario, graph: &PrecisionGraph, rng: &mut R) -> Result<Simulation> {
    if sc.n_classes == 1 {
        return gen_mixed_data(sc, graph, rng);
    }
    sc.validate()?;
    let classes = sc.n_classes;
    let pi = DVector::from_vec(
        Dirichlet::new_with_size(1.0, classes)
            .map_err(|e| Error::InvalidParameter(e.to_string()))?
            .sample(rng),
    );
    let mu = uniform_means(classes, sc.p, rng);
    let labels: Vec<usize> = (0..sc.n)
        .map(|_| crate::mixture::sample_class(pi.iter().copied(), rng))
        .collect();
    let data = draw_table(sc, graph, &mu, &labels, rng)?;
    Ok(Simulation {
        data,
        truth: truth(sc, graph.clone(), mu, pi, labels),
    })
}

fn truth(sc: &SimScenario, graph: PrecisionGraph, mu: DMatrix<f64>, pi: DVector<f64>, labels: Vec<usize>) -> GroundTruth {
    let mu0 = if sc.misspecified { mu.map(misspecify) } else { mu.clone() };
    GroundTruth {
        graph,
        mu,
        mu0,
        pi,
        labels,
    }
}

/// Generate the graph and the data from `scenario.seed`: the graph uses
/// stream 0 and the table stream 1.
pub fn simulate(sc: &SimScenario) -> Result<Simulation> {
    sc.validate()?;
    let mut graph_rng = RngStream::new(sc.seed, 0);
    let graph = gen_precision_graph(sc.p, sc.c_graph, sc.edge_rule, &mut graph_rng)?;
    let mut data_rng = RngStream::new(sc.seed, 1);
    gen_mixture_data(sc, &graph, &mut data_rng)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mean_degree_matches_the_design() {
        let mut total = 0.0;
        for seed in 0..100 {
            let mut rng = RngStream::new(seed, 0);
            let g = gen_precision_graph(50, 0.2, EdgeRule::Distance, &mut rng).unwrap();
            total += 2.0 * g.edges.count() as f64 / 50.0;
        }
        let mean = total / 100.0;
        assert!((4.5..=8.5).contains(&mean), "{mean}");
    }

    #[test]
    fn generated_precision_is_valid() {
        for seed in 0..10 {
            let mut rng = RngStream::new(seed, 3);
            let g = gen_precision_graph(30, 0.2, EdgeRule::Distance, &mut rng).unwrap();
            assert!(g.omega.clone().symmetric_eigenvalues().min() > 0.0);
            let inv = spd_inverse(&g.omega, "test").unwrap();
            for j in 0..30 {
                assert!((inv[(j, j)] - 1.0).abs() < 1e-10);
                for k in 0..30 {
                    if j != k {
                        assert_eq!(g.omega[(j, k)] != 0.0, g.edges.get(j, k));
                    }
                }
            }
        }
    }

    #[test]
    fn literal_rule_links_nearly_everything() {
        assert_eq!(EdgeRule::Literal.probability(0.3, 0.2), 1.0);
        assert!(EdgeRule::SquaredDistance.probability(0.5, 0.2) > EdgeRule::Distance.probability(0.5, 0.2));
    }

    #[test]
    fn column_kinds_and_missing_count() {
        let sc = SimScenario {
            n: 40,
            p: 20,
            missing_fraction: 0.2,
            ..Default::default()
        };
        let sim = simulate(&sc).unwrap();
        assert_eq!(sim.data.continuous_indices(), vec![18, 19]);
        assert_eq!(sim.data.missing_count(), 160);
        let none = simulate(&SimScenario { missing_fraction: 0.0, ..sc }).unwrap();
        assert_eq!(none.data.missing_count(), 0);
    }

    #[test]
    fn zero_mean_binary_column_is_balanced() {
        let sc = SimScenario {
            n: 100_000,
            p: 2,
            continuous_fraction: 0.0,
            ..Default::default()
        };
        let graph = PrecisionGraph {
            omega: DMatrix::identity(2, 2),
            r: DMatrix::identity(2, 2),
            edges: EdgeMask::empty(2),
            t: 0.0,
        };
        let mu = DMatrix::zeros(1, 2);
        let mut rng = RngStream::new(4, 0);
        let data = draw_table(&sc, &graph, &mu, &vec![0; sc.n], &mut rng).unwrap();
        let ones = (0..sc.n).filter(|&i| data.raw(i, 0) == Some(1.0)).count();
        assert!((ones as f64 / sc.n as f64 - 0.5).abs() < 0.01);
    }

    #[test]
    fn misspecified_prior_squares_with_sign() {
        assert!((misspecify(0.6) - 0.36).abs() < 1e-15);
        assert!((misspecify(-0.5) + 0.25).abs() < 1e-15);
        let sc = SimScenario {
            n: 30,
            p: 10,
            misspecified: true,
            ..Default::default()
        };
        let sim = simulate(&sc).unwrap();
        for j in 0..10 {
            assert_eq!(sim.truth.mu0[(0, j)], misspecify(sim.truth.mu[(0, j)]));
        }
    }

    #[test]
    fn identical_seeds_give_identical_data() {
        let sc = SimScenario {
            n: 50,
            p: 12,
            missing_fraction: 0.1,
            n_classes: 3,
            ..Default::default()
        };
        let (a, b) = (simulate(&sc).unwrap(), simulate(&sc).unwrap());
        assert_eq!(a.data, b.data);
        assert_eq!(a.truth.labels, b.truth.labels);
    }

    #[test]
    fn label_frequencies_converge_to_pi() {
        let sc = SimScenario {
            n: 100_000,
            p: 3,
            n_classes: 4,
            seed: 11,
            ..Default::default()
        };
        let sim = simulate(&sc).unwrap();
        for c in 0..4 {
            let f = sim.truth.labels.iter().filter(|&&l| l == c).count() as f64 / sc.n as f64;
            assert!((f - sim.truth.pi[c]).abs() < 0.01);
        }
    }

    #[test]
    fn one_class_reduces_to_single_class_generation() {
        let sc = SimScenario {
            n: 30,
            p: 6,
            ..Default::default()
        };
        let mut g_rng = RngStream::new(2, 0);
        let graph = gen_precision_graph(6, 0.2, EdgeRule::Distance, &mut g_rng).unwrap();
        let a = gen_mixture_data(&sc, &graph, &mut RngStream::new(2, 1)).unwrap();
        let b = gen_mixed_data(&sc, &graph, &mut RngStream::new(2, 1)).unwrap();
        assert_eq!(a.data, b.data);
        assert_eq!(a.truth.mu, b.truth.mu);
    }
}
