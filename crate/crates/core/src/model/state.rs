use nalgebra::{DMatrix, DVector};
use rand::Rng;

use crate::data::MixedDataset;
use crate::distributions::{sample_truncated_normal, std_normal, Interval};
use crate::error::{Error, Result};

/// Symmetric p×p boolean mask over variable pairs; the diagonal is always false.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EdgeMask {
    p: usize,
    bits: Vec<bool>,
}

impl EdgeMask {
    pub fn empty(p: usize) -> Self {
        Self {
            p,
            bits: vec![false; p * p],
        }
    }

    pub fn full(p: usize) -> Self {
        let mut m = Self::empty(p);
        for j in 0..p {
            for k in (j + 1)..p {
                m.set(j, k, true);
            }
        }
        m
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn get(&self, j: usize, k: usize) -> bool {
        self.bits[j * self.p + k]
    }

    /// Set both orientations. Diagonal entries are ignored.
    pub fn set(&mut self, j: usize, k: usize, value: bool) {
        if j == k {
            return;
        }
        self.bits[j * self.p + k] = value;
        self.bits[k * self.p + j] = value;
    }

    /// Number of unordered pairs set.
    pub fn count(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count() / 2
    }

    /// Unordered pairs `(j, k)` with `j < k` that are set.
    pub fn pairs(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for j in 0..self.p {
            for k in (j + 1)..self.p {
                if self.get(j, k) {
                    out.push((j, k));
                }
            }
        }
        out
    }

    pub fn from_pairs(p: usize, pairs: &[(usize, usize)]) -> Self {
        let mut m = Self::empty(p);
        for &(j, k) in pairs {
            m.set(j, k, true);
        }
        m
    }

    pub fn union(&self, other: &EdgeMask) -> EdgeMask {
        EdgeMask {
            p: self.p,
            bits: self.bits.iter().zip(&other.bits).map(|(a, b)| *a || *b).collect(),
        }
    }
}

/// Latent correlation R, continuous-variable scales Λ and the graph δ.
#[derive(Clone, Debug, PartialEq)]
pub struct CorrelationState {
    pub r: DMatrix<f64>,
    pub lambda: DVector<f64>,
    pub delta: EdgeMask,
    pub fixed_edges: EdgeMask,
}

impl CorrelationState {
    /// Covariance of the latent vector, ΛRΛ.
    pub fn latent_covariance(&self) -> DMatrix<f64> {
        let p = self.r.nrows();
        DMatrix::from_fn(p, p, |j, k| self.lambda[j] * self.r[(j, k)] * self.lambda[k])
    }
}

/// Everything the Gibbs cycle updates, for one or several latent classes.
#[derive(Clone, Debug)]
pub struct ModelState {
    /// n×p latent values.
    pub z: DMatrix<f64>,
    /// C×p class means; a single-class model has one row.
    pub mu: DMatrix<f64>,
    /// Class of every row (all zero for a single-class model).
    pub y: Vec<usize>,
    pub corr: CorrelationState,
    /// Prior variance of each class mean around its prior center.
    pub sigma2: Vec<f64>,
}

/// Truncation domain of a latent cell, or `None` when the cell is observed.
pub(crate) fn cell_interval(data: &MixedDataset, i: usize, j: usize) -> Option<Interval> {
    match data.latent(i, j) {
        None => Some(Interval::REAL_LINE),
        Some(x) if data.is_binary(j) => Some(if x > 0.5 {
            Interval::POSITIVE
        } else {
            Interval::NEGATIVE
        }),
        Some(_) => None,
    }
}

/// Starting state: R = I, μ at its prior center, δ at the fixed edges,
/// Λ at the sample standard deviation of each continuous column, and Z drawn
/// from its truncated marginal.
pub fn init_state<R: Rng + ?Sized>(
    data: &MixedDataset,
    mu0: &DMatrix<f64>,
    y: Vec<usize>,
    sigma2: Vec<f64>,
    fixed_edges: &EdgeMask,
    rng: &mut R,
) -> Result<ModelState> {
    let (n, p) = (data.n(), data.p());
    let classes = mu0.nrows();
    if mu0.ncols() != p {
        return Err(Error::Config(format!(
            "prior means have {} columns, data has {p} variables",
            mu0.ncols()
        )));
    }
    if y.len() != n || y.iter().any(|&c| c >= classes) {
        return Err(Error::Config("class assignments do not match the data".into()));
    }
    if sigma2.len() != classes {
        return Err(Error::Config("one prior variance per class is required".into()));
    }
    if fixed_edges.p() != p {
        return Err(Error::Config("fixed-edge mask has the wrong dimension".into()));
    }
    let mut lambda = DVector::from_element(p, 1.0);
    for j in data.continuous_indices() {
        lambda[j] = sample_sd((0..n).filter_map(|i| data.latent(i, j))).unwrap_or(1.0);
        if !(lambda[j] > 0.0) {
            lambda[j] = 1.0;
        }
    }
    let mu = mu0.clone();
    let mut z = DMatrix::zeros(n, p);
    for i in 0..n {
        for j in 0..p {
            let m = mu[(y[i], j)];
            z[(i, j)] = match cell_interval(data, i, j) {
                None => data.latent(i, j).unwrap(),
                Some(iv) if iv == Interval::REAL_LINE => m + lambda[j] * std_normal(rng),
                Some(iv) => sample_truncated_normal(m, lambda[j], iv, rng)?,
            };
        }
    }
    Ok(ModelState {
        z,
        mu,
        y,
        corr: CorrelationState {
            r: DMatrix::identity(p, p),
            lambda,
            delta: fixed_edges.clone(),
            fixed_edges: fixed_edges.clone(),
        },
        sigma2,
    })
}

/// Sample standard deviation with the n - 1 denominator; `None` below two values.
pub(crate) fn sample_sd(values: impl Iterator<Item = f64>) -> Option<f64> {
    let v: Vec<f64> = values.collect();
    if v.len() < 2 {
        return None;
    }
    let m = v.iter().sum::<f64>() / v.len() as f64;
    let ss = v.iter().map(|x| (x - m).powi(2)).sum::<f64>();
    Some((ss / (v.len() - 1) as f64).sqrt())
}
