//! Small dense helpers on top of nalgebra.

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};

use crate::error::{Error, Result};

const JITTER: f64 = 1e-10;

/// Cholesky factorization with a single diagonal-jitter retry.
pub fn cholesky(m: &DMatrix<f64>, what: &str) -> Result<Cholesky<f64, Dyn>> {
    if let Some(c) = Cholesky::new(m.clone()) {
        return Ok(c);
    }
    let mut jittered = m.clone();
    for i in 0..jittered.nrows() {
        jittered[(i, i)] += JITTER;
    }
    Cholesky::new(jittered)
        .ok_or_else(|| Error::Decomposition(format!("{what} is not positive definite")))
}

/// Inverse of a symmetric positive definite matrix, symmetrized.
pub fn spd_inverse(m: &DMatrix<f64>, what: &str) -> Result<DMatrix<f64>> {
    let inv = cholesky(m, what)?.inverse();
    Ok(symmetrize(inv))
}

pub fn symmetrize(mut m: DMatrix<f64>) -> DMatrix<f64> {
    let p = m.nrows();
    for i in 0..p {
        for j in (i + 1)..p {
            let avg = 0.5 * (m[(i, j)] + m[(j, i)]);
            m[(i, j)] = avg;
            m[(j, i)] = avg;
        }
    }
    m
}

/// Scale a covariance-like matrix to unit diagonal. Returns the correlation
/// matrix and the vector of standard deviations.
pub fn to_correlation(cov: &DMatrix<f64>) -> (DMatrix<f64>, DVector<f64>) {
    let p = cov.nrows();
    let sd = DVector::from_iterator(p, (0..p).map(|i| cov[(i, i)].sqrt()));
    let mut r = DMatrix::zeros(p, p);
    for i in 0..p {
        for j in 0..p {
            r[(i, j)] = if i == j {
                1.0
            } else {
                cov[(i, j)] / (sd[i] * sd[j])
            };
        }
    }
    (symmetrize(r), sd)
}

/// Indices `0..p` with `skip` removed.
pub(crate) fn others(p: usize, skip: usize) -> Vec<usize> {
    (0..p).filter(|&k| k != skip).collect()
}

pub(crate) fn submatrix(m: &DMatrix<f64>, rows: &[usize], cols: &[usize]) -> DMatrix<f64> {
    DMatrix::from_fn(rows.len(), cols.len(), |i, j| m[(rows[i], cols[j])])
}
