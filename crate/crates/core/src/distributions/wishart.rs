use nalgebra::DMatrix;
use rand::Rng;

use super::{sample_gamma, std_normal};
use crate::error::{Error, Result};
use crate::linalg::{cholesky, symmetrize};

/// Wishart(df, V) draw by the Bartlett decomposition. Mean is `df * V`.
///
/// Real-valued `df > p - 1` is accepted.
pub fn sample_wishart<R: Rng + ?Sized>(
    df: f64,
    scale_matrix: &DMatrix<f64>,
    rng: &mut R,
) -> Result<DMatrix<f64>> {
    let p = scale_matrix.nrows();
    if scale_matrix.ncols() != p || p == 0 {
        return Err(Error::InvalidParameter(
            "Wishart scale matrix must be square and non-empty".into(),
        ));
    }
    if !(df > (p as f64) - 1.0) || !df.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "Wishart df must exceed p - 1 = {}, got {df}",
            p - 1
        )));
    }
    let l = cholesky(scale_matrix, "Wishart scale matrix")?.unpack();
    let mut a = DMatrix::<f64>::zeros(p, p);
    for i in 0..p {
        let chi2 = sample_gamma(0.5 * (df - i as f64), 2.0, rng)?;
        a[(i, i)] = chi2.sqrt();
        for j in 0..i {
            a[(i, j)] = std_normal(rng);
        }
    }
    let la = l * a;
    Ok(symmetrize(&la * la.transpose()))
}
