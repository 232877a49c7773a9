//! Column-wise update of the expanded precision under the spike-and-slab prior.
//!
//! For column j write u = Ω[-j, j] and v = ω_jj − uᵀΩ[-j,-j]⁻¹u. The pair
//! (u, v) is redrawn in two slice-sampling steps, each with a Gaussian
//! reference that captures the conjugate part of the conditional. Every
//! non-Gaussian term, including the dependence of all σ_k² on (u, v), goes
//! into the slice likelihood, so the column conditional is targeted exactly.
//! Since det(Ω) = v · det(Ω[-j,-j]) and v > 0 is enforced, Ω stays positive
//! definite after every column.

use nalgebra::{DMatrix, DVector};
use rand::Rng;

use super::config::{SpikeSlabHyper, VSampling};
use super::expansion::ScaleTarget;
use super::state::EdgeMask;
use crate::distributions::{ess_step, normal_logpdf, std_normal};
use crate::error::{Error, Result};
use crate::linalg::{cholesky, others, spd_inverse, submatrix};

/// One sweep over all columns of Ω. `sigma` must hold Ω⁻¹ on entry and is
/// kept in sync by rank-one updates, then recomputed from Ω at the end.
#[allow(clippy::too_many_arguments)]
pub fn update_omega_ss<R: Rng + ?Sized>(
    omega: &mut DMatrix<f64>,
    sigma: &mut DMatrix<f64>,
    s: &DMatrix<f64>,
    n: usize,
    delta: &EdgeMask,
    hyper: &SpikeSlabHyper,
    v_sampling: VSampling,
    rng: &mut R,
) -> Result<()> {
    sweep_columns(omega, sigma, s, n, delta, hyper, v_sampling, None, rng)
}

/// [`update_omega_ss`] with the expanded-scale factor of the exact expansion
/// folded into every column target.
#[allow(clippy::too_many_arguments)]
pub(crate) fn sweep_columns<R: Rng + ?Sized>(
    omega: &mut DMatrix<f64>,
    sigma: &mut DMatrix<f64>,
    s: &DMatrix<f64>,
    n: usize,
    delta: &EdgeMask,
    hyper: &SpikeSlabHyper,
    v_sampling: VSampling,
    target: Option<&ScaleTarget>,
    rng: &mut R,
) -> Result<()> {
    let p = omega.nrows();
    let vsq = DMatrix::from_fn(p, p, |j, k| {
        let v = if delta.get(j, k) { hyper.v1 } else { hyper.v0 };
        v * v
    });
    // Without data the moment-matched normal is a poor stand-in for the
    // Gamma kernel, so the reweighted form is always used.
    let exact_v = n == 0 || v_sampling == VSampling::ExactReweighted;
    for j in 0..p {
        let col = Column::new(j, omega, sigma, s, n, &vsq, hyper, target)?;
        let u0: DVector<f64> = DVector::from_iterator(p - 1, col.idx.iter().map(|&k| omega[(k, j)]));
        let v0 = omega[(j, j)] - u0.dot(&(&col.o11inv * &u0));
        if !(v0 > 0.0) {
            return Err(Error::Sampler(format!(
                "Schur complement of column {j} is not positive ({v0})"
            )));
        }
        let u = col.sample_u(&u0, v0, rng)?;
        let v = col.sample_v(&u, v0, exact_v, rng)?;

        let w = &col.o11inv * &u;
        let c = u.dot(&w);
        for (a, &k) in col.idx.iter().enumerate() {
            omega[(k, j)] = u[a];
            omega[(j, k)] = u[a];
            sigma[(k, j)] = -w[a] / v;
            sigma[(j, k)] = -w[a] / v;
            for (b, &l) in col.idx.iter().enumerate() {
                sigma[(k, l)] = col.o11inv[(a, b)] + w[a] * w[b] / v;
            }
        }
        omega[(j, j)] = v + c;
        sigma[(j, j)] = 1.0 / v;
    }
    // Bound the floating-point drift of the rank-one updates.
    *sigma = spd_inverse(omega, "expanded precision")?;
    Ok(())
}

struct Column<'a> {
    j: usize,
    idx: Vec<usize>,
    n: f64,
    o11inv: DMatrix<f64>,
    s12: DVector<f64>,
    sjj: f64,
    /// ω_kk for k ≠ j, fixed during this column.
    okk: DVector<f64>,
    /// Slab or spike variance for each (j, k).
    vsq_j: DVector<f64>,
    /// ω_kl² / v²_kl among the other columns, zero diagonal.
    q11: DMatrix<f64>,
    lambda: f64,
    target: Option<&'a ScaleTarget>,
}

impl<'a> Column<'a> {
    #[allow(clippy::too_many_arguments)]
    fn new(
        j: usize,
        omega: &DMatrix<f64>,
        sigma: &DMatrix<f64>,
        s: &DMatrix<f64>,
        n: usize,
        vsq: &DMatrix<f64>,
        hyper: &SpikeSlabHyper,
        target: Option<&'a ScaleTarget>,
    ) -> Result<Self> {
        let p = omega.nrows();
        let idx = others(p, j);
        let m = idx.len();
        let s11 = submatrix(sigma, &idx, &idx);
        let s12 = DVector::from_iterator(m, idx.iter().map(|&k| sigma[(k, j)]));
        let o11inv = s11 - &s12 * s12.transpose() / sigma[(j, j)];
        let q11 = DMatrix::from_fn(m, m, |a, b| {
            if a == b {
                0.0
            } else {
                let w = omega[(idx[a], idx[b])];
                w * w / vsq[(idx[a], idx[b])]
            }
        });
        Ok(Self {
            j,
            n: n as f64,
            s12: DVector::from_iterator(m, idx.iter().map(|&k| s[(k, j)])),
            sjj: s[(j, j)],
            okk: DVector::from_iterator(m, idx.iter().map(|&k| omega[(k, k)])),
            vsq_j: DVector::from_iterator(m, idx.iter().map(|&k| vsq[(j, k)])),
            q11,
            o11inv,
            lambda: hyper.lambda,
            target,
            idx,
        })
    }

    /// Log of the column conditional (up to a constant) at (u, v).
    fn log_target(&self, u: &DVector<f64>, v: f64) -> f64 {
        if !(v > 0.0) {
            return f64::NEG_INFINITY;
        }
        let w = &self.o11inv * u;
        let c = u.dot(&w);
        let m = self.idx.len();
        let x = DVector::from_fn(m, |a, _| self.o11inv[(a, a)] + w[a] * w[a] / v);
        let mut val = 0.5 * self.n * v.ln() - self.s12.dot(u) - 0.5 * self.sjj * (v + c);
        let mut cross = 0.0;
        let mut scale = 0.0;
        let mut inv = 0.0;
        for a in 0..m {
            cross += u[a] * u[a] * x[a] / self.vsq_j[a];
            scale += x[a] * self.okk[a];
            inv += 1.0 / x[a];
        }
        val -= cross / (2.0 * v);
        val -= 0.25 * x.dot(&(&self.q11 * &x));
        val -= 0.5 * self.lambda * ((v + c) / v + scale);
        val -= 0.5 * (v + inv);
        if let Some(t) = self.target {
            let j = self.j;
            let idx = &self.idx;
            val += t.log_g(|k| {
                if k == j {
                    1.0 / v
                } else {
                    let a = if k < j { k } else { k - 1 };
                    debug_assert_eq!(idx[a], k);
                    x[a]
                }
            });
        }
        val
    }

    fn sample_u<R: Rng + ?Sized>(&self, u0: &DVector<f64>, v: f64, rng: &mut R) -> Result<DVector<f64>> {
        let m = self.idx.len();
        // The reference may depend on v and the other columns but not on u:
        // σ_k² is replaced by its u-free part (Ω[-j,-j]⁻¹)_kk.
        let mut prec = &self.o11inv * (self.sjj + self.lambda / v);
        for a in 0..m {
            prec[(a, a)] += self.o11inv[(a, a)] / (v * self.vsq_j[a]);
        }
        let chol = cholesky(&prec, "column reference precision")?;
        let mean = -chol.solve(&self.s12);
        let l = chol.l();
        let lt = l.transpose();
        let mut log_lik = |u: &DVector<f64>| {
            let r = &lt * (u - &mean);
            self.log_target(u, v) + 0.5 * r.norm_squared()
        };
        let draw = |rng: &mut R| {
            let e = DVector::from_fn(m, |_, _| std_normal(rng));
            lt.solve_upper_triangular(&e).expect("triangular factor is nonsingular")
        };
        ess_step(u0, None, &mean, draw, &mut log_lik, rng)
            .map(|(u, _)| u)
            .map_err(|e| Error::Sampler(format!("column {} off-diagonals: {e}", self.j)))
    }

    fn sample_v<R: Rng + ?Sized>(
        &self,
        u: &DVector<f64>,
        v0: f64,
        exact: bool,
        rng: &mut R,
    ) -> Result<f64> {
        let rate = self.sjj + 1.0;
        let ref_mean = (self.n + 2.0) / rate;
        let ref_sd = (2.0 * self.n + 4.0).sqrt() / rate;
        let mut log_lik = |x: &DVector<f64>| {
            let v = x[0];
            if !(v > 0.0) {
                return f64::NEG_INFINITY;
            }
            let t = self.log_target(u, v);
            if exact {
                t - normal_logpdf(v, ref_mean, ref_sd)
            } else {
                t - (0.5 * self.n * v.ln() - 0.5 * rate * v)
            }
        };
        let mean = DVector::from_element(1, ref_mean);
        let draw = |rng: &mut R| DVector::from_element(1, ref_sd * std_normal(rng));
        ess_step(&DVector::from_element(1, v0), None, &mean, draw, &mut log_lik, rng)
            .map(|(v, _)| v[0])
            .map_err(|e| Error::Sampler(format!("column {} Schur complement: {e}", self.j)))
    }
}
