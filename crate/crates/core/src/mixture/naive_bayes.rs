use nalgebra::{DMatrix, DVector};

use super::condprob::ConditionalProbabilityPrior;
use crate::data::MixedDataset;
use crate::error::{Error, Result};

/// Output of the conditional-independence baseline.
#[derive(Clone, Debug)]
pub struct NaiveBayesOutput {
    /// n×C class probabilities.
    pub probs: DMatrix<f64>,
    /// Column means of `probs`.
    pub csmf: DVector<f64>,
    /// Continuous variables left out of the likelihood.
    pub ignored: Vec<String>,
}

/// Class probabilities `∝ π_c ∏_j P(X_ij | c)` treating variables as
/// independent given the class. Missing cells and continuous variables
/// contribute nothing; the latter are listed in the output.
pub fn naive_bayes_classify(
    data: &MixedDataset,
    prior: &ConditionalProbabilityPrior,
    pi0: &[f64],
) -> Result<NaiveBayesOutput> {
    let classes = prior.n_classes();
    if prior.probs.ncols() != data.p() {
        return Err(Error::Config(format!(
            "probability table has {} columns, data has {} variables",
            prior.probs.ncols(),
            data.p()
        )));
    }
    if pi0.len() != classes || pi0.iter().any(|&v| !(v >= 0.0)) || pi0.iter().sum::<f64>() <= 0.0 {
        return Err(Error::InvalidParameter(
            "prior class fractions must be nonnegative with one entry per class".into(),
        ));
    }
    let binary: Vec<usize> = (0..data.p()).filter(|&j| data.is_binary(j)).collect();
    let ignored = data
        .continuous_indices()
        .into_iter()
        .map(|j| data.schema()[j].name.clone())
        .collect();
    let mut probs = DMatrix::zeros(data.n(), classes);
    for i in 0..data.n() {
        let mut logw: Vec<f64> = pi0.iter().map(|v| v.ln()).collect();
        for &j in &binary {
            let Some(x) = data.latent(i, j) else { continue };
            for (c, w) in logw.iter_mut().enumerate() {
                let q = prior.probs[(c, j)];
                *w += if x > 0.5 { q.ln() } else { (1.0 - q).ln() };
            }
        }
        let max = logw.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        if !max.is_finite() {
            return Err(Error::Degenerate(format!(
                "row {i} has zero probability under every class"
            )));
        }
        let total: f64 = logw.iter().map(|w| (w - max).exp()).sum();
        for (c, w) in logw.iter().enumerate() {
            probs[(i, c)] = (w - max).exp() / total;
        }
    }
    let csmf = DVector::from_fn(classes, |c, _| probs.column(c).mean());
    Ok(NaiveBayesOutput { probs, csmf, ignored })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::VariableSchema;

    fn one_symptom(x: Option<f64>) -> (MixedDataset, ConditionalProbabilityPrior) {
        let data = MixedDataset::new(vec![VariableSchema::binary("s")], vec![vec![x]]).unwrap();
        let prior =
            ConditionalProbabilityPrior::new(DMatrix::from_column_slice(2, 1, &[0.8, 0.2]), vec![true]).unwrap();
        (data, prior)
    }

    #[test]
    fn two_term_bayes_rule() {
        let (data, prior) = one_symptom(Some(1.0));
        let out = naive_bayes_classify(&data, &prior, &[0.5, 0.5]).unwrap();
        assert!((out.probs[(0, 0)] - 0.8).abs() < 1e-12);
        assert!((out.probs[(0, 1)] - 0.2).abs() < 1e-12);
    }

    #[test]
    fn missing_evidence_returns_the_prior() {
        let (data, prior) = one_symptom(None);
        let out = naive_bayes_classify(&data, &prior, &[0.3, 0.7]).unwrap();
        assert!((out.probs[(0, 0)] - 0.3).abs() < 1e-12);
    }

    #[test]
    fn continuous_columns_are_reported() {
        let data = MixedDataset::new(
            vec![VariableSchema::binary("s"), VariableSchema::continuous("t", None)],
            vec![vec![Some(0.0), Some(3.2)]],
        )
        .unwrap();
        let prior = ConditionalProbabilityPrior::new(
            DMatrix::from_row_slice(2, 2, &[0.8, 0.0, 0.2, 0.0]),
            vec![true, false],
        )
        .unwrap();
        let out = naive_bayes_classify(&data, &prior, &[0.5, 0.5]).unwrap();
        assert_eq!(out.ignored, vec!["t".to_string()]);
        assert!((out.probs[(0, 0)] - 0.2).abs() < 1e-12);
    }
}
