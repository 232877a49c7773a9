//! Latent Gaussian mixture classification with class-fraction estimation,
//! plus the conditional-independence baseline it is compared against.

mod bias;
mod classifier;
mod condprob;
mod naive_bayes;
mod updates;

pub use bias::{independence_bias_table, IndependenceBias, Rational, Table};
pub use classifier::{run_classifier, ClassificationOutput, ClassifierConfig, SigmaMode};
pub use condprob::ConditionalProbabilityPrior;
pub use naive_bayes::{naive_bayes_classify, NaiveBayesOutput};
pub(crate) use updates::sample_class;
pub use updates::{
    assignment_probabilities, softmax, update_assignments, update_csmf, update_sigma2_c, CsmfState,
};
