//! Property tests for the metrics, the bias table, the generators and the
//! file formats.

use lggm::data::{MarginalTransform, MixedDataset, VariableSchema};
use lggm::io::{load_dataset, save_dataset};
use lggm::metrics::{csmf_accuracy, graph_recovery};
use lggm::mixture::{independence_bias_table, Rational};
use lggm::model::EdgeMask;
use lggm::simgen::{gen_precision_graph, simulate, EdgeRule, SimScenario};
use lggm::RngStream;
use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;

fn simplex(k: usize) -> impl Strategy<Value = DVector<f64>> {
    prop::collection::vec(0.0f64..1.0, k).prop_filter_map("all-zero weights", |w| {
        let s: f64 = w.iter().sum();
        (s > 1e-3).then(|| DVector::from_iterator(w.len(), w.iter().map(|x| x / s)))
    })
}

/// Probability that a random positive outranks a random negative, ties
/// counting one half. Equal to the area under the empirical ROC curve.
fn pairwise_auc(pos: &[f64], neg: &[f64]) -> f64 {
    let mut wins = 0.0;
    for &a in pos {
        for &b in neg {
            wins += if a > b {
                1.0
            } else if a == b {
                0.5
            } else {
                0.0
            };
        }
    }
    wins / (pos.len() * neg.len()) as f64
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn csmf_accuracy_is_a_unit_score(
        (est, truth) in (2usize..8).prop_flat_map(|k| (simplex(k), simplex(k)))
    ) {
        let a = csmf_accuracy(&est, &truth).unwrap();
        prop_assert!((0.0..=1.0).contains(&a));
        prop_assert_eq!(csmf_accuracy(&truth, &truth).unwrap(), 1.0);
        let dist: f64 = est.iter().zip(truth.iter()).map(|(x, y)| (x - y).abs()).sum();
        if dist > 1e-9 {
            prop_assert!(a < 1.0);
        }
    }

    #[test]
    fn auc_matches_pairwise_ranking(
        p in 3usize..8,
        seed in any::<u64>(),
        // Coarse scores so that ties occur.
        levels in 2u32..6,
    ) {
        let mut rng = RngStream::new(seed, 0);
        use rand::Rng;
        let mut truth = EdgeMask::empty(p);
        let mut scores = DMatrix::zeros(p, p);
        for j in 0..p {
            for k in (j + 1)..p {
                truth.set(j, k, rng.gen_bool(0.4));
                let s = rng.gen_range(0..levels) as f64 / levels as f64;
                scores[(j, k)] = s;
                scores[(k, j)] = s;
            }
        }
        let (mut pos, mut neg) = (Vec::new(), Vec::new());
        for j in 0..p {
            for k in (j + 1)..p {
                if truth.get(j, k) { pos.push(scores[(j, k)]) } else { neg.push(scores[(j, k)]) }
            }
        }
        prop_assume!(!pos.is_empty() && !neg.is_empty());
        let g = graph_recovery(&scores, &truth, None).unwrap();
        prop_assert!((g.auc - pairwise_auc(&pos, &neg)).abs() < 1e-12);
        prop_assert!((0.0..=1.0).contains(&g.max_f1));
    }

    #[test]
    fn independence_overstates_joint_iff_marginals_cross(
        p1 in 1i64..20, q1 in 1i64..20, p2 in 1i64..20, q2 in 1i64..20
    ) {
        let r = |k| Rational::new(k, 20);
        let b = independence_bias_table(r(p1), r(q1), r(p2), r(q2)).unwrap();
        prop_assert_eq!(b.overstates_joint(), (p1 - p2) * (q1 - q2) < 0);
        // Every posterior over the three classes sums to one exactly.
        for s1 in 0..2 {
            for s2 in 0..2 {
                let total: Rational = b.posterior_true[s1][s2].iter().sum();
                prop_assert_eq!(total, Rational::from_integer(1));
            }
        }
    }

    #[test]
    fn generated_precision_has_unit_covariance_diagonal(p in 2usize..30, seed in any::<u64>()) {
        let mut rng = RngStream::new(seed, 0);
        let g = gen_precision_graph(p, 0.2, EdgeRule::Distance, &mut rng).unwrap();
        prop_assert!(g.omega.clone().cholesky().is_some());
        let cov = g.omega.clone().try_inverse().unwrap();
        for j in 0..p {
            prop_assert!((cov[(j, j)] - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn continuous_column_count_follows_the_fraction(p in 2usize..40, frac in 0.0f64..=1.0) {
        let sc = SimScenario { n: 5, p, continuous_fraction: frac, ..SimScenario::default() };
        let sim = simulate(&sc).unwrap();
        let continuous = (0..p).filter(|&j| !sim.data.is_binary(j)).count();
        prop_assert_eq!(continuous, (frac * p as f64).round() as usize);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn dataset_survives_a_save_and_load(
        rows in prop::collection::vec(
            (prop::option::of(any::<bool>()), prop::option::of(-1e6f64..1e6), prop::option::of(0.001f64..1e3)),
            1..20,
        ),
        labels in prop::collection::vec(prop::option::of(0usize..3), 20),
    ) {
        let schema = vec![
            VariableSchema::binary("b"),
            VariableSchema::continuous("x", None),
            VariableSchema::continuous("y", Some(MarginalTransform::LogNormal { meanlog: 0.5, sdlog: 2.0 })),
        ];
        let n = rows.len();
        let cells = rows
            .into_iter()
            .map(|(b, x, y)| vec![b.map(|v| v as u8 as f64), x, y])
            .collect();
        let labels = labels[..n].to_vec();
        // Class names are stored in order of first appearance, so rename to match.
        let mut order = Vec::new();
        for c in labels.iter().flatten() {
            if !order.contains(c) {
                order.push(*c);
            }
        }
        let mut data = MixedDataset::new(schema, cells).unwrap();
        if !order.is_empty() {
            let relabeled = labels.iter().map(|l| l.map(|c| order.iter().position(|&o| o == c).unwrap())).collect();
            let names = order.iter().map(|c| format!("cause{c}")).collect();
            data = data.with_labels(relabeled, names).unwrap();
        }
        let dir = tempfile::tempdir().unwrap();
        save_dataset(&data, dir.path(), "d").unwrap();
        let back = load_dataset(&dir.path().join("d.csv"), &dir.path().join("d_schema.csv")).unwrap();
        prop_assert_eq!(back, data);
    }
}

#[test]
fn simulation_is_bit_identical_for_a_seed() {
    let sc = SimScenario { n: 50, p: 12, missing_fraction: 0.2, n_classes: 3, seed: 11, ..SimScenario::default() };
    let (a, b) = (simulate(&sc).unwrap(), simulate(&sc).unwrap());
    assert_eq!(a.data, b.data);
    assert_eq!(a.truth.graph.omega, b.truth.graph.omega);
    assert_eq!(a.truth.pi, b.truth.pi);
}
