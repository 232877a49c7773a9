//! Exact check of what conditional independence does to a class that is a
//! mixture of two others.
//!
//! Two symptoms, three classes. Classes 1 and 2 have independent symptoms
//! with `P(s1 = 1) = p_k` and `P(s2 = 1) = q_k`. Class 3 is the equal mixture
//! of classes 1 and 2, so its symptoms are dependent. Rebuilding class 3 from
//! its marginals, as a naive-Bayes model would, misstates its joint table.

use num_rational::Ratio;

use crate::error::{Error, Result};

pub type Rational = Ratio<i64>;

/// Joint table indexed `[s1][s2]`.
pub type Table = [[Rational; 2]; 2];

#[derive(Clone, Debug, PartialEq)]
pub struct IndependenceBias {
    pub class1: Table,
    pub class2: Table,
    /// True table of the mixture class.
    pub class3: Table,
    /// Product of the mixture class marginals.
    pub class3_independent: Table,
    /// Posterior over the three classes for every symptom pattern, uniform
    /// class prior, using the true tables. Indexed `[s1][s2][class]`.
    pub posterior_true: [[[Rational; 3]; 2]; 2],
    /// Same, with class 3 replaced by its independence reconstruction.
    pub posterior_independent: [[[Rational; 3]; 2]; 2],
}

impl IndependenceBias {
    /// P(s1 = 1, s2 = 1 | class 3) under the mixture.
    pub fn theta11(&self) -> Rational {
        self.class3[1][1]
    }

    /// The same entry after the independence reconstruction.
    pub fn theta11_independent(&self) -> Rational {
        self.class3_independent[1][1]
    }

    /// `true` when the reconstruction overstates both symptoms together.
    pub fn overstates_joint(&self) -> bool {
        self.theta11() < self.theta11_independent()
    }
}

fn independent(p: Rational, q: Rational) -> Table {
    let one = Rational::from_integer(1);
    [[(one - p) * (one - q), (one - p) * q], [p * (one - q), p * q]]
}

fn posterior(tables: [&Table; 3]) -> [[[Rational; 3]; 2]; 2] {
    let zero = Rational::from_integer(0);
    let mut out = [[[zero; 3]; 2]; 2];
    for s1 in 0..2 {
        for s2 in 0..2 {
            let total: Rational = tables.iter().map(|t| t[s1][s2]).sum();
            for (c, t) in tables.iter().enumerate() {
                out[s1][s2][c] = t[s1][s2] / total;
            }
        }
    }
    out
}

/// Build all tables for `p_k = P(s1 = 1 | class k)` and `q_k = P(s2 = 1 | class k)`.
pub fn independence_bias_table(p1: Rational, q1: Rational, p2: Rational, q2: Rational) -> Result<IndependenceBias> {
    let zero = Rational::from_integer(0);
    let one = Rational::from_integer(1);
    for (name, v) in [("p1", p1), ("q1", q1), ("p2", p2), ("q2", q2)] {
        if v <= zero || v >= one {
            return Err(Error::InvalidParameter(format!("{name} = {v} must lie in (0, 1)")));
        }
    }
    let half = Rational::new(1, 2);
    let class1 = independent(p1, q1);
    let class2 = independent(p2, q2);
    let mut class3 = [[zero; 2]; 2];
    for s1 in 0..2 {
        for s2 in 0..2 {
            class3[s1][s2] = (class1[s1][s2] + class2[s1][s2]) * half;
        }
    }
    let class3_independent = independent((p1 + p2) * half, (q1 + q2) * half);
    Ok(IndependenceBias {
        posterior_true: posterior([&class1, &class2, &class3]),
        posterior_independent: posterior([&class1, &class2, &class3_independent]),
        class1,
        class2,
        class3,
        class3_independent,
    })
}
