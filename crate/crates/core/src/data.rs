//! Mixed binary/continuous datasets and per-variable marginal transforms.

use std::collections::HashSet;
use std::fmt;

use crate::distributions::{normal_isf, probit};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum VariableKind {
    Binary,
    Continuous,
}

impl VariableKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            VariableKind::Binary => "binary",
            VariableKind::Continuous => "continuous",
        }
    }
}

/// Monotone map from a raw continuous value to the probit (latent normal) scale.
///
/// Each variant names the marginal distribution F of the raw value; the latent
/// value is `Φ⁻¹(F(x))`, computed in closed form where one exists.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum MarginalTransform {
    Normal { mean: f64, sd: f64 },
    LogNormal { meanlog: f64, sdlog: f64 },
    Exponential { rate: f64 },
    Logistic { location: f64, scale: f64 },
    /// `F(x) = Φ(sign(x)|x|^k)`; `k = 3` undoes a cube-root distortion.
    Power { k: f64 },
}

impl MarginalTransform {
    pub fn parse(spec: &str) -> std::result::Result<Self, String> {
        let parts: Vec<&str> = spec.split(':').map(str::trim).collect();
        let num = |i: usize| -> std::result::Result<f64, String> {
            parts
                .get(i)
                .ok_or_else(|| format!("transform '{spec}' is missing parameter {i}"))?
                .parse::<f64>()
                .map_err(|_| format!("transform '{spec}' has a malformed number"))
        };
        let expect = |k: usize| -> std::result::Result<(), String> {
            if parts.len() == k + 1 {
                Ok(())
            } else {
                Err(format!("transform '{spec}' expects {k} parameter(s)"))
            }
        };
        let t = match parts[0] {
            "normal" => {
                expect(2)?;
                MarginalTransform::Normal {
                    mean: num(1)?,
                    sd: num(2)?,
                }
            }
            "lognormal" => {
                expect(2)?;
                MarginalTransform::LogNormal {
                    meanlog: num(1)?,
                    sdlog: num(2)?,
                }
            }
            "exponential" => {
                expect(1)?;
                MarginalTransform::Exponential { rate: num(1)? }
            }
            "logistic" => {
                expect(2)?;
                MarginalTransform::Logistic {
                    location: num(1)?,
                    scale: num(2)?,
                }
            }
            "power" => {
                expect(1)?;
                MarginalTransform::Power { k: num(1)? }
            }
            other => return Err(format!("unknown transform '{other}'")),
        };
        t.validate()?;
        Ok(t)
    }

    fn validate(&self) -> std::result::Result<(), String> {
        let ok = match *self {
            MarginalTransform::Normal { mean, sd } => mean.is_finite() && sd > 0.0,
            MarginalTransform::LogNormal { meanlog, sdlog } => meanlog.is_finite() && sdlog > 0.0,
            MarginalTransform::Exponential { rate } => rate > 0.0 && rate.is_finite(),
            MarginalTransform::Logistic { location, scale } => location.is_finite() && scale > 0.0,
            MarginalTransform::Power { k } => k > 0.0 && k.is_finite(),
        };
        if ok {
            Ok(())
        } else {
            Err(format!("transform {self} has out-of-range parameters"))
        }
    }

    /// Latent value for a raw observation, or `None` outside the support.
    pub fn to_latent(&self, x: f64) -> Option<f64> {
        let z = match *self {
            MarginalTransform::Normal { mean, sd } => (x - mean) / sd,
            MarginalTransform::LogNormal { meanlog, sdlog } => {
                if x <= 0.0 {
                    return None;
                }
                (x.ln() - meanlog) / sdlog
            }
            MarginalTransform::Exponential { rate } => {
                if x <= 0.0 {
                    return None;
                }
                // Survival exp(-rate x) keeps precision in the upper tail.
                normal_isf((-rate * x).exp())
            }
            MarginalTransform::Logistic { location, scale } => {
                let t = (x - location) / scale;
                if t > 0.0 {
                    normal_isf(1.0 / (1.0 + t.exp()))
                } else {
                    probit(1.0 / (1.0 + (-t).exp()))
                }
            }
            MarginalTransform::Power { k } => x.signum() * x.abs().powf(k),
        };
        z.is_finite().then_some(z)
    }
}

impl fmt::Display for MarginalTransform {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            MarginalTransform::Normal { mean, sd } => write!(f, "normal:{mean}:{sd}"),
            MarginalTransform::LogNormal { meanlog, sdlog } => {
                write!(f, "lognormal:{meanlog}:{sdlog}")
            }
            MarginalTransform::Exponential { rate } => write!(f, "exponential:{rate}"),
            MarginalTransform::Logistic { location, scale } => {
                write!(f, "logistic:{location}:{scale}")
            }
            MarginalTransform::Power { k } => write!(f, "power:{k}"),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct VariableSchema {
    pub name: String,
    pub kind: VariableKind,
    pub transform: Option<MarginalTransform>,
}

impl VariableSchema {
    pub fn binary(name: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            kind: VariableKind::Binary,
            transform: None,
        }
    }

    pub fn continuous(name: impl Into<String>, transform: Option<MarginalTransform>) -> Self {
        Self {
            name: name.into(),
            kind: VariableKind::Continuous,
            transform,
        }
    }
}

/// An n×p table of binary, continuous and missing cells with optional labels.
///
/// Raw cells are kept for round-tripping; latent-scale values (binary cells as
/// 0/1, continuous cells after their marginal transform) are cached alongside.
#[derive(Clone, Debug, PartialEq)]
pub struct MixedDataset {
    schema: Vec<VariableSchema>,
    n: usize,
    raw: Vec<Option<f64>>,
    latent: Vec<Option<f64>>,
    labels: Option<Vec<Option<usize>>>,
    class_names: Vec<String>,
}

impl MixedDataset {
    /// Build from row-major raw cells. Binary cells must be 0 or 1.
    pub fn new(schema: Vec<VariableSchema>, rows: Vec<Vec<Option<f64>>>) -> Result<Self> {
        let p = schema.len();
        if p == 0 {
            return Err(Error::Config("schema has no variables".into()));
        }
        let mut seen = HashSet::new();
        for v in &schema {
            if !seen.insert(v.name.as_str()) {
                return Err(Error::Config(format!("duplicate variable name '{}'", v.name)));
            }
            if v.kind == VariableKind::Binary && v.transform.is_some() {
                return Err(Error::Config(format!(
                    "binary variable '{}' cannot have a marginal transform",
                    v.name
                )));
            }
        }
        let n = rows.len();
        let mut raw = Vec::with_capacity(n * p);
        let mut latent = Vec::with_capacity(n * p);
        for (i, row) in rows.into_iter().enumerate() {
            if row.len() != p {
                return Err(Error::Config(format!(
                    "row {i} has {} cells, schema has {p}",
                    row.len()
                )));
            }
            for (j, cell) in row.into_iter().enumerate() {
                let var = &schema[j];
                let z = match cell {
                    None => None,
                    Some(x) => Some(latent_of(var, x).map_err(|m| {
                        Error::Config(format!("row {i}, variable '{}': {m}", var.name))
                    })?),
                };
                raw.push(cell);
                latent.push(z);
            }
        }
        Ok(Self {
            schema,
            n,
            raw,
            latent,
            labels: None,
            class_names: Vec::new(),
        })
    }

    /// Attach class labels (`None` = unlabeled) and the class name list.
    pub fn with_labels(mut self, labels: Vec<Option<usize>>, class_names: Vec<String>) -> Result<Self> {
        if labels.len() != self.n {
            return Err(Error::Config(format!(
                "{} labels for {} rows",
                labels.len(),
                self.n
            )));
        }
        if let Some(bad) = labels.iter().flatten().find(|&&c| c >= class_names.len()) {
            return Err(Error::Config(format!(
                "label {bad} out of range for {} classes",
                class_names.len()
            )));
        }
        self.labels = Some(labels);
        self.class_names = class_names;
        Ok(self)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn p(&self) -> usize {
        self.schema.len()
    }

    pub fn schema(&self) -> &[VariableSchema] {
        &self.schema
    }

    pub fn names(&self) -> Vec<&str> {
        self.schema.iter().map(|v| v.name.as_str()).collect()
    }

    pub fn kind(&self, j: usize) -> VariableKind {
        self.schema[j].kind
    }

    pub fn is_binary(&self, j: usize) -> bool {
        self.schema[j].kind == VariableKind::Binary
    }

    pub fn continuous_indices(&self) -> Vec<usize> {
        (0..self.p()).filter(|&j| !self.is_binary(j)).collect()
    }

    /// Raw cell as read from disk.
    pub fn raw(&self, i: usize, j: usize) -> Option<f64> {
        self.raw[i * self.p() + j]
    }

    /// Cell on the latent scale (binary cells stay 0/1).
    pub fn latent(&self, i: usize, j: usize) -> Option<f64> {
        self.latent[i * self.p() + j]
    }

    pub fn missing_count(&self) -> usize {
        self.raw.iter().filter(|c| c.is_none()).count()
    }

    pub fn labels(&self) -> Option<&[Option<usize>]> {
        self.labels.as_deref()
    }

    pub fn class_names(&self) -> &[String] {
        &self.class_names
    }

    pub fn labeled_mask(&self) -> Vec<bool> {
        match &self.labels {
            Some(l) => l.iter().map(Option::is_some).collect(),
            None => vec![false; self.n],
        }
    }

    /// Keep only the given rows, in order.
    pub fn select_rows(&self, rows: &[usize]) -> MixedDataset {
        let p = self.p();
        let pick = |v: &Vec<Option<f64>>| {
            rows.iter()
                .flat_map(|&i| v[i * p..(i + 1) * p].iter().copied())
                .collect::<Vec<_>>()
        };
        MixedDataset {
            schema: self.schema.clone(),
            n: rows.len(),
            raw: pick(&self.raw),
            latent: pick(&self.latent),
            labels: self
                .labels
                .as_ref()
                .map(|l| rows.iter().map(|&i| l[i]).collect()),
            class_names: self.class_names.clone(),
        }
    }
}

fn latent_of(var: &VariableSchema, x: f64) -> std::result::Result<f64, String> {
    match var.kind {
        VariableKind::Binary => {
            if x == 0.0 || x == 1.0 {
                Ok(x)
            } else {
                Err(format!("binary value must be 0 or 1, got {x}"))
            }
        }
        VariableKind::Continuous => {
            if !x.is_finite() {
                return Err(format!("continuous value must be finite, got {x}"));
            }
            match &var.transform {
                None => Ok(x),
                Some(t) => t
                    .to_latent(x)
                    .ok_or_else(|| format!("value {x} is outside the support of {t}")),
            }
        }
    }
}
