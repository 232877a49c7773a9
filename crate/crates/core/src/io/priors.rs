use std::io::{BufRead, BufReader};
use std::path::Path;

use nalgebra::{DMatrix, DVector};

use super::{open, path_name};
use crate::data::{VariableKind, VariableSchema};
use crate::distributions::probit;
use crate::error::{Error, Result};
use crate::mixture::ConditionalProbabilityPrior;
use crate::model::{EdgeMask, MarginalPrior};

fn parse_err(path: &Path, line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        file: path_name(path),
        line,
        message: message.into(),
    }
}

fn index_of(schema: &[VariableSchema], name: &str) -> Option<usize> {
    schema.iter().position(|v| v.name == name)
}

fn csv_reader(path: &Path) -> Result<csv::Reader<std::fs::File>> {
    Ok(csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(open(path)?))
}

/// Load a class-conditional probability table and clamp its 0/1 entries.
///
/// The file has a `cause` column followed by one column per variable (any
/// order, all schema variables required). Binary columns hold
/// P(variable = 1 | cause); continuous columns hold latent prior means and
/// may be left empty for zero.
pub fn load_condprob_prior(
    path: &Path,
    schema: &[VariableSchema],
    clamp_fracs: (f64, f64),
) -> Result<(ConditionalProbabilityPrior, Vec<String>)> {
    let mut reader = csv_reader(path)?;
    let header = reader.headers().map_err(|e| parse_err(path, 1, e.to_string()))?.clone();
    if header.get(0) != Some("cause") {
        return Err(parse_err(path, 1, "first column must be 'cause'"));
    }
    let p = schema.len();
    let mut column_of = vec![usize::MAX; p];
    for (c, name) in header.iter().enumerate().skip(1) {
        match index_of(schema, name) {
            Some(j) if column_of[j] == usize::MAX => column_of[j] = c,
            Some(_) => return Err(parse_err(path, 1, format!("column '{name}' appears twice"))),
            None => return Err(parse_err(path, 1, format!("unknown variable '{name}'"))),
        }
    }
    if let Some(j) = column_of.iter().position(|&c| c == usize::MAX) {
        return Err(parse_err(path, 1, format!("no column for variable '{}'", schema[j].name)));
    }

    let mut names = Vec::new();
    let mut values: Vec<f64> = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let line = i + 2;
        let record = record.map_err(|e| parse_err(path, line, e.to_string()))?;
        let cause = record.get(0).unwrap_or("");
        if cause.is_empty() {
            return Err(parse_err(path, line, "empty cause name"));
        }
        if names.iter().any(|n| n == cause) {
            return Err(parse_err(path, line, format!("duplicate cause '{cause}'")));
        }
        names.push(cause.to_string());
        for (j, var) in schema.iter().enumerate() {
            let cell = record.get(column_of[j]).unwrap_or("");
            let v = match (var.kind, cell.is_empty()) {
                (VariableKind::Continuous, true) => 0.0,
                (VariableKind::Binary, true) => {
                    return Err(parse_err(path, line, format!("missing probability for '{}'", var.name)))
                }
                _ => cell
                    .parse::<f64>()
                    .ok()
                    .filter(|v| v.is_finite())
                    .ok_or_else(|| parse_err(path, line, format!("malformed number '{cell}' for '{}'", var.name)))?,
            };
            if var.kind == VariableKind::Binary && !(0.0..=1.0).contains(&v) {
                return Err(parse_err(
                    path,
                    line,
                    format!("probability {v} for '{}' is outside [0, 1]", var.name),
                ));
            }
            values.push(v);
        }
    }
    if names.is_empty() {
        return Err(parse_err(path, 1, "table has no causes"));
    }
    let table = DMatrix::from_row_slice(names.len(), p, &values);
    let binary: Vec<bool> = schema.iter().map(|v| v.kind == VariableKind::Binary).collect();
    let means = DMatrix::from_fn(names.len(), p, |c, j| if binary[j] { 0.0 } else { table[(c, j)] });
    let prior = ConditionalProbabilityPrior::new(table, binary)?
        .with_continuous_means(means)?
        .clamped(clamp_fracs)?;
    Ok((prior, names))
}

/// Load a marginal prior file.
///
/// With a `variable,value` header, binary rows give P(variable = 1), which
/// must lie strictly inside (0, 1) and is mapped to the probit scale, and
/// continuous rows give the latent mean. With a `variable,latent_mean` header
/// every row is a latent mean. Variables not listed get prior mean 0.
pub fn load_marginal_prior(path: &Path, schema: &[VariableSchema], sigma2: f64) -> Result<MarginalPrior> {
    let mut reader = csv_reader(path)?;
    let header = reader.headers().map_err(|e| parse_err(path, 1, e.to_string()))?.clone();
    let latent = match (header.get(0), header.get(1), header.len()) {
        (Some("variable"), Some("value"), 2) => false,
        (Some("variable"), Some("latent_mean"), 2) => true,
        _ => return Err(parse_err(path, 1, "header must be 'variable,value' or 'variable,latent_mean'")),
    };
    let mut mu0 = DVector::zeros(schema.len());
    let mut seen = vec![false; schema.len()];
    for (i, record) in reader.records().enumerate() {
        let line = i + 2;
        let record = record.map_err(|e| parse_err(path, line, e.to_string()))?;
        let name = record.get(0).unwrap_or("");
        let j = index_of(schema, name).ok_or_else(|| parse_err(path, line, format!("unknown variable '{name}'")))?;
        if std::mem::replace(&mut seen[j], true) {
            return Err(parse_err(path, line, format!("variable '{name}' listed twice")));
        }
        let cell = record.get(1).unwrap_or("");
        let v: f64 = cell
            .parse()
            .ok()
            .filter(|v: &f64| v.is_finite())
            .ok_or_else(|| parse_err(path, line, format!("malformed number '{cell}'")))?;
        mu0[j] = match schema[j].kind {
            _ if latent => v,
            VariableKind::Binary if v > 0.0 && v < 1.0 => probit(v),
            VariableKind::Binary => {
                return Err(parse_err(path, line, format!("probability {v} must lie strictly inside (0, 1)")))
            }
            VariableKind::Continuous => v,
        };
    }
    MarginalPrior::new(mu0, sigma2)
}

/// Load edges whose selection indicator is fixed at one: a header-less CSV
/// of variable-name pairs.
pub fn load_fixed_edges(path: &Path, schema: &[VariableSchema]) -> Result<EdgeMask> {
    let reader = BufReader::new(open(path)?);
    let mut mask = EdgeMask::empty(schema.len());
    for (i, line) in reader.lines().enumerate() {
        let line_no = i + 1;
        let line = line.map_err(|e| Error::io(path, e))?;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = trimmed.split(',').map(str::trim).collect();
        if fields.len() != 2 {
            return Err(parse_err(path, line_no, "expected a pair 'name,name'"));
        }
        let lookup = |name: &str| {
            index_of(schema, name).ok_or_else(|| parse_err(path, line_no, format!("unknown variable '{name}'")))
        };
        let (a, b) = (lookup(fields[0])?, lookup(fields[1])?);
        if a == b {
            return Err(parse_err(path, line_no, format!("'{}' cannot be paired with itself", fields[0])));
        }
        mask.set(a, b, true);
    }
    Ok(mask)
}
