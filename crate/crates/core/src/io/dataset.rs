use std::collections::HashMap;
use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::Path;

use super::{fmt_f64, open, path_name};
use crate::data::{MarginalTransform, MixedDataset, VariableKind, VariableSchema};
use crate::error::{Error, Result};

/// Name of the optional label column in data files.
pub const CAUSE_COLUMN: &str = "cause";

fn parse_err(path: &Path, line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        file: path_name(path),
        line,
        message: message.into(),
    }
}

/// Read a schema file: one `name,kind[,transform]` line per variable.
/// Blank lines and lines starting with `#` are skipped.
pub fn load_schema(path: &Path) -> Result<Vec<VariableSchema>> {
    let reader = BufReader::new(open(path)?);
    let mut schema = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        let line_no = idx + 1;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = trimmed.split(',').map(str::trim).collect();
        if fields.len() < 2 || fields.len() > 3 || fields[0].is_empty() {
            return Err(parse_err(path, line_no, "expected 'name,kind[,transform]'"));
        }
        let name = fields[0];
        if name == CAUSE_COLUMN {
            return Err(parse_err(path, line_no, "'cause' is reserved for class labels"));
        }
        let transform = match fields.get(2) {
            Some(spec) if !spec.is_empty() => {
                Some(MarginalTransform::parse(spec).map_err(|m| parse_err(path, line_no, m))?)
            }
            _ => None,
        };
        let var = match fields[1] {
            "binary" if transform.is_some() => {
                return Err(parse_err(path, line_no, "binary variables take no transform"))
            }
            "binary" => VariableSchema::binary(name),
            "continuous" => VariableSchema::continuous(name, transform),
            other => {
                return Err(parse_err(
                    path,
                    line_no,
                    format!("unknown kind '{other}' (expected binary or continuous)"),
                ))
            }
        };
        if schema.iter().any(|v: &VariableSchema| v.name == var.name) {
            return Err(parse_err(path, line_no, format!("duplicate variable '{name}'")));
        }
        schema.push(var);
    }
    if schema.is_empty() {
        return Err(parse_err(path, 0, "schema lists no variables"));
    }
    Ok(schema)
}

/// Load a data file against its schema.
///
/// Columns are matched by name and stored in schema order. An optional
/// `cause` column holds class labels; empty cells mean unlabeled, and class
/// names are numbered in order of first appearance.
pub fn load_dataset(data_path: &Path, schema_path: &Path) -> Result<MixedDataset> {
    let schema = load_schema(schema_path)?;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(open(data_path)?);
    let header = reader
        .headers()
        .map_err(|e| parse_err(data_path, 1, e.to_string()))?
        .clone();
    let mut column_of = vec![usize::MAX; schema.len()];
    let mut cause_col = None;
    for (c, name) in header.iter().enumerate() {
        if name == CAUSE_COLUMN {
            cause_col = Some(c);
            continue;
        }
        match schema.iter().position(|v| v.name == name) {
            Some(j) if column_of[j] == usize::MAX => column_of[j] = c,
            Some(_) => return Err(parse_err(data_path, 1, format!("column '{name}' appears twice"))),
            None => return Err(parse_err(data_path, 1, format!("unknown variable '{name}'"))),
        }
    }
    if let Some(j) = column_of.iter().position(|&c| c == usize::MAX) {
        return Err(parse_err(
            data_path,
            1,
            format!("variable '{}' from the schema has no column", schema[j].name),
        ));
    }

    let mut rows = Vec::new();
    let mut causes: Vec<Option<String>> = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let line_no = i + 2;
        let record = record.map_err(|e| parse_err(data_path, line_no, e.to_string()))?;
        let mut row = Vec::with_capacity(schema.len());
        for (j, var) in schema.iter().enumerate() {
            let cell = record.get(column_of[j]).unwrap_or("");
            row.push(parse_cell(cell, var).map_err(|m| parse_err(data_path, line_no, m))?);
        }
        rows.push(row);
        if let Some(c) = cause_col {
            let label = record.get(c).unwrap_or("");
            causes.push((!label.is_empty()).then(|| label.to_string()));
        }
    }
    let data = MixedDataset::new(schema, rows)?;
    if cause_col.is_none() {
        return Ok(data);
    }
    let mut names: Vec<String> = Vec::new();
    let labels = causes
        .into_iter()
        .map(|c| {
            c.map(|name| match names.iter().position(|n| *n == name) {
                Some(k) => k,
                None => {
                    names.push(name);
                    names.len() - 1
                }
            })
        })
        .collect();
    data.with_labels(labels, names)
}

fn parse_cell(cell: &str, var: &VariableSchema) -> std::result::Result<Option<f64>, String> {
    if cell.is_empty() {
        return Ok(None);
    }
    match var.kind {
        VariableKind::Binary => match cell {
            "0" => Ok(Some(0.0)),
            "1" => Ok(Some(1.0)),
            other => Err(format!(
                "column '{}': binary value must be 0 or 1, got '{other}'",
                var.name
            )),
        },
        VariableKind::Continuous => match cell.parse::<f64>() {
            Ok(x) if x.is_finite() => Ok(Some(x)),
            _ => Err(format!("column '{}': malformed number '{cell}'", var.name)),
        },
    }
}

/// Map the labels of `data` onto the class order `names`. Fails on a label
/// not in `names`.
pub fn align_labels(data: MixedDataset, names: &[String]) -> Result<MixedDataset> {
    let Some(labels) = data.labels() else {
        return Ok(data);
    };
    let index: HashMap<&str, usize> = names.iter().enumerate().map(|(k, n)| (n.as_str(), k)).collect();
    let mapped = labels
        .iter()
        .map(|l| {
            l.map(|k| {
                let name = &data.class_names()[k];
                index
                    .get(name.as_str())
                    .copied()
                    .ok_or_else(|| Error::Config(format!("cause '{name}' is not a class of the prior")))
            })
            .transpose()
        })
        .collect::<Result<Vec<_>>>()?;
    data.with_labels(mapped, names.to_vec())
}

/// Write a schema file readable by [`load_schema`].
pub fn write_schema(schema: &[VariableSchema], path: &Path) -> Result<()> {
    let mut out = String::new();
    for v in schema {
        out.push_str(&v.name);
        out.push(',');
        out.push_str(v.kind.as_str());
        if let Some(t) = &v.transform {
            out.push(',');
            out.push_str(&t.to_string());
        }
        out.push('\n');
    }
    std::fs::write(path, out).map_err(|e| Error::io(path, e))
}

/// Write the raw cells (and labels, if any) in the format read by
/// [`load_dataset`]. Continuous values keep 17 significant digits.
pub fn write_dataset(data: &MixedDataset, path: &Path) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = csv::Writer::from_writer(file);
    let io_err = |e: csv::Error| Error::io(path, std::io::Error::other(e));
    let labels = data.labels();
    let mut header: Vec<&str> = data.names();
    if labels.is_some() {
        header.push(CAUSE_COLUMN);
    }
    w.write_record(&header).map_err(io_err)?;
    for i in 0..data.n() {
        let mut rec: Vec<String> = (0..data.p())
            .map(|j| match data.raw(i, j) {
                None => String::new(),
                Some(x) if data.is_binary(j) => format!("{}", x as u8),
                Some(x) => fmt_f64(x),
            })
            .collect();
        if let Some(l) = labels {
            rec.push(l[i].map_or(String::new(), |k| data.class_names()[k].clone()));
        }
        w.write_record(&rec).map_err(io_err)?;
    }
    w.flush().map_err(|e| Error::io(path, e))?;
    Ok(())
}

/// Write a dataset and its schema side by side as `<stem>.csv` and
/// `<stem>_schema.csv`.
pub fn save_dataset(data: &MixedDataset, dir: &Path, stem: &str) -> Result<()> {
    write_dataset(data, &dir.join(format!("{stem}.csv")))?;
    write_schema(data.schema(), &dir.join(format!("{stem}_schema.csv")))
}

#[cfg(test)]
mod tests {
    use super::*;
    use tempfile::tempdir;

    fn write(dir: &Path, name: &str, body: &str) -> std::path::PathBuf {
        let p = dir.join(name);
        std::fs::write(&p, body).unwrap();
        p
    }

    #[test]
    fn one_missing_cell() {
        let dir = tempdir().unwrap();
        let s = write(dir.path(), "s.csv", "a,binary\nb,continuous\n");
        let d = write(dir.path(), "d.csv", "a,b\n1,\n0,2.5\n");
        let data = load_dataset(&d, &s).unwrap();
        assert_eq!((data.n(), data.p()), (2, 2));
        assert_eq!(data.missing_count(), 1);
        assert_eq!(data.raw(0, 1), None);
        assert_eq!(data.raw(1, 1), Some(2.5));
    }

    #[test]
    fn non_binary_value_names_row_and_column() {
        let dir = tempdir().unwrap();
        let s = write(dir.path(), "s.csv", "a,binary\nb,binary\n");
        let d = write(dir.path(), "d.csv", "a,b\n1,0\n0,2\n");
        let err = load_dataset(&d, &s).unwrap_err();
        match &err {
            Error::Parse { line, message, .. } => {
                assert_eq!(*line, 3);
                assert!(message.contains("'b'"), "{message}");
            }
            other => panic!("unexpected {other:?}"),
        }
        assert!(err.is_validation());
    }

    #[test]
    fn malformed_number_and_unknown_column() {
        let dir = tempdir().unwrap();
        let s = write(dir.path(), "s.csv", "a,continuous\n");
        let d = write(dir.path(), "d.csv", "a\n1.5\nx1\n");
        assert!(matches!(load_dataset(&d, &s), Err(Error::Parse { line: 3, .. })));
        let d = write(dir.path(), "d2.csv", "a,zz\n1,1\n");
        assert!(matches!(load_dataset(&d, &s), Err(Error::Parse { line: 1, .. })));
    }

    #[test]
    fn half_empty_cause_column() {
        let dir = tempdir().unwrap();
        let s = write(dir.path(), "s.csv", "a,binary\n");
        let d = write(dir.path(), "d.csv", "cause,a\nflu,1\n,0\ncold,1\n,1\n");
        let data = load_dataset(&d, &s).unwrap();
        assert_eq!(data.labeled_mask(), vec![true, false, true, false]);
        assert_eq!(data.class_names(), ["flu", "cold"]);
        let aligned = align_labels(data, &["cold".into(), "flu".into()]).unwrap();
        assert_eq!(aligned.labels().unwrap(), [Some(1), None, Some(0), None]);
    }

    #[test]
    fn schema_errors_carry_line_numbers() {
        let dir = tempdir().unwrap();
        let s = write(dir.path(), "s.csv", "a,binary\n\nb,ordinal\n");
        assert!(matches!(load_schema(&s), Err(Error::Parse { line: 3, .. })));
        let s = write(dir.path(), "s2.csv", "a,binary,power:3\n");
        assert!(matches!(load_schema(&s), Err(Error::Parse { line: 1, .. })));
    }

    #[test]
    fn write_then_load_round_trips() {
        let dir = tempdir().unwrap();
        let schema = vec![
            VariableSchema::binary("a"),
            VariableSchema::continuous("b", Some(MarginalTransform::Power { k: 3.0 })),
            VariableSchema::continuous("c", None),
        ];
        let rows = vec![
            vec![Some(1.0), Some(0.1 + 0.2), None],
            vec![None, Some(-1.0 / 3.0), Some(1e-300)],
            vec![Some(0.0), Some(123456.789), Some(-0.0)],
        ];
        let data = MixedDataset::new(schema, rows)
            .unwrap()
            .with_labels(vec![Some(1), None, Some(0)], vec!["x".into(), "y".into()])
            .unwrap();
        save_dataset(&data, dir.path(), "sim").unwrap();
        let back = load_dataset(&dir.path().join("sim.csv"), &dir.path().join("sim_schema.csv")).unwrap();
        assert_eq!(back.schema(), data.schema());
        for i in 0..3 {
            for j in 0..3 {
                assert_eq!(back.raw(i, j).map(f64::to_bits), data.raw(i, j).map(f64::to_bits));
            }
        }
        // Class names are renumbered by first appearance on reload.
        let back = align_labels(back, data.class_names()).unwrap();
        assert_eq!(back, data);
    }
}
