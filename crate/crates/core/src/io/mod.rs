//! File formats: datasets, schemas, prior tables and run outputs.
//!
//! Every file is plain CSV except the run manifest (JSON). Floats are written
//! with 17 significant digits so that a load after an emit reproduces the
//! in-memory values bit for bit.

mod dataset;
mod emit;
mod priors;

use std::fs::File;
use std::path::Path;

pub use dataset::{align_labels, load_dataset, load_schema, save_dataset, write_dataset, write_schema, CAUSE_COLUMN};
pub use emit::{
    emit_classification, emit_fit, emit_simulation, write_manifest, write_matrix, write_table, RunManifest,
};
pub use priors::{load_condprob_prior, load_fixed_edges, load_marginal_prior};

use crate::error::{Error, Result};

/// 17 significant digits in scientific notation.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

/// Open an input file. A missing file is a usage error, not an I/O failure.
pub(crate) fn open(path: &Path) -> Result<File> {
    File::open(path).map_err(|e| match e.kind() {
        std::io::ErrorKind::NotFound => Error::Config(format!("input file {} does not exist", path.display())),
        _ => Error::io(path, e),
    })
}

pub(crate) fn path_name(path: &Path) -> String {
    path.display().to_string()
}

/// Create `dir` (and parents) if needed.
pub fn ensure_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}
