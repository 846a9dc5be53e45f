//! File formats: parameter files, dataset CSV, Touchstone, sweep CSV.
//!
//! All writers are byte-deterministic for identical inputs, and files are
//! written to a temporary sibling first and renamed into place so an error
//! never leaves a partial file behind.

mod dataset;
mod params;
mod report;
mod touchstone;

pub use dataset::{parse_dataset_csv, write_dataset_csv};
pub use params::{parse_parameter_file, write_parameter_file};
pub use report::{power_sweep_csv, sim_results_csv};
pub use touchstone::{parse_touchstone, write_touchstone};

use std::io::Write;
use std::path::Path;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum FormatError {
    #[error("{path}:{line}: {msg}")]
    Malformed {
        path: String,
        line: usize,
        msg: String,
    },
    #[error("touchstone output needs at least one frequency point")]
    EmptyResults,
    #[error("touchstone frequencies must be strictly increasing")]
    UnsortedFrequencies,
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl FormatError {
    fn at(path: &str, line: usize, msg: impl Into<String>) -> Self {
        FormatError::Malformed {
            path: path.to_string(),
            line,
            msg: msg.into(),
        }
    }
}

/// Writes `contents` to `path` atomically: the data goes to a temporary file
/// in the same directory which is renamed over the target only after a
/// successful write.
pub fn write_atomic(path: &Path, contents: &str) -> std::io::Result<()> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty());
    let file_name = path
        .file_name()
        .ok_or_else(|| std::io::Error::new(std::io::ErrorKind::InvalidInput, "missing filename"))?;
    let tmp_name = format!(".{}.{}.tmp", file_name.to_string_lossy(), std::process::id());
    let tmp_path = match dir {
        Some(d) => d.join(&tmp_name),
        None => std::path::PathBuf::from(&tmp_name),
    };
    let result = (|| {
        let mut f = std::fs::File::create(&tmp_path)?;
        f.write_all(contents.as_bytes())?;
        f.sync_all()?;
        std::fs::rename(&tmp_path, path)
    })();
    if result.is_err() {
        let _ = std::fs::remove_file(&tmp_path);
    }
    result
}
