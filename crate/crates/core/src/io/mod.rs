//! File formats: CSTK1 grids and sinograms, `key value` scan
//! configurations, phantom descriptions, and CSV/PGM export.

pub mod config;
pub mod dataset;
pub mod export;
pub mod phantom_file;

pub use config::{format_config, parse_config, read_config};
pub use dataset::{load, read_dataset, save, write_dataset, Dataset, MAGIC};
pub use export::{write_csv, write_diagnostics, write_pgm, PgmMeta};
pub use phantom_file::{parse_phantom, read_phantom};

use crate::error::Error;

pub(crate) fn format_err(msg: impl Into<String>) -> Error {
    Error::Format(msg.into())
}

/// `{:.16e}`: 17 significant digits, enough to round-trip any f64.
pub(crate) fn num(v: f64) -> String {
    format!("{v:.16e}")
}

/// Non-empty lines with `#` comments stripped, numbered from 1.
pub(crate) fn content_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines().enumerate().filter_map(|(i, l)| {
        let l = l.split('#').next().unwrap_or("").trim();
        (!l.is_empty()).then_some((i + 1, l))
    })
}
