//! Energy complexity of multithreaded algorithms.
//!
//! An algorithm is summarized by its work, span and I/O complexity; a
//! platform by four energy parameters. [`energy`] combines the two into
//! static, compute and memory energy terms, [`complexity`] holds the
//! closed-form models of the SpMV and matmul kernels, [`platform`] the
//! parameter records and catalog, and [`cachesim`] an ideal-cache trace
//! simulator for checking the I/O side of the models.

pub mod cachesim;
pub mod complexity;
pub mod energy;
pub mod error;
pub mod platform;

pub use error::{IceError, Result};

/// Lowercase alphanumerics only, so "kkt_power", "KKT-Power" and
/// "kkt power" compare equal.
pub(crate) fn normalize_name(s: &str) -> String {
    s.chars()
        .filter(|c| c.is_ascii_alphanumeric())
        .map(|c| c.to_ascii_lowercase())
        .collect()
}
