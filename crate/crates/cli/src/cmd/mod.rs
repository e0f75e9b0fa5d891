pub mod ball;
pub mod chsh;
pub mod common_cause;
pub mod mc;
pub mod spin;

use std::path::{Path, PathBuf};

pub const DEFAULT_SEED: u64 = 1;
pub const DEFAULT_TRIALS: u64 = 1_000_000;

/// `out.csv` + `alice` -> `out-alice.csv`.
pub fn suffixed(path: &Path, suffix: &str) -> PathBuf {
    let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    let name = match path.extension() {
        Some(ext) => format!("{stem}-{suffix}.{}", ext.to_string_lossy()),
        None => format!("{stem}-{suffix}"),
    };
    path.with_file_name(name)
}

pub fn statistical_tolerance(n: f64) -> f64 {
    4.0 / n.max(1.0).sqrt()
}
