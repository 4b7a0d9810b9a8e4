//! Versioned empirical constants measured by the sampling experiments.
//!
//! The default file is compiled in; the environment variable [`BASELINE_ENV`] points to a
//! replacement.

use serde::{Deserialize, Serialize};
use std::path::Path;

/// Environment variable holding the path of a baseline file.
pub const BASELINE_ENV: &str = "OUTSPACE_BASELINE";

/// The baseline shipped with the crate.
pub const DEFAULT_BASELINE: &str = include_str!("../baselines/v1.json");

#[derive(Debug, thiserror::Error)]
pub enum BaselineError {
    #[error("reading {0}: {1}")]
    Io(String, std::io::Error),
    #[error("parsing baseline: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("unsupported baseline schema {0}")]
    Schema(u32),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Baseline {
    pub schema: u32,
    pub version: u32,
    pub behrstock: BehrstockBaseline,
    pub hamenstadt: HamenstadtBaseline,
    pub projection_stability: StabilityBaseline,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BehrstockBaseline {
    pub seed: u64,
    pub rank: usize,
    pub samples: usize,
    pub moves: usize,
    pub pool: usize,
    pub quantile: (usize, usize),
    pub xi_hat: u32,
    /// Number of coordinates taking each value, as `(value, count)`.
    pub distance_counts: Vec<(u32, usize)>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct HamenstadtBaseline {
    pub seed: u64,
    pub lengths: Vec<usize>,
    /// Maximal panel diameter for each length.
    pub max_diameters: Vec<u32>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StabilityBaseline {
    pub seed: u64,
    pub pairs: usize,
    pub graphs: usize,
    pub moves: usize,
    pub max_diameter: u32,
}

impl Baseline {
    pub fn parse(text: &str) -> Result<Baseline, BaselineError> {
        let b: Baseline = serde_json::from_str(text)?;
        if b.schema != 1 {
            return Err(BaselineError::Schema(b.schema));
        }
        Ok(b)
    }

    pub fn load(path: &Path) -> Result<Baseline, BaselineError> {
        let text = std::fs::read_to_string(path).map_err(|e| BaselineError::Io(path.display().to_string(), e))?;
        Baseline::parse(&text)
    }

    /// The file named by [`BASELINE_ENV`] when set, the compiled-in baseline otherwise.
    pub fn current() -> Result<Baseline, BaselineError> {
        match std::env::var_os(BASELINE_ENV) {
            Some(p) => Baseline::load(Path::new(&p)),
            None => Baseline::parse(DEFAULT_BASELINE),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_parses() {
        let b = Baseline::parse(DEFAULT_BASELINE).unwrap();
        assert_eq!(b.hamenstadt.lengths.len(), b.hamenstadt.max_diameters.len());
        assert!(Baseline::parse(&DEFAULT_BASELINE.replace("\"schema\": 1", "\"schema\": 2")).is_err());
    }
}
