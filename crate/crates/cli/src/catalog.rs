//! Builtin experiments, embedded at compile time.

use sha2::{Digest, Sha256};

use crate::config::ExperimentConfig;
use crate::error::{CliError, Result};

const SOURCES: &[&str] = &[
    include_str!("../experiments/gd-quadratic.toml"),
    include_str!("../experiments/mirror-descent-entropy.toml"),
    include_str!("../experiments/natural-gradient-sumexp.toml"),
    include_str!("../experiments/newton-sumexp.toml"),
    include_str!("../experiments/riemannian-sphere.toml"),
    include_str!("../experiments/log-divergence-gd.toml"),
    include_str!("../experiments/gdgc-surrogate-entropy.toml"),
    include_str!("../experiments/forward-backward-quadratic.toml"),
    include_str!("../experiments/alternating-split-quadratic.toml"),
    include_str!("../experiments/pocs-halfspace-ball.toml"),
    include_str!("../experiments/sinkhorn-20x20.toml"),
    include_str!("../experiments/latent-em-mixture.toml"),
    include_str!("../experiments/five-point-sine.toml"),
    include_str!("../experiments/cross-curvature-entropy.toml"),
    include_str!("../experiments/cross-curvature-mapped.toml"),
    include_str!("../experiments/cross-curvature-sphere.toml"),
];

/// All builtin experiments in catalog order.
pub fn experiments() -> Vec<ExperimentConfig> {
    SOURCES
        .iter()
        .map(|s| ExperimentConfig::from_toml(s).expect("builtin experiment parses"))
        .collect()
}

/// Name and one-line description of each builtin experiment.
pub fn list() -> Vec<(String, String)> {
    experiments().into_iter().map(|e| (e.name, e.description.unwrap_or_default())).collect()
}

pub fn find(name: &str) -> Result<ExperimentConfig> {
    experiments()
        .into_iter()
        .find(|e| e.name == name)
        .ok_or_else(|| CliError::Config(format!("no builtin experiment named {name:?}")))
}

/// Seed of an experiment run from a manifest seed, stable across
/// platforms and releases. Kept below 2^63 so it fits a TOML integer.
pub fn derive_seed(manifest_seed: u64, name: &str) -> u64 {
    let mut h = Sha256::new();
    h.update(manifest_seed.to_le_bytes());
    h.update(name.as_bytes());
    let digest = h.finalize();
    u64::from_le_bytes(digest[..8].try_into().expect("digest has 32 bytes")) >> 1
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn catalog_has_unique_names() {
        let names: Vec<_> = list().into_iter().map(|(n, _)| n).collect();
        let mut sorted = names.clone();
        sorted.sort();
        sorted.dedup();
        assert_eq!(sorted.len(), names.len());
        assert!(names.len() >= 10);
    }

    #[test]
    fn every_entry_has_a_description() {
        assert!(list().iter().all(|(_, d)| !d.is_empty()));
    }

    #[test]
    fn derived_seeds_depend_on_name_and_seed() {
        assert_eq!(derive_seed(1, "a"), derive_seed(1, "a"));
        assert_ne!(derive_seed(1, "a"), derive_seed(1, "b"));
        assert_ne!(derive_seed(1, "a"), derive_seed(2, "a"));
    }
}
