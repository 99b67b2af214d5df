//! Fixed instance sets shared by the benchmarks.

use fixpoint_core::{generate_instance, InstanceFile, MapFamily, NormKind};

/// `count` seeded instances of one configuration.
pub fn instances(
    family: MapFamily,
    k: usize,
    eps: f64,
    gamma: Option<f64>,
    norm: NormKind,
    count: u64,
) -> Vec<InstanceFile> {
    (0..count)
        .map(|seed| {
            generate_instance(seed, family, k, eps, gamma, norm)
                .expect("benchmark configuration is valid")
        })
        .collect()
}

/// `2^-e` for each `e` in `exponents`.
pub fn dyadic(exponents: impl IntoIterator<Item = i32>) -> Vec<f64> {
    exponents.into_iter().map(|e| 2f64.powi(-e)).collect()
}
