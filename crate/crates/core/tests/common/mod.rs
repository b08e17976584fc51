#![allow(dead_code)]

use std::collections::BTreeSet;
use std::path::PathBuf;

use proptest::prelude::*;
use tspvr::Instance;

pub fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("tests/fixtures")
        .join(name)
}

pub fn read_fixture(name: &str) -> String {
    std::fs::read_to_string(fixture(name)).unwrap()
}

/// Builds an instance from raw draws. With `planted`, position `i` always
/// contains `perm[i]`, so the instance is feasible; otherwise requisitions are
/// arbitrary. Returns `None` when the draw pins two consecutive positions to
/// the same vertex (rejected by the parser).
pub fn assemble(
    n: usize,
    perm: &[usize],
    picks: &[(usize, usize, bool)],
    planted: bool,
    weights: &[u64],
) -> Option<Instance> {
    let reqs: Vec<Vec<usize>> = (0..n)
        .map(|i| {
            let (a, b, pair) = picks[i];
            let first = if planted { perm[i] } else { a };
            let set: BTreeSet<usize> = if pair { [first, b].into() } else { [first].into() };
            set.into_iter().collect()
        })
        .collect();
    let w = Instance::relevant_arcs(&reqs)
        .into_iter()
        .map(|(u, v)| ((u, v), weights[u * n + v]))
        .collect();
    Instance::new(reqs, w).ok()
}

/// Small instances, mostly feasible, with weights in `0..100`.
pub fn small_instance(max_n: usize) -> impl Strategy<Value = Instance> {
    (2..=max_n)
        .prop_flat_map(|n| {
            (
                Just(n),
                Just((0..n).collect::<Vec<_>>()).prop_shuffle(),
                proptest::collection::vec((0..n, 0..n, prop::bool::weighted(0.8)), n),
                prop::bool::weighted(0.85),
                proptest::collection::vec(0u64..100, n * n),
            )
        })
        .prop_filter_map("forced self-loop", |(n, perm, picks, planted, w)| {
            assemble(n, &perm, &picks, planted, &w)
        })
}
