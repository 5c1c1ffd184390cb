//! Benchmark support: fixed instances shared by the criterion benches.

use auter_core::moves::to_reduced;
use auter_core::random::instances;
use auter_core::{fixtures, MarkedGGraph};

pub const SEED: u64 = 0xbe4c;

/// The fixtures followed by `count` seeded random instances.
pub fn corpus(count: usize) -> Vec<(String, MarkedGGraph)> {
    let mut v: Vec<(String, MarkedGGraph)> = fixtures::all().into_iter().map(|(n, m)| (n.to_string(), m)).collect();
    let random = instances(SEED, count).expect("random instances");
    v.extend(random.into_iter().enumerate().map(|(i, m)| (format!("random-{i}"), m)));
    v
}

/// Reduced versions of [`corpus`], as needed by star complexes.
pub fn reduced_corpus(count: usize) -> Vec<(String, MarkedGGraph)> {
    corpus(count).into_iter().map(|(n, m)| (n, to_reduced(&m).expect("reduce"))).collect()
}
