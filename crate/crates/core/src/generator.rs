//! Seeded instance generation and cycle-count statistics.
//!
//! All randomness comes from `ChaCha8Rng` seeded with `seed_from_u64`, so a
//! configuration always yields the same instance bytes.

use std::collections::BTreeMap;
use std::fmt;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::instance::{Instance, InstanceError};
use crate::structure::{BipartiteGraph, find_special_edges, Infeasible, MatchingStructure};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GenMode {
    /// Every requisition is a uniform random 2-subset.
    UniformPairs,
    /// `q` disjoint 4-cycles on positions/vertices `{2t-1, 2t}`, singletons
    /// elsewhere.
    ForcedQ(usize),
    /// Requisition `i` is `{sigma(i), y_i}` for a uniform permutation `sigma`
    /// and a uniform `y_i != sigma(i)`; always feasible.
    Planted,
}

impl fmt::Display for GenMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GenMode::UniformPairs => f.write_str("uniform"),
            GenMode::ForcedQ(q) => write!(f, "forced-q {q}"),
            GenMode::Planted => f.write_str("planted"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GenConfig {
    pub n: usize,
    pub seed: u64,
    pub weight_max: u64,
    pub mode: GenMode,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GenError {
    #[error("n must be at least 2, got {0}")]
    TooSmall(usize),
    #[error("forced-q needs 2q <= n, got q={q}, n={n}")]
    TooManyCycles { q: usize, n: usize },
    #[error(transparent)]
    Instance(#[from] InstanceError),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Generated {
    Feasible(Instance),
    /// The requisitions admit no bijection; the instance is still well-formed.
    Rejected { instance: Instance, reason: Infeasible },
}

impl Generated {
    pub fn feasible(self) -> Option<Instance> {
        match self {
            Generated::Feasible(inst) => Some(inst),
            Generated::Rejected { .. } => None,
        }
    }

    pub fn instance(&self) -> &Instance {
        match self {
            Generated::Feasible(inst) | Generated::Rejected { instance: inst, .. } => inst,
        }
    }
}

fn requisitions(cfg: &GenConfig, rng: &mut ChaCha8Rng) -> Vec<Vec<usize>> {
    let n = cfg.n;
    let other = |rng: &mut ChaCha8Rng, a: usize| {
        let b = rng.gen_range(0..n - 1);
        if b >= a {
            b + 1
        } else {
            b
        }
    };
    match cfg.mode {
        GenMode::UniformPairs => (0..n)
            .map(|_| {
                let a = rng.gen_range(0..n);
                let b = other(rng, a);
                vec![a, b]
            })
            .collect(),
        GenMode::ForcedQ(q) => (0..n)
            .map(|i| {
                if i < 2 * q {
                    let base = i - i % 2;
                    vec![base, base + 1]
                } else {
                    vec![i]
                }
            })
            .collect(),
        GenMode::Planted => {
            let mut sigma: Vec<usize> = (0..n).collect();
            sigma.shuffle(rng);
            sigma
                .into_iter()
                .map(|a| {
                    let b = other(rng, a);
                    vec![a, b]
                })
                .collect()
        }
    }
}

fn rng_for(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

pub fn generate(cfg: &GenConfig) -> Result<Generated, GenError> {
    generate_with(cfg, &mut rng_for(cfg.seed, 0))
}

fn generate_with(cfg: &GenConfig, rng: &mut ChaCha8Rng) -> Result<Generated, GenError> {
    if cfg.n < 2 {
        return Err(GenError::TooSmall(cfg.n));
    }
    if let GenMode::ForcedQ(q) = cfg.mode {
        if 2 * q > cfg.n {
            return Err(GenError::TooManyCycles { q, n: cfg.n });
        }
    }
    let mut reqs = requisitions(cfg, rng);
    for r in &mut reqs {
        r.sort_unstable();
    }
    let weights = Instance::relevant_arcs(&reqs)
        .into_iter()
        .map(|arc| (arc, rng.gen_range(0..=cfg.weight_max)))
        .collect();
    let instance = Instance::new(reqs, weights)?;
    let g = BipartiteGraph::from_instance(&instance);
    Ok(match find_special_edges(&g) {
        Ok(_) => Generated::Feasible(instance),
        Err(reason) => Generated::Rejected { instance, reason },
    })
}

/// Cycle-count statistics over seeded random instances.
#[derive(Debug, Clone, PartialEq)]
pub struct GoodGraphStats {
    pub n: usize,
    pub trials: usize,
    pub seed: u64,
    pub mode: GenMode,
    pub rejected: usize,
    /// Feasible draws with at most `threshold` cycles.
    pub good: usize,
    /// `1.1 ln n`.
    pub threshold: f64,
    pub histogram: BTreeMap<usize, usize>,
}

impl GoodGraphStats {
    pub fn feasible(&self) -> usize {
        self.trials - self.rejected
    }

    /// `good / feasible`, `None` when no draw was feasible.
    pub fn good_fraction(&self) -> Option<f64> {
        (self.feasible() > 0).then(|| self.good as f64 / self.feasible() as f64)
    }

    pub fn rejection_rate(&self) -> f64 {
        self.rejected as f64 / self.trials as f64
    }
}

impl fmt::Display for GoodGraphStats {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "n {}", self.n)?;
        writeln!(f, "trials {}", self.trials)?;
        writeln!(f, "seed {}", self.seed)?;
        writeln!(f, "model {}", self.mode)?;
        writeln!(f, "threshold {:.6}", self.threshold)?;
        writeln!(f, "feasible {}", self.feasible())?;
        writeln!(f, "rejected {}", self.rejected)?;
        writeln!(f, "rejection_rate {:.6}", self.rejection_rate())?;
        writeln!(f, "good {}", self.good)?;
        match self.good_fraction() {
            Some(x) => writeln!(f, "good_fraction {x:.6}")?,
            None => writeln!(f, "good_fraction n/a")?,
        }
        let hist: Vec<String> = self
            .histogram
            .iter()
            .map(|(q, c)| format!("{q}:{c}"))
            .collect();
        writeln!(f, "q_histogram {}", hist.join(" "))
    }
}

/// Whether a cycle count is within `1.1 ln n`.
pub fn is_good(q: usize, n: usize) -> bool {
    (q as f64) <= 1.1 * (n as f64).ln()
}

/// Draws `trials` instances (trial `t` uses ChaCha stream `t + 1` of `seed`),
/// skips infeasible ones and tallies the cycle counts of the rest.
pub fn good_graph_stats(n: usize, trials: usize, seed: u64, mode: GenMode) -> Result<GoodGraphStats, GenError> {
    let cfg = GenConfig {
        n,
        seed,
        weight_max: 0,
        mode,
    };
    let mut stats = GoodGraphStats {
        n,
        trials,
        seed,
        mode,
        rejected: 0,
        good: 0,
        threshold: 1.1 * (n as f64).ln(),
        histogram: BTreeMap::new(),
    };
    for t in 0..trials {
        let mut rng = rng_for(seed, t as u64 + 1);
        match generate_with(&cfg, &mut rng)? {
            Generated::Rejected { .. } => stats.rejected += 1,
            Generated::Feasible(inst) => {
                let q = MatchingStructure::build(&inst)
                    .expect("feasible instance decomposes")
                    .q();
                *stats.histogram.entry(q).or_default() += 1;
                if is_good(q, n) {
                    stats.good += 1;
                }
            }
        }
    }
    Ok(stats)
}
