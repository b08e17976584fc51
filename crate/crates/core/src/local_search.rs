//! Exchange-neighborhood local search: neighbors of a delta vector are the
//! vectors at Hamming distance one, priced through the contact tables.

use log::info;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::contacts::ContactTables;
use crate::delta::DeltaVector;
use crate::exact::{Counters, Method, Solution, SolveError};
use crate::instance::Instance;
use crate::structure::MatchingStructure;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Pivot {
    #[default]
    Best,
    First,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Start {
    #[default]
    Zero,
    Random(u64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct SearchConfig {
    pub pivot: Pivot,
    pub start: Start,
    /// Maximum number of moves; `None` runs to a local optimum.
    pub max_iterations: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Step {
    pub iteration: usize,
    pub flipped: usize,
    pub cost: u64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SearchOutcome {
    pub delta: DeltaVector,
    pub cost: u64,
    pub start_cost: u64,
    pub trajectory: Vec<Step>,
    /// Table work of each neighborhood scan, in order.
    pub scan_work: Vec<u64>,
    pub counters: Counters,
}

/// All vectors at Hamming distance one, flipping bit 0, 1, ... in order.
pub fn exchange_neighbors(delta: &DeltaVector) -> impl Iterator<Item = DeltaVector> + '_ {
    (0..delta.len()).map(move |j| delta.flipped(j))
}

fn start_vector(q: usize, start: Start) -> DeltaVector {
    match start {
        Start::Zero => DeltaVector::zeros(q),
        Start::Random(seed) => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            DeltaVector::from((0..q).map(|_| rng.gen::<bool>()).collect::<Vec<_>>())
        }
    }
}

/// Moves to strictly better Exchange neighbors until none exists or the
/// iteration budget is spent.
pub fn local_search(tables: &ContactTables, cfg: &SearchConfig) -> SearchOutcome {
    let q = tables.q();
    let mut delta = start_vector(q, cfg.start);
    let mut cost = tables.objective(&delta).expect("start vector has length q");
    let start_cost = cost;
    let mut counters = Counters {
        evaluations: 1,
        build_work: tables.build_work(),
        ..Counters::default()
    };
    let mut trajectory = Vec::new();
    let mut scan_work = Vec::new();

    loop {
        if cfg.max_iterations.is_some_and(|m| trajectory.len() >= m) {
            break;
        }
        let before = counters.delta_work;
        let mut chosen: Option<(usize, u64)> = None;
        for j in 0..q {
            let c = tables.flip_cost_unchecked(&delta, j, cost, &mut counters.delta_work);
            counters.evaluations += 1;
            if c < chosen.map_or(cost, |(_, best)| best) {
                chosen = Some((j, c));
                if cfg.pivot == Pivot::First {
                    break;
                }
            }
        }
        scan_work.push(counters.delta_work - before);
        let Some((j, c)) = chosen else { break };
        delta.flip(j);
        cost = c;
        let step = Step {
            iteration: trajectory.len() + 1,
            flipped: j,
            cost,
        };
        info!("iteration {} flip {} cost {}", step.iteration, j + 1, cost);
        trajectory.push(step);
    }

    SearchOutcome {
        delta,
        cost,
        start_cost,
        trajectory,
        scan_work,
        counters,
    }
}

/// True iff no Exchange neighbor is strictly cheaper.
pub fn is_local_optimum(tables: &ContactTables, delta: &DeltaVector) -> bool {
    let cost = tables.objective(delta).expect("delta has length q");
    let mut work = 0;
    (0..delta.len()).all(|j| tables.flip_cost_unchecked(delta, j, cost, &mut work) >= cost)
}

/// Builds structure and tables, then runs [`local_search`].
pub fn solve_local(inst: &Instance, cfg: &SearchConfig) -> Result<(Solution, SearchOutcome), SolveError> {
    let s = MatchingStructure::build(inst)?;
    let tables = ContactTables::build(inst, &s)?;
    let out = local_search(&tables, cfg);
    let tour = s.solution_from_delta(&out.delta)?;
    Ok((
        Solution {
            tour,
            cost: out.cost,
            delta: Some(out.delta.clone()),
            q: s.q(),
            specials: s.specials().len(),
            counters: out.counters,
            method: Method::LocalSearch,
        },
        out,
    ))
}
