//! Exact solvers and the brute-force oracle.

use std::fmt;

use thiserror::Error;

use crate::contacts::{ContactError, ContactTables};
use crate::delta::DeltaVector;
use crate::instance::{Instance, TourError};
use crate::structure::{Infeasible, MatchingStructure, StructureError};

/// Largest cycle count the Gray-code walk accepts.
pub const MAX_GRAY_CYCLES: usize = 62;
/// Largest cycle count the re-evaluating enumerator accepts.
pub const MAX_NAIVE_CYCLES: usize = 20;
/// Largest `n` the brute-force oracle accepts.
pub const MAX_ORACLE_N: usize = 14;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SolveError {
    #[error(transparent)]
    Infeasible(#[from] Infeasible),
    #[error("no feasible tour exists")]
    NoFeasibleTour,
    #[error("{what} is {value}, limit is {limit}")]
    GuardExceeded {
        what: &'static str,
        value: usize,
        limit: usize,
    },
    #[error(transparent)]
    Structure(StructureError),
    #[error(transparent)]
    Contact(#[from] ContactError),
    #[error(transparent)]
    Tour(#[from] TourError),
}

impl From<StructureError> for SolveError {
    fn from(e: StructureError) -> Self {
        match e {
            StructureError::Infeasible(inf) => SolveError::Infeasible(inf),
            other => SolveError::Structure(other),
        }
    }
}

impl SolveError {
    pub fn is_infeasible(&self) -> bool {
        matches!(self, SolveError::Infeasible(_) | SolveError::NoFeasibleTour)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    Gray,
    Naive,
    Oracle,
    LocalSearch,
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::Gray => "gray",
            Method::Naive => "naive",
            Method::Oracle => "oracle",
            Method::LocalSearch => "local-search",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Counters {
    /// Objective values produced (full or incremental).
    pub evaluations: u64,
    /// Table entries touched by incremental updates.
    pub delta_work: u64,
    /// Elementary steps spent building contact tables.
    pub build_work: u64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Solution {
    /// Vertex per position.
    pub tour: Vec<usize>,
    pub cost: u64,
    /// `None` for the oracle, which never builds the matching structure.
    pub delta: Option<DeltaVector>,
    pub q: usize,
    pub specials: usize,
    pub counters: Counters,
    pub method: Method,
}

/// Result of walking all delta vectors over prebuilt tables.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GrayOutcome {
    pub cost: u64,
    pub delta: DeltaVector,
    pub counters: Counters,
}

/// Minimum of the table objective over `{0,1}^q` by a binary reflected Gray
/// walk: one full evaluation at zero, then `2^q - 1` single-bit updates.
/// Ties keep the first vector reached.
pub fn gray_minimum(tables: &ContactTables) -> Result<GrayOutcome, SolveError> {
    gray_walk(tables, |_, _| {})
}

/// Like [`gray_minimum`], calling `visit(mask, cost)` for every vector.
pub fn gray_walk(
    tables: &ContactTables,
    mut visit: impl FnMut(u64, u64),
) -> Result<GrayOutcome, SolveError> {
    let q = tables.q();
    if q > MAX_GRAY_CYCLES {
        return Err(SolveError::GuardExceeded {
            what: "cycle count",
            value: q,
            limit: MAX_GRAY_CYCLES,
        });
    }
    let mut delta = DeltaVector::zeros(q);
    let mut cost = tables.objective(&delta)?;
    let mut counters = Counters {
        evaluations: 1,
        build_work: tables.build_work(),
        ..Counters::default()
    };
    let mut mask = 0u64;
    visit(mask, cost);
    let (mut best_cost, mut best_mask) = (cost, 0u64);
    for step in 1..(1u64 << q) {
        let j = step.trailing_zeros() as usize;
        cost = tables.flip_cost_unchecked(&delta, j, cost, &mut counters.delta_work);
        delta.flip(j);
        mask ^= 1 << j;
        counters.evaluations += 1;
        visit(mask, cost);
        if cost < best_cost {
            best_cost = cost;
            best_mask = mask;
        }
    }
    Ok(GrayOutcome {
        cost: best_cost,
        delta: DeltaVector::from_mask(q, best_mask),
        counters,
    })
}

/// Gray-code solver with incremental evaluation.
pub fn solve_exact(inst: &Instance) -> Result<Solution, SolveError> {
    let s = MatchingStructure::build(inst)?;
    let tables = ContactTables::build(inst, &s)?;
    solve_exact_with(inst, &s, &tables)
}

pub fn solve_exact_with(
    inst: &Instance,
    s: &MatchingStructure,
    tables: &ContactTables,
) -> Result<Solution, SolveError> {
    let out = gray_minimum(tables)?;
    let tour = s.solution_from_delta(&out.delta)?;
    debug_assert_eq!(inst.tour_cost(&tour), Ok(out.cost));
    Ok(Solution {
        tour,
        cost: out.cost,
        delta: Some(out.delta),
        q: s.q(),
        specials: s.specials().len(),
        counters: out.counters,
        method: Method::Gray,
    })
}

/// Enumerates all delta vectors (in Gray order, for the same tie-break) and
/// prices each tour from scratch.
pub fn solve_naive(inst: &Instance) -> Result<Solution, SolveError> {
    let s = MatchingStructure::build(inst)?;
    let q = s.q();
    if q > MAX_NAIVE_CYCLES {
        return Err(SolveError::GuardExceeded {
            what: "cycle count",
            value: q,
            limit: MAX_NAIVE_CYCLES,
        });
    }
    let mut best: Option<(u64, u64, Vec<usize>)> = None;
    let mut counters = Counters::default();
    for k in 0..(1u64 << q) {
        let mask = k ^ (k >> 1);
        let tour = s.solution_from_delta(&DeltaVector::from_mask(q, mask))?;
        let cost = inst.tour_cost(&tour)?;
        counters.evaluations += 1;
        if best.as_ref().is_none_or(|b| cost < b.0) {
            best = Some((cost, mask, tour));
        }
    }
    let (cost, mask, tour) = best.expect("at least one delta vector");
    Ok(Solution {
        tour,
        cost,
        delta: Some(DeltaVector::from_mask(q, mask)),
        q,
        specials: s.specials().len(),
        counters,
        method: Method::Naive,
    })
}

/// Every feasible assignment, by backtracking over positions. Independent of
/// the matching-structure code.
pub fn enumerate_feasible(inst: &Instance) -> Result<Vec<Vec<usize>>, SolveError> {
    let n = inst.n();
    if n > MAX_ORACLE_N {
        return Err(SolveError::GuardExceeded {
            what: "n",
            value: n,
            limit: MAX_ORACLE_N,
        });
    }
    fn extend(inst: &Instance, used: &mut [bool], partial: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        let i = partial.len();
        if i == inst.n() {
            out.push(partial.clone());
            return;
        }
        for &v in inst.requisition(i) {
            if !used[v] {
                used[v] = true;
                partial.push(v);
                extend(inst, used, partial, out);
                partial.pop();
                used[v] = false;
            }
        }
    }
    let mut out = Vec::new();
    extend(inst, &mut vec![false; n], &mut Vec::with_capacity(n), &mut out);
    Ok(out)
}

/// Brute-force minimum over all feasible assignments. Ties keep the
/// lexicographically smallest tour.
pub fn brute_force_oracle(inst: &Instance) -> Result<Solution, SolveError> {
    let all = enumerate_feasible(inst)?;
    let n = inst.n();
    let mut best: Option<(u64, Vec<usize>)> = None;
    let mut evaluations = 0;
    for tour in all {
        let mut cost = 0u64;
        for i in 0..n {
            let (u, v) = (tour[i], tour[(i + 1) % n]);
            cost += inst
                .weight(u, v)
                .ok_or(SolveError::Tour(TourError::MissingWeight((u, v))))?;
        }
        evaluations += 1;
        if best.as_ref().is_none_or(|b| cost < b.0) {
            best = Some((cost, tour));
        }
    }
    let (cost, tour) = best.ok_or(SolveError::NoFeasibleTour)?;
    Ok(Solution {
        tour,
        cost,
        delta: None,
        q: 0,
        specials: 0,
        counters: Counters {
            evaluations,
            ..Counters::default()
        },
        method: Method::Oracle,
    })
}
