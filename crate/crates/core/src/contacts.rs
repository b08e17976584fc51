//! Precomputed contact costs.
//!
//! Every consecutive position pair `(i, i+1)` (and `(n, 1)`) fixes one tour
//! arc once the matchings of the cycles involved are chosen. Summing those
//! arcs by the cycles they depend on gives a constant part, one 2-vector per
//! cycle and one 2x2 table per contacting cycle pair, so the objective of any
//! delta vector is a sum of table lookups.

use std::collections::HashMap;
use std::fmt::Write as _;

use thiserror::Error;

use crate::delta::DeltaVector;
use crate::instance::Instance;
use crate::structure::{Home, MatchingStructure};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ContactError {
    #[error("missing weight for arc (x{},x{})", .0 + 1, .1 + 1)]
    MissingWeight(usize, usize),
    #[error("delta has length {got}, expected {expected}")]
    DeltaLength { got: usize, expected: usize },
    #[error("cycle index {index} out of range for {q} cycles")]
    CycleIndex { index: usize, q: usize },
}

/// Storage of the pair tables.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PairLayout {
    /// One table per contacting pair.
    #[default]
    Sparse,
    /// A full `q x q` grid of tables.
    Dense,
}

/// `cost[k][l]`: weight when the lower-indexed cycle uses matching `k` and the
/// higher-indexed one uses `l`.
pub type PairTable = [[u64; 2]; 2];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Link {
    pub other: usize,
    slot: usize,
}

#[derive(Debug, Clone)]
pub struct ContactTables {
    q: usize,
    layout: PairLayout,
    single: Vec<[u64; 2]>,
    tables: Vec<PairTable>,
    /// `(lo, hi, slot)` for every contacting pair, sorted.
    pairs: Vec<(usize, usize, usize)>,
    adjacency: Vec<Vec<Link>>,
    constant: u64,
    build_work: u64,
}

impl ContactTables {
    pub fn build(inst: &Instance, s: &MatchingStructure) -> Result<Self, ContactError> {
        Self::build_with(inst, s, PairLayout::Sparse)
    }

    pub fn build_with(
        inst: &Instance,
        s: &MatchingStructure,
        layout: PairLayout,
    ) -> Result<Self, ContactError> {
        let n = inst.n();
        let q = s.q();
        let rho = |u: usize, v: usize| inst.weight(u, v).ok_or(ContactError::MissingWeight(u, v));

        let mut work = q as u64;
        let mut single = vec![[0u64; 2]; q];
        let mut constant = 0u64;
        let mut tables: Vec<PairTable> = match layout {
            PairLayout::Sparse => Vec::new(),
            PairLayout::Dense => {
                work += (q * q) as u64;
                vec![[[0; 2]; 2]; q * q]
            }
        };
        let mut slots: HashMap<(usize, usize), usize> = HashMap::new();

        for i in 0..n {
            let next = (i + 1) % n;
            work += 1;
            match (s.home(i), s.home(next)) {
                (Home::Special(u), Home::Special(v)) => {
                    constant += rho(u, v)?;
                    work += 1;
                }
                (Home::InCycle { cycle: a, .. }, Home::InCycle { cycle: b, .. }) if a == b => {
                    for k in 0..2 {
                        single[a][k] += rho(s.vertex_at(i, k), s.vertex_at(next, k))?;
                    }
                    work += 2;
                }
                (Home::InCycle { cycle: j, .. }, Home::Special(_))
                | (Home::Special(_), Home::InCycle { cycle: j, .. }) => {
                    for k in 0..2 {
                        single[j][k] += rho(s.vertex_at(i, k), s.vertex_at(next, k))?;
                    }
                    work += 2;
                }
                (Home::InCycle { cycle: a, .. }, Home::InCycle { cycle: b, .. }) => {
                    let (lo, hi) = (a.min(b), a.max(b));
                    let slot = match layout {
                        PairLayout::Dense => {
                            slots.entry((lo, hi)).or_insert(lo * q + hi);
                            lo * q + hi
                        }
                        PairLayout::Sparse => *slots.entry((lo, hi)).or_insert_with(|| {
                            tables.push([[0; 2]; 2]);
                            tables.len() - 1
                        }),
                    };
                    for ka in 0..2 {
                        for kb in 0..2 {
                            let w = rho(s.vertex_at(i, ka), s.vertex_at(next, kb))?;
                            let (k, l) = if a == lo { (ka, kb) } else { (kb, ka) };
                            tables[slot][k][l] += w;
                        }
                    }
                    work += 4;
                }
            }
        }

        let mut pairs: Vec<(usize, usize, usize)> =
            slots.into_iter().map(|((lo, hi), slot)| (lo, hi, slot)).collect();
        pairs.sort_unstable();
        let mut adjacency = vec![Vec::new(); q];
        for &(lo, hi, slot) in &pairs {
            adjacency[lo].push(Link { other: hi, slot });
            adjacency[hi].push(Link { other: lo, slot });
        }
        for links in &mut adjacency {
            links.sort_unstable_by_key(|l| l.other);
        }
        work += 2 * pairs.len() as u64;

        Ok(ContactTables {
            q,
            layout,
            single,
            tables,
            pairs,
            adjacency,
            constant,
            build_work: work,
        })
    }

    pub fn q(&self) -> usize {
        self.q
    }

    pub fn layout(&self) -> PairLayout {
        self.layout
    }

    /// Arc weight from consecutive special positions.
    pub fn constant(&self) -> u64 {
        self.constant
    }

    /// `P^k_j`: cycle-internal and cycle-to-special contacts of cycle `j`.
    pub fn single(&self, j: usize, k: usize) -> u64 {
        self.single[j][k]
    }

    /// Pair table for `lo < hi`, if the cycles touch.
    pub fn pair(&self, lo: usize, hi: usize) -> Option<&PairTable> {
        self.adjacency
            .get(lo)?
            .iter()
            .find(|l| l.other == hi)
            .map(|l| &self.tables[l.slot])
    }

    /// Contacting pairs `(lo, hi, table)` in ascending order.
    pub fn pairs(&self) -> impl Iterator<Item = (usize, usize, &PairTable)> + '_ {
        self.pairs
            .iter()
            .map(move |&(lo, hi, slot)| (lo, hi, &self.tables[slot]))
    }

    /// Cycles contacting cycle `j`, ascending.
    pub fn neighbors(&self, j: usize) -> impl Iterator<Item = usize> + '_ {
        self.adjacency[j].iter().map(|l| l.other)
    }

    pub fn degree(&self, j: usize) -> usize {
        self.adjacency[j].len()
    }

    pub fn max_degree(&self) -> usize {
        self.adjacency.iter().map(Vec::len).max().unwrap_or(0)
    }

    /// Elementary steps spent building the tables.
    pub fn build_work(&self) -> u64 {
        self.build_work
    }

    fn check_len(&self, delta: &DeltaVector) -> Result<(), ContactError> {
        if delta.len() != self.q {
            return Err(ContactError::DeltaLength {
                got: delta.len(),
                expected: self.q,
            });
        }
        Ok(())
    }

    /// Full objective of the tour selected by `delta`.
    pub fn objective(&self, delta: &DeltaVector) -> Result<u64, ContactError> {
        self.check_len(delta)?;
        let singles: u64 = (0..self.q).map(|j| self.single[j][delta.bit(j)]).sum();
        let pairs: u64 = self
            .pairs
            .iter()
            .map(|&(lo, hi, slot)| self.tables[slot][delta.bit(lo)][delta.bit(hi)])
            .sum();
        Ok(self.constant + singles + pairs)
    }

    /// Part of the objective that depends on cycle `j` choosing `k`, given the
    /// other entries of `delta`.
    fn local_cost(&self, delta: &DeltaVector, j: usize, k: usize) -> u64 {
        let mut total = self.single[j][k];
        for link in &self.adjacency[j] {
            let other = delta.bit(link.other);
            let t = &self.tables[link.slot];
            total += if j < link.other { t[k][other] } else { t[other][k] };
        }
        total
    }

    /// Objective after flipping bit `j`, given `current = objective(delta)`.
    ///
    /// Reads `|A(j)| + 1` table entries per matching and adds that many units
    /// to `work`.
    pub fn flip_cost(
        &self,
        delta: &DeltaVector,
        j: usize,
        current: u64,
        work: &mut u64,
    ) -> Result<u64, ContactError> {
        self.check_len(delta)?;
        if j >= self.q {
            return Err(ContactError::CycleIndex {
                index: j,
                q: self.q,
            });
        }
        Ok(self.flip_cost_unchecked(delta, j, current, work))
    }

    pub(crate) fn flip_cost_unchecked(
        &self,
        delta: &DeltaVector,
        j: usize,
        current: u64,
        work: &mut u64,
    ) -> u64 {
        let k = delta.bit(j);
        let before = self.local_cost(delta, j, k);
        let after = self.local_cost(delta, j, 1 - k);
        *work += self.adjacency[j].len() as u64 + 1;
        current - before + after
    }

    /// Text dump: `P j k value`, `Q j j' k l value`, `C value` (1-based cycles).
    pub fn dump(&self) -> String {
        let mut out = String::new();
        for j in 0..self.q {
            for k in 0..2 {
                let _ = writeln!(out, "P {} {} {}", j + 1, k, self.single[j][k]);
            }
        }
        for (lo, hi, t) in self.pairs() {
            for k in 0..2 {
                for l in 0..2 {
                    let _ = writeln!(out, "Q {} {} {} {} {}", lo + 1, hi + 1, k, l, t[k][l]);
                }
            }
        }
        let _ = writeln!(out, "C {}", self.constant);
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::fixtures::*;
    use crate::instance::parse_instance;

    fn d1_tables(layout: PairLayout) -> (Instance, MatchingStructure, ContactTables) {
        let inst = d1();
        let s = MatchingStructure::build(&inst).unwrap();
        let t = ContactTables::build_with(&inst, &s, layout).unwrap();
        (inst, s, t)
    }

    fn delta(bits: &[u8]) -> DeltaVector {
        DeltaVector::from(bits.iter().map(|&b| b == 1).collect::<Vec<_>>())
    }

    #[test]
    fn d1_table_values() {
        for layout in [PairLayout::Sparse, PairLayout::Dense] {
            let (_, _, t) = d1_tables(layout);
            assert_eq!(t.single(0, 0), 5);
            assert_eq!(t.single(0, 1), 7);
            assert_eq!(t.single(1, 0), 3);
            assert_eq!(t.single(1, 1), 6);
            assert_eq!(t.pair(0, 1), Some(&[[9, 9], [6, 11]]));
            assert_eq!(t.constant(), 0);
            assert_eq!(t.neighbors(0).collect::<Vec<_>>(), vec![1]);
            assert_eq!(t.neighbors(1).collect::<Vec<_>>(), vec![0]);
        }
    }

    #[test]
    fn d1_objectives() {
        let (inst, s, t) = d1_tables(PairLayout::Sparse);
        for (bits, want) in [([0, 0], 17), ([1, 0], 16), ([0, 1], 20), ([1, 1], 24)] {
            let d = delta(&bits);
            assert_eq!(t.objective(&d).unwrap(), want);
            let tour = s.solution_from_delta(&d).unwrap();
            assert_eq!(inst.tour_cost(&tour).unwrap(), want);
        }
    }

    #[test]
    fn d1_flip_steps() {
        let (_, _, t) = d1_tables(PairLayout::Sparse);
        let mut work = 0;
        assert_eq!(t.flip_cost(&delta(&[0, 0]), 0, 17, &mut work).unwrap(), 16);
        assert_eq!(work, 2);
        assert_eq!(t.flip_cost(&delta(&[1, 0]), 1, 16, &mut work).unwrap(), 24);
        assert_eq!(work, 4);
        assert!(matches!(
            t.flip_cost(&delta(&[1, 0]), 2, 16, &mut work),
            Err(ContactError::CycleIndex { index: 2, q: 2 })
        ));
        assert!(matches!(
            t.objective(&delta(&[1])),
            Err(ContactError::DeltaLength { got: 1, expected: 2 })
        ));
    }

    #[test]
    fn forced_instance_is_all_constant() {
        let inst = parse_instance("3\n2\n3\n1\n3\n2 3 4\n3 1 5\n1 2 6\n").unwrap();
        let s = MatchingStructure::build(&inst).unwrap();
        let t = ContactTables::build(&inst, &s).unwrap();
        assert_eq!(t.q(), 0);
        assert_eq!(t.pairs().count(), 0);
        assert_eq!(t.constant(), 15);
        assert_eq!(t.objective(&DeltaVector::zeros(0)).unwrap(), 15);
    }

    #[test]
    fn zero_weights_give_zero_tables() {
        let inst = f8_with(|_, _| 0);
        let s = MatchingStructure::build(&inst).unwrap();
        let t = ContactTables::build(&inst, &s).unwrap();
        assert_eq!(t.constant(), 0);
        for j in 0..t.q() {
            assert_eq!(t.single(j, 0), 0);
            assert_eq!(t.single(j, 1), 0);
        }
        assert!(t.pairs().all(|(_, _, p)| p.iter().flatten().all(|&w| w == 0)));
        let mut work = 0;
        assert_eq!(t.flip_cost(&delta(&[0, 1]), 1, 0, &mut work).unwrap(), 0);
    }

    #[test]
    fn f8_objective_matches_tour_cost() {
        let inst = f8();
        let s = MatchingStructure::build(&inst).unwrap();
        let t = ContactTables::build(&inst, &s).unwrap();
        for mask in 0..4 {
            let d = DeltaVector::from_mask(2, mask);
            let tour = s.solution_from_delta(&d).unwrap();
            assert_eq!(t.objective(&d).unwrap(), inst.tour_cost(&tour).unwrap());
        }
    }

    #[test]
    fn dump_format() {
        let (_, _, t) = d1_tables(PairLayout::Sparse);
        assert_eq!(
            t.dump(),
            "P 1 0 5\nP 1 1 7\nP 2 0 3\nP 2 1 6\n\
             Q 1 2 0 0 9\nQ 1 2 0 1 9\nQ 1 2 1 0 6\nQ 1 2 1 1 11\nC 0\n"
        );
    }
}
