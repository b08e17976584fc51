//! Problem instances, tours and the line-oriented instance file format.
//!
//! Positions and vertices are 0-based in memory and 1-based in every text
//! format (`x1` is vertex `0`, position 1 is index `0`).

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use thiserror::Error;

/// Ordered vertex pair `(from, to)`.
pub type Arc = (usize, usize);

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum InstanceError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("n must be at least 2, got {0}")]
    TooSmall(usize),
    #[error("position {position}: requisition must name one or two vertices, got {size}")]
    RequisitionSize { position: usize, size: usize },
    #[error("position {position}: vertex {vertex} listed twice")]
    DuplicateVertex { position: usize, vertex: usize },
    #[error("line {line}: index {value} outside 1..={n}")]
    OutOfRange { line: usize, value: i64, n: usize },
    #[error("line {line}: negative weight {value}")]
    NegativeWeight { line: usize, value: i64 },
    #[error("line {line}: duplicate weight entry for arc ({from},{to})")]
    DuplicateWeight { line: usize, from: usize, to: usize },
    #[error("line {line}: weight entry for self-arc ({vertex},{vertex})")]
    SelfArc { line: usize, vertex: usize },
    #[error("missing weight for relevant arc at position {position}: ({from},{to})")]
    MissingArc { position: usize, from: usize, to: usize },
    #[error("n * max weight overflows 64-bit costs")]
    Overflow,
}

impl InstanceError {
    /// A missing self-arc means two consecutive positions are pinned to the
    /// same vertex, which already rules out every bijection.
    pub fn proves_infeasible(&self) -> bool {
        matches!(self, InstanceError::MissingArc { from, to, .. } if from == to)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TourError {
    #[error("tour has length {got}, expected {expected}")]
    Length { got: usize, expected: usize },
    #[error("tour violates requisitions or is not a bijection")]
    Infeasible,
    #[error("no weight for arc ({},{})", .0 .0 + 1, .0 .1 + 1)]
    MissingWeight(Arc),
}

/// A 2-TSPVR instance: `n` positions, a requisition (one or two candidate
/// vertices) per position, and weights for the relevant arcs.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Instance {
    n: usize,
    requisitions: Vec<Vec<usize>>,
    weights: BTreeMap<Arc, u64>,
}

impl Instance {
    /// Builds and validates an instance from 0-based requisitions and weights.
    pub fn new(
        requisitions: Vec<Vec<usize>>,
        weights: BTreeMap<Arc, u64>,
    ) -> Result<Self, InstanceError> {
        let n = requisitions.len();
        if n < 2 {
            return Err(InstanceError::TooSmall(n));
        }
        let mut requisitions = requisitions;
        for (i, req) in requisitions.iter_mut().enumerate() {
            if req.is_empty() || req.len() > 2 {
                return Err(InstanceError::RequisitionSize {
                    position: i + 1,
                    size: req.len(),
                });
            }
            for &v in req.iter() {
                if v >= n {
                    return Err(InstanceError::OutOfRange {
                        line: 0,
                        value: v as i64 + 1,
                        n,
                    });
                }
            }
            req.sort_unstable();
            if req.len() == 2 && req[0] == req[1] {
                return Err(InstanceError::DuplicateVertex {
                    position: i + 1,
                    vertex: req[0] + 1,
                });
            }
        }
        for &(u, v) in weights.keys() {
            if u >= n || v >= n {
                return Err(InstanceError::OutOfRange {
                    line: 0,
                    value: u.max(v) as i64 + 1,
                    n,
                });
            }
            if u == v {
                return Err(InstanceError::SelfArc { line: 0, vertex: u + 1 });
            }
        }
        let inst = Instance {
            n,
            requisitions,
            weights,
        };
        inst.check_relevant_arcs()?;
        let max_w = inst.weights.values().copied().max().unwrap_or(0);
        if (n as u64).checked_mul(max_w).is_none() {
            return Err(InstanceError::Overflow);
        }
        Ok(inst)
    }

    fn check_relevant_arcs(&self) -> Result<(), InstanceError> {
        for i in 0..self.n {
            let next = (i + 1) % self.n;
            for &u in &self.requisitions[i] {
                for &v in &self.requisitions[next] {
                    if u == v {
                        // Only a forced pair u -> u actually needs the missing self-arc.
                        if self.requisitions[i].len() == 1 && self.requisitions[next].len() == 1 {
                            return Err(InstanceError::MissingArc {
                                position: i + 1,
                                from: u + 1,
                                to: v + 1,
                            });
                        }
                        continue;
                    }
                    if !self.weights.contains_key(&(u, v)) {
                        return Err(InstanceError::MissingArc {
                            position: i + 1,
                            from: u + 1,
                            to: v + 1,
                        });
                    }
                }
            }
        }
        Ok(())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Candidate vertices of position `i`, ascending.
    pub fn requisition(&self, i: usize) -> &[usize] {
        &self.requisitions[i]
    }

    pub fn requisitions(&self) -> &[Vec<usize>] {
        &self.requisitions
    }

    pub fn weights(&self) -> &BTreeMap<Arc, u64> {
        &self.weights
    }

    pub fn weight(&self, from: usize, to: usize) -> Option<u64> {
        self.weights.get(&(from, to)).copied()
    }

    /// Every arc `(u, v)`, `u != v`, with `u` allowed at some position `i` and
    /// `v` allowed at position `i + 1` (cyclically). Sorted, no repeats.
    pub fn relevant_arcs(requisitions: &[Vec<usize>]) -> Vec<Arc> {
        let n = requisitions.len();
        let mut arcs: Vec<Arc> = (0..n)
            .flat_map(|i| {
                let next = &requisitions[(i + 1) % n];
                requisitions[i]
                    .iter()
                    .flat_map(move |&u| next.iter().map(move |&v| (u, v)))
            })
            .filter(|&(u, v)| u != v)
            .collect();
        arcs.sort_unstable();
        arcs.dedup();
        arcs
    }

    /// True iff `assignment` is a bijection onto the vertices that respects
    /// every position's requisition.
    pub fn validate_tour(&self, assignment: &[usize]) -> bool {
        if assignment.len() != self.n {
            return false;
        }
        let mut seen = vec![false; self.n];
        for (i, &v) in assignment.iter().enumerate() {
            if v >= self.n || seen[v] || !self.requisitions[i].contains(&v) {
                return false;
            }
            seen[v] = true;
        }
        true
    }

    /// Closed-tour cost of a feasible assignment.
    pub fn tour_cost(&self, assignment: &[usize]) -> Result<u64, TourError> {
        if assignment.len() != self.n {
            return Err(TourError::Length {
                got: assignment.len(),
                expected: self.n,
            });
        }
        if !self.validate_tour(assignment) {
            return Err(TourError::Infeasible);
        }
        let mut total = 0u64;
        for i in 0..self.n {
            let arc = (assignment[i], assignment[(i + 1) % self.n]);
            total += self.weights.get(&arc).ok_or(TourError::MissingWeight(arc))?;
        }
        Ok(total)
    }

    /// Canonical text form: ascending requisitions, weights sorted by arc.
    pub fn to_text(&self) -> String {
        self.to_string()
    }
}

impl fmt::Display for Instance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{}", self.n)?;
        for req in &self.requisitions {
            let line: Vec<String> = req.iter().map(|v| (v + 1).to_string()).collect();
            writeln!(f, "{}", line.join(" "))?;
        }
        writeln!(f, "{}", self.weights.len())?;
        for (&(u, v), w) in &self.weights {
            writeln!(f, "{} {} {}", u + 1, v + 1, w)?;
        }
        Ok(())
    }
}

impl FromStr for Instance {
    type Err = InstanceError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse_instance(s)
    }
}

/// Parses the instance file format.
///
/// ```text
/// n
/// <one or two vertex indices>      (n lines, position 1..n)
/// m
/// u v w                             (m lines, rho(x_u, x_v) = w)
/// ```
///
/// Lines starting with `#` and blank lines are skipped.
pub fn parse_instance(text: &str) -> Result<Instance, InstanceError> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(k, l)| (k + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));

    let mut next_line = |what: &str| {
        lines.next().ok_or_else(|| InstanceError::Syntax {
            line: text.lines().count() + 1,
            message: format!("unexpected end of input, expected {what}"),
        })
    };

    let (line_no, line) = next_line("n")?;
    let n = parse_ints(line_no, line, 1, 1)?[0];
    if n < 2 {
        return Err(InstanceError::TooSmall(n.max(0) as usize));
    }
    let n = n as usize;

    let mut requisitions = Vec::with_capacity(n);
    for i in 0..n {
        let (line_no, line) = next_line(&format!("requisition for position {}", i + 1))?;
        let values = parse_ints(line_no, line, 1, 2)?;
        let mut req = Vec::with_capacity(values.len());
        for v in values {
            req.push(index(line_no, v, n)?);
        }
        if req.len() == 2 && req[0] == req[1] {
            return Err(InstanceError::DuplicateVertex {
                position: i + 1,
                vertex: req[0] + 1,
            });
        }
        requisitions.push(req);
    }

    let (line_no, line) = next_line("weight count")?;
    let m = parse_ints(line_no, line, 1, 1)?[0];
    if m < 0 {
        return Err(InstanceError::Syntax {
            line: line_no,
            message: format!("negative weight count {m}"),
        });
    }
    let mut weights = BTreeMap::new();
    for _ in 0..m {
        let (line_no, line) = next_line("weight entry")?;
        let values = parse_ints(line_no, line, 3, 3)?;
        let u = index(line_no, values[0], n)?;
        let v = index(line_no, values[1], n)?;
        if values[2] < 0 {
            return Err(InstanceError::NegativeWeight {
                line: line_no,
                value: values[2],
            });
        }
        if u == v {
            return Err(InstanceError::SelfArc {
                line: line_no,
                vertex: u + 1,
            });
        }
        if weights.insert((u, v), values[2] as u64).is_some() {
            return Err(InstanceError::DuplicateWeight {
                line: line_no,
                from: u + 1,
                to: v + 1,
            });
        }
    }
    if let Some((line_no, _)) = lines.next() {
        return Err(InstanceError::Syntax {
            line: line_no,
            message: "trailing content after weight entries".into(),
        });
    }
    Instance::new(requisitions, weights)
}

fn parse_ints(line: usize, text: &str, min: usize, max: usize) -> Result<Vec<i64>, InstanceError> {
    let values = text
        .split_whitespace()
        .map(|tok| {
            tok.parse::<i64>().map_err(|_| InstanceError::Syntax {
                line,
                message: format!("not an integer: {tok:?}"),
            })
        })
        .collect::<Result<Vec<_>, _>>()?;
    if values.len() < min || values.len() > max {
        let expected = if min == max {
            format!("{min}")
        } else {
            format!("{min} to {max}")
        };
        return Err(InstanceError::Syntax {
            line,
            message: format!("expected {expected} integers, found {}", values.len()),
        });
    }
    Ok(values)
}

fn index(line: usize, value: i64, n: usize) -> Result<usize, InstanceError> {
    if value < 1 || value as u64 > n as u64 {
        return Err(InstanceError::OutOfRange { line, value, n });
    }
    Ok(value as usize - 1)
}
