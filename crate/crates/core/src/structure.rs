//! Matching structure of the position/vertex bipartite graph.
//!
//! Feasible tours correspond one-to-one to perfect matchings of the graph
//! with an edge `{i, x}` for every candidate vertex `x` of position `i`.
//! Repeatedly peeling degree-1 vertices yields the *special* edges (present
//! in every perfect matching); what remains is 2-regular and falls apart into
//! even cycles, each carrying exactly two edge-disjoint perfect matchings.

use std::collections::VecDeque;
use std::fmt;

use num_bigint::BigUint;
use thiserror::Error;

use crate::delta::DeltaVector;
use crate::instance::Instance;

/// A vertex of the bipartite graph: a tour position or a graph vertex.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Node {
    Position(usize),
    Vertex(usize),
}

impl fmt::Display for Node {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Node::Position(i) => write!(f, "position {}", i + 1),
            Node::Vertex(x) => write!(f, "vertex x{}", x + 1),
        }
    }
}

/// No perfect matching exists; `witness` lost all its edges during peeling.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
#[error("infeasible: {witness} has no admissible partner")]
pub struct Infeasible {
    pub witness: Node,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum StructureError {
    #[error(transparent)]
    Infeasible(#[from] Infeasible),
    #[error("residual graph is not 2-regular at {0}")]
    NotTwoRegular(Node),
    #[error("delta has length {got}, structure has {expected} cycles")]
    DeltaLength { got: usize, expected: usize },
}

#[derive(Debug, Clone)]
pub struct BipartiteGraph {
    /// Edge list `(position, vertex)`.
    edges: Vec<(usize, usize)>,
    left_adj: Vec<Vec<usize>>,
    right_adj: Vec<Vec<usize>>,
}

impl BipartiteGraph {
    /// Graph with an edge `{i, x}` for each `x` in `requisitions[i]`.
    pub fn from_requisitions(requisitions: &[Vec<usize>]) -> Self {
        let n = requisitions.len();
        let mut edges = Vec::with_capacity(2 * n);
        let mut left_adj = vec![Vec::with_capacity(2); n];
        let mut right_adj = vec![Vec::new(); n];
        for (i, req) in requisitions.iter().enumerate() {
            for &x in req {
                let e = edges.len();
                edges.push((i, x));
                left_adj[i].push(e);
                right_adj[x].push(e);
            }
        }
        BipartiteGraph {
            edges,
            left_adj,
            right_adj,
        }
    }

    pub fn from_instance(inst: &Instance) -> Self {
        Self::from_requisitions(inst.requisitions())
    }

    pub fn n(&self) -> usize {
        self.left_adj.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn left_degree(&self, i: usize) -> usize {
        self.left_adj[i].len()
    }

    pub fn right_degree(&self, x: usize) -> usize {
        self.right_adj[x].len()
    }
}

/// The graph after peeling: surviving edges, all endpoints of degree 2.
#[derive(Debug, Clone)]
pub struct Residual {
    n: usize,
    /// Surviving edges `(position, vertex)`.
    edges: Vec<(usize, usize)>,
}

impl Residual {
    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    /// Number of distinct surviving positions plus vertices.
    pub fn vertex_count(&self) -> usize {
        let mut left = vec![false; self.n];
        let mut right = vec![false; self.n];
        for &(i, x) in &self.edges {
            left[i] = true;
            right[x] = true;
        }
        left.iter().chain(right.iter()).filter(|&&b| b).count()
    }
}

/// Peels degree-1 vertices until every survivor has degree 2.
///
/// The queue is seeded with positions `0..n` and then vertices `0..n` and
/// processed FIFO. A vertex of degree 0, in the input or after a deletion,
/// proves infeasibility.
pub fn find_special_edges(
    g: &BipartiteGraph,
) -> Result<(Vec<(usize, usize)>, Residual), Infeasible> {
    let n = g.n();
    let mut alive = vec![true; g.edges.len()];
    let mut left_deg: Vec<usize> = g.left_adj.iter().map(Vec::len).collect();
    let mut right_deg: Vec<usize> = g.right_adj.iter().map(Vec::len).collect();
    if let Some(i) = left_deg.iter().position(|&d| d == 0) {
        return Err(Infeasible {
            witness: Node::Position(i),
        });
    }
    if let Some(x) = right_deg.iter().position(|&d| d == 0) {
        return Err(Infeasible {
            witness: Node::Vertex(x),
        });
    }
    let mut left_gone = vec![false; n];
    let mut right_gone = vec![false; n];
    let mut queue: VecDeque<Node> = (0..n)
        .map(Node::Position)
        .chain((0..n).map(Node::Vertex))
        .collect();
    let mut specials = Vec::new();

    while let Some(node) = queue.pop_front() {
        let (gone, deg, adj) = match node {
            Node::Position(i) => (left_gone[i], left_deg[i], &g.left_adj[i]),
            Node::Vertex(x) => (right_gone[x], right_deg[x], &g.right_adj[x]),
        };
        if gone {
            continue;
        }
        match deg {
            0 => return Err(Infeasible { witness: node }),
            1 => {}
            _ => continue,
        }
        let e = *adj
            .iter()
            .find(|&&e| alive[e])
            .expect("degree count matches live edges");
        let (i, x) = g.edges[e];
        specials.push((i, x));
        left_gone[i] = true;
        right_gone[x] = true;
        for &f in &g.left_adj[i] {
            if alive[f] {
                alive[f] = false;
                let (_, y) = g.edges[f];
                left_deg[i] -= 1;
                right_deg[y] -= 1;
                if y != x && right_deg[y] <= 1 {
                    queue.push_back(Node::Vertex(y));
                }
            }
        }
        for &f in &g.right_adj[x] {
            if alive[f] {
                alive[f] = false;
                let (j, _) = g.edges[f];
                left_deg[j] -= 1;
                right_deg[x] -= 1;
                if left_deg[j] <= 1 {
                    queue.push_back(Node::Position(j));
                }
            }
        }
    }

    specials.sort_unstable();
    let edges = g
        .edges
        .iter()
        .zip(&alive)
        .filter(|(_, &a)| a)
        .map(|(&e, _)| e)
        .collect();
    Ok((specials, Residual { n, edges }))
}

/// One even cycle of the residual graph.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Cycle {
    /// Positions in traversal order, starting at the lowest one.
    pub positions: Vec<usize>,
    /// `vertices[t]` is the first-matching partner of `positions[t]`; the
    /// second matching pairs `positions[t + 1]` with it (cyclically).
    pub vertices: Vec<usize>,
}

impl Cycle {
    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    /// Partner of `positions[t]` under matching `k` (0 or 1).
    pub fn partner(&self, t: usize, k: usize) -> usize {
        if k == 0 {
            self.vertices[t]
        } else {
            let len = self.vertices.len();
            self.vertices[(t + len - 1) % len]
        }
    }

    pub fn matching(&self, k: usize) -> Vec<(usize, usize)> {
        let mut m: Vec<_> = (0..self.len())
            .map(|t| (self.positions[t], self.partner(t, k)))
            .collect();
        m.sort_unstable();
        m
    }
}

/// Splits a 2-regular residual into cycles, ordered by lowest position.
///
/// In each cycle the first matching pairs the lowest position with its
/// smaller candidate vertex.
pub fn decompose_cycles(residual: &Residual) -> Result<Vec<Cycle>, StructureError> {
    let n = residual.n;
    let mut left: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut right: Vec<Vec<usize>> = vec![Vec::new(); n];
    for &(i, x) in &residual.edges {
        left[i].push(x);
        right[x].push(i);
    }
    for i in 0..n {
        if !left[i].is_empty() && left[i].len() != 2 {
            return Err(StructureError::NotTwoRegular(Node::Position(i)));
        }
        if !right[i].is_empty() && right[i].len() != 2 {
            return Err(StructureError::NotTwoRegular(Node::Vertex(i)));
        }
    }

    let mut visited = vec![false; n];
    let mut cycles = Vec::new();
    for start in 0..n {
        if visited[start] || left[start].is_empty() {
            continue;
        }
        let mut positions = Vec::new();
        let mut vertices = Vec::new();
        let mut pos = start;
        let mut vertex = left[start][0].min(left[start][1]);
        loop {
            visited[pos] = true;
            positions.push(pos);
            vertices.push(vertex);
            let across = &right[vertex];
            let next = if across[0] == pos { across[1] } else { across[0] };
            if next == start {
                break;
            }
            let choices = &left[next];
            vertex = if choices[0] == vertex { choices[1] } else { choices[0] };
            pos = next;
        }
        cycles.push(Cycle {
            positions,
            vertices,
        });
    }
    Ok(cycles)
}

/// Where a position's vertex comes from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Home {
    Special(usize),
    /// Cycle index and offset within that cycle's traversal.
    InCycle { cycle: usize, offset: usize },
}

#[derive(Debug, Clone)]
pub struct MatchingStructure {
    n: usize,
    specials: Vec<(usize, usize)>,
    cycles: Vec<Cycle>,
    homes: Vec<Home>,
}

impl MatchingStructure {
    pub fn build(inst: &Instance) -> Result<Self, StructureError> {
        Self::from_requisitions(inst.requisitions())
    }

    pub fn from_requisitions(requisitions: &[Vec<usize>]) -> Result<Self, StructureError> {
        let g = BipartiteGraph::from_requisitions(requisitions);
        let (specials, residual) = find_special_edges(&g)?;
        let cycles = decompose_cycles(&residual)?;
        let n = g.n();
        let mut homes = vec![Home::Special(usize::MAX); n];
        for &(i, x) in &specials {
            homes[i] = Home::Special(x);
        }
        for (j, c) in cycles.iter().enumerate() {
            for (t, &i) in c.positions.iter().enumerate() {
                homes[i] = Home::InCycle {
                    cycle: j,
                    offset: t,
                };
            }
        }
        Ok(MatchingStructure {
            n,
            specials,
            cycles,
            homes,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Number of cycles.
    pub fn q(&self) -> usize {
        self.cycles.len()
    }

    /// Special edges `(position, vertex)`, sorted by position.
    pub fn specials(&self) -> &[(usize, usize)] {
        &self.specials
    }

    pub fn cycles(&self) -> &[Cycle] {
        &self.cycles
    }

    pub fn home(&self, i: usize) -> Home {
        self.homes[i]
    }

    /// Vertex at position `i` when its cycle (if any) uses matching `k`.
    pub fn vertex_at(&self, i: usize, k: usize) -> usize {
        match self.homes[i] {
            Home::Special(x) => x,
            Home::InCycle { cycle, offset } => self.cycles[cycle].partner(offset, k),
        }
    }

    /// The feasible tour selected by `delta`.
    pub fn solution_from_delta(&self, delta: &DeltaVector) -> Result<Vec<usize>, StructureError> {
        if delta.len() != self.q() {
            return Err(StructureError::DeltaLength {
                got: delta.len(),
                expected: self.q(),
            });
        }
        Ok((0..self.n)
            .map(|i| match self.homes[i] {
                Home::Special(x) => x,
                Home::InCycle { cycle, offset } => {
                    self.cycles[cycle].partner(offset, delta.bit(cycle))
                }
            })
            .collect())
    }

    /// `2^q`, the number of feasible tours.
    pub fn count_solutions(&self) -> BigUint {
        count_for_cycles(self.q())
    }

    /// Text dump: `S i u` per special edge, `C j: i1 u1 i2 u2 ...` per cycle.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        for &(i, x) in &self.specials {
            out.push_str(&format!("S {} {}\n", i + 1, x + 1));
        }
        for (j, c) in self.cycles.iter().enumerate() {
            out.push_str(&format!("C {}:", j + 1));
            for (&i, &x) in c.positions.iter().zip(&c.vertices) {
                out.push_str(&format!(" {} {}", i + 1, x + 1));
            }
            out.push('\n');
        }
        out
    }
}

pub fn count_for_cycles(q: usize) -> BigUint {
    BigUint::from(1u8) << q
}
