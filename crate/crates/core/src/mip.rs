//! Mixed integer linear model over one binary per cycle.
//!
//! Variables: `d_j` (matching choice of cycle `j`) and, for every cycle but
//! the last, two continuous `p_j^(k) >= 0` that upper-bound the pair costs
//! charged to cycle `j` when it uses matching `k`:
//!
//! ```text
//! min   sum_{j<q} (p_j^0 + p_j^1) + sum_j (P^0_j (1 - d_j) + P^1_j d_j) + C
//! s.t.  p_j^0 >= sum_{j'>j} P^00_jj' (1 - d_j - d_j') + P^01_jj' (d_j' - d_j)
//!       p_j^1 >= sum_{j'>j} P^10_jj' (d_j - d_j')     + P^11_jj' (d_j + d_j' - 1)
//! ```
//!
//! At `d_j = k` the `k` row is tight at the exact pair cost and the other row
//! is non-positive, so minimizing drives each `p` to `max(0, rhs)`.

use std::collections::BTreeMap;
use std::fmt;
use std::io::{self, Write};

use thiserror::Error;

use crate::contacts::ContactTables;
use crate::delta::DeltaVector;
use crate::exact::{gray_minimum, SolveError};

pub const MAX_VERIFY_CYCLES: usize = 16;

#[derive(Debug, Error)]
pub enum MipError {
    #[error("cycle count {q} exceeds verification limit {limit}")]
    GuardExceeded { q: usize, limit: usize },
    #[error(transparent)]
    Solve(#[from] SolveError),
    #[error("lp line {line}: {message}")]
    Lp { line: usize, message: String },
}

/// Model variable. Orders as `d1 < d2 < ... < p0_1 < p1_1 < p0_2 < ...`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Var {
    /// Binary choice for cycle `j` (0-based).
    D(usize),
    /// Continuous bound for cycle `j` (0-based) and matching `k`.
    P { j: usize, k: usize },
}

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Var::D(j) => write!(f, "d{}", j + 1),
            Var::P { j, k } => write!(f, "p{}_{}", k, j + 1),
        }
    }
}

impl Var {
    fn parse(name: &str) -> Option<Var> {
        if let Some(rest) = name.strip_prefix('d') {
            let j: usize = rest.parse().ok()?;
            return (j >= 1).then(|| Var::D(j - 1));
        }
        let rest = name.strip_prefix('p')?;
        let (k, j) = rest.split_once('_')?;
        let (k, j): (usize, usize) = (k.parse().ok()?, j.parse().ok()?);
        (k <= 1 && j >= 1).then_some(Var::P { j: j - 1, k })
    }
}

/// Linear expression with integer coefficients; zero terms are never stored.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct LinExpr {
    pub terms: BTreeMap<Var, i128>,
    pub constant: i128,
}

impl LinExpr {
    fn add(&mut self, var: Var, coef: i128) {
        let entry = self.terms.entry(var).or_insert(0);
        *entry += coef;
        if *entry == 0 {
            self.terms.remove(&var);
        }
    }

    pub fn coef(&self, var: Var) -> i128 {
        self.terms.get(&var).copied().unwrap_or(0)
    }

    fn eval(&self, d: &DeltaVector, p: &BTreeMap<Var, i128>) -> i128 {
        self.constant
            + self
                .terms
                .iter()
                .map(|(v, c)| {
                    c * match *v {
                        Var::D(j) => d.bit(j) as i128,
                        pv => p.get(&pv).copied().unwrap_or(0),
                    }
                })
                .sum::<i128>()
    }
}

/// `lhs >= rhs`, `lhs` holding all variable terms.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Constraint {
    pub name: String,
    pub lhs: LinExpr,
    pub rhs: i128,
    /// The continuous variable this row bounds.
    pub bounds: Var,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MipModel {
    pub q: usize,
    pub objective: LinExpr,
    pub constraints: Vec<Constraint>,
}

impl MipModel {
    pub fn binaries(&self) -> impl Iterator<Item = Var> {
        (0..self.q).map(Var::D)
    }

    pub fn continuous(&self) -> impl Iterator<Item = Var> {
        (0..self.q.saturating_sub(1)).flat_map(|j| (0..2).map(move |k| Var::P { j, k }))
    }

    /// Objective value at binary point `d` with every `p` at its smallest
    /// feasible value.
    pub fn tight_objective(&self, d: &DeltaVector) -> i128 {
        let mut p = BTreeMap::new();
        for c in &self.constraints {
            let others: i128 = c
                .lhs
                .terms
                .iter()
                .filter(|(v, _)| **v != c.bounds)
                .map(|(v, coef)| match *v {
                    Var::D(j) => coef * d.bit(j) as i128,
                    _ => 0,
                })
                .sum();
            debug_assert_eq!(c.lhs.coef(c.bounds), 1);
            p.insert(c.bounds, (c.rhs - others).max(0));
        }
        self.objective.eval(d, &p)
    }
}

/// The nonlinear objective with products of binaries, evaluated directly.
pub fn quadratic_objective(t: &ContactTables, d: &DeltaVector) -> i128 {
    let x = |j: usize| d.bit(j) as i128;
    let mut total = t.constant() as i128;
    for j in 0..t.q() {
        total += t.single(j, 0) as i128 * (1 - x(j)) + t.single(j, 1) as i128 * x(j);
    }
    for (j, jj, p) in t.pairs() {
        let (a, b) = (x(j), x(jj));
        total += p[0][0] as i128 * (1 - a) * (1 - b)
            + p[0][1] as i128 * (1 - a) * b
            + p[1][0] as i128 * a * (1 - b)
            + p[1][1] as i128 * a * b;
    }
    total
}

pub fn build_mip(t: &ContactTables) -> MipModel {
    let q = t.q();
    let mut objective = LinExpr {
        constant: t.constant() as i128,
        ..LinExpr::default()
    };
    for j in 0..q {
        let (p0, p1) = (t.single(j, 0) as i128, t.single(j, 1) as i128);
        objective.constant += p0;
        objective.add(Var::D(j), p1 - p0);
    }
    for j in 0..q.saturating_sub(1) {
        objective.add(Var::P { j, k: 0 }, 1);
        objective.add(Var::P { j, k: 1 }, 1);
    }

    let mut constraints = Vec::new();
    for j in 0..q.saturating_sub(1) {
        // Row 0: p0_j + sum (P00 + P01) d_j + sum (P00 - P01) d_j' >= sum P00
        let mut lhs0 = LinExpr::default();
        let mut rhs0 = 0i128;
        // Row 1: p1_j - sum (P10 + P11) d_j + sum (P10 - P11) d_j' >= -sum P11
        let mut lhs1 = LinExpr::default();
        let mut rhs1 = 0i128;
        lhs0.add(Var::P { j, k: 0 }, 1);
        lhs1.add(Var::P { j, k: 1 }, 1);
        for other in t.neighbors(j).filter(|&o| o > j) {
            let p = t.pair(j, other).expect("neighbor has a table");
            let [[p00, p01], [p10, p11]] = p.map(|row| row.map(|w| w as i128));
            lhs0.add(Var::D(j), p00 + p01);
            lhs0.add(Var::D(other), p00 - p01);
            rhs0 += p00;
            lhs1.add(Var::D(j), -(p10 + p11));
            lhs1.add(Var::D(other), p10 - p11);
            rhs1 -= p11;
        }
        constraints.push(Constraint {
            name: format!("c0_{}", j + 1),
            lhs: lhs0,
            rhs: rhs0,
            bounds: Var::P { j, k: 0 },
        });
        constraints.push(Constraint {
            name: format!("c1_{}", j + 1),
            lhs: lhs1,
            rhs: rhs1,
            bounds: Var::P { j, k: 1 },
        });
    }
    MipModel {
        q,
        objective,
        constraints,
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LinearizationReport {
    /// Every binary point agrees across linear, quadratic and table objectives.
    pub all_agree: bool,
    pub first_mismatch: Option<DeltaVector>,
    pub linear_minimum: i128,
    pub argmin: DeltaVector,
    pub exact_minimum: u64,
}

impl LinearizationReport {
    pub fn holds(&self) -> bool {
        self.all_agree && self.linear_minimum == self.exact_minimum as i128
    }
}

/// Checks the linear model against the table objective on all `2^q` binary
/// points and compares its minimum with the Gray-code optimum.
pub fn verify_linearization(t: &ContactTables) -> Result<LinearizationReport, MipError> {
    let q = t.q();
    if q > MAX_VERIFY_CYCLES {
        return Err(MipError::GuardExceeded {
            q,
            limit: MAX_VERIFY_CYCLES,
        });
    }
    let model = build_mip(t);
    let mut all_agree = true;
    let mut first_mismatch = None;
    let mut best: Option<(i128, u64)> = None;
    for mask in 0..(1u64 << q) {
        let d = DeltaVector::from_mask(q, mask);
        let linear = model.tight_objective(&d);
        let quadratic = quadratic_objective(t, &d);
        let tables = t.objective(&d).map_err(SolveError::from)? as i128;
        if linear != tables || quadratic != tables {
            all_agree = false;
            first_mismatch.get_or_insert(d);
        }
        if best.is_none_or(|(v, _)| linear < v) {
            best = Some((linear, mask));
        }
    }
    let (linear_minimum, mask) = best.expect("at least one point");
    let exact = gray_minimum(t)?;
    Ok(LinearizationReport {
        all_agree,
        first_mismatch,
        linear_minimum,
        argmin: DeltaVector::from_mask(q, mask),
        exact_minimum: exact.cost,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LpOptions {
    /// Emit the objective constant; when false it is recorded in a comment.
    pub include_constant: bool,
}

impl Default for LpOptions {
    fn default() -> Self {
        LpOptions {
            include_constant: true,
        }
    }
}

fn write_terms(out: &mut impl Write, terms: &BTreeMap<Var, i128>) -> io::Result<()> {
    for (idx, (var, &coef)) in terms.iter().enumerate() {
        if idx == 0 {
            write!(out, " {coef} {var}")?;
        } else if coef < 0 {
            write!(out, " - {} {var}", -coef)?;
        } else {
            write!(out, " + {coef} {var}")?;
        }
    }
    Ok(())
}

/// Writes the model in LP text format.
pub fn write_lp(m: &MipModel, out: &mut impl Write, opts: LpOptions) -> io::Result<()> {
    writeln!(
        out,
        "\\ 2-TSPVR matching model: {} binaries, {} continuous, {} rows",
        m.q,
        m.continuous().count(),
        m.constraints.len()
    )?;
    if !opts.include_constant {
        writeln!(out, "\\ objective constant omitted: {}", m.objective.constant)?;
    }
    writeln!(out, "Minimize")?;
    write!(out, " obj:")?;
    write_terms(out, &m.objective.terms)?;
    match (m.objective.terms.is_empty(), opts.include_constant) {
        (true, true) => write!(out, " {}", m.objective.constant)?,
        (true, false) => write!(out, " 0")?,
        (false, true) => {
            let c = m.objective.constant;
            if c < 0 {
                write!(out, " - {}", -c)?;
            } else {
                write!(out, " + {c}")?;
            }
        }
        (false, false) => {}
    }
    writeln!(out)?;
    writeln!(out, "Subject To")?;
    for c in &m.constraints {
        if c.lhs.terms.is_empty() {
            writeln!(out, "\\ {}: empty row, 0 >= {}", c.name, c.rhs)?;
            continue;
        }
        write!(out, " {}:", c.name)?;
        write_terms(out, &c.lhs.terms)?;
        writeln!(out, " >= {}", c.rhs)?;
    }
    writeln!(out, "Bounds")?;
    for v in m.continuous() {
        writeln!(out, " {v} >= 0")?;
    }
    writeln!(out, "Binary")?;
    for v in m.binaries() {
        writeln!(out, " {v}")?;
    }
    writeln!(out, "End")?;
    Ok(())
}

pub fn lp_string(m: &MipModel, opts: LpOptions) -> String {
    let mut buf = Vec::new();
    write_lp(m, &mut buf, opts).expect("writing to a Vec cannot fail");
    String::from_utf8(buf).expect("LP output is ASCII")
}

/// Coefficients recovered from an LP file written by [`write_lp`].
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct LpContents {
    pub objective: LinExpr,
    /// Row name to `(lhs, rhs)` of a `>=` row.
    pub rows: BTreeMap<String, (LinExpr, i128)>,
    pub lower_bounds: BTreeMap<Var, i128>,
    pub binaries: Vec<Var>,
}

/// Minimal reader for the subset of LP emitted by [`write_lp`].
pub fn read_lp(text: &str) -> Result<LpContents, MipError> {
    #[derive(PartialEq)]
    enum Section {
        Head,
        Objective,
        Rows,
        Bounds,
        Binary,
        End,
    }
    let err = |line: usize, message: &str| MipError::Lp {
        line,
        message: message.to_string(),
    };
    let mut section = Section::Head;
    let mut out = LpContents::default();
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('\\') {
            continue;
        }
        match line {
            "Minimize" => section = Section::Objective,
            "Subject To" => section = Section::Rows,
            "Bounds" => section = Section::Bounds,
            "Binary" => section = Section::Binary,
            "End" => section = Section::End,
            _ => match section {
                Section::Objective => {
                    let body = line
                        .strip_prefix("obj:")
                        .ok_or_else(|| err(line_no, "expected obj:"))?;
                    out.objective = parse_expr(body).ok_or_else(|| err(line_no, "bad expression"))?;
                }
                Section::Rows => {
                    let (name, body) = line
                        .split_once(':')
                        .ok_or_else(|| err(line_no, "row without name"))?;
                    let (lhs, rhs) = body
                        .split_once(">=")
                        .ok_or_else(|| err(line_no, "row without >="))?;
                    let lhs = parse_expr(lhs).ok_or_else(|| err(line_no, "bad expression"))?;
                    let rhs = rhs
                        .trim()
                        .parse()
                        .map_err(|_| err(line_no, "bad right-hand side"))?;
                    out.rows.insert(name.trim().to_string(), (lhs, rhs));
                }
                Section::Bounds => {
                    let (var, bound) = line
                        .split_once(">=")
                        .ok_or_else(|| err(line_no, "bound without >="))?;
                    let var = Var::parse(var.trim()).ok_or_else(|| err(line_no, "bad variable"))?;
                    let bound = bound
                        .trim()
                        .parse()
                        .map_err(|_| err(line_no, "bad bound"))?;
                    out.lower_bounds.insert(var, bound);
                }
                Section::Binary => {
                    for name in line.split_whitespace() {
                        out.binaries
                            .push(Var::parse(name).ok_or_else(|| err(line_no, "bad variable"))?);
                    }
                }
                Section::Head | Section::End => return Err(err(line_no, "content outside a section")),
            },
        }
    }
    if section != Section::End {
        return Err(err(text.lines().count(), "missing End"));
    }
    Ok(out)
}

/// Parses `[+|-] coef [var] ...` into a linear expression.
fn parse_expr(body: &str) -> Option<LinExpr> {
    let mut expr = LinExpr::default();
    let mut tokens = body.split_whitespace().peekable();
    let mut sign = 1i128;
    while let Some(tok) = tokens.next() {
        match tok {
            "+" => sign = 1,
            "-" => sign = -1,
            _ => {
                let value: i128 = tok.parse().ok()?;
                match tokens.peek().and_then(|t| Var::parse(t)) {
                    Some(var) => {
                        tokens.next();
                        expr.add(var, sign * value);
                    }
                    None => expr.constant += sign * value,
                }
                sign = 1;
            }
        }
    }
    Some(expr)
}
