//! Instances, assignments, the perturbed bounds and LP1 feasibility checking.
//!
//! Vertex ids are 0-based in memory and 1-based in the text format.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::path::Path;

use num::{BigInt, BigRational, One, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// Relative tolerance used by every feasibility check.
pub const FEAS_TOL: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq)]
pub struct Edge {
    pub i: usize,
    pub j: usize,
    pub w: f64,
    /// Edge capacity. Ignored (and set to `min(b_i, b_j)`) for uncapacitated instances.
    pub c: u64,
}

impl Edge {
    pub fn other(&self, v: usize) -> usize {
        if v == self.i {
            self.j
        } else {
            self.i
        }
    }
}

/// An immutable b-matching instance.
#[derive(Clone, Debug)]
pub struct Instance {
    b: Vec<u64>,
    edges: Vec<Edge>,
    capacitated: bool,
    adj: Vec<Vec<usize>>,
    index: HashMap<(usize, usize), usize>,
}

impl Instance {
    /// Builds and validates an instance. Uncapacitated edges get `c = min(b_i, b_j)`.
    pub fn new(b: Vec<u64>, mut edges: Vec<Edge>, capacitated: bool) -> Result<Self> {
        let n = b.len();
        let mut adj = vec![Vec::new(); n];
        let mut index = HashMap::with_capacity(edges.len());
        for (id, e) in edges.iter_mut().enumerate() {
            if e.i >= n || e.j >= n {
                return Err(Error::Instance(format!("edge {} references a missing vertex", id + 1)));
            }
            if e.i == e.j {
                return Err(Error::Instance(format!("self-loop at vertex {}", e.i + 1)));
            }
            if !(e.w.is_finite() && e.w >= 0.0) {
                return Err(Error::Instance(format!("edge {} has invalid weight {}", id + 1, e.w)));
            }
            let cap = b[e.i].min(b[e.j]);
            if capacitated {
                if e.c > cap {
                    return Err(Error::Instance(format!(
                        "edge ({}, {}) has c = {} > min(b_i, b_j) = {}",
                        e.i + 1,
                        e.j + 1,
                        e.c,
                        cap
                    )));
                }
            } else {
                e.c = cap;
            }
            let key = (e.i.min(e.j), e.i.max(e.j));
            if index.insert(key, id).is_some() {
                return Err(Error::Instance(format!("parallel edge ({}, {})", key.0 + 1, key.1 + 1)));
            }
            adj[e.i].push(id);
            adj[e.j].push(id);
        }
        Ok(Self { b, edges, capacitated, adj, index })
    }

    /// Parses the `p bm` text format.
    pub fn parse(text: &str) -> Result<Self> {
        let err = |line: usize, msg: &str| Error::Parse { line, msg: msg.to_string() };
        let mut header: Option<(usize, usize, bool)> = None;
        let mut b: Vec<Option<u64>> = Vec::new();
        let mut edges = Vec::new();
        for (ln, raw) in text.lines().enumerate() {
            let line_no = ln + 1;
            let body = raw.split('#').next().unwrap_or("");
            let toks: Vec<&str> = body.split_whitespace().collect();
            if toks.is_empty() {
                continue;
            }
            match toks[0] {
                "p" => {
                    if header.is_some() {
                        return Err(err(line_no, "duplicate problem line"));
                    }
                    if toks.len() < 4 || toks.len() > 5 || toks[1] != "bm" {
                        return Err(err(line_no, "expected `p bm <n> <m> [cap]`"));
                    }
                    let n = parse_num::<usize>(toks[2]).ok_or_else(|| err(line_no, "bad vertex count"))?;
                    let m = parse_num::<usize>(toks[3]).ok_or_else(|| err(line_no, "bad edge count"))?;
                    let cap = match toks.get(4) {
                        None => false,
                        Some(&"cap") => true,
                        Some(_) => return Err(err(line_no, "unknown problem flag")),
                    };
                    header = Some((n, m, cap));
                    b = vec![None; n];
                }
                "v" => {
                    let (n, _, _) = header.ok_or_else(|| err(line_no, "vertex line before problem line"))?;
                    if toks.len() != 3 {
                        return Err(err(line_no, "expected `v <id> <b>`"));
                    }
                    let id = parse_id(toks[1], n).ok_or_else(|| err(line_no, "bad vertex id"))?;
                    let bi = parse_num::<u64>(toks[2]).ok_or_else(|| err(line_no, "bad capacity"))?;
                    if b[id].replace(bi).is_some() {
                        return Err(err(line_no, "vertex listed twice"));
                    }
                }
                "e" => {
                    let (n, _, cap) = header.ok_or_else(|| err(line_no, "edge line before problem line"))?;
                    let want = if cap { 5 } else { 4 };
                    if toks.len() != want {
                        return Err(err(
                            line_no,
                            if cap { "expected `e <i> <j> <w> <c>`" } else { "expected `e <i> <j> <w>`" },
                        ));
                    }
                    let i = parse_id(toks[1], n).ok_or_else(|| err(line_no, "bad endpoint"))?;
                    let j = parse_id(toks[2], n).ok_or_else(|| err(line_no, "bad endpoint"))?;
                    let w = toks[3]
                        .parse::<f64>()
                        .ok()
                        .filter(|w| w.is_finite() && *w >= 0.0)
                        .ok_or_else(|| err(line_no, "weight must be a nonnegative number"))?;
                    let c = if cap {
                        parse_num::<u64>(toks[4]).ok_or_else(|| err(line_no, "bad edge capacity"))?
                    } else {
                        0
                    };
                    if i == j {
                        return Err(err(line_no, "self-loops are not allowed"));
                    }
                    edges.push((line_no, Edge { i, j, w, c }));
                }
                _ => return Err(err(line_no, "unknown line type")),
            }
        }
        let (_, m, cap) = header.ok_or_else(|| err(0, "missing problem line"))?;
        if edges.len() != m {
            return Err(err(0, &format!("header declares {m} edges, found {}", edges.len())));
        }
        let b: Vec<u64> = b
            .into_iter()
            .enumerate()
            .map(|(i, bi)| bi.ok_or_else(|| err(0, &format!("vertex {} has no `v` line", i + 1))))
            .collect::<Result<_>>()?;
        let mut seen = HashMap::new();
        for (ln, e) in &edges {
            if seen.insert((e.i.min(e.j), e.i.max(e.j)), ()).is_some() {
                return Err(err(*ln, "parallel edge"));
            }
        }
        Self::new(b, edges.into_iter().map(|(_, e)| e).collect(), cap).map_err(|e| match e {
            Error::Instance(msg) => Error::Parse { line: 0, msg },
            other => other,
        })
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Parse { line: 0, msg: format!("cannot read {}: {e}", path.display()) })?;
        Self::parse(&text)
    }

    /// Serializes back into the text format.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let flag = if self.capacitated { " cap" } else { "" };
        let _ = writeln!(s, "p bm {} {}{flag}", self.n(), self.m());
        for (i, bi) in self.b.iter().enumerate() {
            let _ = writeln!(s, "v {} {bi}", i + 1);
        }
        for e in &self.edges {
            if self.capacitated {
                let _ = writeln!(s, "e {} {} {} {}", e.i + 1, e.j + 1, e.w, e.c);
            } else {
                let _ = writeln!(s, "e {} {} {}", e.i + 1, e.j + 1, e.w);
            }
        }
        s
    }

    pub fn n(&self) -> usize {
        self.b.len()
    }
    pub fn m(&self) -> usize {
        self.edges.len()
    }
    pub fn b(&self) -> &[u64] {
        &self.b
    }
    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }
    pub fn edge(&self, e: usize) -> &Edge {
        &self.edges[e]
    }
    pub fn capacitated(&self) -> bool {
        self.capacitated
    }
    /// Edge ids incident to `v`, in input order.
    pub fn incident(&self, v: usize) -> &[usize] {
        &self.adj[v]
    }
    pub fn edge_between(&self, i: usize, j: usize) -> Option<usize> {
        self.index.get(&(i.min(j), i.max(j))).copied()
    }
    pub fn weights(&self) -> Vec<f64> {
        self.edges.iter().map(|e| e.w).collect()
    }
    /// Same graph and capacities with new weights.
    pub fn with_weights(&self, w: &[f64]) -> Self {
        let mut out = self.clone();
        for (e, &we) in out.edges.iter_mut().zip(w) {
            e.w = we;
        }
        out
    }

    /// Smallest power of ten that makes every weight integral, with the scaled weights.
    pub fn integer_weights(&self) -> Result<(Vec<i64>, i64)> {
        let mut scale: i64 = 1;
        'outer: for _ in 0..=9 {
            for e in &self.edges {
                let s = e.w * scale as f64;
                if (s - s.round()).abs() > 1e-7 * s.abs().max(1.0) {
                    scale *= 10;
                    continue 'outer;
                }
            }
            let w = self.edges.iter().map(|e| (e.w * scale as f64).round() as i64).collect();
            return Ok((w, scale));
        }
        Err(Error::Instance("weights need more than nine decimal digits for exact routines".into()))
    }
}

fn parse_num<T: std::str::FromStr>(s: &str) -> Option<T> {
    s.parse().ok()
}

fn parse_id(s: &str, n: usize) -> Option<usize> {
    let id: usize = s.parse().ok()?;
    (1..=n).contains(&id).then(|| id - 1)
}

/// Edge multiplicities indexed by edge id.
#[derive(Clone, Debug, PartialEq)]
pub struct FractionalAssignment {
    y: Vec<f64>,
}

impl FractionalAssignment {
    pub fn zeros(m: usize) -> Self {
        Self { y: vec![0.0; m] }
    }
    pub fn from_vec(y: Vec<f64>) -> Self {
        Self { y }
    }
    /// Builds from `(i, j, y)` triples with 0-based ids; rejects pairs that are not edges.
    pub fn from_triples(inst: &Instance, triples: &[(usize, usize, f64)]) -> Result<Self> {
        let mut y = Self::zeros(inst.m());
        for &(i, j, v) in triples {
            let e = inst
                .edge_between(i, j)
                .ok_or_else(|| Error::Assignment(format!("({}, {}) is not an edge", i + 1, j + 1)))?;
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::Assignment(format!("negative or non-finite y on ({}, {})", i + 1, j + 1)));
            }
            y.y[e] += v;
        }
        Ok(y)
    }
    pub fn len(&self) -> usize {
        self.y.len()
    }
    pub fn is_empty(&self) -> bool {
        self.y.is_empty()
    }
    pub fn get(&self, e: usize) -> f64 {
        self.y[e]
    }
    pub fn set(&mut self, e: usize, v: f64) {
        self.y[e] = v;
    }
    pub fn values(&self) -> &[f64] {
        &self.y
    }
    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.y
    }
    pub fn support(&self) -> impl Iterator<Item = usize> + '_ {
        self.y.iter().enumerate().filter(|(_, &v)| v > 0.0).map(|(e, _)| e)
    }
    pub fn scaled(&self, s: f64) -> Self {
        Self { y: self.y.iter().map(|v| v * s).collect() }
    }
    /// `(1 - t) * self + t * other`.
    pub fn mix(&self, other: &Self, t: f64) -> Self {
        Self { y: self.y.iter().zip(&other.y).map(|(a, b)| (1.0 - t) * a + t * b).collect() }
    }
    pub fn load(&self, inst: &Instance, v: usize) -> f64 {
        inst.incident(v).iter().map(|&e| self.y[e]).sum()
    }
    pub fn loads(&self, inst: &Instance) -> Vec<f64> {
        let mut l = vec![0.0; inst.n()];
        for (e, edge) in inst.edges().iter().enumerate() {
            l[edge.i] += self.y[e];
            l[edge.j] += self.y[e];
        }
        l
    }
    pub fn is_integral(&self) -> bool {
        self.y.iter().all(|v| v.fract() == 0.0)
    }
    pub fn dot(&self, h: &[f64]) -> f64 {
        self.y.iter().zip(h).map(|(a, b)| a * b).sum()
    }
    /// `(i, j, y)` triples over the support, 0-based.
    pub fn triples(&self, inst: &Instance) -> Vec<(usize, usize, f64)> {
        self.support().map(|e| (inst.edge(e).i, inst.edge(e).j, self.y[e])).collect()
    }
}

/// A vertex set with odd b-norm.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct OddSet {
    members: Vec<usize>,
    bnorm: u64,
}

impl OddSet {
    /// Sorts and dedups `members`; fails if the b-norm is even.
    pub fn new(mut members: Vec<usize>, inst: &Instance) -> Result<Self> {
        members.sort_unstable();
        members.dedup();
        let bnorm = members.iter().map(|&v| inst.b()[v]).sum::<u64>();
        if bnorm % 2 == 0 {
            return Err(Error::EvenBnorm(bnorm));
        }
        Ok(Self { members, bnorm })
    }
    pub fn members(&self) -> &[usize] {
        &self.members
    }
    pub fn bnorm(&self) -> u64 {
        self.bnorm
    }
    pub fn contains(&self, v: usize) -> bool {
        self.members.binary_search(&v).is_ok()
    }
    pub fn is_subset_of(&self, other: &Self) -> bool {
        self.members.iter().all(|&v| other.contains(v))
    }
    pub fn is_disjoint(&self, other: &Self) -> bool {
        self.members.iter().all(|&v| !other.contains(v))
    }
    /// Σ of y over edges with both ends inside.
    pub fn inside(&self, y: &FractionalAssignment, inst: &Instance) -> f64 {
        let mut s = 0.0;
        for &v in &self.members {
            for &e in inst.incident(v) {
                let u = inst.edge(e).other(v);
                if u > v && self.contains(u) {
                    s += y.get(e);
                }
            }
        }
        s
    }
}

/// True iff every two sets are nested or disjoint.
pub fn is_laminar(sets: &[OddSet]) -> bool {
    for (a, sa) in sets.iter().enumerate() {
        for sb in &sets[a + 1..] {
            if !(sa.is_disjoint(sb) || sa.is_subset_of(sb) || sb.is_subset_of(sa)) {
                return false;
            }
        }
    }
    true
}

#[derive(Clone, Debug, PartialEq)]
pub struct ViolationReport {
    /// Largest violation ratio over everything reported.
    pub lambda: f64,
    pub lambda_vertex: Vec<f64>,
    pub family: Vec<(OddSet, f64)>,
    /// False only when the oracle could merely bound λ from above (that bound is then ≤ 1 + 8δ).
    pub lambda_exact: bool,
}

pub fn validate_delta(delta: f64) -> Result<()> {
    if delta > 0.0 && delta <= 1.0 / 16.0 {
        Ok(())
    } else {
        Err(Error::DeltaOutOfRange(delta))
    }
}

/// The perturbation formulas stay meaningful for any δ < 1/4; only the solvers need δ ≤ 1/16.
fn validate_formula_delta(delta: f64) -> Result<()> {
    if delta > 0.0 && delta < 0.25 {
        Ok(())
    } else {
        Err(Error::DeltaOutOfRange(delta))
    }
}

/// `(1 - 4δ) b_i`.
pub fn perturbed_vertex_bound(b: u64, delta: f64) -> Result<f64> {
    validate_formula_delta(delta)?;
    Ok((1.0 - 4.0 * delta) * b as f64)
}

/// `⌊bnorm/2⌋ - δ² bnorm² / 4` for odd `bnorm ≥ 3`.
pub fn perturbed_oddset_bound(bnorm: u64, delta: f64) -> Result<f64> {
    validate_formula_delta(delta)?;
    if bnorm % 2 == 0 || bnorm < 3 {
        return Err(Error::EvenBnorm(bnorm));
    }
    let l = bnorm as f64;
    Ok((bnorm / 2) as f64 - delta * delta * l * l / 4.0)
}

/// Exact rational counterpart of [`perturbed_vertex_bound`].
pub fn perturbed_vertex_bound_exact(b: u64, delta: &BigRational) -> BigRational {
    (BigRational::one() - BigRational::from_integer(4.into()) * delta) * BigRational::from_integer(b.into())
}

/// Exact rational counterpart of [`perturbed_oddset_bound`].
pub fn perturbed_oddset_bound_exact(bnorm: u64, delta: &BigRational) -> Result<BigRational> {
    if bnorm % 2 == 0 || bnorm < 3 {
        return Err(Error::EvenBnorm(bnorm));
    }
    let l = BigRational::from_integer(bnorm.into());
    Ok(BigRational::from_integer((bnorm / 2).into()) - delta * delta * &l * &l / BigRational::from_integer(4.into()))
}

/// Exact rational value of an `f64` (every finite float is a dyadic rational).
pub fn rational(x: f64) -> BigRational {
    BigRational::from_float(x).expect("finite float")
}

/// Ratio with the convention `0/0 = 0`, `x/0 = ∞`.
pub fn ratio(num: f64, den: f64) -> f64 {
    if den > 0.0 {
        num / den
    } else if num > 0.0 {
        f64::INFINITY
    } else {
        0.0
    }
}

/// Violation ratios of the vertex constraints and of the supplied odd sets.
pub fn violation_report(
    y: &FractionalAssignment,
    inst: &Instance,
    family: &[OddSet],
    delta: f64,
) -> Result<ViolationReport> {
    validate_delta(delta)?;
    let loads = y.loads(inst);
    let lambda_vertex: Vec<f64> =
        loads.iter().zip(inst.b()).map(|(&l, &b)| ratio(l, (1.0 - 4.0 * delta) * b as f64)).collect();
    let mut lambda = lambda_vertex.iter().copied().fold(0.0, f64::max);
    let mut fam = Vec::with_capacity(family.len());
    for u in family {
        let bu = perturbed_oddset_bound(u.bnorm(), delta)?;
        let lu = ratio(u.inside(y, inst), bu);
        lambda = lambda.max(lu);
        fam.push((u.clone(), lu));
    }
    Ok(ViolationReport { lambda, lambda_vertex, family: fam, lambda_exact: true })
}

pub fn objective(y: &FractionalAssignment, inst: &Instance) -> f64 {
    inst.edges().iter().zip(y.values()).map(|(e, v)| e.w * v).sum()
}

/// The first LP1 constraint found violated.
#[derive(Clone, Debug, PartialEq)]
pub enum Violation {
    Negative {
        edge: usize,
    },
    Vertex {
        vertex: usize,
        load: f64,
        bound: u64,
    },
    EdgeCap {
        edge: usize,
        y: f64,
        cap: u64,
    },
    OddSet {
        members: Vec<usize>,
        inside: f64,
        bound: u64,
    },
    /// `y(E[U]) + y(F) ≤ ⌊(‖U‖ + c(F))/2⌋` for `F` a set of edges leaving `U`.
    CapOddSet {
        members: Vec<usize>,
        cut: Vec<usize>,
        lhs: f64,
        bound: u64,
    },
}

/// Largest vertex count accepted by the exhaustive checks.
pub const MAX_EXHAUSTIVE_N: usize = 22;

pub(crate) fn within(lhs: f64, rhs: f64) -> bool {
    lhs <= rhs * (1.0 + FEAS_TOL) + FEAS_TOL * 1e-3
}

/// Exhaustive LP1 check (vertex, edge-capacity when capacitated, and all odd-set constraints).
///
/// For capacitated instances the odd-set constraints checked are those of LP1 itself; the full
/// capacitated polytope is checked by [`crate::fptas_cap::check_cap_feasibility`].
pub fn check_lp1_feasibility(y: &FractionalAssignment, inst: &Instance) -> Result<Option<Violation>> {
    let n = inst.n();
    if n > MAX_EXHAUSTIVE_N {
        return Err(Error::TooLarge(format!("n = {n} > {MAX_EXHAUSTIVE_N}")));
    }
    if y.len() != inst.m() {
        return Err(Error::Assignment("length differs from edge count".into()));
    }
    for (e, &v) in y.values().iter().enumerate() {
        if v < 0.0 || !v.is_finite() {
            return Ok(Some(Violation::Negative { edge: e }));
        }
    }
    let loads = y.loads(inst);
    for v in 0..n {
        if !within(loads[v], inst.b()[v] as f64) {
            return Ok(Some(Violation::Vertex { vertex: v, load: loads[v], bound: inst.b()[v] }));
        }
    }
    if inst.capacitated() {
        for (e, edge) in inst.edges().iter().enumerate() {
            if !within(y.get(e), edge.c as f64) {
                return Ok(Some(Violation::EdgeCap { edge: e, y: y.get(e), cap: edge.c }));
            }
        }
    }
    // inside[U] built from inside[U without its top vertex]
    let mut wmat = vec![0.0; n * n];
    for (e, edge) in inst.edges().iter().enumerate() {
        wmat[edge.i * n + edge.j] += y.get(e);
        wmat[edge.j * n + edge.i] += y.get(e);
    }
    let total = 1usize << n;
    let mut inside = vec![0.0f64; total];
    let mut bn = vec![0u64; total];
    for mask in 1..total {
        let top = usize::BITS as usize - 1 - mask.leading_zeros() as usize;
        let rest = mask & !(1 << top);
        let mut s = inside[rest];
        let mut r = rest;
        while r != 0 {
            let u = r.trailing_zeros() as usize;
            s += wmat[top * n + u];
            r &= r - 1;
        }
        inside[mask] = s;
        bn[mask] = bn[rest] + inst.b()[top];
        if bn[mask] % 2 == 1 && !within(s, (bn[mask] / 2) as f64) {
            let members = (0..n).filter(|v| mask >> v & 1 == 1).collect();
            return Ok(Some(Violation::OddSet { members, inside: s, bound: bn[mask] / 2 }));
        }
    }
    Ok(None)
}

/// Exact `Σ_{i,j∈U} y_ij` as a rational.
pub fn inside_exact(members: &[usize], y: &FractionalAssignment, inst: &Instance) -> BigRational {
    let mut s = BigRational::zero();
    for (a, &u) in members.iter().enumerate() {
        for &v in &members[a + 1..] {
            if let Some(e) = inst.edge_between(u, v) {
                s += rational(y.get(e));
            }
        }
    }
    s
}

/// `λ_U` computed exactly, then rounded to `f64`.
pub fn lambda_set_exact(
    members: &[usize],
    bnorm: u64,
    y: &FractionalAssignment,
    inst: &Instance,
    delta: f64,
) -> BigRational {
    let d = rational(delta);
    let bu = perturbed_oddset_bound_exact(bnorm, &d).expect("odd bnorm");
    inside_exact(members, y, inst) / bu
}

pub fn to_f64(r: &BigRational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

pub fn big(n: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn triangle() -> Instance {
        let e = |i, j| Edge { i, j, w: 1.0, c: 1 };
        Instance::new(vec![1, 1, 1], vec![e(0, 1), e(1, 2), e(0, 2)], false).unwrap()
    }

    #[test]
    fn vertex_bound_examples() {
        assert_eq!(perturbed_vertex_bound(16, 1.0 / 16.0).unwrap(), 12.0);
        assert_eq!(perturbed_vertex_bound(0, 0.05).unwrap(), 0.0);
        assert!((perturbed_vertex_bound(5, 0.1).unwrap() - 3.0).abs() < 1e-12);
        assert!(perturbed_vertex_bound(5, 0.3).is_err());
        let d = BigRational::new(1.into(), 10.into());
        assert_eq!(perturbed_vertex_bound_exact(5, &d), big(3));
    }

    #[test]
    fn oddset_bound_examples() {
        let d = BigRational::new(1.into(), 16.into());
        assert_eq!(perturbed_oddset_bound_exact(3, &d).unwrap(), BigRational::new(1015.into(), 1024.into()));
        assert_eq!(perturbed_oddset_bound_exact(15, &d).unwrap(), big(7) - BigRational::new(225.into(), 1024.into()));
        let d = BigRational::new(1.into(), 10.into());
        assert_eq!(perturbed_oddset_bound_exact(5, &d).unwrap(), BigRational::new(31.into(), 16.into()));
        assert!(perturbed_oddset_bound(4, 0.0625).is_err());
    }

    #[test]
    fn triangle_ratio() {
        let t = triangle();
        let y = FractionalAssignment::from_vec(vec![0.5; 3]);
        let u = OddSet::new(vec![0, 1, 2], &t).unwrap();
        let r = violation_report(&y, &t, &[u], 1.0 / 16.0).unwrap();
        assert!((r.lambda - 1.5 * 1024.0 / 1015.0).abs() < 1e-12);
        let v = check_lp1_feasibility(&y, &t).unwrap();
        assert!(matches!(v, Some(Violation::OddSet { ref members, .. }) if members == &vec![0, 1, 2]));
        let y1 = FractionalAssignment::from_vec(vec![1.0, 0.0, 0.0]);
        assert_eq!(check_lp1_feasibility(&y1, &t).unwrap(), None);
        assert_eq!(check_lp1_feasibility(&FractionalAssignment::zeros(3), &t).unwrap(), None);
        assert_eq!(objective(&y, &t), 1.5);
    }

    #[test]
    fn zero_and_single_edge_ratios() {
        let t = triangle();
        let r = violation_report(&FractionalAssignment::zeros(3), &t, &[], 0.0625).unwrap();
        assert_eq!(r.lambda, 0.0);
        let single = Instance::new(vec![1, 1], vec![Edge { i: 0, j: 1, w: 3.0, c: 0 }], false).unwrap();
        let y = FractionalAssignment::from_vec(vec![1.0]);
        let r = violation_report(&y, &single, &[], 0.0625).unwrap();
        // 1 - 4δ = 3/4 at δ = 1/16
        assert!((r.lambda_vertex[0] - 4.0 / 3.0).abs() < 1e-15);
        assert_eq!(objective(&FractionalAssignment::from_vec(vec![2.0]), &single), 6.0);
    }

    #[test]
    fn parse_round_trip_and_errors() {
        let text = "# triangle\np bm 3 3\nv 1 1\nv 2 1\nv 3 1\ne 1 2 1\ne 2 3 1.5 # comment\ne 1 3 2\n";
        let inst = Instance::parse(text).unwrap();
        assert_eq!(inst.m(), 3);
        assert_eq!(inst.edge(1).w, 1.5);
        let again = Instance::parse(&inst.to_text()).unwrap();
        assert_eq!(again.edges(), inst.edges());
        assert!(Instance::parse("p bm 2 1\nv 1 1\nv 2 1\ne 1 1 1\n").is_err());
        assert!(Instance::parse("p bm 2 2\nv 1 1\nv 2 1\ne 1 2 1\ne 2 1 1\n").is_err());
        assert!(Instance::parse("p bm 2 1 cap\nv 1 1\nv 2 3\ne 1 2 1 2\n").is_err());
        assert!(Instance::parse("p bm 2 1\nv 1 1\ne 1 2 1\n").is_err());
        assert!(Instance::parse("p bm 2 1\nv 1 1\nv 2 1\ne 1 2 -1\n").is_err());
        let cap = Instance::parse("p bm 2 1 cap\nv 1 2\nv 2 3\ne 1 2 5 2\n").unwrap();
        assert!(cap.capacitated());
        assert_eq!(cap.edge(0).c, 2);
    }

    #[test]
    fn perturbation_identities_exact() {
        let d = BigRational::new(1.into(), 16.into());
        let f = |l: i64| &d * &d * big(l * l) / big(4);
        for l1 in 3..=32i64 {
            for l2 in 3..=32i64 {
                let rhs = f(l1 + l2 - 1) - big(2 * l1 * l2 - 2 * l1 - 2 * l2 + 1) * &d * &d / big(4);
                assert_eq!(f(l1) + f(l2), rhs);
            }
        }
        // F1 holds for every b-norm the oracle tracks and fails first at 2/δ - 1
        for l in (3..=32u64).step_by(2) {
            let bu = perturbed_oddset_bound_exact(l, &d).unwrap();
            assert_eq!(bu >= (BigRational::one() - &d) * big((l / 2) as i64), l < 31, "bnorm {l}");
        }
    }

    #[test]
    fn integer_weights_scaling() {
        let inst = Instance::new(
            vec![1, 1, 1],
            vec![Edge { i: 0, j: 1, w: 1.25, c: 0 }, Edge { i: 1, j: 2, w: 3.0, c: 0 }],
            false,
        )
        .unwrap();
        assert_eq!(inst.integer_weights().unwrap(), (vec![125, 300], 100));
    }
}
