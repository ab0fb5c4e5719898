//! Brute-force ground truth used by the tests and by `bmatch oracle`.
//!
//! Nothing in here shares code with the solvers beyond the instance type and the exact
//! perturbation formulas.

use std::collections::HashMap;

use num::{BigRational, Zero};

use crate::error::{Error, Result};
use crate::graph_core::{
    perturbed_oddset_bound_exact, perturbed_vertex_bound_exact, rational, FractionalAssignment, Instance, OddSet,
};

/// Default guard on `Π_e (1 + min(b_i, b_j, c_e))`.
pub const SEARCH_SPACE_LIMIT: f64 = 1e7;

#[derive(Clone, Debug)]
pub struct OracleResult {
    /// Exact optimum `Σ w_e y_e`.
    pub optimum: BigRational,
    pub assignment: FractionalAssignment,
    /// Search nodes visited.
    pub nodes: u64,
}

impl OracleResult {
    pub fn optimum_f64(&self) -> f64 {
        crate::graph_core::to_f64(&self.optimum)
    }
}

fn edge_cap(inst: &Instance, e: usize) -> u64 {
    let edge = inst.edge(e);
    let c = inst.b()[edge.i].min(inst.b()[edge.j]);
    if inst.capacitated() {
        c.min(edge.c)
    } else {
        c
    }
}

/// Size of the raw multiplicity space.
pub fn search_space(inst: &Instance) -> f64 {
    (0..inst.m()).map(|e| 1.0 + edge_cap(inst, e) as f64).product()
}

/// Optimal integral (capacitated) b-matching by depth-first enumeration.
pub fn brute_force_bmatching(inst: &Instance) -> Result<OracleResult> {
    brute_force_bmatching_with_limit(inst, SEARCH_SPACE_LIMIT)
}

pub fn brute_force_bmatching_with_limit(inst: &Instance, limit: f64) -> Result<OracleResult> {
    let space = search_space(inst);
    if space > limit {
        return Err(Error::TooLarge(format!("search space {space:.3e} exceeds {limit:.0e}")));
    }
    let (w, scale) = inst.integer_weights()?;
    let m = inst.m();
    let n = inst.n();
    // suffix_max[k][v]: heaviest edge with id ≥ k at v
    let mut suffix_max = vec![vec![0i64; n]; m + 1];
    for k in (0..m).rev() {
        suffix_max[k] = suffix_max[k + 1].clone();
        let e = inst.edge(k);
        suffix_max[k][e.i] = suffix_max[k][e.i].max(w[k]);
        suffix_max[k][e.j] = suffix_max[k][e.j].max(w[k]);
    }
    let mut s = Dfs {
        inst,
        w: &w,
        suffix_max,
        residual: inst.b().to_vec(),
        cur: vec![0; m],
        best: vec![0; m],
        best_val: -1,
        nodes: 0,
    };
    s.go(0, 0);
    let optimum = BigRational::new(s.best_val.into(), scale.into());
    let assignment = FractionalAssignment::from_vec(s.best.iter().map(|&v| v as f64).collect());
    Ok(OracleResult { optimum, assignment, nodes: s.nodes })
}

struct Dfs<'a> {
    inst: &'a Instance,
    w: &'a [i64],
    suffix_max: Vec<Vec<i64>>,
    residual: Vec<u64>,
    cur: Vec<u64>,
    best: Vec<u64>,
    best_val: i64,
    nodes: u64,
}

impl Dfs<'_> {
    fn bound(&self, k: usize) -> i64 {
        // Every remaining unit on e = (i, j) is worth at most (M_i + M_j) / 2.
        let vb: i64 = self.residual.iter().zip(&self.suffix_max[k]).map(|(&r, &mx)| r as i64 * mx).sum();
        vb / 2
    }

    fn go(&mut self, k: usize, val: i64) {
        self.nodes += 1;
        if k == self.w.len() {
            if val > self.best_val {
                self.best_val = val;
                self.best.clone_from(&self.cur);
            }
            return;
        }
        if val + self.bound(k) <= self.best_val {
            return;
        }
        let e = self.inst.edge(k);
        let mut hi = self.residual[e.i].min(self.residual[e.j]);
        if self.inst.capacitated() {
            hi = hi.min(e.c);
        }
        if self.w[k] == 0 {
            hi = 0;
        }
        for x in (0..=hi).rev() {
            self.residual[e.i] -= x;
            self.residual[e.j] -= x;
            self.cur[k] = x;
            self.go(k + 1, val + x as i64 * self.w[k]);
            self.residual[e.i] += x;
            self.residual[e.j] += x;
        }
        self.cur[k] = 0;
    }
}

/// Second, independently coded optimum: memoized recursion over (edge index, residual capacities).
pub fn memo_bmatching_value(inst: &Instance) -> Result<BigRational> {
    let (w, scale) = inst.integer_weights()?;
    let mut memo: HashMap<(usize, Vec<u64>), i64> = HashMap::new();
    fn rec(
        inst: &Instance,
        w: &[i64],
        k: usize,
        res: &mut Vec<u64>,
        memo: &mut HashMap<(usize, Vec<u64>), i64>,
    ) -> i64 {
        if k == w.len() {
            return 0;
        }
        if let Some(&v) = memo.get(&(k, res.clone())) {
            return v;
        }
        let e = inst.edge(k);
        let cap = if inst.capacitated() { e.c } else { u64::MAX };
        let top = res[e.i].min(res[e.j]).min(cap);
        let mut best = i64::MIN;
        for x in 0..=top {
            res[e.i] -= x;
            res[e.j] -= x;
            let v = x as i64 * w[k] + rec(inst, w, k + 1, res, memo);
            res[e.i] += x;
            res[e.j] += x;
            best = best.max(v);
        }
        memo.insert((k, res.clone()), best);
        best
    }
    let mut res = inst.b().to_vec();
    let v = rec(inst, &w, 0, &mut res, &mut memo);
    Ok(BigRational::new(v.into(), scale.into()))
}

/// Exact maximum-weight matching on a unit-capacity graph with `n ≤ 24` vertices by bitmask DP.
pub fn brute_force_matching(n: usize, edges: &[(usize, usize, i64)]) -> Result<i64> {
    if n > 24 {
        return Err(Error::TooLarge(format!("matching oracle needs n ≤ 24, got {n}")));
    }
    let mut wm = vec![vec![None::<i64>; n]; n];
    for &(u, v, w) in edges {
        if u != v {
            let cur = wm[u][v].unwrap_or(i64::MIN);
            wm[u][v] = Some(cur.max(w));
            wm[v][u] = wm[u][v];
        }
    }
    let full = 1usize << n;
    let mut best = vec![0i64; full];
    // best[mask] = optimum using only vertices in mask
    for mask in 1..full {
        let v = mask.trailing_zeros() as usize;
        let rest = mask & (mask - 1);
        let mut b = best[rest];
        let mut r = rest;
        while r != 0 {
            let u = r.trailing_zeros() as usize;
            if let Some(w) = wm[v][u] {
                if w > 0 {
                    b = b.max(w + best[rest & !(1 << u)]);
                }
            }
            r &= r - 1;
        }
        best[mask] = b;
    }
    Ok(best[full - 1])
}

/// Every odd set of positive-b vertices with `3 ≤ bnorm ≤ max_bnorm`.
pub fn enumerate_small_oddsets(inst: &Instance, max_bnorm: u64) -> Result<Vec<OddSet>> {
    let pos: Vec<usize> = (0..inst.n()).filter(|&v| inst.b()[v] > 0).collect();
    if pos.len() > crate::graph_core::MAX_EXHAUSTIVE_N {
        return Err(Error::TooLarge(format!("{} positive-capacity vertices", pos.len())));
    }
    let mut out = Vec::new();
    for mask in 1usize..(1 << pos.len()) {
        let members: Vec<usize> = (0..pos.len()).filter(|k| mask >> k & 1 == 1).map(|k| pos[k]).collect();
        let bn: u64 = members.iter().map(|&v| inst.b()[v]).sum();
        if bn % 2 == 1 && bn >= 3 && bn <= max_bnorm {
            out.push(OddSet::new(members, inst)?);
        }
    }
    Ok(out)
}

/// Largest b-norm tracked for a given δ (`⌊1/δ⌋`).
pub fn max_bnorm(delta: f64) -> u64 {
    (1.0 / delta + 1e-9).floor() as u64
}

#[derive(Clone, Debug)]
pub struct BruteFamily {
    /// Exact λ over vertex constraints and all small odd sets.
    pub lambda: BigRational,
    /// Sets with `λ_U ≥ λ - δ³/10`, sorted by members.
    pub family: Vec<(OddSet, BigRational)>,
}

/// All small odd sets with `λ_U ≥ λ − δ³/10` and positive inside mass, by subset enumeration in
/// exact arithmetic.
pub fn brute_force_violated_oddsets(y: &FractionalAssignment, inst: &Instance, delta: f64) -> Result<BruteFamily> {
    let d = rational(delta);
    let sets = enumerate_small_oddsets(inst, max_bnorm(delta))?;
    let n = inst.n();
    let mut ymat = vec![BigRational::zero(); n * n];
    for e in 0..inst.m() {
        let edge = inst.edge(e);
        let v = rational(y.get(e));
        ymat[edge.i * n + edge.j] += &v;
        ymat[edge.j * n + edge.i] += v;
    }
    let mut lambda = BigRational::zero();
    for v in 0..n {
        let load: BigRational = (0..n).map(|u| ymat[v * n + u].clone()).sum();
        let bt = perturbed_vertex_bound_exact(inst.b()[v], &d);
        if bt.is_zero() {
            if !load.is_zero() {
                return Err(Error::Assignment(format!("positive load on zero-capacity vertex {}", v + 1)));
            }
            continue;
        }
        let r = load / bt;
        if r > lambda {
            lambda = r;
        }
    }
    let mut vals = Vec::with_capacity(sets.len());
    for u in &sets {
        let m = u.members();
        let mut inside = BigRational::zero();
        for (a, &p) in m.iter().enumerate() {
            for &q in &m[a + 1..] {
                inside += &ymat[p * n + q];
            }
        }
        let lu = inside / perturbed_oddset_bound_exact(u.bnorm(), &d)?;
        if lu > lambda {
            lambda = lu.clone();
        }
        vals.push(lu);
    }
    let thr = &lambda - &d * &d * &d / BigRational::from_integer(10.into());
    let mut family: Vec<(OddSet, BigRational)> =
        sets.into_iter().zip(vals).filter(|(_, lu)| *lu >= thr && !lu.is_zero()).collect();
    family.sort_by(|a, b| a.0.cmp(&b.0));
    Ok(BruteFamily { lambda, family })
}
