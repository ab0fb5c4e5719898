//! One-pass primal-dual greedy for the bipartite relaxation, and its iterated variant.
//!
//! Edges arrive one at a time. An edge whose weight beats the dual prices of its endpoints is
//! inserted with multiplicity `x = min(c, b_i, b_j)`, after evicting the cheapest incident mass
//! at both endpoints. Free capacity at a vertex is evicted first: it models an imaginary
//! zero-weight edge to a vertex of unbounded capacity. The result is within a factor 7 of the
//! fractional bipartite optimum (6 without edge capacities).

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::graph_core::{FractionalAssignment, Instance};

/// Greedy output: the integral assignment and the final vertex duals `p`.
#[derive(Clone, Debug)]
pub struct GreedyOutcome {
    pub y: FractionalAssignment,
    pub p: Vec<f64>,
}

impl GreedyOutcome {
    /// `Σ w'_e y_e` over edges with positive modified weight.
    pub fn value(&self, w: &[f64]) -> f64 {
        self.y.values().iter().zip(w).map(|(y, w)| y * w).sum()
    }
}

/// Arrival order: input order, or a ChaCha8 permutation of it when a seed is given.
pub fn arrival_order(m: usize, seed: Option<u64>) -> Vec<usize> {
    let mut order: Vec<usize> = (0..m).collect();
    if let Some(s) = seed {
        order.shuffle(&mut ChaCha8Rng::seed_from_u64(s));
    }
    order
}

/// The streaming pass over `order` with vertex capacities `b`, edge capacities `c` and
/// modified weights `w`. Non-positive weights are skipped.
pub fn greedy_pass(inst: &Instance, b: &[f64], c: &[f64], w: &[f64], order: &[usize]) -> GreedyOutcome {
    let n = inst.n();
    let mut y = vec![0.0; inst.m()];
    let mut p = vec![0.0; n];
    let mut load = vec![0.0; n];
    let mut held: Vec<Vec<usize>> = vec![Vec::new(); n];
    for &e in order {
        let edge = inst.edge(e);
        let (i, j) = (edge.i, edge.j);
        let x = c[e].min(b[i]).min(b[j]);
        if x <= 0.0 || w[e] <= 0.0 || p[i] / b[i] + p[j] / b[j] >= w[e] {
            continue;
        }
        for v in [i, j] {
            evict(x - (b[v] - load[v]), &mut held[v], &mut y, &mut load, inst, w);
        }
        y[e] = x;
        load[i] += x;
        load[j] += x;
        held[i].push(e);
        held[j].push(e);
        for v in [i, j] {
            let charge: f64 = held[v].iter().map(|&f| 2.0 * w[f] * y[f]).sum();
            p[v] = p[v].max(charge);
        }
    }
    GreedyOutcome { y: FractionalAssignment::from_vec(y), p }
}

/// Removes `need` units from the cheapest edges held at `v` (by weight, then edge id).
fn evict(mut need: f64, held: &mut Vec<usize>, y: &mut [f64], load: &mut [f64], inst: &Instance, w: &[f64]) {
    if need <= 0.0 {
        return;
    }
    held.sort_by(|&a, &b| w[a].total_cmp(&w[b]).then(a.cmp(&b)));
    for &f in held.iter() {
        if need <= 0.0 {
            break;
        }
        let take = y[f].min(need);
        y[f] -= take;
        need -= take;
        let edge = inst.edge(f);
        load[edge.i] -= take;
        load[edge.j] -= take;
    }
    // the other endpoint keeps the edge in its list until it is swept here
    held.retain(|&f| y[f] > 0.0);
}

/// Greedy with the instance's vertex and edge capacities.
pub fn greedy_capacitated(inst: &Instance, w: &[f64], order: &[usize]) -> GreedyOutcome {
    let b: Vec<f64> = inst.b().iter().map(|&x| x as f64).collect();
    let c: Vec<f64> = inst.edges().iter().map(|e| e.c as f64).collect();
    greedy_pass(inst, &b, &c, w, order)
}

/// Greedy without edge capacities (`c_ij = min(b_i, b_j)`).
pub fn greedy_uncapacitated(inst: &Instance, w: &[f64], order: &[usize]) -> GreedyOutcome {
    let b: Vec<f64> = inst.b().iter().map(|&x| x as f64).collect();
    let c: Vec<f64> = inst.edges().iter().map(|e| b[e.i].min(b[e.j])).collect();
    greedy_pass(inst, &b, &c, w, order)
}

/// Number of greedy rounds used by [`iterated_greedy`].
pub fn iterated_rounds(delta: f64) -> usize {
    (7.0 * (2.0 / delta).ln()).ceil() as usize
}

/// Union of greedy rounds on residual edge capacities.
#[derive(Clone, Debug)]
pub struct IteratedGreedy {
    pub y: FractionalAssignment,
    /// Cumulative value `Σ w'_e y_e` after each round.
    pub values: Vec<f64>,
}

/// Runs `rounds` greedy passes; each pass sees the full vertex capacities and the edge
/// capacity left over by earlier passes. Loads grow to at most `rounds · b_i`.
pub fn iterated_greedy_rounds(inst: &Instance, c: &[f64], w: &[f64], order: &[usize], rounds: usize) -> IteratedGreedy {
    let b: Vec<f64> = inst.b().iter().map(|&x| x as f64).collect();
    let mut total = vec![0.0; inst.m()];
    let mut residual = c.to_vec();
    let mut values = Vec::with_capacity(rounds);
    let mut acc = 0.0;
    for _ in 0..rounds {
        let out = greedy_pass(inst, &b, &residual, w, order);
        for (e, &v) in out.y.values().iter().enumerate() {
            total[e] += v;
            residual[e] = (residual[e] - v).max(0.0);
        }
        acc += out.value(w);
        values.push(acc);
        if out.y.support().next().is_none() {
            break;
        }
    }
    IteratedGreedy { y: FractionalAssignment::from_vec(total), values }
}

/// [`iterated_greedy_rounds`] with `⌈7 ln(2/δ)⌉` rounds and the instance's edge capacities.
pub fn iterated_greedy(inst: &Instance, w: &[f64], delta: f64, order: &[usize]) -> IteratedGreedy {
    let c: Vec<f64> = inst.edges().iter().map(|e| e.c as f64).collect();
    iterated_greedy_rounds(inst, &c, w, order, iterated_rounds(delta))
}

/// Dual certificate `(p, q)` for a greedy outcome: `q_e = w'_e y_e` on kept edges when edge
/// capacities are present, zero otherwise.
pub fn dual_certificate(out: &GreedyOutcome, w: &[f64], capacitated: bool) -> (Vec<f64>, Vec<f64>) {
    let q = out.y.values().iter().zip(w).map(|(&y, &w)| if capacitated && y > 0.0 { w * y } else { 0.0 }).collect();
    (out.p.clone(), q)
}

/// Checks `p_i/b_i + p_j/b_j + q_e/c_e ≥ w'_e` for every positive-weight edge with `x > 0`.
pub fn dual_feasible(inst: &Instance, b: &[f64], c: &[f64], w: &[f64], p: &[f64], q: &[f64]) -> bool {
    inst.edges().iter().enumerate().all(|(e, edge)| {
        let x = c[e].min(b[edge.i]).min(b[edge.j]);
        if x <= 0.0 || w[e] <= 0.0 {
            return true;
        }
        let qc = if q[e] > 0.0 { q[e] / c[e] } else { 0.0 };
        p[edge.i] / b[edge.i] + p[edge.j] / b[edge.j] + qc >= w[e] * (1.0 - 1e-12)
    })
}
