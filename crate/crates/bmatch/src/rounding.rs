//! Rounding feasible fractional b-matchings to integral ones.
//!
//! Three phases. Edges carrying at least `t = ⌈2/δ⌉` keep `⌊y⌋ − 1` integral copies and leave
//! the fractional part; vertex capacities shrink to what the rest can use. Vertices whose
//! fractional load is at least `3t` are split into copies carrying between `t` and `2t`. The
//! small remaining instance is blown up into a unit-capacity graph whose maximum-weight
//! matching is an optimal integral b-matching of it. In the capacitated case each edge also
//! becomes `c` pairs of gadget vertices that must all be matched.

use crate::blossom::{matching_weight, max_weight_matching_approx};
use crate::error::{Error, Result};
use crate::graph_core::{within, FractionalAssignment, Instance};

/// `t = ⌈2/δ⌉`.
pub fn threshold(delta: f64) -> u64 {
    (2.0 / delta).ceil() as u64
}

fn validate_rounding_delta(delta: f64) -> Result<()> {
    if delta > 0.0 && delta <= 0.25 {
        Ok(())
    } else {
        Err(Error::DeltaOutOfRange(delta))
    }
}

/// Intermediate quantities of one rounding run.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Trace {
    pub t: u64,
    /// Integral copies extracted from heavy edges.
    pub m0: Vec<u64>,
    pub y1: Vec<f64>,
    pub b1: Vec<u64>,
    /// Edge capacities after the first phase (capacitated runs only).
    pub c1: Vec<u64>,
    /// Edges with positive `y1`, in input order.
    pub support: Vec<usize>,
    /// Original vertex of every vertex of the split graph.
    pub owner: Vec<usize>,
    pub b2: Vec<u64>,
    /// Endpoints of every edge in the split graph (meaningful on the support).
    pub ends2: Vec<(usize, usize)>,
    /// `(1−δ)·y1`.
    pub y2: Vec<f64>,
    pub g3_vertices: usize,
    pub g3_edges: usize,
    /// Weight of the unit matching, in integer weight units.
    pub matching_weight: i64,
    /// `Σ c2·w` over the support, in integer weight units (capacitated runs only).
    pub gadget_weight: i64,
    /// Integer weight units per unit of weight.
    pub weight_scale: i64,
    /// Accuracy requested from the matching backend.
    pub epsilon: f64,
}

/// Integral output and its trace.
#[derive(Clone, Debug)]
pub struct Rounded {
    pub y: FractionalAssignment,
    pub trace: Trace,
}

fn phase_one(y: &FractionalAssignment, inst: &Instance, delta: f64, tr: &mut Trace) -> Result<()> {
    if y.len() != inst.m() {
        return Err(Error::Assignment("length differs from edge count".into()));
    }
    let t = threshold(delta);
    tr.t = t;
    tr.m0 = vec![0; inst.m()];
    tr.y1 = vec![0.0; inst.m()];
    for (e, &v) in y.values().iter().enumerate() {
        if v < 0.0 || !v.is_finite() {
            return Err(Error::Assignment(format!("edge {} has y = {v}", e + 1)));
        }
        if inst.capacitated() && !within(v, inst.edge(e).c as f64) {
            return Err(Error::Assignment(format!("edge {} exceeds its capacity", e + 1)));
        }
        if v >= t as f64 {
            tr.m0[e] = v.floor() as u64 - 1;
        } else {
            tr.y1[e] = v;
        }
    }
    let y1 = FractionalAssignment::from_vec(tr.y1.clone());
    let loads = y1.loads(inst);
    tr.b1 = Vec::with_capacity(inst.n());
    for v in 0..inst.n() {
        let taken: u64 = inst.incident(v).iter().map(|&e| tr.m0[e]).sum();
        let Some(left) = inst.b()[v].checked_sub(taken) else {
            return Err(Error::Assignment(format!("vertex {} is overloaded", v + 1)));
        };
        if !within(loads[v], left as f64) {
            return Err(Error::Assignment(format!("vertex {} is overloaded", v + 1)));
        }
        tr.b1.push(left.min(loads[v].ceil() as u64 + 1));
    }
    tr.c1 = inst
        .edges()
        .iter()
        .zip(&tr.y1)
        .map(|(edge, &v)| if inst.capacitated() { edge.c.min(v.ceil() as u64 + 1) } else { 0 })
        .collect();
    tr.support = (0..inst.m()).filter(|&e| tr.y1[e] > 0.0).collect();
    Ok(())
}

fn phase_two(inst: &Instance, delta: f64, tr: &mut Trace) {
    let t = tr.t as f64;
    let n = inst.n();
    tr.owner = (0..n).collect();
    tr.b2 = tr.b1.clone();
    tr.ends2 = inst.edges().iter().map(|e| (e.i, e.j)).collect();
    let on_support: Vec<bool> = (0..inst.m()).map(|e| tr.y1[e] > 0.0).collect();
    for v in 0..n {
        let incident: Vec<usize> = inst.incident(v).iter().copied().filter(|&e| on_support[e]).collect();
        let mut remaining: f64 = incident.iter().map(|&e| tr.y1[e]).sum();
        let mut cursor = 0;
        let mut given = 0u64;
        while remaining >= 3.0 * t {
            // prefix with sum in [t, 2t]; every edge carries less than t
            let copy = tr.owner.len();
            let mut s = 0.0;
            while s < t {
                let e = incident[cursor];
                cursor += 1;
                s += tr.y1[e];
                let (a, b) = tr.ends2[e];
                tr.ends2[e] = if a == v { (copy, b) } else { (a, copy) };
            }
            let bc = (s + 1e-9).floor() as u64;
            tr.owner.push(v);
            tr.b2.push(bc);
            given += bc;
            remaining -= s;
        }
        tr.b2[v] = tr.b1[v].saturating_sub(given);
    }
    tr.y2 = tr.y1.iter().map(|v| (1.0 - delta) * v).collect();
}

fn offsets(b2: &[u64]) -> (Vec<usize>, usize) {
    let mut off = Vec::with_capacity(b2.len());
    let mut total = 0;
    for &b in b2 {
        off.push(total);
        total += b as usize;
    }
    (off, total)
}

fn assemble(tr: &Trace, copies: &[u64]) -> FractionalAssignment {
    FractionalAssignment::from_vec(tr.m0.iter().zip(copies).map(|(&a, &b)| (a + b) as f64).collect())
}

/// Rounds a fractional b-matching feasible for the uncapacitated polytope; the result is
/// integral, feasible and weighs at least `(1 − 2δ)·wᵀy`. Accepts `0 < δ ≤ 1/4`.
pub fn round_uncap(y: &FractionalAssignment, inst: &Instance, delta: f64) -> Result<Rounded> {
    validate_rounding_delta(delta)?;
    let (w, scale) = inst.integer_weights()?;
    let mut tr = Trace { weight_scale: scale, epsilon: delta, ..Default::default() };
    phase_one(y, inst, delta, &mut tr)?;
    phase_two(inst, delta, &mut tr);
    let (off, nv) = offsets(&tr.b2);
    let mut g3 = Vec::new();
    let mut edge_of = Vec::new();
    for &e in &tr.support {
        let (a, b) = tr.ends2[e];
        for k in 0..tr.b2[a] as usize {
            for l in 0..tr.b2[b] as usize {
                g3.push((off[a] + k, off[b] + l, w[e]));
                edge_of.push(e);
            }
        }
    }
    tr.g3_vertices = nv;
    tr.g3_edges = g3.len();
    let mate = max_weight_matching_approx(nv, &g3, tr.epsilon);
    tr.matching_weight = matching_weight(&mate, &g3);
    let mut copies = vec![0u64; inst.m()];
    for (k, &(u, v, _)) in g3.iter().enumerate() {
        if mate[u] == Some(v) {
            copies[edge_of[k]] += 1;
        }
    }
    Ok(Rounded { y: assemble(&tr, &copies), trace: tr })
}

/// Vertex roles in the capacitated gadget graph.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GadgetVertex {
    /// `k`-th copy of a split-graph vertex.
    Copy(usize, usize),
    /// `ℓ`-th gadget vertex of edge `e` next to endpoint `side` (0 = `i`, 1 = `j`).
    Pair { edge: usize, side: usize, ell: usize },
}

/// Unit-capacity graph of the capacitated reduction.
#[derive(Clone, Debug)]
pub struct Gadget {
    pub vertices: Vec<GadgetVertex>,
    pub edges: Vec<(usize, usize, i64)>,
    /// `(a, b)` gadget vertex ids of every pair, per edge.
    pub pairs: Vec<Vec<(usize, usize)>>,
}

/// Builds the gadget for vertex capacities `b` and edges `(a, b, w, c)`: `b_v` copies per
/// vertex, `2c` pair vertices per edge joined pairwise, and complete bipartite links between
/// each side's pair vertices and that endpoint's copies, all with the edge weight.
pub fn cap_gadget(b: &[u64], edges: &[(usize, usize, i64, u64)]) -> Gadget {
    let (off, nv) = offsets(b);
    let mut vertices = Vec::with_capacity(nv);
    for (v, &bv) in b.iter().enumerate() {
        vertices.extend((0..bv as usize).map(|k| GadgetVertex::Copy(v, k)));
    }
    let mut out = Vec::new();
    let mut pairs = Vec::with_capacity(edges.len());
    for (e, &(a, bb, w, c)) in edges.iter().enumerate() {
        let mut ps = Vec::with_capacity(c as usize);
        for ell in 0..c as usize {
            let pa = vertices.len();
            vertices.push(GadgetVertex::Pair { edge: e, side: 0, ell });
            let pb = vertices.len();
            vertices.push(GadgetVertex::Pair { edge: e, side: 1, ell });
            out.push((pa, pb, w));
            for k in 0..b[a] as usize {
                out.push((off[a] + k, pa, w));
            }
            for k in 0..b[bb] as usize {
                out.push((off[bb] + k, pb, w));
            }
            ps.push((pa, pb));
        }
        pairs.push(ps);
    }
    Gadget { vertices, edges: out, pairs }
}

/// Rounds a fractional capacitated b-matching; the result is integral, capacitated-feasible
/// and weighs at least `(1−δ)·wᵀy − δβ*`. `r_bound` only sets the recorded backend accuracy
/// `δ/(28R)`, which the exact backend exceeds.
pub fn round_cap(y: &FractionalAssignment, inst: &Instance, delta: f64, r_bound: f64) -> Result<Rounded> {
    validate_rounding_delta(delta)?;
    if !inst.capacitated() {
        return Err(Error::Instance("capacitated rounding needs edge capacities".into()));
    }
    let (w, scale) = inst.integer_weights()?;
    let mut tr = Trace { weight_scale: scale, epsilon: delta / (28.0 * r_bound.max(1.0)), ..Default::default() };
    phase_one(y, inst, delta, &mut tr)?;
    phase_two(inst, delta, &mut tr);
    let edges: Vec<(usize, usize, i64, u64)> = tr
        .support
        .iter()
        .map(|&e| {
            let (a, b) = tr.ends2[e];
            (a, b, w[e], tr.c1[e])
        })
        .collect();
    tr.gadget_weight = edges.iter().map(|&(_, _, w, c)| w * c as i64).sum();
    let g = cap_gadget(&tr.b2, &edges);
    tr.g3_vertices = g.vertices.len();
    tr.g3_edges = g.edges.len();
    let mate = max_weight_matching_approx(g.vertices.len(), &g.edges, tr.epsilon);
    tr.matching_weight = matching_weight(&mate, &g.edges);
    // after the repair every pair is matched either to itself or on both outer sides;
    // only the latter are copies of the edge
    let mut copies = vec![0u64; inst.m()];
    for (k, &e) in tr.support.iter().enumerate() {
        for &(pa, pb) in &g.pairs[k] {
            let outer = |p: usize, q: usize| mate[p].is_some_and(|x| x != q);
            if outer(pa, pb) && outer(pb, pa) {
                copies[e] += 1;
            }
        }
    }
    Ok(Rounded { y: assemble(&tr, &copies), trace: tr })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fptas_cap::{check_cap_feasibility, LongInstance};
    use crate::graph_core::{check_lp1_feasibility, Edge};

    fn inst(b: Vec<u64>, e: &[(usize, usize, f64, u64)], cap: bool) -> Instance {
        Instance::new(b, e.iter().map(|&(i, j, w, c)| Edge { i, j, w, c }).collect(), cap).unwrap()
    }

    fn fa(v: &[f64]) -> FractionalAssignment {
        FractionalAssignment::from_vec(v.to_vec())
    }

    #[test]
    fn threshold_values() {
        assert_eq!(threshold(0.25), 8);
        assert_eq!(threshold(1.0 / 16.0), 32);
    }

    #[test]
    fn integral_input_keeps_its_weight() {
        let g = inst(vec![2, 2, 2], &[(0, 1, 1.0, 0), (1, 2, 2.0, 0), (0, 2, 3.0, 0)], false);
        let y = fa(&[1.0, 1.0, 1.0]);
        let r = round_uncap(&y, &g, 1.0 / 16.0).unwrap();
        assert!(r.y.is_integral());
        assert!(r.y.dot(&g.weights()) >= y.dot(&g.weights()));
        assert_eq!(check_lp1_feasibility(&r.y, &g).unwrap(), None);
    }

    #[test]
    fn single_edge_hand_trace() {
        let g = inst(vec![8, 8], &[(0, 1, 1.0, 0)], false);
        let r = round_uncap(&fa(&[7.4]), &g, 0.25).unwrap();
        assert_eq!(r.trace.m0, vec![0]);
        assert_eq!(r.trace.b1, vec![8, 8]);
        assert_eq!(r.trace.owner.len(), 2);
        assert!(r.y.get(0) >= 0.5 * 7.4 && r.y.get(0) <= 8.0);
        assert!(r.y.is_integral());
    }

    #[test]
    fn triangle_thirds() {
        let g = inst(vec![1, 1, 1], &[(0, 1, 1.0, 0), (1, 2, 1.0, 0), (0, 2, 1.0, 0)], false);
        let r = round_uncap(&fa(&[1.0 / 3.0; 3]), &g, 1.0 / 16.0).unwrap();
        assert_eq!(r.y.values().iter().sum::<f64>(), 1.0);
        assert_eq!(check_lp1_feasibility(&r.y, &g).unwrap(), None);
    }

    #[test]
    fn heavy_edge_goes_to_m0() {
        let g = inst(vec![10, 10], &[(0, 1, 1.0, 0)], false);
        let r = round_uncap(&fa(&[9.5]), &g, 0.25).unwrap();
        assert_eq!(r.trace.m0, vec![8]);
        assert_eq!(r.trace.b1, vec![1, 1]);
        assert_eq!(r.y.get(0), 8.0);
    }

    #[test]
    fn heavy_vertex_is_split() {
        // center load 27 ≥ 3t = 24 at δ = 1/4
        let mut b = vec![30];
        b.extend(vec![3; 10]);
        let e: Vec<(usize, usize, f64, u64)> = (1..=10).map(|v| (0, v, v as f64, 0)).collect();
        let g = inst(b, &e, false);
        let y = fa(&[2.7; 10]);
        let r = round_uncap(&y, &g, 0.25).unwrap();
        assert!(r.trace.owner.len() > g.n());
        assert!(r.trace.b2.iter().all(|&b| b <= 3 * r.trace.t));
        assert_eq!(check_lp1_feasibility(&r.y, &g).unwrap(), None);
        assert!(r.y.dot(&g.weights()) >= 0.5 * y.dot(&g.weights()));
    }

    #[test]
    fn overloaded_input_is_rejected() {
        let g = inst(vec![1, 1], &[(0, 1, 1.0, 0)], false);
        assert!(round_uncap(&fa(&[2.0]), &g, 1.0 / 16.0).is_err());
    }

    #[test]
    fn path_gadget_sizes() {
        // path p–q–r, b = (3, 4, 3), c = (3, 2), w = (1, 2)
        let g = cap_gadget(&[3, 4, 3], &[(0, 1, 1, 3), (1, 2, 2, 2)]);
        assert_eq!(g.vertices.len(), 20);
        assert_eq!(g.pairs[0].len(), 3);
        assert_eq!(g.pairs[1].len(), 2);
        // pair edges plus 3·3 + 3·4 links for the first edge and 2·4 + 2·3 for the second
        assert_eq!(g.edges.len(), 3 + 9 + 12 + 2 + 8 + 6);
        let path = inst(vec![3, 4, 3], &[(0, 1, 1.0, 3), (1, 2, 2.0, 2)], true);
        let li = LongInstance::new(&path).unwrap();
        let b = li.long().b();
        let chain = [b[0], b[3], b[4], b[1], b[5], b[6], b[2]];
        assert_eq!(chain, [3, 3, 3, 4, 2, 2, 3]);
    }

    #[test]
    fn cap_rounding_on_path() {
        let g = inst(vec![3, 4, 3], &[(0, 1, 1.0, 3), (1, 2, 2.0, 2)], true);
        let y = fa(&[2.0, 2.0]);
        let r = round_cap(&y, &g, 1.0 / 16.0, 1.0).unwrap();
        assert_eq!(check_cap_feasibility(&r.y, &g).unwrap(), None);
        assert_eq!(r.y.dot(&g.weights()), 6.0);
        // matching weight = b-matching weight + gadget weight
        assert_eq!(r.trace.matching_weight, 6 + r.trace.gadget_weight);
    }

    #[test]
    fn cap_rounding_respects_capacity() {
        let g = inst(vec![3, 3], &[(0, 1, 1.0, 1)], true);
        let r = round_cap(&fa(&[1.0]), &g, 1.0 / 16.0, 1.0).unwrap();
        assert_eq!(r.y.get(0), 1.0);
        assert!(round_cap(&fa(&[2.0]), &g, 1.0 / 16.0, 1.0).is_err());
    }
}
