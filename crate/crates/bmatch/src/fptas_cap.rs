//! Fractional capacitated b-matching through the long (edge-subdivided) graph.
//!
//! Every edge `e = (i, j)` becomes a path `i – p_{e,i} – p_{e,j} – j` whose inner vertices have
//! `b = c_ij` and must be saturated exactly. A short assignment `y` lifts to the long one with
//! `y` on both outer edges and `c − y` on the middle edge, so edge capacities turn into vertex
//! constraints and the uncapacitated machinery applies. The all-zero vector does not lift to
//! the long polytope, so the start point comes from the iterated greedy instead of zero.

use crate::error::{Error, Result};
use crate::graph_core::{within, Edge, FractionalAssignment, Instance, Violation, MAX_EXHAUSTIVE_N};
use crate::greedy::{arrival_order, iterated_greedy_rounds, iterated_rounds};
use crate::lagrangian::{solve_budgeted, Budgeted};
use crate::mwu::{self, Duals, IterationView, SolveStats, SolverConfig, StepAnswer, StepOracle};

/// Relative slack allowed on the saturation equalities after floating-point mixing.
const SAT_TOL: f64 = 1e-9;

/// `λ₀ = 14 ln(2/δ)`.
pub fn lambda0(delta: f64) -> f64 {
    14.0 * (2.0 / delta).ln()
}

/// The short instance and its long representation.
#[derive(Clone, Debug)]
pub struct LongInstance {
    short: Instance,
    long: Instance,
}

impl LongInstance {
    /// Builds the long graph: vertices `0..n` are the originals, `n + 2e` and `n + 2e + 1` the
    /// subdivision vertices of edge `e`; long edges `3e, 3e+1, 3e+2` carry `w/2, 0, w/2`.
    pub fn new(inst: &Instance) -> Result<Self> {
        let n = inst.n();
        let mut b = inst.b().to_vec();
        let mut edges = Vec::with_capacity(3 * inst.m());
        for (e, edge) in inst.edges().iter().enumerate() {
            let (pi, pj) = (n + 2 * e, n + 2 * e + 1);
            b.push(edge.c);
            b.push(edge.c);
            edges.push(Edge { i: edge.i, j: pi, w: edge.w / 2.0, c: 0 });
            edges.push(Edge { i: pi, j: pj, w: 0.0, c: 0 });
            edges.push(Edge { i: pj, j: edge.j, w: edge.w / 2.0, c: 0 });
        }
        let long = Instance::new(b, edges, false)?;
        Ok(LongInstance { short: inst.clone(), long })
    }

    pub fn short(&self) -> &Instance {
        &self.short
    }

    pub fn long(&self) -> &Instance {
        &self.long
    }

    /// Subdivision vertex of edge `e` next to endpoint `i` (`end = 0`) or `j` (`end = 1`).
    pub fn p_vertex(&self, e: usize, end: usize) -> usize {
        self.short.n() + 2 * e + end
    }

    /// `y` on the outer edges, `c − y` in the middle. Rejects `y_ij > c_ij`.
    pub fn ylong(&self, y: &FractionalAssignment) -> Result<FractionalAssignment> {
        if y.len() != self.short.m() {
            return Err(Error::Assignment("length differs from edge count".into()));
        }
        let mut out = Vec::with_capacity(3 * y.len());
        for (e, edge) in self.short.edges().iter().enumerate() {
            let v = y.get(e);
            let c = edge.c as f64;
            if !(v >= 0.0) || v > c * (1.0 + SAT_TOL) {
                return Err(Error::Assignment(format!("edge {} has y = {v} outside [0, c = {c}]", e + 1)));
            }
            let v = v.min(c);
            out.extend([v, c - v, v]);
        }
        Ok(FractionalAssignment::from_vec(out))
    }

    /// Reads the outer edge next to `i` of every subdivided edge.
    pub fn yshort(&self, yl: &FractionalAssignment) -> FractionalAssignment {
        FractionalAssignment::from_vec((0..self.short.m()).map(|e| yl.get(3 * e)).collect())
    }

    /// Checks `y_{i,p} + y_{p,p'} = c = y_{p,p'} + y_{p',j}` and non-negativity.
    pub fn check_saturation(&self, yl: &FractionalAssignment) -> Result<()> {
        for (e, edge) in self.short.edges().iter().enumerate() {
            let (a, mid, b) = (yl.get(3 * e), yl.get(3 * e + 1), yl.get(3 * e + 2));
            let c = edge.c as f64;
            let tol = SAT_TOL * c.max(1.0);
            if a < -tol || mid < -tol || b < -tol || (a + mid - c).abs() > tol || (mid + b - c).abs() > tol {
                return Err(Error::Invariant(format!(
                    "saturation broken on edge {}: ({a}, {mid}, {b}) with c = {c}",
                    e + 1
                )));
            }
        }
        Ok(())
    }

    /// `Σ w_ij c_ij` over the edges with positive `y`.
    pub fn support_weight(&self, y: &FractionalAssignment) -> f64 {
        y.support().map(|e| self.short.edge(e).w * self.short.edge(e).c as f64).sum()
    }
}

/// `ylong((1−δ)/(1+8δ) · yshort(y^c))`; errors when `y^c` is not saturated.
pub fn unperturb_cap(li: &LongInstance, yl: &FractionalAssignment, delta: f64) -> Result<FractionalAssignment> {
    li.check_saturation(yl)?;
    li.ylong(&li.yshort(yl).scaled((1.0 - delta) / (1.0 + 8.0 * delta)))
}

/// Short-space costs of the long duals.
#[derive(Clone, Debug, PartialEq)]
pub struct EtaCosts {
    /// `η̄_ij = η_{i,p} + η_{p',j} − η_{p,p'}`.
    pub short: Vec<f64>,
    /// `Σ c_ij η_{p,p'}`.
    pub shift: f64,
}

/// Projects long edge costs `η` onto the short graph. Both facts the projection relies on
/// (`η̄ ≥ 0` and `shift ≤ γ/(1−δ)`) are checked.
pub fn eta_costs(li: &LongInstance, duals: &Duals, delta: f64) -> Result<EtaCosts> {
    let eta = duals.edge_costs(li.long());
    let mut short = Vec::with_capacity(li.short().m());
    let mut shift = 0.0;
    for (e, edge) in li.short().edges().iter().enumerate() {
        let (a, mid, b) = (eta[3 * e], eta[3 * e + 1], eta[3 * e + 2]);
        let v = a + b - mid;
        if v < -1e-9 * (a + b + mid).max(f64::MIN_POSITIVE) {
            return Err(Error::Invariant(format!("negative short cost {v} on edge {}", e + 1)));
        }
        short.push(v.max(0.0));
        shift += edge.c as f64 * mid;
    }
    let cap = duals.gamma / (1.0 - delta);
    if shift > cap * (1.0 + 1e-9) {
        return Err(Error::Invariant(format!("shift cost {shift} exceeds γ/(1−δ) = {cap}")));
    }
    Ok(EtaCosts { short, shift })
}

/// Exhaustive check of the capacitated polytope: vertex and edge bounds, and for every `U` and
/// every set `F` of edges leaving `U` with `‖U‖ + c(F)` odd, `y(E[U]) + y(F) ≤ ⌊(‖U‖ + c(F))/2⌋`.
/// For each `U` the worst `F` of each parity is found by a two-state scan over the cut.
pub fn check_cap_feasibility(y: &FractionalAssignment, inst: &Instance) -> Result<Option<Violation>> {
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
    for (e, edge) in inst.edges().iter().enumerate() {
        if !within(y.get(e), edge.c as f64) {
            return Ok(Some(Violation::EdgeCap { edge: e, y: y.get(e), cap: edge.c }));
        }
    }
    for mask in 1usize..1 << n {
        let inside_u = |v: usize| mask >> v & 1 == 1;
        let bu: u64 = (0..n).filter(|&v| inside_u(v)).map(|v| inst.b()[v]).sum();
        let mut inner = 0.0;
        // best[p] = (Σ (y_f − c_f/2), F) over cut subsets with c(F) ≡ p (mod 2)
        let mut best: [Option<(f64, Vec<usize>)>; 2] = [Some((0.0, vec![])), None];
        for (e, edge) in inst.edges().iter().enumerate() {
            match (inside_u(edge.i), inside_u(edge.j)) {
                (true, true) => inner += y.get(e),
                (false, false) => {}
                _ => {
                    let g = y.get(e) - edge.c as f64 / 2.0;
                    let flip = (edge.c % 2) as usize;
                    let mut next = best.clone();
                    for p in 0..2 {
                        if let Some((v, f)) = &best[p] {
                            let q = p ^ flip;
                            if next[q].as_ref().map_or(true, |(nv, _)| v + g > *nv) {
                                let mut f = f.clone();
                                f.push(e);
                                next[q] = Some((v + g, f));
                            }
                        }
                    }
                    best = next;
                }
            }
        }
        let want = ((bu + 1) % 2) as usize;
        if let Some((_, cut)) = &best[want] {
            let cf: u64 = cut.iter().map(|&e| inst.edge(e).c).sum();
            let lhs = inner + cut.iter().map(|&e| y.get(e)).sum::<f64>();
            let bound = (bu + cf) / 2;
            if !within(lhs, bound as f64) {
                let members = (0..n).filter(|&v| inside_u(v)).collect();
                return Ok(Some(Violation::CapOddSet { members, cut: cut.clone(), lhs, bound }));
            }
        }
    }
    Ok(None)
}

/// Counters of the capacitated solve on top of the engine's.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct CapStats {
    pub engine: SolveStats,
    /// `Σ w_ij c_ij` over the support of the returned solution.
    pub support_weight_ledger: f64,
    /// Largest support weight of a single step answer.
    pub step_support_max: f64,
    /// Passes over the edge list.
    pub r: u64,
}

/// Fractional capacitated solution.
#[derive(Clone, Debug)]
pub struct CapSolution {
    /// Short-space solution, feasible for the capacitated polytope.
    pub y: FractionalAssignment,
    /// Long iterate before unperturbing.
    pub y_long: FractionalAssignment,
    pub stats: CapStats,
}

/// Iterated greedy on the short graph and `β = (1−δ)/(1−δ/2)·wᵀy`.
pub fn initial_solution(inst: &Instance, delta: f64, order: &[usize]) -> (FractionalAssignment, f64) {
    let c: Vec<f64> = inst.edges().iter().map(|e| e.c as f64).collect();
    let it = iterated_greedy_rounds(inst, &c, &inst.weights(), order, iterated_rounds(delta));
    let beta = (1.0 - delta) / (1.0 - delta / 2.0) * it.y.dot(&inst.weights());
    (it.y, beta)
}

struct CapStep<'a> {
    li: &'a LongInstance,
    delta: f64,
    order: Vec<usize>,
    c: Vec<f64>,
    w: Vec<f64>,
    step_support_max: f64,
}

impl StepOracle for CapStep<'_> {
    fn step(&mut self, duals: &Duals, beta: f64) -> Result<StepAnswer> {
        let eta = eta_costs(self.li, duals, self.delta)?;
        let f2 = duals.gamma / (1.0 - self.delta) - eta.shift;
        let (inst, order, c) = (self.li.short(), &self.order, &self.c);
        let rounds = iterated_rounds(self.delta);
        let oracle = |wr: &[f64]| iterated_greedy_rounds(inst, c, wr, order, rounds).y;
        Ok(match solve_budgeted(oracle, &self.w, &eta.short, beta, f2, self.delta) {
            Budgeted::Ok(s) => {
                self.step_support_max = self.step_support_max.max(self.li.support_weight(&s.y));
                StepAnswer::Point(self.li.ylong(&s.y)?, s.invocations)
            }
            Budgeted::Fail { invocations, .. } => StepAnswer::Fail(invocations),
        })
    }

    fn check_iterate(&self, y: &FractionalAssignment) -> Result<()> {
        self.li.check_saturation(y)
    }
}

/// Solves with default settings.
pub fn solve_cap(inst: &Instance, delta: f64) -> Result<CapSolution> {
    solve_cap_with(inst, delta, &SolverConfig::default(), &mut |_| {})
}

/// Solves with explicit settings; the observer sees long-space iterates.
pub fn solve_cap_with(
    inst: &Instance,
    delta: f64,
    cfg: &SolverConfig,
    observer: &mut dyn FnMut(&IterationView),
) -> Result<CapSolution> {
    crate::graph_core::validate_delta(delta)?;
    if !inst.capacitated() {
        return Err(Error::Instance("the capacitated solver needs edge capacities".into()));
    }
    let li = LongInstance::new(inst)?;
    let lam0 = lambda0(delta);
    let order = arrival_order(inst.m(), cfg.shuffle_seed);
    let (y0, beta) = initial_solution(inst, delta, &order);
    if beta <= 0.0 {
        let y = FractionalAssignment::zeros(inst.m());
        let y_long = li.ylong(&y)?;
        let engine = SolveStats { lambda0: lam0, ..Default::default() };
        return Ok(CapSolution { y, y_long, stats: CapStats { engine, ..Default::default() } });
    }
    let c: Vec<f64> = inst.edges().iter().map(|e| e.c as f64).collect();
    let step_support_max = li.support_weight(&y0);
    let mut step = CapStep { li: &li, delta, order, c, w: inst.weights(), step_support_max };
    let out = mwu::run(li.long(), delta, lam0, li.ylong(&y0)?, beta, &mut step, cfg, observer)?;
    let y_long = unperturb_cap(&li, &out.y, delta)?;
    let y = li.yshort(&y_long);
    let mut engine = out.stats;
    engine.objective = y.dot(&inst.weights());
    let stats = CapStats {
        r: engine.passes,
        support_weight_ledger: li.support_weight(&y),
        step_support_max: step.step_support_max,
        engine,
    };
    Ok(CapSolution { y, y_long: out.y, stats })
}
