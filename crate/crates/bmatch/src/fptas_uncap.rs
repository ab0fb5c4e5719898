//! Fractional uncapacitated b-matching within `(1 − 14δ)` of the optimum.
//!
//! The relaxation `Q` keeps only the vertex constraints; `Q[λ₀]` with `λ₀ = 12` is `6·Q`. The
//! greedy is a 1/6 approximation over `Q` that returns b-matchings, so six times its answer is
//! an exact-enough maximizer over `Q[λ₀]`, which is what the budgeted step needs.

use crate::error::Result;
use crate::graph_core::{validate_delta, FractionalAssignment, Instance};
use crate::greedy::{arrival_order, greedy_uncapacitated};
use crate::lagrangian::{solve_budgeted, Budgeted};
use crate::mwu::{self, Duals, IterationView, SolveStats, SolverConfig, StepAnswer, StepOracle};

/// Width parameter of the uncapacitated solver.
pub const LAMBDA0: f64 = 12.0;

/// Fractional solution and its counters.
#[derive(Clone, Debug)]
pub struct Solution {
    /// Feasible for the b-matching polytope.
    pub y: FractionalAssignment,
    /// Iterate before the final scaling by `(1−δ)/(1+8δ)`.
    pub y_perturbed: FractionalAssignment,
    pub stats: SolveStats,
}

/// `y = 6·greedy` and `β = (1−δ)/(1−δ/2)·wᵀy`.
pub fn initial_solution(inst: &Instance, delta: f64, order: &[usize]) -> (FractionalAssignment, f64) {
    let g = greedy_uncapacitated(inst, &inst.weights(), order);
    let y = g.y.scaled(LAMBDA0 / 2.0);
    let beta = (1.0 - delta) / (1.0 - delta / 2.0) * y.dot(&inst.weights());
    (y, beta)
}

/// `w'_e = w_e − ϱ·(x_i + x_j + Σ_{U ∋ i,j} z_U)`.
pub fn effective_weights(inst: &Instance, rho: f64, duals: &Duals) -> Vec<f64> {
    inst.weights().iter().zip(duals.edge_costs(inst)).map(|(w, h)| w - rho * h).collect()
}

struct UncapStep<'a> {
    inst: &'a Instance,
    delta: f64,
    order: Vec<usize>,
    w: Vec<f64>,
}

impl StepOracle for UncapStep<'_> {
    fn step(&mut self, duals: &Duals, beta: f64) -> Result<StepAnswer> {
        let h = duals.edge_costs(self.inst);
        let f2 = duals.gamma / (1.0 - self.delta);
        let (inst, order) = (self.inst, &self.order);
        let oracle = |wr: &[f64]| greedy_uncapacitated(inst, wr, order).y.scaled(LAMBDA0 / 2.0);
        Ok(match solve_budgeted(oracle, &self.w, &h, beta, f2, self.delta) {
            Budgeted::Ok(s) => {
                debug_assert!(s.achieved.1 <= f2 * (1.0 + 1e-9));
                StepAnswer::Point(s.y, s.invocations)
            }
            Budgeted::Fail { invocations, .. } => StepAnswer::Fail(invocations),
        })
    }
}

/// Solves with default settings.
pub fn solve(inst: &Instance, delta: f64) -> Result<Solution> {
    solve_with(inst, delta, &SolverConfig::default(), &mut |_| {})
}

/// Solves with explicit settings and a per-iteration observer.
pub fn solve_with(
    inst: &Instance,
    delta: f64,
    cfg: &SolverConfig,
    observer: &mut dyn FnMut(&IterationView),
) -> Result<Solution> {
    validate_delta(delta)?;
    let order = arrival_order(inst.m(), cfg.shuffle_seed);
    let (y0, beta) = initial_solution(inst, delta, &order);
    if beta <= 0.0 {
        let y = FractionalAssignment::zeros(inst.m());
        return Ok(Solution {
            y: y.clone(),
            y_perturbed: y,
            stats: SolveStats { lambda0: LAMBDA0, ..Default::default() },
        });
    }
    let mut step = UncapStep { inst, delta, order, w: inst.weights() };
    let out = mwu::run(inst, delta, LAMBDA0, y0, beta, &mut step, cfg, observer)?;
    let y = out.y.scaled((1.0 - delta) / (1.0 + 8.0 * delta));
    let mut stats = out.stats;
    stats.objective = y.dot(&inst.weights());
    Ok(Solution { y, y_perturbed: out.y, stats })
}
