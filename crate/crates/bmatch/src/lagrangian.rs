//! Budgeted maximization through a Lagrangian multiplier.
//!
//! Given an oracle that approximately maximizes `(w − ϱh)ᵀy`, find `y` with `wᵀy ≥ (1−δ)f₁`
//! and `hᵀy ≤ f₂`. The multiplier is bisected on `[0, f₁/f₂]` while one end keeps a budget
//! violating answer and the other a budget respecting one; the two are then mixed so that the
//! budget is met with equality.

use crate::graph_core::FractionalAssignment;

/// Successful budgeted answer.
#[derive(Clone, Debug)]
pub struct BudgetedSolution {
    pub y: FractionalAssignment,
    pub rho_minus: f64,
    pub rho_plus: f64,
    /// Weight of the `ϱ⁺` answer in the mix (1 when no mixing took place).
    pub mix: f64,
    /// `(wᵀy, hᵀy)`.
    pub achieved: (f64, f64),
    pub invocations: usize,
}

/// Outcome of [`solve_budgeted`]; `Fail` means the target `f₁` was too ambitious.
#[derive(Clone, Debug)]
pub enum Budgeted {
    Ok(BudgetedSolution),
    Fail { invocations: usize, best_value: f64 },
}

/// Largest number of oracle calls [`solve_budgeted`] makes for a given `δ`.
pub fn max_invocations(delta: f64) -> usize {
    ((2.0 / delta).ln() / std::f64::consts::LN_2).ceil() as usize + 1
}

/// Bisection on `ϱ` followed by a two-point mix. `oracle(w − ϱh)` must return a point of the
/// outer polytope; the all-zero vector is assumed to belong to it.
pub fn solve_budgeted<F>(mut oracle: F, w: &[f64], h: &[f64], f1: f64, f2: f64, delta: f64) -> Budgeted
where
    F: FnMut(&[f64]) -> FractionalAssignment,
{
    let m = w.len();
    let mut calls = 0;
    let value = |y: &FractionalAssignment| y.dot(w);
    let cost = |y: &FractionalAssignment| y.dot(h);
    let target = (1.0 - delta) * f1;
    let finish = |y: FractionalAssignment, lo: f64, hi: f64, mix: f64, calls: usize| {
        let achieved = (value(&y), cost(&y));
        if achieved.0 >= target * (1.0 - 1e-12) {
            Budgeted::Ok(BudgetedSolution { y, rho_minus: lo, rho_plus: hi, mix, achieved, invocations: calls })
        } else {
            Budgeted::Fail { invocations: calls, best_value: achieved.0 }
        }
    };

    if f2 <= 0.0 {
        // only edges with zero cost can be used at all
        let hw: Vec<f64> = w.iter().zip(h).map(|(&w, &h)| if h > 0.0 { f64::NEG_INFINITY } else { w }).collect();
        let mut y = oracle(&hw);
        for (e, &he) in h.iter().enumerate() {
            if he > 0.0 {
                y.set(e, 0.0);
            }
        }
        return finish(y, 0.0, 0.0, 1.0, 1);
    }

    let mut at = |rho: f64| {
        let wr: Vec<f64> = w.iter().zip(h).map(|(&w, &h)| w - rho * h).collect();
        oracle(&wr)
    };
    let y0 = at(0.0);
    calls += 1;
    if cost(&y0) <= f2 {
        return finish(y0, 0.0, 0.0, 1.0, calls);
    }
    let (mut lo, mut hi) = (0.0, f1 / f2);
    let mut y_lo = y0;
    let mut y_hi = FractionalAssignment::zeros(m);
    // ⌈log₂(2/δ)⌉ halvings bring the interval to δf₁/(2f₂)
    for _ in 1..max_invocations(delta) {
        let mid = 0.5 * (lo + hi);
        let y = at(mid);
        calls += 1;
        if cost(&y) > f2 {
            lo = mid;
            y_lo = y;
        } else {
            hi = mid;
            y_hi = y;
        }
    }
    let (c_lo, c_hi) = (cost(&y_lo), cost(&y_hi));
    let a = ((c_lo - f2) / (c_lo - c_hi)).clamp(0.0, 1.0);
    let y = y_lo.mix(&y_hi, a);
    finish(y, lo, hi, a, calls)
}
