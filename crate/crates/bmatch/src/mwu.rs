//! Multiplicative-weights engine shared by the fractional solvers.
//!
//! The engine drives `λ`, the largest ratio of a perturbed constraint, down to `1 + 8δ`. Each
//! iteration weights the near-tight constraints by `e^{αλ_ℓ}/b̃_ℓ`, asks a step oracle for a
//! point whose weighted load is at most `γ/(1−δ)` and whose value is at least `(1−δ)β`, and
//! moves towards it. Weights are kept relative to `e^{αλ}` so nothing overflows.
//!
//! The textbook step `σ₀ = ε/(4αλ₀)` is tiny, so the engine first tries a corrective step: every
//! oracle answer is kept as an atom and the atoms are re-weighted to minimize the largest known
//! ratio. A candidate is accepted only when a proven upper bound on the potential
//! `Ψ = Σ_ℓ e^{αλ_ℓ}` after the step is below a proven lower bound before it by the factor
//! `1 − ε²/(8λ₀)` that the textbook step guarantees. Atoms all carry value at least `(1−δ)β`
//! for the current `β`, so any mixture keeps the value bound. If no candidate passes, the
//! engine takes the textbook step.

use std::collections::{HashMap, HashSet};

use crate::error::{Error, Result};
use crate::graph_core::{
    perturbed_oddset_bound, perturbed_vertex_bound, ratio, validate_delta, FractionalAssignment, Instance, OddSet,
    ViolationReport,
};
use crate::oddset_oracle::{find_violated_family_with, OracleOptions, OracleOutcome};
use crate::reference_oracles::max_bnorm;

/// Solver knobs shared by both fractional solvers.
#[derive(Clone, Debug)]
pub struct SolverConfig {
    /// A phase ends once `λ < (1 − phase_shrink)·λ_t`; the default is `δ`.
    pub phase_shrink: Option<f64>,
    /// Overrides the proven iteration bound (the smaller of the two applies).
    pub max_iters: Option<u64>,
    /// Greedy arrival order seed (`None` keeps input order).
    pub shuffle_seed: Option<u64>,
    /// Run oracle levels on the rayon pool.
    pub parallel: bool,
    pub step: StepPolicy,
}

/// How the next iterate is chosen.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StepPolicy {
    /// Always `σ₀ = ε/(4αλ₀)`.
    Textbook,
    /// Longer steps along `ỹ − y` when the potential test passes.
    LineSearch,
    /// Re-weighting of all oracle answers, then line search, then `σ₀`.
    Corrective,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            phase_shrink: None,
            max_iters: None,
            shuffle_seed: None,
            parallel: false,
            step: StepPolicy::Corrective,
        }
    }
}

/// Which rule produced an accepted step.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StepKind {
    Corrective,
    LineSearch,
    Textbook,
}

/// Counters reported by a solve.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct SolveStats {
    pub objective: f64,
    pub beta_final: f64,
    pub lambda_final: f64,
    pub iterations: u64,
    pub phases: u64,
    pub superphases: u64,
    /// Calls to the approximate maximization oracle.
    pub oracle_invocations: u64,
    /// Passes over the edge list (oracle calls plus family computations).
    pub passes: u64,
    pub family_size_max: usize,
    pub alpha: f64,
    pub lambda0: f64,
    pub iteration_cap: u64,
    pub beta_decreases: u32,
    /// `λ_t` at the start of each phase, beginning with the initial `λ`.
    pub phase_lambdas: Vec<f64>,
    /// Candidates rejected by the potential test.
    pub rejected_steps: u64,
    /// Accepted steps by kind: corrective, line search, textbook.
    pub step_kinds: [u64; 3],
}

/// Dual weights relative to `e^{αλ}`.
#[derive(Clone, Debug)]
pub struct Duals {
    /// `x_i·e^{−αλ}`; zero for vertices below the threshold.
    pub vertex: Vec<f64>,
    /// `(U, z_U·e^{−αλ})` for family sets above the threshold.
    pub sets: Vec<(OddSet, f64)>,
    /// `γ·e^{−αλ} = Σ_ℓ e^{α(λ_ℓ − λ)}` over weighted constraints.
    pub gamma: f64,
    /// `αλ`, the removed shift.
    pub shift: f64,
}

impl Duals {
    /// Weights for the current report.
    pub fn from_report(report: &ViolationReport, inst: &Instance, alpha: f64, delta: f64) -> Result<Self> {
        let lam = report.lambda;
        let thr = lam - delta.powi(3) / 10.0;
        let mut gamma = 0.0;
        let mut vertex = vec![0.0; inst.n()];
        for (v, &lv) in report.lambda_vertex.iter().enumerate() {
            let b = inst.b()[v];
            if b > 0 && lv > thr {
                let e = (alpha * (lv - lam)).exp();
                vertex[v] = e / perturbed_vertex_bound(b, delta)?;
                gamma += e;
            }
        }
        let mut sets = Vec::new();
        for (u, lu) in &report.family {
            if *lu > thr {
                let e = (alpha * (lu - lam)).exp();
                sets.push((u.clone(), e / perturbed_oddset_bound(u.bnorm(), delta)?));
                gamma += e;
            }
        }
        Ok(Duals { vertex, sets, gamma, shift: alpha * lam })
    }

    /// `ln γ` without the shift removed.
    pub fn log_gamma(&self) -> f64 {
        self.shift + self.gamma.ln()
    }

    /// Table of `Σ_{U ∋ i,j} z_U` over pairs inside some set.
    pub fn pair_sums(&self) -> HashMap<(usize, usize), f64> {
        let mut t = HashMap::new();
        for (u, z) in &self.sets {
            let mem = u.members();
            for (a, &i) in mem.iter().enumerate() {
                for &j in &mem[a + 1..] {
                    *t.entry((i, j)).or_insert(0.0) += z;
                }
            }
        }
        t
    }

    /// Per-edge cost `h_e = x_i + x_j + Σ_{U ∋ i,j} z_U`.
    pub fn edge_costs(&self, inst: &Instance) -> Vec<f64> {
        let t = self.pair_sums();
        inst.edges()
            .iter()
            .map(|e| {
                let key = (e.i.min(e.j), e.i.max(e.j));
                self.vertex[e.i] + self.vertex[e.j] + t.get(&key).copied().unwrap_or(0.0)
            })
            .collect()
    }
}

/// Answer of a step oracle.
pub enum StepAnswer {
    /// A point with `wᵀỹ ≥ (1−δ)β` and `hᵀỹ ≤ γ/(1−δ)`, and the oracle calls used.
    Point(FractionalAssignment, usize),
    /// `β` is too large; also reports the oracle calls used.
    Fail(usize),
}

/// Approximately solves the budgeted step for the current duals and target `β`.
pub trait StepOracle {
    fn step(&mut self, duals: &Duals, beta: f64) -> Result<StepAnswer>;
    /// Called on every accepted iterate; capacitated solvers check their equalities here.
    fn check_iterate(&self, _y: &FractionalAssignment) -> Result<()> {
        Ok(())
    }
}

/// Everything an observer may want to audit about one update.
pub struct IterationView<'a> {
    pub iteration: u64,
    pub y: &'a FractionalAssignment,
    pub report: &'a ViolationReport,
    pub duals: &'a Duals,
    pub alpha: f64,
    pub beta: f64,
    pub epsilon: f64,
    pub y_tilde: &'a FractionalAssignment,
    /// Weight of `ỹ` in the next iterate.
    pub sigma: f64,
    pub sigma0: f64,
    pub kind: StepKind,
    pub y_next: &'a FractionalAssignment,
}

/// Result of an engine run, before unperturbing.
#[derive(Clone, Debug)]
pub struct MwuOutcome {
    pub y: FractionalAssignment,
    pub report: ViolationReport,
    pub stats: SolveStats,
}

/// `ln` of an upper bound on the number of odd sets of b-norm at most `1/δ` plus vertices.
pub fn log_constraint_count(inst: &Instance, delta: f64) -> f64 {
    let n = inst.b().iter().filter(|&&b| b > 0).count() as f64;
    let mut total = n;
    let mut c = 1.0;
    for k in 1..=max_bnorm(delta) {
        let kf = k as f64;
        if kf > n {
            break;
        }
        c = c * (n - kf + 1.0) / kf;
        total += c;
    }
    total.max(1.0).ln()
}

/// `α = max(50δ⁻³ ln n, 10δ⁻³ ln(Mλ₀/δ))`.
pub fn alpha(inst: &Instance, delta: f64, lambda0: f64) -> f64 {
    let d3 = delta.powi(3);
    let a1 = 50.0 / d3 * (inst.n().max(2) as f64).ln();
    let a2 = 10.0 / d3 * (log_constraint_count(inst, delta) + (lambda0 / delta).ln());
    a1.max(a2)
}

/// `10·λ₀·(ln(4n)/δ² + α/δ + α ln λ₀)`.
pub fn iteration_bound(n: usize, delta: f64, alpha: f64, lambda0: f64) -> u64 {
    let t = 10.0 * lambda0 * ((4.0 * n.max(1) as f64).ln() / (delta * delta) + alpha / delta + alpha * lambda0.ln());
    t.min(u64::MAX as f64 / 2.0).ceil() as u64
}

/// Largest number of `β ← (1−δ)β` decreases allowed in a run.
pub fn beta_decrease_cap(delta: f64, lambda0: f64) -> u32 {
    (lambda0.ln() / -(1.0 - delta).ln()).ceil() as u32 + 2
}

fn log_sum_exp(xs: impl IntoIterator<Item = f64>) -> f64 {
    let v: Vec<f64> = xs.into_iter().collect();
    let m = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !m.is_finite() {
        return m;
    }
    m + v.iter().map(|x| (x - m).exp()).sum::<f64>().ln()
}

/// `ln` of the potential restricted to vertices and the reported family (a lower bound).
fn log_potential_known(report: &ViolationReport, inst: &Instance, alpha: f64) -> f64 {
    let vs = report.lambda_vertex.iter().enumerate().filter(|(v, _)| inst.b()[*v] > 0).map(|(_, &l)| alpha * l);
    log_sum_exp(vs.chain(report.family.iter().map(|(_, l)| alpha * l)))
}

/// `ln` of a proven upper bound on the full potential.
fn log_potential_upper(out: &OracleOutcome, inst: &Instance, alpha: f64, log_m: f64) -> f64 {
    let known = log_potential_known(&out.report, inst, alpha);
    log_sum_exp([known, log_m + alpha * out.outside_bound])
}

/// Ratios of vertices and family sets at an arbitrary point.
fn known_ratios(y: &FractionalAssignment, report: &ViolationReport, inst: &Instance, delta: f64) -> Result<Vec<f64>> {
    let loads = y.loads(inst);
    let mut r = Vec::new();
    for v in 0..inst.n() {
        if inst.b()[v] > 0 {
            r.push(ratio(loads[v], perturbed_vertex_bound(inst.b()[v], delta)?));
        }
    }
    for (u, _) in &report.family {
        r.push(u.inside(y, inst) / perturbed_oddset_bound(u.bnorm(), delta)?);
    }
    Ok(r)
}

/// Minimizer of `σ ↦ ln Σ e^{α((1−σ)a_ℓ + σc_ℓ)}` over `[lo, 1]` (convex, golden section).
fn best_sigma(a: &[f64], c: &[f64], alpha: f64, lo: f64) -> f64 {
    let f = |s: f64| log_sum_exp(a.iter().zip(c).map(|(&a, &c)| alpha * ((1.0 - s) * a + s * c)));
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let (mut x0, mut x1) = (lo, 1.0);
    for _ in 0..80 {
        let (m1, m2) = (x1 - g * (x1 - x0), x0 + g * (x1 - x0));
        if f(m1) <= f(m2) {
            x1 = m2;
        } else {
            x0 = m1;
        }
    }
    let s = 0.5 * (x0 + x1);
    if f(s) <= f(lo) {
        s
    } else {
        lo
    }
}

/// Oracle answers kept for corrective steps, with their ratios on a pool of constraints.
struct Atoms {
    points: Vec<FractionalAssignment>,
    /// Current mixture; `y = Σ θ_k points_k`.
    theta: Vec<f64>,
    /// `cols[k][r]`: ratio of pool constraint `r` at `points[k]`.
    cols: Vec<Vec<f64>>,
    /// Vertices with positive `b` first, then odd sets.
    pool: Vec<Constraint>,
    seen: HashSet<Vec<usize>>,
}

enum Constraint {
    Vertex(usize, f64),
    Set(OddSet, f64),
}

impl Constraint {
    fn ratio(&self, y: &FractionalAssignment, inst: &Instance) -> f64 {
        match self {
            Constraint::Vertex(v, bt) => inst.incident(*v).iter().map(|&e| y.get(e)).sum::<f64>() / bt,
            Constraint::Set(u, bt) => u.inside(y, inst) / bt,
        }
    }
}

/// Pool sets beyond this are not added (the potential test still guards every step).
const POOL_SETS_MAX: usize = 400;
/// Atoms kept at most; the oldest zero-weight ones go first.
const ATOMS_MAX: usize = 200;

impl Atoms {
    fn new(y0: &FractionalAssignment, inst: &Instance, delta: f64) -> Result<Self> {
        let mut pool = Vec::new();
        for v in 0..inst.n() {
            if inst.b()[v] > 0 {
                pool.push(Constraint::Vertex(v, perturbed_vertex_bound(inst.b()[v], delta)?));
            }
        }
        let mut a = Atoms { points: vec![], theta: vec![], cols: vec![], pool, seen: HashSet::new() };
        a.push(inst, y0, delta)?;
        a.theta[0] = 1.0;
        Ok(a)
    }

    fn push(&mut self, inst: &Instance, y: &FractionalAssignment, _delta: f64) -> Result<()> {
        self.cols.push(self.pool.iter().map(|c| c.ratio(y, inst)).collect());
        self.points.push(y.clone());
        self.theta.push(0.0);
        Ok(())
    }

    fn add_sets(&mut self, report: &ViolationReport, inst: &Instance, delta: f64) -> Result<()> {
        for (u, _) in &report.family {
            if self.seen.len() >= POOL_SETS_MAX || !self.seen.insert(u.members().to_vec()) {
                continue;
            }
            let c = Constraint::Set(u.clone(), perturbed_oddset_bound(u.bnorm(), delta)?);
            for (k, p) in self.points.iter().enumerate() {
                self.cols[k].push(c.ratio(p, inst));
            }
            self.pool.push(c);
        }
        Ok(())
    }

    /// Weights minimizing the largest pool ratio of the mixture.
    fn minimax(&self) -> Vec<f64> {
        minimax_mixture(&self.cols, self.pool.len())
    }

    fn combine(&self, theta: &[f64], m: usize) -> FractionalAssignment {
        let mut y = vec![0.0; m];
        for (t, p) in theta.iter().zip(&self.points) {
            if *t > 0.0 {
                for (acc, v) in y.iter_mut().zip(p.values()) {
                    *acc += t * v;
                }
            }
        }
        FractionalAssignment::from_vec(y)
    }

    /// Records the textbook update `(1−σ)y + σỹ` with `ỹ` the newest atom.
    fn blend(&mut self, sigma: f64) {
        let last = self.theta.len() - 1;
        for t in self.theta.iter_mut() {
            *t *= 1.0 - sigma;
        }
        self.theta[last] += sigma;
    }

    fn prune(&mut self) {
        let mut k = 0;
        while self.points.len() > ATOMS_MAX && k < self.points.len() {
            if self.theta[k] == 0.0 {
                self.points.remove(k);
                self.theta.remove(k);
                self.cols.remove(k);
            } else {
                k += 1;
            }
        }
    }
}

/// Solves `min_{θ ∈ simplex} max_r Σ_k θ_k cols[k][r]` through the LP
/// `max 1ᵀz s.t. (L + 1)z ≤ 1, z ≥ 0`, whose slack basis is feasible.
fn minimax_mixture(cols: &[Vec<f64>], rows: usize) -> Vec<f64> {
    let k = cols.len();
    let width = k + rows + 1;
    let mut t = vec![0.0; (rows + 1) * width];
    for r in 0..rows {
        for (c, col) in cols.iter().enumerate() {
            t[r * width + c] = col[r] + 1.0;
        }
        t[r * width + k + r] = 1.0;
        t[r * width + width - 1] = 1.0;
    }
    let obj = rows * width;
    for c in 0..k {
        t[obj + c] = -1.0;
    }
    let mut basis: Vec<usize> = (k..k + rows).collect();
    const EPS: f64 = 1e-12;
    for _ in 0..50 * (rows + k) {
        // Bland's rule: first improving column, first minimizing row
        let Some(enter) = (0..width - 1).find(|&c| t[obj + c] < -EPS) else { break };
        let mut leave = None;
        let mut best = f64::INFINITY;
        for r in 0..rows {
            let a = t[r * width + enter];
            if a > EPS {
                let q = t[r * width + width - 1] / a;
                if q < best - EPS || (q <= best + EPS && leave.map_or(true, |l: usize| basis[r] < basis[l])) {
                    best = q.min(best);
                    leave = Some(r);
                }
            }
        }
        let Some(lr) = leave else { break };
        let piv = t[lr * width + enter];
        for c in 0..width {
            t[lr * width + c] /= piv;
        }
        for r in 0..=rows {
            if r != lr {
                let f = t[r * width + enter];
                if f != 0.0 {
                    for c in 0..width {
                        t[r * width + c] -= f * t[lr * width + c];
                    }
                }
            }
        }
        basis[lr] = enter;
    }
    let mut z = vec![0.0; k];
    for (r, &b) in basis.iter().enumerate() {
        if b < k {
            z[b] = t[r * width + width - 1].max(0.0);
        }
    }
    let s: f64 = z.iter().sum();
    if s <= 0.0 {
        let mut th = vec![0.0; k];
        th[0] = 1.0;
        return th;
    }
    z.iter().map(|v| v / s).collect()
}

/// Runs the engine from `y0` with target `beta0` until `λ ≤ 1 + 8δ`.
#[allow(clippy::too_many_arguments)]
pub fn run(
    inst: &Instance,
    delta: f64,
    lambda0: f64,
    y0: FractionalAssignment,
    beta0: f64,
    oracle: &mut dyn StepOracle,
    cfg: &SolverConfig,
    observer: &mut dyn FnMut(&IterationView),
) -> Result<MwuOutcome> {
    validate_delta(delta)?;
    let a = alpha(inst, delta, lambda0);
    let log_m = log_constraint_count(inst, delta);
    let bound = iteration_bound(inst.n(), delta, a, lambda0);
    let cap = cfg.max_iters.map_or(bound, |m| m.min(bound));
    let shrink = cfg.phase_shrink.unwrap_or(delta);
    let beta_cap = beta_decrease_cap(delta, lambda0);
    let mut stats = SolveStats { alpha: a, lambda0, iteration_cap: cap, ..Default::default() };

    let mut opts = OracleOptions { hint: None, parallel: cfg.parallel };
    let mut atoms = Atoms::new(&y0, inst, delta)?;
    let mut y = y0;
    let mut beta = beta0;
    let mut out = find_violated_family_with(&y, inst, delta, &opts)?;
    stats.passes += 1;
    let mut eps: f64 = 1.0 / 8.0;
    let mut lambda_t = out.report.lambda;
    stats.phase_lambdas.push(lambda_t);

    loop {
        oracle.check_iterate(&y)?;
        let lam = out.report.lambda;
        stats.family_size_max = stats.family_size_max.max(out.report.family.len());
        if lam <= 1.0 + 8.0 * delta || !out.report.lambda_exact {
            stats.beta_final = beta;
            stats.lambda_final = lam;
            return Ok(MwuOutcome { y, report: out.report, stats });
        }
        if stats.iterations >= cap {
            return Err(Error::IterationCap { cap, lambda: lam });
        }
        if lam < lambda_t && lam < (1.0 + 8.0 * eps).max((1.0 - shrink) * lambda_t) {
            stats.phases += 1;
            lambda_t = lam;
            stats.phase_lambdas.push(lam);
        }
        if lam < 1.0 + 8.0 * eps {
            stats.superphases += 1;
            while lam < 1.0 + 8.0 * eps && eps > delta {
                eps = (2.0 * eps / 3.0).max(delta);
            }
        }

        let duals = Duals::from_report(&out.report, inst, a, delta)?;
        let y_tilde = loop {
            match oracle.step(&duals, beta)? {
                StepAnswer::Point(p, calls) => {
                    stats.oracle_invocations += calls as u64;
                    stats.passes += calls as u64;
                    break p;
                }
                StepAnswer::Fail(calls) => {
                    stats.oracle_invocations += calls as u64;
                    stats.passes += calls as u64;
                    stats.beta_decreases += 1;
                    if stats.beta_decreases > beta_cap {
                        return Err(Error::BetaExhausted(stats.beta_decreases));
                    }
                    beta *= 1.0 - delta;
                }
            }
        };

        let sigma0 = eps / (4.0 * a * lambda0);
        let lower = log_potential_known(&out.report, inst, a);
        let required = lower + (1.0 - eps * eps / (8.0 * lambda0)).ln() - 1e-9 * lower.abs().max(1.0);
        let mut chosen: Option<(FractionalAssignment, OracleOutcome, f64, StepKind)> = None;
        opts.hint = out.lambda_hat;

        if cfg.step == StepPolicy::Corrective {
            atoms.push(inst, &y_tilde, delta)?;
            atoms.add_sets(&out.report, inst, delta)?;
            for _ in 0..3 {
                let theta = atoms.minimax();
                let cand = atoms.combine(&theta, inst.m());
                let o = find_violated_family_with(&cand, inst, delta, &opts)?;
                stats.passes += 1;
                if log_potential_upper(&o, inst, a, log_m) <= required {
                    let sig = *theta.last().unwrap();
                    atoms.theta = theta;
                    chosen = Some((cand, o, sig, StepKind::Corrective));
                    break;
                }
                stats.rejected_steps += 1;
                atoms.add_sets(&o.report, inst, delta)?;
            }
        }
        if chosen.is_none() && cfg.step != StepPolicy::Textbook {
            let now = known_ratios(&y, &out.report, inst, delta)?;
            let there = known_ratios(&y_tilde, &out.report, inst, delta)?;
            let mut s = best_sigma(&now, &there, a, sigma0);
            for _ in 0..3 {
                if s <= sigma0 {
                    break;
                }
                let cand = y.mix(&y_tilde, s);
                let o = find_violated_family_with(&cand, inst, delta, &opts)?;
                stats.passes += 1;
                if log_potential_upper(&o, inst, a, log_m) <= required {
                    chosen = Some((cand, o, s, StepKind::LineSearch));
                    break;
                }
                stats.rejected_steps += 1;
                s /= 8.0;
            }
        }
        let (y_next, out_next, sigma, kind) = match chosen {
            Some(x) => x,
            None => {
                let cand = y.mix(&y_tilde, sigma0);
                let o = find_violated_family_with(&cand, inst, delta, &opts)?;
                stats.passes += 1;
                (cand, o, sigma0, StepKind::Textbook)
            }
        };
        if cfg.step == StepPolicy::Corrective && kind != StepKind::Corrective {
            atoms.blend(sigma);
        }
        atoms.prune();
        stats.step_kinds[kind as usize] += 1;
        stats.iterations += 1;
        observer(&IterationView {
            iteration: stats.iterations,
            y: &y,
            report: &out.report,
            duals: &duals,
            alpha: a,
            beta,
            epsilon: eps,
            y_tilde: &y_tilde,
            sigma,
            sigma0,
            kind,
            y_next: &y_next,
        });
        y = y_next;
        out = out_next;
    }
}
