//! Exact separation of the nearly most violated small odd sets.
//!
//! Given `y`, the oracle returns `λ` (the largest violation ratio over vertex constraints and
//! odd sets of b-norm at most `1/δ`) together with every odd set `U` whose ratio is at least
//! `λ − δ³/10`. Those sets form a laminar family and are found by building, for each odd
//! level `ℓ`, an integer multigraph whose light cuts are exactly the candidate sets of b-norm
//! `ℓ`.
//!
//! The search for the estimate `λ̃` runs over a grid of step `δ³/100` and relies on two facts
//! about the level graphs (with `φ = 50/δ⁴`):
//!
//! * any `U` with `λ̂_U ≥ λ̃ − 0.22δ³` has a cut of at most `κ(‖U‖)` at level `‖U‖`;
//! * any odd set avoiding `s` with cut at most `κ(ℓ)` has `λ̂_U ≥ λ̃ − 0.38δ³`.
//!
//! So an empty probe at `g` proves `λ̂ < g − 0.22δ³`, and a non-empty probe exhibits a set
//! with `λ̂_U ≥ g − 0.38δ³`. Once `λ̂` is bracketed within `0.73δ³`, one full evaluation at a
//! `λ̃` inside `[λ̂ − 0.62δ³, λ̂ + 0.12δ³]` returns every wanted set.

use num::BigRational;
use rayon::prelude::*;

use crate::cut_tree::{maximal_oddset_collection, maximal_oddset_collection_limited, Multigraph};
use crate::error::{Error, Result};
use crate::graph_core::{
    is_laminar, lambda_set_exact, perturbed_oddset_bound, perturbed_vertex_bound_exact, ratio, rational, to_f64,
    validate_delta, FractionalAssignment, Instance, OddSet, ViolationReport,
};
use crate::reference_oracles::max_bnorm;

/// Relative window inside which float comparisons are redone in exact arithmetic.
const EXACT_WINDOW: f64 = 1e-9;

/// `λ̲ = max(1, max_i load_i / b_i)` and `ŷ = y / λ̲`.
pub fn normalize(y: &FractionalAssignment, inst: &Instance) -> Result<(f64, FractionalAssignment)> {
    let loads = y.loads(inst);
    let mut under = 1.0f64;
    for (v, (&l, &b)) in loads.iter().zip(inst.b()).enumerate() {
        if b == 0 {
            if l > 0.0 {
                return Err(Error::Assignment(format!("positive load on zero-capacity vertex {}", v + 1)));
            }
        } else {
            under = under.max(l / b as f64);
        }
    }
    Ok((under, y.scaled(1.0 / under)))
}

/// `φ = 50/δ⁴`, rounded up to an integer.
pub fn phi(delta: f64) -> f64 {
    (50.0 / delta.powi(4) - 1e-6).ceil()
}

/// The multigraph `G_φ` shared by all levels.
#[derive(Clone, Debug)]
pub struct PhiGraph {
    pub phi: f64,
    /// Group of every original vertex; group 0 is the special node `s`.
    pub group: Vec<usize>,
    /// Members of each group (group 0 holds removed vertices).
    pub groups: Vec<Vec<usize>>,
    /// `p` edges between groups (internal edges dropped).
    pub graph: Multigraph,
    /// Σ_j p_ij for every original vertex.
    pub pdeg: Vec<u64>,
    /// Pairs of groups merged because more than `2φ` edges join them, in merge order.
    pub merge_log: Vec<(Vec<usize>, Vec<usize>)>,
    /// Vertices merged into `s` because their degree exceeds `2φ/δ`.
    pub deleted: Vec<usize>,
    /// Σ b over each group.
    pub bsum: Vec<u64>,
}

impl PhiGraph {
    /// Builds `G_φ` from a normalized assignment (`Σ_j ŷ_ij ≤ b_i`).
    pub fn build(yhat: &FractionalAssignment, inst: &Instance, delta: f64) -> Self {
        let n = inst.n();
        let phi = phi(delta);
        let p: Vec<u64> = yhat.values().iter().map(|&v| (phi * v).floor() as u64).collect();
        let mut pdeg = vec![0u64; n];
        for (e, edge) in inst.edges().iter().enumerate() {
            pdeg[edge.i] += p[e];
            pdeg[edge.j] += p[e];
        }
        let heavy = 2.0 * phi / delta;
        let mut in_s = vec![false; n];
        let mut deleted = Vec::new();
        for v in 0..n {
            if inst.b()[v] == 0 {
                in_s[v] = true;
            } else if pdeg[v] as f64 > heavy {
                in_s[v] = true;
                deleted.push(v);
            }
        }
        // union-find over the remaining vertices, merging pairs joined by more than 2φ edges
        let mut uf: Vec<usize> = (0..n).collect();
        fn find(uf: &mut [usize], x: usize) -> usize {
            let mut r = x;
            while uf[r] != r {
                r = uf[r];
            }
            let mut c = x;
            while uf[c] != r {
                let nx = uf[c];
                uf[c] = r;
                c = nx;
            }
            r
        }
        let mut merge_log = Vec::new();
        loop {
            let mut between: std::collections::BTreeMap<(usize, usize), u64> = Default::default();
            for (e, edge) in inst.edges().iter().enumerate() {
                if p[e] == 0 || in_s[edge.i] || in_s[edge.j] {
                    continue;
                }
                let (a, b) = (find(&mut uf, edge.i), find(&mut uf, edge.j));
                if a != b {
                    *between.entry((a.min(b), a.max(b))).or_default() += p[e];
                }
            }
            let Some((&(a, b), _)) = between.iter().find(|(_, &k)| k as f64 > 2.0 * phi) else {
                break;
            };
            let members = |uf: &mut Vec<usize>, r: usize| -> Vec<usize> {
                (0..n).filter(|&v| !in_s[v] && find(uf, v) == r).collect()
            };
            let (ma, mb) = (members(&mut uf, a), members(&mut uf, b));
            merge_log.push((ma, mb));
            uf[b] = a;
        }
        let mut group = vec![0usize; n];
        let mut groups: Vec<Vec<usize>> = vec![Vec::new()];
        let mut root_id = vec![usize::MAX; n];
        for v in 0..n {
            if in_s[v] {
                groups[0].push(v);
                continue;
            }
            let r = find(&mut uf, v);
            if root_id[r] == usize::MAX {
                root_id[r] = groups.len();
                groups.push(Vec::new());
            }
            group[v] = root_id[r];
            groups[group[v]].push(v);
        }
        let mut graph = Multigraph::new(groups.len());
        for (e, edge) in inst.edges().iter().enumerate() {
            graph.add_edges(group[edge.i], group[edge.j], p[e]);
        }
        let bsum = groups.iter().map(|g| g.iter().map(|&v| inst.b()[v]).sum()).collect();
        Self { phi, group, groups, graph, pdeg, merge_log, deleted, bsum }
    }

    /// Total edge count of `G_φ` (used for the size bound).
    pub fn edge_count(&self) -> u64 {
        let k = self.graph.n();
        (0..k).flat_map(|u| (u + 1..k).map(move |v| (u, v))).map(|(u, v)| self.graph.multiplicity(u, v)).sum()
    }
}

/// One level graph `G_φ(ℓ, λ̃)` over groups, with `s` at index 0.
#[derive(Clone, Debug)]
pub struct LevelGraph {
    pub graph: Multigraph,
    pub kappa: u64,
    pub parity: Vec<u64>,
}

/// `κ(ℓ) = ⌊φλ̃(1 − δ²ℓ²/2)⌋ + ⌈12ℓ/δ⌉ + 1`.
pub fn kappa(phi: f64, ell: u64, lambda_tilde: f64, delta: f64) -> u64 {
    let l = ell as f64;
    (phi * lambda_tilde * (1.0 - delta * delta * l * l / 2.0)).floor() as u64
        + (12.0 * l / delta - 1e-9).ceil() as u64
        + 1
}

/// Adds `s` with `q_i − Σ_j p_ij` edges to every vertex, `q_i = ⌊φλ̃(1 − δ²ℓ)b_i⌋`.
pub fn build_level_graph(
    pg: &PhiGraph,
    inst: &Instance,
    ell: u64,
    lambda_tilde: f64,
    delta: f64,
) -> Result<LevelGraph> {
    let mut graph = pg.graph.clone();
    let kap = kappa(pg.phi, ell, lambda_tilde, delta);
    let f = pg.phi * lambda_tilde * (1.0 - delta * delta * ell as f64);
    for (v, &g) in pg.group.iter().enumerate() {
        if g == 0 {
            continue;
        }
        let q = (f * inst.b()[v] as f64).floor() as u64;
        if q < pg.pdeg[v] || q <= kap {
            return Err(Error::Invariant(format!(
                "level graph at vertex {}: q = {q}, Σp = {}, κ = {kap}",
                v + 1,
                pg.pdeg[v]
            )));
        }
        graph.add_edges(0, g, q - pg.pdeg[v]);
    }
    Ok(LevelGraph { graph, kappa: kap, parity: pg.bsum.clone() })
}

/// Tuning knobs; the defaults give the exact behaviour.
#[derive(Clone, Debug, Default)]
pub struct OracleOptions {
    /// Previous `λ̂`, used to place the first probes.
    pub hint: Option<f64>,
    /// Process levels on the rayon pool.
    pub parallel: bool,
}

/// Oracle answer plus bookkeeping.
#[derive(Clone, Debug)]
pub struct OracleOutcome {
    pub report: ViolationReport,
    /// `λ̲` used for normalization.
    pub underlambda: f64,
    /// Best `λ̂_U` seen (normalized), if any set was seen.
    pub lambda_hat: Option<f64>,
    /// Upper bound proven for every odd set ratio `λ_U` that is *not* in the family.
    pub outside_bound: f64,
    pub probes: usize,
    pub trees: usize,
}

/// λ and the family `{U ∈ O_δ : λ_U ≥ λ − δ³/10}`.
pub fn find_violated_family(y: &FractionalAssignment, inst: &Instance, delta: f64) -> Result<ViolationReport> {
    Ok(find_violated_family_with(y, inst, delta, &OracleOptions::default())?.report)
}

struct Search<'a> {
    y: &'a FractionalAssignment,
    inst: &'a Instance,
    delta: f64,
    pg: PhiGraph,
    under: f64,
    levels: Vec<u64>,
    parallel: bool,
    trees: usize,
    probes: usize,
    /// Best normalized ratio seen and every candidate set met so far.
    best: f64,
}

impl Search<'_> {
    fn lambda_hat(&self, set: &[usize], bnorm: u64) -> Result<f64> {
        let bu = perturbed_oddset_bound(bnorm, self.delta)?;
        let inside = OddSet::new(set.to_vec(), self.inst)?.inside(self.y, self.inst);
        Ok(inside / bu / self.under)
    }

    fn expand(&self, groups: &[usize]) -> (Vec<usize>, u64) {
        let mut v: Vec<usize> = groups.iter().flat_map(|&g| self.pg.groups[g].iter().copied()).collect();
        v.sort_unstable();
        let b = v.iter().map(|&x| self.inst.b()[x]).sum();
        (v, b)
    }

    /// Runs the collection at one level; `first_only` stops after one round.
    fn level(&self, ell: u64, g: f64, first_only: bool) -> Result<Vec<(Vec<usize>, u64)>> {
        let lg = build_level_graph(&self.pg, self.inst, ell, g, self.delta)?;
        let c = if first_only {
            maximal_oddset_collection_limited(&lg.graph, lg.kappa, 0, &lg.parity, 1)
        } else {
            maximal_oddset_collection(&lg.graph, lg.kappa, 0, &lg.parity)
        };
        if c.rejected > 0 {
            return Err(Error::Invariant(format!("{} tree cuts exceeded κ on recomputation", c.rejected)));
        }
        let limit = max_bnorm(self.delta);
        let mut out = Vec::new();
        for s in &c.sets {
            let (members, bn) = self.expand(s);
            if bn > limit || bn % 2 == 0 {
                return Err(Error::Invariant(format!("set with b-norm {bn} passed the κ gate at level {ell}")));
            }
            out.push((members, bn));
        }
        Ok(out)
    }

    /// Does some level return a set at `λ̃ = g`? Updates `best`.
    fn probe(&mut self, g: f64) -> Result<bool> {
        self.probes += 1;
        for &ell in &self.levels.clone() {
            self.trees += 1;
            let sets = self.level(ell, g, true)?;
            if !sets.is_empty() {
                for (m, bn) in &sets {
                    let lh = self.lambda_hat(m, *bn)?;
                    self.best = self.best.max(lh);
                }
                return Ok(true);
            }
        }
        Ok(false)
    }

    fn collect_all(&mut self, g: f64) -> Result<Vec<(Vec<usize>, u64)>> {
        self.trees += self.levels.len();
        let levels = self.levels.clone();
        let per: Vec<Result<Vec<(Vec<usize>, u64)>>> = if self.parallel {
            levels.par_iter().map(|&l| self.level(l, g, false)).collect()
        } else {
            levels.iter().map(|&l| self.level(l, g, false)).collect()
        };
        let mut all = Vec::new();
        for r in per {
            all.extend(r?);
        }
        all.sort();
        all.dedup();
        Ok(all)
    }
}

/// As [`find_violated_family`], with options and search statistics.
pub fn find_violated_family_with(
    y: &FractionalAssignment,
    inst: &Instance,
    delta: f64,
    opts: &OracleOptions,
) -> Result<OracleOutcome> {
    validate_delta(delta)?;
    let (under, yhat) = normalize(y, inst)?;
    let loads = y.loads(inst);
    let lambda_vertex: Vec<f64> =
        loads.iter().zip(inst.b()).map(|(&l, &b)| ratio(l, (1.0 - 4.0 * delta) * b as f64)).collect();
    let lam_v = lambda_vertex.iter().copied().fold(0.0, f64::max);
    let d3 = delta.powi(3);
    let step = d3 / 100.0;
    let g_min = 1.0 + 3.0 * delta;
    let g_max = 1.5 + 4.0 * delta * delta;
    let top = ((g_max - g_min) / step).ceil() as i64;
    let grid = |k: i64| g_min + k as f64 * step;
    let floor_idx = |x: f64| ((x - g_min) / step).floor() as i64;

    let pg = PhiGraph::build(&yhat, inst, delta);
    let total_b: u64 = pg.bsum.iter().skip(1).sum();
    let levels: Vec<u64> = (3..=max_bnorm(delta)).step_by(2).filter(|&l| l <= total_b).collect();
    let mut s = Search {
        y,
        inst,
        delta,
        pg,
        under,
        levels,
        parallel: opts.parallel,
        trees: 0,
        probes: 0,
        best: f64::NEG_INFINITY,
    };
    // sets with λ̂_U below this are never in the family
    let tau = (lam_v - d3 / 10.0) / under;

    let vertex_only = |s: &Search, exact: bool, upper: f64| -> OracleOutcome {
        let lambda = if exact { lam_v } else { lam_v.max(s.best.max(0.0) * under) };
        OracleOutcome {
            report: ViolationReport {
                lambda,
                lambda_vertex: lambda_vertex.clone(),
                family: vec![],
                lambda_exact: exact,
            },
            underlambda: under,
            lambda_hat: s.best.is_finite().then_some(s.best),
            outside_bound: upper * under,
            probes: s.probes,
            trees: s.trees,
        }
    };

    if s.levels.is_empty() {
        return Ok(vertex_only(&s, true, 0.0));
    }

    // hi: smallest grid index known to be empty (top is empty by the range bound)
    let mut hi = top;
    let mut down = 50i64;
    let mut first = true;
    loop {
        let hi_bound = grid(hi) - 0.22 * d3;
        if hi_bound <= tau {
            return Ok(vertex_only(&s, true, hi_bound));
        }
        if s.best.is_finite() && grid(hi) <= s.best + 0.95 * d3 {
            break;
        }
        if hi == 0 {
            // λ̂ < 1 + 3δ: only an upper bound on λ is available (λ̲ = 1 here)
            return Ok(vertex_only(&s, false, hi_bound));
        }
        let lo =
            if s.best.is_finite() { floor_idx(s.best + 0.22 * d3).max(0) } else { floor_idx(tau + 0.22 * d3).max(0) };
        let k = if s.best.is_finite() {
            floor_idx(s.best + 0.95 * d3)
        } else if first && opts.hint.is_some() {
            floor_idx(opts.hint.unwrap() + 0.5 * d3)
        } else if opts.hint.is_some() {
            let k = hi - down;
            down *= 2;
            k
        } else {
            (lo + hi) / 2
        };
        first = false;
        let k = k.clamp(lo, hi - 1);
        if s.probe(grid(k))? {
            continue;
        }
        hi = k;
    }

    // λ̂ ∈ [best, best + 0.73δ³)
    let upper = s.best + 0.73 * d3;
    if upper <= tau {
        return Ok(vertex_only(&s, true, upper));
    }
    let gstar = floor_idx(s.best + 0.12 * d3);
    if gstar < 0 {
        return Ok(vertex_only(&s, false, upper));
    }
    let cands = s.collect_all(grid(gstar))?;
    let mut scored = Vec::with_capacity(cands.len());
    for (m, bn) in cands {
        let lu = s.lambda_hat(&m, bn)? * under;
        scored.push((OddSet::new(m, inst)?, lu));
    }
    let (lambda, family) = decide(&scored, &lambda_vertex, y, inst, delta);
    let sets: Vec<OddSet> = family.iter().map(|(u, _)| u.clone()).collect();
    if !is_laminar(&sets) {
        return Err(Error::Invariant("oracle family is not laminar".into()));
    }
    if sets.len() > 2 * inst.n() {
        return Err(Error::Invariant(format!("family of size {} exceeds 2n", sets.len())));
    }
    let best = scored.iter().map(|x| x.1 / under).fold(s.best, f64::max);
    Ok(OracleOutcome {
        report: ViolationReport { lambda, lambda_vertex, family, lambda_exact: true },
        underlambda: under,
        lambda_hat: Some(best),
        outside_bound: lambda - d3 / 10.0,
        probes: s.probes,
        trees: s.trees,
    })
}

/// λ over vertices and candidates, then the candidates within `δ³/10` of it. Comparisons that
/// fall inside the float window are settled in exact arithmetic.
fn decide(
    scored: &[(OddSet, f64)],
    lambda_vertex: &[f64],
    y: &FractionalAssignment,
    inst: &Instance,
    delta: f64,
) -> (f64, Vec<(OddSet, f64)>) {
    let lam_f = scored.iter().map(|x| x.1).chain(lambda_vertex.iter().copied()).fold(0.0, f64::max);
    let win = EXACT_WINDOW * lam_f.max(1.0);
    let d = rational(delta);
    let exact_vertex = |v: usize| -> BigRational {
        let load: BigRational = inst.incident(v).iter().map(|&e| rational(y.get(e))).sum();
        load / perturbed_vertex_bound_exact(inst.b()[v], &d)
    };
    let exact_set = |u: &OddSet| lambda_set_exact(u.members(), u.bnorm(), y, inst, delta);
    // exact λ from every quantity close to the float maximum
    let mut lam_exact: Option<BigRational> = None;
    let mut bump = |r: BigRational| {
        if lam_exact.as_ref().map_or(true, |l| r > *l) {
            lam_exact = Some(r);
        }
    };
    for (v, &lv) in lambda_vertex.iter().enumerate() {
        if inst.b()[v] > 0 && lv >= lam_f - win {
            bump(exact_vertex(v));
        }
    }
    for (u, lu) in scored {
        if *lu >= lam_f - win {
            bump(exact_set(u));
        }
    }
    let lam_exact = lam_exact.unwrap_or_else(|| rational(0.0));
    let lambda = to_f64(&lam_exact);
    let thr_exact = &lam_exact - &d * &d * &d / BigRational::from_integer(10.into());
    let thr = to_f64(&thr_exact);
    let mut family = Vec::new();
    for (u, lu) in scored {
        let keep = if *lu > thr + win {
            true
        } else if *lu < thr - win {
            false
        } else {
            exact_set(u) >= thr_exact
        };
        if keep && *lu > 0.0 {
            family.push((u.clone(), *lu));
        }
    }
    family.sort_by(|a, b| a.0.cmp(&b.0));
    (lambda, family)
}
