//! Acceptance suite: one PASS/FAIL line per criterion on stdout (bypassing test capture), then
//! an assertion so that a failing criterion fails the test.

mod common;

use std::io::Write;
use std::sync::OnceLock;

use bmatch::cut_tree::{build_low_cut_tree, gomory_hu, maximal_oddset_collection, Multigraph};
use bmatch::fptas_cap::{check_cap_feasibility, solve_cap_with, unperturb_cap, CapSolution, LongInstance};
use bmatch::fptas_uncap::{solve_with, Solution, LAMBDA0};
use bmatch::graph_core::{
    check_lp1_feasibility, is_laminar, perturbed_oddset_bound, perturbed_vertex_bound, to_f64, OddSet,
};
use bmatch::greedy::{
    arrival_order, greedy_capacitated, greedy_uncapacitated, iterated_greedy_rounds, iterated_rounds,
};
use bmatch::mwu::{iteration_bound, IterationView, SolverConfig};
use bmatch::oddset_oracle::find_violated_family;
use bmatch::reference_oracles::{
    brute_force_bmatching, brute_force_violated_oddsets, enumerate_small_oddsets, max_bnorm, search_space,
    SEARCH_SPACE_LIMIT,
};
use bmatch::rounding::{round_cap, round_uncap};
use bmatch::{Edge, FractionalAssignment, Instance};
use common::*;
use rand::Rng;
use rayon::prelude::*;

fn report(id: u32, name: &str, ok: bool, detail: String) {
    let line = format!("{} {id:>2} {name}: {detail}\n", if ok { "PASS" } else { "FAIL" });
    let mut out = std::io::stdout().lock();
    let _ = out.write_all(line.as_bytes());
    let _ = out.flush();
    assert!(ok, "criterion {id} failed: {detail}");
}

fn opt(inst: &Instance) -> f64 {
    brute_force_bmatching(inst).unwrap().optimum_f64()
}

fn without_caps(inst: &Instance) -> Instance {
    let edges = inst.edges().iter().map(|e| Edge { c: 0, ..*e }).collect();
    Instance::new(inst.b().to_vec(), edges, false).unwrap()
}

/// Worst `got/want` with `want = 0` counted as 1.
fn worst(pairs: impl IntoIterator<Item = (f64, f64)>) -> f64 {
    pairs.into_iter().map(|(got, want)| if want > 0.0 { got / want } else { 1.0 }).fold(f64::INFINITY, f64::min)
}

struct UncapCase {
    inst: Instance,
    sol: Solution,
    beta_star: f64,
}

/// Shared by the fractional, rounding and accounting criteria.
fn uncap_cases() -> &'static [UncapCase] {
    static CASES: OnceLock<Vec<UncapCase>> = OnceLock::new();
    CASES.get_or_init(|| {
        (0..200u64)
            .into_par_iter()
            .map(|k| {
                let mut r = rng(1000 + k);
                let inst = guarded_instance(&mut r, 12, 30, 4, false);
                let sol = solve_with(&inst, DELTA, &SolverConfig::default(), &mut |_| {}).unwrap();
                let beta_star = opt(&inst);
                UncapCase { inst, sol, beta_star }
            })
            .collect()
    })
}

struct CapCase {
    inst: Instance,
    sol: CapSolution,
    beta_star: f64,
    /// Largest `y_e / c_e − 1` and saturation failures over all recorded iterates.
    cap_excess: f64,
    unsaturated: usize,
    iterates: u64,
}

fn run_cap(inst: Instance) -> CapCase {
    let li = LongInstance::new(&inst).unwrap();
    let mut cap_excess = f64::NEG_INFINITY;
    let mut unsaturated = 0;
    let mut iterates = 0;
    let mut observe = |v: &IterationView| {
        for y in [v.y, v.y_next] {
            iterates += 1;
            let ys = li.yshort(y);
            for (e, edge) in inst.edges().iter().enumerate() {
                cap_excess = cap_excess.max(ys.get(e) - edge.c as f64 * (1.0 + 1e-9));
            }
            if li.check_saturation(y).is_err() {
                unsaturated += 1;
            }
        }
    };
    let sol = solve_cap_with(&inst, DELTA, &SolverConfig::default(), &mut observe).unwrap();
    let beta_star = opt(&inst);
    CapCase { inst, sol, beta_star, cap_excess, unsaturated, iterates }
}

fn cap_cases() -> &'static [CapCase] {
    static CASES: OnceLock<Vec<CapCase>> = OnceLock::new();
    CASES.get_or_init(|| {
        (0..100u64)
            .into_par_iter()
            .map(|k| {
                let mut r = rng(2000 + k);
                run_cap(guarded_instance(&mut r, 8, 14, 4, true))
            })
            .collect()
    })
}

#[test]
fn c01_fractional_uncapacitated_quality() {
    let cases = uncap_cases();
    let infeasible = cases.iter().filter(|c| check_lp1_feasibility(&c.sol.y, &c.inst).unwrap().is_some()).count();
    let ratio = worst(cases.iter().map(|c| (c.sol.stats.objective, c.beta_star)));
    let ok = cases.len() >= 200 && infeasible == 0 && ratio >= 1.0 - 14.0 * DELTA;
    report(
        1,
        "fractional uncapacitated quality",
        ok,
        format!(
            "{} instances, {infeasible} infeasible, worst objective/β* = {ratio:.4} (need ≥ {})",
            cases.len(),
            1.0 - 14.0 * DELTA
        ),
    );
}

#[test]
fn c02_oracle_exactness() {
    let results: Vec<Option<(bool, bool)>> = (0..1200u64)
        .into_par_iter()
        .map(|k| {
            let mut r = rng(3000 + k);
            let n = r.gen_range(3..=12);
            let m = r.gen_range(n - 1..=(n * (n - 1) / 2).min(30));
            let inst = random_instance(&mut r, n, m, 1, 4, 10, false);
            let scale = r.gen_range(0.9..1.8);
            let y = if r.gen_bool(0.5) {
                odd_heavy_assignment(&mut r, &inst, scale)
            } else {
                random_assignment(&mut r, &inst, scale)
            };
            let brute = brute_force_violated_oddsets(&y, &inst, DELTA).unwrap();
            if to_f64(&brute.lambda) <= 1.0 + 8.0 * DELTA {
                return None;
            }
            let rep = find_violated_family(&y, &inst, DELTA).unwrap();
            let got: Vec<OddSet> = rep.family.into_iter().map(|x| x.0).collect();
            let want: Vec<OddSet> = brute.family.into_iter().map(|x| x.0).collect();
            Some((got == want, is_laminar(&got)))
        })
        .collect();
    let checked: Vec<(bool, bool)> = results.into_iter().flatten().collect();
    let mismatched = checked.iter().filter(|x| !x.0).count();
    let non_laminar = checked.iter().filter(|x| !x.1).count();
    let ok = checked.len() >= 200 && mismatched == 0 && non_laminar == 0;
    report(
        2,
        "oracle exactness",
        ok,
        format!(
            "{} pairs with λ > 1+8δ, {mismatched} family mismatches, {non_laminar} non-laminar families",
            checked.len()
        ),
    );
}

#[test]
fn c03_greedy_ratios() {
    let rows: Vec<(f64, f64, f64, f64)> = (0..500u64)
        .into_par_iter()
        .map(|k| {
            let mut r = rng(4000 + k);
            let (inst, plain) = loop {
                let inst = guarded_instance(&mut r, 8, 14, 4, true);
                let plain = without_caps(&inst);
                if search_space(&plain) <= SEARCH_SPACE_LIMIT {
                    break (inst, plain);
                }
            };
            let order = arrival_order(inst.m(), None);
            let w = inst.weights();
            let gc = greedy_capacitated(&inst, &w, &order).value(&w);
            let gu = greedy_uncapacitated(&plain, &w, &order).value(&w);
            (gc, opt(&inst), gu, opt(&plain))
        })
        .collect();
    let cap = worst(rows.iter().map(|r| (r.0, r.1)));
    let uncap = worst(rows.iter().map(|r| (r.2, r.3)));
    let tri = Instance::new(
        vec![1, 1, 1],
        [(0, 1), (1, 2), (0, 2)].map(|(i, j)| Edge { i, j, w: 1.0, c: 0 }).to_vec(),
        false,
    )
    .unwrap();
    let half = FractionalAssignment::from_vec(vec![0.5; 3]);
    let tri_greedy = greedy_uncapacitated(&tri, &tri.weights(), &[0, 1, 2]).value(&tri.weights());
    let relaxation_ok = half.loads(&tri).iter().all(|&l| l <= 1.0) && half.dot(&tri.weights()) == 1.5;
    let ok = rows.len() >= 500 && cap >= 1.0 / 7.0 && uncap >= 1.0 / 6.0 && tri_greedy == 1.0 && relaxation_ok;
    report(
        3,
        "greedy ratios",
        ok,
        format!("{} instances, worst capacitated {cap:.4} (need ≥ 1/7), worst uncapacitated {uncap:.4} (need ≥ 1/6), triangle greedy {tri_greedy} vs relaxation 1.5", rows.len()),
    );
}

#[test]
fn c04_iterated_greedy() {
    let rounds = iterated_rounds(DELTA);
    let rows: Vec<(f64, f64, f64)> = (0..200u64)
        .into_par_iter()
        .map(|k| {
            let mut r = rng(5000 + k);
            let inst = guarded_instance(&mut r, 8, 14, 4, true);
            let c: Vec<f64> = inst.edges().iter().map(|e| e.c as f64).collect();
            let w = inst.weights();
            let it = iterated_greedy_rounds(&inst, &c, &w, &arrival_order(inst.m(), None), rounds);
            let bs = opt(&inst);
            // worst value slack over q = 1..rounds (cumulative value is flat after an early stop)
            let slack = (1..=rounds)
                .map(|q| {
                    let v = it.values[(q - 1).min(it.values.len() - 1)];
                    v - (1.0 - (6.0f64 / 7.0).powi(q as i32)) * bs + 1e-9 * bs.max(1.0)
                })
                .fold(f64::INFINITY, f64::min);
            let load_bound = 7.0 * (2.0 / DELTA).ln();
            let load =
                it.y.loads(&inst)
                    .iter()
                    .zip(inst.b())
                    .map(|(&l, &b)| l - load_bound * b as f64)
                    .fold(f64::NEG_INFINITY, f64::max);
            let cap =
                it.y.values().iter().zip(&c).map(|(&y, &c)| y - c * (1.0 + 1e-12)).fold(f64::NEG_INFINITY, f64::max);
            (slack, load, cap)
        })
        .collect();
    let value_fail = rows.iter().filter(|r| r.0 < 0.0).count();
    let load_fail = rows.iter().filter(|r| r.1 > 0.0).count();
    let cap_fail = rows.iter().filter(|r| r.2 > 0.0).count();
    let ok = rows.len() >= 200 && value_fail + load_fail + cap_fail == 0;
    report(
        4,
        "iterated greedy",
        ok,
        format!(
            "{} instances, {rounds} rounds, {value_fail} value, {load_fail} load, {cap_fail} edge-capacity failures",
            rows.len()
        ),
    );
}

#[test]
fn c05_rounding() {
    let cases = uncap_cases();
    let rows: Vec<(bool, bool, f64, f64, f64)> = cases
        .par_iter()
        .map(|c| {
            let w = c.inst.weights();
            let r = round_uncap(&c.sol.y, &c.inst, DELTA).unwrap();
            let feasible = check_lp1_feasibility(&r.y, &c.inst).unwrap().is_none();
            (r.y.is_integral(), feasible, r.y.dot(&w), c.sol.y.dot(&w), c.beta_star)
        })
        .collect();
    let bad = rows.iter().filter(|r| !r.0 || !r.1).count();
    let round_ratio = worst(rows.iter().map(|r| (r.2, r.3)));
    let end_ratio = worst(rows.iter().map(|r| (r.2, r.4)));
    let ok = rows.len() >= 200 && bad == 0 && round_ratio >= 1.0 - 2.0 * DELTA && end_ratio >= 1.0 - 16.0 * DELTA;
    report(
        5,
        "rounding",
        ok,
        format!(
            "{} inputs, {bad} non-integral or infeasible, worst rounded/wᵀy = {round_ratio:.4} (need ≥ {}), worst integral/β* = {end_ratio:.4} (need ≥ {})",
            rows.len(),
            1.0 - 2.0 * DELTA,
            1.0 - 16.0 * DELTA
        ),
    );
}

#[test]
fn c06_capacitated_pipeline() {
    let cases = cap_cases();
    let cap_excess = cases.iter().map(|c| c.cap_excess).fold(f64::NEG_INFINITY, f64::max);
    let unsaturated: usize = cases.iter().map(|c| c.unsaturated).sum();
    let iterates: u64 = cases.iter().map(|c| c.iterates).sum();
    let infeasible = cases.iter().filter(|c| check_cap_feasibility(&c.sol.y, &c.inst).unwrap().is_some()).count();
    let frac = worst(cases.iter().map(|c| (c.sol.stats.engine.objective, c.beta_star)));
    let ints: Vec<(bool, f64, f64)> = cases
        .par_iter()
        .map(|c| {
            let r = round_cap(&c.sol.y, &c.inst, DELTA, c.sol.stats.r as f64).unwrap();
            let good = r.y.is_integral() && check_cap_feasibility(&r.y, &c.inst).unwrap().is_none();
            (good, r.y.dot(&c.inst.weights()), c.beta_star)
        })
        .collect();
    let int_bad = ints.iter().filter(|x| !x.0).count();
    let int = worst(ints.iter().map(|x| (x.1, x.2)));
    // runs with an empty support satisfy the ledger bound trivially
    let ledger = worst(
        cases
            .iter()
            .filter(|c| c.sol.stats.support_weight_ledger > 0.0)
            .map(|c| (14.0 * c.sol.stats.r as f64 * c.beta_star, c.sol.stats.support_weight_ledger)),
    );
    let ok = cases.len() >= 100
        && cap_excess <= 0.0
        && unsaturated == 0
        && infeasible == 0
        && frac >= 1.0 - 14.0 * DELTA
        && int_bad == 0
        && int >= 1.0 - 16.0 * DELTA
        && ledger >= 1.0;
    report(
        6,
        "capacitated pipeline",
        ok,
        format!(
            "{} instances, {iterates} iterates with {unsaturated} unsaturated and max y−c excess {:.1e}, {infeasible} infeasible, worst fractional/β* = {frac:.4} (need ≥ {}), {int_bad} bad integral, worst integral/β* = {int:.4} (need ≥ {}), worst 14Rβ*/ledger = {ledger:.2} (need ≥ 1)",
            cases.len(),
            cap_excess.max(0.0),
            1.0 - 14.0 * DELTA,
            1.0 - 16.0 * DELTA
        ),
    );
}

/// `ln Σ e^{αλ_ℓ}` over every vertex and every small odd set.
fn log_potential(y: &FractionalAssignment, inst: &Instance, sets: &[OddSet], alpha: f64) -> f64 {
    let loads = y.loads(inst);
    let terms: Vec<f64> = (0..inst.n())
        .map(|v| alpha * loads[v] / perturbed_vertex_bound(inst.b()[v], DELTA).unwrap())
        .chain(sets.iter().map(|u| alpha * u.inside(y, inst) / perturbed_oddset_bound(u.bnorm(), DELTA).unwrap()))
        .collect();
    lse(&terms)
}

fn lse(xs: &[f64]) -> f64 {
    let m = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !m.is_finite() {
        return m;
    }
    m + xs.iter().map(|x| (x - m).exp()).sum::<f64>().ln()
}

struct Audit {
    updates: u64,
    /// Updates where the enumerated potential did not strictly decrease.
    potential_up: u64,
    /// Largest `ln(tail) − ln(δγ/λ₀)` seen.
    tail_excess: f64,
    within_bound: bool,
    lambdas_decrease: bool,
}

/// Solves a small uncapacitated instance while auditing every update exhaustively.
fn audit(inst: &Instance) -> Audit {
    let sets = enumerate_small_oddsets(inst, max_bnorm(DELTA)).unwrap();
    let mut updates = 0;
    let mut potential_up = 0;
    let mut tail_excess = f64::NEG_INFINITY;
    let mut observe = |v: &IterationView| {
        updates += 1;
        if log_potential(v.y_next, inst, &sets, v.alpha) >= log_potential(v.y, inst, &sets, v.alpha) {
            potential_up += 1;
        }
        // constraints without dual weight: vertices with zero weight, odd sets outside the weighted family
        let loads = v.y.loads(inst);
        let mut dropped: Vec<f64> = (0..inst.n())
            .filter(|&i| v.duals.vertex[i] == 0.0)
            .map(|i| v.alpha * loads[i] / perturbed_vertex_bound(inst.b()[i], DELTA).unwrap())
            .collect();
        for u in &sets {
            if !v.duals.sets.iter().any(|(s, _)| s == u) {
                dropped.push(v.alpha * u.inside(v.y, inst) / perturbed_oddset_bound(u.bnorm(), DELTA).unwrap());
            }
        }
        let log_gamma = v.duals.gamma.ln() + v.duals.shift;
        tail_excess = tail_excess.max(lse(&dropped) - (DELTA.ln() + log_gamma - LAMBDA0.ln()));
    };
    let sol = solve_with(inst, DELTA, &SolverConfig::default(), &mut observe).unwrap();
    let s = &sol.stats;
    Audit {
        updates,
        potential_up,
        tail_excess,
        within_bound: s.iterations <= iteration_bound(inst.n(), DELTA, s.alpha, s.lambda0),
        lambdas_decrease: s.phase_lambdas.windows(2).all(|w| w[1] < w[0]),
    }
}

fn audited_cases() -> &'static [Audit] {
    static CASES: OnceLock<Vec<Audit>> = OnceLock::new();
    CASES.get_or_init(|| {
        (0..60u64)
            .into_par_iter()
            .map(|k| {
                let mut r = rng(6000 + k);
                let n = r.gen_range(3..=10);
                let m = r.gen_range(n - 1..=(n * (n - 1) / 2).min(20));
                audit(&random_instance(&mut r, n, m, 1, 4, 10, false))
            })
            .collect()
    })
}

#[test]
fn c07_convergence_accounting() {
    let audits = audited_cases();
    let mut runs = 0;
    let mut over = 0;
    let mut not_decreasing = 0;
    for c in uncap_cases() {
        let s = &c.sol.stats;
        runs += 1;
        over += usize::from(s.iterations > iteration_bound(c.inst.n(), DELTA, s.alpha, s.lambda0));
        not_decreasing += usize::from(!s.phase_lambdas.windows(2).all(|w| w[1] < w[0]));
    }
    for c in cap_cases() {
        let s = &c.sol.stats.engine;
        let n = LongInstance::new(&c.inst).unwrap().long().n();
        runs += 1;
        over += usize::from(s.iterations > iteration_bound(n, DELTA, s.alpha, s.lambda0));
        not_decreasing += usize::from(!s.phase_lambdas.windows(2).all(|w| w[1] < w[0]));
    }
    for a in audits {
        runs += 1;
        over += usize::from(!a.within_bound);
        not_decreasing += usize::from(!a.lambdas_decrease);
    }
    let updates: u64 = audits.iter().map(|a| a.updates).sum();
    let potential_up: u64 = audits.iter().map(|a| a.potential_up).sum();
    let ok = over == 0 && not_decreasing == 0 && potential_up == 0 && updates > 0;
    report(
        7,
        "convergence accounting",
        ok,
        format!(
            "{runs} runs, {over} over the iteration bound, {not_decreasing} with non-decreasing phase λ, {potential_up} of {updates} audited updates (n ≤ 10) without potential decrease"
        ),
    );
}

#[test]
fn c08_thresholding_tail() {
    let audits = audited_cases();
    let updates: u64 = audits.iter().map(|a| a.updates).sum();
    let excess = audits.iter().map(|a| a.tail_excess).fold(f64::NEG_INFINITY, f64::max);
    let ok = updates > 0 && excess <= 0.0;
    report(
        8,
        "thresholding tail",
        ok,
        format!(
            "{} runs (n ≤ 10), {updates} iterations, max ln(tail) − ln(δγ/λ₀) = {excess:.2} (need ≤ 0)",
            audits.len()
        ),
    );
}

fn random_multigraph(r: &mut rand_chacha::ChaCha8Rng, n: usize) -> Multigraph {
    let mut g = Multigraph::new(n);
    let p = r.gen_range(0.2..0.8);
    for u in 0..n {
        for v in u + 1..n {
            if r.gen_bool(p) {
                g.add_edges(u, v, r.gen_range(1..=4));
            }
        }
    }
    g
}

/// Minimum cut of every vertex pair, by enumeration of all cuts.
fn all_pairs_brute(g: &Multigraph) -> Vec<Vec<u64>> {
    let n = g.n();
    let mut best = vec![vec![u64::MAX; n]; n];
    for mask in 1u32..(1 << n) - 1 {
        let side: Vec<bool> = (0..n).map(|v| mask >> v & 1 == 1).collect();
        let cut = g.cut_value(&side);
        for u in 0..n {
            for v in u + 1..n {
                if side[u] != side[v] && cut < best[u][v] {
                    best[u][v] = cut;
                }
            }
        }
    }
    best
}

#[test]
fn c09_cut_trees() {
    let rows: Vec<(usize, usize, bool)> = (0..200u64)
        .into_par_iter()
        .map(|k| {
            let mut r = rng(7000 + k);
            let n = r.gen_range(2..=12);
            let g = random_multigraph(&mut r, n);
            let kappa = r.gen_range(0..=10);
            let exact = all_pairs_brute(&g);
            let tree = build_low_cut_tree(&g, kappa);
            let (parent, weight) = gomory_hu(&g);
            let mut bad = 0;
            for u in 0..n {
                for v in u + 1..n {
                    bad += usize::from(tree.path_min(u, v) != exact[u][v].min(kappa + 1));
                    bad += usize::from(gh_path_min(&parent, &weight, u, v) != exact[u][v]);
                }
            }

            // maximal collections on graphs with n ≤ 10
            let n = r.gen_range(2..=10);
            let g = random_multigraph(&mut r, n);
            let kappa = r.gen_range(0..=8);
            let parity: Vec<u64> = (0..n).map(|_| r.gen_range(0..=4)).collect();
            let c = maximal_oddset_collection(&g, kappa, 0, &parity);
            let mut taken = vec![false; n];
            taken[0] = true;
            let mut valid = true;
            for s in &c.sets {
                let mut side = vec![false; n];
                for &v in s {
                    valid &= !taken[v];
                    taken[v] = true;
                    side[v] = true;
                }
                valid &= s.iter().map(|&v| parity[v]).sum::<u64>() % 2 == 1 && g.cut_value(&side) <= kappa;
            }
            let free: Vec<usize> = (0..n).filter(|&v| !taken[v]).collect();
            let mut missed = 0;
            for mask in 1u32..(1 << free.len()) {
                let members: Vec<usize> = (0..free.len()).filter(|k| mask >> k & 1 == 1).map(|k| free[k]).collect();
                if members.iter().map(|&v| parity[v]).sum::<u64>() % 2 == 1 {
                    let mut side = vec![false; n];
                    members.iter().for_each(|&v| side[v] = true);
                    missed += usize::from(g.cut_value(&side) <= kappa);
                }
            }
            let round_cap = (n as f64).log2().ceil() as usize + 1;
            (bad, missed + usize::from(!valid), c.rounds <= round_cap)
        })
        .collect();
    let pair_bad: usize = rows.iter().map(|r| r.0).sum();
    let coll_bad: usize = rows.iter().map(|r| r.1).sum();
    let rounds_bad = rows.iter().filter(|r| !r.2).count();
    let ok = pair_bad == 0 && coll_bad == 0 && rounds_bad == 0;
    report(
        9,
        "cut trees",
        ok,
        format!(
            "{} multigraphs (n ≤ 12), {pair_bad} pair disagreements; {} collections (n ≤ 10), {coll_bad} invalid or non-maximal, {rounds_bad} over ⌈log₂ n⌉+1 rounds",
            rows.len(),
            rows.len()
        ),
    );
}

/// Minimum weight on the tree path between `u` and `v` of a parent-array cut tree.
fn gh_path_min(parent: &[usize], weight: &[u64], u: usize, v: usize) -> u64 {
    let up = |mut x: usize| {
        let mut path = vec![(x, u64::MAX)];
        let mut m = u64::MAX;
        while x != 0 {
            m = m.min(weight[x]);
            x = parent[x];
            path.push((x, m));
        }
        path
    };
    let (a, b) = (up(u), up(v));
    // the first common entry is the lowest common ancestor
    a.iter().find_map(|&(x, ma)| b.iter().find(|&&(y, _)| y == x).map(|&(_, mb)| ma.min(mb))).unwrap()
}

#[test]
fn c10_transform_identities() {
    let mut r = rng(8000);
    let mut mismatches = 0;
    for _ in 0..500 {
        let n = r.gen_range(2..=8);
        let m = r.gen_range(1..=(n * (n - 1) / 2).min(14));
        let inst = random_instance(&mut r, n, m, 1, 5, 10, true);
        let li = LongInstance::new(&inst).unwrap();
        let y = FractionalAssignment::from_vec(inst.edges().iter().map(|e| r.gen::<f64>() * e.c as f64).collect());
        let back = li.yshort(&li.ylong(&y).unwrap());
        mismatches += usize::from(back != y);
    }
    let rows: Vec<(bool, bool)> = (0..60u64)
        .into_par_iter()
        .map(|k| {
            let mut r = rng(8100 + k);
            let n = r.gen_range(3..=5);
            let m = r.gen_range(n - 1..=(n * (n - 1) / 2).min(6));
            let inst = random_instance(&mut r, n, m, 1, 4, 10, true);
            let li = LongInstance::new(&inst).unwrap();
            let sol = solve_cap_with(&inst, DELTA, &SolverConfig::default(), &mut |_| {}).unwrap();
            let y = unperturb_cap(&li, &sol.y_long, DELTA).unwrap();
            let feasible = check_lp1_feasibility(&y, li.long()).unwrap().is_none();
            (feasible, li.check_saturation(&y).is_ok())
        })
        .collect();
    let infeasible = rows.iter().filter(|x| !x.0).count();
    let unsaturated = rows.iter().filter(|x| !x.1).count();
    let ok = mismatches == 0 && infeasible == 0 && unsaturated == 0;
    report(
        10,
        "transform identities",
        ok,
        format!(
            "500 assignments, {mismatches} round-trip mismatches; {} unperturbed long solutions (long n ≤ 17), {infeasible} infeasible, {unsaturated} unsaturated",
            rows.len()
        ),
    );
}
