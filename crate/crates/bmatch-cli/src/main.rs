use std::fmt;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use bmatch::fptas_cap::{check_cap_feasibility, solve_cap_with, LongInstance};
use bmatch::fptas_uncap::solve_with;
use bmatch::graph_core::{check_lp1_feasibility, validate_delta};
use bmatch::greedy::{arrival_order, greedy_capacitated, greedy_uncapacitated};
use bmatch::mwu::{SolveStats, SolverConfig};
use bmatch::oddset_oracle::find_violated_family;
use bmatch::reference_oracles::brute_force_bmatching;
use bmatch::report::{parse_assignment, to_canonical_json, FamilyEntry, RoundingSummary, RunReport};
use bmatch::rounding::{round_cap, round_uncap, Rounded};
use bmatch::{Error, FractionalAssignment, Instance, ViolationReport};

/// Approximate maximum-weight (capacitated) b-matching.
#[derive(Parser)]
#[command(name = "bmatch", version)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Solve an instance, fractionally or integrally.
    Solve(SolveArgs),
    /// Exact optimum by exhaustive enumeration (small instances only).
    Oracle(OracleArgs),
    /// Round a fractional assignment from a previous report.
    RoundOnly(RoundArgs),
}

#[derive(Args)]
struct Common {
    /// Instance file in the `p bm` format.
    #[arg(long)]
    input: PathBuf,
    /// Enforce edge capacities (the instance must carry them).
    #[arg(long)]
    capacitated: bool,
    /// Write the report here instead of stdout.
    #[arg(long)]
    report: Option<PathBuf>,
    /// Include wall-clock time in the report (breaks byte-identical output).
    #[arg(long)]
    timing: bool,
}

#[derive(Args)]
struct SolveArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long, default_value_t = 0.0625)]
    delta: f64,
    #[arg(long, value_enum, default_value_t = Mode::Frac)]
    mode: Mode,
    #[arg(long, value_enum, default_value_t = Verify::Off)]
    verify: Verify,
    #[arg(long, value_enum, default_value_t = Algo::Fptas)]
    algo: Algo,
    /// Lower the iteration cap below the proven bound.
    #[arg(long)]
    max_iters: Option<u64>,
    /// Permute the greedy arrival order deterministically.
    #[arg(long)]
    shuffle_seed: Option<u64>,
    /// Add the final odd-set family to the report.
    #[arg(long)]
    dump_family: bool,
    /// Worker threads for the odd-set oracle.
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Args)]
struct OracleArgs {
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct RoundArgs {
    #[command(flatten)]
    common: Common,
    /// Report (or bare `[[i, j, y], ...]` array) holding the fractional assignment.
    #[arg(long)]
    assignment: PathBuf,
    #[arg(long, default_value_t = 0.0625)]
    delta: f64,
    #[arg(long, value_enum, default_value_t = Verify::Off)]
    verify: Verify,
    /// Pass count of the fractional solve (capacitated accuracy bookkeeping only).
    #[arg(long, default_value_t = 1)]
    passes: u64,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Mode {
    Frac,
    Int,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Verify {
    Exhaustive,
    Off,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Algo {
    Fptas,
    Greedy,
}

enum Failure {
    Lib(Error),
    Io(String),
    Verify(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter) -> fmt::Result {
        match self {
            Failure::Lib(e) => write!(f, "{e}"),
            Failure::Io(s) => write!(f, "{s}"),
            Failure::Verify(s) => write!(f, "verification failed: {s}"),
        }
    }
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Lib(Error::Parse { .. }) => 2,
            Failure::Lib(Error::DeltaOutOfRange(_)) => 3,
            Failure::Lib(Error::IterationCap { .. } | Error::BetaExhausted(_)) => 4,
            Failure::Verify(_) => 5,
            _ => 1,
        }
    }
}

fn load(c: &Common) -> Result<Instance, Failure> {
    let inst = Instance::from_path(&c.input)?;
    if c.capacitated && !inst.capacitated() {
        return Err(
            Error::Parse { line: 0, msg: "--capacitated needs an instance with `p bm <n> <m> cap`".into() }.into()
        );
    }
    if !c.capacitated && inst.capacitated() {
        eprintln!("warning: edge capacities ignored without --capacitated");
        return Ok(Instance::new(inst.b().to_vec(), inst.edges().to_vec(), false)?);
    }
    Ok(inst)
}

fn check_delta(delta: f64, n: usize) -> Result<(), Failure> {
    validate_delta(delta).map_err(|_| {
        eprintln!("hint: choose delta in (0, 0.0625], e.g. --delta 0.0625");
        Error::DeltaOutOfRange(delta)
    })?;
    let floor = 1.0 / (5.0 * n.max(1) as f64).sqrt();
    if delta < floor {
        eprintln!("warning: delta below 1/sqrt(5n) = {floor:.4}; running times grow quickly");
    }
    Ok(())
}

fn write_report<T: Serialize>(value: &T, path: Option<&Path>) -> Result<(), Failure> {
    let text = to_canonical_json(value)?;
    match path {
        Some(p) => std::fs::write(p, text).map_err(|e| Failure::Io(format!("cannot write {}: {e}", p.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

/// Empty string when feasible, otherwise the violated constraint.
fn feasibility(y: &FractionalAssignment, inst: &Instance, integral: bool) -> Result<String, Failure> {
    let v = if inst.capacitated() { check_cap_feasibility(y, inst)? } else { check_lp1_feasibility(y, inst)? };
    Ok(match v {
        Some(v) => format!("{v:?}"),
        None if integral && !y.is_integral() => "output is not integral".into(),
        None => String::new(),
    })
}

/// Fills the verdict, optimum and ratio fields; returns the violation, if any.
fn verify(rep: &mut RunReport, y: &FractionalAssignment, inst: &Instance, integral: bool) -> Result<String, Failure> {
    let bad = feasibility(y, inst, integral)?;
    let opt = brute_force_bmatching(inst)?.optimum_f64();
    rep.oracle_optimum = Some(opt);
    rep.ratio = Some(if opt > 0.0 { rep.objective / opt } else { 1.0 });
    rep.feasibility_verdict = if bad.is_empty() { "pass" } else { "fail" }.into();
    Ok(bad)
}

fn family_entries(r: &ViolationReport) -> Vec<FamilyEntry> {
    r.family
        .iter()
        .map(|(u, lambda)| FamilyEntry {
            members: u.members().iter().map(|v| v + 1).collect(),
            bnorm: u.bnorm(),
            lambda: *lambda,
        })
        .collect()
}

fn rounding_summary(r: &Rounded) -> RoundingSummary {
    let t = &r.trace;
    RoundingSummary {
        t: t.t,
        heavy_copies: t.m0.iter().sum(),
        split_vertices: t.owner.len() - t.b1.len(),
        gadget_vertices: t.g3_vertices,
        gadget_edges: t.g3_edges,
        epsilon: t.epsilon,
    }
}

fn fill_stats(rep: &mut RunReport, s: &SolveStats) {
    rep.beta_final = s.beta_final;
    rep.lambda_final = s.lambda_final;
    rep.iterations = s.iterations;
    rep.phases = s.phases;
    rep.superphases = s.superphases;
    rep.oracle_invocations = s.oracle_invocations;
    rep.passes = s.passes;
    rep.family_size_max = s.family_size_max;
}

fn finish(
    mut rep: RunReport,
    y: &FractionalAssignment,
    inst: &Instance,
    verify_mode: Verify,
    integral: bool,
    start: Instant,
    common: &Common,
) -> Result<(), Failure> {
    rep.assignment = y.triples(inst).into_iter().map(|(i, j, v)| (i + 1, j + 1, v)).collect();
    rep.feasibility_verdict = "skipped".into();
    let bad = if verify_mode == Verify::Exhaustive { verify(&mut rep, y, inst, integral)? } else { String::new() };
    if common.timing {
        rep.wall_time = Some(start.elapsed().as_secs_f64());
    }
    write_report(&rep, common.report.as_deref())?;
    if bad.is_empty() {
        Ok(())
    } else {
        Err(Failure::Verify(bad))
    }
}

fn solve(a: &SolveArgs) -> Result<(), Failure> {
    let start = Instant::now();
    let inst = load(&a.common)?;
    check_delta(a.delta, inst.n())?;
    if let Some(t) = a.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build_global()
            .map_err(|e| Failure::Io(format!("cannot start thread pool: {e}")))?;
    }
    let cfg = SolverConfig {
        max_iters: a.max_iters,
        shuffle_seed: a.shuffle_seed,
        parallel: a.threads.is_some_and(|t| t > 1),
        ..Default::default()
    };
    let cap = inst.capacitated();
    let mut rep = RunReport {
        mode: if a.mode == Mode::Int { "int" } else { "frac" }.into(),
        capacitated: cap,
        delta: a.delta,
        ..Default::default()
    };
    let mut family = None;
    let mut passes = 1;
    let y = match a.algo {
        Algo::Greedy => {
            let order = arrival_order(inst.m(), a.shuffle_seed);
            let g = if cap {
                greedy_capacitated(&inst, &inst.weights(), &order)
            } else {
                greedy_uncapacitated(&inst, &inst.weights(), &order)
            };
            rep.passes = 1;
            if a.dump_family {
                family = Some(find_violated_family(&g.y, &inst, a.delta)?);
            }
            g.y
        }
        Algo::Fptas if cap => {
            let s = solve_cap_with(&inst, a.delta, &cfg, &mut |_| {})?;
            fill_stats(&mut rep, &s.stats.engine);
            rep.support_weight_ledger = Some(s.stats.support_weight_ledger);
            rep.r = Some(s.stats.r);
            passes = s.stats.r;
            if a.dump_family {
                let li = LongInstance::new(&inst)?;
                family = Some(find_violated_family(&s.y_long, li.long(), a.delta)?);
            }
            s.y
        }
        Algo::Fptas => {
            let s = solve_with(&inst, a.delta, &cfg, &mut |_| {})?;
            fill_stats(&mut rep, &s.stats);
            if a.dump_family {
                family = Some(find_violated_family(&s.y_perturbed, &inst, a.delta)?);
            }
            s.y
        }
    };
    rep.family = family.as_ref().map(family_entries);
    let frac = y.dot(&inst.weights());
    let y = if a.mode == Mode::Int {
        let r = if cap { round_cap(&y, &inst, a.delta, passes as f64)? } else { round_uncap(&y, &inst, a.delta)? };
        rep.fractional_objective = Some(frac);
        rep.rounding = Some(rounding_summary(&r));
        r.y
    } else {
        y
    };
    rep.objective = y.dot(&inst.weights());
    finish(rep, &y, &inst, a.verify, a.mode == Mode::Int, start, &a.common)
}

#[derive(Serialize)]
struct OracleReport {
    mode: &'static str,
    capacitated: bool,
    optimum: f64,
    nodes: u64,
    assignment: Vec<(usize, usize, f64)>,
    #[serde(skip_serializing_if = "Option::is_none")]
    wall_time: Option<f64>,
}

fn oracle(a: &OracleArgs) -> Result<(), Failure> {
    let start = Instant::now();
    let inst = load(&a.common)?;
    let r = brute_force_bmatching(&inst)?;
    let rep = OracleReport {
        mode: "oracle",
        capacitated: inst.capacitated(),
        optimum: r.optimum_f64(),
        nodes: r.nodes,
        assignment: r.assignment.triples(&inst).into_iter().map(|(i, j, v)| (i + 1, j + 1, v)).collect(),
        wall_time: a.common.timing.then(|| start.elapsed().as_secs_f64()),
    };
    write_report(&rep, a.common.report.as_deref())
}

fn round_only(a: &RoundArgs) -> Result<(), Failure> {
    let start = Instant::now();
    let inst = load(&a.common)?;
    check_delta(a.delta, inst.n())?;
    let text = std::fs::read_to_string(&a.assignment)
        .map_err(|e| Error::Parse { line: 0, msg: format!("cannot read {}: {e}", a.assignment.display()) })?;
    let triples: Vec<(usize, usize, f64)> = parse_assignment(&text)?
        .into_iter()
        .map(|(i, j, v)| {
            if i == 0 || j == 0 {
                Err(Error::Parse { line: 0, msg: "assignment vertex ids are 1-based".into() })
            } else {
                Ok((i - 1, j - 1, v))
            }
        })
        .collect::<Result<_, _>>()?;
    let y = FractionalAssignment::from_triples(&inst, &triples)
        .map_err(|e| Error::Parse { line: 0, msg: e.to_string() })?;
    let r = if inst.capacitated() {
        round_cap(&y, &inst, a.delta, a.passes as f64)?
    } else {
        round_uncap(&y, &inst, a.delta)?
    };
    let rep = RunReport {
        mode: "int".into(),
        capacitated: inst.capacitated(),
        delta: a.delta,
        objective: r.y.dot(&inst.weights()),
        fractional_objective: Some(y.dot(&inst.weights())),
        rounding: Some(rounding_summary(&r)),
        ..Default::default()
    };
    finish(rep, &r.y, &inst, a.verify, true, start, &a.common)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let res = match &cli.cmd {
        Cmd::Solve(a) => solve(a),
        Cmd::Oracle(a) => oracle(a),
        Cmd::RoundOnly(a) => round_only(a),
    };
    match res {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code())
        }
    }
}
