//! Random instance and assignment generators shared by the integration tests.
#![allow(dead_code)]

use bmatch::reference_oracles::{search_space, SEARCH_SPACE_LIMIT};
use bmatch::{Edge, FractionalAssignment, Instance};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const DELTA: f64 = 1.0 / 16.0;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random simple graph with `n` vertices and up to `m` edges, `b ∈ [bmin, bmax]`, `w ∈ 1..=wmax`.
pub fn random_instance(r: &mut ChaCha8Rng, n: usize, m: usize, bmin: u64, bmax: u64, wmax: u32, cap: bool) -> Instance {
    let mut pairs: Vec<(usize, usize)> = (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).collect();
    pairs.shuffle(r);
    pairs.truncate(m);
    let b: Vec<u64> = (0..n).map(|_| r.gen_range(bmin..=bmax)).collect();
    let edges = pairs
        .into_iter()
        .map(|(i, j)| {
            let w = r.gen_range(1..=wmax) as f64;
            let c = if cap { r.gen_range(0..=b[i].min(b[j])) } else { 0 };
            Edge { i, j, w, c }
        })
        .collect();
    Instance::new(b, edges, cap).unwrap()
}

/// Random instance whose brute-force search space fits the oracle guard.
pub fn guarded_instance(r: &mut ChaCha8Rng, nmax: usize, mmax: usize, bmax: u64, cap: bool) -> Instance {
    loop {
        let n = r.gen_range(3..=nmax);
        let m = r.gen_range(n.saturating_sub(1).max(1)..=mmax.min(n * (n - 1) / 2));
        let inst = random_instance(r, n, m, 1, bmax, 10, cap);
        if search_space(&inst) <= SEARCH_SPACE_LIMIT {
            return inst;
        }
    }
}

/// Random nonnegative y with loads around `scale · b`.
pub fn random_assignment(r: &mut ChaCha8Rng, inst: &Instance, scale: f64) -> FractionalAssignment {
    let mut y: Vec<f64> = (0..inst.m()).map(|_| if r.gen_bool(0.3) { 0.0 } else { r.gen::<f64>() }).collect();
    let loads = FractionalAssignment::from_vec(y.clone()).loads(inst);
    for (e, edge) in inst.edges().iter().enumerate() {
        let lim = (inst.b()[edge.i] as f64 / loads[edge.i].max(1e-12))
            .min(inst.b()[edge.j] as f64 / loads[edge.j].max(1e-12));
        y[e] *= lim * scale;
    }
    FractionalAssignment::from_vec(y)
}

/// Assignment concentrating mass on a few odd cycles (half-integral style), scaled.
pub fn odd_heavy_assignment(r: &mut ChaCha8Rng, inst: &Instance, scale: f64) -> FractionalAssignment {
    let mut y = vec![0.0; inst.m()];
    let mut loads = vec![0.0; inst.n()];
    let mut order: Vec<usize> = (0..inst.m()).collect();
    order.shuffle(r);
    for e in order {
        let edge = inst.edge(e);
        let room = (inst.b()[edge.i] as f64 - loads[edge.i]).min(inst.b()[edge.j] as f64 - loads[edge.j]);
        if room <= 0.0 {
            continue;
        }
        let v = (room * r.gen_range(0.3..=1.0) * 2.0).round() / 2.0;
        y[e] = v.min(room);
        loads[edge.i] += y[e];
        loads[edge.j] += y[e];
    }
    FractionalAssignment::from_vec(y.into_iter().map(|v| v * scale * r.gen_range(0.97..=1.0)).collect())
}
