//! Low cut trees on integer multigraphs and the maximal odd-set collection built on them.

use std::collections::VecDeque;

/// Undirected multigraph stored as a dense symmetric multiplicity matrix.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Multigraph {
    n: usize,
    mult: Vec<u64>,
}

impl Multigraph {
    pub fn new(n: usize) -> Self {
        Self { n, mult: vec![0; n * n] }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Adds `k` parallel copies of `{u, v}`; loops are ignored.
    pub fn add_edges(&mut self, u: usize, v: usize, k: u64) {
        if u != v && k > 0 {
            self.mult[u * self.n + v] += k;
            self.mult[v * self.n + u] += k;
        }
    }

    pub fn multiplicity(&self, u: usize, v: usize) -> u64 {
        self.mult[u * self.n + v]
    }

    pub fn degree(&self, u: usize) -> u64 {
        self.mult[u * self.n..(u + 1) * self.n].iter().sum()
    }

    /// Number of edges leaving `set` (given as a membership mask).
    pub fn cut_value(&self, in_set: &[bool]) -> u64 {
        let mut c = 0;
        for u in (0..self.n).filter(|&u| in_set[u]) {
            for v in (0..self.n).filter(|&v| !in_set[v]) {
                c += self.multiplicity(u, v);
            }
        }
        c
    }

    /// Contracts vertex groups: `group[v]` is the new id of `v`, ids `0..k`.
    pub fn contract(&self, group: &[usize], k: usize) -> Self {
        let mut g = Self::new(k);
        for u in 0..self.n {
            for v in u + 1..self.n {
                let m = self.multiplicity(u, v);
                if m > 0 {
                    g.add_edges(group[u], group[v], m);
                }
            }
        }
        g
    }

    fn neighbours(&self) -> Vec<Vec<usize>> {
        (0..self.n).map(|u| (0..self.n).filter(|&v| self.multiplicity(u, v) > 0).collect()).collect()
    }
}

/// Minimum `s`–`t` cut value and a minimizing side containing `s` (as a membership mask).
pub fn min_cut(g: &Multigraph, s: usize, t: usize) -> (u64, Vec<bool>) {
    assert!(s != t && s < g.n && t < g.n, "min_cut needs two distinct vertices");
    Dinic::new(g).run(s, t)
}

struct Dinic {
    n: usize,
    res: Vec<i64>,
    adj: Vec<Vec<usize>>,
    level: Vec<i32>,
    it: Vec<usize>,
}

impl Dinic {
    fn new(g: &Multigraph) -> Self {
        Self {
            n: g.n,
            res: g.mult.iter().map(|&m| m as i64).collect(),
            adj: g.neighbours(),
            level: vec![-1; g.n],
            it: vec![0; g.n],
        }
    }

    fn bfs(&mut self, s: usize) {
        self.level.fill(-1);
        self.level[s] = 0;
        let mut q = VecDeque::from([s]);
        while let Some(u) = q.pop_front() {
            for &v in &self.adj[u] {
                if self.level[v] < 0 && self.res[u * self.n + v] > 0 {
                    self.level[v] = self.level[u] + 1;
                    q.push_back(v);
                }
            }
        }
    }

    fn dfs(&mut self, u: usize, t: usize, f: i64) -> i64 {
        if u == t {
            return f;
        }
        while self.it[u] < self.adj[u].len() {
            let v = self.adj[u][self.it[u]];
            let r = self.res[u * self.n + v];
            if r > 0 && self.level[v] == self.level[u] + 1 {
                let d = self.dfs(v, t, f.min(r));
                if d > 0 {
                    self.res[u * self.n + v] -= d;
                    self.res[v * self.n + u] += d;
                    return d;
                }
            }
            self.it[u] += 1;
        }
        0
    }

    fn run(mut self, s: usize, t: usize) -> (u64, Vec<bool>) {
        let mut flow = 0i64;
        loop {
            self.bfs(s);
            if self.level[t] < 0 {
                break;
            }
            self.it.fill(0);
            loop {
                let f = self.dfs(s, t, i64::MAX);
                if f == 0 {
                    break;
                }
                flow += f;
            }
        }
        let side = self.level.iter().map(|&l| l >= 0).collect();
        (flow as u64, side)
    }
}

/// Tree whose nodes partition the vertices; every edge has weight ≤ κ.
#[derive(Clone, Debug)]
pub struct CutTree {
    pub nodes: Vec<Vec<usize>>,
    pub node_of: Vec<usize>,
    /// `(node_a, node_b, weight)`.
    pub edges: Vec<(usize, usize, u64)>,
    pub kappa: u64,
}

impl CutTree {
    /// Minimum edge weight on the tree path between the nodes of `u` and `v`, or `κ + 1` when
    /// they share a node.
    pub fn path_min(&self, u: usize, v: usize) -> u64 {
        let (a, b) = (self.node_of[u], self.node_of[v]);
        if a == b {
            return self.kappa + 1;
        }
        let k = self.nodes.len();
        let mut adj = vec![Vec::new(); k];
        for &(x, y, w) in &self.edges {
            adj[x].push((y, w));
            adj[y].push((x, w));
        }
        let mut best = vec![None; k];
        best[a] = Some(u64::MAX);
        let mut stack = vec![a];
        while let Some(x) = stack.pop() {
            for &(y, w) in &adj[x] {
                if best[y].is_none() {
                    best[y] = Some(best[x].unwrap().min(w));
                    stack.push(y);
                }
            }
        }
        best[b].expect("tree is connected")
    }
}

/// Gusfield's cut-tree construction: `parent[v]`, `weight[v]` for `v ≥ 1`, rooted at 0, where
/// removing `(v, parent[v])` splits the vertices along a minimum `v`–`parent[v]` cut.
pub fn gomory_hu(g: &Multigraph) -> (Vec<usize>, Vec<u64>) {
    let n = g.n;
    let mut p = vec![0usize; n];
    let mut fl = vec![0u64; n];
    for s in 1..n {
        let t = p[s];
        let (f, side) = min_cut(g, s, t);
        fl[s] = f;
        for i in 0..n {
            if i != s && side[i] && p[i] == t {
                p[i] = s;
            }
        }
        if side[p[t]] {
            p[s] = p[t];
            p[t] = s;
            fl[s] = fl[t];
            fl[t] = f;
        }
    }
    (p, fl)
}

/// Cut tree representing all pairwise minimum cuts of value at most `kappa`.
pub fn build_low_cut_tree(g: &Multigraph, kappa: u64) -> CutTree {
    let n = g.n;
    if n == 0 {
        return CutTree { nodes: vec![], node_of: vec![], edges: vec![], kappa };
    }
    let (p, fl) = gomory_hu(g);
    // union across heavy edges
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
    for v in 1..n {
        if fl[v] > kappa {
            let (a, b) = (find(&mut uf, v), find(&mut uf, p[v]));
            uf[a.max(b)] = a.min(b);
        }
    }
    let mut node_of = vec![usize::MAX; n];
    let mut nodes: Vec<Vec<usize>> = Vec::new();
    for v in 0..n {
        let r = find(&mut uf, v);
        if node_of[r] == usize::MAX {
            node_of[r] = nodes.len();
            nodes.push(Vec::new());
        }
        node_of[v] = node_of[r];
        nodes[node_of[v]].push(v);
    }
    let edges = (1..n).filter(|&v| fl[v] <= kappa).map(|v| (node_of[v], node_of[p[v]], fl[v])).collect();
    CutTree { nodes, node_of, edges, kappa }
}

/// Result of the maximal odd-set collection procedure.
#[derive(Clone, Debug, Default)]
pub struct Collection {
    /// Disjoint vertex sets, each sorted, ordered by smallest member.
    pub sets: Vec<Vec<usize>>,
    /// Rounds of tree building that found at least one set.
    pub rounds: usize,
    /// Candidates whose recomputed cut exceeded κ (never expected).
    pub rejected: usize,
}

/// Maximal collection of disjoint odd sets avoiding `root` with cut ≤ `kappa`.
///
/// Parity counts `parity[v]` per vertex; `root`'s own value is replaced by a duplicity of 1 or 2
/// that makes the total even. Found sets are merged into the root and the tree is rebuilt until
/// a round finds nothing.
pub fn maximal_oddset_collection(g: &Multigraph, kappa: u64, root: usize, parity: &[u64]) -> Collection {
    maximal_oddset_collection_limited(g, kappa, root, parity, usize::MAX)
}

/// As [`maximal_oddset_collection`] but stops after `max_rounds` rounds (one round answers
/// "does any such set exist").
pub fn maximal_oddset_collection_limited(
    g: &Multigraph,
    kappa: u64,
    root: usize,
    parity: &[u64],
    max_rounds: usize,
) -> Collection {
    let n = g.n;
    let mut merged = vec![false; n];
    merged[root] = true;
    let mut out = Collection::default();
    while out.rounds < max_rounds {
        // contract the root group to id 0, everything else keeps its order
        let mut group = vec![0usize; n];
        let mut back = vec![usize::MAX];
        for v in 0..n {
            if !merged[v] {
                group[v] = back.len();
                back.push(v);
            }
        }
        let k = back.len();
        if k == 1 {
            break;
        }
        let h = g.contract(&group, k);
        let outside: u64 = (0..n).filter(|&v| !merged[v]).map(|v| parity[v]).sum();
        let dup = if outside % 2 == 1 { 1 } else { 2 };
        let par: Vec<u64> = (0..k).map(|x| if x == 0 { dup } else { parity[back[x]] }).collect();
        let tree = build_low_cut_tree(&h, kappa);
        let picks = topmost_odd_subtrees(&tree, &par);
        let mut found = Vec::new();
        for nodes in picks {
            let mut set: Vec<usize> = nodes.iter().flat_map(|&t| tree.nodes[t].iter().map(|&x| back[x])).collect();
            set.sort_unstable();
            let mut mask = vec![false; n];
            for &v in &set {
                mask[v] = true;
            }
            if g.cut_value(&mask) <= kappa {
                found.push(set);
            } else {
                out.rejected += 1;
            }
        }
        if found.is_empty() {
            break;
        }
        out.rounds += 1;
        for s in &found {
            for &v in s {
                merged[v] = true;
            }
        }
        out.sets.extend(found);
    }
    out.sets.sort();
    out
}

/// Orients the tree towards the node holding vertex 0 and returns, for every topmost tree edge
/// with odd descendant parity, the list of tree nodes below it.
fn topmost_odd_subtrees(tree: &CutTree, parity: &[u64]) -> Vec<Vec<usize>> {
    let k = tree.nodes.len();
    let mut adj = vec![Vec::new(); k];
    for &(a, b, _) in &tree.edges {
        adj[a].push(b);
        adj[b].push(a);
    }
    for a in &mut adj {
        a.sort_by_key(|&t| tree.nodes[t][0]);
    }
    let r = tree.node_of[0];
    let mut parent = vec![usize::MAX; k];
    let mut order = vec![r];
    parent[r] = r;
    let mut i = 0;
    while i < order.len() {
        let x = order[i];
        i += 1;
        for &y in &adj[x] {
            if parent[y] == usize::MAX {
                parent[y] = x;
                order.push(y);
            }
        }
    }
    let mut sum: Vec<u64> = tree.nodes.iter().map(|ns| ns.iter().map(|&v| parity[v]).sum()).collect();
    for &x in order.iter().rev() {
        if x != r {
            sum[parent[x]] += sum[x];
        }
    }
    let mut picks = Vec::new();
    let mut stack = vec![r];
    while let Some(x) = stack.pop() {
        for &y in adj[x].iter().rev() {
            if parent[y] != x {
                continue;
            }
            if sum[y] % 2 == 1 {
                let mut sub = Vec::new();
                let mut st = vec![y];
                while let Some(z) = st.pop() {
                    sub.push(z);
                    st.extend(adj[z].iter().copied().filter(|&c| parent[c] == z && c != z));
                }
                picks.push(sub);
            } else {
                stack.push(y);
            }
        }
    }
    picks
}
