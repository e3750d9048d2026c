//! Integral max-flow and the burn-in phase.
//!
//! The burn-in rate `t0` is the value of the LP
//! `min t  s.t.  sum_a x[g][a] <= t (each g),  sum_g x[g][a] >= 1 (each a)`.
//! Its optimum is always `|S| / |G'|` for some group subset `G'`, where `S`
//! is the set of arms whose groups all lie in `G'`. That makes `t0` a
//! rational with denominator at most `|G|`, which is recovered exactly so
//! `ceil(n0 * t0)` never suffers from float rounding.

use std::collections::VecDeque;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lp::{solve_lp, LpProblem, LpStatus, Sense};
use crate::structure::GroupStructure;

/// Structures with at most this many groups have `t0` cross-checked by
/// enumerating group subsets.
pub const T0_ENUMERATION_GROUPS: usize = 20;

/// Integral maximum flow by Dinic's algorithm.
///
/// Returns the flow value and the flow on each input edge (same order).
pub fn max_flow(
    num_nodes: usize,
    edges: &[(usize, usize, i64)],
    source: usize,
    sink: usize,
) -> Result<(i64, Vec<i64>)> {
    if source >= num_nodes || sink >= num_nodes {
        return Err(Error::MalformedGraph(format!(
            "source {source} or sink {sink} outside 0..{num_nodes}"
        )));
    }
    if source == sink {
        return Err(Error::MalformedGraph("source equals sink".into()));
    }
    let mut net = Dinic::new(num_nodes);
    let mut handles = Vec::with_capacity(edges.len());
    for (k, &(u, v, cap)) in edges.iter().enumerate() {
        if u >= num_nodes || v >= num_nodes {
            return Err(Error::MalformedGraph(format!("edge {k} ({u}->{v}) leaves 0..{num_nodes}")));
        }
        if cap < 0 {
            return Err(Error::MalformedGraph(format!("edge {k} has negative capacity {cap}")));
        }
        handles.push(net.add_edge(u, v, cap));
    }
    let value = net.run(source, sink);
    let flows = handles.iter().map(|&h| net.flow_on(h)).collect();
    Ok((value, flows))
}

struct Arc {
    to: usize,
    cap: i64,
    rev: usize,
}

struct Dinic {
    adj: Vec<Vec<Arc>>,
    level: Vec<i32>,
    next: Vec<usize>,
    // (node, index) of each forward arc plus its original capacity
    forward: Vec<(usize, usize, i64)>,
}

impl Dinic {
    fn new(n: usize) -> Self {
        Dinic {
            adj: (0..n).map(|_| Vec::new()).collect(),
            level: vec![0; n],
            next: vec![0; n],
            forward: Vec::new(),
        }
    }

    fn add_edge(&mut self, u: usize, v: usize, cap: i64) -> usize {
        let iu = self.adj[u].len();
        let iv = self.adj[v].len() + usize::from(u == v);
        self.adj[u].push(Arc { to: v, cap, rev: iv });
        self.adj[v].push(Arc { to: u, cap: 0, rev: iu });
        self.forward.push((u, iu, cap));
        self.forward.len() - 1
    }

    fn flow_on(&self, handle: usize) -> i64 {
        let (u, i, cap) = self.forward[handle];
        cap - self.adj[u][i].cap
    }

    fn bfs(&mut self, s: usize, t: usize) -> bool {
        self.level.iter_mut().for_each(|l| *l = -1);
        self.level[s] = 0;
        let mut queue = VecDeque::from([s]);
        while let Some(u) = queue.pop_front() {
            for arc in &self.adj[u] {
                if arc.cap > 0 && self.level[arc.to] < 0 {
                    self.level[arc.to] = self.level[u] + 1;
                    queue.push_back(arc.to);
                }
            }
        }
        self.level[t] >= 0
    }

    fn dfs(&mut self, u: usize, t: usize, pushed: i64) -> i64 {
        if u == t {
            return pushed;
        }
        while self.next[u] < self.adj[u].len() {
            let i = self.next[u];
            let (to, cap) = (self.adj[u][i].to, self.adj[u][i].cap);
            if cap > 0 && self.level[to] == self.level[u] + 1 {
                let got = self.dfs(to, t, pushed.min(cap));
                if got > 0 {
                    self.adj[u][i].cap -= got;
                    let rev = self.adj[u][i].rev;
                    self.adj[to][rev].cap += got;
                    return got;
                }
            }
            self.next[u] += 1;
        }
        0
    }

    fn run(&mut self, s: usize, t: usize) -> i64 {
        let mut total = 0i64;
        while self.bfs(s, t) {
            self.next.iter_mut().for_each(|n| *n = 0);
            loop {
                let f = self.dfs(s, t, i64::MAX);
                if f == 0 {
                    break;
                }
                total += f;
            }
        }
        total
    }
}

/// A nonnegative rational `num / den` in lowest terms.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Ratio {
    pub num: u64,
    pub den: u64,
}

impl Ratio {
    pub fn new(num: u64, den: u64) -> Self {
        assert!(den > 0);
        let g = gcd(num, den);
        Ratio {
            num: num / g,
            den: den / g,
        }
    }

    pub fn value(self) -> f64 {
        self.num as f64 / self.den as f64
    }

    /// `ceil(n * self)` in exact integer arithmetic.
    pub fn ceil_mul(self, n: u64) -> u64 {
        (n * self.num).div_ceil(self.den)
    }
}

impl fmt::Display for Ratio {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.num, self.den)
    }
}

fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a.max(1)
}

/// The burn-in LP `min t` over per-group pull fractions.
pub fn t0_lp(structure: &GroupStructure) -> LpProblem {
    // Variables: x[g][a] for a in A_g (grouped by g, ascending a), then t.
    let mut index = Vec::new();
    for g in 0..structure.num_groups() {
        for a in structure.arm_set(g).iter() {
            index.push((g, a));
        }
    }
    let nv = index.len() + 1;
    let t = index.len();
    let mut objective = vec![0.0; nv];
    objective[t] = -1.0;
    let mut lp = LpProblem::maximize(objective);
    for g in 0..structure.num_groups() {
        let mut row = vec![0.0; nv];
        for (k, &(h, _)) in index.iter().enumerate() {
            if h == g {
                row[k] = 1.0;
            }
        }
        row[t] = -1.0;
        lp.add_constraint(row, Sense::Le, 0.0);
    }
    for a in 0..structure.num_arms() {
        let mut row = vec![0.0; nv];
        for (k, &(_, b)) in index.iter().enumerate() {
            if b == a {
                row[k] = 1.0;
            }
        }
        lp.add_constraint(row, Sense::Ge, 1.0);
    }
    lp
}

/// `t0` as a float (the LP value).
pub fn compute_t0(structure: &GroupStructure) -> Result<f64> {
    Ok(burn_in_rate(structure)?.value())
}

/// `t0` as an exact rational: the LP value is snapped to the unique
/// fraction with denominator at most `|G|`, cross-checked by subset
/// enumeration on small structures.
pub fn burn_in_rate(structure: &GroupStructure) -> Result<Ratio> {
    let sol = solve_lp(&t0_lp(structure))?;
    if sol.status != LpStatus::Optimal {
        return Err(Error::Internal(format!("burn-in LP returned {:?}", sol.status)));
    }
    let t0 = -sol.value;
    let ng = structure.num_groups() as u64;
    let ratio = (1..=ng)
        .find_map(|q| {
            let p = (t0 * q as f64).round();
            ((p / q as f64 - t0).abs() < 1e-9 && p >= 1.0).then(|| Ratio::new(p as u64, q))
        })
        .ok_or_else(|| Error::Internal(format!("burn-in rate {t0} has no denominator <= {ng}")))?;
    if structure.num_groups() <= T0_ENUMERATION_GROUPS {
        let exact = crate::oracle::t0_by_enumeration(structure);
        if exact != ratio {
            return Err(Error::Internal(format!(
                "burn-in LP gives {ratio}, subset enumeration gives {exact}"
            )));
        }
    }
    Ok(ratio)
}

/// `t_min = ceil(n0 * t0)`.
pub fn t_min(structure: &GroupStructure, n0: u64) -> Result<u64> {
    Ok(burn_in_rate(structure)?.ceil_mul(n0))
}

/// A fixed burn-in schedule. Group `g` goes round-robin over its allocated
/// arms in ascending order, dropping each arm once its count is used up,
/// and starts over when the whole allocation is spent.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BurninSchedule {
    /// Number of rounds, `ceil(n0 * t0)`.
    pub length: u64,
    pub n0: u64,
    pub t0: Ratio,
    /// Per group: `(arm, count)` pairs in ascending arm order.
    pub allocation: Vec<Vec<(usize, u64)>>,
    // Lowest feasible arm, played by groups with an empty allocation.
    fallback: Vec<usize>,
}

impl BurninSchedule {
    /// The arm group `g` pulls in burn-in round `r` (0-based).
    pub fn pull(&self, r: u64, g: usize) -> usize {
        let runs = &self.allocation[g];
        let total: u64 = runs.iter().map(|&(_, c)| c).sum();
        if total == 0 {
            return self.fallback[g];
        }
        let mut pos = r % total;
        // Passes `level+1 ..= next` visit every arm whose count exceeds `level`.
        let mut level = 0;
        loop {
            let active = runs.iter().filter(|&&(_, c)| c > level).count() as u64;
            let next = runs.iter().map(|&(_, c)| c).filter(|&c| c > level).min().expect("pos < total");
            let span = (next - level) * active;
            if pos < span {
                let slot = (pos % active) as usize;
                return runs.iter().filter(|&&(_, c)| c > level).nth(slot).expect("slot < active").0;
            }
            pos -= span;
            level = next;
        }
    }

    /// All groups' pulls in round `r`.
    pub fn round(&self, r: u64) -> Vec<usize> {
        (0..self.allocation.len()).map(|g| self.pull(r, g)).collect()
    }

    /// Per-arm pull totals over the whole schedule, recounted round by round.
    pub fn arm_counts(&self, num_arms: usize) -> Vec<u64> {
        let mut counts = vec![0u64; num_arms];
        for r in 0..self.length {
            for g in 0..self.allocation.len() {
                counts[self.pull(r, g)] += 1;
            }
        }
        counts
    }
}

/// Builds a burn-in schedule of length `ceil(n0 * t0)` in which every arm is
/// pulled at least `n0` times.
pub fn burn_in_schedule(structure: &GroupStructure, n0: u64) -> Result<BurninSchedule> {
    if n0 == 0 {
        return Err(Error::InvalidArgument("n0 must be at least 1".into()));
    }
    let t0 = burn_in_rate(structure)?;
    let length = t0.ceil_mul(n0);
    let (ng, na) = (structure.num_groups(), structure.num_arms());
    // Nodes: source, groups, arms, sink.
    let (source, sink) = (0, 1 + ng + na);
    let mut edges = Vec::new();
    for g in 0..ng {
        edges.push((source, 1 + g, length as i64));
    }
    let mut group_arm = Vec::new();
    for g in 0..ng {
        for a in structure.arm_set(g).iter() {
            group_arm.push((g, a, edges.len()));
            edges.push((1 + g, 1 + ng + a, n0 as i64));
        }
    }
    for a in 0..na {
        edges.push((1 + ng + a, sink, n0 as i64));
    }
    let (value, flow) = max_flow(sink + 1, &edges, source, sink)?;
    if value != (n0 * na as u64) as i64 {
        return Err(Error::Internal(format!(
            "burn-in flow {value} does not saturate n0*|A| = {}",
            n0 * na as u64
        )));
    }
    let mut allocation = vec![Vec::new(); ng];
    for &(g, a, e) in &group_arm {
        if flow[e] > 0 {
            allocation[g].push((a, flow[e] as u64));
        }
    }
    let fallback = (0..ng)
        .map(|g| structure.arm_set(g).first().expect("groups are nonempty"))
        .collect();
    Ok(BurninSchedule {
        length,
        n0,
        t0,
        allocation,
        fallback,
    })
}
