//! Exact oracles for a single block.
//!
//! [`exact_solve`] sends `n * m` units of flow from a source through `m` row
//! nodes and `m` column nodes to a sink; every row/column arc has capacity
//! one and cost `-round(|W_ij| * 1e9)`, so a min-cost flow is an optimal
//! transposable mask. [`brute_force`] is an independent branch-and-bound
//! enumeration for `m <= 8`.

use rayon::prelude::*;

use crate::block::{block_objective, BlockBatch, SparsityPattern};
use crate::error::{Error, Result};

/// Integer scaling applied to magnitudes before the flow solve.
pub const COST_SCALE: f64 = 1e9;
/// Largest block side accepted by [`exact_solve`].
pub const MAX_EXACT_SIDE: usize = 512;
/// Largest block side accepted by [`brute_force`].
pub const MAX_BRUTE_SIDE: usize = 8;

#[derive(Debug, Clone, PartialEq)]
pub struct ExactSolution {
    pub mask: Vec<u8>,
    pub objective: f64,
}

/// Residual graph for successive shortest paths with node potentials.
struct FlowNetwork {
    head: Vec<Vec<usize>>,
    to: Vec<usize>,
    cap: Vec<i64>,
    cost: Vec<i64>,
}

impl FlowNetwork {
    fn new(nodes: usize) -> Self {
        Self { head: vec![Vec::new(); nodes], to: Vec::new(), cap: Vec::new(), cost: Vec::new() }
    }

    fn add_arc(&mut self, from: usize, to: usize, cap: i64, cost: i64) -> usize {
        let id = self.to.len();
        self.head[from].push(id);
        self.to.push(to);
        self.cap.push(cap);
        self.cost.push(cost);
        self.head[to].push(id + 1);
        self.to.push(from);
        self.cap.push(0);
        self.cost.push(-cost);
        id
    }

    /// Pushes `amount` units from `source` to `sink`. `potential` must make
    /// every residual reduced cost non-negative on entry.
    fn min_cost_flow(&mut self, source: usize, sink: usize, amount: i64, potential: &mut [i64]) -> Result<()> {
        let nodes = self.head.len();
        let mut pushed = 0;
        let mut dist = vec![i64::MAX; nodes];
        let mut parent = vec![usize::MAX; nodes];
        let mut done = vec![false; nodes];
        while pushed < amount {
            dist.fill(i64::MAX);
            parent.fill(usize::MAX);
            done.fill(false);
            dist[source] = 0;
            // Dense Dijkstra: the graph is nearly complete bipartite.
            loop {
                let mut u = usize::MAX;
                for v in 0..nodes {
                    if !done[v] && dist[v] != i64::MAX && (u == usize::MAX || dist[v] < dist[u]) {
                        u = v;
                    }
                }
                if u == usize::MAX {
                    break;
                }
                done[u] = true;
                for &e in &self.head[u] {
                    if self.cap[e] <= 0 {
                        continue;
                    }
                    let v = self.to[e];
                    let reduced = self.cost[e] + potential[u] - potential[v];
                    debug_assert!(reduced >= 0, "negative reduced cost");
                    let nd = dist[u] + reduced;
                    if nd < dist[v] {
                        dist[v] = nd;
                        parent[v] = e;
                    }
                }
            }
            if dist[sink] == i64::MAX {
                return Err(Error::Numerical("flow network has no augmenting path".into()));
            }
            let cap_dist = dist[sink];
            for v in 0..nodes {
                potential[v] += dist[v].min(cap_dist);
            }
            let mut bottleneck = amount - pushed;
            let mut v = sink;
            while v != source {
                let e = parent[v];
                bottleneck = bottleneck.min(self.cap[e]);
                v = self.to[e ^ 1];
            }
            let mut v = sink;
            while v != source {
                let e = parent[v];
                self.cap[e] -= bottleneck;
                self.cap[e ^ 1] += bottleneck;
                v = self.to[e ^ 1];
            }
            pushed += bottleneck;
        }
        Ok(())
    }
}

fn check_block(block: &[f64], m: usize, pattern: SparsityPattern) -> Result<()> {
    if pattern.m() != m || block.len() != m * m {
        return Err(Error::Shape(format!("{} values for a {pattern} block of side {m}", block.len())));
    }
    if block.iter().any(|w| !w.is_finite()) {
        return Err(Error::Numerical("non-finite block entry".into()));
    }
    Ok(())
}

/// The lexicographically smallest feasible mask (row-major, 0 < 1): each
/// row takes its forced columns plus the rightmost columns still needing ones.
pub fn lex_smallest_mask(m: usize, n: usize) -> Vec<u8> {
    let mut need = vec![n; m];
    let mut mask = vec![0u8; m * m];
    for i in 0..m {
        let rows_left = m - i;
        let mut take = 0;
        for j in 0..m {
            if need[j] == rows_left {
                mask[i * m + j] = 1;
                take += 1;
            }
        }
        for j in (0..m).rev() {
            if take == n {
                break;
            }
            if mask[i * m + j] == 0 && need[j] > 0 {
                mask[i * m + j] = 1;
                take += 1;
            }
        }
        for j in 0..m {
            need[j] -= mask[i * m + j] as usize;
        }
    }
    mask
}

pub fn exact_solve(block: &[f64], m: usize, pattern: SparsityPattern) -> Result<ExactSolution> {
    check_block(block, m, pattern)?;
    if m > MAX_EXACT_SIDE {
        return Err(Error::Size { m, limit: MAX_EXACT_SIDE });
    }
    let n = pattern.n();
    let max = block.iter().fold(0.0_f64, |a, w| a.max(w.abs()));
    if max == 0.0 {
        return Ok(ExactSolution { mask: lex_smallest_mask(m, n), objective: 0.0 });
    }
    if max * COST_SCALE > (i64::MAX / 8) as f64 / (m * m) as f64 {
        return Err(Error::Scale { value: max });
    }

    let (source, sink) = (0, 2 * m + 1);
    let row = |i: usize| 1 + i;
    let col = |j: usize| 1 + m + j;
    let mut net = FlowNetwork::new(2 * m + 2);
    for i in 0..m {
        net.add_arc(source, row(i), n as i64, 0);
    }
    let mut cell_arcs = Vec::with_capacity(m * m);
    let mut costs = Vec::with_capacity(m * m);
    for i in 0..m {
        for j in 0..m {
            let c = -(block[i * m + j].abs() * COST_SCALE).round() as i64;
            costs.push(c);
            cell_arcs.push(net.add_arc(row(i), col(j), 1, c));
        }
    }
    for j in 0..m {
        net.add_arc(col(j), sink, n as i64, 0);
    }

    // Shortest distances in the initial DAG make all reduced costs >= 0.
    let mut potential = vec![0i64; 2 * m + 2];
    for j in 0..m {
        potential[col(j)] = (0..m).map(|i| costs[i * m + j]).min().unwrap_or(0);
    }
    potential[sink] = (0..m).map(|j| potential[col(j)]).min().unwrap_or(0);

    net.min_cost_flow(source, sink, (n * m) as i64, &mut potential)?;

    let mask: Vec<u8> = cell_arcs.iter().map(|&e| u8::from(net.cap[e] == 0)).collect();
    let objective = block.iter().zip(&mask).filter(|(_, &s)| s == 1).map(|(w, _)| w.abs()).sum();
    Ok(ExactSolution { mask, objective })
}

/// [`exact_solve`] on every block, in parallel, results in block order.
pub fn exact_solve_batch(batch: &BlockBatch, pattern: SparsityPattern) -> Result<Vec<ExactSolution>> {
    let m = batch.m();
    batch.par_blocks().map(|b| exact_solve(b, m, pattern)).collect()
}

/// All `n`-element subsets of `0..m` as bitmasks.
fn subsets(m: usize, n: usize) -> Vec<u16> {
    (0u32..(1 << m)).filter(|s| s.count_ones() as usize == n).map(|s| s as u16).collect()
}

struct BranchAndBound<'a> {
    w: &'a [f64],
    m: usize,
    n: usize,
    subsets: Vec<u16>,
    counts: Vec<usize>,
    chosen: Vec<u16>,
    best: f64,
    best_rows: Vec<u16>,
}

impl BranchAndBound<'_> {
    fn row_value(&self, i: usize, set: u16) -> f64 {
        (0..self.m).filter(|j| set >> j & 1 == 1).map(|j| self.w[i * self.m + j]).sum()
    }

    /// Admissible bound on rows `from..m`: the smaller of the row-wise and
    /// column-wise relaxations given the current column counts.
    fn bound(&self, from: usize) -> f64 {
        let (m, n) = (self.m, self.n);
        let mut buf = Vec::with_capacity(m);
        let mut by_rows = 0.0;
        for i in from..m {
            buf.clear();
            buf.extend((0..m).filter(|&j| self.counts[j] < n).map(|j| self.w[i * m + j]));
            buf.sort_by(|a, b| b.total_cmp(a));
            by_rows += buf.iter().take(n).sum::<f64>();
        }
        let mut by_cols = 0.0;
        for j in 0..m {
            buf.clear();
            buf.extend((from..m).map(|i| self.w[i * m + j]));
            buf.sort_by(|a, b| b.total_cmp(a));
            by_cols += buf.iter().take(n - self.counts[j]).sum::<f64>();
        }
        by_rows.min(by_cols)
    }

    fn search(&mut self, i: usize, value: f64) {
        let (m, n) = (self.m, self.n);
        if i == m {
            if value > self.best {
                self.best = value;
                self.best_rows = self.chosen.clone();
            }
            return;
        }
        if value + self.bound(i) <= self.best {
            return;
        }
        let rows_after = m - i - 1;
        let mut options: Vec<(u16, f64)> = self
            .subsets
            .iter()
            .filter(|&&s| {
                (0..m).all(|j| {
                    let c = self.counts[j] + (s >> j & 1) as usize;
                    c <= n && n - c <= rows_after
                })
            })
            .map(|&s| (s, self.row_value(i, s)))
            .collect();
        options.sort_by(|a, b| b.1.total_cmp(&a.1));
        for (set, v) in options {
            for j in 0..m {
                self.counts[j] += (set >> j & 1) as usize;
            }
            self.chosen.push(set);
            self.search(i + 1, value + v);
            self.chosen.pop();
            for j in 0..m {
                self.counts[j] -= (set >> j & 1) as usize;
            }
        }
    }
}

/// Exhaustive optimum by row-wise search over `n`-subsets with column-count
/// and bound pruning. Only for `m <= 8`.
pub fn brute_force(block: &[f64], m: usize, pattern: SparsityPattern) -> Result<ExactSolution> {
    check_block(block, m, pattern)?;
    if m > MAX_BRUTE_SIDE {
        return Err(Error::Size { m, limit: MAX_BRUTE_SIDE });
    }
    let w: Vec<f64> = block.iter().map(|v| v.abs()).collect();
    let mut bb = BranchAndBound {
        w: &w,
        m,
        n: pattern.n(),
        subsets: subsets(m, pattern.n()),
        counts: vec![0; m],
        chosen: Vec::with_capacity(m),
        best: f64::NEG_INFINITY,
        best_rows: Vec::new(),
    };
    bb.search(0, 0.0);
    let mut mask = vec![0u8; m * m];
    for (i, set) in bb.best_rows.iter().enumerate() {
        for j in 0..m {
            mask[i * m + j] = (set >> j & 1) as u8;
        }
    }
    let objective = block_objective(&w, &mask);
    Ok(ExactSolution { mask, objective })
}

/// Number of `m x m` 0/1 matrices with every row and column summing to `n`.
pub fn count_feasible(pattern: SparsityPattern) -> Result<u64> {
    let (m, n) = (pattern.m(), pattern.n());
    if m > MAX_BRUTE_SIDE {
        return Err(Error::Size { m, limit: MAX_BRUTE_SIDE });
    }
    fn go(i: usize, m: usize, n: usize, sets: &[u16], counts: &mut [usize]) -> u64 {
        if i == m {
            return 1;
        }
        let rows_after = m - i - 1;
        let mut total = 0;
        for &s in sets {
            let ok = (0..m).all(|j| {
                let c = counts[j] + (s >> j & 1) as usize;
                c <= n && n - c <= rows_after
            });
            if !ok {
                continue;
            }
            for (j, c) in counts.iter_mut().enumerate() {
                *c += (s >> j & 1) as usize;
            }
            total += go(i + 1, m, n, sets, counts);
            for (j, c) in counts.iter_mut().enumerate() {
                *c -= (s >> j & 1) as usize;
            }
        }
        total
    }
    Ok(go(0, m, n, &subsets(m, n), &mut vec![0; m]))
}

/// `(optimal - candidate) / optimal`; an all-zero optimum is degenerate.
pub fn relative_error(candidate: f64, optimal: f64) -> Result<f64> {
    if optimal == 0.0 {
        return Err(Error::Degenerate("optimal objective is zero"));
    }
    Ok((optimal - candidate) / optimal)
}

/// [`relative_error`] with degenerate blocks scored as zero error.
pub fn relative_error_or_zero(candidate: f64, optimal: f64) -> f64 {
    relative_error(candidate, optimal).unwrap_or(0.0)
}
