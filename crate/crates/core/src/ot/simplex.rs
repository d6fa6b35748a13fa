//! Network simplex for the dense transportation problem.
//!
//! Sources `0..m`, sinks `m..m+n` and one artificial root. Real arcs
//! `i -> m+j` are implicit (`e = i*n + j`); every node also has a big-M
//! artificial arc to the root, which together form the initial spanning tree.
//! Entering arcs are chosen by block search; the leaving arc follows the
//! strongly-feasible rule so degenerate pivots cannot cycle.
//!
//! The spanning tree keeps parent / depth plus explicit child lists, so a pivot
//! touches only the subtree that gets re-hung.

use crate::error::{Error, Result};
use crate::matrix::Matrix;

const NONE: usize = usize::MAX;

struct Tree {
    parent: Vec<usize>,
    /// arc connecting a node to its parent
    pred: Vec<usize>,
    /// true when `pred` points from the node up to its parent
    up: Vec<bool>,
    depth: Vec<usize>,
    first_child: Vec<usize>,
    next_sibling: Vec<usize>,
    prev_sibling: Vec<usize>,
}

impl Tree {
    fn detach(&mut self, v: usize) {
        let p = self.parent[v];
        let (prev, next) = (self.prev_sibling[v], self.next_sibling[v]);
        if prev == NONE {
            self.first_child[p] = next;
        } else {
            self.next_sibling[prev] = next;
        }
        if next != NONE {
            self.prev_sibling[next] = prev;
        }
        self.prev_sibling[v] = NONE;
        self.next_sibling[v] = NONE;
    }

    fn attach(&mut self, v: usize, p: usize) {
        self.parent[v] = p;
        let head = self.first_child[p];
        self.next_sibling[v] = head;
        self.prev_sibling[v] = NONE;
        if head != NONE {
            self.prev_sibling[head] = v;
        }
        self.first_child[p] = v;
    }
}

pub(crate) struct Solution {
    pub plan: Matrix,
    pub cost: f64,
}

/// Solve `min Σ c_ij π_ij` over couplings of `supply` and `demand`.
///
/// Both marginals must be nonnegative with equal totals (up to rounding).
pub(crate) fn solve(supply: &[f64], demand: &[f64], cost: &Matrix) -> Result<Solution> {
    let m = supply.len();
    let n = demand.len();
    debug_assert_eq!(cost.rows(), m);
    debug_assert_eq!(cost.cols(), n);
    let nodes = m + n;
    let root = nodes;
    let real_arcs = m * n;
    let c = cost.as_slice();

    let max_cost = c.iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
    let art_cost = (max_cost + 1.0) * (nodes as f64 + 1.0);
    let eps = 1e-14 * art_cost;

    // flows: real arcs then artificial arcs (index real_arcs + v)
    let mut flow = vec![0.0f64; real_arcs + nodes];
    let mut pi = vec![0.0f64; nodes + 1];
    let mut tree = Tree {
        parent: vec![root; nodes + 1],
        pred: vec![NONE; nodes + 1],
        up: vec![false; nodes + 1],
        depth: vec![1; nodes + 1],
        first_child: vec![NONE; nodes + 1],
        next_sibling: vec![NONE; nodes + 1],
        prev_sibling: vec![NONE; nodes + 1],
    };
    tree.parent[root] = NONE;
    tree.depth[root] = 0;
    for v in (0..nodes).rev() {
        tree.attach(v, root);
        tree.pred[v] = real_arcs + v;
        if v < m {
            // v -> root
            tree.up[v] = true;
            flow[real_arcs + v] = supply[v];
            pi[v] = -art_cost;
        } else {
            // root -> v
            tree.up[v] = false;
            flow[real_arcs + v] = demand[v - m];
            pi[v] = art_cost;
        }
    }

    let arc_ends = |e: usize| -> (usize, usize) {
        if e < real_arcs {
            (e / n, m + e % n)
        } else {
            let v = e - real_arcs;
            if v < m {
                (v, root)
            } else {
                (root, v)
            }
        }
    };
    let arc_cost = |e: usize| -> f64 {
        if e < real_arcs {
            c[e]
        } else {
            art_cost
        }
    };

    let block = ((real_arcs as f64).sqrt().ceil() as usize).clamp(10, real_arcs.max(10));
    let mut next_arc = 0usize;
    let max_pivots = 50 * (real_arcs + nodes) + 10_000;
    let mut stack = Vec::new();
    let mut optimal = false;

    for _ in 0..max_pivots {
        // block search pricing over real arcs
        let mut best = NONE;
        let mut best_rc = -eps;
        let mut scanned = 0usize;
        let mut in_block = 0usize;
        let mut e = next_arc;
        while scanned < real_arcs {
            let i = e / n;
            let j = e - i * n;
            let rc = c[e] + pi[i] - pi[m + j];
            if rc < best_rc {
                best_rc = rc;
                best = e;
            }
            scanned += 1;
            in_block += 1;
            e += 1;
            if e == real_arcs {
                e = 0;
            }
            if in_block == block {
                if best != NONE {
                    break;
                }
                in_block = 0;
            }
        }
        next_arc = e;
        if best == NONE {
            optimal = true;
            break;
        }

        let in_arc = best;
        let (first, second) = arc_ends(in_arc);

        // join node
        let (mut a, mut b) = (first, second);
        while a != b {
            if tree.depth[a] > tree.depth[b] {
                a = tree.parent[a];
            } else if tree.depth[b] > tree.depth[a] {
                b = tree.parent[b];
            } else {
                a = tree.parent[a];
                b = tree.parent[b];
            }
        }
        let join = a;

        // leaving arc: flow travels join -> first, first -> second, second -> join
        let mut delta = f64::INFINITY;
        let mut u_out = NONE;
        let mut out_side = 0u8;
        let mut u = first;
        while u != join {
            if tree.up[u] {
                let d = flow[tree.pred[u]];
                if d < delta {
                    delta = d;
                    u_out = u;
                    out_side = 1;
                }
            }
            u = tree.parent[u];
        }
        let mut u = second;
        while u != join {
            if !tree.up[u] {
                let d = flow[tree.pred[u]];
                if d <= delta {
                    delta = d;
                    u_out = u;
                    out_side = 2;
                }
            }
            u = tree.parent[u];
        }
        if u_out == NONE {
            return Err(Error::SolverFailure("unbounded pivot cycle".into()));
        }

        if delta > 0.0 {
            flow[in_arc] += delta;
            let mut u = first;
            while u != join {
                let e = tree.pred[u];
                if tree.up[u] {
                    flow[e] -= delta;
                } else {
                    flow[e] += delta;
                }
                u = tree.parent[u];
            }
            let mut u = second;
            while u != join {
                let e = tree.pred[u];
                if tree.up[u] {
                    flow[e] += delta;
                } else {
                    flow[e] -= delta;
                }
                u = tree.parent[u];
            }
        }
        flow[tree.pred[u_out]] = 0.0;

        // re-hang the subtree rooted at u_out from the entering arc
        let (u_in, v_in, in_up) = if out_side == 1 {
            (first, second, true)
        } else {
            (second, first, false)
        };
        let mut path = Vec::new();
        let mut x = u_in;
        loop {
            path.push(x);
            if x == u_out {
                break;
            }
            x = tree.parent[x];
        }
        // detach everything along the path from its parent, top down
        for &x in path.iter().rev() {
            tree.detach(x);
        }
        // reverse parent pointers along the path
        let mut carried_pred = in_arc;
        let mut carried_up = in_up;
        let mut new_parent = v_in;
        for &x in &path {
            let old_pred = tree.pred[x];
            let old_up = tree.up[x];
            tree.pred[x] = carried_pred;
            tree.up[x] = carried_up;
            tree.attach(x, new_parent);
            carried_pred = old_pred;
            carried_up = !old_up;
            new_parent = x;
        }

        // potentials and depths of the re-hung subtree
        let (s, t) = arc_ends(in_arc);
        let rc = arc_cost(in_arc) + pi[s] - pi[t];
        let shift = if u_in == s { -rc } else { rc };
        stack.clear();
        stack.push(u_in);
        while let Some(x) = stack.pop() {
            pi[x] += shift;
            tree.depth[x] = tree.depth[tree.parent[x]] + 1;
            let mut ch = tree.first_child[x];
            while ch != NONE {
                stack.push(ch);
                ch = tree.next_sibling[ch];
            }
        }
    }

    if !optimal {
        return Err(Error::SolverFailure(format!("no optimum after {max_pivots} pivots")));
    }
    let total_supply: f64 = supply.iter().sum();
    let residual: f64 = flow[real_arcs..].iter().map(|f| f.abs()).sum();
    if residual > 1e-9 * total_supply.max(1.0) {
        return Err(Error::SolverFailure(format!(
            "artificial arcs still carry {residual:e} after pivoting"
        )));
    }

    let mut plan = Matrix::from_vec(m, n, flow[..real_arcs].to_vec());
    let mut total = 0.0;
    for i in 0..m {
        for j in 0..n {
            let f = plan.get(i, j);
            if f < 0.0 {
                plan.set(i, j, 0.0);
            } else {
                total += f * cost.get(i, j);
            }
        }
    }
    Ok(Solution { plan, cost: total })
}
