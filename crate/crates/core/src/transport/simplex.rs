//! Primal network simplex for the dense transportation problem.
//!
//! Supply nodes `0..nx`, demand nodes `nx..nx+ny`, and an artificial root.
//! Every node starts attached to the root by an artificial arc carrying its
//! full supply or demand; only the `nx * ny` real arcs are ever priced.
//! Entering arcs come from a cyclic block search; the leaving arc follows the
//! strongly-feasible-tree rule, which rules out cycling on degenerate pivots.

use crate::error::{Error, Result};

const NONE: usize = usize::MAX;

pub(crate) struct SimplexOutput {
    /// Flow on every real arc, row-major.
    pub flow: Vec<f64>,
    /// Node potentials; reduced cost of arc i→j is `c_ij + pot[i] - pot[nx + j]`.
    pub pot: Vec<f64>,
    pub pivots: usize,
}

struct Tree {
    nx: usize,
    ny: usize,
    parent: Vec<usize>,
    pred: Vec<usize>,
    /// `pred[v]` is directed from `v` towards its parent.
    pred_up: Vec<bool>,
    depth: Vec<usize>,
    pot: Vec<f64>,
    adj: Vec<Vec<usize>>,
    order: Vec<usize>,
}

impl Tree {
    fn real_arcs(&self) -> usize {
        self.nx * self.ny
    }

    fn root(&self) -> usize {
        self.nx + self.ny
    }

    fn endpoints(&self, arc: usize) -> (usize, usize) {
        let m = self.real_arcs();
        if arc < m {
            (arc / self.ny, self.nx + arc % self.ny)
        } else {
            let u = arc - m;
            if u < self.nx {
                (u, self.root())
            } else {
                (self.root(), u)
            }
        }
    }

    fn remove_adj(&mut self, node: usize, arc: usize) {
        let list = &mut self.adj[node];
        if let Some(p) = list.iter().position(|&a| a == arc) {
            list.swap_remove(p);
        }
    }

    /// Recomputes parent pointers, depths and potentials from the root.
    fn rebuild(&mut self, cost: &dyn Fn(usize) -> f64) {
        let root = self.root();
        self.parent[root] = NONE;
        self.pred[root] = NONE;
        self.depth[root] = 0;
        self.pot[root] = 0.0;
        self.order.clear();
        self.order.push(root);
        let mut head = 0;
        while head < self.order.len() {
            let u = self.order[head];
            head += 1;
            for k in 0..self.adj[u].len() {
                let arc = self.adj[u][k];
                if arc == self.pred[u] {
                    continue;
                }
                let (s, t) = self.endpoints(arc);
                let (v, up) = if s == u { (t, false) } else { (s, true) };
                self.parent[v] = u;
                self.pred[v] = arc;
                self.pred_up[v] = up;
                self.depth[v] = self.depth[u] + 1;
                // tree arcs have zero reduced cost: c + pot[s] - pot[t] = 0
                let c = cost(arc);
                self.pot[v] = if up { self.pot[u] - c } else { self.pot[u] + c };
                self.order.push(v);
            }
        }
    }
}

/// Solves min Σ c_ij f_ij subject to row sums `supply` and column sums
/// `demand`. `cost` is row-major of size `supply.len() * demand.len()`.
pub(crate) fn network_simplex(cost: &[f64], supply: &[f64], demand: &[f64]) -> Result<SimplexOutput> {
    let nx = supply.len();
    let ny = demand.len();
    let m = nx * ny;
    let n = nx + ny;
    debug_assert_eq!(cost.len(), m);

    let max_cost = cost.iter().fold(0.0f64, |a, &c| a.max(c.abs()));
    let art_cost = (max_cost + 1.0) * (n as f64 + 1.0);
    let eps = 1e-12 * (1.0 + max_cost);
    let arc_cost = |a: usize| -> f64 {
        if a < m {
            cost[a]
        } else if a - m < nx {
            0.0
        } else {
            art_cost
        }
    };

    let mut flow = vec![0.0; m + n];
    let mut in_tree = vec![false; m];
    let mut tree = Tree {
        nx,
        ny,
        parent: vec![NONE; n + 1],
        pred: vec![NONE; n + 1],
        pred_up: vec![false; n + 1],
        depth: vec![0; n + 1],
        pot: vec![0.0; n + 1],
        adj: vec![Vec::new(); n + 1],
        order: Vec::with_capacity(n + 1),
    };
    for u in 0..n {
        let arc = m + u;
        flow[arc] = if u < nx { supply[u] } else { demand[u - nx] };
        tree.adj[u].push(arc);
        tree.adj[n].push(arc);
    }
    tree.rebuild(&arc_cost);

    let block = ((m as f64).sqrt().ceil() as usize).max(10).min(m.max(1));
    let max_pivots = 50 * (n + 10) * (nx.max(ny) + 10);
    let mut next = 0usize;
    let mut pivots = 0usize;
    let mut path_u = Vec::new();
    let mut path_v = Vec::new();

    loop {
        // entering arc: most negative reduced cost within the first block
        // (cyclic from `next`) that contains an eligible arc
        let mut best = NONE;
        let mut best_rc = -eps;
        let mut scanned = 0;
        let mut in_block = 0;
        let mut a = next;
        while scanned < m {
            if !in_tree[a] {
                let i = a / ny;
                let j = nx + a % ny;
                let rc = cost[a] + tree.pot[i] - tree.pot[j];
                if rc < best_rc {
                    best_rc = rc;
                    best = a;
                }
            }
            scanned += 1;
            in_block += 1;
            a += 1;
            if a == m {
                a = 0;
            }
            if in_block == block {
                if best != NONE {
                    break;
                }
                in_block = 0;
            }
        }
        if best == NONE {
            break;
        }
        next = a;

        pivots += 1;
        if pivots > max_pivots {
            return Err(Error::NumericalFailure(format!(
                "network simplex exceeded {max_pivots} pivots"
            )));
        }

        let (u, v) = tree.endpoints(best);
        // walk both endpoints up to their join
        path_u.clear();
        path_v.clear();
        let (mut p, mut q) = (u, v);
        while tree.depth[p] > tree.depth[q] {
            path_u.push(p);
            p = tree.parent[p];
        }
        while tree.depth[q] > tree.depth[p] {
            path_v.push(q);
            q = tree.parent[q];
        }
        while p != q {
            path_u.push(p);
            path_v.push(q);
            p = tree.parent[p];
            q = tree.parent[q];
        }

        // flow is pushed u → v → … → join → … → u
        let mut delta = f64::INFINITY;
        let mut leave_node = NONE;
        for &w in &path_u {
            if tree.pred_up[w] {
                let d = flow[tree.pred[w]];
                if d < delta {
                    delta = d;
                    leave_node = w;
                }
            }
        }
        for &w in &path_v {
            if !tree.pred_up[w] {
                let d = flow[tree.pred[w]];
                if d <= delta {
                    delta = d;
                    leave_node = w;
                }
            }
        }
        if leave_node == NONE {
            return Err(Error::NumericalFailure("unbounded pivot cycle".into()));
        }

        flow[best] += delta;
        for &w in &path_u {
            let e = tree.pred[w];
            if tree.pred_up[w] {
                flow[e] -= delta;
            } else {
                flow[e] += delta;
            }
        }
        for &w in &path_v {
            let e = tree.pred[w];
            if tree.pred_up[w] {
                flow[e] += delta;
            } else {
                flow[e] -= delta;
            }
        }
        let leaving = tree.pred[leave_node];
        flow[leaving] = 0.0;

        let (ls, lt) = tree.endpoints(leaving);
        tree.remove_adj(ls, leaving);
        tree.remove_adj(lt, leaving);
        if leaving < m {
            in_tree[leaving] = false;
        }
        tree.adj[u].push(best);
        tree.adj[v].push(best);
        in_tree[best] = true;
        tree.rebuild(&arc_cost);
    }

    flow.truncate(m);
    Ok(SimplexOutput {
        flow,
        pot: tree.pot,
        pivots,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_by_two_swap() {
        let out = network_simplex(&[0.5, 0.0, 0.0, 0.5], &[0.5, 0.5], &[0.5, 0.5]).unwrap();
        assert_eq!(out.flow, vec![0.0, 0.5, 0.5, 0.0]);
    }

    #[test]
    fn one_by_one() {
        let out = network_simplex(&[3.0], &[2.0], &[2.0]).unwrap();
        assert_eq!(out.flow, vec![2.0]);
    }

    #[test]
    fn rectangular_balanced() {
        // rows (1/3, 2/3), columns 1/3 each, cost pushes row 0 to column 0
        let cost = [0.0, 1.0, 4.0, 1.0, 0.0, 1.0];
        let third = 1.0 / 3.0;
        let out = network_simplex(&cost, &[third, 2.0 * third], &[third; 3]).unwrap();
        let f = &out.flow;
        assert!((f[0] - third).abs() < 1e-15);
        assert!((f[4] - third).abs() < 1e-15);
        assert!((f[5] - third).abs() < 1e-15);
        for (a, &c) in cost.iter().enumerate() {
            let rc = c + out.pot[a / 3] - out.pot[2 + a % 3];
            assert!(rc >= -1e-12);
            if f[a] > 0.0 {
                assert!(rc.abs() < 1e-12);
            }
        }
    }
}
