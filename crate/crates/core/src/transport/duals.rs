//! Dual recovery from an optimal plan.
//!
//! Potentials are re-propagated exactly along the plan's support forest, then
//! each support component is shifted so that off-support pairs between
//! different components get the largest uniform slack the cost admits (half
//! the minimum mean cycle of the component slack graph). This makes the
//! zero-reduced-cost set coincide with genuinely optimal pairs whenever the
//! instance allows it, instead of echoing degenerate basic arcs.

use crate::convex::DualPair;

struct Dsu {
    parent: Vec<usize>,
}

impl Dsu {
    fn new(n: usize) -> Self {
        Dsu {
            parent: (0..n).collect(),
        }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            let (lo, hi) = if ra < rb { (ra, rb) } else { (rb, ra) };
            self.parent[hi] = lo;
        }
    }
}

/// Builds (φᶜ, φ) from LP node potentials `pot` (reduced cost
/// `c_ij + pot[i] - pot[nx + j]`) and the support pairs of an optimal plan.
/// The result is normalised by φ(y₀) = 0.
pub(crate) fn recover_duals(
    cost: &[f64],
    nx: usize,
    ny: usize,
    support: &[(usize, usize)],
    pot: &[f64],
) -> DualPair {
    let n = nx + ny;
    let mut dsu = Dsu::new(n);
    let mut adj: Vec<Vec<usize>> = vec![Vec::new(); n];
    for &(i, j) in support {
        dsu.union(i, nx + j);
        adj[i].push(nx + j);
        adj[nx + j].push(i);
    }

    // node value: φᶜ for rows, φ for columns; φᶜ_i + φ_j = c_ij on support
    let mut value = vec![f64::NAN; n];
    let mut queue = Vec::with_capacity(n);
    for start in 0..n {
        if !value[start].is_nan() {
            continue;
        }
        value[start] = if start < nx { -pot[start] } else { pot[start] };
        queue.clear();
        queue.push(start);
        let mut head = 0;
        while head < queue.len() {
            let a = queue[head];
            head += 1;
            for &b in &adj[a] {
                if value[b].is_nan() {
                    let (i, j) = if a < nx { (a, b - nx) } else { (b, a - nx) };
                    value[b] = cost[i * ny + j] - value[a];
                    queue.push(b);
                }
            }
        }
    }

    let mut comp_of = vec![0usize; n];
    let mut comp_index = vec![usize::MAX; n];
    let mut k = 0;
    for v in 0..n {
        let r = dsu.find(v);
        if comp_index[r] == usize::MAX {
            comp_index[r] = k;
            k += 1;
        }
        comp_of[v] = comp_index[r];
    }

    if k > 1 {
        separate_components(cost, nx, ny, &comp_of, k, &mut value);
    }

    let mut phi_c: Vec<f64> = value[..nx].to_vec();
    let mut phi: Vec<f64> = value[nx..].to_vec();
    let gauge = phi[0];
    for p in &mut phi {
        *p -= gauge;
    }
    for p in &mut phi_c {
        *p += gauge;
    }
    DualPair { phi_c, phi }
}

fn separate_components(
    cost: &[f64],
    nx: usize,
    ny: usize,
    comp_of: &[usize],
    k: usize,
    value: &mut [f64],
) {
    // w[b * k + a]: least slack over rows in component a and columns in b,
    // i.e. the edge b → a of the difference-constraint graph t_a - t_b <= w
    let mut w = vec![f64::INFINITY; k * k];
    let mut scale = 0.0f64;
    for i in 0..nx {
        let a = comp_of[i];
        for j in 0..ny {
            let b = comp_of[nx + j];
            let c = cost[i * ny + j];
            scale = scale.max(c.abs());
            if a == b {
                continue;
            }
            let slack = c - value[i] - value[nx + j];
            let e = &mut w[b * k + a];
            if slack < *e {
                *e = slack;
            }
        }
    }

    let Some(mean) = min_mean_cycle(&w, k) else {
        return;
    };
    if !(mean > 1e-12 * (1.0 + scale)) {
        return;
    }
    let delta = 0.5 * mean;

    // Bellman–Ford from a virtual source; every cycle has positive weight
    let mut dist = vec![0.0f64; k];
    for _ in 0..=k {
        let mut changed = false;
        for b in 0..k {
            let db = dist[b];
            for a in 0..k {
                let e = w[b * k + a];
                if e.is_finite() {
                    let cand = db + e - delta;
                    if cand < dist[a] {
                        dist[a] = cand;
                        changed = true;
                    }
                }
            }
        }
        if !changed {
            break;
        }
    }

    for i in 0..nx {
        value[i] += dist[comp_of[i]];
    }
    for j in 0..ny {
        value[nx + j] -= dist[comp_of[nx + j]];
    }
}

/// Karp's minimum mean cycle on a dense graph with `w[u * k + v]` the weight
/// of u → v (`+∞` for absent edges). `None` when the graph is acyclic.
pub(crate) fn min_mean_cycle(w: &[f64], k: usize) -> Option<f64> {
    let mut d = vec![f64::INFINITY; (k + 1) * k];
    for v in 0..k {
        d[v] = 0.0;
    }
    for step in 1..=k {
        let (prev, cur) = d.split_at_mut(step * k);
        let prev = &prev[(step - 1) * k..];
        let cur = &mut cur[..k];
        for u in 0..k {
            let du = prev[u];
            if !du.is_finite() {
                continue;
            }
            let row = &w[u * k..(u + 1) * k];
            for v in 0..k {
                let cand = du + row[v];
                if cand < cur[v] {
                    cur[v] = cand;
                }
            }
        }
    }
    let last = &d[k * k..];
    let mut best = f64::INFINITY;
    for v in 0..k {
        if !last[v].is_finite() {
            continue;
        }
        let mut worst = f64::NEG_INFINITY;
        for step in 0..k {
            let dv = d[step * k + v];
            if dv.is_finite() {
                worst = worst.max((last[v] - dv) / (k - step) as f64);
            }
        }
        best = best.min(worst);
    }
    best.is_finite().then_some(best)
}
