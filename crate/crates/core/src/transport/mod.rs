//! Quadratic-cost Monge–Kantorovich problem between finite measures: cost
//! construction, exact solution with Kantorovich duals, objective
//! evaluation, and a permutation oracle for small uniform instances.

mod duals;
mod oracle;
mod simplex;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::convex::{fenchel_gap, half_sq_dist, ConvexPotential, DualPair};
use crate::error::{Error, Result};
use crate::measures::{masses_agree, DiscreteMeasure, SampledMap, MASS_REL_TOL};

pub use oracle::brute_force_mk;

/// Tolerance for dual feasibility, complementary slackness and the relative
/// duality gap on solver output.
pub const CERTIFICATE_TOL: f64 = 1e-9;

/// Plan masses at or below this fraction of the total mass are treated as
/// floating-point residue and dropped from the support.
pub const SUPPORT_PRUNE: f64 = 1e-14;

/// Dense |X| × |Y| cost matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct CostMatrix {
    rows: usize,
    cols: usize,
    entries: Vec<f64>,
}

impl CostMatrix {
    /// Arbitrary finite costs; used for testing the solver on generic data.
    pub fn from_entries(rows: usize, cols: usize, entries: Vec<f64>) -> Result<Self> {
        if rows == 0 || cols == 0 || entries.len() != rows * cols {
            return Err(Error::InvalidInput(format!(
                "{} entries for a {rows}x{cols} cost matrix",
                entries.len()
            )));
        }
        if entries.iter().any(|c| !c.is_finite()) {
            return Err(Error::InvalidInput("cost entries must be finite".into()));
        }
        Ok(CostMatrix { rows, cols, entries })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let cols = rows.first().map(Vec::len).unwrap_or(0);
        if rows.iter().any(|r| r.len() != cols) {
            return Err(Error::InvalidInput("ragged cost matrix".into()));
        }
        Self::from_entries(rows.len(), cols, rows.concat())
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[i * self.cols + j]
    }

    pub fn entries(&self) -> &[f64] {
        &self.entries
    }
}

/// c(x_i, y_j) = |u(x_i) − y_j|²/2.
pub fn build_cost(u: &SampledMap, y: &DiscreteMeasure) -> Result<CostMatrix> {
    let points = y.points()?;
    let dim = points[0].len();
    if dim != u.codomain_dimension() {
        return Err(Error::DimensionMismatch {
            expected: dim,
            found: u.codomain_dimension(),
        });
    }
    let (mx, my) = (u.domain().total_mass(), y.total_mass());
    if !masses_agree(mx, my, MASS_REL_TOL) {
        return Err(Error::UnequalMass { left: mx, right: my });
    }
    let mut entries = Vec::with_capacity(u.len() * points.len());
    for v in u.values() {
        entries.extend(points.iter().map(|p| half_sq_dist(v, p)));
    }
    Ok(CostMatrix {
        rows: u.len(),
        cols: points.len(),
        entries,
    })
}

/// One atom (i, j, mass) of a plan.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Triplet {
    pub i: usize,
    pub j: usize,
    pub mass: f64,
}

/// Sparse joint measure on X × Y together with the marginals it is meant to
/// have.
#[derive(Debug, Clone, PartialEq)]
pub struct TransportPlan {
    triplets: Vec<Triplet>,
    mu: Vec<f64>,
    nu: Vec<f64>,
}

impl TransportPlan {
    /// Checks index ranges and positivity; marginals are checked separately
    /// by [`TransportPlan::check_marginals`].
    pub fn new(triplets: Vec<Triplet>, mu: Vec<f64>, nu: Vec<f64>) -> Result<Self> {
        for t in &triplets {
            if t.i >= mu.len() || t.j >= nu.len() {
                return Err(Error::InvalidInput(format!(
                    "triplet ({}, {}) outside a {}x{} plan",
                    t.i,
                    t.j,
                    mu.len(),
                    nu.len()
                )));
            }
            if !(t.mass.is_finite() && t.mass > 0.0) {
                return Err(Error::InvalidInput(format!(
                    "triplet ({}, {}) has mass {}",
                    t.i, t.j, t.mass
                )));
            }
        }
        Ok(TransportPlan { triplets, mu, nu })
    }

    pub fn triplets(&self) -> &[Triplet] {
        &self.triplets
    }

    pub fn rows(&self) -> usize {
        self.mu.len()
    }

    pub fn cols(&self) -> usize {
        self.nu.len()
    }

    pub fn mu(&self) -> &[f64] {
        &self.mu
    }

    pub fn nu(&self) -> &[f64] {
        &self.nu
    }

    pub fn row_sums(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.rows()];
        for t in &self.triplets {
            out[t.i] += t.mass;
        }
        out
    }

    pub fn col_sums(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.cols()];
        for t in &self.triplets {
            out[t.j] += t.mass;
        }
        out
    }

    /// Support columns of every row, in triplet order.
    pub fn row_supports(&self) -> Vec<Vec<(usize, f64)>> {
        let mut out = vec![Vec::new(); self.rows()];
        for t in &self.triplets {
            out[t.i].push((t.j, t.mass));
        }
        out
    }

    /// Largest marginal discrepancy relative to the matching weight (with a
    /// floor of [`SUPPORT_PRUNE`] times the total mass).
    pub fn marginal_error(&self) -> f64 {
        let total: f64 = self.mu.iter().sum();
        let floor = SUPPORT_PRUNE * 10.0 * total;
        let rel = |got: f64, want: f64| ((got - want).abs() - floor).max(0.0) / want;
        let rows = self.row_sums().into_iter().zip(&self.mu).map(|(g, &w)| rel(g, w));
        let cols = self.col_sums().into_iter().zip(&self.nu).map(|(g, &w)| rel(g, w));
        rows.chain(cols).fold(0.0, f64::max)
    }

    pub fn check_marginals(&self) -> Result<()> {
        let err = self.marginal_error();
        if err > MASS_REL_TOL {
            return Err(Error::MarginalMismatch(format!(
                "relative marginal error {err:e}"
            )));
        }
        Ok(())
    }

    fn check_against(&self, mu: &[f64], nu: &[f64]) -> Result<()> {
        if self.rows() != mu.len() || self.cols() != nu.len() {
            return Err(Error::MarginalMismatch(format!(
                "plan is {}x{}, measures are {}x{}",
                self.rows(),
                self.cols(),
                mu.len(),
                nu.len()
            )));
        }
        let same = |a: &[f64], b: &[f64]| a.iter().zip(b).all(|(x, y)| masses_agree(*x, *y, MASS_REL_TOL));
        if !same(&self.mu, mu) || !same(&self.nu, nu) {
            return Err(Error::MarginalMismatch("plan marginals differ from the measures".into()));
        }
        self.check_marginals()
    }
}

/// I(γ) = Σ mass · c_ij.
pub fn objective(plan: &TransportPlan, cost: &CostMatrix) -> Result<f64> {
    if plan.rows() != cost.rows || plan.cols() != cost.cols {
        return Err(Error::MarginalMismatch(format!(
            "plan is {}x{}, cost is {}x{}",
            plan.rows(),
            plan.cols(),
            cost.rows,
            cost.cols
        )));
    }
    plan.check_marginals()?;
    Ok(plan.triplets.iter().map(|t| t.mass * cost.get(t.i, t.j)).sum())
}

/// Primal value, dual value and their difference for a solve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Certificate {
    #[serde(rename = "I")]
    pub objective: f64,
    pub dual_value: f64,
    pub gap: f64,
}

impl Certificate {
    /// |I − dual| / (1 + |I|).
    pub fn relative_gap(&self) -> f64 {
        self.gap.abs() / (1.0 + self.objective.abs())
    }
}

/// Output of [`solve_mk`].
#[derive(Debug, Clone, PartialEq)]
pub struct MkSolution {
    pub plan: TransportPlan,
    pub duals: DualPair,
    pub certificate: Certificate,
    pub pivots: usize,
}

/// Worst violations of the dual certificate conditions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DualCheck {
    /// max φᶜ_i + φ_j − c_ij over all pairs.
    pub infeasibility: f64,
    /// max |c_ij − φᶜ_i − φ_j| over the plan's support.
    pub slackness: f64,
}

pub fn check_duals(plan: &TransportPlan, duals: &DualPair, cost: &CostMatrix) -> DualCheck {
    let infeasibility = duals.max_infeasibility(|i, j| cost.get(i, j));
    let slackness = plan
        .triplets
        .iter()
        .map(|t| (cost.get(t.i, t.j) - duals.phi_c[t.i] - duals.phi[t.j]).abs())
        .fold(0.0, f64::max);
    DualCheck {
        infeasibility,
        slackness,
    }
}

/// Exact optimal plan and Kantorovich potentials for `cost` between `mu` and
/// `nu`. Deterministic for identical inputs.
pub fn solve_mk(cost: &CostMatrix, mu: &DiscreteMeasure, nu: &DiscreteMeasure) -> Result<MkSolution> {
    solve_weights(cost, mu.weights(), nu.weights())
}

/// [`solve_mk`] on bare weight vectors.
pub fn solve_weights(cost: &CostMatrix, mu: &[f64], nu: &[f64]) -> Result<MkSolution> {
    if cost.rows != mu.len() || cost.cols != nu.len() {
        return Err(Error::InvalidInput(format!(
            "cost is {}x{}, weights are {}x{}",
            cost.rows,
            cost.cols,
            mu.len(),
            nu.len()
        )));
    }
    let (mx, my) = (mu.iter().sum::<f64>(), nu.iter().sum::<f64>());
    if !masses_agree(mx, my, MASS_REL_TOL) {
        return Err(Error::UnequalMass { left: mx, right: my });
    }
    let out = simplex::network_simplex(&cost.entries, mu, nu)?;

    let cutoff = SUPPORT_PRUNE * mx;
    let mut triplets = Vec::new();
    for (a, &f) in out.flow.iter().enumerate() {
        if f > cutoff {
            triplets.push(Triplet {
                i: a / cost.cols,
                j: a % cost.cols,
                mass: f,
            });
        }
    }
    let support: Vec<(usize, usize)> = triplets.iter().map(|t| (t.i, t.j)).collect();
    let duals = duals::recover_duals(&cost.entries, cost.rows, cost.cols, &support, &out.pot);
    let plan = TransportPlan::new(triplets, mu.to_vec(), nu.to_vec())?;
    plan.check_marginals()
        .map_err(|e| Error::NumericalFailure(format!("solver plan: {e}")))?;

    let objective = plan.triplets.iter().map(|t| t.mass * cost.get(t.i, t.j)).sum::<f64>();
    let dual_value = duals.dual_value(mu, nu);
    let certificate = Certificate {
        objective,
        dual_value,
        gap: objective - dual_value,
    };
    let check = check_duals(&plan, &duals, cost);
    if check.infeasibility > CERTIFICATE_TOL
        || check.slackness > CERTIFICATE_TOL
        || certificate.relative_gap() > CERTIFICATE_TOL
    {
        return Err(Error::NumericalFailure(format!(
            "certificate failed: infeasibility {:e}, slackness {:e}, gap {:e}",
            check.infeasibility,
            check.slackness,
            certificate.relative_gap()
        )));
    }
    Ok(MkSolution {
        plan,
        duals,
        certificate,
        pivots: out.pivots,
    })
}

/// J(γ) = Σ mass · (ψ*(u(x_i)) + ψ(y_j) − u(x_i)·y_j).
pub fn shifted_objective(plan: &TransportPlan, psi: &ConvexPotential, u: &SampledMap) -> Result<f64> {
    plan.check_against(u.domain().weights(), psi.support().weights())?;
    let mut total = 0.0;
    for t in &plan.triplets {
        total += t.mass * fenchel_gap(psi, u.value(t.i), t.j)?;
    }
    Ok(total)
}

/// A feasible plan built by north-west-corner filling over seeded shuffles of
/// the row and column orders.
pub fn random_plan(mu: &DiscreteMeasure, nu: &DiscreteMeasure, seed: u64) -> Result<TransportPlan> {
    random_plan_weights(mu.weights(), nu.weights(), seed)
}

pub fn random_plan_weights(mu: &[f64], nu: &[f64], seed: u64) -> Result<TransportPlan> {
    let (mx, my) = (mu.iter().sum::<f64>(), nu.iter().sum::<f64>());
    if !masses_agree(mx, my, MASS_REL_TOL) {
        return Err(Error::UnequalMass { left: mx, right: my });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rows: Vec<usize> = (0..mu.len()).collect();
    let mut cols: Vec<usize> = (0..nu.len()).collect();
    rows.shuffle(&mut rng);
    cols.shuffle(&mut rng);

    let tiny = SUPPORT_PRUNE * mx;
    let mut row_left: Vec<f64> = rows.iter().map(|&i| mu[i]).collect();
    let mut col_left: Vec<f64> = cols.iter().map(|&j| nu[j]).collect();
    let mut triplets = Vec::with_capacity(mu.len() + nu.len());
    let (mut r, mut c) = (0, 0);
    while r < rows.len() && c < cols.len() {
        // the last cell of a row or column absorbs the rounding residue
        let m = if r + 1 == rows.len() {
            col_left[c]
        } else if c + 1 == cols.len() {
            row_left[r]
        } else {
            row_left[r].min(col_left[c])
        };
        if m > tiny {
            triplets.push(Triplet {
                i: rows[r],
                j: cols[c],
                mass: m,
            });
        }
        row_left[r] -= m;
        col_left[c] -= m;
        let row_done = row_left[r] <= tiny;
        let col_done = col_left[c] <= tiny;
        if row_done {
            r += 1;
        }
        if col_done {
            c += 1;
        }
        if !row_done && !col_done {
            // can only happen on the final row/column; avoid spinning
            if r + 1 == rows.len() {
                c += 1;
            } else {
                r += 1;
            }
        }
    }
    TransportPlan::new(triplets, mu.to_vec(), nu.to_vec())
}

/// Outcome of sampling support cycles of a plan.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CycleCheck {
    pub samples: usize,
    pub violations: usize,
    /// max over samples of Σ c(x_k, y_k) − Σ c(x_k, y_{k+1}).
    pub worst_excess: f64,
}

/// Samples cycles of up to `max_len` distinct support pairs and tests
/// Σ c(x_k, y_k) ≤ Σ c(x_k, y_{k+1}) + `tol`.
pub fn cycle_check(
    plan: &TransportPlan,
    cost: &CostMatrix,
    samples: usize,
    max_len: usize,
    tol: f64,
    seed: u64,
) -> CycleCheck {
    let support = plan.triplets();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut violations = 0;
    let mut worst = f64::NEG_INFINITY;
    let upper = max_len.min(support.len()).max(1);
    for _ in 0..samples {
        let len = if upper < 2 { 1 } else { rng.gen_range(2..=upper) };
        let picked: Vec<&Triplet> = support.choose_multiple(&mut rng, len).collect();
        let mut on = 0.0;
        let mut shifted = 0.0;
        for (k, t) in picked.iter().enumerate() {
            let next = picked[(k + 1) % len];
            on += cost.get(t.i, t.j);
            shifted += cost.get(t.i, next.j);
        }
        let excess = on - shifted;
        worst = worst.max(excess);
        if excess > tol {
            violations += 1;
        }
    }
    CycleCheck {
        samples,
        violations,
        worst_excess: worst,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn uniform_line(vals: &[f64]) -> DiscreteMeasure {
        DiscreteMeasure::uniform(vals.iter().map(|&v| vec![v]).collect(), 1.0).unwrap()
    }

    fn map_on(values: Vec<Vec<f64>>) -> SampledMap {
        let n = values.len();
        let d = DiscreteMeasure::abstract_space(vec![1.0 / n as f64; n]).unwrap();
        SampledMap::new(d, values).unwrap()
    }

    #[test]
    fn build_cost_examples() {
        let u = map_on(vec![vec![1.0], vec![0.0]]);
        let c = build_cost(&u, &uniform_line(&[0.0, 1.0])).unwrap();
        assert_eq!(c.entries(), &[0.5, 0.0, 0.0, 0.5]);

        let y = uniform_line(&[0.3, -2.0]);
        let paired = map_on(vec![vec![0.3], vec![-2.0]]);
        let c = build_cost(&paired, &y).unwrap();
        assert_eq!(c.get(0, 0), 0.0);
        assert_eq!(c.get(1, 1), 0.0);

        let y2 = DiscreteMeasure::uniform(vec![vec![0.0, 0.0]], 1.0).unwrap();
        let u2 = SampledMap::new(DiscreteMeasure::abstract_space(vec![1.0]).unwrap(), vec![vec![1.0, 0.0]])
            .unwrap();
        assert_eq!(build_cost(&u2, &y2).unwrap().entries(), &[0.5]);
    }

    #[test]
    fn build_cost_errors() {
        let u = map_on(vec![vec![1.0, 0.0], vec![0.0, 0.0]]);
        assert!(matches!(
            build_cost(&u, &uniform_line(&[0.0, 1.0])),
            Err(Error::DimensionMismatch { .. })
        ));
        let y = DiscreteMeasure::uniform(vec![vec![0.0], vec![1.0]], 2.0).unwrap();
        assert!(matches!(
            build_cost(&map_on(vec![vec![1.0], vec![0.0]]), &y),
            Err(Error::UnequalMass { .. })
        ));
    }

    #[test]
    fn objective_examples() {
        let c = CostMatrix::from_rows(&[vec![0.5, 0.0], vec![0.0, 0.5]]).unwrap();
        let w = vec![0.5, 0.5];
        let diag_zero = CostMatrix::from_rows(&[vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap();
        let id = TransportPlan::new(
            vec![Triplet { i: 0, j: 0, mass: 0.5 }, Triplet { i: 1, j: 1, mass: 0.5 }],
            w.clone(),
            w.clone(),
        )
        .unwrap();
        assert_eq!(objective(&id, &diag_zero).unwrap(), 0.0);

        // μ⊗ν / total on a unit-mass instance: every cell carries 1/4
        let product: Vec<Triplet> = (0..2)
            .flat_map(|i| (0..2).map(move |j| Triplet { i, j, mass: 0.25 }))
            .collect();
        let indep = TransportPlan::new(product, w.clone(), w.clone()).unwrap();
        assert_eq!(objective(&indep, &c).unwrap(), 0.25);

        // moving mass t around the rectangle changes I by t(c01 + c10 - c00 - c11)
        let c = CostMatrix::from_rows(&[vec![0.3, 1.7], vec![2.2, 0.4]]).unwrap();
        let t = 0.1;
        let moved: Vec<Triplet> = vec![
            Triplet { i: 0, j: 0, mass: 0.25 - t },
            Triplet { i: 0, j: 1, mass: 0.25 + t },
            Triplet { i: 1, j: 0, mass: 0.25 + t },
            Triplet { i: 1, j: 1, mass: 0.25 - t },
        ];
        let product: Vec<Triplet> = (0..2)
            .flat_map(|i| (0..2).map(move |j| Triplet { i, j, mass: 0.25 }))
            .collect();
        let base = objective(&TransportPlan::new(product, w.clone(), w.clone()).unwrap(), &c).unwrap();
        let after = objective(&TransportPlan::new(moved, w.clone(), w.clone()).unwrap(), &c).unwrap();
        let expected = t * (1.7 + 2.2 - 0.3 - 0.4);
        assert!((after - base - expected).abs() < 1e-12);
    }

    #[test]
    fn objective_rejects_wrong_marginals() {
        let c = CostMatrix::from_rows(&[vec![0.5, 0.0], vec![0.0, 0.5]]).unwrap();
        let w = vec![0.5, 0.5];
        let lopsided = TransportPlan::new(vec![Triplet { i: 0, j: 0, mass: 1.0 }], w.clone(), w.clone()).unwrap();
        assert!(matches!(objective(&lopsided, &c), Err(Error::MarginalMismatch(_))));
        let c3 = CostMatrix::from_rows(&[vec![0.0; 3], vec![0.0; 3]]).unwrap();
        let id = TransportPlan::new(
            vec![Triplet { i: 0, j: 0, mass: 0.5 }, Triplet { i: 1, j: 1, mass: 0.5 }],
            w.clone(),
            w,
        )
        .unwrap();
        assert!(matches!(objective(&id, &c3), Err(Error::MarginalMismatch(_))));
    }

    #[test]
    fn solve_examples() {
        let mu = uniform_line(&[0.0, 1.0]);
        let c = CostMatrix::from_rows(&[vec![0.5, 0.0], vec![0.0, 0.5]]).unwrap();
        let sol = solve_mk(&c, &mu, &mu).unwrap();
        let mut t: Vec<(usize, usize, f64)> = sol.plan.triplets().iter().map(|t| (t.i, t.j, t.mass)).collect();
        t.sort_by(|a, b| a.partial_cmp(b).unwrap());
        assert_eq!(t, vec![(0, 1, 0.5), (1, 0, 0.5)]);
        assert_eq!(sol.certificate.objective, 0.0);
        assert_eq!(sol.duals.phi[0], 0.0);

        let c = CostMatrix::from_rows(&[vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap();
        let sol = solve_mk(&c, &mu, &mu).unwrap();
        let mut t: Vec<(usize, usize)> = sol.plan.triplets().iter().map(|t| (t.i, t.j)).collect();
        t.sort();
        assert_eq!(t, vec![(0, 0), (1, 1)]);
        assert_eq!(sol.certificate.objective, 0.0);
    }

    #[test]
    fn solve_rejects_unequal_mass() {
        let c = CostMatrix::from_rows(&[vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap();
        assert!(matches!(
            solve_weights(&c, &[0.5, 0.5], &[0.5, 0.6]),
            Err(Error::UnequalMass { .. })
        ));
    }

    #[test]
    fn solve_is_deterministic() {
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        let n = 17;
        let m = 11;
        let entries: Vec<f64> = (0..n * m).map(|_| rng.gen_range(0.0..3.0)).collect();
        let c = CostMatrix::from_entries(n, m, entries).unwrap();
        let mu: Vec<f64> = (0..n).map(|_| rng.gen_range(0.1..1.0)).collect();
        let total: f64 = mu.iter().sum();
        let raw: Vec<f64> = (0..m).map(|_| rng.gen_range(0.1..1.0)).collect();
        let rs: f64 = raw.iter().sum();
        let nu: Vec<f64> = raw.iter().map(|r| r * total / rs).collect();
        let a = solve_weights(&c, &mu, &nu).unwrap();
        let b = solve_weights(&c, &mu, &nu).unwrap();
        assert_eq!(a, b);
        assert!(a.plan.triplets().len() < n + m);
    }

    #[test]
    fn random_plan_properties() {
        let mu = DiscreteMeasure::from_points(vec![vec![0.0], vec![1.0], vec![2.0]], vec![0.2, 0.3, 0.5]).unwrap();
        let nu = DiscreteMeasure::from_points(vec![vec![0.0], vec![1.0]], vec![0.65, 0.35]).unwrap();
        assert_eq!(random_plan(&mu, &nu, 4).unwrap(), random_plan(&mu, &nu, 4).unwrap());
        for seed in 0..1000 {
            let p = random_plan(&mu, &nu, seed).unwrap();
            assert!(p.marginal_error() <= 1e-12, "seed {seed}");
        }
        let one = DiscreteMeasure::from_points(vec![vec![0.0]], vec![2.0]).unwrap();
        let p = random_plan(&one, &one, 7).unwrap();
        assert_eq!(p.triplets(), &[Triplet { i: 0, j: 0, mass: 2.0 }]);
        assert!(matches!(random_plan(&mu, &one, 0), Err(Error::UnequalMass { .. })));
    }

    #[test]
    fn quadratic_psi_makes_j_equal_i() {
        // ψ = |y|²/2 on Y gives ψ*(v) = |v|²/2 − min_j |v − y_j|²/2, so on a
        // plan J − I = Σμ(|u|²/2 − ψ*(u)) − 0; with u taking values in Y the
        // correction vanishes
        let y = uniform_line(&[0.0, 1.0, 2.5]);
        let u = map_on(vec![vec![2.5], vec![0.0], vec![1.0]]);
        let psi = ConvexPotential::new(y.clone(), vec![0.0, 0.5, 3.125]).unwrap();
        let cost = build_cost(&u, &y).unwrap();
        for seed in 0..20 {
            let plan = random_plan(u.domain(), &y, seed).unwrap();
            let i = objective(&plan, &cost).unwrap();
            let j = shifted_objective(&plan, &psi, &u).unwrap();
            assert!((i - j).abs() <= 1e-12);
        }
    }
}
