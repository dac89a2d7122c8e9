//! Polar factorisation and polar inclusion of a sampled map through a target
//! measure, with the certificates that back each classification.

mod degeneracy;
mod gallery;

pub use degeneracy::{degeneracy_report, DegeneracyReport};
pub use gallery::{gallery_instance, GalleryInstance, GALLERY_NAMES};

use serde::{Deserialize, Serialize};

use crate::convex::{fenchel_conjugate, fenchel_gap, half_sq_norm, ConvexPotential, DualPair};
use crate::error::{Error, Result};
use crate::measures::{
    masses_agree, pushforward_indices, value_law, laws_match, DiscreteMeasure, SampledMap, MASS_REL_TOL,
};
use crate::transport::{
    build_cost, objective, shifted_objective, solve_mk, Certificate, CostMatrix, TransportPlan, Triplet,
};

/// A row is treated as deterministic when its largest support mass is at
/// least this fraction of its weight.
pub const DETERMINISTIC_ROW: f64 = 1.0 - 1e-9;

/// Tolerance on the conjugate identity ψ*(u(x)) = |u(x)|²/2 − φᶜ(x).
pub const CONJUGATE_TOL: f64 = 1e-8;

/// The plan (id × s)#μ induced by a map s : X → Y given by target indices.
/// Fails with [`Error::NotMeasurePreserving`] when the column sums miss ν,
/// unless `check` is false.
pub fn plan_from_map(s: &[usize], mu: &DiscreteMeasure, nu: &DiscreteMeasure, check: bool) -> Result<TransportPlan> {
    if s.len() != mu.len() {
        return Err(Error::InvalidInput(format!(
            "map has {} entries for {} domain points",
            s.len(),
            mu.len()
        )));
    }
    if let Some(&bad) = s.iter().find(|&&j| j >= nu.len()) {
        return Err(Error::InvalidInput(format!("map target {bad} outside {} sites", nu.len())));
    }
    if check {
        let image = pushforward_indices(mu.weights(), s, nu.len());
        let mut worst = (0, 0.0f64);
        for (j, (&got, &want)) in image.iter().zip(nu.weights()).enumerate() {
            let d = (got - want).abs();
            if d > worst.1 {
                worst = (j, d);
            }
        }
        let (j, d) = worst;
        if d > MASS_REL_TOL * nu.weight(j) {
            return Err(Error::NotMeasurePreserving {
                column: j,
                discrepancy: image[j] - nu.weight(j),
            });
        }
    }
    let triplets = s
        .iter()
        .enumerate()
        .map(|(i, &j)| Triplet { i, j, mass: mu.weight(i) })
        .collect();
    TransportPlan::new(triplets, mu.weights().to_vec(), nu.weights().to_vec())
}

/// Result of checking u(x) ∈ ∂ψ(y) on a plan's support.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InclusionCheck {
    pub holds: bool,
    pub max_gap: f64,
    /// Support pair attaining the largest gap.
    pub worst: Option<(usize, usize)>,
}

/// Fenchel-gap test of the polar inclusion at every support triplet.
pub fn verify_polar_inclusion(
    plan: &TransportPlan,
    psi: &ConvexPotential,
    u: &SampledMap,
    tol: f64,
) -> Result<InclusionCheck> {
    check_plan_shape(plan, u, psi)?;
    let mut max_gap = f64::NEG_INFINITY;
    let mut worst = None;
    for t in plan.triplets() {
        let g = fenchel_gap(psi, u.value(t.i), t.j)?;
        if g > max_gap {
            max_gap = g;
            worst = Some((t.i, t.j));
        }
    }
    Ok(InclusionCheck {
        holds: max_gap <= tol,
        max_gap,
        worst,
    })
}

fn check_plan_shape(plan: &TransportPlan, u: &SampledMap, psi: &ConvexPotential) -> Result<()> {
    let same = |a: &[f64], b: &[f64]| a.len() == b.len() && a.iter().zip(b).all(|(x, y)| masses_agree(*x, *y, MASS_REL_TOL));
    if !same(plan.mu(), u.domain().weights()) || !same(plan.nu(), psi.support().weights()) {
        return Err(Error::MarginalMismatch(
            "plan marginals do not reference the map's domain and the potential's support".into(),
        ));
    }
    plan.check_marginals()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Classification {
    /// The optimal plan is induced by a measure-preserving map s and
    /// u = u# ∘ s on the support.
    Factorisation,
    /// Only the plan witnesses the inclusion.
    InclusionOnly,
}

/// Mass a row sends outside its principal column.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RowResidue {
    pub row: usize,
    pub residue: f64,
}

/// Output of [`polar_factorize`].
#[derive(Debug, Clone)]
pub struct PolarResult {
    pub plan: TransportPlan,
    pub duals: DualPair,
    pub cost: CostMatrix,
    pub certificate: Certificate,
    pub psi: ConvexPotential,
    /// Largest Fenchel gap over the plan's support.
    pub max_gap: f64,
    /// Largest |ψ*(u(x_i)) − (|u(x_i)|²/2 − φᶜ_i)|.
    pub conjugate_residual: f64,
    /// s(i) for every row when the classification is a factorisation.
    pub factor_map: Option<Vec<usize>>,
    pub u_sharp: Option<SampledMap>,
    pub classification: Classification,
    /// Rows whose plan mass is not entirely in one column.
    pub residues: Vec<RowResidue>,
    pub tol: f64,
}

/// Solves the quadratic Monge–Kantorovich problem for `u` through `y`,
/// builds ψ(y) = |y|²/2 − φ(y) from the duals, certifies the polar inclusion
/// and decides whether the optimal plan comes from a map.
pub fn polar_factorize(u: &SampledMap, y: &DiscreteMeasure, tol: f64) -> Result<PolarResult> {
    if tol.is_nan() || tol <= 0.0 {
        return Err(Error::InvalidInput(format!("tolerance {tol} must be positive")));
    }
    let cost = build_cost(u, y)?;
    let sol = solve_mk(&cost, u.domain(), y)?;
    let psi = ConvexPotential::from_kantorovich(y.clone(), &sol.duals.phi)?;

    let inclusion = verify_polar_inclusion(&sol.plan, &psi, u, tol)?;
    if !inclusion.holds {
        return Err(Error::InclusionNotCertified {
            max_gap: inclusion.max_gap,
            tol,
        });
    }
    let mut conjugate_residual: f64 = 0.0;
    for (i, v) in u.values().iter().enumerate() {
        let r = fenchel_conjugate(&psi, v)? - (half_sq_norm(v) - sol.duals.phi_c[i]);
        conjugate_residual = conjugate_residual.max(r.abs());
    }
    if conjugate_residual > CONJUGATE_TOL {
        return Err(Error::NumericalFailure(format!(
            "conjugate identity residual {conjugate_residual:e}"
        )));
    }

    let (factor_map, u_sharp, residues) = extract_factor(u, y, &sol.plan)?;
    let classification = if factor_map.is_some() {
        Classification::Factorisation
    } else {
        Classification::InclusionOnly
    };
    Ok(PolarResult {
        plan: sol.plan,
        duals: sol.duals,
        cost,
        certificate: sol.certificate,
        psi,
        max_gap: inclusion.max_gap,
        conjugate_residual,
        factor_map,
        u_sharp,
        classification,
        residues,
        tol,
    })
}

/// JSON view of a [`PolarResult`].
#[derive(Debug, Serialize)]
pub struct PolarReport<'a> {
    pub classification: Classification,
    pub certificate: &'a Certificate,
    pub relative_gap: f64,
    pub tol: f64,
    pub max_gap: f64,
    pub conjugate_residual: f64,
    pub psi: &'a [f64],
    pub phi_c: &'a [f64],
    pub phi: &'a [f64],
    pub triplets: &'a [Triplet],
    pub factor_map: Option<&'a [usize]>,
    pub u_sharp: Option<&'a [Vec<f64>]>,
    pub residues: &'a [RowResidue],
}

impl PolarResult {
    pub fn report(&self) -> PolarReport<'_> {
        PolarReport {
            classification: self.classification,
            certificate: &self.certificate,
            relative_gap: self.certificate.relative_gap(),
            tol: self.tol,
            max_gap: self.max_gap,
            conjugate_residual: self.conjugate_residual,
            psi: self.psi.values(),
            phi_c: &self.duals.phi_c,
            phi: &self.duals.phi,
            triplets: self.plan.triplets(),
            factor_map: self.factor_map.as_deref(),
            u_sharp: self.u_sharp.as_ref().map(|m| m.values()),
            residues: &self.residues,
        }
    }

    /// Two-column plain-text summary.
    pub fn summary_rows(&self) -> Vec<(String, String)> {
        vec![
            ("classification".into(), format!("{:?}", self.classification)),
            ("objective I".into(), format!("{}", self.certificate.objective)),
            ("dual value".into(), format!("{}", self.certificate.dual_value)),
            ("relative gap".into(), format!("{:e}", self.certificate.relative_gap())),
            ("max Fenchel gap".into(), format!("{:e}", self.max_gap)),
            ("conjugate residual".into(), format!("{:e}", self.conjugate_residual)),
            ("support size".into(), self.plan.triplets().len().to_string()),
            ("split rows".into(), self.residues.len().to_string()),
        ]
    }
}

type Factor = (Option<Vec<usize>>, Option<SampledMap>, Vec<RowResidue>);

/// A factor map exists when every row is deterministic, every column is hit
/// and all rows sent to a column share one value of u.
fn extract_factor(u: &SampledMap, y: &DiscreteMeasure, plan: &TransportPlan) -> Result<Factor> {
    let mu = u.domain().weights();
    let mut s = vec![usize::MAX; u.len()];
    let mut deterministic = true;
    let mut residues = Vec::new();
    for (i, support) in plan.row_supports().iter().enumerate() {
        let Some(&(j, mass)) = support
            .iter()
            .max_by(|a, b| a.1.total_cmp(&b.1).then(b.0.cmp(&a.0)))
        else {
            deterministic = false;
            continue;
        };
        let residue = support.iter().filter(|(k, _)| *k != j).map(|(_, m)| m).sum::<f64>();
        if residue > 0.0 {
            residues.push(RowResidue { row: i, residue });
        }
        if mass >= DETERMINISTIC_ROW * mu[i] {
            s[i] = j;
        } else {
            deterministic = false;
        }
    }
    if !deterministic {
        return Ok((None, None, residues));
    }
    let mut sharp: Vec<Option<&[f64]>> = vec![None; y.len()];
    for (i, &j) in s.iter().enumerate() {
        match sharp[j] {
            None => sharp[j] = Some(u.value(i)),
            Some(v) if v == u.value(i) => {}
            Some(_) => return Ok((None, None, residues)),
        }
    }
    if sharp.iter().any(Option::is_none) {
        return Ok((None, None, residues));
    }
    let values = sharp.into_iter().map(|v| v.unwrap().to_vec()).collect();
    let u_sharp = SampledMap::new(y.clone(), values)?;

    // self-checks: s is measure preserving and u# is a rearrangement of u
    plan_from_map(&s, u.domain(), y, true)
        .map_err(|e| Error::NumericalFailure(format!("factor map: {e}")))?;
    if !laws_match(&value_law(u, 0.0)?, &value_law(&u_sharp, 0.0)?) {
        return Err(Error::NumericalFailure("u# is not a rearrangement of u".into()));
    }
    Ok((Some(s), Some(u_sharp), residues))
}

/// Outcome of [`verify_optimality_of_inclusion`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OptimalityCheck {
    pub optimal: bool,
    /// I(π).
    pub objective: f64,
    /// Optimum of an independent re-solve.
    pub optimum: f64,
    /// J(π) for the given ψ.
    pub shifted: f64,
    pub max_gap: f64,
}

impl OptimalityCheck {
    pub fn delta(&self) -> f64 {
        self.objective - self.optimum
    }
}

/// Given a plan certified as a polar inclusion for ψ, confirms that it attains
/// the transport optimum by an independent re-solve and that J(π) vanishes.
pub fn verify_optimality_of_inclusion(
    pi: &TransportPlan,
    psi: &ConvexPotential,
    u: &SampledMap,
    tol: f64,
) -> Result<OptimalityCheck> {
    let inclusion = verify_polar_inclusion(pi, psi, u, tol)?;
    if !inclusion.holds {
        return Err(Error::InclusionNotCertified {
            max_gap: inclusion.max_gap,
            tol,
        });
    }
    let y = psi.support();
    let cost = build_cost(u, y)?;
    let value = objective(pi, &cost)?;
    let optimum = solve_mk(&cost, u.domain(), y)?.certificate.objective;
    let shifted = shifted_objective(pi, psi, u)?;
    let slack = 1e-9 * (1.0 + value.abs());
    // each support gap is at most `tol`, so J(π) ≤ tol · μ(X)
    let shifted_ok = shifted <= slack + tol * u.domain().total_mass();
    Ok(OptimalityCheck {
        optimal: value <= optimum + slack && shifted_ok,
        objective: value,
        optimum,
        shifted,
        max_gap: inclusion.max_gap,
    })
}
