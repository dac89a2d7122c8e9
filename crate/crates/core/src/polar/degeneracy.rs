use serde::{Deserialize, Serialize};

use crate::convex::DualPair;
use crate::error::{Error, Result};
use crate::transport::{objective, Certificate, CostMatrix, TransportPlan, CERTIFICATE_TOL};

/// Non-uniqueness diagnostics of an optimal plan.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DegeneracyReport {
    /// Zero-reduced-cost columns per row.
    pub zero_counts: Vec<usize>,
    /// μ-mass fraction of rows with at least two zero-reduced-cost columns.
    pub degeneracy_index: f64,
    /// μ-mass fraction of rows whose plan support has at least two columns.
    pub split_index: f64,
    pub tol: f64,
}

/// Counts near-tight dual constraints per row. The plan and duals must come
/// with a certified zero duality gap, otherwise the counts mean nothing.
pub fn degeneracy_report(
    plan: &TransportPlan,
    duals: &DualPair,
    cost: &CostMatrix,
    tol: f64,
) -> Result<DegeneracyReport> {
    let (nx, ny) = (cost.rows(), cost.cols());
    if duals.phi_c.len() != nx || duals.phi.len() != ny {
        return Err(Error::DimensionMismatch {
            expected: nx + ny,
            found: duals.phi_c.len() + duals.phi.len(),
        });
    }
    let value = objective(plan, cost)?;
    let dual_value: f64 = plan.mu().iter().zip(&duals.phi_c).map(|(m, p)| m * p).sum::<f64>()
        + plan.nu().iter().zip(&duals.phi).map(|(m, p)| m * p).sum::<f64>();
    let cert = Certificate {
        objective: value,
        dual_value,
        gap: value - dual_value,
    };
    let infeasible = duals.max_infeasibility(|i, j| cost.get(i, j));
    if cert.relative_gap() > CERTIFICATE_TOL || infeasible > CERTIFICATE_TOL * (1.0 + value.abs()) {
        return Err(Error::CertificateMissing(cert.relative_gap().max(infeasible)));
    }

    let zero_counts: Vec<usize> = (0..nx)
        .map(|i| {
            (0..ny)
                .filter(|&j| (cost.get(i, j) - duals.phi_c[i] - duals.phi[j]).abs() <= tol)
                .count()
        })
        .collect();
    let total: f64 = plan.mu().iter().sum();
    let degenerate: f64 = zero_counts
        .iter()
        .zip(plan.mu())
        .filter(|(&c, _)| c >= 2)
        .fold(0.0, |acc, (_, m)| acc + m);
    let split: f64 = plan
        .row_supports()
        .iter()
        .zip(plan.mu())
        .filter(|(s, _)| s.len() >= 2)
        .fold(0.0, |acc, (_, m)| acc + m);
    Ok(DegeneracyReport {
        zero_counts,
        degeneracy_index: degenerate / total,
        split_index: split / total,
        tol,
    })
}
