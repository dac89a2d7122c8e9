//! Discrete Legendre–Fenchel conjugacy, c-transforms for the quadratic cost
//! and the Fenchel–Young gap used to certify subdifferential inclusions.
//!
//! A potential ψ is known only through its samples on a finite support; its
//! extension is +∞ off the support, so ψ*(v) = max_j (v·y_j − ψ_j).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::measures::{DiscreteMeasure, SampledMap};

/// Default absolute tolerance on the Fenchel gap for inclusion certificates.
pub const DEFAULT_GAP_TOL: f64 = 1e-8;

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn half_sq_dist(a: &[f64], b: &[f64]) -> f64 {
    0.5 * a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>()
}

pub(crate) fn half_sq_norm(a: &[f64]) -> f64 {
    0.5 * dot(a, a)
}

fn check_dim(expected: usize, found: usize) -> Result<()> {
    if expected != found {
        return Err(Error::DimensionMismatch { expected, found });
    }
    Ok(())
}

/// Samples of a convex potential ψ on the sites of a measure in ℝⁿ.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvexPotential {
    support: DiscreteMeasure,
    points: Vec<Vec<f64>>,
    psi: Vec<f64>,
}

impl ConvexPotential {
    pub fn new(support: DiscreteMeasure, psi_values: Vec<f64>) -> Result<Self> {
        let points: Vec<Vec<f64>> = support.points()?.into_iter().map(<[f64]>::to_vec).collect();
        if psi_values.len() != points.len() {
            return Err(Error::InvalidInput(format!(
                "{} potential values for {} support points",
                psi_values.len(),
                points.len()
            )));
        }
        if psi_values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput("potential values must be finite".into()));
        }
        Ok(ConvexPotential {
            support,
            points,
            psi: psi_values,
        })
    }

    /// ψ(y) = |y|²/2 − φ(y) built from the target-side Kantorovich potential.
    pub fn from_kantorovich(support: DiscreteMeasure, phi: &[f64]) -> Result<Self> {
        let points = support.points()?;
        let psi = points
            .iter()
            .zip(phi)
            .map(|(y, &p)| half_sq_norm(y) - p)
            .collect();
        Self::new(support, psi)
    }

    pub fn support(&self) -> &DiscreteMeasure {
        &self.support
    }

    pub fn values(&self) -> &[f64] {
        &self.psi
    }

    pub fn point(&self, j: usize) -> &[f64] {
        &self.points[j]
    }

    pub fn dimension(&self) -> usize {
        self.points[0].len()
    }

    pub fn len(&self) -> usize {
        self.psi.len()
    }

    pub fn is_empty(&self) -> bool {
        self.psi.is_empty()
    }

    /// ψ + k.
    pub fn shifted(&self, k: f64) -> Self {
        ConvexPotential {
            support: self.support.clone(),
            points: self.points.clone(),
            psi: self.psi.iter().map(|v| v + k).collect(),
        }
    }

    /// ψ*(query) together with the lowest maximising site index.
    pub fn conjugate_argmax(&self, query: &[f64]) -> Result<(f64, usize)> {
        check_dim(self.dimension(), query.len())?;
        let mut best = f64::NEG_INFINITY;
        let mut arg = 0;
        for (j, (y, &p)) in self.points.iter().zip(&self.psi).enumerate() {
            let v = dot(query, y) - p;
            if v > best {
                best = v;
                arg = j;
            }
        }
        Ok((best, arg))
    }
}

/// ψ*(query) = max_j query·y_j − ψ_j.
pub fn fenchel_conjugate(psi: &ConvexPotential, query: &[f64]) -> Result<f64> {
    psi.conjugate_argmax(query).map(|(v, _)| v)
}

/// Fenchel–Young gap ψ*(u) + ψ(y) − u·y at site `y_index`; zero exactly when
/// u lies in the discrete subdifferential of ψ at that site.
pub fn fenchel_gap(psi: &ConvexPotential, u_value: &[f64], y_index: usize) -> Result<f64> {
    if y_index >= psi.len() {
        return Err(Error::InvalidInput(format!(
            "site {y_index} outside a support of {} points",
            psi.len()
        )));
    }
    let conj = fenchel_conjugate(psi, u_value)?;
    Ok(conj + psi.psi[y_index] - dot(u_value, &psi.points[y_index]))
}

/// φᶜ(x) = min_j |u(x) − y_j|²/2 − φ_j, with `u_value` = u(x).
pub fn c_transform(phi: &[f64], u_value: &[f64], y: &DiscreteMeasure) -> Result<f64> {
    let points = y.points()?;
    c_transform_points(phi, u_value, &points)
}

fn c_transform_points(phi: &[f64], u_value: &[f64], points: &[&[f64]]) -> Result<f64> {
    if phi.len() != points.len() {
        return Err(Error::InvalidInput(format!(
            "{} potential values for {} sites",
            phi.len(),
            points.len()
        )));
    }
    let mut best = f64::INFINITY;
    for (y, &p) in points.iter().zip(phi) {
        check_dim(y.len(), u_value.len())?;
        let v = half_sq_dist(u_value, y) - p;
        if v < best {
            best = v;
        }
    }
    Ok(best)
}

/// φᶜ evaluated at every point of the domain of `u`.
pub fn c_transform_all(phi: &[f64], u: &SampledMap, y: &DiscreteMeasure) -> Result<Vec<f64>> {
    let points = y.points()?;
    u.values()
        .iter()
        .map(|v| c_transform_points(phi, v, &points))
        .collect()
}

/// φᶜᶜ(y_j) = min_i |u(x_i) − y_j|²/2 − φᶜ(x_i).
pub fn double_c_transform(phi: &[f64], u: &SampledMap, y: &DiscreteMeasure) -> Result<Vec<f64>> {
    let phi_c = c_transform_all(phi, u, y)?;
    let points = y.points()?;
    Ok(points
        .iter()
        .map(|yj| {
            u.values()
                .iter()
                .zip(&phi_c)
                .map(|(v, &pc)| half_sq_dist(v, yj) - pc)
                .fold(f64::INFINITY, f64::min)
        })
        .collect())
}

/// Kantorovich potentials (φᶜ on X, φ on Y) for the cost they were solved for.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DualPair {
    pub phi_c: Vec<f64>,
    pub phi: Vec<f64>,
}

impl DualPair {
    /// Largest violation of φᶜ_i + φ_j ≤ c_ij over the dense cost `cost(i, j)`.
    pub fn max_infeasibility(&self, cost: impl Fn(usize, usize) -> f64) -> f64 {
        let mut worst = f64::NEG_INFINITY;
        for (i, &pc) in self.phi_c.iter().enumerate() {
            for (j, &p) in self.phi.iter().enumerate() {
                worst = worst.max(pc + p - cost(i, j));
            }
        }
        worst
    }

    /// Σ μ_i φᶜ_i + Σ ν_j φ_j.
    pub fn dual_value(&self, mu: &[f64], nu: &[f64]) -> f64 {
        dot(mu, &self.phi_c) + dot(nu, &self.phi)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn line_support(ys: &[f64]) -> DiscreteMeasure {
        DiscreteMeasure::uniform(ys.iter().map(|&y| vec![y]).collect(), 1.0).unwrap()
    }

    fn quadratic(ys: &[f64]) -> ConvexPotential {
        let psi = ys.iter().map(|y| y * y / 2.0).collect();
        ConvexPotential::new(line_support(ys), psi).unwrap()
    }

    #[test]
    fn conjugate_examples() {
        let psi = quadratic(&[0.0, 1.0]);
        assert_eq!(fenchel_conjugate(&psi, &[1.0]).unwrap(), 0.5);
        // max(0·2 − 0, 1·2 − 0.5)
        assert_eq!(fenchel_conjugate(&psi, &[2.0]).unwrap(), 1.5);

        let odd = ConvexPotential::new(line_support(&[0.0, 1.0, 3.0]), vec![2.0, -1.0, 4.0]).unwrap();
        assert_eq!(fenchel_conjugate(&odd, &[0.0]).unwrap(), 1.0);

        assert!(matches!(
            fenchel_conjugate(&psi, &[1.0, 2.0]),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn conjugate_ties_pick_lowest_site() {
        let psi = ConvexPotential::new(line_support(&[0.0, 1.0]), vec![0.0, 1.0]).unwrap();
        assert_eq!(psi.conjugate_argmax(&[1.0]).unwrap(), (0.0, 0));
    }

    #[test]
    fn c_transform_examples() {
        let y = line_support(&[0.0, 1.0]);
        assert_eq!(c_transform(&[0.0, 0.0], &[1.0], &y).unwrap(), 0.0);
        assert_eq!(c_transform(&[0.0, 0.0], &[0.5], &y).unwrap(), 0.125);
        assert_eq!(c_transform(&[1.0, 0.0], &[0.0], &y).unwrap(), -1.0);
    }

    #[test]
    fn double_transform_of_constant_is_constant() {
        // φᶜ(x) = min_j c_ij − k, then φᶜᶜ(y) = min_i c_ij − min_j' c_ij' + k;
        // on the 2×2 instance below both rows have a zero entry in every column
        let y = line_support(&[0.0, 1.0]);
        let d = DiscreteMeasure::abstract_space(vec![0.5, 0.5]).unwrap();
        let u = SampledMap::new(d, vec![vec![0.0], vec![1.0]]).unwrap();
        let k = 0.75;
        let cc = double_c_transform(&[k, k], &u, &y).unwrap();
        assert_eq!(cc, vec![k, k]);
    }

    #[test]
    fn double_transform_fixes_c_concave() {
        let y = line_support(&[0.0, 0.4, 1.3]);
        let d = DiscreteMeasure::abstract_space(vec![0.25, 0.5, 0.25]).unwrap();
        let u = SampledMap::new(d, vec![vec![-0.2], vec![0.7], vec![2.0]]).unwrap();
        let phi0 = [0.3, -1.0, 0.8];
        let concave = double_c_transform(&phi0, &u, &y).unwrap();
        let again = double_c_transform(&concave, &u, &y).unwrap();
        for (a, b) in concave.iter().zip(&again) {
            assert!((a - b).abs() <= 1e-9);
        }
    }

    #[test]
    fn gap_examples() {
        let psi = quadratic(&[0.0, 1.0]);
        assert_eq!(fenchel_gap(&psi, &[1.0], 1).unwrap(), 0.0);
        assert_eq!(fenchel_gap(&psi, &[1.0], 0).unwrap(), 0.5);
        // u at the argmax site of ψ*(u) has zero gap
        let odd = ConvexPotential::new(line_support(&[0.0, 1.0, 3.0]), vec![2.0, -1.0, 4.0]).unwrap();
        let (_, j) = odd.conjugate_argmax(&[0.7]).unwrap();
        assert_eq!(fenchel_gap(&odd, &[0.7], j).unwrap(), 0.0);
    }

    fn random_instance(rng: &mut ChaCha8Rng, nx: usize, ny: usize, dim: usize) -> (SampledMap, DiscreteMeasure) {
        let pts = (0..ny)
            .map(|_| (0..dim).map(|_| rng.gen_range(-2.0..2.0)).collect())
            .collect();
        let y = DiscreteMeasure::uniform(pts, 1.0).unwrap();
        let d = DiscreteMeasure::abstract_space(vec![1.0 / nx as f64; nx]).unwrap();
        let vals = (0..nx)
            .map(|_| (0..dim).map(|_| rng.gen_range(-2.0..2.0)).collect())
            .collect();
        (SampledMap::new(d, vals).unwrap(), y)
    }

    #[test]
    fn triple_transform_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for trial in 0..40 {
            let nx = 1 + trial % 20;
            let ny = 1 + (trial * 7) % 20;
            let (u, y) = random_instance(&mut rng, nx, ny, 1 + trial % 3);
            let phi: Vec<f64> = (0..ny).map(|_| rng.gen_range(-3.0..3.0)).collect();
            let phi_c = c_transform_all(&phi, &u, &y).unwrap();
            let phi_cc = double_c_transform(&phi, &u, &y).unwrap();
            let phi_ccc = c_transform_all(&phi_cc, &u, &y).unwrap();
            let sup = phi_c
                .iter()
                .zip(&phi_ccc)
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max);
            assert!(sup <= 1e-9, "trial {trial}: {sup}");
            // φᶜᶜ ≥ φ holds everywhere
            for (a, b) in phi_cc.iter().zip(&phi) {
                assert!(a >= &(b - 1e-12));
            }
        }
    }

    #[test]
    fn gap_and_conjugate_properties() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..200 {
            let n = rng.gen_range(1..12);
            let dim = rng.gen_range(1..4);
            let pts: Vec<Vec<f64>> = (0..n)
                .map(|_| (0..dim).map(|_| rng.gen_range(-2.0..2.0)).collect())
                .collect();
            let support = DiscreteMeasure::uniform(pts, 1.0).unwrap();
            let vals: Vec<f64> = (0..n).map(|_| rng.gen_range(-3.0..3.0)).collect();
            let psi = ConvexPotential::new(support, vals).unwrap();
            let a: Vec<f64> = (0..dim).map(|_| rng.gen_range(-3.0..3.0)).collect();
            let b: Vec<f64> = (0..dim).map(|_| rng.gen_range(-3.0..3.0)).collect();
            let t: f64 = rng.gen();
            let mid: Vec<f64> = a.iter().zip(&b).map(|(x, y)| t * x + (1.0 - t) * y).collect();
            let lhs = fenchel_conjugate(&psi, &mid).unwrap();
            let rhs = t * fenchel_conjugate(&psi, &a).unwrap()
                + (1.0 - t) * fenchel_conjugate(&psi, &b).unwrap();
            assert!(lhs <= rhs + 1e-9);

            let k = rng.gen_range(-5.0..5.0);
            let shifted = psi.shifted(k);
            assert!(
                (fenchel_conjugate(&shifted, &a).unwrap() - (fenchel_conjugate(&psi, &a).unwrap() - k)).abs()
                    <= 1e-12
            );
            for j in 0..n {
                let g = fenchel_gap(&psi, &a, j).unwrap();
                assert!(g >= -1e-12);
                assert!((fenchel_gap(&shifted, &a, j).unwrap() - g).abs() <= 1e-12);
            }
            assert_eq!(
                fenchel_conjugate(&psi, &vec![0.0; dim]).unwrap(),
                -psi.values().iter().cloned().fold(f64::INFINITY, f64::min)
            );
        }
    }
}
