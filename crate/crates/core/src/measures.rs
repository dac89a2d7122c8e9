//! Finite weighted point sets, sampled maps on them, value laws and the
//! equimeasurability predicate.

use std::collections::{BTreeMap, HashMap, HashSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Relative tolerance used when two total masses must agree.
pub const MASS_REL_TOL: f64 = 1e-9;

/// Relative tolerance on total masses required by [`equimeasurable`].
pub const EQUIMEASURABLE_MASS_TOL: f64 = 1e-12;

/// Whether `a` and `b` agree to `rel` relative to the larger magnitude.
pub fn masses_agree(a: f64, b: f64, rel: f64) -> bool {
    (a - b).abs() <= rel * a.abs().max(b.abs())
}

/// Dimension of the space a measure lives in.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Dimension {
    Euclidean(usize),
    /// Domain-only space: points carry labels but no coordinates.
    Abstract,
}

impl Dimension {
    pub fn euclidean(self) -> Option<usize> {
        match self {
            Dimension::Euclidean(n) => Some(n),
            Dimension::Abstract => None,
        }
    }
}

/// A labelled site, optionally with coordinates in ℝⁿ.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Site {
    pub label: String,
    #[serde(default)]
    pub coords: Option<Vec<f64>>,
}

impl Site {
    pub fn new(label: impl Into<String>, coords: Option<Vec<f64>>) -> Self {
        Site { label: label.into(), coords }
    }
}

/// A finite positive measure: labelled sites carrying strictly positive masses.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "MeasureRepr", into = "MeasureRepr")]
pub struct DiscreteMeasure {
    dimension: Dimension,
    sites: Vec<Site>,
    weights: Vec<f64>,
    total: f64,
}

impl DiscreteMeasure {
    pub fn new(dimension: Dimension, sites: Vec<Site>, weights: Vec<f64>) -> Result<Self> {
        let mut measure = DiscreteMeasure {
            dimension,
            sites,
            weights,
            total: 0.0,
        };
        measure.total = validate(&measure)?;
        Ok(measure)
    }

    /// Points of ℝⁿ labelled by their position (`"0"`, `"1"`, ...).
    pub fn from_points(points: Vec<Vec<f64>>, weights: Vec<f64>) -> Result<Self> {
        let dim = points.first().map(Vec::len).unwrap_or(0);
        let sites = points
            .into_iter()
            .enumerate()
            .map(|(i, p)| Site::new(i.to_string(), Some(p)))
            .collect();
        Self::new(Dimension::Euclidean(dim), sites, weights)
    }

    /// Points of ℝⁿ sharing `total` mass equally.
    pub fn uniform(points: Vec<Vec<f64>>, total: f64) -> Result<Self> {
        let w = total / points.len().max(1) as f64;
        let weights = vec![w; points.len()];
        Self::from_points(points, weights)
    }

    /// Coordinate-free measure on `weights.len()` labelled points.
    pub fn abstract_space(weights: Vec<f64>) -> Result<Self> {
        let sites = (0..weights.len())
            .map(|i| Site::new(format!("x{i}"), None))
            .collect();
        Self::new(Dimension::Abstract, sites, weights)
    }

    pub fn dimension(&self) -> Dimension {
        self.dimension
    }

    pub fn len(&self) -> usize {
        self.sites.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sites.is_empty()
    }

    pub fn sites(&self) -> &[Site] {
        &self.sites
    }

    pub fn label(&self, i: usize) -> &str {
        &self.sites[i].label
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn weight(&self, i: usize) -> f64 {
        self.weights[i]
    }

    pub fn total_mass(&self) -> f64 {
        self.total
    }

    pub fn coords(&self, i: usize) -> Option<&[f64]> {
        self.sites[i].coords.as_deref()
    }

    /// All coordinate vectors; fails if the measure is abstract or any point
    /// lacks coordinates.
    pub fn points(&self) -> Result<Vec<&[f64]>> {
        if self.dimension == Dimension::Abstract {
            return Err(Error::InvalidInput(
                "measure is abstract; coordinates are required".into(),
            ));
        }
        self.sites
            .iter()
            .map(|s| {
                s.coords.as_deref().ok_or_else(|| {
                    Error::InvalidInput(format!("point `{}` has no coordinates", s.label))
                })
            })
            .collect()
    }

    /// Index of the site carrying `label`.
    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.sites.iter().position(|s| s.label == label)
    }

    /// Same sites, replacing the weights.
    pub fn with_weights(&self, weights: Vec<f64>) -> Result<Self> {
        Self::new(self.dimension, self.sites.clone(), weights)
    }

    /// Sub-measure on the given point indices, in the given order.
    pub fn subset(&self, indices: &[usize]) -> Result<Self> {
        let sites = indices.iter().map(|&i| self.sites[i].clone()).collect();
        let weights = indices.iter().map(|&i| self.weights[i]).collect();
        Self::new(self.dimension, sites, weights)
    }
}

/// Checks every measure invariant and returns the total mass.
pub fn validate(measure: &DiscreteMeasure) -> Result<f64> {
    if measure.sites.len() != measure.weights.len() {
        return Err(Error::InvalidInput(format!(
            "{} points but {} weights",
            measure.sites.len(),
            measure.weights.len()
        )));
    }
    if measure.sites.is_empty() {
        return Err(Error::InvalidInput("measure has no points".into()));
    }
    if measure.dimension == Dimension::Euclidean(0) {
        return Err(Error::InvalidInput("dimension must be at least 1".into()));
    }
    let mut seen = HashSet::with_capacity(measure.sites.len());
    let mut total = 0.0;
    for (site, &w) in measure.sites.iter().zip(&measure.weights) {
        if !(w.is_finite() && w > 0.0) {
            return Err(Error::NegativeWeight {
                label: site.label.clone(),
                weight: w,
            });
        }
        if !seen.insert(site.label.as_str()) {
            return Err(Error::DuplicateLabel(site.label.clone()));
        }
        match (measure.dimension, &site.coords) {
            (Dimension::Euclidean(n), Some(c)) => {
                if c.len() != n {
                    return Err(Error::DimensionMismatch {
                        expected: n,
                        found: c.len(),
                    });
                }
                if c.iter().any(|x| !x.is_finite()) {
                    return Err(Error::InvalidInput(format!(
                        "point `{}` has non-finite coordinates",
                        site.label
                    )));
                }
            }
            (Dimension::Abstract, Some(c)) => {
                return Err(Error::InvalidInput(format!(
                    "abstract measure point `{}` carries {} coordinates",
                    site.label,
                    c.len()
                )));
            }
            _ => {}
        }
        total += w;
    }
    if !(total.is_finite() && total > 0.0) {
        return Err(Error::InvalidInput(format!("total mass {total} is not usable")));
    }
    Ok(total)
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum DimensionRepr {
    Euclidean(usize),
    Named(String),
}

#[derive(Serialize, Deserialize)]
struct PointRepr {
    label: String,
    #[serde(default)]
    coords: Option<Vec<f64>>,
    weight: f64,
}

#[derive(Serialize, Deserialize)]
struct MeasureRepr {
    dimension: DimensionRepr,
    points: Vec<PointRepr>,
}

impl TryFrom<MeasureRepr> for DiscreteMeasure {
    type Error = Error;

    fn try_from(repr: MeasureRepr) -> Result<Self> {
        let dimension = match repr.dimension {
            DimensionRepr::Euclidean(n) => Dimension::Euclidean(n),
            DimensionRepr::Named(s) if s == "abstract" => Dimension::Abstract,
            DimensionRepr::Named(s) => {
                return Err(Error::InvalidInput(format!("unknown dimension `{s}`")))
            }
        };
        let (sites, weights) = repr
            .points
            .into_iter()
            .map(|p| (Site::new(p.label, p.coords), p.weight))
            .unzip();
        DiscreteMeasure::new(dimension, sites, weights)
    }
}

impl From<DiscreteMeasure> for MeasureRepr {
    fn from(m: DiscreteMeasure) -> Self {
        let dimension = match m.dimension {
            Dimension::Euclidean(n) => DimensionRepr::Euclidean(n),
            Dimension::Abstract => DimensionRepr::Named("abstract".into()),
        };
        let points = m
            .sites
            .into_iter()
            .zip(m.weights)
            .map(|(s, weight)| PointRepr {
                label: s.label,
                coords: s.coords,
                weight,
            })
            .collect();
        MeasureRepr { dimension, points }
    }
}

/// Values of a map u : X → ℝⁿ at the support points of its domain measure.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "MapRepr", into = "MapRepr")]
pub struct SampledMap {
    domain: DiscreteMeasure,
    values: Vec<Vec<f64>>,
    codomain_dimension: usize,
}

impl SampledMap {
    pub fn new(domain: DiscreteMeasure, values: Vec<Vec<f64>>) -> Result<Self> {
        if values.len() != domain.len() {
            return Err(Error::InvalidInput(format!(
                "{} values for {} domain points",
                values.len(),
                domain.len()
            )));
        }
        let n = values[0].len();
        if n == 0 {
            return Err(Error::InvalidInput("map values must be non-empty vectors".into()));
        }
        for v in &values {
            if v.len() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    found: v.len(),
                });
            }
            if v.iter().any(|x| !x.is_finite()) {
                return Err(Error::InvalidInput("map value has non-finite components".into()));
            }
        }
        Ok(SampledMap {
            domain,
            values,
            codomain_dimension: n,
        })
    }

    pub fn domain(&self) -> &DiscreteMeasure {
        &self.domain
    }

    pub fn values(&self) -> &[Vec<f64>] {
        &self.values
    }

    pub fn value(&self, i: usize) -> &[f64] {
        &self.values[i]
    }

    pub fn codomain_dimension(&self) -> usize {
        self.codomain_dimension
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// The map u ∘ σ on the same domain, i.e. point `i` takes the value of
    /// point `perm[i]`.
    pub fn permuted(&self, perm: &[usize]) -> Result<Self> {
        let values = perm.iter().map(|&p| self.values[p].clone()).collect();
        SampledMap::new(self.domain.clone(), values)
    }
}

#[derive(Serialize, Deserialize)]
struct MapRepr {
    measure: DiscreteMeasure,
    values: Vec<Vec<f64>>,
}

impl TryFrom<MapRepr> for SampledMap {
    type Error = Error;

    fn try_from(repr: MapRepr) -> Result<Self> {
        SampledMap::new(repr.measure, repr.values)
    }
}

impl From<SampledMap> for MapRepr {
    fn from(m: SampledMap) -> Self {
        MapRepr {
            measure: m.domain,
            values: m.values,
        }
    }
}

/// One atom of a value law.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Atom {
    pub value: Vec<f64>,
    pub mass: f64,
    /// Number of domain points whose value falls in this atom.
    pub count: usize,
}

/// Pushforward law of a sampled map: atoms sorted by value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValueLaw {
    pub atoms: Vec<Atom>,
    pub tolerance: f64,
    /// Atom index of every domain point.
    pub assignment: Vec<usize>,
    #[serde(skip)]
    keys: Vec<Vec<i64>>,
}

impl ValueLaw {
    pub fn total_mass(&self) -> f64 {
        self.atoms.iter().map(|a| a.mass).sum()
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    /// Index of the atom whose clustering cell contains `value`.
    pub fn find(&self, value: &[f64]) -> Option<usize> {
        let key = value_key(value, self.tolerance);
        self.keys.binary_search(&key).ok()
    }

    /// Domain point indices carried by atom `a`.
    pub fn carriers(&self, a: usize) -> Vec<usize> {
        self.assignment
            .iter()
            .enumerate()
            .filter(|(_, &k)| k == a)
            .map(|(i, _)| i)
            .collect()
    }
}

/// Order-preserving integer image of an `f64` (with `-0.0` folded onto `0.0`).
fn ordered_bits(x: f64) -> i64 {
    let x = if x == 0.0 { 0.0 } else { x };
    let bits = x.to_bits() as i64;
    if bits < 0 {
        bits ^ i64::MAX
    } else {
        bits
    }
}

/// Clustering key: exact value at tolerance zero, grid cell otherwise.
pub(crate) fn value_key(value: &[f64], tol: f64) -> Vec<i64> {
    if tol == 0.0 {
        value.iter().map(|&x| ordered_bits(x)).collect()
    } else {
        value.iter().map(|&x| (x / tol).round() as i64).collect()
    }
}

/// Pushforward law ν(B) = μ(u⁻¹(B)) of `map`, clustering values that share a
/// grid cell of side `cluster_tol` (exact duplicates when it is zero).
pub fn value_law(map: &SampledMap, cluster_tol: f64) -> Result<ValueLaw> {
    if !(cluster_tol >= 0.0 && cluster_tol.is_finite()) {
        return Err(Error::InvalidInput(format!(
            "cluster tolerance {cluster_tol} must be finite and non-negative"
        )));
    }
    let mut groups: BTreeMap<Vec<i64>, Vec<usize>> = BTreeMap::new();
    for (i, v) in map.values.iter().enumerate() {
        groups.entry(value_key(v, cluster_tol)).or_default().push(i);
    }
    let weights = map.domain.weights();
    let mut atoms = Vec::with_capacity(groups.len());
    let mut keys = Vec::with_capacity(groups.len());
    let mut assignment = vec![0; map.len()];
    for (a, (key, members)) in groups.into_iter().enumerate() {
        let mut mass = 0.0;
        for &i in &members {
            mass += weights[i];
            assignment[i] = a;
        }
        // representative: lexicographically smallest member value
        let value = members
            .iter()
            .map(|&i| &map.values[i])
            .min_by(|x, y| {
                x.iter()
                    .zip(y.iter())
                    .map(|(p, q)| p.total_cmp(q))
                    .find(|o| o.is_ne())
                    .unwrap_or(std::cmp::Ordering::Equal)
            })
            .cloned()
            .unwrap_or_default();
        atoms.push(Atom {
            value,
            mass,
            count: members.len(),
        });
        keys.push(key);
    }
    Ok(ValueLaw {
        atoms,
        tolerance: cluster_tol,
        assignment,
        keys,
    })
}

/// Whether `f` and `g` are rearrangements of each other.
pub fn equimeasurable(f: &SampledMap, g: &SampledMap, cluster_tol: f64) -> Result<bool> {
    if f.codomain_dimension != g.codomain_dimension {
        return Err(Error::DimensionMismatch {
            expected: f.codomain_dimension,
            found: g.codomain_dimension,
        });
    }
    let (mf, mg) = (f.domain.total_mass(), g.domain.total_mass());
    if !masses_agree(mf, mg, EQUIMEASURABLE_MASS_TOL) {
        return Err(Error::UnequalMass { left: mf, right: mg });
    }
    let lf = value_law(f, cluster_tol)?;
    let lg = value_law(g, cluster_tol)?;
    Ok(laws_match(&lf, &lg))
}

/// Same atom cells with masses equal to [`MASS_REL_TOL`] relative.
pub fn laws_match(a: &ValueLaw, b: &ValueLaw) -> bool {
    a.keys.len() == b.keys.len()
        && a.keys == b.keys
        && a
            .atoms
            .iter()
            .zip(&b.atoms)
            .all(|(x, y)| masses_agree(x.mass, y.mass, MASS_REL_TOL))
}

/// Image weights on `n_target` sites of `weights` under an index assignment.
pub fn pushforward_indices(weights: &[f64], assignment: &[usize], n_target: usize) -> Vec<f64> {
    let mut out = vec![0.0; n_target];
    for (&w, &j) in weights.iter().zip(assignment) {
        out[j] += w;
    }
    out
}

/// Image of `measure` under a label assignment into `target`. Only target
/// points that receive mass appear in the result, in target order.
pub fn pushforward(
    measure: &DiscreteMeasure,
    assignment: &HashMap<String, String>,
    target: &DiscreteMeasure,
) -> Result<DiscreteMeasure> {
    let index: HashMap<&str, usize> = target
        .sites()
        .iter()
        .enumerate()
        .map(|(j, s)| (s.label.as_str(), j))
        .collect();
    let mut targets = Vec::with_capacity(measure.len());
    for site in measure.sites() {
        let to = assignment
            .get(&site.label)
            .ok_or_else(|| Error::UnknownLabel(site.label.clone()))?;
        let j = *index
            .get(to.as_str())
            .ok_or_else(|| Error::UnknownLabel(to.clone()))?;
        targets.push(j);
    }
    let image = pushforward_indices(measure.weights(), &targets, target.len());
    let hit: Vec<usize> = (0..target.len()).filter(|&j| image[j] > 0.0).collect();
    let sites = hit.iter().map(|&j| target.sites()[j].clone()).collect();
    let weights = hit.iter().map(|&j| image[j]).collect();
    DiscreteMeasure::new(target.dimension(), sites, weights)
}
