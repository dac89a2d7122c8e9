//! Monotone rearrangement, the m-to-1 rearrangement construction on a refined
//! domain, and level-set multiplicity diagnostics.

use serde::{Deserialize, Serialize};

use crate::convex::{fenchel_gap, ConvexPotential, DEFAULT_GAP_TOL};
use crate::error::{Error, Result};
use crate::measures::{
    laws_match, masses_agree, value_law, DiscreteMeasure, SampledMap, Site, ValueLaw, MASS_REL_TOL,
};
use crate::transport::{build_cost, solve_mk, MkSolution, TransportPlan, Triplet};

/// Values designated as level sets of positive measure ("heavy" atoms).
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct HeavySet {
    pub values: Vec<Vec<f64>>,
    /// Sup-norm tolerance when matching a designated value to an atom.
    #[serde(default)]
    pub tol: f64,
}

impl HeavySet {
    pub fn none() -> Self {
        HeavySet::default()
    }

    pub fn new(values: Vec<Vec<f64>>, tol: f64) -> Self {
        HeavySet { values, tol }
    }

    /// Per-atom heavy flags; every designated value must match some atom.
    pub fn flags(&self, law: &ValueLaw) -> Result<Vec<bool>> {
        let mut flags = vec![false; law.len()];
        for h in &self.values {
            let mut found = false;
            for (a, atom) in law.atoms.iter().enumerate() {
                let close = atom.value.len() == h.len()
                    && atom.value.iter().zip(h).all(|(x, y)| (x - y).abs() <= self.tol);
                if close {
                    flags[a] = true;
                    found = true;
                }
            }
            if !found {
                return Err(Error::UnknownHeavyAtom(h.clone()));
            }
        }
        Ok(flags)
    }
}

/// How a target site receiving several value atoms is handled.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum SplitMode {
    /// Fail with [`Error::SplitAtom`].
    #[default]
    Strict,
    /// Subdivide the offending sites proportionally and solve once more.
    Refine,
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct RearrangeOptions {
    pub cluster_tol: f64,
    pub split: SplitMode,
}

/// Output of [`monotone_rearrangement`].
#[derive(Debug, Clone)]
pub struct Rearrangement {
    /// u# on the (possibly refined) target measure.
    pub u_sharp: SampledMap,
    /// ψ on the same sites; u#(y) lies in its discrete subdifferential.
    pub psi: ConvexPotential,
    /// Optimal plan between value atoms (rows) and target sites (columns).
    pub plan: TransportPlan,
    pub law: ValueLaw,
    /// Value atom assigned to each target site.
    pub site_atom: Vec<usize>,
    pub max_gap: f64,
    /// Whether the target measure had to be subdivided.
    pub refined: bool,
}

fn atom_map(law: &ValueLaw) -> Result<SampledMap> {
    let domain = DiscreteMeasure::abstract_space(law.atoms.iter().map(|a| a.mass).collect())?;
    SampledMap::new(domain, law.atoms.iter().map(|a| a.value.clone()).collect())
}

/// Atoms landing on each column of `plan`, sorted, with their masses.
fn column_atoms(plan: &TransportPlan) -> Vec<Vec<(usize, f64)>> {
    let mut cols = vec![Vec::new(); plan.cols()];
    for t in plan.triplets() {
        cols[t.j].push((t.i, t.mass));
    }
    for c in &mut cols {
        c.sort_by_key(|&(i, _)| i);
    }
    cols
}

/// Monotone rearrangement u# of `u` on `y`: the rearrangement of u that is
/// the gradient of a convex ψ, read off an optimal plan between the value
/// law of u and `y`.
pub fn monotone_rearrangement(u: &SampledMap, y: &DiscreteMeasure, opts: RearrangeOptions) -> Result<Rearrangement> {
    let law = value_law(u, opts.cluster_tol)?;
    let atoms = atom_map(&law)?;
    let mut target = y.clone();
    let mut refined = false;
    let mut sol = solve_mk(&build_cost(&atoms, &target)?, atoms.domain(), &target)?;
    let mut cols = column_atoms(&sol.plan);

    if let Some(site) = cols.iter().position(|c| c.len() > 1) {
        if opts.split == SplitMode::Strict {
            return Err(Error::SplitAtom {
                site,
                atoms: cols[site].len(),
            });
        }
        // lift the plan onto subdivided sites: each piece takes one atom
        let mut sites = Vec::new();
        let mut weights = Vec::new();
        let mut lifted = Vec::new();
        for (j, c) in cols.iter().enumerate() {
            let s = &target.sites()[j];
            if c.len() <= 1 {
                sites.push(s.clone());
                weights.push(target.weight(j));
                lifted.push(c.clone());
            } else {
                for (r, &(a, mass)) in c.iter().enumerate() {
                    sites.push(Site::new(format!("{}#{}", s.label, r + 1), s.coords.clone()));
                    weights.push(mass);
                    lifted.push(vec![(a, mass)]);
                }
            }
        }
        target = DiscreteMeasure::new(target.dimension(), sites, weights)?;
        refined = true;
        // the second solve supplies duals for the refined sites; optimal
        // duals are complementary to every optimal plan, including the
        // lifted one, which the gap check below confirms
        let resolved = solve_mk(&build_cost(&atoms, &target)?, atoms.domain(), &target)?;
        let triplets = lifted
            .iter()
            .enumerate()
            .map(|(j, c)| Triplet { i: c[0].0, j, mass: c[0].1 })
            .collect();
        let plan = TransportPlan::new(triplets, atoms.domain().weights().to_vec(), target.weights().to_vec())?;
        plan.check_marginals()?;
        sol = MkSolution { plan, ..resolved };
        cols = lifted;
    }

    let site_atom: Vec<usize> = cols.iter().map(|c| c[0].0).collect();
    let values = site_atom.iter().map(|&a| law.atoms[a].value.clone()).collect();
    let u_sharp = SampledMap::new(target.clone(), values)?;
    let psi = ConvexPotential::from_kantorovich(target, &sol.duals.phi)?;

    let mut max_gap: f64 = 0.0;
    for (j, &a) in site_atom.iter().enumerate() {
        max_gap = max_gap.max(fenchel_gap(&psi, &law.atoms[a].value, j)?);
    }
    if max_gap > DEFAULT_GAP_TOL {
        return Err(Error::NumericalFailure(format!(
            "rearrangement certificate gap {max_gap:e}"
        )));
    }
    if !laws_match(&law, &value_law(&u_sharp, opts.cluster_tol)?) {
        return Err(Error::NumericalFailure("u# is not a rearrangement of u".into()));
    }
    Ok(Rearrangement {
        u_sharp,
        psi,
        plan: sol.plan,
        law,
        site_atom,
        max_gap,
        refined,
    })
}

/// Domain obtained by splitting each parent point into `m` children of equal
/// weight, one per block.
#[derive(Debug, Clone, PartialEq)]
pub struct RefinedDomain {
    pub parent: DiscreteMeasure,
    pub m: usize,
    /// Children in block-major order, labelled `parentLabel#j` (j = 1..m).
    pub measure: DiscreteMeasure,
    pub parent_of: Vec<usize>,
    /// Block index in 1..=m of every child.
    pub block_of: Vec<usize>,
}

impl RefinedDomain {
    pub fn new(parent: DiscreteMeasure, m: usize) -> Result<Self> {
        if m == 0 {
            return Err(Error::InvalidInput("split factor m must be at least 1".into()));
        }
        let n = parent.len();
        let mut sites = Vec::with_capacity(n * m);
        let mut weights = Vec::with_capacity(n * m);
        let mut parent_of = Vec::with_capacity(n * m);
        let mut block_of = Vec::with_capacity(n * m);
        for block in 1..=m {
            for p in 0..n {
                let s = &parent.sites()[p];
                sites.push(Site::new(format!("{}#{block}", s.label), s.coords.clone()));
                weights.push(parent.weight(p) / m as f64);
                parent_of.push(p);
                block_of.push(block);
            }
        }
        let measure = DiscreteMeasure::new(parent.dimension(), sites, weights)?;
        Ok(RefinedDomain {
            parent,
            m,
            measure,
            parent_of,
            block_of,
        })
    }
}

/// Output of [`construct_m_to_1`].
#[derive(Debug, Clone)]
pub struct MToOne {
    pub domain: RefinedDomain,
    pub map: SampledMap,
}

/// Rearrangement of `v` that is m-to-1 off the heavy level sets.
///
/// Each light value atom is collapsed onto one parent point (its first
/// carrier, weighted by the atom mass); heavy carriers stay as they are. The
/// parent measure is refined into `m` blocks and every block carries a copy
/// of the collapsed map scaled by 1/m, so each light value is attained once
/// per block and heavy values keep their mass on all children of their
/// carriers.
pub fn construct_m_to_1(v: &SampledMap, m: usize, heavy: &HeavySet) -> Result<MToOne> {
    if m == 0 {
        return Err(Error::InvalidInput("split factor m must be at least 1".into()));
    }
    let law = value_law(v, 0.0)?;
    let is_heavy = heavy.flags(&law)?;
    let domain = v.domain();
    let mut seen = vec![false; law.len()];
    let mut sites = Vec::new();
    let mut weights = Vec::new();
    let mut parent_values = Vec::new();
    for p in 0..domain.len() {
        let a = law.assignment[p];
        if is_heavy[a] {
            sites.push(domain.sites()[p].clone());
            weights.push(domain.weight(p));
        } else if !seen[a] {
            seen[a] = true;
            sites.push(domain.sites()[p].clone());
            weights.push(law.atoms[a].mass);
        } else {
            continue;
        }
        parent_values.push(v.value(p).to_vec());
    }
    let parent = DiscreteMeasure::new(domain.dimension(), sites, weights)?;
    let refined = RefinedDomain::new(parent, m)?;
    let values = refined
        .parent_of
        .iter()
        .map(|&p| parent_values[p].clone())
        .collect();
    let map = SampledMap::new(refined.measure.clone(), values)?;
    Ok(MToOne { domain: refined, map })
}

/// Count and mass of one value atom.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AtomMultiplicity {
    pub value: Vec<f64>,
    pub mass: f64,
    pub point_count: usize,
    pub heavy: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MultiplicityReport {
    pub atoms: Vec<AtomMultiplicity>,
    /// Every light atom is carried by exactly one point.
    pub almost_injective: bool,
    /// The common point count of all light atoms, if there is one.
    pub almost_m_to_1: Option<usize>,
    /// Largest point count among light atoms (0 without light atoms).
    pub max_light_count: usize,
}

impl MultiplicityReport {
    /// Whether every light atom is carried by exactly `m` points; vacuously
    /// true when all atoms are heavy.
    pub fn is_m_to_1(&self, m: usize) -> bool {
        self.atoms.iter().filter(|a| !a.heavy).all(|a| a.point_count == m)
    }

    pub fn heavy_mass(&self) -> f64 {
        self.atoms.iter().filter(|a| a.heavy).map(|a| a.mass).sum()
    }
}

/// Per-value point counts of `u`, with `heavy` values excluded from the
/// injectivity and m-to-1 summaries.
pub fn multiplicity_report(u: &SampledMap, heavy: &HeavySet) -> Result<MultiplicityReport> {
    let law = value_law(u, 0.0)?;
    let flags = heavy.flags(&law)?;
    let atoms: Vec<AtomMultiplicity> = law
        .atoms
        .iter()
        .zip(&flags)
        .map(|(a, &h)| AtomMultiplicity {
            value: a.value.clone(),
            mass: a.mass,
            point_count: a.count,
            heavy: h,
        })
        .collect();
    let light: Vec<usize> = atoms.iter().filter(|a| !a.heavy).map(|a| a.point_count).collect();
    let almost_injective = light.iter().all(|&c| c == 1);
    let almost_m_to_1 = match light.first() {
        Some(&c) if light.iter().all(|&k| k == c) => Some(c),
        _ => None,
    };
    Ok(MultiplicityReport {
        atoms,
        almost_injective,
        almost_m_to_1,
        max_light_count: light.into_iter().max().unwrap_or(0),
    })
}

/// Closed axis-aligned box in ℝⁿ standing in for a Borel set of values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValueBox {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

impl ValueBox {
    pub fn new(lo: Vec<f64>, hi: Vec<f64>) -> Result<Self> {
        if lo.len() != hi.len() || lo.is_empty() {
            return Err(Error::InvalidInput("box corners must have equal, non-zero length".into()));
        }
        if lo.iter().zip(&hi).any(|(a, b)| !(a < b)) {
            return Err(Error::InvalidInput("box is degenerate".into()));
        }
        Ok(ValueBox { lo, hi })
    }

    pub fn contains(&self, v: &[f64]) -> bool {
        v.iter()
            .zip(self.lo.iter().zip(&self.hi))
            .all(|(x, (a, b))| *a <= *x && *x <= *b)
    }
}

/// u restricted to u⁻¹(box). An empty restriction is reported as
/// [`Error::EmptyRestriction`], which callers may treat as a warning.
pub fn restrict_to_value_set(u: &SampledMap, value_box: &ValueBox) -> Result<SampledMap> {
    if value_box.lo.len() != u.codomain_dimension() {
        return Err(Error::DimensionMismatch {
            expected: u.codomain_dimension(),
            found: value_box.lo.len(),
        });
    }
    let kept: Vec<usize> = (0..u.len()).filter(|&i| value_box.contains(u.value(i))).collect();
    if kept.is_empty() {
        return Err(Error::EmptyRestriction);
    }
    let domain = u.domain().subset(&kept)?;
    SampledMap::new(domain, kept.iter().map(|&i| u.value(i).to_vec()).collect())
}

/// Mass carried by heavy atoms in `u`'s law; used to check preservation.
pub fn heavy_mass(u: &SampledMap, heavy: &HeavySet) -> Result<f64> {
    Ok(multiplicity_report(u, heavy)?.heavy_mass())
}

/// Whether the heavy masses of two maps agree to [`MASS_REL_TOL`].
pub fn heavy_mass_preserved(before: &SampledMap, after: &SampledMap, heavy: &HeavySet) -> Result<bool> {
    let (a, b) = (heavy_mass(before, heavy)?, heavy_mass(after, heavy)?);
    Ok((a == 0.0 && b == 0.0) || masses_agree(a, b, MASS_REL_TOL))
}
