//! Small instances where polar factors are unique, non-unique, or exist only
//! as inclusions. Finite instances always admit an optimal plan, so the
//! continuum obstruction shows up here as growing degeneracy rather than as
//! outright non-existence.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::measures::{DiscreteMeasure, Dimension, SampledMap, Site};
use crate::rearrangement::{construct_m_to_1, HeavySet};

pub const GALLERY_NAMES: [&str; 3] = ["flat-segment", "m-to-1-flat", "injective-control"];

#[derive(Debug, Clone)]
pub struct GalleryInstance {
    pub name: String,
    pub u: SampledMap,
    pub y: DiscreteMeasure,
    /// ∇ψ sampled on Y, the intended rearrangement of u.
    pub u_sharp: SampledMap,
    pub heavy: HeavySet,
}

/// Cell-centred N×N grid on [−1,1]², uniform weights 4/N².
fn grid(n: usize) -> Result<DiscreteMeasure> {
    let h = 2.0 / n as f64;
    let mut sites = Vec::with_capacity(n * n);
    for a in 0..n {
        for b in 0..n {
            let p = vec![-1.0 + h * (a as f64 + 0.5), -1.0 + h * (b as f64 + 0.5)];
            sites.push(Site::new(format!("y{a}_{b}"), Some(p)));
        }
    }
    DiscreteMeasure::new(Dimension::Euclidean(2), sites, vec![h * h; n * n])
}

/// u = u# ∘ σ on an abstract copy of Y, σ a seeded shuffle.
fn scramble(u_sharp: &SampledMap, rng: &mut ChaCha8Rng) -> Result<SampledMap> {
    let mut sigma: Vec<usize> = (0..u_sharp.len()).collect();
    sigma.shuffle(rng);
    let x = DiscreteMeasure::abstract_space(u_sharp.domain().weights().to_vec())?;
    let values = sigma.iter().map(|&j| u_sharp.value(j).to_vec()).collect();
    SampledMap::new(x, values)
}

/// Builds a named instance; deterministic per (name, n, seed).
pub fn gallery_instance(name: &str, n: usize, seed: u64) -> Result<GalleryInstance> {
    if !GALLERY_NAMES.contains(&name) {
        return Err(Error::UnknownGalleryName(name.to_string()));
    }
    if n == 0 {
        return Err(Error::InvalidInput("grid size must be positive".into()));
    }
    if name != "injective-control" && n % 2 == 1 {
        // the grid must avoid the axis y₁ = 0 where ψ is not differentiable
        return Err(Error::InvalidInput(format!("{name} needs an even grid size, got {n}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let y = grid(n)?;
    let grad: Vec<Vec<f64>> = match name {
        "injective-control" => {
            let a = rng.gen_range(0.1..0.5);
            let b = rng.gen_range(0.1..0.5);
            let c = rng.gen_range(-0.2..0.2);
            y.points()?
                .iter()
                .map(|p| vec![(1.0 + a) * p[0] + c * p[1], c * p[0] + (1.0 + b) * p[1]])
                .collect()
        }
        // ψ(y) = |y₁| + y₂²/2
        _ => y.points()?.iter().map(|p| vec![p[0].signum(), p[1]]).collect(),
    };
    let u_sharp = SampledMap::new(y.clone(), grad)?;
    let u = if name == "m-to-1-flat" {
        construct_m_to_1(&u_sharp, 2, &HeavySet::none())?.map
    } else {
        scramble(&u_sharp, &mut rng)?
    };
    Ok(GalleryInstance {
        name: name.to_string(),
        u,
        y,
        u_sharp,
        heavy: HeavySet::none(),
    })
}
