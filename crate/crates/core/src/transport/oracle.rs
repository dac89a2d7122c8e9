use crate::error::{Error, Result};
use crate::measures::{masses_agree, DiscreteMeasure};

use super::CostMatrix;

/// Largest side handled by [`brute_force_mk`].
pub const ORACLE_MAX_SIDE: usize = 8;

/// Exact optimum for uniform square instances by enumerating every
/// permutation; some permutation is optimal by Birkhoff's theorem.
pub fn brute_force_mk(cost: &CostMatrix, mu: &DiscreteMeasure, nu: &DiscreteMeasure) -> Result<f64> {
    let n = mu.len();
    if n != nu.len() || n > ORACLE_MAX_SIDE {
        return Err(Error::OracleScopeExceeded(format!("{}x{} instance", n, nu.len())));
    }
    if cost.rows() != n || cost.cols() != n {
        return Err(Error::InvalidInput(format!(
            "cost is {}x{}, measures are {n}x{n}",
            cost.rows(),
            cost.cols()
        )));
    }
    let w = mu.weight(0);
    let uniform = mu
        .weights()
        .iter()
        .chain(nu.weights())
        .all(|&x| masses_agree(x, w, 1e-12));
    if !uniform {
        return Err(Error::OracleScopeExceeded("weights are not uniform".into()));
    }

    // Heap's algorithm
    let mut perm: Vec<usize> = (0..n).collect();
    let mut counters = vec![0usize; n];
    let eval = |p: &[usize]| -> f64 { p.iter().enumerate().map(|(i, &j)| cost.get(i, j)).sum() };
    let mut best = eval(&perm);
    let mut k = 0;
    while k < n {
        if counters[k] < k {
            if k % 2 == 0 {
                perm.swap(0, k);
            } else {
                perm.swap(counters[k], k);
            }
            best = best.min(eval(&perm));
            counters[k] += 1;
            k = 0;
        } else {
            counters[k] = 0;
            k += 1;
        }
    }
    Ok(w * best)
}
