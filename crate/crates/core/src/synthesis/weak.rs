use num_complex::Complex64;
use serde::Serialize;

use super::{finish, EpRealization, Flag, Topology, REGIME_TOLERANCE};
use crate::error::{Error, Result};
use crate::model::{CouplingSet, ResonatorSet};

/// Open interval of real `σ` reachable by the linear chain whose middle
/// resonator is `middle` (zero-based, in sorted order).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Interval {
    pub middle: usize,
    pub lower: f64,
    pub upper: f64,
}

impl Interval {
    /// Membership with the endpoints widened by `tol`.
    pub fn contains(&self, sigma: f64, tol: f64) -> bool {
        sigma > self.lower - tol && sigma < self.upper + tol
    }

    pub fn is_empty(&self) -> bool {
        self.lower >= self.upper
    }
}

/// The two resonators that end a chain with the given middle, ascending.
pub(crate) fn chain_ends(middle: usize) -> (usize, usize) {
    match middle {
        0 => (1, 2),
        1 => (0, 2),
        _ => (0, 1),
    }
}

/// Admissible `σ` for each linear topology, indexed by the middle resonator.
///
/// With ends `p < q` the chain reaches `σ ∈ (−γ_q/2, −γ_p/2)`; the union over
/// the three chains is `(−γ₃/2, −γ₁/2)` and every point is covered twice.
pub fn admissible_ranges(res: &ResonatorSet) -> Result<[Interval; 3]> {
    if res.delta() == 0.0 {
        return Err(Error::NoEpPossible);
    }
    let g = res.gammas();
    Ok([0, 1, 2].map(|middle| {
        let (p, q) = chain_ends(middle);
        Interval {
            middle,
            lower: -g[q] / 2.0,
            upper: -g[p] / 2.0,
        }
    }))
}

/// `κ_pm` for end `p` of a chain whose other end is `q`.
pub(crate) fn chain_coupling(gp: f64, gq: f64, sigma: f64) -> f64 {
    let ratio = (gp + 2.0 * sigma) / (gp - gq);
    (gp - sigma).abs() * ratio.max(0.0).sqrt()
}

/// Linear-chain realizations of a real EP eigenvalue `σ`.
pub fn synthesize_weak(res: &ResonatorSet, sigma: f64) -> Result<Vec<EpRealization>> {
    if res.delta() == 0.0 {
        return Err(Error::NoEpPossible);
    }
    if !sigma.is_finite() {
        return Err(Error::InvalidInput(format!(
            "sigma must be finite, got {sigma}"
        )));
    }
    let tol = REGIME_TOLERANCE * res.delta();
    if sigma.abs() <= tol {
        return Err(Error::WrongRegime(
            "sigma = 0 is the critical regime".into(),
        ));
    }
    let g = res.gammas();
    let (lo, hi) = (-g[2] / 2.0, -g[0] / 2.0);
    if !(sigma > lo && sigma < hi) {
        return Err(Error::NotAdmissible {
            sigma: Complex64::new(sigma, 0.0),
            reason: format!("real sigma must lie in ({lo}, {hi})"),
        });
    }
    Ok(chains(res, sigma))
}

/// Chain solutions in the order middle = 2, 1, 3 (one-based), skipping empty
/// ranges and networks that coincide after a coupling vanishes.
pub(crate) fn chains(res: &ResonatorSet, sigma: f64) -> Vec<EpRealization> {
    let g = res.gammas();
    let tol = REGIME_TOLERANCE * res.delta();
    let ranges = admissible_ranges(res).expect("delta checked by caller");
    let mut out: Vec<EpRealization> = Vec::new();
    for middle in [1, 0, 2] {
        let range = ranges[middle];
        if range.is_empty() || !range.contains(sigma, tol) {
            continue;
        }
        let (p, q) = chain_ends(middle);
        let mut couplings = CouplingSet::zero();
        let mut flags = Vec::new();
        for (end, other) in [(p, q), (q, p)] {
            let mut k = chain_coupling(g[end], g[other], sigma);
            if k <= tol {
                k = 0.0;
                flags.push(Flag::Boundary);
            }
            couplings.set_between(end, middle, k);
        }
        if out.iter().any(|r| r.couplings == couplings) {
            continue;
        }
        if (sigma - range.lower).abs() <= tol || (sigma - range.upper).abs() <= tol {
            flags.push(Flag::Boundary);
        }
        flags.dedup();
        let Some(topology) = Topology::of(&couplings) else {
            continue;
        };
        out.push(finish(
            g,
            topology,
            couplings,
            Complex64::new(sigma, 0.0),
            flags,
        ));
    }
    out
}
