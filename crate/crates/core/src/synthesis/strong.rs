use num_complex::Complex64;
use serde::Serialize;

use super::{finish, EpRealization, Flag, Topology};
use crate::error::{Error, Result};
use crate::model::{CouplingSet, ResonatorSet};

/// Relative gap (in units of the largest rate) below which two rates tie.
const TIE_TOLERANCE: f64 = 1e-12;
/// `|σ|` below this many Δ belongs to the critical regime.
const STRONG_FLOOR: f64 = 1e-9;

/// The cubic `x (x − x₁)(x − x₂) = y₀` in `x = κ₃₁²` for distinct sorted
/// rates `γ₁ < γ₂ < γ₃` and imaginary EP eigenvalue `±iσ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CubicProblem {
    pub x1: f64,
    pub x2: f64,
    pub y0: f64,
    /// Discriminant of the expanded cubic; positive whenever `y0 > 0`.
    pub discriminant: f64,
}

/// A root with its offsets from `x₁`, `x₂` computed without cancellation.
#[derive(Debug, Clone, Copy)]
struct Root {
    x: f64,
    minus_x1: f64,
    minus_x2: f64,
}

impl CubicProblem {
    pub fn new(gammas: [f64; 3], sigma: f64) -> Self {
        let [g1, g2, g3] = gammas;
        let s2 = sigma * sigma;
        let x1 = g3 * (g3 * g3 + 3.0 * s2) / (g3 - g2);
        let x2 = g1 * (g1 * g1 + 3.0 * s2) / (g1 - g2);
        let y0 = (g3 - g1).powi(2) * s2 * s2 * s2 / ((g1 - g2) * (g2 - g3));
        let s = x1 + x2;
        let c = x1 * x2;
        let discriminant =
            c * c * (x1 - x2).powi(2) - y0 * s * (4.0 * s * s - 18.0 * c) - 27.0 * y0 * y0;
        CubicProblem {
            x1,
            x2,
            y0,
            discriminant,
        }
    }

    /// `x (x − x₁)(x − x₂) − y₀`
    pub fn eval(&self, x: f64) -> f64 {
        x * (x - self.x1) * (x - self.x2) - self.y0
    }

    /// The two roots in `(0, min(x₁, x₂))`, larger first.
    pub fn admissible_roots(&self) -> Result<[f64; 2]> {
        self.roots().map(|r| r.map(|root| root.x))
    }

    fn roots(&self) -> Result<[Root; 2]> {
        let (x1, x2, y0) = (self.x1, self.x2, self.y0);
        if !(x1 > 0.0 && x2 > 0.0 && y0 > 0.0)
            || !(x1.is_finite() && x2.is_finite() && y0.is_finite())
        {
            return Err(Error::InvalidInput(format!(
                "cubic needs positive x1, x2, y0; got {x1}, {x2}, {y0}"
            )));
        }
        let (lo, hi) = (x1.min(x2), x1.max(x2));
        // local maximum of x(x−x1)(x−x2) inside (0, lo), rationalized
        let sum = x1 + x2;
        let peak = x1 * x2 / (sum + (sum * sum - 3.0 * x1 * x2).sqrt());
        let peak_value = peak * (lo - peak) * (hi - peak);
        if y0 >= peak_value {
            return Err(Error::NotAdmissible {
                sigma: Complex64::new(0.0, 0.0),
                reason: format!("cubic has no admissible roots (y0 = {y0} >= {peak_value})"),
            });
        }

        let small = bisect(0.0, peak, |x| x * (lo - x) * (hi - x) - y0);
        // large root as d = lo − x, where the product is increasing in d
        let d = bisect(0.0, lo - peak, |d| (lo - d) * d * (hi - lo + d) - y0);
        let large = lo - d;
        let large_offsets = if lo == x1 {
            (-d, (x1 - x2) - d)
        } else {
            ((x2 - x1) - d, -d)
        };
        Ok([
            Root {
                x: large,
                minus_x1: large_offsets.0,
                minus_x2: large_offsets.1,
            },
            Root {
                x: small,
                minus_x1: small - x1,
                minus_x2: small - x2,
            },
        ])
    }
}

/// Root of an increasing function on `[lo, hi]` with `f(lo) < 0 < f(hi)`,
/// bisected down to adjacent floats.
fn bisect(mut lo: f64, mut hi: f64, f: impl Fn(f64) -> f64) -> f64 {
    for _ in 0..2100 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if f(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    if f(lo).abs() <= f(hi).abs() {
        lo
    } else {
        hi
    }
}

/// Index pair of two tied rates, if any.
pub(crate) fn tied_pair(res: &ResonatorSet) -> Option<(usize, usize)> {
    let g = res.gammas();
    let thr = TIE_TOLERANCE * res.scale();
    if (g[1] - g[0]).abs() <= thr {
        Some((0, 1))
    } else if (g[2] - g[1]).abs() <= thr {
        Some((1, 2))
    } else {
        None
    }
}

fn check_strong_sigma(sigma: f64, delta: f64) -> Result<()> {
    if !sigma.is_finite() {
        return Err(Error::InvalidInput(format!(
            "sigma must be finite, got {sigma}"
        )));
    }
    if sigma.abs() < STRONG_FLOOR * delta {
        return Err(Error::WrongRegime(
            "sigma too close to zero for the strong regime; use the critical solver".into(),
        ));
    }
    Ok(())
}

/// Circular realizations of the imaginary EP eigenvalue `iσ` for three
/// distinct rates.
///
/// Realization A comes from the larger admissible root of the cubic.
pub fn synthesize_strong_general(res: &ResonatorSet, sigma: f64) -> Result<Vec<EpRealization>> {
    if res.delta() == 0.0 {
        return Err(Error::NoEpPossible);
    }
    check_strong_sigma(sigma, res.delta())?;
    if tied_pair(res).is_some() {
        return Err(Error::WrongBranch(
            "two rates coincide; use the symmetric strong solver".into(),
        ));
    }
    let g = res.gammas();
    let [g1, g2, g3] = g;
    let cubic = CubicProblem::new(g, sigma);
    let roots = cubic.roots().map_err(|e| match e {
        Error::NotAdmissible { reason, .. } => Error::NotAdmissible {
            sigma: Complex64::new(0.0, sigma),
            reason,
        },
        other => other,
    })?;
    let target = Complex64::new(0.0, sigma);
    roots
        .iter()
        .map(|root| {
            let k12_sq = (g1 - g2) / (g3 - g1) * root.minus_x2;
            let k23_sq = (g3 - g2) / (g1 - g3) * root.minus_x1;
            let couplings = CouplingSet::new(
                k12_sq.max(0.0).sqrt(),
                k23_sq.max(0.0).sqrt(),
                root.x.sqrt(),
            )?;
            Ok(finish(g, Topology::Circular, couplings, target, Vec::new()))
        })
        .collect()
}

/// Closed-form couplings for rates `(γ, γ, −2γ)` (in that order).
///
/// Returns `[κ_ab, κ_bc, κ_ca]` for tied `a`, `b` and odd `c`; the twin swaps
/// the last two.
fn tied_couplings(gamma: f64, sigma: f64) -> [f64; 3] {
    let g2 = gamma * gamma;
    let s2 = sigma * sigma;
    let k_ab_sq = g2 / 3.0 + s2;
    let base = 4.0 * g2 / 3.0 + s2;
    let extra = (gamma * (4.0 * g2 + 9.0 * s2) / (3.0 * (g2 + 3.0 * s2).sqrt())).abs();
    let plus = base + extra;
    // the product of the two roots is σ⁶/κ_ab², which avoids cancellation
    let minus = s2 * s2 * s2 / k_ab_sq / plus;
    let (bc, ca) = if gamma >= 0.0 {
        (plus, minus)
    } else {
        (minus, plus)
    };
    [k_ab_sq.sqrt(), bc.sqrt(), ca.sqrt()]
}

/// Strong-regime twins when rates `a` and `b` of `gammas` coincide.
pub(crate) fn synthesize_tied(
    gammas: [f64; 3],
    pair: (usize, usize),
    sigma: f64,
) -> Result<Vec<EpRealization>> {
    let (a, b) = pair;
    let c = 3 - a - b;
    let gamma = 0.5 * (gammas[a] + gammas[b]);
    let delta = gamma.abs();
    if delta == 0.0 {
        return Err(Error::NoEpPossible);
    }
    check_strong_sigma(sigma, delta)?;
    let [k_ab, k_bc, k_ca] = tied_couplings(gamma, sigma);
    let target = Complex64::new(0.0, sigma);
    let twins = [(k_bc, k_ca), (k_ca, k_bc)].map(|(bc, ca)| {
        let mut couplings = CouplingSet::zero();
        couplings.set_between(a, b, k_ab);
        couplings.set_between(b, c, bc);
        couplings.set_between(c, a, ca);
        finish(
            gammas,
            Topology::Circular,
            couplings,
            target,
            vec![Flag::SwapEquivalent],
        )
    });
    Ok(twins.into())
}

/// Circular realizations of `iσ` for rates `(γ, γ, −2γ)`, returned with
/// couplings indexed in that literal order.
pub fn synthesize_strong_symmetric(gamma: f64, sigma: f64) -> Result<Vec<EpRealization>> {
    if !gamma.is_finite() {
        return Err(Error::InvalidInput(format!(
            "gamma must be finite, got {gamma}"
        )));
    }
    synthesize_tied([gamma, gamma, -2.0 * gamma], (0, 1), sigma)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{normalize_resonators, Classification};

    fn table_rates() -> ResonatorSet {
        normalize_resonators([-2.0, -1.0, 3.0]).unwrap()
    }

    #[test]
    fn cubic_coefficients_for_reference_rates() {
        let res = table_rates();
        let p = CubicProblem::new(res.gammas(), 0.1 * res.delta());
        assert!((p.x1 - 6.8025).abs() < 1e-4, "{p:?}");
        assert!((p.x2 - 8.1400).abs() < 1e-4, "{p:?}");
        assert!((p.y0 - 7.93981e-5).abs() < 1e-9, "{p:?}");
        assert!(p.discriminant > 0.0);
    }

    #[test]
    fn roots_solve_the_cubic() {
        let res = table_rates();
        let p = CubicProblem::new(res.gammas(), 0.3);
        let [big, small] = p.admissible_roots().unwrap();
        assert!(big > small && small > 0.0 && big < p.x1.min(p.x2));
        for x in [big, small] {
            let scale = x * p.x1.max(p.x2).powi(2);
            assert!(p.eval(x).abs() <= 1e-13 * scale, "{x}");
        }
    }

    #[test]
    fn table_two_reproduction() {
        let raw = [-1.3093, -0.6547, 1.9640];
        let res = normalize_resonators(raw).unwrap();
        let out = synthesize_strong_general(&res, 0.1).unwrap();
        let expected = [[0.3386, 0.0017, 1.7074], [0.8353, 1.5272, 0.0008]];
        for (r, want) in out.iter().zip(expected) {
            for (got, w) in r.couplings.as_array().iter().zip(want) {
                assert!((got - w).abs() < 2e-3, "{:?} vs {want:?}", r.couplings);
            }
            assert_eq!(r.topology, Topology::Circular);
            assert_eq!(r.predicted_order, Classification::Ep2);
        }
    }

    #[test]
    fn rejects_ties_and_small_sigma() {
        let tied = normalize_resonators([1.0, 1.0, -2.0]).unwrap();
        assert!(matches!(
            synthesize_strong_general(&tied, 0.5),
            Err(Error::WrongBranch(_))
        ));
        let res = table_rates();
        assert!(matches!(
            synthesize_strong_general(&res, 1e-12),
            Err(Error::WrongRegime(_))
        ));
    }

    #[test]
    fn symmetric_closed_form() {
        let out = synthesize_strong_symmetric(1.0, 1.0).unwrap();
        assert_eq!(out.len(), 2);
        let k = out[0].couplings.as_array();
        let want = [1.154701, 2.121320, 0.408248];
        for (got, w) in k.iter().zip(want) {
            assert!((got - w).abs() < 1e-6, "{k:?}");
        }
        let twin = out[1].couplings.as_array();
        assert_eq!((twin[0], twin[1], twin[2]), (k[0], k[2], k[1]));
        for r in &out {
            assert_eq!(r.predicted_order, Classification::Ep2);
            assert!(r.has_flag(Flag::SwapEquivalent));
        }
    }

    #[test]
    fn symmetric_small_sigma_has_no_cancellation() {
        let sigma = 1e-4;
        let k = synthesize_strong_symmetric(1.0, sigma).unwrap()[0].couplings;
        // κ_bc² κ_ca² = σ⁶ / κ_ab²
        let product = (k.k23 * k.k31).powi(2);
        let want = sigma.powi(6) / k.k12.powi(2);
        assert!((product - want).abs() <= 1e-12 * want);
    }
}
