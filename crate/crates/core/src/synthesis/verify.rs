use num_complex::Complex64;
use serde::Serialize;

use super::{EpRealization, EpTarget, Regime, Topology};
use crate::model::{
    characteristic_coefficients, eigen_structure, CharPoly, Classification, NetworkMatrix,
    ResonatorSet, DEFAULT_TOLERANCE,
};

const EQUATION_TOLERANCE: f64 = 1e-9;
const IDENTITY_TOLERANCE: f64 = 1e-10;
const POWER_TOLERANCE: f64 = 1e-9;

/// Independent re-check of a synthesized network.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerificationReport {
    pub regime: Regime,
    /// `[a₂, a₁, a₀]` mismatch against `(s−σ)²(s+2σ)`, relative to `Δ, Δ², Δ³`.
    pub equation_residuals: [f64; 3],
    /// `|σ² − (Δ² − κ²)| / Δ²`
    pub identity_residual: f64,
    pub classification: Classification,
    /// Value of the degenerate eigenvalue cluster, if one was found.
    pub ep_eigenvalue: Option<Complex64>,
    /// Power fraction in the middle resonator of a linear chain.
    pub middle_power: Option<f64>,
    pub equations_ok: bool,
    pub identity_ok: bool,
    pub jordan_ok: bool,
    pub power_ok: bool,
}

impl VerificationReport {
    pub fn passed(&self) -> bool {
        self.equations_ok && self.identity_ok && self.jordan_ok && self.power_ok
    }
}

/// Re-verifies `real` against the (normalized) rates it was synthesized for.
pub fn verify_realization(real: &EpRealization, res: &ResonatorSet) -> VerificationReport {
    verify_against(real, res.gammas())
}

/// As [`verify_realization`], for rates in arbitrary order.
pub(crate) fn verify_against(real: &EpRealization, gammas: [f64; 3]) -> VerificationReport {
    let [g1, g2, g3] = gammas;
    let delta2 = ((g1 - g2).powi(2) + (g2 - g3).powi(2) + (g3 - g1).powi(2)) / 18.0;
    let delta = delta2.sqrt().max(f64::MIN_POSITIVE);
    let sigma = real.sigma;
    let regime = EpTarget::new(sigma, delta).map_or(Regime::Weak, |t| t.regime);

    let a = NetworkMatrix::from_parts(gammas, real.couplings.as_array());
    let poly = characteristic_coefficients(&a);
    // with non-negative couplings A hosts the conjugate of a strong target
    let residuals = |lambda: Complex64| {
        let t = CharPoly::ep_target(lambda);
        [
            (poly.a2 - t.a2).norm() / delta,
            (poly.a1 - t.a1).norm() / delta2,
            (poly.a0 - t.a0).norm() / (delta2 * delta),
        ]
    };
    let direct = residuals(sigma);
    let mirrored = residuals(sigma.conj());
    let (equation_residuals, lambda) = if max3(&mirrored) < max3(&direct) {
        (mirrored, sigma.conj())
    } else {
        (direct, sigma)
    };

    let identity_residual =
        (sigma * sigma - (delta2 - real.couplings.kappa_avg_sq())).norm() / delta2;

    let (classification, ep_eigenvalue, middle_power, jordan_ok) =
        match eigen_structure(&a, DEFAULT_TOLERANCE) {
            Ok(es) => {
                let cluster = es
                    .degenerate_cluster()
                    .filter(|_| es.classification.is_ep());
                let ep_eigenvalue = cluster.map(|c| c.value);
                let jordan_ok = cluster.is_some_and(|c| {
                    let radius = DEFAULT_TOLERANCE.powf(1.0 / c.algebraic as f64) * es.scale;
                    (c.value - lambda).norm() <= radius
                });
                let middle_power = match (real.topology, es.power_distribution) {
                    (Topology::Linear { middle }, Some(p)) => Some(p[middle]),
                    _ => None,
                };
                (es.classification, ep_eigenvalue, middle_power, jordan_ok)
            }
            Err(_) => (Classification::NonDegenerate, None, None, false),
        };
    let power_ok = middle_power.is_none_or(|p| (p - 0.5).abs() <= POWER_TOLERANCE);

    VerificationReport {
        regime,
        equation_residuals,
        identity_residual,
        classification,
        ep_eigenvalue,
        middle_power,
        equations_ok: max3(&equation_residuals) <= EQUATION_TOLERANCE,
        identity_ok: identity_residual <= IDENTITY_TOLERANCE,
        jordan_ok,
        power_ok,
    }
}

fn max3(r: &[f64; 3]) -> f64 {
    r[0].max(r[1]).max(r[2])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::normalize_resonators;
    use crate::synthesis::{synthesize_critical, synthesize_strong_symmetric, synthesize_weak};

    #[test]
    fn critical_chain_passes_tightly() {
        let res = normalize_resonators([-2.0, -1.0, 3.0]).unwrap();
        for real in synthesize_critical(&res).unwrap() {
            let report = verify_realization(&real, &res);
            assert!(report.passed(), "{report:?}");
            assert!(max3(&report.equation_residuals) < 1e-10);
            assert_eq!(report.classification, Classification::Ep3);
        }
    }

    #[test]
    fn corrupted_coupling_fails() {
        let res = normalize_resonators([-2.0, -1.0, 3.0]).unwrap();
        let mut real = synthesize_critical(&res).unwrap().remove(0);
        real.couplings.k12 *= 1.01;
        let report = verify_realization(&real, &res);
        assert!(!report.passed());
        assert_eq!(report.classification, Classification::NonDegenerate);
        assert!(max3(&report.equation_residuals) > 1e-4);
    }

    #[test]
    fn weak_middle_holds_half_the_power() {
        let res = normalize_resonators([-2.0, -1.0, 3.0]).unwrap();
        let real = synthesize_weak(&res, 0.1 * res.delta()).unwrap().remove(0);
        let report = verify_realization(&real, &res);
        let p = report.middle_power.unwrap();
        assert!((p - 0.5).abs() <= 1e-9, "{p}");
        assert!(report.passed());
    }

    #[test]
    fn symmetric_literal_order_verifies() {
        for gamma in [1.0, -0.7] {
            for real in synthesize_strong_symmetric(gamma, 0.4).unwrap() {
                let report = verify_against(&real, [gamma, gamma, -2.0 * gamma]);
                assert!(report.passed(), "{report:?}");
            }
        }
    }
}
