//! The coupled-mode network matrix `A = Γ + iK` and its spectral analysis.

mod cubic;
mod eigen;
pub(crate) mod linalg;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use linalg::Mat3;

pub use cubic::cubic_roots;
pub use eigen::{eigen_structure, Classification, EigenCluster, EigenStructure, DEFAULT_TOLERANCE};

/// Three resonator rates, sorted ascending and shifted to zero trace.
///
/// Negative rates are losses, positive rates are gains. `gamma0` is the mean
/// that was subtracted, so `gammas[k] + gamma0` recovers the physical rate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ResonatorSet {
    gammas: [f64; 3],
    gamma0: f64,
    delta: f64,
}

impl ResonatorSet {
    pub fn gammas(&self) -> [f64; 3] {
        self.gammas
    }

    pub fn gamma0(&self) -> f64 {
        self.gamma0
    }

    /// Non-Hermiticity: RMS spread of the rates.
    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn physical_gammas(&self) -> [f64; 3] {
        self.gammas.map(|g| g + self.gamma0)
    }

    /// Largest rate magnitude, used as the scale for tie detection.
    pub fn scale(&self) -> f64 {
        self.gammas.iter().fold(0.0_f64, |m, g| m.max(g.abs()))
    }
}

/// Sorts the rates and removes their mean.
pub fn normalize_resonators(raw: [f64; 3]) -> Result<ResonatorSet> {
    if raw.iter().any(|g| !g.is_finite()) {
        return Err(Error::InvalidInput(format!(
            "rates must be finite, got {raw:?}"
        )));
    }
    let mut sorted = raw;
    sorted.sort_by(f64::total_cmp);
    let gamma0 = (sorted[0] + sorted[1] + sorted[2]) / 3.0;
    let gammas = sorted.map(|g| g - gamma0);
    let [g1, g2, g3] = sorted;
    let delta2 = ((g1 - g2).powi(2) + (g2 - g3).powi(2) + (g3 - g1).powi(2)) / 18.0;
    Ok(ResonatorSet {
        gammas,
        gamma0,
        delta: delta2.sqrt(),
    })
}

/// Magnitudes of the three inter-resonator couplings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CouplingSet {
    pub k12: f64,
    pub k23: f64,
    pub k31: f64,
}

impl CouplingSet {
    pub fn new(k12: f64, k23: f64, k31: f64) -> Result<Self> {
        let set = CouplingSet { k12, k23, k31 };
        if set.as_array().iter().any(|k| !k.is_finite() || *k < 0.0) {
            return Err(Error::InvalidInput(format!(
                "couplings must be finite and non-negative, got {:?}",
                set.as_array()
            )));
        }
        Ok(set)
    }

    pub fn zero() -> Self {
        CouplingSet {
            k12: 0.0,
            k23: 0.0,
            k31: 0.0,
        }
    }

    /// `[k12, k23, k31]`
    pub fn as_array(&self) -> [f64; 3] {
        [self.k12, self.k23, self.k31]
    }

    /// Coupling between resonators `i` and `j` (zero-based, `i != j`).
    pub fn between(&self, i: usize, j: usize) -> f64 {
        match (i.min(j), i.max(j)) {
            (0, 1) => self.k12,
            (1, 2) => self.k23,
            (0, 2) => self.k31,
            _ => panic!("no coupling between resonators {i} and {j}"),
        }
    }

    pub(crate) fn set_between(&mut self, i: usize, j: usize, value: f64) {
        match (i.min(j), i.max(j)) {
            (0, 1) => self.k12 = value,
            (1, 2) => self.k23 = value,
            (0, 2) => self.k31 = value,
            _ => panic!("no coupling between resonators {i} and {j}"),
        }
    }

    /// Root-mean-square coupling `κ`, with `κ² = (κ₁₂² + κ₂₃² + κ₃₁²)/3`.
    pub fn kappa_avg(&self) -> f64 {
        self.kappa_avg_sq().sqrt()
    }

    pub fn kappa_avg_sq(&self) -> f64 {
        (self.k12 * self.k12 + self.k23 * self.k23 + self.k31 * self.k31) / 3.0
    }

    pub fn zero_count(&self) -> usize {
        self.as_array().iter().filter(|k| **k == 0.0).count()
    }
}

/// One waveguide attached to a resonator.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Port {
    /// Zero-based resonator index.
    pub resonator: usize,
    pub rate: f64,
}

/// Waveguide couplings; defines `B = diag(√(2κᵢ))`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WaveguidePorts {
    ports: Vec<Port>,
}

impl WaveguidePorts {
    pub fn new(ports: Vec<Port>) -> Result<Self> {
        let mut seen = [false; 3];
        for p in &ports {
            if p.resonator > 2 {
                return Err(Error::InvalidInput(format!(
                    "port resonator index {} out of range",
                    p.resonator
                )));
            }
            if seen[p.resonator] {
                return Err(Error::InvalidInput(format!(
                    "more than one port on resonator {}",
                    p.resonator + 1
                )));
            }
            if !p.rate.is_finite() || p.rate < 0.0 {
                return Err(Error::InvalidInput(format!(
                    "port rate must be >= 0, got {}",
                    p.rate
                )));
            }
            seen[p.resonator] = true;
        }
        let mut ports = ports;
        ports.sort_by_key(|p| p.resonator);
        Ok(WaveguidePorts { ports })
    }

    pub fn single(resonator: usize, rate: f64) -> Result<Self> {
        Self::new(vec![Port { resonator, rate }])
    }

    /// One port with the same rate on every resonator.
    pub fn all(rate: f64) -> Result<Self> {
        Self::new((0..3).map(|resonator| Port { resonator, rate }).collect())
    }

    pub fn ports(&self) -> &[Port] {
        &self.ports
    }

    /// Diagonal of `B`.
    pub fn b_diagonal(&self) -> [f64; 3] {
        let mut b = [0.0; 3];
        for p in &self.ports {
            b[p.resonator] = (2.0 * p.rate).sqrt();
        }
        b
    }
}

/// The complex-symmetric network matrix.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NetworkMatrix {
    entries: Mat3,
}

impl NetworkMatrix {
    /// `diag(gammas) + i·K` with `K` hollow-symmetric from `[k12, k23, k31]`.
    /// No sign or ordering checks; perturbation code uses this directly.
    pub fn from_parts(gammas: [f64; 3], kappas: [f64; 3]) -> Self {
        let mut m = linalg::zeros();
        for k in 0..3 {
            m[k][k] = Complex64::new(gammas[k], 0.0);
        }
        let [k12, k23, k31] = kappas.map(|k| Complex64::new(0.0, k));
        m[0][1] = k12;
        m[1][0] = k12;
        m[1][2] = k23;
        m[2][1] = k23;
        m[0][2] = k31;
        m[2][0] = k31;
        NetworkMatrix { entries: m }
    }

    pub fn from_entries(entries: Mat3) -> Self {
        NetworkMatrix { entries }
    }

    pub fn entries(&self) -> &Mat3 {
        &self.entries
    }

    /// `A*`, the matrix governing the other quadrature.
    pub fn conj(&self) -> Self {
        NetworkMatrix {
            entries: linalg::conj(&self.entries),
        }
    }

    /// Frobenius norm.
    pub fn norm(&self) -> f64 {
        linalg::frobenius(&self.entries)
    }

    pub fn trace(&self) -> Complex64 {
        linalg::trace(&self.entries)
    }

    pub fn det(&self) -> Complex64 {
        linalg::det(&self.entries)
    }

    pub fn is_complex_symmetric(&self) -> bool {
        (0..3).all(|i| (0..3).all(|j| self.entries[i][j] == self.entries[j][i]))
    }
}

pub fn build_network_matrix(res: &ResonatorSet, coup: &CouplingSet) -> NetworkMatrix {
    NetworkMatrix::from_parts(res.gammas(), coup.as_array())
}

/// Returns `A − c·I`.
pub fn apply_offset(a: &NetworkMatrix, c: Complex64) -> NetworkMatrix {
    NetworkMatrix {
        entries: linalg::sub_scalar(&a.entries, c),
    }
}

/// Monic cubic `s³ + a2·s² + a1·s + a0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CharPoly {
    pub a2: Complex64,
    pub a1: Complex64,
    pub a0: Complex64,
}

impl CharPoly {
    /// `(s − r₀)(s − r₁)(s − r₂)`
    pub fn from_roots(r: [Complex64; 3]) -> Self {
        CharPoly {
            a2: -(r[0] + r[1] + r[2]),
            a1: r[0] * r[1] + r[1] * r[2] + r[2] * r[0],
            a0: -(r[0] * r[1] * r[2]),
        }
    }

    /// Polynomial with a double root at `sigma` and a simple root at `-2·sigma`.
    pub fn ep_target(sigma: Complex64) -> Self {
        Self::from_roots([sigma, sigma, -2.0 * sigma])
    }

    pub fn eval(&self, s: Complex64) -> Complex64 {
        ((s + self.a2) * s + self.a1) * s + self.a0
    }

    pub fn derivative(&self, s: Complex64) -> Complex64 {
        (3.0 * s + 2.0 * self.a2) * s + self.a1
    }

    /// Largest coefficient magnitude, floored at one.
    pub fn scale(&self) -> f64 {
        1.0_f64
            .max(self.a2.norm())
            .max(self.a1.norm())
            .max(self.a0.norm())
    }

    /// Largest coefficient difference, with each degree normalized by the
    /// matching power of `scale`.
    pub fn distance(&self, other: &CharPoly, scale: f64) -> f64 {
        ((self.a2 - other.a2).norm() / scale)
            .max((self.a1 - other.a1).norm() / scale.powi(2))
            .max((self.a0 - other.a0).norm() / scale.powi(3))
    }
}

/// Coefficients of `det(sI − A)`.
///
/// For `A = Γ + iK` with traceless real `Γ`:
/// `a1 = Σγᵢγⱼ + κ₁₂² + κ₂₃² + κ₃₁²` and
/// `a0 = −(γ₁γ₂γ₃ + γ₃κ₁₂² + γ₁κ₂₃² + γ₂κ₃₁²) + 2iκ₁₂κ₂₃κ₃₁`.
pub fn characteristic_coefficients(a: &NetworkMatrix) -> CharPoly {
    let m = a.entries();
    CharPoly {
        a2: -linalg::trace(m),
        a1: linalg::principal_minor_sum(m),
        a0: -linalg::det(m),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const DELTA_REF: f64 = 1.527_525_231_651_947; // sqrt(7/3)

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn normalize_reference_set() {
        let res = normalize_resonators([-3.0, 1.0, 2.0]).unwrap();
        assert_eq!(res.gammas(), [-3.0, 1.0, 2.0]);
        assert_eq!(res.gamma0(), 0.0);
        assert!((res.delta() - (7.0_f64 / 3.0).sqrt()).abs() < 1e-15);
    }

    #[test]
    fn normalize_equal_rates() {
        let res = normalize_resonators([5.0, 5.0, 5.0]).unwrap();
        assert_eq!(res.gammas(), [0.0, 0.0, 0.0]);
        assert_eq!(res.gamma0(), 5.0);
        assert_eq!(res.delta(), 0.0);
    }

    #[test]
    fn normalize_shares_delta_across_mirrored_sets() {
        let a = normalize_resonators([-2.0, -1.0, 3.0]).unwrap();
        let b = normalize_resonators([-3.0, 1.0, 2.0]).unwrap();
        assert!((a.delta() - DELTA_REF).abs() < 1e-15);
        assert!((a.delta() - b.delta()).abs() < 1e-15);
        assert_eq!(a.gamma0(), 0.0);
    }

    #[test]
    fn normalize_sorts_and_rejects_nan() {
        let res = normalize_resonators([4.0, -1.0, 0.5]).unwrap();
        let g = res.gammas();
        assert!(g[0] <= g[1] && g[1] <= g[2]);
        assert!((g.iter().sum::<f64>()).abs() < 1e-12 * 4.0);
        assert!(matches!(
            normalize_resonators([f64::NAN, 0.0, 1.0]),
            Err(Error::InvalidInput(_))
        ));
        assert!(normalize_resonators([f64::INFINITY, 0.0, 1.0]).is_err());
    }

    #[test]
    fn coupling_set_validation() {
        assert!(CouplingSet::new(1.0, -0.1, 0.0).is_err());
        let k = CouplingSet::new(1.0, 2.0, 2.0).unwrap();
        assert!((k.kappa_avg_sq() - 3.0).abs() < 1e-15);
        assert_eq!(k.between(2, 0), 2.0);
    }

    #[test]
    fn ports_reject_duplicates() {
        let dup = WaveguidePorts::new(vec![
            Port {
                resonator: 1,
                rate: 0.1,
            },
            Port {
                resonator: 1,
                rate: 0.2,
            },
        ]);
        assert!(dup.is_err());
        assert!(WaveguidePorts::single(3, 0.1).is_err());
        assert!(WaveguidePorts::single(0, -0.1).is_err());
        let b = WaveguidePorts::single(2, 0.5).unwrap().b_diagonal();
        assert_eq!(b, [0.0, 0.0, 1.0]);
    }

    #[test]
    fn uncoupled_matrix_is_diagonal() {
        let res = normalize_resonators([-2.0, -1.0, 3.0]).unwrap();
        let a = build_network_matrix(&res, &CouplingSet::zero());
        for i in 0..3 {
            for j in 0..3 {
                if i != j {
                    assert_eq!(a.entries()[i][j], c(0.0, 0.0));
                }
            }
        }
        let roots = cubic_roots(&characteristic_coefficients(&a));
        for (got, want) in roots.iter().zip([3.0, -1.0, -2.0]) {
            assert!((got - c(want, 0.0)).norm() < 1e-14, "{roots:?}");
        }
    }

    #[test]
    fn symmetric_ep3_matrix_layout() {
        let s3 = 3.0_f64.sqrt();
        let res = normalize_resonators([-s3, 0.0, s3]).unwrap();
        let k = CouplingSet::new(1.2247, 1.2247, 0.0).unwrap();
        let a = build_network_matrix(&res, &k);
        assert!(a.is_complex_symmetric());
        assert_eq!(a.entries()[0][1], c(0.0, 1.2247));
        assert_eq!(a.entries()[1][2], c(0.0, 1.2247));
        assert_eq!(a.entries()[0][2], c(0.0, 0.0));
        assert_eq!(a.entries()[2][2], c(s3, 0.0));
    }

    #[test]
    fn char_coefficients_examples() {
        // uncoupled: det(sI - A) = (s+2)(s+1)(s-3)
        let res = normalize_resonators([-2.0, -1.0, 3.0]).unwrap();
        let p = characteristic_coefficients(&build_network_matrix(&res, &CouplingSet::zero()));
        assert!((p.a1 - c(-7.0, 0.0)).norm() < 1e-14);
        assert!((p.a0 - c(-6.0, 0.0)).norm() < 1e-14);
        assert!(p.a2.norm() < 1e-14);

        // all-ones hollow coupling: det(sI - iK) = s^3 + 3s + 2i
        let k = CouplingSet::new(1.0, 1.0, 1.0).unwrap();
        let p = characteristic_coefficients(&NetworkMatrix::from_parts([0.0; 3], k.as_array()));
        assert!((p.a1 - c(3.0, 0.0)).norm() < 1e-14);
        assert!((p.a0 - c(0.0, 2.0)).norm() < 1e-14);

        // chain coupling close to the weak design at sigma = -0.1 delta
        let k = CouplingSet::new(1.254363, 2.314428, 0.0).unwrap();
        let p = characteristic_coefficients(&build_network_matrix(&res, &k));
        let a1 = -7.0 + 1.254363_f64.powi(2) + 2.314428_f64.powi(2);
        assert!((p.a1.re - a1).abs() < 1e-12);
        assert!((p.a1.re - (-0.07)).abs() < 1e-5);
        assert!((p.a0.re - (-0.0071288)).abs() < 1e-5);
        assert!(p.a0.im.abs() < 1e-15);
    }

    #[test]
    fn ep_target_matches_expanded_form() {
        let sigma = c(0.152753, 0.0);
        let p = CharPoly::ep_target(sigma);
        assert!(p.a2.norm() < 1e-16);
        assert!((p.a1 + 3.0 * sigma * sigma).norm() < 1e-16);
        assert!((p.a0 - 2.0 * sigma * sigma * sigma).norm() < 1e-16);
    }

    #[test]
    fn offset_zero_is_identity() {
        let res = normalize_resonators([-2.0, -1.0, 3.0]).unwrap();
        let a = build_network_matrix(&res, &CouplingSet::new(0.3, 0.4, 0.5).unwrap());
        assert_eq!(apply_offset(&a, c(0.0, 0.0)), a);
        let shifted = apply_offset(&a, c(1.5, 0.0));
        assert_eq!(shifted.entries()[0][0], c(-3.5, 0.0));
        assert_eq!(shifted.entries()[0][1], a.entries()[0][1]);
    }
}
