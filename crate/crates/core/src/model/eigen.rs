use num_complex::Complex64;
use serde::Serialize;

use super::linalg::{self, Vec3};
use super::{characteristic_coefficients, cubic_roots, NetworkMatrix};
use crate::error::{Error, Result};

/// Default relative tolerance for degeneracy and rank decisions.
pub const DEFAULT_TOLERANCE: f64 = 1e-7;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Classification {
    NonDegenerate,
    /// Repeated eigenvalue with a full set of eigenvectors.
    Dp,
    Ep2,
    Ep3,
    /// Three-fold eigenvalue with two independent eigenvectors.
    Ep2TripleEigenvalue,
}

impl Classification {
    pub fn is_ep(self) -> bool {
        matches!(self, Self::Ep2 | Self::Ep3 | Self::Ep2TripleEigenvalue)
    }

    pub fn label(self) -> &'static str {
        match self {
            Self::NonDegenerate => "non-degenerate",
            Self::Dp => "DP",
            Self::Ep2 => "EP2",
            Self::Ep3 => "EP3",
            Self::Ep2TripleEigenvalue => "EP2 (triple eigenvalue)",
        }
    }
}

/// Eigenvalues that were merged into one degenerate value.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EigenCluster {
    pub value: Complex64,
    /// Indices into [`EigenStructure::eigenvalues`].
    pub members: Vec<usize>,
    pub algebraic: usize,
    pub geometric: usize,
    /// Unit-norm, phase-fixed eigenvectors spanning the eigenspace. For EP
    /// clusters the first entry is the coalesced (Jordan-chain) eigenvector.
    pub eigenvectors: Vec<Vec3>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EigenStructure {
    /// Refined roots of the characteristic polynomial, descending real part.
    pub eigenvalues: [Complex64; 3],
    pub clusters: Vec<EigenCluster>,
    pub classification: Classification,
    /// Fraction of the EP eigenmode's power in each resonator.
    pub power_distribution: Option<[f64; 3]>,
    /// `max(1, ‖A‖_F)`, the scale all tolerances were multiplied by.
    pub scale: f64,
}

impl EigenStructure {
    pub fn algebraic_multiplicities(&self) -> Vec<usize> {
        self.clusters.iter().map(|c| c.algebraic).collect()
    }

    pub fn geometric_multiplicities(&self) -> Vec<usize> {
        self.clusters.iter().map(|c| c.geometric).collect()
    }

    /// The cluster with algebraic multiplicity > 1, if any.
    pub fn degenerate_cluster(&self) -> Option<&EigenCluster> {
        self.clusters.iter().find(|c| c.algebraic > 1)
    }

    /// The single coalesced eigenvector of an EP.
    pub fn ep_eigenvector(&self) -> Option<Vec3> {
        if !self.classification.is_ep() {
            return None;
        }
        self.degenerate_cluster().map(|c| c.eigenvectors[0])
    }

    /// `(eigenvalue, eigenvector)` pairs, one per independent eigenvector.
    pub fn eigenpairs(&self) -> Vec<(Complex64, Vec3)> {
        self.clusters
            .iter()
            .flat_map(|c| c.eigenvectors.iter().map(move |v| (c.value, *v)))
            .collect()
    }
}

/// Eigenvalues, eigenvectors and Jordan classification of `a`.
///
/// Candidate clusters are formed with order-aware radii: a pair when two
/// eigenvalues lie within `√tol·S`, a triple when all three lie within
/// `∛tol·S` (`S = max(1, ‖A‖)`) and no pair is resolvable on its own. Rounding splits a k-fold defective eigenvalue
/// by roughly `ε^(1/k)`, so a plain `tol·S` radius would never see an EP3. A
/// candidate is kept only when `A − λ̄I` loses rank at threshold `tol·S`; the
/// lost rank is the geometric multiplicity.
pub fn eigen_structure(a: &NetworkMatrix, tol: f64) -> Result<EigenStructure> {
    if !tol.is_finite() || tol <= 0.0 {
        return Err(Error::InvalidTolerance(tol));
    }
    let scale = 1.0_f64.max(a.norm());
    let rank_threshold = tol * scale;
    let entries = a.entries();
    let trace = a.trace();
    let center = trace / 3.0;

    let centered = super::apply_offset(a, center);
    let eigenvalues = cubic_roots(&characteristic_coefficients(&centered)).map(|z| z + center);

    let nullity_at = |lam: Complex64| {
        let m = linalg::sub_scalar(entries, lam);
        3 - linalg::numerical_rank(&m, rank_threshold)
    };

    let mut clusters: Vec<EigenCluster> = Vec::new();
    let diameter = PAIRS
        .into_iter()
        .map(|(i, j)| (eigenvalues[i] - eigenvalues[j]).norm())
        .fold(0.0, f64::max);

    let pair_radius = tol.sqrt() * scale;
    let closest = PAIRS
        .into_iter()
        .map(|(i, j)| (eigenvalues[i] - eigenvalues[j]).norm())
        .fold(f64::INFINITY, f64::min);
    // a pair that is resolvable at its own radius while the third eigenvalue
    // stays outside it is an EP2 next to a simple eigenvalue, not an EP3
    let pair_resolved = closest <= pair_radius && diameter > pair_radius;

    let mut grouped = false;
    if diameter <= tol.cbrt() * scale && !pair_resolved {
        let nullity = nullity_at(center);
        if nullity >= 1 {
            clusters.push(make_cluster(entries, center, vec![0, 1, 2], nullity));
            grouped = true;
        }
    }
    if !grouped {
        let (i, j) = PAIRS
            .into_iter()
            .min_by(|&(a1, b1), &(a2, b2)| {
                (eigenvalues[a1] - eigenvalues[b1])
                    .norm()
                    .total_cmp(&(eigenvalues[a2] - eigenvalues[b2]).norm())
            })
            .expect("three eigenvalues");
        if (eigenvalues[i] - eigenvalues[j]).norm() <= pair_radius {
            let k = 3 - i - j;
            // the simple eigenvalue is well conditioned, so trace minus it
            // pins the pair's mean more accurately than averaging the pair
            let lam = (trace - eigenvalues[k]) / 2.0;
            let nullity = nullity_at(lam);
            if nullity >= 1 {
                clusters.push(make_cluster(entries, lam, vec![i, j], nullity.min(2)));
                clusters.push(make_cluster(entries, eigenvalues[k], vec![k], 1));
                grouped = true;
            }
        }
    }
    if !grouped {
        for (k, &lam) in eigenvalues.iter().enumerate() {
            clusters.push(make_cluster(entries, lam, vec![k], 1));
        }
    }
    clusters.sort_by_key(|c| c.members[0]);

    let classification = match clusters.iter().find(|c| c.algebraic > 1) {
        None => Classification::NonDegenerate,
        Some(c) => match (c.algebraic, c.geometric) {
            (2, 1) => Classification::Ep2,
            (3, 1) => Classification::Ep3,
            (3, 2) => Classification::Ep2TripleEigenvalue,
            _ => Classification::Dp,
        },
    };

    let power_distribution = if classification.is_ep() {
        clusters
            .iter()
            .find(|c| c.algebraic > 1)
            .map(|c| power_split(&c.eigenvectors[0]))
    } else {
        None
    };

    Ok(EigenStructure {
        eigenvalues,
        clusters,
        classification,
        power_distribution,
        scale,
    })
}

const PAIRS: [(usize, usize); 3] = [(0, 1), (1, 2), (0, 2)];

fn make_cluster(
    entries: &linalg::Mat3,
    value: Complex64,
    members: Vec<usize>,
    geometric: usize,
) -> EigenCluster {
    let m = linalg::sub_scalar(entries, value);
    let algebraic = members.len();
    let eigenvectors: Vec<Vec3> = match (algebraic, geometric) {
        (_, 1) => vec![linalg::null_vector(&m)],
        (3, 2) => {
            // (A - λI)² vanishes, so the range of A - λI lies inside the
            // eigenspace: that column is the coalesced eigenvector
            let ep = linalg::normalize_phase(&linalg::dominant_column(&m));
            let basis = linalg::null_basis_rank1(&m);
            let other = basis
                .into_iter()
                .min_by(|a, b| {
                    linalg::inner(&ep, a)
                        .norm()
                        .total_cmp(&linalg::inner(&ep, b).norm())
                })
                .expect("two basis vectors");
            let proj = linalg::inner(&ep, &other);
            let mut rest = other;
            for k in 0..3 {
                rest[k] -= proj * ep[k];
            }
            vec![ep, rest]
        }
        (2, 2) => linalg::null_basis_rank1(&m).to_vec(),
        _ => (0..3)
            .map(|k| {
                let mut e = [linalg::ZERO; 3];
                e[k] = linalg::ONE;
                e
            })
            .collect(),
    };
    EigenCluster {
        value,
        members,
        algebraic,
        geometric,
        eigenvectors: eigenvectors.iter().map(linalg::normalize_phase).collect(),
    }
}

fn power_split(v: &Vec3) -> [f64; 3] {
    let total: f64 = v.iter().map(|z| z.norm_sqr()).sum();
    v.map(|z| z.norm_sqr() / total)
}
