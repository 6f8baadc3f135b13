//! Dense 3×3 complex helpers. Everything here is small enough that explicit
//! formulas beat a general-purpose library.

use num_complex::Complex64;

pub type Vec3 = [Complex64; 3];
pub type Mat3 = [[Complex64; 3]; 3];

pub const ZERO: Complex64 = Complex64::new(0.0, 0.0);
pub const ONE: Complex64 = Complex64::new(1.0, 0.0);

pub fn zeros() -> Mat3 {
    [[ZERO; 3]; 3]
}

pub fn identity() -> Mat3 {
    let mut m = zeros();
    for (k, row) in m.iter_mut().enumerate() {
        row[k] = ONE;
    }
    m
}

pub fn sub_scalar(m: &Mat3, c: Complex64) -> Mat3 {
    let mut out = *m;
    for (k, row) in out.iter_mut().enumerate() {
        row[k] -= c;
    }
    out
}

pub fn conj(m: &Mat3) -> Mat3 {
    m.map(|row| row.map(|z| z.conj()))
}

#[cfg(test)]
pub fn mul(a: &Mat3, b: &Mat3) -> Mat3 {
    let mut out = zeros();
    for i in 0..3 {
        for j in 0..3 {
            out[i][j] = (0..3).map(|k| a[i][k] * b[k][j]).sum();
        }
    }
    out
}

#[cfg(test)]
pub fn mat_vec(m: &Mat3, v: &Vec3) -> Vec3 {
    [0, 1, 2].map(|i| (0..3).map(|k| m[i][k] * v[k]).sum())
}

pub fn frobenius(m: &Mat3) -> f64 {
    m.iter()
        .flat_map(|row| row.iter())
        .map(|z| z.norm_sqr())
        .sum::<f64>()
        .sqrt()
}

pub fn trace(m: &Mat3) -> Complex64 {
    m[0][0] + m[1][1] + m[2][2]
}

/// Sum of the three principal 2×2 minors.
pub fn principal_minor_sum(m: &Mat3) -> Complex64 {
    m[0][0] * m[1][1] - m[0][1] * m[1][0] + m[1][1] * m[2][2] - m[1][2] * m[2][1]
        + m[0][0] * m[2][2]
        - m[0][2] * m[2][0]
}

pub fn det(m: &Mat3) -> Complex64 {
    m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
        - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
        + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
}

pub fn adjugate(m: &Mat3) -> Mat3 {
    let c =
        |r0: usize, r1: usize, c0: usize, c1: usize| m[r0][c0] * m[r1][c1] - m[r0][c1] * m[r1][c0];
    // adj[i][j] = cofactor[j][i]
    [
        [c(1, 2, 1, 2), -c(0, 2, 1, 2), c(0, 1, 1, 2)],
        [-c(1, 2, 0, 2), c(0, 2, 0, 2), -c(0, 1, 0, 2)],
        [c(1, 2, 0, 1), -c(0, 2, 0, 1), c(0, 1, 0, 1)],
    ]
}

/// Inverse via the adjugate. Returns `None` when the determinant is zero or
/// not finite.
pub fn inverse(m: &Mat3) -> Option<Mat3> {
    let d = det(m);
    if d.norm() == 0.0 || !d.is_finite() {
        return None;
    }
    let inv_d = d.inv();
    Some(adjugate(m).map(|row| row.map(|z| z * inv_d)))
}

/// Numerical rank by Gaussian elimination with complete pivoting. A pivot
/// whose magnitude does not exceed `threshold` ends the elimination.
pub fn numerical_rank(m: &Mat3, threshold: f64) -> usize {
    let mut w = *m;
    let mut rows: Vec<usize> = vec![0, 1, 2];
    let mut cols: Vec<usize> = vec![0, 1, 2];
    let mut rank = 0;
    while !rows.is_empty() {
        let mut best = (0, 0, -1.0_f64);
        for (ri, &r) in rows.iter().enumerate() {
            for (ci, &c) in cols.iter().enumerate() {
                let mag = w[r][c].norm();
                if mag > best.2 {
                    best = (ri, ci, mag);
                }
            }
        }
        if best.2 <= threshold {
            break;
        }
        let pr = rows.remove(best.0);
        let pc = cols.remove(best.1);
        let pivot = w[pr][pc];
        for &r in &rows {
            let factor = w[r][pc] / pivot;
            for &c in &cols {
                let delta = factor * w[pr][c];
                w[r][c] -= delta;
            }
            w[r][pc] = ZERO;
        }
        rank += 1;
    }
    rank
}

/// Bilinear cross product: `dot(a, cross(a, b)) = 0` without conjugation, so
/// the result is annihilated by both rows of a complex matrix.
pub fn cross(a: &Vec3, b: &Vec3) -> Vec3 {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

pub fn vec_norm(v: &Vec3) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Hermitian inner product `⟨a, b⟩ = Σ conj(aₖ) bₖ`.
pub fn inner(a: &Vec3, b: &Vec3) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

/// Scales to unit norm and rotates the phase so the first non-negligible
/// component is real and positive.
pub fn normalize_phase(v: &Vec3) -> Vec3 {
    let n = vec_norm(v);
    let max = v.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let lead = v
        .iter()
        .find(|z| z.norm() > 1e-12 * max)
        .copied()
        .unwrap_or(ONE);
    let rot = lead.conj() / lead.norm() / n;
    v.map(|z| z * rot)
}

/// Null vector of a rank-2 matrix: the largest cross product of two rows.
pub fn null_vector(m: &Mat3) -> Vec3 {
    let candidates = [
        cross(&m[0], &m[1]),
        cross(&m[1], &m[2]),
        cross(&m[2], &m[0]),
    ];
    candidates
        .into_iter()
        .max_by(|a, b| vec_norm(a).total_cmp(&vec_norm(b)))
        .unwrap_or([ONE, ZERO, ZERO])
}

/// Orthonormal basis (Hermitian) of the null space of a rank-1 matrix.
pub fn null_basis_rank1(m: &Mat3) -> [Vec3; 2] {
    let row = *m
        .iter()
        .max_by(|a, b| vec_norm(a).total_cmp(&vec_norm(b)))
        .expect("three rows");
    let pivot = (0..3)
        .max_by(|&i, &j| row[i].norm().total_cmp(&row[j].norm()))
        .unwrap_or(0);
    let others: Vec<usize> = (0..3).filter(|&k| k != pivot).collect();
    let raw: Vec<Vec3> = others
        .iter()
        .map(|&k| {
            let mut v = [ZERO; 3];
            v[k] = ONE;
            v[pivot] = -row[k] / row[pivot];
            v
        })
        .collect();
    let first = scale(&raw[0], 1.0 / vec_norm(&raw[0]));
    let proj = inner(&first, &raw[1]);
    let mut second = raw[1];
    for k in 0..3 {
        second[k] -= proj * first[k];
    }
    let second = scale(&second, 1.0 / vec_norm(&second));
    [first, second]
}

pub fn scale(v: &Vec3, s: f64) -> Vec3 {
    v.map(|z| z * s)
}

/// Column of `m` with the largest norm.
pub fn dominant_column(m: &Mat3) -> Vec3 {
    (0..3)
        .map(|j| [m[0][j], m[1][j], m[2][j]])
        .max_by(|a, b| vec_norm(a).total_cmp(&vec_norm(b)))
        .expect("three columns")
}
