//! Input–output response of a network probed through waveguide ports.
//!
//! Every resonator may couple to a waveguide with rate `κᵢ`, giving
//! `B = diag(√(2κᵢ))`. Light entering a port excites both the clockwise (`A`)
//! and counter-clockwise (`A*`) modes, so
//!
//! ```text
//! T(s) = I − ½ B [(sI − A)⁻¹ + (sI − A*)⁻¹] B
//! R(s) = −½ B [(sI − A)⁻¹ − (sI − A*)⁻¹] B
//! ```
//!
//! Spectra are `s = iω`, which requires a stable (shifted) matrix.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::linalg::{self, Mat3};
use crate::model::{
    apply_offset, characteristic_coefficients, cubic_roots, eigen_structure, NetworkMatrix,
    WaveguidePorts, DEFAULT_TOLERANCE,
};

/// Relative distance to a pole below which the resolvent counts as singular.
const POLE_TOLERANCE: f64 = 1e-12;
/// Relative spacing variation accepted as a uniform grid.
const GRID_TOLERANCE: f64 = 1e-6;

/// Transmission and reflection matrices at one complex frequency.
///
/// Rows and columns of resonators without a port are trivial: `T` is the
/// identity there and `R` is zero.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Transfer {
    pub t: [[Complex64; 3]; 3],
    pub r: [[Complex64; 3]; 3],
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SpectrumSample {
    pub omega: f64,
    pub transfer: Transfer,
}

/// A stabilized copy of a network matrix.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Stabilized {
    pub matrix: NetworkMatrix,
    /// `c` in `A − cI`.
    pub offset: f64,
    /// True when the shift moves the spectrum to the right (the input was
    /// already more stable than required).
    pub toward_zero: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Peak {
    pub omega: f64,
    pub height: f64,
    /// Full width at half maximum; `None` when a half-height crossing lies
    /// outside the grid.
    pub fwhm: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize)]
pub struct PeakSet {
    /// Sorted by `omega`.
    pub peaks: Vec<Peak>,
}

impl PeakSet {
    pub fn len(&self) -> usize {
        self.peaks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.peaks.is_empty()
    }
}

/// Eigenvalues with every degenerate cluster collapsed onto its mean, which
/// is far more accurate than the individual roots of a repeated factor.
fn eigenvalues(a: &NetworkMatrix) -> [Complex64; 3] {
    match eigen_structure(a, DEFAULT_TOLERANCE) {
        Ok(es) => {
            let mut ev = es.eigenvalues;
            for cluster in &es.clusters {
                for &m in &cluster.members {
                    ev[m] = cluster.value;
                }
            }
            ev
        }
        Err(_) => cubic_roots(&characteristic_coefficients(a)),
    }
}

/// `T(s)` and `R(s)` for the given ports.
pub fn transfer_at(a: &NetworkMatrix, ports: &WaveguidePorts, s: Complex64) -> Result<Transfer> {
    Resolvent::new(a, ports).at(s)
}

/// Per-matrix state shared by every frequency of a spectrum.
struct Resolvent {
    a: Mat3,
    a_conj: Mat3,
    /// Eigenvalues of `A`; `A*` has the conjugate spectrum.
    poles: [Complex64; 3],
    scale: f64,
    b: [f64; 3],
}

impl Resolvent {
    fn new(a: &NetworkMatrix, ports: &WaveguidePorts) -> Self {
        Resolvent {
            a: *a.entries(),
            a_conj: *a.conj().entries(),
            poles: eigenvalues(a),
            scale: a.norm().max(1.0),
            b: ports.b_diagonal(),
        }
    }

    fn at(&self, s: Complex64) -> Result<Transfer> {
        if !s.is_finite() {
            return Err(Error::InvalidInput(format!("s must be finite, got {s}")));
        }
        for lambda in self.poles {
            for pole in [lambda, lambda.conj()] {
                if (s - pole).norm() <= POLE_TOLERANCE * self.scale {
                    return Err(Error::ResolventSingular { eigenvalue: pole });
                }
            }
        }
        let singular = || Error::ResolventSingular { eigenvalue: s };
        let g = linalg::inverse(&shift(&self.a, s)).ok_or_else(singular)?;
        let g_star = linalg::inverse(&shift(&self.a_conj, s)).ok_or_else(singular)?;

        let b = self.b;
        let mut t = linalg::identity();
        let mut r = linalg::zeros();
        for i in 0..3 {
            for j in 0..3 {
                let bb = 0.5 * b[i] * b[j];
                t[i][j] -= bb * (g[i][j] + g_star[i][j]);
                r[i][j] = -bb * (g[i][j] - g_star[i][j]);
            }
        }
        Ok(Transfer { t, r })
    }
}

/// `sI − m`
fn shift(m: &Mat3, s: Complex64) -> Mat3 {
    let mut out = m.map(|row| row.map(|z| -z));
    for (k, row) in out.iter_mut().enumerate() {
        row[k] += s;
    }
    out
}

/// Shifts `a` by a real offset so that its largest real eigenvalue part
/// becomes `−margin`.
pub fn stabilize(a: &NetworkMatrix, margin: f64) -> Result<Stabilized> {
    if !(margin > 0.0 && margin.is_finite()) {
        return Err(Error::InvalidInput(format!(
            "margin must be positive, got {margin}"
        )));
    }
    let max_re = eigenvalues(a)
        .iter()
        .map(|z| z.re)
        .fold(f64::NEG_INFINITY, f64::max);
    let offset = max_re + margin;
    Ok(Stabilized {
        matrix: apply_offset(a, Complex64::new(offset, 0.0)),
        offset,
        toward_zero: offset < 0.0,
    })
}

/// Samples `T(iω)`, `R(iω)` on `omegas`, in grid order.
pub fn spectrum(
    a: &NetworkMatrix,
    ports: &WaveguidePorts,
    omegas: &[f64],
) -> Result<Vec<SpectrumSample>> {
    let max_re = eigenvalues(a)
        .iter()
        .map(|z| z.re)
        .fold(f64::NEG_INFINITY, f64::max);
    if max_re >= 0.0 {
        return Err(Error::MustStabilize { max_real: max_re });
    }
    if let Some(bad) = omegas.iter().find(|w| !w.is_finite()) {
        return Err(Error::InvalidGrid(format!("non-finite frequency {bad}")));
    }
    let resolvent = Resolvent::new(a, ports);
    omegas
        .iter()
        .map(|&omega| {
            let transfer = resolvent.at(Complex64::new(0.0, omega))?;
            Ok(SpectrumSample { omega, transfer })
        })
        .collect()
}

/// Peaks of `|T_ij|²` (zero-based port pair).
pub fn find_peaks(samples: &[SpectrumSample], pair: (usize, usize)) -> Result<PeakSet> {
    let (i, j) = pair;
    if i > 2 || j > 2 {
        return Err(Error::InvalidInput(format!(
            "port pair ({i}, {j}) out of range"
        )));
    }
    let omegas: Vec<f64> = samples.iter().map(|s| s.omega).collect();
    let values: Vec<f64> = samples
        .iter()
        .map(|s| s.transfer.t[i][j].norm_sqr())
        .collect();
    find_peaks_in(&omegas, &values)
}

/// Local maxima of `values` sampled on the uniform grid `omegas`.
///
/// Each maximum is refined by a parabola through its three samples; the
/// width comes from linear interpolation of the half-height crossings.
pub fn find_peaks_in(omegas: &[f64], values: &[f64]) -> Result<PeakSet> {
    let n = omegas.len();
    if n < 3 {
        return Err(Error::InvalidGrid(format!(
            "need at least 3 samples, got {n}"
        )));
    }
    if values.len() != n {
        return Err(Error::InvalidGrid(format!(
            "{n} frequencies but {} values",
            values.len()
        )));
    }
    let step = (omegas[n - 1] - omegas[0]) / (n - 1) as f64;
    if step.is_nan() || step <= 0.0 {
        return Err(Error::InvalidGrid("frequencies must increase".into()));
    }
    if omegas
        .windows(2)
        .any(|w| ((w[1] - w[0]) - step).abs() > GRID_TOLERANCE * step)
    {
        return Err(Error::InvalidGrid("frequency grid is not uniform".into()));
    }

    let mut peaks = Vec::new();
    for k in 1..n - 1 {
        let (left, mid, right) = (values[k - 1], values[k], values[k + 1]);
        if !(mid > left && mid > right) {
            continue;
        }
        let curvature = left - 2.0 * mid + right;
        let shift = 0.5 * (left - right) / curvature;
        let omega = omegas[k] + shift * step;
        let height = mid - 0.25 * (left - right) * shift;
        let half = 0.5 * height;
        // first sample below half height, interpolated against its inner neighbour
        let crossing = |m: usize, inner: usize| {
            let frac = (values[inner] - half) / (values[inner] - values[m]);
            omegas[inner] + frac * (omegas[m] - omegas[inner])
        };
        let lower = (0..k)
            .rev()
            .find(|&m| values[m] < half)
            .map(|m| crossing(m, m + 1));
        let upper = (k + 1..n)
            .find(|&m| values[m] < half)
            .map(|m| crossing(m, m - 1));
        let fwhm = lower.zip(upper).map(|(lo, hi)| hi - lo);
        peaks.push(Peak {
            omega,
            height,
            fwhm,
        });
    }
    Ok(PeakSet { peaks })
}
