//! Eigenvalue response to small parameter perturbations around an EP.
//!
//! Near an `n`-th order EP the eigenvalue splitting scales as `ε^(1/n)`, so
//! the fitted log–log slope identifies the order of the degeneracy.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{
    eigen_structure, Classification, NetworkMatrix, ResonatorSet, DEFAULT_TOLERANCE,
};
use crate::synthesis::EpRealization;

/// Splittings below this many Δ are treated as rounding noise.
const NOISE_FLOOR: f64 = 1e-10;
const MIN_FIT_POINTS: usize = 6;
const MIN_FIT_DECADES: f64 = 3.0;

/// Which network parameter receives the perturbation `ε`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Parameter {
    /// Rate of resonator `k` (zero-based, sorted order).
    Gamma(usize),
    /// Coupling between resonators `i` and `j`.
    Kappa(usize, usize),
}

impl Default for Parameter {
    fn default() -> Self {
        Parameter::Gamma(2)
    }
}

impl Parameter {
    fn validate(self) -> Result<Self> {
        match self {
            Parameter::Gamma(k) if k < 3 => Ok(self),
            Parameter::Kappa(i, j) if i < 3 && j < 3 && i != j => Ok(self),
            _ => Err(Error::InvalidInput(format!("no such parameter: {self:?}"))),
        }
    }
}

/// Least-squares line through `(log|ε|, log splitting)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PowerLawFit {
    pub exponent: f64,
    /// Natural-log intercept.
    pub intercept: f64,
    /// Pearson correlation of the log–log data.
    pub correlation: f64,
    pub points: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SplittingFit {
    pub combined: PowerLawFit,
    pub positive: Option<PowerLawFit>,
    pub negative: Option<PowerLawFit>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepResult {
    pub parameter: Parameter,
    /// Ascending, always containing `0`.
    pub epsilons: Vec<f64>,
    /// Eigenvalues per ε, linked into continuous trajectories: slot `m` of
    /// every entry follows the same eigenvalue.
    pub trajectories: Vec<[Complex64; 3]>,
    /// Maximum pairwise distance among the slots that coalesce at `ε = 0`.
    pub splittings: Vec<f64>,
    /// Trajectory slots of the degenerate cluster.
    pub cluster: Vec<usize>,
    /// Jordan classification at `ε = 0`.
    pub classification: Classification,
    /// Δ of the unperturbed rates; sets the noise floor of the fit.
    pub delta: f64,
}

/// Realization matrix with `γ₃ → γ₃ + ε`.
pub fn perturb_network(real: &EpRealization, res: &ResonatorSet, eps: f64) -> NetworkMatrix {
    perturb_network_with(real, res, Parameter::default(), eps)
}

/// Realization matrix with the chosen parameter shifted by `ε`. The result
/// is not re-centered, so its trace is `ε` for rate perturbations.
pub fn perturb_network_with(
    real: &EpRealization,
    res: &ResonatorSet,
    parameter: Parameter,
    eps: f64,
) -> NetworkMatrix {
    let mut gammas = res.gammas();
    let mut couplings = real.couplings;
    match parameter {
        Parameter::Gamma(k) => gammas[k] += eps,
        Parameter::Kappa(i, j) => couplings.set_between(i, j, couplings.between(i, j) + eps),
    }
    NetworkMatrix::from_parts(gammas, couplings.as_array())
}

/// Sweep perturbing `γ₃`.
pub fn sweep(real: &EpRealization, res: &ResonatorSet, eps_grid: &[f64]) -> Result<SweepResult> {
    sweep_with(real, res, Parameter::default(), eps_grid)
}

/// Eigenvalue trajectories over `eps_grid` (plus `ε = 0`).
pub fn sweep_with(
    real: &EpRealization,
    res: &ResonatorSet,
    parameter: Parameter,
    eps_grid: &[f64],
) -> Result<SweepResult> {
    let parameter = parameter.validate()?;
    if let Some(bad) = eps_grid.iter().find(|e| !e.is_finite()) {
        return Err(Error::InvalidGrid(format!("non-finite perturbation {bad}")));
    }
    let mut epsilons: Vec<f64> = eps_grid.iter().copied().chain([0.0]).collect();
    epsilons.sort_by(f64::total_cmp);
    epsilons.dedup();
    let zero = epsilons
        .iter()
        .position(|&e| e == 0.0)
        .expect("zero inserted");

    let base = eigen_structure(
        &perturb_network_with(real, res, parameter, 0.0),
        DEFAULT_TOLERANCE,
    )?;
    let cluster = base
        .degenerate_cluster()
        .ok_or_else(|| {
            Error::NotAnEp(format!(
                "no degenerate eigenvalue at eps = 0 ({:?})",
                base.eigenvalues
            ))
        })?
        .members
        .clone();

    let raw = epsilons
        .iter()
        .map(|&eps| {
            let a = perturb_network_with(real, res, parameter, eps);
            Ok(eigen_structure(&a, DEFAULT_TOLERANCE)?.eigenvalues)
        })
        .collect::<Result<Vec<_>>>()?;

    let mut trajectories = raw.clone();
    trajectories[zero] = base.eigenvalues;
    for k in zero + 1..epsilons.len() {
        trajectories[k] = link(&trajectories[k - 1], &raw[k]);
    }
    for k in (0..zero).rev() {
        trajectories[k] = link(&trajectories[k + 1], &raw[k]);
    }

    let splittings = trajectories
        .iter()
        .map(|t| {
            let mut worst = 0.0_f64;
            for (n, &p) in cluster.iter().enumerate() {
                for &q in &cluster[n + 1..] {
                    worst = worst.max((t[p] - t[q]).norm());
                }
            }
            worst
        })
        .collect();

    Ok(SweepResult {
        parameter,
        epsilons,
        trajectories,
        splittings,
        cluster,
        classification: base.classification,
        delta: res.delta(),
    })
}

/// Reorders `next` to follow `prev` with the least total displacement.
fn link(prev: &[Complex64; 3], next: &[Complex64; 3]) -> [Complex64; 3] {
    const PERMUTATIONS: [[usize; 3]; 6] = [
        [0, 1, 2],
        [0, 2, 1],
        [1, 0, 2],
        [1, 2, 0],
        [2, 0, 1],
        [2, 1, 0],
    ];
    let cost = |p: &[usize; 3]| (0..3).map(|m| (next[p[m]] - prev[m]).norm()).sum::<f64>();
    let best = PERMUTATIONS
        .iter()
        .min_by(|a, b| cost(a).total_cmp(&cost(b)))
        .expect("six permutations");
    best.map(|m| next[m])
}

fn fit(points: &[(f64, f64)]) -> Option<PowerLawFit> {
    if points.len() < MIN_FIT_POINTS {
        return None;
    }
    let (lo, hi) = points
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &(e, _)| {
            (lo.min(e.abs()), hi.max(e.abs()))
        });
    // small slack so a grid of exactly three decades qualifies
    if (hi / lo).log10() < MIN_FIT_DECADES - 1e-9 {
        return None;
    }
    let logs: Vec<(f64, f64)> = points
        .iter()
        .map(|&(e, s)| (e.abs().ln(), s.ln()))
        .collect();
    let n = logs.len() as f64;
    let mx = logs.iter().map(|p| p.0).sum::<f64>() / n;
    let my = logs.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = logs.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let syy: f64 = logs.iter().map(|p| (p.1 - my).powi(2)).sum();
    let sxy: f64 = logs.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let exponent = sxy / sxx;
    let correlation = if syy > 0.0 {
        sxy / (sxx * syy).sqrt()
    } else {
        0.0
    };
    Some(PowerLawFit {
        exponent,
        intercept: my - exponent * mx,
        correlation,
        points: logs.len(),
    })
}

/// Power-law fit of splitting against `|ε|`, over both signs together and
/// each sign separately.
pub fn splitting_exponent(sweep: &SweepResult) -> Result<SplittingFit> {
    let floor = NOISE_FLOOR * sweep.delta;
    let usable: Vec<(f64, f64)> = sweep
        .epsilons
        .iter()
        .zip(&sweep.splittings)
        .filter(|(&e, &s)| e != 0.0 && s >= floor && s.is_finite())
        .map(|(&e, &s)| (e, s))
        .collect();
    let combined = fit(&usable).ok_or_else(|| {
        Error::InsufficientData(format!(
            "need at least {MIN_FIT_POINTS} nonzero perturbations above the noise floor spanning \
             {MIN_FIT_DECADES} decades, got {} points",
            usable.len()
        ))
    })?;
    let side = |positive: bool| {
        let pts: Vec<(f64, f64)> = usable
            .iter()
            .copied()
            .filter(|&(e, _)| (e > 0.0) == positive)
            .collect();
        fit(&pts)
    };
    Ok(SplittingFit {
        combined,
        positive: side(true),
        negative: side(false),
    })
}

/// `points` log-spaced magnitudes in `[min, max]`, optionally mirrored to
/// negative values (negatives first, ascending overall).
pub fn log_spaced(min: f64, max: f64, points: usize, both_signs: bool) -> Result<Vec<f64>> {
    if !(min > 0.0 && max > min && max.is_finite()) || points < 2 {
        return Err(Error::InvalidGrid(format!(
            "need 0 < min < max and at least 2 points, got [{min}, {max}] with {points}"
        )));
    }
    let (lmin, lmax) = (min.ln(), max.ln());
    let step = (lmax - lmin) / (points - 1) as f64;
    let magnitudes: Vec<f64> = (0..points)
        .map(|k| (lmin + step * k as f64).exp())
        .collect();
    let mut out: Vec<f64> = Vec::with_capacity(2 * points);
    if both_signs {
        out.extend(magnitudes.iter().rev().map(|m| -m));
    }
    out.extend(magnitudes);
    Ok(out)
}
