//! Coupling-constant synthesis for a prescribed degenerate eigenvalue `σ`.
//!
//! For traceless rates the EP eigenvalue obeys `σ² = Δ² − κ²`, which splits
//! the problem into three regimes:
//!
//! * weak (`κ < Δ`, `σ` real): linear chains, closed form;
//! * strong (`κ > Δ`, `σ` imaginary): circular networks, roots of a cubic;
//! * critical (`σ = 0`): linear chains hosting an EP3.
//!
//! Each admissible `σ` has exactly two realizations ("twins").

mod critical;
mod strong;
mod verify;
mod weak;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{
    eigen_structure, Classification, CouplingSet, NetworkMatrix, ResonatorSet, DEFAULT_TOLERANCE,
};

pub use critical::synthesize_critical;
pub use strong::{synthesize_strong_general, synthesize_strong_symmetric, CubicProblem};
pub use verify::{verify_realization, VerificationReport};
pub use weak::{admissible_ranges, synthesize_weak, Interval};

/// Relative tolerance (in units of Δ) below which a part of σ counts as zero.
pub(crate) const REGIME_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Regime {
    /// `σ` real and nonzero.
    Weak,
    /// `σ` purely imaginary and nonzero.
    Strong,
    /// `σ = 0`.
    Critical,
}

/// A requested degenerate eigenvalue together with its coupling regime.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EpTarget {
    pub sigma: Complex64,
    pub regime: Regime,
}

impl EpTarget {
    pub fn new(sigma: Complex64, delta: f64) -> Result<Self> {
        if !sigma.is_finite() {
            return Err(Error::InvalidInput(format!(
                "sigma must be finite, got {sigma}"
            )));
        }
        let tol = REGIME_TOLERANCE * delta;
        let re_zero = sigma.re.abs() <= tol;
        let im_zero = sigma.im.abs() <= tol;
        let regime = match (re_zero, im_zero) {
            (true, true) => Regime::Critical,
            (false, true) => Regime::Weak,
            (true, false) => Regime::Strong,
            (false, false) => {
                return Err(Error::NotAdmissible {
                    sigma,
                    reason: "a degenerate eigenvalue must be real or purely imaginary".into(),
                })
            }
        };
        Ok(EpTarget { sigma, regime })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Topology {
    /// Chain with `middle` coupled to both others; the two ends are uncoupled.
    Linear { middle: usize },
    /// All three resonators mutually coupled.
    Circular,
    /// Only one coupling is nonzero; `isolated` is disconnected.
    TwoResonator { isolated: usize },
}

impl Topology {
    pub fn label(&self) -> String {
        match self {
            Topology::Linear { middle } => format!("linear-middle-{}", middle + 1),
            Topology::Circular => "circular".to_string(),
            Topology::TwoResonator { isolated } => {
                format!("two-resonator-isolated-{}", isolated + 1)
            }
        }
    }

    /// Infers the topology from which couplings vanish.
    pub fn of(couplings: &CouplingSet) -> Option<Topology> {
        let [k12, k23, k31] = couplings.as_array().map(|k| k != 0.0);
        match (k12, k23, k31) {
            (true, true, true) => Some(Topology::Circular),
            (true, true, false) => Some(Topology::Linear { middle: 1 }),
            (true, false, true) => Some(Topology::Linear { middle: 0 }),
            (false, true, true) => Some(Topology::Linear { middle: 2 }),
            (true, false, false) => Some(Topology::TwoResonator { isolated: 2 }),
            (false, true, false) => Some(Topology::TwoResonator { isolated: 0 }),
            (false, false, true) => Some(Topology::TwoResonator { isolated: 1 }),
            (false, false, false) => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Flag {
    /// σ sits on a special point where one resonator decouples.
    Boundary,
    /// The two twins are the same network up to swapping two equal resonators.
    SwapEquivalent,
    /// The Jordan check did not find an EP at the requested eigenvalue.
    NotEp,
}

/// One synthesized network.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EpRealization {
    pub topology: Topology,
    pub couplings: CouplingSet,
    pub sigma: Complex64,
    /// Jordan classification of the built matrix.
    pub predicted_order: Classification,
    pub flags: Vec<Flag>,
}

impl EpRealization {
    pub fn has_flag(&self, flag: Flag) -> bool {
        self.flags.contains(&flag)
    }
}

/// A realization together with its verification report.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Verified {
    pub realization: EpRealization,
    pub report: VerificationReport,
}

/// Builds the realization and fills `predicted_order` from the Jordan check.
pub(crate) fn finish(
    gammas: [f64; 3],
    topology: Topology,
    couplings: CouplingSet,
    sigma: Complex64,
    mut flags: Vec<Flag>,
) -> EpRealization {
    let a = NetworkMatrix::from_parts(gammas, couplings.as_array());
    let predicted_order = eigen_structure(&a, DEFAULT_TOLERANCE)
        .map(|es| es.classification)
        .unwrap_or(Classification::NonDegenerate);
    if !predicted_order.is_ep() {
        flags.push(Flag::NotEp);
    }
    EpRealization {
        topology,
        couplings,
        sigma,
        predicted_order,
        flags,
    }
}

/// Dispatches to the weak, strong or critical solver and verifies every
/// returned realization.
pub fn synthesize(res: &ResonatorSet, sigma: Complex64) -> Result<Vec<Verified>> {
    if res.delta() == 0.0 {
        return Err(Error::NoEpPossible);
    }
    let target = EpTarget::new(sigma, res.delta())?;
    let realizations = match target.regime {
        Regime::Critical => synthesize_critical(res)?,
        Regime::Weak => synthesize_weak(res, sigma.re)?,
        Regime::Strong => match strong::tied_pair(res) {
            Some(pair) => strong::synthesize_tied(res.gammas(), pair, sigma.im)?,
            None => synthesize_strong_general(res, sigma.im)?,
        },
    };
    Ok(realizations
        .into_iter()
        .map(|realization| {
            let report = verify_realization(&realization, res);
            Verified {
                realization,
                report,
            }
        })
        .collect())
}
