//! Exceptional-point (EP) synthesis for networks of three mutually resonant
//! resonators.
//!
//! Given three loss/gain rates, the crate enumerates every admissible
//! degenerate eigenvalue of the coupled-mode matrix `A = Γ + iK`, computes the
//! coupling constants of the two networks ("twins") that realize it, checks the
//! Jordan structure numerically, and evaluates transmission/reflection spectra
//! and perturbation sensitivity around each EP.
//!
//! Conventions used throughout:
//!
//! * Rates and couplings are stored in absolute units. Normalizing by the
//!   non-Hermiticity `Δ` is left to presentation code.
//! * Resonator indices are zero-based in the API (`0`, `1`, `2` are resonators
//!   1, 2, 3 of the sorted set `γ₁ ≤ γ₂ ≤ γ₃`).
//! * `σ` always denotes an eigenvalue of `A` itself, and the characteristic
//!   polynomial is `det(sI − A)`.
//!
//! ```
//! use trires::{normalize_resonators, synthesize};
//! use num_complex::Complex64;
//!
//! let res = normalize_resonators([-2.0, -1.0, 3.0]).unwrap();
//! let twins = synthesize(&res, Complex64::new(0.0, 0.0)).unwrap();
//! assert_eq!(twins.len(), 2);
//! assert!(twins.iter().all(|t| t.report.passed()));
//! ```

mod error;
pub mod model;
pub mod sensitivity;
pub mod spectra;
pub mod synthesis;

pub use error::{Error, Result};
pub use model::{
    apply_offset, build_network_matrix, characteristic_coefficients, cubic_roots, eigen_structure,
    normalize_resonators, CharPoly, Classification, CouplingSet, EigenCluster, EigenStructure,
    NetworkMatrix, Port, ResonatorSet, WaveguidePorts, DEFAULT_TOLERANCE,
};
pub use sensitivity::{
    log_spaced, perturb_network, perturb_network_with, splitting_exponent, sweep, sweep_with,
    Parameter, PowerLawFit, SplittingFit, SweepResult,
};
pub use spectra::{
    find_peaks, find_peaks_in, spectrum, stabilize, transfer_at, Peak, PeakSet, SpectrumSample,
    Stabilized, Transfer,
};
pub use synthesis::{
    admissible_ranges, synthesize, synthesize_critical, synthesize_strong_general,
    synthesize_strong_symmetric, synthesize_weak, verify_realization, CubicProblem, EpRealization,
    EpTarget, Flag, Interval, Regime, Topology, VerificationReport, Verified,
};
