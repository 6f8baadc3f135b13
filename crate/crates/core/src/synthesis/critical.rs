use super::weak::chains;
use super::EpRealization;
use crate::error::{Error, Result};
use crate::model::ResonatorSet;

/// Realizations of `σ = 0`, where all three eigenvalues coalesce.
///
/// The middle-2 chain always exists; the second twin is the middle-1 chain
/// when `γ₂ ≤ 0` and the middle-3 chain otherwise. When `γ₂ = 0` both
/// candidates reduce to the same two-resonator network, which carries an
/// EP2 on a triple eigenvalue rather than an EP3.
pub fn synthesize_critical(res: &ResonatorSet) -> Result<Vec<EpRealization>> {
    if res.delta() == 0.0 {
        return Err(Error::NoEpPossible);
    }
    Ok(chains(res, 0.0))
}
