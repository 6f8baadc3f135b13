use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use trires::{
    normalize_resonators, CouplingSet, NetworkMatrix, Port, ResonatorSet, WaveguidePorts,
};

use crate::error::{CliError, CliResult};

/// Network description exchanged through JSON files. Rates and couplings are
/// absolute; resonator numbers are one-based and refer to the file's order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NetworkSpecFile {
    pub gammas: [f64; 3],
    pub kappas: Kappas,
    #[serde(default)]
    pub waveguides: Vec<Waveguide>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub shift: Option<Shift>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Kappas {
    pub k12: f64,
    pub k23: f64,
    pub k31: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Waveguide {
    pub resonator: usize,
    pub rate: f64,
}

/// Offset `c` applied as `A − cI` before evaluating spectra.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ShiftRepr", into = "ShiftRepr")]
pub enum Shift {
    /// Shift just far enough to make the network stable.
    Auto,
    Offset(f64),
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum ShiftRepr {
    Keyword(String),
    Offset(f64),
}

impl TryFrom<ShiftRepr> for Shift {
    type Error = String;

    fn try_from(repr: ShiftRepr) -> Result<Self, Self::Error> {
        match repr {
            ShiftRepr::Keyword(k) if k == "auto" => Ok(Shift::Auto),
            ShiftRepr::Keyword(k) => Err(format!("shift must be \"auto\" or a number, got {k:?}")),
            ShiftRepr::Offset(c) => Ok(Shift::Offset(c)),
        }
    }
}

impl From<Shift> for ShiftRepr {
    fn from(shift: Shift) -> Self {
        match shift {
            Shift::Auto => ShiftRepr::Keyword("auto".to_string()),
            Shift::Offset(c) => ShiftRepr::Offset(c),
        }
    }
}

/// A spec file mapped onto the sorted resonator order used by the solvers.
#[derive(Debug, Clone)]
pub struct SortedNetwork {
    pub res: ResonatorSet,
    pub couplings: CouplingSet,
    /// `order[n]` is the file index of sorted resonator `n`.
    pub order: [usize; 3],
}

impl NetworkSpecFile {
    pub fn read(path: &Path) -> CliResult<Self> {
        let text = fs::read_to_string(path)
            .map_err(|e| CliError::usage(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text).map_err(|e| CliError::usage(format!("{}: {e}", path.display())))
    }

    pub fn parse(text: &str) -> Result<Self, String> {
        let spec: Self = serde_json::from_str(text).map_err(|e| e.to_string())?;
        spec.validate()?;
        Ok(spec)
    }

    fn validate(&self) -> Result<(), String> {
        if !self.gammas.iter().all(|g| g.is_finite()) {
            return Err("gammas must be finite".to_string());
        }
        let k = [self.kappas.k12, self.kappas.k23, self.kappas.k31];
        if !k.iter().all(|x| x.is_finite() && *x >= 0.0) {
            return Err("kappas must be finite and non-negative".to_string());
        }
        for w in &self.waveguides {
            if !(1..=3).contains(&w.resonator) {
                return Err(format!(
                    "waveguide resonator must be 1, 2 or 3, got {}",
                    w.resonator
                ));
            }
        }
        if let Some(Shift::Offset(c)) = self.shift {
            if !c.is_finite() {
                return Err("shift must be finite".to_string());
            }
        }
        Ok(())
    }

    /// Canonical text form: pretty JSON with a trailing newline.
    pub fn to_canonical(&self) -> String {
        let mut text = serde_json::to_string_pretty(self).expect("spec serializes");
        text.push('\n');
        text
    }

    pub fn write(&self, path: &Path) -> CliResult<()> {
        fs::write(path, self.to_canonical())
            .map_err(|e| CliError::usage(format!("cannot write {}: {e}", path.display())))
    }

    pub fn couplings(&self) -> CouplingSet {
        CouplingSet {
            k12: self.kappas.k12,
            k23: self.kappas.k23,
            k31: self.kappas.k31,
        }
    }

    /// Network matrix in file order, with the physical (unshifted) rates.
    pub fn matrix(&self) -> NetworkMatrix {
        NetworkMatrix::from_parts(self.gammas, self.couplings().as_array())
    }

    /// Waveguide ports in file order; `None` when the file lists none.
    pub fn ports(&self) -> CliResult<Option<WaveguidePorts>> {
        if self.waveguides.is_empty() {
            return Ok(None);
        }
        let ports = self
            .waveguides
            .iter()
            .map(|w| Port {
                resonator: w.resonator - 1,
                rate: w.rate,
            })
            .collect();
        Ok(Some(WaveguidePorts::new(ports)?))
    }

    pub fn sorted(&self) -> CliResult<SortedNetwork> {
        let mut order = [0, 1, 2];
        order.sort_by(|&a, &b| self.gammas[a].total_cmp(&self.gammas[b]));
        let res = normalize_resonators(self.gammas)?;
        let file = self.couplings();
        let k = |a: usize, b: usize| file.between(order[a], order[b]);
        let couplings = CouplingSet::new(k(0, 1), k(1, 2), k(2, 0))?;
        Ok(SortedNetwork {
            res,
            couplings,
            order,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const SAMPLE: &str = r#"{
  "gammas": [3.0, -2.0, -1.0],
  "kappas": {"k12": 0.5, "k23": 1.5, "k31": 0.0},
  "waveguides": [{"resonator": 3, "rate": 0.05}],
  "shift": "auto"
}"#;

    #[test]
    fn round_trips_through_canonical_form() {
        let spec = NetworkSpecFile::parse(SAMPLE).unwrap();
        let text = spec.to_canonical();
        let again = NetworkSpecFile::parse(&text).unwrap();
        assert_eq!(spec, again);
        assert_eq!(text, again.to_canonical());
    }

    #[test]
    fn numeric_and_missing_shift() {
        let spec = NetworkSpecFile::parse(
            r#"{"gammas":[0,0,0],"kappas":{"k12":0,"k23":0,"k31":0},"shift":-0.5}"#,
        )
        .unwrap();
        assert_eq!(spec.shift, Some(Shift::Offset(-0.5)));
        let spec =
            NetworkSpecFile::parse(r#"{"gammas":[0,0,0],"kappas":{"k12":0,"k23":0,"k31":0}}"#)
                .unwrap();
        assert_eq!(spec.shift, None);
        assert!(spec.waveguides.is_empty());
    }

    #[test]
    fn rejects_unknown_keys_and_bad_values() {
        for text in [
            r#"{"gammas":[0,0,0],"kappas":{"k12":0,"k23":0,"k31":0},"extra":1}"#,
            r#"{"gammas":[0,0,0],"kappas":{"k12":0,"k23":0,"k31":0,"k13":1}}"#,
            r#"{"gammas":[0,0,0],"kappas":{"k12":-1,"k23":0,"k31":0}}"#,
            r#"{"gammas":[0,0,0],"kappas":{"k12":0,"k23":0,"k31":0},"shift":"manual"}"#,
            r#"{"gammas":[0,0,0],"kappas":{"k12":0,"k23":0,"k31":0},"waveguides":[{"resonator":0,"rate":1}]}"#,
            r#"{"gammas":[0,0],"kappas":{"k12":0,"k23":0,"k31":0}}"#,
        ] {
            assert!(NetworkSpecFile::parse(text).is_err(), "{text}");
        }
    }

    #[test]
    fn sorting_permutes_couplings() {
        let spec = NetworkSpecFile::parse(SAMPLE).unwrap();
        let sorted = spec.sorted().unwrap();
        // file resonators (3, -2, -1) sort to (-2, -1, 3) = file indices (1, 2, 0)
        assert_eq!(sorted.order, [1, 2, 0]);
        assert_eq!(sorted.res.gammas(), [-2.0, -1.0, 3.0]);
        assert_eq!(sorted.couplings.as_array(), [1.5, 0.0, 0.5]);
    }
}
