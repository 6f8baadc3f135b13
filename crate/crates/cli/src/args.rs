use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use serde::Serialize;
use trires::{Parameter, Port, DEFAULT_TOLERANCE};

#[derive(Debug, Parser)]
#[command(
    name = "trires",
    version,
    about = "Exceptional-point synthesis for three coupled resonators",
    long_about = "Exceptional-point synthesis for three coupled resonators.\n\n\
        Rates, couplings, frequencies and perturbations are absolute. The degenerate \
        eigenvalue sigma is measured in the traceless frame (rates shifted by their mean). \
        Exit codes: 0 success, 1 usage error, 2 rejected by the model, 3 numerical failure."
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    /// Also report couplings, sigma and grids in units of the non-Hermiticity Δ.
    #[arg(long, global = true)]
    pub normalize: bool,

    /// Relative tolerance for eigenvalue clustering and rank decisions.
    #[arg(long, global = true, default_value_t = DEFAULT_TOLERANCE)]
    pub tol: f64,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Show Δ, the admissible eigenvalue ranges and the regime of a target sigma.
    Classify(ClassifyArgs),
    /// Compute the twin networks realizing sigma and write one spec file per twin.
    Synthesize(SynthesizeArgs),
    /// Re-check the EP structure of a network spec file.
    Verify(VerifyArgs),
    /// Transmission and reflection spectra of a network spec file as CSV.
    Spectrum(SpectrumArgs),
    /// Eigenvalue splitting under a perturbation sweep, with a power-law fit.
    Sweep(SweepArgs),
}

#[derive(Debug, Args, Serialize)]
pub struct ClassifyArgs {
    /// Three resonator rates, e.g. -2,-1,3.
    #[arg(long, value_parser = parse_gammas, allow_hyphen_values = true)]
    pub gammas: [f64; 3],
    /// Target eigenvalue: "re", "re,im", "iIm" or "-iIm".
    #[arg(long, value_parser = parse_sigma, allow_hyphen_values = true)]
    #[serde(serialize_with = "ser_opt_complex")]
    pub sigma: Option<Complex64>,
}

#[derive(Debug, Args, Serialize)]
pub struct SynthesizeArgs {
    #[arg(long, value_parser = parse_gammas, allow_hyphen_values = true)]
    pub gammas: [f64; 3],
    #[arg(long, value_parser = parse_sigma, allow_hyphen_values = true)]
    #[serde(serialize_with = "ser_complex")]
    pub sigma: Complex64,
    /// Directory receiving twin-1.json and twin-2.json.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Waveguides written into the twin files, e.g. 3:0.05 (default: resonator 3 at 0.05Δ).
    #[arg(long, value_parser = parse_ports, allow_hyphen_values = true)]
    pub wg: Option<PortList>,
}

#[derive(Debug, Args, Serialize)]
pub struct VerifyArgs {
    /// Network spec file (JSON).
    #[arg(long)]
    pub spec: PathBuf,
    /// Target eigenvalue; inferred from the degenerate cluster when omitted.
    #[arg(long, value_parser = parse_sigma, allow_hyphen_values = true)]
    #[serde(serialize_with = "ser_opt_complex")]
    pub sigma: Option<Complex64>,
}

#[derive(Debug, Args, Serialize)]
pub struct SpectrumArgs {
    #[arg(long)]
    pub spec: PathBuf,
    /// Output CSV path.
    #[arg(long)]
    pub out: PathBuf,
    /// Lower end of the frequency grid (default -0.5Δ).
    #[arg(long, allow_hyphen_values = true)]
    pub omega_min: Option<f64>,
    /// Upper end of the frequency grid (default 0.5Δ).
    #[arg(long, allow_hyphen_values = true)]
    pub omega_max: Option<f64>,
    #[arg(long, default_value_t = 4001)]
    pub points: usize,
    /// Waveguides overriding the file's, e.g. 1:0.1,3:0.05 (one-based resonators).
    #[arg(long, value_parser = parse_ports, allow_hyphen_values = true)]
    pub wg: Option<PortList>,
}

#[derive(Debug, Args, Serialize)]
pub struct SweepArgs {
    /// Network spec file; alternatively give --gammas and --sigma.
    #[arg(long, conflicts_with_all = ["gammas", "sigma"])]
    pub spec: Option<PathBuf>,
    #[arg(long, value_parser = parse_gammas, allow_hyphen_values = true, requires = "sigma")]
    pub gammas: Option<[f64; 3]>,
    #[arg(long, value_parser = parse_sigma, allow_hyphen_values = true, requires = "gammas")]
    #[serde(serialize_with = "ser_opt_complex")]
    pub sigma: Option<Complex64>,
    /// Which twin (1 or 2) to sweep when synthesizing from --gammas/--sigma.
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u8).range(1..=2))]
    pub twin: u8,
    /// Output CSV path.
    #[arg(long)]
    pub out: PathBuf,
    /// Perturbed parameter, in sorted resonator order.
    #[arg(long, value_enum, default_value_t = PerturbArg::Gamma3)]
    pub perturb: PerturbArg,
    /// Smallest |ε| (default 1e-8Δ, or 1e-10Δ for a third-order EP).
    #[arg(long)]
    pub eps_min: Option<f64>,
    /// Largest |ε| (default 1e-4Δ, or 1e-6Δ for a third-order EP).
    #[arg(long)]
    pub eps_max: Option<f64>,
    /// Number of log-spaced |ε| values on each sampled side.
    #[arg(long, default_value_t = 25)]
    pub eps_points: usize,
    #[arg(long, value_enum, default_value_t = EpsSigns::Both)]
    pub eps_signs: EpsSigns,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum PerturbArg {
    Gamma1,
    Gamma2,
    Gamma3,
    K12,
    K23,
    K31,
}

impl PerturbArg {
    pub fn parameter(self) -> Parameter {
        match self {
            PerturbArg::Gamma1 => Parameter::Gamma(0),
            PerturbArg::Gamma2 => Parameter::Gamma(1),
            PerturbArg::Gamma3 => Parameter::Gamma(2),
            PerturbArg::K12 => Parameter::Kappa(0, 1),
            PerturbArg::K23 => Parameter::Kappa(1, 2),
            PerturbArg::K31 => Parameter::Kappa(2, 0),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum EpsSigns {
    Both,
    Positive,
    Negative,
}

fn parse_real(text: &str) -> Result<f64, String> {
    let x: f64 = text
        .trim()
        .parse()
        .map_err(|_| format!("not a number: {text:?}"))?;
    if x.is_finite() {
        Ok(x)
    } else {
        Err(format!("not a finite number: {text:?}"))
    }
}

pub fn parse_gammas(text: &str) -> Result<[f64; 3], String> {
    let values = text
        .split(',')
        .map(parse_real)
        .collect::<Result<Vec<_>, _>>()?;
    <[f64; 3]>::try_from(values).map_err(|v| format!("expected three rates, got {}", v.len()))
}

/// Accepts `re`, `re,im`, `iIm`, `+iIm` and `-iIm`.
pub fn parse_sigma(text: &str) -> Result<Complex64, String> {
    let t = text.trim();
    let (sign, rest) = match t.strip_prefix('-') {
        Some(rest) => (-1.0, rest),
        None => (1.0, t.strip_prefix('+').unwrap_or(t)),
    };
    if let Some(im) = rest.strip_prefix('i') {
        return Ok(Complex64::new(0.0, sign * parse_real(im)?));
    }
    match t.split_once(',') {
        Some((re, im)) => Ok(Complex64::new(parse_real(re)?, parse_real(im)?)),
        None => Ok(Complex64::new(parse_real(t)?, 0.0)),
    }
}

/// Waveguides given on the command line; echoed with one-based indices.
#[derive(Debug, Clone, PartialEq)]
pub struct PortList(pub Vec<Port>);

impl Serialize for PortList {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let items: Vec<String> = self
            .0
            .iter()
            .map(|p| format!("{}:{}", p.resonator + 1, p.rate))
            .collect();
        items.serialize(s)
    }
}

/// `idx:rate` pairs separated by commas, with one-based resonator indices.
pub fn parse_ports(text: &str) -> Result<PortList, String> {
    text.split(',')
        .map(|item| {
            let (idx, rate) = item
                .split_once(':')
                .ok_or_else(|| format!("expected idx:rate, got {item:?}"))?;
            let resonator: usize = idx
                .trim()
                .parse()
                .map_err(|_| format!("bad resonator index {idx:?}"))?;
            if !(1..=3).contains(&resonator) {
                return Err(format!(
                    "resonator index must be 1, 2 or 3, got {resonator}"
                ));
            }
            Ok(Port {
                resonator: resonator - 1,
                rate: parse_real(rate)?,
            })
        })
        .collect::<Result<Vec<_>, _>>()
        .map(PortList)
}

fn ser_complex<S: serde::Serializer>(z: &Complex64, s: S) -> Result<S::Ok, S::Error> {
    [z.re, z.im].serialize(s)
}

fn ser_opt_complex<S: serde::Serializer>(z: &Option<Complex64>, s: S) -> Result<S::Ok, S::Error> {
    z.map(|z| [z.re, z.im]).serialize(s)
}
