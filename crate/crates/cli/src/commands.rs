use std::fs;
use std::path::Path;

use num_complex::Complex64;
use serde_json::{json, Value};
use trires::{
    admissible_ranges, apply_offset, build_network_matrix, eigen_structure, find_peaks, log_spaced,
    normalize_resonators, spectrum, splitting_exponent, stabilize, sweep_with, synthesize,
    verify_realization, Classification, CouplingSet, EigenStructure, EpRealization, EpTarget, Flag,
    Regime, ResonatorSet, SpectrumSample, Topology, Verified, WaveguidePorts,
};

use crate::args::{ClassifyArgs, EpsSigns, SpectrumArgs, SweepArgs, SynthesizeArgs, VerifyArgs};
use crate::error::{CliError, CliResult};
use crate::report::RunReport;
use crate::spec_file::{Kappas, NetworkSpecFile, Shift, Waveguide};

/// Options shared by every subcommand.
#[derive(Debug, Clone, Copy)]
pub struct Globals {
    pub normalize: bool,
    pub tol: f64,
}

/// A finished run: the report to print and the process exit code.
pub struct Outcome {
    pub report: RunReport,
    pub exit_code: u8,
}

impl Outcome {
    fn ok(report: RunReport) -> Self {
        Outcome {
            report,
            exit_code: 0,
        }
    }
}

const DEFAULT_PORT_RATE: f64 = 0.05;
const DEFAULT_OMEGA_HALF_SPAN: f64 = 0.5;
const STABILITY_MARGIN: f64 = 1e-3;
/// Below this fraction of Δ a component of the inferred EP eigenvalue is
/// treated as rounding noise.
const SNAP_FRACTION: f64 = 1e-9;
const FIT_CORRELATION_WARNING: f64 = 0.999;

const STRONG_CONJUGATE_NOTE: &str = "with non-negative couplings the network's degenerate \
    eigenvalue is conj(sigma); negating every coupling gives the network at sigma itself";
const SIGN_CONVENTION_NOTE: &str = "sigma is an eigenvalue of A = diag(gamma) + iK itself; \
    tabulations quoting the same couplings at -sigma use the opposite sign convention";

fn echo<T: serde::Serialize>(args: &T, globals: Globals, extra: Option<(&str, Value)>) -> Value {
    let mut input = serde_json::to_value(args).expect("arguments serialize");
    let map = input.as_object_mut().expect("arguments are a struct");
    map.insert("normalize".into(), json!(globals.normalize));
    map.insert("tol".into(), json!(globals.tol));
    if let Some((key, value)) = extra {
        map.insert(key.into(), value);
    }
    input
}

fn complex(z: Complex64) -> Value {
    json!([z.re, z.im])
}

fn kappas_json(k: &CouplingSet) -> Value {
    json!({"k12": k.k12, "k23": k.k23, "k31": k.k31})
}

fn require_delta(res: &ResonatorSet) -> CliResult<f64> {
    let delta = res.delta();
    if delta > 0.0 {
        Ok(delta)
    } else {
        Err(trires::Error::NoEpPossible.into())
    }
}

fn read_spec(path: &Path) -> CliResult<(NetworkSpecFile, Value)> {
    let spec = NetworkSpecFile::read(path)?;
    let value = serde_json::to_value(&spec).expect("spec serializes");
    Ok((spec, value))
}

pub fn classify(args: &ClassifyArgs, globals: Globals) -> CliResult<Outcome> {
    let input = echo(args, globals, None);
    let res = normalize_resonators(args.gammas)?;
    let delta = res.delta();
    let mut results = json!({
        "gammas": res.gammas(),
        "gamma0": res.gamma0(),
        "delta": delta,
    });
    let mut warnings = Vec::new();

    if delta == 0.0 {
        if args.sigma.is_some() {
            return Err(trires::Error::NoEpPossible.into());
        }
        results["no_ep_possible"] = json!(true);
        warnings.push("all rates are equal (delta = 0): no EP possible".to_string());
        return Ok(Outcome::ok(RunReport::new(
            "classify", input, results, warnings,
        )));
    }

    let ranges: Vec<Value> = admissible_ranges(&res)?
        .iter()
        .map(|r| {
            let mut entry = json!({
                "topology": Topology::Linear { middle: r.middle }.label(),
                "middle": r.middle + 1,
                "lower": r.lower,
                "upper": r.upper,
            });
            if globals.normalize {
                entry["lower_over_delta"] = json!(r.lower / delta);
                entry["upper_over_delta"] = json!(r.upper / delta);
            }
            entry
        })
        .collect();
    results["admissible_ranges"] = json!(ranges);
    results["strong_regime"] =
        json!("every purely imaginary sigma yields two circular realizations");

    if let Some(sigma) = args.sigma {
        let target = EpTarget::new(sigma, delta)?;
        let twins = synthesize(&res, sigma)?;
        let predicted: Vec<Value> = twins
            .iter()
            .map(|t| {
                json!({
                    "topology": t.realization.topology.label(),
                    "predicted_order": t.realization.predicted_order.label(),
                })
            })
            .collect();
        let mut target_json = json!({
            "value": complex(sigma),
            "regime": target.regime,
            "admissible": true,
            "realizations": predicted,
        });
        if globals.normalize {
            target_json["value_over_delta"] = complex(sigma / delta);
        }
        results["sigma"] = target_json;
        regime_warnings(target.regime, &mut warnings);
    }
    Ok(Outcome::ok(RunReport::new(
        "classify", input, results, warnings,
    )))
}

fn regime_warnings(regime: Regime, warnings: &mut Vec<String>) {
    match regime {
        Regime::Weak => warnings.push(SIGN_CONVENTION_NOTE.to_string()),
        Regime::Strong => warnings.push(STRONG_CONJUGATE_NOTE.to_string()),
        Regime::Critical => {}
    }
}

fn twin_warnings(n: usize, twin: &Verified, warnings: &mut Vec<String>) {
    let real = &twin.realization;
    if real.has_flag(Flag::Boundary) {
        warnings.push(format!(
            "twin {n}: sigma is a special point where one resonator decouples ({})",
            real.topology.label()
        ));
    }
    if real.predicted_order == Classification::Ep2TripleEigenvalue {
        warnings.push(format!(
            "twin {n}: second-order EP on a triple eigenvalue, not a third-order EP"
        ));
    }
    if real.has_flag(Flag::NotEp) || !twin.report.passed() {
        warnings.push(format!("twin {n}: failed verification"));
    }
}

pub fn synthesize_cmd(args: &SynthesizeArgs, globals: Globals) -> CliResult<Outcome> {
    let input = echo(args, globals, None);
    let res = normalize_resonators(args.gammas)?;
    let delta = require_delta(&res)?;
    let target = EpTarget::new(args.sigma, delta)?;
    let twins = synthesize(&res, args.sigma)?;

    let waveguides: Vec<Waveguide> = match &args.wg {
        Some(list) => list
            .0
            .iter()
            .map(|p| Waveguide {
                resonator: p.resonator + 1,
                rate: p.rate,
            })
            .collect(),
        None => vec![Waveguide {
            resonator: 3,
            rate: DEFAULT_PORT_RATE * delta,
        }],
    };
    WaveguidePorts::new(
        waveguides
            .iter()
            .map(|w| trires::Port {
                resonator: w.resonator - 1,
                rate: w.rate,
            })
            .collect(),
    )?;
    if let Some(dir) = &args.out {
        fs::create_dir_all(dir)
            .map_err(|e| CliError::usage(format!("cannot create {}: {e}", dir.display())))?;
    }

    let mut warnings = Vec::new();
    regime_warnings(target.regime, &mut warnings);
    if twins
        .iter()
        .any(|t| t.realization.has_flag(Flag::SwapEquivalent))
    {
        warnings.push(
            "the twins are the same network up to swapping the two equal-rate resonators"
                .to_string(),
        );
    }

    let mut entries = Vec::new();
    let mut all_passed = true;
    for (k, twin) in twins.iter().enumerate() {
        let n = k + 1;
        let real = &twin.realization;
        twin_warnings(n, twin, &mut warnings);
        all_passed &= twin.report.passed();
        let mut entry = json!({
            "twin": n,
            "topology": real.topology.label(),
            "couplings": kappas_json(&real.couplings),
            "predicted_order": real.predicted_order.label(),
            "flags": real.flags,
            "verification": twin.report,
            "passed": twin.report.passed(),
        });
        if globals.normalize {
            let k = real.couplings.as_array().map(|x| x / delta);
            entry["couplings_over_delta"] = json!({"k12": k[0], "k23": k[1], "k31": k[2]});
        }
        if let Some(dir) = &args.out {
            let path = dir.join(format!("twin-{n}.json"));
            let spec = NetworkSpecFile {
                gammas: res.physical_gammas(),
                kappas: Kappas {
                    k12: real.couplings.k12,
                    k23: real.couplings.k23,
                    k31: real.couplings.k31,
                },
                waveguides: waveguides.clone(),
                shift: Some(Shift::Auto),
            };
            spec.write(&path)?;
            entry["file"] = json!(path);
        }
        entries.push(entry);
    }

    let mut results = json!({
        "gammas": res.gammas(),
        "gamma0": res.gamma0(),
        "delta": delta,
        "sigma": complex(args.sigma),
        "regime": target.regime,
        "twins": entries,
    });
    if globals.normalize {
        results["sigma_over_delta"] = complex(args.sigma / delta);
    }
    let report = RunReport::new("synthesize", input, results, warnings);
    Ok(Outcome {
        report,
        exit_code: if all_passed { 0 } else { 3 },
    })
}

/// EP eigenvalue read off the degenerate cluster, with components below the
/// noise level set to zero so the regime is recognized.
fn inferred_sigma(es: &EigenStructure, delta: f64) -> Option<Complex64> {
    let value = es.degenerate_cluster()?.value;
    let snap = |x: f64| {
        if x.abs() <= SNAP_FRACTION * delta {
            0.0
        } else {
            x
        }
    };
    Some(Complex64::new(snap(value.re), snap(value.im)))
}

pub fn verify(args: &VerifyArgs, globals: Globals) -> CliResult<Outcome> {
    let (spec, spec_json) = read_spec(&args.spec)?;
    let input = echo(args, globals, Some(("spec_contents", spec_json)));
    let net = spec.sorted()?;
    let delta = require_delta(&net.res)?;
    let a = build_network_matrix(&net.res, &net.couplings);
    let es = eigen_structure(&a, globals.tol)?;

    let mut results = json!({
        "gammas": net.res.gammas(),
        "gamma0": net.res.gamma0(),
        "delta": delta,
        "couplings": kappas_json(&net.couplings),
        "classification": es.classification.label(),
        "eigenvalues": es.eigenvalues.map(complex),
    });
    let mut warnings = Vec::new();
    if net.order != [0, 1, 2] {
        warnings.push(format!(
            "resonators re-ordered by rate; sorted position n holds file resonator {:?}",
            net.order.map(|i| i + 1)
        ));
    }

    let (sigma, source) = match args.sigma {
        Some(s) => (Some(s), "argument"),
        None => (inferred_sigma(&es, delta), "inferred"),
    };
    let topology = Topology::of(&net.couplings);
    let (Some(sigma), Some(topology)) = (sigma, topology) else {
        results["passed"] = json!(false);
        warnings.push("no degenerate eigenvalue cluster: not an EP".to_string());
        let report = RunReport::new("verify", input, results, warnings);
        return Ok(Outcome {
            report,
            exit_code: 2,
        });
    };

    let real = EpRealization {
        topology,
        couplings: net.couplings,
        sigma,
        predicted_order: es.classification,
        flags: Vec::new(),
    };
    let report = verify_realization(&real, &net.res);
    let passed = report.passed();
    results["topology"] = json!(topology.label());
    results["sigma"] = complex(sigma);
    results["sigma_source"] = json!(source);
    if globals.normalize {
        results["sigma_over_delta"] = complex(sigma / delta);
    }
    results["verification"] = serde_json::to_value(&report).expect("report serializes");
    results["passed"] = json!(passed);
    if !passed {
        warnings.push("verification failed".to_string());
    }
    let report = RunReport::new("verify", input, results, warnings);
    Ok(Outcome {
        report,
        exit_code: if passed { 0 } else { 2 },
    })
}

fn linspace(min: f64, max: f64, points: usize) -> Vec<f64> {
    match points {
        0 => Vec::new(),
        1 => vec![min],
        _ => {
            let step = (max - min) / (points - 1) as f64;
            (0..points)
                .map(|k| {
                    if k == points - 1 {
                        max
                    } else {
                        min + step * k as f64
                    }
                })
                .collect()
        }
    }
}

/// 17 significant digits; adding zero folds `-0` into `0`.
fn fmt(x: f64) -> String {
    format!("{:.16e}", x + 0.0)
}

fn write_spectrum_csv(
    path: &Path,
    ports: &WaveguidePorts,
    samples: &[SpectrumSample],
) -> CliResult<usize> {
    let idx: Vec<usize> = ports.ports().iter().map(|p| p.resonator).collect();
    let pairs: Vec<(usize, usize)> = idx
        .iter()
        .flat_map(|&i| idx.iter().map(move |&j| (i, j)))
        .collect();
    let mut header = vec!["omega".to_string()];
    for (i, j) in &pairs {
        let tag = format!("{}{}", i + 1, j + 1);
        for col in ["T_re", "T_im", "R_re", "R_im", "T_abs2", "R_abs2"] {
            header.push(format!("{col}_{tag}"));
        }
    }
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(&header)?;
    for s in samples {
        let mut row = vec![fmt(s.omega)];
        for &(i, j) in &pairs {
            let t = s.transfer.t[i][j];
            let r = s.transfer.r[i][j];
            row.extend([t.re, t.im, r.re, r.im, t.norm_sqr(), r.norm_sqr()].map(fmt));
        }
        w.write_record(&row)?;
    }
    w.flush()
        .map_err(|e| CliError::usage(format!("cannot write {}: {e}", path.display())))?;
    Ok(header.len())
}

pub fn spectrum_cmd(args: &SpectrumArgs, globals: Globals) -> CliResult<Outcome> {
    let (spec, spec_json) = read_spec(&args.spec)?;
    let input = echo(args, globals, Some(("spec_contents", spec_json)));
    let delta = normalize_resonators(spec.gammas)?.delta();
    let mut warnings = Vec::new();

    let needs_delta = args.omega_min.is_none()
        || args.omega_max.is_none()
        || (args.wg.is_none() && spec.waveguides.is_empty())
        || spec.shift == Some(Shift::Auto);
    if needs_delta && delta == 0.0 {
        return Err(CliError::usage(
            "all rates are equal (delta = 0): give --omega-min, --omega-max, waveguides and a \
             numeric shift explicitly",
        ));
    }

    let ports = match (&args.wg, spec.ports()?) {
        (Some(list), _) => WaveguidePorts::new(list.0.clone())?,
        (None, Some(ports)) => ports,
        (None, None) => {
            warnings.push(format!(
                "no waveguides given: using one on resonator 3 at {DEFAULT_PORT_RATE} delta"
            ));
            WaveguidePorts::single(2, DEFAULT_PORT_RATE * delta)?
        }
    };
    if ports.ports().is_empty() {
        return Err(CliError::usage("at least one waveguide is required"));
    }

    let a = spec.matrix();
    let (shifted, offset, shift_mode) = match spec.shift {
        None => (a, 0.0, "none"),
        Some(Shift::Offset(c)) => (apply_offset(&a, Complex64::new(c, 0.0)), c, "explicit"),
        Some(Shift::Auto) => {
            let st = stabilize(&a, STABILITY_MARGIN * delta)?;
            if st.toward_zero {
                warnings.push(
                    "automatic shift moved the spectrum toward the imaginary axis".to_string(),
                );
            }
            (st.matrix, st.offset, "auto")
        }
    };

    let omega_min = args.omega_min.unwrap_or(-DEFAULT_OMEGA_HALF_SPAN * delta);
    let omega_max = args.omega_max.unwrap_or(DEFAULT_OMEGA_HALF_SPAN * delta);
    if omega_min >= omega_max {
        return Err(CliError::usage(format!(
            "need omega-min < omega-max, got {omega_min} and {omega_max}"
        )));
    }
    let omegas = linspace(omega_min, omega_max, args.points);
    let samples = spectrum(&shifted, &ports, &omegas)?;

    let mut peaks = Vec::new();
    for p in ports.ports() {
        let set = find_peaks(&samples, (p.resonator, p.resonator))?;
        peaks.push(json!({"port": p.resonator + 1, "peaks": set.peaks}));
    }
    let columns = write_spectrum_csv(&args.out, &ports, &samples)?;
    let max_real = eigen_structure(&shifted, globals.tol)?
        .eigenvalues
        .iter()
        .map(|z| z.re)
        .fold(f64::NEG_INFINITY, f64::max);

    let mut results = json!({
        "csv": args.out,
        "rows": samples.len(),
        "columns": columns,
        "delta": delta,
        "shift": shift_mode,
        "offset": offset,
        "max_real_eigenvalue": max_real,
        "ports": ports.ports().iter().map(|p| json!({"resonator": p.resonator + 1, "rate": p.rate})).collect::<Vec<_>>(),
        "omega_min": omega_min,
        "omega_max": omega_max,
        "peaks": peaks,
    });
    if globals.normalize && delta > 0.0 {
        results["omega_min_over_delta"] = json!(omega_min / delta);
        results["omega_max_over_delta"] = json!(omega_max / delta);
    }
    Ok(Outcome::ok(RunReport::new(
        "spectrum", input, results, warnings,
    )))
}

fn eps_grid(min: f64, max: f64, points: usize, signs: EpsSigns) -> CliResult<Vec<f64>> {
    let grid = match signs {
        EpsSigns::Both => log_spaced(min, max, points, true)?,
        EpsSigns::Positive => log_spaced(min, max, points, false)?,
        EpsSigns::Negative => log_spaced(min, max, points, false)?
            .into_iter()
            .rev()
            .map(|e| -e)
            .collect(),
    };
    Ok(grid)
}

pub fn sweep_cmd(args: &SweepArgs, globals: Globals) -> CliResult<Outcome> {
    let mut warnings = Vec::new();
    let (real, res, input) = match (&args.spec, args.gammas, args.sigma) {
        (Some(path), _, _) => {
            let (spec, spec_json) = read_spec(path)?;
            let input = echo(args, globals, Some(("spec_contents", spec_json)));
            let net = spec.sorted()?;
            let delta = require_delta(&net.res)?;
            let a = build_network_matrix(&net.res, &net.couplings);
            let es = eigen_structure(&a, globals.tol)?;
            let not_ep = || {
                CliError::from(trires::Error::NotAnEp(
                    "the network has no degenerate eigenvalue cluster".to_string(),
                ))
            };
            let sigma = inferred_sigma(&es, delta).ok_or_else(not_ep)?;
            let topology = Topology::of(&net.couplings).ok_or_else(not_ep)?;
            let real = EpRealization {
                topology,
                couplings: net.couplings,
                sigma,
                predicted_order: es.classification,
                flags: Vec::new(),
            };
            (real, net.res, input)
        }
        (None, Some(gammas), Some(sigma)) => {
            let input = echo(args, globals, None);
            let res = normalize_resonators(gammas)?;
            require_delta(&res)?;
            let mut twins = synthesize(&res, sigma)?;
            let k = usize::from(args.twin) - 1;
            if k >= twins.len() {
                return Err(CliError::domain(
                    "no_such_twin",
                    format!(
                        "sigma has {} realization(s), twin {} requested",
                        twins.len(),
                        args.twin
                    ),
                ));
            }
            (twins.swap_remove(k).realization, res, input)
        }
        _ => {
            return Err(CliError::usage(
                "give either --spec or both --gammas and --sigma",
            ));
        }
    };
    let delta = res.delta();

    let (default_min, default_max) = match real.predicted_order {
        Classification::Ep3 => (1e-10, 1e-6),
        _ => (1e-8, 1e-4),
    };
    let eps_min = args.eps_min.unwrap_or(default_min * delta);
    let eps_max = args.eps_max.unwrap_or(default_max * delta);
    let grid = eps_grid(eps_min, eps_max, args.eps_points, args.eps_signs)?;

    let parameter = args.perturb.parameter();
    let sw = sweep_with(&real, &res, parameter, &grid)?;
    let fit = splitting_exponent(&sw)?;
    if fit.combined.correlation.abs() < FIT_CORRELATION_WARNING {
        warnings.push(format!(
            "log-log correlation {:.6} is below {FIT_CORRELATION_WARNING}; the window may leave \
             the asymptotic regime",
            fit.combined.correlation
        ));
    }

    let mut w = csv::Writer::from_path(&args.out)?;
    w.write_record([
        "epsilon",
        "lambda1_re",
        "lambda1_im",
        "lambda2_re",
        "lambda2_im",
        "lambda3_re",
        "lambda3_im",
        "splitting",
    ])?;
    for ((eps, lams), split) in sw.epsilons.iter().zip(&sw.trajectories).zip(&sw.splittings) {
        let mut row = vec![fmt(*eps)];
        for z in lams {
            row.push(fmt(z.re));
            row.push(fmt(z.im));
        }
        row.push(fmt(*split));
        w.write_record(&row)?;
    }
    w.flush()
        .map_err(|e| CliError::usage(format!("cannot write {}: {e}", args.out.display())))?;

    let mut results = json!({
        "csv": args.out,
        "rows": sw.epsilons.len(),
        "delta": delta,
        "topology": real.topology.label(),
        "couplings": kappas_json(&real.couplings),
        "sigma": complex(real.sigma),
        "parameter": args.perturb,
        "classification": sw.classification.label(),
        "cluster": sw.cluster.iter().map(|m| m + 1).collect::<Vec<_>>(),
        "eps_min": eps_min,
        "eps_max": eps_max,
        "exponent": fit.combined.exponent,
        "fit": fit,
    });
    if globals.normalize {
        results["eps_min_over_delta"] = json!(eps_min / delta);
        results["eps_max_over_delta"] = json!(eps_max / delta);
    }
    Ok(Outcome::ok(RunReport::new(
        "sweep", input, results, warnings,
    )))
}
