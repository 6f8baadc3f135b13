use num_complex::Complex64;
use proptest::prelude::*;

use trires::{
    apply_offset, build_network_matrix, characteristic_coefficients, eigen_structure,
    normalize_resonators, splitting_exponent, stabilize, sweep, synthesize,
    synthesize_strong_general, synthesize_weak, transfer_at, verify_realization, CouplingSet,
    CubicProblem, NetworkMatrix, ResonatorSet, Topology, WaveguidePorts, DEFAULT_TOLERANCE,
};

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// Strictly ordered rates with every gap at least 5% of the spread.
fn ordered_rates() -> impl Strategy<Value = ResonatorSet> {
    (-1.0..1.0f64, 0.05..1.0f64, 0.05..1.0f64)
        .prop_map(|(g1, a, b)| normalize_resonators([g1, g1 + a, g1 + a + b]).unwrap())
}

fn couplings() -> impl Strategy<Value = CouplingSet> {
    (0.0..2.0f64, 0.0..2.0f64, 0.0..2.0f64).prop_map(|(a, b, c)| CouplingSet::new(a, b, c).unwrap())
}

fn traceless_network() -> impl Strategy<Value = (ResonatorSet, CouplingSet)> {
    ((-2.0..2.0f64, -2.0..2.0f64, -2.0..2.0f64), couplings())
        .prop_map(|((a, b, c), k)| (normalize_resonators([a, b, c]).unwrap(), k))
}

/// Weak-regime σ as a fraction of the admissible interval, away from the
/// ends, from zero and from the diabolic points.
fn weak_sigma(res: &ResonatorSet, t: f64) -> Option<f64> {
    weak_sigma_clear_of_zero(res, t, 1e-3)
}

/// As [`weak_sigma`], keeping `|σ| > margin·Δ`. σ also stays outside the
/// pair-clustering radius `√tol·S` around zero: closer in, the triple
/// `σ, σ, −2σ` is within tolerance of a third-order EP and is classified so.
fn weak_sigma_clear_of_zero(res: &ResonatorSet, t: f64, margin: f64) -> Option<f64> {
    let g = res.gammas();
    let sigma = -g[2] / 2.0 + t * (g[2] - g[0]) / 2.0;
    let d = res.delta();
    let pair_radius = DEFAULT_TOLERANCE.sqrt() * matrix_scale_bound(res);
    let clear = sigma.abs() > (margin * d).max(pair_radius)
        && g.iter().all(|gk| (sigma - gk).abs() > 1e-3 * d);
    clear.then_some(sigma)
}

/// Upper bound on the tolerance scale `max(1, ‖A‖)` of any EP network on
/// these rates: `Δ² − κ² = σ²` keeps `κ ≤ Δ`, so `‖A‖_F ≤ √12·Δ`.
fn matrix_scale_bound(res: &ResonatorSet) -> f64 {
    1.0_f64.max(12f64.sqrt() * res.delta())
}

/// Determinant by permutation expansion.
fn leibniz_det(m: &[[Complex64; 3]; 3]) -> Complex64 {
    const PERMS: [([usize; 3], f64); 6] = [
        ([0, 1, 2], 1.0),
        ([1, 2, 0], 1.0),
        ([2, 0, 1], 1.0),
        ([0, 2, 1], -1.0),
        ([2, 1, 0], -1.0),
        ([1, 0, 2], -1.0),
    ];
    PERMS
        .iter()
        .map(|(p, sign)| m[0][p[0]] * m[1][p[1]] * m[2][p[2]] * *sign)
        .sum()
}

/// Solves `m x = rhs` by Gaussian elimination with partial pivoting.
#[allow(clippy::needless_range_loop)]
fn solve(m: [[Complex64; 3]; 3], rhs: [Complex64; 3]) -> [Complex64; 3] {
    let mut aug: Vec<Vec<Complex64>> = (0..3)
        .map(|i| {
            let mut row = m[i].to_vec();
            row.push(rhs[i]);
            row
        })
        .collect();
    for col in 0..3 {
        let pivot = (col..3)
            .max_by(|&a, &b| aug[a][col].norm().total_cmp(&aug[b][col].norm()))
            .unwrap();
        aug.swap(col, pivot);
        for row in col + 1..3 {
            let f = aug[row][col] / aug[col][col];
            for k in col..4 {
                let v = aug[col][k];
                aug[row][k] -= f * v;
            }
        }
    }
    let mut x = [c(0.0, 0.0); 3];
    for row in (0..3).rev() {
        let tail: Complex64 = (row + 1..3).map(|k| aug[row][k] * x[k]).sum();
        x[row] = (aug[row][3] - tail) / aug[row][row];
    }
    x
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(10_000))]

    #[test]
    fn eigenvalues_sum_to_trace((res, k) in traceless_network()) {
        let a = build_network_matrix(&res, &k);
        let es = eigen_structure(&a, DEFAULT_TOLERANCE).unwrap();
        let sum: Complex64 = es.eigenvalues.iter().sum();
        prop_assert!(sum.norm() <= 1e-10 * es.scale, "sum = {sum}");
    }
}

proptest! {
    #[test]
    fn char_coefficients_match_brute_force_determinant(
        (res, k) in traceless_network(),
        sr in -3.0..3.0f64, si in -3.0..3.0f64,
    ) {
        let a = build_network_matrix(&res, &k);
        let p = characteristic_coefficients(&a);
        let s = c(sr, si);
        let mut m = *a.entries();
        for (i, row) in m.iter_mut().enumerate() {
            for (j, z) in row.iter_mut().enumerate() {
                *z = if i == j { s - *z } else { -*z };
            }
        }
        let want = leibniz_det(&m);
        let scale = (1.0 + s.norm() + a.norm()).powi(3);
        prop_assert!((p.eval(s) - want).norm() <= 1e-12 * scale);
    }

    #[test]
    fn offset_shifts_spectrum_and_keeps_structure(
        (res, k) in traceless_network(),
        cr in -1.0..1.0f64, ci in -1.0..1.0f64,
    ) {
        let a = build_network_matrix(&res, &k);
        let shift = c(cr, ci);
        let es = eigen_structure(&a, DEFAULT_TOLERANCE).unwrap();
        let shifted = eigen_structure(&apply_offset(&a, shift), DEFAULT_TOLERANCE).unwrap();
        // compare as multisets
        for lambda in es.eigenvalues {
            let nearest = shifted
                .eigenvalues
                .iter()
                .map(|mu| (mu - (lambda - shift)).norm())
                .fold(f64::INFINITY, f64::min);
            prop_assert!(nearest <= 1e-6 * es.scale, "{lambda} missing after shift");
        }
    }

    #[test]
    fn conjugate_matrix_has_conjugate_spectrum((res, k) in traceless_network()) {
        let a = build_network_matrix(&res, &k);
        let es = eigen_structure(&a, DEFAULT_TOLERANCE).unwrap();
        let conj = eigen_structure(&a.conj(), DEFAULT_TOLERANCE).unwrap();
        for lambda in es.eigenvalues {
            let nearest = conj
                .eigenvalues
                .iter()
                .map(|mu| (mu - lambda.conj()).norm())
                .fold(f64::INFINITY, f64::min);
            prop_assert!(nearest <= 1e-6 * es.scale);
        }
    }

    #[test]
    fn power_distribution_is_normalized(res in ordered_rates(), t in 0.01..0.99f64) {
        if let Some(sigma) = weak_sigma(&res, t) {
            for real in synthesize_weak(&res, sigma).unwrap() {
                let es = eigen_structure(&build_network_matrix(&res, &real.couplings), DEFAULT_TOLERANCE).unwrap();
                let p = es.power_distribution.unwrap();
                prop_assert!((p.iter().sum::<f64>() - 1.0).abs() <= 1e-12);
            }
        }
    }

    #[test]
    fn weak_twins_are_chains_holding_half_the_power(res in ordered_rates(), t in 0.01..0.99f64) {
        if let Some(sigma) = weak_sigma(&res, t) {
            let twins = synthesize_weak(&res, sigma).unwrap();
            prop_assert_eq!(twins.len(), 2);
            for real in &twins {
                prop_assert_eq!(real.couplings.zero_count(), 1);
                let poly = characteristic_coefficients(&build_network_matrix(&res, &real.couplings));
                prop_assert!(poly.a0.im.abs() <= 1e-14 * res.delta().powi(3));
                let report = verify_realization(real, &res);
                let Topology::Linear { .. } = real.topology else {
                    return Err(TestCaseError::fail("weak twin is not a chain"));
                };
                prop_assert!((report.middle_power.unwrap() - 0.5).abs() <= 1e-9);
            }
        }
    }

    #[test]
    fn strong_twins_multiply_to_sigma_six(res in ordered_rates(), s in 0.02..2.0f64, neg in any::<bool>()) {
        let sigma = if neg { -s } else { s } * res.delta();
        let twins = synthesize_strong_general(&res, sigma).unwrap();
        prop_assert_eq!(twins.len(), 2);
        for real in &twins {
            let [a, b, k] = real.couplings.as_array();
            let product = (a * b * k).powi(2);
            let want = sigma.powi(6);
            prop_assert!((product - want).abs() <= 1e-9 * want, "{product} vs {want}");
        }
    }

    #[test]
    fn cubic_discriminant_is_positive(res in ordered_rates(), s in 0.01..3.0f64) {
        let p = CubicProblem::new(res.gammas(), s * res.delta());
        prop_assert!(p.discriminant > 0.0, "{p:?}");
        prop_assert!(p.x1 > 0.0 && p.x2 > 0.0 && p.y0 > 0.0);
    }

    #[test]
    fn every_admissible_sigma_has_two_verified_twins(
        res in ordered_rates(),
        t in 0.01..0.99f64,
        s in 0.02..2.0f64,
    ) {
        let mut targets = vec![c(0.0, 0.0), c(0.0, s * res.delta())];
        if let Some(sigma) = weak_sigma(&res, t) {
            targets.push(c(sigma, 0.0));
        }
        for sigma in targets {
            let twins = synthesize(&res, sigma).unwrap();
            prop_assert_eq!(twins.len(), 2);
            for twin in &twins {
                prop_assert!(twin.report.passed(), "{sigma}: {:?}", twin.report);
                prop_assert!(twin.realization.predicted_order.is_ep());
            }
        }
    }

    #[test]
    fn transfer_matches_linear_solve(
        (res, k) in traceless_network(),
        w in -2.0..2.0f64,
        rate in 0.01..0.5f64,
    ) {
        let a = stabilize(&build_network_matrix(&res, &k), 0.1).unwrap().matrix;
        let ports = WaveguidePorts::all(rate).unwrap();
        let s = c(0.0, w);
        let tr = transfer_at(&a, &ports, s).unwrap();
        let b = ports.b_diagonal();
        let system = |m: &NetworkMatrix| {
            let mut out = *m.entries();
            for (i, row) in out.iter_mut().enumerate() {
                for (j, z) in row.iter_mut().enumerate() {
                    *z = if i == j { s - *z } else { -*z };
                }
            }
            out
        };
        let (m, m_star) = (system(&a), system(&a.conj()));
        for j in 0..3 {
            let mut rhs = [c(0.0, 0.0); 3];
            rhs[j] = c(b[j], 0.0);
            let x = solve(m, rhs);
            let y = solve(m_star, rhs);
            for i in 0..3 {
                let delta = if i == j { 1.0 } else { 0.0 };
                let t = delta - 0.5 * b[i] * (x[i] + y[i]);
                let r = -0.5 * b[i] * (x[i] - y[i]);
                let size = 1.0 + x[i].norm() + y[i].norm();
                prop_assert!((tr.t[i][j] - t).norm() <= 1e-11 * size);
                prop_assert!((tr.r[i][j] - r).norm() <= 1e-11 * size);
            }
        }
    }

    #[test]
    fn transfer_is_conjugate_symmetric((res, k) in traceless_network(), w in 0.0..2.0f64) {
        let a = stabilize(&build_network_matrix(&res, &k), 0.1).unwrap().matrix;
        let ports = WaveguidePorts::all(0.1).unwrap();
        let up = transfer_at(&a, &ports, c(0.0, w)).unwrap();
        let down = transfer_at(&a, &ports, c(0.0, -w)).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                prop_assert!((down.t[i][j] - up.t[i][j].conj()).norm() <= 1e-9 * (1.0 + up.t[i][j].norm()));
                // conjugation swaps the two counter-propagating responses, flipping R's sign
                prop_assert!((down.r[i][j] + up.r[i][j].conj()).norm() <= 1e-9 * (1.0 + up.r[i][j].norm()));
            }
        }
    }

    #[test]
    fn reflection_matrix_is_symmetric((res, k) in traceless_network(), w in -2.0..2.0f64) {
        // the cw→ccw and ccw→cw blocks coincide
        let a = stabilize(&build_network_matrix(&res, &k), 0.1).unwrap().matrix;
        let ports = WaveguidePorts::all(0.1).unwrap();
        let tr = transfer_at(&a, &ports, c(0.0, w)).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                prop_assert!((tr.r[i][j] - tr.r[j][i]).norm() <= 1e-12 * (1.0 + tr.r[i][j].norm()));
            }
        }
    }

    #[test]
    fn uncoupled_networks_never_reflect(res in ordered_rates(), w in -2.0..2.0f64) {
        let a = stabilize(&build_network_matrix(&res, &CouplingSet::zero()), 0.1).unwrap().matrix;
        let tr = transfer_at(&a, &WaveguidePorts::all(0.2).unwrap(), c(0.0, w)).unwrap();
        prop_assert!(tr.r.iter().flatten().all(|z| *z == c(0.0, 0.0)));
    }

    #[test]
    fn contractive_networks_do_not_amplify(
        (res, k) in traceless_network(),
        port in 0usize..3,
        rate in 0.01..1.0f64,
        w in -3.0..3.0f64,
        extra in 0.001..1.0f64,
    ) {
        // shift every resonator far enough that its net gain, port loss
        // included, is non-positive
        let g = res.gammas();
        let offset = (0..3)
            .map(|n| g[n] + if n == port { rate } else { 0.0 })
            .fold(f64::NEG_INFINITY, f64::max)
            + extra;
        let a = apply_offset(&build_network_matrix(&res, &k), c(offset, 0.0));
        let ports = WaveguidePorts::single(port, rate).unwrap();
        let tr = transfer_at(&a, &ports, c(0.0, w)).unwrap();
        prop_assert!(tr.t[port][port].norm_sqr() <= 1.0 + 1e-9);
    }

    #[test]
    fn splitting_vanishes_towards_the_ep(res in ordered_rates(), t in 0.05..0.95f64) {
        // next to the critical point rounding alone splits the pair by
        // about √(ε_mach·Δ/|σ|), which would swamp the floor asserted below
        if let Some(sigma) = weak_sigma_clear_of_zero(&res, t, 1e-2) {
            let real = synthesize_weak(&res, sigma).unwrap().remove(0);
            let d = res.delta();
            let grid: Vec<f64> = (0..8).map(|n| d * 10f64.powi(-4 - n)).collect();
            let sw = sweep(&real, &res, &grid).unwrap();
            let report = verify_realization(&real, &res);
            prop_assert_eq!(sw.classification, report.classification);
            // ascending ε: splittings grow with ε above the noise floor
            let positive: Vec<f64> = sw.epsilons.iter().zip(&sw.splittings)
                .filter(|(e, _)| **e > 0.0).map(|(_, s)| *s).collect();
            for pair in positive.windows(2) {
                prop_assert!(pair[1] + 1e-12 * d >= pair[0]);
            }
            prop_assert!(sw.splittings.iter().all(|s| *s >= 0.0));
            let zero = sw.epsilons.iter().position(|e| *e == 0.0).unwrap();
            prop_assert!(sw.splittings[zero] <= 1e-6 * matrix_scale_bound(&res));
            let fit = splitting_exponent(&sw);
            prop_assert!(fit.is_ok());
        }
    }
}
