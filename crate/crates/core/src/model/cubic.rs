use num_complex::Complex64;

use super::CharPoly;

/// Roots of a monic complex cubic.
///
/// Solves the depressed cubic with Cardano's formula, choosing the branch of
/// the square root that avoids cancellation, then applies one Newton step per
/// root (kept only if it lowers the residual). Roots are ordered by descending
/// real part, then descending imaginary part.
pub fn cubic_roots(poly: &CharPoly) -> [Complex64; 3] {
    let shift = poly.a2 / 3.0;
    // s = t - a2/3  =>  t^3 + p t + q = 0
    let p = poly.a1 - poly.a2 * shift;
    let q = 2.0 * shift * shift * shift - shift * poly.a1 + poly.a0;

    let depressed = if p.norm() == 0.0 && q.norm() == 0.0 {
        [Complex64::new(0.0, 0.0); 3]
    } else {
        let half_q = q / 2.0;
        let third_p = p / 3.0;
        let disc = (half_q * half_q + third_p * third_p * third_p).sqrt();
        let cand_plus = -half_q + disc;
        let cand_minus = -half_q - disc;
        let u3 = if cand_plus.norm() >= cand_minus.norm() {
            cand_plus
        } else {
            cand_minus
        };
        let u = u3.cbrt();
        let omega = Complex64::new(-0.5, 3.0_f64.sqrt() / 2.0);
        let mut out = [Complex64::new(0.0, 0.0); 3];
        let mut rot = Complex64::new(1.0, 0.0);
        for t in out.iter_mut() {
            let uk = u * rot;
            *t = if uk.norm() == 0.0 {
                uk
            } else {
                uk - third_p / uk
            };
            rot *= omega;
        }
        out
    };

    let mut roots = depressed.map(|t| newton_step(poly, t - shift));
    roots.sort_by(|a, b| b.re.total_cmp(&a.re).then(b.im.total_cmp(&a.im)));
    roots
}

fn newton_step(poly: &CharPoly, s: Complex64) -> Complex64 {
    let value = poly.eval(s);
    let slope = poly.derivative(s);
    if slope.norm() == 0.0 || value.norm() == 0.0 {
        return s;
    }
    let next = s - value / slope;
    if next.is_finite() && poly.eval(next).norm() < value.norm() {
        next
    } else {
        s
    }
}
