use num_complex::Complex64;
use std::f64::consts::PI;

/// Roots of `x^3 + a x^2 + b x + c`, each polished by one Newton step.
pub fn cubic_roots(a: f64, b: f64, c: f64) -> [Complex64; 3] {
    let shift = a / 3.0;
    // depressed cubic t^3 + p t + q, x = t - a/3
    let p = b - a * a / 3.0;
    let q = 2.0 * a * a * a / 27.0 - a * b / 3.0 + c;
    let half_q = q / 2.0;
    let third_p = p / 3.0;
    let disc = half_q * half_q + third_p * third_p * third_p;

    let raw: [Complex64; 3] = if disc > 0.0 {
        // one real root, one conjugate pair
        let s = disc.sqrt();
        let u = -(half_q.signum()) * (half_q.abs() + s).cbrt();
        let v = if u != 0.0 { -third_p / u } else { 0.0 };
        let x = u + v - shift;
        // the pair sums to -a - x; its product follows from b = pair_prod + x * pair_sum
        let pair_sum = -a - x;
        let pair_prod = b - x * pair_sum;
        let re = pair_sum / 2.0;
        let im = (pair_prod - re * re).max(0.0).sqrt();
        [Complex64::new(x, 0.0), Complex64::new(re, im), Complex64::new(re, -im)]
    } else if p == 0.0 {
        let x = -shift;
        [Complex64::new(x, 0.0); 3]
    } else {
        let rad = (-third_p).sqrt();
        let arg = (-half_q / (rad * rad * rad)).clamp(-1.0, 1.0);
        let theta = arg.acos() / 3.0;
        let mut out = [Complex64::new(0.0, 0.0); 3];
        for (k, o) in out.iter_mut().enumerate() {
            *o = Complex64::new(2.0 * rad * (theta - 2.0 * PI * k as f64 / 3.0).cos() - shift, 0.0);
        }
        out
    };

    let poly = |z: Complex64| ((z + a) * z + b) * z + c;
    let deriv = |z: Complex64| (3.0 * z + 2.0 * a) * z + b;
    raw.map(|z| {
        let d = deriv(z);
        if d.norm() < 1e-300 {
            return z;
        }
        let next = z - poly(z) / d;
        if next.re.is_finite() && next.im.is_finite() && poly(next).norm() <= poly(z).norm() {
            next
        } else {
            z
        }
    })
}
