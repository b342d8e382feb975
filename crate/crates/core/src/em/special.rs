//! Special functions: Fresnel integrals and the exponentially scaled
//! modified Bessel function of order zero.

use num_complex::Complex64;
use std::f64::consts::{FRAC_PI_2, PI};

const EPS: f64 = 1e-16;
const MAX_ITER: usize = 2000;
/// Switch point between the power series and the continued fraction.
const SERIES_LIMIT: f64 = 1.5;

/// Normalized Fresnel integrals `(C(x), S(x))` with kernel `cos/sin(pi t^2 / 2)`.
pub fn fresnel_cs(x: f64) -> (f64, f64) {
    let ax = x.abs();
    let (c, s) = if ax <= SERIES_LIMIT {
        fresnel_series(ax)
    } else {
        let tail = fresnel_tail_cf(ax);
        // tail = (1/2 - C) - j (1/2 - S)
        (0.5 - tail.re, 0.5 + tail.im)
    };
    if x < 0.0 {
        (-c, -s)
    } else {
        (c, s)
    }
}

fn fresnel_series(ax: f64) -> (f64, f64) {
    if ax < 1e-150 {
        return (ax, 0.0);
    }
    // C = sum (-1)^k (pi/2)^{2k} x^{4k+1} / ((2k)! (4k+1)), S likewise with odd powers
    let fact = FRAC_PI_2 * ax * ax;
    let mut term = ax;
    let mut sum_c = ax;
    let mut sum_s = 0.0;
    let mut sign_c = 1.0;
    let mut sign_s = 1.0;
    let mut odd = true;
    let mut n = 3.0;
    for k in 1..MAX_ITER {
        term *= fact / k as f64;
        let contrib = term / n;
        if odd {
            sum_s += sign_s * contrib;
            sign_s = -sign_s;
        } else {
            sign_c = -sign_c;
            sum_c += sign_c * contrib;
        }
        if contrib < EPS * sum_c.abs().max(sum_s.abs()) {
            break;
        }
        odd = !odd;
        n += 2.0;
    }
    (sum_c, sum_s)
}

/// `int_x^inf exp(-j pi t^2 / 2) dt` for `x > SERIES_LIMIT` by a modified
/// Lentz continued fraction (no cancellation in the tail).
fn fresnel_tail_cf(ax: f64) -> Complex64 {
    let pix2 = PI * ax * ax;
    let one = Complex64::new(1.0, 0.0);
    let mut b = Complex64::new(1.0, -pix2);
    let mut c = Complex64::new(1.0 / 1e-300, 0.0);
    let mut d = one / b;
    let mut h = d;
    let mut n = -1.0;
    for _ in 2..MAX_ITER {
        n += 2.0;
        let a = -n * (n + 1.0);
        b += Complex64::new(4.0, 0.0);
        d = one / (d * a + b);
        c = b + Complex64::new(a, 0.0) / c;
        let del = c * d;
        h *= del;
        if (del.re - 1.0).abs() + del.im.abs() < EPS {
            break;
        }
    }
    h *= Complex64::new(ax, -ax);
    // (1/2 - C) + j (1/2 - S) = (1+j)/2 * exp(j pi x^2/2) * h
    let plus = Complex64::new(0.5, 0.5) * Complex64::from_polar(1.0, 0.5 * pix2) * h;
    plus.conj()
}

/// `int_x^inf exp(-j pi t^2 / 2) dt` for `x >= 0`.
pub fn fresnel_tail(x: f64) -> Complex64 {
    debug_assert!(x >= 0.0);
    if x > SERIES_LIMIT {
        fresnel_tail_cf(x)
    } else {
        let (c, s) = fresnel_series(x);
        Complex64::new(0.5 - c, -(0.5 - s))
    }
}

/// UTD transition function `F(X) = 2j sqrt(X) exp(jX) int_{sqrt X}^inf exp(-j tau^2) dtau`.
pub fn transition_function(x: f64) -> Complex64 {
    if x <= 0.0 {
        return Complex64::new(0.0, 0.0);
    }
    let sx = x.sqrt();
    let nu = (2.0 * x / PI).sqrt();
    let integral = (PI / 2.0).sqrt() * fresnel_tail(nu);
    Complex64::new(0.0, 2.0 * sx) * Complex64::from_polar(1.0, x) * integral
}

/// `exp(-x) I0(x)` for `x >= 0`.
pub fn bessel_i0_scaled(x: f64) -> f64 {
    let x = x.abs();
    if x <= 30.0 {
        // sum (x/2)^{2k} / (k!)^2, scaled by exp(-x) term by term
        let q = 0.25 * x * x;
        let mut term = (-x).exp();
        let mut sum = term;
        for k in 1..500 {
            let kf = k as f64;
            term *= q / (kf * kf);
            sum += term;
            if term < EPS * sum {
                break;
            }
        }
        sum
    } else {
        // asymptotic: 1/sqrt(2 pi x) * sum_k ((2k-1)!!)^2 / (k! (8x)^k)
        let mut term = 1.0;
        let mut sum = 1.0;
        for k in 1..60 {
            let kf = k as f64;
            let next = term * (2.0 * kf - 1.0).powi(2) / (kf * 8.0 * x);
            if next.abs() > term.abs() {
                break;
            }
            term = next;
            sum += term;
            if term.abs() < EPS * sum {
                break;
            }
        }
        sum / (2.0 * PI * x).sqrt()
    }
}
