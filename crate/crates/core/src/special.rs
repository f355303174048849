//! Special functions for oscillatory integrals along the e^{-i t^2} ray.
//!
//! Everything here reduces to the complementary error function evaluated on
//! the ray arg z = pi/4, where the argument squared is purely imaginary.
//! That case is numerically friendly: the Maclaurin series suffers no
//! exponential cancellation (|e^{-z^2}| = 1 on the ray), and for large
//! arguments the Faddeeva continued fraction converges quickly.

use num_complex::Complex64;
use std::f64::consts::{FRAC_1_SQRT_2, PI};

const I: Complex64 = Complex64::new(0.0, 1.0);

/// e^{i pi/4} = (1 + i)/sqrt(2)
const RAY: Complex64 = Complex64::new(FRAC_1_SQRT_2, FRAC_1_SQRT_2);

/// Largest `x` handled by the Maclaurin series; beyond it the continued
/// fraction is both faster and more accurate.
const SERIES_CUTOFF: f64 = 3.0;

/// erf(e^{i pi/4} x) for x >= 0.
pub fn erf_ray(x: f64) -> Complex64 {
    debug_assert!(x >= 0.0);
    if x <= SERIES_CUTOFF {
        erf_ray_series(x)
    } else {
        Complex64::new(1.0, 0.0) - erfc_ray_cf(x)
    }
}

/// erfc(e^{i pi/4} x) for x >= 0.
pub fn erfc_ray(x: f64) -> Complex64 {
    debug_assert!(x >= 0.0);
    if x <= SERIES_CUTOFF {
        Complex64::new(1.0, 0.0) - erf_ray_series(x)
    } else {
        erfc_ray_cf(x)
    }
}

/// Maclaurin series: erf(z) = (2/sqrt(pi)) z sum_n (-z^2)^n / (n! (2n+1))
/// with z = e^{i pi/4} x, so -z^2 = -i x^2.
fn erf_ray_series(x: f64) -> Complex64 {
    let mz2 = Complex64::new(0.0, -x * x);
    let mut power = Complex64::new(1.0, 0.0); // (-z^2)^n / n!
    let mut sum = Complex64::new(1.0, 0.0); // n = 0 term of the inner sum
    for n in 1..=130 {
        power *= mz2 / n as f64;
        let term = power / (2 * n + 1) as f64;
        sum += term;
        if term.norm() < 1e-17 * sum.norm().max(1e-300) {
            break;
        }
    }
    2.0 / PI.sqrt() * RAY * x * sum
}

/// Continued-fraction branch, x > 0 and reasonably large.
///
/// Uses erfc(z) = e^{-z^2} w(iz) with the Faddeeva J-fraction
/// w(y) = (i/sqrt(pi)) / (y - (1/2)/(y - 1/(y - (3/2)/(y - ...)))),
/// convergent for Im y > 0. Here z = e^{i pi/4} x gives y = e^{i 3pi/4} x
/// (upper half-plane) and |e^{-z^2}| = 1, so no scaling issues arise.
fn erfc_ray_cf(x: f64) -> Complex64 {
    let y = Complex64::new(-FRAC_1_SQRT_2 * x, FRAC_1_SQRT_2 * x);
    let mut tail = y;
    for k in (1..=80).rev() {
        tail = y - (k as f64 / 2.0) / tail;
    }
    let w = I / PI.sqrt() / tail;
    Complex64::new(0.0, -x * x).exp() * w
}

/// Oscillatory tail integral of e^{-i t^2} dt from `x` to infinity, x >= 0.
pub fn osc_tail(x: f64) -> Complex64 {
    debug_assert!(x >= 0.0);
    0.5 * PI.sqrt() * RAY.conj() * erfc_ray(x)
}

/// Oscillatory segment integral of e^{-i t^2} dt over `[a, b]`, 0 <= a <= b.
///
/// Small lower endpoints use the erf form (both values O(a), O(b), so the
/// subtraction is benign); larger ones use the tail form, whose values
/// already carry the decayed magnitude and subtract cleanly.
pub fn osc_seg(a: f64, b: f64) -> Complex64 {
    debug_assert!(0.0 <= a && a <= b);
    if a < 1.5 {
        0.5 * PI.sqrt() * RAY.conj() * (erf_ray(b) - erf_ray(a))
    } else {
        osc_tail(a) - osc_tail(b)
    }
}

/// Moments of the half-power weights against a phase factor:
///
/// returns `(E0, E1)` with
/// E0 = integral of tau^{-1/2} e^{-i nu tau} d tau over [a, b],
/// E1 = integral of tau^{+1/2} e^{-i nu tau} d tau over [a, b],
/// for 0 <= a < b and any real `nu`.
pub fn half_power_moments(a: f64, b: f64, nu: f64) -> (Complex64, Complex64) {
    debug_assert!(0.0 <= a && a < b);
    if nu == 0.0 {
        let e0 = Complex64::new(2.0 * (b.sqrt() - a.sqrt()), 0.0);
        let e1 = Complex64::new(2.0 / 3.0 * (b * b.sqrt() - a * a.sqrt()), 0.0);
        return (e0, e1);
    }
    if nu < 0.0 {
        let (e0, e1) = half_power_moments(a, b, -nu);
        return (e0.conj(), e1.conj());
    }
    if nu * b < 1e-3 {
        // short Taylor expansion of the phase; the closed forms below would
        // divide near-cancelling differences by nu.
        let minu = Complex64::new(0.0, -nu);
        let mut power = Complex64::new(1.0, 0.0); // (-i nu)^n / n!
        let mut e0 = Complex64::new(0.0, 0.0);
        let mut e1 = Complex64::new(0.0, 0.0);
        let mut pa = a.sqrt(); // a^{n + 1/2}
        let mut pb = b.sqrt();
        for n in 0..8 {
            e0 += power * ((pb - pa) / (n as f64 + 0.5));
            pa *= a;
            pb *= b;
            e1 += power * ((pb - pa) / (n as f64 + 1.5));
            power *= minu / (n + 1) as f64;
        }
        return (e0, e1);
    }
    let sa = (nu * a).sqrt();
    let sb = (nu * b).sqrt();
    let e0 = 2.0 / nu.sqrt() * osc_seg(sa, sb);
    let pa = a.sqrt() * Complex64::new(0.0, -nu * a).exp();
    let pb = b.sqrt() * Complex64::new(0.0, -nu * b).exp();
    let e1 = (pb - pa) / Complex64::new(0.0, -nu) + e0 / Complex64::new(0.0, 2.0 * nu);
    (e0, e1)
}
