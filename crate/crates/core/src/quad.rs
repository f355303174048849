//! Quadrature helpers for complex-valued integrands on finite intervals.
//!
//! Two entry points are provided. [`adaptive`] is a globally adaptive
//! Simpson rule with Richardson acceleration, which concentrates effort
//! where the integrand actually varies and is the workhorse for smooth but
//! locally spiky integrands. [`simpson_auto`] is a composite Simpson rule
//! that doubles a uniform panel count until successive refinements agree,
//! which is more robust for oscillatory integrands whose structure is
//! spread over the whole interval (where local error estimates can be
//! fooled by fortuitous cancellation on a coarse grid).

use num_complex::Complex64;

/// Globally adaptive Simpson quadrature of `f` over `[a, b]`.
///
/// Recursion splits any panel whose two-half Simpson estimate disagrees
/// with the one-panel estimate by more than the local error budget; the
/// accepted value includes the standard `(s2 - s1)/15` Richardson
/// correction. `tol` is an absolute tolerance on the whole integral.
pub fn adaptive(f: &dyn Fn(f64) -> Complex64, a: f64, b: f64, tol: f64) -> Complex64 {
    let fa = f(a);
    let fb = f(b);
    let m = 0.5 * (a + b);
    let fm = f(m);
    let whole = simpson_panel(a, b, fa, fm, fb);
    adaptive_step(f, a, b, fa, fm, fb, whole, tol, 50)
}

fn simpson_panel(a: f64, b: f64, fa: Complex64, fm: Complex64, fb: Complex64) -> Complex64 {
    (b - a) / 6.0 * (fa + 4.0 * fm + fb)
}

#[allow(clippy::too_many_arguments)]
fn adaptive_step(
    f: &dyn Fn(f64) -> Complex64,
    a: f64,
    b: f64,
    fa: Complex64,
    fm: Complex64,
    fb: Complex64,
    whole: Complex64,
    tol: f64,
    depth: u32,
) -> Complex64 {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = simpson_panel(a, m, fa, flm, fm);
    let right = simpson_panel(m, b, fm, frm, fb);
    let delta = left + right - whole;
    if depth == 0 || delta.norm() <= 15.0 * tol {
        return left + right + delta / 15.0;
    }
    adaptive_step(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
        + adaptive_step(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
}

/// Composite Simpson quadrature with automatic uniform refinement.
///
/// Starts from `n0` panels (rounded up to an even count) and doubles the
/// panel count until two successive estimates differ by less than `tol`
/// in absolute value, reusing previously evaluated nodes at each doubling.
pub fn simpson_auto(f: &dyn Fn(f64) -> Complex64, a: f64, b: f64, n0: usize, tol: f64) -> Complex64 {
    let mut n = n0.max(2);
    if n % 2 == 1 {
        n += 1;
    }
    // ends + interior sums, maintained incrementally across doublings
    let ends = f(a) + f(b);
    let h = (b - a) / n as f64;
    let mut odd = Complex64::new(0.0, 0.0); // nodes with odd index (weight 4)
    let mut even = Complex64::new(0.0, 0.0); // interior nodes with even index (weight 2)
    for i in 1..n {
        let v = f(a + i as f64 * h);
        if i % 2 == 1 {
            odd += v;
        } else {
            even += v;
        }
    }
    let mut h = h;
    let mut estimate = h / 3.0 * (ends + 4.0 * odd + 2.0 * even);
    for _ in 0..24 {
        // double: every current node becomes even-indexed; new midpoints are odd
        even += odd;
        odd = Complex64::new(0.0, 0.0);
        n *= 2;
        h *= 0.5;
        for i in (1..n).step_by(2) {
            odd += f(a + i as f64 * h);
        }
        let refined = h / 3.0 * (ends + 4.0 * odd + 2.0 * even);
        let diff = (refined - estimate).norm();
        estimate = refined;
        if diff < tol {
            break;
        }
    }
    estimate
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn adaptive_matches_exact_exponential() {
        // integral of e^{ix} over [0, pi/2] = sin + i(1-cos) at pi/2 = 1 + i
        let v = adaptive(&|x| Complex64::new(0.0, x).exp(), 0.0, std::f64::consts::FRAC_PI_2, 1e-12);
        assert!((v - Complex64::new(1.0, 1.0)).norm() < 1e-11);
    }

    #[test]
    fn adaptive_handles_sharp_feature() {
        // narrow Lorentzian: integral of 1/((x-0.3)^2 + 1e-6) over [0,1]
        // = (atan(0.7/1e-3) + atan(0.3/1e-3)) / 1e-3
        let w = 1e-3_f64;
        let exact = ((0.7 / w).atan() + (0.3 / w).atan()) / w;
        let v = adaptive(
            &|x| Complex64::new(1.0 / ((x - 0.3) * (x - 0.3) + w * w), 0.0),
            0.0,
            1.0,
            1e-9 * exact,
        );
        assert!((v.re - exact).abs() < 1e-6 * exact);
        assert!(v.im.abs() < 1e-12 * exact);
    }

    #[test]
    fn simpson_auto_oscillatory() {
        // integral of e^{-i 40 x^2} x over [0, 2]: substitute u = x^2
        // => (1/2) integral e^{-i40u} du over [0,4] = (1 - e^{-160i}) / (80 i)
        let exact = (Complex64::new(1.0, 0.0) - Complex64::new(0.0, -160.0).exp())
            / Complex64::new(0.0, 80.0);
        let v = simpson_auto(
            &|x| Complex64::new(0.0, -40.0 * x * x).exp() * x,
            0.0,
            2.0,
            64,
            1e-12,
        );
        assert!((v - exact).norm() < 1e-10);
    }
}
