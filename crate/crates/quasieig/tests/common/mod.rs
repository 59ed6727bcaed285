#![allow(dead_code)] // each test target compiles its own subset of these

//! Independent oracles shared by the integration suites. Everything here is
//! deliberately separate from the library's own numerics: series sums,
//! plain composite quadrature, and bisection only.

/// Bessel J0 by its power series: Σ (−1)^k (x²/4)^k / (k!)², summed to
/// machine precision. Accurate for the |x| ≤ 4 range used here.
pub fn bessel_j0(x: f64) -> f64 {
    let q = x * x / 4.0;
    let mut term = 1.0;
    let mut sum = 1.0;
    for k in 1..60 {
        term *= -q / ((k * k) as f64);
        sum += term;
        if term.abs() < 1e-18 {
            break;
        }
    }
    sum
}

/// First positive zero of J0 by bisection on [2, 3].
pub fn bessel_j0_first_zero() -> f64 {
    let (mut lo, mut hi) = (2.0_f64, 3.0_f64);
    assert!(bessel_j0(lo) > 0.0 && bessel_j0(hi) < 0.0);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if bessel_j0(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Composite Simpson quadrature with 2·halves panels.
pub fn simpson<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, halves: usize) -> f64 {
    let n = 2 * halves;
    let h = (b - a) / n as f64;
    let mut sum = f(a) + f(b);
    for i in 1..n {
        sum += f(a + h * i as f64) * if i % 2 == 1 { 4.0 } else { 2.0 };
    }
    sum * h / 3.0
}

/// Bisection for a sign change of `f` on [lo, hi].
pub fn bisect<F: Fn(f64) -> f64>(f: F, mut lo: f64, mut hi: f64) -> f64 {
    let f_lo = f(lo);
    assert!(
        (f_lo > 0.0) != (f(hi) > 0.0),
        "bisection bracket must straddle: f({lo}), f({hi})"
    );
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if (f(mid) > 0.0) == (f_lo > 0.0) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// `ln(coth(x))` without cancellation for large x, via
/// `ln1p(q) − ln1p(−q)` with `q = e^{−2x}`. Stays accurate down to the
/// smallest normal doubles.
pub fn ln_coth(x: f64) -> f64 {
    let q = (-2.0 * x).exp();
    q.ln_1p() - (-q).ln_1p()
}
