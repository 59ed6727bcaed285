//! Closed-form verification examples for the measurement layer: asymptotic
//! gradient ratios on the hyperbolic model, the sinh growth signature in the
//! Harnack exponent, and exponent boundedness across R-sweeps.

mod common;

use common::ln_coth;
use quasieig::admissibility::ProblemSpec;
use quasieig::radial::{solve_annulus, solve_ivp, ModelGeometry, SolverOptions};
use quasieig::verifier::{gradient_estimate_check, harnack_check, harnack_interval};

fn laplacian(n: u32, kappa: f64, lambda: f64) -> ProblemSpec {
    ProblemSpec::poly_p_laplace(n, (n - 1) as f64 * kappa, lambda, 2.0, &[(1.0, 1.0)], 1.0)
        .unwrap()
}

/// On the hyperbolic plane (n=2, κ=1) the positive harmonic
/// u(r) = ln coth(r/2) has |u'|/u → 1 far out: with the ball center pushed
/// outward at fixed R, sup_ratio approaches n−1 = 1 and fitted C
/// stabilizes.
#[test]
fn hyperbolic_ratio_approaches_one() {
    let spec = laplacian(2, 1.0, 0.0);
    let geom = ModelGeometry::new(2, 1.0).unwrap();
    let radius = 1.0;
    let mut last = f64::INFINITY;
    for &center in &[6.0, 10.0, 14.0] {
        let (r1, r2) = (center - 2.0 * radius, center + 2.0 * radius);
        let boundary = (ln_coth(r1 / 2.0), ln_coth(r2 / 2.0));
        let opts = SolverOptions { abs_tol: 0.0, rel_tol: 1e-10, ..Default::default() };
        let sol = solve_annulus(&geom, &spec, r1, r2, boundary, &opts).unwrap();
        let est = gradient_estimate_check(&sol, center, radius).unwrap();
        let gap = (est.sup_ratio - 1.0).abs();
        assert!(gap < last, "ratio must approach 1 monotonically: {gap} !< {last}");
        last = gap;
    }
    assert!(last < 2e-4, "asymptotic gap {last}");
}

/// u = sinh(r)/r (λ = −1 Laplacian, K = 0): the Harnack exponent over
/// B(o, R) is log(sinh(R)/R), which grows linearly in R — the expected
/// signature of a Liouville-violating (unbounded) profile.
#[test]
fn sinh_harnack_exponent_grows_linearly() {
    let spec = laplacian(3, 0.0, -1.0);
    let geom = ModelGeometry::new(3, 0.0).unwrap();
    let opts = SolverOptions { checkpoints: vec![4.0, 8.0], ..Default::default() };
    let sol = solve_ivp(&geom, &spec, 1.0, 8.0, &opts).unwrap();
    let e4 = harnack_check(&sol, 4.0).unwrap().exponent;
    let e8 = harnack_check(&sol, 8.0).unwrap().exponent;
    let want4 = (4.0_f64.sinh() / 4.0).ln();
    let want8 = (8.0_f64.sinh() / 8.0).ln();
    assert!((e4 - want4).abs() < 1e-6 * want4, "exponent(4) = {e4}, want {want4}");
    assert!((e8 - want8).abs() < 1e-6 * want8, "exponent(8) = {e8}, want {want8}");
    // linear growth: exponent ≈ R − ln(2R), slope near 1
    let slope = (e8 - e4) / 4.0;
    assert!(slope > 0.5 && slope < 1.1, "slope {slope}");
}

/// For admissible λ = 0 families the Harnack exponent stays uniformly
/// bounded across an R-doubling sweep (flat 1/r and hyperbolic ln coth).
#[test]
fn harnack_exponent_bounded_over_r_sweep() {
    let radii = [1.0, 2.0, 4.0, 8.0, 16.0, 32.0, 64.0];

    let spec = laplacian(3, 0.0, 0.0);
    let geom = ModelGeometry::new(3, 0.0).unwrap();
    for &radius in &radii {
        let (r1, r2) = (2.0 * radius, 6.0 * radius);
        let opts = SolverOptions { max_step: Some((r2 - r1) / 256.0), ..Default::default() };
        let sol = solve_annulus(&geom, &spec, r1, r2, (1.0 / r1, 1.0 / r2), &opts).unwrap();
        let c = 4.0 * radius;
        let h = harnack_interval(&sol, c - radius, c + radius, radius).unwrap();
        // exact profile: ratio = (c+R)/(c−R) = 5/3 for every R
        assert!((h.ratio - 5.0 / 3.0).abs() < 1e-8, "ratio {}", h.ratio);
        assert!(h.exponent <= 1.0);
    }

    let kappa = 0.25;
    let spec = laplacian(2, kappa, 0.0);
    let geom = ModelGeometry::new(2, kappa).unwrap();
    for &radius in &radii {
        let (r1, r2) = (2.0 * radius, 6.0 * radius);
        let boundary =
            (ln_coth(kappa.sqrt() * r1 / 2.0), ln_coth(kappa.sqrt() * r2 / 2.0));
        let opts = SolverOptions { abs_tol: 0.0, rel_tol: 1e-9, ..Default::default() };
        let sol = solve_annulus(&geom, &spec, r1, r2, boundary, &opts).unwrap();
        let c = 4.0 * radius;
        let h = harnack_interval(&sol, c - radius, c + radius, radius).unwrap();
        // decay e^{−√κ r} over a 2R window: ln ratio ≈ 2√κ R = √K·2R, so the
        // exponent approaches 2 from below and never leaves [0, 2.1]
        assert!(h.exponent > 0.0 && h.exponent < 2.1, "exponent {}", h.exponent);
    }
}

/// Derived accessors: f = log u and Ĥ = (u'/u)² line up with the stored
/// profile.
#[test]
fn log_and_gradient_accessors() {
    let spec = laplacian(3, 0.0, 1.0);
    let geom = ModelGeometry::new(3, 0.0).unwrap();
    let sol = solve_ivp(&geom, &spec, 2.0, 1.5, &SolverOptions::default()).unwrap();
    for j in [0, sol.grid.len() / 2, sol.grid.len() - 1] {
        assert_eq!(sol.log_u(j), sol.u[j].ln());
        let ratio = sol.du[j] / sol.u[j];
        assert_eq!(sol.grad_log_sq(j), ratio * ratio);
    }
}
