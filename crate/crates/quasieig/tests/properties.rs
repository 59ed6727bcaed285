//! Property suites for the structural invariants: certified bounds contain
//! pointwise values, the degree calculus is additive over products, closed
//! forms agree with finite differences, the general checker agrees with the
//! closed-form range, and solver roundtrips/conservation hold on random
//! instances.

use proptest::prelude::*;
use quasieig::admissibility::{
    classify_i, full_report, thm4_range, IClass, LambdaSign, PolyPLaplaceSpec, ProblemSpec,
    Verdict,
};
use quasieig::parse::{format_scalar, parse_scalar};
use quasieig::radial::{flux_map, invert_flux, solve_ivp, ModelGeometry, SolverOptions};
use quasieig::scalar::ScalarFunc;

/// Strictly increasing exponents with positive coefficients.
fn msum_terms(max_len: usize) -> impl Strategy<Value = Vec<(f64, f64)>> {
    prop::collection::vec((0.1f64..10.0, -2.0f64..2.0), 1..=max_len).prop_map(|mut terms| {
        terms.sort_by(|a, b| a.1.partial_cmp(&b.1).unwrap());
        let mut out: Vec<(f64, f64)> = Vec::new();
        for (c, k) in terms {
            match out.last() {
                Some(&(_, last)) if k - last < 1e-3 => continue,
                _ => out.push((c, k)),
            }
        }
        out
    })
}

fn scalar_func() -> impl Strategy<Value = ScalarFunc> {
    prop_oneof![
        msum_terms(4).prop_map(|t| ScalarFunc::monomial_sum(t).unwrap()),
        (-1.5f64..1.5).prop_map(|b| ScalarFunc::exponential(b).unwrap()),
        (msum_terms(3), 0.2f64..3.0)
            .prop_map(|(t, e)| ScalarFunc::power_of_monomial_sum(t, e).unwrap()),
    ]
}

/// Exponent-union product of two positive monomial sums (test-side helper;
/// the library deliberately has no symbolic algebra).
fn msum_product(f: &[(f64, f64)], g: &[(f64, f64)]) -> Vec<(f64, f64)> {
    let mut prods: Vec<(f64, f64)> = Vec::new();
    for &(cf, kf) in f {
        for &(cg, kg) in g {
            prods.push((cf * cg, kf + kg));
        }
    }
    prods.sort_by(|a, b| a.1.partial_cmp(&b.1).unwrap());
    let mut out: Vec<(f64, f64)> = Vec::new();
    for (c, k) in prods {
        match out.last_mut() {
            Some(last) if last.1 == k => last.0 += c,
            _ => out.push((c, k)),
        }
    }
    out
}

proptest! {
    /// degree(f, t) lies inside degree_bounds(f, 1) whenever certified.
    #[test]
    fn degree_within_certified_bounds(f in scalar_func(), exp in -6.0f64..6.0) {
        let t = 10f64.powf(exp);
        let bounds = f.degree_bounds(1).unwrap();
        prop_assume!(bounds.certified);
        let d = f.degree(t).unwrap();
        let slack = 1e-10 * (1.0 + d.abs());
        prop_assert!(d >= bounds.inf - slack && d <= bounds.sup + slack,
            "degree {d} outside [{}, {}] at t = {t}", bounds.inf, bounds.sup);
    }

    /// Second degrees honor their bounds too, certified or sampled-on-grid.
    #[test]
    fn second_degree_within_certified_bounds(f in scalar_func(), exp in -6.0f64..6.0) {
        let t = 10f64.powf(exp);
        let bounds = f.degree_bounds(2).unwrap();
        prop_assume!(bounds.certified);
        let d = f.kth_degree(2, t).unwrap();
        let slack = 1e-9 * (1.0 + d.abs());
        prop_assert!(d >= bounds.inf - slack && d <= bounds.sup + slack,
            "second degree {d} outside [{}, {}] at t = {t}", bounds.inf, bounds.sup);
    }

    /// Additivity over products: δ_{fg} = δ_f + δ_g where the product stays
    /// in the family (exponent-union of monomial sums).
    #[test]
    fn degree_additive_over_products(
        f in msum_terms(3),
        g in msum_terms(3),
        exp in -4.0f64..4.0,
    ) {
        let t = 10f64.powf(exp);
        let ff = ScalarFunc::monomial_sum(f.clone()).unwrap();
        let gg = ScalarFunc::monomial_sum(g.clone()).unwrap();
        let prod = ScalarFunc::monomial_sum(msum_product(&f, &g)).unwrap();
        let lhs = prod.degree(t).unwrap();
        let rhs = ff.degree(t).unwrap() + gg.degree(t).unwrap();
        prop_assert!((lhs - rhs).abs() <= 1e-9 * (1.0 + rhs.abs()),
            "product degree {lhs} != {rhs} at t = {t}");
    }

    /// Closed-form derivatives against central differences, rel 1e−6.
    #[test]
    fn derivative_matches_finite_difference(f in scalar_func(), exp in -2.0f64..2.0) {
        let t = 10f64.powf(exp);
        let h = t * 1e-6;
        let fd = (f.eval(t + h).unwrap() - f.eval(t - h).unwrap()) / (2.0 * h);
        let cf = f.eval_derivative(t).unwrap();
        let scale = cf.abs().max(f.eval(t).unwrap().abs() / t).max(1e-10);
        prop_assert!((fd - cf).abs() <= 1e-6 * scale, "fd {fd} vs closed form {cf} at t = {t}");
    }

    /// Rational-quotient bounds as a property over random sums and points.
    #[test]
    fn quotient_and_derivative_bounds(terms in msum_terms(5), exp in -5.0f64..5.0) {
        let t = 10f64.powf(exp);
        let r1 = terms[0].1;
        let rm = terms[terms.len() - 1].1;
        let f = ScalarFunc::monomial_sum(terms).unwrap();
        let quotient = f.degree(t).unwrap() / 2.0;
        prop_assert!(quotient >= r1 - 1e-12 && quotient <= rm + 1e-12);
        let tfp = f.degree_derivative(t).unwrap() / 2.0;
        let cap = (rm - r1) * (rm - r1) / 2.0;
        prop_assert!(tfp >= -1e-12 && tfp <= cap + 1e-10 * cap.max(1.0));
    }

    /// λ = 0 always classifies I as everything, making C3 vacuous.
    #[test]
    fn lambda_zero_is_vacuous(
        p in 1.1f64..3.5,
        q in 0.2f64..2.5,
        r in 0.1f64..6.0,
        n in 2u32..6,
    ) {
        let spec = ProblemSpec::poly_p_laplace(n, 0.0, 0.0, p, &[(1.0, q)], r).unwrap();
        let (class, _) = classify_i(&spec).unwrap();
        prop_assert_eq!(class, IClass::All);
        let report = full_report(&spec).unwrap();
        prop_assert!(report.c3.vacuous);
    }

    /// On single-power instances the general checker and the closed-form
    /// range agree exactly (no mixed-I cases exist there), and for λ ≥ 0
    /// admissibility is monotone downward in r.
    #[test]
    fn checker_agrees_with_closed_form(
        p in 1.1f64..3.5,
        q in 0.2f64..2.5,
        r in 0.05f64..8.0,
        n in 2u32..6,
        lambda_positive in any::<bool>(),
    ) {
        let lambda = if lambda_positive { 1.0 } else { -1.0 };
        let spec = ProblemSpec::poly_p_laplace(n, 0.0, lambda, p, &[(1.0, q)], r).unwrap();
        let report = full_report(&spec).unwrap();
        prop_assert!(report.defects.is_empty(), "defects: {:?}", report.defects);

        let sign = if lambda > 0.0 { LambdaSign::NonNeg } else { LambdaSign::NonPos };
        let poly = PolyPLaplaceSpec::new(p, vec![(1.0, q)], r, sign, n).unwrap();
        let range = thm4_range(&poly).unwrap();
        prop_assert_eq!(report.overall == Verdict::Holds, range.admissible);

        if lambda > 0.0 && range.admissible {
            // every smaller r stays admissible
            let r2 = r * 0.5;
            let spec2 = ProblemSpec::poly_p_laplace(n, 0.0, lambda, p, &[(1.0, q)], r2).unwrap();
            prop_assert_eq!(full_report(&spec2).unwrap().overall, Verdict::Holds);
        }
    }

    /// The canonical text form roundtrips: format then parse reproduces the
    /// function (bitwise-equal structure).
    #[test]
    fn text_form_roundtrips(f in scalar_func()) {
        let text = format_scalar(&f);
        let back = parse_scalar(&text).unwrap();
        prop_assert_eq!(&back, &f, "text form: {}", text);
    }

    /// Multi-term polynomial instances: the general checker never
    /// contradicts the closed-form range (it may be strictly more
    /// conservative, answering unknown in the mixed-sign region).
    #[test]
    fn multi_term_checker_never_contradicts(
        p in 1.3f64..3.0,
        q1 in 0.5f64..1.5,
        dq in 0.01f64..0.5,
        r in 0.1f64..6.0,
        lambda_positive in any::<bool>(),
        n in 2u32..5,
    ) {
        let lambda = if lambda_positive { 1.0 } else { -1.0 };
        let qm = q1 + dq;
        let spec = ProblemSpec::poly_p_laplace(
            n, 0.0, lambda, p, &[(1.0, q1), (1.0, qm)], r,
        ).unwrap();
        let report = full_report(&spec).unwrap();
        prop_assert!(report.defects.is_empty(), "defects: {:?}", report.defects);
        // holds must always land strictly inside the closed-form range
        if report.overall == Verdict::Holds {
            let sign = if lambda > 0.0 { LambdaSign::NonNeg } else { LambdaSign::NonPos };
            let poly = PolyPLaplaceSpec::new(p, vec![(1.0, q1), (1.0, qm)], r, sign, n).unwrap();
            if let Ok(range) = thm4_range(&poly) {
                prop_assert!(range.admissible,
                    "checker holds but closed form rejects (p={p}, q=[{q1},{qm}], r={r}, n={n})");
            }
        }
    }

    /// invert_flux is the exact inverse of flux_map over random specs and
    /// points, including the sign convention.
    #[test]
    fn flux_inversion_roundtrip(
        p in 1.2f64..3.5,
        q in 0.3f64..2.5,
        s_exp in -3.0f64..3.0,
        v_exp in -3.0f64..3.0,
        v_neg in any::<bool>(),
    ) {
        let spec = ProblemSpec::poly_p_laplace(3, 0.0, 1.0, p, &[(1.0, q)], 1.0).unwrap();
        let s = 10f64.powf(s_exp);
        let v = if v_neg { -10f64.powf(v_exp) } else { 10f64.powf(v_exp) };
        let m = flux_map(&spec, s, v).unwrap();
        let back = invert_flux(&spec, s, m).unwrap();
        prop_assert!((back - v).abs() <= 1e-10 * v.abs(), "v = {v}, back = {back}");
        prop_assert_eq!(invert_flux(&spec, s, -m).unwrap(), -back);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    /// Solved instances conserve flux (quadrature-consistent residual) and
    /// keep u positive when they complete.
    #[test]
    fn solves_conserve_flux_and_positivity(
        p in prop_oneof![Just(1.5f64), Just(2.0), Just(3.0)],
        q in prop_oneof![Just(0.5f64), Just(1.0), Just(2.0)],
        lambda in prop_oneof![Just(0.5f64), Just(0.0), Just(-0.5)],
        kappa in prop_oneof![Just(0.0f64), Just(0.5)],
    ) {
        let n = 3;
        let spec = ProblemSpec::poly_p_laplace(
            n,
            (n - 1) as f64 * kappa,
            lambda,
            p,
            &[(1.0, q)],
            1.0,
        ).unwrap();
        let geom = ModelGeometry::new(n, kappa).unwrap();
        let sol = solve_ivp(&geom, &spec, 1.0, 2.0, &SolverOptions::default()).unwrap();
        prop_assert!(sol.min_u() > 0.0);
        let resid = sol.flux_residual().unwrap();
        prop_assert!(resid < 1e-6, "flux residual {resid}");
        // grid strictly increasing
        for w in sol.grid.windows(2) {
            prop_assert!(w[1] > w[0]);
        }
    }
}
