//! Measurement harness for the quantitative consequences of admissibility:
//! the gradient-ratio estimate, the Harnack oscillation bound, and the
//! Liouville dichotomy for λ ≠ 0 on flat models.
//!
//! Geodesic balls about off-center points are treated as radius intervals
//! `[c − R, c + R]`; this is exact for radial functions on model spaces. The
//! estimate's hypothesis asks for positivity on the double ball, so every
//! measurement enforces the `2R` margin, not `R`, when validating that a
//! ball fits inside a solved domain.
//!
//! The estimate's constant is not explicit, so nothing here asserts an
//! absolute bound; the measured quantity is `fitted_C = sup(|u'|/u) · R /
//! (1 + √K R)`, whose stability across an R-sweep is the operational form
//! of "the constant depends only on the structure, not the solution".

use crate::admissibility::{full_report, ProblemSpec, Verdict};
use crate::parse::format_scalar;
use crate::radial::{
    solve_ivp, ModelGeometry, RadialSolution, SolveStatus, SolverError, SolverOptions,
};
use std::fmt;

#[derive(Debug, Clone, PartialEq)]
pub enum VerifyError {
    /// The double ball [c − 2R, c + 2R] does not fit in the solved domain.
    BallNotContained { need_lo: f64, need_hi: f64, have_lo: f64, have_hi: f64 },
    EmptyRegion { lo: f64, hi: f64 },
    Solver(SolverError),
    InvalidProbe(String),
}

impl fmt::Display for VerifyError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            VerifyError::BallNotContained { need_lo, need_hi, have_lo, have_hi } => write!(
                f,
                "ball with 2R margin needs [{need_lo}, {need_hi}] but the solution covers [{have_lo}, {have_hi}]"
            ),
            VerifyError::EmptyRegion { lo, hi } => {
                write!(f, "measurement region [{lo}, {hi}] is empty")
            }
            VerifyError::Solver(e) => write!(f, "{e}"),
            VerifyError::InvalidProbe(msg) => write!(f, "{msg}"),
        }
    }
}

impl std::error::Error for VerifyError {}

impl From<SolverError> for VerifyError {
    fn from(e: SolverError) -> Self {
        VerifyError::Solver(e)
    }
}

/// Compact identifiers used in reports and CSV rows.
pub fn spec_id(spec: &ProblemSpec) -> String {
    format!(
        "n={};lambda={};phi={};a={};psi={}",
        spec.n,
        spec.lambda,
        format_scalar(&spec.phi),
        format_scalar(&spec.a),
        format_scalar(&spec.psi)
    )
}

pub fn geometry_id(geometry: &ModelGeometry) -> String {
    format!("n={};kappa={}", geometry.n, geometry.kappa)
}

/// Measured gradient-ratio statistics against the bound shape
/// `(1 + √K R)/R` on one ball.
#[derive(Debug, Clone, PartialEq)]
pub struct EstimateResult {
    pub spec_id: String,
    pub geometry_id: String,
    pub center: f64,
    pub radius: f64,
    pub sup_ratio: f64,
    pub bound_shape: f64,
    pub fitted_c: f64,
    pub status: SolveStatus,
}

/// Sup of `|u'|/u` over the radius interval of the ball `B(center, radius)`,
/// with golden-section refinement around the best grid node, packaged
/// against the theoretical bound shape. The solution must cover the double
/// ball `[center − 2R, center + 2R]` (clipped at the origin).
pub fn gradient_estimate_check(
    solution: &RadialSolution,
    center: f64,
    radius: f64,
) -> Result<EstimateResult, VerifyError> {
    if !(radius > 0.0) {
        return Err(VerifyError::InvalidProbe(format!("ball radius must be positive, got {radius}")));
    }
    let dom_lo = solution.r_min();
    let dom_hi = solution.r_max();
    let need_lo = (center - 2.0 * radius).max(0.0);
    let need_hi = center + 2.0 * radius;
    // IVP solutions start their grid at the exact center 0.
    let effective_lo = if dom_lo == 0.0 { 0.0 } else { dom_lo };
    if need_lo < effective_lo - 1e-12 * effective_lo.abs().max(1.0) || need_hi > dom_hi * (1.0 + 1e-12) {
        return Err(VerifyError::BallNotContained {
            need_lo,
            need_hi,
            have_lo: dom_lo,
            have_hi: dom_hi,
        });
    }

    let lo = (center - radius).max(dom_lo);
    let hi = (center + radius).min(dom_hi);
    let sup_ratio = sup_grad_ratio(solution, lo, hi)?;

    let k = solution.geometry.ricci_lower_bound();
    let bound_shape = (1.0 + k.sqrt() * radius) / radius;
    Ok(EstimateResult {
        spec_id: spec_id(&solution.spec),
        geometry_id: geometry_id(&solution.geometry),
        center,
        radius,
        sup_ratio,
        bound_shape,
        fitted_c: sup_ratio / bound_shape,
        status: solution.status,
    })
}

fn ratio_at(solution: &RadialSolution, r: f64) -> Result<f64, VerifyError> {
    if r == 0.0 {
        // regular center: u'(0) = 0
        return Ok(0.0);
    }
    let (u, du, _) = solution.sample(r)?;
    Ok(du.abs() / u)
}

/// Max of `|u'|/u` over `[lo, hi]`: grid nodes, both endpoints, then a
/// golden-section polish inside the bracketing cells of the best candidate.
fn sup_grad_ratio(solution: &RadialSolution, lo: f64, hi: f64) -> Result<f64, VerifyError> {
    if !(lo <= hi) {
        return Err(VerifyError::EmptyRegion { lo, hi });
    }
    let mut best_r = lo;
    let mut best = ratio_at(solution, lo)?;
    let hi_val = ratio_at(solution, hi)?;
    if hi_val > best {
        best = hi_val;
        best_r = hi;
    }
    for (j, &r) in solution.grid.iter().enumerate() {
        if r > lo && r < hi {
            let v = solution.du[j].abs() / solution.u[j];
            if v > best {
                best = v;
                best_r = r;
            }
        }
    }
    // refine within one grid cell on each side of the best point
    let cell = neighbor_span(solution, best_r);
    let (a, b) = (cell.0.max(lo), cell.1.min(hi));
    let refined = golden_max(|r| ratio_at(solution, r), a, b)?;
    Ok(best.max(refined))
}

fn neighbor_span(solution: &RadialSolution, r: f64) -> (f64, f64) {
    let grid = &solution.grid;
    let i = match grid.binary_search_by(|g| g.partial_cmp(&r).unwrap()) {
        Ok(i) => i,
        Err(i) => i.min(grid.len() - 1),
    };
    let lo = if i == 0 { grid[0] } else { grid[i - 1] };
    let hi = if i + 1 < grid.len() { grid[i + 1] } else { grid[grid.len() - 1] };
    (lo, hi)
}

fn golden_max<F: Fn(f64) -> Result<f64, VerifyError>>(
    f: F,
    mut a: f64,
    mut b: f64,
) -> Result<f64, VerifyError> {
    const INV_PHI: f64 = 0.618_033_988_749_894_9;
    if !(b > a) {
        return f(a);
    }
    let mut x1 = b - INV_PHI * (b - a);
    let mut x2 = a + INV_PHI * (b - a);
    let mut f1 = f(x1)?;
    let mut f2 = f(x2)?;
    for _ in 0..80 {
        if f1 < f2 {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + INV_PHI * (b - a);
            f2 = f(x2)?;
        } else {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - INV_PHI * (b - a);
            f1 = f(x1)?;
        }
        if (b - a).abs() <= 1e-12 * (a.abs() + b.abs()).max(1e-12) {
            break;
        }
    }
    Ok(f1.max(f2))
}

/// Measured oscillation over a ball and its normalized exponent.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HarnackResult {
    pub ratio: f64,
    /// `log(ratio) / (1 + √K R)`; bounded uniformly over R-sweeps for
    /// admissible families.
    pub exponent: f64,
}

/// Oscillation over the ball `B(o, R)` intersected with the solved domain:
/// `sup u / inf u` and its exponent against `e^{C(1+√K R)}`.
pub fn harnack_check(solution: &RadialSolution, r_ball: f64) -> Result<HarnackResult, VerifyError> {
    let lo = solution.r_min();
    let hi = solution.r_max().min(r_ball);
    harnack_interval(solution, lo, hi, r_ball)
}

/// Oscillation over an explicit radius interval, normalized with the given
/// ball radius (used by the sweep for off-center balls).
pub fn harnack_interval(
    solution: &RadialSolution,
    lo: f64,
    hi: f64,
    r_ball: f64,
) -> Result<HarnackResult, VerifyError> {
    if !(hi >= lo) {
        return Err(VerifyError::EmptyRegion { lo, hi });
    }
    let mut min_u = f64::INFINITY;
    let mut max_u = f64::NEG_INFINITY;
    for r in [lo, hi] {
        let u = if r == 0.0 { solution.u[0] } else { solution.sample(r)?.0 };
        min_u = min_u.min(u);
        max_u = max_u.max(u);
    }
    for (j, &r) in solution.grid.iter().enumerate() {
        if r > lo && r < hi {
            min_u = min_u.min(solution.u[j]);
            max_u = max_u.max(solution.u[j]);
        }
    }
    let ratio = max_u / min_u;
    let k = solution.geometry.ricci_lower_bound();
    let exponent = ratio.ln() / (1.0 + k.sqrt() * r_ball);
    Ok(HarnackResult { ratio, exponent })
}

/// Outcome branch of the Liouville probe.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LiouvilleBranch {
    /// u reached the positivity floor: no global positive solution.
    HitZero { r: f64 },
    /// u crossed the growth bound: unbounded growth.
    Unbounded { r: f64 },
    /// Completed to R_max still growing (ratio ≥ 1 + 1e−6); inconclusive.
    StillGrowing { ratio: f64 },
    /// Completed, bounded and essentially constant — the counterexample
    /// signature that must never occur for admissible specs.
    BoundedPositive { ratio: f64 },
    /// λ = 0: the excluded trivial branch (constants solve the equation).
    TrivialConstant,
}

impl fmt::Display for LiouvilleBranch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LiouvilleBranch::HitZero { r } => write!(f, "hit_zero at r = {r}"),
            LiouvilleBranch::Unbounded { r } => write!(f, "unbounded (crossed bound at r = {r})"),
            LiouvilleBranch::StillGrowing { ratio } => {
                write!(f, "still growing at R_max (ratio {ratio})")
            }
            LiouvilleBranch::BoundedPositive { ratio } => {
                write!(f, "RED FLAG: bounded positive profile (ratio {ratio})")
            }
            LiouvilleBranch::TrivialConstant => write!(f, "trivial constant branch (lambda = 0)"),
        }
    }
}

#[derive(Debug, Clone)]
pub struct LiouvilleReport {
    pub branch: LiouvilleBranch,
    pub admissibility: Verdict,
    pub red_flag: bool,
    pub solution: Option<RadialSolution>,
}

#[derive(Debug, Clone)]
pub struct LiouvilleOptions {
    pub u0: f64,
    /// Growth multiple of u0 that counts as "exited every bound".
    pub growth_bound: f64,
    pub solver: SolverOptions,
}

impl Default for LiouvilleOptions {
    fn default() -> Self {
        LiouvilleOptions { u0: 1.0, growth_bound: 1e6, solver: SolverOptions::default() }
    }
}

/// Integrates the IVP outward on a flat model (κ = 0 is required: the
/// dichotomy is a non-negative-Ricci statement) and reports which branch of
/// the dichotomy occurred. The bounded-positive branch is a red flag.
pub fn liouville_probe(
    geometry: &ModelGeometry,
    spec: &ProblemSpec,
    r_max: f64,
    opts: &LiouvilleOptions,
) -> Result<LiouvilleReport, VerifyError> {
    if geometry.kappa != 0.0 {
        return Err(VerifyError::InvalidProbe(format!(
            "Liouville probe requires kappa = 0 (non-negative Ricci), got {}",
            geometry.kappa
        )));
    }
    let admissibility =
        full_report(spec).map(|r| r.overall).unwrap_or(Verdict::Unknown);
    if spec.lambda == 0.0 {
        return Ok(LiouvilleReport {
            branch: LiouvilleBranch::TrivialConstant,
            admissibility,
            red_flag: false,
            solution: None,
        });
    }
    let mut solver = opts.solver.clone();
    solver.blowup_factor = opts.growth_bound;
    let solution = solve_ivp(geometry, spec, opts.u0, r_max, &solver)?;
    let branch = match solution.status {
        SolveStatus::HitZero { r } => LiouvilleBranch::HitZero { r },
        SolveStatus::BlewUp { r } => LiouvilleBranch::Unbounded { r },
        SolveStatus::Completed => {
            let ratio = solution.max_u() / solution.min_u();
            if ratio < 1.0 + 1e-6 {
                LiouvilleBranch::BoundedPositive { ratio }
            } else {
                LiouvilleBranch::StillGrowing { ratio }
            }
        }
    };
    let red_flag = matches!(branch, LiouvilleBranch::BoundedPositive { .. });
    Ok(LiouvilleReport { branch, admissibility, red_flag, solution: Some(solution) })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::admissibility::ProblemSpec;
    use crate::radial::{solve_annulus, ModelGeometry, SolverOptions};

    fn laplacian_spec(n: u32, lambda: f64) -> ProblemSpec {
        ProblemSpec::poly_p_laplace(n, 0.0, lambda, 2.0, &[(1.0, 1.0)], 1.0).unwrap()
    }

    #[test]
    fn estimate_constant_solution_zero_ratio() {
        let spec = laplacian_spec(3, 0.0);
        let geom = ModelGeometry::new(3, 0.0).unwrap();
        let sol = solve_ivp(&geom, &spec, 1.0, 10.0, &SolverOptions::default()).unwrap();
        for &(c, r) in &[(0.0, 1.0), (3.0, 1.5), (5.0, 2.5)] {
            let est = gradient_estimate_check(&sol, c, r).unwrap();
            assert_eq!(est.sup_ratio, 0.0);
            assert_eq!(est.fitted_c, 0.0);
        }
    }

    #[test]
    fn estimate_one_over_r_exact_third() {
        // u = 1/r on an annulus; ball at center c with R = c/4:
        // sup |u'|/u = 1/(c−R), bound shape 1/R, fitted C = R/(c−R) = 1/3.
        let spec = laplacian_spec(3, 0.0);
        let geom = ModelGeometry::new(3, 0.0).unwrap();
        let c = 4.0;
        let r = 1.0;
        let opts = SolverOptions { max_step: Some(4.0 * r / 256.0), ..Default::default() };
        let sol = solve_annulus(&geom, &spec, c - 2.0 * r, c + 2.0 * r, (1.0 / (c - 2.0 * r), 1.0 / (c + 2.0 * r)), &opts)
            .unwrap();
        let est = gradient_estimate_check(&sol, c, r).unwrap();
        assert!(
            (est.fitted_c - 1.0 / 3.0).abs() < 1e-6,
            "fitted C = {}, want 1/3",
            est.fitted_c
        );
        assert!((est.sup_ratio - 1.0 / (c - r)).abs() < 1e-6);
    }

    #[test]
    fn estimate_requires_double_ball() {
        let spec = laplacian_spec(3, 0.0);
        let geom = ModelGeometry::new(3, 0.0).unwrap();
        let sol =
            solve_annulus(&geom, &spec, 1.0, 4.0, (1.0, 0.25), &SolverOptions::default()).unwrap();
        // ball [2.25, 3.75] fits, but its double [1.5, 4.5] pokes out
        assert!(matches!(
            gradient_estimate_check(&sol, 3.0, 0.75),
            Err(VerifyError::BallNotContained { .. })
        ));
        // shrink until the double ball fits
        let est = gradient_estimate_check(&sol, 2.5, 0.7).unwrap();
        assert!(est.sup_ratio > 0.0);
    }

    #[test]
    fn harnack_one_over_r() {
        let spec = laplacian_spec(3, 0.0);
        let geom = ModelGeometry::new(3, 0.0).unwrap();
        let sol = solve_annulus(&geom, &spec, 1.0, 3.0, (1.0, 1.0 / 3.0), &SolverOptions::default())
            .unwrap();
        let h = harnack_check(&sol, 3.0).unwrap();
        assert!((h.ratio - 3.0).abs() < 1e-8, "ratio = {}", h.ratio);
        assert!((h.exponent - 3.0_f64.ln()).abs() < 1e-8);
    }

    #[test]
    fn harnack_constant_is_one() {
        let spec = laplacian_spec(3, 0.0);
        let geom = ModelGeometry::new(3, 0.0).unwrap();
        let sol = solve_ivp(&geom, &spec, 2.0, 5.0, &SolverOptions::default()).unwrap();
        let h = harnack_check(&sol, 5.0).unwrap();
        assert_eq!(h.ratio, 1.0);
        assert_eq!(h.exponent, 0.0);
    }

    #[test]
    fn liouville_laplacian_branches() {
        let geom = ModelGeometry::new(3, 0.0).unwrap();
        // λ = +1: hits zero at π
        let report =
            liouville_probe(&geom, &laplacian_spec(3, 1.0), 10.0, &LiouvilleOptions::default())
                .unwrap();
        match report.branch {
            LiouvilleBranch::HitZero { r } => {
                assert!((r - std::f64::consts::PI).abs() < 1e-6)
            }
            other => panic!("expected hit_zero, got {other}"),
        }
        assert!(!report.red_flag);

        // λ = −1: unbounded; sinh(r)/r crosses 1e6 where the oracle says
        let report =
            liouville_probe(&geom, &laplacian_spec(3, -1.0), 100.0, &LiouvilleOptions::default())
                .unwrap();
        match report.branch {
            LiouvilleBranch::Unbounded { r } => {
                // independent oracle: bisect sinh(x)/x = 1e6
                let (mut lo, mut hi) = (1.0_f64, 50.0_f64);
                for _ in 0..200 {
                    let mid = 0.5 * (lo + hi);
                    if mid.sinh() / mid < 1e6 {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                }
                let want = 0.5 * (lo + hi);
                assert!((r - want).abs() < 1e-4, "crossed at {r}, oracle {want}");
            }
            other => panic!("expected unbounded, got {other}"),
        }

        // λ = 0: trivial branch
        let report =
            liouville_probe(&geom, &laplacian_spec(3, 0.0), 10.0, &LiouvilleOptions::default())
                .unwrap();
        assert_eq!(report.branch, LiouvilleBranch::TrivialConstant);
    }

    #[test]
    fn liouville_requires_flat_model() {
        let geom = ModelGeometry::new(3, 1.0).unwrap();
        assert!(matches!(
            liouville_probe(&geom, &laplacian_spec(3, 1.0), 10.0, &LiouvilleOptions::default()),
            Err(VerifyError::InvalidProbe(_))
        ));
    }
}
