//! Certified admissibility checking for the eigenproblem
//! `div(a(u²) φ(|∇u|²) ∇u) + λ ψ(u²) u = 0`.
//!
//! Three conditions gate the gradient estimate, all phrased in terms of the
//! degree functions `δ_φ`, `δ_a`, `δ_ψ`:
//!
//!  - C1: `δ_φ(t) ≥ l_φ > −1` on `[0, ∞)`, with φ and a of 2-order finite
//!    degree — this is also what makes the radial flux invertible.
//!  - C2: `(δ_φ(t) + δ_a(s) + 1)²/(n−1) − 2δ_φ'(t)t − 2δ_a'(s)s ≥ γ > 0`
//!    jointly in (s, t).
//!  - C3: with `B(s,t) = 2(δ_φ(t)+δ_a(s)+1)/(n−1) + δ_φ(t)+δ_a(s)−δ_ψ(s)`,
//!    the sup of `B²` over the unfavourable sign region must stay below
//!    `4γ/(n−1)`.
//!
//! Verdicts are three-valued. A `Holds` is backed by interval certificates
//! valid on all of `(0, ∞)²`; grid evidence alone can refute (an exact point
//! value is a witness) or leave the question open, but never confirm.
//!
//! For the polynomial p-Laplace family `Δ_p(Σ aᵢ u^{qᵢ}) + λ u^r = 0` the
//! admissible `r`-range has a closed form ([`thm4_range`]); [`full_report`]
//! cross-validates the general checker against it whenever a spec matches
//! that pattern.

use crate::scalar::{interval_square, ScalarError, ScalarFunc};
use std::fmt;

#[derive(Debug, Clone, PartialEq)]
pub enum SpecError {
    DimensionTooSmall { n: u32 },
    NegativeCurvatureBound { k: f64 },
    NonFinite(&'static str),
    Scalar(ScalarError),
    /// thm4_range precondition: q₁²(p−1)²/(n−1) − (p−1)(q_m−q₁)²/2 must be
    /// positive; carries the offending value.
    SpreadConditionFailed { value: f64 },
    PNotGreaterThanOne { p: f64 },
    BadPolyTerms(String),
}

impl fmt::Display for SpecError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SpecError::DimensionTooSmall { n } => write!(f, "dimension must be >= 2, got {n}"),
            SpecError::NegativeCurvatureBound { k } => {
                write!(f, "curvature bound K must be >= 0, got {k}")
            }
            SpecError::NonFinite(what) => write!(f, "{what} must be finite"),
            SpecError::Scalar(e) => write!(f, "{e}"),
            SpecError::SpreadConditionFailed { value } => write!(
                f,
                "spread condition q1^2(p-1)^2/(n-1) - (p-1)(qm-q1)^2/2 > 0 failed (value {value})"
            ),
            SpecError::PNotGreaterThanOne { p } => write!(f, "p must be > 1, got {p}"),
            SpecError::BadPolyTerms(msg) => write!(f, "invalid polynomial terms: {msg}"),
        }
    }
}

impl std::error::Error for SpecError {}

impl From<ScalarError> for SpecError {
    fn from(e: ScalarError) -> Self {
        SpecError::Scalar(e)
    }
}

/// A full eigenproblem instance. `k` is the Ricci lower-bound parameter in
/// the convention `Ric ≥ −K`; it plays no role in the admissibility
/// conditions themselves, only in the estimate's bound shape.
#[derive(Debug, Clone, PartialEq)]
pub struct ProblemSpec {
    pub n: u32,
    pub k: f64,
    pub lambda: f64,
    pub phi: ScalarFunc,
    pub a: ScalarFunc,
    pub psi: ScalarFunc,
}

impl ProblemSpec {
    pub fn new(
        n: u32,
        k: f64,
        lambda: f64,
        phi: ScalarFunc,
        a: ScalarFunc,
        psi: ScalarFunc,
    ) -> Result<Self, SpecError> {
        if n < 2 {
            return Err(SpecError::DimensionTooSmall { n });
        }
        if !k.is_finite() || k < 0.0 {
            return Err(SpecError::NegativeCurvatureBound { k });
        }
        if !lambda.is_finite() {
            return Err(SpecError::NonFinite("lambda"));
        }
        Ok(ProblemSpec { n, k, lambda, phi, a, psi })
    }

    /// The p-Laplacian of `Σ aᵢ u^{qᵢ}` with source `λ u^r` in the
    /// separable form: `φ = t^{(p−2)/2}`, `a = (Σ aᵢqᵢ s^{(qᵢ−1)/2})^{p−1}`,
    /// `ψ = s^{(r−1)/2}` (λ kept as a separate signed factor).
    pub fn poly_p_laplace(
        n: u32,
        k: f64,
        lambda: f64,
        p: f64,
        terms: &[(f64, f64)],
        r: f64,
    ) -> Result<Self, SpecError> {
        let phi = ScalarFunc::power((p - 2.0) / 2.0);
        let base: Vec<(f64, f64)> = terms.iter().map(|&(a, q)| (a * q, (q - 1.0) / 2.0)).collect();
        let a_func = ScalarFunc::power_of_monomial_sum(base, p - 1.0)?;
        let psi = ScalarFunc::power((r - 1.0) / 2.0);
        ProblemSpec::new(n, k, lambda, phi, a_func, psi)
    }

    /// `b(s) = λ ψ(s)/a(s)`, computed on demand.
    pub fn b(&self, s: f64) -> Result<f64, ScalarError> {
        Ok(self.lambda * self.psi.eval(s)? / self.a.eval(s)?)
    }

    fn nm1(&self) -> f64 {
        (self.n - 1) as f64
    }

    /// The C2 expression at a point, in closed form.
    pub fn c2_expression(&self, s: f64, t: f64) -> Result<f64, ScalarError> {
        let sum = self.phi.degree(t)? + self.a.degree(s)? + 1.0;
        Ok(sum * sum / self.nm1()
            - 2.0 * self.phi.degree_derivative(t)?
            - 2.0 * self.a.degree_derivative(s)?)
    }

    /// The C3 bracket `B(s, t)` at a point, in closed form. Uses the
    /// identity `δ_b = δ_ψ − δ_a`.
    pub fn bracket(&self, s: f64, t: f64) -> Result<f64, ScalarError> {
        let dphi = self.phi.degree(t)?;
        let da = self.a.degree(s)?;
        let dpsi = self.psi.degree(s)?;
        Ok(2.0 * (dphi + da + 1.0) / self.nm1() + dphi + da - dpsi)
    }

    /// Joint interval `[lo, hi]` of the bracket over all `(s, t)`, with a
    /// certification flag.
    fn bracket_interval(&self) -> Result<(f64, f64, bool), ScalarError> {
        let bp = self.phi.degree_bounds(1)?;
        let ba = self.a.degree_bounds(1)?;
        let bs = self.psi.degree_bounds(1)?;
        let certified = bp.certified && ba.certified && bs.certified;
        let sum_lo = bp.inf + ba.inf + 1.0;
        let sum_hi = bp.sup + ba.sup + 1.0;
        let lo = 2.0 * sum_lo / self.nm1() + bp.inf + ba.inf - bs.sup;
        let hi = 2.0 * sum_hi / self.nm1() + bp.sup + ba.sup - bs.inf;
        Ok((lo, hi, certified))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Holds,
    Fails,
    Unknown,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Verdict::Holds => write!(f, "holds"),
            Verdict::Fails => write!(f, "fails"),
            Verdict::Unknown => write!(f, "unknown"),
        }
    }
}

/// Classification of the favourable-sign set I of u²-values.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IClass {
    /// I = (0, ∞): the sign term is favourable everywhere, C3 is vacuous.
    All,
    /// I = ∅: the sup in C3 ranges over everything.
    Empty,
    /// Mixed or not certifiable; C3 degrades to unknown.
    MixedOrUnknown,
}

impl fmt::Display for IClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            IClass::All => write!(f, "all"),
            IClass::Empty => write!(f, "empty"),
            IClass::MixedOrUnknown => write!(f, "mixed/unknown"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct C1Check {
    pub verdict: Verdict,
    /// Certified infimum of δ_φ (the witness l_φ).
    pub l_phi: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct C2Check {
    pub verdict: Verdict,
    /// Certified lower bound γ of the C2 expression (meaningful on Holds).
    pub gamma: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct C3Check {
    pub verdict: Verdict,
    /// Certified upper bound Θ for sup B² over the relevant region; 0 and
    /// vacuous when I = (0, ∞).
    pub theta_sup: f64,
    pub i_class: IClass,
    pub vacuous: bool,
}

/// Constants θ and α from the estimate's proof, reported for
/// reproducibility; they do not feed the solver.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DerivedConstants {
    pub theta: f64,
    pub alpha: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AdmissibilityReport {
    pub c1: C1Check,
    pub c2: C2Check,
    pub c3: C3Check,
    pub derived: Option<DerivedConstants>,
    pub overall: Verdict,
    pub notes: Vec<String>,
    /// Cross-validation defects (general checker vs closed-form range);
    /// empty is the only acceptable state.
    pub defects: Vec<String>,
}

/// Grid used for uncertified evidence and for the certificate-domination
/// tests: `GRID_N` log-spaced points per axis on [1e-8, 1e8].
const GRID_N: usize = 200;

fn log_grid(n: usize) -> impl Iterator<Item = f64> {
    (0..n).map(move |i| 1e-8_f64 * (1e16_f64).powf(i as f64 / (n - 1) as f64))
}

/// C1: `δ_φ ≥ l_φ > −1`, plus the standing hypothesis that φ and a have
/// 2-order finite degrees (an exponential φ, with certified-unbounded
/// degree, therefore fails here even though its infimum is fine).
pub fn check_c1(spec: &ProblemSpec) -> Result<(C1Check, Vec<String>), SpecError> {
    let mut notes = Vec::new();
    let bounds = spec.phi.degree_bounds(1)?;
    let l_phi = bounds.inf;
    if !bounds.certified {
        notes.push("C1: degree bounds of phi not certified".to_string());
        return Ok((C1Check { verdict: Verdict::Unknown, l_phi }, notes));
    }
    if !spec.phi.has_finite_degree() || !spec.a.has_finite_degree() {
        notes.push(format!(
            "C1: 2-order finite degree fails (sup delta_phi = {}, phi finite: {}, a finite: {})",
            bounds.sup,
            spec.phi.has_finite_degree(),
            spec.a.has_finite_degree()
        ));
        return Ok((C1Check { verdict: Verdict::Fails, l_phi }, notes));
    }
    if l_phi > -1.0 {
        Ok((C1Check { verdict: Verdict::Holds, l_phi }, notes))
    } else {
        notes.push(format!("C1: inf delta_phi = {l_phi} is not > -1"));
        Ok((C1Check { verdict: Verdict::Fails, l_phi }, notes))
    }
}

/// C2: certified lower bound from the interval rules. The square term is
/// bounded below by the interval square of `δ_φ + δ_a + 1`; the derivative
/// terms by their spread certificates. When no positive certificate
/// comes out, falls back to the grid: an exact point value ≤ 0 refutes,
/// otherwise the verdict is unknown with the grid minimum in the notes.
pub fn check_c2(spec: &ProblemSpec) -> Result<(C2Check, Vec<String>), SpecError> {
    let mut notes = Vec::new();
    let bp = spec.phi.degree_bounds(1)?;
    let ba = spec.a.degree_bounds(1)?;

    let certified_gamma = if bp.certified && ba.certified {
        let sum = (bp.inf + ba.inf + 1.0, bp.sup + ba.sup + 1.0);
        let (sq_lo, _) = interval_square(sum);
        let d_phi = spec.phi.degree_derivative_bound().unwrap_or(f64::INFINITY);
        let d_a = spec.a.degree_derivative_bound().unwrap_or(f64::INFINITY);
        Some(sq_lo / spec.nm1() - d_phi - d_a)
    } else {
        None
    };

    if let Some(gamma) = certified_gamma {
        if let Some(poly) = recognize_poly(spec) {
            // Surface the closed-form value alongside the certified one;
            // they scale by 4/(n-1) and need not agree numerically.
            let s4 = section4_gamma(&poly);
            if (s4 - gamma).abs() > 1e-12 * gamma.abs().max(1.0) {
                notes.push(format!(
                    "C2: certified gamma = {gamma}, closed-form polynomial gamma = {s4} \
                     (the two differ by the 4/(n-1) normalization)"
                ));
            }
        }
        if gamma > 0.0 {
            return Ok((C2Check { verdict: Verdict::Holds, gamma }, notes));
        }
        notes.push(format!("C2: interval certificate inconclusive (gamma = {gamma})"));
    } else {
        notes.push("C2: degree bounds not certified, falling back to grid".to_string());
    }

    // Grid evidence: exact closed-form point evaluations.
    let mut grid_min = f64::INFINITY;
    let mut witness = None;
    for s in log_grid(GRID_N) {
        for t in log_grid(GRID_N) {
            let v = spec.c2_expression(s, t)?;
            if v < grid_min {
                grid_min = v;
                if v <= 0.0 {
                    witness = Some((s, t));
                }
            }
        }
    }
    if let Some((s, t)) = witness {
        notes.push(format!(
            "C2: refuted by witness point (s, t) = ({s:e}, {t:e}) with value {grid_min}"
        ));
        return Ok((C2Check { verdict: Verdict::Fails, gamma: grid_min }, notes));
    }
    notes.push(format!("C2: unknown; grid minimum {grid_min} over {GRID_N}x{GRID_N} samples"));
    Ok((C2Check { verdict: Verdict::Unknown, gamma: certified_gamma.unwrap_or(grid_min) }, notes))
}

/// Classifies the favourable-sign set I. Since ψ, a > 0, the sign of
/// `b = λψ/a` is the sign of λ everywhere, so the classification reduces to
/// the certified sign of the bracket.
pub fn classify_i(spec: &ProblemSpec) -> Result<(IClass, Vec<String>), SpecError> {
    let mut notes = Vec::new();
    if spec.lambda == 0.0 {
        // b ≡ 0 makes the product identically zero, hence ≥ 0.
        return Ok((IClass::All, notes));
    }
    let (lo, hi, certified) = spec.bracket_interval()?;
    if !certified {
        notes.push("I: bracket bounds not certified".to_string());
        return Ok((IClass::MixedOrUnknown, notes));
    }
    let class = if spec.lambda > 0.0 {
        if lo >= 0.0 {
            IClass::All
        } else if hi < 0.0 {
            IClass::Empty
        } else {
            IClass::MixedOrUnknown
        }
    } else if hi <= 0.0 {
        IClass::All
    } else if lo > 0.0 {
        IClass::Empty
    } else {
        IClass::MixedOrUnknown
    };
    if class == IClass::MixedOrUnknown {
        notes.push(format!(
            "I: bracket interval [{lo}, {hi}] straddles 0; set treated as mixed. \
             Membership is a property of u^2-values with the bracket bounded jointly \
             over both arguments."
        ));
    }
    Ok((class, notes))
}

/// C3: vacuous when I = (0, ∞); for I = ∅ compares the certified sup of B²
/// over all (s, t) against `4γ/(n−1)`; mixed classifications degrade to
/// unknown rather than attempting sublevel-set geometry.
pub fn check_c3(
    spec: &ProblemSpec,
    gamma: f64,
    i_class: IClass,
) -> Result<(C3Check, Vec<String>), SpecError> {
    let mut notes = Vec::new();
    match i_class {
        IClass::All => {
            notes.push("C3: vacuous (sup over the empty index set; I is everything)".to_string());
            Ok((
                C3Check { verdict: Verdict::Holds, theta_sup: 0.0, i_class, vacuous: true },
                notes,
            ))
        }
        IClass::Empty => {
            let (lo, hi, certified) = spec.bracket_interval()?;
            let (_, theta_sup) = interval_square((lo, hi));
            let threshold = 4.0 * gamma / spec.nm1();
            if !certified {
                notes.push("C3: bracket bounds not certified".to_string());
                return Ok((
                    C3Check { verdict: Verdict::Unknown, theta_sup, i_class, vacuous: false },
                    notes,
                ));
            }
            let verdict = if theta_sup < threshold {
                Verdict::Holds
            } else {
                // The certified sup is an upper bound; to refute we need an
                // exact point value at or above the threshold.
                let mut grid_max = 0.0_f64;
                for s in log_grid(GRID_N) {
                    for t in log_grid(GRID_N) {
                        let b = spec.bracket(s, t)?;
                        grid_max = grid_max.max(b * b);
                    }
                }
                if grid_max >= threshold {
                    notes.push(format!(
                        "C3: refuted; grid point with B^2 = {grid_max} >= 4 gamma/(n-1) = {threshold}"
                    ));
                    Verdict::Fails
                } else {
                    notes.push(format!(
                        "C3: unknown; certified sup {theta_sup} >= threshold {threshold} but grid max {grid_max} below it"
                    ));
                    Verdict::Unknown
                }
            };
            Ok((C3Check { verdict, theta_sup, i_class, vacuous: false }, notes))
        }
        IClass::MixedOrUnknown => {
            let (lo, hi, _) = spec.bracket_interval()?;
            let (_, theta_sup) = interval_square((lo, hi));
            notes.push("C3: unknown (mixed I-classification)".to_string());
            Ok((C3Check { verdict: Verdict::Unknown, theta_sup, i_class, vacuous: false }, notes))
        }
    }
}

/// θ = γ − (n−1)/4 · sup B² and α = (d_φ+1)/(4θ) · sup B², with sup B² = 0
/// in the vacuous case. θ must come out positive whenever C3 holds; a
/// nonpositive θ here would contradict the C3 verdict.
pub fn derived_constants(
    spec: &ProblemSpec,
    gamma: f64,
    c3: &C3Check,
) -> Result<DerivedConstants, SpecError> {
    let sup_b2 = if c3.vacuous { 0.0 } else { c3.theta_sup };
    let theta = gamma - spec.nm1() / 4.0 * sup_b2;
    assert!(
        c3.verdict != Verdict::Holds || theta > 0.0,
        "theta = {theta} <= 0 while C3 holds: inconsistent with check_c3"
    );
    let d_phi = spec.phi.degree_bounds(1)?.sup;
    let alpha = if sup_b2 == 0.0 { 0.0 } else { (d_phi + 1.0) / (4.0 * theta) * sup_b2 };
    Ok(DerivedConstants { theta, alpha })
}

/// The polynomial p-Laplace problem `Δ_p(Σ aᵢ u^{qᵢ}) + λ u^r = 0` in its
/// natural parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct PolyPLaplaceSpec {
    pub p: f64,
    /// `(aᵢ, qᵢ)` with strictly increasing qᵢ and aᵢqᵢ > 0.
    pub terms: Vec<(f64, f64)>,
    pub r: f64,
    pub lambda_sign: LambdaSign,
    pub n: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LambdaSign {
    NonNeg,
    NonPos,
}

impl PolyPLaplaceSpec {
    pub fn new(
        p: f64,
        terms: Vec<(f64, f64)>,
        r: f64,
        lambda_sign: LambdaSign,
        n: u32,
    ) -> Result<Self, SpecError> {
        if n < 2 {
            return Err(SpecError::DimensionTooSmall { n });
        }
        if !(p > 1.0) {
            return Err(SpecError::PNotGreaterThanOne { p });
        }
        if terms.is_empty() {
            return Err(SpecError::BadPolyTerms("no terms".to_string()));
        }
        for (i, &(a, q)) in terms.iter().enumerate() {
            if !(a * q > 0.0) {
                return Err(SpecError::BadPolyTerms(format!(
                    "a_i * q_i must be positive (term {i}: a={a}, q={q})"
                )));
            }
            if i > 0 && q <= terms[i - 1].1 {
                return Err(SpecError::BadPolyTerms(format!(
                    "exponents must be strictly increasing (term {i})"
                )));
            }
        }
        Ok(PolyPLaplaceSpec { p, terms, r, lambda_sign, n })
    }

    pub fn q_min(&self) -> f64 {
        self.terms[0].1
    }

    pub fn q_max(&self) -> f64 {
        self.terms[self.terms.len() - 1].1
    }
}

/// Result of the closed-form range check.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Thm4Range {
    pub admissible: bool,
    /// The r-threshold: admissible means `r < threshold` for λ ≥ 0 and
    /// `r > threshold` for λ ≤ 0.
    pub r_threshold: f64,
}

/// `4q₁²(p−1)²/(n−1)² − 2(q_m−q₁)²(p−1)/(n−1)` — the closed-form discriminant
/// of the polynomial family (equal to `4γ/(n−1)` for the certified γ).
fn section4_gamma(spec: &PolyPLaplaceSpec) -> f64 {
    let nm1 = (spec.n - 1) as f64;
    let p1 = spec.p - 1.0;
    let q1 = spec.q_min();
    let spread = spec.q_max() - q1;
    4.0 * q1 * q1 * p1 * p1 / (nm1 * nm1) - 2.0 * spread * spread * p1 / nm1
}

/// Closed-form admissible r-range for `Δ_p(Σ aᵢ u^{qᵢ}) + λ u^r = 0`.
///
/// Preconditions: the spread condition
/// `q₁²(p−1)²/(n−1) − (p−1)(q_m−q₁)²/2 > 0`. Thresholds:
///
/// ```text
///   λ ≥ 0:  r < (n+1)(p−1)q₁/(n−1) + √D
///   λ ≤ 0:  r > (n+1)(p−1)q_m/(n−1) − √D
/// ```
///
/// with `D = 4q₁²(p−1)²/(n−1)² − 2(q_m−q₁)²(p−1)/(n−1)`. For a single power
/// these reduce to `r < ((n+1)q + 2|q|)(p−1)/(n−1)` resp.
/// `r > ((n+1)q − 2|q|)(p−1)/(n−1)`.
pub fn thm4_range(spec: &PolyPLaplaceSpec) -> Result<Thm4Range, SpecError> {
    let nm1 = (spec.n - 1) as f64;
    let p1 = spec.p - 1.0;
    let q1 = spec.q_min();
    let qm = spec.q_max();
    let precondition = q1 * q1 * p1 * p1 / nm1 - p1 * (qm - q1) * (qm - q1) / 2.0;
    if !(precondition > 0.0) {
        return Err(SpecError::SpreadConditionFailed { value: precondition });
    }
    let sqrt_d = section4_gamma(spec).sqrt();
    let (threshold, admissible) = match spec.lambda_sign {
        LambdaSign::NonNeg => {
            let t = (spec.n + 1) as f64 * p1 * q1 / nm1 + sqrt_d;
            (t, spec.r < t)
        }
        LambdaSign::NonPos => {
            let t = (spec.n + 1) as f64 * p1 * qm / nm1 - sqrt_d;
            (t, spec.r > t)
        }
    };
    Ok(Thm4Range { admissible, r_threshold: threshold })
}

/// Recognizes a [`ProblemSpec`] that matches the polynomial p-Laplace
/// pattern: single-power φ and ψ, and `a` a power of a monomial sum whose
/// data reassembles into `(p, aᵢ, qᵢ, r)`.
pub fn recognize_poly(spec: &ProblemSpec) -> Option<PolyPLaplaceSpec> {
    let phi_k = match &spec.phi {
        ScalarFunc::MonomialSum(m) if m.terms().len() == 1 && m.terms()[0].coeff == 1.0 => {
            m.terms()[0].exponent
        }
        _ => return None,
    };
    let p = 2.0 * phi_k + 2.0;
    if !(p > 1.0) {
        return None;
    }
    let psi_k = match &spec.psi {
        ScalarFunc::MonomialSum(m) if m.terms().len() == 1 && m.terms()[0].coeff == 1.0 => {
            m.terms()[0].exponent
        }
        _ => return None,
    };
    let r = 2.0 * psi_k + 1.0;
    let (base_terms, e): (Vec<(f64, f64)>, f64) = match &spec.a {
        ScalarFunc::PowerOfMonomialSum { base, exponent } => {
            (base.terms().iter().map(|t| (t.coeff, t.exponent)).collect(), *exponent)
        }
        ScalarFunc::MonomialSum(m) if m.terms().len() == 1 => {
            (vec![(m.terms()[0].coeff, m.terms()[0].exponent)], 1.0)
        }
        _ => return None,
    };
    if (e - (p - 1.0)).abs() > 1e-12 * p.abs().max(1.0) {
        return None;
    }
    // base term (c, k) encodes c = aᵢqᵢ, k = (qᵢ−1)/2
    let mut terms = Vec::with_capacity(base_terms.len());
    for (c, k) in base_terms {
        let q = 2.0 * k + 1.0;
        if q == 0.0 {
            return None;
        }
        terms.push((c / q, q));
    }
    let lambda_sign = if spec.lambda >= 0.0 { LambdaSign::NonNeg } else { LambdaSign::NonPos };
    PolyPLaplaceSpec::new(p, terms, r, lambda_sign, spec.n).ok()
}

/// Runs all checks and aggregates. The overall verdict holds only when
/// C1–C3 all hold with certificates. When the spec matches the polynomial
/// pattern (and λ ≠ 0), the closed-form range is cross-validated: the
/// general checker may be strictly more conservative (unknown), but a
/// holds/fails contradiction is recorded as a defect.
pub fn full_report(spec: &ProblemSpec) -> Result<AdmissibilityReport, SpecError> {
    let mut notes = Vec::new();
    let mut defects = Vec::new();

    let (c1, mut n1) = check_c1(spec)?;
    notes.append(&mut n1);
    let (c2, mut n2) = check_c2(spec)?;
    notes.append(&mut n2);
    let (i_class, mut ni) = classify_i(spec)?;
    notes.append(&mut ni);
    let (c3, mut n3) = check_c3(spec, c2.gamma, i_class)?;
    notes.append(&mut n3);

    let overall = combine(&[c1.verdict, c2.verdict, c3.verdict]);
    let derived = if overall == Verdict::Holds {
        Some(derived_constants(spec, c2.gamma, &c3)?)
    } else {
        None
    };

    if spec.lambda != 0.0 {
        if let Some(poly) = recognize_poly(spec) {
            match thm4_range(&poly) {
                Ok(range) => {
                    let contradiction = (range.admissible && overall == Verdict::Fails)
                        || (!range.admissible && overall == Verdict::Holds);
                    if contradiction {
                        defects.push(format!(
                            "general checker says {overall} but the closed-form range says \
                             admissible={} (threshold r = {})",
                            range.admissible, range.r_threshold
                        ));
                    } else {
                        notes.push(format!(
                            "closed-form polynomial range agrees: admissible={}, threshold r = {}",
                            range.admissible, range.r_threshold
                        ));
                    }
                }
                Err(e) => {
                    if overall == Verdict::Holds {
                        defects.push(format!(
                            "closed-form range precondition failed ({e}) but the general \
                             checker certified the spec"
                        ));
                    } else {
                        notes.push(format!("closed-form range precondition failed: {e}"));
                    }
                }
            }
        }
    }

    Ok(AdmissibilityReport { c1, c2, c3, derived, overall, notes, defects })
}

fn combine(verdicts: &[Verdict]) -> Verdict {
    if verdicts.contains(&Verdict::Fails) {
        Verdict::Fails
    } else if verdicts.iter().all(|v| *v == Verdict::Holds) {
        Verdict::Holds
    } else {
        Verdict::Unknown
    }
}
