//! A closed family of scalar functions on `[0, ∞)` with an exact degree
//! calculus.
//!
//! The admissibility checker needs *global* bounds on the degree function
//!
//! ```text
//!     δ_f(t) = 2 t f'(t) / f(t)
//! ```
//!
//! and on its derivative. Global bounds cannot be certified by sampling an
//! arbitrary callable, so the family is deliberately closed: monomial sums
//! with certified-positive coefficients, real powers of those sums, and
//! exponentials. Every bound produced here is either `certified` (derived
//! from the structure of the member, valid on all of `(0, ∞)`) or explicitly
//! uncertified (sampled on a log grid and marked as such).
//!
//! The key structural fact, used throughout: for a positive-coefficient sum
//! `f(t) = Σ cᵢ t^{kᵢ}`, the quotient `Σ cᵢ mᵢ t^{kᵢ} / Σ cᵢ t^{kᵢ}` is a
//! convex combination of the weights `mᵢ`, hence lies in `[min mᵢ, max mᵢ]`
//! for every `t > 0`. With `mᵢ = kᵢ` this gives `δ_f ∈ [2k₁, 2k_m]`, and the
//! companion derivative bound `0 ≤ t (δ_f/2)'(t) ≤ (k_m − k₁)²/2` follows
//! from the variance form of the quotient's derivative.

use std::fmt;

/// Errors from constructing or evaluating family members.
#[derive(Debug, Clone, PartialEq)]
pub enum ScalarError {
    /// A monomial sum must have at least one term.
    EmptyTerms,
    /// Term coefficients must be nonzero (index of the offender).
    ZeroCoefficient(usize),
    /// Exponents must be strictly increasing (index of the first violation).
    ExponentsNotIncreasing(usize),
    /// Positivity on (0, ∞) could not be certified: a coefficient is
    /// negative (index of the offender).
    PositivityNotCertified(usize),
    /// Evaluation at t = 0 with a negative effective exponent.
    DomainAtZero { exponent: f64 },
    /// Evaluation requires t ≥ 0.
    NegativeArgument { t: f64 },
    /// k-th degree supported only for k in {1, 2}.
    UnsupportedOrder { k: u32 },
    /// The operation is not defined for this variant.
    UnsupportedVariant { op: &'static str, variant: &'static str },
    /// A non-finite number appeared in a constructor argument.
    NonFinite,
}

impl fmt::Display for ScalarError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ScalarError::EmptyTerms => write!(f, "monomial sum needs at least one term"),
            ScalarError::ZeroCoefficient(i) => write!(f, "term {i} has zero coefficient"),
            ScalarError::ExponentsNotIncreasing(i) => {
                write!(f, "exponents must be strictly increasing (violated at term {i})")
            }
            ScalarError::PositivityNotCertified(i) => write!(
                f,
                "positivity on (0,inf) cannot be certified: term {i} has a negative coefficient"
            ),
            ScalarError::DomainAtZero { exponent } => {
                write!(f, "evaluation at t = 0 undefined for effective exponent {exponent}")
            }
            ScalarError::NegativeArgument { t } => write!(f, "argument must be >= 0, got {t}"),
            ScalarError::UnsupportedOrder { k } => {
                write!(f, "k-th degree supported only for k in {{1, 2}}, got {k}")
            }
            ScalarError::UnsupportedVariant { op, variant } => {
                write!(f, "{op} is not defined for the {variant} variant")
            }
            ScalarError::NonFinite => write!(f, "non-finite constructor argument"),
        }
    }
}

impl std::error::Error for ScalarError {}

/// One term `c · t^k` of a monomial sum.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Term {
    pub coeff: f64,
    pub exponent: f64,
}

/// A positive-coefficient sum `Σ cᵢ t^{kᵢ}` with strictly increasing
/// exponents. Positive on `(0, ∞)` by construction.
#[derive(Debug, Clone, PartialEq)]
pub struct MonomialSum {
    terms: Vec<Term>,
}

impl MonomialSum {
    /// Builds a sum from `(coefficient, exponent)` pairs. Rejects empty
    /// sums, zero coefficients, out-of-order exponents and — because
    /// positivity must be certifiable — negative coefficients.
    pub fn new(terms: Vec<(f64, f64)>) -> Result<Self, ScalarError> {
        if terms.is_empty() {
            return Err(ScalarError::EmptyTerms);
        }
        let mut out = Vec::with_capacity(terms.len());
        for (i, &(c, k)) in terms.iter().enumerate() {
            if !c.is_finite() || !k.is_finite() {
                return Err(ScalarError::NonFinite);
            }
            if c == 0.0 {
                return Err(ScalarError::ZeroCoefficient(i));
            }
            if c < 0.0 {
                return Err(ScalarError::PositivityNotCertified(i));
            }
            if i > 0 && k <= terms[i - 1].1 {
                return Err(ScalarError::ExponentsNotIncreasing(i));
            }
            out.push(Term { coeff: c, exponent: k });
        }
        Ok(MonomialSum { terms: out })
    }

    /// A single power `t^k`.
    pub fn single(exponent: f64) -> Self {
        MonomialSum { terms: vec![Term { coeff: 1.0, exponent }] }
    }

    pub fn terms(&self) -> &[Term] {
        &self.terms
    }

    pub fn min_exponent(&self) -> f64 {
        self.terms[0].exponent
    }

    pub fn max_exponent(&self) -> f64 {
        self.terms[self.terms.len() - 1].exponent
    }

    fn is_single(&self) -> bool {
        self.terms.len() == 1
    }

    fn eval(&self, t: f64) -> Result<f64, ScalarError> {
        if t < 0.0 {
            return Err(ScalarError::NegativeArgument { t });
        }
        if t == 0.0 && self.min_exponent() < 0.0 {
            return Err(ScalarError::DomainAtZero { exponent: self.min_exponent() });
        }
        Ok(self.terms.iter().map(|tm| tm.coeff * t.powf(tm.exponent)).sum())
    }

    /// `Σ cᵢ mᵢ(kᵢ) t^{kᵢ} / Σ cᵢ t^{kᵢ}` — the convex combination of the
    /// per-term weights `mᵢ`, the workhorse of the degree calculus.
    fn weighted_quotient<W: Fn(f64) -> f64>(&self, t: f64, weight: W) -> f64 {
        if self.is_single() {
            return weight(self.terms[0].exponent);
        }
        // Factor out t^{k₁} so the quotient stays finite for tiny/huge t.
        let k0 = self.terms[0].exponent;
        let mut num = 0.0;
        let mut den = 0.0;
        for tm in &self.terms {
            let w = tm.coeff * t.powf(tm.exponent - k0);
            num += weight(tm.exponent) * w;
            den += w;
        }
        num / den
    }
}

/// Symbolic member of the closed function family. Represents one of the
/// roles φ (gradient nonlinearity), a (state nonlinearity), ψ (source
/// weight); all three are required positive on `(0, ∞)`.
#[derive(Debug, Clone, PartialEq)]
pub enum ScalarFunc {
    /// `t ↦ Σ cᵢ t^{kᵢ}`
    MonomialSum(MonomialSum),
    /// `t ↦ exp(β t)`
    Exponential { rate: f64 },
    /// `t ↦ (Σ cᵢ t^{kᵢ})^e` — covers operators like
    /// `a(s) = (Σ aᵢ qᵢ s^{(qᵢ−1)/2})^{p−1}`.
    PowerOfMonomialSum { base: MonomialSum, exponent: f64 },
}

/// Certified or sampled bounds for a degree function, as extended reals.
///
/// `certified = true` only when the bounds follow from the interval rules of
/// the closed family; sampled bounds are never marked certified.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DegreeBounds {
    pub inf: f64,
    pub sup: f64,
    pub certified: bool,
}

impl DegreeBounds {
    fn certified(inf: f64, sup: f64) -> Self {
        debug_assert!(inf <= sup);
        DegreeBounds { inf, sup, certified: true }
    }

    pub fn is_finite(&self) -> bool {
        self.inf.is_finite() && self.sup.is_finite()
    }

    pub fn contains(&self, x: f64) -> bool {
        self.inf <= x && x <= self.sup
    }
}

/// Number of samples for uncertified (grid) bounds.
const SAMPLE_GRID_POINTS: usize = 400;
/// Log-grid sampling range for uncertified bounds.
const SAMPLE_GRID_LO: f64 = 1e-8;
const SAMPLE_GRID_HI: f64 = 1e8;

impl ScalarFunc {
    /// Single power `t^k` — the common case for φ and ψ.
    pub fn power(exponent: f64) -> Self {
        ScalarFunc::MonomialSum(MonomialSum::single(exponent))
    }

    /// The constant function 1 (`t^0`).
    pub fn one() -> Self {
        ScalarFunc::power(0.0)
    }

    pub fn monomial_sum(terms: Vec<(f64, f64)>) -> Result<Self, ScalarError> {
        Ok(ScalarFunc::MonomialSum(MonomialSum::new(terms)?))
    }

    pub fn exponential(rate: f64) -> Result<Self, ScalarError> {
        if !rate.is_finite() {
            return Err(ScalarError::NonFinite);
        }
        Ok(ScalarFunc::Exponential { rate })
    }

    pub fn power_of_monomial_sum(
        terms: Vec<(f64, f64)>,
        exponent: f64,
    ) -> Result<Self, ScalarError> {
        if !exponent.is_finite() {
            return Err(ScalarError::NonFinite);
        }
        Ok(ScalarFunc::PowerOfMonomialSum { base: MonomialSum::new(terms)?, exponent })
    }

    fn variant_name(&self) -> &'static str {
        match self {
            ScalarFunc::MonomialSum(_) => "MonomialSum",
            ScalarFunc::Exponential { .. } => "Exponential",
            ScalarFunc::PowerOfMonomialSum { .. } => "PowerOfMonomialSum",
        }
    }

    /// Smallest exponent of the asymptotic expansion at t → 0⁺; evaluation
    /// at t = 0 is defined iff this is ≥ 0.
    fn effective_min_exponent(&self) -> f64 {
        match self {
            ScalarFunc::MonomialSum(m) => m.min_exponent(),
            ScalarFunc::Exponential { .. } => 0.0,
            ScalarFunc::PowerOfMonomialSum { base, exponent } => base.min_exponent() * exponent,
        }
    }

    /// Closed-form evaluation. Errors at t = 0 when the member diverges
    /// there (negative effective exponent) and for t < 0.
    pub fn eval(&self, t: f64) -> Result<f64, ScalarError> {
        if t < 0.0 {
            return Err(ScalarError::NegativeArgument { t });
        }
        if t == 0.0 && self.effective_min_exponent() < 0.0 {
            return Err(ScalarError::DomainAtZero { exponent: self.effective_min_exponent() });
        }
        match self {
            ScalarFunc::MonomialSum(m) => m.eval(t),
            ScalarFunc::Exponential { rate } => Ok((rate * t).exp()),
            ScalarFunc::PowerOfMonomialSum { base, exponent } => {
                if t == 0.0 {
                    // base(0) = 0 with e > 0 gives 0^e = 0; base(0) > 0 is plain powf.
                    return Ok(base.eval(t)?.powf(*exponent));
                }
                Ok(base.eval(t)?.powf(*exponent))
            }
        }
    }

    /// First derivative in closed form (no numerical differentiation).
    pub fn eval_derivative(&self, t: f64) -> Result<f64, ScalarError> {
        match self {
            ScalarFunc::MonomialSum(m) => {
                if t < 0.0 {
                    return Err(ScalarError::NegativeArgument { t });
                }
                if t == 0.0 && m.min_exponent() < 1.0 && m.min_exponent() != 0.0 {
                    return Err(ScalarError::DomainAtZero { exponent: m.min_exponent() - 1.0 });
                }
                Ok(m.terms
                    .iter()
                    .map(|tm| {
                        if tm.exponent == 0.0 {
                            0.0
                        } else {
                            tm.coeff * tm.exponent * t.powf(tm.exponent - 1.0)
                        }
                    })
                    .sum())
            }
            ScalarFunc::Exponential { rate } => Ok(rate * (rate * t).exp()),
            ScalarFunc::PowerOfMonomialSum { base, exponent } => {
                // (B^e)' = e B^{e-1} B'
                let b = base.eval(t)?;
                let db = ScalarFunc::MonomialSum(base.clone()).eval_derivative(t)?;
                Ok(exponent * b.powf(exponent - 1.0) * db)
            }
        }
    }

    /// Degree function `δ_f(t) = 2 t f'(t) / f(t)`, by closed-form
    /// differentiation of the variant.
    pub fn degree(&self, t: f64) -> Result<f64, ScalarError> {
        if t <= 0.0 {
            return Err(ScalarError::NegativeArgument { t });
        }
        match self {
            ScalarFunc::MonomialSum(m) => Ok(2.0 * m.weighted_quotient(t, |k| k)),
            ScalarFunc::Exponential { rate } => Ok(2.0 * rate * t),
            ScalarFunc::PowerOfMonomialSum { base, exponent } => {
                Ok(exponent * 2.0 * base.weighted_quotient(t, |k| k))
            }
        }
    }

    /// k-th degree function `δ_f^{(k)}(t) = 2 t^k f^{(k)}(t) / f(t)`,
    /// supported for k ∈ {1, 2}.
    pub fn kth_degree(&self, k: u32, t: f64) -> Result<f64, ScalarError> {
        match k {
            1 => self.degree(t),
            2 => self.second_degree(t),
            _ => Err(ScalarError::UnsupportedOrder { k }),
        }
    }

    /// `δ^{(2)}_f(t) = 2 t² f''(t) / f(t)` in closed form.
    fn second_degree(&self, t: f64) -> Result<f64, ScalarError> {
        if t <= 0.0 {
            return Err(ScalarError::NegativeArgument { t });
        }
        match self {
            // Σ cᵢ kᵢ(kᵢ−1) t^{kᵢ} / Σ cᵢ t^{kᵢ}, doubled.
            ScalarFunc::MonomialSum(m) => Ok(2.0 * m.weighted_quotient(t, |k| k * (k - 1.0))),
            ScalarFunc::Exponential { rate } => Ok(2.0 * rate * rate * t * t),
            ScalarFunc::PowerOfMonomialSum { base, exponent } => {
                // g = B^e:  2t²g''/g = e(e−1) δ_B²/2 + e δ_B^{(2)}
                let e = *exponent;
                let delta_b = 2.0 * base.weighted_quotient(t, |k| k);
                let delta_b2 = 2.0 * base.weighted_quotient(t, |k| k * (k - 1.0));
                Ok(e * (e - 1.0) * delta_b * delta_b / 2.0 + e * delta_b2)
            }
        }
    }

    /// `t · δ_f'(t)` in closed form. For a monomial sum this is the variance
    /// form `2 (M·D − N²)/D²` with `N = Σ cᵢkᵢt^{kᵢ}`, `M = Σ cᵢkᵢ²t^{kᵢ}`,
    /// `D = Σ cᵢt^{kᵢ}` — nonnegative by Cauchy–Schwarz.
    pub fn degree_derivative(&self, t: f64) -> Result<f64, ScalarError> {
        if t <= 0.0 {
            return Err(ScalarError::NegativeArgument { t });
        }
        match self {
            ScalarFunc::MonomialSum(m) => Ok(monomial_degree_derivative(m, t)),
            ScalarFunc::Exponential { rate } => Ok(2.0 * rate * t),
            ScalarFunc::PowerOfMonomialSum { base, exponent } => {
                Ok(exponent * monomial_degree_derivative(base, t))
            }
        }
    }

    /// Certified (or, where the rules do not apply, sampled) bounds of the
    /// k-th degree function over `(0, ∞)`.
    pub fn degree_bounds(&self, k: u32) -> Result<DegreeBounds, ScalarError> {
        match (k, self) {
            (1, ScalarFunc::MonomialSum(m)) => {
                Ok(DegreeBounds::certified(2.0 * m.min_exponent(), 2.0 * m.max_exponent()))
            }
            (1, ScalarFunc::Exponential { rate }) => {
                // δ = 2βt sweeps a half-line; finite degree fails unless β = 0.
                Ok(match rate.partial_cmp(&0.0).expect("finite rate") {
                    std::cmp::Ordering::Greater => DegreeBounds::certified(0.0, f64::INFINITY),
                    std::cmp::Ordering::Less => DegreeBounds::certified(f64::NEG_INFINITY, 0.0),
                    std::cmp::Ordering::Equal => DegreeBounds::certified(0.0, 0.0),
                })
            }
            (1, ScalarFunc::PowerOfMonomialSum { base, exponent }) => {
                let (lo, hi) = (2.0 * base.min_exponent(), 2.0 * base.max_exponent());
                let (a, b) = (exponent * lo, exponent * hi);
                Ok(DegreeBounds::certified(a.min(b), a.max(b)))
            }
            (2, ScalarFunc::MonomialSum(m)) if m.is_single() => {
                let k0 = m.min_exponent();
                let v = 2.0 * k0 * (k0 - 1.0);
                Ok(DegreeBounds::certified(v, v))
            }
            (2, ScalarFunc::Exponential { rate }) => {
                // δ^{(2)} = 2β²t² ∈ [0, ∞), degenerate to {0} for β = 0.
                if *rate == 0.0 {
                    Ok(DegreeBounds::certified(0.0, 0.0))
                } else {
                    Ok(DegreeBounds::certified(0.0, f64::INFINITY))
                }
            }
            (2, ScalarFunc::PowerOfMonomialSum { base, exponent }) => {
                // Closed form δ^{(2)} = e(e−1) δ_B²/2 + e δ_B^{(2)} with the
                // base intervals δ_B ∈ 2[k₁,k_m], δ_B^{(2)} ∈ 2[min kᵢ(kᵢ−1),
                // max kᵢ(kᵢ−1)], combined by interval arithmetic.
                let e = *exponent;
                let db = (2.0 * base.min_exponent(), 2.0 * base.max_exponent());
                let (w_lo, w_hi) = base
                    .terms
                    .iter()
                    .map(|tm| tm.exponent * (tm.exponent - 1.0))
                    .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), w| {
                        (lo.min(w), hi.max(w))
                    });
                let db2 = (2.0 * w_lo, 2.0 * w_hi);
                let sq = interval_square(db);
                let part1 = interval_scale(sq, e * (e - 1.0) / 2.0);
                let part2 = interval_scale(db2, e);
                Ok(DegreeBounds::certified(part1.0 + part2.0, part1.1 + part2.1))
            }
            (2, ScalarFunc::MonomialSum(_)) => {
                // Multi-term second degrees fall outside the certified rules;
                // report grid-sampled bounds, never marked certified.
                let mut lo = f64::INFINITY;
                let mut hi = f64::NEG_INFINITY;
                for i in 0..SAMPLE_GRID_POINTS {
                    let frac = i as f64 / (SAMPLE_GRID_POINTS - 1) as f64;
                    let t = SAMPLE_GRID_LO * (SAMPLE_GRID_HI / SAMPLE_GRID_LO).powf(frac);
                    let v = self.second_degree(t)?;
                    lo = lo.min(v);
                    hi = hi.max(v);
                }
                Ok(DegreeBounds { inf: lo, sup: hi, certified: false })
            }
            _ => Err(ScalarError::UnsupportedOrder { k }),
        }
    }

    /// Certified upper bound for `sup_t 2 t δ_f'(t)`: for a monomial sum
    /// `2(k_m − k₁)²`, scaled by the outer exponent for powers of sums. Also
    /// guarantees the lower bound `t δ_f'(t) ≥ 0`. Not defined for
    /// exponentials, whose degree derivative is unbounded.
    pub fn degree_derivative_bound(&self) -> Result<f64, ScalarError> {
        match self {
            ScalarFunc::MonomialSum(m) => {
                let spread = m.max_exponent() - m.min_exponent();
                Ok(2.0 * spread * spread)
            }
            ScalarFunc::PowerOfMonomialSum { base, exponent } => {
                if *exponent <= 0.0 {
                    return Err(ScalarError::UnsupportedVariant {
                        op: "degree_derivative_bound with nonpositive outer exponent",
                        variant: self.variant_name(),
                    });
                }
                let spread = base.max_exponent() - base.min_exponent();
                Ok(exponent * 2.0 * spread * spread)
            }
            ScalarFunc::Exponential { .. } => Err(ScalarError::UnsupportedVariant {
                op: "degree_derivative_bound",
                variant: self.variant_name(),
            }),
        }
    }

    /// True when the member has k-order finite degree for every k — a
    /// property of the family: the degree quotients of monomial sums (and
    /// their powers) are convex combinations of fixed per-term weights,
    /// hence globally bounded, while nonconstant exponentials are not.
    pub fn has_finite_degree(&self) -> bool {
        match self {
            ScalarFunc::MonomialSum(_) | ScalarFunc::PowerOfMonomialSum { .. } => true,
            ScalarFunc::Exponential { rate } => *rate == 0.0,
        }
    }
}

/// Variance form of `t · δ'(t)` for a positive monomial sum.
fn monomial_degree_derivative(m: &MonomialSum, t: f64) -> f64 {
    if m.is_single() {
        return 0.0;
    }
    let k0 = m.min_exponent();
    let mut d = 0.0; // Σ cᵢ t^{kᵢ-k₀}
    let mut n = 0.0; // Σ cᵢ kᵢ t^{kᵢ-k₀}
    let mut q = 0.0; // Σ cᵢ kᵢ² t^{kᵢ-k₀}
    for tm in m.terms() {
        let w = tm.coeff * t.powf(tm.exponent - k0);
        d += w;
        n += tm.exponent * w;
        q += tm.exponent * tm.exponent * w;
    }
    2.0 * (q * d - n * n) / (d * d)
}

fn interval_scale((lo, hi): (f64, f64), c: f64) -> (f64, f64) {
    let (a, b) = (c * lo, c * hi);
    (a.min(b), a.max(b))
}

/// Interval square `[lo, hi]² = [min², max²]` or `[0, max²]` when straddling 0.
pub fn interval_square((lo, hi): (f64, f64)) -> (f64, f64) {
    let m = lo.abs().max(hi.abs());
    if lo <= 0.0 && hi >= 0.0 {
        (0.0, m * m)
    } else {
        let mn = lo.abs().min(hi.abs());
        (mn * mn, m * m)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn msum(terms: &[(f64, f64)]) -> ScalarFunc {
        ScalarFunc::monomial_sum(terms.to_vec()).unwrap()
    }

    #[test]
    fn eval_closed_forms() {
        // √4 = 2
        assert_eq!(msum(&[(1.0, 0.5)]).eval(4.0).unwrap(), 2.0);
        // e⁰ = 1
        assert_eq!(ScalarFunc::exponential(1.0).unwrap().eval(0.0).unwrap(), 1.0);
        // (1 + 1)² = 4
        let p = ScalarFunc::power_of_monomial_sum(vec![(1.0, 0.5), (1.0, 1.0)], 2.0).unwrap();
        assert_eq!(p.eval(1.0).unwrap(), 4.0);
    }

    #[test]
    fn eval_domain_errors() {
        let f = msum(&[(1.0, -0.5)]);
        assert!(matches!(f.eval(0.0), Err(ScalarError::DomainAtZero { .. })));
        assert!(matches!(f.eval(-1.0), Err(ScalarError::NegativeArgument { .. })));
        // (t^0.5)^{-2} diverges at 0 through the power.
        let p = ScalarFunc::power_of_monomial_sum(vec![(1.0, 0.5)], -2.0).unwrap();
        assert!(matches!(p.eval(0.0), Err(ScalarError::DomainAtZero { .. })));
        // but is fine with a positive outer exponent
        let p = ScalarFunc::power_of_monomial_sum(vec![(1.0, 0.5)], 2.0).unwrap();
        assert_eq!(p.eval(0.0).unwrap(), 0.0);
    }

    #[test]
    fn constructors_reject_uncertifiable() {
        assert!(matches!(
            ScalarFunc::monomial_sum(vec![(1.0, 0.0), (-1.0, 1.0)]),
            Err(ScalarError::PositivityNotCertified(1))
        ));
        assert!(matches!(ScalarFunc::monomial_sum(vec![]), Err(ScalarError::EmptyTerms)));
        assert!(matches!(
            ScalarFunc::monomial_sum(vec![(1.0, 1.0), (1.0, 1.0)]),
            Err(ScalarError::ExponentsNotIncreasing(1))
        ));
        assert!(matches!(
            ScalarFunc::monomial_sum(vec![(1.0, 0.0), (0.0, 1.0)]),
            Err(ScalarError::ZeroCoefficient(1))
        ));
    }

    #[test]
    fn degree_of_p_laplacian_phi_is_p_minus_2() {
        // φ = t^{(p−2)/2} has δ_φ ≡ p − 2, exactly.
        for &p in &[1.5, 2.0, 3.0, 7.25] {
            let phi = ScalarFunc::power((p - 2.0) / 2.0);
            for &t in &[1e-6, 0.37, 1.0, 42.0, 1e6] {
                assert_eq!(phi.degree(t).unwrap(), p - 2.0);
            }
        }
    }

    #[test]
    fn degree_closed_forms() {
        // pure power: δ = 2k
        assert_eq!(msum(&[(1.0, 0.75)]).degree(3.1).unwrap(), 1.5);
        // equal-weight symmetry at t = 1: (1·1 + 1·2)·2/2 = 3
        let f = msum(&[(1.0, 1.0), (1.0, 2.0)]);
        assert!((f.degree(1.0).unwrap() - 3.0).abs() < 1e-15);
        // exponential: δ = 2βt
        let e = ScalarFunc::exponential(0.5).unwrap();
        assert_eq!(e.degree(3.0).unwrap(), 3.0);
        // power of a sum scales the base degree
        let p = ScalarFunc::power_of_monomial_sum(vec![(1.0, 1.0), (1.0, 2.0)], 3.0).unwrap();
        assert!((p.degree(1.0).unwrap() - 9.0).abs() < 1e-14);
    }

    #[test]
    fn kth_degree_matches_definition() {
        // k = 1 coincides with degree for every variant
        let funcs = vec![
            msum(&[(1.0, 2.0)]),
            msum(&[(2.0, -0.5), (1.0, 1.5)]),
            ScalarFunc::exponential(0.7).unwrap(),
            ScalarFunc::power_of_monomial_sum(vec![(1.0, 0.5), (3.0, 2.0)], 1.7).unwrap(),
        ];
        for f in &funcs {
            for &t in &[0.01, 1.0, 57.0] {
                assert_eq!(f.kth_degree(1, t).unwrap(), f.degree(t).unwrap());
            }
        }
        // pure power t²: δ^{(2)} = 2t²·2/t² = 4
        assert_eq!(msum(&[(1.0, 2.0)]).kth_degree(2, 0.3).unwrap(), 4.0);
        // exponential: δ^{(2)} = 2β²t²
        let e = ScalarFunc::exponential(2.0).unwrap();
        assert_eq!(e.kth_degree(2, 3.0).unwrap(), 72.0);
        // k = 3 unsupported
        assert!(matches!(
            msum(&[(1.0, 2.0)]).kth_degree(3, 1.0),
            Err(ScalarError::UnsupportedOrder { k: 3 })
        ));
    }

    #[test]
    fn degree_bounds_certified_cases() {
        // constant-degree single power
        let b = msum(&[(1.0, 1.5)]).degree_bounds(1).unwrap();
        assert_eq!((b.inf, b.sup, b.certified), (3.0, 3.0, true));
        // positive sum: [2k₁, 2k_m]
        let b = msum(&[(1.0, -0.5), (2.0, 2.0)]).degree_bounds(1).unwrap();
        assert_eq!((b.inf, b.sup, b.certified), (-1.0, 4.0, true));
        // exponential: certified half-line, finite degree fails
        let b = ScalarFunc::exponential(1.0).unwrap().degree_bounds(1).unwrap();
        assert_eq!((b.inf, b.sup, b.certified), (0.0, f64::INFINITY, true));
        assert!(!b.is_finite());
        // negative outer exponent reverses the interval
        let p = ScalarFunc::power_of_monomial_sum(vec![(1.0, 1.0), (1.0, 2.0)], -1.0).unwrap();
        let b = p.degree_bounds(1).unwrap();
        assert_eq!((b.inf, b.sup, b.certified), (-4.0, -2.0, true));
    }

    #[test]
    fn degree_bounds_section4_operator() {
        // a(s) = (Σ aᵢqᵢ s^{(qᵢ−1)/2})^{p−1}: k=1 bounds are
        // [(q₁−1)(p−1), (q_m−1)(p−1)], exactly.
        let (p, qs) = (3.5, [0.5, 1.0, 2.0]);
        let terms: Vec<(f64, f64)> = qs.iter().map(|&q| (q, (q - 1.0) / 2.0)).collect();
        let a = ScalarFunc::power_of_monomial_sum(terms, p - 1.0).unwrap();
        let b = a.degree_bounds(1).unwrap();
        assert!(b.certified);
        assert_eq!(b.inf, (qs[0] - 1.0) * (p - 1.0));
        assert_eq!(b.sup, (qs[2] - 1.0) * (p - 1.0));
    }

    #[test]
    fn degree_bounds_k2() {
        // pure power: δ^{(2)} = 2k(k−1) constant, certified
        let b = msum(&[(1.0, 2.0)]).degree_bounds(2).unwrap();
        assert_eq!((b.inf, b.sup, b.certified), (4.0, 4.0, true));
        // multi-term sums are sampled, not certified
        let f = msum(&[(1.0, 0.0), (1.0, 1.0)]);
        let b = f.degree_bounds(2).unwrap();
        assert!(!b.certified);
        for &t in &[1e-6, 0.3, 1.0, 8.0, 1e5] {
            assert!(b.inf - 1e-9 <= f.kth_degree(2, t).unwrap());
            assert!(f.kth_degree(2, t).unwrap() <= b.sup + 1e-9);
        }
        // power-of-sum: certified via closed form, contains the pointwise values
        let p = ScalarFunc::power_of_monomial_sum(vec![(1.0, 0.0), (1.0, 1.0)], 2.0).unwrap();
        let b = p.degree_bounds(2).unwrap();
        assert!(b.certified);
        for &t in &[1e-7, 0.5, 1.0, 3.0, 1e7] {
            assert!(b.contains(p.kth_degree(2, t).unwrap()));
        }
    }

    #[test]
    fn degree_derivative_bound_values() {
        // single power: degree constant, bound 0
        assert_eq!(msum(&[(1.0, 5.0)]).degree_derivative_bound().unwrap(), 0.0);
        // exponents {0, 1}: 2(1−0)² = 2
        let f = msum(&[(1.0, 0.0), (1.0, 1.0)]);
        assert_eq!(f.degree_derivative_bound().unwrap(), 2.0);
        // power of the same base with e = 2 scales to 4
        let p = ScalarFunc::power_of_monomial_sum(vec![(1.0, 0.0), (1.0, 1.0)], 2.0).unwrap();
        assert_eq!(p.degree_derivative_bound().unwrap(), 4.0);
        // exponential unsupported
        assert!(ScalarFunc::exponential(1.0).unwrap().degree_derivative_bound().is_err());
    }

    #[test]
    fn degree_derivative_bound_dominates_grid_max() {
        // dense log-grid maximization of 2t·δ'(t) stays under the certificate
        for f in [
            msum(&[(1.0, 0.0), (1.0, 1.0)]),
            msum(&[(0.3, -1.0), (2.0, 0.5), (1.0, 3.0)]),
            ScalarFunc::power_of_monomial_sum(vec![(1.0, 0.0), (1.0, 1.0)], 2.0).unwrap(),
        ] {
            let bound = f.degree_derivative_bound().unwrap();
            let mut grid_max: f64 = 0.0;
            for i in 0..2000 {
                let t = 1e-8 * (1e16_f64).powf(i as f64 / 1999.0);
                let v = 2.0 * f.degree_derivative(t).unwrap();
                assert!(v >= -1e-12, "degree derivative must be nonnegative, got {v}");
                grid_max = grid_max.max(v);
            }
            assert!(grid_max <= bound + 1e-12, "grid max {grid_max} exceeds bound {bound}");
        }
    }

    #[test]
    fn derivatives_match_finite_differences() {
        let funcs = vec![
            msum(&[(1.0, 0.5), (2.0, 1.0)]),
            msum(&[(0.7, -0.5), (1.0, 2.5)]),
            ScalarFunc::exponential(0.8).unwrap(),
            ScalarFunc::power_of_monomial_sum(vec![(2.0, 0.5), (1.0, 2.0)], 1.5).unwrap(),
        ];
        for f in &funcs {
            for &t in &[0.11, 0.9, 3.7, 21.0] {
                let h = t * 1e-6;
                let fd = (f.eval(t + h).unwrap() - f.eval(t - h).unwrap()) / (2.0 * h);
                let cf = f.eval_derivative(t).unwrap();
                assert!(
                    (fd - cf).abs() <= 1e-6 * cf.abs().max(1.0),
                    "derivative mismatch for {f:?} at {t}: fd={fd}, cf={cf}"
                );
                // degree via the definition 2tf'/f
                let by_def = 2.0 * t * cf / f.eval(t).unwrap();
                assert!((f.degree(t).unwrap() - by_def).abs() <= 1e-9 * by_def.abs().max(1.0));
            }
        }
    }

    #[test]
    fn degree_derivative_matches_finite_differences() {
        let funcs = vec![
            msum(&[(1.0, 0.0), (1.0, 1.0)]),
            msum(&[(0.5, -1.5), (2.0, 0.5), (0.1, 4.0)]),
            ScalarFunc::power_of_monomial_sum(vec![(1.0, 0.5), (1.0, 1.5)], 2.5).unwrap(),
        ];
        for f in &funcs {
            for &t in &[0.2, 1.0, 5.0, 90.0] {
                let h = t * 1e-6;
                let fd = (f.degree(t + h).unwrap() - f.degree(t - h).unwrap()) / (2.0 * h);
                let cf = f.degree_derivative(t).unwrap();
                assert!(
                    (t * fd - cf).abs() <= 1e-6 * cf.abs().max(1.0),
                    "t·δ' mismatch at {t}: fd={}, cf={cf}",
                    t * fd
                );
            }
        }
    }

    #[test]
    fn finite_degree_classification() {
        assert!(msum(&[(1.0, 1.0), (1.0, 2.0)]).has_finite_degree());
        assert!(ScalarFunc::power_of_monomial_sum(vec![(1.0, 0.5)], 2.0)
            .unwrap()
            .has_finite_degree());
        assert!(!ScalarFunc::exponential(1.0).unwrap().has_finite_degree());
        assert!(ScalarFunc::exponential(0.0).unwrap().has_finite_degree());
    }
}
