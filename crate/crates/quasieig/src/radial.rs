//! Radial reduction and solvers on rotationally symmetric model manifolds.
//!
//! On the model `dr² + w(r)² g_{S^{n−1}}` with `w(r) = r` (flat) or
//! `w(r) = sinh(√κ r)/√κ` (curvature −κ), a radial solution of
//! `div(a(u²) φ(|∇u|²) ∇u) + λ ψ(u²) u = 0` satisfies
//!
//! ```text
//!     (J a(u²) φ(u'²) u')' = −λ J ψ(u²) u,       J(r) = w(r)^{n−1}.
//! ```
//!
//! The solvers integrate the first-order system in the state `(u, F)` where
//! `F = J a(u²) φ(u'²) u'` is the flux, recovering `u' = invert_flux(u²,
//! F/J)` at every evaluation. This is the load-bearing design choice: the
//! equation is conservative in `F`, the center singularity (J(0) = 0) never
//! requires dividing by `J` at 0, and condition C1 — `δ_φ > −1` — is
//! precisely the certificate that the map `v ↦ a(s) φ(v²) v` is strictly
//! increasing and hence invertible. Degenerate gradient points (`u' = 0`
//! with `φ` singular or vanishing at 0) are handled by an exact zero branch:
//! `flux_map(s, 0) = 0` and `invert_flux(s, 0) = 0` without evaluating φ.
//!
//! Time stepping is an adaptive embedded Dormand–Prince 4(5) pair with
//! per-step error control; eigenvalues are found by bisection on λ with the
//! first-zero location as the (monotone, but not smooth) indicator.

use crate::admissibility::ProblemSpec;
use crate::scalar::{ScalarError, ScalarFunc};
use std::fmt;

#[derive(Debug, Clone, PartialEq)]
pub enum SolverError {
    Scalar(ScalarError),
    /// The flux map is not strictly increasing; C1 fails.
    C1Violation { detail: String },
    DimensionMismatch { geometry_n: u32, spec_n: u32 },
    InvalidArgument(String),
    /// Step size underflowed (stiffness); carries the last good radius.
    StepSizeUnderflow { r: f64 },
    TooManySteps { r: f64 },
    /// Eigen bracket does not straddle; carries the first-zero locations
    /// observed at the two endpoints (None = no zero before R).
    BracketNotStraddling { zero_at_lo: Option<f64>, zero_at_hi: Option<f64> },
    /// Two-point shooting could not bracket or meet the target boundary value.
    ShootingFailed(String),
    NonFiniteState { r: f64 },
    OutsideDomain { r: f64, lo: f64, hi: f64 },
}

impl fmt::Display for SolverError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SolverError::Scalar(e) => write!(f, "{e}"),
            SolverError::C1Violation { detail } => {
                write!(f, "non-monotone flux map (C1 violation): {detail}")
            }
            SolverError::DimensionMismatch { geometry_n, spec_n } => {
                write!(f, "geometry dimension {geometry_n} != problem dimension {spec_n}")
            }
            SolverError::InvalidArgument(msg) => write!(f, "{msg}"),
            SolverError::StepSizeUnderflow { r } => {
                write!(f, "step size underflow near r = {r}")
            }
            SolverError::TooManySteps { r } => write!(f, "step budget exhausted at r = {r}"),
            SolverError::BracketNotStraddling { zero_at_lo, zero_at_hi } => write!(
                f,
                "eigenvalue bracket does not straddle: first zero at lower endpoint {zero_at_lo:?}, at upper endpoint {zero_at_hi:?}"
            ),
            SolverError::ShootingFailed(msg) => write!(f, "shooting failed: {msg}"),
            SolverError::NonFiniteState { r } => write!(f, "non-finite state at r = {r}"),
            SolverError::OutsideDomain { r, lo, hi } => {
                write!(f, "r = {r} outside solution domain [{lo}, {hi}]")
            }
        }
    }
}

impl std::error::Error for SolverError {}

impl From<ScalarError> for SolverError {
    fn from(e: ScalarError) -> Self {
        SolverError::Scalar(e)
    }
}

/// Rotationally symmetric model manifold of dimension n with sectional
/// curvature `−kappa ≤ 0`. The warp is `w(r) = r` for κ = 0 and
/// `sinh(√κ r)/√κ` otherwise; both satisfy w(0) = 0, w'(0) = 1. The Ricci
/// curvature is `−(n−1)κ`, so the lower-bound parameter is `K = (n−1)κ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelGeometry {
    pub n: u32,
    pub kappa: f64,
}

impl ModelGeometry {
    pub fn new(n: u32, kappa: f64) -> Result<Self, SolverError> {
        if n < 2 {
            return Err(SolverError::InvalidArgument(format!("dimension must be >= 2, got {n}")));
        }
        if !kappa.is_finite() || kappa < 0.0 {
            return Err(SolverError::InvalidArgument(format!(
                "curvature parameter kappa must be >= 0, got {kappa}"
            )));
        }
        Ok(ModelGeometry { n, kappa })
    }

    pub fn warp(&self, r: f64) -> f64 {
        if self.kappa == 0.0 {
            r
        } else {
            let sk = self.kappa.sqrt();
            (sk * r).sinh() / sk
        }
    }

    pub fn warp_prime(&self, r: f64) -> f64 {
        if self.kappa == 0.0 {
            1.0
        } else {
            (self.kappa.sqrt() * r).cosh()
        }
    }

    /// Volume density `J(r) = w(r)^{n−1}`.
    pub fn volume_density(&self, r: f64) -> f64 {
        self.warp(r).powi(self.n as i32 - 1)
    }

    /// `J'(r) = (n−1) w^{n−2} w'`.
    pub fn volume_density_prime(&self, r: f64) -> f64 {
        (self.n - 1) as f64 * self.warp(r).powi(self.n as i32 - 2) * self.warp_prime(r)
    }

    /// `∫₀^r J dρ`, exact in the flat case, composite Simpson otherwise.
    /// Only used near the center, where the panels resolve J easily.
    pub fn volume_integral(&self, r: f64) -> f64 {
        if self.kappa == 0.0 {
            return r.powi(self.n as i32) / self.n as f64;
        }
        let panel = (0.5 / ((self.n - 1) as f64 * self.kappa.sqrt() + 1.0)).min(r);
        let panels = (r / panel).ceil().max(1.0) as usize;
        let mut total = 0.0;
        for i in 0..panels {
            let a = r * i as f64 / panels as f64;
            let b = r * (i + 1) as f64 / panels as f64;
            total += simpson(|x| self.volume_density(x), a, b, 64);
        }
        total
    }

    /// Ricci lower bound `K = (n−1)κ` (so that `Ric = −K` exactly here).
    pub fn ricci_lower_bound(&self) -> f64 {
        (self.n - 1) as f64 * self.kappa
    }
}

fn simpson<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, halves: usize) -> f64 {
    let n = 2 * halves;
    let h = (b - a) / n as f64;
    let mut sum = f(a) + f(b);
    for i in 1..n {
        let x = a + h * i as f64;
        sum += f(x) * if i % 2 == 1 { 4.0 } else { 2.0 };
    }
    sum * h / 3.0
}

/// Radial flux integrand `a(s) φ(v²) v`, with the exact zero branch at
/// v = 0. Strictly increasing in v whenever C1 holds, since
/// `d/dv [φ(v²) v] = φ(v²)(1 + δ_φ(v²))`.
pub fn flux_map(spec: &ProblemSpec, s: f64, v: f64) -> Result<f64, SolverError> {
    if v == 0.0 {
        return Ok(0.0);
    }
    let a = spec.a.eval(s)?;
    let phi = spec.phi.eval(v * v)?;
    Ok(a * phi * v)
}

/// `d/dv` of the flux map at v ≠ 0: `a(s) φ(v²)(1 + δ_φ(v²))`.
fn flux_map_slope(spec: &ProblemSpec, a: f64, v: f64) -> Result<f64, SolverError> {
    let t = v * v;
    Ok(a * spec.phi.eval(t)? * (1.0 + spec.phi.degree(t)?))
}

/// Leading small-v behaviour of `φ(v²) v ≈ c₁ v^{2k₁+1}`, used as the
/// Newton starting guess (exact for single-power φ).
fn phi_leading(phi: &ScalarFunc) -> (f64, f64) {
    match phi {
        ScalarFunc::MonomialSum(m) => (m.terms()[0].coeff, m.terms()[0].exponent),
        ScalarFunc::Exponential { .. } => (1.0, 0.0),
        ScalarFunc::PowerOfMonomialSum { base, exponent } => {
            (base.terms()[0].coeff.powf(*exponent), base.min_exponent() * exponent)
        }
    }
}

/// Inverts the flux map: the unique v with `a(s) φ(v²) v = m`. Bracketing
/// expansion followed by safeguarded Newton/bisection to relative tolerance
/// 1e−12; odd symmetry `invert(−m) = −invert(m)` is enforced exactly by
/// solving for |m| and restoring the sign. A certified `inf δ_φ ≤ −1`, or a
/// nonpositive slope encountered along the way, is a hard C1 violation.
pub fn invert_flux(spec: &ProblemSpec, s: f64, m: f64) -> Result<f64, SolverError> {
    if m == 0.0 {
        return Ok(0.0);
    }
    let bounds = spec.phi.degree_bounds(1)?;
    if bounds.certified && bounds.inf <= -1.0 {
        return Err(SolverError::C1Violation {
            detail: format!("certified inf delta_phi = {} <= -1", bounds.inf),
        });
    }
    let a = spec.a.eval(s)?;
    if !(a > 0.0) || !a.is_finite() {
        return Err(SolverError::NonFiniteState { r: f64::NAN });
    }
    let target = m.abs();
    let sign = m.signum();

    let (c1, k1) = phi_leading(&spec.phi);
    let q = 2.0 * k1 + 1.0; // > 0 under C1
    let mut v = (target / (a * c1)).powf(1.0 / q);
    if !v.is_finite() || v <= 0.0 {
        v = 1.0;
    }

    let eval = |v: f64| -> Result<f64, SolverError> {
        let phi = spec.phi.eval(v * v)?;
        Ok(a * phi * v)
    };

    // Bracket [lo, hi] with g(lo) <= target <= g(hi).
    let g0 = eval(v)?;
    let (mut lo, mut hi, mut g_lo, mut g_hi);
    if g0 < target {
        lo = v;
        g_lo = g0;
        hi = v;
        g_hi = g0;
        let mut steps = 0;
        while g_hi < target {
            hi *= 2.0;
            let g = eval(hi)?;
            if g <= g_hi {
                return Err(SolverError::C1Violation {
                    detail: format!("flux map decreased from {g_hi} to {g} as v grew to {hi}"),
                });
            }
            g_hi = g;
            steps += 1;
            if steps > 400 {
                return Err(SolverError::ShootingFailed(format!(
                    "flux bracket expansion exhausted at v = {hi}"
                )));
            }
        }
    } else {
        hi = v;
        g_hi = g0;
        lo = v;
        g_lo = g0;
        let mut steps = 0;
        while g_lo > target {
            lo *= 0.5;
            let g = eval(lo)?;
            if g >= g_lo {
                return Err(SolverError::C1Violation {
                    detail: format!("flux map increased from {g_lo} to {g} as v shrank to {lo}"),
                });
            }
            g_lo = g;
            steps += 1;
            if steps > 400 {
                return Err(SolverError::ShootingFailed(format!(
                    "flux bracket contraction exhausted at v = {lo}"
                )));
            }
        }
    }
    let _ = (g_lo, g_hi);

    // Safeguarded Newton within the bracket.
    let mut v = 0.5 * (lo + hi);
    if eval(lo)? == target {
        v = lo;
    } else if eval(hi)? == target {
        v = hi;
    }
    for _ in 0..200 {
        let g = eval(v)?;
        let resid = g - target;
        if resid.abs() <= 4.0 * f64::EPSILON * target {
            break;
        }
        if resid > 0.0 {
            hi = v.min(hi);
        } else {
            lo = v.max(lo);
        }
        let slope = flux_map_slope(spec, a, v)?;
        if !(slope > 0.0) {
            return Err(SolverError::C1Violation {
                detail: format!("flux map slope {slope} <= 0 at v = {v}"),
            });
        }
        let mut next = v - resid / slope;
        if !(next > lo && next < hi) {
            next = 0.5 * (lo + hi);
        }
        if (next - v).abs() <= 1e-13 * v.abs() {
            v = next;
            break;
        }
        v = next;
    }
    Ok(sign * v)
}

/// Solve termination state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SolveStatus {
    Completed,
    /// u fell to the positivity floor at this radius.
    HitZero { r: f64 },
    /// u exceeded the blow-up ceiling at this radius.
    BlewUp { r: f64 },
}

impl SolveStatus {
    pub fn is_completed(&self) -> bool {
        matches!(self, SolveStatus::Completed)
    }
}

impl fmt::Display for SolveStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SolveStatus::Completed => write!(f, "completed"),
            SolveStatus::HitZero { r } => write!(f, "hit_zero at r = {r}"),
            SolveStatus::BlewUp { r } => write!(f, "blew_up at r = {r}"),
        }
    }
}

#[derive(Debug, Clone)]
pub struct SolverOptions {
    pub abs_tol: f64,
    pub rel_tol: f64,
    /// Upper bound on the step size (None = unrestricted).
    pub max_step: Option<f64>,
    /// Radii forced to land exactly on the stored grid.
    pub checkpoints: Vec<f64>,
    /// Stop with HitZero when u ≤ hit_zero_factor · u_start.
    pub hit_zero_factor: f64,
    /// Stop with BlewUp when u ≥ blowup_factor · u_start.
    pub blowup_factor: f64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            abs_tol: 1e-10,
            rel_tol: 1e-8,
            max_step: None,
            checkpoints: Vec::new(),
            hit_zero_factor: 1e-12,
            blowup_factor: 1e12,
        }
    }
}

/// A solved radial profile on a strictly increasing grid. `u` is positive
/// at every stored point; `flux` is `J a(u²) φ(u'²) u'`.
#[derive(Debug, Clone)]
pub struct RadialSolution {
    pub geometry: ModelGeometry,
    pub spec: ProblemSpec,
    pub grid: Vec<f64>,
    pub u: Vec<f64>,
    pub du: Vec<f64>,
    pub flux: Vec<f64>,
    pub status: SolveStatus,
    pub abs_tol: f64,
    pub rel_tol: f64,
}

impl RadialSolution {
    pub fn r_min(&self) -> f64 {
        self.grid[0]
    }

    pub fn r_max(&self) -> f64 {
        *self.grid.last().unwrap()
    }

    pub fn min_u(&self) -> f64 {
        self.u.iter().cloned().fold(f64::INFINITY, f64::min)
    }

    pub fn max_u(&self) -> f64 {
        self.u.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
    }

    /// `f = log u` at a grid index.
    pub fn log_u(&self, j: usize) -> f64 {
        self.u[j].ln()
    }

    /// `Ĥ = |∇u|²/u² = (u'/u)²` at a grid index.
    pub fn grad_log_sq(&self, j: usize) -> f64 {
        let ratio = self.du[j] / self.u[j];
        ratio * ratio
    }

    /// Interpolates `(u, u', flux)` at an interior radius. u and F are cubic
    /// Hermite in their own derivatives (`u'` stored; `F' = −λ J ψ(u²) u`);
    /// u' is then recovered from the flux relation so the three outputs stay
    /// mutually consistent.
    pub fn sample(&self, r: f64) -> Result<(f64, f64, f64), SolverError> {
        let (lo, hi) = (self.r_min(), self.r_max());
        if !(r >= lo && r <= hi) {
            return Err(SolverError::OutsideDomain { r, lo, hi });
        }
        let i = match self.grid.binary_search_by(|g| g.partial_cmp(&r).unwrap()) {
            Ok(exact) => return Ok((self.u[exact], self.du[exact], self.flux[exact])),
            Err(ins) => ins - 1,
        };
        let (ra, rb) = (self.grid[i], self.grid[i + 1]);
        let h = rb - ra;
        let th = (r - ra) / h;
        let hermite = |ya: f64, da: f64, yb: f64, db: f64| {
            let t2 = th * th;
            let t3 = t2 * th;
            (2.0 * t3 - 3.0 * t2 + 1.0) * ya
                + (t3 - 2.0 * t2 + th) * h * da
                + (-2.0 * t3 + 3.0 * t2) * yb
                + (t3 - t2) * h * db
        };
        let u = hermite(self.u[i], self.du[i], self.u[i + 1], self.du[i + 1]);
        let fprime = |j: usize| -> Result<f64, SolverError> {
            let rj = self.grid[j];
            let g = self.geometry.volume_density(rj)
                * self.spec.psi.eval(self.u[j] * self.u[j])?
                * self.u[j];
            Ok(-self.spec.lambda * g)
        };
        let flux = hermite(self.flux[i], fprime(i)?, self.flux[i + 1], fprime(i + 1)?);
        let du = if r == 0.0 {
            0.0
        } else {
            invert_flux(&self.spec, u * u, flux / self.geometry.volume_density(r))?
        };
        Ok((u, du, flux))
    }

    /// Maximum normalized flux-balance residual over consecutive grid
    /// intervals: `|F(r_b) − F(r_a) + λ ∫_a^b J ψ(u²) u dr|` with the
    /// integral from a derivative-corrected trapezoid on the stored values,
    /// normalized by the local solution scale.
    pub fn flux_residual(&self) -> Result<f64, SolverError> {
        let lam = self.spec.lambda;
        let mut worst = 0.0_f64;
        let mut g_vals = Vec::with_capacity(self.grid.len());
        let mut gp_vals = Vec::with_capacity(self.grid.len());
        for j in 0..self.grid.len() {
            let r = self.grid[j];
            let u = self.u[j];
            let s = u * u;
            let jv = self.geometry.volume_density(r);
            let psi = self.psi_or_zero(s)?;
            let g = jv * psi * u;
            // g' = J' ψ u + J u' ψ (δ_ψ + 1)
            let dpsi_term = if psi == 0.0 || s == 0.0 {
                0.0
            } else {
                self.spec.psi.degree(s)? + 1.0
            };
            let gp = self.geometry.volume_density_prime(r) * psi * u
                + jv * self.du[j] * psi * dpsi_term;
            g_vals.push(g);
            gp_vals.push(gp);
        }
        for j in 0..self.grid.len() - 1 {
            let h = self.grid[j + 1] - self.grid[j];
            let quad = 0.5 * h * (g_vals[j] + g_vals[j + 1])
                + h * h / 12.0 * (gp_vals[j] - gp_vals[j + 1]);
            let resid = (self.flux[j + 1] - self.flux[j] + lam * quad).abs();
            let scale = 1.0
                + self.flux[j].abs().max(self.flux[j + 1].abs())
                + lam.abs() * h * (g_vals[j].abs() + g_vals[j + 1].abs());
            worst = worst.max(resid / scale);
        }
        Ok(worst)
    }

    fn psi_or_zero(&self, s: f64) -> Result<f64, SolverError> {
        // At the prepended center node u is finite, so s > 0 whenever psi
        // can diverge; s = 0 only occurs with nonnegative exponents.
        match self.spec.psi.eval(s) {
            Ok(v) => Ok(v),
            Err(ScalarError::DomainAtZero { .. }) => Ok(0.0),
            Err(e) => Err(e.into()),
        }
    }
}

/// Right-hand side of the (u, F) system.
struct RadialOde<'a> {
    geometry: &'a ModelGeometry,
    spec: &'a ProblemSpec,
}

impl RadialOde<'_> {
    fn rhs(&self, r: f64, y: [f64; 2]) -> Result<[f64; 2], SolverError> {
        let [u, f] = y;
        if !u.is_finite() || !f.is_finite() {
            return Err(SolverError::NonFiniteState { r });
        }
        let s = u * u;
        let j = self.geometry.volume_density(r);
        let du = invert_flux(self.spec, s, f / j)?;
        let psi = self.spec.psi.eval(s)?;
        let df = -self.spec.lambda * j * psi * u;
        if !du.is_finite() || !df.is_finite() {
            return Err(SolverError::NonFiniteState { r });
        }
        Ok([du, df])
    }
}

// Dormand-Prince 5(4) coefficients.
const DP_C: [f64; 7] = [0.0, 0.2, 0.3, 0.8, 8.0 / 9.0, 1.0, 1.0];
const DP_A: [[f64; 6]; 7] = [
    [0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [0.2, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [
        19372.0 / 6561.0,
        -25360.0 / 2187.0,
        64448.0 / 6561.0,
        -212.0 / 729.0,
        0.0,
        0.0,
    ],
    [
        9017.0 / 3168.0,
        -355.0 / 33.0,
        46732.0 / 5247.0,
        49.0 / 176.0,
        -5103.0 / 18656.0,
        0.0,
    ],
    [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
    ],
];
/// 5th-order weights (identical to the last A row; FSAL).
const DP_B5: [f64; 7] =
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0, 0.0];
/// Embedded 4th-order weights.
const DP_B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

/// (5th-order solution, embedded error estimate, last-stage derivative).
type DpStep = ([f64; 2], [f64; 2], [f64; 2]);

/// One Dormand-Prince step of size h from (r, y). Returns the 5th-order
/// solution and the embedded error estimate.
fn dp_step(
    ode: &RadialOde,
    r: f64,
    y: [f64; 2],
    h: f64,
    k1: [f64; 2],
) -> Result<DpStep, SolverError> {
    let mut k = [[0.0; 2]; 7];
    k[0] = k1;
    for stage in 1..7 {
        let mut ys = y;
        for (j, kj) in k.iter().enumerate().take(stage) {
            for c in 0..2 {
                ys[c] += h * DP_A[stage][j] * kj[c];
            }
        }
        k[stage] = ode.rhs(r + DP_C[stage] * h, ys)?;
    }
    let mut y5 = y;
    let mut y4 = y;
    for (j, kj) in k.iter().enumerate() {
        for c in 0..2 {
            y5[c] += h * DP_B5[j] * kj[c];
            y4[c] += h * DP_B4[j] * kj[c];
        }
    }
    let err = [y5[0] - y4[0], y5[1] - y4[1]];
    // FSAL: k[6] is the derivative at (r+h, y5).
    Ok((y5, err, k[6]))
}

fn error_norm(err: [f64; 2], y: [f64; 2], y_new: [f64; 2], abs_tol: f64, rel_tol: f64) -> f64 {
    let mut sum = 0.0;
    for c in 0..2 {
        let sc = abs_tol + rel_tol * y[c].abs().max(y_new[c].abs());
        if sc <= 0.0 {
            if err[c] != 0.0 {
                return f64::INFINITY;
            }
            continue;
        }
        let e = err[c] / sc;
        sum += e * e;
    }
    (sum / 2.0).sqrt()
}

struct Trace {
    grid: Vec<f64>,
    u: Vec<f64>,
    du: Vec<f64>,
    flux: Vec<f64>,
}

impl Trace {
    fn push(&mut self, ode: &RadialOde, r: f64, y: [f64; 2]) -> Result<(), SolverError> {
        let du = invert_flux(ode.spec, y[0] * y[0], y[1] / ode.geometry.volume_density(r))?;
        self.grid.push(r);
        self.u.push(y[0]);
        self.du.push(du);
        self.flux.push(y[1]);
        Ok(())
    }
}

/// Integrates the (u, F) system from (r_start, y_start) to r_end (either
/// direction), recording every accepted step endpoint plus the mandatory
/// checkpoints. Stop thresholds are absolute u-values here; callers derive
/// them from the start value and the option factors.
#[allow(clippy::too_many_arguments)]
fn integrate(
    ode: &RadialOde,
    r_start: f64,
    y_start: [f64; 2],
    r_end: f64,
    opts: &SolverOptions,
    stop_lo: f64,
    stop_hi: f64,
    trace: &mut Trace,
) -> Result<(SolveStatus, f64, [f64; 2]), SolverError> {
    let dir = (r_end - r_start).signum();
    if dir == 0.0 {
        return Ok((SolveStatus::Completed, r_start, y_start));
    }
    let span = (r_end - r_start).abs();
    let hmax = opts.max_step.unwrap_or(f64::INFINITY).min(span);
    let mut marks: Vec<f64> = opts
        .checkpoints
        .iter()
        .cloned()
        .filter(|&c| (c - r_start) * dir > 1e-300 && (r_end - c) * dir > 0.0)
        .collect();
    marks.sort_by(|a, b| if dir > 0.0 { a.partial_cmp(b).unwrap() } else { b.partial_cmp(a).unwrap() });
    let mut next_mark = 0usize;

    let mut r = r_start;
    let mut y = y_start;
    let mut k1 = ode.rhs(r, y)?;
    let mut h = dir * (span / 1000.0).min(hmax).min(1.0);
    let mut rejected = false;

    for _step in 0..20_000_000_u64 {
        if (r_end - r) * dir <= 0.0 {
            return Ok((SolveStatus::Completed, r, y));
        }
        // Never step past the next mandatory point or the end.
        let mut target = r_end;
        while next_mark < marks.len() && (marks[next_mark] - r) * dir <= 1e-300 {
            next_mark += 1;
        }
        if next_mark < marks.len() && (marks[next_mark] - target) * dir < 0.0 {
            target = marks[next_mark];
        }
        if (h.abs() - (target - r).abs()).is_sign_positive() {
            h = target - r;
        }
        if h.abs() < 1e-14 * r.abs().max(1.0) {
            // Degenerate zero crossings (u ~ (r*−r)^α with α < 1) squeeze
            // the step to nothing before u can reach the stop floor; at this
            // resolution the crossing radius is r to machine precision.
            let soft_zero = (stop_lo.abs() * y_start[0].abs()).sqrt();
            if y[0] > 0.0 && y[0] <= soft_zero && k1[0] < 0.0 {
                return Ok((SolveStatus::HitZero { r }, r, y));
            }
            return Err(SolverError::StepSizeUnderflow { r });
        }

        match dp_step(ode, r, y, h, k1) {
            Ok((y_new, err, k_last)) => {
                let norm = error_norm(err, y, y_new, opts.abs_tol, opts.rel_tol);
                if norm <= 1.0 {
                    // Accepted. Check the u-thresholds before committing.
                    if y_new[0] <= stop_lo {
                        let (rc, yc) = locate_crossing(ode, r, y, k1, h, stop_lo)?;
                        trace.push(ode, rc, yc)?;
                        return Ok((SolveStatus::HitZero { r: rc }, rc, yc));
                    }
                    if y_new[0] >= stop_hi {
                        let (rc, yc) = locate_crossing(ode, r, y, k1, h, stop_hi)?;
                        trace.push(ode, rc, yc)?;
                        return Ok((SolveStatus::BlewUp { r: rc }, rc, yc));
                    }
                    r += h;
                    // A single large leap onto a mandatory point can land a
                    // few ulp off (the subtraction target − r is only exact
                    // when r is within a factor 2 of the target); snap so
                    // marks and the endpoint are consumed exactly.
                    if r != target
                        && (target - r).abs() <= 8.0 * f64::EPSILON * target.abs().max(r.abs())
                    {
                        r = target;
                    }
                    y = y_new;
                    k1 = k_last;
                    trace.push(ode, r, y)?;
                    let fac = if norm == 0.0 {
                        5.0
                    } else {
                        (0.9 * norm.powf(-0.2)).clamp(0.2, if rejected { 1.0 } else { 5.0 })
                    };
                    h = (h * fac).clamp(-hmax, hmax);
                    rejected = false;
                } else {
                    rejected = true;
                    h *= (0.9 * norm.powf(-0.2)).max(0.1);
                }
            }
            Err(SolverError::Scalar(_)) | Err(SolverError::NonFiniteState { .. }) => {
                // A stage left the evaluable region; retry with a smaller step.
                rejected = true;
                h *= 0.5;
            }
            Err(e) => return Err(e),
        }
    }
    Err(SolverError::TooManySteps { r })
}

/// Bisects the step fraction to locate u = threshold inside an accepted
/// step, using single embedded-pair substeps from the step start.
fn locate_crossing(
    ode: &RadialOde,
    r: f64,
    y: [f64; 2],
    k1: [f64; 2],
    h: f64,
    threshold: f64,
) -> Result<(f64, [f64; 2]), SolverError> {
    let above = y[0] > threshold;
    let mut lo = 0.0;
    let mut hi = 1.0;
    let mut y_hi = dp_step(ode, r, y, h, k1)?.0;
    for _ in 0..80 {
        let mid = 0.5 * (lo + hi);
        let y_mid = dp_step(ode, r, y, mid * h, k1)?.0;
        if (y_mid[0] > threshold) == above {
            lo = mid;
        } else {
            hi = mid;
            y_hi = y_mid;
        }
        if (hi - lo) * h.abs() < 1e-13 * (r.abs() + h.abs()) {
            break;
        }
    }
    // Report the state just past the crossing (first point at/beyond it).
    Ok((r + hi * h, y_hi))
}

fn check_compatible(geometry: &ModelGeometry, spec: &ProblemSpec) -> Result<(), SolverError> {
    if geometry.n != spec.n {
        return Err(SolverError::DimensionMismatch { geometry_n: geometry.n, spec_n: spec.n });
    }
    let bounds = spec.phi.degree_bounds(1)?;
    if bounds.certified && bounds.inf <= -1.0 {
        return Err(SolverError::C1Violation {
            detail: format!(
                "certified inf delta_phi = {} <= -1; the flux map is not invertible",
                bounds.inf
            ),
        });
    }
    Ok(())
}

/// Integrates the regular initial-value problem from the center: u(0) = u0,
/// u'(0) = 0. The center singularity (J(0) = 0) is bypassed with a series
/// start at `r₀ = ε·min(1, 1/√(|λ|+1))`, ε = 1e−6·min(R, 1): the flux there
/// is the exact moment integral `F(r₀) = −λ ψ(u0²) u0 ∫₀^{r₀} J`, and u is
/// advanced to r₀ by quadrature of the inverted flux.
pub fn solve_ivp(
    geometry: &ModelGeometry,
    spec: &ProblemSpec,
    u0: f64,
    r_max: f64,
    opts: &SolverOptions,
) -> Result<RadialSolution, SolverError> {
    check_compatible(geometry, spec)?;
    if !(u0 > 0.0) {
        return Err(SolverError::InvalidArgument(format!("u0 must be positive, got {u0}")));
    }
    if !(r_max > 0.0) {
        return Err(SolverError::InvalidArgument(format!("r_max must be positive, got {r_max}")));
    }
    let eps = 1e-6 * r_max.min(1.0);
    let r0 = eps * (1.0 / (spec.lambda.abs() + 1.0).sqrt()).min(1.0);

    let s0 = u0 * u0;
    let source = -spec.lambda * spec.psi.eval(s0)? * u0;
    let f0 = source * geometry.volume_integral(r0);
    // u(r₀) = u0 + ∫₀^{r₀} v(ρ) dρ with v from the leading flux profile.
    let u_start = if spec.lambda == 0.0 {
        u0
    } else {
        let integrand = |rho: f64| -> f64 {
            if rho == 0.0 {
                return 0.0;
            }
            let f = source * geometry.volume_integral(rho);
            invert_flux(spec, s0, f / geometry.volume_density(rho)).unwrap_or(0.0)
        };
        u0 + simpson(integrand, 0.0, r0, 32)
    };

    let ode = RadialOde { geometry, spec };
    let mut trace = Trace { grid: Vec::new(), u: Vec::new(), du: Vec::new(), flux: Vec::new() };
    // Exact center point: u'(0) = 0 and J(0) = 0 force zero flux.
    trace.grid.push(0.0);
    trace.u.push(u0);
    trace.du.push(0.0);
    trace.flux.push(0.0);
    trace.push(&ode, r0, [u_start, f0])?;

    let (status, _, _) = integrate(
        &ode,
        r0,
        [u_start, f0],
        r_max,
        opts,
        opts.hit_zero_factor * u0,
        opts.blowup_factor * u0,
        &mut trace,
    )?;

    Ok(RadialSolution {
        geometry: *geometry,
        spec: spec.clone(),
        grid: trace.grid,
        u: trace.u,
        du: trace.du,
        flux: trace.flux,
        status,
        abs_tol: opts.abs_tol,
        rel_tol: opts.rel_tol,
    })
}

/// Principal Dirichlet eigenpair on B(o, R) by bisection on λ, using the
/// first-zero location as the monotone indicator: λ too small leaves u
/// positive through R, λ too large drives u to zero before R. Converges
/// when the bracket width is ≤ 1e−10·(1+|λ|). The shooting integrations run
/// at eigen-grade tolerances (1e−13 abs / 1e−12 rel) so the λ resolution is
/// not limited by ODE error; the stated convergence width requires it.
pub fn solve_eigen(
    geometry: &ModelGeometry,
    spec: &ProblemSpec,
    r_max: f64,
    u0: f64,
    bracket: (f64, f64),
    opts: &SolverOptions,
) -> Result<(f64, RadialSolution), SolverError> {
    check_compatible(geometry, spec)?;
    let (mut lo, mut hi) = bracket;
    if !(lo < hi) {
        return Err(SolverError::InvalidArgument(format!(
            "eigen bracket must satisfy lo < hi, got ({lo}, {hi})"
        )));
    }
    let mut shoot_opts = opts.clone();
    shoot_opts.abs_tol = 1e-13;
    shoot_opts.rel_tol = 1e-12;

    let first_zero = |lambda: f64| -> Result<Option<f64>, SolverError> {
        let mut s = spec.clone();
        s.lambda = lambda;
        let sol = solve_ivp(geometry, &s, u0, r_max, &shoot_opts)?;
        Ok(match sol.status {
            SolveStatus::HitZero { r } => Some(r),
            _ => None,
        })
    };

    let zero_at_lo = first_zero(lo)?;
    let zero_at_hi = first_zero(hi)?;
    if zero_at_lo.is_some() || zero_at_hi.is_none() {
        return Err(SolverError::BracketNotStraddling { zero_at_lo, zero_at_hi });
    }

    while hi - lo > 1e-10 * (1.0 + 0.5 * (lo.abs() + hi.abs())) {
        let mid = 0.5 * (lo + hi);
        if first_zero(mid)?.is_some() {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    let lambda_star = 0.5 * (lo + hi);

    // Final profile from the zero-free side, at the caller's tolerances but
    // no looser than the shooting grade for consistency.
    let mut final_spec = spec.clone();
    final_spec.lambda = lo;
    let mut final_opts = opts.clone();
    final_opts.abs_tol = final_opts.abs_tol.min(shoot_opts.abs_tol);
    final_opts.rel_tol = final_opts.rel_tol.min(shoot_opts.rel_tol);
    let solution = solve_ivp(geometry, &final_spec, u0, r_max, &final_opts)?;
    Ok((lambda_star, solution))
}

/// Two-point problem on the annulus [r1, r2] with positive boundary data.
/// Shooting on the flux at the smaller-value boundary (integrating toward
/// the larger value keeps the profile in the amplifying, well-conditioned
/// direction), bisection/secant on the opposite-boundary mismatch. For
/// λ = 0 the flux is exactly constant and a zero shooting parameter
/// reproduces a constant profile exactly.
pub fn solve_annulus(
    geometry: &ModelGeometry,
    spec: &ProblemSpec,
    r1: f64,
    r2: f64,
    boundary: (f64, f64),
    opts: &SolverOptions,
) -> Result<RadialSolution, SolverError> {
    check_compatible(geometry, spec)?;
    let (u1, u2) = boundary;
    if !(r1 > 0.0 && r2 > r1) {
        return Err(SolverError::InvalidArgument(format!(
            "annulus requires 0 < r1 < r2, got ({r1}, {r2})"
        )));
    }
    if !(u1 > 0.0 && u2 > 0.0) {
        return Err(SolverError::InvalidArgument(format!(
            "boundary values must be positive, got ({u1}, {u2})"
        )));
    }

    // Start at the boundary with the smaller value; the profile grows along
    // the integration and shooting errors are not amplified by cancellation.
    let (r_start, u_start, r_end, u_target) =
        if u1 <= u2 { (r1, u1, r2, u2) } else { (r2, u2, r1, u1) };
    let dir = (r_end - r_start).signum();

    let ode = RadialOde { geometry, spec };
    let stop_lo = u1.min(u2) * 1e-15;
    let stop_hi = u1.max(u2) / 1e-15;

    let shoot = |c: f64, trace: Option<&mut Trace>| -> Result<(f64, SolveStatus), SolverError> {
        let mut local = Trace { grid: Vec::new(), u: Vec::new(), du: Vec::new(), flux: Vec::new() };
        let tr = match trace {
            Some(t) => t,
            None => &mut local,
        };
        tr.push(&ode, r_start, [u_start, c])?;
        let (status, _, y) =
            integrate(&ode, r_start, [u_start, c], r_end, opts, stop_lo, stop_hi, tr)?;
        let mismatch = match status {
            SolveStatus::Completed => y[0] - u_target,
            SolveStatus::HitZero { .. } => -u_target,
            SolveStatus::BlewUp { .. } => y[0],
        };
        Ok((mismatch, status))
    };

    // The mismatch is dir-increasing in c. m(0) tells which side to expand.
    let (m0, _) = shoot(0.0, None)?;
    let tol_u = (10.0 * opts.abs_tol + 1e-9 * u_target).max(f64::EPSILON * u_target);
    let c_star = if m0.abs() <= tol_u {
        0.0
    } else {
        // scale from the linearized slope through the boundary data
        let v_lin = (u2 - u1) / (r2 - r1);
        let scale = if v_lin == 0.0 {
            geometry.volume_density(r_start) * u_start.max(1e-30)
        } else {
            (flux_map(spec, u_start * u_start, v_lin)? * geometry.volume_density(r_start)).abs()
        }
        .max(1e-300);
        let sign = if m0 < 0.0 { dir } else { -dir };
        let mut c = sign * scale * 1e-3;
        let mut prev = 0.0;
        let mut found = None;
        for _ in 0..200 {
            let (m, _) = shoot(c, None)?;
            if (m > 0.0) != (m0 > 0.0) || m == 0.0 {
                found = Some((prev, c, m));
                break;
            }
            prev = c;
            c *= 2.0;
        }
        let Some((c_a, c_b, m_b)) = found else {
            return Err(SolverError::ShootingFailed(format!(
                "no sign change up to shooting flux {c}"
            )));
        };
        let m_a = if c_a == 0.0 { m0 } else { shoot(c_a, None)?.0 };

        // Orient so m(c_lo) ≤ 0 ≤ m(c_hi) (mismatch order, not c order).
        let (mut c_lo, mut m_lo, mut c_hi, mut m_hi) =
            if m_a <= m_b { (c_a, m_a, c_b, m_b) } else { (c_b, m_b, c_a, m_a) };

        // Illinois-damped regula falsi with bisection fallback.
        let mut best = (c_lo, m_lo.abs());
        let mut side = 0i32;
        for _ in 0..200 {
            let c_mid = {
                let secant = c_hi - m_hi * (c_hi - c_lo) / (m_hi - m_lo);
                if secant.is_finite() && (secant - c_lo) * (secant - c_hi) < 0.0 {
                    secant
                } else {
                    0.5 * (c_lo + c_hi)
                }
            };
            let (m_mid, _) = shoot(c_mid, None)?;
            if m_mid.abs() < best.1 {
                best = (c_mid, m_mid.abs());
            }
            if m_mid.abs() <= tol_u
                || (c_hi - c_lo).abs() <= 1e-15 * c_lo.abs().max(c_hi.abs()).max(1e-300)
            {
                break;
            }
            if m_mid > 0.0 {
                c_hi = c_mid;
                m_hi = m_mid;
                if side == 1 {
                    m_lo *= 0.5;
                }
                side = 1;
            } else {
                c_lo = c_mid;
                m_lo = m_mid;
                if side == -1 {
                    m_hi *= 0.5;
                }
                side = -1;
            }
        }
        let (m_best, _) = shoot(best.0, None)?;
        if m_best.abs() > tol_u.max(1e-6 * u_target) {
            return Err(SolverError::ShootingFailed(format!(
                "boundary mismatch {m_best} at flux {} exceeds tolerance",
                best.0
            )));
        }
        best.0
    };

    // Final integration with the trace recorded.
    let mut trace = Trace { grid: Vec::new(), u: Vec::new(), du: Vec::new(), flux: Vec::new() };
    let (_, status) = shoot(c_star, Some(&mut trace))?;
    if !status.is_completed() {
        return Err(SolverError::ShootingFailed(format!(
            "final integration terminated early: {status}"
        )));
    }
    if dir < 0.0 {
        trace.grid.reverse();
        trace.u.reverse();
        trace.du.reverse();
        trace.flux.reverse();
    }
    if trace.u.iter().any(|&v| !(v > 0.0)) {
        return Err(SolverError::ShootingFailed(
            "no positive solution in the shooting bracket".to_string(),
        ));
    }
    Ok(RadialSolution {
        geometry: *geometry,
        spec: spec.clone(),
        grid: trace.grid,
        u: trace.u,
        du: trace.du,
        flux: trace.flux,
        status,
        abs_tol: opts.abs_tol,
        rel_tol: opts.rel_tol,
    })
}
