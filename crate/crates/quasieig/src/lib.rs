//! quasieig — a numerical laboratory for quasilinear eigenproblems
//! `div(a(u²) φ(|∇u|²) ∇u) + λ ψ(u²) u = 0` on rotationally symmetric
//! model manifolds.
//!
//! The crate has four layers:
//!
//! - [`scalar`]: the closed family of scalar functions (monomial sums,
//!   their real powers, exponentials) with an exact degree calculus and
//!   certified global bounds. [`parse`] provides the canonical text form.
//! - [`admissibility`]: certified three-valued verdicts for the structural
//!   conditions C1–C3 behind the gradient estimate, the derived constants,
//!   and the closed-form parameter range for the polynomial p-Laplace
//!   family.
//! - [`radial`]: reduction to a singular radial ODE in flux form, with
//!   initial-value, two-point and eigenvalue-shooting solvers.
//! - [`verifier`]: measurement harness for the quantitative consequences —
//!   gradient-ratio bounds, Harnack oscillation, the Liouville dichotomy —
//!   plus a deterministic sweep runner with CSV/SVG output ([`sweep`]).

// Validation guards are written `!(x > 0.0)` on purpose: NaN must fail them.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod admissibility;
pub mod config;
pub mod parse;
pub mod radial;
pub mod scalar;
pub mod svg;
pub mod sweep;
pub mod verifier;

pub use admissibility::{
    check_c1, check_c2, check_c3, classify_i, derived_constants, full_report, recognize_poly,
    thm4_range, AdmissibilityReport, IClass, LambdaSign, PolyPLaplaceSpec, ProblemSpec, Verdict,
};
pub use parse::{format_scalar, parse_scalar};
pub use radial::{
    flux_map, invert_flux, solve_annulus, solve_eigen, solve_ivp, ModelGeometry, RadialSolution,
    SolveStatus, SolverError, SolverOptions,
};
pub use scalar::{DegreeBounds, MonomialSum, ScalarError, ScalarFunc};
pub use verifier::{
    gradient_estimate_check, harnack_check, liouville_probe, EstimateResult, HarnackResult,
    LiouvilleBranch, LiouvilleReport,
};
