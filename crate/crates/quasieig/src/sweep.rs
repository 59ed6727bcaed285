//! Deterministic parameter-sweep harness: admissibility, solve, and
//! estimate/Harnack/Liouville measurements over a parameter grid, one CSV
//! row per (spec, R), with optional SVG plots.
//!
//! Determinism contract: identical config produces byte-identical CSV
//! except for the timestamp header line, which `no_timestamp` suppresses.
//! Rows iterate the grids in fixed nested order (p, q, r, λ, n, κ, u0, R);
//! with `jobs > 1` the rows are computed in parallel but buffered and
//! written in grid order. Per-row failures land in the `error` column and
//! never abort the sweep.

use crate::admissibility::{full_report, ProblemSpec, Verdict};
use crate::radial::{solve_annulus, solve_ivp, ModelGeometry, RadialSolution, SolverOptions};
use crate::svg::LinePlot;
use crate::verifier::{
    gradient_estimate_check, harnack_interval, liouville_probe, LiouvilleOptions,
};
use rayon::prelude::*;
use serde::Deserialize;
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

#[derive(Debug)]
pub enum SweepError {
    Config(String),
    Io(std::io::Error),
}

impl fmt::Display for SweepError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SweepError::Config(msg) => write!(f, "sweep config error: {msg}"),
            SweepError::Io(e) => write!(f, "sweep io error: {e}"),
        }
    }
}

impl std::error::Error for SweepError {}

impl From<std::io::Error> for SweepError {
    fn from(e: std::io::Error) -> Self {
        SweepError::Io(e)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SweepMode {
    /// Regular center problem on [0, (factor+2)·R].
    Ivp,
    /// Two-point problem on [inner_factor·R, outer_factor·R].
    Annulus,
}

/// Annulus family: domain factors scale with R; boundary values are given
/// per R-grid entry (parallel arrays).
#[derive(Debug, Clone, Deserialize)]
pub struct AnnulusFamily {
    pub inner_factor: f64,
    pub outer_factor: f64,
    pub u_inner: Vec<f64>,
    pub u_outer: Vec<f64>,
}

fn default_stability_factor() -> f64 {
    4.0
}

fn default_u0() -> Vec<f64> {
    vec![1.0]
}

/// Sweep description: the single-power family `Δ_p u^q + λ u^r = 0` over
/// parameter grids, solved and measured at each ball radius R.
#[derive(Debug, Clone, Deserialize)]
pub struct SweepConfig {
    pub label: String,
    pub mode: SweepMode,
    pub p: Vec<f64>,
    pub q: Vec<f64>,
    pub r_exp: Vec<f64>,
    pub lambda: Vec<f64>,
    pub n: Vec<u32>,
    pub kappa: Vec<f64>,
    #[serde(default = "default_u0")]
    pub u0: Vec<f64>,
    pub radius: Vec<f64>,
    /// Ball center c = factor · R (0 puts the ball at the origin).
    #[serde(default)]
    pub ball_center_factor: f64,
    #[serde(default)]
    pub annulus: Option<AnnulusFamily>,
    #[serde(default)]
    pub abs_tol: Option<f64>,
    #[serde(default)]
    pub rel_tol: Option<f64>,
    /// 0 or absent = unrestricted step size.
    #[serde(default)]
    pub max_step: Option<f64>,
    /// Harness policy for fitted-C stability across the R-sweep (reported
    /// in the CSV footer, not an abort condition).
    #[serde(default = "default_stability_factor")]
    pub fitted_c_stability_factor: f64,
    /// Sweeps that intentionally cross admissibility thresholds must say so;
    /// otherwise every grid point has to pass the checker up front.
    #[serde(default)]
    pub negative_test: bool,
    /// Probe horizon for the Liouville dichotomy (0 = skip the probe).
    #[serde(default)]
    pub liouville_r_max: f64,
    #[serde(default)]
    pub emit_plots: bool,
}

/// One grid point, in iteration order.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridPoint {
    pub p: f64,
    pub q: f64,
    pub r_exp: f64,
    pub lambda: f64,
    pub n: u32,
    pub kappa: f64,
    pub u0: f64,
    pub radius: f64,
    pub radius_index: usize,
}

#[derive(Debug, Clone, Default)]
pub struct SweepRow {
    pub point: Option<GridPoint>,
    pub verdict: String,
    pub gamma: Option<f64>,
    pub theta: Option<f64>,
    pub alpha: Option<f64>,
    pub i_class: String,
    pub solve_status: String,
    pub sup_ratio: Option<f64>,
    pub bound_shape: Option<f64>,
    pub fitted_c: Option<f64>,
    pub harnack_ratio: Option<f64>,
    pub harnack_exponent: Option<f64>,
    pub liouville: String,
    pub error: String,
    pub profile: Option<(Vec<f64>, Vec<f64>)>,
}

pub struct SweepOutputs {
    pub csv_path: PathBuf,
    pub plot_paths: Vec<PathBuf>,
    pub rows: usize,
    pub stability_violations: usize,
}

const CSV_COLUMNS: &str = "p,q,r_exp,lambda,n,kappa,u0,radius,verdict,gamma,theta,alpha,i_class,\
solve_status,sup_ratio,bound_shape,fitted_c,harnack_ratio,harnack_exponent,liouville,error";

impl SweepConfig {
    fn validate(&self) -> Result<(), SweepError> {
        // An empty grid is well-formed: it produces a header-only CSV.
        if self.mode == SweepMode::Annulus {
            let fam = self
                .annulus
                .as_ref()
                .ok_or_else(|| SweepError::Config("annulus mode needs [sweep.annulus]".into()))?;
            if fam.u_inner.len() != self.radius.len() || fam.u_outer.len() != self.radius.len() {
                return Err(SweepError::Config(format!(
                    "annulus boundary arrays must match the radius grid length {}",
                    self.radius.len()
                )));
            }
            if !(fam.inner_factor > 0.0 && fam.outer_factor > fam.inner_factor) {
                return Err(SweepError::Config(
                    "annulus factors must satisfy 0 < inner < outer".into(),
                ));
            }
        }
        if !self.negative_test {
            // all fixed parameters must pass admissibility up front
            let mut failures = Vec::new();
            for point in self.spec_combos() {
                let spec = build_spec(&point)?;
                let report = full_report(&spec)
                    .map_err(|e| SweepError::Config(format!("checker failed: {e}")))?;
                if report.overall != Verdict::Holds {
                    failures.push(format!(
                        "(p={}, q={}, r={}, lambda={}, n={}) -> {}",
                        point.p, point.q, point.r_exp, point.lambda, point.n, report.overall
                    ));
                }
            }
            if !failures.is_empty() {
                return Err(SweepError::Config(format!(
                    "grid points fail admissibility (flag the sweep with negative_test to allow): {}",
                    failures.join("; ")
                )));
            }
        }
        Ok(())
    }

    /// Spec-level combos (no u0/R), used for pre-validation.
    fn spec_combos(&self) -> Vec<GridPoint> {
        let mut out = Vec::new();
        for &p in &self.p {
            for &q in &self.q {
                for &r_exp in &self.r_exp {
                    for &lambda in &self.lambda {
                        for &n in &self.n {
                            for &kappa in &self.kappa {
                                out.push(GridPoint {
                                    p,
                                    q,
                                    r_exp,
                                    lambda,
                                    n,
                                    kappa,
                                    u0: 1.0,
                                    radius: 1.0,
                                    radius_index: 0,
                                });
                            }
                        }
                    }
                }
            }
        }
        out
    }

    /// Full grid in deterministic nested order.
    pub fn grid(&self) -> Vec<GridPoint> {
        let mut out = Vec::new();
        for &p in &self.p {
            for &q in &self.q {
                for &r_exp in &self.r_exp {
                    for &lambda in &self.lambda {
                        for &n in &self.n {
                            for &kappa in &self.kappa {
                                for &u0 in &self.u0 {
                                    for (ri, &radius) in self.radius.iter().enumerate() {
                                        out.push(GridPoint {
                                            p,
                                            q,
                                            r_exp,
                                            lambda,
                                            n,
                                            kappa,
                                            u0,
                                            radius,
                                            radius_index: ri,
                                        });
                                    }
                                }
                            }
                        }
                    }
                }
            }
        }
        out
    }

    fn solver_options(&self) -> SolverOptions {
        let mut opts = SolverOptions::default();
        if let Some(a) = self.abs_tol {
            opts.abs_tol = a;
        }
        if let Some(r) = self.rel_tol {
            opts.rel_tol = r;
        }
        if let Some(h) = self.max_step {
            if h > 0.0 {
                opts.max_step = Some(h);
            }
        }
        opts
    }
}

fn build_spec(point: &GridPoint) -> Result<ProblemSpec, SweepError> {
    let k = (point.n - 1) as f64 * point.kappa;
    // coefficient signed with q so that a·q > 0 holds for either sign of q
    ProblemSpec::poly_p_laplace(
        point.n,
        k,
        point.lambda,
        point.p,
        &[(point.q.signum(), point.q)],
        point.r_exp,
    )
    .map_err(|e| SweepError::Config(format!("cannot build spec: {e}")))
}

fn compute_row(config: &SweepConfig, point: GridPoint) -> SweepRow {
    let mut row = SweepRow { point: Some(point), ..Default::default() };
    let spec = match build_spec(&point) {
        Ok(s) => s,
        Err(e) => {
            row.error = e.to_string();
            return row;
        }
    };
    let geometry = match ModelGeometry::new(point.n, point.kappa) {
        Ok(g) => g,
        Err(e) => {
            row.error = e.to_string();
            return row;
        }
    };

    match full_report(&spec) {
        Ok(report) => {
            row.verdict = report.overall.to_string();
            row.gamma = Some(report.c2.gamma);
            row.i_class = report.c3.i_class.to_string();
            if let Some(d) = report.derived {
                row.theta = Some(d.theta);
                row.alpha = Some(d.alpha);
            }
            if !report.defects.is_empty() {
                row.error = format!("checker defect: {}", report.defects.join("; "));
            }
        }
        Err(e) => {
            row.error = format!("admissibility: {e}");
            return row;
        }
    }

    let opts = config.solver_options();
    let center = config.ball_center_factor * point.radius;
    let solved: Result<RadialSolution, String> = match config.mode {
        SweepMode::Ivp => {
            let r_solve = center + 2.0 * point.radius;
            solve_ivp(&geometry, &spec, point.u0, r_solve, &opts).map_err(|e| e.to_string())
        }
        SweepMode::Annulus => {
            let fam = config.annulus.as_ref().expect("validated");
            let r1 = fam.inner_factor * point.radius;
            let r2 = fam.outer_factor * point.radius;
            let boundary = (fam.u_inner[point.radius_index], fam.u_outer[point.radius_index]);
            solve_annulus(&geometry, &spec, r1, r2, boundary, &opts).map_err(|e| e.to_string())
        }
    };

    match solved {
        Ok(solution) => {
            row.solve_status = solution.status.to_string();
            match gradient_estimate_check(&solution, center, point.radius) {
                Ok(est) => {
                    row.sup_ratio = Some(est.sup_ratio);
                    row.bound_shape = Some(est.bound_shape);
                    row.fitted_c = Some(est.fitted_c);
                }
                Err(e) => push_err(&mut row.error, &format!("estimate: {e}")),
            }
            let lo = (center - point.radius).max(solution.r_min());
            let hi = (center + point.radius).min(solution.r_max());
            match harnack_interval(&solution, lo, hi, point.radius) {
                Ok(h) => {
                    row.harnack_ratio = Some(h.ratio);
                    row.harnack_exponent = Some(h.exponent);
                }
                Err(e) => push_err(&mut row.error, &format!("harnack: {e}")),
            }
            row.profile = Some((solution.grid.clone(), solution.u.clone()));
        }
        Err(e) => push_err(&mut row.error, &format!("solve: {e}")),
    }

    if point.lambda != 0.0 && point.kappa == 0.0 && config.liouville_r_max > 0.0 {
        let liopts = LiouvilleOptions { u0: point.u0, ..Default::default() };
        match liouville_probe(&geometry, &spec, config.liouville_r_max, &liopts) {
            Ok(report) => {
                row.liouville = report.branch.to_string();
                if report.red_flag {
                    push_err(&mut row.error, "liouville red flag");
                }
            }
            Err(e) => push_err(&mut row.error, &format!("liouville: {e}")),
        }
    }
    row
}

fn push_err(slot: &mut String, msg: &str) {
    if !slot.is_empty() {
        slot.push_str("; ");
    }
    slot.push_str(msg);
}

fn fmt_opt(v: Option<f64>) -> String {
    match v {
        Some(x) => format!("{x}"),
        None => String::new(),
    }
}

/// Computes all rows, in grid order. `jobs = 1` is fully sequential; larger
/// values use a local thread pool, with rows still emitted in order.
pub fn sweep_rows(config: &SweepConfig, jobs: usize) -> Result<Vec<SweepRow>, SweepError> {
    config.validate()?;
    let grid = config.grid();
    if jobs <= 1 {
        Ok(grid.into_iter().map(|pt| compute_row(config, pt)).collect())
    } else {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build()
            .map_err(|e| SweepError::Config(format!("thread pool: {e}")))?;
        Ok(pool.install(|| grid.into_par_iter().map(|pt| compute_row(config, pt)).collect()))
    }
}

/// Renders the CSV artifact: versioned header comments, the column row, one
/// data row per grid point, and the fitted-C stability footer.
pub fn render_csv(config: &SweepConfig, rows: &[SweepRow], no_timestamp: bool) -> String {
    let mut out = String::new();
    out.push_str("# quasieig sweep csv schema v1\n");
    out.push_str(&format!("# label: {}\n", config.label));
    if !no_timestamp {
        let now = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
        out.push_str(&format!("# generated: {now}\n"));
    }
    out.push_str(&format!(
        "# grids: p={:?} q={:?} r_exp={:?} lambda={:?} n={:?} kappa={:?} u0={:?} radius={:?}\n",
        config.p,
        config.q,
        config.r_exp,
        config.lambda,
        config.n,
        config.kappa,
        config.u0,
        config.radius
    ));
    out.push_str(CSV_COLUMNS);
    out.push('\n');
    for row in rows {
        let pt = row.point.expect("rows carry their grid point");
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}\n",
            pt.p,
            pt.q,
            pt.r_exp,
            pt.lambda,
            pt.n,
            pt.kappa,
            pt.u0,
            pt.radius,
            row.verdict,
            fmt_opt(row.gamma),
            fmt_opt(row.theta),
            fmt_opt(row.alpha),
            row.i_class,
            row.solve_status,
            fmt_opt(row.sup_ratio),
            fmt_opt(row.bound_shape),
            fmt_opt(row.fitted_c),
            fmt_opt(row.harnack_ratio),
            fmt_opt(row.harnack_exponent),
            row.liouville,
            escape_csv(&row.error),
        ));
    }
    for line in stability_footer(config, rows) {
        out.push_str(&line);
        out.push('\n');
    }
    out
}

fn escape_csv(s: &str) -> String {
    if s.contains(',') || s.contains('"') {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// Per-family fitted-C max/min across the R grid, for λ = 0 families.
fn stability_footer(config: &SweepConfig, rows: &[SweepRow]) -> Vec<String> {
    let mut lines = Vec::new();
    let per_family = config.radius.len();
    if per_family == 0 {
        return lines;
    }
    for family in rows.chunks(per_family) {
        let Some(pt) = family[0].point else { continue };
        if pt.lambda != 0.0 {
            continue;
        }
        let values: Vec<f64> = family.iter().filter_map(|r| r.fitted_c).filter(|c| *c > 0.0).collect();
        if values.len() < 2 {
            continue;
        }
        let max = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let min = values.iter().cloned().fold(f64::INFINITY, f64::min);
        let ratio = max / min;
        lines.push(format!(
            "# fitted_c_stability: p={} q={} n={} kappa={} maxmin={} limit={} ok={}",
            pt.p,
            pt.q,
            pt.n,
            pt.kappa,
            ratio,
            config.fitted_c_stability_factor,
            ratio <= config.fitted_c_stability_factor
        ));
    }
    lines
}

/// Counts families whose fitted-C spread exceeds the configured factor.
pub fn stability_violations(config: &SweepConfig, rows: &[SweepRow]) -> usize {
    stability_footer(config, rows).iter().filter(|l| l.ends_with("ok=false")).count()
}

/// Runs the sweep and writes the artifacts under `out_dir`.
pub fn run_sweep(
    config: &SweepConfig,
    out_dir: &Path,
    no_timestamp: bool,
    jobs: usize,
) -> Result<SweepOutputs, SweepError> {
    let rows = sweep_rows(config, jobs)?;
    fs::create_dir_all(out_dir)?;
    let csv_path = out_dir.join(format!("{}.csv", config.label));
    fs::write(&csv_path, render_csv(config, &rows, no_timestamp))?;

    let mut plot_paths = Vec::new();
    if config.emit_plots {
        let fitted = fitted_c_plot(config, &rows);
        let p1 = out_dir.join(format!("{}_fitted_c.svg", config.label));
        fs::write(&p1, fitted.render())?;
        plot_paths.push(p1);

        let profiles = profile_plot(config, &rows);
        let p2 = out_dir.join(format!("{}_profiles.svg", config.label));
        fs::write(&p2, profiles.render())?;
        plot_paths.push(p2);
    }

    Ok(SweepOutputs {
        csv_path,
        plot_paths,
        rows: rows.len(),
        stability_violations: stability_violations(config, &rows),
    })
}

fn fitted_c_plot(config: &SweepConfig, rows: &[SweepRow]) -> LinePlot {
    let per_family = config.radius.len().max(1);
    let mut series = Vec::new();
    for family in rows.chunks(per_family) {
        let Some(pt) = family[0].point else { continue };
        let pts: Vec<(f64, f64)> = family
            .iter()
            .filter_map(|r| r.point.map(|p| p.radius).zip(r.fitted_c))
            .collect();
        if !pts.is_empty() {
            series.push((
                format!("p={} q={} r={} l={} n={} k={}", pt.p, pt.q, pt.r_exp, pt.lambda, pt.n, pt.kappa),
                pts,
            ));
        }
    }
    LinePlot {
        title: format!("{}: fitted C vs R", config.label),
        x_label: "R".to_string(),
        y_label: "fitted C".to_string(),
        log_x: true,
        series,
    }
}

fn profile_plot(config: &SweepConfig, rows: &[SweepRow]) -> LinePlot {
    let mut series = Vec::new();
    for row in rows.iter() {
        if series.len() >= 12 {
            break;
        }
        if let (Some(pt), Some((grid, u))) = (row.point, &row.profile) {
            series.push((
                format!("R={} p={} l={}", pt.radius, pt.p, pt.lambda),
                grid.iter().cloned().zip(u.iter().cloned()).collect(),
            ));
        }
    }
    LinePlot {
        title: format!("{}: u profiles", config.label),
        x_label: "r".to_string(),
        y_label: "u".to_string(),
        log_x: false,
        series,
    }
}
