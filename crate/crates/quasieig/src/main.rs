//! quasieig CLI: certified admissibility checks, radial solves, eigenvalue
//! shooting, single-spec verification, and parameter sweeps.
//!
//! Exit codes for `check`: 0 = holds, 1 = fails, 2 = unknown.

use clap::{Args, Parser, Subcommand};
use quasieig::admissibility::{full_report, AdmissibilityReport, Verdict};
use quasieig::config::{FileConfig, SolveMode};
use quasieig::radial::{solve_annulus, solve_eigen, solve_ivp, RadialSolution};
use quasieig::sweep::run_sweep;
use quasieig::verifier::{
    gradient_estimate_check, harnack_interval, liouville_probe, spec_id, LiouvilleOptions,
};
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "quasieig",
    about = "Admissibility certification and radial solving for quasilinear eigenproblems \
             div(a(u^2) phi(|grad u|^2) grad u) + lambda psi(u^2) u = 0 on model manifolds"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct CommonArgs {
    /// Path to the TOML config file.
    #[arg(long)]
    config: PathBuf,
    /// Output directory for machine-readable artifacts.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Decide the admissibility conditions and print the certified report.
    Check(CommonArgs),
    /// Solve the radial problem (IVP from the center or annulus two-point).
    Solve(CommonArgs),
    /// Principal Dirichlet eigenvalue by bisection shooting.
    Eigen(CommonArgs),
    /// Solve one spec and measure the estimate, Harnack and Liouville checks.
    Verify(CommonArgs),
    /// Run a parameter sweep producing CSV (and optional SVG) artifacts.
    Sweep {
        #[command(flatten)]
        common: CommonArgs,
        /// Suppress the timestamp header line for byte-identical reruns.
        #[arg(long)]
        no_timestamp: bool,
        /// Worker threads for row computation (rows stay in grid order).
        #[arg(long, default_value_t = 1)]
        jobs: usize,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(msg) => {
            eprintln!("error: {msg}");
            ExitCode::from(3)
        }
    }
}

fn run(cli: Cli) -> Result<ExitCode, String> {
    match cli.command {
        Command::Check(args) => cmd_check(&args),
        Command::Solve(args) => cmd_solve(&args),
        Command::Eigen(args) => cmd_eigen(&args),
        Command::Verify(args) => cmd_verify(&args),
        Command::Sweep { common, no_timestamp, jobs } => cmd_sweep(&common, no_timestamp, jobs),
    }
}

/// Writes to stdout, treating a closed pipe (e.g. `quasieig eigen | head`)
/// as a normal early exit rather than a panic.
fn emit(text: &str) -> Result<(), String> {
    use std::io::Write;
    match std::io::stdout().write_all(text.as_bytes()) {
        Ok(()) => Ok(()),
        Err(e) if e.kind() == std::io::ErrorKind::BrokenPipe => Ok(()),
        Err(e) => Err(e.to_string()),
    }
}

fn emit_line(text: &str) -> Result<(), String> {
    emit(&format!("{text}\n"))
}

fn load(args: &CommonArgs) -> Result<FileConfig, String> {
    FileConfig::load(&args.config).map_err(|e| e.to_string())
}

fn report_text(report: &AdmissibilityReport) -> String {
    let mut out = String::new();
    out.push_str(&format!("overall: {}\n", report.overall));
    out.push_str(&format!("C1: {} (l_phi = {})\n", report.c1.verdict, report.c1.l_phi));
    out.push_str(&format!("C2: {} (gamma = {})\n", report.c2.verdict, report.c2.gamma));
    out.push_str(&format!(
        "C3: {} (Theta = {}{}, I = {})\n",
        report.c3.verdict,
        report.c3.theta_sup,
        if report.c3.vacuous { ", vacuous" } else { "" },
        report.c3.i_class
    ));
    if let Some(d) = &report.derived {
        out.push_str(&format!("derived: theta = {}, alpha = {}\n", d.theta, d.alpha));
    }
    for note in &report.notes {
        out.push_str(&format!("note: {note}\n"));
    }
    for defect in &report.defects {
        out.push_str(&format!("DEFECT: {defect}\n"));
    }
    out
}

fn report_kv(report: &AdmissibilityReport) -> String {
    let mut out = String::new();
    out.push_str("schema = quasieig-report-v1\n");
    out.push_str(&format!("overall = {}\n", report.overall));
    out.push_str(&format!("c1.verdict = {}\n", report.c1.verdict));
    out.push_str(&format!("c1.l_phi = {}\n", report.c1.l_phi));
    out.push_str(&format!("c2.verdict = {}\n", report.c2.verdict));
    out.push_str(&format!("c2.gamma = {}\n", report.c2.gamma));
    out.push_str(&format!("c3.verdict = {}\n", report.c3.verdict));
    out.push_str(&format!("c3.theta_sup = {}\n", report.c3.theta_sup));
    out.push_str(&format!("c3.vacuous = {}\n", report.c3.vacuous));
    out.push_str(&format!("c3.i_class = {}\n", report.c3.i_class));
    if let Some(d) = &report.derived {
        out.push_str(&format!("derived.theta = {}\n", d.theta));
        out.push_str(&format!("derived.alpha = {}\n", d.alpha));
    }
    for (i, note) in report.notes.iter().enumerate() {
        out.push_str(&format!("note.{i} = {note}\n"));
    }
    for (i, defect) in report.defects.iter().enumerate() {
        out.push_str(&format!("defect.{i} = {defect}\n"));
    }
    out
}

fn cmd_check(args: &CommonArgs) -> Result<ExitCode, String> {
    let config = load(args)?;
    let spec = config.problem_spec().map_err(|e| e.to_string())?;
    let report = full_report(&spec).map_err(|e| e.to_string())?;
    emit(&report_text(&report))?;
    if let Some(dir) = &args.out {
        fs::create_dir_all(dir).map_err(|e| e.to_string())?;
        fs::write(dir.join("report.kv"), report_kv(&report)).map_err(|e| e.to_string())?;
    }
    Ok(match report.overall {
        Verdict::Holds => ExitCode::from(0),
        Verdict::Fails => ExitCode::from(1),
        Verdict::Unknown => ExitCode::from(2),
    })
}

/// CSV profile: metadata header block, then (r, u, du, flux) rows in that
/// exact column order.
fn solution_csv(solution: &RadialSolution) -> String {
    let mut out = String::new();
    out.push_str("# quasieig solution csv schema v1\n");
    out.push_str(&format!("# spec: {}\n", spec_id(&solution.spec)));
    out.push_str(&format!(
        "# geometry: n={} kappa={}\n",
        solution.geometry.n, solution.geometry.kappa
    ));
    out.push_str(&format!("# status: {}\n", solution.status));
    out.push_str(&format!(
        "# tolerances: abs={} rel={}\n",
        solution.abs_tol, solution.rel_tol
    ));
    out.push_str("r,u,du,flux\n");
    for j in 0..solution.grid.len() {
        out.push_str(&format!(
            "{},{},{},{}\n",
            solution.grid[j], solution.u[j], solution.du[j], solution.flux[j]
        ));
    }
    out
}

fn write_solution(out: &Option<PathBuf>, name: &str, solution: &RadialSolution) -> Result<(), String> {
    let csv = solution_csv(solution);
    match out {
        Some(dir) => {
            fs::create_dir_all(dir).map_err(|e| e.to_string())?;
            fs::write(Path::new(dir).join(name), csv).map_err(|e| e.to_string())?;
        }
        None => emit(&csv)?,
    }
    Ok(())
}

fn cmd_solve(args: &CommonArgs) -> Result<ExitCode, String> {
    let config = load(args)?;
    let spec = config.problem_spec().map_err(|e| e.to_string())?;
    let geometry = config.geometry().map_err(|e| e.to_string())?;
    let opts = config.solver_options();
    let section = config.solve.as_ref().ok_or("config is missing the [solve] section")?;
    let solution = match section.mode {
        SolveMode::Ivp => {
            let u0 = section.u0.ok_or("[solve] ivp mode needs u0")?;
            let r_max = section.r_max.ok_or("[solve] ivp mode needs r_max")?;
            solve_ivp(&geometry, &spec, u0, r_max, &opts).map_err(|e| e.to_string())?
        }
        SolveMode::Annulus => {
            let r1 = section.r1.ok_or("[solve] annulus mode needs r1")?;
            let r2 = section.r2.ok_or("[solve] annulus mode needs r2")?;
            let u1 = section.u1.ok_or("[solve] annulus mode needs u1")?;
            let u2 = section.u2.ok_or("[solve] annulus mode needs u2")?;
            solve_annulus(&geometry, &spec, r1, r2, (u1, u2), &opts).map_err(|e| e.to_string())?
        }
    };
    eprintln!("status: {}", solution.status);
    write_solution(&args.out, "solution.csv", &solution)?;
    Ok(ExitCode::from(0))
}

fn cmd_eigen(args: &CommonArgs) -> Result<ExitCode, String> {
    let config = load(args)?;
    let spec = config.problem_spec().map_err(|e| e.to_string())?;
    let geometry = config.geometry().map_err(|e| e.to_string())?;
    let opts = config.solver_options();
    let section = config.eigen.as_ref().ok_or("config is missing the [eigen] section")?;
    let u0 = section.u0.unwrap_or(1.0);
    let (lambda, solution) = solve_eigen(
        &geometry,
        &spec,
        section.radius,
        u0,
        (section.lambda_lo, section.lambda_hi),
        &opts,
    )
    .map_err(|e| e.to_string())?;
    emit_line(&format!("lambda = {lambda}"))?;
    write_solution(&args.out, "eigenfunction.csv", &solution)?;
    Ok(ExitCode::from(0))
}

fn cmd_verify(args: &CommonArgs) -> Result<ExitCode, String> {
    let config = load(args)?;
    let spec = config.problem_spec().map_err(|e| e.to_string())?;
    let geometry = config.geometry().map_err(|e| e.to_string())?;
    let opts = config.solver_options();
    let section = config.verify.as_ref().ok_or("config is missing the [verify] section")?;
    let solve_section = config.solve.as_ref().ok_or("config is missing the [solve] section")?;

    let solution = match solve_section.mode {
        SolveMode::Ivp => {
            let u0 = solve_section.u0.ok_or("[solve] ivp mode needs u0")?;
            let r_max = solve_section
                .r_max
                .unwrap_or(section.ball_center + 2.0 * section.ball_radius);
            solve_ivp(&geometry, &spec, u0, r_max, &opts).map_err(|e| e.to_string())?
        }
        SolveMode::Annulus => {
            let r1 = solve_section.r1.ok_or("[solve] annulus mode needs r1")?;
            let r2 = solve_section.r2.ok_or("[solve] annulus mode needs r2")?;
            let u1 = solve_section.u1.ok_or("[solve] annulus mode needs u1")?;
            let u2 = solve_section.u2.ok_or("[solve] annulus mode needs u2")?;
            solve_annulus(&geometry, &spec, r1, r2, (u1, u2), &opts).map_err(|e| e.to_string())?
        }
    };

    let report = full_report(&spec).map_err(|e| e.to_string())?;
    emit_line(&format!("admissibility: {}", report.overall))?;
    emit_line(&format!("solve status: {}", solution.status))?;

    match gradient_estimate_check(&solution, section.ball_center, section.ball_radius) {
        Ok(est) => emit_line(&format!(
            "estimate: sup|u'|/u = {}, bound shape = {}, fitted C = {}",
            est.sup_ratio, est.bound_shape, est.fitted_c
        ))?,
        Err(e) => emit_line(&format!("estimate: unavailable ({e})"))?,
    }
    let lo = (section.ball_center - section.ball_radius).max(solution.r_min());
    let hi = (section.ball_center + section.ball_radius).min(solution.r_max());
    match harnack_interval(&solution, lo, hi, section.ball_radius) {
        Ok(h) => emit_line(&format!("harnack: ratio = {}, exponent = {}", h.ratio, h.exponent))?,
        Err(e) => emit_line(&format!("harnack: unavailable ({e})"))?,
    }
    if spec.lambda != 0.0 && geometry.kappa == 0.0 {
        if let Some(r_max) = section.liouville_r_max {
            let mut liopts = LiouvilleOptions::default();
            if let Some(g) = section.growth_bound {
                liopts.growth_bound = g;
            }
            match liouville_probe(&geometry, &spec, r_max, &liopts) {
                Ok(rep) => emit_line(&format!(
                    "liouville: {}{}",
                    rep.branch,
                    if rep.red_flag { " [RED FLAG]" } else { "" }
                ))?,
                Err(e) => emit_line(&format!("liouville: unavailable ({e})"))?,
            }
        }
    }
    if let Some(dir) = &args.out {
        fs::create_dir_all(dir).map_err(|e| e.to_string())?;
        fs::write(dir.join("report.kv"), report_kv(&report)).map_err(|e| e.to_string())?;
        fs::write(dir.join("solution.csv"), solution_csv(&solution)).map_err(|e| e.to_string())?;
    }
    Ok(ExitCode::from(0))
}

fn cmd_sweep(common: &CommonArgs, no_timestamp: bool, jobs: usize) -> Result<ExitCode, String> {
    let config = load(common)?;
    let sweep = config.sweep.ok_or("config is missing the [sweep] section")?;
    let out_dir = common.out.clone().unwrap_or_else(|| PathBuf::from("."));
    let outputs = run_sweep(&sweep, &out_dir, no_timestamp, jobs).map_err(|e| e.to_string())?;
    emit_line(&format!("rows: {}", outputs.rows))?;
    emit_line(&format!("csv: {}", outputs.csv_path.display()))?;
    for p in &outputs.plot_paths {
        emit_line(&format!("plot: {}", p.display()))?;
    }
    if outputs.stability_violations > 0 {
        emit_line(&format!("fitted_c stability violations: {}", outputs.stability_violations))?;
    }
    Ok(ExitCode::from(0))
}
