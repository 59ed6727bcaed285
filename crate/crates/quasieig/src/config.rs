//! Config file model for the CLI. TOML with sections for the problem
//! (functions in the scalar grammar), the model geometry, solver
//! tolerances, and the per-subcommand parameters. The full schema is
//! documented in the repository README.

use crate::admissibility::ProblemSpec;
use crate::parse::parse_scalar;
use crate::radial::{ModelGeometry, SolverOptions};
use crate::sweep::SweepConfig;
use serde::Deserialize;
use std::fmt;
use std::fs;
use std::path::Path;

#[derive(Debug)]
pub enum ConfigError {
    Io(std::io::Error),
    Toml(String),
    Invalid(String),
    MissingSection(&'static str),
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ConfigError::Io(e) => write!(f, "cannot read config: {e}"),
            ConfigError::Toml(e) => write!(f, "cannot parse config: {e}"),
            ConfigError::Invalid(msg) => write!(f, "invalid config: {msg}"),
            ConfigError::MissingSection(s) => write!(f, "config is missing the [{s}] section"),
        }
    }
}

impl std::error::Error for ConfigError {}

impl From<std::io::Error> for ConfigError {
    fn from(e: std::io::Error) -> Self {
        ConfigError::Io(e)
    }
}

#[derive(Debug, Clone, Deserialize)]
pub struct ProblemSection {
    pub n: u32,
    /// Model curvature parameter (sectional curvature −κ).
    #[serde(default)]
    pub kappa: f64,
    /// Ricci lower-bound parameter; defaults to (n−1)·κ.
    #[serde(default)]
    pub k: Option<f64>,
    pub lambda: f64,
    pub phi: String,
    pub a: String,
    pub psi: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SolveMode {
    Ivp,
    Annulus,
}

#[derive(Debug, Clone, Deserialize)]
pub struct SolveSection {
    pub mode: SolveMode,
    #[serde(default)]
    pub u0: Option<f64>,
    #[serde(default)]
    pub r_max: Option<f64>,
    #[serde(default)]
    pub r1: Option<f64>,
    #[serde(default)]
    pub r2: Option<f64>,
    #[serde(default)]
    pub u1: Option<f64>,
    #[serde(default)]
    pub u2: Option<f64>,
    #[serde(default)]
    pub abs_tol: Option<f64>,
    #[serde(default)]
    pub rel_tol: Option<f64>,
    #[serde(default)]
    pub max_step: Option<f64>,
    #[serde(default)]
    pub checkpoints: Vec<f64>,
}

#[derive(Debug, Clone, Deserialize)]
pub struct EigenSection {
    pub radius: f64,
    #[serde(default)]
    pub u0: Option<f64>,
    pub lambda_lo: f64,
    pub lambda_hi: f64,
}

#[derive(Debug, Clone, Deserialize)]
pub struct VerifySection {
    pub ball_center: f64,
    pub ball_radius: f64,
    #[serde(default)]
    pub liouville_r_max: Option<f64>,
    #[serde(default)]
    pub growth_bound: Option<f64>,
}

#[derive(Debug, Clone, Deserialize)]
pub struct FileConfig {
    #[serde(default)]
    pub problem: Option<ProblemSection>,
    #[serde(default)]
    pub solve: Option<SolveSection>,
    #[serde(default)]
    pub eigen: Option<EigenSection>,
    #[serde(default)]
    pub verify: Option<VerifySection>,
    #[serde(default)]
    pub sweep: Option<SweepConfig>,
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = fs::read_to_string(path)?;
        toml::from_str(&text).map_err(|e| ConfigError::Toml(e.to_string()))
    }

    pub fn problem_spec(&self) -> Result<ProblemSpec, ConfigError> {
        let section = self.problem.as_ref().ok_or(ConfigError::MissingSection("problem"))?;
        let phi = parse_scalar(&section.phi)
            .map_err(|e| ConfigError::Invalid(format!("phi: {e}")))?;
        let a = parse_scalar(&section.a).map_err(|e| ConfigError::Invalid(format!("a: {e}")))?;
        let psi = parse_scalar(&section.psi)
            .map_err(|e| ConfigError::Invalid(format!("psi: {e}")))?;
        let k = section.k.unwrap_or((section.n.saturating_sub(1)) as f64 * section.kappa);
        ProblemSpec::new(section.n, k, section.lambda, phi, a, psi)
            .map_err(|e| ConfigError::Invalid(e.to_string()))
    }

    pub fn geometry(&self) -> Result<ModelGeometry, ConfigError> {
        let section = self.problem.as_ref().ok_or(ConfigError::MissingSection("problem"))?;
        ModelGeometry::new(section.n, section.kappa)
            .map_err(|e| ConfigError::Invalid(e.to_string()))
    }

    pub fn solver_options(&self) -> SolverOptions {
        let mut opts = SolverOptions::default();
        if let Some(s) = &self.solve {
            if let Some(a) = s.abs_tol {
                opts.abs_tol = a;
            }
            if let Some(r) = s.rel_tol {
                opts.rel_tol = r;
            }
            if let Some(h) = s.max_step {
                if h > 0.0 {
                    opts.max_step = Some(h);
                }
            }
            opts.checkpoints = s.checkpoints.clone();
        }
        opts
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn write_temp(content: &str) -> std::path::PathBuf {
        let mut path = std::env::temp_dir();
        path.push(format!("quasieig-config-test-{}.toml", std::process::id()));
        let mut f = fs::File::create(&path).unwrap();
        f.write_all(content.as_bytes()).unwrap();
        path
    }

    #[test]
    fn loads_problem_and_geometry() {
        let path = write_temp(
            r#"
[problem]
n = 3
kappa = 0.25
lambda = 1.0
phi = "pow(t, 0.0)"
a = "pow(t, 0.0)"
psi = "pow(t, 0.0)"

[solve]
mode = "ivp"
u0 = 1.0
r_max = 2.0
checkpoints = [0.5]
"#,
        );
        let config = FileConfig::load(&path).unwrap();
        let spec = config.problem_spec().unwrap();
        assert_eq!(spec.n, 3);
        assert_eq!(spec.k, 0.5); // (n-1)*kappa
        let geom = config.geometry().unwrap();
        assert_eq!(geom.kappa, 0.25);
        let opts = config.solver_options();
        assert_eq!(opts.checkpoints, vec![0.5]);
        fs::remove_file(path).ok();
    }

    #[test]
    fn scalar_parse_errors_surface_with_field() {
        let path = write_temp(
            r#"
[problem]
n = 3
lambda = 1.0
phi = "pow(t 0.0)"
a = "pow(t, 0.0)"
psi = "pow(t, 0.0)"
"#,
        );
        let config = FileConfig::load(&path).unwrap();
        let err = config.problem_spec().unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("phi") && msg.contains("offset"), "got: {msg}");
        fs::remove_file(path).ok();
    }
}
