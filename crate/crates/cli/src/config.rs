//! TOML lab configuration: the problem sections from the core crate plus
//! solver and output settings.

use crate::error::CliError;
use bnlab_core::config::{
    BetaChoice, BubbleSection, CoefficientSection, DomainSection, ProblemConfig, SequenceSection, SetupSection,
};
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverSection {
    #[serde(default = "default_lambda")]
    pub lambda: f64,
    /// Relative tolerance of the shooting integrator.
    #[serde(default = "default_tol")]
    pub tol: f64,
    /// Weight exponent of the `I4` column in `bubbles`; defaults to `σ`/`γ`.
    #[serde(default)]
    pub theta: Option<f64>,
}

fn default_lambda() -> f64 {
    1.0
}

fn default_tol() -> f64 {
    1e-12
}

impl Default for SolverSection {
    fn default() -> Self {
        Self {
            lambda: default_lambda(),
            tol: default_tol(),
            theta: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    #[default]
    Json,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    /// Format printed on stdout.
    #[serde(default)]
    pub format: Format,
    /// Directory receiving `<command>.csv` and `<command>.json`.
    #[serde(default)]
    pub dir: Option<PathBuf>,
    #[serde(default)]
    pub plot: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LabConfig {
    pub setup: SetupSection,
    pub domain: DomainSection,
    pub coefficients: CoefficientSection,
    pub sequence: SequenceSection,
    #[serde(default)]
    pub bubble: BubbleSection,
    #[serde(default)]
    pub solver: SolverSection,
    #[serde(default)]
    pub output: OutputSection,
}

impl LabConfig {
    pub fn reference() -> Self {
        let p = ProblemConfig::reference_cusp6();
        Self {
            setup: p.setup,
            domain: p.domain,
            coefficients: p.coefficients,
            sequence: p.sequence,
            bubble: p.bubble,
            solver: SolverSection::default(),
            output: OutputSection::default(),
        }
    }

    pub fn parse(text: &str) -> Result<Self, CliError> {
        let cfg: Self = toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn problem(&self) -> ProblemConfig {
        ProblemConfig {
            setup: self.setup,
            domain: self.domain,
            coefficients: self.coefficients.clone(),
            sequence: self.sequence,
            bubble: self.bubble,
        }
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let s = &self.solver;
        if !(s.tol > 0.0 && s.tol < 1.0) {
            return Err(CliError::Config(format!("solver.tol must lie in (0, 1), got {}", s.tol)));
        }
        if !(s.lambda >= 0.0 && s.lambda.is_finite()) {
            return Err(CliError::Config(format!("solver.lambda must be non-negative, got {}", s.lambda)));
        }
        if let Some(t) = s.theta {
            if !(t > 0.0 && t.is_finite()) {
                return Err(CliError::Config(format!("solver.theta must be positive, got {t}")));
            }
        }
        let q = &self.sequence;
        if !(q.eps0 > 0.0 && q.ratio > 0.0 && q.ratio < 1.0 && q.delta > 0.0) {
            return Err(CliError::Config(
                "sequence needs eps0 > 0, delta > 0 and ratio in (0, 1)".to_string(),
            ));
        }
        if !(self.bubble.plateau > 0.0 && self.bubble.plateau < 1.0) {
            return Err(CliError::Config(format!(
                "bubble.plateau must lie in (0, 1), got {}",
                self.bubble.plateau
            )));
        }
        Ok(())
    }
}

/// Command-line overrides of configuration values.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub n: Option<usize>,
    pub p: Option<f64>,
    pub alpha: Option<f64>,
    pub beta: Option<f64>,
    pub sigma: Option<f64>,
    pub gamma: Option<f64>,
    pub lambda: Option<f64>,
    pub eps_start: Option<f64>,
    pub eps_ratio: Option<f64>,
    pub j_max: Option<usize>,
    pub theta: Option<f64>,
    pub tol: Option<f64>,
}

impl Overrides {
    pub fn apply(&self, cfg: &mut LabConfig) -> Result<(), CliError> {
        if let Some(n) = self.n {
            cfg.setup.n = n;
        }
        if let Some(p) = self.p {
            cfg.setup.p = p;
        }
        if let Some(a) = self.alpha {
            cfg.domain.alpha = a;
        }
        if let Some(b) = self.beta {
            cfg.bubble.beta = BetaChoice::Value(b);
        }
        match (&mut cfg.coefficients, self.sigma, self.gamma) {
            (_, Some(_), Some(_)) => {
                return Err(CliError::Config("--sigma and --gamma are mutually exclusive".to_string()))
            }
            (CoefficientSection::Scalar { sigma, .. }, Some(v), None) => *sigma = v,
            (CoefficientSection::Matrix { gamma, .. }, None, Some(v)) => *gamma = v,
            (CoefficientSection::Scalar { .. }, None, Some(_)) => {
                return Err(CliError::Config("--gamma needs matrix coefficients".to_string()))
            }
            (CoefficientSection::Matrix { .. }, Some(_), None) => {
                return Err(CliError::Config("--sigma needs scalar coefficients".to_string()))
            }
            _ => {}
        }
        if let Some(l) = self.lambda {
            cfg.solver.lambda = l;
        }
        if let Some(e) = self.eps_start {
            cfg.sequence.eps0 = e;
        }
        if let Some(r) = self.eps_ratio {
            cfg.sequence.ratio = r;
        }
        if let Some(j) = self.j_max {
            cfg.sequence.j_max = j;
        }
        if let Some(t) = self.theta {
            cfg.solver.theta = Some(t);
        }
        if let Some(t) = self.tol {
            cfg.solver.tol = t;
        }
        cfg.validate()
    }
}
