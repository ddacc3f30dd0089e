//! Problem description shared by the library entry points and the CLI.
//!
//! Every section rejects unknown keys so that typos in a configuration file
//! surface as errors instead of silently falling back to defaults.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SetupSection {
    pub n: usize,
    pub p: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DomainSection {
    pub alpha: f64,
    pub kappa: f64,
    #[serde(rename = "L", alias = "spine_length")]
    pub spine_length: f64,
    pub bulk_radius: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum CoefficientSection {
    /// `a(x) = a0 + C0|x − x0|^σ`.
    Scalar { a0: f64, c0: f64, sigma: f64 },
    /// `A(x) = A0 + C0|x − x0|^γ·I`, `A0` given row by row.
    Matrix { a0: Vec<Vec<f64>>, c0: f64, gamma: f64 },
}

impl CoefficientSection {
    /// `σ` or `γ`.
    pub fn exponent(&self) -> f64 {
        match self {
            Self::Scalar { sigma, .. } => *sigma,
            Self::Matrix { gamma, .. } => *gamma,
        }
    }

    pub fn c0(&self) -> f64 {
        match self {
            Self::Scalar { c0, .. } | Self::Matrix { c0, .. } => *c0,
        }
    }

    pub fn is_linear(&self) -> bool {
        matches!(self, Self::Matrix { .. })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SequenceSection {
    pub delta: f64,
    #[serde(default = "default_eps0")]
    pub eps0: f64,
    #[serde(default = "default_ratio")]
    pub ratio: f64,
    #[serde(default = "default_j_max")]
    pub j_max: usize,
}

fn default_eps0() -> f64 {
    0.1
}

fn default_ratio() -> f64 {
    0.6
}

fn default_j_max() -> usize {
    10
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum BetaKeyword {
    #[serde(rename = "auto-midpoint")]
    AutoMidpoint,
}

/// Concentration exponent: a number, or the midpoint of the admissible
/// interval.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum BetaChoice {
    Value(f64),
    Keyword(BetaKeyword),
}

impl Default for BetaChoice {
    fn default() -> Self {
        Self::Keyword(BetaKeyword::AutoMidpoint)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BubbleSection {
    #[serde(default)]
    pub beta: BetaChoice,
    #[serde(default = "default_plateau")]
    pub plateau: f64,
}

impl Default for BubbleSection {
    fn default() -> Self {
        Self {
            beta: BetaChoice::default(),
            plateau: default_plateau(),
        }
    }
}

fn default_plateau() -> f64 {
    crate::bubble::DEFAULT_PLATEAU
}

/// Everything needed to build the bubble family and its quotients.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemConfig {
    pub setup: SetupSection,
    pub domain: DomainSection,
    pub coefficients: CoefficientSection,
    pub sequence: SequenceSection,
    #[serde(default)]
    pub bubble: BubbleSection,
}

impl ProblemConfig {
    /// The six-dimensional α = 1.2 cusp with `σ = 5`, `β = 2.45`.
    ///
    /// `a0` and `C0` are small compared with `λ = 1` so that the `λ∫|w|^p`
    /// term, whose lead over the competing terms is only a factor
    /// `ε^{0.1}`, dominates already for `ε ≈ 10⁻³`.
    pub fn reference_cusp6() -> Self {
        Self {
            setup: SetupSection { n: 6, p: 2.0 },
            domain: DomainSection {
                alpha: 1.2,
                kappa: 3.0,
                spine_length: 1.0,
                bulk_radius: 0.5,
            },
            coefficients: CoefficientSection::Scalar {
                a0: 0.004,
                c0: 0.01,
                sigma: 5.0,
            },
            sequence: SequenceSection {
                delta: 1.25,
                eps0: 0.1,
                ratio: 0.6,
                j_max: 10,
            },
            bubble: BubbleSection {
                beta: BetaChoice::Value(2.45),
                plateau: default_plateau(),
            },
        }
    }
}
