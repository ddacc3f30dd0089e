use super::{admissibility, AdmissibilityReport};
use crate::bubble::{Bubble, CutoffSpec, RadialBump, RadialIntegrals};
use crate::config::{BetaChoice, CoefficientSection, ProblemConfig};
use crate::error::{LabError, Result};
use crate::geometry::{
    build_domain, reduce_linear, transform_sequence, witness_sequence, CuspDomain, LinearReduction, MatrixField,
    ScalarField, SingularSequence,
};
use crate::quadrature::Estimate;
use crate::sobolev::{closed_form_k_inv_pow_p, make_setup, mass_constant, Instanton, MassConstant, SobolevSetup};
use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::Serialize;

#[derive(Debug, Clone, PartialEq)]
pub enum Coefficients {
    Scalar(ScalarField),
    Matrix { field: MatrixField, reduction: LinearReduction },
}

/// A validated configuration with every derived object needed to evaluate
/// the bubble family.
#[derive(Debug, Clone)]
pub struct Experiment {
    pub config: ProblemConfig,
    pub setup: SobolevSetup,
    pub instanton: Instanton,
    /// Closed-form `K(n,p)^{−p}`.
    pub k_inv_pow_p: f64,
    pub mass: MassConstant,
    pub domain: CuspDomain,
    pub sequence: SingularSequence,
    pub admissibility: AdmissibilityReport,
    pub beta: f64,
    pub cutoff: CutoffSpec,
    pub coefficients: Coefficients,
}

/// Integrals of one bubble.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BubbleRecord {
    pub j: usize,
    pub eps: f64,
    /// Concentration scale actually used (`ε^β`, or its image under `y = DPx`).
    pub mu: f64,
    pub theta: f64,
    pub integrals: RadialIntegrals,
    pub i4: Estimate,
}

impl Experiment {
    /// Build and require the configuration to be admissible, with `β` inside
    /// the admissible interval.
    pub fn new(config: &ProblemConfig) -> Result<Self> {
        let exp = Self::build(config, None)?;
        let adm = &exp.admissibility;
        if !adm.admissible {
            let why = if adm.alpha < 1.0 {
                format!("α = {} is below 1", adm.alpha)
            } else if adm.exponent <= adm.threshold {
                format!("exponent {} does not exceed the threshold {}", adm.exponent, adm.threshold)
            } else {
                format!(
                    "α = {} is not below α_max = {} (empty β interval ({}, {}))",
                    adm.alpha, adm.alpha_max, adm.beta_interval.0, adm.beta_interval.1
                )
            };
            return Err(LabError::InvalidParameter(format!("configuration is not admissible: {why}")));
        }
        adm.check_beta(&exp.setup, exp.beta)?;
        Ok(exp)
    }

    /// Build without requiring admissibility; `beta` overrides the
    /// configured choice. Only `β > α` is enforced.
    pub fn exploratory(config: &ProblemConfig, beta: Option<f64>) -> Result<Self> {
        Self::build(config, beta)
    }

    fn build(config: &ProblemConfig, beta_override: Option<f64>) -> Result<Self> {
        let setup = make_setup(config.setup.n, config.setup.p)?;
        let instanton = Instanton::new(setup)?;
        let d = &config.domain;
        let domain = build_domain(setup, d.alpha, d.kappa, d.spine_length, d.bulk_radius)?;
        let s = &config.sequence;
        let sequence = witness_sequence(&domain, s.delta, s.eps0, s.ratio, s.j_max)?;
        let coef = &config.coefficients;
        let adm = admissibility(&setup, coef.exponent(), d.alpha, coef.is_linear())?;
        let beta = match (beta_override, config.bubble.beta) {
            (Some(b), _) | (None, BetaChoice::Value(b)) => b,
            (None, BetaChoice::Keyword(_)) => adm.beta_midpoint(),
        };
        if !(beta > d.alpha) {
            return Err(LabError::InvalidParameter(format!(
                "β = {beta} violates α < β (α = {})",
                d.alpha
            )));
        }
        let mass = mass_constant(&instanton)?;
        let x0 = domain.x0.clone();
        let coefficients = match coef {
            CoefficientSection::Scalar { a0, c0, sigma } => Coefficients::Scalar(ScalarField::new(*a0, *c0, *sigma, x0)?),
            CoefficientSection::Matrix { a0, c0, gamma } => {
                let n = setup.n;
                if a0.len() != n || a0.iter().any(|row| row.len() != n) {
                    return Err(LabError::Dimension(format!("A0 must be {n}×{n}")));
                }
                let m = DMatrix::from_fn(n, n, |i, j| a0[i][j]);
                let field = MatrixField::new(m, *c0, *gamma, x0)?;
                let reduction = reduce_linear(&field.a0, *c0, *gamma)?;
                Coefficients::Matrix { field, reduction }
            }
        };
        Ok(Self {
            config: config.clone(),
            setup,
            instanton,
            k_inv_pow_p: closed_form_k_inv_pow_p(&setup),
            mass,
            cutoff: CutoffSpec::new(sequence.delta, config.bubble.plateau)?,
            domain,
            sequence,
            admissibility: adm,
            beta,
            coefficients,
        })
    }

    pub fn alpha(&self) -> f64 {
        self.domain.alpha
    }

    pub fn bubble(&self, j: usize) -> Result<Bubble> {
        Bubble::new(&self.sequence, j, self.beta, self.cutoff, self.instanton)
    }

    /// Exponent of the weight `|x − x₀|^θ` attached to the coefficient.
    pub fn weight_exponent(&self) -> f64 {
        self.config.coefficients.exponent()
    }

    /// Integrals of the physical-space bubbles `w_j` with weight exponent
    /// `theta`, in index order.
    pub fn records(&self, theta: f64) -> Result<Vec<BubbleRecord>> {
        (0..self.sequence.len())
            .into_par_iter()
            .map(|j| {
                let b = self.bubble(j)?;
                record(j, b.eps(), &b.profile(), theta)
            })
            .collect()
    }

    /// Integrals of the bubbles built in the diagonalised coordinates
    /// `y = DPx`: centred at `DPx_j` with both scales multiplied by
    /// `Λ^{−1/2}`. Falls back to [`Self::records`] for scalar coefficients.
    pub fn transformed_records(&self, theta: f64) -> Result<Vec<BubbleRecord>> {
        let red = match &self.coefficients {
            Coefficients::Scalar(_) => return self.records(theta),
            Coefficients::Matrix { reduction, .. } => reduction,
        };
        let img = transform_sequence(&self.sequence, red);
        (0..self.sequence.len())
            .into_par_iter()
            .map(|j| {
                let eps = self.sequence.radii[j];
                let bump = RadialBump::new(
                    self.instanton,
                    self.cutoff,
                    eps.powf(self.alpha()) * img.shrink,
                    eps.powf(self.beta) * img.shrink,
                    img.centers[j].clone(),
                )?;
                record(j, eps, &bump, theta)
            })
            .collect()
    }
}

fn record(j: usize, eps: f64, bump: &RadialBump, theta: f64) -> Result<BubbleRecord> {
    Ok(BubbleRecord {
        j,
        eps,
        mu: bump.mu,
        theta,
        integrals: bump.radial_integrals()?,
        i4: bump.weighted_gradient_integral(theta)?,
    })
}
