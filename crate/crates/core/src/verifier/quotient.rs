use super::experiment::{BubbleRecord, Coefficients, Experiment};
use super::{admissibility, fit_slope, FitMode, SlopeFit};
use crate::config::ProblemConfig;
use crate::error::Result;
use rayon::prelude::*;
use serde::Serialize;

/// One fitted asymptotic order.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EstimateRow {
    pub quantity: String,
    pub fit: SlopeFit,
    /// `value/ε^{claimed}` at the smallest `ε`.
    pub observed_prefactor: f64,
    /// Exact limit of that ratio, where one is known.
    pub reference_prefactor: Option<f64>,
}

/// Fitted orders of `I1 − K^{−p}`, `1 − I2`, `I3` and `I4(θ)` together with
/// the per-index integrals they were fitted on.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EstimatesReport {
    pub beta: f64,
    pub theta: f64,
    pub rows: Vec<EstimateRow>,
    pub records: Vec<BubbleRecord>,
}

pub fn verify_estimates(exp: &Experiment) -> Result<EstimatesReport> {
    let theta = exp.weight_exponent();
    let records = exp.records(theta)?;
    let s = &exp.setup;
    let (n, p, alpha, beta) = (s.dim(), s.p, exp.alpha(), exp.beta);
    let eps: Vec<f64> = records.iter().map(|r| r.eps).collect();
    let last_eps = *eps.last().unwrap_or(&f64::NAN);

    // (name, claimed order, (value, error) per index, reference prefactor)
    #[allow(clippy::type_complexity)]
    let series: [(&str, f64, Vec<(f64, f64)>, Option<f64>); 4] = [
        (
            "I1 - K^-p",
            (n - p) * (beta - alpha) / (p - 1.0),
            records.iter().map(|r| (r.integrals.i1_excess.value, r.integrals.i1_excess.abs_error)).collect(),
            None,
        ),
        (
            "1 - I2",
            n * (beta - alpha) / (p - 1.0),
            records.iter().map(|r| (r.integrals.i2_deficit.value, r.integrals.i2_deficit.abs_error)).collect(),
            None,
        ),
        (
            "I3",
            p * beta,
            records.iter().map(|r| (r.integrals.i3.value, r.integrals.i3.abs_error)).collect(),
            Some(exp.mass.a),
        ),
        (
            "I4",
            theta,
            records.iter().map(|r| (r.i4.value, r.i4.abs_error)).collect(),
            Some(exp.k_inv_pow_p),
        ),
    ];
    let rows = series
        .into_iter()
        .map(|(name, claimed, pts, reference)| {
            let values: Vec<f64> = pts.iter().map(|v| v.0).collect();
            let errors: Vec<f64> = pts.iter().map(|v| v.1).collect();
            let fit = fit_slope(&eps, &values, &errors, FitMode::Direct, claimed)?;
            Ok(EstimateRow {
                quantity: name.to_string(),
                fit,
                observed_prefactor: values.last().copied().unwrap_or(f64::NAN) / last_eps.powf(claimed),
                reference_prefactor: reference,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(EstimatesReport {
        beta,
        theta,
        rows,
        records,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QuotientRow {
    pub j: usize,
    pub eps: f64,
    pub i1: f64,
    pub i2: f64,
    pub i3: f64,
    pub i4: f64,
    /// `(m·I1 + C·I4 − ζλ·I3)/I2^{p/p*}`.
    pub q: f64,
    /// The same with `ζ = 1` (differs from `q` only in the linear case).
    pub q_raw: f64,
    pub bound: f64,
    /// `bound − q`, evaluated without cancellation.
    pub margin: f64,
    /// Absolute error estimate of `margin` (and of `q`).
    pub margin_error: f64,
    /// `margin/(a·ζλ·μ^p)`; absent when `λ = 0`.
    pub margin_ratio: Option<f64>,
    /// `|margin|` exceeds ten times its error estimate.
    pub usable: bool,
    /// `margin` exceeds its error estimate.
    pub strict: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QuotientReport {
    pub lambda: f64,
    pub linear: bool,
    pub beta: f64,
    /// `m·K(n,p)^{−p}`.
    pub bound: f64,
    /// `m_{a,p}` or `m_A^{1/n}`.
    pub m: f64,
    /// Coefficient of the weighted gradient term (`C0`, or `C1` after
    /// diagonalisation).
    pub weight_coefficient: f64,
    /// Coefficient `ζ` multiplying `λ` (1, or `C2` after diagonalisation).
    pub lambda_coefficient: f64,
    pub mass_constant: f64,
    pub rows: Vec<QuotientRow>,
    /// Start of the final run of indices with a certified strict
    /// inequality; `None` if the last index is not strict.
    pub first_strict_j: Option<usize>,
}

impl QuotientReport {
    pub fn q(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.q).collect()
    }

    pub fn margin_ratio(&self) -> Vec<Option<f64>> {
        self.rows.iter().map(|r| r.margin_ratio).collect()
    }
}

/// Upper bounds `Q_j` for the minimisation level along the bubble family,
/// compared with `m·K(n,p)^{−p}`.
pub fn quotient_sequence(exp: &Experiment, lambda: f64) -> Result<QuotientReport> {
    if !(lambda >= 0.0 && lambda.is_finite()) {
        return Err(crate::LabError::InvalidParameter(format!("λ must be non-negative, got {lambda}")));
    }
    let k = exp.k_inv_pow_p;
    let (m, weight, zeta, records, linear) = match &exp.coefficients {
        Coefficients::Scalar(f) => (f.a0, f.c0, 1.0, exp.records(f.sigma)?, false),
        Coefficients::Matrix { field, reduction } => (
            reduction.det_root,
            reduction.c1,
            reduction.c2,
            exp.transformed_records(field.gamma)?,
            true,
        ),
    };
    let s = &exp.setup;
    let ratio = s.p / s.p_star;
    let a = exp.mass.a;
    let bound = m * k;
    let rows: Vec<QuotientRow> = records
        .iter()
        .map(|r| {
            let ints = &r.integrals;
            let d1 = ints.i1_excess;
            let d2 = ints.i2_deficit;
            let log_norm = ratio * (-d2.value).ln_1p();
            let norm = log_norm.exp();
            let shared = m * k * log_norm.exp_m1() - m * d1.value - weight * r.i4.value;
            let margin_with = |z: f64| (shared + z * lambda * ints.i3.value) / norm;
            let margin = margin_with(zeta);
            let raw_margin = margin_with(1.0);
            let terms = [
                (m * k * log_norm.exp_m1()).abs(),
                m * d1.value.abs(),
                weight * r.i4.value,
                zeta * lambda * ints.i3.value,
            ];
            let rounding = 8.0 * f64::EPSILON * terms.iter().sum::<f64>();
            let margin_error = (m * k * ratio * d2.abs_error / (1.0 - d2.value)
                + m * d1.abs_error
                + weight * r.i4.abs_error
                + zeta * lambda * ints.i3.abs_error
                + rounding)
                / norm;
            let margin_ratio = (lambda > 0.0).then(|| margin / (a * zeta * lambda * r.mu.powf(s.p)));
            QuotientRow {
                j: r.j,
                eps: r.eps,
                i1: ints.i1.value,
                i2: ints.i2.value,
                i3: ints.i3.value,
                i4: r.i4.value,
                q: bound - margin,
                q_raw: bound - raw_margin,
                bound,
                margin,
                margin_error,
                margin_ratio,
                usable: margin.abs() > 10.0 * margin_error,
                strict: margin > margin_error,
            }
        })
        .collect();
    let first_strict_j = match rows.last() {
        Some(last) if last.strict => {
            let start = rows.iter().rposition(|r| !r.strict).map_or(0, |i| i + 1);
            Some(rows[start].j)
        }
        _ => None,
    };
    Ok(QuotientReport {
        lambda,
        linear,
        beta: exp.beta,
        bound,
        m,
        weight_coefficient: weight,
        lambda_coefficient: zeta,
        mass_constant: a,
        rows,
        first_strict_j,
    })
}

/// Outcome of the quotient test at one singularity order.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub alpha: f64,
    pub alpha_max: f64,
    pub beta_interval: (f64, f64),
    pub interval_empty: bool,
    /// `β` actually used: the midpoint, clamped to the upper end `σ/p`.
    pub beta: f64,
    /// `"theorem"` when `α < α_max`, otherwise `"no-theorem region"`.
    pub region: String,
    /// Order `pβ` of the `λ` term.
    pub lambda_order: f64,
    /// Smallest order among the competing terms, `min(θ, (n−p)(β−α)/(p−1))`.
    pub competing_order: f64,
    /// `pβ` is strictly below the competing order.
    pub lambda_term_dominates: bool,
    pub any_strict: bool,
    pub first_strict_j: Option<usize>,
    pub last_margin_ratio: Option<f64>,
    /// Why the quotient could not be evaluated at this `α` (for instance a
    /// witness ball that no longer fits), if it could not.
    pub error: Option<String>,
}

pub const NO_THEOREM: &str = "no-theorem region";

/// Run the quotient test for each `α`, with the `β` rule clamped so that it
/// remains defined past `α_max`. Rows with `α ≥ α_max` carry no theorem.
pub fn inadmissibility_sweep(config: &ProblemConfig, lambda: f64, alphas: &[f64]) -> Result<Vec<SweepRow>> {
    alphas
        .par_iter()
        .map(|&alpha| {
            let mut cfg = config.clone();
            cfg.domain.alpha = alpha;
            let setup = crate::sobolev::make_setup(cfg.setup.n, cfg.setup.p)?;
            let theta = cfg.coefficients.exponent();
            let adm = admissibility(&setup, theta, alpha, cfg.coefficients.is_linear())?;
            let (lo, hi) = adm.beta_interval;
            let beta = adm.beta_midpoint().min(hi);
            let outcome = Experiment::exploratory(&cfg, Some(beta)).and_then(|exp| quotient_sequence(&exp, lambda));
            let p = setup.p;
            let competing = theta.min((setup.dim() - p) * (beta - alpha) / (p - 1.0));
            let mut row = SweepRow {
                alpha,
                alpha_max: adm.alpha_max,
                beta_interval: (lo, hi),
                interval_empty: adm.interval_is_empty(),
                beta,
                region: if adm.admissible { "theorem".to_string() } else { NO_THEOREM.to_string() },
                lambda_order: p * beta,
                competing_order: competing,
                lambda_term_dominates: p * beta < competing,
                any_strict: false,
                first_strict_j: None,
                last_margin_ratio: None,
                error: None,
            };
            match outcome {
                Ok(report) => {
                    row.any_strict = report.rows.iter().any(|r| r.strict);
                    row.first_strict_j = report.first_strict_j;
                    row.last_margin_ratio = report.rows.last().and_then(|r| r.margin_ratio);
                }
                Err(e) => row.error = Some(e.to_string()),
            }
            Ok(row)
        })
        .collect()
}
