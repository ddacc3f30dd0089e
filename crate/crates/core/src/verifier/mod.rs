//! Admissibility arithmetic, empirical slope fits and the strict quotient
//! inequality along the bubble family.

mod experiment;
mod quotient;

pub use experiment::{BubbleRecord, Coefficients, Experiment};
pub use quotient::{
    inadmissibility_sweep, quotient_sequence, verify_estimates, EstimateRow, EstimatesReport, QuotientReport,
    QuotientRow, SweepRow, NO_THEOREM,
};

use crate::error::{LabError, Result};
use crate::sobolev::SobolevSetup;
use serde::Serialize;

/// Thresholds and the open `β` interval for a given `(n, p, σ or γ, α)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AdmissibilityReport {
    pub linear: bool,
    pub exponent: f64,
    pub alpha: f64,
    /// Lower bound the exponent `σ` (or `γ`) must exceed.
    pub threshold: f64,
    /// Supremum of admissible singularity orders.
    pub alpha_max: f64,
    pub beta_interval: (f64, f64),
    pub admissible: bool,
}

impl AdmissibilityReport {
    pub fn beta_midpoint(&self) -> f64 {
        0.5 * (self.beta_interval.0 + self.beta_interval.1)
    }

    pub fn interval_is_empty(&self) -> bool {
        !(self.beta_interval.0 < self.beta_interval.1)
    }

    /// Check the three exponent inequalities for a concrete `β`, naming the
    /// first one that fails.
    pub fn check_beta(&self, setup: &SobolevSetup, beta: f64) -> Result<()> {
        let (n, p, alpha) = (setup.dim(), setup.p, self.alpha);
        let violated = if !(alpha >= 1.0) {
            Some(format!("1 ≤ α (α = {alpha})"))
        } else if !(beta > alpha) {
            Some(format!("α < β (α = {alpha}, β = {beta})"))
        } else if !(p * beta < self.exponent) {
            Some(format!("pβ < σ (pβ = {}, σ = {})", p * beta, self.exponent))
        } else if !(p * beta < (n - p) * (beta - alpha) / (p - 1.0)) {
            Some(format!(
                "pβ < (n−p)(β−α)/(p−1) (pβ = {}, (n−p)(β−α)/(p−1) = {})",
                p * beta,
                (n - p) * (beta - alpha) / (p - 1.0)
            ))
        } else {
            None
        };
        match violated {
            Some(what) => Err(LabError::InvalidParameter(format!("β = {beta} violates {what}"))),
            None => Ok(()),
        }
    }
}

/// Admissibility of a singularity order `alpha` for coefficient exponent
/// `exponent` (`σ` in the quasilinear case, `γ` in the linear case).
pub fn admissibility(setup: &SobolevSetup, exponent: f64, alpha: f64, linear: bool) -> Result<AdmissibilityReport> {
    let n = setup.dim();
    let p = setup.p;
    if linear {
        if p != 2.0 || setup.n < 5 {
            return Err(LabError::Dimension(format!(
                "the linear case needs p = 2 and n ≥ 5, got n = {}, p = {p}",
                setup.n
            )));
        }
    } else if !setup.supercritical_dim {
        return Err(LabError::Dimension(format!("need n > p², got n = {}, p = {p}", setup.n)));
    }
    if !(exponent > 0.0 && exponent.is_finite() && alpha.is_finite()) {
        return Err(LabError::InvalidParameter(format!(
            "exponent and α must be finite with positive exponent, got {exponent}, {alpha}"
        )));
    }
    let threshold = (n * p - p * p) / (n - p * p);
    let alpha_max = exponent * (n - p * p) / (n * p - p * p);
    let lo = alpha * (n - p) / (n - p * p);
    let hi = exponent / p;
    Ok(AdmissibilityReport {
        linear,
        exponent,
        alpha,
        threshold,
        alpha_max,
        beta_interval: (lo, hi),
        admissible: alpha >= 1.0 && exponent > threshold && alpha < alpha_max && lo < hi,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum FitMode {
    /// Fit `log value` against `log ε`.
    Direct,
    /// Fit `log |limit − value|` against `log ε`.
    DeficitFromLimit(f64),
}

/// Least-squares power law fitted over the last usable points.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SlopeFit {
    pub claimed_exponent: f64,
    pub fitted_exponent: f64,
    pub prefactor: f64,
    pub r_squared: f64,
    pub points_used: usize,
    /// At least four points stand above ten times their error estimate.
    pub usable: bool,
}

/// Points kept in the fit window.
pub const FIT_WINDOW: usize = 5;
const MIN_FIT_POINTS: usize = 4;

/// Fit `value ≈ C·ε^q` (or the deficit from `limit`) and compare `q` with
/// `claimed`. `errors` holds the absolute error of each value.
pub fn fit_slope(eps: &[f64], values: &[f64], errors: &[f64], mode: FitMode, claimed: f64) -> Result<SlopeFit> {
    if eps.len() != values.len() || eps.len() != errors.len() {
        return Err(LabError::Fit("eps, values and errors differ in length".into()));
    }
    if eps.len() < MIN_FIT_POINTS {
        return Err(LabError::Fit(format!("need at least {MIN_FIT_POINTS} points, got {}", eps.len())));
    }
    if eps.iter().any(|e| !(*e > 0.0)) || eps.windows(2).any(|w| !(w[1] < w[0])) {
        return Err(LabError::Fit("eps must be positive and strictly decreasing".into()));
    }
    let quantities: Vec<f64> = match mode {
        FitMode::Direct => values.to_vec(),
        FitMode::DeficitFromLimit(limit) => {
            let d: Vec<f64> = values.iter().map(|v| limit - v).collect();
            let pos = d.iter().filter(|v| **v > 0.0).count();
            let neg = d.iter().filter(|v| **v < 0.0).count();
            if pos > 0 && neg > 0 {
                return Err(LabError::Fit(format!(
                    "deficit from {limit} changes sign ({pos} positive, {neg} negative)"
                )));
            }
            d.into_iter().map(f64::abs).collect()
        }
    };
    let usable_idx: Vec<usize> = (0..eps.len())
        .filter(|&i| quantities[i] > 0.0 && quantities[i] > 10.0 * errors[i])
        .collect();
    let usable = usable_idx.len() >= MIN_FIT_POINTS;
    let window: Vec<usize> = if usable {
        usable_idx[usable_idx.len().saturating_sub(FIT_WINDOW)..].to_vec()
    } else {
        let positive: Vec<usize> = (0..eps.len()).filter(|&i| quantities[i] > 0.0).collect();
        positive[positive.len().saturating_sub(FIT_WINDOW)..].to_vec()
    };
    if window.len() < 2 {
        return Ok(SlopeFit {
            claimed_exponent: claimed,
            fitted_exponent: f64::NAN,
            prefactor: f64::NAN,
            r_squared: f64::NAN,
            points_used: window.len(),
            usable: false,
        });
    }
    let xs: Vec<f64> = window.iter().map(|&i| eps[i].ln()).collect();
    let ys: Vec<f64> = window.iter().map(|&i| quantities[i].ln()).collect();
    let m = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / m;
    let my = ys.iter().sum::<f64>() / m;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let r_squared = if syy == 0.0 { 1.0 } else { (sxy * sxy / (sxx * syy)).clamp(0.0, 1.0) };
    Ok(SlopeFit {
        claimed_exponent: claimed,
        fitted_exponent: slope,
        prefactor: intercept.exp(),
        r_squared,
        points_used: window.len(),
        usable,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sobolev::make_setup;
    use proptest::prelude::*;

    #[test]
    fn linear_five_dimensional_threshold() {
        let s = make_setup(5, 2.0).unwrap();
        for gamma in [7.0, 12.0] {
            let r = admissibility(&s, gamma, 1.0, true).unwrap();
            assert!((r.threshold - 6.0).abs() < 1e-15);
            assert!((r.alpha_max - gamma / 6.0).abs() < 1e-15);
        }
    }

    #[test]
    fn six_dimensional_interval() {
        let s = make_setup(6, 2.0).unwrap();
        let r = admissibility(&s, 5.0, 1.2, false).unwrap();
        assert!((r.beta_interval.0 - 2.4).abs() < 1e-14 && (r.beta_interval.1 - 2.5).abs() < 1e-14);
        assert!(r.admissible);
        let edge = admissibility(&s, 5.0, 1.25, false).unwrap();
        assert!((edge.beta_interval.0 - 2.5).abs() < 1e-14);
        assert!(edge.interval_is_empty() && !edge.admissible);
    }

    #[test]
    fn dimension_restrictions() {
        assert!(matches!(
            admissibility(&make_setup(4, 2.0).unwrap(), 5.0, 1.0, false),
            Err(LabError::Dimension(_))
        ));
        assert!(matches!(
            admissibility(&make_setup(9, 3.0).unwrap(), 5.0, 1.0, false),
            Err(LabError::Dimension(_))
        ));
        assert!(matches!(
            admissibility(&make_setup(10, 3.0).unwrap(), 5.0, 1.0, true),
            Err(LabError::Dimension(_))
        ));
        assert!(admissibility(&make_setup(10, 3.0).unwrap(), 5.0, 1.0, false).is_ok());
    }

    #[test]
    fn check_beta_names_the_violation() {
        let s = make_setup(6, 2.0).unwrap();
        let r = admissibility(&s, 5.0, 1.2, false).unwrap();
        assert!(r.check_beta(&s, 2.45).is_ok());
        let err = r.check_beta(&s, 2.6).unwrap_err().to_string();
        assert!(err.contains("pβ < σ"), "{err}");
        let err = r.check_beta(&s, 2.3).unwrap_err().to_string();
        assert!(err.contains("(n−p)(β−α)"), "{err}");
        let err = r.check_beta(&s, 1.1).unwrap_err().to_string();
        assert!(err.contains("α < β"), "{err}");
    }

    proptest! {
        #[test]
        fn admissible_interval_satisfies_all_exponent_inequalities(
            n in 5usize..30, p in 1.1f64..3.0, over in 0.01f64..5.0, a in 0.0f64..1.0, b in 0.01f64..0.99
        ) {
            let s = make_setup(n, p).unwrap();
            prop_assume!(s.supercritical_dim);
            let threshold = (s.dim() * p - p * p) / (s.dim() - p * p);
            let sigma = threshold + over;
            let r0 = admissibility(&s, sigma, 1.0, false).unwrap();
            let alpha = 1.0 + a * (r0.alpha_max - 1.0);
            let r = admissibility(&s, sigma, alpha, false).unwrap();
            prop_assume!(r.admissible);
            let (lo, hi) = r.beta_interval;
            let beta = lo + b * (hi - lo);
            let nf = s.dim();
            prop_assert!(1.0 <= alpha && alpha < beta);
            prop_assert!(p * beta < sigma);
            prop_assert!(p * beta < (nf - p) * (beta - alpha) / (p - 1.0));
            prop_assert!((nf - p) * (beta - alpha) / (p - 1.0) < nf * (beta - alpha) / (p - 1.0));
            prop_assert!(r.check_beta(&s, beta).is_ok());
        }
    }

    fn geometric(count: usize) -> Vec<f64> {
        (0..count).map(|j| 0.1 * 0.6f64.powi(j as i32)).collect()
    }

    #[test]
    fn exact_power_law() {
        let eps = geometric(10);
        let vals: Vec<f64> = eps.iter().map(|e| 3.0 * e.powf(2.5)).collect();
        let fit = fit_slope(&eps, &vals, &[0.0; 10], FitMode::Direct, 2.5).unwrap();
        assert!((fit.fitted_exponent - 2.5).abs() < 1e-6);
        assert!((fit.r_squared - 1.0).abs() < 1e-12);
        assert!((fit.prefactor - 3.0).abs() < 1e-9);
        assert!(fit.usable && fit.points_used == FIT_WINDOW);
    }

    #[test]
    fn perturbed_power_law() {
        let eps: Vec<f64> = (0..10).map(|j| 0.1 * 0.6f64.powi(j)).collect();
        let vals: Vec<f64> = eps.iter().map(|e| 2.0 * e.powf(1.7) * (1.0 + e)).collect();
        let fit = fit_slope(&eps, &vals, &[0.0; 10], FitMode::Direct, 1.7).unwrap();
        assert!((fit.fitted_exponent - 1.7).abs() < 0.03 * 1.7);
    }

    #[test]
    fn deficit_mode_and_noise_floor() {
        let eps = geometric(8);
        let vals: Vec<f64> = eps.iter().map(|e| 5.0 - e.powi(3)).collect();
        let fit = fit_slope(&eps, &vals, &[1e-15; 8], FitMode::DeficitFromLimit(5.0), 3.0).unwrap();
        assert!(fit.usable && (fit.fitted_exponent - 3.0).abs() < 1e-6);
        let noisy = fit_slope(&eps, &vals, &[1e-2; 8], FitMode::DeficitFromLimit(5.0), 3.0).unwrap();
        assert!(!noisy.usable);
    }

    #[test]
    fn deficit_sign_change_is_an_error() {
        let eps = geometric(6);
        let vals = [4.0, 4.5, 5.5, 4.9, 4.95, 4.99];
        assert!(matches!(
            fit_slope(&eps, &vals, &[0.0; 6], FitMode::DeficitFromLimit(5.0), 1.0),
            Err(LabError::Fit(_))
        ));
    }

    #[test]
    fn rejects_short_or_unsorted_input() {
        assert!(fit_slope(&[0.1, 0.05, 0.02], &[1.0; 3], &[0.0; 3], FitMode::Direct, 1.0).is_err());
        assert!(fit_slope(&[0.1, 0.2, 0.05, 0.01], &[1.0; 4], &[0.0; 4], FitMode::Direct, 1.0).is_err());
    }
}
