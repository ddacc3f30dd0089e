use crate::config::LabConfig;
use crate::error::CliError;
use crate::plot::{Plot, Series};
use crate::report::{Report, Table};
use bnlab_core::ball::{
    existence_threshold_with, principal_eigenvalue_with, solve_ball_with, BallOutcome,
};
use bnlab_core::geometry::{build_domain, witness_sequence};
use bnlab_core::ode::Dopri5;
use bnlab_core::sobolev::{
    closed_form_k_inv_pow_p, make_setup, mass_constant, radial_rayleigh_minimum, Instanton, RayleighGrid,
    SHARP_CONSTANT_TOLERANCE,
};
use bnlab_core::verifier::{inadmissibility_sweep, quotient_sequence, verify_estimates, Experiment};
use bnlab_core::LabError;
use rayon::prelude::*;
use serde_json::{json, Value};
use std::f64::consts::PI;

/// Relative deviation allowed between fitted and claimed orders.
pub const SLOPE_TOLERANCE: f64 = 0.05;
/// Relative discrepancy allowed in the scaling-reduction identity.
pub const SCALING_TOLERANCE: f64 = 1e-8;

pub const DEFAULT_SWEEP: [f64; 7] = [1.1, 1.15, 1.2, 1.25, 1.3, 1.35, 1.4];

fn solver(cfg: &LabConfig) -> Dopri5 {
    Dopri5 {
        rtol: cfg.solver.tol,
        atol: 1e-2 * cfg.solver.tol,
        ..Dopri5::default()
    }
}

fn to_json<T: serde::Serialize>(v: &T) -> Result<Value, CliError> {
    Ok(serde_json::to_value(v)?)
}

pub fn extremal(n: Option<usize>, p: Option<f64>) -> Result<Report, CliError> {
    let p = p.unwrap_or(2.0);
    let dims: Vec<usize> = match n {
        Some(n) => vec![n],
        None => (3..=8).filter(|&n| n as f64 > p).collect(),
    };
    let rows = dims
        .par_iter()
        .map(|&n| -> Result<_, LabError> {
            let setup = make_setup(n, p)?;
            let closed = closed_form_k_inv_pow_p(&setup);
            let minimum = radial_rayleigh_minimum(&setup, &RayleighGrid::for_setup(&setup))?;
            let inst = Instanton::new(setup)?;
            let quotient = inst.sobolev_quotient()?;
            // ∫|v₁|^p is finite only for n > p².
            let mass = if n as f64 > p * p { Some(mass_constant(&inst)?) } else { None };
            Ok((n, closed, minimum, quotient, mass))
        })
        .collect::<Result<Vec<_>, _>>()?;
    let mut table = Table::new(&[
        "n",
        "p",
        "K_inv_pow_p",
        "rayleigh_min",
        "rayleigh_rel_diff",
        "instanton_quotient",
        "instanton_quotient_err",
        "a",
        "a_err",
    ]);
    let mut json_rows = Vec::new();
    let mut report_failures = Vec::new();
    for &(n, closed, minimum, quotient, mass) in &rows {
        let diff = (minimum - closed).abs() / closed;
        let inst_diff = (quotient.value - closed).abs() / closed;
        table.push(vec![
            n.into(),
            p.into(),
            closed.into(),
            minimum.into(),
            diff.into(),
            quotient.value.into(),
            quotient.abs_error.into(),
            mass.map(|m| m.a).into(),
            mass.map(|m| m.abs_error).into(),
        ]);
        if !(diff <= SHARP_CONSTANT_TOLERANCE) {
            report_failures.push(format!("n = {n}: Rayleigh minimum differs from the closed form by {diff:e}"));
        }
        if !(inst_diff <= SHARP_CONSTANT_TOLERANCE) {
            report_failures.push(format!("n = {n}: instanton quotient differs from the closed form by {inst_diff:e}"));
        }
        json_rows.push(json!({
            "n": n,
            "p": p,
            "k_inv_pow_p": closed,
            "k_pow_p": 1.0 / closed,
            "rayleigh_min": minimum,
            "rayleigh_rel_diff": diff,
            "instanton_quotient": quotient,
            "mass_constant": mass.map(|m| m.a),
            "mass_constant_err": mass.map(|m| m.abs_error),
        }));
    }
    let mut report = Report::new("extremal", table, json!({ "p": p, "rows": json_rows }));
    report.summary = rows
        .iter()
        .map(|(n, closed, minimum, ..)| {
            format!("n = {n}, p = {p}: K^-p = {closed:.12e}, Rayleigh minimum {minimum:.12e}")
        })
        .collect();
    report.failures = report_failures;
    Ok(report)
}

pub fn check_domain(cfg: &LabConfig) -> Result<Report, CliError> {
    let setup = make_setup(cfg.setup.n, cfg.setup.p)?;
    let d = &cfg.domain;
    let domain = build_domain(setup, d.alpha, d.kappa, d.spine_length, d.bulk_radius)?;
    let s = &cfg.sequence;
    let seq = match witness_sequence(&domain, s.delta, s.eps0, s.ratio, s.j_max) {
        Ok(seq) => seq,
        Err(e @ LabError::Witness { .. }) => {
            let mut report = Report::new(
                "check-domain",
                Table::new(&["j", "eps", "ball_radius", "clearance", "slack"]),
                json!({ "domain": to_json(&domain)?, "delta": s.delta, "verified": false, "error": e.to_string() }),
            );
            report.failures.push(e.to_string());
            return Ok(report);
        }
        Err(e) => return Err(e.into()),
    };
    let mut table = Table::new(&["j", "eps", "ball_radius", "clearance", "slack"]);
    for j in 0..seq.len() {
        let r = seq.ball_radius(j);
        table.push(vec![
            j.into(),
            seq.radii[j].into(),
            r.into(),
            seq.clearances[j].into(),
            (seq.clearances[j] - r).into(),
        ]);
    }
    let mut report = Report::new(
        "check-domain",
        table,
        json!({
            "domain": to_json(&domain)?,
            "delta": seq.delta,
            "verified": true,
            "eps": seq.radii,
            "ball_radius": (0..seq.len()).map(|j| seq.ball_radius(j)).collect::<Vec<_>>(),
            "clearance": seq.clearances,
        }),
    );
    report.summary.push(format!(
        "all {} witness balls of radius {}·eps^{} lie inside the domain",
        seq.len(),
        seq.delta,
        d.alpha
    ));
    Ok(report)
}

pub fn bubbles(cfg: &LabConfig) -> Result<Report, CliError> {
    let exp = Experiment::new(&cfg.problem())?;
    let theta = cfg.solver.theta.unwrap_or_else(|| exp.weight_exponent());
    let records = exp.records(theta)?;
    let checks = (0..exp.sequence.len())
        .into_par_iter()
        .map(|j| exp.bubble(j)?.scaling_reduction_check())
        .collect::<Result<Vec<_>, _>>()?;
    let mut table = Table::new(&[
        "j",
        "eps",
        "mu",
        "I1",
        "I1_err",
        "I2",
        "I2_err",
        "I3",
        "I3_err",
        "I1_excess",
        "I1_excess_err",
        "I2_deficit",
        "I2_deficit_err",
        "I4_theta",
        "I4_theta_err",
        "scaling_check",
    ]);
    let mut failures = Vec::new();
    for (r, c) in records.iter().zip(&checks) {
        let worst = c.iter().copied().fold(0.0, f64::max);
        if !(worst <= SCALING_TOLERANCE) {
            failures.push(format!("j = {}: scaling reduction off by {worst:e}", r.j));
        }
        let i = &r.integrals;
        table.push(vec![
            r.j.into(),
            r.eps.into(),
            r.mu.into(),
            i.i1.value.into(),
            i.i1.abs_error.into(),
            i.i2.value.into(),
            i.i2.abs_error.into(),
            i.i3.value.into(),
            i.i3.abs_error.into(),
            i.i1_excess.value.into(),
            i.i1_excess.abs_error.into(),
            i.i2_deficit.value.into(),
            i.i2_deficit.abs_error.into(),
            r.i4.value.into(),
            r.i4.abs_error.into(),
            worst.into(),
        ]);
    }
    let mut report = Report::new(
        "bubbles",
        table,
        json!({ "beta": exp.beta, "theta": theta, "records": to_json(&records)?, "scaling_check": checks }),
    );
    report.summary.push(format!("{} bubbles, β = {}, θ = {theta}", records.len(), exp.beta));
    report.failures = failures;
    Ok(report)
}

pub fn slopes(cfg: &LabConfig) -> Result<Report, CliError> {
    let exp = Experiment::new(&cfg.problem())?;
    let rep = verify_estimates(&exp)?;
    let mut table = Table::new(&[
        "quantity",
        "claimed",
        "fitted",
        "rel_deviation",
        "r_squared",
        "points_used",
        "usable",
        "prefactor",
        "reference_prefactor",
    ]);
    let mut failures = Vec::new();
    let mut series = Vec::new();
    let eps: Vec<f64> = rep.records.iter().map(|r| r.eps).collect();
    for row in &rep.rows {
        let f = &row.fit;
        let dev = (f.fitted_exponent - f.claimed_exponent).abs() / f.claimed_exponent;
        table.push(vec![
            row.quantity.as_str().into(),
            f.claimed_exponent.into(),
            f.fitted_exponent.into(),
            dev.into(),
            f.r_squared.into(),
            f.points_used.into(),
            f.usable.into(),
            row.observed_prefactor.into(),
            row.reference_prefactor.into(),
        ]);
        if f.usable && !(dev <= SLOPE_TOLERANCE) {
            failures.push(format!(
                "{}: fitted order {} deviates from {} by {:.1}%",
                row.quantity,
                f.fitted_exponent,
                f.claimed_exponent,
                100.0 * dev
            ));
        }
        if let Some(r) = row.reference_prefactor {
            let pdev = (row.observed_prefactor - r).abs() / r;
            if !(pdev <= SLOPE_TOLERANCE) {
                failures.push(format!(
                    "{}: prefactor {} deviates from {r} by {:.1}%",
                    row.quantity,
                    row.observed_prefactor,
                    100.0 * pdev
                ));
            }
        }
    }
    let values: [Vec<f64>; 4] = [
        rep.records.iter().map(|r| r.integrals.i1_excess.value).collect(),
        rep.records.iter().map(|r| r.integrals.i2_deficit.value).collect(),
        rep.records.iter().map(|r| r.integrals.i3.value).collect(),
        rep.records.iter().map(|r| r.i4.value).collect(),
    ];
    for (row, vals) in rep.rows.iter().zip(values) {
        series.push(Series {
            label: row.quantity.clone(),
            points: eps.iter().copied().zip(vals).collect(),
            fit: row.fit.usable.then_some((row.fit.fitted_exponent, row.fit.prefactor)),
            claimed: Some(row.fit.claimed_exponent),
        });
    }
    let mut report = Report::new("slopes", table, to_json(&rep)?);
    report.summary = rep
        .rows
        .iter()
        .map(|r| {
            format!(
                "{:<10} claimed {:.4} fitted {:.4}{}",
                r.quantity,
                r.fit.claimed_exponent,
                r.fit.fitted_exponent,
                if r.fit.usable { "" } else { " (below noise floor)" }
            )
        })
        .collect();
    report.plot = Some(Plot {
        title: format!("Asymptotic orders, β = {}", rep.beta),
        x_label: "eps".into(),
        y_label: "value".into(),
        series,
    });
    report.failures = failures;
    Ok(report)
}

pub fn quotient(cfg: &LabConfig) -> Result<Report, CliError> {
    let exp = Experiment::new(&cfg.problem())?;
    let lambda = cfg.solver.lambda;
    let rep = quotient_sequence(&exp, lambda)?;
    let mut table = Table::new(&[
        "j",
        "eps",
        "I1",
        "I2",
        "I3",
        "I4_sigma",
        "Q",
        "bound",
        "margin_ratio",
        "err_est",
    ]);
    for r in &rep.rows {
        table.push(vec![
            r.j.into(),
            r.eps.into(),
            r.i1.into(),
            r.i2.into(),
            r.i3.into(),
            r.i4.into(),
            r.q.into(),
            r.bound.into(),
            r.margin_ratio.into(),
            r.margin_error.into(),
        ]);
    }
    let mut failures = Vec::new();
    if lambda > 0.0 && rep.first_strict_j.is_none() {
        failures.push(format!("no certified Q_j < bound at the last index for λ = {lambda}"));
    }
    if lambda == 0.0 {
        if let Some(r) = rep.rows.iter().find(|r| r.strict) {
            failures.push(format!("λ = 0 control: Q_{} is certified below the bound", r.j));
        }
    }
    let mut json = to_json(&rep)?;
    json["margin_ratio"] = to_json(&rep.margin_ratio())?;
    json["q"] = to_json(&rep.q())?;
    let mut report = Report::new("quotient", table, json);
    report.summary.push(format!("bound m·K^-p = {:.12e}, λ = {lambda}", rep.bound));
    report.summary.push(match rep.first_strict_j {
        Some(j) => format!("Q_j < bound certified for all j ≥ {j}"),
        None => "no final run of certified strict inequalities".to_string(),
    });
    if let Some(r) = rep.rows.last().and_then(|r| r.margin_ratio) {
        report.summary.push(format!("last margin ratio {r:.6}"));
    }
    let order = exp.setup.p * exp.beta;
    report.plot = Some(Plot {
        title: format!("bound − Q_j, λ = {lambda}"),
        x_label: "eps".into(),
        y_label: "bound − Q".into(),
        series: vec![Series {
            label: "margin".into(),
            points: rep.rows.iter().map(|r| (r.eps, r.margin)).collect(),
            fit: None,
            claimed: (lambda > 0.0).then_some(order),
        }],
    });
    report.failures = failures;
    Ok(report)
}

pub fn sweep(cfg: &LabConfig, alphas: &[f64]) -> Result<Report, CliError> {
    let rows = inadmissibility_sweep(&cfg.problem(), cfg.solver.lambda, alphas)?;
    let mut table = Table::new(&[
        "alpha",
        "alpha_max",
        "beta_lo",
        "beta_hi",
        "interval_empty",
        "beta",
        "region",
        "lambda_order",
        "competing_order",
        "lambda_term_dominates",
        "any_strict",
        "first_strict_j",
        "last_margin_ratio",
        "error",
    ]);
    for r in &rows {
        table.push(vec![
            r.alpha.into(),
            r.alpha_max.into(),
            r.beta_interval.0.into(),
            r.beta_interval.1.into(),
            r.interval_empty.into(),
            r.beta.into(),
            r.region.as_str().into(),
            r.lambda_order.into(),
            r.competing_order.into(),
            r.lambda_term_dominates.into(),
            r.any_strict.into(),
            r.first_strict_j.into(),
            r.last_margin_ratio.into(),
            r.error.as_deref().into(),
        ]);
    }
    let mut report = Report::new("sweep", table, json!({ "lambda": cfg.solver.lambda, "rows": to_json(&rows)? }));
    report.summary = rows
        .iter()
        .map(|r| {
            let outcome = match (&r.error, r.first_strict_j) {
                (Some(e), _) => format!("not evaluated: {e}"),
                (None, Some(j)) => format!("strict from j = {j}"),
                (None, None) => "not strict at the last index".to_string(),
            };
            format!("α = {:.4} [{}] {outcome}", r.alpha, r.region)
        })
        .collect();
    Ok(report)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BallTask {
    Eigenvalue,
    Threshold,
    Solve { lambda: f64 },
}

/// `π²/4` for `n = 3`, zero above.
pub fn reference_threshold(n: usize) -> f64 {
    if n == 3 {
        PI * PI / 4.0
    } else {
        0.0
    }
}

pub fn ball(cfg: &LabConfig, n: usize, task: BallTask) -> Result<Report, CliError> {
    let solver = solver(cfg);
    let lambda1 = principal_eigenvalue_with(n, solver)?;
    match task {
        BallTask::Eigenvalue => {
            let mut table = Table::new(&["n", "lambda1", "lambda1_rel_err"]);
            table.push(vec![n.into(), lambda1.into(), cfg.solver.tol.into()]);
            let mut report = Report::new("ball", table, json!({ "n": n, "lambda1": lambda1 }));
            report.summary.push(format!("λ₁ = {lambda1:.12e}"));
            Ok(report)
        }
        BallTask::Threshold => {
            let t = existence_threshold_with(n, solver)?;
            let reference = reference_threshold(n);
            let rel = (n == 3).then(|| (t.lambda - reference).abs() / reference);
            let half_width = 0.5 * (t.upper - t.lower);
            let mut table = Table::new(&[
                "n",
                "lambda1",
                "threshold",
                "threshold_err",
                "fraction_of_lambda1",
                "reference",
                "relative_error",
            ]);
            table.push(vec![
                n.into(),
                lambda1.into(),
                t.lambda.into(),
                half_width.into(),
                t.fraction_of_lambda1().into(),
                reference.into(),
                rel.into(),
            ]);
            let json = json!({
                "n": n,
                "lambda1": lambda1,
                "threshold": t.lambda,
                "threshold_err": half_width,
                "lower": t.lower,
                "upper": t.upper,
                "fraction_of_lambda1": t.fraction_of_lambda1(),
                "reference": reference,
                "relative_error": rel,
            });
            let mut report = Report::new("ball", table, json);
            report.summary.push(format!(
                "threshold λ* = {:.6} ± {:.1e} ({:.4}·λ₁), reference {reference:.6}",
                t.lambda,
                half_width,
                t.fraction_of_lambda1()
            ));
            if let Some(rel) = rel {
                report.summary.push(format!("relative error against π²/4: {rel:.3e}"));
            } else {
                report.summary.push("the exact threshold is 0; the value above is the numerical floor".to_string());
            }
            Ok(report)
        }
        BallTask::Solve { lambda } => {
            if !(lambda > 0.0 && lambda < lambda1) {
                return Err(CliError::Config(format!("λ = {lambda} must lie in (0, λ₁ = {lambda1})")));
            }
            let outcome = solve_ball_with(n, lambda, solver)?;
            let mut table = Table::new(&["r", "u", "du_dr", "residual"]);
            let mut json = json!({ "n": n, "lambda": lambda, "lambda1": lambda1 });
            let mut summary = Vec::new();
            match &outcome {
                BallOutcome::Solution { shoot_height, profile } => {
                    let residual = profile.residual();
                    for ((&r, &u), &du) in profile.grid.iter().zip(&profile.values).zip(&profile.slopes) {
                        table.push(vec![r.into(), u.into(), du.into(), residual.into()]);
                    }
                    json["status"] = json!("solution");
                    json["shoot_height"] = json!(shoot_height);
                    json["first_zero"] = json!(profile.first_zero);
                    json["residual"] = json!(residual);
                    json["nodes"] = json!(profile.grid.len());
                    summary.push(format!("s* = {shoot_height:.12e}, first zero {:?}", profile.first_zero));
                }
                BallOutcome::NoSolution {
                    smallest_zero,
                    largest_zero,
                } => {
                    json["status"] = json!("no_solution");
                    json["smallest_zero"] = json!(smallest_zero);
                    json["largest_zero"] = json!(largest_zero);
                    summary.push(format!(
                        "no solution: first zeros over the scanned heights span {smallest_zero:?} to {largest_zero:?}"
                    ));
                }
            }
            let mut report = Report::new("ball", table, json);
            report.summary = summary;
            Ok(report)
        }
    }
}
