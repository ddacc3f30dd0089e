//! End-to-end acceptance checks. Each criterion prints one PASS/FAIL line
//! with its wall time; the process fails if any criterion fails.

use bnlab_core::ball::{existence_threshold, principal_eigenvalue, solve_ball};
use bnlab_core::bubble::{Bubble, CutoffSpec, DEFAULT_PLATEAU};
use bnlab_core::config::{CoefficientSection, ProblemConfig};
use bnlab_core::geometry::{build_domain, check_h1, reduce_linear, witness_sequence, MatrixField};
use bnlab_core::sobolev::{
    closed_form_k_inv_pow_p, make_setup, radial_rayleigh_minimum, Instanton, RayleighGrid,
};
use bnlab_core::verifier::{quotient_sequence, verify_estimates, Experiment};
use bnlab_core::LabError;
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;
use std::time::{Duration, Instant};

type Outcome = Result<String, String>;
type Criterion = (&'static str, Duration, fn() -> Outcome);

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn lab<T>(r: Result<T, LabError>) -> Result<T, String> {
    r.map_err(|e| e.to_string())
}

fn sharp_constant() -> Outcome {
    let mut worst: (f64, f64) = (0.0, 0.0);
    for n in 3..=8 {
        let setup = lab(make_setup(n, 2.0))?;
        let closed = closed_form_k_inv_pow_p(&setup);
        let minimum = lab(radial_rayleigh_minimum(&setup, &RayleighGrid::for_setup(&setup)))?;
        let quotient = lab(lab(Instanton::new(setup))?.sobolev_quotient())?.value;
        let d_min = (minimum - closed).abs() / closed;
        let d_inst = (quotient - closed).abs() / closed;
        ensure(d_min < 1e-6, || format!("n = {n}: Rayleigh minimum off by {d_min:e}"))?;
        ensure(d_inst < 1e-6, || format!("n = {n}: instanton quotient off by {d_inst:e}"))?;
        worst = (worst.0.max(d_min), worst.1.max(d_inst));
    }
    Ok(format!("n = 3..8: max rel. diff Rayleigh {:.1e}, instanton {:.1e}", worst.0, worst.1))
}

fn scaling_reduction() -> Outcome {
    let mut worst: f64 = 0.0;
    let mut count = 0;
    for &(n, p, alpha, beta) in &[(5, 2.0, 1.0, 2.0), (6, 2.0, 1.2, 2.45), (10, 3.0, 1.2, 2.0)] {
        let setup = lab(make_setup(n, p))?;
        let domain = lab(build_domain(setup, alpha, 2.0, 1.0, 0.5))?;
        let seq = lab(witness_sequence(&domain, 0.8, 0.1, 0.6, 10))?;
        let cutoff = lab(CutoffSpec::new(seq.delta, DEFAULT_PLATEAU))?;
        let inst = lab(Instanton::new(setup))?;
        for j in 0..seq.len() {
            let b = lab(Bubble::new(&seq, j, beta, cutoff, inst))?;
            let rel = lab(b.scaling_reduction_check())?;
            let m = rel.iter().copied().fold(0.0, f64::max);
            ensure(m < 1e-8, || format!("(n, p, α) = ({n}, {p}, {alpha}), j = {j}: {rel:?}"))?;
            worst = worst.max(m);
            count += 1;
        }
    }
    Ok(format!("{count} bubbles over 3 configurations, max rel. diff {worst:.1e}"))
}

fn asymptotic_orders() -> Outcome {
    let exp = lab(Experiment::new(&ProblemConfig::reference_cusp6()))?;
    let rep = lab(verify_estimates(&exp))?;
    let mut notes = Vec::new();
    for row in &rep.rows {
        let f = &row.fit;
        let dev = (f.fitted_exponent - f.claimed_exponent).abs() / f.claimed_exponent;
        let asserted = matches!(row.quantity.as_str(), "I3" | "I4");
        if asserted {
            ensure(f.usable, || format!("{}: fit below the noise floor", row.quantity))?;
        }
        if f.usable {
            ensure(dev < 0.05, || {
                format!("{}: slope {} vs claimed {}", row.quantity, f.fitted_exponent, f.claimed_exponent)
            })?;
        }
        notes.push(format!(
            "{} {:.4}/{:.4}{}",
            row.quantity,
            f.fitted_exponent,
            f.claimed_exponent,
            if f.usable { "" } else { " (unusable)" }
        ));
    }
    let i3 = rep.rows.iter().find(|r| r.quantity == "I3").ok_or("missing I3 row")?;
    let a = exp.mass.a;
    let pdev = (i3.observed_prefactor - a).abs() / a;
    ensure(pdev < 0.05, || format!("I3 prefactor {} vs a = {a}", i3.observed_prefactor))?;
    notes.push(format!("I3 prefactor off by {pdev:.1e}"));
    Ok(notes.join(", "))
}

fn strict_inequality() -> Outcome {
    let exp = lab(Experiment::new(&ProblemConfig::reference_cusp6()))?;
    let rep = lab(quotient_sequence(&exp, 1.0))?;
    let first = rep.first_strict_j.ok_or("no index with Q_j below the bound")?;
    ensure(rep.rows[first..].iter().all(|r| r.q < r.bound && r.strict), || {
        "Q_j rises above the bound after the first strict index".to_string()
    })?;
    let usable: Vec<_> = rep.rows.iter().filter(|r| r.usable).collect();
    ensure(usable.len() >= 2, || "fewer than two usable indices".to_string())?;
    let mut ratios = Vec::new();
    for r in &usable[usable.len() - 2..] {
        let ratio = r.margin_ratio.ok_or("missing margin ratio")?;
        ensure((0.9..=1.1).contains(&ratio), || format!("j = {}: margin ratio {ratio}", r.j))?;
        ratios.push(ratio);
    }
    let control = lab(quotient_sequence(&exp, 0.0))?;
    ensure(control.rows.iter().all(|r| r.q >= r.bound), || {
        "λ = 0 control dips below the bound".to_string()
    })?;
    Ok(format!(
        "strict for j ≥ {first}, last margin ratios {:.4}, {:.4}; λ = 0 control never below the bound",
        ratios[0], ratios[1]
    ))
}

fn linear_reduction() -> Outcome {
    let scalar_cfg = ProblemConfig::reference_cusp6();
    let CoefficientSection::Scalar { a0, c0, sigma } = scalar_cfg.coefficients else {
        return Err("reference configuration is not scalar".into());
    };
    let n = scalar_cfg.setup.n;
    let mut matrix_cfg = scalar_cfg.clone();
    matrix_cfg.coefficients = CoefficientSection::Matrix {
        a0: (0..n).map(|i| (0..n).map(|j| if i == j { a0 } else { 0.0 }).collect()).collect(),
        c0,
        gamma: sigma,
    };
    let scalar = lab(quotient_sequence(&lab(Experiment::new(&scalar_cfg))?, 1.0))?;
    let matrix = lab(quotient_sequence(&lab(Experiment::new(&matrix_cfg))?, 1.0))?;
    let mut worst: f64 = 0.0;
    for (s, m) in scalar.rows.iter().zip(&matrix.rows) {
        let rel = (s.q - m.q).abs() / s.q.abs();
        ensure(rel < 1e-8, || format!("j = {}: Q differs by {rel:e}", s.j))?;
        worst = worst.max(rel);
    }

    let dim = 5;
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut worst_id: f64 = 0.0;
    for _ in 0..20 {
        let b = DMatrix::from_fn(dim, dim, |_, _| rng.random_range(-1.0..1.0));
        let a = &b * b.transpose() + DMatrix::identity(dim, dim) * 0.1;
        let red = lab(reduce_linear(&a, 1.0, 3.0))?;
        let t = red.transform();
        let err = (&t * &a * t.transpose() - DMatrix::<f64>::identity(dim, dim)).amax();
        ensure(err < 1e-10, || format!("D·P·A0·Pᵗ·D differs from I by {err:e}"))?;
        worst_id = worst_id.max(err);
        let setup = lab(make_setup(dim, 2.0))?;
        let domain = lab(build_domain(setup, 1.0, 1.0, 1.0, 0.5))?;
        let field = lab(MatrixField::new(a, 1.0, 3.0, domain.x0.clone()))?;
        ensure(check_h1(&field, &field, &domain, 400), || "(H1) fails on the prototype".to_string())?;
    }
    Ok(format!(
        "embedding max rel. diff {worst:.1e}; 20 random SPD matrices, max |DPAPᵗD − I| {worst_id:.1e}"
    ))
}

fn ball_oracle() -> Outcome {
    let l3 = lab(principal_eigenvalue(3))?;
    let d = (l3 / (PI * PI) - 1.0).abs();
    ensure(d < 1e-3, || format!("λ₁(3) = {l3}"))?;
    let t = lab(existence_threshold(3))?;
    let dt = (t.lambda / (PI * PI / 4.0) - 1.0).abs();
    ensure(dt < 0.01, || format!("threshold {} vs π²/4", t.lambda))?;
    for &(n, f) in &[(4, 0.1), (4, 0.9), (5, 0.1), (5, 0.9)] {
        let l1 = lab(principal_eigenvalue(n))?;
        ensure(lab(solve_ball(n, f * l1))?.is_solution(), || format!("no solution for n = {n}, λ = {f}·λ₁"))?;
    }
    ensure(!lab(solve_ball(3, 0.1 * l3))?.is_solution(), || "solution found for n = 3, λ = 0.1·λ₁".to_string())?;
    Ok(format!("λ₁ rel. err {d:.1e}, threshold {:.5} (rel. err {dt:.1e})", t.lambda))
}

fn witness() -> Outcome {
    let setup = lab(make_setup(6, 2.0))?;
    let kappa = 3.0;
    let domain = lab(build_domain(setup, 1.5, kappa, 1.0, 0.5))?;
    let seq = lab(witness_sequence(&domain, kappa / 2.0, 0.1, 0.6, 15))?;
    ensure(seq.len() == 16, || format!("{} balls", seq.len()))?;
    match witness_sequence(&domain, 2.0 * kappa, 0.1, 0.6, 15) {
        Err(LabError::Witness { j: 0, .. }) => {}
        other => return Err(format!("δ = 2κ should fail at j = 0, got {other:?}")),
    }
    let slack = (0..seq.len())
        .map(|j| seq.clearances[j] / seq.ball_radius(j))
        .fold(f64::INFINITY, f64::min);
    Ok(format!("16 balls verified (min clearance/radius {slack:.3}); δ = 2κ fails at j = 0"))
}

fn main() {
    let criteria: [Criterion; 7] = [
        ("1 sharp constant", Duration::from_secs(10), sharp_constant),
        ("2 scaling reduction", Duration::from_secs(30), scaling_reduction),
        ("3 asymptotic orders", Duration::from_secs(120), asymptotic_orders),
        ("4 strict inequality", Duration::from_secs(60), strict_inequality),
        ("5 linear reduction", Duration::from_secs(10), linear_reduction),
        ("6 ball oracle", Duration::from_secs(120), ball_oracle),
        ("7 witness balls", Duration::from_secs(1), witness),
    ];
    let mut failed = 0;
    for (name, limit, check) in criteria {
        let start = Instant::now();
        let outcome = check();
        let took = start.elapsed();
        let outcome = outcome.and_then(|msg| {
            if took <= limit {
                Ok(msg)
            } else {
                Err(format!("{msg}; exceeded the {limit:?} budget"))
            }
        });
        match outcome {
            Ok(msg) => println!("PASS  {name:<22} {:>9.3}s  {msg}", took.as_secs_f64()),
            Err(msg) => {
                failed += 1;
                println!("FAIL  {name:<22} {:>9.3}s  {msg}", took.as_secs_f64());
            }
        }
    }
    if failed > 0 {
        eprintln!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
}
