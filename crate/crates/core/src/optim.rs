//! Limited-memory BFGS with a backtracking Armijo line search.

use crate::error::{LabError, Result};
use std::collections::VecDeque;

#[derive(Debug, Clone, Copy)]
pub struct LbfgsOptions {
    pub memory: usize,
    pub max_iter: usize,
    /// Stop once `‖∇f‖_∞ ≤ grad_tol`.
    pub grad_tol: f64,
    /// Or once the objective stalls below this relative change for 5 steps.
    pub stall_tol: f64,
}

impl Default for LbfgsOptions {
    fn default() -> Self {
        Self {
            memory: 12,
            max_iter: 20_000,
            grad_tol: 1e-11,
            stall_tol: 1e-15,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Minimum {
    pub x: Vec<f64>,
    pub value: f64,
    pub grad_norm: f64,
    pub iterations: usize,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn inf_norm(a: &[f64]) -> f64 {
    a.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
}

/// Minimise `f`, which writes its gradient into the second argument and
/// returns the objective value.
pub fn lbfgs<F>(f: F, x0: Vec<f64>, opts: LbfgsOptions) -> Result<Minimum>
where
    F: Fn(&[f64], &mut [f64]) -> f64,
{
    let n = x0.len();
    let mut x = x0;
    let mut g = vec![0.0; n];
    let mut fx = f(&x, &mut g);
    if !fx.is_finite() {
        return Err(LabError::Convergence("objective is not finite at the start point".into()));
    }
    let mut history: VecDeque<(Vec<f64>, Vec<f64>, f64)> = VecDeque::with_capacity(opts.memory);
    let mut stall = 0;
    let mut x_new = vec![0.0; n];
    let mut g_new = vec![0.0; n];
    for iter in 0..opts.max_iter {
        let gnorm = inf_norm(&g);
        if gnorm <= opts.grad_tol || stall >= 5 {
            return Ok(Minimum { x, value: fx, grad_norm: gnorm, iterations: iter });
        }
        // two-loop recursion
        let mut d: Vec<f64> = g.iter().map(|v| -v).collect();
        let mut alphas = Vec::with_capacity(history.len());
        for (s, y, rho) in history.iter().rev() {
            let a = rho * dot(s, &d);
            for (di, yi) in d.iter_mut().zip(y) {
                *di -= a * yi;
            }
            alphas.push(a);
        }
        if let Some((s, y, _)) = history.back() {
            let gamma = dot(s, y) / dot(y, y);
            d.iter_mut().for_each(|v| *v *= gamma);
        } else {
            let scale = 1.0 / gnorm.max(1e-300);
            d.iter_mut().for_each(|v| *v *= scale * 1e-2);
        }
        for ((s, y, rho), a) in history.iter().zip(alphas.iter().rev()) {
            let b = rho * dot(y, &d);
            for (di, si) in d.iter_mut().zip(s) {
                *di += (a - b) * si;
            }
        }
        let mut slope = dot(&g, &d);
        if slope >= 0.0 {
            history.clear();
            d = g.iter().map(|v| -v * 1e-2 / gnorm).collect();
            slope = dot(&g, &d);
        }
        let mut step = 1.0;
        let mut accepted = false;
        let mut f_new = fx;
        for _ in 0..60 {
            for i in 0..n {
                x_new[i] = x[i] + step * d[i];
            }
            f_new = f(&x_new, &mut g_new);
            if f_new.is_finite() && f_new <= fx + 1e-4 * step * slope {
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if !accepted {
            // No descent possible at working precision.
            return Ok(Minimum { x, value: fx, grad_norm: gnorm, iterations: iter });
        }
        let s: Vec<f64> = x_new.iter().zip(&x).map(|(a, b)| a - b).collect();
        let y: Vec<f64> = g_new.iter().zip(&g).map(|(a, b)| a - b).collect();
        let sy = dot(&s, &y);
        if sy > 1e-300 {
            if history.len() == opts.memory {
                history.pop_front();
            }
            history.push_back((s, y, 1.0 / sy));
        }
        if (fx - f_new).abs() <= opts.stall_tol * fx.abs().max(1.0) {
            stall += 1;
        } else {
            stall = 0;
        }
        std::mem::swap(&mut x, &mut x_new);
        std::mem::swap(&mut g, &mut g_new);
        fx = f_new;
    }
    Err(LabError::Convergence(format!(
        "L-BFGS did not converge in {} iterations (|grad| = {:e})",
        opts.max_iter,
        inf_norm(&g)
    )))
}
