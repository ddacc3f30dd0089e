//! Radial shooting for `−Δu = u^{2*−1} + λu` on the unit ball.
//!
//! Radial solutions satisfy `u'' + ((n−1)/r)u' + u^{2*−1} + λu = 0`,
//! `u(0) = s`, `u'(0) = 0`. A positive Dirichlet solution exists exactly when
//! some height `s` puts the first zero of the shot at `r = 1`.

use crate::error::{LabError, Result};
use crate::ode::{Dopri5, Hermite5, Node, Stop};
use crate::quadrature::gauss_legendre;
use rayon::prelude::*;
use serde::Serialize;

/// Start radius of the series expansion at the centre.
pub const START_RADIUS: f64 = 1e-6;
/// `|u|` above this aborts a shot.
pub const OVERFLOW_GUARD: f64 = 1e150;
/// Shooting heights scanned by [`solve_ball`].
pub const SEARCH_RANGE: (f64, f64) = (1e-2, 1e6);
pub const SEARCH_SEEDS: usize = 200;
/// Required `|first_zero − 1|` of an accepted ball solution.
pub const ZERO_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShootOptions {
    /// Integration stops here if no zero was met.
    pub r_end: f64,
    /// Drop the critical nonlinearity and solve `u'' + ((n−1)/r)u' + λu = 0`.
    pub linear: bool,
    pub solver: Dopri5,
}

impl Default for ShootOptions {
    fn default() -> Self {
        Self {
            r_end: 1.5,
            linear: false,
            solver: Dopri5::default(),
        }
    }
}

/// One radial shot.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RadialProfile {
    pub n: usize,
    pub lambda: f64,
    pub shoot_height: f64,
    pub linear: bool,
    /// Accepted integrator nodes, starting at `r = 0` and ending at the first
    /// zero or at the end of the integration range.
    pub grid: Vec<f64>,
    pub values: Vec<f64>,
    pub slopes: Vec<f64>,
    pub first_zero: Option<f64>,
}

impl RadialProfile {
    fn exponent(&self) -> f64 {
        (self.n as f64 + 2.0) / (self.n as f64 - 2.0)
    }

    fn source(&self, u: f64) -> f64 {
        source(u, self.exponent(), self.lambda, self.linear)
    }

    /// Relative residual of the flux form
    /// `r^{n−1}u'(r) + ∫₀ʳ t^{n−1}(u^{2*−1} + λu) dt = 0` over all nodes,
    /// with the integral taken on the quintic interpolant of each step.
    pub fn residual(&self) -> f64 {
        let n = self.n as f64;
        let (gx, gw) = gauss_legendre(8);
        let second = |r: f64, u: f64, du: f64| -(n - 1.0) / r * du - self.source(u);
        // Series part of the integral on [0, r₁].
        let r1 = self.grid[1];
        let mut integral = self.source(self.shoot_height) * r1.powf(n) / n;
        let mut worst: f64 = 0.0;
        let mut scale: f64 = 0.0;
        for i in 1..self.grid.len() {
            let (a, b) = (self.grid[i - 1], self.grid[i]);
            if i > 1 {
                let h = Hermite5::new(
                    a,
                    b,
                    (self.values[i - 1], self.slopes[i - 1], second(a, self.values[i - 1], self.slopes[i - 1])),
                    (self.values[i], self.slopes[i], second(b, self.values[i], self.slopes[i])),
                );
                let half = 0.5 * (b - a);
                let mid = 0.5 * (a + b);
                integral += gx
                    .iter()
                    .zip(&gw)
                    .map(|(&x, &w)| {
                        let t = mid + half * x;
                        w * half * t.powf(n - 1.0) * self.source(h.value(t))
                    })
                    .sum::<f64>();
            }
            let flux = b.powf(n - 1.0) * self.slopes[i];
            scale = scale.max(flux.abs()).max(integral.abs());
            worst = worst.max((flux + integral).abs());
        }
        if scale == 0.0 {
            0.0
        } else {
            worst / scale
        }
    }

    /// Interpolated value at `r` inside the integrated range.
    pub fn value_at(&self, r: f64) -> Option<f64> {
        let last = *self.grid.last()?;
        if !(0.0..=last).contains(&r) {
            return None;
        }
        if r <= self.grid[1] {
            let g = self.source(self.shoot_height);
            return Some(self.shoot_height - g * r * r / (2.0 * self.n as f64));
        }
        let i = self.grid.partition_point(|&t| t < r).max(2);
        let n = self.n as f64;
        let second = |r: f64, u: f64, du: f64| -(n - 1.0) / r * du - self.source(u);
        let (a, b) = (self.grid[i - 1], self.grid[i]);
        let h = Hermite5::new(
            a,
            b,
            (self.values[i - 1], self.slopes[i - 1], second(a, self.values[i - 1], self.slopes[i - 1])),
            (self.values[i], self.slopes[i], second(b, self.values[i], self.slopes[i])),
        );
        Some(h.value(r))
    }
}

fn source(u: f64, q: f64, lambda: f64, linear: bool) -> f64 {
    let nonlinear = if linear { 0.0 } else { u.abs().powf(q - 1.0) * u };
    nonlinear + lambda * u
}

/// Shoot with the default options.
pub fn shoot(n: usize, lambda: f64, s: f64) -> Result<RadialProfile> {
    shoot_with(n, lambda, s, &ShootOptions::default())
}

pub fn shoot_with(n: usize, lambda: f64, s: f64, opts: &ShootOptions) -> Result<RadialProfile> {
    let min_n = if opts.linear { 2 } else { 3 };
    if n < min_n {
        return Err(LabError::Dimension(format!("radial shooting needs n ≥ {min_n}, got {n}")));
    }
    if !(s > 0.0 && s.is_finite()) {
        return Err(LabError::InvalidParameter(format!("shooting height must be positive, got {s}")));
    }
    if !lambda.is_finite() {
        return Err(LabError::InvalidParameter(format!("λ must be finite, got {lambda}")));
    }
    let nf = n as f64;
    // Exponent 2* − 1; unused in linear mode, where n = 2 is allowed.
    let q = if n > 2 { (nf + 2.0) / (nf - 2.0) } else { 1.0 };
    let g0 = source(s, q, lambda, opts.linear);
    // Intrinsic length of the shot: the bubble core for large s, the
    // oscillation length for large λ.
    let core = if opts.linear { 1.0 } else { s.powf(-2.0 / (nf - 2.0)) };
    let length = core.min(1.0).min(1.0 / lambda.abs().max(1e-300).sqrt());
    let r0 = START_RADIUS * length;
    if r0 >= opts.r_end {
        return Err(LabError::InvalidParameter(format!("integration range {} is too short", opts.r_end)));
    }
    let y0 = [s - g0 * r0 * r0 / (2.0 * nf), -g0 * r0 / nf];
    let rhs = |r: f64, y: &[f64; 2]| [y[1], -(nf - 1.0) / r * y[1] - source(y[0], q, lambda, opts.linear)];
    let guard = |r: f64, y: &[f64; 2]| {
        if y[0].abs() > OVERFLOW_GUARD || !y[0].is_finite() {
            Err(LabError::Blowup { r, value: y[0] })
        } else {
            Ok(())
        }
    };
    let (nodes, stop) = opts.solver.integrate(rhs, r0, y0, opts.r_end, 0.1 * r0, |y| y[0], guard)?;
    let mut grid = Vec::with_capacity(nodes.len() + 1);
    let mut values = Vec::with_capacity(nodes.len() + 1);
    let mut slopes = Vec::with_capacity(nodes.len() + 1);
    grid.push(0.0);
    values.push(s);
    slopes.push(0.0);
    let push = |grid: &mut Vec<f64>, values: &mut Vec<f64>, slopes: &mut Vec<f64>, node: &Node<2>| {
        grid.push(node.t);
        values.push(node.y[0]);
        slopes.push(node.y[1]);
    };
    let first_zero = match stop {
        Stop::End => {
            for node in &nodes {
                push(&mut grid, &mut values, &mut slopes, node);
            }
            None
        }
        Stop::Event => {
            let (a, b) = (nodes[nodes.len() - 2], nodes[nodes.len() - 1]);
            let h = Hermite5::new(a.t, b.t, (a.y[0], a.dy[0], a.dy[1]), (b.y[0], b.dy[0], b.dy[1]));
            let z = if b.y[0] == 0.0 { b.t } else { h.root() };
            for node in &nodes[..nodes.len() - 1] {
                push(&mut grid, &mut values, &mut slopes, node);
            }
            if z > a.t {
                grid.push(z);
                values.push(0.0);
                slopes.push(h.derivative(z));
            }
            Some(z)
        }
    };
    Ok(RadialProfile {
        n,
        lambda,
        shoot_height: s,
        linear: opts.linear,
        grid,
        values,
        slopes,
        first_zero,
    })
}

/// First Dirichlet eigenvalue of `−Δ` on the unit ball in `ℝⁿ`.
///
/// The linear shot with `λ = 1` vanishes first at `j`, the first zero of
/// `r^{1−n/2}J_{n/2−1}(r)`; rescaling gives `λ₁ = j²`.
pub fn principal_eigenvalue(n: usize) -> Result<f64> {
    principal_eigenvalue_with(n, Dopri5::default())
}

pub fn principal_eigenvalue_with(n: usize, solver: Dopri5) -> Result<f64> {
    let opts = ShootOptions {
        r_end: 10.0 + n as f64,
        linear: true,
        solver,
    };
    let shot = shoot_with(n, 1.0, 1.0, &opts)?;
    let z = shot
        .first_zero
        .ok_or_else(|| LabError::Convergence(format!("no eigenfunction zero below r = {}", opts.r_end)))?;
    Ok(z * z)
}

/// Outcome of the search for a positive solution on the unit ball.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum BallOutcome {
    Solution { shoot_height: f64, profile: RadialProfile },
    /// No scanned height brackets `first_zero = 1`. The bounds describe the
    /// first zeros met during the scan (`None` where no zero was found in
    /// the integration range).
    NoSolution { smallest_zero: Option<f64>, largest_zero: Option<f64> },
}

impl BallOutcome {
    pub fn is_solution(&self) -> bool {
        matches!(self, Self::Solution { .. })
    }

    pub fn shoot_height(&self) -> Option<f64> {
        match self {
            Self::Solution { shoot_height, .. } => Some(*shoot_height),
            Self::NoSolution { .. } => None,
        }
    }
}

/// Log-spaced heights over [`SEARCH_RANGE`].
pub fn search_heights() -> Vec<f64> {
    let (lo, hi) = (SEARCH_RANGE.0.ln(), SEARCH_RANGE.1.ln());
    (0..SEARCH_SEEDS)
        .map(|i| (lo + (hi - lo) * i as f64 / (SEARCH_SEEDS - 1) as f64).exp())
        .collect()
}

/// Missing zeros count as beyond the unit radius.
fn zero_or_far(p: &RadialProfile) -> f64 {
    p.first_zero.unwrap_or(f64::INFINITY)
}

/// Scan the shooting heights and bisect (in `ln s`) on the first pair whose
/// first zeros straddle `r = 1`.
pub fn solve_ball(n: usize, lambda: f64) -> Result<BallOutcome> {
    solve_ball_with(n, lambda, Dopri5::default())
}

pub fn solve_ball_with(n: usize, lambda: f64, solver: Dopri5) -> Result<BallOutcome> {
    if n < 3 {
        return Err(LabError::Dimension(format!("the critical problem needs n ≥ 3, got {n}")));
    }
    if !(lambda > 0.0) {
        return Err(LabError::InvalidParameter(format!("λ must be positive, got {lambda}")));
    }
    let opts = ShootOptions {
        solver,
        ..ShootOptions::default()
    };
    let heights = search_heights();
    let shots = heights
        .par_iter()
        .map(|&s| shoot_with(n, lambda, s, &opts))
        .collect::<Result<Vec<_>>>()?;
    let zeros: Vec<f64> = shots.iter().map(zero_or_far).collect();
    let Some(k) = (1..zeros.len()).find(|&k| (zeros[k - 1] - 1.0).signum() != (zeros[k] - 1.0).signum()) else {
        let found: Vec<f64> = zeros.iter().copied().filter(|z| z.is_finite()).collect();
        return Ok(BallOutcome::NoSolution {
            smallest_zero: found.iter().copied().reduce(f64::min),
            largest_zero: found.iter().copied().reduce(f64::max),
        });
    };
    let above_at_lo = zeros[k - 1] > 1.0;
    let (mut lo, mut hi) = (heights[k - 1].ln(), heights[k].ln());
    let mut best = if (zeros[k - 1] - 1.0).abs() < (zeros[k] - 1.0).abs() {
        shots[k - 1].clone()
    } else {
        shots[k].clone()
    };
    for _ in 0..200 {
        if (zero_or_far(&best) - 1.0).abs() < ZERO_TOLERANCE {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let shot = shoot_with(n, lambda, mid.exp(), &opts)?;
        let z = zero_or_far(&shot);
        if (z > 1.0) == above_at_lo {
            lo = mid;
        } else {
            hi = mid;
        }
        if (z - 1.0).abs() < (zero_or_far(&best) - 1.0).abs() {
            best = shot;
        }
    }
    let miss = (zero_or_far(&best) - 1.0).abs();
    if miss >= ZERO_TOLERANCE {
        return Err(LabError::Convergence(format!(
            "bisection stalled with |first_zero − 1| = {miss:e}"
        )));
    }
    Ok(BallOutcome::Solution {
        shoot_height: best.shoot_height,
        profile: best,
    })
}

/// Threshold of the existence predicate within `[0, λ₁)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Threshold {
    pub n: usize,
    pub lambda1: f64,
    /// Midpoint of the final bracket.
    pub lambda: f64,
    /// Largest `λ` found without a solution (0 if none was tested).
    pub lower: f64,
    /// Smallest `λ` found with a solution.
    pub upper: f64,
}

impl Threshold {
    pub fn fraction_of_lambda1(&self) -> f64 {
        self.lambda / self.lambda1
    }
}

/// Bisection in `λ` on the predicate "[`solve_ball`] finds a solution", to a
/// bracket of width at most 1% of `λ₁` (so the midpoint is within ±0.5%).
///
/// Heights are capped by [`SEARCH_RANGE`], so when the true threshold is 0
/// the result is a positive numerical floor.
pub fn existence_threshold(n: usize) -> Result<Threshold> {
    existence_threshold_with(n, Dopri5::default())
}

pub fn existence_threshold_with(n: usize, solver: Dopri5) -> Result<Threshold> {
    let lambda1 = principal_eigenvalue_with(n, solver)?;
    let (mut lower, mut upper) = (0.0, 0.99 * lambda1);
    if !solve_ball_with(n, upper, solver)?.is_solution() {
        return Err(LabError::Convergence(format!(
            "no solution found even at λ = {upper} (0.99·λ₁)"
        )));
    }
    while upper - lower > 0.01 * lambda1 {
        let mid = 0.5 * (lower + upper);
        if solve_ball_with(n, mid, solver)?.is_solution() {
            upper = mid;
        } else {
            lower = mid;
        }
    }
    Ok(Threshold {
        n,
        lambda1,
        lambda: 0.5 * (lower + upper),
        lower,
        upper,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    /// First zero of `J₀` from its power series, by bisection.
    fn bessel_j0_zero() -> f64 {
        let j0 = |x: f64| {
            let mut term = 1.0;
            let mut sum = 1.0;
            for k in 1..60 {
                term *= -(x * x) / (4.0 * (k * k) as f64);
                sum += term;
            }
            sum
        };
        let (mut a, mut b) = (2.0, 3.0);
        for _ in 0..100 {
            let m = 0.5 * (a + b);
            if j0(m) > 0.0 {
                a = m;
            } else {
                b = m;
            }
        }
        0.5 * (a + b)
    }

    #[test]
    fn linear_mode_reproduces_sine_eigenfunction() {
        let opts = ShootOptions {
            linear: true,
            ..ShootOptions::default()
        };
        let shot = shoot_with(3, PI * PI, 2.0, &opts).unwrap();
        assert!((shot.first_zero.unwrap() - 1.0).abs() < 1e-9);
        for (&r, &u) in shot.grid.iter().zip(&shot.values).skip(1) {
            let exact = 2.0 * (PI * r).sin() / (PI * r);
            assert!((u - exact).abs() < 1e-9, "r = {r}: {u} vs {exact}");
        }
    }

    #[test]
    fn principal_eigenvalues_match_bessel_zeros() {
        assert!((principal_eigenvalue(3).unwrap() / (PI * PI) - 1.0).abs() < 1e-9);
        let j = bessel_j0_zero();
        assert!((principal_eigenvalue(2).unwrap() / (j * j) - 1.0).abs() < 1e-9);
        // j_{3/2,1} = 4.493409457909064, first positive root of tan x = x.
        let j32 = 4.493409457909064f64;
        assert!((principal_eigenvalue(5).unwrap() / (j32 * j32) - 1.0).abs() < 1e-9);
    }

    #[test]
    fn eigenvalue_is_stable_under_tighter_steps() {
        let coarse = principal_eigenvalue(5).unwrap();
        let fine = principal_eigenvalue_with(
            5,
            Dopri5 {
                rtol: 1e-12 / 32.0,
                atol: 1e-14 / 32.0,
                ..Dopri5::default()
            },
        )
        .unwrap();
        assert!((coarse / fine - 1.0).abs() < 1e-6);
    }

    #[test]
    fn shots_satisfy_the_equation() {
        for &(n, lambda, s) in &[(3, 5.0, 1.0), (3, 5.0, 300.0), (4, 10.0, 50.0), (6, 20.0, 1e3), (5, 0.0, 1e5)] {
            let shot = shoot(n, lambda, s).unwrap();
            let res = shot.residual();
            assert!(res < 1e-8, "n = {n}, λ = {lambda}, s = {s}: residual {res:e}");
            assert_eq!(shot.values[0], s);
            assert_eq!(shot.slopes[0], 0.0);
            let end = shot.grid.len() - usize::from(shot.first_zero.is_some());
            assert!(shot.values[..end].iter().all(|&u| u > 0.0));
        }
    }

    #[test]
    fn first_zero_is_stable_under_tighter_steps() {
        for &(n, lambda, s) in &[(3, 6.0, 10.0), (4, 5.0, 100.0), (5, 10.0, 1e4)] {
            let coarse = shoot(n, lambda, s).unwrap().first_zero.unwrap();
            let opts = ShootOptions {
                solver: Dopri5 {
                    rtol: 1e-12 / 32.0,
                    atol: 1e-14 / 32.0,
                    ..Dopri5::default()
                },
                ..ShootOptions::default()
            };
            let fine = shoot_with(n, lambda, s, &opts).unwrap().first_zero.unwrap();
            assert!((coarse - fine).abs() < 1e-8, "{coarse} vs {fine}");
        }
    }

    #[test]
    fn zero_lambda_shots_are_positive_and_self_similar() {
        // With λ = 0 the shot is the entire Aubin–Talenti profile, which never
        // vanishes, and u_s(r) = s·u_1(s^{2/(n−2)}r).
        for n in [3usize, 5] {
            let opts = ShootOptions {
                r_end: 20.0,
                ..ShootOptions::default()
            };
            let base = shoot_with(n, 0.0, 1.0, &opts).unwrap();
            assert!(base.first_zero.is_none());
            for s in [0.3f64, 7.0] {
                let k = s.powf(2.0 / (n as f64 - 2.0));
                let shot = shoot_with(n, 0.0, s, &ShootOptions { r_end: 20.0 / k, ..opts }).unwrap();
                assert!(shot.first_zero.is_none());
                for r in [0.1, 1.0, 5.0, 15.0] {
                    let lhs = shot.value_at(r / k).unwrap() / s;
                    let rhs = base.value_at(r).unwrap();
                    assert!((lhs / rhs - 1.0).abs() < 1e-6, "n = {n}, s = {s}, r = {r}");
                }
            }
            // Exact profile in n = 3: (1 + r²/3)^{−1/2}.
            if n == 3 {
                let u = base.value_at(4.0).unwrap();
                assert!((u - (1.0f64 + 16.0 / 3.0).powf(-0.5)).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn blowup_is_reported() {
        let opts = ShootOptions {
            r_end: 1.0,
            linear: true,
            ..ShootOptions::default()
        };
        // u'' + (2/r)u' − 10⁶u = 0 grows like e^{1000r}/r.
        let err = shoot_with(3, -1e6, 1.0, &opts).unwrap_err();
        assert!(matches!(err, LabError::Blowup { .. }));
    }

    #[test]
    fn ball_solutions_in_three_dimensions() {
        let sol = solve_ball(3, 0.5 * PI * PI).unwrap();
        let BallOutcome::Solution { profile, .. } = &sol else {
            panic!("expected a solution")
        };
        assert!((profile.first_zero.unwrap() - 1.0).abs() < ZERO_TOLERANCE);
        let last = profile.values.len() - 1;
        assert!(profile.values[..last].iter().all(|&u| u > 0.0));
        assert!(!solve_ball(3, 0.1 * PI * PI).unwrap().is_solution());
    }

    #[test]
    fn ball_solution_in_four_dimensions_at_small_lambda() {
        let l1 = principal_eigenvalue(4).unwrap();
        assert!(solve_ball(4, 0.1 * l1).unwrap().is_solution());
    }

    #[test]
    fn first_zero_range_shrinks_as_lambda_grows() {
        // Largest first zero (s → 0, linear limit π/√λ) and smallest (s large,
        // approaching π/(2√λ) from below) both decrease in λ.
        let opts = ShootOptions {
            r_end: 10.0,
            ..ShootOptions::default()
        };
        let mut prev = (f64::INFINITY, f64::INFINITY);
        for f in [0.3, 0.45, 0.6, 0.75, 0.9] {
            let lambda = f * PI * PI;
            let hi = shoot_with(3, lambda, SEARCH_RANGE.0, &opts).unwrap().first_zero.unwrap();
            let lo = shoot_with(3, lambda, SEARCH_RANGE.1, &opts).unwrap().first_zero.unwrap();
            assert!((hi * lambda.sqrt() / PI - 1.0).abs() < 1e-3);
            let gap = lo * lambda.sqrt() / (0.5 * PI) - 1.0;
            assert!(gap < 0.0 && gap > -5e-3, "λ = {f}π²: {gap}");
            assert!(hi < prev.0 && lo < prev.1);
            prev = (hi, lo);
        }
    }
}
