//! Dormand-Prince 5(4) integrator with step-size control and quintic Hermite
//! interpolation between accepted steps.

use crate::error::{LabError, Result};

const C: [f64; 7] = [0.0, 0.2, 0.3, 0.8, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [0.2, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
/// Fifth-order minus embedded fourth-order weights.
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Dopri5 {
    pub rtol: f64,
    pub atol: f64,
    pub max_steps: usize,
}

impl Default for Dopri5 {
    fn default() -> Self {
        Self {
            rtol: 1e-12,
            atol: 1e-14,
            max_steps: 1_000_000,
        }
    }
}

/// Accepted state with its derivative.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Node<const N: usize> {
    pub t: f64,
    pub y: [f64; N],
    pub dy: [f64; N],
}

/// Why an integration stopped.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Stop {
    /// Reached the end of the interval.
    End,
    /// The event function changed sign inside the last step.
    Event,
}

fn add<const N: usize>(y: &[f64; N], h: f64, ks: &[[f64; N]], w: &[f64]) -> [f64; N] {
    let mut out = *y;
    for (k, &wi) in ks.iter().zip(w) {
        if wi != 0.0 {
            for i in 0..N {
                out[i] += h * wi * k[i];
            }
        }
    }
    out
}

impl Dopri5 {
    /// Integrate `y' = f(t, y)` from `t0` to `t_end`, stopping early after the
    /// first step on which `event(y)` becomes non-positive. `guard(y)` is
    /// called on every accepted state and may abort the run.
    #[allow(clippy::too_many_arguments)]
    pub fn integrate<const N: usize, F, G, V>(
        &self,
        f: F,
        t0: f64,
        y0: [f64; N],
        t_end: f64,
        h0: f64,
        event: V,
        guard: G,
    ) -> Result<(Vec<Node<N>>, Stop)>
    where
        F: Fn(f64, &[f64; N]) -> [f64; N],
        V: Fn(&[f64; N]) -> f64,
        G: Fn(f64, &[f64; N]) -> Result<()>,
    {
        let mut t = t0;
        let mut y = y0;
        let mut k1 = f(t, &y);
        let mut nodes = vec![Node { t, y, dy: k1 }];
        let mut h = h0.min(t_end - t0);
        let mut steps = 0;
        while t < t_end {
            steps += 1;
            if steps > self.max_steps {
                return Err(LabError::Convergence(format!("step limit reached at t = {t:e}")));
            }
            let h_try = h.min(t_end - t);
            let mut ks = [[0.0; N]; 7];
            ks[0] = k1;
            for s in 1..7 {
                let ys = add(&y, h_try, &ks[..s], &A[s][..s]);
                ks[s] = f(t + C[s] * h_try, &ys);
            }
            let y_new = add(&y, h_try, &ks[..6], &A[6][..6]);
            let mut err = 0.0;
            for i in 0..N {
                let e: f64 = (0..7).map(|s| E[s] * ks[s][i]).sum::<f64>() * h_try;
                let scale = self.atol + self.rtol * y[i].abs().max(y_new[i].abs());
                err += (e / scale).powi(2);
            }
            let err = (err / N as f64).sqrt();
            if !err.is_finite() {
                h = 0.1 * h_try;
                if h <= f64::EPSILON * t.abs() {
                    return Err(LabError::Convergence(format!("non-finite derivative at t = {t:e}")));
                }
                continue;
            }
            if err <= 1.0 {
                t = if h_try == t_end - t { t_end } else { t + h_try };
                y = y_new;
                k1 = ks[6];
                nodes.push(Node { t, y, dy: k1 });
                guard(t, &y)?;
                if event(&y) <= 0.0 {
                    return Ok((nodes, Stop::Event));
                }
            }
            let factor = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
            h = h_try * if err <= 1.0 { factor } else { factor.min(1.0) };
            if h <= f64::EPSILON * t.abs().max(f64::MIN_POSITIVE) {
                return Err(LabError::Convergence(format!("step size underflow at t = {t:e}")));
            }
        }
        Ok((nodes, Stop::End))
    }
}

/// Quintic Hermite interpolant of a scalar on `[t0, t1]` from value, first
/// and second derivative at both ends.
#[derive(Debug, Clone, Copy)]
pub struct Hermite5 {
    t0: f64,
    h: f64,
    c: [f64; 6],
}

impl Hermite5 {
    pub fn new(t0: f64, t1: f64, (y0, d0, s0): (f64, f64, f64), (y1, d1, s1): (f64, f64, f64)) -> Self {
        let h = t1 - t0;
        // Coefficients of y(t0 + h·x) in powers of x.
        let a0 = y0;
        let a1 = h * d0;
        let a2 = 0.5 * h * h * s0;
        let r0 = y1 - a0 - a1 - a2;
        let r1 = h * d1 - a1 - 2.0 * a2;
        let r2 = h * h * s1 - 2.0 * a2;
        let a3 = 10.0 * r0 - 4.0 * r1 + 0.5 * r2;
        let a4 = -15.0 * r0 + 7.0 * r1 - r2;
        let a5 = 6.0 * r0 - 3.0 * r1 + 0.5 * r2;
        Self { t0, h, c: [a0, a1, a2, a3, a4, a5] }
    }

    pub fn value(&self, t: f64) -> f64 {
        let x = (t - self.t0) / self.h;
        self.c.iter().rev().fold(0.0, |acc, c| acc * x + c)
    }

    pub fn derivative(&self, t: f64) -> f64 {
        let x = (t - self.t0) / self.h;
        let mut acc = 0.0;
        for k in (1..6).rev() {
            acc = acc * x + k as f64 * self.c[k];
        }
        acc / self.h
    }

    /// Root in the interval, assuming a sign change between the ends.
    pub fn root(&self) -> f64 {
        let (mut a, mut b) = (self.t0, self.t0 + self.h);
        let fa = self.value(a);
        for _ in 0..200 {
            let m = 0.5 * (a + b);
            if m <= a || m >= b {
                break;
            }
            if (self.value(m) > 0.0) == (fa > 0.0) {
                a = m;
            } else {
                b = m;
            }
        }
        0.5 * (a + b)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn harmonic_oscillator_is_accurate() {
        let solver = Dopri5::default();
        let (nodes, stop) = solver
            .integrate(|_, y: &[f64; 2]| [y[1], -y[0]], 0.0, [0.0, 1.0], 10.0, 1e-3, |_| 1.0, |_, _| Ok(()))
            .unwrap();
        assert_eq!(stop, Stop::End);
        let last = nodes.last().unwrap();
        assert_eq!(last.t, 10.0);
        assert!((last.y[0] - 10f64.sin()).abs() < 1e-10);
        assert!((last.y[1] - 10f64.cos()).abs() < 1e-10);
    }

    #[test]
    fn event_stops_after_sign_change() {
        let solver = Dopri5::default();
        let (nodes, stop) = solver
            .integrate(|_, y: &[f64; 2]| [y[1], -y[0]], 0.0, [1.0, 0.0], 10.0, 1e-3, |y| y[0], |_, _| Ok(()))
            .unwrap();
        assert_eq!(stop, Stop::Event);
        let (a, b) = (nodes[nodes.len() - 2], nodes[nodes.len() - 1]);
        let h = Hermite5::new(a.t, b.t, (a.y[0], a.dy[0], a.dy[1]), (b.y[0], b.dy[0], b.dy[1]));
        assert!((h.root() - std::f64::consts::FRAC_PI_2).abs() < 1e-11);
    }

    #[test]
    fn hermite_reproduces_quintics() {
        let p = |t: f64| 1.0 - 2.0 * t + 0.5 * t.powi(3) + 0.25 * t.powi(5);
        let dp = |t: f64| -2.0 + 1.5 * t * t + 1.25 * t.powi(4);
        let ddp = |t: f64| 3.0 * t + 5.0 * t.powi(3);
        let h = Hermite5::new(0.3, 1.7, (p(0.3), dp(0.3), ddp(0.3)), (p(1.7), dp(1.7), ddp(1.7)));
        for i in 0..=20 {
            let t = 0.3 + 1.4 * i as f64 / 20.0;
            assert!((h.value(t) - p(t)).abs() < 1e-13);
            assert!((h.derivative(t) - dp(t)).abs() < 1e-12);
        }
    }
}
