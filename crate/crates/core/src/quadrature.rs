//! One-dimensional quadrature used by every integral in the crate.
//!
//! The workhorse is a globally adaptive 7/15-point Gauss-Kronrod rule with
//! user-supplied breakpoints. Power-law tails on `[R, ∞)` are mapped onto a
//! finite interval with a substitution tuned to the known decay exponent, so
//! the mapped integrand stays bounded at the far end.

use crate::error::{LabError, Result};
use serde::Serialize;

/// Kronrod abscissae on [-1, 1] (non-negative half, descending).
const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];

const WGK: [f64; 8] = [
    0.022_935_322_010_529_224,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_18,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_83,
];

/// Gauss weights for the odd-indexed Kronrod nodes 1, 3, 5, 7.
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

/// Value of an integral together with an estimate of its absolute error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Estimate {
    pub value: f64,
    pub abs_error: f64,
}

impl Estimate {
    pub fn new(value: f64, abs_error: f64) -> Self {
        Self { value, abs_error }
    }

    pub fn rel_error(&self) -> f64 {
        if self.value == 0.0 {
            self.abs_error
        } else {
            self.abs_error / self.value.abs()
        }
    }

    pub fn scaled(self, factor: f64) -> Self {
        Self::new(self.value * factor, self.abs_error * factor.abs())
    }
}

impl std::ops::Add for Estimate {
    type Output = Estimate;
    fn add(self, rhs: Estimate) -> Estimate {
        Estimate::new(self.value + rhs.value, self.abs_error + rhs.abs_error)
    }
}

impl std::ops::Sub for Estimate {
    type Output = Estimate;
    fn sub(self, rhs: Estimate) -> Estimate {
        Estimate::new(self.value - rhs.value, self.abs_error + rhs.abs_error)
    }
}

/// Tolerances for the adaptive integrator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerance {
    pub rel: f64,
    pub abs: f64,
    pub max_intervals: usize,
}

impl Tolerance {
    pub fn relative(rel: f64) -> Self {
        Self {
            rel,
            abs: 0.0,
            max_intervals: 4000,
        }
    }
}

impl Default for Tolerance {
    fn default() -> Self {
        Self::relative(1e-11)
    }
}

/// Neumaier-compensated sum.
pub fn compensated_sum<I: IntoIterator<Item = f64>>(values: I) -> f64 {
    let mut sum = 0.0_f64;
    let mut comp = 0.0_f64;
    for v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            comp += (sum - t) + v;
        } else {
            comp += (v - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

#[derive(Debug, Clone, Copy)]
struct Panel {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

fn kronrod_panel<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> Panel {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    let mut abs_sum = fc.abs() * WGK[7];
    for (i, (&x, &w)) in XGK.iter().zip(WGK.iter()).take(7).enumerate() {
        let dx = half * x;
        let f1 = f(center - dx);
        let f2 = f(center + dx);
        kronrod += w * (f1 + f2);
        abs_sum += w * (f1.abs() + f2.abs());
        if i % 2 == 1 {
            gauss += WG[i / 2] * (f1 + f2);
        }
    }
    let value = kronrod * half;
    let round_off = 50.0 * f64::EPSILON * abs_sum * half.abs();
    let error = ((kronrod - gauss) * half).abs().max(round_off);
    Panel { a, b, value, error }
}

/// Globally adaptive Gauss-Kronrod integration of `f` over the panels
/// delimited by `points` (sorted, at least two entries).
pub fn integrate_panels<F: Fn(f64) -> f64>(f: F, points: &[f64], tol: Tolerance) -> Result<Estimate> {
    if points.len() < 2 {
        return Err(LabError::Quadrature("need at least two breakpoints".into()));
    }
    let mut panels: Vec<Panel> = points
        .windows(2)
        .filter(|w| w[1] > w[0])
        .map(|w| kronrod_panel(&f, w[0], w[1]))
        .collect();
    if panels.is_empty() {
        return Ok(Estimate::new(0.0, 0.0));
    }
    loop {
        let total = compensated_sum(panels.iter().map(|p| p.value));
        let err = compensated_sum(panels.iter().map(|p| p.error));
        if !total.is_finite() || !err.is_finite() {
            return Err(LabError::Quadrature(format!(
                "non-finite integrand on [{:e}, {:e}]",
                points[0],
                points[points.len() - 1]
            )));
        }
        if err <= tol.abs.max(tol.rel * total.abs()) {
            return Ok(Estimate::new(total, err));
        }
        if panels.len() >= tol.max_intervals {
            return Err(LabError::Quadrature(format!(
                "tolerance {:e} not reached after {} panels (estimate {:e}, error {:e})",
                tol.rel,
                panels.len(),
                total,
                err
            )));
        }
        let (worst, _) = panels
            .iter()
            .enumerate()
            .fold((0, f64::NEG_INFINITY), |acc, (i, p)| if p.error > acc.1 { (i, p.error) } else { acc });
        let p = panels[worst];
        let mid = 0.5 * (p.a + p.b);
        if mid <= p.a || mid >= p.b {
            return Err(LabError::Quadrature(format!("panel [{:e}, {:e}] cannot be split", p.a, p.b)));
        }
        panels[worst] = kronrod_panel(&f, p.a, mid);
        panels.push(kronrod_panel(&f, mid, p.b));
    }
}

/// Adaptive integration over a single interval.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: Tolerance) -> Result<Estimate> {
    integrate_panels(f, &[a, b], tol)
}

/// Breakpoints `a, a·2, a·4, …` up to `b`, prefixed with 0. Suited to
/// integrands that vary on a logarithmic scale away from the origin.
pub fn geometric_breakpoints(first: f64, last: f64) -> Vec<f64> {
    let mut pts = vec![0.0];
    let mut x = first;
    while x < last {
        pts.push(x);
        x *= 2.0;
    }
    pts.push(last);
    pts
}

/// `∫_start^∞ f(r) dr` for an integrand decaying like `r^{-decay}` with
/// `decay > 1`. Uses `r = start·u^{-1/(decay-1)}`, under which the mapped
/// integrand tends to a constant as `u → 0`.
pub fn power_tail<F: Fn(f64) -> f64>(f: F, start: f64, decay: f64, tol: Tolerance) -> Result<Estimate> {
    if decay <= 1.0 {
        return Err(LabError::NonIntegrable(format!(
            "tail decay exponent {decay} must exceed 1"
        )));
    }
    if start <= 0.0 {
        return Err(LabError::Quadrature("power tail must start at a positive radius".into()));
    }
    let s = 1.0 / (decay - 1.0);
    let mapped = |u: f64| {
        let r = start * u.powf(-s);
        if !r.is_finite() {
            return 0.0;
        }
        let jac = start * s * u.powf(-s - 1.0);
        let v = f(r) * jac;
        if v.is_finite() {
            v
        } else {
            0.0
        }
    };
    integrate_panels(mapped, &[0.0, 1e-6, 1e-3, 0.1, 1.0], tol)
}

/// `∫_0^∞ f(r) dr` for an integrand with a power-law tail of exponent
/// `decay`. The finite part is integrated on `[0, R]` with geometric
/// breakpoints from `scale`; `R` is doubled until the total moves by less
/// than `tol.rel`.
pub fn improper<F: Fn(f64) -> f64>(f: F, scale: f64, decay: f64, tol: Tolerance) -> Result<Estimate> {
    let mut cutoff = 32.0 * scale;
    let total_at = |r_cut: f64| -> Result<Estimate> {
        let head = integrate_panels(&f, &geometric_breakpoints(scale / 64.0, r_cut), tol)?;
        let tail = power_tail(&f, r_cut, decay, tol)?;
        Ok(head + tail)
    };
    let mut previous = total_at(cutoff)?;
    for _ in 0..12 {
        cutoff *= 2.0;
        let next = total_at(cutoff)?;
        let change = (next.value - previous.value).abs();
        if change <= 1e-8 * next.value.abs().max(f64::MIN_POSITIVE) {
            return Ok(Estimate::new(next.value, next.abs_error.max(change)));
        }
        previous = next;
    }
    Err(LabError::Quadrature(
        "truncation radius doubling did not stabilise the improper integral".into(),
    ))
}

/// Gauss-Legendre nodes and weights on [-1, 1] (Newton iteration on P_n).
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1, "Gauss-Legendre rule needs at least one node");
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let nf = n as f64;
    for i in 0..n.div_ceil(2) {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, x);
        dp = if d != 0.0 { d } else { dp };
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}
