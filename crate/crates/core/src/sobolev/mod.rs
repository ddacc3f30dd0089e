//! Extremal functions of the sharp Sobolev inequality on ℝⁿ.
//!
//! The instanton is the radial profile `v₁(r) = c·(1 + r^{p/(p−1)})^{−(n−p)/p}`
//! with `c` fixed so that `∫ v₁^{p*} = 1`. Its rescalings
//! `v_ε(x) = ε^{−n/p*} v₁(x/ε)` keep both the critical norm and the gradient
//! energy, and the gradient energy equals `K(n,p)^{−p}`.

mod rayleigh;

pub use rayleigh::{radial_rayleigh_minimum, RayleighGrid};

use crate::error::{LabError, Result};
use crate::quadrature::{self, Estimate, Tolerance};
use serde::Serialize;
use libm::lgamma as ln_gamma;

/// Dimension and exponent of a critical Sobolev problem.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SobolevSetup {
    pub n: usize,
    pub p: f64,
    pub p_star: f64,
    /// `n > p²`: the `L^p` mass of the instanton is finite.
    pub supercritical_dim: bool,
}

/// Validate `1 < p < n` and derive `p* = np/(n−p)`.
pub fn make_setup(n: usize, p: f64) -> Result<SobolevSetup> {
    let nf = n as f64;
    if n < 2 || !(p > 1.0 && p < nf) || !p.is_finite() {
        return Err(LabError::Dimension(format!("need n ≥ 2 and 1 < p < n, got n = {n}, p = {p}")));
    }
    Ok(SobolevSetup {
        n,
        p,
        p_star: nf * p / (nf - p),
        supercritical_dim: nf > p * p,
    })
}

impl SobolevSetup {
    pub fn dim(&self) -> f64 {
        self.n as f64
    }

    /// Exponent `p/(p−1)` of `r` inside the instanton profile.
    pub fn conjugate(&self) -> f64 {
        self.p / (self.p - 1.0)
    }

    /// Power-law decay rate `(n−p)/(p−1)` of the instanton.
    pub fn decay_exponent(&self) -> f64 {
        (self.dim() - self.p) / (self.p - 1.0)
    }

    /// Measure of the unit sphere `S^{n−1}`.
    pub fn sphere_area(&self) -> f64 {
        sphere_area(self.n)
    }
}

/// `|S^{d−1}| = 2π^{d/2}/Γ(d/2)`; `d = 1` gives the two-point sphere.
pub fn sphere_area(d: usize) -> f64 {
    let h = d as f64 / 2.0;
    2.0 * (h * std::f64::consts::PI.ln() - ln_gamma(h)).exp()
}

/// `ln(1 + r^q)` without overflow for large `r`.
fn ln_one_plus_pow(r: f64, q: f64) -> f64 {
    if r <= 1.0 {
        r.powf(q).ln_1p()
    } else {
        q * r.ln() + r.powf(-q).ln_1p()
    }
}

/// `r^{q−1}/(1 + r^q)` without overflow.
fn pow_ratio(r: f64, q: f64) -> f64 {
    if r <= 1.0 {
        r.powf(q - 1.0) / (1.0 + r.powf(q))
    } else {
        1.0 / (r * (1.0 + r.powf(-q)))
    }
}

/// The unit-norm Aubin-Talenti profile.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Instanton {
    pub setup: SobolevSetup,
    pub normalization: f64,
    pub decay_exponent: f64,
}

impl Instanton {
    /// Fix the peak value `c` from the critical-norm equation
    /// `c^{p*}·J = 1`, with `J` integrated numerically.
    pub fn new(setup: SobolevSetup) -> Result<Self> {
        let shape = Instanton {
            setup,
            normalization: 1.0,
            decay_exponent: setup.decay_exponent(),
        };
        let norm = shape.radial_integral(|r| shape.value(r).powf(setup.p_star), 1.0, shape.critical_tail())?;
        // c^{p*}·J − 1 is strictly increasing in c and vanishes at J^{−1/p*}.
        let normalization = norm.value.powf(-1.0 / setup.p_star);
        Ok(Instanton { normalization, ..shape })
    }

    /// `v₁(r)`; strictly decreasing, peak `c` at the origin.
    pub fn value(&self, r: f64) -> f64 {
        debug_assert!(r >= 0.0);
        let s = &self.setup;
        let m = (s.dim() - s.p) / s.p;
        self.normalization * (-m * ln_one_plus_pow(r, s.conjugate())).exp()
    }

    /// `dv₁/dr` (non-positive).
    pub fn derivative(&self, r: f64) -> f64 {
        let s = &self.setup;
        let q = s.conjugate();
        let m = (s.dim() - s.p) / s.p;
        -m * q * self.value(r) * pow_ratio(r, q)
    }

    /// `v_ε(r) = ε^{−n/p*} v₁(r/ε)`.
    pub fn rescale(&self, eps: f64, r: f64) -> Result<f64> {
        Self::check_scale(eps)?;
        Ok(eps.powf(-self.setup.dim() / self.setup.p_star) * self.value(r / eps))
    }

    /// `d v_ε/dr`.
    pub fn rescaled_derivative(&self, eps: f64, r: f64) -> Result<f64> {
        Self::check_scale(eps)?;
        Ok(eps.powf(-self.setup.dim() / self.setup.p_star - 1.0) * self.derivative(r / eps))
    }

    fn critical_tail(&self) -> f64 {
        // v^{p*} r^{n−1} ~ r^{−np/(p−1) + n − 1}
        let s = &self.setup;
        s.dim() * s.p / (s.p - 1.0) - s.dim() + 1.0
    }

    fn gradient_tail(&self) -> f64 {
        // |v'|^p r^{n−1} ~ r^{−(decay+1)p + n − 1}
        let s = &self.setup;
        (self.decay_exponent + 1.0) * s.p - s.dim() + 1.0
    }

    fn mass_tail(&self) -> f64 {
        let s = &self.setup;
        self.decay_exponent * s.p - s.dim() + 1.0
    }

    /// `|S^{n−1}|·∫_0^∞ g(r) r^{n−1} dr` for a radial density with tail
    /// `decay` whose features sit near `r ≈ scale`.
    fn radial_integral<G: Fn(f64) -> f64>(&self, g: G, scale: f64, decay: f64) -> Result<Estimate> {
        let n1 = self.setup.n as i32 - 1;
        let est = quadrature::improper(|r| g(r) * r.powi(n1), scale, decay, Tolerance::relative(1e-13))?;
        Ok(est.scaled(self.setup.sphere_area()))
    }

    fn check_scale(eps: f64) -> Result<()> {
        if eps > 0.0 && eps.is_finite() {
            Ok(())
        } else {
            Err(LabError::Scale(format!("rescaling parameter must be positive, got {eps}")))
        }
    }

    /// `∫ |v_ε|^{p*} dx`.
    pub fn critical_norm(&self, eps: f64) -> Result<Estimate> {
        Self::check_scale(eps)?;
        let ps = self.setup.p_star;
        let amp = eps.powf(-self.setup.dim() / ps);
        self.radial_integral(|r| (amp * self.value(r / eps)).powf(ps), eps, self.critical_tail())
    }

    /// `∫ |∇v_ε|^p dx`.
    pub fn gradient_energy(&self, eps: f64) -> Result<Estimate> {
        Self::check_scale(eps)?;
        let p = self.setup.p;
        let amp = eps.powf(-self.setup.dim() / self.setup.p_star - 1.0);
        self.radial_integral(|r| (amp * self.derivative(r / eps)).abs().powf(p), eps, self.gradient_tail())
    }

    /// `∫ |v_ε|^p dx`, finite only when `n > p²`.
    pub fn lp_mass(&self, eps: f64) -> Result<Estimate> {
        let s = &self.setup;
        if !s.supercritical_dim {
            return Err(LabError::NonIntegrable(format!(
                "∫|v₁|^p diverges for n = {} ≤ p² = {}",
                s.n,
                s.p * s.p
            )));
        }
        Self::check_scale(eps)?;
        let amp = eps.powf(-s.dim() / s.p_star);
        self.radial_integral(|r| (amp * self.value(r / eps)).powf(s.p), eps, self.mass_tail())
    }

    /// Sobolev quotient `∫|∇v₁|^p / (∫|v₁|^{p*})^{p/p*}` evaluated by quadrature.
    pub fn sobolev_quotient(&self) -> Result<Estimate> {
        let grad = self.gradient_energy(1.0)?;
        let norm = self.critical_norm(1.0)?;
        let s = &self.setup;
        let value = grad.value / norm.value.powf(s.p / s.p_star);
        let rel = grad.rel_error() + s.p / s.p_star * norm.rel_error();
        Ok(Estimate::new(value, rel * value))
    }
}

/// Sobolev quotient of an arbitrary radial profile `u` with derivative `du`,
/// both decaying like `r^{−decay}`.
pub fn radial_sobolev_quotient<U, D>(setup: &SobolevSetup, u: U, du: D, decay: f64) -> Result<f64>
where
    U: Fn(f64) -> f64,
    D: Fn(f64) -> f64,
{
    let n1 = setup.n as i32 - 1;
    let tol = Tolerance::relative(1e-12);
    let grad_tail = (decay + 1.0) * setup.p - setup.dim() + 1.0;
    let norm_tail = decay * setup.p_star - setup.dim() + 1.0;
    let grad = quadrature::improper(|r| du(r).abs().powf(setup.p) * r.powi(n1), 1.0, grad_tail, tol)?;
    let norm = quadrature::improper(|r| u(r).abs().powf(setup.p_star) * r.powi(n1), 1.0, norm_tail, tol)?;
    let area = setup.sphere_area();
    Ok(area * grad.value / (area * norm.value).powf(setup.p / setup.p_star))
}

/// `K(n,p)^p` together with its reciprocal.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SharpConstant {
    pub setup: SobolevSetup,
    pub k_pow_p: f64,
    pub k_inv_pow_p: f64,
    /// The independently minimised radial quotient.
    pub rayleigh_minimum: f64,
    /// `|closed form − minimum| / closed form`.
    pub agreement: f64,
}

/// Closed-form `K(n,p)^{−p}` (Talenti's constant).
pub fn closed_form_k_inv_pow_p(setup: &SobolevSetup) -> f64 {
    let n = setup.dim();
    let p = setup.p;
    let ln_k = -0.5 * std::f64::consts::PI.ln() - n.ln() / p
        + (1.0 - 1.0 / p) * ((p - 1.0) / (n - p)).ln()
        + (ln_gamma(1.0 + n / 2.0) + ln_gamma(n) - ln_gamma(n / p) - ln_gamma(1.0 + n - n / p)) / n;
    (-p * ln_k).exp()
}

/// Relative agreement required between the two evaluations of `K(n,p)^{−p}`.
pub const SHARP_CONSTANT_TOLERANCE: f64 = 1e-6;

/// `K(n,p)^p` from the closed form, confirmed by radial Rayleigh minimisation.
pub fn sharp_constant(setup: &SobolevSetup) -> Result<SharpConstant> {
    let closed = closed_form_k_inv_pow_p(setup);
    let minimum = radial_rayleigh_minimum(setup, &RayleighGrid::for_setup(setup))?;
    let agreement = (closed - minimum).abs() / closed;
    if !(agreement <= SHARP_CONSTANT_TOLERANCE) {
        return Err(LabError::Convergence(format!(
            "closed-form K^-p = {closed:.12e} and radial minimum {minimum:.12e} differ by {agreement:e}"
        )));
    }
    Ok(SharpConstant {
        setup: *setup,
        k_pow_p: 1.0 / closed,
        k_inv_pow_p: closed,
        rayleigh_minimum: minimum,
        agreement,
    })
}

/// The constant `a = ∫_{ℝⁿ} |v₁|^p dx`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MassConstant {
    pub setup: SobolevSetup,
    pub a: f64,
    pub abs_error: f64,
}

pub fn mass_constant(inst: &Instanton) -> Result<MassConstant> {
    let est = inst.lp_mass(1.0)?;
    if !(est.value > 0.0 && est.value.is_finite()) {
        return Err(LabError::Quadrature(format!("mass constant evaluated to {}", est.value)));
    }
    Ok(MassConstant {
        setup: inst.setup,
        a: est.value,
        abs_error: est.abs_error,
    })
}
