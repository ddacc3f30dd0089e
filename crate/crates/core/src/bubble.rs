//! Two-scale bubbles `w(x) = η((x − c)/ρ)·v_μ(x − c)` and their integrals.
//!
//! `ρ` is the cutoff scale and `μ ≪ ρ` the concentration scale. Along a
//! witness sequence `ρ = ε_j^α` and `μ = ε_j^β`. All integrals are radial
//! about the centre except the weighted gradient integral, whose weight
//! `|x − x₀|^θ` is measured from the singular point at distance `e` from the
//! centre; it reduces to a double integral in `(r, φ)`.
//!
//! The deficits `I1 − K^{−p}` and `1 − I2` are integrated directly from the
//! region where the cutoff differs from one, so they keep full relative
//! accuracy long after they drop below the rounding level of `I1` and `I2`.

use crate::error::{LabError, Result};
use crate::geometry::SingularSequence;
use crate::quadrature::{self, gauss_legendre, Estimate, Tolerance};
use crate::sobolev::{sphere_area, Instanton, SobolevSetup};
use serde::Serialize;

/// Radial cutoff `η(x) = H(|x|/δ)` with `H = 1` on `[0, plateau]`, `H = 0`
/// on `[1, ∞)` and a quintic smoothstep in between (`C²`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CutoffSpec {
    pub delta: f64,
    pub plateau: f64,
}

pub const DEFAULT_PLATEAU: f64 = 0.5;

impl CutoffSpec {
    pub fn new(delta: f64, plateau: f64) -> Result<Self> {
        if !(delta > 0.0 && delta.is_finite()) || !(plateau > 0.0 && plateau < 1.0) {
            return Err(LabError::InvalidParameter(format!(
                "cutoff needs δ > 0 and plateau in (0, 1), got δ = {delta}, plateau = {plateau}"
            )));
        }
        Ok(Self { delta, plateau })
    }

    /// Radius where the cutoff starts to drop.
    pub fn inner_radius(&self) -> f64 {
        self.plateau * self.delta
    }

    pub fn value(&self, t: f64) -> f64 {
        let u = (t / self.delta - self.plateau) / (1.0 - self.plateau);
        if u <= 0.0 {
            1.0
        } else if u >= 1.0 {
            0.0
        } else {
            1.0 - u * u * u * (10.0 + u * (-15.0 + 6.0 * u))
        }
    }

    pub fn derivative(&self, t: f64) -> f64 {
        let u = (t / self.delta - self.plateau) / (1.0 - self.plateau);
        if u <= 0.0 || u >= 1.0 {
            0.0
        } else {
            -30.0 * u * u * (1.0 - u) * (1.0 - u) / ((1.0 - self.plateau) * self.delta)
        }
    }
}

/// A cutoff instanton `w(r) = η(r/ρ)·v_μ(r)` centred at `center`, with the
/// singular point at the origin.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RadialBump {
    pub instanton: Instanton,
    pub cutoff: CutoffSpec,
    pub rho: f64,
    pub mu: f64,
    pub center: Vec<f64>,
    /// `|center − x₀|`.
    pub center_distance: f64,
}

/// The integrals `∫|∇w|^p`, `∫|w|^{p*}`, `∫|w|^p` plus the two deficits.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RadialIntegrals {
    pub i1: Estimate,
    pub i2: Estimate,
    pub i3: Estimate,
    /// `I1 − K(n,p)^{−p}`, integrated directly.
    pub i1_excess: Estimate,
    /// `1 − I2`, integrated directly.
    pub i2_deficit: Estimate,
}

/// Relative tolerance of the radial quadratures.
const RADIAL_TOL: f64 = 1e-12;
const WEIGHTED_TOL: f64 = 1e-10;

fn tolerance(rel: f64) -> Tolerance {
    Tolerance {
        rel,
        abs: 0.0,
        max_intervals: 8000,
    }
}

impl RadialBump {
    pub fn new(instanton: Instanton, cutoff: CutoffSpec, rho: f64, mu: f64, center: Vec<f64>) -> Result<Self> {
        if center.len() != instanton.setup.n {
            return Err(LabError::Dimension(format!(
                "centre has dimension {} but n = {}",
                center.len(),
                instanton.setup.n
            )));
        }
        for (name, v) in [("cutoff scale", rho), ("concentration scale", mu)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(LabError::Scale(format!("{name} must be positive, got {v}")));
            }
        }
        let center_distance = center.iter().map(|v| v * v).sum::<f64>().sqrt();
        Ok(Self {
            instanton,
            cutoff,
            rho,
            mu,
            center,
            center_distance,
        })
    }

    pub fn setup(&self) -> &SobolevSetup {
        &self.instanton.setup
    }

    /// Radius of the support about the centre.
    pub fn support_radius(&self) -> f64 {
        self.cutoff.delta * self.rho
    }

    fn amplitude(&self) -> f64 {
        self.mu.powf(-self.setup().dim() / self.setup().p_star)
    }

    /// `v_μ(r)`.
    pub fn core(&self, r: f64) -> f64 {
        self.amplitude() * self.instanton.value(r / self.mu)
    }

    /// `v_μ'(r)`.
    pub fn core_derivative(&self, r: f64) -> f64 {
        self.amplitude() / self.mu * self.instanton.derivative(r / self.mu)
    }

    /// `w(r)`.
    pub fn value(&self, r: f64) -> f64 {
        let eta = self.cutoff.value(r / self.rho);
        if eta == 0.0 {
            0.0
        } else {
            eta * self.core(r)
        }
    }

    /// `w'(r)`.
    pub fn derivative(&self, r: f64) -> f64 {
        let t = r / self.rho;
        let eta = self.cutoff.value(t);
        if eta == 0.0 {
            return 0.0;
        }
        eta * self.core_derivative(r) + self.cutoff.derivative(t) / self.rho * self.core(r)
    }

    /// `w(x)` and `∇w(x)`.
    pub fn value_and_gradient(&self, x: &[f64]) -> (f64, Vec<f64>) {
        let diff: Vec<f64> = x.iter().zip(&self.center).map(|(a, b)| a - b).collect();
        let r = diff.iter().map(|v| v * v).sum::<f64>().sqrt();
        let w = self.value(r);
        if r == 0.0 || w == 0.0 {
            return (w, vec![0.0; x.len()]);
        }
        let dw = self.derivative(r);
        (w, diff.into_iter().map(|d| dw * d / r).collect())
    }

    fn breakpoints(&self) -> Vec<f64> {
        let inner = self.cutoff.inner_radius() * self.rho;
        let mut pts = if self.mu / 8.0 < inner {
            quadrature::geometric_breakpoints(self.mu / 8.0, inner)
        } else {
            vec![0.0, inner]
        };
        pts.push(self.support_radius());
        pts
    }

    /// `|S^{n−1}|·∫_0^{δρ} g(r) r^{n−1} dr`.
    fn radial<G: Fn(f64) -> f64>(&self, g: G) -> Result<Estimate> {
        let n1 = self.setup().n as i32 - 1;
        let est = quadrature::integrate_panels(|r| g(r) * r.powi(n1), &self.breakpoints(), tolerance(RADIAL_TOL))?;
        Ok(est.scaled(self.setup().sphere_area()))
    }

    /// `|S^{n−1}|·∫_{πδρ}^{δρ} g r^{n−1} + |S^{n−1}|·∫_{δρ}^∞ h r^{n−1}`.
    fn shoulder_and_tail<G, H>(&self, shoulder: G, tail: H, tail_decay: f64) -> Result<Estimate>
    where
        G: Fn(f64) -> f64,
        H: Fn(f64) -> f64,
    {
        let n1 = self.setup().n as i32 - 1;
        let a = self.cutoff.inner_radius() * self.rho;
        let b = self.support_radius();
        let tol = tolerance(RADIAL_TOL);
        let mid = quadrature::integrate(|r| shoulder(r) * r.powi(n1), a, b, tol)?;
        let far = quadrature::power_tail(|r| tail(r) * r.powi(n1), b, tail_decay, tol)?;
        Ok((mid + far).scaled(self.setup().sphere_area()))
    }

    pub fn radial_integrals(&self) -> Result<RadialIntegrals> {
        let s = *self.setup();
        let (p, ps) = (s.p, s.p_star);
        let i1 = self.radial(|r| self.derivative(r).abs().powf(p))?;
        let i2 = self.radial(|r| self.value(r).powf(ps))?;
        let i3 = self.radial(|r| self.value(r).powf(p))?;

        let decay = s.decay_exponent();
        let grad_tail = (decay + 1.0) * p - s.dim() + 1.0;
        let norm_tail = decay * ps - s.dim() + 1.0;
        let excess_shoulder = self.shoulder_and_tail(
            |r| self.derivative(r).abs().powf(p) - self.core_derivative(r).abs().powf(p),
            |_| 0.0,
            grad_tail,
        )?;
        let lost_gradient = self.shoulder_and_tail(|_| 0.0, |r| self.core_derivative(r).abs().powf(p), grad_tail)?;
        let i2_deficit = self.shoulder_and_tail(
            |r| (1.0 - self.cutoff.value(r / self.rho).powf(ps)) * self.core(r).powf(ps),
            |r| self.core(r).powf(ps),
            norm_tail,
        )?;
        Ok(RadialIntegrals {
            i1,
            i2,
            i3,
            i1_excess: excess_shoulder - lost_gradient,
            i2_deficit,
        })
    }

    /// `∫|x − x₀|^θ |∇w|^p dx` over the support, as a double integral in the
    /// distance `r` from the centre and the angle `φ` between `x − c` and
    /// `x₀ − c`.
    pub fn weighted_gradient_integral(&self, theta: f64) -> Result<Estimate> {
        if !(theta >= 0.0 && theta.is_finite()) {
            return Err(LabError::InvalidParameter(format!("weight exponent must be non-negative, got {theta}")));
        }
        let s = *self.setup();
        if s.n < 2 {
            return Err(LabError::Dimension("angular reduction needs n ≥ 2".into()));
        }
        let e = self.center_distance;
        let rule = |nodes: usize| {
            let (x, w) = gauss_legendre(nodes);
            let half = std::f64::consts::FRAC_PI_2;
            let pts: Vec<(f64, f64)> = x
                .iter()
                .zip(&w)
                .map(|(xi, wi)| {
                    let phi = half * (xi + 1.0);
                    (phi.cos(), half * wi * phi.sin().powi(s.n as i32 - 2))
                })
                .collect();
            pts
        };
        let coarse = rule(32);
        let fine = rule(64);
        let angular = |r: f64, pts: &[(f64, f64)]| -> f64 {
            quadrature::compensated_sum(pts.iter().map(|&(c, w)| {
                let sq = (r * r + e * e - 2.0 * r * e * c).max(0.0);
                w * sq.powf(0.5 * theta)
            }))
        };
        let n1 = s.n as i32 - 1;
        let sphere = sphere_area(s.n - 1);
        let radial = |pts: &[(f64, f64)], tol: f64| {
            quadrature::integrate_panels(
                |r| self.derivative(r).abs().powf(s.p) * r.powi(n1) * angular(r, pts),
                &self.breakpoints(),
                tolerance(tol),
            )
        };
        let hi = radial(&fine, WEIGHTED_TOL)?;
        let lo = radial(&coarse, WEIGHTED_TOL)?;
        let angular_error = (hi.value - lo.value).abs();
        Ok(Estimate::new(hi.value, hi.abs_error + angular_error).scaled(sphere))
    }
}

/// One member `w_j` of the bubble family along a witness sequence.
#[derive(Debug, Clone, PartialEq)]
pub struct Bubble {
    pub sequence: SingularSequence,
    pub j: usize,
    pub beta: f64,
    pub cutoff: CutoffSpec,
    pub instanton: Instanton,
}

impl Bubble {
    pub fn new(sequence: &SingularSequence, j: usize, beta: f64, cutoff: CutoffSpec, instanton: Instanton) -> Result<Self> {
        let alpha = sequence.domain.alpha;
        if !(beta > alpha) {
            return Err(LabError::InvalidParameter(format!("need β > α, got β = {beta}, α = {alpha}")));
        }
        if j >= sequence.len() {
            return Err(LabError::InvalidParameter(format!(
                "index {j} outside the witness sequence of length {}",
                sequence.len()
            )));
        }
        if cutoff.delta > sequence.delta {
            return Err(LabError::InvalidParameter(format!(
                "cutoff support δ = {} exceeds the witness δ = {}",
                cutoff.delta, sequence.delta
            )));
        }
        if instanton.setup != sequence.domain.setup {
            return Err(LabError::Dimension("instanton and domain use different setups".into()));
        }
        Ok(Self {
            sequence: sequence.clone(),
            j,
            beta,
            cutoff,
            instanton,
        })
    }

    pub fn eps(&self) -> f64 {
        self.sequence.radii[self.j]
    }

    pub fn alpha(&self) -> f64 {
        self.sequence.domain.alpha
    }

    pub fn profile(&self) -> RadialBump {
        let eps = self.eps();
        RadialBump {
            instanton: self.instanton,
            cutoff: self.cutoff,
            rho: eps.powf(self.alpha()),
            mu: eps.powf(self.beta),
            center: self.sequence.points[self.j].clone(),
            center_distance: eps,
        }
    }

    /// The rescaled profile `z_μ = η·v_μ` with `μ = ε^{β−α}`, which satisfies
    /// `w_j(x) = ε^{−nα/p*} z_μ((x − x_j)/ε^α)`.
    pub fn reduced_profile(&self) -> RadialBump {
        let eps = self.eps();
        RadialBump {
            instanton: self.instanton,
            cutoff: self.cutoff,
            rho: 1.0,
            mu: eps.powf(self.beta - self.alpha()),
            center: vec![0.0; self.instanton.setup.n],
            center_distance: 0.0,
        }
    }

    pub fn value_and_gradient(&self, x: &[f64]) -> (f64, Vec<f64>) {
        self.profile().value_and_gradient(x)
    }

    pub fn radial_integrals(&self) -> Result<RadialIntegrals> {
        self.profile().radial_integrals()
    }

    pub fn weighted_gradient_integral(&self, theta: f64) -> Result<Estimate> {
        if !(theta > 0.0) {
            return Err(LabError::InvalidParameter(format!("θ must be positive, got {theta}")));
        }
        self.profile().weighted_gradient_integral(theta)
    }

    /// Relative discrepancies between `I1, I2, I3` of `w_j` and
    /// `∫|∇z_μ|^p, ∫|z_μ|^{p*}, ε^{pα}∫|z_μ|^p`.
    pub fn scaling_reduction_check(&self) -> Result<[f64; 3]> {
        let direct = self.radial_integrals()?;
        let reduced = self.reduced_profile().radial_integrals()?;
        let scale = self.eps().powf(self.instanton.setup.p * self.alpha());
        let rel = |a: f64, b: f64| (a - b).abs() / a.abs().max(b.abs());
        Ok([
            rel(direct.i1.value, reduced.i1.value),
            rel(direct.i2.value, reduced.i2.value),
            rel(direct.i3.value, scale * reduced.i3.value),
        ])
    }
}
