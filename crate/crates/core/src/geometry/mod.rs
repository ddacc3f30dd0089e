//! Power-cusp domains, their witness sequences, coefficient prototypes and
//! the linear change of variables that diagonalises `A(x₀)`.
//!
//! The domain is
//!
//! ```text
//! Ω = {0 < x_n < L, |x'| < κ·x_n^α} ∪ B((L + R/2)·e_n, R)
//! ```
//!
//! with the tip `x₀ = 0` on `∂Ω`. For `α > 1` the ball `B(t·e_n, δ t^α)` fits
//! inside the cusp for small `t` whenever `δ < κ`; for the cone `α = 1` the
//! condition is `δ < κ/√(1+κ²)`. Either way the axial points `t_j·e_n`
//! realise a singularity of order exactly `α` at the tip.

mod fields;
mod linear;

pub use fields::{
    check_h1, check_h2, sample_closure, MatrixCoefficient, MatrixField, ScalarCoefficient, ScalarField,
    DEFAULT_SAMPLE_SEED,
};
pub use linear::{reduce_linear, transform_sequence, LinearReduction, TransformedSequence};

use crate::error::{LabError, Result};
use crate::sobolev::SobolevSetup;
use serde::Serialize;

/// Concrete interior α-singular domain with singular point at the origin.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CuspDomain {
    pub setup: SobolevSetup,
    pub alpha: f64,
    pub kappa: f64,
    pub spine_length: f64,
    pub bulk_radius: f64,
    pub x0: Vec<f64>,
}

pub fn build_domain(setup: SobolevSetup, alpha: f64, kappa: f64, spine_length: f64, bulk_radius: f64) -> Result<CuspDomain> {
    let finite = [alpha, kappa, spine_length, bulk_radius].iter().all(|v| v.is_finite());
    if !finite || alpha < 1.0 || kappa <= 0.0 || spine_length <= 0.0 || bulk_radius <= 0.0 {
        return Err(LabError::Geometry(format!(
            "need α ≥ 1 and κ, L, R > 0 (got α = {alpha}, κ = {kappa}, L = {spine_length}, R = {bulk_radius})"
        )));
    }
    if bulk_radius > spine_length {
        // A larger ball would swallow the tip region and x₀ would stop
        // being a cusp point.
        return Err(LabError::Geometry(format!(
            "bulk radius {bulk_radius} exceeds the spine length {spine_length}"
        )));
    }
    Ok(CuspDomain {
        setup,
        alpha,
        kappa,
        spine_length,
        bulk_radius,
        x0: vec![0.0; setup.n],
    })
}

fn transverse_norm(x: &[f64]) -> f64 {
    x[..x.len() - 1].iter().map(|v| v * v).sum::<f64>().sqrt()
}

impl CuspDomain {
    pub fn dim(&self) -> usize {
        self.setup.n
    }

    /// Cusp radius `κ·t^α` at height `t`.
    pub fn profile(&self, t: f64) -> f64 {
        self.kappa * t.powf(self.alpha)
    }

    pub fn bulk_center(&self) -> Vec<f64> {
        let mut c = vec![0.0; self.dim()];
        c[self.dim() - 1] = self.spine_length + 0.5 * self.bulk_radius;
        c
    }

    /// Largest distance from the tip to a point of `Ω̄`.
    pub fn extent(&self) -> f64 {
        let cusp_corner = self.spine_length.hypot(self.profile(self.spine_length));
        cusp_corner.max(self.spine_length + 1.5 * self.bulk_radius)
    }

    fn in_cusp(&self, x: &[f64]) -> bool {
        let t = x[self.dim() - 1];
        t > 0.0 && t < self.spine_length && transverse_norm(x) < self.profile(t)
    }

    fn bulk_gap(&self, x: &[f64]) -> f64 {
        let c = self.bulk_center();
        let dist = x.iter().zip(&c).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
        self.bulk_radius - dist
    }

    /// Membership in the open set `Ω`.
    pub fn contains(&self, x: &[f64]) -> bool {
        assert_eq!(x.len(), self.dim(), "point has the wrong dimension");
        self.in_cusp(x) || self.bulk_gap(x) > 0.0
    }

    /// Distance from `(ρ, t)` in a meridian half-plane to the lateral wall
    /// `{(κs^α, s) : 0 ≤ s ≤ L}`.
    fn wall_distance(&self, rho: f64, t: f64) -> f64 {
        let dist = |s: f64| (self.profile(s) - rho).hypot(s - t);
        if rho == 0.0 {
            // d/ds of the squared distance, 2ακ²s^{2α−1} + 2(s − t), is
            // increasing, so the minimiser is its unique root in [0, t].
            if self.alpha == 1.0 {
                return t * self.kappa / self.kappa.hypot(1.0);
            }
            let slope = |s: f64| self.alpha * self.kappa * self.kappa * s.powf(2.0 * self.alpha - 1.0) + s - t;
            let (mut lo, mut hi) = (0.0, t.min(self.spine_length));
            if slope(hi) <= 0.0 {
                return dist(hi);
            }
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                if mid <= lo || mid >= hi {
                    break;
                }
                if slope(mid) > 0.0 {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
            return dist(0.5 * (lo + hi));
        }
        // Off-axis: coarse scan, then golden-section refinement around the
        // best sample.
        let samples = 512;
        let step = self.spine_length / samples as f64;
        let best = (0..=samples)
            .map(|i| i as f64 * step)
            .min_by(|a, b| dist(*a).total_cmp(&dist(*b)))
            .unwrap_or(0.0);
        let (mut a, mut b) = ((best - step).max(0.0), (best + step).min(self.spine_length));
        let g = 0.5 * (5f64.sqrt() - 1.0);
        for _ in 0..100 {
            let c = b - g * (b - a);
            let d = a + g * (b - a);
            if dist(c) < dist(d) {
                b = d;
            } else {
                a = c;
            }
        }
        dist(0.5 * (a + b)).min(dist(best))
    }

    /// Radius of the largest ball about `x` that lies inside the cusp part
    /// or inside the bulk ball (zero if `x` is in neither). This is a lower
    /// bound for `dist(x, ∂Ω)` and equals it away from the glued end.
    pub fn containment_radius(&self, x: &[f64]) -> f64 {
        assert_eq!(x.len(), self.dim(), "point has the wrong dimension");
        let bulk = self.bulk_gap(x).max(0.0);
        let cusp = if self.in_cusp(x) {
            let t = x[self.dim() - 1];
            let rho = transverse_norm(x);
            t.min(self.spine_length - t).min(self.wall_distance(rho, t))
        } else {
            0.0
        };
        cusp.max(bulk)
    }
}

/// Axial witness points `x_j = ε_j·e_n` with their verified balls.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SingularSequence {
    pub domain: CuspDomain,
    pub delta: f64,
    pub points: Vec<Vec<f64>>,
    pub radii: Vec<f64>,
    /// `containment_radius(x_j)` for each point.
    pub clearances: Vec<f64>,
}

impl SingularSequence {
    pub fn len(&self) -> usize {
        self.radii.len()
    }

    pub fn is_empty(&self) -> bool {
        self.radii.is_empty()
    }

    /// Radius `δ·ε_j^α` of the witness ball at index `j`.
    pub fn ball_radius(&self, j: usize) -> f64 {
        self.delta * self.radii[j].powf(self.domain.alpha)
    }
}

/// Build `ε_j = eps0·ratio^j`, `j = 0..=j_max`, and check
/// `δ·ε_j^α ≤ dist(x_j, ∂Ω)` for every `j`.
pub fn witness_sequence(domain: &CuspDomain, delta: f64, eps0: f64, ratio: f64, j_max: usize) -> Result<SingularSequence> {
    if !(delta > 0.0 && delta.is_finite()) {
        return Err(LabError::Geometry(format!("delta must be positive, got {delta}")));
    }
    if !(ratio > 0.0 && ratio < 1.0) {
        return Err(LabError::Geometry(format!("ratio must lie in (0, 1), got {ratio}")));
    }
    if !(eps0 > 0.0 && eps0 < domain.spine_length) {
        return Err(LabError::Geometry(format!(
            "eps0 = {eps0} must lie in (0, L = {})",
            domain.spine_length
        )));
    }
    let n = domain.dim();
    let mut points = Vec::with_capacity(j_max + 1);
    let mut radii = Vec::with_capacity(j_max + 1);
    let mut clearances = Vec::with_capacity(j_max + 1);
    for j in 0..=j_max {
        let eps = eps0 * ratio.powi(j as i32);
        let mut x = vec![0.0; n];
        x[n - 1] = eps;
        let clearance = domain.containment_radius(&x);
        let radius = delta * eps.powf(domain.alpha);
        if radius > clearance {
            return Err(LabError::Witness {
                j,
                radius,
                distance: clearance,
            });
        }
        points.push(x);
        radii.push(eps);
        clearances.push(clearance);
    }
    Ok(SingularSequence {
        domain: domain.clone(),
        delta,
        points,
        radii,
        clearances,
    })
}
