//! Coefficient prototypes `a(x) = a₀ + C₀|x − x₀|^σ`,
//! `A(x) = A₀ + C₀|x − x₀|^γ·I` and sampled checks of the Hölder-type
//! upper bounds they are meant to satisfy near `x₀`.

use super::CuspDomain;
use crate::error::{LabError, Result};
use nalgebra::{DMatrix, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

pub const DEFAULT_SAMPLE_SEED: u64 = 0x5eed_cafe;

fn distance(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt()
}

pub trait ScalarCoefficient {
    fn value(&self, x: &[f64]) -> f64;
}

pub trait MatrixCoefficient {
    fn value(&self, x: &[f64]) -> DMatrix<f64>;
}

/// `a(x) = a₀ + C₀|x − x₀|^σ`; its global minimum `a₀` sits at `x₀`.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField {
    pub a0: f64,
    pub c0: f64,
    pub sigma: f64,
    pub x0: Vec<f64>,
}

impl ScalarField {
    pub fn new(a0: f64, c0: f64, sigma: f64, x0: Vec<f64>) -> Result<Self> {
        if !(a0 > 0.0 && c0 > 0.0 && sigma > 0.0) {
            return Err(LabError::InvalidParameter(format!(
                "scalar field needs a0, C0, σ > 0 (got {a0}, {c0}, {sigma})"
            )));
        }
        Ok(Self { a0, c0, sigma, x0 })
    }

    /// The minimum value `m_{a,p}`.
    pub fn minimum(&self) -> f64 {
        self.a0
    }
}

impl ScalarCoefficient for ScalarField {
    fn value(&self, x: &[f64]) -> f64 {
        self.a0 + self.c0 * distance(x, &self.x0).powf(self.sigma)
    }
}

/// `A(x) = A₀ + C₀|x − x₀|^γ·I` with `A₀` symmetric positive definite.
#[derive(Debug, Clone, PartialEq)]
pub struct MatrixField {
    pub a0: DMatrix<f64>,
    pub c0: f64,
    pub gamma: f64,
    pub x0: Vec<f64>,
}

impl MatrixField {
    pub fn new(a0: DMatrix<f64>, c0: f64, gamma: f64, x0: Vec<f64>) -> Result<Self> {
        let n = x0.len();
        if a0.nrows() != n || a0.ncols() != n {
            return Err(LabError::Dimension(format!(
                "A0 is {}×{} but the point has dimension {n}",
                a0.nrows(),
                a0.ncols()
            )));
        }
        if (&a0 - a0.transpose()).amax() > 1e-12 * a0.amax().max(1.0) {
            return Err(LabError::InvalidParameter("A0 must be symmetric".into()));
        }
        if !(c0 > 0.0 && gamma > 0.0) {
            return Err(LabError::InvalidParameter(format!(
                "matrix field needs C0, γ > 0 (got {c0}, {gamma})"
            )));
        }
        let smallest = SymmetricEigen::new(a0.clone()).eigenvalues.min();
        if smallest <= 0.0 {
            return Err(LabError::NotPositiveDefinite(smallest));
        }
        Ok(Self { a0, c0, gamma, x0 })
    }

    /// `m_A = det A₀`.
    pub fn minimum_determinant(&self) -> f64 {
        self.a0.determinant()
    }
}

impl MatrixCoefficient for MatrixField {
    fn value(&self, x: &[f64]) -> DMatrix<f64> {
        let n = self.x0.len();
        let shift = self.c0 * distance(x, &self.x0).powf(self.gamma);
        &self.a0 + DMatrix::<f64>::identity(n, n) * shift
    }
}

fn random_direction(rng: &mut ChaCha8Rng, dim: usize) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..dim).map(|_| rng.sample(StandardNormal)).collect();
        let norm = v.iter().map(|c| c * c).sum::<f64>().sqrt();
        if norm > 1e-12 {
            return v.into_iter().map(|c| c / norm).collect();
        }
    }
}

/// Point in the cusp cross-section at height `t`, uniformly distributed in
/// the transverse disc.
fn cusp_point(domain: &CuspDomain, rng: &mut ChaCha8Rng, t: f64) -> Vec<f64> {
    let n = domain.dim();
    let mut x = vec![0.0; n];
    if n > 1 {
        let dir = random_direction(rng, n - 1);
        let u: f64 = rng.random();
        let rho = domain.profile(t) * u.powf(1.0 / (n - 1) as f64);
        for (xi, d) in x.iter_mut().zip(&dir) {
            *xi = rho * d;
        }
    }
    x[n - 1] = t;
    x
}

/// `count` points of `Ω̄`: the tip itself, half of the rest within
/// `extent/10` of the tip, the remainder spread over the cusp and the bulk
/// ball.
pub fn sample_closure(domain: &CuspDomain, count: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = domain.dim();
    let near = domain.extent() / 10.0;
    let mut out = Vec::with_capacity(count);
    if count == 0 {
        return out;
    }
    out.push(domain.x0.clone());
    let remaining = count - 1;
    let near_count = remaining / 2;
    while out.len() < 1 + near_count {
        let t = rng.random::<f64>() * near.min(domain.spine_length);
        let x = cusp_point(domain, &mut rng, t);
        if distance(&x, &domain.x0) < near {
            out.push(x);
        }
    }
    while out.len() < count {
        if rng.random::<bool>() {
            let t = rng.random::<f64>() * domain.spine_length;
            out.push(cusp_point(domain, &mut rng, t));
        } else {
            let dir = random_direction(&mut rng, n);
            let r = domain.bulk_radius * rng.random::<f64>().powf(1.0 / n as f64);
            let c = domain.bulk_center();
            out.push(c.iter().zip(&dir).map(|(ci, d)| ci + r * d).collect());
        }
    }
    out
}

/// `a(x) − a(x₀) ≤ C₀|x − x₀|^σ` at every sample, with `C₀`, `σ` and `x₀`
/// taken from `bound`.
pub fn check_h2<F: ScalarCoefficient>(field: &F, bound: &ScalarField, domain: &CuspDomain, sample_count: usize) -> bool {
    let base = field.value(&bound.x0);
    sample_closure(domain, sample_count, DEFAULT_SAMPLE_SEED).iter().all(|x| {
        let rhs = bound.c0 * distance(x, &bound.x0).powf(bound.sigma);
        let lhs = field.value(x) - base;
        lhs <= rhs + 1e-14 * (base.abs() + rhs)
    })
}

/// `A(x) − A(x₀) ≤ C₀|x − x₀|^γ·I` in the sense of quadratic forms at every
/// sample: the smallest eigenvalue of the difference of the two sides is at
/// least `−10⁻¹²`.
pub fn check_h1<F: MatrixCoefficient>(field: &F, bound: &MatrixField, domain: &CuspDomain, sample_count: usize) -> bool {
    let n = bound.x0.len();
    let base = field.value(&bound.x0);
    sample_closure(domain, sample_count, DEFAULT_SAMPLE_SEED).iter().all(|x| {
        let shift = bound.c0 * distance(x, &bound.x0).powf(bound.gamma);
        let gap = DMatrix::<f64>::identity(n, n) * shift - (field.value(x) - &base);
        let gap = (&gap + gap.transpose()) * 0.5;
        SymmetricEigen::new(gap).eigenvalues.min() >= -1e-12
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::build_domain;
    use crate::sobolev::make_setup;

    fn domain(n: usize) -> CuspDomain {
        build_domain(make_setup(n, 2.0).unwrap(), 1.5, 1.0, 0.5, 0.2).unwrap()
    }

    #[test]
    fn samples_lie_in_the_closure_and_cluster_at_the_tip() {
        let d = domain(5);
        let pts = sample_closure(&d, 401, 7);
        assert_eq!(pts.len(), 401);
        assert_eq!(pts[0], d.x0);
        let near = pts.iter().filter(|x| distance(x, &d.x0) < d.extent() / 10.0).count();
        assert!(near >= 201);
        for x in &pts[1..] {
            assert!(d.contains(x), "{x:?}");
        }
        assert_eq!(sample_closure(&d, 50, 3), sample_closure(&d, 50, 3));
    }

    #[test]
    fn scalar_prototype_saturates_the_bound() {
        let d = domain(5);
        let f = ScalarField::new(1.5, 0.2, 3.0, d.x0.clone()).unwrap();
        assert!(check_h2(&f, &f, &d, 500));
    }

    #[test]
    fn doubled_scalar_growth_violates_the_bound() {
        let d = domain(5);
        let f = ScalarField::new(1.5, 0.2, 3.0, d.x0.clone()).unwrap();
        let steep = ScalarField { c0: 0.4, ..f.clone() };
        assert!(!check_h2(&steep, &f, &d, 500));
    }

    #[test]
    fn higher_power_passes_on_small_domain() {
        let d = build_domain(make_setup(5, 2.0).unwrap(), 1.5, 1.0, 0.4, 0.2).unwrap();
        assert!(d.extent() < 1.0);
        let f = ScalarField::new(1.0, 1.0, 2.0, d.x0.clone()).unwrap();
        let flatter = ScalarField { sigma: 3.0, ..f.clone() };
        assert!(check_h2(&flatter, &f, &d, 500));
    }

    #[test]
    fn matrix_prototype_saturates_the_bound() {
        let d = domain(4);
        let a0 = DMatrix::from_row_slice(4, 4, &[
            2.0, 0.3, 0.0, 0.1, //
            0.3, 1.0, 0.2, 0.0, //
            0.0, 0.2, 1.5, 0.0, //
            0.1, 0.0, 0.0, 3.0,
        ]);
        let f = MatrixField::new(a0, 0.7, 2.5, d.x0.clone()).unwrap();
        assert!(check_h1(&f, &f, &d, 300));
        let steep = MatrixField { c0: 1.4, ..f.clone() };
        assert!(!check_h1(&steep, &f, &d, 300));
    }

    #[test]
    fn identity_prototype_passes() {
        let d = domain(5);
        for gamma in [0.5, 1.0, 4.0] {
            let f = MatrixField::new(DMatrix::identity(5, 5), 1.0, gamma, d.x0.clone()).unwrap();
            assert!(check_h1(&f, &f, &d, 200));
        }
    }

    #[test]
    fn determinant_is_minimal_at_the_tip() {
        let d = domain(3);
        let a0 = DMatrix::from_row_slice(3, 3, &[1.0, 0.5, 0.0, 0.5, 2.0, 0.1, 0.0, 0.1, 0.8]);
        let f = MatrixField::new(a0, 0.3, 1.7, d.x0.clone()).unwrap();
        let m = f.minimum_determinant();
        for x in sample_closure(&d, 300, 11) {
            assert!(f.value(&x).determinant() >= m * (1.0 - 1e-14));
        }
    }

    #[test]
    fn rejects_indefinite_matrix() {
        let a0 = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 1.0]);
        assert!(matches!(
            MatrixField::new(a0, 1.0, 1.0, vec![0.0, 0.0]),
            Err(LabError::NotPositiveDefinite(_))
        ));
    }
}
