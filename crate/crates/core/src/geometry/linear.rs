//! Diagonalisation `y = D·P·x` of the leading coefficient matrix.
//!
//! With `P·A₀·Pᵗ = diag(λ_i)` and `D = diag(λ_i^{−1/2})`, the substitution
//! `u(x) = v(DPx)` turns `∫A₀∇u·∇u` into `det(A₀)^{1/2}∫|∇v|²` and the
//! critical norm picks up `det(A₀)^{(n−2)/(2n)}`. For the quotient this
//! leaves an overall factor `det(A₀)^{1/n} = m_A^{1/n}` in front of
//!
//! ```text
//! ∫|∇v|² + C₀·Λ^{γ/2}/λ_min·∫|y|^γ|∇v|² − λ∫v²,
//! ```
//!
//! using `|x| ≤ Λ^{1/2}|y|` and `|∇_x u|² ≤ λ_min^{−1}|∇_y v|²`
//! (`Λ = max λ_i`). Hence `C₁ = m_A^{1/n}·C₀·Λ^{γ/2}/λ_min` and
//! `C₂ = m_A^{1/n}`; both become equalities when `A₀` is a multiple of the
//! identity.

use super::SingularSequence;
use crate::error::{LabError, Result};
use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::Serialize;

#[derive(Debug, Clone, PartialEq)]
pub struct LinearReduction {
    /// Orthogonal; rows are eigenvectors of `A₀`.
    pub p: DMatrix<f64>,
    /// `diag(λ_i^{−1/2})`.
    pub d: DMatrix<f64>,
    pub eigenvalues: DVector<f64>,
    /// `det(A₀)^{1/n}`.
    pub det_root: f64,
    /// Coefficient of `∫|y|^γ|∇v|²` in the transformed quotient.
    pub c1: f64,
    /// Coefficient of `λ∫v²` in the transformed quotient.
    pub c2: f64,
}

impl LinearReduction {
    pub fn largest_eigenvalue(&self) -> f64 {
        self.eigenvalues.max()
    }

    pub fn smallest_eigenvalue(&self) -> f64 {
        self.eigenvalues.min()
    }

    /// `D·P`.
    pub fn transform(&self) -> DMatrix<f64> {
        &self.d * &self.p
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        let y = self.transform() * DVector::from_column_slice(x);
        y.iter().copied().collect()
    }
}

/// Diagonalise `A₀` and derive the transferred constants `C₁`, `C₂` for a
/// weight `C₀|x − x₀|^γ`.
pub fn reduce_linear(a0: &DMatrix<f64>, c0: f64, gamma: f64) -> Result<LinearReduction> {
    let n = a0.nrows();
    if n == 0 || a0.ncols() != n {
        return Err(LabError::Dimension(format!("A0 must be square, got {}×{}", a0.nrows(), a0.ncols())));
    }
    let sym = (a0 + a0.transpose()) * 0.5;
    let eig = SymmetricEigen::new(sym);
    let smallest = eig.eigenvalues.min();
    if !(smallest > 0.0) {
        return Err(LabError::NotPositiveDefinite(smallest));
    }
    let mut vectors = eig.eigenvectors;
    // Fix the sign of each eigenvector so the output is reproducible.
    for mut col in vectors.column_iter_mut() {
        let lead = col.iter().copied().fold(0.0_f64, |m, v| if v.abs() > m.abs() { v } else { m });
        if lead < 0.0 {
            col.neg_mut();
        }
    }
    let p = vectors.transpose();
    let d = DMatrix::from_diagonal(&eig.eigenvalues.map(|l| l.powf(-0.5)));
    let det_root = (eig.eigenvalues.iter().map(|l| l.ln()).sum::<f64>() / n as f64).exp();
    let largest = eig.eigenvalues.max();
    Ok(LinearReduction {
        p,
        d,
        eigenvalues: eig.eigenvalues,
        det_root,
        c1: det_root * c0 * largest.powf(0.5 * gamma) / smallest,
        c2: det_root,
    })
}

/// Image of a witness sequence under `y = DPx`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TransformedSequence {
    pub centers: Vec<Vec<f64>>,
    /// `|y_j|`, the distance of each image point from the image of `x₀`.
    pub center_norms: Vec<f64>,
    /// `Λ^{−1/2}`: the image of a ball of radius `r` contains the ball of
    /// radius `r·Λ^{−1/2}` about the image centre.
    pub shrink: f64,
    /// Radii `δ·ε_j^α·Λ^{−1/2}` of balls guaranteed to lie in the image
    /// domain.
    pub ball_radii: Vec<f64>,
    /// Constant for which `B(y_j, δ̃|y_j|^α)` lies in the image domain:
    /// `δ̃ = δ·Λ^{−1/2}·λ_min^{α/2}`.
    pub delta: f64,
}

pub fn transform_sequence(seq: &SingularSequence, red: &LinearReduction) -> TransformedSequence {
    let shrink = red.largest_eigenvalue().powf(-0.5);
    let centers: Vec<Vec<f64>> = seq.points.iter().map(|x| red.apply(x)).collect();
    let center_norms = centers.iter().map(|y| y.iter().map(|v| v * v).sum::<f64>().sqrt()).collect();
    let ball_radii = (0..seq.len()).map(|j| seq.ball_radius(j) * shrink).collect();
    TransformedSequence {
        centers,
        center_norms,
        shrink,
        ball_radii,
        delta: seq.delta * shrink * red.smallest_eigenvalue().powf(0.5 * seq.domain.alpha),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{build_domain, witness_sequence};
    use crate::sobolev::make_setup;
    use rand::{Rng, SeedableRng};

    fn random_spd(n: usize, seed: u64) -> DMatrix<f64> {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let b = DMatrix::from_fn(n, n, |_, _| rng.random::<f64>() - 0.5);
        &b * b.transpose() + DMatrix::identity(n, n) * 0.1
    }

    #[test]
    fn identity_is_left_alone() {
        let r = reduce_linear(&DMatrix::identity(5, 5), 1.0, 1.0).unwrap();
        assert!((r.p.clone() - DMatrix::<f64>::identity(5, 5)).amax() < 1e-14);
        assert!((r.d.clone() - DMatrix::<f64>::identity(5, 5)).amax() < 1e-14);
    }

    #[test]
    fn diagonal_input_gives_inverse_square_roots() {
        let a0 = DMatrix::from_diagonal(&DVector::from_vec(vec![4.0, 1.0, 1.0, 1.0, 1.0]));
        let r = reduce_linear(&a0, 1.0, 1.0).unwrap();
        // P is a signed permutation
        for row in r.p.row_iter() {
            let ones = row.iter().filter(|v| (v.abs() - 1.0).abs() < 1e-14).count();
            let zeros = row.iter().filter(|v| v.abs() < 1e-14).count();
            assert_eq!((ones, zeros), (1, 4));
        }
        let mut diag: Vec<f64> = r.d.diagonal().iter().copied().collect();
        diag.sort_by(f64::total_cmp);
        assert_eq!(diag, vec![0.5, 1.0, 1.0, 1.0, 1.0]);
    }

    #[test]
    fn random_spd_is_whitened() {
        for seed in 0..20 {
            let a0 = random_spd(5, seed);
            let r = reduce_linear(&a0, 1.0, 2.0).unwrap();
            let diag = &r.p * &a0 * r.p.transpose();
            let off = diag.clone() - DMatrix::from_diagonal(&diag.diagonal());
            assert!(off.amax() < 1e-10);
            let white = &r.d * &r.p * &a0 * r.p.transpose() * &r.d;
            assert!((white - DMatrix::<f64>::identity(5, 5)).amax() < 1e-10);
            let orth = &r.p * r.p.transpose();
            assert!((orth - DMatrix::<f64>::identity(5, 5)).amax() < 1e-12);
            assert!((r.det_root - a0.determinant().powf(0.2)).abs() < 1e-12 * r.det_root);
        }
    }

    #[test]
    fn rejects_indefinite() {
        let a0 = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, -1e-3]);
        assert!(matches!(reduce_linear(&a0, 1.0, 1.0), Err(LabError::NotPositiveDefinite(_))));
    }

    #[test]
    fn scalar_multiple_constants_are_exact() {
        let c = 2.5;
        let r = reduce_linear(&(DMatrix::<f64>::identity(6, 6) * c), 0.3, 5.0).unwrap();
        assert!((r.c2 - c).abs() < 1e-14);
        assert!((r.c1 - 0.3 * c.powf(2.5)).abs() < 1e-12);
    }

    #[test]
    fn transformed_balls_pull_back_into_the_domain() {
        let dom = build_domain(make_setup(5, 2.0).unwrap(), 1.5, 1.0, 1.0, 0.5).unwrap();
        let seq = witness_sequence(&dom, 0.5, 0.1, 0.6, 8).unwrap();
        let a0 = random_spd(5, 99);
        let red = reduce_linear(&a0, 1.0, 2.0).unwrap();
        let img = transform_sequence(&seq, &red);
        let inverse = red.transform().try_inverse().unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        for j in 0..seq.len() {
            assert!(img.delta * img.center_norms[j].powf(1.5) <= img.ball_radii[j] * (1.0 + 1e-12));
            for _ in 0..100 {
                let mut v = DVector::from_fn(5, |_, _| rng.random::<f64>() - 0.5);
                v *= 0.999 * img.ball_radii[j] / v.norm();
                let y = DVector::from_column_slice(&img.centers[j]) + v;
                let x = &inverse * y;
                assert!(dom.contains(x.as_slice()));
            }
        }
    }
}
