use thiserror::Error;

/// Errors raised by the numerical laboratory.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum LabError {
    #[error("dimension error: {0}")]
    Dimension(String),
    #[error("scale error: {0}")]
    Scale(String),
    #[error("convergence error: {0}")]
    Convergence(String),
    #[error("integral does not converge: {0}")]
    NonIntegrable(String),
    #[error("geometry error: {0}")]
    Geometry(String),
    #[error("witness ball {j} not contained in the domain (radius {radius:e} > boundary distance {distance:e})")]
    Witness { j: usize, radius: f64, distance: f64 },
    #[error("matrix is not positive definite (smallest eigenvalue {0:e})")]
    NotPositiveDefinite(f64),
    #[error("quadrature error: {0}")]
    Quadrature(String),
    #[error("fit error: {0}")]
    Fit(String),
    #[error("shooting blew up at r = {r:e} (|u| = {value:e})")]
    Blowup { r: f64, value: f64 },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

pub type Result<T> = std::result::Result<T, LabError>;
