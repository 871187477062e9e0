use num_complex::Complex64;
use thiserror::Error;

/// Errors raised by the dressing pipeline and its supporting modules.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum VestureError {
    /// Invalid configuration, seed or parameter choice.
    #[error("configuration error: {0}")]
    Config(String),

    /// A spectral value fell outside the domain of a rational function
    /// (λ = 0, or the axis ρ = 0).
    #[error("domain error: {0}")]
    Domain(String),

    /// Evaluation at a pole of a, b, ω or χ.
    #[error("pole encountered: {0}")]
    Pole(String),

    /// Grid point within the exclusion radius of a branch point z ± iρ = ϖ.
    #[error("branch point: |(z - w)^2 + rho^2| = {distance:e}")]
    BranchPoint { distance: f64 },

    /// The dressing system degenerates (|det A| below the singular tolerance).
    #[error("singular linear system: det = {det}")]
    Singular { det: Complex64 },

    /// A matrix could not be inverted because it is singular or its
    /// estimated condition number exceeds the configured cap.
    #[error("matrix not invertible (condition estimate {condition:e})")]
    NotInvertible { condition: f64 },

    /// Extraction of physical potentials hit a vanishing normalizing entry.
    #[error("singular extraction: {0}")]
    Extraction(String),
}

pub type Result<T> = std::result::Result<T, VestureError>;
