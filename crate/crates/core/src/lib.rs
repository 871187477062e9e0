//! Soliton dressing of axially symmetric harmonic maps into SU(p,q)/S(U(p)×U(q)).

pub mod algebra;
pub mod dressing;
pub mod error;
pub mod seeds;
pub mod spectral;
pub mod targets;
pub mod verification;

pub use algebra::{c, CMatrix, CVector, ConstraintResidual, Signature};
pub use dressing::{
    dress, dress_point, DressedPoint, Dressing, PointStatus, Soliton, SolitonConfig, Tolerances,
};
pub use error::{Result, VestureError};
pub use seeds::{ConstantSeed, FnSeed, Seed};
pub use spectral::{DomainPoint, PolePair};
pub use num_complex::Complex64;
