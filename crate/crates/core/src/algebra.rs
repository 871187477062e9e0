//! Dense complex matrices and the group-theoretic predicates of SU(p,q).
//!
//! All matrices here are small (n ≤ 4 for group elements, 2N ≤ 20 for the
//! dressing system), so they are plain heap-allocated [`DMatrix`] values.
//! Norms are Frobenius norms throughout.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Result, VestureError};

pub type CMatrix = DMatrix<Complex64>;
pub type CVector = DVector<Complex64>;

/// Inversions with a 1-norm condition estimate above this are refused.
pub const DEFAULT_CONDITION_CAP: f64 = 1e12;

#[inline]
pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// Signature (p, q) of the pseudo-Hermitian form preserved by SU(p,q).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Signature {
    p: usize,
    q: usize,
}

impl Signature {
    pub fn new(p: usize, q: usize) -> Result<Self> {
        if p == 0 || q == 0 {
            return Err(VestureError::Config(format!(
                "bad signature ({p},{q}): both p and q must be positive"
            )));
        }
        Ok(Self { p, q })
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn q(&self) -> usize {
        self.q
    }

    /// Matrix dimension n = p + q.
    pub fn dim(&self) -> usize {
        self.p + self.q
    }

    pub fn gamma(&self) -> CMatrix {
        gamma(*self)
    }
}

/// Γ = diag(+1 × p, −1 × q).
pub fn gamma(sig: Signature) -> CMatrix {
    let n = sig.dim();
    CMatrix::from_fn(n, n, |i, j| {
        if i != j {
            c(0.0, 0.0)
        } else if i < sig.p {
            c(1.0, 0.0)
        } else {
            c(-1.0, 0.0)
        }
    })
}

pub fn identity(n: usize) -> CMatrix {
    CMatrix::identity(n, n)
}

/// Maximum absolute column sum.
pub fn one_norm(m: &CMatrix) -> f64 {
    m.column_iter()
        .map(|col| col.iter().map(|z| z.norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

pub fn is_finite(m: &CMatrix) -> bool {
    m.iter().all(|z| z.re.is_finite() && z.im.is_finite())
}

/// Inverse by partial-pivot LU, together with the 1-norm condition number.
///
/// Fails when the matrix is singular, the inverse is not finite, or the
/// condition number exceeds `cap`.
pub fn invert_with_condition(m: &CMatrix, cap: f64) -> Result<(CMatrix, f64)> {
    assert!(m.is_square(), "inverse of a non-square matrix");
    let inv = m
        .clone()
        .lu()
        .try_inverse()
        .ok_or(VestureError::NotInvertible {
            condition: f64::INFINITY,
        })?;
    let condition = one_norm(m) * one_norm(&inv);
    if !condition.is_finite() || condition > cap || !is_finite(&inv) {
        return Err(VestureError::NotInvertible { condition });
    }
    Ok((inv, condition))
}

pub fn invert(m: &CMatrix) -> Result<CMatrix> {
    invert_with_condition(m, DEFAULT_CONDITION_CAP).map(|(inv, _)| inv)
}

/// τ(M) = Γ (M*)⁻¹ Γ.
pub fn tau(m: &CMatrix, gamma: &CMatrix) -> Result<CMatrix> {
    let inv_adj = invert(&m.adjoint())?;
    Ok(gamma * inv_adj * gamma)
}

/// σ(M) = Γ M Γ.
pub fn sigma(m: &CMatrix, gamma: &CMatrix) -> CMatrix {
    gamma * m * gamma
}

pub fn commutator(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a * b - b * a
}

/// ‖M*ΓM − Γ‖ + |det M − 1|, zero exactly on SU(p,q).
pub fn group_residual(m: &CMatrix, gamma: &CMatrix) -> f64 {
    (m.adjoint() * gamma * m - gamma).norm() + (m.determinant() - c(1.0, 0.0)).norm()
}

/// Components of the distance from the Cartan-embedded symmetric space
/// { q ∈ SU(p,q) : qΓqΓ = I }.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct ConstraintResidual {
    /// ‖qΓqΓ − I‖
    pub quadratic: f64,
    /// ‖q − q*‖
    pub hermiticity: f64,
    /// |det q − 1|
    pub determinant: f64,
}

impl ConstraintResidual {
    pub fn total(&self) -> f64 {
        self.quadratic + self.hermiticity + self.determinant
    }

    pub fn max_component(&self) -> f64 {
        self.quadratic.max(self.hermiticity).max(self.determinant)
    }

    /// True when every component is within `tol`.
    pub fn within(&self, tol: f64) -> bool {
        self.max_component() <= tol
    }

    /// Componentwise maximum.
    pub fn max(self, other: Self) -> Self {
        Self {
            quadratic: self.quadratic.max(other.quadratic),
            hermiticity: self.hermiticity.max(other.hermiticity),
            determinant: self.determinant.max(other.determinant),
        }
    }
}

pub fn constraint_residual(m: &CMatrix, gamma: &CMatrix) -> ConstraintResidual {
    let n = m.nrows();
    let mg = m * gamma;
    ConstraintResidual {
        quadratic: (&mg * &mg - identity(n)).norm(),
        hermiticity: (m - m.adjoint()).norm(),
        determinant: (m.determinant() - c(1.0, 0.0)).norm(),
    }
}

/// ‖MΓMΓ − I‖ + ‖M − M*‖ + |det M − 1|.
pub fn symspace_residual(m: &CMatrix, gamma: &CMatrix) -> f64 {
    constraint_residual(m, gamma).total()
}

/// Hermitian inner product v*Γw.
pub fn gamma_pairing(v: &CVector, gamma: &CMatrix, w: &CVector) -> Complex64 {
    (v.adjoint() * gamma * w)[(0, 0)]
}
