//! Seed solutions q₀ and their generating matrices Ψ₀(λ, x).
//!
//! The dressing solver only ever needs Ψ₀ at the new poles λ_k(x). Constant
//! seeds have a vanishing Maurer–Cartan form, so Ψ₀ ≡ q₀ solves the Lax
//! system with the initial value Ψ₀(0, x) = q₀.

use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;

use crate::algebra::{self, symspace_residual, CMatrix, Signature};
use crate::error::{Result, VestureError};
use crate::spectral::DomainPoint;

/// Default tolerance for seed validation.
pub const SEED_TOLERANCE: f64 = 1e-9;

/// A known harmonic map q₀ with a generating matrix Ψ₀.
///
/// Implementations must be pure: the dressing pipeline evaluates seeds from
/// many worker threads at once.
pub trait Seed: Send + Sync {
    fn signature(&self) -> Signature;

    fn q0(&self, x: DomainPoint) -> CMatrix;

    fn psi0(&self, lambda: Complex64, x: DomainPoint) -> CMatrix;

    /// True when q₀ and Ψ₀ do not depend on x or λ.
    fn is_constant(&self) -> bool {
        false
    }
}

/// Constant seed q₀ ≡ Q₀, Ψ₀ ≡ Q₀.
#[derive(Debug, Clone, PartialEq)]
pub struct ConstantSeed {
    matrix: CMatrix,
    signature: Signature,
}

impl ConstantSeed {
    pub fn new(matrix: CMatrix, signature: Signature, tol: f64) -> Result<Self> {
        let n = signature.dim();
        if matrix.nrows() != n || matrix.ncols() != n {
            return Err(VestureError::Config(format!(
                "seed matrix is {}x{}, signature needs {n}x{n}",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        let residual = symspace_residual(&matrix, &signature.gamma());
        if !(residual <= tol) {
            return Err(VestureError::Config(format!(
                "seed matrix violates the symmetric-space constraint (residual {residual:e})"
            )));
        }
        Ok(Self { matrix, signature })
    }

    /// The Minkowski seed q₀ = I.
    pub fn identity(signature: Signature) -> Self {
        Self {
            matrix: algebra::identity(signature.dim()),
            signature,
        }
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }
}

impl Seed for ConstantSeed {
    fn signature(&self) -> Signature {
        self.signature
    }

    fn q0(&self, _x: DomainPoint) -> CMatrix {
        self.matrix.clone()
    }

    fn psi0(&self, _lambda: Complex64, _x: DomainPoint) -> CMatrix {
        self.matrix.clone()
    }

    fn is_constant(&self) -> bool {
        true
    }
}

type QFn = dyn Fn(DomainPoint) -> CMatrix + Send + Sync;
type PsiFn = dyn Fn(Complex64, DomainPoint) -> CMatrix + Send + Sync;

/// User-supplied seed given by a pair of evaluators.
///
/// Consistency between the two is only checked at λ = 0 and through the
/// symmetric-space constraint, see [`FnSeed::validate_at`].
#[derive(Clone)]
pub struct FnSeed {
    signature: Signature,
    q0: Arc<QFn>,
    psi0: Arc<PsiFn>,
}

impl FnSeed {
    pub fn new<Q, P>(signature: Signature, q0: Q, psi0: P) -> Self
    where
        Q: Fn(DomainPoint) -> CMatrix + Send + Sync + 'static,
        P: Fn(Complex64, DomainPoint) -> CMatrix + Send + Sync + 'static,
    {
        Self {
            signature,
            q0: Arc::new(q0),
            psi0: Arc::new(psi0),
        }
    }

    pub fn validate_at(&self, x: DomainPoint, tol: f64) -> Result<()> {
        let q = (self.q0)(x);
        let residual = symspace_residual(&q, &self.signature.gamma());
        if !(residual <= tol) {
            return Err(VestureError::Config(format!(
                "seed q0 leaves the symmetric space at {x:?} (residual {residual:e})"
            )));
        }
        let mismatch = ((self.psi0)(Complex64::new(0.0, 0.0), x) - &q).norm();
        if !(mismatch <= tol * (1.0 + q.norm())) {
            return Err(VestureError::Config(format!(
                "seed psi0(0, x) differs from q0(x) at {x:?} by {mismatch:e}"
            )));
        }
        Ok(())
    }
}

impl fmt::Debug for FnSeed {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FnSeed")
            .field("signature", &self.signature)
            .finish_non_exhaustive()
    }
}

impl Seed for FnSeed {
    fn signature(&self) -> Signature {
        self.signature
    }

    fn q0(&self, x: DomainPoint) -> CMatrix {
        (self.q0)(x)
    }

    fn psi0(&self, lambda: Complex64, x: DomainPoint) -> CMatrix {
        (self.psi0)(lambda, x)
    }
}

/// Ψ₀(λ_k, x) together with its inverse.
pub fn psi0_at(
    seed: &dyn Seed,
    lambda_k: Complex64,
    x: DomainPoint,
    condition_cap: f64,
) -> Result<(CMatrix, CMatrix)> {
    let psi = seed.psi0(lambda_k, x);
    match algebra::invert_with_condition(&psi, condition_cap) {
        Ok((inv, _)) => Ok((psi, inv)),
        Err(VestureError::NotInvertible { condition }) => Err(VestureError::Config(format!(
            "seed generating matrix is not invertible at lambda = {lambda_k} \
             (condition estimate {condition:e})"
        ))),
        Err(e) => Err(e),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{c, identity, invert, sigma, DEFAULT_CONDITION_CAP};
    use crate::spectral::deck;

    fn diag2(a: f64, b: f64) -> CMatrix {
        CMatrix::from_row_slice(2, 2, &[c(a, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(b, 0.0)])
    }

    fn boost(t: f64) -> CMatrix {
        let (ch, sh) = (c(t.cosh(), 0.0), c(t.sinh(), 0.0));
        CMatrix::from_row_slice(2, 2, &[ch, sh, sh, ch])
    }

    #[test]
    fn minkowski_seeds() {
        for (p, q) in [(1, 1), (2, 1)] {
            let sig = Signature::new(p, q).unwrap();
            let seed = ConstantSeed::identity(sig);
            let x = DomainPoint::new(0.7, -2.0).unwrap();
            let (psi, inv) = psi0_at(&seed, c(0.3, -1.2), x, DEFAULT_CONDITION_CAP).unwrap();
            assert_eq!(psi, identity(sig.dim()));
            assert_eq!(inv, identity(sig.dim()));
            assert!(seed.is_constant());
        }
    }

    #[test]
    fn boosted_constant_seed_is_valid() {
        let sig = Signature::new(1, 1).unwrap();
        let seed = ConstantSeed::new(boost(0.7), sig, SEED_TOLERANCE).unwrap();
        let x = DomainPoint::new(1.0, 1.0).unwrap();
        assert_eq!(seed.psi0(c(5.0, 1.0), x), boost(0.7));
        assert_eq!(seed.q0(x), boost(0.7));
    }

    #[test]
    fn unimodular_diagonal_is_not_in_the_symmetric_space() {
        // Hermitian with unit determinant, but QΓQΓ = diag(4, 1/4).
        let sig = Signature::new(1, 1).unwrap();
        assert!(ConstantSeed::new(diag2(2.0, 0.5), sig, SEED_TOLERANCE).is_err());
    }

    #[test]
    fn constraint_violating_seed_is_rejected() {
        let sig = Signature::new(1, 1).unwrap();
        assert!(matches!(
            ConstantSeed::new(diag2(2.0, 2.0), sig, SEED_TOLERANCE),
            Err(VestureError::Config(_))
        ));
        assert!(ConstantSeed::new(identity(3), sig, SEED_TOLERANCE).is_err());
    }

    #[test]
    fn constant_seed_deck_symmetry() {
        // Ψ₀(T λ) = q₀ σ(Ψ₀(λ)) J holds with the constant J = Q₀.
        let sig = Signature::new(1, 1).unwrap();
        let g = sig.gamma();
        let q0 = boost(-0.4);
        let seed = ConstantSeed::new(q0.clone(), sig, SEED_TOLERANCE).unwrap();
        assert!((sigma(&q0, &g) - invert(&q0).unwrap()).norm() < 1e-14);
        let j = q0.clone();
        let x = DomainPoint::new(1.4, 0.2).unwrap();
        let l = c(0.3, 0.9);
        let lhs = seed.psi0(deck(l, x).unwrap(), x);
        let rhs = seed.q0(x) * sigma(&seed.psi0(l, x), &g) * j;
        assert!((lhs - rhs).norm() < 1e-14);
    }

    #[test]
    fn fn_seed_validation() {
        let sig = Signature::new(1, 1).unwrap();
        let good = FnSeed::new(sig, |_| identity(2), |_, _| identity(2));
        let x = DomainPoint::new(1.0, 0.0).unwrap();
        good.validate_at(x, 1e-12).unwrap();
        let bad = FnSeed::new(sig, |_| identity(2), |_, _| diag2(2.0, 0.5));
        assert!(bad.validate_at(x, 1e-12).is_err());
        let singular = FnSeed::new(sig, |_| identity(2), |_, _| diag2(1.0, 0.0));
        assert!(psi0_at(&singular, c(1.0, 1.0), x, DEFAULT_CONDITION_CAP).is_err());
    }
}
