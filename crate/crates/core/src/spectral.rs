//! Spectral-plane functions over a domain point x = (ρ, z).
//!
//! The surface coordinate ϖ(λ, x) = ρ²/(2λ) + z − λ/2 is two-to-one in λ;
//! the deck map λ ↦ −ρ²/λ exchanges the sheets. The rational functions
//! a = ρ²/(λ² + ρ²) and b = λ/(λ² + ρ²) build the Lax connection, and
//! ω_μ = ∂_μϖ / ∂_λϖ are the coefficients of the covariant derivative
//! D_μ = ∂_μ − ω_μ ∂_λ.

use num_complex::Complex64;

use crate::error::{Result, VestureError};

/// Grid points with |(z − ϖ₀)² + ρ²| below this are treated as branch points.
pub const BRANCH_EXCLUSION: f64 = 1e-12;

/// Weyl coordinates (ρ, z) of a point in the right half plane.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DomainPoint {
    pub rho: f64,
    pub z: f64,
}

impl DomainPoint {
    pub fn new(rho: f64, z: f64) -> Result<Self> {
        if !(rho > 0.0) || !rho.is_finite() || !z.is_finite() {
            return Err(VestureError::Domain(format!(
                "point (rho={rho}, z={z}) is not in the open half plane rho > 0"
            )));
        }
        Ok(Self { rho, z })
    }

    pub fn norm(&self) -> f64 {
        self.rho.hypot(self.z)
    }

    pub fn offset(&self, d_rho: f64, d_z: f64) -> Self {
        Self {
            rho: self.rho + d_rho,
            z: self.z + d_z,
        }
    }
}

fn nonzero(lambda: Complex64, what: &str) -> Result<()> {
    if lambda.norm() == 0.0 || !lambda.is_finite() {
        return Err(VestureError::Domain(format!("{what} requires lambda != 0")));
    }
    Ok(())
}

/// ϖ(λ, x) = ρ²/(2λ) + z − λ/2.
pub fn varpi(lambda: Complex64, x: DomainPoint) -> Result<Complex64> {
    nonzero(lambda, "varpi")?;
    Ok(x.rho * x.rho / (2.0 * lambda) + x.z - lambda / 2.0)
}

/// Deck transformation T_x(λ) = −ρ²/λ.
pub fn deck(lambda: Complex64, x: DomainPoint) -> Result<Complex64> {
    nonzero(lambda, "deck")?;
    Ok(-x.rho * x.rho / lambda)
}

/// Partial derivatives (∂_ρϖ, ∂_zϖ, ∂_λϖ).
pub fn varpi_partials(lambda: Complex64, x: DomainPoint) -> Result<Partials> {
    nonzero(lambda, "varpi")?;
    let rho2 = x.rho * x.rho;
    Ok(Partials {
        d_rho: x.rho / lambda,
        d_z: Complex64::new(1.0, 0.0),
        d_lambda: -(lambda * lambda + rho2) / (2.0 * lambda * lambda),
    })
}

/// The two λ-roots lying over a fixed surface value ϖ₀.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PolePair {
    pub lambda_in: Complex64,
    pub lambda_out: Complex64,
}

impl PolePair {
    pub fn product(&self) -> Complex64 {
        self.lambda_in * self.lambda_out
    }

    pub fn swapped(self) -> Self {
        Self {
            lambda_in: self.lambda_out,
            lambda_out: self.lambda_in,
        }
    }
}

fn pole_discriminant(varpi0: Complex64, x: DomainPoint) -> Result<(Complex64, Complex64)> {
    if varpi0.im == 0.0 || !varpi0.is_finite() {
        return Err(VestureError::Config(format!(
            "real pole not supported: w = {varpi0}"
        )));
    }
    let shift = x.z - varpi0;
    let disc = shift * shift + x.rho * x.rho;
    if disc.norm() < BRANCH_EXCLUSION {
        return Err(VestureError::BranchPoint {
            distance: disc.norm(),
        });
    }
    Ok((shift, disc))
}

/// Roots of λ² − 2λ(z − ϖ₀) − ρ² = 0, labelled by the principal square root:
/// `lambda_in = (z − ϖ₀) − √((z − ϖ₀)² + ρ²)`.
pub fn pole_pair(varpi0: Complex64, x: DomainPoint) -> Result<PolePair> {
    let (shift, disc) = pole_discriminant(varpi0, x)?;
    let root = disc.sqrt();
    Ok(PolePair {
        lambda_in: shift - root,
        lambda_out: shift + root,
    })
}

/// Like [`pole_pair`], but labels the roots so that `lambda_in` is the root
/// closest to `previous_in`. Used to follow a root continuously along a
/// grid row across the principal branch cut.
pub fn pole_pair_tracked(
    varpi0: Complex64,
    x: DomainPoint,
    previous_in: Complex64,
) -> Result<PolePair> {
    let pair = pole_pair(varpi0, x)?;
    if (pair.lambda_out - previous_in).norm() < (pair.lambda_in - previous_in).norm() {
        Ok(pair.swapped())
    } else {
        Ok(pair)
    }
}

/// Diagnostic chart classification: does λ lie inside the disk |λ| < ρ?
pub fn in_disk(lambda: Complex64, x: DomainPoint) -> bool {
    lambda.norm() < x.rho
}

fn pole_guard(lambda: Complex64, x: DomainPoint) -> Result<Complex64> {
    let rho2 = x.rho * x.rho;
    let denom = lambda * lambda + rho2;
    if denom.norm() <= 1e-15 * rho2 {
        return Err(VestureError::Pole(format!(
            "lambda = {lambda} coincides with +-i*rho"
        )));
    }
    Ok(denom)
}

/// (a, b) = (ρ²/(λ² + ρ²), λ/(λ² + ρ²)).
pub fn ab(lambda: Complex64, x: DomainPoint) -> Result<(Complex64, Complex64)> {
    let denom = pole_guard(lambda, x)?;
    Ok((x.rho * x.rho / denom, lambda / denom))
}

/// (ω_ρ, ω_z) = (−2ρλ/(λ² + ρ²), −2λ²/(λ² + ρ²)).
pub fn omega_forms(lambda: Complex64, x: DomainPoint) -> Result<(Complex64, Complex64)> {
    nonzero(lambda, "omega")?;
    let denom = pole_guard(lambda, x)?;
    Ok((
        -2.0 * x.rho * lambda / denom,
        -2.0 * lambda * lambda / denom,
    ))
}

/// First partial derivatives of a function of (ρ, z, λ).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Partials {
    pub d_rho: Complex64,
    pub d_z: Complex64,
    pub d_lambda: Complex64,
}

impl Partials {
    /// Covariant derivatives (D_ρ f, D_z f) given ω = (ω_ρ, ω_z).
    pub fn covariant(&self, omega: (Complex64, Complex64)) -> (Complex64, Complex64) {
        (
            self.d_rho - omega.0 * self.d_lambda,
            self.d_z - omega.1 * self.d_lambda,
        )
    }
}

/// Values and closed-form partials of a and b.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AbJet {
    pub a: Complex64,
    pub b: Complex64,
    pub da: Partials,
    pub db: Partials,
}

pub fn ab_jet(lambda: Complex64, x: DomainPoint) -> Result<AbJet> {
    let s = pole_guard(lambda, x)?;
    let rho = x.rho;
    let rho2 = rho * rho;
    let s2 = s * s;
    let zero = Complex64::new(0.0, 0.0);
    Ok(AbJet {
        a: rho2 / s,
        b: lambda / s,
        da: Partials {
            d_rho: 2.0 * rho * lambda * lambda / s2,
            d_z: zero,
            d_lambda: -2.0 * lambda * rho2 / s2,
        },
        db: Partials {
            d_rho: -2.0 * rho * lambda / s2,
            d_z: zero,
            d_lambda: (rho2 - lambda * lambda) / s2,
        },
    })
}
