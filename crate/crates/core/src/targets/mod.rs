//! Target-specific pieces for G₁,₁ and G₂,₁: coordinates, potential
//! extraction, closed-form oracles and the su(2,1) test-bed.

pub mod kerr;
pub mod kerr_newman;
pub mod su21;

use num_complex::Complex64;

use crate::error::{Result, VestureError};
use crate::spectral::DomainPoint;

pub use kerr::{cayley2, embed_g11, ernst_g11, kerr_config, kerr_oracle, kerr_params, KerrParams};
pub use kerr_newman::{
    basis_change_u3, ernst_g21, g21_soliton_family, gamma_tilde, kn_config, kn_family_params,
    kn_oracle, FamilyParams, KnIdentification,
};
pub use su21::{cartan_embed_su21, commutation_check, su21_basis, StructureTable};

/// Ernst data (x, y) of a G₁,₁ map; x = g(K,K) is reported signed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErnstValue11 {
    pub x: f64,
    pub y: f64,
}

impl ErnstValue11 {
    pub fn potential(&self) -> Complex64 {
        Complex64::new(self.x, self.y)
    }

    /// |E − E_ref| / |E_ref| with E = x + iy.
    pub fn relative_error(&self, reference: &Self) -> f64 {
        (self.potential() - reference.potential()).norm() / reference.potential().norm()
    }
}

/// Gravitational and electromagnetic Ernst potentials of a G₂,₁ map.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErnstValue21 {
    pub e: Complex64,
    pub phi: Complex64,
    /// Re E − |Φ|².
    pub x: f64,
    pub y: f64,
    /// Im(q̃₃₁/q̃₃₃) + |Φ|², zero for a map in the symmetric space.
    pub consistency: f64,
}

impl ErnstValue21 {
    pub fn from_potentials(e: Complex64, phi: Complex64) -> Self {
        Self {
            e,
            phi,
            x: e.re - phi.norm_sqr(),
            y: e.im,
            consistency: 0.0,
        }
    }
}

/// Boyer-Lindquist parameters; ϖ = is.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BLParams {
    pub m: f64,
    pub s: f64,
    pub e: f64,
}

impl BLParams {
    pub fn new(m: f64, s: f64, e: f64) -> Result<Self> {
        if !(m.is_finite() && e.is_finite()) {
            return Err(VestureError::Config("m and e must be finite".into()));
        }
        if !(s > 0.0 && s.is_finite()) {
            return Err(VestureError::Config(format!("s must be positive, got {s}")));
        }
        Ok(Self { m, s, e })
    }

    pub fn kerr(m: f64, s: f64) -> Result<Self> {
        Self::new(m, s, 0.0)
    }

    /// Parameters for a charged preset; requires m² + s² − e² > 0.
    pub fn kerr_newman(m: f64, e: f64, s: f64) -> Result<Self> {
        let p = Self::new(m, s, e)?;
        if !(m * m + s * s - e * e > 0.0) {
            return Err(VestureError::Config(format!(
                "m^2 + s^2 - e^2 must be positive, got {}",
                m * m + s * s - e * e
            )));
        }
        Ok(p)
    }

    pub fn varpi(&self) -> Complex64 {
        Complex64::new(0.0, self.s)
    }
}

/// ρ = √((r−m)² + s²) sin θ, z = (r−m) cos θ.
pub fn bl_to_weyl(r: f64, theta: f64, p: &BLParams) -> Result<DomainPoint> {
    if !(theta > 0.0 && theta < std::f64::consts::PI) {
        return Err(VestureError::Domain(format!(
            "theta = {theta} lies on the symmetry axis"
        )));
    }
    let big_r = r - p.m;
    let rho = (big_r * big_r + p.s * p.s).sqrt() * theta.sin();
    DomainPoint::new(rho, big_r * theta.cos())
}

/// Inverse of [`bl_to_weyl`] on the branch r ≥ m.
pub fn weyl_to_bl(x: DomainPoint, p: &BLParams) -> Result<(f64, f64)> {
    let s2 = p.s * p.s;
    let t = x.rho * x.rho + x.z * x.z - s2;
    let big_r2 = 0.5 * (t + (t * t + 4.0 * x.z * x.z * s2).sqrt());
    let big_r = big_r2.max(0.0).sqrt();
    if big_r == 0.0 {
        return Err(VestureError::Domain(format!(
            "{x:?} lies on the disk spanned by the branch circle"
        )));
    }
    let cos_theta = (x.z / big_r).clamp(-1.0, 1.0);
    Ok((p.m + big_r, cos_theta.acos()))
}
