//! G₁,₁: the Cayley transform to SL(2,R), (x, y) extraction and Kerr.

use std::f64::consts::FRAC_1_SQRT_2;
use std::sync::Arc;

use num_complex::Complex64;

use super::{BLParams, ErnstValue11};
use crate::algebra::{c, CMatrix, Signature};
use crate::dressing::{Soliton, SolitonConfig};
use crate::error::{Result, VestureError};
use crate::seeds::ConstantSeed;

/// Q = (1/√2)[[1, i], [i, 1]].
pub fn cayley_matrix() -> CMatrix {
    let h = FRAC_1_SQRT_2;
    CMatrix::from_row_slice(2, 2, &[c(h, 0.0), c(0.0, h), c(0.0, h), c(h, 0.0)])
}

/// q' = Q q Q*.
pub fn cayley2(q: &CMatrix) -> CMatrix {
    let cq = cayley_matrix();
    &cq * q * cq.adjoint()
}

/// The Γ-representation of (1/x)[[x² + y², y], [y, 1]].
pub fn embed_g11(value: ErnstValue11) -> CMatrix {
    let ErnstValue11 { x, y } = value;
    let real = CMatrix::from_row_slice(
        2,
        2,
        &[c((x * x + y * y) / x, 0.0), c(y / x, 0.0), c(y / x, 0.0), c(1.0 / x, 0.0)],
    );
    let cq = cayley_matrix();
    cq.adjoint() * real * cq
}

/// x = 1/q'₂₂, y = q'₁₂/q'₂₂.
pub fn ernst_g11(q: &CMatrix) -> Result<ErnstValue11> {
    if q.shape() != (2, 2) {
        return Err(VestureError::Config("ernst_g11 needs a 2x2 matrix".into()));
    }
    let qp = cayley2(q);
    let d = qp[(1, 1)];
    if !(d.norm() > 1e-14 * qp.norm()) {
        return Err(VestureError::Extraction(format!("q'_22 = {d}")));
    }
    Ok(ErnstValue11 {
        x: 1.0 / d.re,
        y: (qp[(0, 1)] / d).re,
    })
}

/// x = (r² − 2mr + a²cos²θ)/(r² + a²cos²θ), y = 2ma cos θ/(r² + a²cos²θ).
pub fn kerr_oracle(m: f64, a: f64, r: f64, theta: f64) -> Result<ErnstValue11> {
    let ac = a * theta.cos();
    let den = r * r + ac * ac;
    if den == 0.0 {
        return Err(VestureError::Pole("r^2 + a^2 cos^2 theta = 0".into()));
    }
    Ok(ErnstValue11 {
        x: (r * r - 2.0 * m * r + ac * ac) / den,
        y: 2.0 * m * ac / den,
    })
}

/// Real soliton data (α, δ, ϖ = is) reproducing Kerr with a = √(m² + s²).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KerrParams {
    pub alpha: f64,
    pub delta: f64,
    pub varpi: Complex64,
}

impl KerrParams {
    /// A = |α|² − |δ|².
    pub fn a_param(&self) -> f64 {
        self.alpha * self.alpha - self.delta * self.delta
    }

    /// B = |α|² + |δ|², which equals the spin a.
    pub fn b_param(&self) -> f64 {
        self.alpha * self.alpha + self.delta * self.delta
    }
}

pub fn kerr_params(m: f64, s: f64) -> Result<KerrParams> {
    if !(m >= 0.0) || !(s > 0.0) || !m.is_finite() || !s.is_finite() {
        return Err(VestureError::Config(format!(
            "kerr parameters need m >= 0 and s > 0, got m = {m}, s = {s}"
        )));
    }
    let a = m.hypot(s);
    Ok(KerrParams {
        alpha: (0.5 * (s + a)).sqrt(),
        delta: (0.5 * (a - s)).sqrt(),
        varpi: c(0.0, s),
    })
}

/// The 1-soliton configuration on the Minkowski seed whose output is Kerr.
pub fn kerr_config(p: &BLParams) -> Result<SolitonConfig> {
    let k = kerr_params(p.m, p.s)?;
    let seed = Arc::new(ConstantSeed::identity(Signature::new(1, 1)?));
    SolitonConfig::new(
        seed,
        vec![Soliton::from_slice(k.varpi, &[c(k.alpha, 0.0), c(k.delta, 0.0)])],
    )
}

/// F = A²((r−m)² + s²) − B²s² sin²θ; its zero set is where det A vanishes.
pub fn ring_function(a_param: f64, b_param: f64, p: &BLParams, r: f64, theta: f64) -> f64 {
    let big_r = r - p.m;
    let st = theta.sin();
    a_param * a_param * (big_r * big_r + p.s * p.s) - b_param * b_param * p.s * p.s * st * st
}

/// Closed-form 1-soliton q for vector (α, δ) and pole is, in BL coordinates.
pub fn g11_soliton_q(
    alpha: Complex64,
    delta: Complex64,
    p: &BLParams,
    r: f64,
    theta: f64,
) -> Result<CMatrix> {
    let a = alpha.norm_sqr() - delta.norm_sqr();
    let b = alpha.norm_sqr() + delta.norm_sqr();
    let f = ring_function(a, b, p, r, theta);
    if f == 0.0 {
        return Err(VestureError::Singular { det: c(0.0, 0.0) });
    }
    let s = p.s;
    let diag = c(1.0 + 8.0 * alpha.norm_sqr() * delta.norm_sqr() * s * s / f, 0.0);
    let phase = c(-b * s * theta.cos(), a * (r - p.m));
    let q12 = -4.0 * s * alpha * delta.conj() * phase / f;
    Ok(CMatrix::from_row_slice(2, 2, &[diag, q12, q12.conj(), diag]))
}
