//! G₂,₁: the Γ ↔ Γ̃ basis change, (E, Φ) extraction, the closed-form
//! 1-soliton family and Kerr-Newman.

use std::f64::consts::{FRAC_1_SQRT_2, SQRT_2};
use std::sync::Arc;

use num_complex::Complex64;

use super::kerr::ring_function;
use super::{BLParams, ErnstValue21};
use crate::algebra::{c, identity, CMatrix, Signature};
use crate::dressing::{Soliton, SolitonConfig};
use crate::error::{Result, VestureError};
use crate::seeds::ConstantSeed;

/// Γ̃ with rows (0, 0, −i), (0, 1, 0), (i, 0, 0).
pub fn gamma_tilde() -> CMatrix {
    let z = c(0.0, 0.0);
    CMatrix::from_row_slice(3, 3, &[z, z, c(0.0, -1.0), z, c(1.0, 0.0), z, c(0.0, 1.0), z, z])
}

/// Unitary U with UΓU* = Γ̃, Γ = diag(1, 1, −1).
///
/// The columns are eigenvectors of Γ̃ ordered to match the diagonal of Γ:
/// (1, 0, i)/√2 and e₂ for +1, (i, 0, 1)/√2 for −1.
pub fn basis_change_u3() -> CMatrix {
    let h = FRAC_1_SQRT_2;
    let z = c(0.0, 0.0);
    let u = CMatrix::from_row_slice(
        3,
        3,
        &[c(h, 0.0), z, c(0.0, h), z, c(1.0, 0.0), z, c(0.0, h), z, c(h, 0.0)],
    );
    let gamma = Signature::new(2, 1).expect("valid signature").gamma();
    let unitarity = (&u * u.adjoint() - identity(3)).norm();
    let conjugation = (&u * gamma * u.adjoint() - gamma_tilde()).norm();
    assert!(
        unitarity < 1e-14 && conjugation < 1e-14,
        "basis change failed verification: {unitarity:e}, {conjugation:e}"
    );
    u
}

/// Γ-representation to Γ̃-representation: q̃ = U q U*.
pub fn to_tilde(q: &CMatrix) -> CMatrix {
    let u = basis_change_u3();
    &u * q * u.adjoint()
}

/// Γ̃-representation to Γ-representation: q = U* q̃ U.
pub fn from_tilde(qt: &CMatrix) -> CMatrix {
    let u = basis_change_u3();
    u.adjoint() * qt * &u
}

/// x = 1/Re q̃₃₃, Φ = i q̃₃₂/(√2 q̃₃₃), y = Re(q̃₃₁/q̃₃₃), E = x + |Φ|² + iy.
pub fn ernst_g21(q: &CMatrix) -> Result<ErnstValue21> {
    if q.shape() != (3, 3) {
        return Err(VestureError::Config("ernst_g21 needs a 3x3 matrix".into()));
    }
    let qt = to_tilde(q);
    let d = qt[(2, 2)];
    if !(d.norm() > 1e-14 * qt.norm()) {
        return Err(VestureError::Extraction(format!("q~_33 = {d}")));
    }
    let x = 1.0 / d.re;
    let phi = c(0.0, 1.0) * qt[(2, 1)] / (SQRT_2 * d);
    let ratio = qt[(2, 0)] / d;
    Ok(ErnstValue21 {
        e: c(x + phi.norm_sqr(), ratio.re),
        phi,
        x,
        y: ratio.re,
        consistency: ratio.im + phi.norm_sqr(),
    })
}

/// P̃(E, Φ) in the Γ̃-representation, with x = Re E − |Φ|², y = Im E.
///
/// Equals n a a* n* for n = n(y, η, θ), a = a(μ), x = e^{2μ}, √2Φ = η + iθ.
pub fn p_tilde(e: Complex64, phi: Complex64) -> CMatrix {
    let f2 = phi.norm_sqr();
    let x = e.re - f2;
    let y = e.im;
    let i = c(0.0, 1.0);
    CMatrix::from_row_slice(
        3,
        3,
        &[
            c(x + 2.0 * f2 + (y * y + f2 * f2) / x, 0.0),
            SQRT_2 * phi * (1.0 - i * y / x + f2 / x),
            c(y, f2) / x,
            SQRT_2 * phi.conj() * (1.0 + i * y / x + f2 / x),
            c(1.0 + 2.0 * f2 / x, 0.0),
            i * SQRT_2 * phi.conj() / x,
            c(y, -f2) / x,
            -i * SQRT_2 * phi / x,
            c(1.0 / x, 0.0),
        ],
    )
}

/// P̃ with the (1,2) and (2,1) entries in the printed form
/// √2Φ(1 − (i/2)y + |Φ|²/x). Differs from [`p_tilde`] whenever Φy ≠ 0 and
/// x ≠ 2; kept for comparison only.
pub fn p_tilde_as_printed(e: Complex64, phi: Complex64) -> CMatrix {
    let mut p = p_tilde(e, phi);
    let f2 = phi.norm_sqr();
    let x = e.re - f2;
    let i = c(0.0, 1.0);
    p[(0, 1)] = SQRT_2 * phi * (1.0 - 0.5 * i * e.im + f2 / x);
    p[(1, 0)] = SQRT_2 * phi.conj() * (1.0 + 0.5 * i * e.im + f2 / x);
    p
}

/// Φ = e/(r − ia cos θ), E = 1 − 2m/(r − ia cos θ).
pub fn kn_oracle(m: f64, e: f64, a: f64, r: f64, theta: f64) -> Result<ErnstValue21> {
    let w = c(r, -a * theta.cos());
    if w.norm() == 0.0 {
        return Err(VestureError::Pole("r - i a cos theta = 0".into()));
    }
    Ok(ErnstValue21::from_potentials(1.0 - 2.0 * m / w, e / w))
}

/// Free parameters of the closed-form 1-soliton G₂,₁ family. The vector
/// bilinears are αγ̄ = n₁ + in₂ and βγ̄ = n₃ + in₄.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FamilyParams {
    pub a_param: f64,
    pub b_param: f64,
    pub n: [f64; 4],
}

impl FamilyParams {
    /// Family parameters realised by an actual vector (α, β, γ).
    pub fn from_vector(v: &[Complex64; 3]) -> Self {
        let [alpha, beta, gamma] = *v;
        let ag = alpha * gamma.conj();
        let bg = beta * gamma.conj();
        let ab = alpha.norm_sqr() + beta.norm_sqr();
        Self {
            a_param: ab - gamma.norm_sqr(),
            b_param: ab + gamma.norm_sqr(),
            n: [ag.re, ag.im, bg.re, bg.im],
        }
    }

    /// (B² − A²)/4 − (n₁² + n₂² + n₃² + n₄²); zero for parameters realised
    /// by a vector.
    pub fn realizability_defect(&self) -> f64 {
        let n2: f64 = self.n.iter().map(|v| v * v).sum();
        0.25 * (self.b_param * self.b_param - self.a_param * self.a_param) - n2
    }
}

/// The paper's closed-form 1-soliton q with vector bilinears replaced by the
/// free products in `params`.
pub fn g21_soliton_family(params: &FamilyParams, p: &BLParams, r: f64, theta: f64) -> Result<CMatrix> {
    let FamilyParams { a_param, b_param, n } = *params;
    let f = ring_function(a_param, b_param, p, r, theta);
    if f == 0.0 || !f.is_finite() {
        return Err(VestureError::Singular { det: c(f, 0.0) });
    }
    let s = p.s;
    let ag = c(n[0], n[1]);
    let bg = c(n[2], n[3]);
    let (ag2, bg2) = (ag.norm_sqr(), bg.norm_sqr());
    let phase = c(-b_param * s * theta.cos(), a_param * (r - p.m));
    let k = 8.0 * s * s / f;
    let q11 = c(1.0 + k * ag2, 0.0);
    let q12 = k * ag * bg.conj();
    let q13 = -4.0 * s * ag * phase / f;
    let q22 = c(1.0 + k * bg2, 0.0);
    let q23 = -4.0 * s * bg * phase / f;
    let q33 = c(1.0 + k * (ag2 + bg2), 0.0);
    Ok(CMatrix::from_row_slice(
        3,
        3,
        &[q11, q12, q13, q12.conj(), q22, q23, q13.conj(), q23.conj(), q33],
    ))
}

/// Choice of Kerr-Newman parameter identification.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KnIdentification {
    /// A = s, B = √(m² + s² − e²), n = (m/2, 0, −e/2, 0). Not realisable by
    /// a vector for e ≠ 0 and the resulting q leaves the symmetric space.
    Printed,
    /// A = s, B = √(m² + s² + e²), n = (m/2, 0, −e/2, 0).
    Realizable,
}

/// Family parameters and the oracle spin a = −B for a Kerr-Newman target.
pub fn kn_family_params(p: &BLParams, ident: KnIdentification) -> Result<(FamilyParams, f64)> {
    let (m, e, s) = (p.m, p.e, p.s);
    let b2 = match ident {
        KnIdentification::Printed => m * m + s * s - e * e,
        KnIdentification::Realizable => m * m + s * s + e * e,
    };
    if !(b2 > 0.0) {
        return Err(VestureError::Config(format!(
            "identification needs a positive B^2, got {b2}"
        )));
    }
    let b = b2.sqrt();
    Ok((
        FamilyParams {
            a_param: s,
            b_param: b,
            n: [0.5 * m, 0.0, -0.5 * e, 0.0],
        },
        -b,
    ))
}

/// Real vector (α, β, γ) realising the [`KnIdentification::Realizable`]
/// parameters: γ² = (B − s)/2, α = (m/2)/γ, β = (−e/2)/γ.
pub fn kn_vector(p: &BLParams) -> Result<[Complex64; 3]> {
    let (params, _) = kn_family_params(p, KnIdentification::Realizable)?;
    let g2 = 0.5 * (params.b_param - p.s);
    if !(g2 > 0.0) {
        return Err(VestureError::Config(
            "m = e = 0 has no soliton content".into(),
        ));
    }
    let g = g2.sqrt();
    Ok([c(0.5 * p.m / g, 0.0), c(-0.5 * p.e / g, 0.0), c(g, 0.0)])
}

/// Dressing configuration on the Minkowski seed that yields Kerr-Newman
/// with a = −√(m² + s² + e²).
pub fn kn_config(p: &BLParams) -> Result<SolitonConfig> {
    let v = kn_vector(p)?;
    let seed = Arc::new(ConstantSeed::identity(Signature::new(2, 1)?));
    SolitonConfig::new(seed, vec![Soliton::from_slice(p.varpi(), &v)])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::constraint_residual;
    use crate::dressing::dress;
    use crate::targets::kerr::{ernst_g11, g11_soliton_q, kerr_oracle};
    use crate::targets::bl_to_weyl;
    use std::f64::consts::PI;

    fn g21() -> CMatrix {
        Signature::new(2, 1).unwrap().gamma()
    }

    #[test]
    fn basis_change_properties() {
        let u = basis_change_u3();
        assert!((&u * u.adjoint() - identity(3)).norm() < 1e-15);
        assert!((&u * g21() * u.adjoint() - gamma_tilde()).norm() < 1e-15);
        assert!((to_tilde(&identity(3)) - identity(3)).norm() < 1e-15);
        let gt = gamma_tilde();
        assert!((&gt * &gt - identity(3)).norm() == 0.0);
        // Eigenvector oracle: Γ̃ u_k = Γ_kk u_k for each column.
        for (k, sign) in [1.0, 1.0, -1.0].into_iter().enumerate() {
            let col = u.column(k).into_owned();
            assert!((&gt * &col - col * c(sign, 0.0)).norm() < 1e-15);
        }
    }

    #[test]
    fn minkowski_extraction() {
        let v = ernst_g21(&identity(3)).unwrap();
        assert!((v.e - c(1.0, 0.0)).norm() < 1e-15);
        assert!(v.phi.norm() < 1e-15);
    }

    #[test]
    fn p_tilde_round_trip() {
        let (e, phi) = (c(1.5, 0.2), c(0.3, -0.1));
        let pt = p_tilde(e, phi);
        let gt = gamma_tilde();
        assert!((&pt * &gt * &pt * &gt - identity(3)).norm() < 1e-13);
        let q = from_tilde(&pt);
        assert!(constraint_residual(&q, &g21()).total() < 1e-13);
        let v = ernst_g21(&q).unwrap();
        assert!((v.e - e).norm() < 1e-12 && (v.phi - phi).norm() < 1e-12);
        assert!(v.consistency.abs() < 1e-12);
        let printed = ernst_g21(&from_tilde(&p_tilde_as_printed(e, phi))).unwrap();
        assert!((printed.e - e).norm() < 1e-12 && (printed.phi - phi).norm() < 1e-12);
    }

    #[test]
    fn printed_p_tilde_leaves_the_symmetric_space() {
        let (e, phi) = (c(1.5, 0.2), c(0.3, -0.1));
        let pt = p_tilde_as_printed(e, phi);
        let gt = gamma_tilde();
        assert!((&pt * &gt * &pt * &gt - identity(3)).norm() > 1e-3);
    }

    #[test]
    fn uncharged_sector_reduces_to_g11() {
        let g11 = ernst_g11(&crate::targets::kerr::embed_g11(crate::targets::ErnstValue11 {
            x: 0.7,
            y: -0.4,
        }))
        .unwrap();
        let v = ernst_g21(&from_tilde(&p_tilde(c(g11.x, g11.y), c(0.0, 0.0)))).unwrap();
        assert!((v.x - 0.7).abs() < 1e-13 && (v.y + 0.4).abs() < 1e-13);
    }

    #[test]
    fn oracle_examples() {
        let flat = kn_oracle(0.0, 0.0, 0.8, 3.0, 1.0).unwrap();
        assert_eq!((flat.e, flat.phi), (c(1.0, 0.0), c(0.0, 0.0)));
        let (m, a, r, theta) = (1.2, 0.9, 3.3, 0.8);
        let kn = kn_oracle(m, 0.0, a, r, theta).unwrap();
        let kerr = kerr_oracle(m, -a, r, theta).unwrap();
        assert!((kn.x - kerr.x).abs() < 1e-15 && (kn.y - kerr.y).abs() < 1e-15);
        let a = -(1.0_f64 + 1.0 - 0.25).sqrt();
        let v = kn_oracle(1.0, 0.5, a, 3.0, PI / 3.0).unwrap();
        let w = c(3.0, -a * 0.5);
        assert!((v.phi - 0.5 / w).norm() < 1e-15);
        assert!((v.e - (1.0 - 2.0 / w)).norm() < 1e-15);
    }

    #[test]
    fn family_with_zero_content_is_identity() {
        let p = BLParams::kerr(1.0, 1.0).unwrap();
        let params = FamilyParams { a_param: 1.0, b_param: 2.0, n: [0.0; 4] };
        assert_eq!(g21_soliton_family(&params, &p, 3.0, 1.0).unwrap(), identity(3));
    }

    #[test]
    fn uncharged_family_embeds_kerr_q() {
        let p = BLParams::kerr(1.0, 0.7).unwrap();
        let (alpha, gamma) = (c(1.1, 0.0), c(0.45, 0.0));
        let params = FamilyParams::from_vector(&[alpha, c(0.0, 0.0), gamma]);
        for &(r, theta) in &[(3.0, 0.5), (6.0, 2.0)] {
            let q3 = g21_soliton_family(&params, &p, r, theta).unwrap();
            let q2 = g11_soliton_q(alpha, gamma, &p, r, theta).unwrap();
            for (i, j) in [(0, 0), (0, 1), (1, 0), (1, 1)] {
                let (a, b) = ([0, 2][i], [0, 2][j]);
                assert!((q3[(a, b)] - q2[(i, j)]).norm() < 1e-14);
            }
            assert_eq!(q3[(1, 1)], c(1.0, 0.0));
        }
    }

    #[test]
    fn family_matches_pipeline_for_a_vector() {
        let p = BLParams::kerr(0.4, 0.9).unwrap();
        let v = [c(0.8, 0.3), c(-0.2, 0.6), c(0.5, -0.1)];
        let params = FamilyParams::from_vector(&v);
        assert!(params.realizability_defect().abs() < 1e-14);
        let seed = Arc::new(ConstantSeed::identity(Signature::new(2, 1).unwrap()));
        let cfg = SolitonConfig::new(seed, vec![Soliton::from_slice(p.varpi(), &v)]).unwrap();
        for &(r, theta) in &[(2.5, 0.7), (5.0, 2.2)] {
            let d = dress(&cfg, bl_to_weyl(r, theta, &p).unwrap()).unwrap();
            let closed = g21_soliton_family(&params, &p, r, theta).unwrap();
            assert!((&d.q_raw - &closed).norm() < 1e-12 * closed.norm());
        }
    }

    #[test]
    fn identifications() {
        let p = BLParams::kerr_newman(1.0, 0.5, 1.0).unwrap();
        let (printed, a_printed) = kn_family_params(&p, KnIdentification::Printed).unwrap();
        assert!((printed.b_param - 1.75_f64.sqrt()).abs() < 1e-15);
        assert_eq!(a_printed, -printed.b_param);
        assert!((printed.realizability_defect() + 0.125).abs() < 1e-14);
        let (real, _) = kn_family_params(&p, KnIdentification::Realizable).unwrap();
        assert!(real.realizability_defect().abs() < 1e-14);
        let v = kn_vector(&p).unwrap();
        let from_v = FamilyParams::from_vector(&v);
        assert!((from_v.a_param - real.a_param).abs() < 1e-14);
        assert!((from_v.b_param - real.b_param).abs() < 1e-14);
        for k in 0..4 {
            assert!((from_v.n[k] - real.n[k]).abs() < 1e-14);
        }
    }

    fn worst_kn_error(p: &BLParams, ident: KnIdentification) -> f64 {
        let (params, a) = kn_family_params(p, ident).unwrap();
        let mut worst: f64 = 0.0;
        for &(r, theta) in &[(p.m + 2.0, 0.6), (p.m + 4.0, 1.3), (p.m + 7.0, 2.4)] {
            let v = ernst_g21(&g21_soliton_family(&params, p, r, theta).unwrap()).unwrap();
            let o = kn_oracle(p.m, p.e, a, r, theta).unwrap();
            worst = worst
                .max((v.e - o.e).norm() / o.e.norm())
                .max((v.phi - o.phi).norm() / o.phi.norm());
        }
        worst
    }

    #[test]
    fn realizable_identification_reproduces_kerr_newman() {
        let p = BLParams::kerr_newman(1.0, 0.5, 1.0).unwrap();
        assert!(worst_kn_error(&p, KnIdentification::Realizable) < 1e-13);
    }

    #[test]
    fn printed_identification_misses_kerr_newman() {
        let p = BLParams::kerr_newman(1.0, 0.5, 1.0).unwrap();
        assert!(worst_kn_error(&p, KnIdentification::Printed) > 1e-3);
        let (params, _) = kn_family_params(&p, KnIdentification::Printed).unwrap();
        let q = g21_soliton_family(&params, &p, 3.0, 1.0).unwrap();
        assert!(constraint_residual(&q, &g21()).quadratic > 1e-3);
    }

    #[test]
    fn dressed_vector_reproduces_kerr_newman() {
        let p = BLParams::kerr_newman(1.0, 0.9, 0.5).unwrap();
        let cfg = kn_config(&p).unwrap();
        let (_, a) = kn_family_params(&p, KnIdentification::Realizable).unwrap();
        for &(r, theta) in &[(3.0, 0.6), (5.5, 1.4), (9.0, 2.6)] {
            let d = dress(&cfg, bl_to_weyl(r, theta, &p).unwrap()).unwrap();
            assert!(constraint_residual(&d.q, &g21()).total() < 1e-12);
            let v = ernst_g21(&d.q).unwrap();
            let o = kn_oracle(p.m, p.e, a, r, theta).unwrap();
            assert!((v.e - o.e).norm() < 1e-12 * o.e.norm());
            assert!((v.phi - o.phi).norm() < 1e-12 * o.phi.norm());
        }
    }
}
