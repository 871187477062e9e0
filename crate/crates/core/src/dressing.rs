//! The N-soliton dressing pipeline at a single domain point.
//!
//! For N prescribed non-real surface values ϖ_k and constant vectors v_k the
//! 2N poles of the dressing matrix are the two λ-roots over each ϖ_k, paired
//! with v_k and Γv_k. The residues are rank one, R_k = u_k v_k* Ψ₀ₖ⁻¹, and
//! the u_k solve the 2N × 2N system
//!
//! ```text
//! Σ_j a_kj u_j* = b_k*,   a_kj = v_k* S_kj v_j / (λ_k − λ̄_j),
//! b_k* = −v_k* Ψ₀ₖ⁻¹ Γ,  S_kj = Ψ₀ₖ⁻¹ Γ (Ψ₀ⱼ*)⁻¹.
//! ```
//!
//! The dressed map is q = χ(0) q₀ with χ(λ) = I + Σ R_k/(λ − λ_k).

use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;

use crate::algebra::{
    self, c, constraint_residual, gamma_pairing, invert_with_condition, CMatrix, CVector,
    ConstraintResidual, Signature,
};
use crate::error::{Result, VestureError};
use crate::seeds::{psi0_at, Seed};
use crate::spectral::{deck, pole_pair, DomainPoint, PolePair};

/// Number of spectral samples used by the χ symmetry audits.
pub const CHI_AUDIT_SAMPLES: usize = 8;

/// Largest supported soliton count (2N ≤ 20).
pub const MAX_SOLITONS: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    /// Gate for the symmetric-space constraint and χ symmetry residuals.
    pub constraint_tol: f64,
    /// |det A| below this marks a point singular.
    pub singular_tol: f64,
    /// Largest accepted 1-norm condition number of A.
    pub condition_cap: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            constraint_tol: 1e-9,
            singular_tol: 1e-12,
            condition_cap: algebra::DEFAULT_CONDITION_CAP,
        }
    }
}

/// A prescribed pole ϖ_k with its constant vector v_k.
#[derive(Debug, Clone, PartialEq)]
pub struct Soliton {
    pub pole: Complex64,
    pub vector: CVector,
}

impl Soliton {
    pub fn new(pole: Complex64, vector: CVector) -> Self {
        Self { pole, vector }
    }

    pub fn from_slice(pole: Complex64, vector: &[Complex64]) -> Self {
        Self::new(pole, CVector::from_column_slice(vector))
    }
}

#[derive(Clone)]
pub struct SolitonConfig {
    signature: Signature,
    solitons: Vec<Soliton>,
    seed: Arc<dyn Seed>,
    pub tolerances: Tolerances,
    /// One step of iterative refinement after the LU solve.
    pub refine: bool,
}

impl fmt::Debug for SolitonConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SolitonConfig")
            .field("signature", &self.signature)
            .field("solitons", &self.solitons)
            .field("tolerances", &self.tolerances)
            .field("refine", &self.refine)
            .finish_non_exhaustive()
    }
}

/// Every invariant violated by a candidate soliton list, in order.
pub fn soliton_violations(signature: Signature, solitons: &[Soliton]) -> Vec<String> {
    let n = signature.dim();
    let mut out = Vec::new();
    if solitons.len() > MAX_SOLITONS {
        out.push(format!(
            "{} solitons requested, at most {MAX_SOLITONS} supported",
            solitons.len()
        ));
    }
    for (k, s) in solitons.iter().enumerate() {
        if !s.pole.is_finite() {
            out.push(format!("soliton {k}: pole {} is not finite", s.pole));
        } else if s.pole.im == 0.0 {
            out.push(format!("soliton {k}: real pole not supported (w = {})", s.pole));
        }
        if s.vector.len() != n {
            out.push(format!(
                "soliton {k}: vector has {} components, signature needs {n}",
                s.vector.len()
            ));
        }
        if s.vector.iter().any(|z| !z.is_finite()) {
            out.push(format!("soliton {k}: vector has non-finite entries"));
        } else if s.vector.iter().all(|z| z.norm() == 0.0) {
            out.push(format!("soliton {k}: zero vector"));
        }
        for (j, other) in solitons.iter().enumerate().take(k) {
            if other.pole == s.pole {
                out.push(format!("solitons {j} and {k}: poles coincide"));
            }
        }
    }
    out
}

impl SolitonConfig {
    pub fn new(seed: Arc<dyn Seed>, solitons: Vec<Soliton>) -> Result<Self> {
        let signature = seed.signature();
        let violations = soliton_violations(signature, &solitons);
        if !violations.is_empty() {
            return Err(VestureError::Config(violations.join("; ")));
        }
        Ok(Self {
            signature,
            solitons,
            seed,
            tolerances: Tolerances::default(),
            refine: false,
        })
    }

    pub fn with_tolerances(mut self, tolerances: Tolerances) -> Self {
        self.tolerances = tolerances;
        self
    }

    pub fn with_refinement(mut self, refine: bool) -> Self {
        self.refine = refine;
        self
    }

    pub fn signature(&self) -> Signature {
        self.signature
    }

    pub fn gamma(&self) -> CMatrix {
        self.signature.gamma()
    }

    pub fn solitons(&self) -> &[Soliton] {
        &self.solitons
    }

    pub fn seed(&self) -> &dyn Seed {
        self.seed.as_ref()
    }

    pub fn vectors(&self) -> Vec<CVector> {
        self.solitons.iter().map(|s| s.vector.clone()).collect()
    }
}

/// Per-point spectral cache. Index k < N holds (λ_in, v_k); index N + k
/// holds the deck partner (λ_out, Γv_k).
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralData {
    pub x: DomainPoint,
    pub lambdas: Vec<Complex64>,
    pub vs: Vec<CVector>,
    pub psi0: Vec<CMatrix>,
    pub psi0_inv: Vec<CMatrix>,
}

impl SpectralData {
    pub fn n_solitons(&self) -> usize {
        self.lambdas.len() / 2
    }

    pub fn n_poles(&self) -> usize {
        self.lambdas.len()
    }

    /// Exchange (λ_k, v_k) with (λ_{N+k}, Γv_k).
    pub fn swap_pair(&mut self, k: usize) {
        let partner = k + self.n_solitons();
        self.lambdas.swap(k, partner);
        self.vs.swap(k, partner);
        self.psi0.swap(k, partner);
        self.psi0_inv.swap(k, partner);
    }

    pub fn pole_pairs(&self) -> Vec<PolePair> {
        let n = self.n_solitons();
        (0..n)
            .map(|k| PolePair {
                lambda_in: self.lambdas[k],
                lambda_out: self.lambdas[n + k],
            })
            .collect()
    }
}

/// Spectral data with the default principal-root labelling.
pub fn spectral_data(cfg: &SolitonConfig, x: DomainPoint) -> Result<SpectralData> {
    let pairs = cfg
        .solitons
        .iter()
        .map(|s| pole_pair(s.pole, x))
        .collect::<Result<Vec<_>>>()?;
    spectral_data_from_pairs(cfg, x, &pairs)
}

/// Spectral data for externally labelled pole pairs (one per soliton).
pub fn spectral_data_from_pairs(
    cfg: &SolitonConfig,
    x: DomainPoint,
    pairs: &[PolePair],
) -> Result<SpectralData> {
    assert_eq!(pairs.len(), cfg.solitons.len(), "one pole pair per soliton");
    let gamma = cfg.gamma();
    let n = pairs.len();
    let mut lambdas = Vec::with_capacity(2 * n);
    let mut vs = Vec::with_capacity(2 * n);
    lambdas.extend(pairs.iter().map(|p| p.lambda_in));
    lambdas.extend(pairs.iter().map(|p| p.lambda_out));
    vs.extend(cfg.solitons.iter().map(|s| s.vector.clone()));
    vs.extend(cfg.solitons.iter().map(|s| &gamma * &s.vector));

    let mut psi0 = Vec::with_capacity(2 * n);
    let mut psi0_inv = Vec::with_capacity(2 * n);
    for &lambda in &lambdas {
        let (psi, inv) = psi0_at(cfg.seed(), lambda, x, cfg.tolerances.condition_cap)?;
        psi0.push(psi);
        psi0_inv.push(inv);
    }
    Ok(SpectralData {
        x,
        lambdas,
        vs,
        psi0,
        psi0_inv,
    })
}

/// S_kj = Ψ₀ₖ⁻¹ Γ (Ψ₀ⱼ*)⁻¹.
pub fn s_matrix(sd: &SpectralData, gamma: &CMatrix, k: usize, j: usize) -> CMatrix {
    &sd.psi0_inv[k] * gamma * sd.psi0_inv[j].adjoint()
}

/// Assemble A (2N × 2N) and B (n × 2N, columns b_k).
pub fn build_system(sd: &SpectralData, gamma: &CMatrix) -> Result<(CMatrix, CMatrix)> {
    let m = sd.n_poles();
    let n = gamma.nrows();
    let mut a = CMatrix::zeros(m, m);
    for k in 0..m {
        for j in 0..m {
            let gap = sd.lambdas[k] - sd.lambdas[j].conj();
            let scale = sd.lambdas[k].norm() + sd.lambdas[j].norm();
            if gap.norm() <= 1e-14 * scale {
                return Err(VestureError::Pole(format!(
                    "lambda_{k} coincides with conj(lambda_{j})"
                )));
            }
            let s = s_matrix(sd, gamma, k, j);
            a[(k, j)] = (sd.vs[k].adjoint() * s * &sd.vs[j])[(0, 0)] / gap;
        }
    }
    let mut b = CMatrix::zeros(n, m);
    for k in 0..m {
        let col = -(gamma * sd.psi0_inv[k].adjoint() * &sd.vs[k]);
        b.set_column(k, &col);
    }
    Ok((a, b))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveReport {
    pub det: Complex64,
    pub condition: f64,
    /// ‖AU* − B*‖ / ‖B‖
    pub relative_residual: f64,
}

/// Solve AU* = B* for U (n × 2N, columns u_k).
pub fn solve_system(
    a: &CMatrix,
    b: &CMatrix,
    tolerances: &Tolerances,
    refine: bool,
) -> Result<(CMatrix, SolveReport)> {
    let det = a.determinant();
    if !(det.norm() >= tolerances.singular_tol) {
        return Err(VestureError::Singular { det });
    }
    let (inv, condition) = invert_with_condition(a, tolerances.condition_cap)?;
    let rhs = b.adjoint();
    let mut u_star = &inv * &rhs;
    if refine {
        let correction = &inv * (&rhs - a * &u_star);
        u_star += correction;
    }
    let relative_residual = (a * &u_star - &rhs).norm() / b.norm().max(f64::MIN_POSITIVE);
    Ok((
        u_star.adjoint(),
        SolveReport {
            det,
            condition,
            relative_residual,
        },
    ))
}

/// q = q₀ − Σ_k (1/λ_k) u_k v_k* Ψ₀ₖ⁻¹ q₀.
pub fn reconstruct_q(u: &CMatrix, sd: &SpectralData, q0: &CMatrix) -> CMatrix {
    let mut correction = CMatrix::zeros(q0.nrows(), q0.ncols());
    for k in 0..sd.n_poles() {
        let residue = u.column(k) * sd.vs[k].adjoint() * &sd.psi0_inv[k];
        correction += residue / sd.lambdas[k];
    }
    q0 - correction * q0
}

/// Result of rescaling a matrix to unit determinant.
#[derive(Debug, Clone, PartialEq)]
pub struct Normalized {
    pub q: CMatrix,
    /// Set when det q was not real positive, so the principal complex root
    /// was used and Hermiticity may have been lost.
    pub warning: bool,
}

/// q ↦ (det q)^{−1/n} q.
pub fn normalize_det(q: &CMatrix) -> Result<Normalized> {
    let n = q.nrows() as f64;
    let det = q.determinant();
    if det.norm() == 0.0 || !det.is_finite() {
        return Err(VestureError::Singular { det });
    }
    let real_positive = det.re > 0.0 && det.im.abs() <= 1e-9 * det.norm();
    let (factor, warning) = if real_positive {
        (c(det.norm().powf(-1.0 / n), 0.0), false)
    } else {
        ((-det.ln() / n).exp(), true)
    };
    Ok(Normalized {
        q: q * factor,
        warning,
    })
}

/// χ(λ) = I + Σ_k u_k v_k* Ψ₀ₖ⁻¹ / (λ − λ_k).
pub fn chi_at(lambda: Complex64, u: &CMatrix, sd: &SpectralData) -> Result<CMatrix> {
    let n = u.nrows();
    let mut chi = algebra::identity(n);
    for k in 0..sd.n_poles() {
        let gap = lambda - sd.lambdas[k];
        if gap.norm() <= 1e-14 * (1.0 + sd.lambdas[k].norm()) {
            return Err(VestureError::Pole(format!(
                "chi evaluated at its pole lambda_{k} = {}",
                sd.lambdas[k]
            )));
        }
        chi += u.column(k) * sd.vs[k].adjoint() * &sd.psi0_inv[k] / gap;
    }
    Ok(chi)
}

/// Σ_{j≠k} |v_k*Γv_j| < ½|v_k*Γv_k| for every k, with j ranging over the N
/// prescribed vectors only.
pub fn dominance_check(vectors: &[CVector], gamma: &CMatrix) -> bool {
    vectors.iter().enumerate().all(|(k, vk)| {
        let diag = gamma_pairing(vk, gamma, vk).norm();
        let off: f64 = vectors
            .iter()
            .enumerate()
            .filter(|(j, _)| *j != k)
            .map(|(_, vj)| gamma_pairing(vk, gamma, vj).norm())
            .sum();
        off < 0.5 * diag
    })
}

/// Strict row diagonal dominance of a square matrix.
pub fn strictly_diagonally_dominant(a: &CMatrix) -> bool {
    (0..a.nrows()).all(|i| {
        let off: f64 = (0..a.ncols())
            .filter(|&j| j != i)
            .map(|j| a[(i, j)].norm())
            .sum();
        off < a[(i, i)].norm()
    })
}

/// Every intermediate of a successful dressing at one point.
#[derive(Debug, Clone)]
pub struct Dressing {
    pub spectral: SpectralData,
    pub a: CMatrix,
    pub b: CMatrix,
    pub u: CMatrix,
    pub solve: SolveReport,
    pub q0: CMatrix,
    /// χ(0) q₀ before determinant normalization.
    pub q_raw: CMatrix,
    pub q: CMatrix,
    pub normalization_warning: bool,
}

impl Dressing {
    pub fn chi(&self, lambda: Complex64) -> Result<CMatrix> {
        chi_at(lambda, &self.u, &self.spectral)
    }
}

/// Run the full pipeline on precomputed spectral data.
pub fn dress_spectral(cfg: &SolitonConfig, spectral: SpectralData) -> Result<Dressing> {
    let gamma = cfg.gamma();
    let q0 = cfg.seed().q0(spectral.x);
    let (a, b) = build_system(&spectral, &gamma)?;
    let (u, solve) = solve_system(&a, &b, &cfg.tolerances, cfg.refine)?;
    let q_raw = reconstruct_q(&u, &spectral, &q0);
    let Normalized { q, warning } = normalize_det(&q_raw)?;
    Ok(Dressing {
        spectral,
        a,
        b,
        u,
        solve,
        q0,
        q_raw,
        q,
        normalization_warning: warning,
    })
}

/// Run the full pipeline; every failure is an error.
pub fn dress(cfg: &SolitonConfig, x: DomainPoint) -> Result<Dressing> {
    dress_spectral(cfg, spectral_data(cfg, x)?)
}

/// Deterministic spectral samples for the χ audits, kept away from the poles
/// of χ(λ), χ(λ̄) and χ(T_x λ).
pub fn audit_lambdas(sd: &SpectralData, count: usize) -> Vec<Complex64> {
    const GOLDEN_ANGLE: f64 = 2.399_963_229_728_653;
    const RADII: [f64; 7] = [0.37, 0.61, 0.83, 1.19, 1.58, 2.3, 3.1];
    let rho = sd.x.rho;
    let near = |l: Complex64| {
        sd.lambdas
            .iter()
            .any(|p| (l - p).norm() < 0.05 * (rho + p.norm()))
    };
    let mut out = Vec::with_capacity(count);
    let mut i = 0usize;
    while out.len() < count && i < 64 * count.max(1) {
        let radius = rho * RADII[i % RADII.len()];
        let l = Complex64::from_polar(radius, 0.31 + GOLDEN_ANGLE * i as f64);
        i += 1;
        let partner = -rho * rho / l;
        if near(l) || near(l.conj()) || near(partner) || near(partner.conj()) {
            continue;
        }
        if (l * l + rho * rho).norm() < 1e-3 * rho * rho {
            continue;
        }
        out.push(l);
    }
    out
}

/// max over samples of ‖Γ(χ(λ̄)*)⁻¹Γ − χ(λ)‖ / max(1, ‖χ(λ)‖).
pub fn chi_reality_residual(d: &Dressing, gamma: &CMatrix, samples: &[Complex64]) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for &l in samples {
        let chi = d.chi(l)?;
        let mirrored = algebra::tau(&d.chi(l.conj())?, gamma)?;
        worst = worst.max((mirrored - &chi).norm() / chi.norm().max(1.0));
    }
    Ok(worst)
}

/// max over samples of ‖χ(λ) − q σ(χ(T_x λ)) σ(q₀)‖ / max(1, ‖χ(λ)‖), with
/// q = χ(0) q₀ before normalization.
pub fn chi_involution_residual(
    d: &Dressing,
    gamma: &CMatrix,
    samples: &[Complex64],
) -> Result<f64> {
    let sigma_q0 = algebra::sigma(&d.q0, gamma);
    let mut worst: f64 = 0.0;
    for &l in samples {
        let chi = d.chi(l)?;
        let partner = d.chi(deck(l, d.spectral.x)?)?;
        let rhs = &d.q_raw * algebra::sigma(&partner, gamma) * &sigma_q0;
        worst = worst.max((rhs - &chi).norm() / chi.norm().max(1.0));
    }
    Ok(worst)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PointStatus {
    Regular,
    /// det A below the singular tolerance, or a branch point / pole collision.
    Singular,
    /// det A acceptable but the condition cap was exceeded.
    IllConditioned,
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct PointResiduals {
    pub constraint: ConstraintResidual,
    pub chi_reality: f64,
    pub chi_involution: f64,
    pub normalization_warning: bool,
}

/// Outcome of the pipeline at one grid point.
#[derive(Debug, Clone, PartialEq)]
pub struct DressedPoint {
    pub x: DomainPoint,
    /// Absent unless the status is regular.
    pub q: Option<CMatrix>,
    pub det_a: Complex64,
    pub condition: f64,
    pub status: PointStatus,
    pub residuals: PointResiduals,
}

impl DressedPoint {
    pub fn singular(&self) -> bool {
        self.status != PointStatus::Regular
    }

    /// True for regular points whose constraint residuals are within `tol`.
    pub fn passes(&self, tol: f64) -> bool {
        self.status == PointStatus::Regular && self.residuals.constraint.within(tol)
    }

    fn flagged(x: DomainPoint, status: PointStatus, det_a: Complex64, condition: f64) -> Self {
        Self {
            x,
            q: None,
            det_a,
            condition,
            status,
            residuals: PointResiduals::default(),
        }
    }
}

/// Dress one point; numerical degeneracies are flagged, only configuration
/// errors propagate.
pub fn dress_point(cfg: &SolitonConfig, x: DomainPoint) -> Result<DressedPoint> {
    let spectral = match spectral_data(cfg, x) {
        Ok(sd) => sd,
        Err(VestureError::BranchPoint { .. }) => {
            return Ok(DressedPoint::flagged(
                x,
                PointStatus::Singular,
                c(f64::NAN, f64::NAN),
                f64::NAN,
            ))
        }
        Err(e) => return Err(e),
    };
    dress_point_spectral(cfg, spectral)
}

/// [`dress_point`] on precomputed (possibly relabelled) spectral data.
pub fn dress_point_spectral(cfg: &SolitonConfig, spectral: SpectralData) -> Result<DressedPoint> {
    let x = spectral.x;
    let gamma = cfg.gamma();
    let d = match dress_spectral(cfg, spectral) {
        Ok(d) => d,
        Err(VestureError::Singular { det }) => {
            return Ok(DressedPoint::flagged(x, PointStatus::Singular, det, f64::INFINITY))
        }
        Err(VestureError::Pole(_)) | Err(VestureError::BranchPoint { .. }) => {
            return Ok(DressedPoint::flagged(
                x,
                PointStatus::Singular,
                c(0.0, 0.0),
                f64::INFINITY,
            ))
        }
        Err(VestureError::NotInvertible { condition }) => {
            return Ok(DressedPoint::flagged(
                x,
                PointStatus::IllConditioned,
                c(f64::NAN, f64::NAN),
                condition,
            ))
        }
        Err(e) => return Err(e),
    };
    let samples = audit_lambdas(&d.spectral, CHI_AUDIT_SAMPLES);
    let chi_reality = chi_reality_residual(&d, &gamma, &samples).unwrap_or(f64::INFINITY);
    let chi_involution = chi_involution_residual(&d, &gamma, &samples).unwrap_or(f64::INFINITY);
    Ok(DressedPoint {
        x,
        det_a: d.solve.det,
        condition: d.solve.condition,
        status: PointStatus::Regular,
        residuals: PointResiduals {
            constraint: constraint_residual(&d.q, &gamma),
            chi_reality,
            chi_involution,
            normalization_warning: d.normalization_warning,
        },
        q: Some(d.q),
    })
}

/// Smallest sampled radius R₀ such that A is strictly diagonally dominant at
/// every sampled point with |x| ≥ R₀. `None` if dominance fails at the
/// largest radius.
pub fn dominance_radius(cfg: &SolitonConfig, radii: &[f64], angles: &[f64]) -> Result<Option<f64>> {
    let gamma = cfg.gamma();
    let mut sorted = radii.to_vec();
    sorted.sort_by(|a, b| a.total_cmp(b));
    let mut r0 = None;
    for &r in sorted.iter().rev() {
        let dominant = angles.iter().try_fold(true, |acc, &phi| -> Result<bool> {
            if !acc {
                return Ok(false);
            }
            let x = DomainPoint::new(r * phi.sin(), r * phi.cos())?;
            let sd = spectral_data(cfg, x)?;
            let (a, _) = build_system(&sd, &gamma)?;
            Ok(strictly_diagonally_dominant(&a))
        })?;
        if !dominant {
            break;
        }
        r0 = Some(r);
    }
    Ok(r0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seeds::ConstantSeed;

    fn minkowski(p: usize, q: usize) -> Arc<dyn Seed> {
        Arc::new(ConstantSeed::identity(Signature::new(p, q).unwrap()))
    }

    fn kerr_like(alpha: f64, delta: f64, s: f64) -> SolitonConfig {
        SolitonConfig::new(
            minkowski(1, 1),
            vec![Soliton::from_slice(c(0.0, s), &[c(alpha, 0.0), c(delta, 0.0)])],
        )
        .unwrap()
    }

    #[test]
    fn config_validation_collects_every_violation() {
        let err = SolitonConfig::new(
            minkowski(1, 1),
            vec![
                Soliton::from_slice(c(1.0, 0.0), &[c(0.0, 0.0), c(0.0, 0.0)]),
                Soliton::from_slice(c(0.0, 1.0), &[c(1.0, 0.0)]),
                Soliton::from_slice(c(0.0, 1.0), &[c(1.0, 0.0), c(0.0, 0.0)]),
            ],
        )
        .unwrap_err();
        let VestureError::Config(msg) = err else {
            panic!("expected config error")
        };
        assert!(msg.contains("real pole not supported"));
        assert!(msg.contains("zero vector"));
        assert!(msg.contains("2 components") || msg.contains("1 components"));
        assert!(msg.contains("poles coincide"));
    }

    #[test]
    fn spectral_data_for_single_pole() {
        let cfg = kerr_like(1.0, 0.5, 1.0);
        let x = DomainPoint::new(1.0, 1.0).unwrap();
        let sd = spectral_data(&cfg, x).unwrap();
        let pair = pole_pair(c(0.0, 1.0), x).unwrap();
        assert_eq!(sd.lambdas, vec![pair.lambda_in, pair.lambda_out]);
        assert_eq!(sd.vs[1], cfg.gamma() * &sd.vs[0]);
        assert!((sd.lambdas[0] * sd.lambdas[1] + 1.0).norm() < 1e-14);
        assert!(sd.psi0.iter().all(|p| *p == algebra::identity(2)));
    }

    #[test]
    fn linear_system_matches_closed_form_for_g11() {
        let (alpha, delta) = (c(0.8, 0.3), c(-0.2, 0.5));
        let cfg = SolitonConfig::new(
            minkowski(1, 1),
            vec![Soliton::from_slice(c(0.2, 0.9), &[alpha, delta])],
        )
        .unwrap();
        let sd = spectral_data(&cfg, DomainPoint::new(1.3, -0.4).unwrap()).unwrap();
        let g = cfg.gamma();
        for k in 0..2 {
            for j in 0..2 {
                assert!((s_matrix(&sd, &g, k, j) - &g).norm() == 0.0);
            }
        }
        let (a, b) = build_system(&sd, &g).unwrap();
        let (l1, l2) = (sd.lambdas[0], sd.lambdas[1]);
        let diff = alpha.norm_sqr() - delta.norm_sqr();
        let sum = alpha.norm_sqr() + delta.norm_sqr();
        let expected = CMatrix::from_row_slice(
            2,
            2,
            &[
                diff / (l1 - l1.conj()),
                sum / (l1 - l2.conj()),
                sum / (l2 - l1.conj()),
                diff / (l2 - l2.conj()),
            ],
        );
        assert!((a - expected).norm() < 1e-14);
        let expected_b_star =
            CMatrix::from_row_slice(2, 2, &[-alpha.conj(), delta.conj(), -alpha.conj(), -delta.conj()]);
        assert!((b.adjoint() - expected_b_star).norm() < 1e-15);
    }

    #[test]
    fn linear_system_matches_closed_form_for_g21() {
        let (alpha, beta, gam) = (c(0.8, 0.3), c(0.1, -0.4), c(-0.2, 0.5));
        let cfg = SolitonConfig::new(
            minkowski(2, 1),
            vec![Soliton::from_slice(c(-0.3, 1.4), &[alpha, beta, gam])],
        )
        .unwrap();
        let sd = spectral_data(&cfg, DomainPoint::new(0.6, 0.9).unwrap()).unwrap();
        let (a, b) = build_system(&sd, &cfg.gamma()).unwrap();
        let (l1, l2) = (sd.lambdas[0], sd.lambdas[1]);
        let plus = alpha.norm_sqr() + beta.norm_sqr();
        assert!((a[(0, 0)] - (plus - gam.norm_sqr()) / (l1 - l1.conj())).norm() < 1e-14);
        assert!((a[(0, 1)] - (plus + gam.norm_sqr()) / (l1 - l2.conj())).norm() < 1e-14);
        assert!((a[(1, 1)] - (plus - gam.norm_sqr()) / (l2 - l2.conj())).norm() < 1e-14);
        let b_star = b.adjoint();
        let rows = [
            [-alpha.conj(), -beta.conj(), gam.conj()],
            [-alpha.conj(), -beta.conj(), -gam.conj()],
        ];
        for (k, row) in rows.iter().enumerate() {
            for (j, v) in row.iter().enumerate() {
                assert!((b_star[(k, j)] - v).norm() < 1e-15);
            }
        }
    }

    #[test]
    fn kerr_solution_matches_closed_form_u() {
        let (m, s) = (1.0_f64, 1.0_f64);
        let big_b = (m * m + s * s).sqrt();
        let alpha = (0.5 * (s + big_b)).sqrt();
        let delta = (0.5 * (-s + big_b)).sqrt();
        let cfg = kerr_like(alpha, delta, s);
        let (r, theta) = (2.7_f64, 1.1_f64);
        let br = r - m;
        let x = DomainPoint::new((br * br + s * s).sqrt() * theta.sin(), br * theta.cos()).unwrap();
        let d = dress(&cfg, x).unwrap();

        let big_a = alpha * alpha - delta * delta;
        let big_b = alpha * alpha + delta * delta;
        let (ct, st) = (theta.cos(), theta.sin());
        let dd = big_b * big_b / (4.0 * (br * br + s * s)) - big_a * big_a / (4.0 * s * s * st * st);
        let i = c(0.0, 1.0);
        let f11 = i * big_a / (s * (ct + 1.0)) - big_b / c(br, -s);
        let f12 = -i * big_a / (s * (ct - 1.0)) + big_b / c(br, s);
        let f21 = -i * big_a / (s * (ct + 1.0)) - big_b / c(br, -s);
        let f22 = -i * big_a / (s * (ct - 1.0)) - big_b / c(br, s);
        let expected = CMatrix::from_row_slice(
            2,
            2,
            &[alpha * f11, alpha * f12, delta * f21, delta * f22],
        ) / c(2.0 * dd, 0.0);
        assert!((&d.u - expected).norm() < 1e-12 * d.u.norm());
    }

    #[test]
    fn flat_vector_yields_flat_space() {
        let cfg = kerr_like(1.0, 0.0, 1.0);
        for &(rho, z) in &[(0.5, 0.3), (2.0, -1.0), (4.0, 3.0)] {
            let d = dress(&cfg, DomainPoint::new(rho, z).unwrap()).unwrap();
            assert!((&d.q - algebra::identity(2)).norm() < 1e-13);
        }
    }

    #[test]
    fn zero_solitons_return_seed() {
        let seed = Arc::new(
            ConstantSeed::new(
                CMatrix::from_row_slice(2, 2, &[c(1.25, 0.0), c(0.75, 0.0), c(0.75, 0.0), c(1.25, 0.0)]),
                Signature::new(1, 1).unwrap(),
                1e-12,
            )
            .unwrap(),
        );
        let cfg = SolitonConfig::new(seed.clone(), vec![]).unwrap();
        let p = dress_point(&cfg, DomainPoint::new(1.0, 2.0).unwrap()).unwrap();
        assert_eq!(p.status, PointStatus::Regular);
        assert_eq!(p.q.as_ref().unwrap(), seed.matrix());
        assert_eq!(p.residuals.constraint.total(), 0.0);
        assert_eq!(p.det_a, c(1.0, 0.0));
    }

    #[test]
    fn normalize_det_examples() {
        let q = algebra::identity(2) * c(2.0, 0.0);
        let n = normalize_det(&q).unwrap();
        assert!((n.q - algebra::identity(2)).norm() < 1e-15);
        assert!(!n.warning);
        let unit = CMatrix::from_row_slice(2, 2, &[c(5.0, 0.0), c(2.0, 1.0), c(2.0, -1.0), c(1.2, 0.0)]);
        assert!((normalize_det(&unit).unwrap().q - &unit).norm() < 1e-14);
        let neg = CMatrix::from_row_slice(2, 2, &[c(-1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(4.0, 0.0)]);
        let out = normalize_det(&neg).unwrap();
        assert!(out.warning);
        assert!((out.q.determinant() - c(1.0, 0.0)).norm() < 1e-14);
        assert!(normalize_det(&CMatrix::zeros(2, 2)).is_err());
    }

    #[test]
    fn chi_reproduces_q_and_is_flat_at_infinity() {
        let cfg = kerr_like(1.1, 0.4, 0.8);
        let d = dress(&cfg, DomainPoint::new(1.2, 0.3).unwrap()).unwrap();
        assert!((d.chi(c(0.0, 0.0)).unwrap() * &d.q0 - &d.q_raw).norm() < 1e-12);
        assert!((d.chi(c(1e8, 0.0)).unwrap() - algebra::identity(2)).norm() < 1e-7);
        for k in 0..d.spectral.n_poles() {
            let m = d.u.column(k) * d.spectral.vs[k].adjoint();
            assert!(m.determinant().norm() < 1e-14 * (1.0 + m.norm_squared()));
        }
        assert!(d.chi(d.spectral.lambdas[0]).is_err());
    }

    #[test]
    fn dominance_check_examples() {
        let g = Signature::new(1, 1).unwrap().gamma();
        let v = |a: f64, b: f64| CVector::from_column_slice(&[c(a, 0.0), c(b, 0.0)]);
        assert!(dominance_check(&[v(1.0, 0.3)], &g));
        assert!(!dominance_check(&[v(1.0, 1.0)], &g));
        assert!(dominance_check(&[v(1.0, 0.0), v(0.0, 1.0)], &g));
        assert!(!dominance_check(&[v(1.0, 0.0), v(1.0, 0.1)], &g));
    }

    #[test]
    fn singular_system_is_flagged_with_det() {
        let a = CMatrix::from_row_slice(2, 2, &[c(1.0, 0.0), c(2.0, 0.0), c(2.0, 0.0), c(4.0, 0.0)]);
        let b = CMatrix::identity(2, 2);
        match solve_system(&a, &b, &Tolerances::default(), false) {
            Err(VestureError::Singular { det }) => assert!(det.norm() < 1e-12),
            other => panic!("expected singular, got {other:?}"),
        }
    }

    #[test]
    fn ring_singularity_is_flagged() {
        // det A changes sign on the equator z = 0 between the branch circle
        // ρ = s and infinity; bisect onto the root.
        let (alpha, delta) = (1.0_f64, 0.6_f64);
        let cfg = kerr_like(alpha, delta, 1.0);
        let g = cfg.gamma();
        let det_at = |rho: f64| {
            let sd = spectral_data(&cfg, DomainPoint::new(rho, 0.0).unwrap()).unwrap();
            build_system(&sd, &g).unwrap().0.determinant().re
        };
        let (mut lo, mut hi) = (1.0 + 1e-9, 10.0);
        assert!(det_at(lo).signum() != det_at(hi).signum());
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if det_at(mid).signum() == det_at(lo).signum() {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let p = dress_point(&cfg, DomainPoint::new(lo, 0.0).unwrap()).unwrap();
        assert!(p.singular());
        assert!(p.q.is_none());
        assert!(p.det_a.norm() < 1e-12);
    }
}
