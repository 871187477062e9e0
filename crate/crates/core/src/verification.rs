//! Finite-difference certification of dressed fields: Hodge-system
//! residuals, convergence order, constraint scans and the det A = 0 locus.
//!
//! Grids live in a chart (u, v): Weyl (ρ, z) or Boyer-Lindquist (r, θ). The
//! residuals are evaluated in chart coordinates and mapped back to (ρ, z)
//! through the analytic Jacobian, so both charts measure the same quantities
//!
//! ```text
//! res₁ = ‖∂_ρW_z − ∂_zW_ρ + [W_ρ, W_z]‖,   res₂ = ‖∂_ρ(ρW_ρ) + ∂_z(ρW_z)‖,
//! ```
//!
//! with W = −(dq)q⁻¹.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::algebra::{commutator, constraint_residual, invert, CMatrix, ConstraintResidual};
use crate::dressing::{dress_point, DressedPoint, SolitonConfig};
use crate::error::{Result, VestureError};
use crate::spectral::{omega_forms, pole_pair, pole_pair_tracked, DomainPoint};
use crate::targets::{bl_to_weyl, BLParams};

/// Default exclusion margin around singular grid points, in grid steps.
pub const SINGULAR_MARGIN: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Chart {
    /// u = ρ, v = z.
    Weyl,
    /// u = r, v = θ.
    BoyerLindquist(BLParams),
}

/// Inclusive uniform sampling of an interval.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Axis {
    pub min: f64,
    pub max: f64,
    pub count: usize,
}

impl Axis {
    pub fn new(min: f64, max: f64, count: usize) -> Result<Self> {
        if !(min.is_finite() && max.is_finite() && max > min) {
            return Err(VestureError::Config(format!(
                "axis range [{min}, {max}] is empty or not finite"
            )));
        }
        if count < 2 {
            return Err(VestureError::Config(format!(
                "axis needs at least 2 samples, got {count}"
            )));
        }
        Ok(Self { min, max, count })
    }

    pub fn step(&self) -> f64 {
        (self.max - self.min) / (self.count - 1) as f64
    }

    pub fn at(&self, i: usize) -> f64 {
        if i + 1 == self.count {
            self.max
        } else {
            self.min + self.step() * i as f64
        }
    }

    /// Halved step on the same interval.
    pub fn refined(&self) -> Self {
        Self {
            count: 2 * self.count - 1,
            ..*self
        }
    }
}

/// A rectangular lattice in a chart, indexed row-major by (i, j) with i
/// along u.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub chart: Chart,
    pub u: Axis,
    pub v: Axis,
}

impl GridSpec {
    pub fn weyl(rho: Axis, z: Axis) -> Result<Self> {
        if !(rho.min > 0.0) {
            return Err(VestureError::Config(format!(
                "Weyl grids need rho_min > 0, got {}",
                rho.min
            )));
        }
        Ok(Self {
            chart: Chart::Weyl,
            u: rho,
            v: z,
        })
    }

    pub fn boyer_lindquist(p: BLParams, r: Axis, theta: Axis) -> Result<Self> {
        if !(theta.min > 0.0 && theta.max < std::f64::consts::PI) {
            return Err(VestureError::Config(format!(
                "theta range [{}, {}] must lie strictly inside (0, pi)",
                theta.min, theta.max
            )));
        }
        Ok(Self {
            chart: Chart::BoyerLindquist(p),
            u: r,
            v: theta,
        })
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.u.count, self.v.count)
    }

    pub fn len(&self) -> usize {
        self.u.count * self.v.count
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn index(&self, i: usize, j: usize) -> usize {
        i * self.v.count + j
    }

    pub fn coords(&self, i: usize, j: usize) -> (f64, f64) {
        (self.u.at(i), self.v.at(j))
    }

    pub fn point(&self, i: usize, j: usize) -> Result<DomainPoint> {
        let (u, v) = self.coords(i, j);
        match self.chart {
            Chart::Weyl => DomainPoint::new(u, v),
            Chart::BoyerLindquist(p) => bl_to_weyl(u, v, &p),
        }
    }

    pub fn points(&self) -> Result<Vec<DomainPoint>> {
        let (nu, nv) = self.shape();
        (0..nu)
            .flat_map(|i| (0..nv).map(move |j| (i, j)))
            .map(|(i, j)| self.point(i, j))
            .collect()
    }

    pub fn refined(&self) -> Self {
        Self {
            u: self.u.refined(),
            v: self.v.refined(),
            ..*self
        }
    }

    /// ∂(ρ, z)/∂(u, v) as [[ρ_u, ρ_v], [z_u, z_v]].
    pub fn jacobian(&self, i: usize, j: usize) -> [[f64; 2]; 2] {
        match self.chart {
            Chart::Weyl => [[1.0, 0.0], [0.0, 1.0]],
            Chart::BoyerLindquist(p) => {
                let (r, theta) = self.coords(i, j);
                let big_r = r - p.m;
                let hyp = (big_r * big_r + p.s * p.s).sqrt();
                let (st, ct) = theta.sin_cos();
                [[big_r * st / hyp, hyp * ct], [ct, -big_r * st]]
            }
        }
    }
}

/// Dressed matrices on a grid; `None` marks a hole.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldGrid {
    pub spec: GridSpec,
    pub values: Vec<Option<CMatrix>>,
}

impl FieldGrid {
    pub fn new(spec: GridSpec, values: Vec<Option<CMatrix>>) -> Result<Self> {
        if values.len() != spec.len() {
            return Err(VestureError::Config(format!(
                "{} values for a grid of {} points",
                values.len(),
                spec.len()
            )));
        }
        Ok(Self { spec, values })
    }

    pub fn from_fn<F>(spec: GridSpec, f: F) -> Result<Self>
    where
        F: Fn(DomainPoint) -> Option<CMatrix> + Sync,
    {
        let points = spec.points()?;
        let values = points.par_iter().map(|&x| f(x)).collect();
        Self::new(spec, values)
    }

    pub fn get(&self, i: usize, j: usize) -> Option<&CMatrix> {
        self.values[self.spec.index(i, j)].as_ref()
    }
}

/// Row-major sweep of [`dress_point`] over a grid.
pub fn dress_grid(cfg: &SolitonConfig, spec: &GridSpec) -> Result<Vec<DressedPoint>> {
    let points = spec.points()?;
    points.par_iter().map(|&x| dress_point(cfg, x)).collect()
}

/// Field of dressed q with singular points as holes.
pub fn field_from_points(spec: GridSpec, points: &[DressedPoint]) -> Result<FieldGrid> {
    FieldGrid::new(spec, points.iter().map(|p| p.q.clone()).collect())
}

/// Second-order derivative of a sampled sequence at index k; one-sided at
/// the ends. `None` if any stencil value is missing.
fn derivative<F>(n: usize, k: usize, h: f64, f: F) -> Option<CMatrix>
where
    F: Fn(usize) -> Option<CMatrix>,
{
    let scale = Complex64::new(0.5 / h, 0.0);
    if k == 0 {
        let (a, b, c) = (f(0)?, f(1)?, f(2)?);
        // 4(b − a) − (c − a): differences first, so constant data gives 0.
        Some(((&b - &a) * Complex64::new(4.0, 0.0) - (c - a)) * scale)
    } else if k + 1 == n {
        let (a, b, c) = (f(n - 3)?, f(n - 2)?, f(n - 1)?);
        Some(((&c - &b) * Complex64::new(3.0, 0.0) - (b - a)) * scale)
    } else {
        Some((f(k + 1)? - f(k - 1)?) * scale)
    }
}

/// Per-point Hodge residuals with a mask marking points that enter
/// statistics (interior, and clear of singular points by the margin).
#[derive(Debug, Clone, PartialEq)]
pub struct HodgeField {
    pub spec: GridSpec,
    pub curvature: Vec<Option<f64>>,
    pub divergence: Vec<Option<f64>>,
    pub counted: Vec<bool>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HodgeComponent {
    /// dW + W∧W
    Curvature,
    /// d(ρ ⋆W)
    Divergence,
}

impl HodgeField {
    pub fn component(&self, which: HodgeComponent) -> &[Option<f64>] {
        match which {
            HodgeComponent::Curvature => &self.curvature,
            HodgeComponent::Divergence => &self.divergence,
        }
    }

    /// Maximum over counted points with data.
    pub fn max(&self, which: HodgeComponent) -> f64 {
        self.counted_values(which).fold(0.0, f64::max)
    }

    pub fn counted_values(&self, which: HodgeComponent) -> impl Iterator<Item = f64> + '_ {
        self.component(which)
            .iter()
            .zip(&self.counted)
            .filter_map(|(v, &c)| if c { *v } else { None })
    }
}

/// Mask of grid points at least `margin` steps (Chebyshev distance) away
/// from every hole.
pub fn hole_margin_mask(field: &FieldGrid, margin: usize) -> Vec<bool> {
    let (nu, nv) = field.spec.shape();
    let mut mask = vec![true; field.spec.len()];
    for i in 0..nu {
        for j in 0..nv {
            if field.get(i, j).is_some() {
                continue;
            }
            for a in i.saturating_sub(margin)..=(i + margin).min(nu - 1) {
                for b in j.saturating_sub(margin)..=(j + margin).min(nv - 1) {
                    mask[field.spec.index(a, b)] = false;
                }
            }
        }
    }
    mask
}

/// Hodge-system residuals. Boundary points get one-sided stencils but are
/// left out of `counted`, as are points within `margin` steps of a hole.
pub fn hodge_residual(field: &FieldGrid, margin: usize) -> Result<HodgeField> {
    let spec = field.spec;
    let (nu, nv) = spec.shape();
    if nu < 3 || nv < 3 {
        return Err(VestureError::Config(format!(
            "hodge residuals need at least 3 points per axis, got {nu}x{nv}"
        )));
    }
    let (hu, hv) = (spec.u.step(), spec.v.step());
    let n = spec.len();
    let at = |i: usize, j: usize| field.get(i, j).cloned();

    // Chart components W_u, W_v of W = −(dq)q⁻¹.
    let w: Vec<Option<(CMatrix, CMatrix)>> = (0..n)
        .into_par_iter()
        .map(|idx| {
            let (i, j) = (idx / nv, idx % nv);
            let q = field.get(i, j)?;
            let q_inv = invert(q).ok()?;
            let du = derivative(nu, i, hu, |a| at(a, j))?;
            let dv = derivative(nv, j, hv, |b| at(i, b))?;
            Some((-(du * &q_inv), -(dv * &q_inv)))
        })
        .collect();

    // Contravariant flux densities det J · J⁻¹ (ρW_ρ, ρW_z).
    let flux: Vec<Option<(CMatrix, CMatrix)>> = (0..n)
        .into_par_iter()
        .map(|idx| {
            let (i, j) = (idx / nv, idx % nv);
            let (wu, wv) = w[idx].as_ref()?;
            let [[ru, rv], [zu, zv]] = spec.jacobian(i, j);
            let det = ru * zv - rv * zu;
            let rho = spec.point(i, j).ok()?.rho;
            let k = |v: f64| Complex64::new(v, 0.0);
            // (W_ρ, W_z) = J⁻ᵀ (W_u, W_v)
            let w_rho = (wu * k(zv) - wv * k(zu)) / k(det);
            let w_z = (wv * k(ru) - wu * k(rv)) / k(det);
            // det J · J⁻¹ = [[z_v, −ρ_v], [−z_u, ρ_u]]
            let fu = (&w_rho * k(zv) - &w_z * k(rv)) * k(rho);
            let fv = (&w_z * k(ru) - &w_rho * k(zu)) * k(rho);
            Some((fu, fv))
        })
        .collect();

    let wu = |i: usize, j: usize| w[spec.index(i, j)].as_ref().map(|p| p.0.clone());
    let wv = |i: usize, j: usize| w[spec.index(i, j)].as_ref().map(|p| p.1.clone());
    let fu = |i: usize, j: usize| flux[spec.index(i, j)].as_ref().map(|p| p.0.clone());
    let fv = |i: usize, j: usize| flux[spec.index(i, j)].as_ref().map(|p| p.1.clone());

    let residuals: Vec<(Option<f64>, Option<f64>)> = (0..n)
        .into_par_iter()
        .map(|idx| {
            let (i, j) = (idx / nv, idx % nv);
            let [[ru, rv], [zu, zv]] = spec.jacobian(i, j);
            let det = ru * zv - rv * zu;
            let curvature = (|| {
                let (a, b) = w[idx].as_ref()?;
                let dv_wu = derivative(nv, j, hv, |c| wu(i, c))?;
                let du_wv = derivative(nu, i, hu, |c| wv(c, j))?;
                Some((du_wv - dv_wu + commutator(a, b)).norm() / det.abs())
            })();
            let divergence = (|| {
                let du = derivative(nu, i, hu, |c| fu(c, j))?;
                let dv = derivative(nv, j, hv, |c| fv(i, c))?;
                Some((du + dv).norm() / det.abs())
            })();
            (curvature, divergence)
        })
        .collect();

    let clear = hole_margin_mask(field, margin);
    let counted = (0..n)
        .map(|idx| {
            let (i, j) = (idx / nv, idx % nv);
            i > 0 && j > 0 && i + 1 < nu && j + 1 < nv && clear[idx]
        })
        .collect();
    let (curvature, divergence) = residuals.into_iter().unzip();
    Ok(HodgeField {
        spec,
        curvature,
        divergence,
        counted,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Order {
    /// Both residual fields vanish identically on the compared points.
    Exact,
    Estimated(f64),
    /// No comparable points.
    Undetermined,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConvergenceReport {
    /// Median of residual(h)/residual(h/2) over shared counted points.
    pub median_ratio: f64,
    pub order: Order,
    pub samples: usize,
}

fn median(values: &mut [f64]) -> f64 {
    values.sort_by(f64::total_cmp);
    let n = values.len();
    if n % 2 == 1 {
        values[n / 2]
    } else {
        0.5 * (values[n / 2 - 1] + values[n / 2])
    }
}

/// Compare residuals at the points shared by a grid and its refinement.
pub fn convergence_order(
    coarse: &HodgeField,
    fine: &HodgeField,
    which: HodgeComponent,
) -> Result<ConvergenceReport> {
    if fine.spec != coarse.spec.refined() {
        return Err(VestureError::Config(
            "convergence_order needs a grid and its h/2 refinement".into(),
        ));
    }
    let (nu, nv) = coarse.spec.shape();
    let (rc, rf) = (coarse.component(which), fine.component(which));
    let mut ratios = Vec::new();
    let mut zeros = 0usize;
    for i in 0..nu {
        for j in 0..nv {
            let ci = coarse.spec.index(i, j);
            let fi = fine.spec.index(2 * i, 2 * j);
            if !(coarse.counted[ci] && fine.counted[fi]) {
                continue;
            }
            match (rc[ci], rf[fi]) {
                (Some(a), Some(b)) if a == 0.0 && b == 0.0 => zeros += 1,
                (Some(a), Some(b)) if b > 0.0 => ratios.push(a / b),
                _ => {}
            }
        }
    }
    if ratios.is_empty() {
        let order = if zeros > 0 {
            Order::Exact
        } else {
            Order::Undetermined
        };
        return Ok(ConvergenceReport {
            median_ratio: f64::NAN,
            order,
            samples: zeros,
        });
    }
    let samples = ratios.len();
    let median_ratio = median(&mut ratios);
    Ok(ConvergenceReport {
        median_ratio,
        order: Order::Estimated(median_ratio.log2()),
        samples,
    })
}

/// Componentwise maxima of the symmetric-space residuals over non-hole points.
pub fn constraint_scan(field: &FieldGrid, gamma: &CMatrix) -> ConstraintResidual {
    field
        .values
        .par_iter()
        .filter_map(|q| q.as_ref().map(|q| constraint_residual(q, gamma)))
        .reduce(ConstraintResidual::default, ConstraintResidual::max)
}

/// Grid points with |det A| below tolerance, and grid cells whose corners
/// disagree in the sign of Re det A. det A is real for the shipped seeds
/// (A is anti-Hermitian with even order).
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SingularLocus {
    pub points: Vec<(usize, usize)>,
    /// Lower-left corners (i, j) of cells [i, i+1] × [j, j+1].
    pub sign_change_cells: Vec<(usize, usize)>,
}

impl SingularLocus {
    pub fn is_empty(&self) -> bool {
        self.points.is_empty() && self.sign_change_cells.is_empty()
    }
}

pub fn singular_locus(spec: &GridSpec, det_a: &[Complex64], tol: f64) -> Result<SingularLocus> {
    if det_a.len() != spec.len() {
        return Err(VestureError::Config(format!(
            "{} determinants for a grid of {} points",
            det_a.len(),
            spec.len()
        )));
    }
    let (nu, nv) = spec.shape();
    let mut locus = SingularLocus::default();
    for i in 0..nu {
        for j in 0..nv {
            let d = det_a[spec.index(i, j)];
            if !(d.norm() >= tol) {
                locus.points.push((i, j));
            }
        }
    }
    let sign = |i: usize, j: usize| {
        let d = det_a[spec.index(i, j)].re;
        if d.is_finite() {
            d.signum()
        } else {
            0.0
        }
    };
    for i in 0..nu.saturating_sub(1) {
        for j in 0..nv.saturating_sub(1) {
            let corners = [sign(i, j), sign(i + 1, j), sign(i, j + 1), sign(i + 1, j + 1)];
            if corners.contains(&1.0) && corners.contains(&-1.0) {
                locus.sign_change_cells.push((i, j));
            }
        }
    }
    Ok(locus)
}

/// Which root of the pole pair to follow.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Root {
    In,
    Out,
}

/// ‖(∂_ρλ + ω_ρ(λ), ∂_zλ + ω_z(λ))‖ with central differences of step h,
/// following the chosen root continuously from x.
pub fn lambda_flow_residual(varpi0: Complex64, x: DomainPoint, h: f64, root: Root) -> Result<f64> {
    let centre = pole_pair(varpi0, x)?;
    let lambda = match root {
        Root::In => centre.lambda_in,
        Root::Out => centre.lambda_out,
    };
    let follow = |d_rho: f64, d_z: f64| -> Result<Complex64> {
        Ok(pole_pair_tracked(varpi0, x.offset(d_rho, d_z), lambda)?.lambda_in)
    };
    let d_rho = (follow(h, 0.0)? - follow(-h, 0.0)?) / (2.0 * h);
    let d_z = (follow(0.0, h)? - follow(0.0, -h)?) / (2.0 * h);
    let (w_rho, w_z) = omega_forms(lambda, x)?;
    Ok(((d_rho + w_rho).norm_sqr() + (d_z + w_z).norm_sqr()).sqrt())
}

/// Radius standing in for |x| → ∞ when estimating the limit of det A.
pub const FAR_FIELD_RADIUS: f64 = 1e8;

/// Behaviour of a configuration on circles |x| = R.
#[derive(Debug, Clone, PartialEq)]
pub struct AsymptoticReport {
    pub radii: Vec<f64>,
    /// sup over sampled angles of ‖q − q₀‖ for each radius.
    pub sup_deviation: Vec<f64>,
    /// sup_deviation[k] / sup_deviation[k + 1].
    pub decay_ratios: Vec<f64>,
    /// min over samples of |det A(R, φ)| / |det A(far field, φ)|.
    pub min_det_fraction: f64,
    /// Strict diagonal dominance of A at every sample.
    pub dominant: bool,
}

/// Sample det A and ‖q − q₀‖ at x = R(sin φ, cos φ).
pub fn asymptotic_flatness(
    cfg: &SolitonConfig,
    radii: &[f64],
    angles: &[f64],
) -> Result<AsymptoticReport> {
    use crate::dressing::{dress, strictly_diagonally_dominant};
    let on_circle = |r: f64, phi: f64| DomainPoint::new(r * phi.sin(), r * phi.cos());
    let mut sup_deviation = Vec::with_capacity(radii.len());
    let mut min_det_fraction = f64::INFINITY;
    let mut dominant = true;
    for &r in radii {
        let mut sup: f64 = 0.0;
        for &phi in angles {
            let d = dress(cfg, on_circle(r, phi)?)?;
            let far = dress(cfg, on_circle(FAR_FIELD_RADIUS, phi)?)?;
            sup = sup.max((&d.q - &d.q0).norm());
            min_det_fraction = min_det_fraction.min(d.solve.det.norm() / far.solve.det.norm());
            dominant &= strictly_diagonally_dominant(&d.a);
        }
        sup_deviation.push(sup);
    }
    let decay_ratios = sup_deviation.windows(2).map(|w| w[0] / w[1]).collect();
    Ok(AsymptoticReport {
        radii: radii.to_vec(),
        sup_deviation,
        decay_ratios,
        min_det_fraction,
        dominant,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{c, identity, Signature};
    use crate::targets::kerr_config;

    fn kerr_grid(p: BLParams, n: usize) -> GridSpec {
        GridSpec::boyer_lindquist(
            p,
            Axis::new(4.0, 8.0, n).unwrap(),
            Axis::new(std::f64::consts::FRAC_PI_3, 2.0 * std::f64::consts::FRAC_PI_3, n).unwrap(),
        )
        .unwrap()
    }

    fn kerr_field(spec: GridSpec) -> FieldGrid {
        let Chart::BoyerLindquist(p) = spec.chart else {
            unreachable!()
        };
        let cfg = kerr_config(&p).unwrap();
        field_from_points(spec, &dress_grid(&cfg, &spec).unwrap()).unwrap()
    }

    #[test]
    fn axis_sampling() {
        let a = Axis::new(1.0, 2.0, 5).unwrap();
        assert_eq!(a.at(0), 1.0);
        assert_eq!(a.at(4), 2.0);
        assert_eq!(a.refined().count, 9);
        assert_eq!(a.refined().at(2), a.at(1));
        assert!(Axis::new(1.0, 1.0, 5).is_err());
        assert!(Axis::new(0.0, 1.0, 1).is_err());
    }

    #[test]
    fn weyl_grid_needs_positive_rho() {
        assert!(GridSpec::weyl(Axis::new(0.0, 1.0, 3).unwrap(), Axis::new(0.0, 1.0, 3).unwrap())
            .is_err());
    }

    #[test]
    fn bl_jacobian_matches_differences() {
        let p = BLParams::kerr(1.0, 0.6).unwrap();
        let spec = kerr_grid(p, 11);
        let (i, j) = (4, 6);
        let [[ru, rv], [zu, zv]] = spec.jacobian(i, j);
        let (r, t) = spec.coords(i, j);
        let h = 1e-6;
        let f = |r: f64, t: f64| bl_to_weyl(r, t, &p).unwrap();
        let (a, b) = (f(r + h, t), f(r - h, t));
        assert!(((a.rho - b.rho) / (2.0 * h) - ru).abs() < 1e-8);
        assert!(((a.z - b.z) / (2.0 * h) - zu).abs() < 1e-8);
        let (a, b) = (f(r, t + h), f(r, t - h));
        assert!(((a.rho - b.rho) / (2.0 * h) - rv).abs() < 1e-8);
        assert!(((a.z - b.z) / (2.0 * h) - zv).abs() < 1e-8);
    }

    #[test]
    fn constant_field_has_zero_residuals() {
        let spec = GridSpec::weyl(Axis::new(0.5, 3.0, 7).unwrap(), Axis::new(-1.0, 1.0, 6).unwrap())
            .unwrap();
        let field = FieldGrid::from_fn(spec, |_| Some(identity(3))).unwrap();
        let h = hodge_residual(&field, SINGULAR_MARGIN).unwrap();
        assert!(h.curvature.iter().chain(&h.divergence).all(|v| *v == Some(0.0)));
        let fine = FieldGrid::from_fn(spec.refined(), |_| Some(identity(3))).unwrap();
        let hf = hodge_residual(&fine, SINGULAR_MARGIN).unwrap();
        let report = convergence_order(&h, &hf, HodgeComponent::Divergence).unwrap();
        assert_eq!(report.order, Order::Exact);
        let gamma = Signature::new(2, 1).unwrap().gamma();
        assert_eq!(constraint_scan(&field, &gamma).total(), 0.0);

        let (ch, sh) = (c(0.4f64.cosh(), 0.0), c(0.4f64.sinh(), 0.0));
        let boost = CMatrix::from_row_slice(2, 2, &[ch, sh, sh, ch]);
        let bl = kerr_grid(BLParams::kerr(1.0, 1.0).unwrap(), 7);
        for spec in [spec, bl] {
            let field = FieldGrid::from_fn(spec, |_| Some(boost.clone())).unwrap();
            let h = hodge_residual(&field, SINGULAR_MARGIN).unwrap();
            assert!(h.curvature.iter().chain(&h.divergence).all(|v| *v == Some(0.0)));
        }
    }

    #[test]
    fn small_grid_is_rejected() {
        let spec = GridSpec::weyl(Axis::new(0.5, 3.0, 2).unwrap(), Axis::new(-1.0, 1.0, 6).unwrap())
            .unwrap();
        let field = FieldGrid::from_fn(spec, |_| Some(identity(2))).unwrap();
        assert!(hodge_residual(&field, 0).is_err());
    }

    #[test]
    fn holes_propagate_as_missing_data() {
        let spec = GridSpec::weyl(Axis::new(0.5, 3.0, 9).unwrap(), Axis::new(-1.0, 1.0, 9).unwrap())
            .unwrap();
        let mut field = FieldGrid::from_fn(spec, |_| Some(identity(2))).unwrap();
        field.values[spec.index(4, 4)] = None;
        let h = hodge_residual(&field, 1).unwrap();
        assert_eq!(h.curvature[spec.index(4, 5)], None);
        assert_eq!(h.divergence[spec.index(4, 6)], None);
        assert!(!h.counted[spec.index(5, 5)]);
        assert!(h.counted[spec.index(2, 2)]);
    }

    #[test]
    fn kerr_residuals_converge_at_second_order() {
        let p = BLParams::kerr(1.0, 1.0).unwrap();
        let spec = kerr_grid(p, 11);
        let coarse = hodge_residual(&kerr_field(spec), SINGULAR_MARGIN).unwrap();
        let fine = hodge_residual(&kerr_field(spec.refined()), SINGULAR_MARGIN).unwrap();
        for which in [HodgeComponent::Curvature, HodgeComponent::Divergence] {
            let report = convergence_order(&coarse, &fine, which).unwrap();
            assert!(
                (3.5..=4.5).contains(&report.median_ratio),
                "{which:?}: {report:?}"
            );
        }
    }

    #[test]
    fn perturbed_field_does_not_converge() {
        let p = BLParams::kerr(1.0, 1.0).unwrap();
        let spec = kerr_grid(p, 21);
        let bump = CMatrix::from_row_slice(2, 2, &[c(0.3, 0.0), c(0.2, 0.5), c(0.2, -0.5), c(-0.7, 0.0)]);
        let perturb = |field: FieldGrid| {
            let s = field.spec;
            let values = s
                .points()
                .unwrap()
                .into_iter()
                .zip(field.values)
                .map(|(x, q)| q.map(|q| q + &bump * c(1e-3 * x.rho.sin() * x.z.cos(), 0.0)))
                .collect();
            FieldGrid::new(s, values).unwrap()
        };
        let coarse_field = perturb(kerr_field(spec));
        let gamma = Signature::new(1, 1).unwrap().gamma();
        assert!(constraint_scan(&coarse_field, &gamma).total() > 1e-4);
        let coarse = hodge_residual(&coarse_field, SINGULAR_MARGIN).unwrap();
        let fine = hodge_residual(&perturb(kerr_field(spec.refined())), SINGULAR_MARGIN).unwrap();
        let report = convergence_order(&coarse, &fine, HodgeComponent::Divergence).unwrap();
        let Order::Estimated(order) = report.order else {
            panic!("{report:?}")
        };
        assert!(order.abs() < 0.5, "{report:?}");
        assert!(fine.max(HodgeComponent::Divergence) > 1e-4);
    }

    #[test]
    fn locus_examples() {
        let spec = GridSpec::weyl(Axis::new(0.5, 3.0, 4).unwrap(), Axis::new(-1.0, 1.0, 4).unwrap())
            .unwrap();
        let ones = vec![c(1.0, 0.0); spec.len()];
        assert!(singular_locus(&spec, &ones, 1e-12).unwrap().is_empty());
        let mut mixed = ones.clone();
        mixed[spec.index(3, 3)] = c(-1.0, 0.0);
        mixed[spec.index(0, 0)] = c(0.0, 0.0);
        let locus = singular_locus(&spec, &mixed, 1e-12).unwrap();
        assert_eq!(locus.points, vec![(0, 0)]);
        assert_eq!(locus.sign_change_cells, vec![(2, 2)]);
    }

    #[test]
    fn flow_residual_examples() {
        let x = DomainPoint::new(1.0, 1.0).unwrap();
        let w = c(0.0, 1.0);
        let r = lambda_flow_residual(w, x, 1e-3, Root::In).unwrap();
        assert!(r <= 1e-5, "{r}");
        let ratio = lambda_flow_residual(w, x, 1e-2, Root::In).unwrap()
            / lambda_flow_residual(w, x, 5e-3, Root::In).unwrap();
        assert!((3.5..=4.5).contains(&ratio), "{ratio}");
        assert!(lambda_flow_residual(w, x, 1e-3, Root::Out).unwrap() <= 1e-5);
    }
}
