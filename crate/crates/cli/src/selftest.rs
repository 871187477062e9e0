//! Invariant suites behind `vesture selftest`.
//!
//! Every suite is deterministic: random samples come from a fixed-seed
//! ChaCha stream.

use std::f64::consts::PI;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use vesture::algebra::{constraint_residual, identity, invert, sigma, tau, CMatrix};
use vesture::dressing::{
    audit_lambdas, chi_involution_residual, chi_reality_residual, dominance_check, dress,
    dress_spectral, spectral_data, Dressing, CHI_AUDIT_SAMPLES,
};
use vesture::spectral::{ab_jet, omega_forms, pole_pair};
use vesture::targets::kerr_newman::{kn_config, p_tilde, KnIdentification};
use vesture::targets::su21::cartan_potentials;
use vesture::targets::{
    cartan_embed_su21, commutation_check, kerr_config, BLParams, StructureTable,
};
use vesture::verification::{
    asymptotic_flatness, convergence_order, dress_grid, field_from_points, hodge_residual,
    lambda_flow_residual, Axis, FieldGrid, GridSpec, HodgeComponent, Order, Root,
    SINGULAR_MARGIN,
};
use vesture::{
    c, CVector, Complex64, ConstantSeed, DomainPoint, Signature, Soliton, SolitonConfig,
};

use crate::run::{kerr_newman_preset, kerr_preset, PresetGrid};

/// Faults that can be injected to check that the suites catch them.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct SelftestOptions {
    /// Evaluate b(λ) with the wrong sign in the spectral identity suite.
    pub b_sign_bug: bool,
    /// Replace [X¹, X²] = X³ by 2X³ in the structure table.
    pub perturb_table: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SuiteResult {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

impl SuiteResult {
    fn new(name: &'static str, passed: bool, detail: String) -> Self {
        Self { name, passed, detail }
    }
}

pub fn render(results: &[SuiteResult]) -> String {
    let width = results.iter().map(|r| r.name.len()).max().unwrap_or(0);
    let mut s = String::new();
    for r in results {
        let tag = if r.passed { "PASS" } else { "FAIL" };
        s += &format!("{:width$}  {tag}  {}\n", r.name, r.detail);
    }
    let failed = results.iter().filter(|r| !r.passed).count();
    s += &format!("{} suites, {failed} failed\n", results.len());
    s
}

pub fn all_pass(results: &[SuiteResult]) -> bool {
    results.iter().all(|r| r.passed)
}

const SEED: u64 = 0x5eed_0f_d2e5;

fn rng(stream: u64) -> ChaCha8Rng {
    let mut r = ChaCha8Rng::seed_from_u64(SEED);
    r.set_stream(stream);
    r
}

fn random_matrix(rng: &mut ChaCha8Rng, n: usize, scale: f64) -> CMatrix {
    CMatrix::from_fn(n, n, |_, _| c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)) * scale)
}

pub fn algebra_involutions() -> SuiteResult {
    let mut rng = rng(1);
    let mut worst: f64 = 0.0;
    for sig in [(1, 1), (2, 1), (1, 2)] {
        let g = Signature::new(sig.0, sig.1).expect("valid signature").gamma();
        let n = g.nrows();
        for _ in 0..20 {
            let m = identity(n) + random_matrix(&mut rng, n, 0.4);
            let (Ok(t), Ok(m_inv)) = (tau(&m, &g), invert(&m)) else {
                continue;
            };
            let scale = m.norm() * m_inv.norm();
            let tt = tau(&t, &g).expect("tau of an invertible matrix");
            worst = worst.max((&tt - &m).norm() / scale);
            worst = worst.max((sigma(&sigma(&m, &g), &g) - &m).norm() / m.norm());
            let ts = tau(&sigma(&m, &g), &g).expect("invertible");
            worst = worst.max((ts - sigma(&t, &g)).norm() / scale);
        }
    }
    SuiteResult::new(
        "algebra involutions",
        worst <= 1e-12,
        format!("tau^2, sigma^2, [tau, sigma] residual {worst:.2e}"),
    )
}

pub fn random_point(rng: &mut ChaCha8Rng) -> DomainPoint {
    DomainPoint::new(rng.gen_range(0.1..5.0), rng.gen_range(-5.0..5.0)).expect("rho > 0")
}

fn random_lambda(rng: &mut ChaCha8Rng) -> Complex64 {
    Complex64::from_polar(rng.gen_range(0.05..6.0), rng.gen_range(0.0..2.0 * PI))
}

/// a² + ρ²b² − a = 0, D_ρa = −ρD_zb, D_za = ρD_ρb and λ₊λ₋ = −ρ².
pub fn spectral_identities(opts: SelftestOptions, samples: usize) -> SuiteResult {
    let mut rng = rng(2);
    let (mut quad, mut hodge, mut vieta) = (0.0f64, 0.0f64, 0.0f64);
    let mut done = 0;
    while done < samples {
        let x = random_point(&mut rng);
        let l = random_lambda(&mut rng);
        if (l * l + x.rho * x.rho).norm() <= 1e-3 {
            continue;
        }
        let Ok(mut jet) = ab_jet(l, x) else { continue };
        if opts.b_sign_bug {
            jet.b = -jet.b;
            jet.db.d_rho = -jet.db.d_rho;
            jet.db.d_z = -jet.db.d_z;
            jet.db.d_lambda = -jet.db.d_lambda;
        }
        let rho = x.rho;
        let (a, b) = (jet.a, jet.b);
        quad = quad.max((a * a + rho * rho * b * b - a).norm() / (1.0 + a.norm_sqr()));
        let omega = omega_forms(l, x).expect("lambda away from the poles of omega");
        let (da_rho, da_z) = jet.da.covariant(omega);
        let (db_rho, db_z) = jet.db.covariant(omega);
        let scale = 1.0 + da_rho.norm() + da_z.norm() + rho * (db_rho.norm() + db_z.norm());
        hodge = hodge
            .max((da_rho + rho * db_z).norm() / scale)
            .max((da_z - rho * db_rho).norm() / scale);
        let w = c(rng.gen_range(-3.0..3.0), rng.gen_range(0.05..3.0));
        if let Ok(pair) = pole_pair(w, x) {
            let rho2 = rho * rho;
            let s = rho2.max(pair.lambda_in.norm() * pair.lambda_out.norm());
            vieta = vieta.max((pair.product() + rho2).norm() / s);
        }
        done += 1;
    }
    let worst = quad.max(hodge).max(vieta);
    SuiteResult::new(
        "spectral identities",
        worst <= 1e-12,
        format!("{samples} samples: a^2+rho^2b^2-a {quad:.1e}, Da-rho*Db {hodge:.1e}, product {vieta:.1e}"),
    )
}

/// Central-difference residual of dλ + ω = 0 at h and h/2: the ratio must
/// be about 4.
pub fn pole_flow() -> SuiteResult {
    let cases = [
        (c(0.0, 1.0), DomainPoint::new(1.0, 1.0)),
        (c(0.5, 2.0), DomainPoint::new(0.7, -1.3)),
        (c(-1.0, 0.4), DomainPoint::new(2.5, 0.2)),
    ];
    let mut ratios = Vec::new();
    let mut ok = true;
    for (w, x) in cases {
        let x = x.expect("rho > 0");
        for root in [Root::In, Root::Out] {
            let coarse = lambda_flow_residual(w, x, 1e-2, root);
            let fine = lambda_flow_residual(w, x, 5e-3, root);
            match (coarse, fine) {
                (Ok(a), Ok(b)) => {
                    let r = a / b;
                    ok &= (3.5..=4.5).contains(&r);
                    ratios.push(r);
                }
                _ => ok = false,
            }
        }
    }
    let lo = ratios.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = ratios.iter().cloned().fold(0.0, f64::max);
    SuiteResult::new(
        "pole flow",
        ok,
        format!("Richardson ratios in [{lo:.3}, {hi:.3}]"),
    )
}

pub fn structure_table(opts: SelftestOptions) -> StructureTable {
    let table = StructureTable::verified();
    if opts.perturb_table {
        let mut row = table.bracket(1, 2);
        row[2] *= 2;
        table.with_bracket(1, 2, row)
    } else {
        table
    }
}

pub fn commutators(opts: SelftestOptions) -> SuiteResult {
    let report = commutation_check(&structure_table(opts));
    let failures = report.failures();
    SuiteResult::new(
        "commutation table",
        failures.is_empty() && report.pairs.len() == 28,
        format!("{} brackets, failing pairs {failures:?}", report.pairs.len()),
    )
}

pub fn cartan_embedding(samples: usize) -> SuiteResult {
    let mut rng = rng(3);
    let mut worst: f64 = 0.0;
    for _ in 0..samples {
        let mu = rng.gen_range(-1.5..1.5);
        let delta = rng.gen_range(-2.0..2.0);
        let eta = rng.gen_range(-2.0..2.0);
        let theta = rng.gen_range(-2.0..2.0);
        let p = cartan_embed_su21(mu, delta, eta, theta);
        let v = cartan_potentials(mu, delta, eta, theta);
        worst = worst.max((&p - p_tilde(v.e, v.phi)).norm() / p.norm());
    }
    SuiteResult::new(
        "cartan embedding",
        worst <= 1e-12,
        format!("{samples} points, relative residual {worst:.2e}"),
    )
}

fn random_vector(rng: &mut ChaCha8Rng, n: usize) -> CVector {
    loop {
        let v = CVector::from_fn(n, |_, _| c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
        if v.norm() > 0.2 {
            return v;
        }
    }
}

/// A Minkowski-seed configuration with `count` solitons and well separated
/// poles in the upper half plane.
pub fn random_configuration(rng: &mut ChaCha8Rng, sig: Signature, count: usize) -> SolitonConfig {
    let mut solitons: Vec<Soliton> = Vec::with_capacity(count);
    while solitons.len() < count {
        let w = c(rng.gen_range(-1.5..1.5), rng.gen_range(0.3..2.0));
        if solitons.iter().any(|s| (s.pole - w).norm() <= 0.2) {
            continue;
        }
        solitons.push(Soliton::new(w, random_vector(rng, sig.dim())));
    }
    SolitonConfig::new(Arc::new(ConstantSeed::identity(sig)), solitons)
        .expect("generated configuration is valid")
}

/// Largest condition number of A and norm of q accepted for random
/// samples; residuals near det A = 0 grow like ‖q‖² cond(A).
pub const REGULAR_CONDITION: f64 = 1e6;
pub const REGULAR_Q_NORM: f64 = 1e2;

/// Draw points until one is regular in the above sense.
pub fn regular_point(rng: &mut ChaCha8Rng, cfg: &SolitonConfig) -> Option<(DomainPoint, Dressing)> {
    for _ in 0..1000 {
        let x = DomainPoint::new(rng.gen_range(0.2..4.0), rng.gen_range(-3.0..3.0)).ok()?;
        if let Ok(d) = dress(cfg, x) {
            if d.solve.condition <= REGULAR_CONDITION && d.q.norm() <= REGULAR_Q_NORM {
                return Some((x, d));
            }
        }
    }
    None
}

/// Relative change of q under per-soliton rescaling of v and under pole
/// pair relabelling, worst over `configs` random configurations.
pub fn invariance_residuals(configs: usize) -> (f64, f64) {
    let mut rng = rng(4);
    let (mut scaling, mut relabel) = (0.0f64, 0.0f64);
    for k in 0..configs {
        let sig = if k % 2 == 0 {
            Signature::new(1, 1)
        } else {
            Signature::new(2, 1)
        }
        .expect("valid signature");
        let cfg = random_configuration(&mut rng, sig, 1 + k % 2);
        let Some((x, d)) = regular_point(&mut rng, &cfg) else {
            return (f64::INFINITY, f64::INFINITY);
        };
        let scale = d.q.norm().max(1.0);
        let scaled: Vec<Soliton> = cfg
            .solitons()
            .iter()
            .map(|s| {
                let f = Complex64::from_polar(rng.gen_range(0.2..3.0), rng.gen_range(0.0..2.0 * PI));
                Soliton::new(s.pole, &s.vector * f)
            })
            .collect();
        let cfg2 = SolitonConfig::new(Arc::new(ConstantSeed::identity(sig)), scaled)
            .expect("scaled configuration is valid");
        scaling = match dress(&cfg2, x) {
            Ok(d2) => scaling.max((&d.q - &d2.q).norm() / scale),
            Err(_) => f64::INFINITY,
        };
        let sd = spectral_data(&cfg, x).expect("regular point");
        for pair in 0..sd.n_solitons() {
            let mut swapped = sd.clone();
            swapped.swap_pair(pair);
            relabel = match dress_spectral(&cfg, swapped) {
                Ok(d2) => relabel.max((&d.q - &d2.q).norm() / scale),
                Err(_) => f64::INFINITY,
            };
        }
    }
    (scaling, relabel)
}

pub fn invariance(configs: usize) -> SuiteResult {
    let (scaling, relabel) = invariance_residuals(configs);
    SuiteResult::new(
        "invariance",
        scaling <= 1e-10 && relabel <= 1e-10,
        format!("{configs} configurations: v-scaling {scaling:.2e}, relabel {relabel:.2e}"),
    )
}

/// Worst reality and involution residuals of χ over `points` random
/// regular points, with the fixed audit λ set at each.
pub fn chi_audit_residuals(points: usize) -> (f64, f64) {
    let mut rng = rng(5);
    let (mut reality, mut involution) = (0.0f64, 0.0f64);
    for k in 0..points {
        let sig = if k % 2 == 0 {
            Signature::new(2, 1)
        } else {
            Signature::new(1, 1)
        }
        .expect("valid signature");
        let cfg = random_configuration(&mut rng, sig, 1 + k % 2);
        let Some((_, d)) = regular_point(&mut rng, &cfg) else {
            return (f64::INFINITY, f64::INFINITY);
        };
        let gamma = cfg.gamma();
        let samples = audit_lambdas(&d.spectral, CHI_AUDIT_SAMPLES);
        if samples.len() != CHI_AUDIT_SAMPLES {
            return (f64::INFINITY, f64::INFINITY);
        }
        reality = reality.max(chi_reality_residual(&d, &gamma, &samples).unwrap_or(f64::INFINITY));
        involution =
            involution.max(chi_involution_residual(&d, &gamma, &samples).unwrap_or(f64::INFINITY));
    }
    (reality, involution)
}

pub fn chi_audits(points: usize) -> SuiteResult {
    let (reality, involution) = chi_audit_residuals(points);
    SuiteResult::new(
        "chi symmetry audits",
        reality <= 1e-9 && involution <= 1e-9,
        format!(
            "{points} points x {CHI_AUDIT_SAMPLES} lambda: reality {reality:.2e}, involution {involution:.2e}"
        ),
    )
}

pub const KERR_CASES: [(f64, f64); 3] = [(1.0, 1.0), (0.5, 2.0), (2.0, 0.3)];
pub const KN_CASES: [(f64, f64, f64); 2] = [(1.0, 0.5, 1.0), (1.0, 0.9, 0.5)];

pub fn kerr_oracle_match() -> SuiteResult {
    let mut worst: f64 = 0.0;
    let mut constraint: f64 = 0.0;
    let mut clean = true;
    for (m, s) in KERR_CASES {
        match kerr_preset(m, s, &PresetGrid::default()) {
            Ok(sw) => {
                worst = worst.max(sw.summary.max_oracle_relative_error.unwrap_or(f64::INFINITY));
                constraint = constraint.max(sw.summary.max_constraint_residual);
                clean &= sw.summary.exit_code == 0 && sw.summary.regular == sw.summary.points;
            }
            Err(_) => clean = false,
        }
    }
    SuiteResult::new(
        "kerr oracle",
        clean && worst <= 1e-9 && constraint <= 1e-9,
        format!("40x40 grids, relative error {worst:.2e}, constraint {constraint:.2e}"),
    )
}

pub fn kerr_flat_limit() -> SuiteResult {
    let worst = match kerr_preset(0.0, 1.0, &PresetGrid::default()) {
        Ok(sw) => {
            let (x, y) = (sw.table.column("x"), sw.table.column("y"));
            match (x, y) {
                (Some(x), Some(y)) => sw
                    .table
                    .rows
                    .iter()
                    .map(|r| (r[x].as_f64() - 1.0).abs().max(r[y].as_f64().abs()))
                    .fold(0.0, |a: f64, b| if b.is_nan() { f64::INFINITY } else { a.max(b) }),
                _ => f64::INFINITY,
            }
        }
        Err(_) => f64::INFINITY,
    };
    SuiteResult::new("kerr flat limit", worst <= 1e-12, format!("|(x,y) - (1,0)| {worst:.2e}"))
}

/// The closed-form family and, independently, the dressed real vector.
pub fn kerr_newman_oracle_match() -> SuiteResult {
    let mut worst: f64 = 0.0;
    let mut dressed: f64 = 0.0;
    let mut clean = true;
    for (m, e, s) in KN_CASES {
        match kerr_newman_preset(m, e, s, KnIdentification::Realizable, &PresetGrid::default()) {
            Ok(sw) => {
                worst = worst.max(sw.summary.max_oracle_relative_error.unwrap_or(f64::INFINITY));
                clean &= sw.summary.exit_code == 0;
            }
            Err(_) => clean = false,
        }
        let Ok(p) = BLParams::kerr_newman(m, e, s) else {
            clean = false;
            continue;
        };
        let Ok(cfg) = kn_config(&p) else {
            clean = false;
            continue;
        };
        let gamma = cfg.gamma();
        for (r, theta) in [(m + 2.0, 0.6), (m + 5.0, 1.4), (m + 9.0, 2.6)] {
            match vesture::targets::bl_to_weyl(r, theta, &p).and_then(|x| dress(&cfg, x)) {
                Ok(d) => dressed = dressed.max(constraint_residual(&d.q, &gamma).max_component()),
                Err(_) => clean = false,
            }
        }
    }
    SuiteResult::new(
        "kerr-newman oracle",
        clean && worst <= 1e-9 && dressed <= 1e-9,
        format!("family relative error {worst:.2e}, dressed vector constraint {dressed:.2e}"),
    )
}

/// Median refinement ratios of both Hodge residuals on the Kerr (1, 1)
/// field over r ∈ [4, 8], θ ∈ [π/3, 2π/3].
pub fn hodge_ratios(n: usize) -> Option<(f64, f64)> {
    let p = BLParams::kerr(1.0, 1.0).ok()?;
    let cfg = kerr_config(&p).ok()?;
    let coarse = GridSpec::boyer_lindquist(
        p,
        Axis::new(4.0, 8.0, n).ok()?,
        Axis::new(PI / 3.0, 2.0 * PI / 3.0, n).ok()?,
    )
    .ok()?;
    let fine = coarse.refined();
    let field = |spec: GridSpec| -> Option<_> {
        let f = field_from_points(spec, &dress_grid(&cfg, &spec).ok()?).ok()?;
        hodge_residual(&f, SINGULAR_MARGIN).ok()
    };
    let (hc, hf) = (field(coarse)?, field(fine)?);
    let ratio = |which| {
        let r = convergence_order(&hc, &hf, which).ok()?;
        matches!(r.order, Order::Estimated(_)).then_some(r.median_ratio)
    };
    Some((ratio(HodgeComponent::Curvature)?, ratio(HodgeComponent::Divergence)?))
}

/// Hodge residuals of a constant boosted seed field.
pub fn constant_seed_hodge() -> Option<(f64, f64)> {
    let sig = Signature::new(1, 1).ok()?;
    let (ch, sh) = (c(0.4f64.cosh(), 0.0), c(0.4f64.sinh(), 0.0));
    let q0 = CMatrix::from_row_slice(2, 2, &[ch, sh, sh, ch]);
    ConstantSeed::new(q0.clone(), sig, 1e-12).ok()?;
    let spec = GridSpec::weyl(Axis::new(0.5, 3.0, 9).ok()?, Axis::new(-2.0, 2.0, 9).ok()?).ok()?;
    let field = FieldGrid::from_fn(spec, |_| Some(q0.clone())).ok()?;
    let h = hodge_residual(&field, SINGULAR_MARGIN).ok()?;
    Some((h.max(HodgeComponent::Curvature), h.max(HodgeComponent::Divergence)))
}

pub fn convergence() -> SuiteResult {
    let ratios = hodge_ratios(11);
    let constant = constant_seed_hodge();
    let in_band = |r: f64| (3.5..=4.5).contains(&r);
    let passed = matches!(ratios, Some((a, b)) if in_band(a) && in_band(b))
        && constant == Some((0.0, 0.0));
    let detail = match (ratios, constant) {
        (Some((a, b)), Some((z1, z2))) => {
            format!("median ratios {a:.3} / {b:.3}, constant seed {z1:e} / {z2:e}")
        }
        _ => "could not evaluate".into(),
    };
    SuiteResult::new("hodge convergence", passed, detail)
}

/// The two-soliton dominance configuration used by `asymptotics`.
pub fn dominance_configuration() -> SolitonConfig {
    let v1 = CVector::from_column_slice(&[c(1.0, 0.0), c(0.2, 0.0)]);
    let v2 = CVector::from_column_slice(&[c(0.3, 0.0), c(1.0, 0.0)]);
    let sig = Signature::new(1, 1).expect("valid signature");
    SolitonConfig::new(
        Arc::new(ConstantSeed::identity(sig)),
        vec![Soliton::new(c(0.0, 1.0), v1), Soliton::new(c(0.5, 2.0), v2)],
    )
    .expect("valid configuration")
}

pub fn asymptotics() -> SuiteResult {
    let cfg = dominance_configuration();
    let dominant = dominance_check(&cfg.vectors(), &cfg.gamma());
    let angles: Vec<f64> = (1..6).map(|k| f64::from(k) * PI / 6.0).collect();
    match asymptotic_flatness(&cfg, &[1e2, 1e3, 1e4], &angles) {
        Ok(rep) => {
            let decay = rep.decay_ratios.iter().all(|r| (8.0..=12.0).contains(r));
            SuiteResult::new(
                "dominance at infinity",
                dominant && rep.min_det_fraction >= 0.5 && decay,
                format!(
                    "min |det A|/limit {:.3}, decay ratios {:?}",
                    rep.min_det_fraction,
                    rep.decay_ratios.iter().map(|r| (r * 1e3).round() / 1e3).collect::<Vec<_>>()
                ),
            )
        }
        Err(e) => SuiteResult::new("dominance at infinity", false, e.to_string()),
    }
}

/// All suites in a fixed order.
pub fn run_selftest(opts: SelftestOptions) -> Vec<SuiteResult> {
    vec![
        algebra_involutions(),
        spectral_identities(opts, 100),
        pole_flow(),
        commutators(opts),
        cartan_embedding(50),
        invariance(10),
        chi_audits(20),
        kerr_oracle_match(),
        kerr_flat_limit(),
        kerr_newman_oracle_match(),
        convergence(),
        asymptotics(),
    ]
}
