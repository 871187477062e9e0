//! Grid sweeps, presets and the `verify` command.

use std::collections::BTreeSet;
use std::f64::consts::PI;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::Serialize;
use vesture::algebra::{constraint_residual, CMatrix};
use vesture::targets::kerr_newman::{g21_soliton_family, kn_family_params, KnIdentification};
use vesture::targets::{
    ernst_g11, ernst_g21, kerr_config, kerr_oracle, kerr_params, kn_oracle, BLParams, ErnstValue21,
    FamilyParams,
};
use vesture::verification::{
    hodge_residual, Axis, Chart, FieldGrid, GridSpec, HodgeComponent, SINGULAR_MARGIN,
};
use vesture::{
    c, dress_point, Complex64, ConstraintResidual, DomainPoint, PointStatus, Signature,
    SolitonConfig, Tolerances, VestureError,
};

use crate::config::{Field, Format, Outputs, RunConfig, SeedSpec};
use crate::table::{Cell, Table};
use crate::{CliError, ExitCode};

/// Closed-form reference the output is compared against.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Oracle {
    Kerr { m: f64, a: f64 },
    KerrNewman { m: f64, e: f64, a: f64 },
}

impl Oracle {
    /// The reference matching a Minkowski-seed 1-soliton with pole is:
    /// a = √(m² + s²) for G₁,₁ and a = −√(m² + s² + e²) for G₂,₁.
    pub fn for_target(sig: Signature, p: &BLParams) -> Result<Self, CliError> {
        match (sig.p(), sig.q()) {
            (1, 1) => Ok(Oracle::Kerr {
                m: p.m,
                a: p.m.hypot(p.s),
            }),
            (2, 1) => {
                let (_, a) = kn_family_params(p, KnIdentification::Realizable).map_err(config)?;
                Ok(Oracle::KerrNewman { m: p.m, e: p.e, a })
            }
            _ => Err(CliError::Config(vec![
                "oracle columns need signature (1,1) or (2,1)".into(),
            ])),
        }
    }
}

fn config(e: VestureError) -> CliError {
    CliError::Config(vec![e.to_string()])
}

/// q (if regular), det A and status at one grid point.
#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    pub x: DomainPoint,
    pub q: Option<CMatrix>,
    pub det_a: Complex64,
    pub status: PointStatus,
}

/// Where the matrices of a sweep come from.
pub enum Source<'a> {
    Dressing(&'a SolitonConfig),
    /// The closed-form G₂,₁ family in BL coordinates; there is no A.
    Family(FamilyParams, BLParams),
}

pub struct SweepSpec {
    pub signature: Signature,
    pub grid: GridSpec,
    pub fields: BTreeSet<Field>,
    pub tolerances: Tolerances,
    pub oracle: Option<Oracle>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Summary {
    pub command: String,
    pub points: usize,
    pub regular: usize,
    pub singular: usize,
    pub ill_conditioned: usize,
    pub constraint_failures: usize,
    pub max_constraint_residual: f64,
    pub max_hodge_curvature: f64,
    pub max_hodge_divergence: f64,
    pub max_oracle_relative_error: Option<f64>,
    /// Unit phase applied to the dressed Φ before the oracle diff.
    pub phi_phase: Option<[f64; 2]>,
    pub exit_code: u8,
}

impl Summary {
    pub fn exit(&self) -> ExitCode {
        match self.exit_code {
            0 => ExitCode::Success,
            2 => ExitCode::Numeric,
            _ => ExitCode::Constraint,
        }
    }

    pub fn render(&self) -> String {
        let mut s = format!(
            "{}: {} points, {} regular, {} singular, {} ill-conditioned\n\
             max constraint residual {:.3e} ({} over tolerance)\n\
             max hodge residuals {:.3e} / {:.3e}\n",
            self.command,
            self.points,
            self.regular,
            self.singular,
            self.ill_conditioned,
            self.max_constraint_residual,
            self.constraint_failures,
            self.max_hodge_curvature,
            self.max_hodge_divergence,
        );
        if let Some(e) = self.max_oracle_relative_error {
            s += &format!("max relative error vs oracle {e:.3e}\n");
        }
        s
    }
}

pub struct Sweep {
    pub samples: Vec<Sample>,
    pub table: Table,
    pub summary: Summary,
}

/// Evaluate every grid point, row-major. Worker completion order does not
/// affect the result.
pub fn sample_grid(source: &Source<'_>, grid: &GridSpec) -> Result<Vec<Sample>, CliError> {
    let (nu, nv) = grid.shape();
    let idx: Vec<(usize, usize)> = (0..nu).flat_map(|i| (0..nv).map(move |j| (i, j))).collect();
    idx.par_iter()
        .map(|&(i, j)| {
            let x = grid.point(i, j).map_err(config)?;
            match source {
                Source::Dressing(cfg) => {
                    let p = dress_point(cfg, x).map_err(config)?;
                    Ok(Sample {
                        x,
                        q: p.q,
                        det_a: p.det_a,
                        status: p.status,
                    })
                }
                Source::Family(params, bl) => {
                    let (r, theta) = grid.coords(i, j);
                    let nan = c(f64::NAN, f64::NAN);
                    match g21_soliton_family(params, bl, r, theta) {
                        Ok(q) => Ok(Sample {
                            x,
                            q: Some(q),
                            det_a: nan,
                            status: PointStatus::Regular,
                        }),
                        Err(VestureError::Singular { .. }) => Ok(Sample {
                            x,
                            q: None,
                            det_a: nan,
                            status: PointStatus::Singular,
                        }),
                        Err(e) => Err(config(e)),
                    }
                }
            }
        })
        .collect()
}

fn header(spec: &SweepSpec) -> Vec<String> {
    let n = spec.signature.dim();
    let mut h: Vec<String> = vec!["rho".into(), "z".into()];
    if matches!(spec.grid.chart, Chart::BoyerLindquist(_)) {
        h.extend(["r".into(), "theta".into()]);
    }
    if spec.fields.contains(&Field::Q) {
        for i in 1..=n {
            for j in 1..=n {
                h.push(format!("q_re_{i}{j}"));
                h.push(format!("q_im_{i}{j}"));
            }
        }
    }
    if spec.fields.contains(&Field::DetA) {
        h.extend(["detA_re".into(), "detA_im".into()]);
    }
    if spec.fields.contains(&Field::Residuals) {
        h.extend(["res_constraint".into(), "res_hodge1".into(), "res_hodge2".into()]);
    }
    h.push("singular".into());
    let g21 = n == 3;
    if spec.fields.contains(&Field::Ernst) {
        if g21 {
            h.extend(["E_re", "E_im", "Phi_re", "Phi_im"].map(String::from));
        } else {
            h.extend(["x", "y"].map(String::from));
        }
    }
    if spec.oracle.is_some() && spec.fields.contains(&Field::Oracle) {
        if g21 {
            h.extend(
                ["oracle_E_re", "oracle_E_im", "oracle_Phi_re", "oracle_Phi_im", "oracle_relerr"]
                    .map(String::from),
            );
        } else {
            h.extend(["oracle_x", "oracle_y", "oracle_relerr"].map(String::from));
        }
    }
    h
}

/// Ernst data of a regular point: (E, Φ) with Φ = 0 for G₁,₁.
fn ernst(sig: Signature, q: &CMatrix) -> Option<(Complex64, Complex64)> {
    match sig.dim() {
        2 => ernst_g11(q).ok().map(|v| (v.potential(), c(0.0, 0.0))),
        3 => ernst_g21(q).ok().map(|v| (v.e, v.phi)),
        _ => None,
    }
}

fn oracle_value(oracle: Oracle, r: f64, theta: f64) -> Option<(Complex64, Complex64)> {
    match oracle {
        Oracle::Kerr { m, a } => kerr_oracle(m, a, r, theta)
            .ok()
            .map(|v| (v.potential(), c(0.0, 0.0))),
        Oracle::KerrNewman { m, e, a } => {
            kn_oracle(m, e, a, r, theta).ok().map(|v: ErnstValue21| (v.e, v.phi))
        }
    }
}

/// Max of the relative E error and the relative (phase-aligned) Φ error.
/// A vanishing Φ reference is compared in absolute terms.
pub fn ernst_relative_error(
    value: (Complex64, Complex64),
    reference: (Complex64, Complex64),
    phase: Complex64,
) -> f64 {
    let de = (value.0 - reference.0).norm() / reference.0.norm();
    let dphi = (value.1 * phase - reference.1).norm();
    let phi_scale = reference.1.norm();
    de.max(if phi_scale > 0.0 { dphi / phi_scale } else { dphi })
}

fn nan_max(a: f64, b: f64) -> f64 {
    if b.is_nan() {
        a
    } else {
        a.max(b)
    }
}

/// Assemble output rows and the summary from samples.
pub fn tabulate(command: &str, spec: &SweepSpec, samples: Vec<Sample>) -> Result<Sweep, CliError> {
    let sig = spec.signature;
    let gamma = sig.gamma();
    let n = sig.dim();
    let tol = spec.tolerances.constraint_tol;
    let grid = &spec.grid;
    let (nu, nv) = grid.shape();

    let field = FieldGrid::new(*grid, samples.iter().map(|s| s.q.clone()).collect()).map_err(config)?;
    let hodge = hodge_residual(&field, SINGULAR_MARGIN).map_err(config)?;

    let bl_chart = matches!(grid.chart, Chart::BoyerLindquist(_));
    let ernst_values: Vec<Option<(Complex64, Complex64)>> = samples
        .iter()
        .map(|s| s.q.as_ref().and_then(|q| ernst(sig, q)))
        .collect();
    let oracle_values: Vec<Option<(Complex64, Complex64)>> = match (spec.oracle, bl_chart) {
        (Some(o), true) => (0..nu)
            .flat_map(|i| (0..nv).map(move |j| (i, j)))
            .map(|(i, j)| {
                let (r, theta) = grid.coords(i, j);
                oracle_value(o, r, theta)
            })
            .collect(),
        _ => vec![None; samples.len()],
    };

    // One global phase for Φ, fixed at the first regular point in row-major
    // order (the grid corner when it is regular).
    let phase = if n == 3 && spec.oracle.is_some() {
        ernst_values
            .iter()
            .zip(&oracle_values)
            .find_map(|(v, o)| match (v, o) {
                (Some(v), Some(o)) if v.1.norm() > 0.0 && o.1.norm() > 0.0 => {
                    let ratio = o.1 / v.1;
                    Some(ratio / ratio.norm())
                }
                _ => None,
            })
    } else {
        None
    };
    let phase_c = phase.unwrap_or(c(1.0, 0.0));

    let mut rows = Vec::with_capacity(samples.len());
    let mut summary = Summary {
        command: command.into(),
        points: samples.len(),
        regular: 0,
        singular: 0,
        ill_conditioned: 0,
        constraint_failures: 0,
        max_constraint_residual: 0.0,
        max_hodge_curvature: hodge.max(HodgeComponent::Curvature),
        max_hodge_divergence: hodge.max(HodgeComponent::Divergence),
        max_oracle_relative_error: spec.oracle.map(|_| 0.0),
        phi_phase: phase.map(|p| [p.re, p.im]),
        exit_code: 0,
    };

    for (k, s) in samples.iter().enumerate() {
        let (i, j) = (k / nv, k % nv);
        let mut row = vec![Cell::Num(s.x.rho), Cell::Num(s.x.z)];
        if bl_chart {
            let (r, theta) = grid.coords(i, j);
            row.extend([Cell::Num(r), Cell::Num(theta)]);
        }
        let residual: Option<ConstraintResidual> =
            s.q.as_ref().map(|q| constraint_residual(q, &gamma));
        match s.status {
            PointStatus::Regular => summary.regular += 1,
            PointStatus::Singular => summary.singular += 1,
            PointStatus::IllConditioned => summary.ill_conditioned += 1,
        }
        if let Some(r) = residual {
            let worst = r.max_component();
            summary.max_constraint_residual = nan_max(summary.max_constraint_residual, worst);
            if !r.within(tol) {
                summary.constraint_failures += 1;
            }
        }
        if spec.fields.contains(&Field::Q) {
            for a in 0..n {
                for b in 0..n {
                    let z = s.q.as_ref().map_or(c(f64::NAN, f64::NAN), |q| q[(a, b)]);
                    row.extend([Cell::Num(z.re), Cell::Num(z.im)]);
                }
            }
        }
        if spec.fields.contains(&Field::DetA) {
            row.extend([Cell::Num(s.det_a.re), Cell::Num(s.det_a.im)]);
        }
        if spec.fields.contains(&Field::Residuals) {
            row.push(Cell::Num(residual.map_or(f64::NAN, |r| r.max_component())));
            row.push(Cell::Num(hodge.curvature[k].unwrap_or(f64::NAN)));
            row.push(Cell::Num(hodge.divergence[k].unwrap_or(f64::NAN)));
        }
        row.push(Cell::Int(i64::from(s.status != PointStatus::Regular)));
        let ev = ernst_values[k];
        let nan = c(f64::NAN, f64::NAN);
        if spec.fields.contains(&Field::Ernst) {
            let (e, phi) = ev.unwrap_or((nan, nan));
            if n == 3 {
                row.extend([e.re, e.im, phi.re, phi.im].map(Cell::Num));
            } else {
                row.extend([e.re, e.im].map(Cell::Num));
            }
        }
        if let Some(o) = oracle_values[k] {
            let err = ev.map_or(f64::NAN, |v| ernst_relative_error(v, o, phase_c));
            if let Some(m) = summary.max_oracle_relative_error.as_mut() {
                *m = nan_max(*m, err);
            }
            if spec.fields.contains(&Field::Oracle) {
                if n == 3 {
                    row.extend([o.0.re, o.0.im, o.1.re, o.1.im, err].map(Cell::Num));
                } else {
                    row.extend([o.0.re, o.0.im, err].map(Cell::Num));
                }
            }
        } else if spec.oracle.is_some() && spec.fields.contains(&Field::Oracle) {
            let width = if n == 3 { 5 } else { 3 };
            row.extend(std::iter::repeat(Cell::Num(f64::NAN)).take(width));
        }
        rows.push(row);
    }

    summary.exit_code = if summary.ill_conditioned > 0 {
        ExitCode::Numeric as u8
    } else if summary.constraint_failures > 0 {
        ExitCode::Constraint as u8
    } else {
        ExitCode::Success as u8
    };
    Ok(Sweep {
        samples,
        table: Table {
            header: header(spec),
            rows,
        },
        summary,
    })
}

/// Summary file written next to an output: `<path>.summary.json`.
pub fn summary_path(path: &Path) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".summary.json");
    PathBuf::from(s)
}

pub fn write_outputs(sweep: &Sweep, outputs: &Outputs) -> Result<(), CliError> {
    sweep.table.write(&outputs.path, outputs.format)?;
    let path = summary_path(&outputs.path);
    let mut text = serde_json::to_string_pretty(&sweep.summary)
        .map_err(|e| CliError::Io(e.to_string()))?;
    text.push('\n');
    std::fs::write(&path, text).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

/// The sweep behind `dress -c`, without writing files.
pub fn evaluate(cfg: &RunConfig) -> Result<Sweep, CliError> {
    let soliton_cfg = cfg.soliton_config()?;
    let oracle = match (cfg.outputs.has(Field::Oracle), cfg.bl) {
        (true, Some(p)) => Some(Oracle::for_target(cfg.signature, &p)?),
        _ => None,
    };
    let spec = SweepSpec {
        signature: cfg.signature,
        grid: cfg.grid,
        fields: cfg.outputs.fields.clone(),
        tolerances: cfg.tolerances,
        oracle,
    };
    let samples = sample_grid(&Source::Dressing(&soliton_cfg), &cfg.grid)?;
    tabulate("dress", &spec, samples)
}

pub fn run_dress(cfg: &RunConfig) -> Result<Summary, CliError> {
    let sweep = evaluate(cfg)?;
    write_outputs(&sweep, &cfg.outputs)?;
    Ok(sweep.summary)
}

/// Boyer-Lindquist grid of a preset. Defaults: r ∈ [m + 1.5, m + 10],
/// θ ∈ [π/8, 7π/8], 40 × 40.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PresetGrid {
    pub r: Option<(f64, f64)>,
    pub theta: (f64, f64),
    pub count: (usize, usize),
}

impl Default for PresetGrid {
    fn default() -> Self {
        Self {
            r: None,
            theta: (PI / 8.0, 7.0 * PI / 8.0),
            count: (40, 40),
        }
    }
}

impl PresetGrid {
    pub fn spec(&self, p: BLParams) -> Result<GridSpec, CliError> {
        let (r0, r1) = self.r.unwrap_or((p.m + 1.5, p.m + 10.0));
        let r = Axis::new(r0, r1, self.count.0).map_err(config)?;
        let theta = Axis::new(self.theta.0, self.theta.1, self.count.1).map_err(config)?;
        if r.count < 3 || theta.count < 3 {
            return Err(CliError::Config(vec!["preset grids need at least 3 samples per axis".into()]));
        }
        GridSpec::boyer_lindquist(p, r, theta).map_err(config)
    }
}

/// All output column groups.
pub fn preset_outputs(path: PathBuf, format: Format) -> Outputs {
    Outputs {
        fields: Field::all(),
        path,
        format,
    }
}

/// The full dressing pipeline on the Kerr vector, diffed against the Kerr
/// potentials.
pub fn kerr_preset(m: f64, s: f64, grid: &PresetGrid) -> Result<Sweep, CliError> {
    let p = BLParams::kerr(m, s).map_err(config)?;
    kerr_params(m, s).map_err(config)?;
    let cfg = kerr_config(&p).map_err(config)?;
    let spec = SweepSpec {
        signature: cfg.signature(),
        grid: grid.spec(p)?,
        fields: Field::all(),
        tolerances: cfg.tolerances,
        oracle: Some(Oracle::for_target(cfg.signature(), &p)?),
    };
    let samples = sample_grid(&Source::Dressing(&cfg), &spec.grid)?;
    tabulate("kerr", &spec, samples)
}

/// The closed-form G₂,₁ family under the chosen identification, diffed
/// against the Kerr-Newman potentials with a = −B.
pub fn kerr_newman_preset(
    m: f64,
    e: f64,
    s: f64,
    ident: KnIdentification,
    grid: &PresetGrid,
) -> Result<Sweep, CliError> {
    let p = BLParams::kerr_newman(m, e, s).map_err(config)?;
    let (params, a) = kn_family_params(&p, ident).map_err(config)?;
    let signature = Signature::new(2, 1).map_err(config)?;
    let spec = SweepSpec {
        signature,
        grid: grid.spec(p)?,
        fields: Field::all(),
        tolerances: Tolerances::default(),
        oracle: Some(Oracle::KerrNewman { m, e, a }),
    };
    let command = match ident {
        KnIdentification::Printed => "kerr-newman (printed identification)",
        KnIdentification::Realizable => "kerr-newman",
    };
    let samples = sample_grid(&Source::Family(params, p), &spec.grid)?;
    tabulate(command, &spec, samples)
}

/// Outcome of `verify`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerifyReport {
    pub rows: usize,
    pub regular: usize,
    pub constraint_failures: usize,
    pub max_constraint_residual: f64,
    /// Largest |recomputed − stored| over the stored residual columns.
    pub max_stored_mismatch: Option<f64>,
    pub exit_code: u8,
}

impl VerifyReport {
    pub fn render(&self) -> String {
        let mut s = format!(
            "verify: {} rows, {} regular, max constraint residual {:.3e} ({} over tolerance)\n",
            self.rows, self.regular, self.max_constraint_residual, self.constraint_failures
        );
        if let Some(m) = self.max_stored_mismatch {
            s += &format!("stored residual columns reproduced to {m:.3e}\n");
        }
        s
    }
}

/// Tolerance for agreement between stored and recomputed residuals.
pub const STORED_RESIDUAL_TOL: f64 = 1e-8;

fn bad_table(msg: impl Into<String>) -> CliError {
    CliError::Config(vec![format!("unreadable table: {}", msg.into())])
}

/// Recover the sampling axis from a row-major coordinate column.
fn axis_from(values: impl Iterator<Item = f64>, count: usize) -> Result<Axis, CliError> {
    let v: Vec<f64> = values.collect();
    let (first, last) = (v[0], v[v.len() - 1]);
    Axis::new(first, last, count).map_err(|e| bad_table(e.to_string()))
}

/// Recompute constraint and Hodge residuals from the q columns of a table.
pub fn verify_table(
    table: &Table,
    signature: Option<Signature>,
    tol: f64,
) -> Result<VerifyReport, CliError> {
    let col = |name: &str| table.column(name).ok_or_else(|| bad_table(format!("missing column \"{name}\"")));
    let n_q = table.header.iter().filter(|h| h.starts_with("q_re_")).count();
    let n = (1..=9).find(|n| n * n == n_q).ok_or_else(|| bad_table("no q columns"))?;
    let sig = match signature {
        Some(s) if s.dim() == n => s,
        Some(s) => {
            return Err(CliError::Config(vec![format!(
                "signature ({},{}) does not match {n}x{n} q columns",
                s.p(),
                s.q()
            )]))
        }
        None => match n {
            2 => Signature::new(1, 1).map_err(config)?,
            3 => Signature::new(2, 1).map_err(config)?,
            _ => {
                return Err(CliError::Config(vec![format!(
                    "{n}x{n} q columns: pass the signature explicitly"
                )]))
            }
        },
    };
    let rows = &table.rows;
    if rows.is_empty() {
        return Err(bad_table("no rows"));
    }
    let get = |row: &Vec<Cell>, k: usize| row.get(k).map_or(f64::NAN, Cell::as_f64);

    let (rho_c, z_c) = (col("rho")?, col("z")?);
    let bl_cols = table.column("r").zip(table.column("theta"));
    let (u_c, v_c) = bl_cols.unwrap_or((rho_c, z_c));
    let nv = rows.iter().take_while(|r| get(r, u_c) == get(&rows[0], u_c)).count();
    if nv < 3 || rows.len() % nv != 0 || rows.len() / nv < 3 {
        return Err(bad_table("rows do not form a row-major grid with at least 3x3 points"));
    }
    let nu = rows.len() / nv;
    let u = axis_from(rows.iter().step_by(nv).map(|r| get(r, u_c)), nu)?;
    let v = axis_from(rows.iter().take(nv).map(|r| get(r, v_c)), nv)?;
    let grid = match bl_cols {
        None => GridSpec::weyl(u, v).map_err(config)?,
        Some(_) => {
            // z = (r − m) cos θ and ρ = √((r − m)² + s²) sin θ, solved on
            // the row where cos θ is largest.
            let best = rows
                .iter()
                .max_by(|a, b| get(a, v_c).cos().abs().total_cmp(&get(b, v_c).cos().abs()))
                .ok_or_else(|| bad_table("no rows"))?;
            let (r, theta, rho, z) = (get(best, u_c), get(best, v_c), get(best, rho_c), get(best, z_c));
            let big_r = z / theta.cos();
            let s2 = (rho / theta.sin()).powi(2) - big_r * big_r;
            let p = BLParams::kerr(r - big_r, s2.max(0.0).sqrt()).map_err(config)?;
            GridSpec::boyer_lindquist(p, u, v).map_err(config)?
        }
    };

    let mut q_cols = Vec::with_capacity(n * n);
    for i in 1..=n {
        for j in 1..=n {
            q_cols.push((col(&format!("q_re_{i}{j}"))?, col(&format!("q_im_{i}{j}"))?));
        }
    }
    let values: Vec<Option<CMatrix>> = rows
        .iter()
        .map(|row| {
            let entries: Vec<Complex64> = q_cols.iter().map(|&(re, im)| c(get(row, re), get(row, im))).collect();
            entries
                .iter()
                .all(|z| z.is_finite())
                .then(|| CMatrix::from_row_slice(n, n, &entries))
        })
        .collect();
    let gamma = sig.gamma();
    let mut report = VerifyReport {
        rows: rows.len(),
        regular: 0,
        constraint_failures: 0,
        max_constraint_residual: 0.0,
        max_stored_mismatch: None,
        exit_code: 0,
    };
    let residuals: Vec<Option<f64>> = values
        .iter()
        .map(|q| q.as_ref().map(|q| constraint_residual(q, &gamma).max_component()))
        .collect();
    for r in residuals.iter().flatten() {
        report.regular += 1;
        report.max_constraint_residual = nan_max(report.max_constraint_residual, *r);
        if !(*r <= tol) {
            report.constraint_failures += 1;
        }
    }
    let field = FieldGrid::new(grid, values).map_err(config)?;
    let hodge = hodge_residual(&field, SINGULAR_MARGIN).map_err(config)?;

    let stored = [
        ("res_constraint", residuals),
        ("res_hodge1", hodge.curvature.clone()),
        ("res_hodge2", hodge.divergence.clone()),
    ];
    let mut mismatch: Option<f64> = None;
    for (name, recomputed) in stored {
        let Some(k) = table.column(name) else { continue };
        let worst = rows
            .iter()
            .zip(&recomputed)
            .map(|(row, r)| {
                let s = get(row, k);
                match r {
                    Some(r) if s.is_nan() => r.abs().max(1.0),
                    Some(r) => (s - r).abs() / (1.0 + r.abs()),
                    None if s.is_nan() => 0.0,
                    None => 1.0,
                }
            })
            .fold(0.0, f64::max);
        mismatch = Some(mismatch.map_or(worst, |m| m.max(worst)));
    }
    report.max_stored_mismatch = mismatch;
    let mismatched = mismatch.is_some_and(|m| !(m <= STORED_RESIDUAL_TOL));
    report.exit_code = if report.constraint_failures > 0 || mismatched {
        ExitCode::Constraint as u8
    } else {
        ExitCode::Success as u8
    };
    Ok(report)
}

pub fn run_verify(path: &Path, signature: Option<Signature>, tol: f64) -> Result<VerifyReport, CliError> {
    verify_table(&Table::read(path)?, signature, tol)
}

/// A run configuration for the Kerr preset, usable with `dress -c`.
pub fn kerr_run_config(m: f64, s: f64, grid: &PresetGrid, outputs: Outputs) -> Result<RunConfig, CliError> {
    let p = BLParams::kerr(m, s).map_err(config)?;
    let cfg = kerr_config(&p).map_err(config)?;
    Ok(RunConfig {
        signature: cfg.signature(),
        seed: SeedSpec::Identity,
        solitons: cfg.solitons().to_vec(),
        grid: grid.spec(p)?,
        bl: Some(p),
        outputs,
        tolerances: cfg.tolerances,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> PresetGrid {
        PresetGrid {
            count: (8, 7),
            ..PresetGrid::default()
        }
    }

    #[test]
    fn kerr_preset_matches_oracle() {
        let sweep = kerr_preset(1.0, 1.0, &small()).unwrap();
        let s = &sweep.summary;
        assert_eq!(s.points, 56);
        assert_eq!(s.regular, 56);
        assert_eq!(s.exit_code, 0);
        assert!(s.max_oracle_relative_error.unwrap() <= 1e-9, "{s:?}");
        let h = &sweep.table.header;
        assert_eq!(&h[..6], ["rho", "z", "r", "theta", "q_re_11", "q_im_11"]);
        assert_eq!(h.last().unwrap(), "oracle_relerr");
    }

    #[test]
    fn kerr_flat_limit() {
        let sweep = kerr_preset(0.0, 1.0, &small()).unwrap();
        let (x, y) = (sweep.table.column("x").unwrap(), sweep.table.column("y").unwrap());
        for row in &sweep.table.rows {
            assert!((row[x].as_f64() - 1.0).abs() <= 1e-12);
            assert!(row[y].as_f64().abs() <= 1e-12);
        }
    }

    #[test]
    fn kerr_preset_domain_errors() {
        assert!(matches!(kerr_preset(1.0, 0.0, &small()), Err(CliError::Config(_))));
        assert!(matches!(kerr_preset(-1.0, 1.0, &small()), Err(CliError::Config(_))));
        assert!(matches!(
            kerr_newman_preset(0.1, 2.0, 0.1, KnIdentification::Realizable, &small()),
            Err(CliError::Config(_))
        ));
    }

    #[test]
    fn kerr_newman_identifications() {
        let good = kerr_newman_preset(1.0, 0.5, 1.0, KnIdentification::Realizable, &small()).unwrap();
        assert!(good.summary.max_oracle_relative_error.unwrap() <= 1e-9);
        assert_eq!(good.summary.exit_code, 0);
        let phase = good.summary.phi_phase.unwrap();
        assert!((phase[0] - 1.0).abs() < 1e-12 && phase[1].abs() < 1e-12);
        let printed = kerr_newman_preset(1.0, 0.5, 1.0, KnIdentification::Printed, &small()).unwrap();
        assert!(printed.summary.max_oracle_relative_error.unwrap() > 1e-3);
        assert_eq!(printed.summary.exit_code, ExitCode::Constraint as u8);
    }

    #[test]
    fn verify_reproduces_stored_residuals() {
        for sweep in [
            kerr_preset(1.0, 1.0, &small()).unwrap(),
            kerr_newman_preset(1.0, 0.9, 0.5, KnIdentification::Realizable, &small()).unwrap(),
        ] {
            let text = sweep.table.to_csv_string().unwrap();
            let table = Table::from_csv(&text).unwrap();
            let report = verify_table(&table, None, 1e-9).unwrap();
            assert_eq!(report.exit_code, 0, "{report:?}");
            assert!(report.max_stored_mismatch.unwrap() <= 1e-12, "{report:?}");
        }
    }

    #[test]
    fn verify_flags_tampered_q() {
        let sweep = kerr_preset(1.0, 1.0, &small()).unwrap();
        let mut table = sweep.table.clone();
        let k = table.column("q_re_12").unwrap();
        table.rows[20][k] = Cell::Num(table.rows[20][k].as_f64() + 1e-3);
        let report = verify_table(&table, None, 1e-9).unwrap();
        assert_eq!(report.constraint_failures, 1);
        assert_eq!(report.exit_code, ExitCode::Constraint as u8);
    }

    #[test]
    fn relative_error_uses_phase() {
        let v = (c(1.0, 0.0), c(0.0, 0.5));
        let o = (c(1.0, 0.0), c(0.5, 0.0));
        assert!(ernst_relative_error(v, o, c(1.0, 0.0)) > 1.0);
        assert!(ernst_relative_error(v, o, c(0.0, -1.0)) < 1e-15);
    }
}
