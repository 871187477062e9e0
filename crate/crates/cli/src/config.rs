//! JSON run configuration.
//!
//! Parsing happens in two passes: serde checks the shape of the document,
//! then every semantic rule is checked and all violations are reported
//! together.

use std::collections::BTreeSet;
use std::path::PathBuf;
use std::sync::Arc;

use serde::Deserialize;
use vesture::algebra::CMatrix;
use vesture::dressing::soliton_violations;
use vesture::seeds::SEED_TOLERANCE;
use vesture::targets::BLParams;
use vesture::verification::{Axis, GridSpec};
use vesture::{c, ConstantSeed, Seed, Signature, Soliton, SolitonConfig, Tolerances};

use crate::CliError;

/// Optional output column groups.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Field {
    Q,
    Ernst,
    Residuals,
    DetA,
    Oracle,
}

impl Field {
    pub fn parse(name: &str) -> Option<Self> {
        match name {
            "q" => Some(Self::Q),
            "ernst" => Some(Self::Ernst),
            "residuals" => Some(Self::Residuals),
            "detA" => Some(Self::DetA),
            "oracle" => Some(Self::Oracle),
            _ => None,
        }
    }

    pub fn all() -> BTreeSet<Self> {
        [Self::Q, Self::Ernst, Self::Residuals, Self::DetA, Self::Oracle].into()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

impl Format {
    pub fn parse(name: &str) -> Option<Self> {
        match name {
            "csv" => Some(Self::Csv),
            "json" => Some(Self::Json),
            _ => None,
        }
    }

    /// Guess from a file extension; anything but `.json` is CSV.
    pub fn from_path(path: &std::path::Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some("json") => Self::Json,
            _ => Self::Csv,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Outputs {
    pub fields: BTreeSet<Field>,
    pub path: PathBuf,
    pub format: Format,
}

impl Outputs {
    pub fn has(&self, f: Field) -> bool {
        self.fields.contains(&f)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum SeedSpec {
    Identity,
    Constant(CMatrix),
}

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub signature: Signature,
    pub seed: SeedSpec,
    pub solitons: Vec<Soliton>,
    pub grid: GridSpec,
    /// BL parameters, present for Boyer-Lindquist grids.
    pub bl: Option<BLParams>,
    pub outputs: Outputs,
    pub tolerances: Tolerances,
}

impl RunConfig {
    pub fn soliton_config(&self) -> Result<SolitonConfig, CliError> {
        let seed: Arc<dyn Seed> = match &self.seed {
            SeedSpec::Identity => Arc::new(ConstantSeed::identity(self.signature)),
            SeedSpec::Constant(m) => Arc::new(
                ConstantSeed::new(m.clone(), self.signature, SEED_TOLERANCE)
                    .map_err(|e| CliError::Config(vec![e.to_string()]))?,
            ),
        };
        let cfg = SolitonConfig::new(seed, self.solitons.clone())
            .map_err(|e| CliError::Config(vec![e.to_string()]))?;
        Ok(cfg.with_tolerances(self.tolerances))
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    target: RawTarget,
    #[serde(default)]
    seed: Option<RawSeed>,
    #[serde(default)]
    solitons: Vec<RawSoliton>,
    grid: RawGrid,
    outputs: RawOutputs,
    #[serde(default)]
    tolerances: RawTolerances,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawTarget {
    p: i64,
    q: i64,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum RawSeed {
    Named(String),
    Matrix { matrix: Vec<Vec<[f64; 2]>> },
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSoliton {
    omega: [f64; 2],
    v: Vec<[f64; 2]>,
}

#[derive(Deserialize, Clone, Copy)]
#[serde(deny_unknown_fields)]
struct RawAxis {
    min: f64,
    max: f64,
    count: usize,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawGrid {
    coords: String,
    rho: Option<RawAxis>,
    z: Option<RawAxis>,
    r: Option<RawAxis>,
    theta: Option<RawAxis>,
    bl: Option<RawBl>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawBl {
    m: f64,
    s: f64,
    #[serde(default)]
    e: f64,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawOutputs {
    fields: Vec<String>,
    path: String,
    #[serde(default = "default_format")]
    format: String,
}

fn default_format() -> String {
    "csv".into()
}

#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct RawTolerances {
    constraint_tol: Option<f64>,
    singular_tol: Option<f64>,
    condition_cap: Option<f64>,
}

/// Smallest axis length; the Hodge stencils need three samples.
pub const MIN_AXIS_COUNT: usize = 3;

fn axis(name: &str, raw: Option<RawAxis>, errs: &mut Vec<String>) -> Option<Axis> {
    let Some(raw) = raw else {
        errs.push(format!("grid: missing axis \"{name}\""));
        return None;
    };
    if raw.count < MIN_AXIS_COUNT {
        errs.push(format!(
            "grid: axis \"{name}\" needs at least {MIN_AXIS_COUNT} samples, got {}",
            raw.count
        ));
        return None;
    }
    match Axis::new(raw.min, raw.max, raw.count) {
        Ok(a) => Some(a),
        Err(e) => {
            errs.push(format!("grid: axis \"{name}\": {e}"));
            None
        }
    }
}

fn grid(raw: RawGrid, errs: &mut Vec<String>) -> (Option<GridSpec>, Option<BLParams>) {
    match raw.coords.as_str() {
        "weyl" => {
            for (name, present) in [("r", raw.r.is_some()), ("theta", raw.theta.is_some())] {
                if present {
                    errs.push(format!("grid: axis \"{name}\" is not used by weyl coordinates"));
                }
            }
            let bl = raw.bl.and_then(|b| match BLParams::new(b.m, b.s, b.e) {
                Ok(p) => Some(p),
                Err(e) => {
                    errs.push(format!("grid: bl: {e}"));
                    None
                }
            });
            let (rho, z) = (axis("rho", raw.rho, errs), axis("z", raw.z, errs));
            let spec = match (rho, z) {
                (Some(rho), Some(z)) => GridSpec::weyl(rho, z)
                    .map_err(|e| errs.push(format!("grid: {e}")))
                    .ok(),
                _ => None,
            };
            (spec, bl)
        }
        "boyer-lindquist" => {
            for (name, present) in [("rho", raw.rho.is_some()), ("z", raw.z.is_some())] {
                if present {
                    errs.push(format!(
                        "grid: axis \"{name}\" is not used by boyer-lindquist coordinates"
                    ));
                }
            }
            let bl = match raw.bl {
                None => {
                    errs.push("grid: boyer-lindquist coordinates need bl {m, s}".into());
                    None
                }
                Some(b) => BLParams::new(b.m, b.s, b.e)
                    .map_err(|e| errs.push(format!("grid: bl: {e}")))
                    .ok(),
            };
            let (r, theta) = (axis("r", raw.r, errs), axis("theta", raw.theta, errs));
            let spec = match (bl, r, theta) {
                (Some(p), Some(r), Some(theta)) => GridSpec::boyer_lindquist(p, r, theta)
                    .map_err(|e| errs.push(format!("grid: {e}")))
                    .ok(),
                _ => None,
            };
            (spec, bl)
        }
        other => {
            errs.push(format!(
                "grid: unknown coords \"{other}\" (expected \"weyl\" or \"boyer-lindquist\")"
            ));
            (None, None)
        }
    }
}

fn seed(raw: Option<RawSeed>, sig: Option<Signature>, errs: &mut Vec<String>) -> SeedSpec {
    match raw {
        None => SeedSpec::Identity,
        Some(RawSeed::Named(name)) if name == "identity" => SeedSpec::Identity,
        Some(RawSeed::Named(name)) => {
            errs.push(format!("seed: unknown seed \"{name}\" (expected \"identity\" or {{\"matrix\": ...}})"));
            SeedSpec::Identity
        }
        Some(RawSeed::Matrix { matrix }) => {
            let n = matrix.len();
            if matrix.iter().any(|row| row.len() != n) {
                errs.push("seed: matrix is not square".into());
                return SeedSpec::Identity;
            }
            let m = CMatrix::from_fn(n, n, |i, j| c(matrix[i][j][0], matrix[i][j][1]));
            if let Some(sig) = sig {
                if let Err(e) = ConstantSeed::new(m.clone(), sig, SEED_TOLERANCE) {
                    errs.push(format!("seed: {e}"));
                }
            }
            SeedSpec::Constant(m)
        }
    }
}

fn tolerances(raw: RawTolerances, errs: &mut Vec<String>) -> Tolerances {
    let mut t = Tolerances::default();
    for (name, value, slot) in [
        ("constraint_tol", raw.constraint_tol, &mut t.constraint_tol),
        ("singular_tol", raw.singular_tol, &mut t.singular_tol),
        ("condition_cap", raw.condition_cap, &mut t.condition_cap),
    ] {
        if let Some(v) = value {
            if v > 0.0 && v.is_finite() {
                *slot = v;
            } else {
                errs.push(format!("tolerances: {name} must be positive and finite, got {v}"));
            }
        }
    }
    t
}

/// Parse and validate a configuration, collecting every violation.
pub fn parse_config(text: &[u8]) -> Result<RunConfig, CliError> {
    let text = std::str::from_utf8(text)
        .map_err(|e| CliError::Config(vec![format!("config is not UTF-8: {e}")]))?;
    let value: serde_json::Value = serde_json::from_str(text)
        .map_err(|e| CliError::Config(vec![format!("malformed JSON: {e}")]))?;
    let raw: RawConfig = serde_json::from_value(value)
        .map_err(|e| CliError::Config(vec![format!("invalid config structure: {e}")]))?;

    let mut errs = Vec::new();
    let signature = match (usize::try_from(raw.target.p), usize::try_from(raw.target.q)) {
        (Ok(p), Ok(q)) => Signature::new(p, q)
            .map_err(|e| errs.push(format!("target: {e}")))
            .ok(),
        _ => {
            errs.push(format!(
                "target: bad signature ({},{}): p and q must be positive",
                raw.target.p, raw.target.q
            ));
            None
        }
    };

    let seed = seed(raw.seed, signature, &mut errs);
    let solitons: Vec<Soliton> = raw
        .solitons
        .iter()
        .map(|s| {
            let v: Vec<_> = s.v.iter().map(|z| c(z[0], z[1])).collect();
            Soliton::from_slice(c(s.omega[0], s.omega[1]), &v)
        })
        .collect();
    if let Some(sig) = signature {
        errs.extend(soliton_violations(sig, &solitons));
    }

    let (grid, bl) = grid(raw.grid, &mut errs);

    let mut fields = BTreeSet::new();
    for name in &raw.outputs.fields {
        match Field::parse(name) {
            Some(f) => {
                fields.insert(f);
            }
            None => errs.push(format!("outputs: unknown field \"{name}\"")),
        }
    }
    let format = Format::parse(&raw.outputs.format).unwrap_or_else(|| {
        errs.push(format!(
            "outputs: unknown format \"{}\" (expected \"csv\" or \"json\")",
            raw.outputs.format
        ));
        Format::Csv
    });
    if raw.outputs.path.is_empty() {
        errs.push("outputs: empty path".into());
    }
    if let Some(sig) = signature {
        let supported = matches!((sig.p(), sig.q()), (1, 1) | (2, 1));
        if !supported && fields.contains(&Field::Ernst) {
            errs.push(format!(
                "outputs: ernst potentials need signature (1,1) or (2,1), got ({},{})",
                sig.p(),
                sig.q()
            ));
        }
        if fields.contains(&Field::Oracle) {
            if !supported {
                errs.push("outputs: oracle columns need signature (1,1) or (2,1)".into());
            }
            if grid.is_some() && bl.is_none() {
                errs.push("outputs: oracle columns need bl parameters".into());
            }
            if let (Some(p), true) = (bl, sig.p() == 1 && sig.q() == 1) {
                if p.e != 0.0 {
                    errs.push("outputs: the (1,1) oracle is uncharged, bl.e must be 0".into());
                }
            }
        }
    }
    let tolerances = tolerances(raw.tolerances, &mut errs);

    match (errs.is_empty(), signature, grid) {
        (true, Some(signature), Some(grid)) => Ok(RunConfig {
            signature,
            seed,
            solitons,
            grid,
            bl,
            outputs: Outputs {
                fields,
                path: PathBuf::from(raw.outputs.path),
                format,
            },
            tolerances,
        }),
        _ => Err(CliError::Config(errs)),
    }
}
