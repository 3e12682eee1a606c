//! Run configuration, binary field files, CSV tables and run manifests.
//!
//! Every file is written atomically: the bytes go to a temporary file in the
//! target directory which is then renamed over the destination.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exterior::{binomial, GridForm};
use crate::grid::{Grid, MAX_DIM};
use crate::nonlinearity::{builtin, Builtin, NonlinearitySpec};
use crate::potentials::{HeatParams, Trajectory};
use crate::radial::{algebraic_bump, lift_radial, RadialProfile};
use crate::random::{band_limited_form, gaussian_bumps, Seeded};
use crate::solver::SolverParams;
use crate::spaces::NormParams;

pub const MAGIC: [u8; 4] = *b"DRNS";
pub const FORMAT_VERSION: u32 = 1;
const HEADER_LEN: usize = 40;

/// Writes `bytes` to `path` through a temporary file and a rename.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    std::fs::create_dir_all(dir)?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(bytes)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| Error::Io(e.error))?;
    Ok(())
}

// ---------------------------------------------------------------- config

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub problem: ProblemConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<GridConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub norms: Option<NormParams>,
    #[serde(default)]
    pub solver: SolverParams,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub radial: Option<RadialConfig>,
    #[serde(default)]
    pub output: OutputConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub data: Option<DataConfig>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemConfig {
    pub n: usize,
    pub q: usize,
    /// 1 selects the projected (pressure) problem, 0 the local one.
    pub a: u8,
    pub mu: f64,
    #[serde(rename = "T")]
    pub horizon: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub nt: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub nonlinearity: Option<NonlinearityConfig>,
}

/// Either a built-in (`lamb`, `ps`, `zero`) or a JSON tensor file holding a
/// serialized [`NonlinearitySpec`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NonlinearityConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub b: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tensor_file: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    #[serde(rename = "N")]
    pub points: usize,
    #[serde(rename = "L")]
    pub half_width: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RadialConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub nr: Option<usize>,
    #[serde(rename = "R", default, skip_serializing_if = "Option::is_none")]
    pub radius: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dt: Option<f64>,
    /// Amplitudes `A` of the data `A/(1+r²)³`; more than one runs a sweep.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub amplitudes: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub snapshots: Option<usize>,
    #[serde(default, skip_serializing_if = "Vec::is_empty", deserialize_with = "one_or_many")]
    pub gamma: Vec<f64>,
    /// Given: integrate with this `κ`. Absent: shoot for it.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kappa: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub y_max: Option<f64>,
    /// `false` switches the `2κw` term of the profile equation to `κw`.
    #[serde(default = "yes")]
    pub coeff_2kw: bool,
}

fn yes() -> bool {
    true
}

fn one_or_many<'de, D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Vec<f64>, D::Error> {
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum OneOrMany {
        One(f64),
        Many(Vec<f64>),
    }
    Ok(match OneOrMany::deserialize(d)? {
        OneOrMany::One(v) => vec![v],
        OneOrMany::Many(v) => v,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputConfig {
    pub dir: Option<PathBuf>,
    /// Every `snapshot_stride`-th time slice goes into the field files.
    pub snapshot_stride: usize,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self {
            dir: None,
            snapshot_stride: 1,
        }
    }
}

/// Initial data (or, for `norms`, the field to measure).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum DataConfig {
    Zero,
    /// `A (sin kx₁ cos kx₂, -cos kx₁ sin kx₂)` with `k = π/L`; needs `n = 2, q = 1`.
    TaylorGreen { amplitude: f64 },
    /// `A sin(πx₁/L) dx₁`, the quasi one-dimensional Burgers data.
    Sine { amplitude: f64 },
    BandLimited { seed: u64, max_mode: usize, amplitude: f64 },
    GaussianBumps { seed: u64, bumps: usize, width: f64, amplitude: f64 },
    /// Lift of a radial profile: `A/(1+r²)³` or `A e^{-r²}`.
    Radial {
        amplitude: f64,
        #[serde(default)]
        profile: RadialShape,
    },
    /// Slice `slice` of a field file.
    File {
        path: PathBuf,
        #[serde(default)]
        slice: usize,
    },
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RadialShape {
    #[default]
    Algebraic,
    Gaussian,
}

impl RadialShape {
    pub fn eval(self, amplitude: f64, r: f64) -> f64 {
        match self {
            RadialShape::Algebraic => algebraic_bump(amplitude, r),
            RadialShape::Gaussian => amplitude * (-r * r).exp(),
        }
    }
}

fn config_error(field: &str, msg: impl std::fmt::Display) -> Error {
    Error::Config(format!("{field}: {msg}"))
}

impl RunConfig {
    /// Parses a config document; the error names the offending field and
    /// its line and column.
    pub fn parse(text: &str) -> Result<Self> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let cfg: RunConfig = serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            let inner = e.into_inner();
            config_error(&path, inner)
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Reads a config file, or the config echoed in a run manifest. Relative
    /// paths inside are resolved against the file's directory.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| config_error(&path.display().to_string(), e))?;
        let value: serde_json::Value =
            serde_json::from_str(&text).map_err(|e| config_error(&path.display().to_string(), e))?;
        let mut cfg = match value.get("config") {
            Some(inner) if value.get("command").is_some() => Self::parse(&inner.to_string())?,
            _ => Self::parse(&text)?,
        };
        let base = path.parent().unwrap_or(Path::new("."));
        let base = std::fs::canonicalize(base).unwrap_or_else(|_| base.to_path_buf());
        cfg.resolve_paths(&base);
        Ok(cfg)
    }

    fn resolve_paths(&mut self, base: &Path) {
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        if let Some(nl) = &mut self.problem.nonlinearity {
            if let Some(p) = &mut nl.tensor_file {
                fix(p);
            }
        }
        if let Some(DataConfig::File { path, .. }) = &mut self.data {
            fix(path);
        }
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn validate(&self) -> Result<()> {
        let p = &self.problem;
        if p.n < 1 {
            return Err(config_error("problem.n", "must be at least 1"));
        }
        if p.q > p.n {
            return Err(config_error("problem.q", format!("{} exceeds n = {}", p.q, p.n)));
        }
        if p.a > 1 {
            return Err(config_error("problem.a", format!("must be 0 or 1, got {}", p.a)));
        }
        if !(p.mu > 0.0 && p.mu.is_finite()) {
            return Err(config_error("problem.mu", format!("must be positive, got {}", p.mu)));
        }
        if !(p.horizon > 0.0 && p.horizon.is_finite()) {
            return Err(config_error("problem.T", format!("must be positive, got {}", p.horizon)));
        }
        if let Some(nt) = p.nt {
            if nt < 2 {
                return Err(config_error("problem.nt", format!("need at least 2 slices, got {nt}")));
            }
            if (nt - 1) % self.output.snapshot_stride.max(1) != 0 {
                return Err(config_error(
                    "output.snapshot_stride",
                    format!("{} does not divide nt - 1 = {}", self.output.snapshot_stride, nt - 1),
                ));
            }
        }
        if self.output.snapshot_stride == 0 {
            return Err(config_error("output.snapshot_stride", "must be positive"));
        }
        if let Some(nl) = &p.nonlinearity {
            match (&nl.name, &nl.tensor_file) {
                (Some(_), Some(_)) => {
                    return Err(config_error("problem.nonlinearity", "give either name or tensor_file"))
                }
                (None, None) => return Err(config_error("problem.nonlinearity", "needs name or tensor_file")),
                _ => {}
            }
        }
        if let Some(g) = &self.grid {
            if g.points < 4 || g.points % 2 != 0 {
                return Err(config_error("grid.N", format!("must be even and at least 4, got {}", g.points)));
            }
            if !(g.half_width > 0.0 && g.half_width.is_finite()) {
                return Err(config_error("grid.L", format!("must be positive, got {}", g.half_width)));
            }
        }
        if let Some(norms) = &self.norms {
            norms.validate().map_err(|e| config_error("norms", e))?;
        }
        if let Some(r) = &self.radial {
            if r.gamma.iter().any(|g| !(*g >= 0.0 && g.is_finite())) {
                return Err(config_error("radial.gamma", "must be non-negative"));
            }
            if r.amplitudes.iter().any(|a| !a.is_finite()) {
                return Err(config_error("radial.amplitudes", "must be finite"));
            }
        }
        Ok(())
    }

    pub fn grid(&self) -> Result<Grid> {
        let g = self.grid.ok_or_else(|| config_error("grid", "section missing"))?;
        if self.problem.n > MAX_DIM {
            return Err(config_error("problem.n", format!("grids support n <= {MAX_DIM}")));
        }
        Grid::new(self.problem.n, g.points, g.half_width).map_err(|e| config_error("grid", e))
    }

    pub fn heat(&self) -> Result<HeatParams> {
        let nt = self.problem.nt.ok_or_else(|| config_error("problem.nt", "missing"))?;
        HeatParams::new(self.problem.mu, self.problem.horizon, nt)
    }

    pub fn nonlinearity(&self) -> Result<NonlinearitySpec> {
        let (n, q) = (self.problem.n, self.problem.q);
        let nl = self
            .problem
            .nonlinearity
            .as_ref()
            .ok_or_else(|| config_error("problem.nonlinearity", "missing"))?;
        let spec = if let Some(path) = &nl.tensor_file {
            let text = std::fs::read_to_string(path).map_err(|e| config_error("problem.nonlinearity.tensor_file", e))?;
            let spec: NonlinearitySpec =
                serde_json::from_str(&text).map_err(|e| config_error("problem.nonlinearity.tensor_file", e))?;
            spec.validate()?;
            spec
        } else {
            match nl.name.as_deref() {
                Some("zero") => NonlinearitySpec::zero(n, q)?,
                Some(name) => {
                    let b: Builtin = name.parse().map_err(|e| config_error("problem.nonlinearity.name", e))?;
                    if b == Builtin::Lamb && nl.b.is_some() {
                        return Err(config_error("problem.nonlinearity.b", "lamb takes no b"));
                    }
                    builtin(b, n, nl.b)?
                }
                None => unreachable!("validated"),
            }
        };
        if spec.n != n || spec.q != q {
            return Err(config_error(
                "problem.nonlinearity",
                format!("acts on ({}, {}) forms, problem is ({n}, {q})", spec.n, spec.q),
            ));
        }
        Ok(spec)
    }

    pub fn radial(&self) -> Result<&RadialConfig> {
        self.radial.as_ref().ok_or_else(|| config_error("radial", "section missing"))
    }
}

impl DataConfig {
    /// Samples the data as a `q`-form on `grid`.
    pub fn build(&self, grid: &Grid, q: usize) -> Result<GridForm> {
        let n = grid.dim();
        let l = grid.half_width();
        let need_vector = |what: &str| {
            if q == 1 {
                Ok(())
            } else {
                Err(config_error("data.kind", format!("{what} data is a 1-form, problem has q = {q}")))
            }
        };
        Ok(match self {
            DataConfig::Zero => GridForm::zeros(grid, q),
            DataConfig::TaylorGreen { amplitude } => {
                need_vector("taylor_green")?;
                if n != 2 {
                    return Err(config_error("data.kind", "taylor_green needs n = 2"));
                }
                let k = PI / l;
                GridForm::from_fn(grid, 1, |x, c| {
                    let (s1, c1, s2, c2) = ((k * x[0]).sin(), (k * x[0]).cos(), (k * x[1]).sin(), (k * x[1]).cos());
                    amplitude * if c == 0 { s1 * c2 } else { -c1 * s2 }
                })
            }
            DataConfig::Sine { amplitude } => {
                need_vector("sine")?;
                GridForm::from_fn(grid, 1, |x, c| if c == 0 { amplitude * (PI * x[0] / l).sin() } else { 0.0 })
            }
            DataConfig::BandLimited {
                seed,
                max_mode,
                amplitude,
            } => {
                if 2 * max_mode >= grid.points() {
                    return Err(config_error("data.max_mode", "reaches the Nyquist bin"));
                }
                band_limited_form(grid, q, *max_mode, &mut Seeded::new(*seed)).scaled(*amplitude)
            }
            DataConfig::GaussianBumps {
                seed,
                bumps,
                width,
                amplitude,
            } => gaussian_bumps(grid, q, *bumps, *width, &mut Seeded::new(*seed)).scaled(*amplitude),
            DataConfig::Radial { amplitude, profile } => {
                need_vector("radial")?;
                let radius = 2.0 * (n as f64).sqrt() * l;
                let dr = grid.spacing() / 8.0;
                let points = (radius / dr).ceil() as usize + 1;
                let v = RadialProfile::from_fn(n, radius, points, |r| profile.eval(*amplitude, r))?;
                lift_radial(&v, grid)?
            }
            DataConfig::File { path, slice } => {
                let file = FieldFile::read(path)?;
                if file.grid()? != *grid || file.q != q {
                    return Err(config_error("data.path", "field file does not match the problem grid and degree"));
                }
                file.slice(*slice)?
            }
        })
    }
}

// ---------------------------------------------------------------- field files

/// Binary field snapshots: 40-byte header then little-endian `f64` samples,
/// slice-major, component-major within a slice, `x₁` fastest.
#[derive(Clone, Debug, PartialEq)]
pub struct FieldFile {
    pub n: usize,
    pub q: usize,
    pub points: usize,
    pub half_width: f64,
    /// Time of the last slice; slice `j` sits at `j T / (nt - 1)`.
    pub horizon: f64,
    pub slices: usize,
    pub data: Vec<f64>,
}

impl FieldFile {
    fn slice_len(n: usize, q: usize, points: usize) -> usize {
        binomial(n, q) * points.pow(n as u32)
    }

    pub fn from_forms(forms: &[&GridForm], horizon: f64) -> Result<Self> {
        let first = forms.first().ok_or_else(|| Error::Format("no slices".into()))?;
        let mut data = Vec::with_capacity(forms.len() * first.components().len() * first.grid().len());
        for f in forms {
            first.ensure_compatible(f)?;
            for c in f.components() {
                data.extend_from_slice(c);
            }
        }
        Ok(Self {
            n: first.dim(),
            q: first.degree(),
            points: first.grid().points(),
            half_width: first.grid().half_width(),
            horizon,
            slices: forms.len(),
            data,
        })
    }

    /// Every `stride`-th slice of a trajectory, including the first and last.
    pub fn from_trajectory(traj: &Trajectory, stride: usize) -> Result<Self> {
        let last = traj.len() - 1;
        if stride == 0 || last % stride != 0 {
            return Err(Error::InvalidParameter(format!("stride {stride} does not divide {last}")));
        }
        let forms: Vec<&GridForm> = (0..=last).step_by(stride).map(|j| traj.slice(j)).collect();
        Self::from_forms(&forms, traj.params().horizon)
    }

    pub fn grid(&self) -> Result<Grid> {
        Grid::new(self.n, self.points, self.half_width)
    }

    pub fn slice(&self, j: usize) -> Result<GridForm> {
        if j >= self.slices {
            return Err(Error::InvalidParameter(format!("slice {j} of {}", self.slices)));
        }
        let grid = self.grid()?;
        let len = grid.len();
        let per = Self::slice_len(self.n, self.q, self.points);
        let comps = self.data[j * per..(j + 1) * per].chunks(len).map(<[f64]>::to_vec).collect();
        GridForm::from_components(&grid, self.q, comps)
    }

    /// The slices as a trajectory with viscosity `mu` (which only labels it).
    pub fn to_trajectory(&self, mu: f64) -> Result<Trajectory> {
        let params = HeatParams::new(mu, self.horizon, self.slices)?;
        let slices = (0..self.slices).map(|j| self.slice(j)).collect::<Result<_>>()?;
        Trajectory::new(params, slices)
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(HEADER_LEN + 8 * self.data.len());
        out.extend_from_slice(&MAGIC);
        out.extend_from_slice(&FORMAT_VERSION.to_le_bytes());
        for v in [self.n, self.q, self.points, self.slices] {
            out.extend_from_slice(&(v as u32).to_le_bytes());
        }
        out.extend_from_slice(&self.half_width.to_le_bytes());
        out.extend_from_slice(&self.horizon.to_le_bytes());
        for v in &self.data {
            out.extend_from_slice(&v.to_le_bytes());
        }
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        if bytes.len() < HEADER_LEN {
            return Err(Error::Format(format!("{} bytes is shorter than the header", bytes.len())));
        }
        let magic: [u8; 4] = bytes[0..4].try_into().unwrap();
        if magic != MAGIC {
            return Err(Error::BadMagic { found: magic });
        }
        let word = |i: usize| u32::from_le_bytes(bytes[4 * i..4 * i + 4].try_into().unwrap());
        let version = word(1);
        if version != FORMAT_VERSION {
            return Err(Error::UnsupportedVersion { found: version });
        }
        let (n, q, points, slices) = (word(2) as usize, word(3) as usize, word(4) as usize, word(5) as usize);
        let real = |at: usize| f64::from_le_bytes(bytes[at..at + 8].try_into().unwrap());
        let (half_width, horizon) = (real(24), real(32));
        if n == 0 || n > MAX_DIM || q > n || points == 0 || slices == 0 {
            return Err(Error::Format(format!("bad header: n={n} q={q} N={points} nt={slices}")));
        }
        let count = slices
            .checked_mul(Self::slice_len(n, q, points))
            .ok_or_else(|| Error::Format("payload size overflows".into()))?;
        if bytes.len() - HEADER_LEN != 8 * count {
            return Err(Error::Format(format!(
                "payload is {} bytes, header implies {}",
                bytes.len() - HEADER_LEN,
                8 * count
            )));
        }
        let data = bytes[HEADER_LEN..].chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().unwrap())).collect();
        Ok(Self {
            n,
            q,
            points,
            half_width,
            horizon,
            slices,
            data,
        })
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        write_atomic(path, &self.to_bytes())
    }

    pub fn read(path: &Path) -> Result<Self> {
        Self::from_bytes(&std::fs::read(path)?)
    }
}

// ---------------------------------------------------------------- csv

/// `f64` with 17 significant digits, which round-trips exactly.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

/// A CSV table with a header row.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        Self {
            header: header.iter().map(|h| h.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        assert_eq!(row.len(), self.header.len(), "row width");
        self.rows.push(row);
    }

    pub fn push_reals(&mut self, row: &[f64]) {
        self.push(row.iter().map(|v| fmt_f64(*v)).collect());
    }

    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let io = |e: csv::Error| Error::Format(e.to_string());
        w.write_record(&self.header).map_err(io)?;
        for r in &self.rows {
            w.write_record(r).map_err(io)?;
        }
        let bytes = w.into_inner().map_err(|e| Error::Format(e.to_string()))?;
        Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        write_atomic(path, self.to_csv()?.as_bytes())
    }

    /// Column `name` parsed as reals.
    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let i = self.header.iter().position(|h| h == name)?;
        self.rows.iter().map(|r| r[i].parse().ok()).collect()
    }

    pub fn read(path: &Path) -> Result<Self> {
        let mut r = csv::Reader::from_path(path).map_err(|e| Error::Format(e.to_string()))?;
        let header = r.headers().map_err(|e| Error::Format(e.to_string()))?.iter().map(String::from).collect();
        let rows = r
            .records()
            .map(|rec| rec.map(|rec| rec.iter().map(String::from).collect()))
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| Error::Format(e.to_string()))?;
        Ok(Self { header, rows })
    }
}

// ---------------------------------------------------------------- manifest

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Versions {
    pub derham_ns: String,
    pub field_format: u32,
}

impl Default for Versions {
    fn default() -> Self {
        Self {
            derham_ns: env!("CARGO_PKG_VERSION").to_string(),
            field_format: FORMAT_VERSION,
        }
    }
}

/// Everything needed to interpret and rerun a command.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub command: String,
    pub config: RunConfig,
    pub versions: Versions,
    pub status: serde_json::Value,
    pub exit_code: i32,
    /// Wall-clock seconds per phase.
    pub timings: BTreeMap<String, f64>,
    pub outputs: Vec<String>,
    #[serde(default)]
    pub results: BTreeMap<String, serde_json::Value>,
}

impl Manifest {
    pub fn new(command: &str, config: RunConfig) -> Self {
        Self {
            command: command.to_string(),
            config,
            versions: Versions::default(),
            status: serde_json::Value::Null,
            exit_code: 0,
            timings: BTreeMap::new(),
            outputs: Vec::new(),
            results: BTreeMap::new(),
        }
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        let text = serde_json::to_string_pretty(self).map_err(|e| Error::Format(e.to_string()))?;
        write_atomic(path, text.as_bytes())
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        serde_json::from_str(&text).map_err(|e| Error::Format(e.to_string()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"{"problem": {"n": 2, "q": 1, "a": 1, "mu": 0.5, "T": 1.0, "nt": 5}}"#;

    #[test]
    fn minimal_config_gets_solver_and_output_defaults() {
        let c = RunConfig::parse(MINIMAL).unwrap();
        assert_eq!(c.solver, SolverParams::default());
        assert_eq!(c.output, OutputConfig::default());
        assert!(c.grid.is_none());
    }

    #[test]
    fn physical_fields_are_mandatory() {
        let e = RunConfig::parse(r#"{"problem": {"n": 2, "q": 1, "a": 1, "T": 1.0}}"#).unwrap_err();
        let msg = e.to_string();
        assert!(msg.contains("problem") && msg.contains("mu"), "{msg}");
    }

    #[test]
    fn unknown_fields_are_named() {
        let doc = r#"{"problem": {"n": 2, "q": 1, "a": 1, "mu": 1, "T": 1},
                     "solver": {"tol": 1e-9, "maxiter": 3}}"#;
        let msg = RunConfig::parse(doc).unwrap_err().to_string();
        assert!(msg.contains("solver") && msg.contains("maxiter") && msg.contains("line 2"), "{msg}");
    }

    #[test]
    fn config_round_trips() {
        let doc = r#"{"problem": {"n": 3, "q": 1, "a": 0, "mu": 1, "T": 0.5, "nt": 11,
                        "nonlinearity": {"name": "ps", "b": 0.5}},
                     "grid": {"N": 16, "L": 4.0},
                     "norms": {"lambda": 0.5, "delta": 1.0},
                     "radial": {"nr": 100, "R": 10, "gamma": [1, 2], "coeff_2kw": false},
                     "data": {"kind": "radial", "amplitude": 2.0, "profile": "gaussian"}}"#;
        let a = RunConfig::parse(doc).unwrap();
        let b = RunConfig::parse(&a.to_json().unwrap()).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.radial.as_ref().unwrap().gamma, vec![1.0, 2.0]);
        let single = RunConfig::parse(&doc.replace("[1, 2]", "0.5")).unwrap();
        assert_eq!(single.radial.unwrap().gamma, vec![0.5]);
    }

    #[test]
    fn inconsistent_values_are_rejected() {
        for (from, to, field) in [
            (r#""a": 1"#, r#""a": 2"#, "problem.a"),
            (r#""mu": 0.5"#, r#""mu": -1"#, "problem.mu"),
            (r#""q": 1"#, r#""q": 3"#, "problem.q"),
            (r#""nt": 5"#, r#""nt": 1"#, "problem.nt"),
        ] {
            let msg = RunConfig::parse(&MINIMAL.replace(from, to)).unwrap_err().to_string();
            assert!(msg.starts_with(&format!("config error: {field}")), "{msg}");
        }
    }

    #[test]
    fn nonlinearity_resolution() {
        let mut c = RunConfig::parse(MINIMAL).unwrap();
        c.problem.nonlinearity = Some(NonlinearityConfig {
            name: Some("zero".into()),
            b: None,
            tensor_file: None,
        });
        assert!(c.nonlinearity().unwrap().is_zero());
        c.problem.nonlinearity.as_mut().unwrap().name = Some("burgers".into());
        assert!(matches!(c.nonlinearity(), Err(Error::Config(_))));
    }

    #[test]
    fn field_file_round_trip_is_bit_exact() {
        let g = Grid::new(2, 8, 3.0).unwrap();
        let a = band_limited_form(&g, 1, 2, &mut Seeded::new(4));
        let b = a.scaled(-1.0 / 3.0);
        let file = FieldFile::from_forms(&[&a, &b], 0.25).unwrap();
        let back = FieldFile::from_bytes(&file.to_bytes()).unwrap();
        assert_eq!(back, file);
        assert_eq!(back.slice(1).unwrap(), b);
        assert_eq!(file.to_bytes().len(), 40 + 2 * 2 * 64 * 8);
    }

    #[test]
    fn corrupted_headers_are_typed_errors() {
        let g = Grid::new(2, 4, 1.0).unwrap();
        let bytes = FieldFile::from_forms(&[&GridForm::zeros(&g, 0)], 0.0).unwrap().to_bytes();
        let mut bad = bytes.clone();
        bad[0] = b'X';
        assert!(matches!(FieldFile::from_bytes(&bad), Err(Error::BadMagic { .. })));
        let mut bad = bytes.clone();
        bad[4] = 2;
        assert!(matches!(FieldFile::from_bytes(&bad), Err(Error::UnsupportedVersion { found: 2 })));
        assert!(matches!(FieldFile::from_bytes(&bytes[..bytes.len() - 8]), Err(Error::Format(_))));
    }

    #[test]
    fn csv_uses_seventeen_digits() {
        let mut t = Table::new(&["x", "y"]);
        t.push_reals(&[0.1, -1.0 / 3.0]);
        let text = t.to_csv().unwrap();
        assert_eq!(text, "x,y\n1.0000000000000001e-1,-3.3333333333333331e-1\n");
        assert_eq!(fmt_f64(0.1).parse::<f64>().unwrap(), 0.1);
    }

    #[test]
    fn atomic_write_leaves_no_temporaries() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("sub").join("a.csv");
        write_atomic(&path, b"one").unwrap();
        write_atomic(&path, b"two").unwrap();
        assert_eq!(std::fs::read(&path).unwrap(), b"two");
        assert_eq!(std::fs::read_dir(path.parent().unwrap()).unwrap().count(), 1);
    }

    #[test]
    fn manifest_config_is_loadable() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = RunConfig::parse(MINIMAL).unwrap();
        let path = dir.path().join("manifest.json");
        Manifest::new("solve", cfg.clone()).write(&path).unwrap();
        assert_eq!(RunConfig::load(&path).unwrap(), cfg);
    }

    #[test]
    fn taylor_green_data_is_divergence_free() {
        let g = Grid::new(2, 16, PI).unwrap();
        let u = DataConfig::TaylorGreen { amplitude: 1.0 }.build(&g, 1).unwrap();
        assert!(crate::exterior::d_star(&u).max_abs() < 1e-12);
        assert!(DataConfig::TaylorGreen { amplitude: 1.0 }.build(&g, 0).is_err());
    }
}
