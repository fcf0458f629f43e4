//! Run configuration: a TOML file plus `--set key=value` overrides.

use std::path::{Path, PathBuf};

use muskat_core::solver::SolveMethod;
use muskat_core::{
    Exec, FluidParams, Grid, InterfaceState, Profile, SolverConfig, StepperConfig, Window,
};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{CliError, CliResult};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Units {
    /// Inputs already scaled; recorded as given.
    Nondimensional,
    /// SI inputs; the equations are homogeneous so no rescaling is applied.
    Si,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FluidSection {
    pub rho: [f64; 3],
    pub mu: [f64; 3],
    pub permeability: f64,
    pub gravity: f64,
    pub c_inf: f64,
    /// Accept densities that are not increasing downward.
    pub allow_unstable: bool,
}

impl Default for FluidSection {
    fn default() -> Self {
        Self {
            rho: [1.0, 2.0, 3.0],
            mu: [1.0, 1.0, 1.0],
            permeability: 1.0,
            gravity: 1.0,
            c_inf: 1.0,
            allow_unstable: false,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum WindowKind {
    Decaying,
    Periodic,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GridSection {
    pub half_length: f64,
    pub n: usize,
    pub window: WindowKind,
    pub decay_tol: f64,
}

impl Default for GridSection {
    fn default() -> Self {
        Self {
            half_length: 20.0,
            n: 256,
            window: WindowKind::Decaying,
            decay_tol: 1e-10,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum Component {
    /// `amplitude exp(-((x - center)/width)^2)`.
    GaussianBump { amplitude: f64, width: f64, #[serde(default)] center: f64 },
    /// `amplitude cos(pi mode (x - center) / L)`, optionally times a Gaussian envelope.
    CosineMode {
        amplitude: f64,
        mode: u32,
        #[serde(default)]
        center: f64,
        #[serde(default)]
        envelope: Option<f64>,
    },
    /// One value per line; `#` starts a comment.
    Samples { file: String },
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct InitialSection {
    pub f: Vec<Component>,
    pub h: Vec<Component>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct StepperSection {
    pub t_end: f64,
    pub rtol: f64,
    pub atol: f64,
    pub cfl_safety: f64,
    pub dt_init: f64,
    pub dt_min: f64,
    pub dt_max: f64,
    pub monitor_every: u64,
    pub gap_min: Option<f64>,
    pub override_rt: bool,
    pub monitor_mode: i64,
}

impl Default for StepperSection {
    fn default() -> Self {
        let d = StepperConfig::default();
        Self {
            t_end: d.t_end,
            rtol: d.rtol,
            atol: d.atol,
            cfl_safety: d.cfl_safety,
            dt_init: d.dt_init,
            dt_min: d.dt_min,
            dt_max: d.dt_max,
            monitor_every: d.monitor_every,
            gap_min: d.gap_min,
            override_rt: d.override_rt,
            monitor_mode: d.monitor_mode,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MethodKind {
    Lu,
    Gmres,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolverSection {
    pub method: MethodKind,
    pub gmres_restart: usize,
    pub gmres_tol: f64,
    pub gmres_max_iter: usize,
    pub cond_max: f64,
    pub residual_tol: f64,
    pub parallel: bool,
}

impl Default for SolverSection {
    fn default() -> Self {
        let d = SolverConfig::default();
        Self {
            method: MethodKind::Lu,
            gmres_restart: 60,
            gmres_tol: 1e-13,
            gmres_max_iter: 600,
            cond_max: d.cond_max,
            residual_tol: d.residual_tol,
            parallel: true,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputSection {
    pub dir: String,
    pub records: String,
    pub resume_records: String,
    pub snapshot_dir: String,
    /// Accepted steps between snapshots; 0 keeps only the first and last.
    pub snapshot_every: u64,
    pub metadata: String,
    pub dispersion: String,
    pub field: String,
}

impl Default for OutputSection {
    fn default() -> Self {
        Self {
            dir: "out".into(),
            records: "records.csv".into(),
            resume_records: "resume_records.csv".into(),
            snapshot_dir: "snapshots".into(),
            snapshot_every: 10,
            metadata: "metadata.json".into(),
            dispersion: "dispersion.csv".into(),
            field: "field.csv".into(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DispersionSection {
    pub k_min: f64,
    pub k_max: f64,
    pub count: usize,
}

impl Default for DispersionSection {
    fn default() -> Self {
        Self {
            k_min: 0.0,
            k_max: 5.0,
            count: 51,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FieldSection {
    pub x_min: f64,
    pub x_max: f64,
    pub nx: usize,
    pub y_min: f64,
    pub y_max: f64,
    pub ny: usize,
    /// Finite-difference step of the Darcy residual column.
    pub fd_step: f64,
}

impl Default for FieldSection {
    fn default() -> Self {
        Self {
            x_min: -3.0,
            x_max: 3.0,
            nx: 7,
            y_min: -2.0,
            y_max: 3.0,
            ny: 11,
            fd_step: 2e-2,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DensityKind {
    Random,
    Zero,
    Solve,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct VerifySection {
    pub trials: usize,
    pub symbol_modes: u32,
    pub density: DensityKind,
    pub probes: usize,
}

impl Default for VerifySection {
    fn default() -> Self {
        Self {
            trials: 4,
            symbol_modes: 32,
            density: DensityKind::Random,
            probes: 20,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub units: Units,
    pub seed: u64,
    pub fluid: FluidSection,
    pub grid: GridSection,
    pub initial: InitialSection,
    pub stepper: StepperSection,
    pub solver: SolverSection,
    pub output: OutputSection,
    pub dispersion: DispersionSection,
    pub field: FieldSection,
    pub verify: VerifySection,
    /// Directory that relative input paths are resolved against.
    #[serde(skip)]
    pub base_dir: PathBuf,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            units: Units::Nondimensional,
            seed: 0,
            fluid: FluidSection::default(),
            grid: GridSection::default(),
            initial: InitialSection::default(),
            stepper: StepperSection::default(),
            solver: SolverSection::default(),
            output: OutputSection::default(),
            dispersion: DispersionSection::default(),
            field: FieldSection::default(),
            verify: VerifySection::default(),
            base_dir: PathBuf::from("."),
        }
    }
}

/// Splits `a.b.c=value` and parses the value as a TOML literal, falling
/// back to a bare string.
fn apply_override(root: &mut toml::Table, item: &str) -> CliResult<()> {
    let (key, raw) = item
        .split_once('=')
        .ok_or_else(|| CliError::config(item, "override must look like key=value"))?;
    let key = key.trim();
    let raw = raw.trim();
    let value = match toml::from_str::<toml::Table>(&format!("v = {raw}")) {
        Ok(mut t) => t.remove("v").expect("parsed key"),
        Err(_) => toml::Value::String(raw.to_string()),
    };
    let parts: Vec<&str> = key.split('.').collect();
    let mut table = root;
    for p in &parts[..parts.len() - 1] {
        let entry = table
            .entry(p.to_string())
            .or_insert_with(|| toml::Value::Table(toml::Table::new()));
        table = entry
            .as_table_mut()
            .ok_or_else(|| CliError::config(key, format!("`{p}` is not a table")))?;
    }
    table.insert(parts[parts.len() - 1].to_string(), value);
    Ok(())
}

impl RunConfig {
    /// Parses TOML text and applies overrides.
    pub fn from_str_with(text: &str, overrides: &[String], base_dir: &Path) -> CliResult<Self> {
        let mut table: toml::Table = toml::from_str(text).map_err(|e| CliError::config("<file>", e.message()))?;
        for o in overrides {
            apply_override(&mut table, o)?;
        }
        let mut cfg: RunConfig = RunConfig::deserialize(toml::Value::Table(table)).map_err(|e| {
            CliError::config("<file>", e.to_string().trim().to_string())
        })?;
        cfg.base_dir = base_dir.to_path_buf();
        cfg.validate()?;
        Ok(cfg)
    }

    /// Loads `path`, or the defaults when `path` is `None`.
    pub fn load(path: Option<&Path>, overrides: &[String]) -> CliResult<Self> {
        match path {
            Some(p) => {
                let text = std::fs::read_to_string(p).map_err(|e| CliError::config(p.display().to_string(), e.to_string()))?;
                let base = p.parent().map(Path::to_path_buf).unwrap_or_else(|| PathBuf::from("."));
                Self::from_str_with(&text, overrides, &base)
            }
            None => Self::from_str_with("", overrides, Path::new(".")),
        }
    }

    /// Canonical TOML rendering used for the digest.
    pub fn canonical(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn digest(&self) -> [u8; 32] {
        Sha256::digest(self.canonical().as_bytes()).into()
    }

    pub fn digest_hex(&self) -> String {
        hex(&self.digest())
    }

    pub fn params(&self) -> CliResult<FluidParams> {
        let f = &self.fluid;
        let r = if f.allow_unstable {
            FluidParams::allowing_unstable(f.rho, f.mu, f.permeability, f.gravity, f.c_inf)
        } else {
            FluidParams::new(f.rho, f.mu, f.permeability, f.gravity, f.c_inf)
        };
        r.map_err(|e| CliError::config("fluid", e.to_string()))
    }

    pub fn grid(&self) -> CliResult<Grid> {
        let g = &self.grid;
        let window = match g.window {
            WindowKind::Decaying => Window::Decaying { tol: g.decay_tol },
            WindowKind::Periodic => Window::Periodic,
        };
        Grid::with_window(g.half_length, g.n, window).map_err(|e| CliError::config("grid", e.to_string()))
    }

    pub fn solver_config(&self) -> SolverConfig {
        let s = &self.solver;
        SolverConfig {
            exec: if s.parallel { Exec::default() } else { Exec::Sequential },
            method: match s.method {
                MethodKind::Lu => SolveMethod::Lu,
                MethodKind::Gmres => SolveMethod::Gmres {
                    restart: s.gmres_restart,
                    tol: s.gmres_tol,
                    max_iter: s.gmres_max_iter,
                },
            },
            cond_max: s.cond_max,
            residual_tol: s.residual_tol,
        }
    }

    pub fn stepper_config(&self) -> StepperConfig {
        let s = &self.stepper;
        StepperConfig {
            t_end: s.t_end,
            rtol: s.rtol,
            atol: s.atol,
            cfl_safety: s.cfl_safety,
            dt_init: s.dt_init,
            dt_min: s.dt_min,
            dt_max: s.dt_max,
            monitor_every: s.monitor_every,
            gap_min: s.gap_min,
            override_rt: s.override_rt,
            monitor_mode: s.monitor_mode,
            solver: self.solver_config(),
        }
    }

    fn component_values(&self, grid: &Grid, comps: &[Component], which: &str) -> CliResult<Vec<f64>> {
        let nodes = grid.nodes();
        let l = grid.half_length();
        let mut out = vec![0.0; grid.len()];
        for (idx, c) in comps.iter().enumerate() {
            let field = format!("initial.{which}[{idx}]");
            match c {
                Component::GaussianBump { amplitude, width, center } => {
                    if !(*width > 0.0) {
                        return Err(CliError::config(format!("{field}.width"), "must be positive"));
                    }
                    for (o, x) in out.iter_mut().zip(&nodes) {
                        let s = (x - center) / width;
                        *o += amplitude * (-s * s).exp();
                    }
                }
                Component::CosineMode { amplitude, mode, center, envelope } => {
                    if let Some(w) = envelope {
                        if !(*w > 0.0) {
                            return Err(CliError::config(format!("{field}.envelope"), "must be positive"));
                        }
                    }
                    let k = std::f64::consts::PI * f64::from(*mode) / l;
                    for (o, x) in out.iter_mut().zip(&nodes) {
                        let env = envelope.map_or(1.0, |w| (-(x / w) * (x / w)).exp());
                        *o += amplitude * env * (k * (x - center)).cos();
                    }
                }
                Component::Samples { file } => {
                    let path = self.base_dir.join(file);
                    let text = std::fs::read_to_string(&path)
                        .map_err(|e| CliError::config(format!("{field}.file"), format!("{}: {e}", path.display())))?;
                    let vals: Vec<f64> = text
                        .lines()
                        .map(|l| l.split('#').next().unwrap_or("").trim())
                        .filter(|l| !l.is_empty())
                        .map(|l| l.parse::<f64>())
                        .collect::<Result<_, _>>()
                        .map_err(|e| CliError::config(format!("{field}.file"), e.to_string()))?;
                    if vals.len() != grid.len() {
                        return Err(CliError::config(
                            format!("{field}.file"),
                            format!("{} samples but grid.n = {}", vals.len(), grid.len()),
                        ));
                    }
                    for (o, v) in out.iter_mut().zip(vals) {
                        *o += v;
                    }
                }
            }
        }
        Ok(out)
    }

    /// Builds and checks the initial interfaces.
    pub fn initial_state(&self) -> CliResult<InterfaceState> {
        let g = self.grid()?;
        let params = self.params()?;
        let f = Profile::new(g, self.component_values(&g, &self.initial.f, "f")?)
            .map_err(|e| CliError::config("initial.f", e.to_string()))?;
        let h = Profile::new(g, self.component_values(&g, &self.initial.h, "h")?)
            .map_err(|e| CliError::config("initial.h", e.to_string()))?;
        for (name, p) in [("initial.f", &f), ("initial.h", &h)] {
            if !p.is_decayed() {
                return Err(CliError::config(
                    name,
                    format!(
                        "profile is not decayed at the window edge (max {:e} over the outer 10%, tolerance {:e})",
                        p.edge_max(),
                        self.grid.decay_tol
                    ),
                ));
            }
        }
        InterfaceState::new(f, h, params).map_err(|e| match e {
            muskat_core::Error::InterfaceCollision { gap } => CliError::config(
                "initial",
                format!("interfaces touch or cross: min(c_inf + f - h) = {gap:e}"),
            ),
            other => CliError::config("initial", other.to_string()),
        })
    }

    /// Checks every section; the first problem is reported with its key.
    pub fn validate(&self) -> CliResult<()> {
        self.grid()?;
        self.params()?;
        self.stepper_config()
            .validate()
            .map_err(|e| CliError::config("stepper", e.to_string()))?;
        if self.output.dir.is_empty() {
            return Err(CliError::config("output.dir", "must not be empty"));
        }
        let d = &self.dispersion;
        if !(d.k_min.is_finite() && d.k_max.is_finite() && d.k_min <= d.k_max) {
            return Err(CliError::config("dispersion", "need finite k_min <= k_max"));
        }
        if d.count == 0 || (d.count == 1 && d.k_min != d.k_max) {
            return Err(CliError::config("dispersion.count", "need count >= 1, and k_min = k_max when count = 1"));
        }
        let fs = &self.field;
        if fs.nx == 0 || fs.ny == 0 || !(fs.x_min <= fs.x_max && fs.y_min <= fs.y_max) {
            return Err(CliError::config("field", "need nx, ny >= 1 and ordered ranges"));
        }
        if !(fs.fd_step > 0.0) {
            return Err(CliError::config("field.fd_step", "must be positive"));
        }
        if self.solver.method == MethodKind::Gmres && self.solver.gmres_restart == 0 {
            return Err(CliError::config("solver.gmres_restart", "must be >= 1"));
        }
        self.initial_state()?;
        Ok(())
    }

    pub fn out_path(&self, name: &str) -> PathBuf {
        Path::new(&self.output.dir).join(name)
    }
}

pub fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}
