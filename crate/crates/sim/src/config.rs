//! Scenario configuration: JSON file, defaults and command-line overrides.

use std::f64::consts::FRAC_PI_2;
use std::fs;
use std::path::{Path, PathBuf};

use opo_core::dynamics::OpoParams;
use opo_core::geometry::SpherePath;
use opo_core::mode::{GridSpec, SpherePoint};
use serde::{Deserialize, Serialize};

use crate::error::{SimError, SimResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    Steady,
    FreeRun,
    Sweep,
    Interfere,
    Phase,
}

impl Mode {
    pub fn name(self) -> &'static str {
        match self {
            Mode::Steady => "steady",
            Mode::FreeRun => "free-run",
            Mode::Sweep => "sweep",
            Mode::Interfere => "interfere",
            Mode::Phase => "phase",
        }
    }
}

/// `relative` rates are given in units of κ and rescaled so that κ = 1.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Units {
    #[default]
    Absolute,
    Relative,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ParamsConfig {
    pub kappa_p: f64,
    pub kappa: f64,
    pub delta_p: f64,
    pub delta: f64,
    pub chi: f64,
    pub eta_p: f64,
    pub eta_s: f64,
}

impl Default for ParamsConfig {
    fn default() -> Self {
        let p = OpoParams::unity();
        Self {
            kappa_p: p.kappa_p,
            kappa: p.kappa,
            delta_p: p.delta_p,
            delta: p.delta,
            chi: p.chi,
            eta_p: p.eta_p,
            eta_s: p.eta_s,
        }
    }
}

impl ParamsConfig {
    pub fn to_params(&self, units: Units) -> OpoParams {
        let s = match units {
            Units::Absolute => 1.0,
            Units::Relative => 1.0 / self.kappa,
        };
        OpoParams {
            kappa_p: self.kappa_p * s,
            kappa: self.kappa * s,
            delta_p: self.delta_p * s,
            delta: self.delta * s,
            chi: self.chi * s,
            eta_p: self.eta_p * s,
            eta_s: self.eta_s * s,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GridConfig {
    pub n: usize,
    pub half_width: f64,
    pub waist: f64,
}

impl Default for GridConfig {
    fn default() -> Self {
        Self { n: 256, half_width: 3.0, waist: 1.0 }
    }
}

/// Inclusive linear range `min..=max` with `steps` points.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Range {
    pub min: f64,
    pub max: f64,
    pub steps: usize,
}

impl Range {
    pub fn single(v: f64) -> Self {
        Self { min: v, max: v, steps: 1 }
    }

    pub fn values(&self) -> Vec<f64> {
        if self.steps <= 1 {
            return vec![self.min];
        }
        (0..self.steps).map(|k| self.min + (self.max - self.min) * k as f64 / (self.steps - 1) as f64).collect()
    }

    /// Parses `MIN:MAX:STEPS` or a single value.
    pub fn parse(s: &str) -> Result<Self, String> {
        let parts: Vec<&str> = s.split(':').collect();
        let num = |t: &str| t.trim().parse::<f64>().map_err(|_| format!("'{t}' is not a number"));
        match parts.as_slice() {
            [v] => Ok(Self::single(num(v)?)),
            [lo, hi, n] => Ok(Self {
                min: num(lo)?,
                max: num(hi)?,
                steps: n.trim().parse().map_err(|_| format!("'{n}' is not a step count"))?,
            }),
            _ => Err(format!("expected MIN:MAX:STEPS or a single value, got '{s}'")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ScenarioConfig {
    pub mode: Option<Mode>,
    /// Base name of every output file.
    pub name: Option<String>,
    pub units: Units,
    pub params: ParamsConfig,
    /// Pump drive amplitude `|αp_in|`.
    pub pump: f64,
    pub seed_intensity: f64,
    /// Injection point for `steady`.
    pub theta: f64,
    pub phi: f64,
    /// Optional scans for `steady` and `free-run`.
    pub pump_range: Option<Range>,
    pub seed_range: Option<Range>,
    /// Free-running family member.
    pub a_fraction: f64,
    pub delta_theta: f64,
    /// Path preset (`lune:DPHI`, `octant`, `equator`, `null`).
    pub path: String,
    /// CSV file of `theta,phi` vertices; overrides `path`.
    pub path_file: Option<PathBuf>,
    pub path_closed: bool,
    pub grid: GridConfig,
    /// Integrator step in (rescaled) time units.
    pub dt: f64,
    /// Run length in units of 1/κ.
    pub duration: f64,
    pub samples: usize,
    /// Also integrate and export a time trace (`steady`, `free-run`).
    pub trajectory: bool,
    /// Export interference maps as CSV next to the PGM frames.
    pub map_csv: bool,
    pub jobs: usize,
    #[serde(skip_serializing)]
    pub output_dir: PathBuf,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            mode: None,
            name: None,
            units: Units::Absolute,
            params: ParamsConfig::default(),
            pump: 0.5,
            seed_intensity: 0.04,
            theta: FRAC_PI_2,
            phi: 0.0,
            pump_range: None,
            seed_range: None,
            a_fraction: 0.5,
            delta_theta: 0.0,
            path: format!("lune:{}", FRAC_PI_2),
            path_file: None,
            path_closed: true,
            grid: GridConfig::default(),
            dt: 0.01,
            duration: 200.0,
            samples: 401,
            trajectory: false,
            map_csv: false,
            jobs: 1,
            output_dir: PathBuf::from("out"),
        }
    }
}

impl ScenarioConfig {
    pub fn from_json(text: &str) -> SimResult<Self> {
        serde_json::from_str(text).map_err(|e| SimError::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> SimResult<Self> {
        let text = fs::read_to_string(path).map_err(|source| SimError::Read { path: path.to_path_buf(), source })?;
        Self::from_json(&text)
    }

    pub fn mode(&self) -> SimResult<Mode> {
        self.mode.ok_or_else(|| SimError::Config("no mode selected".into()))
    }

    pub fn scenario_name(&self) -> String {
        match (&self.name, self.mode) {
            (Some(n), _) => n.clone(),
            (None, Some(m)) => m.name().to_string(),
            (None, None) => "scenario".into(),
        }
    }

    pub fn opo_params(&self) -> OpoParams {
        self.params.to_params(self.units)
    }

    pub fn grid_spec(&self) -> SimResult<GridSpec> {
        Ok(GridSpec::new(self.grid.n, self.grid.half_width, self.grid.waist)?)
    }

    pub fn seed_point(&self) -> SimResult<SpherePoint> {
        Ok(SpherePoint::new(self.theta, self.phi)?)
    }

    pub fn sphere_path(&self) -> SimResult<SpherePath> {
        match &self.path_file {
            Some(file) => read_path_file(file, self.path_closed),
            None => Ok(SpherePath::preset(&self.path)?),
        }
    }

    /// Checks the parts every mode relies on.
    pub fn validate(&self) -> SimResult<()> {
        self.mode()?;
        if self.params.kappa <= 0.0 {
            return Err(SimError::Config("kappa must be positive".into()));
        }
        self.opo_params().validate()?;
        let finite = [self.pump, self.seed_intensity, self.theta, self.phi, self.a_fraction, self.delta_theta];
        if finite.iter().any(|v| !v.is_finite()) {
            return Err(SimError::Config("drive and mode settings must be finite".into()));
        }
        if self.pump < 0.0 || self.seed_intensity < 0.0 {
            return Err(SimError::Config("pump and seed_intensity must be non-negative".into()));
        }
        if !(self.dt > 0.0) || !(self.duration > 0.0) {
            return Err(SimError::Config("dt and duration must be positive".into()));
        }
        if self.samples < 2 {
            return Err(SimError::Config("samples must be at least 2".into()));
        }
        if self.jobs == 0 {
            return Err(SimError::Config("jobs must be at least 1".into()));
        }
        for r in [self.pump_range, self.seed_range].iter().flatten() {
            if r.steps == 0 || !r.min.is_finite() || !r.max.is_finite() || r.min < 0.0 || r.max < 0.0 {
                return Err(SimError::Config("ranges need non-negative finite bounds and steps >= 1".into()));
            }
        }
        if let Some(file) = &self.path_file {
            if !file.is_file() {
                return Err(SimError::Config(format!("path file {} does not exist", file.display())));
            }
        }
        let name = self.scenario_name();
        if name.is_empty() || name.contains(['/', '\\']) {
            return Err(SimError::Config("scenario name must be a plain file stem".into()));
        }
        Ok(())
    }

    /// Pretty JSON of the resolved configuration (output directory omitted).
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }
}

#[derive(Debug, Deserialize)]
struct VertexRow {
    theta: f64,
    phi: f64,
}

/// Reads `theta,phi` rows (radians, with header) into a path.
pub fn read_path_file(file: &Path, closed: bool) -> SimResult<SpherePath> {
    let mut reader = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_path(file)
        .map_err(|e| SimError::Config(format!("{}: {e}", file.display())))?;
    let mut vertices = Vec::new();
    for row in reader.deserialize::<VertexRow>() {
        let row = row.map_err(|e| SimError::Config(format!("{}: {e}", file.display())))?;
        vertices.push(SpherePoint::new(row.theta, row.phi)?);
    }
    if vertices.is_empty() {
        return Err(SimError::Config(format!("{} holds no vertices", file.display())));
    }
    Ok(SpherePath { vertices, closed })
}
