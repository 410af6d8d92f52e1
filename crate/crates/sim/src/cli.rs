use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::config::{Mode, Range, ScenarioConfig, Units};
use crate::error::SimResult;

#[derive(Debug, Parser)]
#[command(name = "opo-sim", version, about = "Injected OPO simulator in the first-order transverse-mode subspace")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub overrides: Overrides,
}

#[derive(Debug, Clone, Copy, Subcommand)]
pub enum Command {
    /// Injected steady state: quintic roots and the stable solution (optionally scanned).
    Steady,
    /// Free-running steady-state family: clipping, intensity and Stokes parameters.
    FreeRun,
    /// Adiabatic cyclic injection along a sphere path.
    Sweep,
    /// Signal-idler interference frames before and after a cycle.
    Interfere,
    /// Solid angle and conjugate geometric phases of a path.
    Phase,
}

impl Command {
    pub fn mode(self) -> Mode {
        match self {
            Command::Steady => Mode::Steady,
            Command::FreeRun => Mode::FreeRun,
            Command::Sweep => Mode::Sweep,
            Command::Interfere => Mode::Interfere,
            Command::Phase => Mode::Phase,
        }
    }
}

/// Flags override values from `--config`, which override built-in defaults.
#[derive(Debug, Default, Args)]
pub struct Overrides {
    /// JSON scenario file.
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, short, global = true, value_name = "DIR")]
    pub out: Option<PathBuf>,
    /// Base name for output files (defaults to the subcommand name).
    #[arg(long, global = true)]
    pub name: Option<String>,
    #[arg(long, global = true, value_enum)]
    pub units: Option<UnitsArg>,
    /// Worker threads for steady-state scans.
    #[arg(long, global = true)]
    pub jobs: Option<usize>,

    #[arg(long, global = true)]
    pub kappa: Option<f64>,
    #[arg(long, global = true)]
    pub kappa_p: Option<f64>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub delta: Option<f64>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub delta_p: Option<f64>,
    #[arg(long, global = true)]
    pub chi: Option<f64>,
    #[arg(long, global = true)]
    pub eta_p: Option<f64>,
    #[arg(long, global = true)]
    pub eta_s: Option<f64>,

    /// Pump drive amplitude.
    #[arg(long, global = true)]
    pub pump: Option<f64>,
    /// Seed intensity.
    #[arg(long, global = true)]
    pub seed_intensity: Option<f64>,
    /// Pump scan, MIN:MAX:STEPS.
    #[arg(long, global = true)]
    pub pump_range: Option<String>,
    /// Seed intensity scan, MIN:MAX:STEPS.
    #[arg(long, global = true)]
    pub seed_range: Option<String>,
    /// Injection polar angle (radians).
    #[arg(long, global = true)]
    pub theta: Option<f64>,
    /// Injection azimuth (radians).
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub phi: Option<f64>,
    #[arg(long, global = true)]
    pub a_fraction: Option<f64>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub delta_theta: Option<f64>,

    /// Path preset: lune:DPHI, octant, equator or null.
    #[arg(long, global = true)]
    pub path: Option<String>,
    /// CSV file with theta,phi vertex rows.
    #[arg(long, global = true, value_name = "FILE")]
    pub path_file: Option<PathBuf>,
    /// Treat the path file as open.
    #[arg(long, global = true)]
    pub open_path: bool,

    #[arg(long, global = true)]
    pub dt: Option<f64>,
    /// Duration in units of 1/kappa.
    #[arg(long, global = true)]
    pub duration: Option<f64>,
    #[arg(long, global = true)]
    pub samples: Option<usize>,
    /// Also integrate and export a time trace.
    #[arg(long, global = true)]
    pub trajectory: bool,

    #[arg(long, global = true)]
    pub grid_n: Option<usize>,
    #[arg(long, global = true)]
    pub half_width: Option<f64>,
    #[arg(long, global = true)]
    pub waist: Option<f64>,
    /// Also export interference maps as CSV.
    #[arg(long, global = true)]
    pub map_csv: bool,
}

#[derive(Debug, Clone, Copy, clap::ValueEnum)]
pub enum UnitsArg {
    Relative,
    Absolute,
}

fn set<T>(slot: &mut T, value: Option<T>) {
    if let Some(v) = value {
        *slot = v;
    }
}

fn range(text: &Option<String>) -> SimResult<Option<Range>> {
    text.as_deref().map(Range::parse).transpose().map_err(crate::error::SimError::Config)
}

impl Cli {
    /// Merges defaults, the config file and flags into one scenario.
    pub fn resolve(&self) -> SimResult<ScenarioConfig> {
        let o = &self.overrides;
        let mut c = match &o.config {
            Some(path) => ScenarioConfig::load(path)?,
            None => ScenarioConfig::default(),
        };
        c.mode = Some(self.command.mode());
        if o.name.is_some() {
            c.name = o.name.clone();
        }
        set(&mut c.output_dir, o.out.clone());
        if let Some(u) = o.units {
            c.units = match u {
                UnitsArg::Relative => Units::Relative,
                UnitsArg::Absolute => Units::Absolute,
            };
        }
        set(&mut c.jobs, o.jobs);
        let p = &mut c.params;
        set(&mut p.kappa, o.kappa);
        set(&mut p.kappa_p, o.kappa_p);
        set(&mut p.delta, o.delta);
        set(&mut p.delta_p, o.delta_p);
        set(&mut p.chi, o.chi);
        set(&mut p.eta_p, o.eta_p);
        set(&mut p.eta_s, o.eta_s);
        set(&mut c.pump, o.pump);
        set(&mut c.seed_intensity, o.seed_intensity);
        if let Some(r) = range(&o.pump_range)? {
            c.pump_range = Some(r);
        }
        if let Some(r) = range(&o.seed_range)? {
            c.seed_range = Some(r);
        }
        set(&mut c.theta, o.theta);
        set(&mut c.phi, o.phi);
        set(&mut c.a_fraction, o.a_fraction);
        set(&mut c.delta_theta, o.delta_theta);
        if let Some(path) = &o.path {
            c.path = path.clone();
            c.path_file = None;
        }
        if o.path_file.is_some() {
            c.path_file = o.path_file.clone();
        }
        if o.open_path {
            c.path_closed = false;
        }
        set(&mut c.dt, o.dt);
        set(&mut c.duration, o.duration);
        set(&mut c.samples, o.samples);
        c.trajectory |= o.trajectory;
        c.map_csv |= o.map_csv;
        set(&mut c.grid.n, o.grid_n);
        set(&mut c.grid.half_width, o.half_width);
        set(&mut c.grid.waist, o.waist);
        Ok(c)
    }
}
