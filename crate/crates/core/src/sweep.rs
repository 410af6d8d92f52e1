//! Adiabatic cyclic injection.
//!
//! The seed mode is moved along a [`SpherePath`] at constant arc-length speed
//! while the full LG-basis equations are integrated. The record certifies that
//! the intracavity fields track the instantaneous steady state and that the
//! idler follows the mirror image of the signal on the sphere.
//!
//! The seed is the parallel-transport (horizontal) lift of the path: between
//! vertices the state moves along the Hilbert-space geodesic, and each vertex
//! state is phase-matched to the previous one. This keeps the drive
//! continuous through the poles where the `(θ, φ)` chart is singular. The
//! geometric phase is not read off the integrated amplitudes; it is
//! attributed from the path geometry by [`relative_phase_after_cycle`].

use alloc::vec::Vec;
use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::Float;

use crate::dynamics::{check_step, rhs_lg_basis, rk4_step, FiveModeState, InjectionDrive, OpoParams};
use crate::geometry::{solid_angle, SpherePath};
use crate::mode::{mode_from_sphere, sphere_from_stokes, stokes_from_mode, ModeVector, SpherePoint, StokesVector};
use crate::steady::injected_steady;
use crate::{Error, Result};

/// Default `T·κ` above which a sweep counts as adiabatic.
pub const ADIABATIC_THRESHOLD: f64 = 100.0;

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSchedule {
    pub path: SpherePath,
    /// Cycle duration in units of `1/κ`.
    pub duration: f64,
    /// Number of recorded samples, endpoints included.
    pub samples: usize,
    pub seed_intensity: f64,
    pub params: OpoParams,
    /// Pump drive `|αp_in|`, taken real.
    pub pump: f64,
    /// Integrator step in physical time units.
    pub dt: f64,
    pub adiabatic_threshold: f64,
}

impl SweepSchedule {
    pub fn new(path: SpherePath, duration: f64, seed_intensity: f64, params: OpoParams, pump: f64) -> Self {
        Self {
            path,
            duration,
            samples: 401,
            seed_intensity,
            params,
            pump,
            dt: 0.05 / params.max_rate(),
            adiabatic_threshold: ADIABATIC_THRESHOLD,
        }
    }

    pub fn validate(&self) -> Result<()> {
        check_step(&self.params, self.dt)?;
        if self.samples < 2 {
            return Err(Error::InvalidParameter("a sweep needs at least 2 samples"));
        }
        if !(self.duration > 0.0 && self.duration.is_finite()) {
            return Err(Error::InvalidParameter("sweep duration must be positive"));
        }
        if !(self.seed_intensity > 0.0 && self.seed_intensity.is_finite()) {
            return Err(Error::InvalidParameter("sweep needs a positive seed intensity"));
        }
        if self.path.vertices.is_empty() {
            return Err(Error::DegeneratePath(0));
        }
        Ok(())
    }

    /// Cycle duration in physical time units.
    pub fn t_end(&self) -> f64 {
        self.duration / self.params.kappa
    }

    pub fn is_adiabatic(&self) -> bool {
        self.duration >= self.adiabatic_threshold
    }
}

/// Horizontal lift of a piecewise-geodesic path with constant-speed timing.
#[derive(Debug, Clone)]
struct LiftedPath {
    /// Unit vertex states, consecutive overlaps real and positive.
    states: Vec<ModeVector>,
    /// Hilbert-space angle `β` of each arc; the sphere arc is `2β`.
    betas: Vec<f64>,
    length: f64,
}

impl LiftedPath {
    fn new(path: &SpherePath) -> Result<Self> {
        let arcs = path.arcs();
        let first = mode_from_sphere(&path.vertices[0], 1.0);
        let mut states = Vec::with_capacity(arcs.len() + 1);
        let mut betas = Vec::with_capacity(arcs.len());
        states.push(first);
        for &(i, j) in &arcs {
            let prev = *states.last().expect("non-empty");
            let target = mode_from_sphere(&path.vertices[j], 1.0);
            let overlap = prev.inner(&target);
            if overlap.norm() < 1e-9 {
                return Err(Error::AmbiguousArc(i, j));
            }
            let next = target.with_phase(-overlap.arg());
            betas.push(prev.inner(&next).re.clamp(-1.0, 1.0).acos());
            states.push(next);
        }
        let length = betas.iter().map(|b| 2.0 * b).sum();
        Ok(Self { states, betas, length })
    }

    /// Unit seed mode at fraction `f ∈ [0, 1]` of the total arc length.
    fn at(&self, f: f64) -> ModeVector {
        if self.betas.is_empty() || self.length == 0.0 {
            return self.states[0];
        }
        let mut remaining = f.clamp(0.0, 1.0) * self.length;
        for (k, &beta) in self.betas.iter().enumerate() {
            let arc = 2.0 * beta;
            let last = k + 1 == self.betas.len();
            if remaining <= arc || last {
                return geodesic(&self.states[k], &self.states[k + 1], beta, (remaining / arc).min(1.0));
            }
            remaining -= arc;
        }
        unreachable!()
    }
}

fn geodesic(a: &ModeVector, b: &ModeVector, beta: f64, s: f64) -> ModeVector {
    if beta < 1e-12 || !s.is_finite() {
        return *a;
    }
    let wa = ((1.0 - s) * beta).sin() / beta.sin();
    let wb = (s * beta).sin() / beta.sin();
    ModeVector::new(a.c_plus * wa + b.c_plus * wb, a.c_minus * wa + b.c_minus * wb)
}

/// Full record of one sweep; all vectors have one entry per sample.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRecord {
    pub path: SpherePath,
    pub times: Vec<f64>,
    pub points: Vec<SpherePoint>,
    /// Unit seed modes in the lifted gauge.
    pub seeds: Vec<ModeVector>,
    pub states: Vec<FiveModeState>,
    pub signal_stokes: Vec<StokesVector>,
    pub idler_stokes: Vec<StokesVector>,
    pub steady_states: Vec<FiveModeState>,
    pub adiabaticity_error: f64,
    /// Largest deviation of the idler Stokes vector from the mirrored signal.
    pub mirror_error: f64,
    /// Largest deviation of the signal Stokes vector from the injected point.
    pub tracking_error: f64,
    pub closure_error: f64,
    pub adiabatic: bool,
}

impl SweepRecord {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }
}

fn relative_deviation(state: &FiveModeState, steady: &FiveModeState) -> f64 {
    (*state - *steady).norm() / steady.norm()
}

/// Integrates the driven equations around the path and records every sample.
pub fn run_sweep(schedule: &SweepSchedule) -> Result<SweepRecord> {
    schedule.validate()?;
    let params = &schedule.params;
    for v in &schedule.path.vertices {
        let sol = injected_steady(params, schedule.pump, schedule.seed_intensity, v)?;
        if !sol.stable || sol.root.clipped {
            return Err(Error::Unstable("pump root clipped at a path vertex"));
        }
    }
    let steady = injected_steady(params, schedule.pump, schedule.seed_intensity, &schedule.path.vertices[0])?;
    let lift = LiftedPath::new(&schedule.path)?;
    let t_end = schedule.t_end();
    let amp = schedule.seed_intensity.sqrt();
    let pump_in = Complex64::new(schedule.pump, 0.0);
    let seed_at = |t: f64| lift.at(t / t_end);
    let rhs = |t: f64, y: FiveModeState| rhs_lg_basis(&y, params, &InjectionDrive::new(pump_in, seed_at(t).scale(Complex64::new(amp, 0.0))));

    let n = schedule.samples;
    let mut record = SweepRecord {
        path: schedule.path.clone(),
        times: Vec::with_capacity(n),
        points: Vec::with_capacity(n),
        seeds: Vec::with_capacity(n),
        states: Vec::with_capacity(n),
        signal_stokes: Vec::with_capacity(n),
        idler_stokes: Vec::with_capacity(n),
        steady_states: Vec::with_capacity(n),
        adiabaticity_error: 0.0,
        mirror_error: 0.0,
        tracking_error: 0.0,
        closure_error: 0.0,
        adiabatic: schedule.is_adiabatic(),
    };

    let mut y = steady.lg_state_for_seed(&lift.states[0]);
    let mut t = 0.0;
    for j in 0..n {
        let t_target = t_end * j as f64 / (n - 1) as f64;
        let span = t_target - t;
        if span > 0.0 {
            let steps = (span / schedule.dt).ceil().max(1.0) as usize;
            let h = span / steps as f64;
            for k in 0..steps {
                y = rk4_step(y, t + k as f64 * h, h, rhs);
                if y.overflows() {
                    return Err(Error::Diverged { t: t + (k + 1) as f64 * h });
                }
            }
        }
        t = t_target;

        let seed = seed_at(t);
        let injected = stokes_from_mode(&seed)?;
        let signal = stokes_from_mode(&y.signal())?;
        let idler = stokes_from_mode(&y.idler())?;
        let target = steady.lg_state_for_seed(&seed);
        record.points.push(sphere_from_stokes(&StokesVector::from_array(normalize3(injected.to_array())))?);
        record.adiabaticity_error = record.adiabaticity_error.max(relative_deviation(&y, &target));
        record.mirror_error = record.mirror_error.max(idler.max_abs_diff(&signal.mirror()));
        record.tracking_error = record.tracking_error.max(signal.max_abs_diff(&injected));
        record.times.push(t);
        record.seeds.push(seed);
        record.states.push(y);
        record.signal_stokes.push(signal);
        record.idler_stokes.push(idler);
        record.steady_states.push(target);
    }
    record.closure_error = closure_error(&record);
    Ok(record)
}

fn normalize3(v: [f64; 3]) -> [f64; 3] {
    let n = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
    [v[0] / n, v[1] / n, v[2] / n]
}

/// Max over samples of `‖state − steady‖ / ‖steady‖`.
pub fn adiabaticity_error(record: &SweepRecord) -> f64 {
    record.states.iter().zip(&record.steady_states).map(|(s, t)| relative_deviation(s, t)).fold(0.0, f64::max)
}

/// Largest change of any amplitude magnitude between the first and last
/// sample, relative to the initial state norm.
pub fn closure_error(record: &SweepRecord) -> f64 {
    match (record.states.first(), record.states.last()) {
        (Some(first), Some(last)) => {
            let scale = first.norm();
            first
                .to_array()
                .iter()
                .zip(last.to_array().iter())
                .map(|(a, b)| (a.norm() - b.norm()).abs() / scale)
                .fold(0.0, f64::max)
        }
        _ => 0.0,
    }
}

/// Predicted signal–idler relative phase increment `γ_i − γ_s` after one cycle,
/// which equals the enclosed solid angle.
pub fn relative_phase_after_cycle(record: &SweepRecord) -> Result<f64> {
    solid_angle(&record.path)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mode::wrap_angle;
    use core::f64::consts::{FRAC_PI_2, PI};

    fn lune_schedule(duration: f64) -> SweepSchedule {
        SweepSchedule::new(SpherePath::lune(FRAC_PI_2).unwrap(), duration, 0.04, OpoParams::unity(), 0.5)
    }

    #[test]
    fn lift_is_continuous_and_closes_up_to_phase() {
        let lift = LiftedPath::new(&SpherePath::lune(FRAC_PI_2).unwrap()).unwrap();
        assert!((lift.length - (FRAC_PI_2 * 3.0)).abs() < 1e-12);
        let mut prev = lift.at(0.0);
        for k in 1..=2000 {
            let cur = lift.at(k as f64 / 2000.0);
            let d = (cur.c_plus - prev.c_plus).norm() + (cur.c_minus - prev.c_minus).norm();
            assert!(d < 0.01);
            assert!((cur.intensity() - 1.0).abs() < 1e-12);
            prev = cur;
        }
        let end = lift.at(1.0);
        let overlap = lift.states[0].inner(&end);
        assert!((overlap.norm() - 1.0).abs() < 1e-12);
        // holonomy of the lift in this orientation
        assert!(wrap_angle(overlap.arg() - PI / 4.0).abs() < 1e-12);
    }

    #[test]
    fn lift_traces_the_path() {
        let path = SpherePath::lune(PI).unwrap();
        let lift = LiftedPath::new(&path).unwrap();
        for (k, v) in path.vertices.iter().enumerate() {
            let s = stokes_from_mode(&lift.states[k]).unwrap();
            assert!(s.max_abs_diff(&v.to_stokes()) < 1e-12);
        }
    }

    #[test]
    fn constant_injection_is_stationary() {
        let pt = SpherePoint::new(1.1, 0.4).unwrap();
        let schedule = SweepSchedule::new(SpherePath::stationary(pt), 50.0, 0.04, OpoParams::unity(), 0.5);
        let rec = run_sweep(&schedule).unwrap();
        assert!(rec.adiabaticity_error < 1e-8, "{}", rec.adiabaticity_error);
        for s in &rec.signal_stokes {
            assert!(s.max_abs_diff(&pt.to_stokes()) < 1e-8);
        }
        assert!(!rec.adiabatic);
    }

    #[test]
    fn lune_sweep_tracks_mirror() {
        let rec = run_sweep(&lune_schedule(200.0)).unwrap();
        assert_eq!(rec.len(), 401);
        assert_eq!(rec.states.len(), rec.steady_states.len());
        assert!(rec.mirror_error < 10.0 * rec.adiabaticity_error);
        assert!(rec.mirror_error < 0.03, "{}", rec.mirror_error);
        assert!(rec.tracking_error < 5.0 * rec.adiabaticity_error);
        assert!(rec.closure_error < 10.0 * rec.adiabaticity_error);
        assert!((adiabaticity_error(&rec) - rec.adiabaticity_error).abs() < 1e-15);
        assert!((rec.times[400] - 200.0).abs() < 1e-12);
    }

    #[test]
    fn slower_sweep_is_more_adiabatic() {
        let fast = run_sweep(&lune_schedule(200.0)).unwrap().adiabaticity_error;
        let slow = run_sweep(&lune_schedule(2000.0)).unwrap().adiabaticity_error;
        let ratio = fast / slow;
        assert!(ratio > 7.0 && ratio < 13.0, "{ratio}");
    }

    #[test]
    fn mirror_error_vanishes_with_duration() {
        let rec = run_sweep(&lune_schedule(5000.0)).unwrap();
        assert!(rec.mirror_error < 1e-3, "{}", rec.mirror_error);
    }

    #[test]
    fn diabatic_limit() {
        let fast = run_sweep(&lune_schedule(1.0)).unwrap().adiabaticity_error;
        assert!(fast > 0.3, "{fast}");
    }

    #[test]
    fn predicted_phase() {
        let rec = run_sweep(&lune_schedule(100.0)).unwrap();
        assert!((relative_phase_after_cycle(&rec).unwrap() - FRAC_PI_2).abs() < 1e-12);
        let mut null = lune_schedule(100.0);
        null.path = SpherePath::null();
        assert!(relative_phase_after_cycle(&run_sweep(&null).unwrap()).unwrap().abs() < 1e-12);
        let mut open = lune_schedule(100.0);
        open.path.closed = false;
        assert_eq!(relative_phase_after_cycle(&run_sweep(&open).unwrap()), Err(Error::OpenPath));
    }

    #[test]
    fn invalid_schedules() {
        let mut s = lune_schedule(100.0);
        s.samples = 1;
        assert!(run_sweep(&s).is_err());
        let mut s = lune_schedule(100.0);
        s.seed_intensity = 0.0;
        assert!(run_sweep(&s).is_err());
        let mut s = lune_schedule(100.0);
        s.dt = 0.2;
        assert!(matches!(run_sweep(&s), Err(Error::StepTooLarge { .. })));
    }
}
