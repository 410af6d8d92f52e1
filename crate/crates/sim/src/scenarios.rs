//! One runner per subcommand. Each writes its files into the output directory
//! and returns a short report for the terminal.

use std::f64::consts::{FRAC_PI_2, PI};
use std::path::PathBuf;
use std::thread;

use num_complex::Complex64;
use opo_core::dynamics::{integrate, FiveModeState, InjectionDrive, OpoParams, Trajectory};
use opo_core::geometry::{berry_connection_phase, conjugation_pair, solid_angle};
use opo_core::interference::render_cycle;
use opo_core::mode::{stokes_from_mode, wrap_angle, ModeVector};
use opo_core::steady::{
    free_running_steady, free_running_stokes, injected_steady, injection_drive, lg_residual, quintic_real_roots,
    threshold, QuinticCoeffs, SteadySolution,
};
use opo_core::sweep::{run_sweep, SweepSchedule};
use serde_json::{json, Value};

use crate::config::{Mode, ScenarioConfig};
use crate::error::SimResult;
use crate::output::{map_table, num, output_path, write_bytes, write_csv, write_json, write_pgm, Table};

/// Segments per arc for the overlap-based phase cross-check.
const BERRY_SEGMENTS: usize = 10_000;

#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    /// Human-readable lines for stdout.
    pub lines: Vec<String>,
    pub files: Vec<PathBuf>,
    pub summary: Value,
}

/// Validates the configuration, writes the sidecar config and runs the mode.
pub fn run(config: &ScenarioConfig) -> SimResult<Report> {
    config.validate()?;
    let mode = config.mode()?;
    let name = config.scenario_name();
    let sidecar = output_path(&config.output_dir, &name, ".config.json");
    let mut text = config.to_json();
    text.push('\n');
    write_bytes(&sidecar, text.as_bytes())?;
    let mut report = match mode {
        Mode::Steady => steady(config, &name)?,
        Mode::FreeRun => free_run(config, &name)?,
        Mode::Sweep => sweep(config, &name)?,
        Mode::Interfere => interfere(config, &name)?,
        Mode::Phase => phase(config, &name)?,
    };
    report.files.insert(0, sidecar);
    Ok(report)
}

fn opt_num(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}

fn stokes_cells(v: &ModeVector) -> Vec<String> {
    match stokes_from_mode(v) {
        Ok(s) => s.to_array().iter().map(|&x| num(x)).collect(),
        Err(_) => vec![String::new(); 3],
    }
}

const TRAJECTORY_COLUMNS: [&str; 20] = [
    "t", "re_ap", "im_ap", "re_as_plus", "im_as_plus", "re_as_minus", "im_as_minus", "re_ai_plus", "im_ai_plus",
    "re_ai_minus", "im_ai_minus", "pump_intensity", "signal_intensity", "idler_intensity", "s_p1", "s_p2", "s_p3",
    "i_p1", "i_p2", "i_p3",
];

fn trajectory_table(traj: &Trajectory) -> Table {
    let mut t = Table::new(&TRAJECTORY_COLUMNS);
    for (time, s) in traj.times.iter().zip(&traj.states) {
        let mut row = vec![num(*time)];
        for z in s.to_array() {
            row.push(num(z.re));
            row.push(num(z.im));
        }
        row.push(num(s.alpha_p.norm_sqr()));
        row.push(num(s.signal().intensity()));
        row.push(num(s.idler().intensity()));
        row.extend(stokes_cells(&s.signal()));
        row.extend(stokes_cells(&s.idler()));
        t.push(row);
    }
    t
}

fn run_trajectory(config: &ScenarioConfig, params: &OpoParams, state0: FiveModeState, drive: InjectionDrive) -> SimResult<Trajectory> {
    let t_end = config.duration / params.kappa;
    let steps = (t_end / config.dt).ceil() as usize;
    let stride = steps.div_ceil(config.samples - 1).max(1);
    Ok(integrate(state0, params, |_| drive, t_end, config.dt, stride)?)
}

/// Evaluates `f` over `items` on `jobs` threads, preserving order.
fn parallel_map<T: Sync, R: Send>(items: &[T], jobs: usize, f: impl Fn(&T) -> R + Sync) -> Vec<R> {
    if jobs <= 1 || items.len() < 2 {
        return items.iter().map(&f).collect();
    }
    let chunk = items.len().div_ceil(jobs);
    thread::scope(|scope| {
        let handles: Vec<_> = items.chunks(chunk).map(|part| scope.spawn(|| part.iter().map(&f).collect::<Vec<R>>())).collect();
        handles.into_iter().flat_map(|h| h.join().expect("worker panicked")).collect()
    })
}

struct SteadyRow {
    pump: f64,
    seed: f64,
    quintic: QuinticCoeffs,
    roots: Vec<f64>,
    solution: SteadySolution,
}

fn steady(config: &ScenarioConfig, name: &str) -> SimResult<Report> {
    let params = config.opo_params();
    let pt = config.seed_point()?;
    let pumps = config.pump_range.map(|r| r.values()).unwrap_or_else(|| vec![config.pump]);
    let seeds = config.seed_range.map(|r| r.values()).unwrap_or_else(|| vec![config.seed_intensity]);
    let grid: Vec<(f64, f64)> = pumps.iter().flat_map(|&p| seeds.iter().map(move |&s| (p, s))).collect();

    let results = parallel_map(&grid, config.jobs, |&(pump, seed)| -> SimResult<SteadyRow> {
        let solution = injected_steady(&params, pump, seed, &pt)?;
        let quintic = QuinticCoeffs::from_drive(&params, pump, seed)?;
        Ok(SteadyRow { pump, seed, roots: quintic_real_roots(&quintic), quintic, solution })
    });

    let mut table = Table::new(&[
        "pump", "seed_intensity", "a", "b", "roots", "candidates", "clipped", "pump_amplitude", "signal_intensity",
        "idler_intensity", "s_p1", "s_p2", "s_p3", "i_p1", "i_p2", "i_p3", "residual",
    ]);
    let mut max_residual: f64 = 0.0;
    let mut max_candidates = 0;
    let mut last = None;
    for r in results {
        let r = r?;
        let sol = &r.solution;
        let lg = sol.lg_state();
        let roots: Vec<String> = r.roots.iter().map(|&x| num(x)).collect();
        let mut row = vec![
            num(r.pump),
            num(r.seed),
            num(r.quintic.a),
            num(r.quintic.b),
            roots.join(" "),
            sol.root.candidates.to_string(),
            sol.root.clipped.to_string(),
            num(sol.alpha_p.norm()),
            num(sol.signal_intensity()),
            num(sol.idler_intensity()),
        ];
        row.extend(stokes_cells(&lg.signal()));
        row.extend(stokes_cells(&lg.idler()));
        row.push(num(sol.residual));
        table.push(row);
        max_residual = max_residual.max(sol.residual);
        max_candidates = max_candidates.max(sol.root.candidates);
        last = Some(r);
    }
    let last = last.expect("at least one scan point");

    let csv = output_path(&config.output_dir, name, ".csv");
    write_csv(&csv, &table)?;
    let mut files = vec![csv];
    let mut summary = json!({
        "mode": "steady",
        "points": table.rows.len(),
        "max_residual": max_residual,
        "max_candidates": max_candidates,
        "injection": {"theta": pt.theta, "phi": pt.phi},
    });
    let mut lines = vec![format!("steady: {} point(s), max residual {:.3e}", table.rows.len(), max_residual)];
    if table.rows.len() == 1 {
        let sol = &last.solution;
        lines.push(format!(
            "|ap| = {:.6}  Is = {:.6}  Ii = {:.6}  roots = [{}]",
            sol.alpha_p.norm(),
            sol.signal_intensity(),
            sol.idler_intensity(),
            table.rows[0][4]
        ));
    }

    if config.trajectory {
        let drive = injection_drive(last.pump, last.seed, &pt);
        let traj = run_trajectory(config, &params, FiveModeState::default(), drive)?;
        let path = output_path(&config.output_dir, name, "_trajectory.csv");
        write_csv(&path, &trajectory_table(&traj))?;
        files.push(path);
        let fin = traj.final_state();
        let target = last.solution.lg_state();
        let deviation = (fin - target).norm() / target.norm();
        summary["trajectory"] = json!({
            "t_end": traj.final_time(),
            "final_pump_intensity": fin.alpha_p.norm_sqr(),
            "relative_deviation_from_steady": deviation,
        });
        lines.push(format!("trajectory: |ap|^2 = {:.8} at t = {}, deviation {:.3e}", fin.alpha_p.norm_sqr(), traj.final_time(), deviation));
    }

    let json_path = output_path(&config.output_dir, name, ".json");
    write_json(&json_path, &summary)?;
    files.push(json_path);
    Ok(Report { lines, files, summary })
}

fn free_run(config: &ScenarioConfig, name: &str) -> SimResult<Report> {
    let params = config.opo_params();
    let pumps = config.pump_range.map(|r| r.values()).unwrap_or_else(|| vec![config.pump]);
    let mut table = Table::new(&[
        "pump", "threshold", "above_threshold", "pump_intensity", "total_intensity", "amp_a", "amp_b", "delta_theta",
        "s_p1", "s_p2", "s_p3", "i_p1", "i_p2", "i_p3", "residual",
    ]);
    let mut last = None;
    for &pump in &pumps {
        let (family, state) = free_running_steady(&params, pump, config.a_fraction, config.delta_theta)?;
        let residual = lg_residual(&state, &params, pump, &ModeVector::default());
        let mut row = vec![
            num(pump),
            num(threshold(&params)),
            family.above_threshold.to_string(),
            num(family.i_p),
            num(family.i_total),
            num(family.a),
            num(family.b),
            num(family.delta_theta),
        ];
        match free_running_stokes(&family) {
            Some((s, i)) => row.extend(s.to_array().iter().chain(i.to_array().iter()).map(|&x| num(x))),
            None => row.extend(vec![String::new(); 6]),
        }
        row.push(num(residual));
        table.push(row);
        last = Some((pump, family, state));
    }
    let (pump, family, _) = last.expect("at least one pump value");

    let csv = output_path(&config.output_dir, name, ".csv");
    write_csv(&csv, &table)?;
    let mut files = vec![csv];
    let a = params.eta_p * pump / params.kappa_p;
    let printed = params.chi / params.kappa_p * (a - params.clip()).max(0.0);
    let mut summary = json!({
        "mode": "free-run",
        "threshold": threshold(&params),
        "clip_intensity": params.clip() * params.clip(),
        "pump": pump,
        "above_threshold": family.above_threshold,
        "total_intensity": family.i_total,
        "total_intensity_printed_prefactor": printed,
    });
    let mut lines = vec![format!(
        "free-run: threshold {:.6}, |ap|^2 = {:.6}, Is = Ii = {:.6}",
        threshold(&params),
        family.i_p,
        family.i_total
    )];

    if config.trajectory {
        // weak LG+ signal noise, no injection
        let state0 = FiveModeState { alpha_s_plus: Complex64::new(1e-6, 0.0), ..Default::default() };
        let traj = run_trajectory(config, &params, state0, InjectionDrive::pump_only(pump))?;
        let path = output_path(&config.output_dir, name, "_trajectory.csv");
        write_csv(&path, &trajectory_table(&traj))?;
        files.push(path);
        let fin = traj.final_state();
        let ode = fin.signal().intensity();
        let derived_error = (ode - family.i_total).abs();
        let printed_error = (ode - printed).abs();
        summary["trajectory"] = json!({
            "t_end": traj.final_time(),
            "final_pump_intensity": fin.alpha_p.norm_sqr(),
            "signal_intensity": ode,
            "idler_intensity": fin.idler().intensity(),
            "derived_formula_error": derived_error,
            "printed_formula_error": printed_error,
            "selected_formula": if derived_error <= printed_error { "(kappa_p/chi)(a - kappa/chi)" } else { "(chi/kappa_p)(a - kappa/chi)" },
        });
        lines.push(format!("trajectory: Is = {:.8} (derived {:.8}, printed {:.8})", ode, family.i_total, printed));
    }

    let json_path = output_path(&config.output_dir, name, ".json");
    write_json(&json_path, &summary)?;
    files.push(json_path);
    Ok(Report { lines, files, summary })
}

fn sweep(config: &ScenarioConfig, name: &str) -> SimResult<Report> {
    let params = config.opo_params();
    let path = config.sphere_path()?;
    let schedule = SweepSchedule {
        samples: config.samples,
        dt: config.dt,
        ..SweepSchedule::new(path.clone(), config.duration, config.seed_intensity, params, config.pump)
    };
    let rec = run_sweep(&schedule)?;

    let mut table = Table::new(&[
        "t", "theta", "phi", "pump_intensity", "signal_intensity", "idler_intensity", "s_p1", "s_p2", "s_p3", "i_p1",
        "i_p2", "i_p3", "relative_deviation",
    ]);
    for k in 0..rec.len() {
        let s = &rec.states[k];
        let target = &rec.steady_states[k];
        let mut row = vec![
            num(rec.times[k]),
            num(rec.points[k].theta),
            num(rec.points[k].phi),
            num(s.alpha_p.norm_sqr()),
            num(s.signal().intensity()),
            num(s.idler().intensity()),
        ];
        row.extend(rec.signal_stokes[k].to_array().iter().chain(rec.idler_stokes[k].to_array().iter()).map(|&x| num(x)));
        row.push(num((*s - *target).norm() / target.norm()));
        table.push(row);
    }
    let predicted = if path.closed { Some(solid_angle(&path)?) } else { None };
    let summary = json!({
        "mode": "sweep",
        "path": path.describe(),
        "duration": config.duration,
        "samples": rec.len(),
        "adiabatic": rec.adiabatic,
        "adiabaticity_error": rec.adiabaticity_error,
        "mirror_error": rec.mirror_error,
        "tracking_error": rec.tracking_error,
        "closure_error": rec.closure_error,
        "predicted_relative_phase": predicted,
    });
    let csv = output_path(&config.output_dir, name, ".csv");
    write_csv(&csv, &table)?;
    let json_path = output_path(&config.output_dir, name, ".json");
    write_json(&json_path, &summary)?;
    let lines = vec![
        format!("sweep: {} samples over T = {}/kappa ({})", rec.len(), config.duration, if rec.adiabatic { "adiabatic" } else { "not adiabatic" }),
        format!(
            "adiabaticity error {:.3e}, mirror error {:.3e}, closure error {:.3e}, predicted phase {}",
            rec.adiabaticity_error,
            rec.mirror_error,
            rec.closure_error,
            opt_num(predicted)
        ),
    ];
    Ok(Report { lines, files: vec![csv, json_path], summary })
}

/// Rotation expected from a solid angle for a charge ±1 petal pattern, in `(-π/2, π/2]`.
pub fn expected_rotation(omega: f64) -> f64 {
    let r = 0.5 * wrap_angle(omega);
    if r <= -FRAC_PI_2 {
        r + PI
    } else {
        r
    }
}

fn interfere(config: &ScenarioConfig, name: &str) -> SimResult<Report> {
    let params = config.opo_params();
    let path = config.sphere_path()?;
    let grid = config.grid_spec()?;
    let cycle = render_cycle(&params, config.pump, config.seed_intensity, &path, &grid)?;
    let omega = solid_angle(&path)?;
    let mut files = Vec::new();
    for (frame, map) in [("before", &cycle.before), ("after", &cycle.after)] {
        let pgm = output_path(&config.output_dir, name, &format!("_{frame}.pgm"));
        write_pgm(&pgm, map)?;
        files.push(pgm);
        if config.map_csv {
            let csv = output_path(&config.output_dir, name, &format!("_{frame}.csv"));
            write_csv(&csv, &map_table(map))?;
            files.push(csv);
        }
    }
    let summary = json!({
        "mode": "interfere",
        "path": path.describe(),
        "solid_angle": omega,
        "gamma_signal": cycle.phases.signal.raw,
        "gamma_idler": cycle.phases.idler.raw,
        "rotation": cycle.rotation,
        "expected_rotation": expected_rotation(omega),
        "grid": {"n": grid.n, "half_width": grid.half_width, "waist": grid.waist},
    });
    let json_path = output_path(&config.output_dir, name, ".json");
    write_json(&json_path, &summary)?;
    files.push(json_path);
    let lines = vec![format!(
        "interfere: rotation {:.6} rad (expected {:.6} mod pi from solid angle {:.6})",
        cycle.rotation,
        expected_rotation(omega),
        omega
    )];
    Ok(Report { lines, files, summary })
}

fn phase(config: &ScenarioConfig, name: &str) -> SimResult<Report> {
    let path = config.sphere_path()?;
    let omega = solid_angle(&path)?;
    let pair = conjugation_pair(&path)?;
    let berry = berry_connection_phase(&path, BERRY_SEGMENTS)?;
    let mut table = Table::new(&[
        "omega", "gamma_s", "gamma_i", "gamma_s_wrapped", "gamma_i_wrapped", "relative_phase", "berry_phase",
    ]);
    table.push(vec![
        num(omega),
        num(pair.signal.raw),
        num(pair.idler.raw),
        num(pair.signal.wrapped),
        num(pair.idler.wrapped),
        num(pair.relative),
        num(berry),
    ]);
    let summary = json!({
        "mode": "phase",
        "path": path.describe(),
        "solid_angle": omega,
        "gamma_signal": pair.signal.raw,
        "gamma_idler": pair.idler.raw,
        "relative_phase": pair.relative,
        "berry_phase": berry,
        "berry_segments_per_arc": BERRY_SEGMENTS,
    });
    let csv = output_path(&config.output_dir, name, ".csv");
    write_csv(&csv, &table)?;
    let json_path = output_path(&config.output_dir, name, ".json");
    write_json(&json_path, &summary)?;
    let lines = vec![format!("Ω = {:.4}  γ_s = {:+.4}  γ_i = {:+.4}", omega, pair.signal.raw, pair.idler.raw)];
    Ok(Report { lines, files: vec![csv, json_path], summary })
}
