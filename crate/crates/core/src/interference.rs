//! Transverse field synthesis, signal–idler interference and rotation
//! estimation of the resulting petal pattern.
//!
//! Maps are row-major: pixel `(ix, iy)` sits at `values[iy * n + ix]` with
//! physical coordinates `(grid.coord(ix), grid.coord(iy))`.

use core::f64::consts::PI;

use alloc::vec;
use alloc::vec::Vec;
use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::Float;

use crate::dynamics::OpoParams;
use crate::geometry::{conjugation_pair, ConjugatePhases, SpherePath};
use crate::mode::{lg_field, mode_from_sphere, Charge, GridSpec, ModeVector};
use crate::steady::injected_steady;
use crate::{Error, Result};

/// Azimuthal bins used by [`pattern_rotation`].
pub const AZIMUTH_BINS: usize = 720;

#[derive(Debug, Clone, PartialEq)]
pub struct FieldMap {
    pub grid: GridSpec,
    pub values: Vec<Complex64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct IntensityMap {
    pub grid: GridSpec,
    pub values: Vec<f64>,
}

impl FieldMap {
    pub fn intensity(&self) -> IntensityMap {
        IntensityMap { grid: self.grid, values: self.values.iter().map(|z| z.norm_sqr()).collect() }
    }
}

impl IntensityMap {
    pub fn get(&self, ix: usize, iy: usize) -> f64 {
        self.values[iy * self.grid.n + ix]
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(0.0, f64::max)
    }

    /// Integrated power, `Σ I · Δx²`.
    pub fn power(&self) -> f64 {
        let px = self.grid.pixel_size();
        self.values.iter().sum::<f64>() * px * px
    }

    /// Bilinear interpolation at a physical point; zero outside the grid.
    pub fn sample(&self, x: f64, y: f64) -> f64 {
        let n = self.grid.n;
        let fx = self.grid.index_of(x);
        let fy = self.grid.index_of(y);
        if fx < 0.0 || fy < 0.0 || fx > (n - 1) as f64 || fy > (n - 1) as f64 {
            return 0.0;
        }
        let ix = (fx.floor() as usize).min(n - 2);
        let iy = (fy.floor() as usize).min(n - 2);
        let tx = fx - ix as f64;
        let ty = fy - iy as f64;
        let v00 = self.get(ix, iy);
        let v10 = self.get(ix + 1, iy);
        let v01 = self.get(ix, iy + 1);
        let v11 = self.get(ix + 1, iy + 1);
        (1.0 - ty) * ((1.0 - tx) * v00 + tx * v10) + ty * ((1.0 - tx) * v01 + tx * v11)
    }
}

/// `e^{i·extra_phase}(c₊ψ₊ + c₋ψ₋)` sampled on the grid.
pub fn synthesize_field(v: &ModeVector, extra_phase: f64, grid: &GridSpec) -> FieldMap {
    let n = grid.n;
    let global = Complex64::from_polar(1.0, extra_phase);
    let (cp, cm) = (v.c_plus * global, v.c_minus * global);
    let mut values = Vec::with_capacity(n * n);
    for iy in 0..n {
        let y = grid.coord(iy);
        for ix in 0..n {
            let x = grid.coord(ix);
            values.push(cp * lg_field(Charge::Plus, x, y, grid) + cm * lg_field(Charge::Minus, x, y, grid));
        }
    }
    FieldMap { grid: *grid, values }
}

/// Pixel-wise `|E_s + E_i|²`.
pub fn mutual_interference(signal: &FieldMap, idler: &FieldMap) -> Result<IntensityMap> {
    if signal.grid != idler.grid || signal.values.len() != idler.values.len() {
        return Err(Error::GridMismatch);
    }
    Ok(IntensityMap {
        grid: signal.grid,
        values: signal.values.iter().zip(&idler.values).map(|(a, b)| (a + b).norm_sqr()).collect(),
    })
}

/// Radius whose annulus has the largest mean intensity.
fn ring_radius(maps: &[&IntensityMap]) -> f64 {
    let grid = maps[0].grid;
    let n = grid.n;
    let dr = grid.pixel_size();
    let bins = (grid.extent() / dr).floor() as usize;
    let mut sums = vec![0.0; bins];
    let mut counts = vec![0usize; bins];
    for iy in 0..n {
        let y = grid.coord(iy);
        for ix in 0..n {
            let x = grid.coord(ix);
            let k = ((x * x + y * y).sqrt() / dr) as usize;
            if k < bins {
                sums[k] += maps.iter().map(|m| m.get(ix, iy)).sum::<f64>();
                counts[k] += 1;
            }
        }
    }
    let best = (0..bins)
        .filter(|&k| counts[k] > 0)
        .map(|k| (k, sums[k] / counts[k] as f64))
        .fold((0, f64::NEG_INFINITY), |b, c| if c.1 > b.1 { c } else { b })
        .0;
    (best as f64 + 0.5) * dr
}

fn azimuthal_profile(map: &IntensityMap, radius: f64) -> Vec<f64> {
    (0..AZIMUTH_BINS)
        .map(|k| {
            let az = 2.0 * PI * k as f64 / AZIMUTH_BINS as f64;
            map.sample(radius * az.cos(), radius * az.sin())
        })
        .collect()
}

/// Harmonic with the largest Fourier magnitude (DC excluded).
fn dominant_harmonic(profile: &[f64]) -> usize {
    let n = profile.len();
    let mut best = (1, 0.0);
    for m in 1..=n / 2 {
        let step = 2.0 * PI * m as f64 / n as f64;
        let (mut re, mut im) = (0.0, 0.0);
        for (k, &v) in profile.iter().enumerate() {
            let (s, c) = (step * k as f64).sin_cos();
            re += v * c;
            im -= v * s;
        }
        let mag = re * re + im * im;
        if mag > best.1 {
            best = (m, mag);
        }
    }
    best.0
}

/// Mean-free profile and its mean.
fn centred(profile: &[f64]) -> (Vec<f64>, f64) {
    let mean = profile.iter().sum::<f64>() / profile.len() as f64;
    (profile.iter().map(|v| v - mean).collect(), mean)
}

/// Rotation angle carrying `before` onto `after`, in `(-π/m, π/m]` where `m`
/// is the azimuthal order of the pattern.
///
/// Both maps are sampled on the ring of maximal radial mean intensity. The
/// shift maximizing the circular cross-correlation is refined by a parabola
/// through the peak and reduced modulo the pattern period `2π/m`.
pub fn pattern_rotation(before: &IntensityMap, after: &IntensityMap) -> Result<f64> {
    if before.grid != after.grid || before.values.len() != after.values.len() {
        return Err(Error::GridMismatch);
    }
    let radius = ring_radius(&[before, after]);
    let pb = azimuthal_profile(before, radius);
    let pa = azimuthal_profile(after, radius);
    let (cb, mb) = centred(&pb);
    let (ca, ma) = centred(&pa);
    if !(mb > 0.0 && ma > 0.0) {
        return Err(Error::NoFringes);
    }
    let n = AZIMUTH_BINS;
    // normalized by the mean levels, so the spread is of order visibility²
    let corr: Vec<f64> = (0..n)
        .map(|s| (0..n).map(|k| cb[k] * ca[(k + s) % n]).sum::<f64>() / (n as f64 * mb * ma))
        .collect();
    let (lo, hi) = corr.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &c| (lo.min(c), hi.max(c)));
    if hi - lo < 1e-6 {
        return Err(Error::NoFringes);
    }
    let peak = (0..n).fold(0, |b, s| if corr[s] > corr[b] { s } else { b });
    let (ym, y0, yp) = (corr[(peak + n - 1) % n], corr[peak], corr[(peak + 1) % n]);
    let curvature = ym - 2.0 * y0 + yp;
    let offset = if curvature < 0.0 { (0.5 * (ym - yp) / curvature).clamp(-0.5, 0.5) } else { 0.0 };
    let shift = (peak as f64 + offset) * 2.0 * PI / n as f64;

    let m = dominant_harmonic(&pb) as f64;
    let period = 2.0 * PI / m;
    let mut r = shift - period * (shift / period).round();
    if r <= -0.5 * period {
        r += period;
    }
    Ok(r)
}

/// Frames and phases of one rendered cycle.
#[derive(Debug, Clone, PartialEq)]
pub struct CycleRender {
    pub before: IntensityMap,
    pub after: IntensityMap,
    pub rotation: f64,
    pub phases: ConjugatePhases,
    pub signal: ModeVector,
    pub idler: ModeVector,
}

/// Renders the interference pattern at the start of a closed cycle and after
/// it, with the conjugate geometric phases applied to signal and idler.
pub fn render_cycle(params: &OpoParams, pump: f64, seed_intensity: f64, path: &SpherePath, grid: &GridSpec) -> Result<CycleRender> {
    let phases = conjugation_pair(path)?;
    let start = path.vertices[0];
    let sol = injected_steady(params, pump, seed_intensity, &start)?;
    if !sol.stable {
        return Err(Error::Unstable("pump root clipped at the cycle start"));
    }
    let unit = mode_from_sphere(&start, 1.0);
    let signal = unit.scale(sol.alpha_s);
    let idler = unit.mirror_conjugate().scale(sol.alpha_i);
    let before = mutual_interference(&synthesize_field(&signal, 0.0, grid), &synthesize_field(&idler, 0.0, grid))?;
    let after = mutual_interference(
        &synthesize_field(&signal, phases.signal.raw, grid),
        &synthesize_field(&idler, phases.idler.raw, grid),
    )?;
    let rotation = pattern_rotation(&before, &after)?;
    Ok(CycleRender { before, after, rotation, phases, signal, idler })
}
