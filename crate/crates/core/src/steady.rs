//! Stationary operating points at resonance.
//!
//! Injected operation reduces to three amplitudes in the injection-aligned
//! basis. Eliminating the signal and idler leaves a quintic for the pump
//! modulus `x = |αp|`:
//!
//! ```text
//! b² x + (x - a)(x - κ/χ)²(x + κ/χ)² = 0,   a = ηp|αp_in|/κp,   b = ηs κ √I_in / (χ √(κ κp))
//! ```
//!
//! On `(0, κ/χ)` the left side is strictly increasing in `x`, so for `b > 0`
//! there is exactly one root below clipping and it decreases as `b` grows.

use alloc::vec::Vec;
use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::Float;

use crate::dynamics::{from_rotated_basis, rhs_lg_basis, rhs_rotated, to_rotated_basis, FiveModeState, InjectionDrive, OpoParams, RotatedState};
use crate::mode::{mode_from_sphere, ModeVector, SpherePoint, StokesVector};
use crate::poly;
use crate::{Error, Result};

/// Relative residual accepted for a polished quintic root.
pub const ROOT_RESIDUAL: f64 = 1e-10;

/// Parameters of the pump quintic, in field units.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuinticCoeffs {
    pub a: f64,
    pub b: f64,
    pub clip: f64,
}

impl QuinticCoeffs {
    pub fn new(a: f64, b: f64, clip: f64) -> Result<Self> {
        if !(a >= 0.0 && b >= 0.0 && a.is_finite() && b.is_finite()) {
            return Err(Error::InvalidParameter("quintic coefficients a and b must be non-negative"));
        }
        if !(clip > 0.0 && clip.is_finite()) {
            return Err(Error::InvalidParameter("clipping amplitude must be positive"));
        }
        Ok(Self { a, b, clip })
    }

    /// Coefficients for a pump drive `|αp_in|` and seed intensity `I_in`.
    pub fn from_drive(params: &OpoParams, pump: f64, seed_intensity: f64) -> Result<Self> {
        params.validate()?;
        if !(seed_intensity >= 0.0) || !(pump >= 0.0) {
            return Err(Error::InvalidParameter("pump amplitude and seed intensity must be non-negative"));
        }
        let a = params.eta_p * pump / params.kappa_p;
        let b = params.eta_s * params.kappa * seed_intensity.sqrt() / (params.chi * (params.kappa * params.kappa_p).sqrt());
        Self::new(a, b, params.clip())
    }

    /// Monomial coefficients, constant term first.
    pub fn monomials(&self) -> [f64; 6] {
        let (a, b, c) = (self.a, self.b, self.clip);
        let c2 = c * c;
        let c4 = c2 * c2;
        [-a * c4, c4 + b * b, 2.0 * a * c2, -2.0 * c2, -a, 1.0]
    }

    /// Factored form of the polynomial, independent of [`monomials`](Self::monomials).
    pub fn eval(&self, x: f64) -> f64 {
        let (a, b, c) = (self.a, self.b, self.clip);
        b * b * x + (x - a) * (x - c) * (x - c) * (x + c) * (x + c)
    }
}

/// All non-negative real roots, ascending, with multiplicity.
pub fn quintic_real_roots(q: &QuinticCoeffs) -> Vec<f64> {
    let coeffs = q.monomials();
    let floor = -1e-12 * q.clip.max(q.a).max(1.0);
    poly::real_roots(&coeffs).into_iter().filter(|&x| x >= floor).map(|x| x.max(0.0)).collect()
}

/// Residual of a root relative to the natural evaluation scale.
pub fn root_residual(q: &QuinticCoeffs, x: f64) -> f64 {
    let coeffs = q.monomials();
    poly::eval(&coeffs, x).abs() / poly::eval_scale(&coeffs, x).max(1.0)
}

/// Pump modulus chosen among the quintic roots.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StableRoot {
    pub value: f64,
    /// Free-running clipping: no seed and pump above threshold, `value = κ/χ`.
    pub clipped: bool,
    /// Number of roots strictly below clipping that were candidates.
    pub candidates: usize,
}

/// Largest root strictly below `clip`; for `b = 0` above threshold the
/// clipping value itself, flagged.
pub fn select_stable(roots: &[f64], q: &QuinticCoeffs) -> Result<StableRoot> {
    // Without a seed the roots are {a, clip, clip}; the double root may be
    // polished a few ulps off `clip`, hence the band.
    let band = if q.b == 0.0 { 1e-6 * q.clip } else { 0.0 };
    let below: Vec<f64> = roots.iter().copied().filter(|&x| x < q.clip - band).collect();
    if q.b == 0.0 && q.a >= q.clip - band {
        return Ok(StableRoot { value: q.clip, clipped: true, candidates: below.len() });
    }
    match below.iter().copied().fold(None, |best: Option<f64>, x| Some(best.map_or(x, |b| b.max(x)))) {
        Some(value) => Ok(StableRoot { value, clipped: false, candidates: below.len() }),
        None => Err(Error::NoStableRoot),
    }
}

/// Injected steady state in the injection-aligned basis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SteadySolution {
    pub alpha_p: Complex64,
    pub alpha_s: Complex64,
    pub alpha_i: Complex64,
    pub stable: bool,
    pub basis_point: SpherePoint,
    pub root: StableRoot,
    pub quintic: QuinticCoeffs,
    /// Norm of the rotated-basis right-hand side at this state.
    pub residual: f64,
}

impl SteadySolution {
    pub fn rotated_state(&self) -> RotatedState {
        RotatedState { alpha_p: self.alpha_p, alpha_s: self.alpha_s, alpha_i: self.alpha_i, ..Default::default() }
    }

    /// LG-basis amplitudes in the gauge of [`mode_from_sphere`].
    pub fn lg_state(&self) -> FiveModeState {
        from_rotated_basis(&self.rotated_state(), self.basis_point.theta, self.basis_point.phi)
    }

    /// LG-basis amplitudes for a unit seed mode `unit_seed` carrying any
    /// global phase. The signal follows the seed, the idler its mirror conjugate.
    pub fn lg_state_for_seed(&self, unit_seed: &ModeVector) -> FiveModeState {
        FiveModeState::from_modes(self.alpha_p, unit_seed.scale(self.alpha_s), unit_seed.mirror_conjugate().scale(self.alpha_i))
    }

    pub fn signal_intensity(&self) -> f64 {
        self.alpha_s.norm_sqr()
    }

    pub fn idler_intensity(&self) -> f64 {
        self.alpha_i.norm_sqr()
    }
}

fn require_resonant(params: &OpoParams) -> Result<()> {
    params.validate()?;
    if !params.is_resonant() {
        return Err(Error::Detuned);
    }
    Ok(())
}

/// Stationary solution for pump drive `pump = |αp_in|` (taken real) and a seed
/// of intensity `seed_intensity` at `pt`.
///
/// A zero seed falls back to [`free_running_steady`] with the oscillation
/// placed in the mode at `pt`.
pub fn injected_steady(params: &OpoParams, pump: f64, seed_intensity: f64, pt: &SpherePoint) -> Result<SteadySolution> {
    require_resonant(params)?;
    let q = QuinticCoeffs::from_drive(params, pump, seed_intensity)?;
    let pump_in = Complex64::new(pump, 0.0);

    if seed_intensity == 0.0 {
        let half = 0.5 * pt.theta;
        let (_, state) = free_running_steady(params, pump, half.cos().powi(2), -pt.phi)?;
        let r = to_rotated_basis(&state, pt.theta, pt.phi);
        let root = select_stable(&quintic_real_roots(&q), &q)?;
        let residual = rhs_rotated(&r, params, pump_in, 0.0).norm();
        return Ok(SteadySolution {
            alpha_p: r.alpha_p,
            alpha_s: r.alpha_s,
            alpha_i: r.alpha_i,
            stable: !root.clipped,
            basis_point: *pt,
            root,
            quintic: q,
            residual,
        });
    }

    let root = select_stable(&quintic_real_roots(&q), &q)?;
    let x = root.value;
    let (kappa, chi, eta_s) = (params.kappa, params.chi, params.eta_s);
    let amp = seed_intensity.sqrt();
    let denom = kappa * kappa - chi * chi * x * x;
    let alpha_p = Complex64::new(x, 0.0);
    let alpha_s = Complex64::new(eta_s * kappa * amp / denom, 0.0);
    let alpha_i = Complex64::new(-eta_s * chi * amp * x / denom, 0.0);
    let r = RotatedState { alpha_p, alpha_s, alpha_i, ..Default::default() };
    let residual = rhs_rotated(&r, params, pump_in, amp).norm();
    Ok(SteadySolution {
        alpha_p,
        alpha_s,
        alpha_i,
        stable: x < params.clip(),
        basis_point: *pt,
        root,
        quintic: q,
        residual,
    })
}

/// One member of the degenerate free-running steady-state family.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FreeRunFamily {
    /// Intracavity pump intensity `|αp|²`.
    pub i_p: f64,
    /// Common signal and idler intensity `A² + B²`.
    pub i_total: f64,
    /// `|αs₊| = |αi₋|`.
    pub a: f64,
    /// `|αs₋| = |αi₊|`.
    pub b: f64,
    /// `θs₊ - θs₋`.
    pub delta_theta: f64,
    pub above_threshold: bool,
}

/// Pump input amplitude at the oscillation threshold, `κp κ / (ηp χ)`.
pub fn threshold(params: &OpoParams) -> f64 {
    params.kappa_p * params.kappa / (params.eta_p * params.chi)
}

/// Free-running steady state for a real pump drive.
///
/// Above threshold the pump clips at `κ/χ` and `A² + B² = (κp/χ)(a - κ/χ)`.
/// The split `A² = a_fraction·(A² + B²)` and the phase difference are free;
/// signal phases are `±delta_theta/2` and the idler is `αi∓ = -αs±*`.
pub fn free_running_steady(params: &OpoParams, pump: f64, a_fraction: f64, delta_theta: f64) -> Result<(FreeRunFamily, FiveModeState)> {
    require_resonant(params)?;
    if !(0.0..=1.0).contains(&a_fraction) {
        return Err(Error::InvalidParameter("a_fraction must lie in [0, 1]"));
    }
    if !(pump >= 0.0) || !delta_theta.is_finite() {
        return Err(Error::InvalidParameter("pump must be non-negative and delta_theta finite"));
    }
    let a = params.eta_p * pump / params.kappa_p;
    let clip = params.clip();
    if a <= clip {
        let family = FreeRunFamily { i_p: a * a, i_total: 0.0, a: 0.0, b: 0.0, delta_theta, above_threshold: false };
        let state = FiveModeState { alpha_p: Complex64::new(a, 0.0), ..Default::default() };
        return Ok((family, state));
    }
    let i_total = params.kappa_p / params.chi * (a - clip);
    let amp_a = (a_fraction * i_total).sqrt();
    let amp_b = ((1.0 - a_fraction) * i_total).sqrt();
    let s_plus = Complex64::from_polar(amp_a, 0.5 * delta_theta);
    let s_minus = Complex64::from_polar(amp_b, -0.5 * delta_theta);
    let state = FiveModeState {
        alpha_p: Complex64::new(clip, 0.0),
        alpha_s_plus: s_plus,
        alpha_s_minus: s_minus,
        alpha_i_plus: -s_minus.conj(),
        alpha_i_minus: -s_plus.conj(),
    };
    let family = FreeRunFamily { i_p: clip * clip, i_total, a: amp_a, b: amp_b, delta_theta, above_threshold: true };
    Ok((family, state))
}

/// Closed-form free-running Stokes parameters `(signal, idler)` from `(A, B, Δθ)`.
pub fn free_running_stokes(family: &FreeRunFamily) -> Option<(StokesVector, StokesVector)> {
    let total = family.a * family.a + family.b * family.b;
    if !(total > 0.0) {
        return None;
    }
    let cross = 2.0 * family.a * family.b / total;
    let p3 = (family.a * family.a - family.b * family.b) / total;
    let signal = StokesVector::new(cross * family.delta_theta.cos(), cross * family.delta_theta.sin(), p3);
    Some((signal, signal.mirror()))
}

/// Closed-form Stokes parameters of the down-converted beams for an injection at `pt`.
pub fn downconverted_stokes(pt: &SpherePoint) -> (StokesVector, StokesVector) {
    let signal = pt.to_stokes();
    (signal, signal.mirror())
}

/// Norm of the LG-basis right-hand side; zero at a fixed point.
pub fn lg_residual(state: &FiveModeState, params: &OpoParams, pump: f64, seed: &ModeVector) -> f64 {
    rhs_lg_basis(state, params, &InjectionDrive::new(Complex64::new(pump, 0.0), *seed)).norm()
}

/// Convenience: the LG-basis drive matching an injection at `pt`.
pub fn injection_drive(pump: f64, seed_intensity: f64, pt: &SpherePoint) -> InjectionDrive {
    InjectionDrive::new(Complex64::new(pump, 0.0), mode_from_sphere(pt, seed_intensity))
}
