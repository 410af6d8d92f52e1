//! First-order transverse modes and their Poincaré-sphere representation.
//!
//! A first-order field is a superposition `c₊ψ₊ + c₋ψ₋` of the Laguerre-Gaussian
//! modes of topological charge ±1. The LG modes sit on the poles of the mode
//! Poincaré sphere and rotated Hermite-Gaussian modes on its equator.
//!
//! Phase conventions used throughout the crate:
//!
//! * `ψ±(ρ, ϕ) = N (ρ/w) e^{±iϕ} e^{-ρ²/w²}` with `N = 2/(w√π)`;
//! * `HG_θ = (e^{iθ}ψ₊ + e^{-iθ}ψ₋)/√2`, whose lobes lie along azimuth `-θ`;
//! * a sphere point `(θ, φ)` is the state `(cos(θ/2)e^{-iφ/2}, sin(θ/2)e^{iφ/2})`
//!   with Stokes vector `(sinθ cosφ, -sinθ sinφ, cosθ)`.
//!
//! With these choices the analyzer-projection Stokes parameters and the
//! coherence form `p₁ + i p₂ = 2c₊c₋*/I`, `p₃ = (|c₊|² - |c₋|²)/I` coincide.

use core::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2, FRAC_PI_4, PI};

use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::Float;

use crate::{Error, Result};

/// Tolerance on `|s| = 1` accepted by [`sphere_from_stokes`].
pub const UNIT_STOKES_TOL: f64 = 1e-9;

/// Complex amplitudes of a first-order field in the LG± basis.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ModeVector {
    pub c_plus: Complex64,
    pub c_minus: Complex64,
}

impl ModeVector {
    pub const fn new(c_plus: Complex64, c_minus: Complex64) -> Self {
        Self { c_plus, c_minus }
    }

    pub fn from_real(c_plus: f64, c_minus: f64) -> Self {
        Self::new(Complex64::new(c_plus, 0.0), Complex64::new(c_minus, 0.0))
    }

    pub fn intensity(&self) -> f64 {
        self.c_plus.norm_sqr() + self.c_minus.norm_sqr()
    }

    /// Hermitian product `⟨self|other⟩`, antilinear in `self`.
    pub fn inner(&self, other: &ModeVector) -> Complex64 {
        self.c_plus.conj() * other.c_plus + self.c_minus.conj() * other.c_minus
    }

    pub fn scale(&self, factor: Complex64) -> Self {
        Self::new(self.c_plus * factor, self.c_minus * factor)
    }

    /// Multiplies both amplitudes by `e^{i·phase}`.
    pub fn with_phase(&self, phase: f64) -> Self {
        self.scale(Complex64::from_polar(1.0, phase))
    }

    /// Unit-intensity copy of this vector.
    pub fn normalized(&self) -> Result<Self> {
        let i = self.intensity();
        if i <= 0.0 {
            return Err(Error::ZeroIntensity);
        }
        Ok(self.scale(Complex64::new(1.0 / i.sqrt(), 0.0)))
    }

    /// The mirror-image mode `(c₋*, c₊*)`: Stokes `(p₁, p₂, -p₃)` with the
    /// conjugate phase. This is the idler mode produced from a signal mode.
    pub fn mirror_conjugate(&self) -> Self {
        Self::new(self.c_minus.conj(), self.c_plus.conj())
    }

    pub fn is_finite(&self) -> bool {
        self.c_plus.is_finite() && self.c_minus.is_finite()
    }
}

/// Normalized mode Stokes parameters.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct StokesVector {
    pub p1: f64,
    pub p2: f64,
    pub p3: f64,
}

impl StokesVector {
    pub const fn new(p1: f64, p2: f64, p3: f64) -> Self {
        Self { p1, p2, p3 }
    }

    pub fn norm(&self) -> f64 {
        (self.p1 * self.p1 + self.p2 * self.p2 + self.p3 * self.p3).sqrt()
    }

    pub fn to_array(self) -> [f64; 3] {
        [self.p1, self.p2, self.p3]
    }

    pub fn from_array(v: [f64; 3]) -> Self {
        Self::new(v[0], v[1], v[2])
    }

    /// Reflection through the equatorial plane.
    pub fn mirror(&self) -> Self {
        Self::new(self.p1, self.p2, -self.p3)
    }

    pub fn max_abs_diff(&self, other: &StokesVector) -> f64 {
        (self.p1 - other.p1)
            .abs()
            .max((self.p2 - other.p2).abs())
            .max((self.p3 - other.p3).abs())
    }
}

/// A point `(θ, φ)` on the mode Poincaré sphere, `θ ∈ [0, π]`, `φ ∈ (-π, π]`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct SpherePoint {
    pub theta: f64,
    pub phi: f64,
}

impl SpherePoint {
    /// Builds a point, wrapping `phi` into `(-π, π]`.
    pub fn new(theta: f64, phi: f64) -> Result<Self> {
        if !(0.0..=PI).contains(&theta) || !phi.is_finite() {
            return Err(Error::InvalidParameter("theta must lie in [0, pi] and phi be finite"));
        }
        Ok(Self { theta, phi: wrap_angle(phi) })
    }

    pub const fn north() -> Self {
        Self { theta: 0.0, phi: 0.0 }
    }

    pub const fn south() -> Self {
        Self { theta: PI, phi: 0.0 }
    }

    /// Cartesian Stokes coordinates of the point.
    pub fn to_stokes(&self) -> StokesVector {
        let (st, ct) = self.theta.sin_cos();
        let (sp, cp) = self.phi.sin_cos();
        StokesVector::new(st * cp, -st * sp, ct)
    }

    /// Reflection through the equator, `(θ, φ) → (π - θ, φ)`.
    pub fn mirror(&self) -> Self {
        Self { theta: PI - self.theta, phi: self.phi }
    }
}

/// Wraps an angle into `(-π, π]`.
pub fn wrap_angle(angle: f64) -> f64 {
    let two_pi = 2.0 * PI;
    let mut a = angle % two_pi;
    if a <= -PI {
        a += two_pi;
    } else if a > PI {
        a -= two_pi;
    }
    a
}

/// Square sampling grid centred on the beam axis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    /// Pixels per side.
    pub n: usize,
    /// Half extent in units of the waist.
    pub half_width: f64,
    /// Beam waist `w`.
    pub waist: f64,
}

impl GridSpec {
    pub fn new(n: usize, half_width: f64, waist: f64) -> Result<Self> {
        if n < 16 {
            return Err(Error::InvalidParameter("grid needs at least 16 pixels per side"));
        }
        if !(waist > 0.0 && waist.is_finite()) {
            return Err(Error::InvalidParameter("beam waist must be positive"));
        }
        if !(half_width > 0.0 && half_width.is_finite()) {
            return Err(Error::InvalidParameter("grid half width must be positive"));
        }
        Ok(Self { n, half_width, waist })
    }

    /// Physical half extent `half_width · w`.
    pub fn extent(&self) -> f64 {
        self.half_width * self.waist
    }

    pub fn pixel_size(&self) -> f64 {
        2.0 * self.extent() / self.n as f64
    }

    /// Physical coordinate of pixel centre `index` along either axis.
    pub fn coord(&self, index: usize) -> f64 {
        (index as f64 + 0.5) * self.pixel_size() - self.extent()
    }

    /// Fractional pixel index of a physical coordinate (inverse of [`coord`](Self::coord)).
    pub fn index_of(&self, x: f64) -> f64 {
        (x + self.extent()) / self.pixel_size() - 0.5
    }
}

/// Topological charge of a first-order LG mode.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Charge {
    Plus,
    Minus,
}

impl Charge {
    pub fn sign(self) -> f64 {
        match self {
            Charge::Plus => 1.0,
            Charge::Minus => -1.0,
        }
    }
}

/// Waist-plane profile `ψ±(x, y)`, unit-normalized over the plane.
pub fn lg_field(charge: Charge, x: f64, y: f64, grid: &GridSpec) -> Complex64 {
    let w = grid.waist;
    let norm = 2.0 / (w * PI.sqrt());
    let envelope = norm * (-(x * x + y * y) / (w * w)).exp() / w;
    // ρ e^{±iϕ} = x ± iy
    Complex64::new(x, charge.sign() * y) * envelope
}

/// Rotated first-order Hermite-Gaussian profile `HG_angle(x, y)`.
pub fn hg_field(angle: f64, x: f64, y: f64, grid: &GridSpec) -> Complex64 {
    let v = hg_mode(angle);
    v.c_plus * lg_field(Charge::Plus, x, y, grid) + v.c_minus * lg_field(Charge::Minus, x, y, grid)
}

/// LG-basis amplitudes of `HG_angle`.
pub fn hg_mode(angle: f64) -> ModeVector {
    ModeVector::new(
        Complex64::from_polar(FRAC_1_SQRT_2, angle),
        Complex64::from_polar(FRAC_1_SQRT_2, -angle),
    )
}

/// Stokes parameters in coherence form.
pub fn stokes_from_mode(v: &ModeVector) -> Result<StokesVector> {
    let i = v.intensity();
    if !(i > 0.0) {
        return Err(Error::ZeroIntensity);
    }
    let coherence = v.c_plus * v.c_minus.conj();
    Ok(StokesVector::new(
        2.0 * coherence.re / i,
        2.0 * coherence.im / i,
        (v.c_plus.norm_sqr() - v.c_minus.norm_sqr()) / i,
    ))
}

/// Mode vector of intensity `intensity` at sphere point `pt`.
pub fn mode_from_sphere(pt: &SpherePoint, intensity: f64) -> ModeVector {
    let amp = intensity.max(0.0).sqrt();
    let (s, c) = (0.5 * pt.theta).sin_cos();
    ModeVector::new(
        Complex64::from_polar(amp * c, -0.5 * pt.phi),
        Complex64::from_polar(amp * s, 0.5 * pt.phi),
    )
}

/// Inverse of [`SpherePoint::to_stokes`]; the poles map to `φ = 0`.
pub fn sphere_from_stokes(s: &StokesVector) -> Result<SpherePoint> {
    let norm = s.norm();
    if !((norm - 1.0).abs() <= UNIT_STOKES_TOL) {
        return Err(Error::NonUnitStokes(norm));
    }
    let p3 = (s.p3 / norm).clamp(-1.0, 1.0);
    let theta = p3.acos();
    let transverse = (s.p1 * s.p1 + s.p2 * s.p2).sqrt();
    let phi = if transverse <= 1e-15 { 0.0 } else { wrap_angle((-s.p2).atan2(s.p1)) };
    Ok(SpherePoint { theta, phi })
}

/// Analyzer modes entering the intensity definition of the Stokes parameters.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Analyzer {
    Hg0,
    Hg45,
    Hg90,
    Hg135,
    LgPlus,
    LgMinus,
}

impl Analyzer {
    pub fn mode(self) -> ModeVector {
        match self {
            Analyzer::Hg0 => hg_mode(0.0),
            Analyzer::Hg45 => hg_mode(FRAC_PI_4),
            Analyzer::Hg90 => hg_mode(FRAC_PI_2),
            Analyzer::Hg135 => hg_mode(3.0 * FRAC_PI_4),
            Analyzer::LgPlus => ModeVector::from_real(1.0, 0.0),
            Analyzer::LgMinus => ModeVector::from_real(0.0, 1.0),
        }
    }
}

/// Squared modulus of the coefficient of `analyzer` in `v`.
pub fn project_intensity(v: &ModeVector, analyzer: Analyzer) -> f64 {
    analyzer.mode().inner(v).norm_sqr()
}

/// Stokes parameters as normalized analyzer intensity differences.
pub fn stokes_from_projections(v: &ModeVector) -> Result<StokesVector> {
    let ratio = |a: Analyzer, b: Analyzer| {
        let (ia, ib) = (project_intensity(v, a), project_intensity(v, b));
        (ia - ib) / (ia + ib)
    };
    if !(v.intensity() > 0.0) {
        return Err(Error::ZeroIntensity);
    }
    Ok(StokesVector::new(
        ratio(Analyzer::Hg0, Analyzer::Hg90),
        ratio(Analyzer::Hg45, Analyzer::Hg135),
        ratio(Analyzer::LgPlus, Analyzer::LgMinus),
    ))
}
