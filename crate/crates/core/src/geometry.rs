//! Closed paths on the mode Poincaré sphere and their geometric phases.
//!
//! Paths are piecewise geodesic between consecutive vertices. Solid angles are
//! measured on the Stokes sphere `(p₁, p₂, p₃)`; a loop circulating
//! counterclockwise about the outward normal encloses a positive solid angle.
//! The geometric phase of a cyclic evolution is `γ = -Ω/2`.

use core::f64::consts::{FRAC_PI_2, PI};

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::Float;

use crate::mode::{mode_from_sphere, sphere_from_stokes, wrap_angle, SpherePoint, StokesVector};
use crate::{Error, Result};

/// Three-vector helpers on the unit sphere.
pub(crate) mod vec3 {
    #[allow(unused_imports)]
    use num_traits::Float;

    pub type V3 = [f64; 3];

    pub fn dot(a: &V3, b: &V3) -> f64 {
        a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
    }

    pub fn cross(a: &V3, b: &V3) -> V3 {
        [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]]
    }

    pub fn norm(a: &V3) -> f64 {
        dot(a, a).sqrt()
    }

    pub fn scale(a: &V3, s: f64) -> V3 {
        [a[0] * s, a[1] * s, a[2] * s]
    }

    pub fn add(a: &V3, b: &V3) -> V3 {
        [a[0] + b[0], a[1] + b[1], a[2] + b[2]]
    }

    pub fn normalize(a: &V3) -> V3 {
        scale(a, 1.0 / norm(a))
    }

    /// Great-circle angle between unit vectors.
    pub fn angle(a: &V3, b: &V3) -> f64 {
        norm(&cross(a, b)).atan2(dot(a, b))
    }

    pub fn det(a: &V3, b: &V3, c: &V3) -> f64 {
        dot(a, &cross(b, c))
    }

    /// Constant-speed interpolation along the short great circle.
    pub fn slerp(a: &V3, b: &V3, t: f64) -> V3 {
        let omega = angle(a, b);
        if omega < 1e-15 {
            return *a;
        }
        let s = omega.sin();
        let wa = ((1.0 - t) * omega).sin() / s;
        let wb = (t * omega).sin() / s;
        normalize(&add(&scale(a, wa), &scale(b, wb)))
    }
}

use vec3::V3;

/// Largest admissible arc between consecutive vertices.
const MAX_ARC: f64 = PI - 1e-9;

/// Ordered sequence of sphere points; a closed path implicitly returns from the
/// last vertex to the first.
#[derive(Debug, Clone, PartialEq)]
pub struct SpherePath {
    pub vertices: Vec<SpherePoint>,
    pub closed: bool,
}

impl SpherePath {
    pub fn closed(vertices: Vec<SpherePoint>) -> Self {
        Self { vertices, closed: true }
    }

    pub fn open(vertices: Vec<SpherePoint>) -> Self {
        Self { vertices, closed: false }
    }

    /// A single-point path: constant injection.
    pub fn stationary(point: SpherePoint) -> Self {
        Self { vertices: vec![point], closed: false }
    }

    /// Lune between the meridians `φ = 0` and `φ = dphi`, starting at the
    /// north pole: pole → `(π/2, dphi)` → back along the equator to `(π/2, 0)`.
    /// Encloses `Ω = dphi`; extra equator vertices keep every arc at most π/2.
    pub fn lune(dphi: f64) -> Result<Self> {
        if !(dphi.abs() > 0.0 && dphi.abs() < 2.0 * PI) {
            return Err(Error::InvalidParameter("lune angle must satisfy 0 < |dphi| < 2pi"));
        }
        let steps = (dphi.abs() / FRAC_PI_2).ceil() as usize;
        let mut vertices = vec![SpherePoint::north()];
        for k in 0..=steps {
            let phi = dphi * (1.0 - k as f64 / steps as f64);
            vertices.push(SpherePoint::new(FRAC_PI_2, phi)?);
        }
        Ok(Self::closed(vertices))
    }

    /// Geodesic triangle covering one octant of the sphere (`Ω = π/2`).
    pub fn octant() -> Self {
        Self::lune(FRAC_PI_2).expect("valid lune angle")
    }

    /// The equator traversed with increasing `φ`.
    pub fn equator() -> Self {
        Self::closed(
            [0.0, FRAC_PI_2, PI, -FRAC_PI_2]
                .iter()
                .map(|&phi| SpherePoint { theta: FRAC_PI_2, phi })
                .collect(),
        )
    }

    /// Out-and-back loop along one meridian, enclosing no area.
    pub fn null() -> Self {
        Self::closed(vec![
            SpherePoint::north(),
            SpherePoint { theta: PI / 4.0, phi: 0.0 },
            SpherePoint { theta: FRAC_PI_2, phi: 0.0 },
        ])
    }

    /// Parses `lune:DPHI`, `octant`, `equator` or `null`.
    pub fn preset(name: &str) -> Result<Self> {
        let name = name.trim();
        if let Some(arg) = name.strip_prefix("lune:") {
            let dphi: f64 = arg.trim().parse().map_err(|_| Error::InvalidParameter("lune angle is not a number"))?;
            return Self::lune(dphi);
        }
        match name {
            "octant" => Ok(Self::octant()),
            "equator" => Ok(Self::equator()),
            "null" => Ok(Self::null()),
            _ => Err(Error::InvalidParameter("unknown path preset (expected lune:DPHI, octant, equator or null)")),
        }
    }

    pub fn stokes_vertices(&self) -> Vec<V3> {
        self.vertices.iter().map(|p| p.to_stokes().to_array()).collect()
    }

    pub fn reversed(&self) -> Self {
        let mut vertices = self.vertices.clone();
        vertices.reverse();
        Self { vertices, closed: self.closed }
    }

    /// Arcs `(from, to)` including the closing arc of a closed path.
    pub(crate) fn arcs(&self) -> Vec<(usize, usize)> {
        let n = self.vertices.len();
        let mut arcs: Vec<(usize, usize)> = (0..n.saturating_sub(1)).map(|k| (k, k + 1)).collect();
        if self.closed && n > 1 {
            arcs.push((n - 1, 0));
        }
        arcs
    }

    /// Checks arc lengths; returns the Stokes vertices.
    pub(crate) fn validated_vertices(&self) -> Result<Vec<V3>> {
        let vs = self.stokes_vertices();
        for (i, j) in self.arcs() {
            if vec3::angle(&vs[i], &vs[j]) >= MAX_ARC {
                return Err(Error::AmbiguousArc(i, j));
            }
        }
        Ok(vs)
    }

    /// Total great-circle length, including the closing arc when closed.
    pub fn length(&self) -> Result<f64> {
        let vs = self.validated_vertices()?;
        Ok(self.arcs().iter().map(|&(i, j)| vec3::angle(&vs[i], &vs[j])).sum())
    }

    /// Short human-readable description.
    pub fn describe(&self) -> String {
        use core::fmt::Write;
        let mut s = String::new();
        for (k, v) in self.vertices.iter().enumerate() {
            if k > 0 {
                s.push_str(" -> ");
            }
            let _ = write!(s, "({:.4}, {:.4})", v.theta, v.phi);
        }
        if self.closed {
            s.push_str(" -> close");
        }
        s
    }
}

fn closed_vertices(path: &SpherePath) -> Result<Vec<V3>> {
    if !path.closed {
        return Err(Error::OpenPath);
    }
    let vs = path.validated_vertices()?;
    let mut distinct: Vec<V3> = Vec::new();
    for v in &vs {
        if distinct.iter().all(|d| vec3::angle(d, v) > 1e-12) {
            distinct.push(*v);
        }
    }
    if distinct.len() < 3 {
        return Err(Error::DegeneratePath(distinct.len()));
    }
    Ok(vs)
}

/// Signed area of the small geodesic triangle `(r, a, b)`: l'Huilier for the
/// magnitude, orientation from the triple product.
fn signed_triangle(r: &V3, a: &V3, b: &V3) -> f64 {
    let orientation = vec3::det(r, a, b);
    if orientation == 0.0 {
        return 0.0;
    }
    let ab = vec3::angle(a, b);
    let br = vec3::angle(b, r);
    let ra = vec3::angle(r, a);
    let s = 0.5 * (ab + br + ra);
    let t = (0.5 * s).tan() * (0.5 * (s - ab)).tan() * (0.5 * (s - br)).tan() * (0.5 * (s - ra)).tan();
    let excess = 4.0 * t.max(0.0).sqrt().atan();
    excess.copysign(orientation)
}

fn sample_arcs(vs: &[V3], arcs: &[(usize, usize)], per_arc: usize) -> Vec<V3> {
    let mut out = Vec::with_capacity(arcs.len() * per_arc);
    for &(i, j) in arcs {
        for k in 0..per_arc {
            out.push(vec3::slerp(&vs[i], &vs[j], k as f64 / per_arc as f64));
        }
    }
    out
}

/// Fan centre whose antipode stays farthest from the path.
fn reference_point(vs: &[V3], arcs: &[(usize, usize)]) -> V3 {
    let samples = sample_arcs(vs, arcs, 8);
    let clearance = |r: &V3| {
        let anti = vec3::scale(r, -1.0);
        samples.iter().map(|p| vec3::angle(&anti, p)).fold(f64::INFINITY, f64::min)
    };
    let mut candidates: Vec<V3> = Vec::with_capacity(7);
    let centroid = vs.iter().fold([0.0; 3], |acc, v| vec3::add(&acc, v));
    if vec3::norm(&centroid) > 1e-3 * vs.len() as f64 {
        let c = vec3::normalize(&centroid);
        if clearance(&c) > 1e-2 {
            return c;
        }
        candidates.push(c);
    }
    for axis in 0..3 {
        for sign in [1.0, -1.0] {
            let mut e = [0.0; 3];
            e[axis] = sign;
            candidates.push(e);
        }
    }
    candidates
        .into_iter()
        .map(|c| (clearance(&c), c))
        .fold((f64::NEG_INFINITY, [0.0, 0.0, 1.0]), |best, cand| if cand.0 > best.0 { cand } else { best })
        .1
}

/// Wraps a solid angle into `(-2π, 2π]`.
fn wrap_solid_angle(omega: f64) -> f64 {
    let four_pi = 4.0 * PI;
    let mut w = omega % four_pi;
    if w <= -2.0 * PI {
        w += four_pi;
    } else if w > 2.0 * PI {
        w -= four_pi;
    }
    w
}

/// Signed solid angle enclosed by a closed path, in `(-2π, 2π]`.
pub fn solid_angle(path: &SpherePath) -> Result<f64> {
    let vs = closed_vertices(path)?;
    let arcs = path.arcs();
    let r = reference_point(&vs, &arcs);
    let total: f64 = arcs.iter().map(|&(i, j)| signed_triangle(&r, &vs[i], &vs[j])).sum();
    Ok(wrap_solid_angle(total))
}

/// Geometric phase, raw and wrapped into `(-π, π]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GeometricPhase {
    pub raw: f64,
    pub wrapped: f64,
}

impl GeometricPhase {
    fn from_raw(raw: f64) -> Self {
        Self { raw, wrapped: wrap_angle(raw) }
    }
}

/// `γ = -Ω/2` for a closed path.
pub fn geometric_phase(path: &SpherePath) -> Result<GeometricPhase> {
    Ok(GeometricPhase::from_raw(-0.5 * solid_angle(path)?))
}

/// Phase of the Bargmann invariant `Π⟨ψ_k|ψ_{k+1}⟩` of mode states sampled
/// densely along the path, wrapped into `(-π, π]`.
///
/// This uses only state overlaps, not the sphere geometry, and converges to
/// `-Ω/2 (mod 2π)`.
pub fn berry_connection_phase(path: &SpherePath, segments_per_arc: usize) -> Result<f64> {
    if segments_per_arc < 10 {
        return Err(Error::InvalidParameter("berry_connection_phase needs at least 10 segments per arc"));
    }
    let vs = closed_vertices(path)?;
    let samples = sample_arcs(&vs, &path.arcs(), segments_per_arc);
    let states = samples
        .iter()
        .map(|p| {
            let s = StokesVector::from_array(vec3::normalize(p));
            sphere_from_stokes(&s).map(|pt| mode_from_sphere(&pt, 1.0))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut phase = 0.0;
    for k in 0..states.len() {
        let next = &states[(k + 1) % states.len()];
        let overlap: Complex64 = states[k].inner(next);
        phase += overlap.arg();
    }
    Ok(wrap_angle(phase))
}

/// Reflection of every vertex through the equator, `(θ, φ) → (π - θ, φ)`.
pub fn mirror_path(path: &SpherePath) -> SpherePath {
    SpherePath { vertices: path.vertices.iter().map(SpherePoint::mirror).collect(), closed: path.closed }
}

/// Signal and idler geometric phases for a cyclic injection.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConjugatePhases {
    pub signal: GeometricPhase,
    pub idler: GeometricPhase,
    /// `γ_idler - γ_signal = Ω`.
    pub relative: f64,
}

/// The idler follows the mirror path and acquires the conjugate phase.
///
/// A phase is only defined modulo 2π; the idler's raw value is the
/// representative closest to `-γ_signal`, which matters for self-mirror loops
/// such as the equator (`Ω = 2π`).
pub fn conjugation_pair(path: &SpherePath) -> Result<ConjugatePhases> {
    let signal = geometric_phase(path)?;
    let mirrored = geometric_phase(&mirror_path(path))?.raw;
    let raw = -signal.raw + wrap_angle(mirrored + signal.raw);
    debug_assert!((raw + signal.raw).abs() < 1e-9);
    let idler = GeometricPhase::from_raw(raw);
    Ok(ConjugatePhases { signal, idler, relative: idler.raw - signal.raw })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn pt(theta: f64, phi: f64) -> SpherePoint {
        SpherePoint::new(theta, phi).unwrap()
    }

    /// Star-shaped loop around a random centre.
    pub(crate) fn random_loop(rng: &mut ChaCha8Rng) -> SpherePath {
        let centre = vec3::normalize(&[rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)]);
        let helper = if centre[2].abs() < 0.9 { [0.0, 0.0, 1.0] } else { [1.0, 0.0, 0.0] };
        let u = vec3::normalize(&vec3::cross(&centre, &helper));
        let v = vec3::cross(&centre, &u);
        let n = rng.gen_range(4..9);
        let mut angles: Vec<f64> = (0..n).map(|k| (k as f64 + rng.gen_range(0.1..0.9)) * 2.0 * PI / n as f64).collect();
        if rng.gen_bool(0.5) {
            angles.reverse();
        }
        let vertices = angles
            .iter()
            .map(|&a| {
                let r: f64 = rng.gen_range(0.2..1.0);
                let dir = vec3::add(&vec3::scale(&u, a.cos()), &vec3::scale(&v, a.sin()));
                let p = vec3::add(&vec3::scale(&centre, r.cos()), &vec3::scale(&dir, r.sin()));
                sphere_from_stokes(&StokesVector::from_array(vec3::normalize(&p))).unwrap()
            })
            .collect();
        SpherePath::closed(vertices)
    }

    #[test]
    fn octant_encloses_an_eighth() {
        let p = SpherePath::closed(vec![pt(FRAC_PI_2, 0.0), pt(FRAC_PI_2, FRAC_PI_2), pt(0.0, 0.0)]);
        assert!((solid_angle(&p).unwrap().abs() - FRAC_PI_2).abs() < 1e-12);
        assert!((solid_angle(&SpherePath::octant()).unwrap() - FRAC_PI_2).abs() < 1e-12);
    }

    #[test]
    fn equator_first_lune_encloses_dphi() {
        // equatorial start, through the pole, back along the equator
        for &(phi0, dphi) in &[(0.0, 0.3), (0.4, FRAC_PI_2), (-1.0, 1.2)] {
            let p = SpherePath::closed(vec![pt(FRAC_PI_2, phi0), pt(0.0, 0.0), pt(FRAC_PI_2, phi0 + dphi)]);
            assert!((solid_angle(&p).unwrap() - dphi).abs() < 1e-12);
        }
    }

    #[test]
    fn lune_presets() {
        for dphi in [0.1, FRAC_PI_2, PI, 1.5 * PI] {
            let p = SpherePath::lune(dphi).unwrap();
            assert!((solid_angle(&p).unwrap() - dphi).abs() < 1e-9);
        }
        assert!(SpherePath::lune(0.0).is_err());
        assert!(SpherePath::lune(7.0).is_err());
    }

    #[test]
    fn reversal_negates() {
        let p = SpherePath::lune(1.0).unwrap();
        assert!((solid_angle(&p.reversed()).unwrap() + 1.0).abs() < 1e-12);
        let g = geometric_phase(&p.reversed()).unwrap();
        assert!((g.raw - 0.5).abs() < 1e-12);
    }

    #[test]
    fn degenerate_and_open_paths() {
        let p = SpherePath::closed(vec![pt(0.3, 0.0), pt(0.5, 0.0), pt(0.3, 0.0)]);
        assert_eq!(solid_angle(&p), Err(Error::DegeneratePath(2)));
        let open = SpherePath::open(vec![pt(0.3, 0.0), pt(0.5, 0.0), pt(0.6, 1.0)]);
        assert_eq!(solid_angle(&open), Err(Error::OpenPath));
        let anti = SpherePath::closed(vec![pt(0.0, 0.0), pt(PI, 0.0), pt(FRAC_PI_2, 1.0)]);
        assert_eq!(solid_angle(&anti), Err(Error::AmbiguousArc(0, 1)));
    }

    #[test]
    fn phase_examples() {
        let eq = geometric_phase(&SpherePath::equator()).unwrap();
        assert!((solid_angle(&SpherePath::equator()).unwrap() - 2.0 * PI).abs() < 1e-12);
        assert!((eq.raw + PI).abs() < 1e-12);
        let lune = geometric_phase(&SpherePath::lune(FRAC_PI_2).unwrap()).unwrap();
        assert!((lune.raw + PI / 4.0).abs() < 1e-12);
        let null = geometric_phase(&SpherePath::null()).unwrap();
        assert!(null.raw.abs() < 1e-12);
    }

    #[test]
    fn bargmann_phase_matches_geometry() {
        for path in [SpherePath::lune(FRAC_PI_2).unwrap(), SpherePath::octant(), SpherePath::null()] {
            let g = geometric_phase(&path).unwrap().raw;
            for segments in [10, 100, 10_000] {
                let b = berry_connection_phase(&path, segments).unwrap();
                assert!(wrap_angle(b - g).abs() < 1e-6, "{segments}: {b} vs {g}");
            }
        }
        let eq = berry_connection_phase(&SpherePath::equator(), 10_000).unwrap();
        assert!(wrap_angle(eq + PI).abs() < 1e-6);
        assert!(berry_connection_phase(&SpherePath::octant(), 5).is_err());
    }

    #[test]
    fn mirror_examples() {
        let eq = SpherePath::equator();
        assert_eq!(mirror_path(&eq), eq);
        let lune = SpherePath::lune(1.0).unwrap();
        let m = mirror_path(&lune);
        assert_eq!(m.vertices[0], SpherePoint::south());
        assert!((solid_angle(&m).unwrap() + 1.0).abs() < 1e-12);
    }

    #[test]
    fn mirror_antisymmetry_random() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        for _ in 0..50 {
            let p = random_loop(&mut rng);
            let w = solid_angle(&p).unwrap();
            assert!((solid_angle(&mirror_path(&p)).unwrap() + w).abs() < 1e-9);
        }
    }

    #[test]
    fn additivity_over_shared_chord() {
        let mut rng = ChaCha8Rng::seed_from_u64(32);
        for _ in 0..50 {
            let p = random_loop(&mut rng);
            let n = p.vertices.len();
            let cut = rng.gen_range(2..n - 1);
            let first = SpherePath::closed(p.vertices[..=cut].to_vec());
            let mut rest = p.vertices[cut..].to_vec();
            rest.push(p.vertices[0]);
            let second = SpherePath::closed(rest);
            let total = solid_angle(&p).unwrap();
            let parts = solid_angle(&first).unwrap() + solid_angle(&second).unwrap();
            assert!((total - parts).abs() < 1e-9, "{total} vs {parts}");
        }
    }

    #[test]
    fn conjugation_examples() {
        let c = conjugation_pair(&SpherePath::lune(FRAC_PI_2).unwrap()).unwrap();
        assert!((c.signal.raw + PI / 4.0).abs() < 1e-12);
        assert!((c.idler.raw - PI / 4.0).abs() < 1e-12);
        assert!((c.relative - FRAC_PI_2).abs() < 1e-12);
        let eq = conjugation_pair(&SpherePath::equator()).unwrap();
        assert_eq!((eq.signal.raw, eq.idler.raw), (-PI, PI));
        assert!((eq.relative - 2.0 * PI).abs() < 1e-12);
        let n = conjugation_pair(&SpherePath::null()).unwrap();
        assert!(n.signal.raw.abs() < 1e-12 && n.idler.raw.abs() < 1e-12);
        let mut rng = ChaCha8Rng::seed_from_u64(33);
        for _ in 0..100 {
            let c = conjugation_pair(&random_loop(&mut rng)).unwrap();
            assert!((c.idler.raw + c.signal.raw).abs() < 1e-9);
        }
    }

    #[test]
    fn presets_parse() {
        assert_eq!(SpherePath::preset("octant").unwrap(), SpherePath::octant());
        assert_eq!(SpherePath::preset("lune:1.5708").unwrap(), SpherePath::lune(1.5708).unwrap());
        assert!(SpherePath::preset("lune:x").is_err());
        assert!(SpherePath::preset("spiral").is_err());
    }
}
