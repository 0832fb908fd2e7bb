//! Disc-model Möbius maps and circle arcs.
//!
//! A map is stored as the matrix `[[a, b], [conj(b), conj(a)]]` with
//! `|a|^2 - |b|^2 = 1`, acting on the closed unit disc by
//! `z -> (a z + b) / (conj(b) z + conj(a))`. In this normal form the
//! derivative modulus is `1 / |conj(b) z + conj(a)|^2`, which on the unit
//! circle reduces to a cosine in the angle; isometry arcs and exact
//! derivative ranges over arcs come out in closed form.

use num_complex::Complex64;
use std::f64::consts::{PI, TAU};

pub type C64 = Complex64;

const IDENTITY_TOL: f64 = 1e-10;
const TRACE_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum GeometryError {
    #[error("matrix is not disc-preserving: |a|^2 - |b|^2 = {det}")]
    InvalidMatrix { det: f64 },
    #[error("denominator vanishes at the evaluation point")]
    DegenerateDenominator,
    #[error("map is the identity")]
    IdentityMap,
    #[error("derivative modulus is constant on the circle (b = 0)")]
    ConstantDerivative,
    #[error("arc halfwidth {halfwidth} outside (0, pi)")]
    InvalidArc { halfwidth: f64 },
    #[error("map is not parabolic")]
    NotParabolic,
}

/// Conjugacy class of a non-identity disc Möbius map.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MapClass {
    Hyperbolic,
    Parabolic,
    Elliptic,
}

/// Wraps an angle into `[0, 2*pi)`.
pub fn wrap_angle(theta: f64) -> f64 {
    let t = theta.rem_euclid(TAU);
    if t >= TAU {
        0.0
    } else {
        t
    }
}

/// Signed distance from `from` counterclockwise to `to`, in `[0, 2*pi)`.
pub fn ccw_distance(from: f64, to: f64) -> f64 {
    wrap_angle(to - from)
}

/// Absolute angular distance between two directions, in `[0, pi]`.
pub fn angular_distance(x: f64, y: f64) -> f64 {
    let d = wrap_angle(x - y);
    d.min(TAU - d)
}

/// A disc-preserving Möbius transformation in the unit-determinant form.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MobiusMap {
    a: C64,
    b: C64,
}

impl MobiusMap {
    /// Builds a map from the top row of its matrix, renormalizing so that
    /// `|a|^2 - |b|^2 = 1`. Fails when the input is not disc-preserving.
    pub fn new(a: C64, b: C64) -> Result<Self, GeometryError> {
        let det = a.norm_sqr() - b.norm_sqr();
        if !(det > 1e-9) || !det.is_finite() {
            return Err(GeometryError::InvalidMatrix { det });
        }
        let s = det.sqrt();
        Ok(Self { a: a / s, b: b / s })
    }

    pub fn identity() -> Self {
        Self {
            a: C64::new(1.0, 0.0),
            b: C64::new(0.0, 0.0),
        }
    }

    /// Rotation of the disc by `phi` radians about the origin.
    pub fn rotation(phi: f64) -> Self {
        Self {
            a: C64::from_polar(1.0, phi / 2.0),
            b: C64::new(0.0, 0.0),
        }
    }

    /// Conjugates a real upper-half-plane matrix `[[p, q], [r, s]]` (acting
    /// by `w -> (p w + q) / (r w + s)`) into the disc model through the
    /// Cayley map `w -> (w - i) / (w + i)`; `w = infinity` lands at `z = 1`.
    pub fn from_half_plane(p: f64, q: f64, r: f64, s: f64) -> Result<Self, GeometryError> {
        let a = C64::new((p + s) / 2.0, (q - r) / 2.0);
        let b = C64::new((p - s) / 2.0, -(q + r) / 2.0);
        Self::new(a, b)
    }

    pub fn a(&self) -> C64 {
        self.a
    }

    pub fn b(&self) -> C64 {
        self.b
    }

    /// Trace of the matrix representative, `2 Re(a)`.
    pub fn trace(&self) -> f64 {
        2.0 * self.a.re
    }

    pub fn is_identity(&self) -> bool {
        self.b.norm() < IDENTITY_TOL
            && self.a.im.abs() < IDENTITY_TOL
            && (self.a.re.abs() - 1.0).abs() < IDENTITY_TOL
    }

    /// Matrix equality up to the overall sign (both signs give the same map).
    pub fn approx_eq(&self, other: &Self, tol: f64) -> bool {
        let direct = (self.a - other.a).norm() + (self.b - other.b).norm();
        let flipped = (self.a + other.a).norm() + (self.b + other.b).norm();
        direct.min(flipped) < tol
    }

    pub fn apply(&self, z: C64) -> Result<C64, GeometryError> {
        let den = self.b.conj() * z + self.a.conj();
        if den.norm() < 1e-300 {
            return Err(GeometryError::DegenerateDenominator);
        }
        Ok((self.a * z + self.b) / den)
    }

    /// Image angle of a boundary point given by its angle.
    pub fn apply_angle(&self, theta: f64) -> Result<f64, GeometryError> {
        let w = self.apply(C64::from_polar(1.0, theta))?;
        Ok(wrap_angle(w.arg()))
    }

    /// Euclidean derivative modulus `|g'(z)| = 1 / |conj(b) z + conj(a)|^2`.
    pub fn deriv_mod(&self, z: C64) -> Result<f64, GeometryError> {
        let den = self.b.conj() * z + self.a.conj();
        let n = den.norm_sqr();
        if n < 1e-300 {
            return Err(GeometryError::DegenerateDenominator);
        }
        Ok(1.0 / n)
    }

    /// `self ∘ other` (apply `other` first).
    pub fn compose(&self, other: &Self) -> Self {
        let a = self.a * other.a + self.b * other.b.conj();
        let b = self.a * other.b + self.b * other.a.conj();
        // Unit determinant is preserved exactly in exact arithmetic;
        // renormalize to absorb rounding.
        Self::new(a, b).expect("composition of disc maps stays disc-preserving")
    }

    pub fn inverse(&self) -> Self {
        Self {
            a: self.a.conj(),
            b: -self.b,
        }
    }

    pub fn classify(&self) -> Result<MapClass, GeometryError> {
        if self.is_identity() {
            return Err(GeometryError::IdentityMap);
        }
        let t = self.trace().abs();
        if t > 2.0 + TRACE_TOL {
            Ok(MapClass::Hyperbolic)
        } else if t > 2.0 - TRACE_TOL {
            Ok(MapClass::Parabolic)
        } else {
            Ok(MapClass::Elliptic)
        }
    }

    /// Fixed points on the unit circle: two for hyperbolic maps, one for
    /// parabolic maps, none for elliptic maps (their fixed point is interior).
    pub fn fixed_points(&self) -> Result<Vec<C64>, GeometryError> {
        // Roots of conj(b) z^2 + (conj(a) - a) z - b = 0.
        let class = self.classify()?;
        match class {
            MapClass::Parabolic => {
                // Double root.
                let z = C64::new(0.0, self.a.im) / self.b.conj();
                Ok(vec![z / z.norm()])
            }
            MapClass::Hyperbolic => {
                // Discriminant (conj(a)-a)^2 + 4 |b|^2 = 4 (Re(a)^2 - 1) > 0.
                let disc = (self.a.re * self.a.re - 1.0).max(0.0).sqrt();
                let im_a = C64::new(0.0, self.a.im);
                let z1 = (im_a + disc) / self.b.conj();
                let z2 = (im_a - disc) / self.b.conj();
                Ok(vec![z1 / z1.norm(), z2 / z2.norm()])
            }
            MapClass::Elliptic => Ok(Vec::new()),
        }
    }

    /// Exact `[min, max]` of `|g'|` over a boundary arc.
    ///
    /// On the circle `|conj(b) e^{i t} + conj(a)|^2 = 1 + 2|b|^2
    /// + 2|a||b| cos(t + arg(a conj(b)))`, so the range follows from the
    /// range of the cosine over the arc. The denominator is evaluated as
    /// `1/(|a|+|b|)^2 + 2|a||b| (1 + cos)` — an exact rearrangement under
    /// the unit determinant that stays positive without cancellation even
    /// for deep parabolic powers.
    pub fn deriv_mod_range(&self, arc: &Arc) -> (f64, f64) {
        let bn = self.b.norm();
        if bn < 1e-15 {
            return (1.0, 1.0);
        }
        let an = self.a.norm();
        let psi = (self.a * self.b.conj()).arg();
        let (cos_min, cos_max) = cos_range(arc.center() + psi, arc.halfwidth());
        let floor = 1.0 / ((an + bn) * (an + bn));
        let amp = 2.0 * an * bn;
        let den_max = floor + amp * (1.0 + cos_max);
        let den_min = floor + amp * (1.0 + cos_min);
        (1.0 / den_max, 1.0 / den_min)
    }

    /// The closed arc where `|g'| >= 1`. Center `pi - arg(a conj(b))`,
    /// halfwidth `arccos(|b| / |a|)`.
    pub fn isometry_arc(&self) -> Result<Arc, GeometryError> {
        let bn = self.b.norm();
        if bn < 1e-12 {
            return Err(GeometryError::ConstantDerivative);
        }
        let an = self.a.norm();
        let psi = (self.a * self.b.conj()).arg();
        let halfwidth = (bn / an).clamp(-1.0, 1.0).acos();
        Arc::new(PI - psi, halfwidth)
    }

    /// The arc `g^{-1}(arc)`. Boundary orientation is preserved, so the
    /// image of a counterclockwise arc is the counterclockwise arc between
    /// the endpoint images; the midpoint image is checked in debug builds.
    pub fn pullback_arc(&self, arc: &Arc) -> Result<Arc, GeometryError> {
        let inv = self.inverse();
        let lo = inv.apply_angle(arc.start())?;
        let hi = inv.apply_angle(arc.end())?;
        let width = ccw_distance(lo, hi);
        let out = Arc::new(lo + width / 2.0, width / 2.0)?;
        debug_assert!({
            let mid = inv.apply_angle(arc.center())?;
            out.contains(mid, 1e-6)
        });
        Ok(out)
    }

    /// Normalizes a parabolic matrix so that `Re(a) = +1` (trace +2).
    pub fn parabolic_normalized(&self) -> Result<Self, GeometryError> {
        if self.classify()? != MapClass::Parabolic {
            return Err(GeometryError::NotParabolic);
        }
        if self.a.re > 0.0 {
            Ok(*self)
        } else {
            Ok(Self {
                a: -self.a,
                b: -self.b,
            })
        }
    }

    /// `l`-th power of a parabolic map in closed form.
    ///
    /// With trace normalized to +2 the matrix is `I + N` with `N^2 = 0`,
    /// so the power is exactly `I + l N`; entries grow only linearly in `l`.
    pub fn parabolic_power(&self, l: u64) -> Result<Self, GeometryError> {
        let g = self.parabolic_normalized()?;
        if l == 0 {
            return Ok(Self::identity());
        }
        let lf = l as f64;
        let a = C64::new(1.0, 0.0) + (g.a - 1.0) * lf;
        let b = g.b * lf;
        Self::new(a, b)
    }
}

/// Range of `cos` over the angle interval `[c - w, c + w]`.
fn cos_range(center: f64, halfwidth: f64) -> (f64, f64) {
    if halfwidth >= PI {
        return (-1.0, 1.0);
    }
    let c = wrap_angle(center);
    let lo = c - halfwidth;
    let hi = c + halfwidth;
    let end_min = f64::min(lo.cos(), hi.cos());
    let end_max = f64::max(lo.cos(), hi.cos());
    // 0 (mod 2pi) inside the interval -> max is 1.
    let max = if lo <= 0.0 || hi >= TAU { 1.0 } else { end_max };
    // pi (mod 2pi) inside -> min is -1.
    let min = if (lo <= PI && hi >= PI) || lo <= PI - TAU || hi >= PI + TAU {
        -1.0
    } else {
        end_min
    };
    (min, max)
}

/// A proper closed arc of the unit circle, stored as center + halfwidth to
/// avoid endpoint wraparound ambiguity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Arc {
    center: f64,
    halfwidth: f64,
}

impl Arc {
    pub fn new(center: f64, halfwidth: f64) -> Result<Self, GeometryError> {
        if !(halfwidth > 0.0 && halfwidth < PI) || !halfwidth.is_finite() {
            return Err(GeometryError::InvalidArc { halfwidth });
        }
        Ok(Self {
            center: wrap_angle(center),
            halfwidth,
        })
    }

    /// Counterclockwise arc from `start` to `end`.
    pub fn from_endpoints_ccw(start: f64, end: f64) -> Result<Self, GeometryError> {
        let width = ccw_distance(start, end);
        Self::new(start + width / 2.0, width / 2.0)
    }

    pub fn center(&self) -> f64 {
        self.center
    }

    pub fn halfwidth(&self) -> f64 {
        self.halfwidth
    }

    pub fn start(&self) -> f64 {
        wrap_angle(self.center - self.halfwidth)
    }

    pub fn end(&self) -> f64 {
        wrap_angle(self.center + self.halfwidth)
    }

    pub fn length(&self) -> f64 {
        2.0 * self.halfwidth
    }

    pub fn contains(&self, theta: f64, tol: f64) -> bool {
        angular_distance(theta, self.center) <= self.halfwidth + tol
    }

    pub fn contains_arc(&self, other: &Arc, tol: f64) -> bool {
        angular_distance(other.center, self.center) + other.halfwidth <= self.halfwidth + tol
    }

    /// Minimal angular gap between two closed arcs; negative values measure
    /// the overlap depth.
    pub fn gap_to(&self, other: &Arc) -> f64 {
        angular_distance(self.center, other.center) - self.halfwidth - other.halfwidth
    }

    /// Intersection of two arcs when it is a single arc (the only case the
    /// cylinder machinery produces). Returns `None` when disjoint.
    pub fn intersect(&self, other: &Arc) -> Option<Arc> {
        if self.gap_to(other) > 0.0 {
            return None;
        }
        // Work in a frame centered on self; both intervals then live on
        // [-pi - w, pi + w] without wraparound for proper arcs.
        let d = {
            let raw = wrap_angle(other.center - self.center);
            if raw > PI {
                raw - TAU
            } else {
                raw
            }
        };
        let lo = (-self.halfwidth).max(d - other.halfwidth);
        let hi = self.halfwidth.min(d + other.halfwidth);
        if hi <= lo {
            return None;
        }
        Some(Arc {
            center: wrap_angle(self.center + (lo + hi) / 2.0),
            halfwidth: (hi - lo) / 2.0,
        })
    }
}
