//! Plane primitives: circles, circular domains, Möbius maps and Carleson squares.
//!
//! A circular domain `G` is the open outer disk with finitely many pairwise
//! disjoint closed disks removed. Boundary component `0` is the outer circle,
//! components `1..=n` are the inner circles in the order given.
//!
//! Each component `i` carries a Möbius map `f_i` that sends `C_i` onto the
//! unit circle and `G` into the unit disk:
//!
//! ```text
//! f_0(z) = (z - a_0) / r_0        f_i(z) = r_i / (z - a_i)   (i > 0)
//! ```
//!
//! A Carleson square on component `i` is the `f_i`-preimage of the disk square
//! `{ r e^{it} : 1 - h <= r < 1, t0 <= t < t0 + h }`. The angular interval is
//! half-open so that tiled squares never share atoms.

use std::f64::consts::{PI, TAU};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{CarlesonError, Result};

pub type ComplexPoint = Complex64;

const POLE_TOLERANCE: f64 = 1e-14;

/// Angle of `z` (relative to the origin) in `[0, 2π)`.
pub fn angle_of(z: Complex64) -> f64 {
    wrap_angle(z.im.atan2(z.re))
}

/// Reduces an angle to `[0, 2π)`.
pub fn wrap_angle(t: f64) -> f64 {
    let w = t.rem_euclid(TAU);
    if w >= TAU {
        0.0
    } else {
        w
    }
}

pub fn is_finite(z: Complex64) -> bool {
    z.re.is_finite() && z.im.is_finite()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Circle {
    pub center: Complex64,
    pub radius: f64,
}

impl Circle {
    pub fn new(center: Complex64, radius: f64) -> Result<Self> {
        if !is_finite(center) {
            return Err(CarlesonError::InvalidCircle(format!("non-finite center {center}")));
        }
        if !(radius.is_finite() && radius > 0.0) {
            return Err(CarlesonError::InvalidCircle(format!("radius {radius} must be positive")));
        }
        Ok(Self { center, radius })
    }

    pub fn point_at(&self, t: f64) -> Complex64 {
        self.center + Complex64::from_polar(self.radius, t)
    }

    /// Angle of `z` seen from the center, in `[0, 2π)`.
    pub fn angle_of(&self, z: Complex64) -> f64 {
        angle_of(z - self.center)
    }

    /// Unsigned distance from `z` to the circle.
    pub fn distance(&self, z: Complex64) -> f64 {
        ((z - self.center).norm() - self.radius).abs()
    }

    pub fn length(&self) -> f64 {
        TAU * self.radius
    }
}

/// Nearest boundary point of a circular domain.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundaryHit {
    pub component: usize,
    pub angle: f64,
    pub distance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "CircularDomainSpec", into = "CircularDomainSpec")]
pub struct CircularDomain {
    outer: Circle,
    inner: Vec<Circle>,
}

/// Wire form: `{ "outer": {"center":[x,y],"radius":r}, "inner": [ ... ] }`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CircularDomainSpec {
    pub outer: CircleSpec,
    #[serde(default)]
    pub inner: Vec<CircleSpec>,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct CircleSpec {
    pub center: [f64; 2],
    pub radius: f64,
}

impl TryFrom<CircularDomainSpec> for CircularDomain {
    type Error = CarlesonError;

    fn try_from(spec: CircularDomainSpec) -> Result<Self> {
        let circle = |c: CircleSpec| Circle::new(Complex64::new(c.center[0], c.center[1]), c.radius);
        let outer = circle(spec.outer)?;
        let inner = spec.inner.into_iter().map(circle).collect::<Result<Vec<_>>>()?;
        CircularDomain::new(outer, inner)
    }
}

impl From<CircularDomain> for CircularDomainSpec {
    fn from(d: CircularDomain) -> Self {
        let spec = |c: &Circle| CircleSpec { center: [c.center.re, c.center.im], radius: c.radius };
        CircularDomainSpec { outer: spec(&d.outer), inner: d.inner.iter().map(spec).collect() }
    }
}

impl CircularDomain {
    pub fn new(outer: Circle, inner: Vec<Circle>) -> Result<Self> {
        for (i, c) in inner.iter().enumerate() {
            if (c.center - outer.center).norm() + c.radius >= outer.radius {
                return Err(CarlesonError::InvalidDomain(format!(
                    "inner circle {} is not strictly inside the outer circle",
                    i + 1
                )));
            }
            for (j, d) in inner.iter().enumerate().skip(i + 1) {
                if (c.center - d.center).norm() <= c.radius + d.radius {
                    return Err(CarlesonError::InvalidDomain(format!(
                        "inner disks {} and {} intersect",
                        i + 1,
                        j + 1
                    )));
                }
            }
        }
        Ok(Self { outer, inner })
    }

    pub fn unit_disk() -> Self {
        Self { outer: Circle { center: Complex64::new(0.0, 0.0), radius: 1.0 }, inner: Vec::new() }
    }

    pub fn disk(center: Complex64, radius: f64) -> Result<Self> {
        Self::new(Circle::new(center, radius)?, Vec::new())
    }

    /// `{ inner_radius < |z| < 1 }`.
    pub fn annulus(inner_radius: f64) -> Result<Self> {
        let origin = Complex64::new(0.0, 0.0);
        Self::new(Circle::new(origin, 1.0)?, vec![Circle::new(origin, inner_radius)?])
    }

    pub fn outer(&self) -> &Circle {
        &self.outer
    }

    pub fn inner(&self) -> &[Circle] {
        &self.inner
    }

    /// Boundary circle `i` (0 = outer).
    pub fn circle(&self, i: usize) -> &Circle {
        if i == 0 {
            &self.outer
        } else {
            &self.inner[i - 1]
        }
    }

    pub fn circles(&self) -> impl Iterator<Item = &Circle> {
        std::iter::once(&self.outer).chain(self.inner.iter())
    }

    pub fn component_count(&self) -> usize {
        self.inner.len() + 1
    }

    pub fn connectivity(&self) -> usize {
        self.component_count()
    }

    pub fn contains(&self, z: Complex64) -> bool {
        is_finite(z)
            && (z - self.outer.center).norm() < self.outer.radius
            && self.inner.iter().all(|c| (z - c.center).norm() > c.radius)
    }

    /// Nearest boundary point; ties go to the lower component index.
    pub fn nearest_boundary(&self, z: Complex64) -> BoundaryHit {
        let mut best = BoundaryHit {
            component: 0,
            angle: self.outer.angle_of(z),
            distance: self.outer.distance(z),
        };
        for (k, c) in self.inner.iter().enumerate() {
            let d = c.distance(z);
            if d < best.distance {
                best = BoundaryHit { component: k + 1, angle: c.angle_of(z), distance: d };
            }
        }
        best
    }

    pub fn boundary_distance(&self, z: Complex64) -> f64 {
        self.nearest_boundary(z).distance
    }

    pub fn boundary_length(&self) -> f64 {
        self.circles().map(Circle::length).sum()
    }

    /// Area centroid of `G`.
    pub fn centroid(&self) -> Complex64 {
        let area = |c: &Circle| PI * c.radius * c.radius;
        let mut total = area(&self.outer);
        let mut moment = self.outer.center * total;
        for c in &self.inner {
            total -= area(c);
            moment -= c.center * area(c);
        }
        moment / total
    }
}

/// `z ↦ (az + b) / (cz + d)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MobiusMap {
    pub a: Complex64,
    pub b: Complex64,
    pub c: Complex64,
    pub d: Complex64,
}

impl MobiusMap {
    pub fn new(a: Complex64, b: Complex64, c: Complex64, d: Complex64) -> Result<Self> {
        let m = Self { a, b, c, d };
        if ![a, b, c, d].into_iter().all(is_finite) {
            return Err(CarlesonError::InvalidMap("non-finite Möbius coefficient".into()));
        }
        let det = m.normalized_determinant();
        if det.norm() <= 1e-14 {
            return Err(CarlesonError::DegenerateMobius { det: det.norm() });
        }
        Ok(m)
    }

    pub fn identity() -> Self {
        let one = Complex64::new(1.0, 0.0);
        let zero = Complex64::new(0.0, 0.0);
        Self { a: one, b: zero, c: zero, d: one }
    }

    /// Disk automorphism `z ↦ (z - p) / (1 - conj(p) z)`, `|p| < 1`.
    pub fn disk_automorphism(p: Complex64) -> Result<Self> {
        if p.norm() >= 1.0 {
            return Err(CarlesonError::InvalidMap(format!("automorphism parameter {p} not in the disk")));
        }
        let one = Complex64::new(1.0, 0.0);
        Self::new(one, -p, -p.conj(), one)
    }

    fn max_coefficient(&self) -> f64 {
        [self.a, self.b, self.c, self.d].iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    fn normalized_determinant(&self) -> Complex64 {
        let s = self.max_coefficient();
        if s == 0.0 {
            return Complex64::new(0.0, 0.0);
        }
        (self.a * self.d - self.b * self.c) / (s * s)
    }

    /// Scales coefficients so the largest has magnitude one.
    pub fn normalized(&self) -> Self {
        let s = self.max_coefficient();
        Self { a: self.a / s, b: self.b / s, c: self.c / s, d: self.d / s }
    }

    pub fn apply(&self, z: Complex64) -> Result<Complex64> {
        let den = self.c * z + self.d;
        let scale = self.max_coefficient().max(1.0) * z.norm().max(1.0);
        if den.norm() < POLE_TOLERANCE * scale {
            return Err(CarlesonError::PoleHit { z });
        }
        Ok((self.a * z + self.b) / den)
    }

    pub fn derivative(&self, z: Complex64) -> Result<Complex64> {
        let den = self.c * z + self.d;
        if den.norm() < POLE_TOLERANCE * self.max_coefficient().max(1.0) * z.norm().max(1.0) {
            return Err(CarlesonError::PoleHit { z });
        }
        Ok((self.a * self.d - self.b * self.c) / (den * den))
    }

    /// `self ∘ inner`.
    pub fn compose(&self, inner: &MobiusMap) -> MobiusMap {
        MobiusMap {
            a: self.a * inner.a + self.b * inner.c,
            b: self.a * inner.b + self.b * inner.d,
            c: self.c * inner.a + self.d * inner.c,
            d: self.c * inner.b + self.d * inner.d,
        }
        .normalized()
    }

    pub fn inverse(&self) -> MobiusMap {
        MobiusMap { a: self.d, b: -self.b, c: -self.c, d: self.a }.normalized()
    }

    /// The finite pole `-d/c`, if any.
    pub fn pole(&self) -> Option<Complex64> {
        if self.c.norm() <= POLE_TOLERANCE * self.max_coefficient() {
            None
        } else {
            Some(-self.d / self.c)
        }
    }

    /// Equality as projective matrices: coefficients agree up to a common
    /// nonzero scalar.
    pub fn projectively_equal(&self, other: &MobiusMap, tol: f64) -> bool {
        let u = self.normalized();
        let v = other.normalized();
        let pairs = [(u.a, v.a), (u.b, v.b), (u.c, v.c), (u.d, v.d)];
        let Some(&(p, q)) = pairs.iter().max_by(|x, y| x.0.norm().total_cmp(&y.0.norm())) else {
            return false;
        };
        if q.norm() == 0.0 {
            return false;
        }
        let lambda = p / q;
        pairs.iter().all(|&(x, y)| (x - lambda * y).norm() <= tol)
    }

    pub fn is_identity(&self) -> bool {
        self.projectively_equal(&MobiusMap::identity(), 1e-15)
    }
}

/// The maps `[f_0, f_1, ..., f_n]` that send each boundary circle onto the
/// unit circle and `G` into the unit disk.
pub fn boundary_maps(domain: &CircularDomain) -> Vec<MobiusMap> {
    domain.circles().enumerate().map(|(i, c)| boundary_map(c, i == 0)).collect()
}

fn boundary_map(c: &Circle, outer: bool) -> MobiusMap {
    let one = Complex64::new(1.0, 0.0);
    let zero = Complex64::new(0.0, 0.0);
    let r = Complex64::new(c.radius, 0.0);
    if outer {
        MobiusMap { a: one, b: -c.center, c: zero, d: r }
    } else {
        MobiusMap { a: zero, b: r, c: one, d: -c.center }
    }
}

pub fn boundary_map_for(domain: &CircularDomain, i: usize) -> MobiusMap {
    boundary_map(domain.circle(i), i == 0)
}

/// `f_i^{-1}` in closed form.
pub fn boundary_map_inverse(domain: &CircularDomain, i: usize, w: Complex64) -> Complex64 {
    let c = domain.circle(i);
    if i == 0 {
        c.center + w * c.radius
    } else {
        c.center + c.radius / w
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CarlesonSquare {
    pub boundary_index: usize,
    pub depth: f64,
    pub anchor: f64,
}

impl CarlesonSquare {
    pub fn new(boundary_index: usize, depth: f64, anchor: f64) -> Result<Self> {
        if !(depth > 0.0 && depth <= 1.0) {
            return Err(CarlesonError::InvalidSquare(format!("depth {depth} outside (0, 1]")));
        }
        if !anchor.is_finite() {
            return Err(CarlesonError::InvalidSquare("non-finite anchor".into()));
        }
        Ok(Self { boundary_index, depth, anchor: wrap_angle(anchor) })
    }

    /// Checks the square against a domain: index in range and depth within the
    /// admissible cap.
    pub fn validate_for(&self, domain: &CircularDomain) -> Result<()> {
        if self.boundary_index >= domain.component_count() {
            return Err(CarlesonError::InvalidSquare(format!(
                "boundary index {} out of range",
                self.boundary_index
            )));
        }
        let cap = admissible_depth(domain, self.boundary_index);
        if self.depth > cap {
            return Err(CarlesonError::InvalidSquare(format!(
                "depth {} exceeds admissible depth {cap} of component {}",
                self.depth, self.boundary_index
            )));
        }
        Ok(())
    }

    /// Membership of a unit-disk point `w` in the disk square.
    ///
    /// The origin has no angle; it is assigned the anchor, so it belongs to
    /// the square iff `depth == 1`.
    pub fn contains_disk_point(&self, w: Complex64) -> bool {
        let r = w.norm();
        if r >= 1.0 || r < 1.0 - self.depth {
            return false;
        }
        if r == 0.0 {
            return true;
        }
        (angle_of(w) - self.anchor).rem_euclid(TAU) < self.depth
    }
}

/// Membership of `z ∈ G` in the `f_i`-preimage of the disk square.
pub fn square_contains(domain: &CircularDomain, square: &CarlesonSquare, z: Complex64) -> bool {
    match boundary_map_for(domain, square.boundary_index).apply(z) {
        Ok(w) => square.contains_disk_point(w),
        Err(_) => false,
    }
}

/// Largest uniform depth cap `h*` for component `i`: for every `h <= h*` and
/// every anchor, the square stays inside `G` and touches only `C_i`.
///
/// The bound is annular: the preimage of `{1 - h <= |w| < 1}` must miss every
/// other closed boundary disk.
pub fn admissible_depth(domain: &CircularDomain, i: usize) -> f64 {
    let outer = domain.outer();
    if i == 0 {
        domain
            .inner()
            .iter()
            .map(|c| 1.0 - ((c.center - outer.center).norm() + c.radius) / outer.radius)
            .fold(1.0, f64::min)
    } else {
        let own = domain.circle(i);
        let mut reach = outer.radius - (own.center - outer.center).norm();
        for (k, c) in domain.inner().iter().enumerate() {
            if k + 1 != i {
                reach = reach.min((own.center - c.center).norm() - c.radius);
            }
        }
        (1.0 - own.radius / reach).min(1.0)
    }
}

/// Length of `S̄ ∩ ∂G` in original coordinates: `|f_i'| = 1 / r_i` on `C_i`.
pub fn square_arclength(domain: &CircularDomain, square: &CarlesonSquare) -> f64 {
    domain.circle(square.boundary_index).radius * square.depth
}
