//! Exactly representable conformal maps and domains presented through them.
//!
//! The map algebra is closed under composition: Möbius maps, the univalent
//! quadratics `z ↦ z + βz²` (`|β| < 1/2`), and finite compositions of these.
//! A [`PresentedDomain`] is the image `G = α(W)` of a circular domain `W` under
//! a chart `α` that is univalent on `W̄`. Harmonic measure is conformally
//! invariant, so boundary integrals on `G` are computed on `∂W`.

use std::f64::consts::TAU;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{CarlesonError, Result};
use crate::geometry::{boundary_maps, CircularDomain, MobiusMap};
use crate::measure::{Atom, AtomicMeasure};

const NEWTON_MAX_ITER: usize = 100;
const NEWTON_TOL: f64 = 1e-12;
const SEED_GRID: usize = 32;
const SEEDS_TRIED: usize = 8;
pub const UNIVALENCE_TOLERANCE: f64 = 1e-3;

/// Composition lists are applied first to last: `Composition([g, h])` is `h ∘ g`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "MapSpec", into = "MapSpec")]
pub enum ConformalMap {
    Mobius(MobiusMap),
    QuadPoly { beta: Complex64 },
    Composition(Vec<ConformalMap>),
}

/// Wire form: `{"kind":"mobius","coeffs":[a,b,c,d]}` with each coefficient
/// `[re, im]`, `{"kind":"quadpoly","beta":[re, im]}`, or
/// `{"kind":"compose","maps":[...]}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum MapSpec {
    Mobius { coeffs: [[f64; 2]; 4] },
    Quadpoly { beta: [f64; 2] },
    Compose { maps: Vec<MapSpec> },
}

impl TryFrom<MapSpec> for ConformalMap {
    type Error = CarlesonError;

    fn try_from(spec: MapSpec) -> Result<Self> {
        let c = |v: [f64; 2]| Complex64::new(v[0], v[1]);
        match spec {
            MapSpec::Mobius { coeffs } => Ok(ConformalMap::Mobius(MobiusMap::new(
                c(coeffs[0]),
                c(coeffs[1]),
                c(coeffs[2]),
                c(coeffs[3]),
            )?)),
            MapSpec::Quadpoly { beta } => ConformalMap::quad_poly(c(beta)),
            MapSpec::Compose { maps } => {
                ConformalMap::compose(maps.into_iter().map(ConformalMap::try_from).collect::<Result<_>>()?)
            }
        }
    }
}

impl From<ConformalMap> for MapSpec {
    fn from(map: ConformalMap) -> Self {
        let c = |z: Complex64| [z.re, z.im];
        match map {
            ConformalMap::Mobius(m) => MapSpec::Mobius { coeffs: [c(m.a), c(m.b), c(m.c), c(m.d)] },
            ConformalMap::QuadPoly { beta } => MapSpec::Quadpoly { beta: c(beta) },
            ConformalMap::Composition(maps) => MapSpec::Compose { maps: maps.into_iter().map(Into::into).collect() },
        }
    }
}

impl ConformalMap {
    pub fn identity() -> Self {
        ConformalMap::Mobius(MobiusMap::identity())
    }

    pub fn quad_poly(beta: Complex64) -> Result<Self> {
        if !(beta.norm() < 0.5) {
            return Err(CarlesonError::InvalidMap(format!("quadratic coefficient {beta} needs |β| < 1/2")));
        }
        Ok(ConformalMap::QuadPoly { beta })
    }

    pub fn compose(maps: Vec<ConformalMap>) -> Result<Self> {
        if maps.is_empty() {
            return Err(CarlesonError::InvalidMap("empty composition".into()));
        }
        Ok(ConformalMap::Composition(maps))
    }

    /// Value and complex derivative (chain rule through compositions).
    pub fn apply_with_derivative(&self, z: Complex64) -> Result<(Complex64, Complex64)> {
        match self {
            ConformalMap::Mobius(m) => Ok((m.apply(z)?, m.derivative(z)?)),
            ConformalMap::QuadPoly { beta } => Ok((z + beta * z * z, 1.0 + 2.0 * beta * z)),
            ConformalMap::Composition(maps) => {
                let mut value = z;
                let mut derivative = Complex64::new(1.0, 0.0);
                for m in maps {
                    let (v, d) = m.apply_with_derivative(value)?;
                    value = v;
                    derivative *= d;
                }
                Ok((value, derivative))
            }
        }
    }

    pub fn apply(&self, z: Complex64) -> Result<Complex64> {
        match self {
            ConformalMap::Mobius(m) => m.apply(z),
            ConformalMap::QuadPoly { beta } => Ok(z + beta * z * z),
            ConformalMap::Composition(maps) => maps.iter().try_fold(z, |v, m| m.apply(v)),
        }
    }

    pub fn derivative(&self, z: Complex64) -> Result<Complex64> {
        self.apply_with_derivative(z).map(|(_, d)| d)
    }

    /// The single Möbius map equal to this one, when every stage is Möbius.
    pub fn as_mobius(&self) -> Option<MobiusMap> {
        match self {
            ConformalMap::Mobius(m) => Some(*m),
            ConformalMap::QuadPoly { .. } => None,
            ConformalMap::Composition(maps) => maps
                .iter()
                .try_fold(MobiusMap::identity(), |acc, m| m.as_mobius().map(|s| s.compose(&acc))),
        }
    }

    pub fn is_identity(&self) -> bool {
        self.as_mobius().is_some_and(|m| m.is_identity())
    }

    /// Preimage of `w`. Möbius maps are inverted exactly; otherwise Newton
    /// iteration from `guess`, stage by stage through compositions and then
    /// polished on the whole map, to residual `1e-12 · max(1, |w|)`.
    pub fn invert(&self, w: Complex64, guess: Complex64) -> Result<Complex64> {
        if let Some(m) = self.as_mobius() {
            return m.inverse().apply(w);
        }
        let staged = match self {
            ConformalMap::Composition(maps) => invert_stages(maps, w, guess).unwrap_or(guess),
            _ => guess,
        };
        newton(|z| self.apply_with_derivative(z), w, staged)
    }
}

fn invert_stages(maps: &[ConformalMap], w: Complex64, guess: Complex64) -> Result<Complex64> {
    let mut guesses = Vec::with_capacity(maps.len());
    let mut g = guess;
    for m in maps {
        guesses.push(g);
        g = m.apply(g)?;
    }
    let mut target = w;
    for (m, g) in maps.iter().zip(guesses).rev() {
        target = m.invert(target, g)?;
    }
    Ok(target)
}

fn newton(f: impl Fn(Complex64) -> Result<(Complex64, Complex64)>, w: Complex64, guess: Complex64) -> Result<Complex64> {
    let tol = NEWTON_TOL * w.norm().max(1.0);
    let mut z = guess;
    let (mut value, mut slope) = f(z)?;
    let mut residual = (value - w).norm();
    for _ in 0..NEWTON_MAX_ITER {
        if residual <= tol {
            // two polishing steps, kept only while they help
            for _ in 0..2 {
                if slope.norm() == 0.0 {
                    break;
                }
                let candidate = z - (value - w) / slope;
                match f(candidate) {
                    Ok((v, d)) if (v - w).norm() < residual => {
                        z = candidate;
                        value = v;
                        slope = d;
                        residual = (v - w).norm();
                    }
                    _ => break,
                }
            }
            return Ok(z);
        }
        if slope.norm() == 0.0 || !slope.re.is_finite() {
            break;
        }
        let step = (value - w) / slope;
        let mut lambda = 1.0;
        loop {
            let candidate = z - step * lambda;
            if let Ok((v, d)) = f(candidate) {
                let r = (v - w).norm();
                if r < residual || lambda < 1e-6 {
                    z = candidate;
                    value = v;
                    slope = d;
                    residual = r;
                    break;
                }
            }
            lambda *= 0.5;
            if lambda < 1e-6 {
                return Err(CarlesonError::NoConvergence { target: w, residual });
            }
        }
    }
    Err(CarlesonError::NoConvergence { target: w, residual })
}

/// `G = chart(base)`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(try_from = "PresentedSpec", into = "PresentedSpec")]
pub struct PresentedDomain {
    base: CircularDomain,
    chart: ConformalMap,
    /// `(u, chart(u))` on a polar grid inside the base, used to seed Newton.
    seeds: Vec<(Complex64, Complex64)>,
}

impl PartialEq for PresentedDomain {
    fn eq(&self, other: &Self) -> bool {
        self.base == other.base && self.chart == other.chart
    }
}

/// Wire form: `{"base": <domain>, "chart": <map>}`; the chart defaults to the identity.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PresentedSpec {
    pub base: CircularDomain,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub chart: Option<ConformalMap>,
}

impl TryFrom<PresentedSpec> for PresentedDomain {
    type Error = CarlesonError;

    fn try_from(spec: PresentedSpec) -> Result<Self> {
        PresentedDomain::new(spec.base, spec.chart.unwrap_or_else(ConformalMap::identity))
    }
}

impl From<PresentedDomain> for PresentedSpec {
    fn from(p: PresentedDomain) -> Self {
        let chart = if p.chart.is_identity() { None } else { Some(p.chart) };
        PresentedSpec { base: p.base, chart }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UnivalenceReport {
    pub passed: bool,
    /// `min |α(a) - α(b)| / |a - b|` over distinct mesh points.
    pub min_ratio: f64,
    pub tolerance: f64,
    pub mesh: usize,
}

impl PresentedDomain {
    /// Validates that the chart is analytic with nonvanishing derivative on a
    /// boundary mesh and passes the univalence audit.
    pub fn new(base: CircularDomain, chart: ConformalMap) -> Result<Self> {
        let presented = Self::unvalidated(base, chart)?;
        for (_, u, _) in presented.boundary_mesh(256) {
            let d = presented.chart.derivative(u)?;
            if d.norm() < 1e-12 {
                return Err(CarlesonError::InvalidMap(format!("chart derivative vanishes near {u}")));
            }
        }
        if let Some(m) = presented.chart.as_mobius() {
            if let Some(p) = m.pole() {
                if presented.base.contains(p) || presented.base.boundary_distance(p) < 1e-9 {
                    return Err(CarlesonError::InvalidMap(format!("chart pole {p} lies in the closed base")));
                }
            }
        }
        let audit = univalence_audit(&presented, 512);
        if !audit.passed {
            return Err(CarlesonError::InvalidMap(format!(
                "chart fails the univalence audit (min ratio {:e})",
                audit.min_ratio
            )));
        }
        Ok(presented)
    }

    /// Builds the presentation without the univalence checks.
    pub fn unvalidated(base: CircularDomain, chart: ConformalMap) -> Result<Self> {
        let outer = *base.outer();
        let mut seeds = Vec::new();
        for j in 0..SEED_GRID {
            let r = outer.radius * (j as f64 + 0.5) / SEED_GRID as f64;
            for k in 0..SEED_GRID {
                let u = outer.center + Complex64::from_polar(r, TAU * k as f64 / SEED_GRID as f64);
                if base.contains(u) {
                    seeds.push((u, chart.apply(u)?));
                }
            }
        }
        Ok(Self { base, chart, seeds })
    }

    pub fn circular(domain: CircularDomain) -> Self {
        Self::unvalidated(domain, ConformalMap::identity()).expect("identity chart is total")
    }

    pub fn base(&self) -> &CircularDomain {
        &self.base
    }

    pub fn chart(&self) -> &ConformalMap {
        &self.chart
    }

    pub fn is_circular(&self) -> bool {
        self.chart.is_identity()
    }

    /// The unique preimage of `z` in the base, if `z ∈ G`.
    pub fn preimage(&self, z: Complex64) -> Result<Option<Complex64>> {
        if self.is_circular() {
            return Ok(self.base.contains(z).then_some(z));
        }
        if let Some(m) = self.chart.as_mobius() {
            let u = m.inverse().apply(z)?;
            return Ok(self.base.contains(u).then_some(u));
        }
        let mut order: Vec<usize> = (0..self.seeds.len()).collect();
        order.sort_by(|&a, &b| (self.seeds[a].1 - z).norm().total_cmp(&(self.seeds[b].1 - z).norm()));
        let mut first_err = None;
        let mut converged = false;
        for &k in order.iter().take(SEEDS_TRIED) {
            match self.chart.invert(z, self.seeds[k].0) {
                Ok(u) if self.base.contains(u) => return Ok(Some(u)),
                Ok(_) => converged = true,
                Err(e) => first_err = first_err.or(Some(e)),
            }
        }
        // a converged preimage outside the base means z is outside G;
        // if every seed failed numerically there is no verdict
        match first_err {
            Some(e) if !converged => Err(e),
            _ => Ok(None),
        }
    }

    pub fn contains(&self, z: Complex64) -> bool {
        matches!(self.preimage(z), Ok(Some(_)))
    }

    /// `(component, base point, image point)` at `per_circle` equally spaced
    /// angles on every base circle.
    pub fn boundary_mesh(&self, per_circle: usize) -> Vec<(usize, Complex64, Complex64)> {
        let mut mesh = Vec::with_capacity(per_circle * self.base.component_count());
        for (i, c) in self.base.circles().enumerate() {
            for k in 0..per_circle {
                let u = c.point_at(TAU * k as f64 / per_circle as f64);
                if let Ok(z) = self.chart.apply(u) {
                    mesh.push((i, u, z));
                }
            }
        }
        mesh
    }

    /// Distance from `p` to `∂G`: coarse mesh search refined by golden-section
    /// minimization on each boundary circle.
    pub fn boundary_distance(&self, p: Complex64) -> f64 {
        if self.is_circular() {
            return self.base.boundary_distance(p);
        }
        let per_circle = 1024;
        let dt = TAU / per_circle as f64;
        let mut best = f64::INFINITY;
        for (i, c) in self.base.circles().enumerate() {
            let dist = |t: f64| self.chart.apply(c.point_at(t)).map(|z| (z - p).norm()).unwrap_or(f64::INFINITY);
            let (k_best, _) = (0..per_circle)
                .map(|k| (k, dist(dt * k as f64)))
                .min_by(|a, b| a.1.total_cmp(&b.1))
                .expect("nonempty mesh");
            let _ = i;
            best = best.min(golden_min(&dist, dt * (k_best as f64 - 1.0), dt * (k_best as f64 + 1.0)));
        }
        best
    }

    /// Chart image of a base point.
    pub fn to_image(&self, u: Complex64) -> Result<Complex64> {
        self.chart.apply(u)
    }
}

fn golden_min(f: &impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> f64 {
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let mut x1 = b - g * (b - a);
    let mut x2 = a + g * (b - a);
    let (mut f1, mut f2) = (f(x1), f(x2));
    for _ in 0..80 {
        if f1 < f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - g * (b - a);
            f1 = f(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + g * (b - a);
            f2 = f(x2);
        }
    }
    f1.min(f2)
}

/// Moves every atom of `μ` (on `G`) to its chart preimage: the measure `μ ∘ α`
/// on the base.
pub fn pushforward_measure(presented: &PresentedDomain, measure: &AtomicMeasure) -> Result<AtomicMeasure> {
    let atoms = measure
        .atoms()
        .iter()
        .enumerate()
        .map(|(index, a)| {
            let u = presented.preimage(a.z)?.ok_or(CarlesonError::AtomOutsideDomain { index, z: a.z })?;
            Ok(Atom { z: u, w: a.w })
        })
        .collect::<Result<Vec<_>>>()?;
    AtomicMeasure::new(atoms)
}

/// Moves every atom of a base measure to its chart image.
pub fn pushforward_to_image(presented: &PresentedDomain, measure: &AtomicMeasure) -> Result<AtomicMeasure> {
    measure.validate_in(presented.base())?;
    measure.pushforward(|u| presented.chart.apply(u))
}

/// Riemann maps of the simply connected hulls of a circular domain.
///
/// The hull of the outer circle is the outer disk, normalized to send its
/// center to 0 with positive derivative: `(z - a_0) / r_0`. The hull of an
/// inner circle is the exterior of that disk, normalized as `r_i / (z - a_i)`.
pub fn hull_riemann_maps(domain: &CircularDomain) -> Vec<ConformalMap> {
    let one = Complex64::new(1.0, 0.0);
    let zero = Complex64::new(0.0, 0.0);
    domain
        .circles()
        .enumerate()
        .map(|(i, c)| {
            let r = Complex64::new(c.radius, 0.0);
            let m = if i == 0 {
                // affine map with positive derivative sending the hull center to 0
                MobiusMap { a: one / r, b: -c.center / r, c: zero, d: one }
            } else {
                MobiusMap { a: zero, b: one, c: one / r, d: -c.center / r }
            };
            ConformalMap::Mobius(m)
        })
        .collect()
}

/// Mesh proxy for boundary univalence: every pair of distinct base boundary
/// mesh points must keep `|α(a) - α(b)| >= tolerance · |a - b|`.
pub fn univalence_audit(presented: &PresentedDomain, mesh: usize) -> UnivalenceReport {
    let mesh = mesh.max(64);
    let points = presented.boundary_mesh(mesh);
    let complete = points.len() == mesh * presented.base.component_count();
    let mut min_ratio = f64::INFINITY;
    for (k, &(_, a, fa)) in points.iter().enumerate() {
        for &(_, b, fb) in &points[k + 1..] {
            let ratio = (fa - fb).norm() / (a - b).norm();
            if ratio < min_ratio {
                min_ratio = ratio;
            }
        }
    }
    UnivalenceReport {
        passed: complete && min_ratio >= UNIVALENCE_TOLERANCE,
        min_ratio,
        tolerance: UNIVALENCE_TOLERANCE,
        mesh,
    }
}

/// Boundary maps of a circular domain as conformal maps.
pub fn boundary_charts(domain: &CircularDomain) -> Vec<ConformalMap> {
    boundary_maps(domain).into_iter().map(ConformalMap::Mobius).collect()
}
