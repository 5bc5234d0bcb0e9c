//! Harmonic measure: exact Poisson integrals on the disk, walk-on-spheres on
//! circular domains, and the weighted composite measure of an open set.

use std::f64::consts::TAU;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::conformal::PresentedDomain;
use crate::error::{CarlesonError, Result};
use crate::geometry::{wrap_angle, CircularDomain};
use crate::open_set::OpenSetDomain;
use crate::quadrature::{integrate, QuadOptions};

/// Walks per RNG stream. Chunk `c` always uses stream `c` of the master seed,
/// so results do not depend on the thread count.
pub const WALK_CHUNK: usize = 4096;
pub const DEFAULT_MAX_STEPS: usize = 100_000;
const ARC_TOL: f64 = 1e-12;

/// Poisson kernel density of `ω_{z0}` on the unit circle, per unit angle.
pub fn poisson_density(z0: Complex64, t: f64) -> f64 {
    (1.0 - z0.norm_sqr()) / (TAU * (Complex64::from_polar(1.0, t) - z0).norm_sqr())
}

/// `ω_{z0}([α, β))` on the unit disk by adaptive quadrature of the Poisson kernel.
pub fn harmonic_measure_disk(z0: Complex64, alpha: f64, beta: f64) -> Result<f64> {
    let r = z0.norm();
    if !(r < 1.0) {
        return Err(if (r - 1.0).abs() <= 1e-15 || r.is_nan() {
            CarlesonError::EvaluationPointOnBoundary { z: z0 }
        } else {
            CarlesonError::EvaluationPointOutsideDomain { z: z0 }
        });
    }
    if !(beta >= alpha && beta - alpha <= TAU + ARC_TOL) {
        return Err(CarlesonError::InvalidPartition(format!("bad arc [{alpha}, {beta})")));
    }
    if beta - alpha >= TAU - ARC_TOL {
        return Ok(1.0);
    }
    let opts = QuadOptions { initial_panels: 8, abs_tol: 1e-13, rel_tol: 1e-13, ..QuadOptions::default() };
    Ok(integrate(|t| poisson_density(z0, t), alpha, beta, opts).value)
}

/// An arc `[start, end)` of boundary circle `component`, angles measured
/// counterclockwise from the positive real direction at the circle center.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Arc {
    pub component: usize,
    pub start: f64,
    pub end: f64,
}

impl Arc {
    pub fn full(component: usize) -> Self {
        Self { component, start: 0.0, end: TAU }
    }

    pub fn length(&self) -> f64 {
        self.end - self.start
    }

    pub fn contains_angle(&self, t: f64) -> bool {
        wrap_angle(t - self.start) < self.length()
    }
}

/// Pairwise disjoint arcs; the union need not cover the boundary.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Arc>", into = "Vec<Arc>")]
pub struct BoundaryPartition {
    arcs: Vec<Arc>,
}

impl TryFrom<Vec<Arc>> for BoundaryPartition {
    type Error = CarlesonError;

    fn try_from(arcs: Vec<Arc>) -> Result<Self> {
        Self::new(arcs)
    }
}

impl From<BoundaryPartition> for Vec<Arc> {
    fn from(p: BoundaryPartition) -> Self {
        p.arcs
    }
}

impl BoundaryPartition {
    pub fn new(arcs: Vec<Arc>) -> Result<Self> {
        for (k, a) in arcs.iter().enumerate() {
            let len = a.length();
            if !(a.start.is_finite() && len > 0.0 && len <= TAU + ARC_TOL) {
                return Err(CarlesonError::InvalidPartition(format!("arc {k} has length {len}")));
            }
            for (j, b) in arcs.iter().enumerate().take(k) {
                if a.component == b.component
                    && (wrap_angle(a.start - b.start) < b.length() - ARC_TOL
                        || wrap_angle(b.start - a.start) < a.length() - ARC_TOL)
                {
                    return Err(CarlesonError::InvalidPartition(format!("arcs {j} and {k} overlap")));
                }
            }
        }
        Ok(Self { arcs })
    }

    /// One full-circle arc per boundary component.
    pub fn full_boundary(domain: &CircularDomain) -> Self {
        Self { arcs: (0..domain.component_count()).map(Arc::full).collect() }
    }

    /// `per_circle` equal arcs on every boundary circle, starting at angle 0.
    pub fn uniform(domain: &CircularDomain, per_circle: usize) -> Self {
        let per_circle = per_circle.max(1);
        let width = TAU / per_circle as f64;
        let arcs = (0..domain.component_count())
            .flat_map(|i| {
                (0..per_circle).map(move |k| Arc {
                    component: i,
                    start: width * k as f64,
                    end: if k + 1 == per_circle { TAU } else { width * (k + 1) as f64 },
                })
            })
            .collect();
        Self { arcs }
    }

    pub fn arcs(&self) -> &[Arc] {
        &self.arcs
    }

    pub fn len(&self) -> usize {
        self.arcs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.arcs.is_empty()
    }

    pub fn validate_for(&self, domain: &CircularDomain) -> Result<()> {
        match self.arcs.iter().position(|a| a.component >= domain.component_count()) {
            Some(k) => Err(CarlesonError::InvalidPartition(format!(
                "arc {k} refers to component {} of a {}-circle domain",
                self.arcs[k].component,
                domain.component_count()
            ))),
            None => Ok(()),
        }
    }

    /// Index of the arc containing angle `t` on circle `component`.
    pub fn locate(&self, component: usize, t: f64) -> Option<usize> {
        self.arcs.iter().position(|a| a.component == component && a.contains_angle(t))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WalkConfig {
    pub walks: usize,
    pub seed: u64,
    /// Absorption shell; `None` means `1e-3 ×` outer radius.
    pub absorption: Option<f64>,
    pub max_steps: usize,
}

impl Default for WalkConfig {
    fn default() -> Self {
        Self { walks: 10_000, seed: 0, absorption: None, max_steps: DEFAULT_MAX_STEPS }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HarmonicEstimate {
    pub z0: Complex64,
    pub walks: usize,
    pub probabilities: Vec<f64>,
    pub standard_errors: Vec<f64>,
    /// Fraction of walks absorbed outside every arc of the partition.
    pub unattributed: f64,
    pub capped_walks: usize,
}

/// Walk-on-spheres estimate of `ω_{z0}` on the arcs of `partition`.
///
/// Each step jumps to a uniform point on the largest circle about the current
/// point inside `G`; a walk stops within the absorption shell and is credited
/// to the arc holding its nearest boundary point.
pub fn harmonic_measure_mc(
    domain: &CircularDomain,
    z0: Complex64,
    partition: &BoundaryPartition,
    config: &WalkConfig,
) -> Result<HarmonicEstimate> {
    if !domain.contains(z0) {
        return Err(CarlesonError::EvaluationPointOutsideDomain { z: z0 });
    }
    if config.walks == 0 {
        return Err(CarlesonError::InvalidParameter("walk count must be at least 1".into()));
    }
    partition.validate_for(domain)?;
    let eps = config.absorption.unwrap_or(1e-3 * domain.outer().radius);
    if !(eps > 0.0) {
        return Err(CarlesonError::InvalidParameter(format!("absorption shell {eps} must be positive")));
    }

    let chunks = config.walks.div_ceil(WALK_CHUNK);
    let arcs = partition.len();
    let (counts, capped) = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
            rng.set_stream(c as u64);
            let n = WALK_CHUNK.min(config.walks - c * WALK_CHUNK);
            let mut counts = vec![0usize; arcs + 1];
            let mut capped = 0usize;
            for _ in 0..n {
                let (component, angle, hit_cap) = walk(domain, z0, eps, config.max_steps, &mut rng);
                capped += hit_cap as usize;
                let slot = partition.locate(component, angle).unwrap_or(arcs);
                counts[slot] += 1;
            }
            (counts, capped)
        })
        .reduce(
            || (vec![0usize; arcs + 1], 0usize),
            |(mut a, ca), (b, cb)| {
                a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
                (a, ca + cb)
            },
        );

    let n = config.walks as f64;
    let probabilities: Vec<f64> = counts[..arcs].iter().map(|&k| k as f64 / n).collect();
    let standard_errors = probabilities.iter().map(|p| (p * (1.0 - p) / n).sqrt()).collect();
    Ok(HarmonicEstimate {
        z0,
        walks: config.walks,
        probabilities,
        standard_errors,
        unattributed: counts[arcs] as f64 / n,
        capped_walks: capped,
    })
}

fn walk(domain: &CircularDomain, z0: Complex64, eps: f64, max_steps: usize, rng: &mut ChaCha8Rng) -> (usize, f64, bool) {
    let mut z = z0;
    for _ in 0..max_steps {
        let hit = domain.nearest_boundary(z);
        if hit.distance <= eps {
            return (hit.component, hit.angle, false);
        }
        let theta = rng.gen::<f64>() * TAU;
        z += Complex64::from_polar(hit.distance, theta);
    }
    let hit = domain.nearest_boundary(z);
    (hit.component, hit.angle, true)
}

/// Default evaluation point of a circular domain: the outer center, else the
/// area centroid, else the point of a polar grid farthest from the boundary.
pub fn default_evaluation_point(domain: &CircularDomain) -> Complex64 {
    let outer = domain.outer();
    if domain.contains(outer.center) {
        return outer.center;
    }
    let centroid = domain.centroid();
    if domain.contains(centroid) {
        return centroid;
    }
    let mut best = (outer.center, f64::NEG_INFINITY);
    for j in 1..64 {
        let r = outer.radius * j as f64 / 64.0;
        for k in 0..64 {
            let z = outer.center + Complex64::from_polar(r, TAU * k as f64 / 64.0);
            if domain.contains(z) {
                let d = domain.boundary_distance(z);
                if d > best.1 {
                    best = (z, d);
                }
            }
        }
    }
    best.0
}

/// Per-arc masses of `ω` on one presented component, for arcs on its base
/// circles, evaluated at the chart image of `base_point` (the default
/// evaluation point of the base when `None`). Disk bases use the exact
/// Poisson integral (zero standard error); others use walk-on-spheres.
pub fn component_harmonic(
    component: &PresentedDomain,
    partition: &BoundaryPartition,
    base_point: Option<Complex64>,
    config: &WalkConfig,
) -> Result<HarmonicEstimate> {
    let base = component.base();
    partition.validate_for(base)?;
    let u0 = base_point.unwrap_or_else(|| default_evaluation_point(base));
    if !base.contains(u0) {
        return Err(CarlesonError::EvaluationPointOutsideDomain { z: u0 });
    }
    let z0 = component.to_image(u0)?;
    if base.inner().is_empty() {
        let outer = base.outer();
        let w0 = (u0 - outer.center) / outer.radius;
        let probabilities = partition
            .arcs()
            .iter()
            .map(|a| harmonic_measure_disk(w0, a.start, a.end))
            .collect::<Result<Vec<_>>>()?;
        let covered: f64 = probabilities.iter().sum();
        return Ok(HarmonicEstimate {
            z0,
            walks: 0,
            standard_errors: vec![0.0; probabilities.len()],
            probabilities,
            unattributed: (1.0 - covered).max(0.0),
            capped_walks: 0,
        });
    }
    let mut estimate = harmonic_measure_mc(base, u0, partition, config)?;
    estimate.z0 = z0;
    Ok(estimate)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CompositeArcMass {
    pub component: usize,
    pub arc: Arc,
    pub mass: f64,
    pub standard_error: f64,
}

/// `ω(arc) = weight_n · ω_{G_n}(arc)` for arcs on the base circles of
/// component `n` (0-based; the weights follow the open set's component order).
pub fn open_set_harmonic(
    open_set: &OpenSetDomain,
    requests: &[(usize, BoundaryPartition)],
    config: &WalkConfig,
) -> Result<Vec<CompositeArcMass>> {
    let mut out = Vec::new();
    for (n, partition) in requests {
        let component = open_set.components().get(*n).ok_or_else(|| {
            CarlesonError::InvalidParameter(format!("open set has no component {n}"))
        })?;
        let weight = open_set.weights()[*n];
        let estimate = component_harmonic(component, partition, None, config)?;
        for (k, arc) in partition.arcs().iter().enumerate() {
            out.push(CompositeArcMass {
                component: *n,
                arc: *arc,
                mass: weight * estimate.probabilities[k],
                standard_error: weight * estimate.standard_errors[k],
            });
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SingularityVerdict {
    /// Component closures are pairwise disjoint, so the harmonic measures
    /// have disjoint carriers.
    Disjoint,
    /// The sufficient condition could not be certified for `pair`.
    Indeterminate,
    /// Fewer than two components.
    Vacuous,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SingularityCertificate {
    pub verdict: SingularityVerdict,
    /// Certified lower bound on the smallest boundary-to-boundary gap.
    pub min_gap: Option<f64>,
    pub pair: Option<(usize, usize)>,
}

impl SingularityCertificate {
    pub fn is_singular(&self) -> bool {
        self.verdict != SingularityVerdict::Indeterminate
    }
}

const SINGULARITY_MESH: usize = 512;

/// Certifies mutual singularity of the component harmonic measures through
/// the sufficient condition that component closures are pairwise disjoint.
///
/// Boundaries are compared on image meshes; the mesh distance minus the mesh
/// spacing bounds the true gap from below. Disjoint boundaries still allow
/// nesting, which is excluded by checking one point of every boundary curve
/// against the other component.
pub fn mutually_singular_check(components: &[PresentedDomain]) -> SingularityCertificate {
    if components.len() < 2 {
        return SingularityCertificate { verdict: SingularityVerdict::Vacuous, min_gap: None, pair: None };
    }
    let meshes: Vec<_> = components.iter().map(|c| c.boundary_mesh(SINGULARITY_MESH)).collect();
    let spacing: Vec<f64> = meshes.iter().map(|m| mesh_spacing(m)).collect();
    let indeterminate =
        |i, j| SingularityCertificate { verdict: SingularityVerdict::Indeterminate, min_gap: None, pair: Some((i, j)) };
    let mut min_gap = f64::INFINITY;
    for i in 0..components.len() {
        for j in i + 1..components.len() {
            let mut d = f64::INFINITY;
            for &(_, _, a) in &meshes[i] {
                for &(_, _, b) in &meshes[j] {
                    d = d.min((a - b).norm());
                }
            }
            let gap = d - spacing[i] - spacing[j];
            if !(gap > 0.0) {
                return indeterminate(i, j);
            }
            // boundaries are disjoint, so each boundary curve lies wholly inside or outside the other component
            let crosses = |from: usize, into: usize| {
                components[from].boundary_mesh(1).iter().any(|&(_, _, z)| components[into].contains(z))
            };
            if crosses(i, j) || crosses(j, i) {
                return indeterminate(i, j);
            }
            min_gap = min_gap.min(gap);
        }
    }
    SingularityCertificate { verdict: SingularityVerdict::Disjoint, min_gap: Some(min_gap), pair: None }
}

/// Largest distance between consecutive image mesh points on one circle.
fn mesh_spacing(mesh: &[(usize, Complex64, Complex64)]) -> f64 {
    let mut s: f64 = 0.0;
    for (k, &(i, _, z)) in mesh.iter().enumerate() {
        // successor on the same circle, wrapping around
        let next = mesh[k + 1..]
            .first()
            .filter(|(j, _, _)| *j == i)
            .or_else(|| mesh.iter().find(|(j, _, _)| *j == i))
            .expect("mesh point has a circle");
        s = s.max((next.2 - z).norm());
    }
    s
}

/// `Θ(t)` with `ω_{re^{iφ}}([α, β)) = (Θ(β) - Θ(α)) / 2π` for arcs inside `(φ - π, φ + π)`.
#[doc(hidden)]
pub fn poisson_antiderivative(z0: Complex64, t: f64) -> f64 {
    let r = z0.norm();
    let phi = z0.arg();
    2.0 * (((1.0 + r) / (1.0 - r)) * ((t - phi) / 2.0).tan()).atan()
}
