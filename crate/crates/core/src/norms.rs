//! Lower bounds for the Carleson inequality constant
//! `‖r‖_{L^q(μ)} ≤ C ‖r‖_{L^q(ω)}` over a deterministic family of rational
//! test functions.
//!
//! On a circular domain the family is built from the boundary maps `f_i`:
//! powers `f_i^k` (monomials for the outer circle, pole powers for the inner
//! ones) and reproducing-kernel peaks `1/(1 - w̄ f_i)^m`. On a presented
//! domain the same peaks are realized natively as `1/(z - p)^m` with the pole
//! `p` the chart image of the reflected base point.
//!
//! Boundary norms are pulled back to the base circles, where `ω` is the
//! Poisson density (disk bases) or a walk-on-spheres, piecewise-constant
//! density (bases with holes).

use std::f64::consts::TAU;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::conformal::PresentedDomain;
use crate::error::{CarlesonError, Result};
use crate::geometry::{boundary_map_for, MobiusMap};
use crate::harmonic::{default_evaluation_point, harmonic_measure_mc, poisson_density, BoundaryPartition, WalkConfig};
use crate::measure::AtomicMeasure;
use crate::quadrature::{integrate, QuadOptions};

pub const POLE_CLEARANCE: f64 = 1e-6;
pub const MAX_ADAPTED_PEAKS: usize = 64;
const ADAPTED_PEAK_RADIUS: f64 = 0.5;
const BOUNDARY_REL_TOL: f64 = 1e-6;

/// `scale · ∏(z - zeros) / ∏(z - poles)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RationalFunction {
    pub scale: Complex64,
    pub zeros: Vec<Complex64>,
    pub poles: Vec<Complex64>,
}

impl RationalFunction {
    pub fn constant(c: Complex64) -> Self {
        Self { scale: c, zeros: Vec::new(), poles: Vec::new() }
    }

    /// `(αz + β) / (γz + δ)`.
    pub fn linear_ratio(num: (Complex64, Complex64), den: (Complex64, Complex64)) -> Self {
        let mut f = Self::constant(Complex64::new(1.0, 0.0));
        let (alpha, beta) = num;
        if alpha != Complex64::new(0.0, 0.0) {
            f.scale *= alpha;
            f.zeros.push(-beta / alpha);
        } else {
            f.scale *= beta;
        }
        let (gamma, delta) = den;
        if gamma != Complex64::new(0.0, 0.0) {
            f.scale /= gamma;
            f.poles.push(-delta / gamma);
        } else {
            f.scale /= delta;
        }
        f
    }

    pub fn from_mobius(m: &MobiusMap) -> Self {
        Self::linear_ratio((m.a, m.b), (m.c, m.d))
    }

    pub fn powi(&self, k: u32) -> Self {
        let mut f = Self::constant(self.scale.powu(k));
        for _ in 0..k {
            f.zeros.extend_from_slice(&self.zeros);
            f.poles.extend_from_slice(&self.poles);
        }
        f
    }

    pub fn eval(&self, z: Complex64) -> Complex64 {
        let num = self.zeros.iter().fold(self.scale, |acc, &r| acc * (z - r));
        self.poles.iter().fold(num, |acc, &p| acc / (z - p))
    }

    /// Numerator coefficients, constant term first.
    pub fn numerator(&self) -> Vec<Complex64> {
        expand(&self.zeros).into_iter().map(|c| c * self.scale).collect()
    }

    /// Denominator coefficients (monic), constant term first.
    pub fn denominator(&self) -> Vec<Complex64> {
        expand(&self.poles)
    }

    pub fn poles(&self) -> &[Complex64] {
        &self.poles
    }

    /// Every pole must lie outside `Ḡ` at distance at least `1e-6`.
    pub fn validate_on(&self, domain: &PresentedDomain) -> Result<()> {
        for &p in &self.poles {
            let inside = domain.preimage(p).map(|u| u.is_some()).unwrap_or(true);
            if inside || domain.boundary_distance(p) < POLE_CLEARANCE {
                return Err(CarlesonError::PoleTooCloseToBoundary { estimate: domain.boundary_distance(p) });
            }
        }
        Ok(())
    }
}

/// Coefficients of `∏(z - r)`, constant term first.
fn expand(roots: &[Complex64]) -> Vec<Complex64> {
    let mut coeffs = vec![Complex64::new(1.0, 0.0)];
    for &r in roots {
        let mut next = vec![Complex64::new(0.0, 0.0); coeffs.len() + 1];
        for (k, &c) in coeffs.iter().enumerate() {
            next[k + 1] += c;
            next[k] -= c * r;
        }
        coeffs = next;
    }
    coeffs
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FamilyMember {
    pub label: String,
    pub function: RationalFunction,
}

struct LevelParams {
    max_power: u32,
    radii: &'static [f64],
    angles: usize,
    exponents: &'static [u32],
}

fn level_params(level: u8) -> Result<LevelParams> {
    match level {
        1 => Ok(LevelParams { max_power: 1, radii: &[0.5], angles: 8, exponents: &[1] }),
        2 => Ok(LevelParams { max_power: 4, radii: &[0.5, 0.9], angles: 16, exponents: &[1, 2] }),
        3 => Ok(LevelParams { max_power: 8, radii: &[0.5, 0.9, 0.99, 0.999], angles: 32, exponents: &[1, 2] }),
        _ => Err(CarlesonError::InvalidParameter(format!("family level {level} must be 1, 2 or 3"))),
    }
}

/// `1/(1 - w̄ f_i)^m` on a circular domain, or its native counterpart
/// `1/(z - p)^m` on a presented one.
fn kernel_peak(domain: &PresentedDomain, i: usize, w: Complex64, m: u32) -> Option<RationalFunction> {
    let f = boundary_map_for(domain.base(), i);
    let one = Complex64::new(1.0, 0.0);
    if domain.is_circular() {
        let wc = w.conj();
        return Some(RationalFunction::linear_ratio((f.c - wc * f.a, f.d - wc * f.b), (f.c, f.d)).powi(m).inverse_of_linear());
    }
    let reflected = f.inverse().apply(one / w.conj()).ok()?;
    let p = domain.to_image(reflected).ok()?;
    let g = RationalFunction { scale: one, zeros: Vec::new(), poles: vec![p] }.powi(m);
    g.validate_on(domain).ok().map(|_| g)
}

impl RationalFunction {
    /// Swaps zeros and poles and inverts the scale.
    fn inverse_of_linear(self) -> Self {
        Self { scale: Complex64::new(1.0, 0.0) / self.scale, zeros: self.poles, poles: self.zeros }
    }
}

/// The deterministic test family of `level` (1, 2 or 3); each level contains
/// the previous one. The constant function comes first.
pub fn test_family(domain: &PresentedDomain, level: u8) -> Result<Vec<FamilyMember>> {
    let params = level_params(level)?;
    let one = Complex64::new(1.0, 0.0);
    let mut family = vec![FamilyMember { label: "1".into(), function: RationalFunction::constant(one) }];
    let base = domain.base();
    let push = |family: &mut Vec<FamilyMember>, label: String, f: Option<RationalFunction>| {
        if let Some(function) = f {
            family.push(FamilyMember { label, function });
        }
    };

    for i in 0..base.component_count() {
        let f = boundary_map_for(base, i);
        for k in 1..=params.max_power {
            let g = if domain.is_circular() {
                Some(RationalFunction::from_mobius(&f).powi(k))
            } else {
                native_power(domain, i, k)
            };
            push(&mut family, format!("f{i}^{k}"), g);
        }
    }
    for i in 0..base.component_count() {
        for &r in params.radii {
            for a in 0..params.angles {
                let theta = TAU * (a as f64 / params.angles as f64);
                let w = Complex64::from_polar(r, theta);
                for &m in params.exponents {
                    push(&mut family, format!("peak(i={i},|w|={r},arg={theta:.6},m={m})"), kernel_peak(domain, i, w, m));
                }
            }
        }
    }
    Ok(family)
}

/// Native powers on a presented domain: `((z - z_c)/R)^k` for the outer
/// circle, `(d_i/(z - α(a_i)))^k` for inner circles when `α(a_i) ∉ Ḡ`.
fn native_power(domain: &PresentedDomain, i: usize, k: u32) -> Option<RationalFunction> {
    let base = domain.base();
    let one = Complex64::new(1.0, 0.0);
    let center = domain.to_image(default_evaluation_point(base)).ok()?;
    if i == 0 {
        let radius = domain
            .boundary_mesh(64)
            .iter()
            .map(|&(_, _, z)| (z - center).norm())
            .fold(0.0, f64::max);
        return Some(RationalFunction { scale: one / radius, zeros: vec![center], poles: Vec::new() }.powi(k));
    }
    let p = domain.to_image(base.circle(i).center).ok()?;
    let d = domain.boundary_distance(p);
    let g = RationalFunction { scale: Complex64::new(d, 0.0), zeros: Vec::new(), poles: vec![p] }.powi(k);
    g.validate_on(domain).ok().map(|_| g)
}

/// Kernel peaks (`m = 1`) at the atoms of `μ` nearest the boundary, placed on
/// the boundary component each atom is closest to. Atoms with
/// `|f_i| < 1/2` for every `i` get none.
pub fn adapted_peaks(domain: &PresentedDomain, measure: &AtomicMeasure) -> Vec<FamilyMember> {
    let base = domain.base();
    let maps: Vec<MobiusMap> = (0..base.component_count()).map(|i| boundary_map_for(base, i)).collect();
    let mut candidates: Vec<(f64, usize, Complex64)> = measure
        .atoms()
        .iter()
        .filter_map(|a| {
            let u = domain.preimage(a.z).ok().flatten()?;
            maps.iter()
                .enumerate()
                .filter_map(|(i, f)| f.apply(u).ok().map(|w| (w.norm(), i, w)))
                .max_by(|x, y| x.0.total_cmp(&y.0).then(y.1.cmp(&x.1)))
        })
        .filter(|&(r, _, _)| (ADAPTED_PEAK_RADIUS..1.0).contains(&r))
        .collect();
    candidates.sort_by(|x, y| y.0.total_cmp(&x.0));
    candidates.dedup_by(|x, y| x.1 == y.1 && x.2 == y.2);
    candidates
        .into_iter()
        .take(MAX_ADAPTED_PEAKS)
        .filter_map(|(_, i, w)| {
            kernel_peak(domain, i, w, 1).map(|function| FamilyMember {
                label: format!("atom-peak(i={i},w=({:.9},{:.9}))", w.re, w.im),
                function,
            })
        })
        .collect()
}

/// `(Σ_j w_j |f(z_j)|^q)^{1/q}`.
pub fn lq_norm_measure(f: &RationalFunction, measure: &AtomicMeasure, q: f64) -> f64 {
    measure.integrate(|z| f.eval(z).norm().powf(q)).powf(1.0 / q)
}

/// Harmonic measure on the base circles at a fixed base evaluation point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum BoundaryDensity {
    /// Poisson density of `ω_{w0}` in the normalized coordinate of a disk base.
    Poisson { w0: Complex64 },
    /// Walk-on-spheres arc masses, spread uniformly in angle over each arc.
    Piecewise { partition: BoundaryPartition, probabilities: Vec<f64>, walks: usize },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormConfig {
    /// Initial quadrature points per boundary circle.
    pub nodes: usize,
    /// Evaluation point in base coordinates; the default evaluation point when `None`.
    pub evaluation: Option<Complex64>,
    pub walks: usize,
    pub arcs_per_circle: usize,
    pub seed: u64,
}

impl Default for NormConfig {
    fn default() -> Self {
        Self { nodes: 256, evaluation: None, walks: 100_000, arcs_per_circle: 64, seed: 0 }
    }
}

pub fn boundary_density(domain: &PresentedDomain, config: &NormConfig) -> Result<BoundaryDensity> {
    let base = domain.base();
    let u0 = config.evaluation.unwrap_or_else(|| default_evaluation_point(base));
    if !base.contains(u0) {
        return Err(CarlesonError::EvaluationPointOutsideDomain { z: u0 });
    }
    if base.inner().is_empty() {
        let outer = base.outer();
        return Ok(BoundaryDensity::Poisson { w0: (u0 - outer.center) / outer.radius });
    }
    let partition = BoundaryPartition::uniform(base, config.arcs_per_circle);
    let walk = WalkConfig { walks: config.walks, seed: config.seed, ..WalkConfig::default() };
    let est = harmonic_measure_mc(base, u0, &partition, &walk)?;
    Ok(BoundaryDensity::Piecewise { partition, probabilities: est.probabilities, walks: config.walks })
}

/// `∫ |f|^q dω` with its Monte Carlo variance (zero for the Poisson density).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundaryIntegral {
    pub integral: f64,
    pub variance: f64,
}

impl BoundaryIntegral {
    pub fn norm(&self, q: f64) -> f64 {
        self.integral.powf(1.0 / q)
    }
}

/// `∫_{∂G} |f|^q dω`, pulled back to the base circles and integrated by
/// adaptive Gauss–Kronrod quadrature seeded with `nodes` points per circle.
pub fn boundary_integral(
    f: &RationalFunction,
    domain: &PresentedDomain,
    density: &BoundaryDensity,
    q: f64,
    nodes: usize,
) -> Result<BoundaryIntegral> {
    let base = domain.base();
    let opts = QuadOptions { initial_panels: (nodes / 15).max(4), abs_tol: 0.0, rel_tol: 1e-11, max_panels: 100_000 };
    let integrand = |i: usize| {
        let circle = *base.circle(i);
        move |t: f64| {
            let z = domain.to_image(circle.point_at(t)).unwrap_or(Complex64::new(f64::NAN, 0.0));
            f.eval(z).norm().powf(q)
        }
    };
    let check = |value: f64, error: f64| -> Result<()> {
        let rel = error / value.abs().max(f64::MIN_POSITIVE);
        if !value.is_finite() || rel > BOUNDARY_REL_TOL {
            return Err(CarlesonError::PoleTooCloseToBoundary { estimate: if rel.is_finite() { rel } else { f64::INFINITY } });
        }
        Ok(())
    };
    match density {
        BoundaryDensity::Poisson { w0 } => {
            let g = integrand(0);
            let res = integrate(|t| g(t) * poisson_density(*w0, t), 0.0, TAU, opts);
            check(res.value, res.error)?;
            Ok(BoundaryIntegral { integral: res.value, variance: 0.0 })
        }
        BoundaryDensity::Piecewise { partition, probabilities, walks } => {
            let per_arc = QuadOptions { initial_panels: (opts.initial_panels / partition.len().max(1)).max(1), ..opts };
            let mut total = 0.0;
            let mut second = 0.0;
            let mut error = 0.0;
            for (arc, &p) in partition.arcs().iter().zip(probabilities) {
                if p == 0.0 {
                    continue;
                }
                let g = integrand(arc.component);
                let res = integrate(g, arc.start, arc.end, per_arc);
                let mean = res.value / arc.length();
                total += p * mean;
                second += p * mean * mean;
                error += p * res.error / arc.length();
            }
            check(total, error)?;
            let variance = ((second - total * total) / *walks as f64).max(0.0);
            Ok(BoundaryIntegral { integral: total, variance })
        }
    }
}

/// `(∫_{∂G} |f|^q dω)^{1/q}` at the configured evaluation point.
pub fn lq_norm_boundary(f: &RationalFunction, domain: &PresentedDomain, q: f64, config: &NormConfig) -> Result<f64> {
    check_q(q)?;
    if let Some(d) = f.poles().iter().map(|&p| domain.boundary_distance(p)).reduce(f64::min) {
        if d < POLE_CLEARANCE {
            return Err(CarlesonError::PoleTooCloseToBoundary { estimate: d });
        }
    }
    let density = boundary_density(domain, config)?;
    Ok(boundary_integral(f, domain, &density, q, config.nodes)?.norm(q))
}

fn check_q(q: f64) -> Result<()> {
    if !(q >= 1.0 && q.is_finite()) {
        return Err(CarlesonError::InvalidParameter(format!("exponent q = {q} must lie in [1, ∞)")));
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConstantEstimate {
    pub q: f64,
    pub c_hat: f64,
    /// Propagated from the Monte Carlo density error of the witness.
    pub c_hat_stderr: f64,
    pub witness: usize,
    pub witness_label: String,
    pub family_size: usize,
}

/// Caches the family and its boundary integrals for one domain, level and `q`.
#[derive(Debug, Clone)]
pub struct ConstantEstimator {
    domain: PresentedDomain,
    q: f64,
    nodes: usize,
    density: BoundaryDensity,
    family: Vec<FamilyMember>,
    boundary: Vec<BoundaryIntegral>,
}

impl ConstantEstimator {
    pub fn new(domain: &PresentedDomain, level: u8, q: f64, config: &NormConfig) -> Result<Self> {
        check_q(q)?;
        let density = boundary_density(domain, config)?;
        let family = test_family(domain, level)?;
        let boundary = family
            .par_iter()
            .map(|m| boundary_integral(&m.function, domain, &density, q, config.nodes))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { domain: domain.clone(), q, nodes: config.nodes, density, family, boundary })
    }

    pub fn family(&self) -> &[FamilyMember] {
        &self.family
    }

    pub fn density(&self) -> &BoundaryDensity {
        &self.density
    }

    pub fn q(&self) -> f64 {
        self.q
    }

    /// `∫ |f|^q dμ` and `∫ |f|^q dω` for every cached family member followed
    /// by the kernel peaks adapted to `μ`.
    pub fn terms(&self, measure: &AtomicMeasure) -> Result<Vec<Term>> {
        measure.validate_with(|z| self.domain.contains(z))?;
        let adapted = adapted_peaks(&self.domain, measure);
        let extra = adapted
            .par_iter()
            .map(|m| boundary_integral(&m.function, &self.domain, &self.density, self.q, self.nodes))
            .collect::<Result<Vec<_>>>()?;
        let q = self.q;
        let members: Vec<_> = self.family.iter().zip(&self.boundary).chain(adapted.iter().zip(&extra)).collect();
        Ok(members
            .par_iter()
            .enumerate()
            .map(|(index, (m, omega))| Term {
                index,
                label: m.label.clone(),
                mu: measure.integrate(|z| m.function.eval(z).norm().powf(q)),
                omega: **omega,
            })
            .collect())
    }

    /// `max_f ‖f‖_{L^q(μ)} / ‖f‖_{L^q(ω)}` over the cached family plus the
    /// kernel peaks adapted to `μ`; ties go to the lowest index.
    pub fn estimate(&self, measure: &AtomicMeasure) -> Result<ConstantEstimate> {
        let terms = self.terms(measure)?;
        let q = self.q;
        let mut witness = 0;
        let mut best = f64::NEG_INFINITY;
        for t in &terms {
            let ratio = t.ratio(q);
            if ratio > best {
                best = ratio;
                witness = t.index;
            }
        }
        let w = &terms[witness];
        Ok(ConstantEstimate {
            q,
            c_hat: best,
            // σ_c = c σ_I / (q I)
            c_hat_stderr: best * w.omega.variance.sqrt() / (q * w.omega.integral),
            witness,
            witness_label: w.label.clone(),
            family_size: terms.len(),
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Term {
    pub index: usize,
    pub label: String,
    pub mu: f64,
    pub omega: BoundaryIntegral,
}

impl Term {
    pub fn ratio(&self, q: f64) -> f64 {
        (self.mu / self.omega.integral).powf(1.0 / q)
    }
}

pub fn estimate_constant(
    domain: &PresentedDomain,
    measure: &AtomicMeasure,
    q: f64,
    level: u8,
    config: &NormConfig,
) -> Result<ConstantEstimate> {
    ConstantEstimator::new(domain, level, q, config)?.estimate(measure)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::conformal::ConformalMap;
    use crate::geometry::CircularDomain;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn disk() -> PresentedDomain {
        PresentedDomain::circular(CircularDomain::unit_disk())
    }

    #[test]
    fn rational_basics() {
        let f = RationalFunction::linear_ratio((c(1.0, 0.0), c(-0.5, 0.0)), (c(0.0, 0.0), c(2.0, 0.0)));
        assert!((f.eval(c(1.5, 0.0)) - c(0.5, 0.0)).norm() < 1e-15);
        let g = RationalFunction { scale: c(2.0, 0.0), zeros: vec![c(1.0, 0.0), c(-1.0, 0.0)], poles: vec![c(3.0, 0.0)] };
        // 2(z² - 1) / (z - 3)
        assert_eq!(g.numerator(), vec![c(-2.0, 0.0), c(0.0, 0.0), c(2.0, 0.0)]);
        assert_eq!(g.denominator(), vec![c(-3.0, 0.0), c(1.0, 0.0)]);
        let z = c(0.3, 0.4);
        assert!((g.eval(z) - 2.0 * (z * z - 1.0) / (z - 3.0)).norm() < 1e-14);
        assert!((g.powi(3).eval(z) - g.eval(z).powu(3)).norm() < 1e-13);
    }

    #[test]
    fn family_contents() {
        let f1 = test_family(&disk(), 1).unwrap();
        assert_eq!(f1.len(), 1 + 1 + 8);
        assert_eq!(f1[0].label, "1");
        assert!((f1[1].function.eval(c(0.3, 0.1)) - c(0.3, 0.1)).norm() < 1e-15);

        let ann = PresentedDomain::circular(CircularDomain::annulus(0.25).unwrap());
        let fam = test_family(&ann, 2).unwrap();
        let z = c(0.6, 0.2);
        let pole_power = fam.iter().find(|m| m.label == "f1^3").unwrap();
        assert!((pole_power.function.eval(z) - (0.25 / z).powu(3)).norm() < 1e-14);
        for level in 1..=3 {
            for m in test_family(&ann, level).unwrap() {
                m.function.validate_on(&ann).unwrap();
            }
        }
        assert!(test_family(&disk(), 4).is_err());
    }

    #[test]
    fn families_are_nested() {
        let ann = PresentedDomain::circular(CircularDomain::annulus(0.25).unwrap());
        let small = test_family(&ann, 1).unwrap();
        let big = test_family(&ann, 3).unwrap();
        for m in &small {
            assert!(big.contains(m), "{}", m.label);
        }
    }

    #[test]
    fn kernel_peak_matches_formula() {
        let w = Complex64::from_polar(0.9, 0.7);
        let k = kernel_peak(&disk(), 0, w, 2).unwrap();
        let z = c(0.2, -0.5);
        let exact = (1.0 - w.conj() * z).powi(-2);
        assert!((k.eval(z) - exact).norm() < 1e-13);
    }

    #[test]
    fn measure_norm_examples() {
        let one = RationalFunction::constant(c(1.0, 0.0));
        let mu = AtomicMeasure::new(vec![crate::measure::Atom { z: c(0.5, 0.0), w: 1.0 }, crate::measure::Atom { z: c(-0.5, 0.0), w: 1.0 }]).unwrap();
        assert!((lq_norm_measure(&one, &mu, 3.0) - 2f64.powf(1.0 / 3.0)).abs() < 1e-15);
        let z = RationalFunction { scale: c(1.0, 0.0), zeros: vec![c(0.0, 0.0)], poles: vec![] };
        let half = AtomicMeasure::point_mass(c(0.5, 0.0), 1.0).unwrap();
        assert!((lq_norm_measure(&z, &half, 2.0) - 0.5).abs() < 1e-15);
        assert!((lq_norm_measure(&z.powi(2), &mu, 1.0) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn boundary_norm_examples() {
        let cfg = NormConfig::default();
        for k in 0..6 {
            let zk = RationalFunction { scale: c(1.0, 0.0), zeros: vec![c(0.0, 0.0); k], poles: vec![] };
            assert!((lq_norm_boundary(&zk, &disk(), 2.0, &cfg).unwrap() - 1.0).abs() < 1e-10);
        }
        // 1/(1 - z/2) = -2/(z - 2); Parseval gives (4/3)^{1/2}
        let f = RationalFunction { scale: c(-2.0, 0.0), zeros: vec![], poles: vec![c(2.0, 0.0)] };
        assert!((lq_norm_boundary(&f, &disk(), 2.0, &cfg).unwrap() - (4.0f64 / 3.0).sqrt()).abs() < 1e-10);
        let three = RationalFunction::constant(c(3.0, 0.0));
        assert!((lq_norm_boundary(&three, &disk(), 1.5, &cfg).unwrap() - 3.0).abs() < 1e-10);
    }

    #[test]
    fn pole_on_boundary_is_rejected() {
        let f = RationalFunction { scale: c(1.0, 0.0), zeros: vec![], poles: vec![c(1.0 + 1e-9, 0.0)] };
        assert!(matches!(f.validate_on(&disk()), Err(CarlesonError::PoleTooCloseToBoundary { .. })));
        let on = RationalFunction { scale: c(1.0, 0.0), zeros: vec![], poles: vec![c(0.0, 1.0)] };
        let cfg = NormConfig::default();
        let r = lq_norm_boundary(&on, &disk(), 2.0, &cfg);
        assert!(matches!(r, Err(CarlesonError::PoleTooCloseToBoundary { .. })), "{r:?}");
    }

    #[test]
    fn point_mass_at_center_is_sharp() {
        let cfg = NormConfig::default();
        let mu = AtomicMeasure::point_mass(c(0.0, 0.0), 1.0).unwrap();
        for q in [1.0, 2.0, 4.0] {
            let est = estimate_constant(&disk(), &mu, q, 3, &cfg).unwrap();
            assert!((est.c_hat - 1.0).abs() < 1e-9, "q={q}: {est:?}");
            assert_eq!(est.witness, 0);
        }
    }

    #[test]
    fn point_mass_near_boundary() {
        // the reproducing kernel is extremal: c = (1 - 0.81)^{-1/2}
        let cfg = NormConfig::default();
        let mu = AtomicMeasure::point_mass(c(0.9, 0.0), 1.0).unwrap();
        let est = estimate_constant(&disk(), &mu, 2.0, 3, &cfg).unwrap();
        assert!((est.c_hat - 2.294_157_338_705_618).abs() < 1e-8, "{est:?}");
        let scaled = estimate_constant(&disk(), &mu.scale(4.0).unwrap(), 2.0, 3, &cfg).unwrap();
        assert_eq!(scaled.c_hat, 2.0 * est.c_hat);
    }

    #[test]
    fn presented_family_is_valid() {
        let p = PresentedDomain::new(CircularDomain::unit_disk(), ConformalMap::quad_poly(c(0.3, 0.0)).unwrap()).unwrap();
        let fam = test_family(&p, 3).unwrap();
        assert!(fam.len() > 100);
        for m in &fam {
            m.function.validate_on(&p).unwrap();
        }
        // δ at the evaluation point is still sharp through the chart
        let mu = AtomicMeasure::point_mass(c(0.0, 0.0), 1.0).unwrap();
        let est = estimate_constant(&p, &mu, 2.0, 2, &NormConfig::default()).unwrap();
        assert!((est.c_hat - 1.0).abs() < 1e-9, "{est:?}");
    }

    #[test]
    fn annulus_density_is_calibrated() {
        let ann = PresentedDomain::circular(CircularDomain::annulus(0.25).unwrap());
        let cfg = NormConfig { walks: 20_000, ..NormConfig::default() };
        let one = RationalFunction::constant(c(1.0, 0.0));
        assert!((lq_norm_boundary(&one, &ann, 2.0, &cfg).unwrap() - 1.0).abs() < 1e-12);
    }
}
