//! The acceptance batteries, shared by the `acceptance` test target and the
//! `carleson suite` command.
//!
//! Each criterion returns a list of checks (`measured` against `threshold`)
//! and its wall time; it passes when every check holds and the time stays
//! within its budget. `tolerance_scale` multiplies every tolerance, which lets
//! the harness be exercised with deliberately broken thresholds.

use std::f64::consts::TAU;
use std::time::Instant;

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::boxes::{box_ratio_circular, box_ratio_disk, box_ratio_disk_oracle, trend_analysis};
use crate::conformal::{boundary_charts, hull_riemann_maps, pushforward_measure, pushforward_to_image, ConformalMap, PresentedDomain};
use crate::corpus::{annulus_families, non_carleson_atom, random_disk_measure, random_domain_measure, rng, standard_families, unit_kappa_corpus};
use crate::error::{CarlesonError, Result};
use crate::geometry::{admissible_depth, angle_of, boundary_map_for, boundary_map_inverse, CarlesonSquare, Circle, CircularDomain, MobiusMap};
use crate::harmonic::{harmonic_measure_mc, BoundaryPartition, WalkConfig};
use crate::measure::{Atom, AtomicMeasure};
use crate::norms::{estimate_constant, ConstantEstimator, NormConfig};
use crate::open_set::{OpenSetAnalyzer, OpenSetDomain};
use crate::quadrature::{integrate, QuadOptions};
use crate::trend::{trend_of, TrendClass};

pub const CRITERIA: [(u8, &str, f64); 9] = [
    (1, "box ratio sweep equals exhaustive oracle", 10.0),
    (2, "square correspondence on the annulus", 5.0),
    (3, "hull maps equal boundary maps; both pipelines agree", 10.0),
    (4, "harmonic-measure Monte Carlo calibration", 30.0),
    (5, "point mass at the center is sharp", 5.0),
    (6, "embedding-direction audit and divergence", 60.0),
    (7, "classification invariant under conformal pushforward", 60.0),
    (8, "weighted criterion on open sets", 30.0),
    (9, "homogeneity and monotonicity", 10.0),
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Comparison {
    AtMost,
    AtLeast,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub label: String,
    pub measured: f64,
    pub comparison: Comparison,
    pub threshold: f64,
    pub passed: bool,
}

impl Check {
    fn at_most(label: impl Into<String>, measured: f64, threshold: f64) -> Self {
        Self { label: label.into(), measured, comparison: Comparison::AtMost, threshold, passed: measured <= threshold }
    }

    fn at_least(label: impl Into<String>, measured: f64, threshold: f64) -> Self {
        Self { label: label.into(), measured, comparison: Comparison::AtLeast, threshold, passed: measured >= threshold }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriterionOutcome {
    pub id: u8,
    pub name: String,
    pub passed: bool,
    pub checks: Vec<Check>,
    pub error: Option<String>,
    pub elapsed_s: f64,
    pub budget_s: f64,
}

impl CriterionOutcome {
    /// One-line summary: id, verdict, first failing (or first) check, time.
    pub fn summary(&self) -> String {
        let verdict = if self.passed { "PASS" } else { "FAIL" };
        let shown = self.checks.iter().find(|c| !c.passed).or(self.checks.first());
        let check = match (&self.error, shown) {
            (Some(e), _) => format!("error: {e}"),
            (None, Some(c)) => format!(
                "{} = {:.6e} ({} {:.3e})",
                c.label,
                c.measured,
                if c.comparison == Comparison::AtMost { "<=" } else { ">=" },
                c.threshold
            ),
            (None, None) => String::new(),
        };
        format!(
            "criterion {} [{}] {}: {} [{:.2}s / {:.0}s]",
            self.id, verdict, self.name, check, self.elapsed_s, self.budget_s
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub tolerance_scale: f64,
    pub seed: u64,
    pub passed: bool,
    pub outcomes: Vec<CriterionOutcome>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SuiteConfig {
    pub tolerance_scale: f64,
    pub seed: u64,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        Self { tolerance_scale: 1.0, seed: 20_240_601 }
    }
}

pub fn run_suite(config: &SuiteConfig) -> SuiteReport {
    let outcomes: Vec<_> = CRITERIA.iter().map(|&(id, _, _)| run_criterion(id, config)).collect();
    SuiteReport {
        tolerance_scale: config.tolerance_scale,
        seed: config.seed,
        passed: outcomes.iter().all(|o| o.passed),
        outcomes,
    }
}

pub fn run_criterion(id: u8, config: &SuiteConfig) -> CriterionOutcome {
    let &(_, name, budget) = CRITERIA.iter().find(|c| c.0 == id).expect("known criterion id");
    let s = config.tolerance_scale;
    let seed = config.seed.wrapping_add(id as u64);
    let start = Instant::now();
    let result = match id {
        1 => oracle_equivalence(seed, s),
        2 => square_correspondence(seed, s),
        3 => hull_equivalence(seed, s),
        4 => harmonic_calibration(seed, s),
        5 => point_mass_sharpness(s),
        6 => embedding_audit(seed, s),
        7 => conformal_invariance(s),
        8 => open_set_criterion(seed, s),
        9 => homogeneity(seed, s),
        _ => unreachable!(),
    };
    let elapsed_s = start.elapsed().as_secs_f64();
    let (checks, error) = match result {
        Ok(checks) => (checks, None),
        Err(e) => (Vec::new(), Some(e.to_string())),
    };
    let passed = error.is_none() && !checks.is_empty() && checks.iter().all(|c| c.passed) && elapsed_s <= budget;
    CriterionOutcome { id, name: name.into(), passed, checks, error, elapsed_s, budget_s: budget }
}

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn oracle_equivalence(seed: u64, s: f64) -> Result<Vec<Check>> {
    let mut rng = rng(seed);
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let m = random_disk_measure(&mut rng, 10);
        let fast = box_ratio_disk(&m)?.kappa;
        let slow = box_ratio_disk_oracle(&m)?.kappa;
        worst = worst.max((fast - slow).abs());
    }
    Ok(vec![Check::at_most("max |Δκ| over 100 measures", worst, 1e-9 * s)])
}

/// `μ(S) / s(S̄ ∩ ∂G)` from a direct polar description of `S` and quadrature
/// of `|(f_i^{-1})'|`, against `(1/r_i)` times the disk ratio of `μ ∘ f_i^{-1}`.
fn square_correspondence(seed: u64, s: f64) -> Result<Vec<Check>> {
    let r = 0.25;
    let domain = CircularDomain::annulus(r)?;
    let mut rng = rng(seed);
    let measure = random_domain_measure(&mut rng, &domain, 400);
    let mut worst: f64 = 0.0;
    let mut nonempty = 0usize;
    for _ in 0..500 {
        let i = rng.gen_range(0..2usize);
        let h = admissible_depth(&domain, i) * (1.0 - rng.gen::<f64>());
        let t0 = rng.gen::<f64>() * TAU;
        let square = CarlesonSquare::new(i, h, t0)?;
        // annulus: f_0(z) = z, f_1(z) = r / z
        let inside = |z: Complex64| {
            let (modulus, angle) = if i == 0 { (z.norm(), angle_of(z)) } else { (r / z.norm(), angle_of(z.conj())) };
            modulus >= 1.0 - h && modulus < 1.0 && (angle - t0).rem_euclid(TAU) < h
        };
        let mass = measure.restrict(inside).total_mass();
        let arclength = integrate(
            |t| {
                // speed of t ↦ f_i^{-1}(e^{it}); the image is a circle, on which the
                // symmetric chord over [t - δ, t + δ] is exactly 2 R sin δ
                let dt = 1e-2;
                let a = boundary_map_inverse(&domain, i, Complex64::from_polar(1.0, t - dt));
                let b = boundary_map_inverse(&domain, i, Complex64::from_polar(1.0, t + dt));
                (b - a).norm() / (2.0 * dt.sin())
            },
            t0,
            t0 + h,
            QuadOptions::default(),
        )
        .value;
        let direct = mass / arclength;

        let pushed = measure.pushforward_mobius(&boundary_map_for(&domain, i))?;
        let disk_mass = pushed.restrict(|w| square.contains_disk_point(w)).total_mass();
        let via_disk = disk_mass / h / domain.circle(i).radius;
        nonempty += (mass > 0.0) as usize;
        worst = worst.max((direct - via_disk).abs() / via_disk.abs().max(1.0));
    }
    Ok(vec![
        Check::at_most("max relative deviation over 500 squares", worst, 1e-12 * s),
        Check::at_least("squares holding mass", nonempty as f64, 100.0),
    ])
}

/// Coefficients divided by the largest one, so projectively equal maps agree.
fn canonical(m: &MobiusMap) -> [Complex64; 4] {
    let coeffs = [m.a, m.b, m.c, m.d];
    let big = *coeffs.iter().max_by(|x, y| x.norm().total_cmp(&y.norm())).expect("four coefficients");
    coeffs.map(|z| z / big)
}

fn hull_equivalence(_seed: u64, s: f64) -> Result<Vec<Check>> {
    let three = CircularDomain::new(
        Circle::new(c(0.2, -0.1), 2.0)?,
        vec![Circle::new(c(0.9, 0.3), 0.4)?, Circle::new(c(-0.6, -0.5), 0.3)?],
    )?;
    let domains = [CircularDomain::annulus(0.25)?, CircularDomain::disk(c(1.0, 2.0), 3.0)?, three];
    let mut coeff_diff: f64 = 0.0;
    for d in &domains {
        for (hull, boundary) in hull_riemann_maps(d).iter().zip(boundary_charts(d)) {
            let (Some(h), Some(b)) = (hull.as_mobius(), boundary.as_mobius()) else {
                return Err(CarlesonError::InvalidMap("hull map is not Möbius".into()));
            };
            for (x, y) in canonical(&h).iter().zip(canonical(&b)) {
                coeff_diff = coeff_diff.max((x - y).norm());
            }
        }
    }

    let r = 0.25;
    let annulus = CircularDomain::annulus(r)?;
    let hulls: Vec<MobiusMap> = hull_riemann_maps(&annulus).iter().filter_map(ConformalMap::as_mobius).collect();
    let families = annulus_families(r);
    let mut mismatches = 0usize;
    for f in &families {
        let direct = trend_analysis(&annulus, &f.members)?.class;
        let via_hulls = f
            .members
            .iter()
            .map(|m| {
                hulls.iter().try_fold(0.0f64, |acc, phi| {
                    Ok::<_, CarlesonError>(acc.max(box_ratio_disk(&m.pushforward_mobius(phi)?)?.kappa))
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let via_hulls = trend_of(via_hulls).class;
        mismatches += (direct != via_hulls) as usize + (direct != f.expected) as usize;
    }
    Ok(vec![
        Check::at_most("max canonical coefficient difference", coeff_diff, 1e-15 * s),
        Check::at_most(format!("classification mismatches over {} families", families.len()), mismatches as f64, 0.0),
    ])
}

fn harmonic_calibration(seed: u64, s: f64) -> Result<Vec<Check>> {
    let disk = CircularDomain::unit_disk();
    let cfg = WalkConfig { walks: 10_000, seed, ..WalkConfig::default() };
    let halves = harmonic_measure_mc(&disk, c(0.0, 0.0), &BoundaryPartition::uniform(&disk, 2), &cfg)?;
    let disk_z = (halves.probabilities[0] - 0.5).abs() / halves.standard_errors[0];

    let annulus = CircularDomain::annulus(0.25)?;
    let rings = harmonic_measure_mc(&annulus, c(0.5, 0.0), &BoundaryPartition::full_boundary(&annulus), &cfg)?;
    let exact = 0.5f64.ln() / 0.25f64.ln();
    let annulus_z = (rings.probabilities[1] - exact).abs() / rings.standard_errors[1];
    Ok(vec![
        Check::at_most("disk half-arc deviation in σ", disk_z, 3.0 * s),
        Check::at_most("annulus inner-mass deviation in σ", annulus_z, 3.0 * s),
        Check::at_most("capped walks", (halves.capped_walks + rings.capped_walks) as f64, 0.0),
    ])
}

fn point_mass_sharpness(s: f64) -> Result<Vec<Check>> {
    let disk = PresentedDomain::circular(CircularDomain::unit_disk());
    let delta = AtomicMeasure::point_mass(c(0.0, 0.0), 1.0)?;
    let cfg = NormConfig { evaluation: Some(c(0.0, 0.0)), ..NormConfig::default() };
    let mut worst: f64 = 0.0;
    for q in [1.0, 2.0, 4.0] {
        let est = estimate_constant(&disk, &delta, q, 3, &cfg)?;
        worst = worst.max((est.c_hat - 1.0).abs());
    }
    Ok(vec![Check::at_most("max |c_hat - 1| over q ∈ {1, 2, 4}", worst, 1e-9 * s)])
}

fn embedding_audit(seed: u64, s: f64) -> Result<Vec<Check>> {
    let disk = PresentedDomain::circular(CircularDomain::unit_disk());
    let estimator = ConstantEstimator::new(&disk, 3, 2.0, &NormConfig::default())?;
    let mut largest: f64 = 0.0;
    for m in unit_kappa_corpus(seed, 20, 10)? {
        largest = largest.max(estimator.estimate(&m)?.c_hat);
    }

    let mut kappa_dev: f64 = 0.0;
    let mut c_hats = Vec::new();
    for k in 6..=12 {
        let m = non_carleson_atom(k);
        let exact = 2f64.powf(k as f64 / 2.0);
        kappa_dev = kappa_dev.max((box_ratio_disk(&m)?.kappa - exact).abs() / exact);
        c_hats.push(estimator.estimate(&m)?.c_hat);
    }
    let min_factor = c_hats.windows(2).map(|w| w[1] / w[0]).fold(f64::INFINITY, f64::min);
    Ok(vec![
        Check::at_most("max c_hat over 20 measures with κ ≤ 1", largest, 40.0 * s),
        Check::at_most("max relative |κ_k - 2^{k/2}|, k = 6..12", kappa_dev, 1e-12 * s),
        Check::at_least("min c_hat growth factor per step, k = 6..12", min_factor, 1.15 / s),
    ])
}

/// Classes of the standard families: on the disk, after a disk automorphism,
/// after pushing into `α(D)` with `α(z) = z + 0.3 z²` (both pulled back and by
/// the native estimator on `α(D)`).
fn conformal_invariance(_s: f64) -> Result<Vec<Check>> {
    let disk = CircularDomain::unit_disk();
    let phi = MobiusMap::disk_automorphism(c(0.3, 0.2))?;
    let presented = PresentedDomain::new(disk.clone(), ConformalMap::quad_poly(c(0.3, 0.0))?)?;
    let q = 2.0;
    let estimator = ConstantEstimator::new(&presented, 3, q, &NormConfig::default())?;
    let families = standard_families();
    let mut mismatches = 0usize;
    for f in &families {
        let reference = trend_analysis(&disk, &f.members)?.class;
        let moved: Vec<_> = f.members.iter().map(|m| m.pushforward_mobius(&phi)).collect::<Result<_>>()?;
        let mobius = trend_analysis(&disk, &moved)?.class;
        let images: Vec<_> = f.members.iter().map(|m| pushforward_to_image(&presented, m)).collect::<Result<_>>()?;
        let pulled: Vec<_> = images.iter().map(|m| pushforward_measure(&presented, m)).collect::<Result<_>>()?;
        let pulled = trend_analysis(&disk, &pulled)?.class;
        let native = images
            .iter()
            .map(|m| estimator.estimate(m).map(|e| e.c_hat.powf(q)))
            .collect::<Result<Vec<_>>>()?;
        let native = trend_of(native).class;
        mismatches += [mobius, pulled, native, f.expected].iter().filter(|&&k| k != reference).count();
    }
    Ok(vec![Check::at_most(
        format!("classification mismatches over {} families", families.len()),
        mismatches as f64,
        0.0,
    )])
}

fn open_set_criterion(seed: u64, s: f64) -> Result<Vec<Check>> {
    let cfg = NormConfig::default();
    let unit = |x: f64| CircularDomain::disk(c(x, 0.0), 1.0).map(PresentedDomain::circular);
    let three = OpenSetDomain::new(vec![unit(0.0)?, unit(3.0)?, unit(6.0)?], None)?;
    let quarter = AtomicMeasure::new(
        (0..3).map(|n| Atom { z: c(3.0 * n as f64, 0.0), w: 0.25f64.powi(n + 1) }).collect(),
    )?;
    let c_star = OpenSetAnalyzer::new(&three, 1.0, 2, &cfg)?.component_constants(&quarter)?.c_star;

    let ring = CircularDomain::new(Circle::new(c(3.0, 0.0), 1.0)?, vec![Circle::new(c(3.0, 0.0), 0.3)?])?;
    let pair = OpenSetDomain::new(vec![unit(0.0)?, PresentedDomain::circular(ring.clone())], None)?;
    let disk = CircularDomain::unit_disk();
    let mut rng = rng(seed);
    let mut worst_excess = f64::NEG_INFINITY;
    for q in [1.0, 2.0] {
        let analyzer = OpenSetAnalyzer::new(&pair, q, 2, &cfg)?;
        for _ in 0..5 {
            let m = AtomicMeasure::sum([
                &random_domain_measure(&mut rng, &disk, 6),
                &random_domain_measure(&mut rng, &ring, 6),
            ]);
            let v = analyzer.weighted_criterion(&m)?;
            worst_excess = worst_excess.max(v.composite_c_hat - (v.c_star + 3.0 * v.sigma * s));
        }
    }

    let reweighted = pair.with_weights(vec![0.9, 0.1])?;
    let m = AtomicMeasure::sum([&random_domain_measure(&mut rng, &disk, 5), &random_domain_measure(&mut rng, &ring, 5)]);
    let report = OpenSetAnalyzer::new(&reweighted, 2.0, 2, &cfg)?.component_constants(&m)?;
    let formula = (report.components[0].c_hat / 0.9).max(report.components[1].c_hat / 0.1);
    Ok(vec![
        Check::at_most("|C* - 1/2| for the 4^{-n} example (q = 1)", (c_star - 0.5).abs(), 1e-12 * s),
        Check::at_most("max composite - (C* + 3σ) over 10 corpora", worst_excess, 1e-9 * s),
        Check::at_most("|C* - max(c_1/0.9, c_2/0.1)|", (report.c_star - formula).abs(), 1e-15 * s),
    ])
}

fn homogeneity(seed: u64, s: f64) -> Result<Vec<Check>> {
    let mut rng = rng(seed);
    let annulus = CircularDomain::annulus(0.3)?;
    let unit_disk = CircularDomain::unit_disk();
    let mut kappa_scaling: f64 = 0.0;
    let mut restriction: f64 = f64::NEG_INFINITY;
    for k in 0..40 {
        let domain = if k % 2 == 0 { &unit_disk } else { &annulus };
        let m = random_domain_measure(&mut rng, domain, 12);
        let factor = 10f64.powf(rng.gen_range(-1.0..1.0));
        let base = box_ratio_circular(domain, &m)?.kappa;
        let scaled = box_ratio_circular(domain, &m.scale(factor)?)?.kappa;
        kappa_scaling = kappa_scaling.max((scaled - factor * base).abs() / (factor * base));
        let direction = Complex64::from_polar(1.0, rng.gen::<f64>() * TAU);
        let part = m.restrict(|z| (z * direction.conj()).re > 0.0);
        restriction = restriction.max((box_ratio_circular(domain, &part)?.kappa - base) / base);
    }

    let disk = PresentedDomain::circular(unit_disk.clone());
    let cfg = NormConfig::default();
    let mut c_scaling: f64 = 0.0;
    let mut level_gap: f64 = f64::NEG_INFINITY;
    for q in [1.0, 2.0] {
        let low = ConstantEstimator::new(&disk, 1, q, &cfg)?;
        let high = ConstantEstimator::new(&disk, 3, q, &cfg)?;
        for _ in 0..5 {
            let m = random_domain_measure(&mut rng, &unit_disk, 8);
            let factor = 10f64.powf(rng.gen_range(-1.0..1.0));
            let base = high.estimate(&m)?.c_hat;
            let scaled = high.estimate(&m.scale(factor)?)?.c_hat;
            let expected = factor.powf(1.0 / q) * base;
            c_scaling = c_scaling.max((scaled - expected).abs() / expected);
            level_gap = level_gap.max((low.estimate(&m)?.c_hat - base) / base);
        }
    }
    Ok(vec![
        Check::at_most("max relative |κ(cμ) - cκ(μ)|", kappa_scaling, 1e-12 * s),
        Check::at_most("max relative excess κ(μ|E) - κ(μ)", restriction, 1e-12 * s),
        Check::at_most("max relative |c_hat(cμ) - c^{1/q} c_hat(μ)|", c_scaling, 1e-12 * s),
        Check::at_most("max relative excess c_hat(level 1) - c_hat(level 3)", level_gap, 1e-12 * s),
    ])
}

/// Convenience for trend classification of `c_hat^q` values.
pub fn constant_trend(values: &[f64], q: f64) -> TrendClass {
    trend_of(values.iter().map(|v| v.powf(q)).collect()).class
}
