//! Seeded measure corpora: random atomic measures and named families with a
//! known Carleson / non-Carleson answer.
//!
//! Family members are indexed by `k`; the member places atoms at depth
//! `2^{-k}` below the boundary. Carleson families keep mass proportional to
//! depth, non-Carleson families put mass `≫` depth there.

use std::f64::consts::TAU;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::boxes::box_ratio_disk;
use crate::error::Result;
use crate::geometry::CircularDomain;
use crate::measure::{Atom, AtomicMeasure};
use crate::trend::TrendClass;

pub const FAMILY_STEPS: std::ops::RangeInclusive<u32> = 4..=11;
const RING: usize = 16;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn polar(r: f64, t: f64, w: f64) -> Atom {
    Atom { z: Complex64::from_polar(r, t), w }
}

fn depth(k: u32) -> f64 {
    0.5f64.powi(k as i32)
}

/// Up to `max_atoms` atoms in the unit disk with log-uniform depth in
/// `[1e-3, 1]` and weights in `[0.1, 1]`.
pub fn random_disk_measure(rng: &mut ChaCha8Rng, max_atoms: usize) -> AtomicMeasure {
    let n = rng.gen_range(1..=max_atoms);
    let atoms = (0..n)
        .map(|_| {
            let gap = 10f64.powf(-3.0 * rng.gen::<f64>());
            let r = (1.0 - gap).max(0.0);
            polar(r, rng.gen::<f64>() * TAU, rng.gen_range(0.1..1.0))
        })
        .collect();
    AtomicMeasure::new(atoms).expect("weights are positive")
}

/// Random atoms in a circular domain, half of them crowded towards a random
/// boundary circle.
pub fn random_domain_measure(rng: &mut ChaCha8Rng, domain: &CircularDomain, atoms: usize) -> AtomicMeasure {
    let outer = *domain.outer();
    let mut out = Vec::with_capacity(atoms);
    while out.len() < atoms {
        let z = if rng.gen::<bool>() {
            let i = rng.gen_range(0..domain.component_count());
            let c = domain.circle(i);
            let gap = c.radius * 10f64.powf(-0.5 - 2.5 * rng.gen::<f64>());
            let r = if i == 0 { c.radius - gap } else { c.radius + gap };
            c.center + Complex64::from_polar(r, rng.gen::<f64>() * TAU)
        } else {
            outer.center + Complex64::from_polar(outer.radius * rng.gen::<f64>().sqrt(), rng.gen::<f64>() * TAU)
        };
        if domain.contains(z) {
            out.push(Atom { z, w: rng.gen_range(0.1..1.0) });
        }
    }
    AtomicMeasure::new(out).expect("weights are positive")
}

/// `count` random disk measures rescaled so that `κ = 0.999`.
pub fn unit_kappa_corpus(seed: u64, count: usize, max_atoms: usize) -> Result<Vec<AtomicMeasure>> {
    let mut rng = rng(seed);
    (0..count)
        .map(|_| {
            let m = random_disk_measure(&mut rng, max_atoms);
            let kappa = box_ratio_disk(&m)?.kappa;
            m.scale(0.999 / kappa)
        })
        .collect()
}

/// Single atom at `1 - 2^{-k}` with weight `2^{-k/2}`: `κ = 2^{k/2}`.
pub fn non_carleson_atom(k: u32) -> AtomicMeasure {
    AtomicMeasure::point_mass(Complex64::new(1.0 - depth(k), 0.0), 0.5f64.powf(k as f64 / 2.0)).expect("positive")
}

#[derive(Debug, Clone)]
pub struct Family {
    pub name: &'static str,
    pub expected: TrendClass,
    pub members: Vec<AtomicMeasure>,
}

fn single(k: u32, angle: f64, w: f64) -> Vec<Atom> {
    vec![polar(1.0 - depth(k), angle, w)]
}

fn ring(k: u32, total: f64) -> Vec<Atom> {
    (0..RING).map(|a| polar(1.0 - depth(k), TAU * a as f64 / RING as f64, total / RING as f64)).collect()
}

fn cumulative(k: u32, level: impl Fn(u32) -> Vec<Atom>) -> Vec<Atom> {
    (FAMILY_STEPS.start().to_owned()..=k).flat_map(level).collect()
}

/// Ten families on the unit disk, five of each class.
pub fn standard_families() -> Vec<Family> {
    type Builder = fn(u32) -> Vec<Atom>;
    let specs: [(&'static str, TrendClass, Builder); 10] = [
        ("radial atom, mass = depth", TrendClass::Bounded, |k| single(k, 0.0, depth(k))),
        ("ring, mass = depth", TrendClass::Bounded, |k| ring(k, depth(k))),
        ("cumulative radial, mass = depth", TrendClass::Bounded, |k| cumulative(k, |j| single(j, 0.0, depth(j)))),
        ("cumulative spiral, mass = depth", TrendClass::Bounded, |k| {
            cumulative(k, |j| single(j, j as f64, 2.0 * depth(j)))
        }),
        ("cumulative rings, mass = depth", TrendClass::Bounded, |k| cumulative(k, |j| ring(j, depth(j)))),
        ("radial atom, mass = depth^1/2", TrendClass::Divergent, |k| single(k, 0.0, depth(k).sqrt())),
        ("cumulative radial, mass = depth^1/2", TrendClass::Divergent, |k| {
            cumulative(k, |j| single(j, 0.0, depth(j).sqrt()))
        }),
        ("ring, mass = depth^1/2", TrendClass::Divergent, |k| ring(k, RING as f64 * depth(k).sqrt())),
        ("spiral atom, mass = depth^1/2", TrendClass::Divergent, |k| single(k, k as f64, depth(k).sqrt())),
        ("cumulative radial, mass = depth^0.6", TrendClass::Divergent, |k| {
            cumulative(k, |j| single(j, 0.0, depth(j).powf(0.6)))
        }),
    ];
    specs
        .into_iter()
        .map(|(name, expected, build)| Family {
            name,
            expected,
            members: FAMILY_STEPS.map(|k| AtomicMeasure::new(build(k)).expect("positive weights")).collect(),
        })
        .collect()
}

/// Families on `{ r < |z| < 1 }`: the standard families near the outer
/// circle, and their images `z ↦ r / z̄` crowding the inner circle.
pub fn annulus_families(inner_radius: f64) -> Vec<Family> {
    let mut out = Vec::new();
    for f in standard_families() {
        let mirrored = f
            .members
            .iter()
            .map(|m| m.pushforward(|z| Ok(inner_radius / z.conj())).expect("no atom at the origin"))
            .collect();
        out.push(Family { name: f.name, expected: f.expected, members: mirrored });
        out.push(f);
    }
    out
}
