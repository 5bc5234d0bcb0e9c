//! Carleson box ratio `κ(μ) = sup_S μ(S) / s(S̄ ∩ ∂G)`.
//!
//! # Exactness on atomic measures
//!
//! On the unit disk a square `(h, t0)` captures exactly the atoms with
//! `|z| >= 1 - h` whose angle lies in `[t0, t0 + h)`. For a fixed captured set
//! `T`, the ratio `μ(T) / h` only decreases as `h` grows, and the smallest depth
//! at which `T` can be captured (in the closure sense) is
//!
//! ```text
//! h_min(T) = max(1 - min_{z∈T} |z|,  angular span of T)
//! ```
//!
//! where the span is the shortest circular arc holding the angles of `T`
//! (atoms at the origin carry no angle but force `h_min = 1`). Any square
//! capturing `T` has `h >= h_min(T)`, and squares with `h ↓ h_min(T)` anchored
//! at the first angle of that arc capture a superset of `T`. Hence
//!
//! ```text
//! κ = max_{T : h_min(T) <= cap} μ(T) / h_min(T)
//! ```
//!
//! The supremum is attained when the radial term dominates and approached
//! from above (`h → h_min⁺`) when the angular term does, because the angular
//! interval is half-open.
//!
//! The fast search fixes the anchor atom `j` of the minimal arc. Every atom `a`
//! then enters the window at depth `key_a = max(offset_a, 1 - |z_a|)` with
//! `offset_a = (t_a - t_j) mod 2π`, so the captured mass is a step function of
//! `h` and the ratio is maximized at one of the keys. Sorting the keys gives
//! `O(n log n)` per anchor and `O(n² log n)` overall. The exhaustive oracle
//! enumerates the subsets `T` directly.

use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use crate::error::{CarlesonError, Result};
use crate::geometry::{admissible_depth, angle_of, boundary_map_for, CarlesonSquare, CircularDomain};
use crate::measure::AtomicMeasure;
use crate::trend::{trend_of, TrendReport};

pub const ORACLE_ATOM_LIMIT: usize = 14;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ComponentKappa {
    pub index: usize,
    pub kappa: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoxReport {
    pub kappa: f64,
    /// `None` only for the zero measure.
    pub witness: Option<CarlesonSquare>,
    pub per_component: Vec<ComponentKappa>,
}

/// Atom in unit-disk polar form.
#[derive(Debug, Clone, Copy)]
struct PolarAtom {
    r: f64,
    t: f64,
    w: f64,
}

impl PolarAtom {
    fn at_origin(&self) -> bool {
        self.r == 0.0
    }
}

#[derive(Debug, Clone, Copy)]
struct DiskSup {
    ratio: f64,
    depth: f64,
    anchor: f64,
}

fn polar_atoms(measure: &AtomicMeasure) -> Vec<PolarAtom> {
    measure.atoms().iter().map(|a| PolarAtom { r: a.z.norm(), t: angle_of(a.z), w: a.w }).collect()
}

fn check_in_disk(measure: &AtomicMeasure) -> Result<()> {
    measure.validate_with(|z| z.norm() < 1.0)
}

/// Sweep over anchors; ties keep the first candidate found.
fn disk_sup_sweep(atoms: &[PolarAtom], cap: f64) -> Option<DiskSup> {
    let mut best: Option<DiskSup> = None;
    let mut consider = |ratio: f64, depth: f64, anchor: f64| {
        if best.is_none_or(|b| ratio > b.ratio) {
            best = Some(DiskSup { ratio, depth, anchor });
        }
    };

    if atoms.iter().all(PolarAtom::at_origin) {
        if !atoms.is_empty() && cap >= 1.0 {
            consider(atoms.iter().map(|a| a.w).sum::<f64>(), 1.0, 0.0);
        }
        return best;
    }

    let mut keyed: Vec<(f64, f64)> = Vec::with_capacity(atoms.len());
    for anchor in atoms.iter().filter(|a| !a.at_origin()) {
        keyed.clear();
        keyed.extend(atoms.iter().map(|a| {
            let key = if a.at_origin() {
                1.0
            } else {
                (a.t - anchor.t).rem_euclid(TAU).max(1.0 - a.r)
            };
            (key, a.w)
        }));
        keyed.sort_by(|x, y| x.0.total_cmp(&y.0));
        let mut mass = 0.0;
        let mut k = 0;
        while k < keyed.len() {
            let key = keyed[k].0;
            while k < keyed.len() && keyed[k].0 == key {
                mass += keyed[k].1;
                k += 1;
            }
            if key > cap {
                break;
            }
            consider(mass / key, key, anchor.t);
        }
    }
    best
}

/// Minimal capture depth of a subset and the anchor of its minimal arc.
fn minimal_square(subset: &[PolarAtom]) -> (f64, f64) {
    let radial = subset.iter().map(|a| 1.0 - a.r).fold(0.0, f64::max);
    let mut angles: Vec<f64> = subset.iter().filter(|a| !a.at_origin()).map(|a| a.t).collect();
    if angles.len() <= 1 {
        return (radial, angles.first().copied().unwrap_or(0.0));
    }
    angles.sort_by(f64::total_cmp);
    // largest gap between circularly consecutive angles; the arc starts after it
    let n = angles.len();
    let mut max_gap = angles[0] + TAU - angles[n - 1];
    let mut start = angles[0];
    for k in 1..n {
        let gap = angles[k] - angles[k - 1];
        if gap > max_gap {
            max_gap = gap;
            start = angles[k];
        }
    }
    (radial.max(TAU - max_gap), start)
}

fn disk_sup_exhaustive(atoms: &[PolarAtom], cap: f64) -> Option<DiskSup> {
    let n = atoms.len();
    let mut best: Option<DiskSup> = None;
    let mut subset = Vec::with_capacity(n);
    for mask in 1u32..(1u32 << n) {
        subset.clear();
        subset.extend((0..n).filter(|k| mask & (1 << k) != 0).map(|k| atoms[k]));
        let (depth, anchor) = minimal_square(&subset);
        if depth > cap {
            continue;
        }
        let ratio = subset.iter().map(|a| a.w).sum::<f64>() / depth;
        if best.is_none_or(|b| ratio > b.ratio) {
            best = Some(DiskSup { ratio, depth, anchor });
        }
    }
    best
}

fn disk_report(sup: Option<DiskSup>, component: usize, arc_factor: f64) -> Result<(f64, Option<CarlesonSquare>)> {
    match sup {
        None => Ok((0.0, None)),
        Some(s) => Ok((s.ratio / arc_factor, Some(CarlesonSquare::new(component, s.depth, s.anchor)?))),
    }
}

/// Exact `κ` on the unit disk.
pub fn box_ratio_disk(measure: &AtomicMeasure) -> Result<BoxReport> {
    check_in_disk(measure)?;
    let (kappa, witness) = disk_report(disk_sup_sweep(&polar_atoms(measure), 1.0), 0, 1.0)?;
    Ok(BoxReport { kappa, witness, per_component: vec![ComponentKappa { index: 0, kappa }] })
}

/// Exhaustive-subset oracle for [`box_ratio_disk`].
pub fn box_ratio_disk_oracle(measure: &AtomicMeasure) -> Result<BoxReport> {
    if measure.len() > ORACLE_ATOM_LIMIT {
        return Err(CarlesonError::TooManyAtoms { count: measure.len(), limit: ORACLE_ATOM_LIMIT });
    }
    check_in_disk(measure)?;
    let (kappa, witness) = disk_report(disk_sup_exhaustive(&polar_atoms(measure), 1.0), 0, 1.0)?;
    Ok(BoxReport { kappa, witness, per_component: vec![ComponentKappa { index: 0, kappa }] })
}

/// Pushforward of `μ` under `f_i`, in polar form.
fn component_atoms(domain: &CircularDomain, measure: &AtomicMeasure, i: usize) -> Result<Vec<PolarAtom>> {
    let pushed = measure.pushforward_mobius(&boundary_map_for(domain, i))?;
    Ok(polar_atoms(&pushed))
}

fn circular_report(
    domain: &CircularDomain,
    measure: &AtomicMeasure,
    search: fn(&[PolarAtom], f64) -> Option<DiskSup>,
) -> Result<BoxReport> {
    measure.validate_in(domain)?;
    let mut per_component = Vec::with_capacity(domain.component_count());
    let mut best: (f64, Option<CarlesonSquare>) = (0.0, None);
    for i in 0..domain.component_count() {
        let atoms = component_atoms(domain, measure, i)?;
        let cap = admissible_depth(domain, i);
        let (kappa, witness) = disk_report(search(&atoms, cap), i, domain.circle(i).radius)?;
        per_component.push(ComponentKappa { index: i, kappa });
        if witness.is_some() && (best.1.is_none() || kappa > best.0) {
            best = (kappa, witness);
        }
    }
    Ok(BoxReport { kappa: best.0, witness: best.1, per_component })
}

/// `κ` on a circular domain: per component, push `μ` forward by `f_i`, search
/// disk squares with depth capped by [`admissible_depth`], and convert to
/// arclength units by dividing by `r_i`.
pub fn box_ratio_circular(domain: &CircularDomain, measure: &AtomicMeasure) -> Result<BoxReport> {
    circular_report(domain, measure, disk_sup_sweep)
}

/// Exhaustive-subset oracle for [`box_ratio_circular`].
pub fn box_ratio_circular_oracle(domain: &CircularDomain, measure: &AtomicMeasure) -> Result<BoxReport> {
    if measure.len() > ORACLE_ATOM_LIMIT {
        return Err(CarlesonError::TooManyAtoms { count: measure.len(), limit: ORACLE_ATOM_LIMIT });
    }
    circular_report(domain, measure, disk_sup_exhaustive)
}

/// `κ` along a family of measures on a shared domain, with the log2-slope summary.
pub fn trend_analysis(domain: &CircularDomain, family: &[AtomicMeasure]) -> Result<TrendReport> {
    let kappas = family
        .iter()
        .map(|m| box_ratio_circular(domain, m).map(|r| r.kappa))
        .collect::<Result<Vec<_>>>()?;
    Ok(trend_of(kappas))
}

/// Upper bound used by the compact-set exclusion property: `κ(μ) <= κ(μ|G∖E)
/// + μ(E) / d_eff` for a compact `E` at distance `d` from `∂G`, where `d_eff`
/// scales `d` by the inner-component factor `1 - h*_i` (squares on inner
/// components reaching distance `d` have arclength at least `d (1 - h)`).
pub fn exclusion_depth(domain: &CircularDomain, distance: f64) -> f64 {
    let factor = (1..domain.component_count())
        .map(|i| 1.0 - admissible_depth(domain, i))
        .fold(1.0, f64::min);
    distance * factor
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measure::Atom;
    use num_complex::Complex64;
    use std::f64::consts::PI;

    fn atom(r: f64, t: f64, w: f64) -> Atom {
        Atom { z: Complex64::from_polar(r, t), w }
    }

    fn measure(atoms: Vec<Atom>) -> AtomicMeasure {
        AtomicMeasure::new(atoms).unwrap()
    }

    #[test]
    fn single_atom() {
        let rep = box_ratio_disk(&measure(vec![atom(0.5, 0.0, 1.0)])).unwrap();
        assert!((rep.kappa - 2.0).abs() < 1e-15);
        let w = rep.witness.unwrap();
        assert!((w.depth - 0.5).abs() < 1e-15);
        assert_eq!(w.anchor, 0.0);
    }

    #[test]
    fn atom_at_origin_needs_full_depth() {
        let rep = box_ratio_disk(&measure(vec![atom(0.0, 0.0, 1.0)])).unwrap();
        assert_eq!(rep.kappa, 1.0);
        assert_eq!(rep.witness.unwrap().depth, 1.0);
    }

    #[test]
    fn opposite_atoms_are_not_captured_together() {
        let rep = box_ratio_disk(&measure(vec![atom(0.5, 0.0, 1.0), atom(0.5, PI, 1.0)])).unwrap();
        assert!((rep.kappa - 2.0).abs() < 1e-15);
    }

    #[test]
    fn nearby_atoms_combine() {
        // both atoms at radius 0.9, angles 0 and 0.05: h = 0.1 captures both
        let m = measure(vec![atom(0.9, 0.0, 1.0), atom(0.9, 0.05, 1.0)]);
        let rep = box_ratio_disk(&m).unwrap();
        assert!((rep.kappa - 20.0).abs() < 1e-12);
        assert_eq!(box_ratio_disk_oracle(&m).unwrap().kappa, rep.kappa);
    }

    #[test]
    fn empty_measure() {
        let rep = box_ratio_disk(&AtomicMeasure::empty()).unwrap();
        assert_eq!(rep.kappa, 0.0);
        assert!(rep.witness.is_none());
        assert_eq!(box_ratio_disk_oracle(&AtomicMeasure::empty()).unwrap().kappa, 0.0);
    }

    #[test]
    fn oracle_single_atom_formula() {
        for (r, w) in [(0.3, 1.0), (0.9, 0.2), (0.999, 3.0)] {
            let rep = box_ratio_disk_oracle(&measure(vec![atom(r, 1.0, w)])).unwrap();
            assert!((rep.kappa - w / (1.0 - r)).abs() < 1e-9 * rep.kappa);
        }
    }

    #[test]
    fn oracle_limit() {
        let m = measure((0..15).map(|k| atom(0.5, k as f64, 1.0)).collect());
        assert!(matches!(box_ratio_disk_oracle(&m), Err(CarlesonError::TooManyAtoms { .. })));
    }

    #[test]
    fn outside_atoms_rejected() {
        let m = measure(vec![atom(1.2, 0.0, 1.0)]);
        assert!(matches!(box_ratio_disk(&m), Err(CarlesonError::AtomOutsideDomain { .. })));
    }

    #[test]
    fn annulus_single_atom() {
        let ann = CircularDomain::annulus(0.25).unwrap();
        let rep = box_ratio_circular(&ann, &measure(vec![atom(0.3, 0.0, 1.0)])).unwrap();
        assert!((rep.per_component[0].kappa - 1.0 / 0.7).abs() < 1e-12);
        assert!((rep.per_component[1].kappa - 24.0).abs() < 1e-9);
        assert!((rep.kappa - 24.0).abs() < 1e-9);
        let w = rep.witness.unwrap();
        assert_eq!(w.boundary_index, 1);
        assert!((w.depth - 1.0 / 6.0).abs() < 1e-12);
    }

    #[test]
    fn disk_as_circular_domain_matches() {
        let m = measure(vec![atom(0.5, 0.3, 1.0), atom(0.8, 0.4, 0.5), atom(0.1, 4.0, 2.0)]);
        let a = box_ratio_disk(&m).unwrap();
        let b = box_ratio_circular(&CircularDomain::unit_disk(), &m).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn depth_cap_excludes_deep_squares() {
        // cap_0 = 1 - 0.7 = 0.3 and cap_1 = 1 - 0.2 / 0.5 = 0.6; an atom at -0.5
        // needs depth 0.5 from the outer circle and 0.8 from the inner one
        let d = CircularDomain::new(
            crate::geometry::Circle::new(Complex64::new(0.0, 0.0), 1.0).unwrap(),
            vec![crate::geometry::Circle::new(Complex64::new(0.5, 0.0), 0.2).unwrap()],
        )
        .unwrap();
        let far = measure(vec![atom(0.5, PI, 1.0)]);
        let rep = box_ratio_circular(&d, &far).unwrap();
        assert_eq!(rep.kappa, 0.0);
        assert!(rep.witness.is_none());

        let ann = CircularDomain::annulus(0.25).unwrap();
        let m = measure(vec![atom(0.26, 2.0, 1.0), atom(0.9, 2.05, 0.3)]);
        let rep = box_ratio_circular(&ann, &m).unwrap();
        let oracle = box_ratio_circular_oracle(&ann, &m).unwrap();
        assert!((oracle.kappa - rep.kappa).abs() < 1e-9);
        assert_eq!(rep.per_component.len(), 2);
    }

    #[test]
    fn trend_of_non_carleson_family() {
        let disk = CircularDomain::unit_disk();
        let family: Vec<_> = (1..=10)
            .map(|k| measure(vec![atom(1.0 - 2f64.powi(-k), 0.0, 2f64.powf(-k as f64 / 2.0))]))
            .collect();
        let rep = trend_analysis(&disk, &family).unwrap();
        for (k, v) in (1..=10).zip(&rep.values) {
            assert!((v - 2f64.powf(k as f64 / 2.0)).abs() < 1e-12 * v);
        }
        assert!((rep.log2_slope - 0.5).abs() < 1e-12);
        let constant = vec![measure(vec![atom(0.5, 0.0, 1.0)]); 5];
        let flat = trend_analysis(&disk, &constant).unwrap();
        assert!(flat.values.iter().all(|&v| v == flat.values[0]));
        assert_eq!(flat.log2_slope, 0.0);
    }
}
