use std::f64::consts::TAU;

use carleson::boxes::{box_ratio_circular_oracle, box_ratio_disk_oracle, exclusion_depth};
use carleson::geometry::{admissible_depth, boundary_map_for, square_arclength};
use carleson::{box_ratio_circular, box_ratio_disk, Atom, AtomicMeasure, CarlesonSquare, CircularDomain};
use num_complex::Complex64;
use proptest::prelude::*;

fn disk_atom() -> impl Strategy<Value = Atom> {
    // mix of deep and near-boundary atoms, some on shared rays
    (0.0..3.0f64, 0..8u32, 0.0..TAU, any::<bool>(), 0.05..1.0f64).prop_map(|(g, ray, t, snap, w)| {
        let r = 1.0 - 10f64.powf(-g);
        let t = if snap { TAU * ray as f64 / 8.0 } else { t };
        Atom { z: Complex64::from_polar(r, t), w }
    })
}

fn disk_measure(max: usize) -> impl Strategy<Value = AtomicMeasure> {
    prop::collection::vec(disk_atom(), 0..=max).prop_map(|a| AtomicMeasure::new(a).unwrap())
}

fn annulus_measure() -> impl Strategy<Value = AtomicMeasure> {
    prop::collection::vec((0.26..0.999f64, 0.0..TAU, 0.05..1.0f64), 0..=8).prop_map(|v| {
        AtomicMeasure::new(v.into_iter().map(|(r, t, w)| Atom { z: Complex64::from_polar(r, t), w }).collect())
            .unwrap()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn sweep_matches_exhaustive_oracle(m in disk_measure(10)) {
        let fast = box_ratio_disk(&m).unwrap().kappa;
        let slow = box_ratio_disk_oracle(&m).unwrap().kappa;
        prop_assert!((fast - slow).abs() < 1e-9 * slow.max(1.0), "{fast} vs {slow}");
    }

    #[test]
    fn circular_sweep_matches_oracle(m in annulus_measure()) {
        let ann = CircularDomain::annulus(0.25).unwrap();
        let fast = box_ratio_circular(&ann, &m).unwrap();
        let slow = box_ratio_circular_oracle(&ann, &m).unwrap();
        prop_assert!((fast.kappa - slow.kappa).abs() < 1e-9 * slow.kappa.max(1.0));
    }

    #[test]
    fn kappa_scales_linearly(m in disk_measure(10), s in 0.01..100.0f64) {
        let k = box_ratio_disk(&m).unwrap().kappa;
        let ks = box_ratio_disk(&m.scale(s).unwrap()).unwrap().kappa;
        prop_assert!((ks - s * k).abs() <= 1e-12 * (s * k).max(f64::MIN_POSITIVE));
    }

    #[test]
    fn restriction_never_increases_kappa(m in disk_measure(12), cx in -1.0..1.0f64, cy in -1.0..1.0f64, rad in 0.0..1.5f64) {
        let centre = Complex64::new(cx, cy);
        let part = m.restrict(|z| (z - centre).norm() < rad);
        prop_assert!(box_ratio_disk(&part).unwrap().kappa <= box_ratio_disk(&m).unwrap().kappa * (1.0 + 1e-12));
    }

    #[test]
    fn witness_attains_kappa(m in annulus_measure()) {
        let ann = CircularDomain::annulus(0.25).unwrap();
        let report = box_ratio_circular(&ann, &m).unwrap();
        if let Some(sq) = report.witness {
            // κ is a supremum: the witness is the closed minimal square, approached
            // by half-open squares from outside
            let grown = CarlesonSquare { depth: sq.depth * (1.0 + 1e-11), ..sq };
            let ratio = m.mass_in_square(&ann, &grown) / square_arclength(&ann, &grown);
            prop_assert!((ratio - report.kappa).abs() <= 1e-10 * report.kappa, "{ratio} vs {}", report.kappa);
        } else {
            prop_assert!(m.is_empty());
        }
    }

    #[test]
    fn square_correspondence(m in annulus_measure(), i in 0..2usize, frac in 0.01..1.0f64, anchor in 0.0..TAU) {
        let ann = CircularDomain::annulus(0.25).unwrap();
        let h = frac * admissible_depth(&ann, i);
        let sq = CarlesonSquare::new(i, h, anchor).unwrap();
        let lhs = m.mass_in_square(&ann, &sq) / square_arclength(&ann, &sq);
        let f = boundary_map_for(&ann, i);
        let pushed = m.pushforward_mobius(&f).unwrap();
        let disk_mass: f64 = pushed.atoms().iter().filter(|a| sq.contains_disk_point(a.z)).map(|a| a.w).sum();
        let rhs = disk_mass / h / ann.circle(i).radius;
        prop_assert!((lhs - rhs).abs() <= 1e-12 * lhs.max(1.0));
    }

    #[test]
    fn exclusion_bound(m in annulus_measure(), t in 0.0..TAU, rad in 0.01..0.2f64) {
        let ann = CircularDomain::annulus(0.25).unwrap();
        let centre = Complex64::from_polar(0.625, t);
        let in_e = |z: Complex64| (z - centre).norm() <= rad;
        let d = ann.boundary_distance(centre) - rad;
        let outside = m.restrict(|z| !in_e(z));
        let bound = box_ratio_circular(&ann, &outside).unwrap().kappa
            + m.restrict(in_e).total_mass() / exclusion_depth(&ann, d);
        prop_assert!(box_ratio_circular(&ann, &m).unwrap().kappa <= bound * (1.0 + 1e-12));
    }

    #[test]
    fn measure_bookkeeping(m in disk_measure(12), rad in 0.0..1.0f64) {
        let inside = |z: Complex64| z.norm() < rad;
        let a = m.restrict(inside);
        prop_assert_eq!(&a.restrict(inside), &a);
        let b = m.restrict(|z| !inside(z));
        prop_assert!((a.total_mass() + b.total_mass() - m.total_mass()).abs() < 1e-12 * m.total_mass().max(1.0));
        let rot = m.pushforward(|z| Ok(z * Complex64::from_polar(1.0, 0.7))).unwrap();
        prop_assert_eq!(rot.total_mass(), m.total_mass());
    }
}

#[test]
fn single_atom_kappa() {
    // an atom at depth d on a ray: best square has h = d, ratio w / d
    for k in 1..12 {
        let d = 0.5f64.powi(k);
        let m = AtomicMeasure::point_mass(Complex64::new(1.0 - d, 0.0), 1.0).unwrap();
        let kappa = box_ratio_disk(&m).unwrap().kappa;
        assert!((kappa - 1.0 / d).abs() < 1e-12 / d, "k={k}: {kappa}");
    }
    assert_eq!(box_ratio_disk(&AtomicMeasure::empty()).unwrap().kappa, 0.0);
}
