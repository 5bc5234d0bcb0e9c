use carleson::boxes::trend_analysis;
use carleson::conformal::{
    hull_riemann_maps, pushforward_measure, pushforward_to_image, univalence_audit, UNIVALENCE_TOLERANCE,
};
use carleson::corpus::standard_families;
use carleson::geometry::boundary_maps;
use carleson::{Atom, AtomicMeasure, Circle, CircularDomain, ConformalMap, MobiusMap, PresentedDomain};
use num_complex::Complex64;
use proptest::prelude::*;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn quad(beta: f64) -> ConformalMap {
    ConformalMap::quad_poly(c(beta, 0.0)).unwrap()
}

fn automorphism(p: Complex64) -> ConformalMap {
    ConformalMap::Mobius(MobiusMap::disk_automorphism(p).unwrap())
}

fn chain() -> ConformalMap {
    ConformalMap::compose(vec![automorphism(c(0.2, -0.1)), quad(0.3), automorphism(c(-0.1, 0.3))]).unwrap()
}

fn in_disk() -> impl Strategy<Value = Complex64> {
    (0.0..0.995f64, 0.0..std::f64::consts::TAU).prop_map(|(r, t)| Complex64::from_polar(r, t))
}

proptest! {
    #[test]
    fn invert_undoes_apply(z in in_disk(), beta_re in -0.45..0.45f64, beta_im in -0.2..0.2f64) {
        let maps = [
            ConformalMap::quad_poly(c(beta_re, beta_im)).unwrap(),
            chain(),
            automorphism(c(0.3, 0.1)),
        ];
        for map in &maps {
            let w = map.apply(z).unwrap();
            let back = map.invert(w, Complex64::new(0.0, 0.0)).unwrap();
            prop_assert!((map.apply(back).unwrap() - w).norm() <= 1e-12 * w.norm().max(1.0));
            prop_assert!((back - z).norm() < 1e-10, "{map:?}: {back} vs {z}");
        }
    }

    #[test]
    fn chain_rule(z in in_disk()) {
        let map = chain();
        let h = 1e-6;
        let fd = (map.apply(z + h).unwrap() - map.apply(z - h).unwrap()) / (2.0 * h);
        let d = map.derivative(z).unwrap();
        prop_assert!((fd - d).norm() < 1e-6 * d.norm());
    }

    #[test]
    fn presented_pushforward_round_trip(atoms in prop::collection::vec((in_disk(), 0.1..1.0f64), 1..10)) {
        let mu = AtomicMeasure::new(atoms.into_iter().map(|(z, w)| Atom { z, w }).collect()).unwrap();
        let g = PresentedDomain::new(CircularDomain::unit_disk(), chain()).unwrap();
        let image = pushforward_to_image(&g, &mu).unwrap();
        let back = pushforward_measure(&g, &image).unwrap();
        prop_assert_eq!(back.total_mass(), mu.total_mass());
        for (a, b) in back.atoms().iter().zip(mu.atoms()) {
            prop_assert!((a.z - b.z).norm() < 1e-10 && a.w == b.w);
        }
    }
}

#[test]
fn examples() {
    let q = quad(0.3);
    assert_eq!(q.apply(c(1.0, 0.0)).unwrap(), c(1.3, 0.0));
    assert_eq!(q.derivative(c(0.0, 0.0)).unwrap(), c(1.0, 0.0));
    assert!((q.invert(c(1.3, 0.0), c(0.9, 0.0)).unwrap() - c(1.0, 0.0)).norm() < 1e-12);
    assert!(ConformalMap::quad_poly(c(0.5, 0.0)).is_err());

    let f0 = boundary_maps(&CircularDomain::disk(c(1.0, 2.0), 3.0).unwrap())[0];
    let z = c(0.4, 2.7);
    assert!((ConformalMap::Mobius(f0).invert(f0.apply(z).unwrap(), c(0.0, 0.0)).unwrap() - z).norm() < 1e-14);

    let id = PresentedDomain::circular(CircularDomain::unit_disk());
    let mu = AtomicMeasure::new(vec![Atom { z: c(0.1, 0.2), w: 0.5 }, Atom { z: c(-0.7, 0.0), w: 2.0 }]).unwrap();
    assert_eq!(pushforward_measure(&id, &mu).unwrap(), mu);

    let chart = ConformalMap::Mobius(
        MobiusMap::new(c(1.0, 0.0), c(-0.3, 0.0), c(-0.3, 0.0), c(1.0, 0.0)).unwrap(),
    );
    let g = PresentedDomain::new(CircularDomain::unit_disk(), chart).unwrap();
    let pulled = pushforward_measure(&g, &AtomicMeasure::point_mass(c(0.0, 0.0), 0.7).unwrap()).unwrap();
    assert!((pulled.atoms()[0].z - c(0.3, 0.0)).norm() < 1e-15);
    assert_eq!(pulled.total_mass(), 0.7);
}

#[test]
fn hull_maps_are_the_boundary_maps() {
    let three = CircularDomain::new(
        Circle::new(c(0.0, 0.0), 2.0).unwrap(),
        vec![Circle::new(c(-0.8, 0.0), 0.3).unwrap(), Circle::new(c(0.7, 0.5), 0.4).unwrap()],
    )
    .unwrap();
    for d in [CircularDomain::unit_disk(), CircularDomain::annulus(0.25).unwrap(), three] {
        let hulls = hull_riemann_maps(&d);
        for (h, f) in hulls.iter().zip(boundary_maps(&d)) {
            assert!(h.as_mobius().unwrap().projectively_equal(&f, 1e-12));
        }
    }
    let ann = hull_riemann_maps(&CircularDomain::annulus(0.25).unwrap());
    let z = c(0.4, 0.3);
    assert_eq!(ann[0].apply(z).unwrap(), z);
    assert!((ann[1].apply(z).unwrap() - 0.25 / z).norm() < 1e-15);
}

#[test]
fn univalence_audit_examples() {
    let disk = CircularDomain::unit_disk();
    let mild = univalence_audit(&PresentedDomain::new(disk.clone(), quad(0.3)).unwrap(), 512);
    let near = univalence_audit(&PresentedDomain::new(disk.clone(), quad(0.49)).unwrap(), 512);
    assert!(mild.passed && near.passed);
    assert!(near.min_ratio < mild.min_ratio);
    assert!(near.min_ratio > UNIVALENCE_TOLERANCE);

    // (2z-2) -> u + u²/4 -> +1 is z²
    let square = ConformalMap::compose(vec![
        ConformalMap::Mobius(MobiusMap::new(c(2.0, 0.0), c(-2.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)).unwrap()),
        quad(0.25),
        ConformalMap::Mobius(MobiusMap::new(c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)).unwrap()),
    ])
    .unwrap();
    assert!((square.apply(c(0.3, 0.4)).unwrap() - c(0.3, 0.4).powi(2)).norm() < 1e-14);
    let double_cover = PresentedDomain::unvalidated(disk.clone(), square.clone()).unwrap();
    assert!(!univalence_audit(&double_cover, 512).passed);
    assert!(PresentedDomain::new(disk, square).is_err());
}

/// Families pushed onto `G = ψ(φ(D))` and pulled back in two stages land on
/// the same disk measures, so the κ trend survives both presentations.
#[test]
fn stagewise_pullback_preserves_classification() {
    let disk = CircularDomain::unit_disk();
    let phi = automorphism(c(0.25, -0.2));
    let psi = quad(0.3);
    let whole = PresentedDomain::new(disk.clone(), ConformalMap::compose(vec![phi.clone(), psi.clone()]).unwrap()).unwrap();
    let w_stage = PresentedDomain::new(disk.clone(), psi).unwrap();
    let v_stage = PresentedDomain::new(disk.clone(), phi).unwrap();
    for f in standard_families() {
        let mut direct = Vec::new();
        let mut staged = Vec::new();
        for m in &f.members {
            let on_g = pushforward_to_image(&whole, m).unwrap();
            direct.push(pushforward_measure(&whole, &on_g).unwrap());
            let on_w = pushforward_measure(&w_stage, &on_g).unwrap();
            staged.push(pushforward_measure(&v_stage, &on_w).unwrap());
        }
        let a = trend_analysis(&disk, &direct).unwrap();
        let b = trend_analysis(&disk, &staged).unwrap();
        assert_eq!(a.class, f.expected, "{}", f.name);
        assert_eq!(b.class, f.expected, "{}", f.name);
        for (x, y) in a.values.iter().zip(&b.values) {
            assert!((x - y).abs() < 1e-6 * x, "{}: {x} vs {y}", f.name);
        }
    }
}
