use std::f64::consts::PI;

use proptest::prelude::*;

use lipvol::affine::PrismMap;
use lipvol::geom::HPoint;
use lipvol::product::{aw_ez, cross_cochain, ez, Cochain};
use lipvol::volume::{pair_simplex, triangle_area, PairingMode, VOL_DELTA2};
use lipvol::SimplexExpr;

fn point(r: f64) -> impl Strategy<Value = HPoint> {
    (0.0..r, 0.0..2.0 * PI).prop_map(|(r, t)| HPoint::polar(r, t))
}

fn straight(k: usize, r: f64) -> impl Strategy<Value = SimplexExpr> {
    prop::collection::vec(point(r), k + 1).prop_map(|p| SimplexExpr::straight_points(&p).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn join_is_lipschitz(f in straight(2, 2.0), g in straight(2, 2.0), j in 0usize..3) {
        let s = SimplexExpr::join(f, g, PrismMap::prism_simplex(2, j)).unwrap();
        prop_assert!(s.sampled_expansion(6) <= s.lipschitz_certificate().bound);
    }

    #[test]
    fn vertex_distances_within_diameter_bound(s in straight(3, 4.0)) {
        let v = s.vertex_points().unwrap();
        let d = s.diameter_bound();
        for a in &v {
            for b in &v {
                prop_assert!(lipvol::geom::hdist(&a[0].coords(), &b[0].coords()) <= d + 1e-12);
            }
        }
    }

    #[test]
    fn pairing_bound(s in straight(2, 3.0)) {
        let l = s.lipschitz_certificate().bound;
        let a = pair_simplex(&s, PairingMode::Exact).unwrap();
        prop_assert!(a.abs() <= l * l * VOL_DELTA2);
        prop_assert!(a.abs() < PI);
    }

    #[test]
    fn exact_and_quadrature_agree(s in straight(2, 2.5)) {
        let a = pair_simplex(&s, PairingMode::Exact).unwrap();
        let b = lipvol::volume::quadrature_area(&s, 1e-9);
        prop_assert!((a - b).abs() < 1e-6 * (1.0 + a.abs()));
    }

    #[test]
    fn area_is_alternating(p in prop::collection::vec(point(3.0), 3)) {
        let c: Vec<Vec<f64>> = p.iter().map(|x| x.coords.clone()).collect();
        let a = triangle_area(&c[0], &c[1], &c[2]);
        prop_assert!((a + triangle_area(&c[1], &c[0], &c[2])).abs() < 1e-12);
        prop_assert!((a - triangle_area(&c[1], &c[2], &c[0])).abs() < 1e-12);
    }

    #[test]
    fn aw_ez_and_cross(m in 0usize..3, n in 0usize..3, seed in any::<u64>(), fv in -3.0f64..3.0, gv in -3.0f64..3.0) {
        let mut rng = lipvol::suite::rng(seed);
        let s = lipvol::suite::random_straight(&mut rng, m, 1.5);
        let r = lipvol::suite::random_straight(&mut rng, n, 1.5);
        let map = aw_ez(&s, &r).unwrap();
        prop_assert_eq!(map.len(), 1);
        prop_assert_eq!(map.get(&(s.canonical(), r.canonical())), Some(&1.0));
        let mut f = Cochain::new(m);
        f.set(&s, fv);
        let mut g = Cochain::new(n);
        g.set(&r, gv);
        let v = cross_cochain(&f, &g, 1).eval_chain(&ez(&s, &r)).unwrap();
        prop_assert!((v - fv * gv).abs() < 1e-12);
    }
}
