use ebm_core::geometry::{fold, reflect, Line, Point, PolygonDomain};
use ebm_core::maps::{Params, PiecewiseMap};
use proptest::prelude::*;

fn coord() -> impl Strategy<Value = f64> {
    -5.0f64..5.0
}

proptest! {
    #[test]
    fn reflection_is_involution(px in coord(), py in coord(), th in 0.0f64..std::f64::consts::TAU, off in coord()) {
        let l = Line::new(th.cos(), th.sin(), off).unwrap();
        let p = Point::new(px, py);
        prop_assert!(reflect(reflect(p, &l), &l).dist(p) < 1e-12);
    }

    #[test]
    fn fold_is_idempotent(px in coord(), py in coord(), th in 0.0f64..std::f64::consts::TAU, off in coord()) {
        let l = Line::new(th.cos(), th.sin(), off).unwrap();
        let anchor = Point::ORIGIN + l.normal() * (l.offset() + 1.0);
        let once = fold(Point::new(px, py), &l, anchor).unwrap();
        let twice = fold(once, &l, anchor).unwrap();
        prop_assert!(once.dist(twice) < 1e-12);
        prop_assert!(l.signed_distance(once) * l.signed_distance(anchor) >= -1e-12);
    }

    #[test]
    fn samples_lie_inside(seed in 0u64..1000) {
        let tri = PolygonDomain::standard_triangle();
        for p in tri.sample(50, seed) {
            prop_assert!(tri.contains(p, 0.0));
        }
    }

    #[test]
    fn psi_keeps_triangle_invariant(a in 1.0001f64..2.0, s in 0.0f64..1.0, seed in 0u64..100) {
        let b = 1.0 + s * (2.0 / a - 1.0);
        let map = PiecewiseMap::Psi(Params::new(a, b).unwrap());
        let tri = PolygonDomain::standard_triangle();
        for p in tri.sample(100, seed) {
            let q = map.eval(p).unwrap();
            prop_assert!(tri.contains(q, 1e-12));
        }
    }
}
