//! Group axioms and metric properties on random inputs.

use std::f64::consts::PI;

use heisqc_core::geometry::{dilate, dist, group_inv, group_mul};
use heisqc_core::{Metric, Point};
use proptest::prelude::*;

fn point(r: f64) -> impl Strategy<Value = Point> {
    (-r..r, -r..r, -r..r).prop_map(|(x, y, t)| Point::new(x, y, t))
}

fn close(a: Point, b: Point, rel: f64) -> bool {
    let scale = 1f64.max(a.x.abs()).max(a.y.abs()).max(a.t.abs());
    (a.x - b.x).abs() <= rel * scale && (a.y - b.y).abs() <= rel * scale && (a.t - b.t).abs() <= rel * scale
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(10_000))]

    #[test]
    fn group_axioms(p in point(5.0), q in point(5.0), r in point(5.0)) {
        prop_assert!(close(group_mul(group_mul(p, q), r), group_mul(p, group_mul(q, r)), 1e-12));
        prop_assert_eq!(group_mul(p, Point::ORIGIN), p);
        prop_assert_eq!(group_mul(Point::ORIGIN, p), p);
        prop_assert!(close(group_mul(p, group_inv(p)), Point::ORIGIN, 1e-12));
        prop_assert!(close(group_mul(group_inv(p), p), Point::ORIGIN, 1e-12));
    }

    #[test]
    fn dilations_are_automorphisms(p in point(5.0), q in point(5.0), lambda in 0.05f64..20.0) {
        let lhs = dilate(lambda, group_mul(p, q)).unwrap();
        let rhs = group_mul(dilate(lambda, p).unwrap(), dilate(lambda, q).unwrap());
        prop_assert!(close(lhs, rhs, 1e-12));
    }

    #[test]
    fn koranyi_metric(g in point(3.0), p in point(3.0), q in point(3.0), r in point(3.0), lambda in 0.1f64..10.0) {
        let m = Metric::Koranyi;
        let d = dist(m, p, q).unwrap();
        prop_assert!((dist(m, group_mul(g, p), group_mul(g, q)).unwrap() - d).abs() <= 1e-9 * d.max(1.0));
        prop_assert!((dist(m, dilate(lambda, p).unwrap(), dilate(lambda, q).unwrap()).unwrap() - lambda * d).abs() <= 1e-9 * (lambda * d).max(1.0));
        prop_assert!((dist(m, q, p).unwrap() - d).abs() <= 1e-12 * d.max(1.0));
        prop_assert!(dist(m, p, r).unwrap() + dist(m, r, q).unwrap() - d >= -1e-9);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(2_000))]

    #[test]
    fn sub_riemannian_metric(g in point(2.0), p in point(2.0), q in point(2.0), r in point(2.0), lambda in 0.1f64..10.0) {
        let m = Metric::SubRiemannian;
        let d = dist(m, p, q).unwrap();
        prop_assert!((dist(m, group_mul(g, p), group_mul(g, q)).unwrap() - d).abs() <= 1e-9 * d.max(1.0));
        prop_assert!((dist(m, dilate(lambda, p).unwrap(), dilate(lambda, q).unwrap()).unwrap() - lambda * d).abs() <= 1e-9 * (lambda * d).max(1.0));
        prop_assert!((dist(m, q, p).unwrap() - d).abs() <= 1e-9 * d.max(1.0));
        prop_assert!(dist(m, p, r).unwrap() + dist(m, r, q).unwrap() - d >= -1e-9);
    }

    #[test]
    fn sandwich(p in point(2.0), q in point(2.0)) {
        let ds = dist(Metric::SubRiemannian, p, q).unwrap();
        let dh = dist(Metric::Koranyi, p, q).unwrap();
        prop_assert!(ds / PI.sqrt() <= dh + 1e-9);
        prop_assert!(dh <= ds + 1e-9);
    }
}

#[test]
fn sandwich_is_tight_on_the_axes() {
    for t in [1e-3, 0.5, 7.0] {
        let q = Point::new(0.0, 0.0, t);
        let ratio = dist(Metric::Koranyi, Point::ORIGIN, q).unwrap() * PI.sqrt() / dist(Metric::SubRiemannian, Point::ORIGIN, q).unwrap();
        assert!((ratio - 1.0).abs() < 1e-9);
    }
    let q = Point::new(0.3, -1.2, 0.0);
    assert!((dist(Metric::Koranyi, Point::ORIGIN, q).unwrap() - dist(Metric::SubRiemannian, Point::ORIGIN, q).unwrap()).abs() < 1e-12);
}
