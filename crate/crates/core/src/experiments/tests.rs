use super::*;
use crate::covering::whitney;
use crate::integrate::{Constant, FnField};
use alloc::vec;

fn punctured() -> Domain {
    Domain::punctured(Point::ORIGIN).unwrap()
}

#[test]
fn image_domains_of_catalog_pairs() {
    let ann = Domain::annulus(Point::ORIGIN, 0.5, 3.0).unwrap();
    let inv = image_domain(&SmoothMap::koranyi_inversion(), &ann).unwrap();
    assert_eq!(*inv.shape(), Shape::KoranyiAnnulus { center: Point::ORIGIN, r_in: 1.0 / 3.0, r_out: 2.0 });
    let ball = Domain::koranyi_ball(Point::ORIGIN, 1.5).unwrap();
    let dil = image_domain(&SmoothMap::dilation(2.0).unwrap(), &ball).unwrap();
    assert_eq!(*dil.shape(), Shape::KoranyiBall { center: Point::ORIGIN, radius: 3.0 });
    let st = SmoothMap::horizontal_stretch(2.0).unwrap();
    assert_eq!(image_domain(&st, &punctured()).unwrap(), punctured());
    assert!(image_domain(&st, &ball).is_none());
    let both = SmoothMap::composition(vec![SmoothMap::left_translation(Point::new(1.0, 0.0, 0.0)).unwrap(), SmoothMap::dilation(2.0).unwrap()]).unwrap();
    let img = image_domain(&both, &ball).unwrap();
    assert_eq!(*img.shape(), Shape::KoranyiBall { center: Point::new(1.0, 0.0, 0.0), radius: 3.0 });
}

#[test]
fn koebe_conformal_maps_on_punctured_space() {
    for f in [SmoothMap::dilation(1.7).unwrap(), SmoothMap::rotation(0.9).unwrap()] {
        let r = koebe_scan(&f, &punctured(), &punctured(), Metric::Koranyi, 40, 64, 5).unwrap();
        assert!(r.c_hat <= 1.0 + 1e-9, "{} {}", f.name(), r.c_hat);
        for rec in &r.records {
            assert!(rec.boundary_ratio > 0.0);
        }
    }
}

#[test]
fn koebe_stretch_bounded_by_a() {
    let a = 2.0;
    let f = SmoothMap::horizontal_stretch(a).unwrap();
    let r = koebe_scan(&f, &punctured(), &punctured(), Metric::Koranyi, 200, 32, 1).unwrap();
    for rec in &r.records {
        assert_eq!(rec.a_f, 1.0);
        assert!(rec.boundary_ratio >= 1.0 / a - 1e-12 && rec.boundary_ratio <= a + 1e-12);
    }
    assert!(r.c_hat <= a + 1e-9);
}

#[test]
fn koebe_rejects_wrong_image() {
    let ball = Domain::koranyi_ball(Point::ORIGIN, 1.0).unwrap();
    let err = koebe_scan(&SmoothMap::dilation(3.0).unwrap(), &ball, &ball, Metric::Koranyi, 20, 8, 1).unwrap_err();
    assert!(matches!(err, Error::Configuration(_)));
}

#[test]
fn ball_image_isometry_and_dilation() {
    let ball = Ball::new(Point::new(0.3, 0.1, -0.2), 0.4, Metric::Koranyi).unwrap();
    let g = Point::new(-0.5, 0.2, 0.7);
    let tr = SmoothMap::left_translation(g).unwrap();
    let img = image_domain(&tr, &punctured()).unwrap();
    let r = ball_image_geometry(&tr, &ball, &img, 400, 3).unwrap();
    // Gauge-antipodal equator points realise the diameter 2r.
    assert!((r.diam_image - 0.8).abs() < 1e-12, "{r:?}");
    assert!((r.containment_k - 1.0).abs() < 1e-12);
    let id = ball_image_geometry(&SmoothMap::dilation(1.0).unwrap(), &ball, &punctured(), 400, 3).unwrap();
    let dil = ball_image_geometry(&SmoothMap::dilation(2.5).unwrap(), &ball, &punctured(), 400, 3).unwrap();
    assert!((dil.diam_image / id.diam_image - 2.5).abs() < 1e-12);
    assert!((dil.center_image_boundary_distance / id.center_image_boundary_distance - 2.5).abs() < 1e-12);
    assert!((dil.dist_image_to_boundary / id.dist_image_to_boundary - 2.5).abs() < 1e-12);
}

#[test]
fn ball_image_inversion_is_sandwiched() {
    let ball = Ball::new(Point::new(1.2, 0.0, 0.3), 0.3, Metric::Koranyi).unwrap();
    let r = ball_image_geometry(&SmoothMap::koranyi_inversion(), &ball, &punctured(), 600, 1).unwrap();
    assert!(r.containment_k > 1.0 && r.containment_k < 10.0, "{r:?}");
    assert!(r.inner_radius > 0.0);
}

#[test]
fn qs_isometry_and_stretch() {
    let x = Point::new(1.0, 0.5, 0.2);
    let rot = qs_profile(&SmoothMap::rotation(1.1).unwrap(), &punctured(), x, 5.0, 300, 2, Metric::Koranyi).unwrap();
    for s in &rot.samples {
        assert!((s.ratio / s.t - 1.0).abs() < 1e-12);
    }
    assert!((rot.h_f_hat - 1.0).abs() < 1e-12);
    let a = 1.5;
    let st = qs_profile(&SmoothMap::horizontal_stretch(a).unwrap(), &punctured(), x, 5.0, 300, 2, Metric::Koranyi).unwrap();
    for s in &st.samples {
        assert!(s.ratio <= a * a * s.t * (1.0 + 1e-12));
    }
    let dil = qs_profile(&SmoothMap::dilation(3.0).unwrap(), &punctured(), x, 5.0, 50, 2, Metric::Koranyi).unwrap();
    assert!((dil.h_f_hat - 1.0).abs() < 0.02);
    assert!(qs_profile(&SmoothMap::dilation(3.0).unwrap(), &punctured(), x, 1.0, 5, 2, Metric::Koranyi).is_err());
}

#[test]
fn distance_estimate_isometry_below_one() {
    let f = SmoothMap::left_translation(Point::new(0.2, 0.0, 1.0)).unwrap();
    let r = distance_estimate_audit(&f, &punctured(), 0.5, 1.0, 100, 16, 4, Metric::Koranyi).unwrap();
    assert!(r.c_max <= libm::pow(0.5, 0.5) + 1e-9, "{}", r.c_max);
    for p in &r.pairs {
        let expect = libm::pow(p.distance / p.boundary_distance, 0.5);
        assert!((p.c_pair - expect).abs() < 1e-9);
    }
    assert!(distance_estimate_audit(&f, &punctured(), 1.5, 1.0, 10, 16, 4, Metric::Koranyi).is_err());
}

#[test]
fn curve_diameter_examples() {
    let seg = Curve::horizontal_segment(Point::new(0.5, 0.0, 0.0), 0.0, 0.5, 10).unwrap();
    let dom = punctured();
    let rot = curve_diameter_audit(&SmoothMap::rotation(0.4).unwrap(), &dom, &[seg.clone()], 0.5, 16, 1, Metric::Koranyi).unwrap();
    assert!(rot[0].ratio <= 1.0 + 1e-12);
    assert!(rot[0].alpha_ok);
    let a = 2.0;
    let st = curve_diameter_audit(&SmoothMap::horizontal_stretch(a).unwrap(), &dom, &[seg.clone()], 0.5, 16, 1, Metric::Koranyi).unwrap();
    assert!((st[0].ratio - a).abs() < 1e-12, "{:?}", st[0]);
    let dil = curve_diameter_audit(&SmoothMap::dilation(3.0).unwrap(), &dom, &[seg], 0.5, 16, 1, Metric::Koranyi).unwrap();
    assert!((dil[0].ratio - rot[0].ratio).abs() < 1e-12);
}

#[test]
fn sharpness_examples() {
    let s = sharpness_probe(0.5, 0.01).unwrap();
    assert!((s.diam_image - 0.1).abs() < 1e-15 && s.length == 0.01 && (s.ratio - 10.0).abs() < 1e-12);
    assert_eq!(sharpness_probe(1.0, 0.3).unwrap().ratio, 1.0);
    let mut prev = 0.0;
    for r in [0.5, 0.1, 0.01, 0.001] {
        let v = sharpness_probe(0.5, r).unwrap().ratio;
        assert!(v > prev);
        prev = v;
    }
}

#[test]
fn comparability_constant_maps() {
    let dom = Domain::koranyi_ball(Point::ORIGIN, 1.0).unwrap();
    let w = whitney(&dom, 0.4, 0.2, 2000, Metric::Koranyi, 1).unwrap();
    let dil = integral_comparability(&SmoothMap::dilation(2.0).unwrap(), &dom, &[-1.0, 2.0], &w, 400, 1).unwrap();
    for row in &dil.rows {
        assert!((row.ratio - 1.0).abs() < 1e-9, "{row:?}");
    }
    let a = 1.5;
    let st = integral_comparability(&SmoothMap::horizontal_stretch(a).unwrap(), &dom, &[2.0], &w, 400, 1).unwrap();
    assert!((st.rows[0].ratio - a * a).abs() < 1e-9);
    assert!(integral_comparability(&SmoothMap::dilation(2.0).unwrap(), &dom, &[0.0], &w, 400, 1).is_err());
    let h = harnack_audit(&SmoothMap::rotation(0.3).unwrap(), &dom, &w, 2, 8, 1).unwrap();
    assert!((h.max_ball_ratio - 1.0).abs() < 1e-12);
}

#[test]
fn density_graph_unit_density_tracks_sub_riemannian_distance() {
    let dom = Domain::coordinate_box([-0.4, -0.4, -0.15], [0.4, 0.4, 0.15]).unwrap();
    let h = 0.05;
    let g = density_graph_build(&dom, &Constant(1.0), h, 0.01, 2).unwrap();
    let src = g.nearest_node(Point::new(-0.1, 0.05, 0.0)).unwrap();
    let d = g.shortest_from(src);
    let p = g.nodes()[src];
    let mut checked = 0;
    for (i, &q) in g.nodes().iter().enumerate().step_by(7) {
        let ds = dist(Metric::SubRiemannian, p, q).unwrap();
        // Exact edge lengths: the graph can only overestimate.
        assert!(d[i] >= ds * (1.0 - 1e-9));
        if ds >= 8.0 * h && q.x.abs() < 0.25 && q.y.abs() < 0.25 && q.t.abs() < 0.08 {
            assert!(d[i] <= 1.05 * ds, "{q:?}: {} vs {ds}", d[i]);
            checked += 1;
        }
    }
    assert!(checked > 50);
    let scaled = density_graph_build(&dom, &Constant(2.5), h, 0.01, 2).unwrap();
    let d2 = scaled.shortest_from(src);
    for i in (0..d.len()).step_by(101) {
        assert!((d2[i] - 2.5 * d[i]).abs() <= 1e-9 * d[i]);
    }
    assert!(g.edges().take(1000).all(|(_, _, w)| w > 0.0));
}

#[test]
fn ahlfors_unit_density_slope() {
    let dom = Domain::coordinate_box([-0.5, -0.5, -0.25], [0.5, 0.5, 0.25]).unwrap();
    let g = density_graph_build(&dom, &FnField { label: "one".into(), f: |_| Ok(1.0) }, 0.05, 0.02, 3).unwrap();
    let a = ahlfors_audit(&g, Point::ORIGIN, &[0.15, 0.2, 0.25, 0.3]).unwrap();
    assert!((a.loglog_slope - 4.0).abs() < 0.2, "{a:?}");
    assert!(a.upper_constant < 1.2 * crate::geometry::sub_riemannian_unit_ball_volume());
    assert!(ahlfors_audit(&g, Point::ORIGIN, &[0.05, 0.2]).is_err());
}
