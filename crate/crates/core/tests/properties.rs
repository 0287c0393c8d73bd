use proptest::prelude::*;

use v2vgeo_core::classify::classify_link;
use v2vgeo_core::fading::{keyed_normal, link_rng, LinkKey};
use v2vgeo_core::geometry::{self, Point2};
use v2vgeo_core::plos::{p_los_link, ObstacleProfile, ProfileObstacle};
use v2vgeo_core::propagation::{knife_edge_loss, reflection_coefficient, Polarization};
use v2vgeo_core::relay::{p_tall_within, x_max_solve};
use v2vgeo_core::*;

fn pt() -> impl Strategy<Value = Point2> {
    (-200.0..200.0f64, -200.0..200.0f64).prop_map(|(x, y)| Point2::new(x, y))
}

fn car(id: u64, x: f64, y: f64, height: f64) -> Vehicle {
    Vehicle {
        id,
        position: Point2::new(x, y),
        heading: 0.0,
        length: 4.3,
        width: 1.75,
        height,
        antenna_height_above_roof: 0.1,
        class: if height > 2.5 { VehicleClass::Tall } else { VehicleClass::Short },
    }
}

fn rank(c: LinkClass) -> u8 {
    match c {
        LinkClass::Los => 0,
        LinkClass::NlosV => 1,
        LinkClass::NlosB => 2,
        LinkClass::OutOfRange => 3,
    }
}

fn square(id: u64, c: Point2, half: f64) -> StaticObject {
    StaticObject {
        id,
        kind: StaticKind::Building,
        outline: vec![
            Point2::new(c.x - half, c.y - half),
            Point2::new(c.x + half, c.y - half),
            Point2::new(c.x + half, c.y + half),
            Point2::new(c.x - half, c.y + half),
        ],
        permittivity: None,
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn footprint_area_is_length_times_width(
        len in 1.0..20.0f64, w in 0.5..3.0f64, heading in -7.0..7.0f64, x in -1e3..1e3f64, y in -1e3..1e3f64,
    ) {
        let v = Vehicle { length: len, width: w, heading, ..car(0, x, y, 1.5) };
        let fp = v.footprint();
        prop_assert_eq!(fp.len(), 4);
        prop_assert!((geometry::area(&fp) - len * w).abs() < 1e-9 * (1.0 + len * w));
        prop_assert!(geometry::signed_area(&fp) > 0.0);
    }

    #[test]
    fn min_focal_sum_matches_golden_section(p in pt(), q in pt(), f1 in pt(), f2 in pt()) {
        let f = |t: f64| { let x = p.lerp(q, t); x.distance(f1) + x.distance(f2) };
        let (mut a, mut b) = (0.0f64, 1.0f64);
        let g = (5f64.sqrt() - 1.0) / 2.0;
        for _ in 0..200 {
            let c = b - g * (b - a);
            let d = a + g * (b - a);
            if f(c) < f(d) { b = d } else { a = c }
        }
        let oracle = f(0.5 * (a + b)).min(f(0.0)).min(f(1.0));
        let got = geometry::min_focal_sum_on_segment(p, q, f1, f2);
        prop_assert!(got <= oracle + 1e-7, "closed form {got} above search {oracle}");
        prop_assert!(got >= oracle - 1e-7, "closed form {got} below search {oracle}");
    }

    #[test]
    fn segment_queries_equal_brute_force(
        centers in prop::collection::vec((pt(), 1.0..15.0f64), 1..60), a in pt(), b in pt(),
    ) {
        let polys: Vec<(u64, Vec<Point2>)> =
            centers.iter().enumerate().map(|(i, &(c, h))| (i as u64, square(i as u64, c, h).outline)).collect();
        let index = SpatialIndex::build(polys.clone());
        let want: Vec<u64> =
            polys.iter().filter(|(_, p)| geometry::segment_intersects_polygon(a, b, p)).map(|(i, _)| *i).collect();
        prop_assert_eq!(index.query_segment(a, b), want);
        prop_assert!(index.audit());
    }

    #[test]
    fn classification_is_symmetric(
        xs in prop::collection::vec((0.0..400.0f64, 0.0..14.0f64, 1.3..3.6f64), 2..25),
    ) {
        let vehicles: Vec<Vehicle> = xs.iter().enumerate().map(|(i, &(x, y, h))| car(i as u64, x, y, h)).collect();
        let scene = Scene::new(0.0, vehicles, Vec::new()).unwrap();
        let index = SceneIndex::build(&scene);
        let (radio, ranges) = (RadioConfig::default(), RangeConfig::default());
        let (a, b) = (&scene.vehicles()[0], &scene.vehicles()[1]);
        let ab = classify_link(&index, a, b, &radio, &ranges);
        let ba = classify_link(&index, b, a, &radio, &ranges);
        prop_assert_eq!(ab.class, ba.class);
        prop_assert_eq!(ab.distance, ba.distance);
        let model = ChannelModel::default();
        let p_ab = model.evaluate_pair(&index, a.id, b.id).unwrap();
        let p_ba = model.evaluate_pair(&index, b.id, a.id).unwrap();
        prop_assert_eq!(p_ab.faded, p_ba.faded);
    }

    #[test]
    fn adding_an_obstacle_never_improves_the_class(
        xs in prop::collection::vec((0.0..300.0f64, 0.0..14.0f64, 1.3..3.6f64), 2..15),
        extra in (0.0..300.0f64, 0.0..14.0f64, 1.3..3.6f64),
        building in prop::option::of((0.0..300.0f64, -40.0..60.0f64, 2.0..20.0f64)),
    ) {
        let vehicles: Vec<Vehicle> = xs.iter().enumerate().map(|(i, &(x, y, h))| car(i as u64, x, y, h)).collect();
        let before = Scene::new(0.0, vehicles.clone(), Vec::new()).unwrap();
        let mut more = vehicles;
        more.push(car(999, extra.0, extra.1, extra.2));
        let statics = building.map(|(x, y, h)| vec![square(1, Point2::new(x, y), h)]).unwrap_or_default();
        let after = Scene::new(0.0, more, statics).unwrap();
        let (radio, ranges) = (RadioConfig::default(), RangeConfig::default());
        let (i0, i1) = (SceneIndex::build(&before), SceneIndex::build(&after));
        let c0 = classify_link(&i0, &before.vehicles()[0], &before.vehicles()[1], &radio, &ranges).class;
        let c1 = classify_link(&i1, &after.vehicles()[0], &after.vehicles()[1], &radio, &ranges).class;
        prop_assert!(rank(c1) >= rank(c0), "{c0} became {c1}");
    }

    #[test]
    fn scene_json_round_trip(xs in prop::collection::vec((0.0..500.0f64, 0.0..14.0f64, 1.3..3.6f64, -3.0..3.0f64), 0..20)) {
        let vehicles: Vec<Vehicle> = xs
            .iter()
            .enumerate()
            .map(|(i, &(x, y, h, hd))| Vehicle { heading: hd, ..car(i as u64, x, y, h) })
            .collect();
        let scene = Scene::new(2.5, vehicles, vec![square(7, Point2::new(50.0, 60.0), 5.0)]).unwrap();
        let back = Scene::from_json(&scene.to_json()).unwrap();
        prop_assert_eq!(back, scene);
    }

    #[test]
    fn knife_edge_loss_is_nonnegative_and_monotone(v1 in -5.0..20.0f64, dv in 0.0..5.0f64) {
        let (a, b) = (knife_edge_loss(v1), knife_edge_loss(v1 + dv));
        prop_assert!(a >= 0.0);
        prop_assert!(b >= a - 1e-12);
    }

    #[test]
    fn reflection_coefficients_are_bounded(theta in 1e-6..std::f64::consts::FRAC_PI_2, eps in 1.0..80.0f64) {
        for pol in [Polarization::Vertical, Polarization::Horizontal] {
            let r = reflection_coefficient(theta, eps, pol).unwrap();
            prop_assert!(r.abs() <= 1.0 + 1e-12);
        }
    }

    #[test]
    fn link_los_probability_is_a_probability_and_falls_with_obstacle_height(
        d in 20.0..800.0f64, frac in 0.05..0.95f64, mu in 0.5..4.0f64, sigma in 0.01..1.0f64, bump in 0.0..2.0f64,
        hi in 1.2..3.6f64, hj in 1.2..3.6f64,
    ) {
        let lambda = RadioConfig::default().wavelength();
        let prof = |m: f64| ObstacleProfile::new(d, vec![ProfileObstacle { d_obs: frac * d, mu: m, sigma }]).unwrap();
        let p0 = p_los_link(hi, hj, 0.1, d, &prof(mu), lambda);
        let p1 = p_los_link(hi, hj, 0.1, d, &prof(mu + bump), lambda);
        prop_assert!((0.0..=1.0).contains(&p0));
        prop_assert!(p1 <= p0 + 1e-15);
    }

    #[test]
    fn fading_draw_ignores_direction(seed in any::<u64>(), a in any::<u64>(), b in any::<u64>(), t in 0.0..1e5f64) {
        let x = keyed_normal(seed, LinkKey { tx: a, rx: b, timestamp: t });
        let y = keyed_normal(seed, LinkKey { tx: b, rx: a, timestamp: t });
        prop_assert_eq!(x.to_bits(), y.to_bits());
    }

    #[test]
    fn x_max_solution_has_tiny_residual(
        mu_s in 100.0..600.0f64, s_s in 5.0..200.0f64, mu_t in 100.0..600.0f64, s_t in 5.0..200.0f64,
    ) {
        let q = |x: f64| 0.5 * libm::erfc(x / std::f64::consts::SQRT_2);
        if let Ok(x) = x_max_solve(mu_s, s_s, mu_t, s_t) {
            let residual = 1.0 - q((x - mu_s) / s_s) - q((x - mu_t) / s_t);
            prop_assert!(residual.abs() < 1e-9);
        }
    }

    #[test]
    fn tall_window_probability_is_monotone(g in 0.0..1.0f64, l in 0.0..0.2f64, x in 0.0..500.0f64, dx in 0.0..100.0f64) {
        let (a, b) = (p_tall_within(g, l, x), p_tall_within(g, l, x + dx));
        prop_assert!((0.0..=1.0).contains(&a));
        prop_assert!(b >= a);
    }
}

#[test]
fn fading_draws_at_different_instants_are_uncorrelated() {
    use rand_distr::{Distribution, StandardNormal};
    let n = 20_000;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for i in 0..n {
        let x: f64 = StandardNormal.sample(&mut link_rng(3, i, i + 1, 0.0));
        let y: f64 = StandardNormal.sample(&mut link_rng(3, i, i + 1, 0.1));
        sxy += x * y;
        sxx += x * x;
        syy += y * y;
    }
    let r = sxy / (sxx * syy).sqrt();
    assert!(r.abs() < 0.03, "correlation {r}");
}
