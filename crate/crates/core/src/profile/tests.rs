use super::*;
use crate::integrate::{full_orbit, trace_separatrix, StepControl};
use crate::phase::FixedPointId;
use crate::triples::Triple;
use std::f64::consts::FRAC_PI_2;

fn data(g: i64, m1: i64, m2: i64) -> TripleData {
    Triple::new(g, m1, m2).unwrap().data()
}

fn cone(d: &TripleData, r0: f64) -> ProfileCurve {
    let c = d.radial_rate() * (2.0 * d.theta_star).sin();
    let orbit = Trajectory::stationary(d, FixedPointId::OMinus, r0.ln() / c, 0.0);
    profile_from_orbit(d, &orbit, (0.0, 1.0)).unwrap()
}

fn type_ii(d: &TripleData, p: PhasePoint) -> ProfileCurve {
    let orbit = full_orbit(d, p, &[], &StepControl::default()).unwrap();
    profile_from_orbit(d, &orbit, (0.0, 1.0)).unwrap()
}

#[test]
fn cone_matches_exponential() {
    let d = data(2, 1, 1);
    let curve = cone(&d, 1e-3);
    let c = d.radial_rate() * (2.0 * d.theta_star).sin();
    for s in &curve.samples {
        assert!((s.r - (c * s.t).exp()).abs() <= 1e-10);
    }
    assert_eq!(curve.klass, ProfileClass::Ray);
    assert_eq!(curve.ray_crossings, 0);
    assert!(geodesic_residual(&d, &curve).unwrap() <= 1e-10);
    let angle = curve.max_polar_angle();
    assert!((angle - FRAC_PI_2 / 2.0).abs() < 1e-12);
}

#[test]
fn cone_area_ratio_is_constant() {
    for (g, m1, m2) in [(2, 1, 1), (4, 1, 5), (3, 2, 2)] {
        let d = data(g, m1, m2);
        let curve = cone(&d, 1e-3);
        let expected = d.volume(d.theta_star) / (d.n as f64 - 1.0);
        let (lo, hi) = curve.r_range();
        for k in 0..50 {
            let rho = lo + (hi - lo) * k as f64 / 49.0;
            let ratio = ball_area_ratio(&d, &curve, rho).unwrap();
            assert!(((ratio - expected) / expected).abs() <= 1e-9, "{g},{m1},{m2} rho={rho}");
        }
    }
}

#[test]
fn anchor_scaling_is_exact() {
    let d = data(3, 1, 1);
    let orbit = full_orbit(&d, PhasePoint::new(0.5, -1.2), &[], &StepControl::default()).unwrap();
    let a = profile_from_orbit(&d, &orbit, (0.0, 1.0)).unwrap();
    let b = profile_from_orbit(&d, &orbit, (0.0, 2.0)).unwrap();
    for (x, y) in a.samples.iter().zip(&b.samples) {
        assert_eq!(2.0 * x.r, y.r);
    }
    assert_eq!(a.scaled(2.0).samples, b.samples);
}

#[test]
fn anchor_must_lie_in_span() {
    let d = data(2, 1, 1);
    let orbit = Trajectory::stationary(&d, FixedPointId::OMinus, -1.0, 0.0);
    let err = profile_from_orbit(&d, &orbit, (1.0, 1.0)).unwrap_err();
    assert!(matches!(err, Error::AnchorOutOfRange { .. }));
}

#[test]
fn type_ii_has_single_minimum_at_right_angle() {
    for (g, m1, m2) in [(2, 1, 1), (2, 3, 3), (4, 4, 5)] {
        let d = data(g, m1, m2);
        let curve = type_ii(&d, PhasePoint::new(d.theta_star, -FRAC_PI_2));
        assert_eq!(curve.klass, ProfileClass::TypeII);
        assert_eq!(curve.r_minima.len(), 1);
        assert!((curve.r_minima[0].alpha + FRAC_PI_2).abs() <= 1e-8);
        assert!(r_extrema(&curve).iter().all(|e| e.minimum));
    }
}

#[test]
fn self_intersections_by_regime() {
    let nodal = data(2, 3, 3);
    let curve = type_ii(&nodal, PhasePoint::new(0.6, -1.0));
    assert!(curve.self_intersections.is_empty());
    let spiral = data(2, 1, 1);
    let curve = type_ii(&spiral, PhasePoint::new(0.6, -1.0));
    assert!(!curve.self_intersections.is_empty());
    assert!(curve.ray_crossings >= 3);
}

#[test]
fn separatrix_profile_is_type_i() {
    let d = data(2, 1, 1);
    let orbit = trace_separatrix(&d, FixedPointId::S1, &StepControl::default()).unwrap();
    let t1 = orbit.events_of(1).next().unwrap().time;
    let opts = ProfileOptions { window: Some((0.0, t1)), ..Default::default() };
    let full = profile_from_orbit(&d, &orbit, (t1, 1.0)).unwrap();
    assert_eq!(full.klass, ProfileClass::TypeI);
    assert!(full.ray_crossings >= 3);
    let mut curve = profile_from_orbit_with(&d, &orbit, (t1, 1.0), &opts).unwrap();
    curve.merge_equal_radii();
    assert_eq!(curve.klass, ProfileClass::TypeI);
    for (i, w) in curve.samples.windows(2).enumerate() {
        assert!(w[1].r > w[0].r, "{i} {:?} {:?}", w[0], w[1]);
    }
    let res = geodesic_residual(&d, &curve).unwrap();
    assert!(res <= 1e-5, "{res}");
}

#[test]
fn unresolved_orbits_are_rejected() {
    let d = data(2, 1, 1);
    let ctrl = StepControl::default().with_max_time(1.0);
    let orbit = crate::integrate::integrate(
        &d,
        PhasePoint::new(0.5, -1.0).into(),
        crate::integrate::Direction::Forward,
        &[],
        &ctrl,
    )
    .unwrap();
    let curve = profile_from_orbit(&d, &orbit, (0.0, 1.0)).unwrap();
    assert_eq!(curve.klass, ProfileClass::Unclassified);
    assert_eq!(classify_profile(&d, &curve).unwrap_err(), Error::UnresolvedOrbit);
}

#[test]
fn geodesic_residual_is_second_order() {
    let d = data(2, 3, 3);
    let ctrl = StepControl::default().with_tolerance(1e-12);
    let orbit = full_orbit(&d, PhasePoint::new(0.6, -1.0), &[], &ctrl).unwrap();
    let res: Vec<f64> = [1, 2, 4]
        .iter()
        .map(|&k| {
            let opts = ProfileOptions { spacing: 8e-3, window: Some((-3.0, 3.0)), subdivide: k };
            geodesic_residual(&d, &profile_from_orbit_with(&d, &orbit, (0.0, 1.0), &opts).unwrap()).unwrap()
        })
        .collect();
    for w in res.windows(2) {
        let order = (w[0] / w[1]).log2();
        assert!((order - 2.0).abs() < 0.2, "{res:?}");
    }
}

#[test]
fn area_ratio_is_monotone_on_type_ii() {
    let d = data(2, 3, 3);
    let curve = type_ii(&d, PhasePoint::new(d.theta_star, -FRAC_PI_2));
    let rmin = curve.r_minima[0].r;
    let mut last = 0.0;
    for k in 0..50 {
        let rho = rmin * (1.0 + 4.0 * k as f64 / 49.0);
        let v = ball_area_ratio(&d, &curve, rho).unwrap();
        assert!(v >= last * (1.0 - 1e-8));
        last = v;
    }
    assert!(matches!(ball_area_ratio(&d, &curve, 0.5 * rmin), Err(Error::RhoOutOfRange { .. })));
}

#[test]
fn polyline_intersections() {
    let bowtie = [[0.0, 0.0], [1.0, 1.0], [1.0, 0.0], [0.0, 1.0]];
    let hits = self_intersections(&bowtie);
    assert_eq!(hits.len(), 1);
    assert!((hits[0][0] - 0.5).abs() < 1e-15 && (hits[0][1] - 0.5).abs() < 1e-15);
    let zigzag = [[0.0, 0.0], [1.0, 1.0], [2.0, 0.0], [3.0, 1.0]];
    assert!(self_intersections(&zigzag).is_empty());
}

#[test]
fn hausdorff_of_shifted_segments() {
    let a = [[0.0, 0.0], [1.0, 0.0], [2.0, 0.0]];
    let b = [[0.0, 0.5], [2.0, 0.5]];
    assert!((hausdorff_distance(&a, &b) - 0.5).abs() < 1e-15);
    let c = [[0.0, 0.0], [3.0, 0.0]];
    assert!((hausdorff_distance(&a, &c) - 1.0).abs() < 1e-15);
}
