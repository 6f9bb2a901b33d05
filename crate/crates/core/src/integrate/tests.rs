use super::*;
use crate::phase::FixedPointId;
use crate::triples::Triple;
use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};

fn data(g: i64, m1: i64, m2: i64) -> TripleData {
    Triple::new(g, m1, m2).unwrap().data()
}

#[test]
fn start_at_sink_is_a_single_state() {
    let d = data(2, 1, 1);
    let p = FixedPointId::OMinus.location(&d);
    let tr = integrate(&d, State::from(p), Direction::Forward, &[], &StepControl::default()).unwrap();
    assert_eq!(tr.states.len(), 1);
    assert_eq!(tr.terminated_by, Termination::FixedPoint);
}

#[test]
fn alpha_event_residual() {
    let d = data(2, 1, 1);
    let y0 = State::with_radius(FRAC_PI_4, -FRAC_PI_2, 1.0);
    let tr = integrate(&d, y0, Direction::Forward, &[EventSpec::alpha(0.0)], &StepControl::default()).unwrap();
    assert!(!tr.events.is_empty());
    for e in &tr.events {
        assert!(e.state.alpha.abs() <= 1e-12, "{}", e.state.alpha);
    }
}

/// Classical RK4 with a fixed step, used as an independent reference.
fn rk4(d: &TripleData, mut y: (f64, f64), h: f64, t_end: f64) -> (f64, f64) {
    let f = |p: (f64, f64)| vector_field(d, PhasePoint::new(p.0, p.1));
    let steps = (t_end / h).round() as usize;
    for _ in 0..steps {
        let k1 = f(y);
        let k2 = f((y.0 + 0.5 * h * k1.0, y.1 + 0.5 * h * k1.1));
        let k3 = f((y.0 + 0.5 * h * k2.0, y.1 + 0.5 * h * k2.1));
        let k4 = f((y.0 + h * k3.0, y.1 + h * k3.1));
        y.0 += h / 6.0 * (k1.0 + 2.0 * k2.0 + 2.0 * k3.0 + k4.0);
        y.1 += h / 6.0 * (k1.1 + 2.0 * k2.1 + 2.0 * k3.1 + k4.1);
    }
    y
}

#[test]
fn converges_to_sink_and_matches_rk4() {
    let d = data(2, 1, 1);
    let ctrl = StepControl::default().with_max_time(200.0);
    let tr = integrate(&d, State::new(0.3, 0.2), Direction::Forward, &[], &ctrl).unwrap();
    assert_eq!(tr.terminated_by, Termination::FixedPoint);
    assert_eq!(omega_limit(&tr, &d), Limit::FixedPoint(FixedPointId::OMinus));

    let t = 3.0;
    let s = tr.state_at(t).unwrap();
    let r = rk4(&d, (0.3, 0.2), 1e-4, t);
    assert!((s.theta - r.0).abs() < 1e-8 && (s.alpha - r.1).abs() < 1e-8);
}

#[test]
fn backward_run_reaches_source() {
    let d = data(3, 1, 1);
    let tr = integrate(&d, State::new(0.4, -0.7), Direction::Backward, &[], &StepControl::default()).unwrap();
    assert_eq!(omega_limit(&tr, &d), Limit::FixedPoint(FixedPointId::OPlus));
    assert!(tr.times.windows(2).all(|w| w[1] < w[0]));
    let fwd = integrate(&d, State::new(0.4, -0.7), Direction::Forward, &[], &StepControl::default()).unwrap();
    assert_eq!(omega_limit(&fwd, &d), Limit::FixedPoint(FixedPointId::OMinus));
}

#[test]
fn omega_limit_inside_ball() {
    let d = data(2, 1, 1);
    let mut tr = Trajectory::stationary(&d, FixedPointId::OMinus, 0.0, 1.0);
    tr.stationary = false;
    tr.sink_radius = 1e-8;
    tr.states.push(State::new(FRAC_PI_4 + 1e-9, 1e-9));
    assert_eq!(omega_limit(&tr, &d), Limit::FixedPoint(FixedPointId::OMinus));
}

#[test]
fn deterministic_and_homothetic() {
    let d = data(3, 2, 2);
    let ctrl = StepControl::default().with_max_time(30.0);
    let a = integrate(&d, State::with_radius(0.5, -1.0, 1.0), Direction::Forward, &[], &ctrl).unwrap();
    let b = integrate(&d, State::with_radius(0.5, -1.0, 1.0), Direction::Forward, &[], &ctrl).unwrap();
    let c = integrate(&d, State::with_radius(0.5, -1.0, 2.0), Direction::Forward, &[], &ctrl).unwrap();
    assert_eq!(a, b);
    assert_eq!(a.times, c.times);
    for (x, y) in a.states.iter().zip(&c.states) {
        assert_eq!(x.theta, y.theta);
        assert_eq!(x.alpha, y.alpha);
        assert_eq!(2.0 * x.r.unwrap(), y.r.unwrap());
    }
}

#[test]
fn separatrix_limits_and_crossings() {
    let ctrl = StepControl::default();
    let d = data(2, 1, 1);
    let g1 = trace_separatrix(&d, FixedPointId::S1, &ctrl).unwrap();
    let end = g1.final_state().phase();
    assert!(end.periodic_distance(&FixedPointId::OMinus.location(&d)) < 1e-6);
    assert_eq!(g1.past, OrbitEnd::FixedPoint(FixedPointId::S1));

    let stable = trace_separatrix(&data(2, 3, 3), FixedPointId::S1, &ctrl).unwrap();
    assert_eq!(stable.events_of(0).count(), 0);
    let unstable = trace_separatrix(&data(2, 1, 5), FixedPointId::S1, &ctrl).unwrap();
    assert!(unstable.events_of(0).count() >= 1);
}

#[test]
fn backward_separatrix_ends_at_source() {
    let d = data(2, 1, 1);
    let tr = trace_separatrix(&d, FixedPointId::S2, &StepControl::default()).unwrap();
    assert_eq!(tr.past, OrbitEnd::FixedPoint(FixedPointId::OPlus));
    assert_eq!(tr.future, OrbitEnd::FixedPoint(FixedPointId::S2));
}

#[test]
fn dense_output_interpolates_samples() {
    let d = data(2, 1, 2);
    let fwd = full_orbit(&d, PhasePoint::new(0.5, -1.0), &[], &StepControl::default()).unwrap();
    assert!(fwd.times.windows(2).all(|w| w[1] > w[0]));
    for (t, s) in fwd.times.iter().zip(&fwd.states).step_by(7) {
        let e = fwd.state_at(*t).unwrap();
        assert!((e.theta - s.theta).abs() < 1e-13 && (e.alpha - s.alpha).abs() < 1e-13);
    }
}
