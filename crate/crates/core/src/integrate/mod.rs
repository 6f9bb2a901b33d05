//! Adaptive integration of the phase system, optionally augmented with the radius.
//!
//! The (θ, α) subsystem is autonomous. When a state carries a radius `r`, it is
//! advanced with `dr/dt = (2/g) r sin(2θ) cos(α)`, so `log r` grows with the Euclidean
//! arclength of the profile curve in the wedge measured in units of `r`. The radius
//! enters the step-size control only through a purely relative error scale, so
//! scaling `r0` by a power of two scales every radius sample by exactly that factor
//! and leaves the step sequence untouched.
//!
//! Backward runs negate the field and report decreasing times.

mod dopri;

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::phase::{classify_fixed_point, nearest_fixed_point, sin_2theta, vector_field, FixedPointId, PhasePoint};
use crate::triples::TripleData;

use dopri::Vec3;

/// Smallest admissible step before the integrator gives up.
pub const MIN_STEP: f64 = 1e-14;
/// Residual to which event conditions are localized.
pub const EVENT_RESIDUAL: f64 = 1e-12;
const EVENT_MAX_ITER: usize = 80;
/// Interior probes per step used to catch pairs of roots inside one step.
const EVENT_PROBES: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StepControl {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_step: f64,
    pub max_time: f64,
    pub sink_radius: f64,
    /// Displacement of separatrix seeds from their saddle.
    pub separatrix_offset: f64,
    /// Take fixed steps of this size instead of adapting (used for order studies).
    pub fixed_step: Option<f64>,
}

impl Default for StepControl {
    fn default() -> Self {
        StepControl {
            rel_tol: 1e-10,
            abs_tol: 1e-10,
            max_step: 0.1,
            max_time: 500.0,
            sink_radius: 1e-10,
            separatrix_offset: 1e-8,
            fixed_step: None,
        }
    }
}

impl StepControl {
    pub fn with_tolerance(mut self, tol: f64) -> Self {
        self.rel_tol = tol;
        self.abs_tol = tol;
        self
    }

    pub fn with_max_time(mut self, max_time: f64) -> Self {
        self.max_time = max_time;
        self
    }
}

/// Phase state with an optional radius.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct State {
    pub theta: f64,
    pub alpha: f64,
    pub r: Option<f64>,
}

impl State {
    pub fn new(theta: f64, alpha: f64) -> Self {
        State { theta, alpha, r: None }
    }

    pub fn with_radius(theta: f64, alpha: f64, r: f64) -> Self {
        State { theta, alpha, r: Some(r) }
    }

    pub fn phase(&self) -> PhasePoint {
        PhasePoint::new(self.theta, self.alpha)
    }

    fn to_vec(self) -> Vec3 {
        [self.theta, self.alpha, self.r.unwrap_or(0.0)]
    }

    fn from_vec(v: &Vec3, has_radius: bool) -> Self {
        State { theta: v[0], alpha: v[1], r: has_radius.then_some(v[2]) }
    }
}

impl From<PhasePoint> for State {
    fn from(p: PhasePoint) -> Self {
        State::new(p.theta, p.alpha)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Direction {
    Forward,
    Backward,
}

impl Direction {
    pub fn sign(self) -> f64 {
        match self {
            Direction::Forward => 1.0,
            Direction::Backward => -1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum EventKind {
    AlphaEquals(f64),
    ThetaEquals(f64),
    RadiusEquals(f64),
    EnterBall { center: PhasePoint, radius: f64 },
}

/// Which sign changes of the event function count, in the order the trajectory is traced.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Crossing {
    Any,
    Rising,
    Falling,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EventSpec {
    pub kind: EventKind,
    pub direction: Crossing,
    pub terminal: bool,
}

impl EventSpec {
    pub fn new(kind: EventKind) -> Self {
        EventSpec { kind, direction: Crossing::Any, terminal: false }
    }

    pub fn alpha(level: f64) -> Self {
        Self::new(EventKind::AlphaEquals(level))
    }

    pub fn theta(level: f64) -> Self {
        Self::new(EventKind::ThetaEquals(level))
    }

    pub fn radius(level: f64) -> Self {
        Self::new(EventKind::RadiusEquals(level))
    }

    pub fn terminal(mut self) -> Self {
        self.terminal = true;
        self
    }

    pub fn crossing(mut self, direction: Crossing) -> Self {
        self.direction = direction;
        self
    }

    fn value(&self, y: &Vec3) -> f64 {
        match self.kind {
            EventKind::AlphaEquals(v) => y[1] - v,
            EventKind::ThetaEquals(v) => y[0] - v,
            EventKind::RadiusEquals(v) => y[2] - v,
            EventKind::EnterBall { center, radius } => PhasePoint::new(y[0], y[1]).periodic_distance(&center) - radius,
        }
    }

    fn accepts(&self, from: f64, to: f64) -> bool {
        match self.direction {
            Crossing::Any => true,
            Crossing::Rising => from < 0.0 && to > 0.0,
            Crossing::Falling => from > 0.0 && to < 0.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EventRecord {
    /// Index into the event list passed to [`integrate`].
    pub index: usize,
    pub time: f64,
    pub state: State,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Termination {
    Event,
    MaxTime,
    FixedPoint,
}

/// Behaviour of an orbit at one end of its time axis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum OrbitEnd {
    FixedPoint(FixedPointId),
    Open,
}

/// One accepted step with its continuous extension.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseSegment {
    t0: f64,
    h: f64,
    t_end: f64,
    y0: Vec3,
    dense: [Vec3; 4],
}

impl DenseSegment {
    fn constant(t0: f64, t1: f64, y: Vec3) -> Self {
        DenseSegment { t0, h: t1 - t0, t_end: t1, y0: y, dense: [[0.0; 3]; 4] }
    }

    /// Time interval covered, as `(lo, hi)`.
    pub fn bounds(&self) -> (f64, f64) {
        if self.t_end >= self.t0 {
            (self.t0, self.t_end)
        } else {
            (self.t_end, self.t0)
        }
    }

    fn eval_vec(&self, t: f64) -> Vec3 {
        let s = if self.h == 0.0 { 0.0 } else { (t - self.t0) / self.h };
        dopri::dense_eval(&self.y0, &self.dense, s)
    }

    pub fn eval(&self, t: f64, has_radius: bool) -> State {
        State::from_vec(&self.eval_vec(t), has_radius)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    /// Sample times in traversal order (increasing forward, decreasing backward).
    pub times: Vec<f64>,
    pub states: Vec<State>,
    pub events: Vec<EventRecord>,
    pub terminated_by: Termination,
    pub direction: Direction,
    /// Limit behaviour as `t -> -inf` and `t -> +inf`, where known.
    pub past: OrbitEnd,
    pub future: OrbitEnd,
    pub sink_radius: f64,
    /// True when the orbit is a fixed point.
    pub stationary: bool,
    /// Dense segments sorted by increasing time.
    segments: Vec<DenseSegment>,
}

impl Trajectory {
    /// A stationary orbit sitting at the fixed point `id` over `[t0, t1]`.
    pub fn stationary(d: &TripleData, id: FixedPointId, t0: f64, t1: f64) -> Self {
        let p = id.location(d);
        let y = [p.theta, p.alpha, 0.0];
        Trajectory {
            times: vec![t0, t1],
            states: vec![State::from(p); 2],
            events: Vec::new(),
            terminated_by: Termination::FixedPoint,
            direction: Direction::Forward,
            past: OrbitEnd::FixedPoint(id),
            future: OrbitEnd::FixedPoint(id),
            sink_radius: 0.0,
            stationary: true,
            segments: vec![DenseSegment::constant(t0, t1, y)],
        }
    }

    pub fn has_radius(&self) -> bool {
        self.states.first().is_some_and(|s| s.r.is_some())
    }

    /// `(earliest, latest)` time covered.
    pub fn span(&self) -> (f64, f64) {
        let a = *self.times.first().expect("non-empty trajectory");
        let b = *self.times.last().expect("non-empty trajectory");
        (a.min(b), a.max(b))
    }

    pub fn initial_state(&self) -> State {
        self.states[0]
    }

    pub fn final_state(&self) -> State {
        *self.states.last().expect("non-empty trajectory")
    }

    pub fn segments(&self) -> &[DenseSegment] {
        &self.segments
    }

    /// Dense-output state at time `t`, if `t` lies in the covered span.
    pub fn state_at(&self, t: f64) -> Option<State> {
        let (lo, hi) = self.span();
        if !(lo..=hi).contains(&t) {
            return None;
        }
        if self.segments.is_empty() {
            return Some(self.states[0]);
        }
        let idx = self.segments.partition_point(|s| s.bounds().1 < t).min(self.segments.len() - 1);
        Some(self.segments[idx].eval(t, self.has_radius()))
    }

    /// Events produced by the spec at `index`, in traversal order.
    pub fn events_of(&self, index: usize) -> impl Iterator<Item = &EventRecord> {
        self.events.iter().filter(move |e| e.index == index)
    }

    /// Joins a backward and a forward run that start from the same state into one
    /// forward-ordered trajectory.
    pub fn glue(backward: &Trajectory, forward: &Trajectory) -> Trajectory {
        assert_eq!(backward.direction, Direction::Backward);
        assert_eq!(forward.direction, Direction::Forward);
        let mut times: Vec<f64> = backward.times.iter().rev().copied().collect();
        let mut states: Vec<State> = backward.states.iter().rev().copied().collect();
        times.pop();
        states.pop();
        times.extend_from_slice(&forward.times);
        states.extend_from_slice(&forward.states);
        let mut events: Vec<EventRecord> = backward.events.iter().rev().copied().collect();
        events.extend_from_slice(&forward.events);
        let mut segments = backward.segments.clone();
        segments.extend_from_slice(&forward.segments);
        Trajectory {
            times,
            states,
            events,
            terminated_by: forward.terminated_by,
            direction: Direction::Forward,
            past: backward.past,
            future: forward.future,
            sink_radius: forward.sink_radius.max(backward.sink_radius),
            stationary: false,
            segments,
        }
    }
}

struct Stepper<'a> {
    d: &'a TripleData,
    sign: f64,
    has_radius: bool,
    ctrl: &'a StepControl,
}

impl Stepper<'_> {
    fn field(&self, y: &Vec3) -> Vec3 {
        let (dt, da) = vector_field(self.d, PhasePoint::new(y[0], y[1]));
        let dr = if self.has_radius { self.d.radial_rate() * y[2] * sin_2theta(y[0]) * y[1].cos() } else { 0.0 };
        [self.sign * dt, self.sign * da, self.sign * dr]
    }

    fn scale(&self, a: &Vec3, b: &Vec3, i: usize) -> f64 {
        let mag = a[i].abs().max(b[i].abs());
        if i == 2 {
            self.ctrl.rel_tol * mag
        } else {
            self.ctrl.abs_tol + self.ctrl.rel_tol * mag
        }
    }

    fn dim(&self) -> usize {
        if self.has_radius {
            3
        } else {
            2
        }
    }

    fn norm(&self, v: &Vec3, a: &Vec3, b: &Vec3) -> f64 {
        let n = self.dim();
        let sum: f64 = (0..n).map(|i| (v[i] / self.scale(a, b, i)).powi(2)).sum();
        (sum / n as f64).sqrt()
    }

    fn initial_step(&self, y0: &Vec3, f0: &Vec3) -> f64 {
        if let Some(h) = self.ctrl.fixed_step {
            return h;
        }
        let d0 = self.norm(y0, y0, y0);
        let d1 = self.norm(f0, y0, y0);
        let mut h0 = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 } else { 0.01 * d0 / d1 };
        h0 = h0.min(self.ctrl.max_step);
        let mut y1 = *y0;
        for i in 0..3 {
            y1[i] += h0 * f0[i];
        }
        let f1 = self.field(&y1);
        let mut diff = [0.0; 3];
        for i in 0..3 {
            diff[i] = f1[i] - f0[i];
        }
        let d2 = self.norm(&diff, y0, y0) / h0;
        let big = d1.max(d2);
        let h1 = if big <= 1e-15 { (h0 * 1e-3).max(1e-6) } else { (0.01 / big).powf(0.2) };
        (100.0 * h0).min(h1).min(self.ctrl.max_step)
    }
}

fn sign_of(x: f64) -> i8 {
    if x > 0.0 {
        1
    } else if x < 0.0 {
        -1
    } else {
        0
    }
}

/// Localizes a root of `g` on `[a, b]` (with `g(a)`, `g(b)` of opposite signs) by a
/// safeguarded Illinois iteration.
pub(crate) fn locate_root<G: Fn(f64) -> f64>(g: &G, mut a: f64, mut ga: f64, mut b: f64, mut gb: f64) -> f64 {
    if ga == 0.0 {
        return a;
    }
    if gb == 0.0 {
        return b;
    }
    let mut side = 0i8;
    let mut best = if ga.abs() < gb.abs() { a } else { b };
    let mut last_width = (b - a).abs();
    let mut force_bisect = false;
    for _ in 0..EVENT_MAX_ITER {
        let x = if force_bisect {
            0.5 * (a + b)
        } else {
            let x = (a * gb - b * ga) / (gb - ga);
            if x.is_finite() && x > a.min(b) && x < a.max(b) {
                x
            } else {
                0.5 * (a + b)
            }
        };
        let gx = g(x);
        if gx.abs() < g(best).abs() {
            best = x;
        }
        if gx.abs() <= EVENT_RESIDUAL || gx == 0.0 {
            return x;
        }
        if sign_of(gx) == sign_of(ga) {
            a = x;
            ga = gx;
            if side == -1 {
                gb *= 0.5;
            }
            side = -1;
        } else {
            b = x;
            gb = gx;
            if side == 1 {
                ga *= 0.5;
            }
            side = 1;
        }
        let width = (b - a).abs();
        if width <= f64::EPSILON * a.abs().max(b.abs()).max(1e-300) {
            break;
        }
        force_bisect = width > 0.5 * last_width;
        last_width = width;
    }
    best
}

/// Integrates the phase system from `y0` at `t = 0`.
pub fn integrate(
    d: &TripleData,
    y0: State,
    direction: Direction,
    events: &[EventSpec],
    ctrl: &StepControl,
) -> Result<Trajectory> {
    integrate_from(d, 0.0, y0, direction, events, ctrl)
}

/// Integrates the phase system from `y0` at time `t0`.
pub fn integrate_from(
    d: &TripleData,
    t0: f64,
    y0: State,
    direction: Direction,
    events: &[EventSpec],
    ctrl: &StepControl,
) -> Result<Trajectory> {
    let has_radius = y0.r.is_some();
    if let Some(r) = y0.r {
        if !(r > 0.0 && r.is_finite()) {
            return Err(Error::Domain { what: "r0", value: r, domain: "(0, inf)" });
        }
    }
    let stepper = Stepper { d, sign: direction.sign(), has_radius, ctrl };
    let sign = direction.sign();
    let time_of = |tau: f64| t0 + sign * tau;

    let mut y = y0.to_vec();
    let mut k = stepper.field(&y);
    let mut traj = Trajectory {
        times: vec![t0],
        states: vec![y0],
        events: Vec::new(),
        terminated_by: Termination::MaxTime,
        direction,
        past: OrbitEnd::Open,
        future: OrbitEnd::Open,
        sink_radius: ctrl.sink_radius,
        stationary: false,
        segments: Vec::new(),
    };

    let set_limit = |traj: &mut Trajectory, id: FixedPointId| match direction {
        Direction::Forward => traj.future = OrbitEnd::FixedPoint(id),
        Direction::Backward => traj.past = OrbitEnd::FixedPoint(id),
    };

    let (near, dist) = nearest_fixed_point(d, y0.phase());
    if (k[0] == 0.0 && k[1] == 0.0) || (!near.is_saddle() && dist <= ctrl.sink_radius) {
        traj.terminated_by = Termination::FixedPoint;
        traj.stationary = k[0] == 0.0 && k[1] == 0.0;
        set_limit(&mut traj, near);
        return Ok(traj);
    }

    let mut last_sign: Vec<(i8, f64)> = events.iter().map(|e| (sign_of(e.value(&y)), e.value(&y))).collect();
    let mut tau = 0.0;
    let mut h = stepper.initial_step(&y, &k);
    let mut rejected = false;

    loop {
        if tau >= ctrl.max_time {
            traj.terminated_by = Termination::MaxTime;
            break;
        }
        h = h.min(ctrl.max_step).min(ctrl.max_time - tau);
        if let Some(fixed) = ctrl.fixed_step {
            h = fixed.min(ctrl.max_time - tau);
        }
        let trial = dopri::step(&|v: &Vec3| stepper.field(v), &y, &k, h);
        if !trial.y_new.iter().all(|v| v.is_finite()) {
            h *= 0.25;
            if h < MIN_STEP {
                return Err(Error::NonFinite(time_of(tau)));
            }
            rejected = true;
            continue;
        }
        let err = if ctrl.fixed_step.is_some() { 0.0 } else { stepper.norm(&trial.err, &y, &trial.y_new) };
        if err > 1.0 {
            h *= (0.9 * err.powf(-0.2)).max(0.2);
            rejected = true;
            if h < MIN_STEP {
                return Err(Error::StepUnderflow { t: time_of(tau), h });
            }
            continue;
        }

        // accepted
        let t_start = time_of(tau);
        let t_stop = time_of(tau + h);
        let mut seg = DenseSegment { t0: t_start, h: t_stop - t_start, t_end: t_stop, y0: y, dense: trial.dense };

        let mut found: Vec<(f64, usize, f64)> = Vec::new();
        for (i, ev) in events.iter().enumerate() {
            let g_at = |s: f64| ev.value(&dopri::dense_eval(&y, &seg.dense, s));
            let (mut prev_sign, mut prev_val) = last_sign[i];
            let mut prev_s = 0.0;
            for p in 1..=EVENT_PROBES {
                let s = p as f64 / EVENT_PROBES as f64;
                let val = if p == EVENT_PROBES { ev.value(&trial.y_new) } else { g_at(s) };
                let sg = sign_of(val);
                if sg != 0 {
                    if prev_sign != 0 && sg != prev_sign {
                        let root = locate_root(&g_at, prev_s, prev_val, s, val);
                        if ev.accepts(prev_val, val) {
                            found.push((root, i, prev_val));
                        }
                    }
                    prev_sign = sg;
                    prev_val = val;
                    prev_s = s;
                }
            }
            last_sign[i] = (prev_sign, prev_val);
        }
        found.sort_by(|a, b| a.0.total_cmp(&b.0));

        let mut terminal_hit = None;
        for &(s, i, _) in &found {
            let ys = dopri::dense_eval(&y, &seg.dense, s);
            let time = t_start + s * (t_stop - t_start);
            traj.events.push(EventRecord { index: i, time, state: State::from_vec(&ys, has_radius) });
            if events[i].terminal {
                terminal_hit = Some((time, ys));
                break;
            }
        }

        if let Some((time, ys)) = terminal_hit {
            seg.t_end = time;
            traj.segments.push(seg);
            traj.times.push(time);
            traj.states.push(State::from_vec(&ys, has_radius));
            traj.terminated_by = Termination::Event;
            break;
        }

        traj.segments.push(seg);
        tau += h;
        y = trial.y_new;
        k = trial.k_new;
        traj.times.push(t_stop);
        traj.states.push(State::from_vec(&y, has_radius));

        let (near, dist) = nearest_fixed_point(d, PhasePoint::new(y[0], y[1]));
        if !near.is_saddle() && dist <= ctrl.sink_radius {
            traj.terminated_by = Termination::FixedPoint;
            set_limit(&mut traj, near);
            break;
        }

        if ctrl.fixed_step.is_none() {
            let mut fac = if err == 0.0 { 10.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 10.0) };
            if rejected {
                fac = fac.min(1.0);
            }
            h *= fac;
        }
        rejected = false;
    }

    if direction == Direction::Backward {
        traj.segments.reverse();
    }
    Ok(traj)
}

/// Traces the non-vertical invariant manifold of a saddle into the open strip.
///
/// `S1` and `S3` are followed forward along their unstable direction into `O-`;
/// `S2` and `S4` are followed backward along their stable direction into `O+`.
/// Crossings of `theta = theta*` (event index 0), `alpha = 0` (index 1) and
/// `alpha = -pi` (index 2) are recorded.
pub fn trace_separatrix(d: &TripleData, saddle: FixedPointId, ctrl: &StepControl) -> Result<Trajectory> {
    assert!(saddle.is_saddle(), "trace_separatrix expects a saddle, got {saddle}");
    let info = classify_fixed_point(d, saddle);
    let slope = info.slopes[0];
    let loc = info.location;
    let inward = if loc.theta == 0.0 { 1.0 } else { -1.0 };
    let norm = 1.0f64.hypot(slope);
    let delta = ctrl.separatrix_offset;
    let seed = State::new(loc.theta + inward * delta / norm, loc.alpha + inward * delta * slope / norm);
    let direction = match saddle {
        FixedPointId::S1 | FixedPointId::S3 => Direction::Forward,
        _ => Direction::Backward,
    };
    let events = [EventSpec::theta(d.theta_star), EventSpec::alpha(0.0), EventSpec::alpha(-PI)];
    let mut traj = integrate(d, seed, direction, &events, ctrl)?;
    if traj.terminated_by != Termination::FixedPoint {
        return Err(Error::DidNotConverge(ctrl.max_time));
    }
    match direction {
        Direction::Forward => traj.past = OrbitEnd::FixedPoint(saddle),
        Direction::Backward => traj.future = OrbitEnd::FixedPoint(saddle),
    }
    Ok(traj)
}

/// Limit classification of the final state of a trajectory.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Limit {
    FixedPoint(FixedPointId),
    Unresolved,
}

/// The fixed point whose `sink_radius` ball contains the final state, if any.
pub fn omega_limit(traj: &Trajectory, d: &TripleData) -> Limit {
    let (id, dist) = nearest_fixed_point(d, traj.final_state().phase());
    if dist <= traj.sink_radius || (traj.stationary && dist == 0.0) {
        Limit::FixedPoint(id)
    } else {
        Limit::Unresolved
    }
}

/// Integrates both ways from `p` and glues the runs into one resolved orbit.
pub fn full_orbit(d: &TripleData, p: PhasePoint, events: &[EventSpec], ctrl: &StepControl) -> Result<Trajectory> {
    let back = integrate(d, State::from(p), Direction::Backward, events, ctrl)?;
    let fwd = integrate(d, State::from(p), Direction::Forward, events, ctrl)?;
    if back.stationary || fwd.stationary {
        return Ok(fwd);
    }
    Ok(Trajectory::glue(&back, &fwd))
}

#[cfg(test)]
mod tests;
