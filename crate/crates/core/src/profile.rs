//! Profile curves in the wedge `D_g = { r e^{i phi} : 0 <= phi <= pi/g }`.
//!
//! A phase orbit `(theta(t), alpha(t))` determines its profile curve up to homothety:
//! `phi = 2 theta / g` and `log r` is the integral of `(2/g) sin(2 theta) cos(alpha)`.
//! The radius is fixed by an anchor `(t, r)`.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::integrate::{locate_root, DenseSegment, OrbitEnd, Trajectory};
use crate::phase::{sin_2theta, vector_field, PhasePoint};
use crate::triples::TripleData;

/// Default bound on the change of `alpha`, `theta` and `log r` between samples.
pub const DEFAULT_SPACING: f64 = 1e-3;
pub const MIN_SAMPLES: usize = 10;
/// Shortest kept chord, as a fraction of `spacing * r`.
pub const MIN_CHORD_FRACTION: f64 = 1e-2;
/// Radius ratio (to the anchor) below which sampling stops refining with `r`.
pub const MIN_SCALE_RADIUS: f64 = 1e-10;

const GL8_NODES: [f64; 8] = [
    -0.960_289_856_497_536_3,
    -0.796_666_477_413_626_7,
    -0.525_532_409_916_329,
    -0.183_434_642_495_649_8,
    0.183_434_642_495_649_8,
    0.525_532_409_916_329,
    0.796_666_477_413_626_7,
    0.960_289_856_497_536_3,
];
const GL8_WEIGHTS: [f64; 8] = [
    0.101_228_536_290_376_26,
    0.222_381_034_453_374_47,
    0.313_706_645_877_887_3,
    0.362_683_783_378_362,
    0.362_683_783_378_362,
    0.313_706_645_877_887_3,
    0.222_381_034_453_374_47,
    0.101_228_536_290_376_26,
];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProfileSample {
    pub t: f64,
    pub r: f64,
    pub theta: f64,
    pub alpha: f64,
}

impl ProfileSample {
    pub fn phase(&self) -> PhasePoint {
        PhasePoint::new(self.theta, self.alpha)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProfileClass {
    Ray,
    TypeI,
    #[serde(rename = "type_ii")]
    TypeII,
    Unclassified,
}

impl fmt::Display for ProfileClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            ProfileClass::Ray => "ray",
            ProfileClass::TypeI => "type_i",
            ProfileClass::TypeII => "type_ii",
            ProfileClass::Unclassified => "unclassified",
        };
        f.write_str(s)
    }
}

/// A critical point of `r` along the curve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RExtremum {
    pub t: f64,
    pub r: f64,
    pub alpha: f64,
    pub minimum: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProfileOptions {
    pub spacing: f64,
    /// Restrict sampling to this time interval (intersected with the orbit span).
    pub window: Option<(f64, f64)>,
    /// Split every sampling interval into this many equal parts.
    pub subdivide: usize,
}

impl Default for ProfileOptions {
    fn default() -> Self {
        ProfileOptions { spacing: DEFAULT_SPACING, window: None, subdivide: 1 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProfileCurve {
    pub triple: TripleData,
    /// Samples in increasing time.
    pub samples: Vec<ProfileSample>,
    pub plane: Vec<[f64; 2]>,
    pub klass: ProfileClass,
    pub ray_crossings: usize,
    pub r_minima: Vec<RExtremum>,
    pub self_intersections: Vec<[f64; 2]>,
    /// Limit behaviour of the underlying orbit as `t -> -inf` and `t -> +inf`.
    pub ends: (OrbitEnd, OrbitEnd),
    pub stationary: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Classification {
    pub klass: ProfileClass,
    pub ray_crossings: usize,
    pub r_minima: Vec<RExtremum>,
    pub self_intersections: Vec<[f64; 2]>,
}

fn log_rate(d: &TripleData, theta: f64, alpha: f64) -> f64 {
    d.radial_rate() * sin_2theta(theta) * alpha.cos()
}

/// `r` times the curvature of the profile, `d alpha / d log-arclength`.
fn turning(d: &TripleData, theta: f64, alpha: f64) -> f64 {
    (-d.m * alpha.sin() + d.h(theta) * alpha.cos()) / d.radial_rate()
}

fn gl8<F: Fn(f64) -> f64>(f: F, a: f64, b: f64) -> f64 {
    let mid = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let mut acc = 0.0;
    for (x, w) in GL8_NODES.iter().zip(GL8_WEIGHTS) {
        acc += w * f(mid + half * x);
    }
    acc * half
}

fn seg_log_rate(d: &TripleData, seg: &DenseSegment, t: f64) -> f64 {
    let s = seg.eval(t, false);
    log_rate(d, s.theta, s.alpha)
}

/// Signed integral of `d log r / dt` over `[a, b]` along the orbit.
pub fn log_radius_between(d: &TripleData, orbit: &Trajectory, a: f64, b: f64) -> f64 {
    if a == b {
        return 0.0;
    }
    let (lo, hi, sign) = if a < b { (a, b, 1.0) } else { (b, a, -1.0) };
    let mut acc = 0.0;
    for seg in orbit.segments() {
        let (sa, sb) = seg.bounds();
        let x0 = sa.max(lo);
        let x1 = sb.min(hi);
        if x1 > x0 {
            acc += gl8(|t| seg_log_rate(d, seg, t), x0, x1);
        }
    }
    sign * acc
}

/// Field derivatives `(theta', alpha', r')` at a sample.
fn derivatives(d: &TripleData, s: &ProfileSample) -> (f64, f64, f64) {
    let (dt, da) = vector_field(d, s.phase());
    (dt, da, s.r * log_rate(d, s.theta, s.alpha))
}

fn hermite(t0: f64, t1: f64, y0: f64, y1: f64, d0: f64, d1: f64, t: f64) -> f64 {
    let h = t1 - t0;
    if h == 0.0 {
        return y0;
    }
    let s = (t - t0) / h;
    let s2 = s * s;
    let s3 = s2 * s;
    let h00 = 2.0 * s3 - 3.0 * s2 + 1.0;
    let h10 = s3 - 2.0 * s2 + s;
    let h01 = -2.0 * s3 + 3.0 * s2;
    let h11 = s3 - s2;
    h00 * y0 + h10 * h * d0 + h01 * y1 + h11 * h * d1
}

fn plane_point(g: u32, r: f64, theta: f64) -> [f64; 2] {
    let phi = 2.0 * theta / g as f64;
    [r * phi.cos(), r * phi.sin()]
}

/// Builds the profile curve of `orbit` with `r(anchor.0) = anchor.1`.
pub fn profile_from_orbit(d: &TripleData, orbit: &Trajectory, anchor: (f64, f64)) -> Result<ProfileCurve> {
    profile_from_orbit_with(d, orbit, anchor, &ProfileOptions::default())
}

pub fn profile_from_orbit_with(
    d: &TripleData,
    orbit: &Trajectory,
    anchor: (f64, f64),
    opts: &ProfileOptions,
) -> Result<ProfileCurve> {
    let (lo, hi) = orbit.span();
    let (t_anchor, r_anchor) = anchor;
    if !(lo..=hi).contains(&t_anchor) {
        return Err(Error::AnchorOutOfRange { t: t_anchor, lo, hi });
    }
    if !(r_anchor > 0.0 && r_anchor.is_finite()) {
        return Err(Error::Domain { what: "anchor radius", value: r_anchor, domain: "(0, inf)" });
    }
    if opts.spacing.is_nan() || opts.spacing <= 0.0 {
        return Err(Error::Domain { what: "spacing", value: opts.spacing, domain: "(0, inf)" });
    }
    let (wlo, whi) = match opts.window {
        Some((a, b)) => (a.min(b).max(lo), a.max(b).min(hi)),
        None => (lo, hi),
    };
    if wlo > whi {
        return Err(Error::AnchorOutOfRange { t: wlo, lo, hi });
    }

    // sample times, each tagged with the segment covering the interval that ends there
    let mut times: Vec<(f64, usize)> = Vec::new();
    if orbit.segments().is_empty() {
        times.push((wlo, usize::MAX));
    }
    // log r at the start of the current segment, relative to the anchor
    let mut seg_log = -log_radius_between(d, orbit, wlo, t_anchor);
    for (idx, seg) in orbit.segments().iter().enumerate() {
        let (sa, sb) = seg.bounds();
        let a = sa.max(wlo);
        let b = sb.min(whi);
        if b < a || (b == a && !times.is_empty()) {
            continue;
        }
        let inc = gl8(|t| seg_log_rate(d, seg, t), a, b);
        let rel_low = seg_log.min(seg_log + inc).exp();
        seg_log += inc;
        // below the anchor radius the phase step shrinks like sqrt(r), keeping the
        // finite-difference error of d alpha / ds uniform; measuring r against the
        // anchor keeps the sample times invariant under homothety
        let local = opts.spacing * rel_low.clamp(MIN_SCALE_RADIUS, 1.0).sqrt();
        let ya = seg.eval(a, false);
        let yb = seg.eval(b, false);
        let ym = seg.eval(0.5 * (a + b), false);
        let var_alpha = (ym.alpha - ya.alpha).abs() + (yb.alpha - ym.alpha).abs();
        let var_theta = (ym.theta - ya.theta).abs() + (yb.theta - ym.theta).abs();
        let var_sigma = (d.radial_rate() * sin_2theta(ym.theta) * (b - a)).abs();
        let (ka, km, kb) =
            (turning(d, ya.theta, ya.alpha), turning(d, ym.theta, ym.alpha), turning(d, yb.theta, yb.alpha));
        let var_turn = (km - ka).abs() + (kb - km).abs();
        let var = var_alpha.max(var_theta).max(var_sigma).max(var_turn);
        let q = (var / local).ceil().max(1.0) as usize * opts.subdivide.max(1);
        for j in 0..=q {
            let t = if j == q { b } else { a + (b - a) * j as f64 / q as f64 };
            if times.last().is_some_and(|&(last, _)| t <= last) {
                continue;
            }
            times.push((t, idx));
        }
    }

    let state_at = |t: f64, idx: usize| match orbit.segments().get(idx) {
        Some(seg) => seg.eval(t, false),
        None => orbit.states[0],
    };

    // increments of log r between consecutive samples
    let incs: Vec<f64> = times
        .windows(2)
        .map(|w| {
            let seg = &orbit.segments()[w[1].1];
            gl8(|t| seg_log_rate(d, seg, t), w[0].0, w[1].0)
        })
        .collect();
    // r is propagated outward from the anchor one step at a time so that neighbouring
    // radii differ by an accurately rounded amount; accumulating log r instead loses
    // the digits that short chords depend on
    let k_anchor = times.partition_point(|&(t, _)| t <= t_anchor).saturating_sub(1);
    let mut radii = vec![0.0; times.len()];
    radii[k_anchor] = r_anchor * (-log_radius_between(d, orbit, times[k_anchor].0, t_anchor)).exp();
    for k in k_anchor + 1..times.len() {
        radii[k] = radii[k - 1] + radii[k - 1] * incs[k - 1].exp_m1();
    }
    for k in (0..k_anchor).rev() {
        radii[k] = radii[k + 1] + radii[k + 1] * (-incs[k]).exp_m1();
    }

    let g = d.g();
    let mut samples = Vec::with_capacity(times.len());
    let mut plane = Vec::with_capacity(times.len());
    for (k, &(t, idx)) in times.iter().enumerate() {
        let s = state_at(t, idx);
        let r = radii[k];
        samples.push(ProfileSample { t, r, theta: s.theta, alpha: s.alpha });
        plane.push(plane_point(g, r, s.theta));
    }
    thin_short_chords(
        &mut samples,
        &mut plane,
        t_anchor,
        MIN_CHORD_FRACTION * opts.spacing / opts.subdivide.max(1) as f64,
    );

    let mut curve = ProfileCurve {
        triple: *d,
        samples,
        plane,
        klass: ProfileClass::Unclassified,
        ray_crossings: 0,
        r_minima: Vec::new(),
        self_intersections: Vec::new(),
        ends: (orbit.past, orbit.future),
        stationary: orbit.stationary,
    };
    let class = classify_parts(d, &curve);
    curve.klass = class.klass;
    curve.ray_crossings = class.ray_crossings;
    curve.r_minima = class.r_minima;
    curve.self_intersections = class.self_intersections;
    Ok(curve)
}

/// Drops interior samples closer than `ratio * r` to the previously kept one. Near a
/// saddle the orbit barely moves per integrator step, and such clusters only add
/// rounding noise to difference quotients. The anchor sample is always kept.
fn thin_short_chords(samples: &mut Vec<ProfileSample>, plane: &mut Vec<[f64; 2]>, t_anchor: f64, ratio: f64) {
    let n = samples.len();
    if n < 3 {
        return;
    }
    let dist = |a: [f64; 2], b: [f64; 2]| (a[0] - b[0]).hypot(a[1] - b[1]);
    let mut keep = vec![true; n];
    let mut last = 0;
    for k in 1..n {
        let pinned = k == n - 1 || samples[k].t == t_anchor;
        if dist(plane[k], plane[last]) >= ratio * samples[k].r {
            last = k;
        } else if pinned {
            // make room before a pinned sample by dropping the previous free one
            if last != 0 && samples[last].t != t_anchor {
                keep[last] = false;
            }
            last = k;
        } else {
            keep[k] = false;
        }
    }
    let mut it = keep.iter();
    samples.retain(|_| *it.next().unwrap());
    let mut it = keep.iter();
    plane.retain(|_| *it.next().unwrap());
}

fn class_from_ends(curve: &ProfileCurve) -> Result<ProfileClass> {
    if curve.stationary {
        return Ok(ProfileClass::Ray);
    }
    match curve.ends {
        (OrbitEnd::FixedPoint(a), OrbitEnd::FixedPoint(b)) => Ok(match (a.is_saddle(), b.is_saddle()) {
            (false, false) => ProfileClass::TypeII,
            (true, false) | (false, true) => ProfileClass::TypeI,
            (true, true) => ProfileClass::Unclassified,
        }),
        _ => Err(Error::UnresolvedOrbit),
    }
}

fn classify_parts(d: &TripleData, curve: &ProfileCurve) -> Classification {
    Classification {
        klass: class_from_ends(curve).unwrap_or(ProfileClass::Unclassified),
        ray_crossings: count_sign_changes(curve.samples.iter().map(|s| s.theta - d.theta_star)),
        r_minima: r_extrema(curve).into_iter().filter(|e| e.minimum).collect(),
        self_intersections: self_intersections(&curve.plane),
    }
}

/// Classifies a curve by the limits of its orbit and collects its crossing metadata.
pub fn classify_profile(d: &TripleData, curve: &ProfileCurve) -> Result<Classification> {
    let klass = class_from_ends(curve)?;
    Ok(Classification { klass, ..classify_parts(d, curve) })
}

/// Number of strict sign changes in a sequence, ignoring exact zeros.
pub fn count_sign_changes<I: IntoIterator<Item = f64>>(values: I) -> usize {
    let mut last = 0.0f64;
    let mut count = 0;
    for v in values {
        if v == 0.0 || v.is_nan() {
            continue;
        }
        if last != 0.0 && (v > 0.0) != (last > 0.0) {
            count += 1;
        }
        last = v;
    }
    count
}

impl ProfileCurve {
    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn r_range(&self) -> (f64, f64) {
        self.samples.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), s| (lo.min(s.r), hi.max(s.r)))
    }

    /// Cubic Hermite interpolation on sample interval `j` (between samples `j` and `j + 1`).
    pub fn interpolate(&self, j: usize, t: f64) -> ProfileSample {
        let a = &self.samples[j];
        let b = &self.samples[j + 1];
        let da = derivatives(&self.triple, a);
        let db = derivatives(&self.triple, b);
        ProfileSample {
            t,
            theta: hermite(a.t, b.t, a.theta, b.theta, da.0, db.0, t),
            alpha: hermite(a.t, b.t, a.alpha, b.alpha, da.1, db.1, t),
            r: hermite(a.t, b.t, a.r, b.r, da.2, db.2, t),
        }
    }

    /// Drops samples whose radius is bitwise equal to that of the previous kept sample.
    ///
    /// Orbits leaving a saddle creep for a while, and there the radius changes by
    /// about one unit in the last place per sample. The last sample is always kept.
    pub fn merge_equal_radii(&mut self) {
        let n = self.samples.len();
        let mut keep = vec![true; n];
        let mut last = f64::NAN;
        for (i, s) in self.samples.iter().enumerate() {
            if s.r == last && i + 1 < n {
                keep[i] = false;
            } else {
                last = s.r;
            }
        }
        let mut it = keep.iter();
        self.samples.retain(|_| *it.next().unwrap());
        let mut it = keep.iter();
        self.plane.retain(|_| *it.next().unwrap());
    }

    /// Homothetic image with every radius multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> ProfileCurve {
        let g = self.triple.g();
        let mut out = self.clone();
        for s in &mut out.samples {
            s.r *= factor;
        }
        out.plane = out.samples.iter().map(|s| plane_point(g, s.r, s.theta)).collect();
        for e in &mut out.r_minima {
            e.r *= factor;
        }
        for p in &mut out.self_intersections {
            p[0] *= factor;
            p[1] *= factor;
        }
        out
    }

    /// Plane polyline with `subdiv - 1` Hermite points inserted in every sample interval.
    pub fn dense_plane(&self, subdiv: usize) -> Vec<[f64; 2]> {
        let subdiv = subdiv.max(1);
        let g = self.triple.g();
        let mut out = Vec::with_capacity(self.samples.len() * subdiv);
        for j in 0..self.samples.len().saturating_sub(1) {
            out.push(self.plane[j]);
            let (t0, t1) = (self.samples[j].t, self.samples[j + 1].t);
            for k in 1..subdiv {
                let t = t0 + (t1 - t0) * k as f64 / subdiv as f64;
                let s = self.interpolate(j, t);
                out.push(plane_point(g, s.r, s.theta));
            }
        }
        if let Some(last) = self.plane.last() {
            out.push(*last);
        }
        out
    }

    /// Largest polar angle of the plane points, `atan2(y, x)`.
    pub fn max_polar_angle(&self) -> f64 {
        self.plane.iter().map(|p| p[1].atan2(p[0])).fold(f64::NEG_INFINITY, f64::max)
    }
}

/// Critical points of `r`, located where `cos(alpha)` changes sign.
pub fn r_extrema(curve: &ProfileCurve) -> Vec<RExtremum> {
    let s = &curve.samples;
    let mut out = Vec::new();
    let mut prev: Option<usize> = None;
    for k in 0..s.len() {
        let ck = s[k].alpha.cos();
        if ck == 0.0 {
            continue;
        }
        if let Some(j) = prev {
            let cj = s[j].alpha.cos();
            if (cj > 0.0) != (ck > 0.0) {
                let ext = if k == j + 1 {
                    let f = |t: f64| curve.interpolate(j, t).alpha.cos();
                    let t = locate_root(&f, s[j].t, cj, s[k].t, ck);
                    let p = curve.interpolate(j, t);
                    RExtremum { t, r: p.r, alpha: p.alpha, minimum: cj < 0.0 }
                } else {
                    let z = &s[j + 1];
                    RExtremum { t: z.t, r: z.r, alpha: z.alpha, minimum: cj < 0.0 }
                };
                out.push(ext);
            }
        }
        prev = Some(k);
    }
    out
}

fn orient(a: [f64; 2], b: [f64; 2], c: [f64; 2]) -> f64 {
    (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])
}

fn segment_intersection(p1: [f64; 2], p2: [f64; 2], q1: [f64; 2], q2: [f64; 2]) -> Option<[f64; 2]> {
    let d1 = orient(q1, q2, p1);
    let d2 = orient(q1, q2, p2);
    let d3 = orient(p1, p2, q1);
    let d4 = orient(p1, p2, q2);
    if ((d1 > 0.0 && d2 < 0.0) || (d1 < 0.0 && d2 > 0.0)) && ((d3 > 0.0 && d4 < 0.0) || (d3 < 0.0 && d4 > 0.0)) {
        let s = d1 / (d1 - d2);
        return Some([p1[0] + s * (p2[0] - p1[0]), p1[1] + s * (p2[1] - p1[1])]);
    }
    None
}

/// Proper crossings between non-adjacent segments of a polyline, in order of the
/// earlier segment index.
pub fn self_intersections(poly: &[[f64; 2]]) -> Vec<[f64; 2]> {
    let nseg = poly.len().saturating_sub(1);
    let bbox = |i: usize| {
        let (a, b) = (poly[i], poly[i + 1]);
        (a[0].min(b[0]), a[0].max(b[0]), a[1].min(b[1]), a[1].max(b[1]))
    };
    let mut order: Vec<usize> = (0..nseg).collect();
    order.sort_by(|&i, &j| bbox(i).0.total_cmp(&bbox(j).0).then(i.cmp(&j)));
    let mut active: Vec<usize> = Vec::new();
    let mut hits: Vec<(usize, usize, [f64; 2])> = Vec::new();
    for &i in &order {
        let bi = bbox(i);
        active.retain(|&j| bbox(j).1 >= bi.0);
        for &j in &active {
            if i.abs_diff(j) <= 1 {
                continue;
            }
            let bj = bbox(j);
            if bj.3 < bi.2 || bi.3 < bj.2 {
                continue;
            }
            if let Some(p) = segment_intersection(poly[i], poly[i + 1], poly[j], poly[j + 1]) {
                hits.push((i.min(j), i.max(j), p));
            }
        }
        active.push(i);
    }
    hits.sort_by_key(|h| (h.0, h.1));
    hits.into_iter().map(|h| h.2).collect()
}

/// Maximum over interior samples of `|d alpha/ds - (-(n-1) sin(alpha) - H cos(alpha)) / r|`,
/// with `d alpha/ds` from centred differences over plane chord lengths.
pub fn geodesic_residual(d: &TripleData, curve: &ProfileCurve) -> Result<f64> {
    let n = curve.samples.len();
    if n < MIN_SAMPLES {
        return Err(Error::TooFewSamples(n));
    }
    let dist = |a: [f64; 2], b: [f64; 2]| (a[0] - b[0]).hypot(a[1] - b[1]);
    let nm1 = d.n as f64 - 1.0;
    let mut worst = 0.0f64;
    for i in 1..n - 1 {
        let h1 = dist(curve.plane[i - 1], curve.plane[i]);
        let h2 = dist(curve.plane[i], curve.plane[i + 1]);
        if h1 == 0.0 || h2 == 0.0 {
            continue;
        }
        let (a0, a1, a2) = (curve.samples[i - 1].alpha, curve.samples[i].alpha, curve.samples[i + 1].alpha);
        let deriv = -h2 / (h1 * (h1 + h2)) * a0 + (h2 - h1) / (h1 * h2) * a1 + h1 / (h2 * (h1 + h2)) * a2;
        let s = &curve.samples[i];
        let rhs = (-nm1 * s.alpha.sin() - d.mean_curvature(s.theta) * s.alpha.cos()) / s.r;
        worst = worst.max((deriv - rhs).abs());
    }
    Ok(worst)
}

/// Area density per unit time, `(2/g) r^{n-1} v(theta) sin(2 theta)`, and its time derivative.
fn area_density(d: &TripleData, s: &ProfileSample) -> (f64, f64) {
    let sin2 = sin_2theta(s.theta);
    let c = d.radial_rate();
    let f = c * s.r.powi(d.n as i32 - 1) * d.volume(s.theta) * sin2;
    let (sa, ca) = s.alpha.sin_cos();
    let growth = (d.n as f64 - 1.0) * c * sin2 * ca + 2.0 * d.balance(s.theta) * sa + 2.0 * (2.0 * s.theta).cos() * sa;
    (f, f * growth)
}

fn corrected_trapezoid(d: &TripleData, a: &ProfileSample, b: &ProfileSample) -> f64 {
    let (fa, dfa) = area_density(d, a);
    let (fb, dfb) = area_density(d, b);
    let h = b.t - a.t;
    0.5 * h * (fa + fb) + h * h / 12.0 * (dfa - dfb)
}

/// `Area(M ∩ B_rho) / rho^{n-1}`, with area measured by `∫ r^{n-2} v ds` over the part
/// of the curve with `r <= rho`.
pub fn ball_area_ratio(d: &TripleData, curve: &ProfileCurve, rho: f64) -> Result<f64> {
    ball_area_ratios(d, curve, &[rho]).map(|v| v[0])
}

/// [`ball_area_ratio`] at several radii, sharing the quadrature of fully enclosed pieces.
pub fn ball_area_ratios(d: &TripleData, curve: &ProfileCurve, rhos: &[f64]) -> Result<Vec<f64>> {
    let (rmin, rmax) = curve.r_range();
    if let Some(&rho) = rhos.iter().find(|&&rho| !(rho >= rmin && rho <= rmax)) {
        return Err(Error::RhoOutOfRange { rho, lo: rmin, hi: rmax });
    }
    // pieces between samples, split at r-extrema so that r is monotone on each
    let s = &curve.samples;
    let extrema = r_extrema(curve);
    let mut pieces: Vec<(usize, ProfileSample, ProfileSample, f64)> = Vec::new();
    let mut ext = extrema.iter().peekable();
    for j in 0..s.len().saturating_sub(1) {
        let mut cuts = vec![s[j]];
        while let Some(e) = ext.peek() {
            if e.t <= s[j].t {
                ext.next();
                continue;
            }
            if e.t < s[j + 1].t {
                cuts.push(curve.interpolate(j, e.t));
                ext.next();
            } else {
                break;
            }
        }
        cuts.push(s[j + 1]);
        for w in cuts.windows(2) {
            pieces.push((j, w[0], w[1], corrected_trapezoid(d, &w[0], &w[1])));
        }
    }

    let out = rhos
        .iter()
        .map(|&rho| {
            let mut total = 0.0;
            for (j, a, b, full) in &pieces {
                let (ina, inb) = (a.r <= rho, b.r <= rho);
                if ina && inb {
                    total += full;
                } else if ina != inb {
                    let f = |t: f64| curve.interpolate(*j, t).r - rho;
                    let tc = locate_root(&f, a.t, a.r - rho, b.t, b.r - rho);
                    let c = curve.interpolate(*j, tc);
                    total += if ina { corrected_trapezoid(d, a, &c) } else { corrected_trapezoid(d, &c, b) };
                }
            }
            if curve.stationary {
                // the sampled ray starts away from the apex; add the cone over [0, r_first]
                let first = s[0].r.min(s[s.len() - 1].r).min(rho);
                total += d.volume(d.theta_star) * first.powi(d.n as i32 - 1) / (d.n as f64 - 1.0);
            }
            total / rho.powi(d.n as i32 - 1)
        })
        .collect();
    Ok(out)
}

/// Symmetric Hausdorff distance between two polylines.
pub fn hausdorff_distance(a: &[[f64; 2]], b: &[[f64; 2]]) -> f64 {
    directed_hausdorff(a, b).max(directed_hausdorff(b, a))
}

fn point_segment_distance(p: [f64; 2], a: [f64; 2], b: [f64; 2]) -> f64 {
    let (dx, dy) = (b[0] - a[0], b[1] - a[1]);
    let len2 = dx * dx + dy * dy;
    let s = if len2 == 0.0 { 0.0 } else { (((p[0] - a[0]) * dx + (p[1] - a[1]) * dy) / len2).clamp(0.0, 1.0) };
    (p[0] - a[0] - s * dx).hypot(p[1] - a[1] - s * dy)
}

fn directed_hausdorff(from: &[[f64; 2]], to: &[[f64; 2]]) -> f64 {
    if from.is_empty() || to.is_empty() {
        return f64::INFINITY;
    }
    if to.len() == 1 {
        return from.iter().map(|p| (p[0] - to[0][0]).hypot(p[1] - to[0][1])).fold(0.0, f64::max);
    }
    let mut total_len = 0.0;
    for w in to.windows(2) {
        total_len += (w[1][0] - w[0][0]).hypot(w[1][1] - w[0][1]);
    }
    let cell = (4.0 * total_len / (to.len() - 1) as f64).max(1e-12);
    let key = |x: f64, y: f64| ((x / cell).floor() as i64, (y / cell).floor() as i64);
    let mut grid: HashMap<(i64, i64), Vec<usize>> = HashMap::new();
    for i in 0..to.len() - 1 {
        let (a, b) = (to[i], to[i + 1]);
        let (x0, y0) = key(a[0].min(b[0]), a[1].min(b[1]));
        let (x1, y1) = key(a[0].max(b[0]), a[1].max(b[1]));
        for cx in x0..=x1 {
            for cy in y0..=y1 {
                grid.entry((cx, cy)).or_default().push(i);
            }
        }
    }
    let (gx0, gx1, gy0, gy1) = grid.keys().fold((i64::MAX, i64::MIN, i64::MAX, i64::MIN), |acc, &(x, y)| {
        (acc.0.min(x), acc.1.max(x), acc.2.min(y), acc.3.max(y))
    });
    let mut worst = 0.0f64;
    for &p in from {
        let (px, py) = key(p[0], p[1]);
        let reach = (px - gx0).abs().max((px - gx1).abs()).max((py - gy0).abs()).max((py - gy1).abs());
        let mut best = f64::INFINITY;
        for k in 0..=reach {
            let mut visit = |cx: i64, cy: i64| {
                if let Some(list) = grid.get(&(cx, cy)) {
                    for &i in list {
                        best = best.min(point_segment_distance(p, to[i], to[i + 1]));
                    }
                }
            };
            if k == 0 {
                visit(px, py);
            } else {
                for c in -k..=k {
                    visit(px + c, py - k);
                    visit(px + c, py + k);
                }
                for c in -k + 1..k {
                    visit(px - k, py + c);
                    visit(px + k, py + c);
                }
            }
            if best <= k as f64 * cell {
                break;
            }
        }
        worst = worst.max(best);
    }
    worst
}

/// Polar angle of the ray `theta = theta*` in the plane.
pub fn ray_angle(d: &TripleData) -> f64 {
    2.0 * d.theta_star / d.g() as f64
}

/// Upper edge `pi/g` of the wedge.
pub fn wedge_angle(d: &TripleData) -> f64 {
    PI / d.g() as f64
}

#[cfg(test)]
mod tests;
