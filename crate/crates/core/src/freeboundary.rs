//! Free boundary minimal profile curves: the cone, the family `Sigma^k` and the
//! annulus-type `Omega`.
//!
//! A profile curve is free boundary in the unit ball when it meets `r = 1` with
//! `sin(alpha) = 0`, that is, radially.

use std::f64::consts::{FRAC_PI_2, PI};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::integrate::{integrate, trace_separatrix, Direction, EventSpec, State, StepControl, Trajectory};
use crate::phase::FixedPointId;
use crate::profile::{
    geodesic_residual, log_radius_between, profile_from_orbit_with, ProfileCurve, ProfileOptions, ProfileSample,
};
use crate::triples::{Regime, Triple, TripleData};

/// Sampled radius range of the cone, `[CONE_R_MIN, 1]`.
pub const CONE_R_MIN: f64 = 1e-3;
/// Largest `|r - 1|` at which a curve end counts as touching the unit circle.
pub const TOUCH_TOL: f64 = 1e-9;
/// Boundary radii after rescaling the shooting curve agree with 1 to this accuracy.
pub const BOUNDARY_RADIUS_TOL: f64 = 1e-10;
const SHOOT_RADIUS: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Construction {
    Cone,
    SigmaK { k: u32 },
    Omega,
}

impl Construction {
    /// Number of points where the generating curve meets the unit circle.
    pub fn expected_hits(self) -> usize {
        match self {
            Construction::Cone | Construction::SigmaK { .. } => 1,
            Construction::Omega => 2,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundaryHit {
    pub t: f64,
    pub point: [f64; 2],
    pub r: f64,
    pub alpha: f64,
}

impl BoundaryHit {
    fn from_sample(s: &ProfileSample, point: [f64; 2]) -> Self {
        BoundaryHit { t: s.t, point, r: s.r, alpha: s.alpha }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FreeBoundaryCurve {
    pub curve: ProfileCurve,
    pub construction: Construction,
    pub boundary_hits: Vec<BoundaryHit>,
    /// Largest `|sin(alpha)|` over the boundary hits.
    pub orthogonality_residual: f64,
    /// Times of the `alpha = 0` crossings along the curve, boundary included.
    pub alpha_crossings: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConstructionOptions {
    pub ctrl: StepControl,
    pub profile: ProfileOptions,
    pub scan_points: usize,
    /// The scan covers `[margin, pi - margin]`.
    pub scan_margin: f64,
    pub max_bisection: usize,
    pub shoot_max_time: f64,
}

impl Default for ConstructionOptions {
    fn default() -> Self {
        ConstructionOptions {
            ctrl: StepControl::default().with_tolerance(1e-13),
            profile: ProfileOptions::default(),
            scan_points: 64,
            scan_margin: 0.01,
            max_bisection: 200,
            shoot_max_time: 2000.0,
        }
    }
}

fn hits_and_residual(curve: &ProfileCurve, idx: &[usize]) -> (Vec<BoundaryHit>, f64) {
    let hits: Vec<BoundaryHit> =
        idx.iter().map(|&i| BoundaryHit::from_sample(&curve.samples[i], curve.plane[i])).collect();
    let res = hits.iter().map(|h| h.alpha.sin().abs()).fold(0.0, f64::max);
    (hits, res)
}

/// The cone over the minimal leaf: the ray `theta = theta*` for `r` in `[1e-3, 1]`.
pub fn cone_profile(d: &TripleData) -> FreeBoundaryCurve {
    cone_profile_with(d, &ProfileOptions::default())
}

pub fn cone_profile_with(d: &TripleData, opts: &ProfileOptions) -> FreeBoundaryCurve {
    let c = d.radial_rate() * (2.0 * d.theta_star).sin();
    let orbit = Trajectory::stationary(d, FixedPointId::OMinus, CONE_R_MIN.ln() / c, 0.0);
    let opts = ProfileOptions { window: None, ..*opts };
    let curve = profile_from_orbit_with(d, &orbit, (0.0, 1.0), &opts).expect("anchor inside the ray");
    let last = curve.samples.len() - 1;
    let (boundary_hits, orthogonality_residual) = hits_and_residual(&curve, &[last]);
    FreeBoundaryCurve {
        construction: Construction::Cone,
        boundary_hits,
        orthogonality_residual,
        alpha_crossings: vec![curve.samples[last].t],
        curve,
    }
}

/// Rescaled separatrix `gamma_1` whose `k`-th crossing of `alpha = 0` lies on the unit circle.
pub fn sigma_k(d: &TripleData, k: u32) -> Result<FreeBoundaryCurve> {
    sigma_k_with(d, k, &ConstructionOptions::default())
}

pub fn sigma_k_with(d: &TripleData, k: u32, opts: &ConstructionOptions) -> Result<FreeBoundaryCurve> {
    if d.regime != Regime::Spiral {
        return Err(Error::WrongRegime { expected: "spiral" });
    }
    if k == 0 {
        return Err(Error::Domain { what: "k", value: 0.0, domain: "{1, 2, ...}" });
    }
    let gamma = trace_separatrix(d, FixedPointId::S1, &opts.ctrl)?;
    let crossings: Vec<f64> = gamma.events_of(1).map(|e| e.time).collect();
    let k = k as usize;
    if crossings.len() < k {
        return Err(Error::NotEnoughCrossings(crossings.len()));
    }
    let t_k = crossings[k - 1];
    let popts = ProfileOptions { window: Some((gamma.times[0], t_k)), ..opts.profile };
    let mut curve = profile_from_orbit_with(d, &gamma, (t_k, 1.0), &popts)?;
    curve.merge_equal_radii();
    let last = curve.samples.len() - 1;
    let (boundary_hits, orthogonality_residual) = hits_and_residual(&curve, &[last]);
    Ok(FreeBoundaryCurve {
        curve,
        construction: Construction::SigmaK { k: k as u32 },
        boundary_hits,
        orthogonality_residual,
        alpha_crossings: crossings[..k].to_vec(),
    })
}

/// Radii of the shooting orbit at its first `alpha = 0` crossing after, and its
/// first `alpha = -pi` crossing before, the launch point `(theta*, -epsilon)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Shot {
    pub epsilon: f64,
    pub r_minus: f64,
    pub r_plus: f64,
    pub t_minus: f64,
    pub t_plus: f64,
    /// First crossing of `alpha = -pi/2` on either side of the launch point.
    pub t_zero: Option<f64>,
    pub orbit: Trajectory,
}

impl Shot {
    pub fn gap(&self) -> f64 {
        self.r_minus - self.r_plus
    }
}

fn shoot_orbit(d: &TripleData, epsilon: f64, opts: &ConstructionOptions) -> Result<Shot> {
    if !(epsilon > 0.0 && epsilon < PI) {
        return Err(Error::Domain { what: "epsilon", value: epsilon, domain: "(0, pi)" });
    }
    if d.regime != Regime::Nodal {
        return Err(Error::WrongRegime { expected: "nodal" });
    }
    let ctrl = opts.ctrl.with_max_time(opts.shoot_max_time);
    let start = State::new(d.theta_star, -epsilon);
    let events = [EventSpec::alpha(0.0), EventSpec::alpha(-FRAC_PI_2), EventSpec::alpha(-PI)];
    let fwd = integrate(d, start, Direction::Forward, &events, &ctrl)?;
    let back = integrate(d, start, Direction::Backward, &events, &ctrl)?;
    let t_plus = fwd
        .events_of(0)
        .next()
        .map(|e| e.time)
        .ok_or(Error::EventNotReached { level: 0.0, max_time: ctrl.max_time })?;
    let t_minus = back
        .events_of(2)
        .next()
        .map(|e| e.time)
        .ok_or(Error::EventNotReached { level: -PI, max_time: ctrl.max_time })?;
    let t_zero = fwd.events_of(1).chain(back.events_of(1)).map(|e| e.time).min_by(|a, b| a.abs().total_cmp(&b.abs()));
    let orbit = Trajectory::glue(&back, &fwd);
    let r_plus = SHOOT_RADIUS * log_radius_between(d, &orbit, 0.0, t_plus).exp();
    let r_minus = SHOOT_RADIUS * log_radius_between(d, &orbit, 0.0, t_minus).exp();
    Ok(Shot { epsilon, r_minus, r_plus, t_minus, t_plus, t_zero, orbit })
}

/// Launches from `(theta*, -epsilon)` with `r = 1/2` and returns `(r(t-), r(t+), curve)`,
/// the curve covering `[t-, t+]`.
pub fn shoot_epsilon(d: &TripleData, epsilon: f64) -> Result<(f64, f64, ProfileCurve)> {
    shoot_epsilon_with(d, epsilon, &ConstructionOptions::default())
}

pub fn shoot_epsilon_with(
    d: &TripleData,
    epsilon: f64,
    opts: &ConstructionOptions,
) -> Result<(f64, f64, ProfileCurve)> {
    let shot = shoot_orbit(d, epsilon, opts)?;
    let curve = shot_curve(d, &shot, opts)?;
    Ok((shot.r_minus, shot.r_plus, curve))
}

fn shot_curve(d: &TripleData, shot: &Shot, opts: &ConstructionOptions) -> Result<ProfileCurve> {
    let popts = ProfileOptions { window: Some((shot.t_minus, shot.t_plus)), ..opts.profile };
    profile_from_orbit_with(d, &shot.orbit, (0.0, SHOOT_RADIUS), &popts)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShootingReport {
    pub epsilon_star: f64,
    pub iterations: usize,
    /// `|r(t-) - r(t+)|` of the rescaled curve.
    pub final_gap: f64,
    /// Final bisection interval; the gap has opposite signs at its ends.
    pub bracket: (f64, f64),
    pub bracket_gaps: (f64, f64),
    /// The scan grid with `r(t-) - r(t+)` at each point (absent where a shot failed).
    pub scan: Vec<(f64, Option<f64>)>,
}

/// Builds `Omega` by bisection on the launch angle.
pub fn omega_surface(d: &TripleData, gap_tol: f64) -> Result<(FreeBoundaryCurve, ShootingReport)> {
    omega_surface_with(d, gap_tol, &ConstructionOptions::default())
}

pub fn omega_surface_with(
    d: &TripleData,
    gap_tol: f64,
    opts: &ConstructionOptions,
) -> Result<(FreeBoundaryCurve, ShootingReport)> {
    if d.regime != Regime::Nodal {
        return Err(Error::WrongRegime { expected: "nodal" });
    }
    if d.exceptional {
        let Triple { g, m1, m2 } = d.triple;
        return Err(Error::ExceptionalTriple(g as i64, m1 as i64, m2 as i64));
    }
    if gap_tol.is_nan() || gap_tol <= 0.0 {
        return Err(Error::Domain { what: "gap_tol", value: gap_tol, domain: "(0, inf)" });
    }
    let npts = opts.scan_points.max(2);
    let lo = opts.scan_margin;
    let hi = PI - opts.scan_margin;
    let grid: Vec<f64> = (0..npts).map(|i| lo + (hi - lo) * i as f64 / (npts - 1) as f64).collect();
    let scan: Vec<(f64, Option<f64>)> =
        grid.par_iter().map(|&e| (e, shoot_orbit(d, e, opts).ok().map(|s| s.gap()))).collect();

    let (mut a, mut fa, mut b, mut fb) = scan
        .windows(2)
        .find_map(|w| match (w[0].1, w[1].1) {
            (Some(f0), Some(f1)) if f0 == 0.0 || (f0 < 0.0) != (f1 < 0.0) => Some((w[0].0, f0, w[1].0, f1)),
            _ => None,
        })
        .ok_or(Error::BracketNotFound)?;

    let accept = |s: &Shot| {
        let scale = (s.r_minus * s.r_plus).sqrt();
        let rescaled = s.gap().abs() / scale;
        (s.gap().abs() <= gap_tol && rescaled <= BOUNDARY_RADIUS_TOL, rescaled)
    };

    let mut iterations = 0;
    let shot = if fa == 0.0 {
        shoot_orbit(d, a, opts)?
    } else {
        loop {
            if iterations >= opts.max_bisection {
                return Err(Error::BisectionExhausted(iterations));
            }
            iterations += 1;
            let mid = 0.5 * (a + b);
            let s = shoot_orbit(d, mid, opts)?;
            let fm = s.gap();
            if accept(&s).0 {
                break s;
            }
            if (fm < 0.0) == (fa < 0.0) {
                a = mid;
                fa = fm;
            } else {
                b = mid;
                fb = fm;
            }
        }
    };
    let (_, final_gap) = accept(&shot);

    let scale = 1.0 / (shot.r_minus * shot.r_plus).sqrt();
    let curve = shot_curve(d, &shot, opts)?.scaled(scale);
    let last = curve.samples.len() - 1;
    let (boundary_hits, orthogonality_residual) = hits_and_residual(&curve, &[0, last]);
    let alpha_crossings = vec![curve.samples[last].t];
    let fbc = FreeBoundaryCurve {
        curve,
        construction: Construction::Omega,
        boundary_hits,
        orthogonality_residual,
        alpha_crossings,
    };
    let report = ShootingReport {
        epsilon_star: shot.epsilon,
        iterations,
        final_gap,
        bracket: (a.min(b), a.max(b)),
        bracket_gaps: (fa, fb),
        scan,
    };
    Ok((fbc, report))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FreeBoundaryReport {
    pub crossings: usize,
    pub max_sin_alpha: f64,
    pub tol: f64,
    pub pass: bool,
}

/// Re-finds every point of the stored curve on the unit circle and checks that the
/// curve is radial there.
pub fn verify_free_boundary(fbc: &FreeBoundaryCurve, tol: f64) -> FreeBoundaryReport {
    let curve = &fbc.curve;
    let s = &curve.samples;
    let mut sines: Vec<f64> = Vec::new();
    let level = |x: &ProfileSample| {
        let v = x.r - 1.0;
        if v.abs() <= TOUCH_TOL {
            0.0
        } else {
            v
        }
    };
    if let (Some(first), Some(last)) = (s.first(), s.last()) {
        if level(first) == 0.0 {
            sines.push(first.alpha.sin().abs());
        }
        if s.len() > 1 && level(last) == 0.0 {
            sines.push(last.alpha.sin().abs());
        }
    }
    let mut prev: Option<usize> = None;
    for k in 0..s.len() {
        let vk = level(&s[k]);
        if vk == 0.0 {
            continue;
        }
        if let Some(j) = prev {
            let vj = level(&s[j]);
            if (vj > 0.0) != (vk > 0.0) {
                let alpha = if k == j + 1 {
                    let f = |t: f64| curve.interpolate(j, t).r - 1.0;
                    let t = crate::integrate::locate_root(&f, s[j].t, s[j].r - 1.0, s[k].t, s[k].r - 1.0);
                    curve.interpolate(j, t).alpha
                } else {
                    s[j + 1].alpha
                };
                sines.push(alpha.sin().abs());
            }
        }
        prev = Some(k);
    }
    let max_sin_alpha = sines.iter().copied().fold(0.0, f64::max);
    let crossings = sines.len();
    FreeBoundaryReport {
        crossings,
        max_sin_alpha,
        tol,
        pass: crossings == fbc.construction.expected_hits() && max_sin_alpha <= tol,
    }
}

/// Machine-readable summary of a construction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub triple: Triple,
    pub construction: Construction,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub epsilon_star: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub final_gap: Option<f64>,
    pub crossings: usize,
    pub boundary_hits: Vec<BoundaryHit>,
    pub orthogonality_residual: f64,
    pub geodesic_residual: Option<f64>,
    pub samples: usize,
}

impl FreeBoundaryCurve {
    pub fn summary(&self, report: Option<&ShootingReport>) -> Summary {
        Summary {
            triple: self.curve.triple.triple,
            construction: self.construction,
            epsilon_star: report.map(|r| r.epsilon_star),
            final_gap: report.map(|r| r.final_gap),
            crossings: self.alpha_crossings.len(),
            boundary_hits: self.boundary_hits.clone(),
            orthogonality_residual: self.orthogonality_residual,
            geodesic_residual: geodesic_residual(&self.curve.triple, &self.curve).ok(),
            samples: self.curve.samples.len(),
        }
    }
}

/// Reflection of a plane point across the bisector of the wedge `D_g`.
pub fn reflect_in_wedge(g: u32, p: [f64; 2]) -> [f64; 2] {
    let two_beta = PI / g as f64;
    let (s, c) = two_beta.sin_cos();
    [p[0] * c + p[1] * s, p[0] * s - p[1] * c]
}
