//! CSV and SVG writers. All output is a pure function of its inputs, with fixed
//! element order and fixed-precision numbers, so repeated runs are byte-identical.

use std::f64::consts::{FRAC_PI_2, PI};
use std::fmt::Write;

use rayon::prelude::*;

use crate::error::Result;
use crate::integrate::{full_orbit, trace_separatrix, StepControl, Trajectory};
use crate::phase::{fixed_points, nullcline_alpha, FixedPointId, FixedPointKind, PhasePoint};
use crate::profile::{wedge_angle, ProfileCurve};
use crate::triples::TripleData;

pub const PORTRAIT_WIDTH: f64 = 800.0;
pub const PORTRAIT_HEIGHT: f64 = 600.0;
/// Vertical extent of the portrait strip, `[-3 pi/2, pi/2]`.
pub const ALPHA_RANGE: (f64, f64) = (-1.5 * PI, FRAC_PI_2);

/// `t,theta,alpha,r` with 17 significant digits; `r` is blank for phase-only runs.
pub fn trajectory_csv(traj: &Trajectory) -> String {
    let mut out = String::from("t,theta,alpha,r\n");
    for (t, s) in traj.times.iter().zip(&traj.states) {
        let r = s.r.map(|r| format!("{r:.16e}")).unwrap_or_default();
        let _ = writeln!(out, "{t:.16e},{:.16e},{:.16e},{r}", s.theta, s.alpha);
    }
    out
}

/// `t,r,theta,alpha,x,y` with 17 significant digits.
pub fn profile_csv(curve: &ProfileCurve) -> String {
    let mut out = String::from("t,r,theta,alpha,x,y\n");
    for (s, p) in curve.samples.iter().zip(&curve.plane) {
        let _ =
            writeln!(out, "{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}", s.t, s.r, s.theta, s.alpha, p[0], p[1]);
    }
    out
}

fn path_data(points: impl IntoIterator<Item = (f64, f64)>) -> String {
    let mut d = String::new();
    for (i, (x, y)) in points.into_iter().enumerate() {
        let _ = write!(d, "{}{x:.6},{y:.6}", if i == 0 { "M" } else { " L" });
    }
    d
}

/// Profile curve in the wedge `0 <= phi <= pi/g`, with the wedge edges, the unit arc
/// and the minimal ray.
pub fn profile_svg(curve: &ProfileCurve) -> String {
    let d = &curve.triple;
    let wedge = wedge_angle(d);
    let ray = 2.0 * d.theta_star / f64::from(d.g());
    let extent = curve.plane.iter().map(|p| p[0].hypot(p[1])).fold(1.0f64, f64::max) * 1.05;

    // plane coordinates, y up, mapped into a square canvas
    let size = 600.0;
    let margin = 20.0;
    let scale = (size - 2.0 * margin) / (2.0 * extent);
    let map = |x: f64, y: f64| (size / 2.0 + x * scale, size / 2.0 - y * scale);

    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{size:.0}" height="{size:.0}" viewBox="0 0 {size:.0} {size:.0}">"#
    );
    let _ = writeln!(out, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let edge = |phi: f64| {
        let (x0, y0) = map(0.0, 0.0);
        let (x1, y1) = map(extent * phi.cos(), extent * phi.sin());
        format!(r#"M{x0:.6},{y0:.6} L{x1:.6},{y1:.6}"#)
    };
    let _ = writeln!(
        out,
        r#"<path id="wedge" d="{} {}" stroke="black" stroke-width="1" fill="none"/>"#,
        edge(0.0),
        edge(wedge)
    );
    let arc = path_data((0..=128).map(|i| {
        let phi = wedge * f64::from(i) / 128.0;
        map(phi.cos(), phi.sin())
    }));
    let _ = writeln!(out, r#"<path id="unit-arc" d="{arc}" stroke="gray" stroke-width="1" fill="none"/>"#);
    let _ = writeln!(
        out,
        r#"<path id="ray" d="{}" stroke="gray" stroke-width="1" stroke-dasharray="6,4" fill="none"/>"#,
        edge(ray)
    );
    let body = path_data(curve.plane.iter().map(|p| map(p[0], p[1])));
    let _ = writeln!(out, r#"<path id="profile" d="{body}" stroke="crimson" stroke-width="1.5" fill="none"/>"#);
    out.push_str("</svg>\n");
    out
}

/// Points `k = start + 1, ..., start + count` of the Halton sequence in bases 2 and 3.
pub fn halton(start: usize, count: usize) -> Vec<(f64, f64)> {
    let radical = |mut i: usize, base: usize| {
        let mut f = 1.0;
        let mut r = 0.0;
        while i > 0 {
            f /= base as f64;
            r += f * (i % base) as f64;
            i /= base;
        }
        r
    };
    (start + 1..=start + count).map(|i| (radical(i, 2), radical(i, 3))).collect()
}

struct Strip;

impl Strip {
    fn map(theta: f64, alpha: f64) -> (f64, f64) {
        let margin = 30.0;
        let x = margin + theta / FRAC_PI_2 * (PORTRAIT_WIDTH - 2.0 * margin);
        let (lo, hi) = ALPHA_RANGE;
        let y = margin + (hi - alpha) / (hi - lo) * (PORTRAIT_HEIGHT - 2.0 * margin);
        (x, y)
    }

    fn inside(p: &PhasePoint) -> bool {
        p.alpha >= ALPHA_RANGE.0 && p.alpha <= ALPHA_RANGE.1
    }

    /// Path data for an orbit, broken wherever it leaves the strip.
    fn orbit_path(traj: &Trajectory) -> String {
        let mut runs: Vec<Vec<(f64, f64)>> = vec![Vec::new()];
        for seg in traj.segments() {
            let (a, b) = seg.bounds();
            for i in 0..4 {
                let s = seg.eval(a + (b - a) * f64::from(i) / 4.0, false);
                Self::push(&mut runs, s.phase());
            }
        }
        if let Some(last) = traj.states.last() {
            Self::push(&mut runs, last.phase());
        }
        runs.into_iter().filter(|r| r.len() > 1).map(path_data).collect::<Vec<_>>().join(" ")
    }

    fn push(runs: &mut Vec<Vec<(f64, f64)>>, p: PhasePoint) {
        if Self::inside(&p) {
            runs.last_mut().unwrap().push(Self::map(p.theta, p.alpha));
        } else if !runs.last().unwrap().is_empty() {
            runs.push(Vec::new());
        }
    }
}

/// Phase portrait on `[0, pi/2] x [-3 pi/2, pi/2]`: dashed nullclines, the six fixed
/// points, the four separatrices and `orbits` sample orbits seeded on a Halton grid
/// over `(0, pi/2) x (-pi, 0)`. `seed` offsets the position in the Halton sequence.
pub fn portrait_svg(d: &TripleData, orbits: usize, seed: usize, ctrl: &StepControl) -> Result<String> {
    let (w, h) = (PORTRAIT_WIDTH, PORTRAIT_HEIGHT);
    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w:.0}" height="{h:.0}" viewBox="0 0 {w:.0} {h:.0}">"#
    );
    let _ = writeln!(out, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let (x0, y0) = Strip::map(0.0, ALPHA_RANGE.1);
    let (x1, y1) = Strip::map(FRAC_PI_2, ALPHA_RANGE.0);
    let _ = writeln!(
        out,
        r#"<rect id="strip" x="{x0:.6}" y="{y0:.6}" width="{:.6}" height="{:.6}" stroke="black" fill="none"/>"#,
        x1 - x0,
        y1 - y0
    );

    // theta-nullclines alpha = 0, -pi; alpha-nullclines alpha = atan(h/m) + k pi
    for (id, alpha) in [("theta-null-0", 0.0), ("theta-null-1", -PI)] {
        let (a, b) = (Strip::map(0.0, alpha), Strip::map(FRAC_PI_2, alpha));
        let _ = writeln!(
            out,
            r#"<path id="{id}" d="{}" stroke="steelblue" stroke-dasharray="5,4" fill="none"/>"#,
            path_data([a, b])
        );
    }
    for (k, shift) in [(0, 0.0), (1, -PI)] {
        let pts = (1..400).filter_map(|i| {
            let theta = FRAC_PI_2 * f64::from(i) / 400.0;
            nullcline_alpha(d, theta).ok().map(|a| Strip::map(theta, a + shift))
        });
        let _ = writeln!(
            out,
            r#"<path id="alpha-null-{k}" d="{}" stroke="darkorange" stroke-dasharray="5,4" fill="none"/>"#,
            path_data(pts)
        );
    }

    let seps: Vec<(FixedPointId, Result<Trajectory>)> =
        FixedPointId::SADDLES.par_iter().map(|&s| (s, trace_separatrix(d, s, ctrl))).collect();
    for (i, (_, traj)) in seps.into_iter().enumerate() {
        let traj = traj?;
        let _ = writeln!(
            out,
            r#"<path id="gamma{}" d="{}" stroke="black" stroke-width="1.5" fill="none"/>"#,
            i + 1,
            Strip::orbit_path(&traj)
        );
    }

    let seeds: Vec<PhasePoint> = halton(seed, orbits)
        .into_iter()
        .map(|(u, v)| PhasePoint::new(FRAC_PI_2 * u, -PI * v))
        .filter(|p| p.theta > 0.0 && p.alpha < 0.0 && p.alpha > -PI)
        .collect();
    let paths: Vec<Result<String>> =
        seeds.par_iter().map(|p| full_orbit(d, *p, &[], ctrl).map(|t| Strip::orbit_path(&t))).collect();
    for (i, p) in paths.into_iter().enumerate() {
        let _ = writeln!(out, r#"<path id="orbit{i}" d="{}" stroke="gray" stroke-width="0.8" fill="none"/>"#, p?);
    }

    for fp in fixed_points(d) {
        let fill = match fp.kind {
            FixedPointKind::Saddle => "black",
            FixedPointKind::Sink => "seagreen",
            FixedPointKind::Source => "firebrick",
        };
        let (x, y) = Strip::map(fp.location.theta, fp.location.alpha);
        let _ = writeln!(
            out,
            r#"<circle id="fp-{}" class="fixed-point" cx="{x:.6}" cy="{y:.6}" r="4" fill="{fill}"/>"#,
            fp.id
        );
    }
    out.push_str("</svg>\n");
    Ok(out)
}
