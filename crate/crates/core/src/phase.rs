//! The planar vector field on the strip `[0, pi/2] x R`, its nullclines, fixed points and
//! symmetries.
//!
//! The field is
//!
//! ```text
//! theta' = sin(alpha) sin(2 theta)
//! alpha' = -m sin(alpha) sin(2 theta) + 2 cos(alpha) (m1 cos^2 theta - m2 sin^2 theta)
//! ```
//!
//! where `alpha` is the angle between the profile curve and the radial direction.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI, TAU};
use std::fmt;

use nalgebra::Matrix2;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::triples::TripleData;

/// A point `(theta, alpha)` of the phase strip.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhasePoint {
    pub theta: f64,
    pub alpha: f64,
}

impl PhasePoint {
    pub const fn new(theta: f64, alpha: f64) -> Self {
        PhasePoint { theta, alpha }
    }

    /// Euclidean distance in the phase plane after shifting `alpha` by the multiple of
    /// `2 pi` that brings it closest to `other`.
    pub fn periodic_distance(&self, other: &PhasePoint) -> f64 {
        let da = wrap_angle(self.alpha - other.alpha);
        (self.theta - other.theta).hypot(da)
    }
}

/// Reduces an angle to `(-pi, pi]`.
pub fn wrap_angle(a: f64) -> f64 {
    let r = a.rem_euclid(TAU);
    if r > PI {
        r - TAU
    } else {
        r
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum FixedPointId {
    S1,
    S2,
    S3,
    S4,
    OMinus,
    OPlus,
}

impl FixedPointId {
    pub const ALL: [FixedPointId; 6] = [
        FixedPointId::S1,
        FixedPointId::S2,
        FixedPointId::S3,
        FixedPointId::S4,
        FixedPointId::OMinus,
        FixedPointId::OPlus,
    ];

    pub const SADDLES: [FixedPointId; 4] = [FixedPointId::S1, FixedPointId::S2, FixedPointId::S3, FixedPointId::S4];

    pub fn is_saddle(self) -> bool {
        !matches!(self, FixedPointId::OMinus | FixedPointId::OPlus)
    }

    /// Representative location in the strip `[0, pi/2] x [-3pi/2, pi/2]`.
    pub fn location(self, d: &TripleData) -> PhasePoint {
        match self {
            FixedPointId::S1 => PhasePoint::new(0.0, FRAC_PI_2),
            FixedPointId::S2 => PhasePoint::new(0.0, -FRAC_PI_2),
            FixedPointId::S3 => PhasePoint::new(FRAC_PI_2, -FRAC_PI_2),
            FixedPointId::S4 => PhasePoint::new(FRAC_PI_2, -3.0 * FRAC_PI_2),
            FixedPointId::OMinus => PhasePoint::new(d.theta_star, 0.0),
            FixedPointId::OPlus => PhasePoint::new(d.theta_star, -PI),
        }
    }
}

impl fmt::Display for FixedPointId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            FixedPointId::S1 => "S1",
            FixedPointId::S2 => "S2",
            FixedPointId::S3 => "S3",
            FixedPointId::S4 => "S4",
            FixedPointId::OMinus => "O-",
            FixedPointId::OPlus => "O+",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum FixedPointKind {
    Saddle,
    Sink,
    Source,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum FixedPointSubtype {
    Focal,
    NodalProper,
    NodalDegenerate,
    NotApplicable,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Eigenvalue {
    pub re: f64,
    pub im: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FixedPointInfo {
    pub id: FixedPointId,
    pub location: PhasePoint,
    pub kind: FixedPointKind,
    pub subtype: FixedPointSubtype,
    /// Ordered by decreasing real part, then decreasing imaginary part.
    pub eigenvalues: [Eigenvalue; 2],
    /// Finite slopes `d alpha / d theta` of the real eigen-directions, decreasing.
    pub slopes: Vec<f64>,
}

/// `sin(2 theta)`, evaluated so that it vanishes exactly at both `theta = 0` and
/// `theta = pi/2`.
#[inline]
pub fn sin_2theta(theta: f64) -> f64 {
    if theta > FRAC_PI_4 {
        (PI - 2.0 * theta).sin()
    } else {
        (2.0 * theta).sin()
    }
}

/// Evaluates the field at `p`, returning `(d theta/dt, d alpha/dt)`.
#[inline]
pub fn vector_field(d: &TripleData, p: PhasePoint) -> (f64, f64) {
    let (sa, ca) = p.alpha.sin_cos();
    let s2 = sin_2theta(p.theta);
    let dtheta = sa * s2;
    let dalpha = -d.m * sa * s2 + 2.0 * ca * d.balance(p.theta);
    (dtheta, dalpha)
}

/// Analytic Jacobian `[[dθ'/dθ, dθ'/dα], [dα'/dθ, dα'/dα]]`.
pub fn jacobian(d: &TripleData, p: PhasePoint) -> Matrix2<f64> {
    let (sa, ca) = p.alpha.sin_cos();
    let (s2, c2) = (2.0 * p.theta).sin_cos();
    // d/dθ (m1 cos²θ - m2 sin²θ) = -(m1 + m2) sin 2θ
    let dbalance = -(d.m1() + d.m2()) * s2;
    Matrix2::new(
        2.0 * sa * c2,
        ca * s2,
        -2.0 * d.m * sa * c2 + 2.0 * ca * dbalance,
        -d.m * ca * s2 - 2.0 * sa * d.balance(p.theta),
    )
}

/// The branch of the `alpha`-nullcline through `S1` and `O-`: `alpha = atan(h(theta)/m)`.
pub fn nullcline_alpha(d: &TripleData, theta: f64) -> Result<f64> {
    if !(theta > 0.0 && theta < FRAC_PI_2) {
        return Err(Error::Domain { what: "theta", value: theta, domain: "(0, pi/2)" });
    }
    Ok((d.h(theta) / d.m).atan())
}

/// Numerically diagonalized eigen-data of the Jacobian at a fixed point.
fn eigen_data(j: &Matrix2<f64>) -> ([Eigenvalue; 2], Vec<f64>) {
    let ev = j.complex_eigenvalues();
    let mut vals = [Eigenvalue { re: ev[0].re, im: ev[0].im }, Eigenvalue { re: ev[1].re, im: ev[1].im }];
    vals.sort_by(|a, b| b.re.total_cmp(&a.re).then(b.im.total_cmp(&a.im)));

    let mut slopes = Vec::new();
    if vals[0].im == 0.0 {
        for lam in vals.iter().map(|e| e.re) {
            // null vector of J - lam I from whichever row is better conditioned
            let (a, b, c, dd) = (j[(0, 0)] - lam, j[(0, 1)], j[(1, 0)], j[(1, 1)] - lam);
            let (vt, va) = if a.abs() + b.abs() >= c.abs() + dd.abs() { (b, -a) } else { (dd, -c) };
            if vt.abs() > 1e-12 * va.abs().max(1.0) {
                let s = va / vt;
                if !slopes.iter().any(|x: &f64| (x - s).abs() <= 1e-9 * s.abs().max(1.0)) {
                    slopes.push(s);
                }
            }
        }
        slopes.sort_by(|a, b| b.total_cmp(a));
    }
    (vals, slopes)
}

/// Classifies one of the six canonical fixed points.
pub fn classify_fixed_point(d: &TripleData, id: FixedPointId) -> FixedPointInfo {
    let location = id.location(d);
    let j = jacobian(d, location);
    let (eigenvalues, mut slopes) = eigen_data(&j);
    let (kind, subtype) = match id {
        FixedPointId::OMinus | FixedPointId::OPlus => {
            let kind = if id == FixedPointId::OMinus { FixedPointKind::Sink } else { FixedPointKind::Source };
            let subtype = if d.is_degenerate() {
                FixedPointSubtype::NodalDegenerate
            } else if d.delta < 0.0 {
                FixedPointSubtype::Focal
            } else {
                FixedPointSubtype::NodalProper
            };
            match subtype {
                FixedPointSubtype::Focal => slopes.clear(),
                FixedPointSubtype::NodalDegenerate => slopes = vec![-0.5 * d.m],
                _ => {
                    let root = d.delta.sqrt();
                    slopes = vec![0.5 * (-d.m + root), 0.5 * (-d.m - root)];
                }
            }
            (kind, subtype)
        }
        _ => (FixedPointKind::Saddle, FixedPointSubtype::NotApplicable),
    };
    FixedPointInfo { id, location, kind, subtype, eigenvalues, slopes }
}

/// All six canonical fixed points, in [`FixedPointId::ALL`] order.
pub fn fixed_points(d: &TripleData) -> Vec<FixedPointInfo> {
    FixedPointId::ALL.iter().map(|&id| classify_fixed_point(d, id)).collect()
}

/// The canonical fixed point nearest to `p` (modulo `2 pi` in `alpha`) and its distance.
pub fn nearest_fixed_point(d: &TripleData, p: PhasePoint) -> (FixedPointId, f64) {
    FixedPointId::ALL
        .iter()
        .map(|&id| (id, p.periodic_distance(&id.location(d))))
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .expect("six fixed points")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Symmetry {
    /// `(theta, alpha) -> (pi/2 - theta, -alpha)`, conjugating `(g, m1, m2)` with `(g, m2, m1)`.
    Mirror,
    /// `(theta, alpha) -> (theta, alpha + pi)`, which reverses time.
    ShiftPi,
    /// `(theta, alpha) -> (theta, alpha + 2 pi)`.
    Shift2Pi,
}

pub fn symmetry_image(p: PhasePoint, which: Symmetry) -> PhasePoint {
    match which {
        Symmetry::Mirror => PhasePoint::new(FRAC_PI_2 - p.theta, -p.alpha),
        Symmetry::ShiftPi => PhasePoint::new(p.theta, p.alpha + PI),
        Symmetry::Shift2Pi => PhasePoint::new(p.theta, p.alpha + TAU),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::triples::{derive, enumerate_triples, validate_triple, Triple};
    use approx::assert_abs_diff_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn data(g: i64, m1: i64, m2: i64) -> TripleData {
        derive(validate_triple(g, m1, m2).unwrap())
    }

    fn fd_jacobian(d: &TripleData, p: PhasePoint, h: f64) -> Matrix2<f64> {
        let f = |q: PhasePoint| vector_field(d, q);
        let (tp, ap) = f(PhasePoint::new(p.theta + h, p.alpha));
        let (tm, am) = f(PhasePoint::new(p.theta - h, p.alpha));
        let (tp2, ap2) = f(PhasePoint::new(p.theta, p.alpha + h));
        let (tm2, am2) = f(PhasePoint::new(p.theta, p.alpha - h));
        Matrix2::new((tp - tm) / (2.0 * h), (tp2 - tm2) / (2.0 * h), (ap - am) / (2.0 * h), (ap2 - am2) / (2.0 * h))
    }

    #[test]
    fn field_examples() {
        let d = data(2, 1, 1);
        let (a, b) = vector_field(&d, PhasePoint::new(d.theta_star, 0.0));
        assert_abs_diff_eq!(a, 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(b, 0.0, epsilon = 1e-15);

        // m = 3, sin α = 1, sin 2θ = 1, cos α = 0
        let (a, b) = vector_field(&d, PhasePoint::new(FRAC_PI_4, FRAC_PI_2));
        assert_abs_diff_eq!(a, 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(b, -3.0, epsilon = 1e-15);

        let d = data(4, 2, 3);
        for alpha in [-2.0, 0.3, 1.0] {
            let (a, b) = vector_field(&d, PhasePoint::new(0.0, alpha));
            assert_eq!(a, 0.0);
            assert_abs_diff_eq!(b, 2.0 * 2.0 * alpha.cos(), epsilon = 1e-15);
        }
    }

    #[test]
    fn nullcline_examples() {
        let d = data(2, 1, 1);
        assert_abs_diff_eq!(nullcline_alpha(&d, FRAC_PI_4).unwrap(), 0.0, epsilon = 1e-15);
        assert!(nullcline_alpha(&d, 0.0).is_err());

        // approaches pi/2 with slope -m/m1 = -3
        let e = 1e-6;
        let a1 = nullcline_alpha(&d, e).unwrap();
        let a2 = nullcline_alpha(&d, 2.0 * e).unwrap();
        assert!((a1 - FRAC_PI_2).abs() < 1e-5);
        assert_abs_diff_eq!((a2 - a1) / e, -3.0, epsilon = 1e-4);

        let d = data(3, 2, 2);
        let a = nullcline_alpha(&d, 0.5).unwrap();
        assert!(vector_field(&d, PhasePoint::new(0.5, a)).1.abs() < 1e-12);
    }

    #[test]
    fn nullcline_is_alpha_nullcline() {
        for (t, _) in enumerate_triples(16) {
            let d = derive(t);
            for i in 1..=50 {
                let th = FRAC_PI_2 * i as f64 / 51.0;
                let a = nullcline_alpha(&d, th).unwrap();
                assert!(vector_field(&d, PhasePoint::new(th, a)).1.abs() < 1e-10, "{t} {th}");
            }
        }
    }

    #[test]
    fn fixed_points_vanish_and_classify() {
        for (t, _) in enumerate_triples(20) {
            let d = derive(t);
            let fps = fixed_points(&d);
            assert_eq!(fps.len(), 6);
            for fp in &fps {
                let (a, b) = vector_field(&d, fp.location);
                assert!(a.hypot(b) < 1e-12, "{t} {}", fp.id);
                let real = fp.eigenvalues.iter().all(|e| e.im == 0.0);
                if fp.kind == FixedPointKind::Saddle {
                    assert!(real && fp.eigenvalues[0].re > 0.0 && fp.eigenvalues[1].re < 0.0);
                }
                if fp.subtype == FixedPointSubtype::Focal {
                    assert!(!real);
                }
            }
        }
    }

    #[test]
    fn classification_examples() {
        let d = data(2, 1, 1);
        let om = classify_fixed_point(&d, FixedPointId::OMinus);
        assert_eq!(om.location, PhasePoint::new(FRAC_PI_4, 0.0));
        assert_eq!(om.kind, FixedPointKind::Sink);
        assert_eq!(om.subtype, FixedPointSubtype::Focal);
        assert_eq!(classify_fixed_point(&d, FixedPointId::OPlus).kind, FixedPointKind::Source);

        let s1 = classify_fixed_point(&d, FixedPointId::S1);
        assert_eq!(s1.kind, FixedPointKind::Saddle);
        assert_eq!(s1.slopes.len(), 1);
        assert_abs_diff_eq!(s1.slopes[0], -1.5, epsilon = 1e-12);

        let d = data(2, 1, 5);
        assert_eq!(classify_fixed_point(&d, FixedPointId::OMinus).subtype, FixedPointSubtype::NodalProper);

        let d = data(2, 3, 3);
        let om = classify_fixed_point(&d, FixedPointId::OMinus);
        assert_eq!(om.slopes, vec![-3.0, -4.0]);
        assert_abs_diff_eq!(om.eigenvalues[0].re, -3.0, epsilon = 1e-12);
        assert_abs_diff_eq!(om.eigenvalues[1].re, -4.0, epsilon = 1e-12);

        let d = data(1, 1, 1);
        assert_eq!(classify_fixed_point(&d, FixedPointId::OMinus).subtype, FixedPointSubtype::NodalDegenerate);
    }

    #[test]
    fn jacobian_hand_value_at_s1() {
        let d = data(2, 1, 1);
        let j = jacobian(&d, FixedPointId::S1.location(&d));
        let expected = Matrix2::new(2.0, 0.0, -6.0, -2.0);
        assert!((j - expected).abs().max() < 1e-14);
        assert!((fd_jacobian(&d, FixedPointId::S1.location(&d), 1e-6) - expected).abs().max() < 1e-6);
    }

    #[test]
    fn jacobian_matches_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for (t, _) in enumerate_triples(14) {
            let d = derive(t);
            for _ in 0..20 {
                let p = PhasePoint::new(rng.gen_range(0.0..FRAC_PI_2), rng.gen_range(-5.0..5.0));
                let diff = (jacobian(&d, p) - fd_jacobian(&d, p, 1e-6)).abs().max();
                assert!(diff < 1e-6, "{t}: {diff}");
            }
        }
    }

    #[test]
    fn interior_eigenvalues_closed_form() {
        for (t, _) in enumerate_triples(20) {
            let d = derive(t);
            let s = (2.0 * d.theta_star).sin();
            let info = classify_fixed_point(&d, FixedPointId::OMinus);
            let (re, im) = if d.delta >= 0.0 {
                (vec![0.5 * s * (-d.m + d.delta.sqrt()), 0.5 * s * (-d.m - d.delta.sqrt())], vec![0.0, 0.0])
            } else {
                let w = 0.5 * s * (-d.delta).sqrt();
                (vec![-0.5 * s * d.m; 2], vec![w, -w])
            };
            for k in 0..2 {
                assert!((info.eigenvalues[k].re - re[k]).abs() < 1e-9, "{t}");
                assert!((info.eigenvalues[k].im - im[k]).abs() < 1e-9, "{t}");
            }
        }
    }

    #[test]
    fn symmetry_examples() {
        let p = symmetry_image(PhasePoint::new(FRAC_PI_4, 0.0), Symmetry::Mirror);
        assert_eq!(p, PhasePoint::new(FRAC_PI_4, 0.0));
        let p = symmetry_image(PhasePoint::new(0.3, -1.0), Symmetry::Shift2Pi);
        assert_eq!(p, PhasePoint::new(0.3, -1.0 + TAU));
        let q = PhasePoint::new(0.3, -1.0);
        let back = symmetry_image(symmetry_image(q, Symmetry::Mirror), Symmetry::Mirror);
        assert_abs_diff_eq!(back.theta, q.theta, epsilon = 1e-15);
        assert_eq!(back.alpha, q.alpha);
    }

    #[test]
    fn field_symmetries() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for (t, _) in enumerate_triples(16) {
            let d = derive(t);
            let ds = derive(Triple::swapped(t));
            for _ in 0..100 {
                let p = PhasePoint::new(rng.gen_range(0.0..FRAC_PI_2), rng.gen_range(-6.0..6.0));
                let (a, b) = vector_field(&d, p);
                let (ma, mb) = vector_field(&ds, symmetry_image(p, Symmetry::Mirror));
                assert!((ma + a).abs() < 1e-12 && (mb + b).abs() < 1e-12);

                let scale = 4.0 * (d.m + d.m1() + d.m2());
                let (ra, rb) = vector_field(&d, symmetry_image(p, Symmetry::ShiftPi));
                assert!((ra + a).abs() <= 1e-14 * scale && (rb + b).abs() <= 1e-14 * scale);
                let (pa, pb) = vector_field(&d, symmetry_image(p, Symmetry::Shift2Pi));
                assert!((pa - a).abs() <= 1e-14 * scale && (pb - b).abs() <= 1e-14 * scale);
            }
            for alpha in [-3.0, 0.0, 1.2] {
                assert_eq!(vector_field(&d, PhasePoint::new(0.0, alpha)).0, 0.0);
                assert_eq!(vector_field(&d, PhasePoint::new(FRAC_PI_2, alpha)).0, 0.0);
            }
        }
    }

    #[test]
    fn saddle_slopes() {
        for (t, _) in enumerate_triples(20) {
            let d = derive(t);
            let s1 = classify_fixed_point(&d, FixedPointId::S1);
            assert!((s1.slopes[0] + d.m / (d.m1() + 1.0)).abs() < 1e-9);
            let s3 = classify_fixed_point(&d, FixedPointId::S3);
            assert!((s3.slopes[0] + d.m / (d.m2() + 1.0)).abs() < 1e-9);
        }
    }

    #[test]
    fn nearest_point_wraps() {
        let d = data(2, 1, 1);
        let (id, dist) = nearest_fixed_point(&d, PhasePoint::new(FRAC_PI_4 + 1e-9, TAU + 1e-9));
        assert_eq!(id, FixedPointId::OMinus);
        assert!(dist < 2e-9);
        assert_eq!(wrap_angle(3.0 * PI / 2.0), -FRAC_PI_2);
    }
}
