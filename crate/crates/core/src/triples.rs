//! Admissible isoparametric triples `(g, m1, m2)` and the scalar data derived from them.
//!
//! A triple records the number `g` of distinct principal curvatures of an
//! isoparametric hypersurface in the sphere `S^{n-1}` together with the two
//! multiplicities. Everything the phase-plane analysis needs (ambient dimension,
//! the minimal leaf angle `theta*`, the damping coefficient `m`, the discriminant at
//! the interior fixed points) is a function of the triple alone.

use std::f64::consts::FRAC_PI_2;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Values of `g` allowed by Münzner's theorem.
pub const ADMISSIBLE_G: [u32; 5] = [1, 2, 3, 4, 6];

/// Triples whose separatrices cross `theta = theta*` in the nodal regime.
pub const EXCEPTIONAL_TRIPLES: [(u32, u32, u32); 4] = [(2, 1, 5), (2, 5, 1), (4, 1, 6), (4, 6, 1)];

/// Unordered `g = 4` pairs with `n < 16`.
const G4_LOW_PAIRS: [(u32, u32); 7] = [(1, 1), (1, 2), (1, 3), (1, 4), (1, 5), (2, 2), (2, 3)];

/// A validated isoparametric triple.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Triple {
    pub g: u32,
    pub m1: u32,
    pub m2: u32,
}

impl Triple {
    /// Validates `(g, m1, m2)`; see [`validate_triple`].
    pub fn new(g: i64, m1: i64, m2: i64) -> Result<Self> {
        validate_triple(g, m1, m2)
    }

    /// The triple with the two multiplicities exchanged (the mirror family).
    pub fn swapped(self) -> Self {
        Triple { g: self.g, m1: self.m2, m2: self.m1 }
    }

    /// Ambient dimension `n = g (m1 + m2) / 2 + 2`.
    pub fn n(self) -> u32 {
        self.g * (self.m1 + self.m2) / 2 + 2
    }

    pub fn data(self) -> TripleData {
        derive(self)
    }
}

impl fmt::Display for Triple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{},{})", self.g, self.m1, self.m2)
    }
}

/// Sign regime of the interior fixed points.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Regime {
    /// `n < 4g`: the interior fixed points are foci.
    Spiral,
    /// `n >= 4g`: the interior fixed points are nodes.
    Nodal,
}

/// Which closed form is used for the damping coefficient `m` of the phase system.
///
/// `Derived` is `m1 + m2 + 2/g`, the value obtained from the geodesic equation
/// (`m = 2(n-1)/g`). `Printed` is `m1 + m2 + g/2`; it is kept so the regime
/// dichotomy check can demonstrate that it fails.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CoefficientConvention {
    #[default]
    Derived,
    Printed,
}

impl CoefficientConvention {
    pub fn coefficient(self, t: Triple) -> f64 {
        let sum = f64::from(t.m1 + t.m2);
        let g = f64::from(t.g);
        match self {
            CoefficientConvention::Derived => sum + 2.0 / g,
            CoefficientConvention::Printed => sum + g / 2.0,
        }
    }
}

/// A triple together with every scalar derived from it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TripleData {
    #[serde(flatten)]
    pub triple: Triple,
    pub n: u32,
    pub theta_star: f64,
    pub m: f64,
    pub delta: f64,
    pub regime: Regime,
    pub exceptional: bool,
}

impl TripleData {
    pub fn g(&self) -> u32 {
        self.triple.g
    }

    pub fn m1(&self) -> f64 {
        f64::from(self.triple.m1)
    }

    pub fn m2(&self) -> f64 {
        f64::from(self.triple.m2)
    }

    /// Rate factor `2/g` relating the phase time to `d(log r)` and `d(phi)`.
    pub fn radial_rate(&self) -> f64 {
        2.0 / f64::from(self.triple.g)
    }

    /// `sin^{m1}(theta) cos^{m2}(theta)` without domain checks.
    pub fn volume(&self, theta: f64) -> f64 {
        theta.sin().powi(self.triple.m1 as i32) * theta.cos().powi(self.triple.m2 as i32)
    }

    /// `m1 cot(theta) - m2 tan(theta)` without domain checks.
    pub fn h(&self, theta: f64) -> f64 {
        self.m1() / theta.tan() - self.m2() * theta.tan()
    }

    /// `m1 cos^2(theta) - m2 sin^2(theta)`, the regular form of `h(theta) sin(2 theta) / 2`.
    pub fn balance(&self, theta: f64) -> f64 {
        let (s, c) = theta.sin_cos();
        self.m1() * c * c - self.m2() * s * s
    }

    /// Mean curvature `H(phi) = -(d/dphi) log v` expressed in `theta = g phi / 2`.
    pub fn mean_curvature(&self, theta: f64) -> f64 {
        -0.5 * f64::from(self.triple.g) * self.h(theta)
    }

    pub fn is_degenerate(&self) -> bool {
        self.delta.abs() <= DEGENERATE_DELTA_TOL
    }
}

/// Threshold below which the discriminant is treated as zero.
pub const DEGENERATE_DELTA_TOL: f64 = 1e-12;

/// Validates an isoparametric triple against the classification table.
///
/// ```
/// use isoflow::triples::validate_triple;
/// assert!(validate_triple(3, 2, 2).is_ok());
/// assert!(validate_triple(3, 1, 2).is_err());
/// ```
pub fn validate_triple(g: i64, m1: i64, m2: i64) -> Result<Triple> {
    if !ADMISSIBLE_G.iter().any(|&a| i64::from(a) == g) {
        return Err(Error::InvalidG(g));
    }
    let fail = |rule: &'static str| Err(Error::MultiplicityRule { g, m1, m2, rule });
    if m1 < 1 || m2 < 1 {
        return fail("multiplicities must be positive");
    }
    match g {
        1 if m1 != m2 => return fail("g = 1 requires m1 = m2"),
        3 if !(m1 == m2 && [1, 2, 4, 8].contains(&m1)) => return fail("g = 3 requires m1 = m2 in {1, 2, 4, 8}"),
        6 if !(m1 == m2 && [1, 2].contains(&m1)) => return fail("g = 6 requires m1 = m2 in {1, 2}"),
        4 if !g4_admissible(m1, m2) => {
            return fail("g = 4 pair is neither tabulated nor satisfies the Stolz divisibility rule")
        }
        _ => {}
    }
    if (g * (m1 + m2)) % 2 != 0 {
        return Err(Error::NonIntegerDimension(g * (m1 + m2)));
    }
    Ok(Triple { g: g as u32, m1: m1 as u32, m2: m2 as u32 })
}

/// Number of `s` in `1..=l` with `s mod 8` in `{0, 1, 2, 4}`.
pub fn stolz_phi(l: i64) -> u32 {
    (1..=l).filter(|s| matches!(s % 8, 0 | 1 | 2 | 4)).count() as u32
}

fn g4_admissible(m1: i64, m2: i64) -> bool {
    let (lo, hi) = (m1.min(m2), m1.max(m2));
    if G4_LOW_PAIRS.iter().any(|&(a, b)| i64::from(a) == lo && i64::from(b) == hi) {
        return true;
    }
    if (lo, hi) == (4, 5) {
        return true;
    }
    let sum = m1 + m2;
    if sum < 7 {
        return false;
    }
    let phi = stolz_phi(lo - 1);
    // 2^phi grows past any realistic sum quickly; guard the shift.
    phi < 62 && (sum + 1) % (1i64 << phi) == 0
}

/// Derives the scalar data of a triple with the default coefficient convention.
pub fn derive(t: Triple) -> TripleData {
    derive_with(t, CoefficientConvention::Derived)
}

pub fn derive_with(t: Triple, convention: CoefficientConvention) -> TripleData {
    let n = t.n();
    let m = convention.coefficient(t);
    let sum = f64::from(t.m1 + t.m2);
    let delta = m * m - 8.0 * sum;
    let regime = if n < 4 * t.g { Regime::Spiral } else { Regime::Nodal };
    TripleData {
        triple: t,
        n,
        theta_star: (f64::from(t.m1) / f64::from(t.m2)).sqrt().atan(),
        m,
        delta,
        regime,
        exceptional: EXCEPTIONAL_TRIPLES.contains(&(t.g, t.m1, t.m2)),
    }
}

/// `v(theta) = sin^{m1}(theta) cos^{m2}(theta)` on `[0, pi/2]`.
pub fn volume_profile(t: Triple, theta: f64) -> Result<f64> {
    if !(0.0..=FRAC_PI_2).contains(&theta) {
        return Err(Error::Domain { what: "theta", value: theta, domain: "[0, pi/2]" });
    }
    Ok(derive(t).volume(theta))
}

/// `h(theta) = m1 cot(theta) - m2 tan(theta)`, the logarithmic derivative of `v`.
pub fn h_curvature(t: Triple, theta: f64) -> Result<f64> {
    if !(theta > 0.0 && theta < FRAC_PI_2) {
        return Err(Error::Domain { what: "theta", value: theta, domain: "(0, pi/2)" });
    }
    Ok(derive(t).h(theta))
}

/// All admissible triples with `n <= n_max`, sorted by `(g, m1, m2)`.
pub fn enumerate_triples(n_max: u32) -> Vec<(Triple, TripleData)> {
    let mut out = Vec::new();
    if n_max < 3 {
        return out;
    }
    for g in ADMISSIBLE_G {
        let max_sum = 2 * (n_max - 2) / g;
        for m1 in 1..max_sum {
            for m2 in 1..=(max_sum - m1) {
                if let Ok(t) = validate_triple(i64::from(g), i64::from(m1), i64::from(m2)) {
                    if t.n() <= n_max {
                        out.push((t, derive(t)));
                    }
                }
            }
        }
    }
    out.sort_by_key(|(t, _)| *t);
    out
}

/// The `count` triples of smallest dimension, ties broken by `(g, m1, m2)`.
pub fn smallest_triples(count: usize) -> Vec<Triple> {
    let mut n_max = 3;
    loop {
        let mut all: Vec<Triple> = enumerate_triples(n_max).into_iter().map(|(t, _)| t).collect();
        if all.len() >= count {
            all.sort_by_key(|t| (t.n(), *t));
            all.truncate(count);
            return all;
        }
        n_max += 1;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::FRAC_PI_4;

    fn t(g: i64, m1: i64, m2: i64) -> Triple {
        validate_triple(g, m1, m2).unwrap()
    }

    #[test]
    fn validation_examples() {
        assert!(validate_triple(3, 2, 2).is_ok());
        assert!(matches!(validate_triple(3, 1, 2), Err(Error::MultiplicityRule { .. })));
        assert_eq!(validate_triple(5, 1, 1), Err(Error::InvalidG(5)));
        assert!(validate_triple(4, 4, 5).is_ok());
        assert!(validate_triple(4, 5, 4).is_ok());
    }

    #[test]
    fn g4_rule() {
        // tabulated low-dimensional pairs, both orders
        for (a, b) in G4_LOW_PAIRS {
            assert!(validate_triple(4, a.into(), b.into()).is_ok());
            assert!(validate_triple(4, b.into(), a.into()).is_ok());
        }
        // sum 6 pairs outside the table
        assert!(validate_triple(4, 2, 4).is_err());
        assert!(validate_triple(4, 3, 3).is_err());
        // m1 = 1: 2^phi(0) = 1 divides everything
        assert!(validate_triple(4, 1, 6).is_ok());
        assert!(validate_triple(4, 1, 9).is_ok());
        // phi(2) = 2: sum + 1 must be divisible by 4
        assert!(validate_triple(4, 3, 4).is_ok());
        assert!(validate_triple(4, 3, 5).is_err());
        assert!(validate_triple(4, 3, 8).is_ok());
        // phi(3) = 2 for (4,5) would fail, but (4,5) is listed explicitly
        assert_eq!(stolz_phi(3), 2);
        assert_eq!(stolz_phi(8), 4);
        assert_eq!(stolz_phi(0), 0);
    }

    #[test]
    fn other_rules() {
        assert!(validate_triple(1, 2, 3).is_err());
        assert!(validate_triple(1, 5, 5).is_ok());
        assert!(validate_triple(3, 8, 8).is_ok());
        assert!(validate_triple(3, 3, 3).is_err());
        assert!(validate_triple(6, 2, 2).is_ok());
        assert!(validate_triple(6, 4, 4).is_err());
        assert!(validate_triple(2, 0, 1).is_err());
        assert!(validate_triple(2, 7, 2).is_ok());
        assert_eq!(validate_triple(0, 1, 1), Err(Error::InvalidG(0)));
    }

    #[test]
    fn derive_examples() {
        let d = derive(t(2, 1, 5));
        assert_eq!(d.n, 8);
        assert_eq!(d.regime, Regime::Nodal);
        assert!(d.exceptional);

        let d = derive(t(1, 1, 1));
        assert_eq!(d.n, 3);
        assert_abs_diff_eq!(d.theta_star, FRAC_PI_4, epsilon = 1e-15);
        assert_eq!(d.m, 4.0);
        assert_eq!(d.delta, 0.0);
        assert!(d.is_degenerate());

        let d = derive(t(4, 1, 5));
        assert_eq!(d.n, 14);
        assert_eq!(d.regime, Regime::Spiral);
        assert_eq!(d.m, 6.5);
        assert_eq!(d.delta, -5.75);
    }

    #[test]
    fn printed_coefficient_breaks_dichotomy_for_4_1_5() {
        let d = derive_with(t(4, 1, 5), CoefficientConvention::Printed);
        assert_eq!(d.m, 8.0);
        assert_eq!(d.delta, 16.0);
        assert_eq!(d.regime, Regime::Spiral);
    }

    #[test]
    fn volume_examples() {
        assert_abs_diff_eq!(volume_profile(t(2, 1, 1), FRAC_PI_4).unwrap(), 0.5, epsilon = 1e-15);
        assert_eq!(volume_profile(t(4, 1, 6), 0.0).unwrap(), 0.0);
        assert!(volume_profile(t(2, 1, 1), -0.1).is_err());
        assert!(volume_profile(t(2, 1, 1), 1.6).is_err());

        // grid-search oracle: the maximum over a dense grid sits at theta*
        let tr = t(2, 1, 5);
        let ts = (1.0f64 / 5.0).sqrt().atan();
        let n = 200_000;
        let (arg, max) = (0..=n)
            .map(|i| FRAC_PI_2 * i as f64 / n as f64)
            .map(|th| (th, volume_profile(tr, th).unwrap()))
            .fold((0.0, f64::MIN), |acc, x| if x.1 > acc.1 { x } else { acc });
        assert!((arg - ts).abs() < 1e-4);
        assert!(volume_profile(tr, ts).unwrap() >= max);
    }

    #[test]
    fn h_examples() {
        assert_abs_diff_eq!(h_curvature(t(2, 1, 1), FRAC_PI_4).unwrap(), 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(h_curvature(t(2, 1, 5), FRAC_PI_4).unwrap(), -4.0, epsilon = 1e-14);
        assert!(h_curvature(t(2, 1, 1), 0.0).is_err());
        assert!(h_curvature(t(2, 1, 1), FRAC_PI_2).is_err());

        // centered finite difference of log v
        let tr = t(3, 2, 2);
        let step = 1e-5;
        let lv = |x: f64| volume_profile(tr, x).unwrap().ln();
        let fd = (lv(0.3 + step) - lv(0.3 - step)) / (2.0 * step);
        assert_abs_diff_eq!(h_curvature(tr, 0.3).unwrap(), fd, epsilon = 1e-8);
    }

    #[test]
    fn h_is_log_derivative_and_decreasing() {
        for (tr, _) in enumerate_triples(12) {
            let step = 1e-5;
            let lv = |x: f64| volume_profile(tr, x).unwrap().ln();
            let mut prev = f64::INFINITY;
            for i in 1..=20 {
                let th = FRAC_PI_2 * i as f64 / 21.0;
                let fd = (lv(th + step) - lv(th - step)) / (2.0 * step);
                let h = h_curvature(tr, th).unwrap();
                assert!((h - fd).abs() < 1e-7 * h.abs().max(1.0), "{tr} at {th}: {h} vs {fd}");
                assert!(h < prev);
                prev = h;
            }
            let d = derive(tr);
            assert!(d.h(d.theta_star).abs() < 1e-12);
        }
    }

    #[test]
    fn enumeration_examples() {
        let rows = |n_max, g| -> Vec<(u32, u32)> {
            enumerate_triples(n_max).into_iter().filter(|(t, _)| t.g == g).map(|(t, _)| (t.m1, t.m2)).collect()
        };
        assert_eq!(rows(4, 1), vec![(1, 1), (2, 2)]);
        let g2 = rows(8, 2);
        let mut expected = Vec::new();
        for m1 in 1..6 {
            for m2 in 1..=(6 - m1) {
                expected.push((m1, m2));
            }
        }
        assert_eq!(g2, expected);
        assert_eq!(rows(14, 6), vec![(1, 1), (2, 2)]);
        assert_eq!(enumerate_triples(3).len(), 1);
    }

    #[test]
    fn enumeration_invariants() {
        let all = enumerate_triples(40);
        for w in all.windows(2) {
            assert!(w[0].0 < w[1].0, "sorted and duplicate-free");
        }
        for (tr, d) in &all {
            assert_eq!(validate_triple(tr.g.into(), tr.m1.into(), tr.m2.into()).unwrap(), *tr);
            let g = f64::from(tr.g);
            let sum = f64::from(tr.m1 + tr.m2);
            assert_eq!(d.regime == Regime::Spiral, sum < 8.0 - 4.0 / g);
            if *tr == t(1, 1, 1) {
                assert_eq!(d.delta, 0.0);
            } else {
                assert_eq!(d.delta < 0.0, d.regime == Regime::Spiral, "{tr}");
            }
            assert!(d.theta_star > 0.0 && d.theta_star < FRAC_PI_2);
            assert!((d.theta_star.tan().powi(2) - d.m1() / d.m2()).abs() < 1e-12);
        }
        // the tabulated nodal g = 3 and g = 4 entries
        for tr in [t(3, 4, 4), t(3, 8, 8), t(4, 4, 5), t(4, 1, 6)] {
            assert!(all.iter().any(|(x, _)| *x == tr));
        }
    }

    #[test]
    fn smallest_ten() {
        let s = smallest_triples(10);
        assert_eq!(s.len(), 10);
        assert_eq!(s[0], t(1, 1, 1));
        assert!(s.windows(2).all(|w| w[0].n() <= w[1].n()));
    }

    #[test]
    fn json_field_names() {
        let v = serde_json::to_value(derive(t(2, 1, 5))).unwrap();
        for k in ["g", "m1", "m2", "n", "theta_star", "m", "delta", "regime", "exceptional"] {
            assert!(v.get(k).is_some(), "{k}");
        }
        assert_eq!(v["regime"], "nodal");
        assert_eq!(v["exceptional"], true);
    }

    proptest::proptest! {
        #[test]
        fn volume_mirror_symmetry(idx in 0usize..64, th in 0.0f64..FRAC_PI_2) {
            let all = enumerate_triples(20);
            let tr = all[idx % all.len()].0;
            let a = volume_profile(tr, th).unwrap();
            let b = volume_profile(tr.swapped(), FRAC_PI_2 - th).unwrap();
            proptest::prop_assert!((a - b).abs() <= 1e-12 * a.abs() + 1e-300);
        }
    }
}
