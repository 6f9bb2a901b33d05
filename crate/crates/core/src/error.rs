use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("g = {0} is not an admissible number of principal curvatures (expected 1, 2, 3, 4 or 6)")]
    InvalidG(i64),
    #[error("multiplicities ({m1}, {m2}) violate the g = {g} rule: {rule}")]
    MultiplicityRule { g: i64, m1: i64, m2: i64, rule: &'static str },
    #[error("g * (m1 + m2) = {0} is odd, so the ambient dimension is not an integer")]
    NonIntegerDimension(i64),
    #[error("{what} = {value} is outside its domain {domain}")]
    Domain { what: &'static str, value: f64, domain: &'static str },
    #[error("step size collapsed to {h:e} at t = {t}")]
    StepUnderflow { t: f64, h: f64 },
    #[error("state became non-finite at t = {0}")]
    NonFinite(f64),
    #[error("separatrix did not reach the sink ball before t = {0}")]
    DidNotConverge(f64),
    #[error("anchor time {t} is outside the orbit span [{lo}, {hi}]")]
    AnchorOutOfRange { t: f64, lo: f64, hi: f64 },
    #[error("orbit ends are not resolved to fixed points")]
    UnresolvedOrbit,
    #[error("curve has {0} samples, at least 10 are required")]
    TooFewSamples(usize),
    #[error("rho = {rho} is outside the radial range [{lo}, {hi}] of the curve")]
    RhoOutOfRange { rho: f64, lo: f64, hi: f64 },
    #[error("construction requires the {expected} regime")]
    WrongRegime { expected: &'static str },
    #[error("triple ({0}, {1}, {2}) is one of the excluded unstable triples")]
    ExceptionalTriple(i64, i64, i64),
    #[error("only {0} crossings of alpha = 0 are available before the sink")]
    NotEnoughCrossings(usize),
    #[error("shooting orbit did not reach alpha = {level} before |t| = {max_time}")]
    EventNotReached { level: f64, max_time: f64 },
    #[error("no sign change of r(t-) - r(t+) on the epsilon scan grid")]
    BracketNotFound,
    #[error("bisection did not converge in {0} iterations")]
    BisectionExhausted(usize),
}

impl Error {
    /// True for errors caused by an unmet construction precondition (as opposed to
    /// numerical failure).
    pub fn is_precondition(&self) -> bool {
        matches!(self, Error::WrongRegime { .. } | Error::ExceptionalTriple(..) | Error::NotEnoughCrossings(_))
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
