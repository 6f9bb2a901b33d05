//! Equivariant free boundary minimal surfaces from isoparametric foliations, reduced to
//! a planar dynamical system.
//!
//! The crate is organised bottom-up:
//!
//! - [`triples`]: admissible `(g, m1, m2)` and their derived scalars.
//! - [`phase`]: the vector field, fixed points and symmetries.
//! - [`integrate`]: adaptive integration with events and separatrix tracing.
//! - [`profile`]: lifting orbits to profile curves, classification, residuals and the
//!   area ratio.
//! - [`freeboundary`]: the cone, `Sigma^k` and `Omega` in the unit ball.
//! - [`render`]: CSV and SVG output.
//! - [`verify`]: the acceptance criteria as a runnable suite.
//!
//! ```
//! use isoflow::freeboundary::sigma_k;
//! use isoflow::triples::Triple;
//!
//! let d = Triple::new(2, 1, 1)?.data();
//! let s = sigma_k(&d, 2)?;
//! assert_eq!(s.alpha_crossings.len(), 2);
//! # Ok::<(), isoflow::Error>(())
//! ```

pub mod error;
pub mod freeboundary;
pub mod integrate;
pub mod phase;
pub mod profile;
pub mod render;
pub mod triples;
pub mod verify;

pub use error::{Error, Result};

// The book's snippets run as doc-tests.
#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/triples.md")]
    mod triples {}
    #[doc = include_str!("../../../book/src/phase.md")]
    mod phase {}
    #[doc = include_str!("../../../book/src/integration.md")]
    mod integration {}
    #[doc = include_str!("../../../book/src/profiles.md")]
    mod profiles {}
    #[doc = include_str!("../../../book/src/free-boundary.md")]
    mod free_boundary {}
    #[doc = include_str!("../../../book/src/verification.md")]
    mod verification {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
    #[doc = include_str!("../../../README.md")]
    mod readme {}
}
