//! Exact certificates for derived inverse limits of overconvergent function
//! algebras.
//!
//! Everything is computed in log coordinates over `ℚ`: an absolute value
//! `|a| = p^(-v)` is stored as its exponent `v`, a radius `r = p^(-e)` as `e`.
//! Every norm comparison therefore reduces to an exact rational comparison.
//!
//! Layout:
//! - [`valuation`]: log values, log radii, polyradii and monomial norms.
//! - [`series`]: truncated two-variable series, envelopes, Gauss norms and the
//!   asymptotic decision procedure [`series::envelope_limit`].
//! - [`membership`]: membership of ray/diagonal series in closed, dagger and
//!   open polydisk algebras, plus the one-sided test for sums of two spaces.
//! - [`derived`]: the inverse systems, the two-term `Δ` complex, the
//!   obstruction certificates for the open × dagger-closed bidisk and the
//!   `lim¹` verdict.
//! - [`annulus`]: half-open annuli and the Fréchet ⊕ LB splitting.
//! - [`report`]: the end-to-end report consumed by the CLI.

pub mod annulus;
pub mod derived;
pub mod error;
pub mod membership;
pub mod par;
pub mod report;
pub mod series;
pub mod valuation;

pub use error::{Error, Result};
pub use par::Execution;
pub use valuation::{LogRadius, LogValue, Mode, PolyRadius, Prime, Rational};
