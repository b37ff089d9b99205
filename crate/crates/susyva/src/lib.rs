//! Symbolic Λ-bracket calculus for supersymmetric vertex algebras of types `N_W = N`
//! and `N_K = N`.
//!
//! The crate computes Λ-brackets and normally ordered products of field expressions,
//! checks the defining identities, extracts central charges and expands superfields into
//! Fourier-mode tables. A truncated super-Laurent series oracle ([`distoracle`]) checks the
//! distribution calculus the engine relies on.

pub mod error;
pub mod superindex;
pub mod scalar;
pub mod params;
pub mod expr;
pub mod engine;
pub mod parse;
pub mod library;
pub mod distoracle;
pub mod modes;

pub use error::{Error, Result};
