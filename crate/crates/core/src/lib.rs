//! Numerical laboratory for bilinear Bochner-Riesz means.
//!
//! The operator
//!
//! ```text
//! S^alpha(f, g)(x) = int int (1 - |xi|^2 - |eta|^2)_+^alpha f_hat(xi) g_hat(eta) e^{2 pi i x.(xi + eta)} dxi deta
//! ```
//!
//! is evaluated on periodic grids along three independent paths, split into
//! dyadic slices near the unit sphere, and probed for mixed-norm behavior.
//! [`regions`] encodes the known smoothness thresholds exactly.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bessel;
pub mod decomposition;
pub mod error;
pub mod fit;
pub mod grid;
pub mod kernel;
pub mod norms;
pub mod operators;
pub mod quadrature;
pub mod regions;

pub use error::{Error, Flagged, Result, Warning};

// The guide in book/ is compiled here so its snippets run as doctests.
#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../README.md")]
    mod readme {}
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/grids.md")]
    mod grids {}
    #[doc = include_str!("../../../book/src/kernel.md")]
    mod kernel {}
    #[doc = include_str!("../../../book/src/paths.md")]
    mod paths {}
    #[doc = include_str!("../../../book/src/pieces.md")]
    mod pieces {}
    #[doc = include_str!("../../../book/src/norms.md")]
    mod norms {}
    #[doc = include_str!("../../../book/src/regions.md")]
    mod regions {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
