//! Lifetime-distribution fitting when the support does not start at zero.
//!
//! Execution times and similar data live on `[𝓂, ∞)` for some unknown
//! minimum `𝓂 > 0`. This crate fits positive-support families to such data
//! by handling the location `c` in one of seven ways (see
//! [`mle::Method`]), and compares the results with information criteria
//! and cross-validated likelihood.
//!
//! - [`distributions`]: families, composition, truncation, shifting.
//! - [`location`]: closed-form estimators of the minimum.
//! - [`mle`]: grid-started maximum-likelihood fits.
//! - [`selection`]: criteria, cross-validation, comparison tables.
//! - [`bench`]: timing aggregates with bootstrap intervals.
//! - [`ingest`]: measurement, sample files, synthetic samples.

pub mod bench;
pub mod distributions;
pub mod error;
pub mod ingest;
pub mod location;
pub mod mle;
pub mod optimize;
pub mod selection;
pub mod special;

pub use error::{Error, Result};

// The guide's snippets run as doctests so the book cannot drift from the API.
#[cfg(doctest)]
mod guide {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/distributions.md")]
    mod distributions {}
    #[doc = include_str!("../../../book/src/location.md")]
    mod location {}
    #[doc = include_str!("../../../book/src/fitting.md")]
    mod fitting {}
    #[doc = include_str!("../../../book/src/selection.md")]
    mod selection {}
    #[doc = include_str!("../../../book/src/bench.md")]
    mod bench {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
