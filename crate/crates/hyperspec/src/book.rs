//! The guide chapters from `book/` compiled as doc-tests.
//!
//! mdBook cannot run snippets against this crate's API, so each chapter is
//! included here as module documentation and `cargo test --doc` executes
//! every Rust block. A failing snippet fails the build, which keeps the
//! book in lockstep with the library.

#[doc = include_str!("../../../book/src/introduction.md")]
pub mod introduction {}

#[doc = include_str!("../../../book/src/walsh-hadamard.md")]
pub mod walsh_hadamard {}

#[doc = include_str!("../../../book/src/box-spectra.md")]
pub mod box_spectra {}

#[doc = include_str!("../../../book/src/monotone-functions.md")]
pub mod monotone_functions {}

#[doc = include_str!("../../../book/src/metric-transforms.md")]
pub mod metric_transforms {}

#[doc = include_str!("../../../book/src/manhattan-kernels.md")]
pub mod manhattan_kernels {}

#[doc = include_str!("../../../book/src/rank-experiments.md")]
pub mod rank_experiments {}

#[doc = include_str!("../../../book/src/cli.md")]
pub mod cli {}
