//! Runs every Rust snippet in the book as a doctest, one module per
//! chapter so a failure names its chapter. Compiled only under
//! `cfg(doctest)`.

#[doc = include_str!("../../../book/src/introduction.md")]
pub mod introduction {}

#[doc = include_str!("../../../book/src/netlists.md")]
pub mod netlists {}

#[doc = include_str!("../../../book/src/patch-model.md")]
pub mod patch_model {}

#[doc = include_str!("../../../book/src/rf-networks.md")]
pub mod rf_networks {}

#[doc = include_str!("../../../book/src/switch-metrics.md")]
pub mod switch_metrics {}

#[doc = include_str!("../../../book/src/calibration.md")]
pub mod calibration_guide {}

#[doc = include_str!("../../../book/src/cli-reference.md")]
pub mod cli_reference {}
