//! The user guide, embedded chapter by chapter so every example in the
//! rendered book also compiles and runs as a doc-test. The book source
//! lives in `book/src/` at the repository root; these modules exist
//! only to carry its pages through rustdoc.

#[doc = include_str!("../../../book/src/introduction.md")]
pub mod introduction {}

#[doc = include_str!("../../../book/src/modeling.md")]
pub mod modeling {}

#[doc = include_str!("../../../book/src/constraints.md")]
pub mod constraints {}

#[doc = include_str!("../../../book/src/scaling.md")]
pub mod scaling {}

#[doc = include_str!("../../../book/src/solving.md")]
pub mod solving {}

#[doc = include_str!("../../../book/src/experiments.md")]
pub mod experiments {}
