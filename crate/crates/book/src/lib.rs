//! Compiles the Rust listings of the guide in `book/` as doc-tests, so that
//! `cargo test --workspace` fails whenever the book and the library disagree.

#[doc = include_str!("../../../book/src/introduction.md")]
pub mod introduction {}
#[doc = include_str!("../../../book/src/chains.md")]
pub mod chains {}
#[doc = include_str!("../../../book/src/partitions.md")]
pub mod partitions {}
#[doc = include_str!("../../../book/src/generators.md")]
pub mod generators {}
#[doc = include_str!("../../../book/src/factorization.md")]
pub mod factorization {}
#[doc = include_str!("../../../book/src/closure.md")]
pub mod closure {}
#[doc = include_str!("../../../book/src/verification.md")]
pub mod verification {}
#[doc = include_str!("../../../README.md")]
pub mod readme {}
