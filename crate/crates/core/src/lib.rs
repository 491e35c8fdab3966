//! Exact computation with the semigroups `O(X,Y) ⊆ OP(X,Y) ⊆ T(X,Y)` of
//! order-preserving, orientation-preserving and arbitrary transformations of
//! the chain `X = {1 < 2 < … < n}` with images in a fixed `Y ⊆ X`.
//!
//! The crate provides the two relative-rank formulas, canonical relative
//! generating sets, certified factorizations over them, criteria for minimal
//! relative generating sets, and brute-force closure machinery that checks
//! all of it by exhaustive computation.
//!
//! Maps act on the right: `f.compose(&g)` applies `f` first, then `g`.
//!
//! ```
//! use oprank::{ChainContext, Transformation, relrank_op_mod_o, factor_op_over_o};
//!
//! let ctx = ChainContext::parse("n=4 Y=2,3").unwrap();
//! assert_eq!(relrank_op_mod_o(&ctx).unwrap(), 3);
//!
//! let beta = Transformation::parse(&ctx, "[3,2,2,3]").unwrap();
//! assert!(beta.is_orientation_preserving() && !beta.is_order_preserving());
//! let word = factor_op_over_o(&beta).unwrap();
//! assert_eq!(word.to_string(), "alpha[1,4|2,3] * eta");
//! assert_eq!(word.product().unwrap(), beta);
//! ```

pub mod chain;
pub mod closure;
pub mod counting;
pub mod error;
pub mod factor;
pub mod generators;
pub mod partition;
pub mod verify;

pub use chain::{ChainContext, Transformation, YMap};
pub use closure::{
    brute_min_relrank, closure, enumerate_o, enumerate_op, enumerate_t,
    is_minimal_relative_generating, is_relative_generating, Budget, NecessityFilter, SemigroupSet,
};
pub use counting::{binomial, stirling2};
pub use error::{Error, Result};
pub use factor::{factor_op_over_o, factor_t_over_op, permutation_word, Factor, FactorTag, Word};
pub use generators::{
    build_alpha_p, build_eta, canonical_a, canonical_b_t_mod_op, check_min_relgen_op_mod_o,
    check_min_relgen_t_mod_op, relrank_op_mod_o, relrank_t_mod_op, GeneratingSet, MinimalityReport,
};
pub use partition::{enumerate_all, enumerate_p, enumerate_q, enumerate_r, Family, Partition};
