//! Approximate maximum-weight b-matching.
//!
//! The fractional solvers run a multiplicative-weights scheme against a perturbed version of
//! the b-matching polytope, whose nearly-tight odd-set constraints form a laminar family that
//! can be found exactly with low cut trees. Rounding turns their output into integral
//! b-matchings through a reduction to maximum-weight matching.

pub mod blossom;
pub mod cut_tree;
pub mod error;
pub mod fptas_cap;
pub mod fptas_uncap;
pub mod graph_core;
pub mod greedy;
pub mod lagrangian;
pub mod mwu;
pub mod oddset_oracle;
pub mod reference_oracles;
pub mod report;
pub mod rounding;

pub use error::{Error, Result};
pub use graph_core::{Edge, FractionalAssignment, Instance, OddSet, ViolationReport};

/// Guide chapters, compiled as doctests.
#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    pub struct Introduction;
    #[doc = include_str!("../../../book/src/instances.md")]
    pub struct Instances;
    #[doc = include_str!("../../../book/src/fractional.md")]
    pub struct Fractional;
    #[doc = include_str!("../../../book/src/oracle.md")]
    pub struct Oracle;
    #[doc = include_str!("../../../book/src/greedy.md")]
    pub struct Greedy;
    #[doc = include_str!("../../../book/src/rounding.md")]
    pub struct Rounding;
    #[doc = include_str!("../../../book/src/cli.md")]
    pub struct Cli;
    #[doc = include_str!("../../../book/src/verification.md")]
    pub struct Verification;
}
