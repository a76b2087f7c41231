//! Secrecy rate regions for three-receiver broadcast channels.
//!
//! The crate bundles the information-measure substrate, channel ordering
//! tests, evaluators and maximizers for the achievable and outer rate
//! expressions, an exact Fourier-Motzkin engine for deriving the regions, and
//! a small-blocklength coding simulator with exact equivocation accounting.

pub mod bounds;
pub mod chanfile;
pub mod error;
pub mod exact;
pub mod example;
pub mod fme;
pub mod lp;
pub mod orderings;
pub mod prob;
pub mod search;
pub mod sim;

pub use error::{Error, Result};
