//! Separation systems, S-trees over star families, and the tangle/tree
//! duality for graph and matroid width parameters.

pub mod bits;
pub mod decompositions;
pub mod duality;
pub mod error;
pub mod families;
pub mod oracle;
pub mod problem;
pub mod separation;
pub mod stree;
pub mod universe;

pub use error::{Error, Result};
