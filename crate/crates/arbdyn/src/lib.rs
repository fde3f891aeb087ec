//! Exact arithmetic-dynamics toolkit for degree-2 rational maps: orbit
//! sequences and iterate polynomials, discriminant closed forms, quadratic
//! residue sieves with certificates, binary-tree automorphism groups, and
//! Frobenius cycle-type statistics.

pub mod certify;
pub mod discriminants;
pub mod error;
pub mod exec;
pub mod frobenius;
pub mod numkernel;
pub mod quadmap;
pub mod reference;
pub mod sieve;
pub mod treegroups;

pub use error::{Error, Result};
