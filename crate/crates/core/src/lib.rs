//! Twisted conjugacy toolkit.
//!
//! Enumerates Reidemeister (twisted conjugacy) classes `g ~ x g φ(x)^-1` of
//! endomorphisms of finite groups, finitely generated abelian groups and
//! lattice-by-finite extensions `ℤⁿ ⋊ F`, and checks the twisted
//! Burnside-Frobenius equality (Reidemeister number = number of irreducible
//! characters fixed by precomposition with φ) together with the Gauss
//! congruences of the sequence `R(φⁿ)`.
//!
//! The crate is `no_std` and only needs `alloc`. File formats, reports and the
//! command line live in the companion `tbf` crate.
#![no_std]
#![forbid(unsafe_code)]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod abelian;
pub mod character;
pub mod congruence;
pub mod cyclotomic;
pub mod extension;
pub mod group;
pub mod intertwiner;
pub mod matrix;
mod modp;
pub mod normal_form;
pub mod twisted;

pub use abelian::{ClassCount, FgAbelian, FgAbelianEndo, Lattice};
pub use character::CharTable;
pub use congruence::{CongruenceReport, ReidemeisterSequence};
pub use cyclotomic::{Cyc, CyclotomicField};
pub use extension::{ExtensionEndo, LatticeExtension, SeparatingQuotient};
pub use group::{ClassPartition, FiniteEndo, FiniteGroup};
pub use matrix::IntMatrix;

/// Size limits applied by constructions whose cost grows with group order.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Caps {
    /// Largest group produced by permutation closure.
    pub closure: usize,
    /// Largest group for which a character table is computed.
    pub char_table_order: usize,
    /// Largest materialized extension quotient `(ℤⁿ/H') ⋊ F`.
    pub quotient_order: usize,
}

impl Default for Caps {
    fn default() -> Self {
        Caps {
            closure: 20_000,
            char_table_order: 2_000,
            quotient_order: 5_000,
        }
    }
}
