//! Fully coupled aggregation-based algebraic multigrid for the generalized
//! saddle-point systems produced by mortar finite element contact.
//!
//! The crate is `no_std` and only needs `alloc`. It contains
//!
//! * CSR/dense kernels ([`sparse`], [`dense`], [`vector`]),
//! * a two-body plane-strain contact problem generator ([`problem`]),
//! * interface-aware displacement and Lagrange-multiplier aggregation ([`aggregation`]),
//! * segregated block transfer operators ([`transfer`]),
//! * point and Schur-complement block smoothers ([`smoothers`]),
//! * the multigrid hierarchy and V-cycle ([`hierarchy`]),
//! * right-preconditioned restarted GMRES ([`krylov`]).
//!
//! File formats, configuration and the command line driver live in the
//! companion `contact-amg-cli` crate.
#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod aggregation;
pub mod dense;
mod error;
pub mod hierarchy;
pub mod krylov;
pub(crate) mod math;
pub mod problem;
pub mod saddle;
pub mod smoothers;
pub mod sparse;
pub mod transfer;
pub mod vector;

pub use dense::DenseMatrix;
pub use error::{Error, Result};
pub use saddle::{SaddleOperator, SaddleSystem};
pub use sparse::SparseMatrix;
pub use vector::BlockVector;
