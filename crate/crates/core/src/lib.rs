//! Numerical model theory of row contractions on truncated Fock spaces.
//!
//! The crate works with an `n`-tuple `T = [T_1, ..., T_n]` of matrices with
//! `T_1 T_1^* + ... + T_n T_n^* <= I` and realizes, at a finite truncation
//! degree, the objects attached to it: defect operators and spaces, the
//! characteristic function and its Fourier coefficients, the minimal
//! isometric dilation, Wold decompositions of row isometries, functional
//! models, regular factorizations and their correspondence with joint
//! invariant subspaces, and similarity to Cuntz row isometries.
//!
//! Everything is finite-dimensional and tolerance-aware: rank decisions are
//! relative singular-value thresholds, equality assertions carry an absolute
//! residual threshold, and operations report the truncation margins on which
//! their claims were verified.

pub mod charfn;
pub mod dilation;
pub mod error;
pub mod factorization;
pub mod fockspace;
pub mod model;
pub mod multianalytic;
pub mod numerics;
pub mod rowcontraction;
pub mod similarity;
pub mod words;

pub use error::{Error, Result};
pub use numerics::{CMatrix, CVector, SubspaceBasis, Tolerance};
pub use rowcontraction::RowContraction;
pub use words::Word;
