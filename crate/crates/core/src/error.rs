//! Error type shared by all modules of the crate.

use thiserror::Error;

/// Errors reported by the numerical operator-theory routines.
///
/// Convergence and conditioning failures carry enough data to be
/// reported instead of silently turned into a wrong boolean.
#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("alphabet mismatch: {0} vs {1}")]
    AlphabetMismatch(u32, u32),
    #[error("generator index {index} out of range 1..={n}")]
    GeneratorOutOfRange { index: u32, n: u32 },
    #[error("shape mismatch: {0}x{1} vs {2}x{3}")]
    ShapeMismatch(usize, usize, usize, usize),
    #[error("ambient dimension mismatch: {0} vs {1}")]
    AmbientMismatch(usize, usize),
    #[error("matrix is not hermitian (residual {residual:.3e} > tol {tol:.3e})")]
    NotHermitian { residual: f64, tol: f64 },
    #[error("matrix is not positive semidefinite (eigenvalue {eigenvalue:.3e})")]
    NotPsd { eigenvalue: f64 },
    #[error("entries must be finite")]
    NonFiniteEntry,
    #[error("dimension guard: requested space of dimension {dim} exceeds {max}")]
    DimensionGuard { dim: usize, max: usize },
    #[error("iteration did not converge within horizon {horizon} (last residual {residual:.3e})")]
    NotConverged { horizon: usize, residual: f64 },
    #[error("tuple is not a row contraction (defect eigenvalue {eigenvalue:.3e})")]
    NotRowContraction { eigenvalue: f64 },
    #[error("tuple is not power bounded (norm {norm:.3e} at step {step})")]
    NotPowerBounded { norm: f64, step: usize },
    #[error("tuple is not completely non-coisometric (dim H_c = {dim_hc})")]
    NotCnc { dim_hc: usize },
    #[error("subspace is not jointly invariant (residual {residual:.3e} > tol {tol:.3e})")]
    NotInvariant { residual: f64, tol: f64 },
    #[error("subspace is not wandering (Gram residual {residual:.3e})")]
    NotWandering { residual: f64 },
    #[error("factorization is not regular (rank deficit {deficit})")]
    NotRegular { deficit: usize },
    #[error("factorizations are not comparable (residual {residual:.3e})")]
    NotComparable { residual: f64 },
    #[error("ill-conditioned solve (condition estimate {cond:.3e})")]
    IllConditioned { cond: f64 },
    #[error("rank unstable under truncation: {at_low} at margin {low}, {at_high} at margin {high}")]
    RankUnstable {
        low: usize,
        at_low: usize,
        high: usize,
        at_high: usize,
    },
    #[error("truncation unstable: {0}")]
    TruncationUnstable(String),
    #[error("structure violation (a theorem-level identity failed): {0}")]
    StructureViolation(String),
    #[error("{0}")]
    InvalidInput(String),
}

pub type Result<T> = std::result::Result<T, Error>;
