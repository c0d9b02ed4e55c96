use thiserror::Error;

/// Errors produced by the transform, diagnostics and reconstruction routines.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// Input data violates a domain invariant (length, spacing, finiteness, ranges).
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// Containers whose parts disagree with each other (bin counts, grids, shapes).
    #[error("structural mismatch: {0}")]
    Structure(String),

    #[error("unsupported operation: {0}")]
    Unsupported(String),

    /// The kernel spectrum does not cover the frequencies a scale grid needs.
    #[error("kernel coverage: {0}")]
    Coverage(String),

    #[error("problem size {len} exceeds the limit {limit} of {operation}")]
    TooLarge {
        operation: &'static str,
        len: usize,
        limit: usize,
    },

    #[error("numerical failure: {0}")]
    Numerical(String),

    /// The kernel has ψ(0) ≈ 0, so the derivative-based inversion cannot divide by it.
    #[error("degenerate kernel: |psi(0)| = {0:e} is below tolerance")]
    DegenerateKernel(f64),

    #[error("configuration: {0}")]
    Config(String),

    /// The classical inversion needs a finite admissibility constant.
    #[error("kernel is not admissible: |psi_hat(0)| = {psi_hat_at_zero:e} (peak {peak:e})")]
    NotAdmissible { psi_hat_at_zero: f64, peak: f64 },

    #[error(
        "input is not analytic: negative-frequency fraction {fraction:e} exceeds {limit:e}; \
         apply analytic_projection first"
    )]
    NotAnalytic { fraction: f64, limit: f64 },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
