//! Simulation of measurement-based quantum computation on resource states
//! in the 1D ℤ₂×ℤ₂ cluster phase: statevector engine, chain operators,
//! resource builders, variational energy, closed-form logical channels, the
//! measurement-pattern engine and depolarizing-noise trajectories.

pub mod channel;
pub mod engine;
pub mod noise;
pub mod pauli;
pub mod ptm;
pub mod rng;
pub mod states;
pub mod sv;
pub mod vqe;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("qubit count {0} outside 1..=24")]
    QubitCount(usize),
    #[error("site {site} out of range for {n} sites")]
    SiteOutOfRange { site: usize, n: usize },
    #[error("two-qubit gate on a single site {0}")]
    SiteCollision(usize),
    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("matrix for {0} is not unitary")]
    NotUnitary(String),
    #[error("matrix is not Hermitian")]
    NotHermitian,
    #[error("state has zero norm")]
    ZeroNorm,
    #[error("branch probability {0:e} below 1e-15 (inconsistent post-selection)")]
    ZeroBranch(f64),
    #[error("Pauli product picked up an imaginary phase")]
    ImaginaryPhase,
    #[error("chain length {0} must be odd")]
    EvenChain(usize),
    #[error("two-point separation {0} must be even")]
    OddSeparation(usize),
    #[error("map is not trace preserving")]
    NotTracePreserving,
    #[error("parse error: {0}")]
    Parse(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("string order parameter is zero: wire only, κ unbounded")]
    UnboundedKappa,
    #[error("post-selection retry cap of {0} attempts exceeded")]
    RetryCap(u64),
    #[error("invalid measurement pattern: {0}")]
    InvalidPattern(String),
    #[error("no accepted shots")]
    NoAcceptedShots,
}

pub type Result<T> = std::result::Result<T, Error>;

pub use sv::{StateVector, C64};
