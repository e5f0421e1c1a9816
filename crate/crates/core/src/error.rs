use alloc::string::String;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("spin quantum number must satisfy 2j >= 1 (got 2j = {0})")]
    InvalidSpin(f64),
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("matrix is not Hermitian (max deviation {deviation:e})")]
    NotHermitian { deviation: f64 },
    #[error("state is not normalized (norm^2 = {norm_sqr})")]
    NotNormalized { norm_sqr: f64 },
    #[error("invalid density matrix: {0}")]
    InvalidDensity(String),
    #[error("invalid direction: theta = {theta}, phi = {phi}")]
    InvalidDirection { theta: f64, phi: f64 },
    #[error("invalid Hamiltonian: {0}")]
    InvalidHamiltonian(String),
    #[error("eigensolver did not converge after {sweeps} sweeps")]
    NoConvergence { sweeps: usize },
    #[error("invalid partition: {0}")]
    InvalidPartition(String),
    #[error("distributions live on different grids")]
    GridMismatch,
    #[error("grid polar breaks are not aligned with the requested region")]
    GridNotAligned,
    #[error("clipped negative mass {mass:e} exceeds tolerance")]
    ClippedMass { mass: f64 },
    #[error("multipole transfer coefficient of rank {rank} is numerically degenerate")]
    DegenerateTransfer { rank: usize },
    #[error("invalid measurement times: {0}")]
    InvalidTimes(String),
    #[error("qubit index {index} out of range for {n} qubits")]
    InvalidQubit { index: usize, n: usize },
    #[error("control and target must differ (both {0})")]
    SameQubit(usize),
    #[error("qubit count {0} outside the supported range 1..=24")]
    QubitCount(usize),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}
