use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DpaError {
    #[error("invalid dimension: {0}")]
    InvalidDimension(String),

    #[error("matrix is not Hermitian (max deviation {deviation:e})")]
    NotHermitian { deviation: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// The requested cutoff leaves more probability outside the basis than allowed.
    #[error("cutoff {cutoff} truncates {tail_mass:e} of the state (limit {limit:e}); use at least {required_cutoff}")]
    Truncation {
        cutoff: usize,
        tail_mass: f64,
        limit: f64,
        required_cutoff: usize,
    },

    #[error("photon-number window n_max={n_max} exceeds the truncation guard {guard}")]
    WindowTooLarge { n_max: usize, guard: usize },

    #[error("zero normalization after photon addition")]
    ZeroNormalization,

    #[error("witness undefined: all four single-photon subspace populations vanish")]
    WitnessUndefined,

    #[error("NPT value {value} outside [0, 1] beyond tolerance")]
    NptOutOfRange { value: f64 },

    #[error("phase-space point outside the displacement convergence region (|beta|^2 = {beta_sq}, cutoff {cutoff}); use cutoff >= {suggested_cutoff}")]
    OutsideRegion {
        beta_sq: f64,
        cutoff: usize,
        suggested_cutoff: usize,
    },

    #[error("quadrature did not converge after {nodes} nodes per axis: last {last}, previous {previous}")]
    NonConvergence {
        nodes: usize,
        last: f64,
        previous: f64,
    },
}

pub type Result<T> = std::result::Result<T, DpaError>;
