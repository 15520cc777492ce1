use thiserror::Error;

/// Error type shared by every solver and audit in the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid potential: {0}")]
    InvalidPotential(String),

    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("integration failed at x = {abscissa}: spinor became non-finite")]
    IntegrationFailure { abscissa: f64 },

    #[error("not a scattering energy: |E| = {abs_energy} <= m = {mass}")]
    NotScatteringEnergy { abs_energy: f64, mass: f64 },

    #[error(
        "phase grid too coarse between E = {energy_lo} and E = {energy_hi}: \
         unwrapped step {jump} >= pi/2"
    )]
    GridTooCoarse {
        energy_lo: f64,
        energy_hi: f64,
        jump: f64,
    },

    #[error("degenerate threshold fit: |tan delta| is below the noise floor")]
    DegenerateFit,

    #[error("inconclusive edge classification: {0}")]
    InconclusiveClassification(String),

    #[error("level tracking failure in lambda range [{lambda_lo}, {lambda_hi}]: {detail}")]
    TrackingFailure {
        lambda_lo: f64,
        lambda_hi: f64,
        detail: String,
    },

    #[error("internal inconsistency: {0}")]
    InternalInconsistency(String),

    #[error("bad crossing bracket [{lambda_lo}, {lambda_hi}]: {detail}")]
    BadBracket {
        lambda_lo: f64,
        lambda_hi: f64,
        detail: String,
    },

    #[error("box counting violation: expected lowest admitted n = {expected}, found {found}")]
    CountingViolation { expected: usize, found: usize },

    #[error(
        "threshold extrapolation did not converge: {raw} is {distance} away \
         from the nearest pi/2 lattice point"
    )]
    NoConvergence { raw: f64, distance: f64 },

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
