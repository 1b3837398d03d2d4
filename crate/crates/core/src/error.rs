use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("infinite moment: {0}")]
    InfiniteMoment(String),

    /// Net profit condition fails; the ruin probability is identically one.
    #[error("no positive drift (E G - E C = {drift}); psi == 1")]
    NoDrift { drift: f64 },

    #[error("no Lundberg coefficient: moment generating function is infinite for every t > 0")]
    NoLundbergCoefficient,

    #[error("tolerance not met: {0}")]
    ToleranceNotMet(String),

    #[error("law `{0}` has no density")]
    NoDensity(String),

    #[error("claim law has bounded support; use the Lundberg bound instead")]
    BoundedClaimSupport,

    #[error("linear system I - K is numerically singular")]
    SingularSystem,

    #[error("residual {residual:.3e} exceeds tolerance {tolerance:.3e} at {nodes} nodes")]
    ResidualTooLarge {
        residual: f64,
        tolerance: f64,
        nodes: usize,
    },

    #[error("no contraction certificate up to m = {m_max}")]
    NoCertificate { m_max: usize },

    #[error("grid too coarse: kernel row-sum defect {defect:.3e}")]
    GridTooCoarse { defect: f64 },

    #[error("premium law has mass at zero (F_G(0) = {mass}); the interest tail bound cannot vanish")]
    PositiveMassAtZeroPremium { mass: f64 },

    #[error("horizon search did not converge up to {cap} steps")]
    NonConvergent { cap: usize },

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),
}
