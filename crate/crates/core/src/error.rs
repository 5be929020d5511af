use thiserror::Error;

/// Errors raised by the geometry, quadrature and bound computations.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("variable index {index} out of range for {n_vars} variables")]
    VariableOutOfRange { index: usize, n_vars: usize },

    #[error("level set is not compact: coefficient A[{index}] = {value} (need 0 <= A < 1)")]
    NonCompact { index: usize, value: f64 },

    #[error("complex Hessian is not positive definite (min eigenvalue {min_eig:e}, mean {mean_eig:e})")]
    NotStrictlyPsh { min_eig: f64, mean_eig: f64 },

    #[error("matrix is not Hermitian (asymmetry {asymmetry:e})")]
    NonHermitian { asymmetry: f64 },

    #[error("matrix is not complex symmetric (asymmetry {asymmetry:e})")]
    NotSymmetric { asymmetry: f64 },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("level set is not star-shaped about the center along this ray")]
    NotStarShaped,

    #[error("rho stays below the level up to radius {radius:e}")]
    NoRoot { radius: f64 },

    #[error("center is not inside the level set (rho(center) = {value} >= level {level})")]
    CenterOutside { value: f64, level: f64 },

    #[error("frame vector {index} is not tangent to the level set (relative residual {residual:e})")]
    FrameNotTangent { index: usize, residual: f64 },

    #[error("contact density changed sign (sample value {density:e})")]
    OrientationFlip { density: f64 },

    #[error("empty quadrature: sample count must be positive")]
    EmptySpec,

    #[error("product grid quadrature is only available for n = 1 (got n = {n})")]
    GridUnsupported { n: usize },

    #[error("point is off the level set (|rho - level| = {residual:e})")]
    NotOnSurface { residual: f64 },

    #[error("gradient of rho vanishes at this point")]
    DegenerateGradient,

    #[error("no index j satisfies the pointwise curvature condition; the max bound is withheld")]
    ConditionViolated,

    #[error("complex Hessian is not the identity (deviation {deviation:e})")]
    NotFlat { deviation: f64 },

    #[error("trial function conj(z_{j}) is numerically CR on the surface (D = {d:e} +/- {stderr:e})")]
    TrialIsCR { j: usize, d: f64, stderr: f64 },

    #[error("every trial function is numerically CR; nothing to estimate")]
    NoNonCRTrial,

    #[error("eigenvalue iteration did not converge")]
    NoConvergence,

    #[error("parse error at position {position}: {message}")]
    Parse { position: usize, message: String },

    #[error("configuration error for `{key}`: {message}")]
    Config { key: String, message: String },

    #[error("{stage}: {source}")]
    Stage {
        stage: &'static str,
        source: Box<Error>,
    },
}

impl Error {
    pub(crate) fn at(self, stage: &'static str) -> Error {
        Error::Stage {
            stage,
            source: Box::new(self),
        }
    }

    /// The innermost error, with stage wrappers removed.
    pub fn root(&self) -> &Error {
        match self {
            Error::Stage { source, .. } => source.root(),
            e => e,
        }
    }

    /// True for errors caused by user input rather than numerics.
    pub fn is_config(&self) -> bool {
        matches!(
            self.root(),
            Error::Parse { .. }
                | Error::Config { .. }
                | Error::NonCompact { .. }
                | Error::VariableOutOfRange { .. }
                | Error::EmptySpec
                | Error::GridUnsupported { .. }
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
