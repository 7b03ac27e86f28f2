use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch in {context}: expected {expected}, found {found}")]
    Dimension {
        context: String,
        expected: usize,
        found: usize,
    },
    #[error("invalid structure constants: {0}")]
    InvalidAlgebra(String),
    #[error("inner product is not symmetric positive definite: {0}")]
    InvalidInnerProduct(String),
    #[error("point outside chart domain: {0}")]
    ChartDomain(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("not a relative equilibrium: residual {residual:e} exceeds {threshold:e}")]
    NotRelativeEquilibrium { residual: f64, threshold: f64 },
    #[error("velocity is not in the momentum isotropy algebra (residual {0:e})")]
    VelocityNotInIsotropy(f64),
    #[error("numerical inconsistency: {0}")]
    Inconsistency(String),
    #[error("unknown model `{0}`")]
    UnknownModel(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

impl Error {
    pub(crate) fn dim(context: impl Into<String>, expected: usize, found: usize) -> Self {
        Error::Dimension {
            context: context.into(),
            expected,
            found,
        }
    }

    /// True for failures that signal disagreement between independent numerical routes.
    pub fn is_inconsistency(&self) -> bool {
        matches!(self, Error::Inconsistency(_))
    }
}

pub type Result<T> = std::result::Result<T, Error>;
