use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("modulus must be positive")]
    ZeroModulus,

    #[error("{value} exceeds the supported bound {limit} for {what}")]
    TooLarge {
        what: &'static str,
        value: u64,
        limit: u64,
    },

    #[error("the unit group mod {0} is not cyclic")]
    NotCyclic(u64),

    #[error("{generator} does not generate the unit group mod {modulus}")]
    NotGenerator { generator: u64, modulus: u64 },

    #[error("{0} is not prime")]
    NotPrime(u64),

    #[error("character index {index} out of range for modulus {q} ({count} characters)")]
    CharacterOutOfRange { index: usize, q: u64, count: usize },

    #[error("the principal character mod {0} is not allowed here")]
    PrincipalCharacter(u64),

    #[error("{function} is undefined at {argument}")]
    Domain {
        function: &'static str,
        argument: f64,
    },

    #[error("invalid shift parameter: {0}")]
    InvalidShift(String),

    #[error("invalid polynomial: {0}")]
    InvalidPolynomial(String),

    #[error("truncation cutoff {cutoff} must be a multiple of q = {q} and at least 10q")]
    InvalidCutoff { cutoff: u64, q: u64 },

    #[error("query rejected: {0}")]
    InvalidQuery(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("{check} failed: deviation {deviation:e} exceeds tolerance {tolerance:e}")]
    ToleranceBreach {
        check: String,
        deviation: f64,
        tolerance: f64,
    },

    #[error("corrupt cache entry {path}: {reason}")]
    CorruptCache { path: String, reason: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    /// Errors caused by user input rather than by computation or I/O.
    pub fn is_validation(&self) -> bool {
        !matches!(
            self,
            Error::ToleranceBreach { .. }
                | Error::CorruptCache { .. }
                | Error::Io(_)
                | Error::Json(_)
                | Error::Csv(_)
        )
    }
}
