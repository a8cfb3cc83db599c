use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("genus {g} outside supported range 1..={max}")]
    GenusOutOfRange { g: usize, max: usize },

    #[error("genus mismatch: {left} vs {right}")]
    GenusMismatch { left: usize, right: usize },

    #[error("characteristic {0} is odd, an even characteristic is required")]
    OddCharacteristic(String),

    #[error("malformed characteristic: {0}")]
    MalformedCharacteristic(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid period matrix: {0}")]
    InvalidPeriodMatrix(String),

    #[error("invalid policy: {0}")]
    InvalidPolicy(String),

    #[error("tail bound needs radius {required}, cap is {cap}")]
    RadiusCapReached { required: u32, cap: u32 },

    #[error("exact arithmetic overflow in {0}")]
    Overflow(&'static str),

    /// A normalizing theta value is numerically zero.
    #[error("division by near-zero theta value {modulus:e} ({context})")]
    NearZeroDenominator { modulus: f64, context: String },

    /// Normalization of the evaluation matrix is impossible: the "only if"
    /// direction of the projective-basis criterion applies.
    #[error("vanishing theta-null(s) present: {0:?}; evaluation matrix cannot be normalized to M")]
    VanishingNull(Vec<String>),

    #[error("degenerate sampling: samples {0} and {1} coincide")]
    DegenerateSampling(usize, usize),

    #[error("{stage}: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<Error>,
    },

    #[error("invalid input: {0}")]
    Input(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn at_stage(stage: &'static str) -> impl FnOnce(Error) -> Error {
        move |source| Error::Stage {
            stage,
            source: Box::new(source),
        }
    }
}
