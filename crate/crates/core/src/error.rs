use thiserror::Error;

/// Errors raised by the linear-algebra layer, the measurement calculi and
/// the scenario runner.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("factor label `{0}` appears more than once")]
    LabelCollision(String),

    #[error("unknown factor label `{0}`")]
    UnknownLabel(String),

    #[error("factor `{0}` must have a positive dimension")]
    ZeroDimension(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("layout mismatch: {0}")]
    LayoutMismatch(String),

    #[error("non-finite entry in {0}")]
    NonFinite(&'static str),

    #[error("vector is not normalized (norm {norm})")]
    NotNormalized { norm: f64 },

    #[error("cannot normalize a zero vector")]
    ZeroVector,

    #[error("invalid density operator: {0}")]
    InvalidDensity(String),

    #[error("map is not an isometry (max deviation {deviation:e})")]
    NotIsometry { deviation: f64 },

    #[error("vectors are not orthonormal: {0}")]
    NotOrthonormal(String),

    #[error("measurement on {0:?} is incomplete")]
    IncompleteMeasurement(Vec<String>),

    #[error("Kraus operators are not complete (max deviation {deviation:e})")]
    IncompleteKraus { deviation: f64 },

    #[error("unknown outcome `{0}`")]
    UnknownOutcome(String),

    #[error("duplicate outcome label `{0}`")]
    DuplicateOutcome(String),

    #[error("outcome `{outcome}` has probability {probability:e}; collapse is undefined")]
    UndefinedCollapse { outcome: String, probability: f64 },

    #[error("{outcomes} outcomes but {pointers} pointer states")]
    PointerCountMismatch { outcomes: usize, pointers: usize },

    #[error("projections overlap on factor `{0}`")]
    OverlappingProjections(String),

    #[error("statement `{0}` is not in the register alphabet")]
    UnknownStatement(String),

    #[error("no statement given for outcome `{0}`")]
    MissingStatement(String),

    #[error("empty outcome set")]
    EmptyOutcomes,

    #[error("invalid probability table: {0}")]
    InvalidTable(String),

    #[error("parameters ({alpha}, {beta}) do not satisfy alpha^2 + beta^2 = 1")]
    InvalidAmplitudes { alpha: f64, beta: f64 },

    #[error("grid value {0} is outside [0, 1]")]
    GridOutOfRange(f64),

    #[error("ill-formed scenario: {0}")]
    IllFormedScenario(String),

    #[error("unknown actor `{0}`")]
    UnknownActor(String),
}

pub type Result<T> = std::result::Result<T, Error>;
