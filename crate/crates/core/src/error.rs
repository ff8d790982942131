use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("mismatch: {0}")]
    Mismatch(String),

    #[error("table entry {value} at position {position} is out of range for a codomain of size {cod}")]
    TableOutOfRange {
        position: usize,
        value: usize,
        cod: usize,
    },

    #[error("element {element} is out of range for a set of size {size}")]
    ElementOutOfRange { element: usize, size: usize },

    #[error("invalid labels: {0}")]
    Labels(String),

    #[error("outcome set of size {size} exceeds the fragment bound {bound}")]
    ExceedsBound { size: usize, bound: usize },

    #[error("invalid bound: {0}")]
    InvalidBound(String),

    #[error("measurement is not carried by the fragment: {0}")]
    NotCarried(String),

    #[error("payload rejected by family {family}: {reason}")]
    InvalidPayload { family: String, reason: String },

    #[error("effect algebra axiom violated: {0}")]
    EffectAlgebraAxiom(String),

    #[error("inconsistent presentation: {0}")]
    Presentation(String),

    #[error("family {0} does not enumerate its measurements")]
    NotEnumerable(String),

    #[error("{what} would need {needed} entries, above the cap of {cap}")]
    TooLarge {
        what: &'static str,
        needed: u128,
        cap: u128,
    },

    #[error("the fragment has no materialized pushforward table")]
    NotMaterialized,

    #[error("certificate: {0}")]
    Certificate(String),

    #[error(
        "state space has dimension {dim}, above the cap of {cap}; lower the bound or use fewer generators"
    )]
    DimensionCap { dim: usize, cap: usize },

    #[error("unbounded state space: {0}")]
    Unbounded(String),

    #[error("refused: {0}")]
    Refused(String),

    #[error("parse error: {0}")]
    Parse(String),
}
