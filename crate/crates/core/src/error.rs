use alloc::string::String;
use core::fmt;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// A dataset with no samples was supplied where at least one is required.
    EmptyDataset,
    /// A list argument was empty.
    EmptyInput(&'static str),
    DimensionMismatch { expected: usize, found: usize },
    /// Two parameter vectors do not have the same layer layout.
    ShapeMismatch,
    DuplicateLayer(String),
    MissingLayer(String),
    NonFiniteValue,
    InvalidLabel(f64),
    /// Relative distance against a zero-norm reference model.
    DegenerateReference,
    InvalidParameter { name: &'static str, value: f64 },
    InvalidConfig(String),
    TooManyEdges { edges: usize, max: usize },
    /// The bandwidth budget cannot meet a latency target.
    Infeasible(String),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::EmptyDataset => write!(f, "dataset is empty"),
            Error::EmptyInput(what) => write!(f, "{what} must not be empty"),
            Error::DimensionMismatch { expected, found } => {
                write!(f, "dimension mismatch: expected {expected}, found {found}")
            }
            Error::ShapeMismatch => write!(f, "parameter vectors have different layer layouts"),
            Error::DuplicateLayer(name) => write!(f, "duplicate layer name `{name}`"),
            Error::MissingLayer(name) => write!(f, "layer `{name}` not present in model"),
            Error::NonFiniteValue => write!(f, "non-finite parameter value"),
            Error::InvalidLabel(y) => write!(f, "label {y} is not -1 or +1"),
            Error::DegenerateReference => write!(f, "reference model has zero norm"),
            Error::InvalidParameter { name, value } => {
                write!(f, "invalid value {value} for `{name}`")
            }
            Error::InvalidConfig(msg) => write!(f, "invalid configuration: {msg}"),
            Error::TooManyEdges { edges, max } => {
                write!(f, "{edges} edges exceeds the exhaustive limit of {max}")
            }
            Error::Infeasible(msg) => write!(f, "infeasible: {msg}"),
        }
    }
}

impl core::error::Error for Error {}
