use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// A single input record is malformed or out of range.
    Record { line: usize, message: String },
    EmptyInput(&'static str),
    DimensionMismatch {
        what: &'static str,
        expected: usize,
        found: usize,
    },
    NegativeWeight { row: usize, col: usize, value: f64 },
    InvalidParameter(String),
    /// Ids that are not present in the graph.
    UnknownIds { kind: &'static str, ids: Vec<u64> },
    /// Dense inference would allocate more cells than allowed.
    MemoryBudget { needed: usize, limit: usize },
    /// The knapsack table for one type is larger than allowed.
    TableTooLarge { label: String, cells: usize, limit: usize },
    MissingCost { feature: u64 },
    /// Cosine similarity is undefined for an empty design.
    EmptyDesign,
    /// Degree filtering removed every node.
    EmptyCore,
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::Record { line, message } => write!(f, "line {line}: {message}"),
            Error::EmptyInput(what) => write!(f, "empty input: {what}"),
            Error::DimensionMismatch {
                what,
                expected,
                found,
            } => write!(f, "dimension mismatch in {what}: expected {expected}, found {found}"),
            Error::NegativeWeight { row, col, value } => {
                write!(f, "negative weight {value} at ({row}, {col})")
            }
            Error::InvalidParameter(msg) => write!(f, "invalid parameter: {msg}"),
            Error::UnknownIds { kind, ids } => {
                write!(f, "unknown {kind} id(s): ")?;
                for (n, id) in ids.iter().enumerate() {
                    if n > 0 {
                        f.write_str(", ")?;
                    }
                    write!(f, "{id}")?;
                }
                Ok(())
            }
            Error::MemoryBudget { needed, limit } => write!(
                f,
                "dense preference matrix needs {needed} cells, limit is {limit}; \
                 use the aggregated (sparse vector) pipeline instead"
            ),
            Error::TableTooLarge { label, cells, limit } => write!(
                f,
                "knapsack table for type '{label}' needs {cells} cells (limit {limit}); \
                 use greedy mode or a coarser cost resolution"
            ),
            Error::MissingCost { feature } => write!(f, "no cost given for feature {feature}"),
            Error::EmptyDesign => f.write_str("design has no features; cosine similarity undefined"),
            Error::EmptyCore => f.write_str("filtering thresholds leave an empty core"),
        }
    }
}

impl core::error::Error for Error {}
