use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("relation closes into a cycle through element {0}")]
    Cycle(usize),
    #[error("element index {index} out of range for a poset on {len} elements")]
    Index { index: usize, len: usize },
    #[error("invalid parameters: {0}")]
    Param(String),
    #[error("Hasse diagram is not a tree")]
    NotTree,
    #[error("poset is not {0}-saturated")]
    NotSaturated(usize),
    #[error("saturation needs {needed} new elements, budget is {budget}")]
    Budget { needed: usize, budget: usize },
    #[error("{what} exceeds the enumeration cap ({cap})")]
    Size { what: String, cap: u64 },
    #[error("witness set meets the {0} set of the vertex")]
    WitnessPlacement(&'static str),
    #[error("marker sequence is not a strictly nested chain")]
    NotChain,
    #[error("bad vertex at position {position} has no zone hit before the chain ends")]
    IncompleteString { position: usize },
    #[error("embedding carries no induced certification")]
    NotValidated,
    #[error("search budget exhausted: {0}")]
    Indeterminate(String),
    #[error("no eligible interval removal found; poset is not decomposable")]
    Undecomposable,
    #[error("parse error: {0}")]
    Parse(String),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn size_error(what: impl Into<String>, cap: u64) -> Error {
    Error::Size { what: what.into(), cap }
}
