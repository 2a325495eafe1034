use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("csv row {row}, column `{column}`: {message}")]
    Csv {
        row: usize,
        column: String,
        message: String,
    },
    #[error("duplicate requirement id `{0}`")]
    DuplicateId(String),
    #[error("invalid problem: {0}")]
    InvalidProblem(String),
    #[error("invalid permutation parameters: {0}")]
    InvalidParams(String),
    #[error("unknown node {0}")]
    UnknownNode(usize),
    #[error("malformed relocation target: {0}")]
    MalformedTarget(String),
    #[error("floorplan has no blocks")]
    EmptyFloorplan,
    #[error("degenerate boundary: {0}")]
    DegenerateBoundary(String),
    #[error("invalid layout document: {0}")]
    InvalidLayout(String),
    #[error("invalid search configuration: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// True for errors caused by bad user input rather than the environment.
    pub fn is_validation(&self) -> bool {
        !matches!(self, Error::Io(_))
    }
}
