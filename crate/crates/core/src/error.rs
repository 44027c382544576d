use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("failed to parse network document: {0}")]
    Parse(String),
    #[error("duplicate {kind} id `{id}`")]
    DuplicateId { kind: &'static str, id: String },
    #[error("unknown vertex `{0}`")]
    UnknownVertex(String),
    #[error("edge `{edge}` has nonpositive {what} {value}")]
    NonPositive {
        edge: String,
        what: &'static str,
        value: f64,
    },
    #[error("edge `{0}` is a self-loop")]
    SelfLoop(String),
    #[error("network graph is disconnected")]
    Disconnected,
    #[error("vertex `{vertex}` has boundary data but degree {degree}")]
    BoundaryDegree { vertex: String, degree: usize },
    #[error("flow conservation violated at {}", format_residuals(.0))]
    FlowConservation(Vec<(String, f64)>),
    #[error("invalid boundary profile at `{vertex}`: {reason}")]
    Profile { vertex: String, reason: String },
    #[error("invalid mesh parameter: {0}")]
    MeshParameter(String),
    #[error("position {x} outside edge {edge} of length {length}")]
    OutsideEdge { edge: usize, x: f64, length: f64 },
    #[error("non-finite value while projecting on edge {edge} near x = {x}")]
    NonFinite { edge: usize, x: f64 },
    #[error("meshes are not nested: {0}")]
    NotNested(String),
    #[error("vector length {got} does not match space dimension {expected}")]
    Dimension { expected: usize, got: usize },
    #[error("linear solver failure: {0}")]
    Solver(String),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("time grids are incompatible: {0}")]
    TimeGrid(String),
    #[error("length mismatch: {0}")]
    LengthMismatch(String),
}

fn format_residuals(r: &[(String, f64)]) -> String {
    r.iter()
        .map(|(v, res)| format!("{v} (residual {res})"))
        .collect::<Vec<_>>()
        .join(", ")
}
