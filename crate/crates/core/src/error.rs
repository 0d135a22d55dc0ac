use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid graph: {0}")]
    InvalidGraph(String),

    #[error("graph is disconnected ({components} components)")]
    Disconnected { components: usize },

    #[error("invalid lattice: {0}")]
    InvalidLattice(String),

    #[error("periodic truncation with n = {n} creates a multiple edge or loop; use n >= {minimum}")]
    WrapAround { n: usize, minimum: usize },

    #[error("stage {0} does not exist")]
    NoSuchStage(usize),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("matrix of size {size} exceeds the dense limit {limit}")]
    SizeExceeded { size: usize, limit: usize },

    #[error("eigensolver did not converge after {iterations} iterations (off-diagonal residual {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },

    #[error("matrix function is singular at eigenvalue {eigenvalue:e}")]
    SingularMode { eigenvalue: f64 },

    #[error("non-finite potential value at vertex {0}")]
    NonFinitePotential(usize),

    #[error("ground state has a non-positive entry at vertex {vertex} ({value:e})")]
    NonPositiveGroundState { vertex: usize, value: f64 },

    #[error("stage too small: walks of {steps} steps need radius {needed}, stage has {available}")]
    StageTooSmall {
        steps: usize,
        needed: usize,
        available: usize,
    },

    #[error("vertex budget exceeded: {needed} vertices needed, budget {budget}")]
    VertexBudget { needed: usize, budget: usize },

    #[error("bound not applicable: {0}")]
    NotApplicable(String),

    #[error("band top violates E(p) <= E(0): E(0) = {e0}, E(p) = {ep} at p = {p:?}")]
    BandTopViolation { e0: f64, ep: f64, p: Vec<f64> },

    #[error("gauge construction refused: {0}")]
    GaugeRefused(String),

    #[error("io: {0}")]
    Io(#[from] std::io::Error),

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}
