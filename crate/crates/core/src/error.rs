use thiserror::Error;

use crate::mesh::EdgeId;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid mesh: {0}")]
    InvalidMesh(String),

    #[error("edge {0} is not a mesh edge")]
    UnknownEdge(EdgeId),

    #[error("edge {0} lies on the boundary; cracks are made of interior edges")]
    BoundaryEdge(EdgeId),

    #[error("crack has {found} connected components, budget is {budget}")]
    ComponentBudget { found: usize, budget: usize },

    #[error("unknown extension policy `{0}`")]
    UnknownPolicy(String),

    #[error("field lives on a different DOF space than the one requested")]
    SpaceMismatch,

    #[error("target crack does not contain the source crack")]
    NotARefinement,

    #[error("boundary field has {found} values, mesh has {expected} vertices")]
    BoundaryFieldLength { expected: usize, found: usize },

    #[error("no Dirichlet DOF is available but nonzero boundary data was given")]
    NoDirichlet,

    #[error("linear solver did not converge (relative residual {residual:e} after {iterations} iterations)")]
    NotConverged { residual: f64, iterations: usize },

    #[error("matrix is not positive definite at pivot {0}")]
    NotPositiveDefinite(usize),

    #[error("solver failed on candidate {candidate} ({edges:?}): {source}")]
    Candidate {
        candidate: usize,
        edges: Vec<EdgeId>,
        #[source]
        source: Box<Error>,
    },

    #[error("candidate edge {0} does not touch the crack")]
    NotIncident(EdgeId),

    #[error("time {t} is outside [0, {end}]")]
    TimeOutOfRange { t: f64, end: f64 },

    #[error("invalid input: {0}")]
    Invalid(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
