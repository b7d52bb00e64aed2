use thiserror::Error;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch in {context}: expected {expected}, found {found}")]
    DimensionMismatch {
        context: &'static str,
        expected: usize,
        found: usize,
    },
    #[error("invalid sparse structure: {0}")]
    InvalidStructure(&'static str),
    #[error("matrix is singular (zero pivot at row {row})")]
    SingularMatrix { row: usize },
    #[error("zero diagonal entry at row {row}")]
    ZeroDiagonal { row: usize },
    #[error("zero pivot in ILU(0) factorization at row {row}")]
    ZeroPivot { row: usize },
    #[error("row {row} has no nonzero entries; lumped diagonal is singular")]
    SingularLumping { row: usize },
    #[error("invalid mesh specification: {0}")]
    InvalidMesh(&'static str),
    #[error("unsupported configuration: {0}")]
    UnsupportedConfiguration(&'static str),
    #[error("inverted or degenerate element {element} (det J = {det})")]
    DegenerateElement { element: usize, det: f64 },
    #[error("invalid configuration: {0}")]
    InvalidConfig(&'static str),
    #[error("slave dof {dof} belongs to node {node}, which is not aggregated")]
    UnaggregatedSlaveDof { dof: usize, node: usize },
    #[error("Lagrange multiplier node {node} was not reached by any interface row")]
    UnaggregatedLagrangeNode { node: usize },
    #[error("aggregation produced no aggregates (every node is constrained)")]
    EmptyAggregation,
}
