use thiserror::Error;

use crate::grid::Coord;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("cell ({}, {}) is a wall and has no floor-field value", .0.col, .0.row)]
    UndefinedCell(Coord),
    #[error("infeasible density: {0}")]
    Placement(String),
    /// A broken simulation invariant. Always a bug, never repaired.
    #[error("simulation invariant violated: {0}")]
    Invariant(String),
}
