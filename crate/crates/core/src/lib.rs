//! Cellular-automaton crowd evacuation with 1x2 rectangular evacuees.
//!
//! Evacuees occupy two adjacent cells and move toward a single four-cell exit
//! by forward/backward steps, slow sideways steps and quarter turns, guided by
//! a static floor field. The [`experiment`] module runs Monte-Carlo sweeps
//! over turning probability, sideways speed and density.

pub mod agent;
pub mod dynamics;
pub mod error;
pub mod experiment;
pub mod grid;
pub mod scenario;

pub use agent::{Candidate, Evacuee, MoveClass, Orientation, Placement};
pub use dynamics::{Engine, EscapeResult, Intent, Params, SimState, StepOutcome};
pub use error::{Error, Result};
pub use experiment::{RunStats, SweepAxis, SweepOptions, SweepResult};
pub use grid::{Coord, FloorField, RoomGeometry};
pub use scenario::{InitConfig, ScenarioKind};
