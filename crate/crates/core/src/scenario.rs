//! Initial conditions: the forward, sideways and turn scenarios.

use std::fmt;
use std::str::FromStr;

use rand::Rng;

use crate::agent::{Evacuee, Orientation, Placement};
use crate::dynamics::{Params, SimState};
use crate::error::{Error, Result};
use crate::grid::{Coord, RoomGeometry, DEFAULT_EXIT_WIDTH};

/// Consecutive rejected anchors after which placement gives up.
pub const MAX_CONSECUTIVE_REJECTIONS: u32 = 1_000_000;

/// Highest density covered by the experiments.
pub const MAX_SWEEP_DENSITY: f64 = 0.8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ScenarioKind {
    /// Everyone faces the exit and never turns.
    Forward,
    /// Everyone faces sideways to the exit and never turns.
    Sideways,
    /// Everyone starts facing the exit; turning happens with probability `r`.
    Turn,
}

impl ScenarioKind {
    pub const ALL: [ScenarioKind; 3] = [
        ScenarioKind::Forward,
        ScenarioKind::Sideways,
        ScenarioKind::Turn,
    ];

    pub fn initial_orientation(self) -> Orientation {
        match self {
            ScenarioKind::Forward | ScenarioKind::Turn => Orientation::AlongX,
            ScenarioKind::Sideways => Orientation::AlongY,
        }
    }

    /// Parameters actually used: the control scenarios force `r = 0`.
    pub fn effective_params(self, params: Params) -> Params {
        match self {
            ScenarioKind::Forward | ScenarioKind::Sideways => params.with_r(0.0),
            ScenarioKind::Turn => params,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            ScenarioKind::Forward => "forward",
            ScenarioKind::Sideways => "sideways",
            ScenarioKind::Turn => "turn",
        }
    }
}

impl fmt::Display for ScenarioKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ScenarioKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "forward" => Ok(ScenarioKind::Forward),
            "sideways" => Ok(ScenarioKind::Sideways),
            "turn" => Ok(ScenarioKind::Turn),
            other => Err(Error::Config(format!("unknown scenario '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InitConfig {
    pub size: i32,
    pub exit_width: i32,
    /// Fraction of interior cells covered by evacuees at t = 0.
    pub rho: f64,
    pub scenario: ScenarioKind,
    pub params: Params,
    pub seed: u64,
}

impl Default for InitConfig {
    fn default() -> Self {
        Self {
            size: 50,
            exit_width: DEFAULT_EXIT_WIDTH,
            rho: 0.5,
            scenario: ScenarioKind::Turn,
            params: Params::default(),
            seed: 0,
        }
    }
}

impl InitConfig {
    /// `floor(rho * L^2 / 2)`: each evacuee covers two cells.
    pub fn evacuee_count(&self) -> usize {
        let cells = (self.size as f64) * (self.size as f64);
        // Nudge so grid values like 0.29 do not floor one short.
        (self.rho * cells / 2.0 + 1e-9).floor() as usize
    }

    pub fn effective_params(&self) -> Params {
        self.scenario.effective_params(self.params)
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.rho) {
            return Err(Error::Config(format!(
                "rho must lie in [0, 1], got {}",
                self.rho
            )));
        }
        self.params.validate()
    }
}

/// Places `cfg.evacuee_count()` evacuees with the scenario's orientation by
/// rejection sampling uniform interior anchors.
pub fn place_evacuees<R: Rng + ?Sized>(
    cfg: &InitConfig,
    geometry: &RoomGeometry,
    rng: &mut R,
) -> Result<SimState> {
    cfg.validate()?;
    if geometry.size() != cfg.size {
        return Err(Error::Config(format!(
            "geometry size {} does not match config size {}",
            geometry.size(),
            cfg.size
        )));
    }
    let n = cfg.evacuee_count();
    let orientation = cfg.scenario.initial_orientation();
    let size = geometry.size();
    let stride = size as usize;
    let mut taken = vec![false; stride * stride];
    let mut evacuees = Vec::with_capacity(n);
    let mut rejections = 0u32;
    while evacuees.len() < n {
        let anchor = Coord::new(rng.random_range(0..size), rng.random_range(0..size));
        let placement = Placement::new(anchor, orientation);
        let free = placement.is_interior(geometry)
            && placement
                .cells()
                .iter()
                .all(|c| !taken[c.row as usize * stride + c.col as usize]);
        if !free {
            rejections += 1;
            if rejections >= MAX_CONSECUTIVE_REJECTIONS {
                return Err(Error::Placement(format!(
                    "placed {} of {} evacuees (rho = {}) before {} consecutive rejections",
                    evacuees.len(),
                    n,
                    cfg.rho,
                    MAX_CONSECUTIVE_REJECTIONS
                )));
            }
            continue;
        }
        rejections = 0;
        for c in placement.cells() {
            taken[c.row as usize * stride + c.col as usize] = true;
        }
        evacuees.push(Evacuee {
            id: evacuees.len() as u32,
            placement,
        });
    }
    SimState::new(geometry, evacuees)
}
