//! The synchronous update rule.
//!
//! Each step every evacuee reads the time-`t` configuration and forms an
//! intent: decide whether to turn (probability `r`), draw a candidate from
//! the matching neighborhood with softmax weights `exp(S / k)`, and apply the
//! sideways speed gate (a drawn sideways move survives with probability `v`,
//! otherwise the evacuee stays). A draw that lands on a footprint occupied by
//! someone else is retried once from scratch; a second failure means staying.
//! Movers that claim overlapping cells are resolved by a uniformly random
//! winner, after which all granted moves are applied at once and evacuees
//! touching an exit cell are removed.

use rand::seq::SliceRandom;
use rand::Rng;

use crate::agent::{
    enumerate_rotations, enumerate_translations, Candidate, Evacuee, MoveClass, Orientation,
    Placement,
};
use crate::error::{Error, Result};
use crate::grid::{Coord, FloorField, RoomGeometry};

pub const DEFAULT_K: f64 = 0.1;
pub const DEFAULT_MAX_STEPS: u64 = 1_000_000;

const MAX_CANDIDATES: usize = 5;
const EMPTY: u32 = u32::MAX;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Params {
    /// Probability of choosing the rotation neighborhood.
    pub r: f64,
    /// Relative sideways speed, used as the probability that a drawn
    /// sideways move is carried out.
    pub v: f64,
    /// Recognition noise (softmax temperature).
    pub k: f64,
    pub max_steps: u64,
}

impl Default for Params {
    fn default() -> Self {
        Self {
            r: 0.5,
            v: 0.33,
            k: DEFAULT_K,
            max_steps: DEFAULT_MAX_STEPS,
        }
    }
}

impl Params {
    pub fn new(r: f64, v: f64, k: f64, max_steps: u64) -> Result<Self> {
        let p = Self { r, v, k, max_steps };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.r) {
            return Err(Error::Config(format!(
                "r must lie in [0, 1], got {}",
                self.r
            )));
        }
        if !(self.v > 0.0 && self.v <= 1.0) {
            return Err(Error::Config(format!(
                "v must lie in (0, 1], got {}",
                self.v
            )));
        }
        if !(self.k > 0.0 && self.k.is_finite()) {
            return Err(Error::Config(format!("k must be positive, got {}", self.k)));
        }
        if self.max_steps == 0 {
            return Err(Error::Config("max_steps must be positive".into()));
        }
        Ok(())
    }

    pub fn with_r(self, r: f64) -> Self {
        Self { r, ..self }
    }

    pub fn with_v(self, v: f64) -> Self {
        Self { v, ..self }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Intent {
    pub id: u32,
    pub target: Placement,
    pub class: MoveClass,
}

impl Intent {
    pub fn stay(e: &Evacuee) -> Self {
        Self {
            id: e.id,
            target: e.placement,
            class: MoveClass::Stay,
        }
    }

    pub fn is_stay(&self) -> bool {
        self.class == MoveClass::Stay
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EscapeResult {
    pub escape_time: u64,
    pub completed: bool,
}

/// What happened during one step.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct StepOutcome {
    pub moved: usize,
    /// Evacuees removed this step together with the placement that reached
    /// the exit.
    pub escaped: Vec<(u32, Placement)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimState {
    time: u64,
    evacuees: Vec<Evacuee>,
    occupancy: Vec<u32>,
    slots: Vec<u32>,
    escaped: usize,
    initial: usize,
    size: i32,
}

impl SimState {
    /// Builds a state at time 0. Every placement must lie strictly inside the
    /// room, ids must be unique and bodies must not overlap.
    pub fn new(geometry: &RoomGeometry, evacuees: Vec<Evacuee>) -> Result<Self> {
        let mut occupancy = vec![EMPTY; geometry.cell_count()];
        let max_id = evacuees
            .iter()
            .map(|e| e.id as usize + 1)
            .max()
            .unwrap_or(0);
        let mut slots = vec![EMPTY; max_id];
        for (slot, e) in evacuees.iter().enumerate() {
            if e.id == EMPTY {
                return Err(Error::Config("evacuee id u32::MAX is reserved".into()));
            }
            if slots[e.id as usize] != EMPTY {
                return Err(Error::Config(format!("duplicate evacuee id {}", e.id)));
            }
            slots[e.id as usize] = slot as u32;
            if !e.placement.is_interior(geometry) {
                return Err(Error::Config(format!(
                    "evacuee {} is not inside the room: {:?}",
                    e.id, e.placement
                )));
            }
            for c in e.placement.cells() {
                let i = geometry.index(c).expect("interior cell");
                if occupancy[i] != EMPTY {
                    return Err(Error::Config(format!(
                        "evacuees {} and {} overlap at ({}, {})",
                        occupancy[i], e.id, c.col, c.row
                    )));
                }
                occupancy[i] = e.id;
            }
        }
        let initial = evacuees.len();
        Ok(Self {
            time: 0,
            evacuees,
            occupancy,
            slots,
            escaped: 0,
            initial,
            size: geometry.size(),
        })
    }

    pub fn time(&self) -> u64 {
        self.time
    }

    pub fn evacuees(&self) -> &[Evacuee] {
        &self.evacuees
    }

    pub fn escaped_count(&self) -> usize {
        self.escaped
    }

    pub fn initial_count(&self) -> usize {
        self.initial
    }

    pub fn is_empty(&self) -> bool {
        self.evacuees.is_empty()
    }

    pub fn evacuee(&self, id: u32) -> Option<&Evacuee> {
        match self.slots.get(id as usize) {
            Some(&slot) if slot != EMPTY => Some(&self.evacuees[slot as usize]),
            _ => None,
        }
    }

    fn stride(&self) -> usize {
        self.size as usize + 2
    }

    fn cell_index(&self, c: Coord) -> usize {
        (c.row + 1) as usize * self.stride() + (c.col + 1) as usize
    }

    /// Id of the evacuee covering `c`, if any.
    pub fn occupant(&self, c: Coord) -> Option<u32> {
        let range = -1..=self.size;
        if !range.contains(&c.col) || !range.contains(&c.row) {
            return None;
        }
        Some(self.occupancy[self.cell_index(c)]).filter(|&id| id != EMPTY)
    }

    /// True when a cell of `target` is held by an evacuee other than `id`.
    pub fn blocked_for(&self, id: u32, target: Placement) -> bool {
        target.cells().iter().any(|&c| {
            let who = self.occupancy[self.cell_index(c)];
            who != EMPTY && who != id
        })
    }

    /// Recomputes occupancy from the evacuee list and checks it against the
    /// incremental map, together with the no-overlap and conservation laws.
    pub fn check_invariants(&self, geometry: &RoomGeometry) -> Result<()> {
        if self.escaped + self.evacuees.len() != self.initial {
            return Err(Error::Invariant(format!(
                "conservation: {} escaped + {} present != {} initial",
                self.escaped,
                self.evacuees.len(),
                self.initial
            )));
        }
        let mut rebuilt = vec![EMPTY; geometry.cell_count()];
        for e in &self.evacuees {
            if !e.placement.is_interior(geometry) {
                return Err(Error::Invariant(format!(
                    "evacuee {} left the room interior",
                    e.id
                )));
            }
            for c in e.placement.cells() {
                let i = self.cell_index(c);
                if rebuilt[i] != EMPTY {
                    return Err(Error::Invariant(format!(
                        "evacuees {} and {} overlap at ({}, {})",
                        rebuilt[i], e.id, c.col, c.row
                    )));
                }
                rebuilt[i] = e.id;
            }
            if self.evacuee(e.id) != Some(e) {
                return Err(Error::Invariant(format!(
                    "slot table out of date for {}",
                    e.id
                )));
            }
        }
        if rebuilt != self.occupancy {
            return Err(Error::Invariant(
                "occupancy map disagrees with placements".into(),
            ));
        }
        Ok(())
    }
}

/// Cumulative softmax weights `exp((S_i - max S) / k)` in candidate order.
fn cumulative_weights(values: &[f64], k: f64) -> [f64; MAX_CANDIDATES] {
    debug_assert!(!values.is_empty() && values.len() <= MAX_CANDIDATES);
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut out = [0.0; MAX_CANDIDATES];
    let mut acc = 0.0;
    for (slot, &s) in out.iter_mut().zip(values) {
        acc += ((s - max) / k).exp();
        *slot = acc;
    }
    out
}

fn draw_index<R: Rng + ?Sized>(cumulative: &[f64], rng: &mut R) -> usize {
    let total = cumulative[cumulative.len() - 1];
    let u = rng.random::<f64>() * total;
    cumulative
        .iter()
        .position(|&c| u < c)
        .unwrap_or(cumulative.len() - 1)
}

/// Exact outcome distribution of [`select_candidate`]: softmax mass per
/// candidate, with the `1 - v` share of every sideways candidate moved onto
/// the stay candidate.
pub fn candidate_distribution(
    cands: &[Candidate],
    field: &FloorField,
    params: &Params,
) -> Result<Vec<f64>> {
    let values = cands
        .iter()
        .map(|c| field.placement_value(c.placement))
        .collect::<Result<Vec<_>>>()?;
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let weights: Vec<f64> = values
        .iter()
        .map(|s| ((s - max) / params.k).exp())
        .collect();
    let total: f64 = weights.iter().sum();
    let stay = cands
        .iter()
        .position(|c| c.class == MoveClass::Stay)
        .ok_or_else(|| Error::Config("candidate list has no stay option".into()))?;
    let mut probs = vec![0.0; cands.len()];
    for (i, (c, w)) in cands.iter().zip(&weights).enumerate() {
        let p = w / total;
        if c.class == MoveClass::Sideways {
            probs[i] += params.v * p;
            probs[stay] += (1.0 - params.v) * p;
        } else {
            probs[i] += p;
        }
    }
    Ok(probs)
}

/// Draws one candidate from `cands` (which must contain the stay option).
pub fn select_candidate<R: Rng + ?Sized>(
    cands: &[Candidate],
    field: &FloorField,
    params: &Params,
    rng: &mut R,
) -> Result<Candidate> {
    if cands.is_empty() || cands.len() > MAX_CANDIDATES {
        return Err(Error::Config(format!(
            "expected 1..=5 candidates, got {}",
            cands.len()
        )));
    }
    let stay = cands
        .iter()
        .find(|c| c.class == MoveClass::Stay)
        .copied()
        .ok_or_else(|| Error::Config("candidate list has no stay option".into()))?;
    let values = cands
        .iter()
        .map(|c| field.placement_value(c.placement))
        .collect::<Result<Vec<_>>>()?;
    let cumulative = cumulative_weights(&values, params.k);
    let chosen = cands[draw_index(&cumulative[..cands.len()], rng)];
    if chosen.class == MoveClass::Sideways && rng.random::<f64>() >= params.v {
        return Ok(stay);
    }
    Ok(chosen)
}

/// Precomputed neighborhood of one placement.
#[derive(Debug, Clone, Copy)]
struct Neighborhood {
    len: u8,
    targets: [Placement; MAX_CANDIDATES],
    classes: [MoveClass; MAX_CANDIDATES],
    cumulative: [f64; MAX_CANDIDATES],
}

impl Neighborhood {
    fn build(cands: &[Candidate], field: &FloorField, k: f64) -> Self {
        let values: Vec<f64> = cands
            .iter()
            .map(|c| {
                field
                    .placement_value(c.placement)
                    .expect("enumerated candidates fit")
            })
            .collect();
        let placeholder = cands[0].placement;
        let mut targets = [placeholder; MAX_CANDIDATES];
        let mut classes = [MoveClass::Stay; MAX_CANDIDATES];
        for (i, c) in cands.iter().enumerate() {
            targets[i] = c.placement;
            classes[i] = c.class;
        }
        Self {
            len: cands.len() as u8,
            targets,
            classes,
            cumulative: cumulative_weights(&values, k),
        }
    }
}

/// A room, its floor field and the per-placement candidate tables for a
/// fixed recognition noise `k`. Shared read-only by any number of runs.
#[derive(Debug, Clone)]
pub struct Engine {
    geometry: RoomGeometry,
    field: FloorField,
    k: f64,
    translations: Vec<Option<Neighborhood>>,
    rotations: Vec<Option<Neighborhood>>,
}

impl Engine {
    pub fn new(geometry: RoomGeometry, k: f64) -> Result<Self> {
        if !(k > 0.0 && k.is_finite()) {
            return Err(Error::Config(format!("k must be positive, got {k}")));
        }
        let field = FloorField::new(&geometry);
        let cells = geometry.cell_count();
        let mut translations = vec![None; 2 * cells];
        let mut rotations = vec![None; 2 * cells];
        for index in 0..cells {
            let anchor = geometry.coord(index);
            for orientation in [Orientation::AlongX, Orientation::AlongY] {
                let p = Placement::new(anchor, orientation);
                if !p.is_interior(&geometry) {
                    continue;
                }
                let slot = Self::slot(cells, p, index);
                translations[slot] = Some(Neighborhood::build(
                    &enumerate_translations(p, &geometry),
                    &field,
                    k,
                ));
                rotations[slot] = Some(Neighborhood::build(
                    &enumerate_rotations(p, &geometry),
                    &field,
                    k,
                ));
            }
        }
        Ok(Self {
            geometry,
            field,
            k,
            translations,
            rotations,
        })
    }

    fn slot(cells: usize, p: Placement, anchor_index: usize) -> usize {
        match p.orientation {
            Orientation::AlongX => anchor_index,
            Orientation::AlongY => cells + anchor_index,
        }
    }

    pub fn geometry(&self) -> &RoomGeometry {
        &self.geometry
    }

    pub fn field(&self) -> &FloorField {
        &self.field
    }

    pub fn k(&self) -> f64 {
        self.k
    }

    fn neighborhood(&self, p: Placement, turn: bool) -> &Neighborhood {
        let anchor = self
            .geometry
            .index(p.anchor)
            .expect("placement inside the grid");
        let slot = Self::slot(self.geometry.cell_count(), p, anchor);
        let table = if turn {
            &self.rotations
        } else {
            &self.translations
        };
        table[slot]
            .as_ref()
            .expect("evacuee placements stay inside the room")
    }

    /// Forms the evacuee's intent for this step against the time-`t` state.
    pub fn decide_intent<R: Rng + ?Sized>(
        &self,
        e: &Evacuee,
        state: &SimState,
        params: &Params,
        rng: &mut R,
    ) -> Intent {
        for _attempt in 0..2 {
            let turn = rng.random::<f64>() < params.r;
            let hood = self.neighborhood(e.placement, turn);
            let i = draw_index(&hood.cumulative[..hood.len as usize], rng);
            let class = hood.classes[i];
            match class {
                MoveClass::Stay => return Intent::stay(e),
                MoveClass::Sideways if rng.random::<f64>() >= params.v => return Intent::stay(e),
                _ => {}
            }
            let target = hood.targets[i];
            if !state.blocked_for(e.id, target) {
                return Intent {
                    id: e.id,
                    target,
                    class,
                };
            }
        }
        Intent::stay(e)
    }

    /// Advances `state` by one synchronous step.
    pub fn step<R: Rng + ?Sized>(
        &self,
        state: &mut SimState,
        params: &Params,
        rng: &mut R,
    ) -> Result<StepOutcome> {
        debug_assert_eq!(params.k, self.k, "engine built for a different k");
        let intents: Vec<Intent> = state
            .evacuees
            .iter()
            .map(|e| self.decide_intent(e, state, params, rng))
            .filter(|i| !i.is_stay())
            .collect();
        let granted = resolve_conflicts(intents, &self.geometry, rng);
        commit(state, &self.geometry, &granted)
    }

    /// Steps until the room is empty or `params.max_steps` is reached.
    pub fn run_until_empty<R: Rng + ?Sized>(
        &self,
        state: &mut SimState,
        params: &Params,
        rng: &mut R,
    ) -> Result<EscapeResult> {
        while !state.is_empty() && state.time < params.max_steps {
            self.step(state, params, rng)?;
        }
        Ok(EscapeResult {
            escape_time: state.time,
            completed: state.is_empty(),
        })
    }
}

/// Random-order greedy grant: movers are shuffled and each is granted unless
/// one of its target cells was already claimed by an earlier grant. Stay
/// intents are dropped.
pub fn resolve_conflicts<R: Rng + ?Sized>(
    mut intents: Vec<Intent>,
    geometry: &RoomGeometry,
    rng: &mut R,
) -> Vec<Intent> {
    intents.retain(|i| !i.is_stay());
    intents.shuffle(rng);
    let mut claimed = vec![false; geometry.cell_count()];
    intents.retain(|intent| {
        let cells = intent
            .target
            .cells()
            .map(|c| geometry.index(c).expect("target inside grid"));
        if cells.iter().any(|&i| claimed[i]) {
            return false;
        }
        for i in cells {
            claimed[i] = true;
        }
        true
    });
    intents
}

/// Applies granted moves simultaneously, removes evacuees that reached an
/// exit cell and advances time by one.
pub fn commit(
    state: &mut SimState,
    geometry: &RoomGeometry,
    granted: &[Intent],
) -> Result<StepOutcome> {
    let mut slots = Vec::with_capacity(granted.len());
    for intent in granted {
        if !intent.target.fits(geometry) {
            return Err(Error::Invariant(format!(
                "evacuee {} targets a wall: {:?}",
                intent.id, intent.target
            )));
        }
        let slot = match state.slots.get(intent.id as usize) {
            Some(&s) if s != EMPTY => s as usize,
            _ => return Err(Error::Invariant(format!("unknown evacuee {}", intent.id))),
        };
        for c in state.evacuees[slot].placement.cells() {
            let i = state.cell_index(c);
            if state.occupancy[i] != intent.id {
                return Err(Error::Invariant(format!(
                    "evacuee {} moved twice",
                    intent.id
                )));
            }
            state.occupancy[i] = EMPTY;
        }
        slots.push(slot);
    }

    let mut outcome = StepOutcome {
        moved: granted.len(),
        escaped: Vec::new(),
    };
    let mut leaving = Vec::new();
    for (intent, &slot) in granted.iter().zip(&slots) {
        state.evacuees[slot].placement = intent.target;
        if intent.target.touches_exit(geometry) {
            outcome.escaped.push((intent.id, intent.target));
            leaving.push(slot);
            continue;
        }
        for c in intent.target.cells() {
            let i = state.cell_index(c);
            if state.occupancy[i] != EMPTY {
                return Err(Error::Invariant(format!(
                    "evacuees {} and {} overlap at ({}, {}) after commit",
                    state.occupancy[i], intent.id, c.col, c.row
                )));
            }
            state.occupancy[i] = intent.id;
        }
    }

    if !leaving.is_empty() {
        for (id, _) in &outcome.escaped {
            state.slots[*id as usize] = EMPTY;
        }
        let slots_table = &state.slots;
        state
            .evacuees
            .retain(|e| slots_table[e.id as usize] != EMPTY);
        for (slot, e) in state.evacuees.iter().enumerate() {
            state.slots[e.id as usize] = slot as u32;
        }
        state.escaped += leaving.len();
    }
    state.time += 1;
    Ok(outcome)
}
