//! Room geometry and the static floor field.
//!
//! The room is an `L x L` interior surrounded by a one-cell wall ring. Row 0 is
//! the interior row adjacent to the exit wall and rows grow away from it. The
//! exit is a contiguous run of cells in the bottom wall row (row `-1`); those
//! cells are enterable and an evacuee touching one of them leaves the room.
//!
//! Cells are addressed either by [`Coord`] or by a dense index into the
//! `(L + 2)^2` extended grid that includes the wall ring.

use crate::agent::Placement;
use crate::error::{Error, Result};

/// Physical edge length of one cell in meters. Recorded for output metadata;
/// the dynamics work purely in cell units.
pub const CELL_SIZE_M: f64 = 0.20;

/// Exit width used by every experiment in this crate.
pub const DEFAULT_EXIT_WIDTH: i32 = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Coord {
    pub col: i32,
    pub row: i32,
}

impl Coord {
    pub const fn new(col: i32, row: i32) -> Self {
        Self { col, row }
    }

    pub const fn offset(self, dcol: i32, drow: i32) -> Self {
        Self {
            col: self.col + dcol,
            row: self.row + drow,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CellKind {
    Interior,
    Wall,
    Exit,
}

impl CellKind {
    pub fn is_enterable(self) -> bool {
        !matches!(self, CellKind::Wall)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RoomGeometry {
    size: i32,
    exit_cells: Vec<Coord>,
    kinds: Vec<CellKind>,
}

impl RoomGeometry {
    /// Builds an `size x size` room with an exit of `exit_width` cells centered
    /// in the bottom wall. For even sizes the exit occupies columns
    /// `size/2 - exit_width/2 .. size/2 + exit_width/2 - 1`.
    pub fn new(size: i32, exit_width: i32) -> Result<Self> {
        if size < 4 {
            return Err(Error::Config(format!(
                "room size must be at least 4, got {size}"
            )));
        }
        if exit_width < 1 || exit_width > size {
            return Err(Error::Config(format!(
                "exit width must lie in 1..={size}, got {exit_width}"
            )));
        }
        let first = (size - exit_width) / 2;
        let exit_cells: Vec<Coord> = (first..first + exit_width)
            .map(|c| Coord::new(c, -1))
            .collect();

        let side = (size + 2) as usize;
        let mut kinds = vec![CellKind::Wall; side * side];
        for row in 0..size {
            for col in 0..size {
                kinds[(row as usize + 1) * side + col as usize + 1] = CellKind::Interior;
            }
        }
        for c in &exit_cells {
            kinds[(c.row + 1) as usize * side + (c.col + 1) as usize] = CellKind::Exit;
        }
        Ok(Self {
            size,
            exit_cells,
            kinds,
        })
    }

    /// Side length `L` of the interior.
    pub fn size(&self) -> i32 {
        self.size
    }

    /// Side length of the extended grid, `L + 2`.
    pub fn stride(&self) -> usize {
        self.size as usize + 2
    }

    /// Number of cells in the extended grid.
    pub fn cell_count(&self) -> usize {
        self.kinds.len()
    }

    pub fn exit_cells(&self) -> &[Coord] {
        &self.exit_cells
    }

    pub fn cell_size_m(&self) -> f64 {
        CELL_SIZE_M
    }

    pub fn in_extended(&self, c: Coord) -> bool {
        (-1..=self.size).contains(&c.col) && (-1..=self.size).contains(&c.row)
    }

    pub fn is_interior(&self, c: Coord) -> bool {
        (0..self.size).contains(&c.col) && (0..self.size).contains(&c.row)
    }

    /// Dense index of `c`, or `None` outside the extended grid.
    pub fn index(&self, c: Coord) -> Option<usize> {
        self.in_extended(c)
            .then(|| (c.row + 1) as usize * self.stride() + (c.col + 1) as usize)
    }

    pub fn coord(&self, index: usize) -> Coord {
        let stride = self.stride();
        Coord::new((index % stride) as i32 - 1, (index / stride) as i32 - 1)
    }

    /// Classification of any coordinate. Everything outside the extended grid
    /// counts as wall, which makes the classification total.
    pub fn kind(&self, c: Coord) -> CellKind {
        match self.index(c) {
            Some(i) => self.kinds[i],
            None => CellKind::Wall,
        }
    }

    pub fn kind_at(&self, index: usize) -> CellKind {
        self.kinds[index]
    }

    pub fn is_wall(&self, c: Coord) -> bool {
        self.kind(c) == CellKind::Wall
    }

    pub fn is_exit(&self, c: Coord) -> bool {
        self.kind(c) == CellKind::Exit
    }

    /// Midpoint of the exit segment in cell-center coordinates.
    pub fn exit_origin(&self) -> (f64, f64) {
        let n = self.exit_cells.len() as f64;
        let x = self.exit_cells.iter().map(|c| c.col as f64).sum::<f64>() / n;
        let y = self.exit_cells.iter().map(|c| c.row as f64).sum::<f64>() / n;
        (x, y)
    }
}

/// Static floor field: the negated Euclidean distance from each enterable
/// cell's center to the exit origin. Wall cells carry no value.
#[derive(Debug, Clone, PartialEq)]
pub struct FloorField {
    values: Vec<f64>,
    stride: usize,
    origin: (f64, f64),
}

impl FloorField {
    pub fn new(geometry: &RoomGeometry) -> Self {
        let origin = geometry.exit_origin();
        let values = (0..geometry.cell_count())
            .map(|i| {
                if geometry.kind_at(i).is_enterable() {
                    let c = geometry.coord(i);
                    -(c.col as f64 - origin.0).hypot(c.row as f64 - origin.1)
                } else {
                    f64::NAN
                }
            })
            .collect();
        Self {
            values,
            stride: geometry.stride(),
            origin,
        }
    }

    pub fn origin(&self) -> (f64, f64) {
        self.origin
    }

    fn index(&self, c: Coord) -> Option<usize> {
        let max = self.stride as i32 - 2;
        ((-1..=max).contains(&c.col) && (-1..=max).contains(&c.row))
            .then(|| (c.row + 1) as usize * self.stride + (c.col + 1) as usize)
    }

    /// Field value at `c`; `None` for walls and coordinates off the grid.
    pub fn get(&self, c: Coord) -> Option<f64> {
        self.index(c)
            .map(|i| self.values[i])
            .filter(|s| !s.is_nan())
    }

    /// Mean field value over both cells of a placement.
    pub fn placement_value(&self, placement: Placement) -> Result<f64> {
        let [a, b] = placement.cells();
        match (self.get(a), self.get(b)) {
            (Some(sa), Some(sb)) => Ok((sa + sb) / 2.0),
            (None, _) => Err(Error::UndefinedCell(a)),
            (_, None) => Err(Error::UndefinedCell(b)),
        }
    }
}

pub fn build_room(size: i32, exit_width: i32) -> Result<RoomGeometry> {
    RoomGeometry::new(size, exit_width)
}

pub fn compute_sff(geometry: &RoomGeometry) -> FloorField {
    FloorField::new(geometry)
}

pub fn sff_of_placement(field: &FloorField, placement: Placement) -> Result<f64> {
    field.placement_value(placement)
}
