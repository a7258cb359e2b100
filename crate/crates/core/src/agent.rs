//! Evacuee bodies and their move neighborhoods.
//!
//! An evacuee covers two adjacent cells. Its long (shoulder) axis is either
//! horizontal, parallel to the exit wall, or vertical. Translations across the
//! long axis are forward/backward steps; translations along it are sideways
//! steps; a rotation pivots the body a quarter turn about one of its cells.

use crate::grid::{Coord, RoomGeometry};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Orientation {
    /// Long axis horizontal: the evacuee faces the exit.
    AlongX,
    /// Long axis vertical: the evacuee faces sideways to the exit.
    AlongY,
}

impl Orientation {
    pub fn toggled(self) -> Self {
        match self {
            Orientation::AlongX => Orientation::AlongY,
            Orientation::AlongY => Orientation::AlongX,
        }
    }

    /// Unit step along the long axis.
    pub fn long_axis(self) -> (i32, i32) {
        match self {
            Orientation::AlongX => (1, 0),
            Orientation::AlongY => (0, 1),
        }
    }
}

/// Two occupied cells: `anchor` is the lower-left one.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Placement {
    pub anchor: Coord,
    pub orientation: Orientation,
}

impl Placement {
    pub const fn new(anchor: Coord, orientation: Orientation) -> Self {
        Self {
            anchor,
            orientation,
        }
    }

    pub fn cells(self) -> [Coord; 2] {
        let (dc, dr) = self.orientation.long_axis();
        [self.anchor, self.anchor.offset(dc, dr)]
    }

    pub fn translated(self, dcol: i32, drow: i32) -> Self {
        Self::new(self.anchor.offset(dcol, drow), self.orientation)
    }

    pub fn contains(self, c: Coord) -> bool {
        self.cells().contains(&c)
    }

    /// Both cells enterable (interior or exit).
    pub fn fits(self, geometry: &RoomGeometry) -> bool {
        self.cells().iter().all(|&c| !geometry.is_wall(c))
    }

    /// Both cells strictly inside the room.
    pub fn is_interior(self, geometry: &RoomGeometry) -> bool {
        self.cells().iter().all(|&c| geometry.is_interior(c))
    }

    pub fn touches_exit(self, geometry: &RoomGeometry) -> bool {
        self.cells().iter().any(|&c| geometry.is_exit(c))
    }

    /// The four quarter-turn placements in the fixed order
    /// (low-pivot CW, low-pivot CCW, high-pivot CW, high-pivot CCW), where
    /// "low" is the anchor cell and clockwise is taken with rows pointing up.
    pub fn rotations(self) -> [Placement; 4] {
        let Coord { col, row } = self.anchor;
        match self.orientation {
            Orientation::AlongX => {
                let v = Orientation::AlongY;
                [
                    Placement::new(Coord::new(col, row - 1), v),
                    Placement::new(Coord::new(col, row), v),
                    Placement::new(Coord::new(col + 1, row), v),
                    Placement::new(Coord::new(col + 1, row - 1), v),
                ]
            }
            Orientation::AlongY => {
                let h = Orientation::AlongX;
                [
                    Placement::new(Coord::new(col, row), h),
                    Placement::new(Coord::new(col - 1, row), h),
                    Placement::new(Coord::new(col - 1, row + 1), h),
                    Placement::new(Coord::new(col, row + 1), h),
                ]
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Evacuee {
    pub id: u32,
    pub placement: Placement,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum MoveClass {
    Stay,
    ForwardBackward,
    Sideways,
    Rotation,
}

/// A possible next placement together with how the body gets there.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Candidate {
    pub placement: Placement,
    pub class: MoveClass,
}

/// Unit translations in candidate order: +row, -row, +col, -col.
pub const TRANSLATIONS: [(i32, i32); 4] = [(0, 1), (0, -1), (1, 0), (-1, 0)];

fn translation_class(orientation: Orientation, step: (i32, i32)) -> MoveClass {
    if orientation.long_axis() == (step.0.abs(), step.1.abs()) {
        MoveClass::Sideways
    } else {
        MoveClass::ForwardBackward
    }
}

/// The von Neumann neighborhood: stay plus every wall-free unit translation.
/// Occupancy by other evacuees is not considered.
pub fn enumerate_translations(placement: Placement, geometry: &RoomGeometry) -> Vec<Candidate> {
    let mut out = Vec::with_capacity(5);
    out.push(Candidate {
        placement,
        class: MoveClass::Stay,
    });
    for step in TRANSLATIONS {
        let target = placement.translated(step.0, step.1);
        if target.fits(geometry) {
            out.push(Candidate {
                placement: target,
                class: translation_class(placement.orientation, step),
            });
        }
    }
    out
}

/// The rotation neighborhood: stay plus every wall-free quarter turn.
pub fn enumerate_rotations(placement: Placement, geometry: &RoomGeometry) -> Vec<Candidate> {
    let mut out = Vec::with_capacity(5);
    out.push(Candidate {
        placement,
        class: MoveClass::Stay,
    });
    out.extend(
        placement
            .rotations()
            .into_iter()
            .filter(|p| p.fits(geometry))
            .map(|p| Candidate {
                placement: p,
                class: MoveClass::Rotation,
            }),
    );
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::build_room;
    use std::collections::HashSet;

    fn at(col: i32, row: i32, o: Orientation) -> Placement {
        Placement::new(Coord::new(col, row), o)
    }

    fn cell_set(p: Placement) -> HashSet<Coord> {
        p.cells().into_iter().collect()
    }

    #[test]
    fn open_interior_translations() {
        let g = build_room(50, 4).unwrap();
        let cands = enumerate_translations(at(10, 10, Orientation::AlongX), &g);
        let classes: Vec<_> = cands.iter().map(|c| c.class).collect();
        assert_eq!(
            classes,
            vec![
                MoveClass::Stay,
                MoveClass::ForwardBackward,
                MoveClass::ForwardBackward,
                MoveClass::Sideways,
                MoveClass::Sideways
            ]
        );
        assert_eq!(cands[1].placement, at(10, 11, Orientation::AlongX));
        assert_eq!(cands[4].placement, at(9, 10, Orientation::AlongX));

        let cands = enumerate_translations(at(10, 10, Orientation::AlongY), &g);
        let classes: Vec<_> = cands.iter().map(|c| c.class).collect();
        assert_eq!(
            classes,
            vec![
                MoveClass::Stay,
                MoveClass::Sideways,
                MoveClass::Sideways,
                MoveClass::ForwardBackward,
                MoveClass::ForwardBackward
            ]
        );
    }

    #[test]
    fn wall_blocks_downward_translation() {
        let g = build_room(50, 4).unwrap();
        let cands = enumerate_translations(at(5, 0, Orientation::AlongX), &g);
        assert_eq!(cands.len(), 4);
        assert!(cands.iter().all(|c| c.placement.anchor.row >= 0));

        // Straddling the exit edge: one destination cell is wall.
        let cands = enumerate_translations(at(22, 0, Orientation::AlongX), &g);
        assert_eq!(cands.len(), 4);

        // Fully over the exit: the downward move is allowed.
        let cands = enumerate_translations(at(24, 0, Orientation::AlongX), &g);
        assert_eq!(cands.len(), 5);
        assert!(cands[2].placement.touches_exit(&g));
    }

    #[test]
    fn rotation_pivots() {
        let g = build_room(50, 4).unwrap();
        let cands = enumerate_rotations(at(10, 10, Orientation::AlongX), &g);
        assert_eq!(cands.len(), 5);
        let got: Vec<HashSet<Coord>> = cands[1..].iter().map(|c| cell_set(c.placement)).collect();
        let want: Vec<HashSet<Coord>> = [
            [(10, 9), (10, 10)],
            [(10, 10), (10, 11)],
            [(11, 10), (11, 11)],
            [(11, 9), (11, 10)],
        ]
        .iter()
        .map(|pair| pair.iter().map(|&(c, r)| Coord::new(c, r)).collect())
        .collect();
        for w in &want {
            assert!(got.contains(w), "missing {w:?}");
        }
        assert!(cands[1..].iter().all(|c| c.class == MoveClass::Rotation));
    }

    #[test]
    fn rotation_pivots_share_exactly_one_cell() {
        // Brute force: every perpendicular placement sharing exactly one cell
        // with the body is one of the four enumerated rotations.
        let g = build_room(20, 4).unwrap();
        for o in [Orientation::AlongX, Orientation::AlongY] {
            let body = at(8, 8, o);
            let mut brute = HashSet::new();
            for dc in -2..=2 {
                for dr in -2..=2 {
                    let p = at(8 + dc, 8 + dr, o.toggled());
                    if cell_set(p).intersection(&cell_set(body)).count() == 1 {
                        brute.insert(p);
                    }
                }
            }
            let enumerated: HashSet<Placement> = body.rotations().into_iter().collect();
            assert_eq!(brute, enumerated);
            assert!(enumerated.iter().all(|p| p.fits(&g)));
        }
    }

    #[test]
    fn bottom_row_rotations() {
        let g = build_room(50, 4).unwrap();
        let cands = enumerate_rotations(at(5, 0, Orientation::AlongX), &g);
        assert_eq!(cands.len(), 3);
        assert!(cands.iter().all(|c| c.placement.anchor.row >= 0));
    }

    #[test]
    fn corner_neighborhoods() {
        let g = build_room(50, 4).unwrap();
        let cands = enumerate_translations(at(0, 0, Orientation::AlongY), &g);
        assert_eq!(cands.len(), 3);
        let cands = enumerate_rotations(at(0, 0, Orientation::AlongY), &g);
        // Only the low-pivot clockwise and high-pivot counter-clockwise fit.
        assert_eq!(cands.len(), 3);
    }
}
