//! Rooms: rectangular tile grids with a lock mask and border doors.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use thiserror::Error;

use crate::grid;

pub const MIN_SIDE: usize = 3;
pub const MAX_SIDE: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum TileKind {
    Floor,
    Wall,
    Enemy,
    Treasure,
    Door,
}

impl TileKind {
    /// Kinds a brush (or the mutation operator) may place.
    pub const PAINTABLE: [TileKind; 4] = [
        TileKind::Floor,
        TileKind::Wall,
        TileKind::Enemy,
        TileKind::Treasure,
    ];

    pub fn is_passable(self) -> bool {
        self != TileKind::Wall
    }

    pub fn symbol(self) -> char {
        match self {
            TileKind::Floor => 'f',
            TileKind::Wall => 'w',
            TileKind::Enemy => 'e',
            TileKind::Treasure => 't',
            TileKind::Door => 'd',
        }
    }

    pub fn from_symbol(c: char) -> Option<TileKind> {
        match c {
            'f' => Some(TileKind::Floor),
            'w' => Some(TileKind::Wall),
            'e' => Some(TileKind::Enemy),
            't' => Some(TileKind::Treasure),
            'd' => Some(TileKind::Door),
            _ => None,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            TileKind::Floor => "floor",
            TileKind::Wall => "wall",
            TileKind::Enemy => "enemy",
            TileKind::Treasure => "treasure",
            TileKind::Door => "door",
        }
    }

    pub fn from_name(name: &str) -> Option<TileKind> {
        [
            TileKind::Floor,
            TileKind::Wall,
            TileKind::Enemy,
            TileKind::Treasure,
            TileKind::Door,
        ]
        .into_iter()
        .find(|k| k.name().eq_ignore_ascii_case(name))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Position {
    pub row: usize,
    pub col: usize,
}

impl Position {
    pub const fn new(row: usize, col: usize) -> Self {
        Position { row, col }
    }
}

impl fmt::Display for Position {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.row, self.col)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct RoomId(pub u32);

impl fmt::Display for RoomId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RoomError {
    #[error("room {dimension} {value} is outside {MIN_SIDE}..={MAX_SIDE}")]
    DimensionOutOfRange {
        dimension: &'static str,
        value: usize,
    },
    #[error("position {0} is outside the room")]
    OutOfBounds(Position),
    #[error("doors cannot be painted; connect rooms instead")]
    InvalidBrush,
    #[error("door at {0} is not on the room border")]
    DoorNotOnBorder(Position),
    #[error("door at {0} cannot be locked")]
    LockedDoor(Position),
    #[error("expected {expected} tiles, got {found}")]
    TileCount { expected: usize, found: usize },
    #[error("line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: &'static str,
    },
    #[error("line {line}: header declares {expected} but body has {found}")]
    DimensionMismatch {
        line: usize,
        expected: &'static str,
        found: usize,
    },
}

/// Brush shapes available in the room editor.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Brush {
    Single,
    /// Center plus its four orthogonal neighbours.
    Cross,
}

impl Brush {
    /// Cells covered when the brush is centered on `center`. Cells that fall
    /// outside the room are dropped.
    pub fn cells(self, center: Position, width: usize, height: usize) -> Vec<Position> {
        let mut out = vec![center];
        if self == Brush::Cross {
            out.extend(grid::neighbors(center, width, height));
        }
        out
    }
}

/// A room of `width` x `height` tiles stored row-major.
///
/// Rooms are values: every editing operation returns a new room.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Room {
    id: RoomId,
    width: usize,
    height: usize,
    tiles: Vec<TileKind>,
    locks: Vec<bool>,
    doors: Vec<Position>,
}

fn check_side(dimension: &'static str, value: usize) -> Result<(), RoomError> {
    if (MIN_SIDE..=MAX_SIDE).contains(&value) {
        Ok(())
    } else {
        Err(RoomError::DimensionOutOfRange { dimension, value })
    }
}

impl Room {
    /// An empty room made only of floor tiles.
    pub fn new(width: usize, height: usize) -> Result<Room, RoomError> {
        check_side("width", width)?;
        check_side("height", height)?;
        Ok(Room {
            id: RoomId::default(),
            width,
            height,
            tiles: vec![TileKind::Floor; width * height],
            locks: vec![false; width * height],
            doors: Vec::new(),
        })
    }

    /// Builds a room from raw row-major tiles and locks, checking every room
    /// invariant. The door list is derived from the door tiles.
    pub fn from_tiles(
        width: usize,
        height: usize,
        tiles: Vec<TileKind>,
        locks: Vec<bool>,
    ) -> Result<Room, RoomError> {
        check_side("width", width)?;
        check_side("height", height)?;
        for len in [tiles.len(), locks.len()] {
            if len != width * height {
                return Err(RoomError::TileCount {
                    expected: width * height,
                    found: len,
                });
            }
        }
        let mut room = Room {
            id: RoomId::default(),
            width,
            height,
            tiles,
            locks,
            doors: Vec::new(),
        };
        for idx in 0..room.tiles.len() {
            let pos = room.position(idx);
            if room.tiles[idx] == TileKind::Door {
                if !room.is_border(pos) {
                    return Err(RoomError::DoorNotOnBorder(pos));
                }
                if room.locks[idx] {
                    return Err(RoomError::LockedDoor(pos));
                }
            }
        }
        room.refresh_doors();
        Ok(room)
    }

    pub fn with_id(mut self, id: RoomId) -> Room {
        self.id = id;
        self
    }

    pub fn id(&self) -> RoomId {
        self.id
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn len(&self) -> usize {
        self.tiles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tiles.is_empty()
    }

    pub fn tiles(&self) -> &[TileKind] {
        &self.tiles
    }

    pub fn locks(&self) -> &[bool] {
        &self.locks
    }

    /// Door positions in row-major order.
    pub fn doors(&self) -> &[Position] {
        &self.doors
    }

    pub fn contains(&self, pos: Position) -> bool {
        pos.row < self.height && pos.col < self.width
    }

    pub fn is_border(&self, pos: Position) -> bool {
        self.contains(pos)
            && (pos.row == 0
                || pos.col == 0
                || pos.row == self.height - 1
                || pos.col == self.width - 1)
    }

    pub fn index(&self, pos: Position) -> usize {
        pos.row * self.width + pos.col
    }

    pub fn position(&self, index: usize) -> Position {
        Position::new(index / self.width, index % self.width)
    }

    pub fn get(&self, pos: Position) -> Option<TileKind> {
        self.contains(pos).then(|| self.tiles[self.index(pos)])
    }

    /// Tile at `pos`. Panics when `pos` is out of bounds.
    pub fn tile(&self, pos: Position) -> TileKind {
        assert!(self.contains(pos), "position {pos} outside room");
        self.tiles[self.index(pos)]
    }

    pub fn is_locked(&self, pos: Position) -> bool {
        self.contains(pos) && self.locks[self.index(pos)]
    }

    pub fn positions(&self) -> impl Iterator<Item = Position> + '_ {
        (0..self.tiles.len()).map(move |i| self.position(i))
    }

    pub fn neighbors(&self, pos: Position) -> impl Iterator<Item = Position> {
        grid::neighbors(pos, self.width, self.height)
    }

    pub fn count(&self, kind: TileKind) -> usize {
        self.tiles.iter().filter(|&&t| t == kind).count()
    }

    pub fn passable_count(&self) -> usize {
        self.tiles.iter().filter(|t| t.is_passable()).count()
    }

    /// Genotype equality: same size and tiles. Locks and ids are ignored.
    pub fn same_genotype(&self, other: &Room) -> bool {
        self.width == other.width && self.height == other.height && self.tiles == other.tiles
    }

    fn check_in_bounds(&self, cells: &[Position]) -> Result<(), RoomError> {
        match cells.iter().find(|p| !self.contains(**p)) {
            Some(&p) => Err(RoomError::OutOfBounds(p)),
            None => Ok(()),
        }
    }

    /// Paints `kind` on every listed cell that is neither locked nor a door.
    /// With `lock` set, the painted cells are also locked.
    pub fn paint_tiles(
        &self,
        cells: &[Position],
        kind: TileKind,
        lock: bool,
    ) -> Result<Room, RoomError> {
        if kind == TileKind::Door {
            return Err(RoomError::InvalidBrush);
        }
        self.check_in_bounds(cells)?;
        let mut out = self.clone();
        for &pos in cells {
            let idx = out.index(pos);
            if out.locks[idx] || out.tiles[idx] == TileKind::Door {
                continue;
            }
            out.tiles[idx] = kind;
            if lock {
                out.locks[idx] = true;
            }
        }
        Ok(out)
    }

    /// Paints with a brush shape centered on `center`.
    pub fn paint_brush(
        &self,
        center: Position,
        brush: Brush,
        kind: TileKind,
        lock: bool,
    ) -> Result<Room, RoomError> {
        if !self.contains(center) {
            return Err(RoomError::OutOfBounds(center));
        }
        self.paint_tiles(&brush.cells(center, self.width, self.height), kind, lock)
    }

    /// Repaints the orthogonally connected region sharing the seed's kind.
    /// Locked and door tiles inside the region keep their kind.
    pub fn bucket_paint(&self, seed: Position, kind: TileKind) -> Result<Room, RoomError> {
        if kind == TileKind::Door {
            return Err(RoomError::InvalidBrush);
        }
        self.check_in_bounds(&[seed])?;
        let original = self.tile(seed);
        let region = grid::flood(self.width, self.height, [seed], |p| {
            self.tiles[self.index(p)] == original
        });
        let cells: Vec<Position> = region
            .iter()
            .enumerate()
            .filter(|(_, &r)| r)
            .map(|(i, _)| self.position(i))
            .collect();
        self.paint_tiles(&cells, kind, false)
    }

    /// Sets or clears the lock flag on cells. Door cells are skipped.
    pub fn lock_tiles(&self, cells: &[Position], locked: bool) -> Result<Room, RoomError> {
        self.check_in_bounds(cells)?;
        let mut out = self.clone();
        for &pos in cells {
            let idx = out.index(pos);
            if out.tiles[idx] != TileKind::Door {
                out.locks[idx] = locked;
            }
        }
        Ok(out)
    }

    pub(crate) fn tiles_mut(&mut self) -> &mut [TileKind] {
        &mut self.tiles
    }

    pub(crate) fn refresh_doors(&mut self) {
        self.doors = (0..self.tiles.len())
            .filter(|&i| self.tiles[i] == TileKind::Door)
            .map(|i| self.position(i))
            .collect();
    }

    /// Turns a border tile into a door, dropping any lock on it.
    pub(crate) fn place_door(&mut self, pos: Position) {
        let idx = self.index(pos);
        self.tiles[idx] = TileKind::Door;
        self.locks[idx] = false;
        self.refresh_doors();
    }

    pub(crate) fn remove_door(&mut self, pos: Position, restore: TileKind) {
        let idx = self.index(pos);
        self.tiles[idx] = restore;
        self.refresh_doors();
    }

    /// Forces doors and locked tiles to match `target`, and adopts its lock
    /// mask. Both rooms must have the same size.
    pub(crate) fn conform_to(&mut self, target: &Room) {
        debug_assert_eq!(self.tiles.len(), target.tiles.len());
        for i in 0..self.tiles.len() {
            let t = target.tiles[i];
            if target.locks[i] || t == TileKind::Door || self.tiles[i] == TileKind::Door {
                self.tiles[i] = t;
            }
        }
        self.locks.clone_from(&target.locks);
        self.refresh_doors();
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(row: usize, col: usize) -> Position {
        Position::new(row, col)
    }

    #[test]
    fn create_room_bounds() {
        let r = Room::new(3, 3).unwrap();
        assert_eq!(r.count(TileKind::Floor), 9);
        assert!(r.doors().is_empty());
        assert!(r.locks().iter().all(|l| !l));

        assert_eq!(Room::new(13, 7).unwrap().count(TileKind::Floor), 91);
        assert_eq!(
            Room::new(2, 5),
            Err(RoomError::DimensionOutOfRange {
                dimension: "width",
                value: 2
            })
        );
        assert!(matches!(
            Room::new(5, 21),
            Err(RoomError::DimensionOutOfRange {
                dimension: "height",
                ..
            })
        ));
    }

    #[test]
    fn paint_single_and_locked() {
        let r = Room::new(3, 3).unwrap();
        let r = r.paint_tiles(&[p(0, 0)], TileKind::Wall, true).unwrap();
        assert_eq!(r.tile(p(0, 0)), TileKind::Wall);
        assert!(r.is_locked(p(0, 0)));
        let r2 = r.paint_tiles(&[p(0, 0)], TileKind::Enemy, false).unwrap();
        assert_eq!(r2.tile(p(0, 0)), TileKind::Wall);
    }

    #[test]
    fn paint_errors() {
        let r = Room::new(3, 3).unwrap();
        assert_eq!(
            r.paint_tiles(&[p(0, 0)], TileKind::Door, false),
            Err(RoomError::InvalidBrush)
        );
        assert_eq!(
            r.paint_tiles(&[p(3, 0)], TileKind::Wall, false),
            Err(RoomError::OutOfBounds(p(3, 0)))
        );
    }

    #[test]
    fn cross_brush() {
        let r = Room::new(3, 3).unwrap();
        let r = r
            .paint_brush(p(1, 1), Brush::Cross, TileKind::Treasure, false)
            .unwrap();
        assert_eq!(r.count(TileKind::Treasure), 5);
        for q in [p(1, 1), p(0, 1), p(2, 1), p(1, 0), p(1, 2)] {
            assert_eq!(r.tile(q), TileKind::Treasure);
        }
        // At a corner the cross is clipped.
        let r = Room::new(3, 3)
            .unwrap()
            .paint_brush(p(0, 0), Brush::Cross, TileKind::Wall, false)
            .unwrap();
        assert_eq!(r.count(TileKind::Wall), 3);
    }

    #[test]
    fn bucket_whole_room() {
        let r = Room::new(3, 3).unwrap();
        let r = r.bucket_paint(p(1, 1), TileKind::Wall).unwrap();
        assert_eq!(r.count(TileKind::Wall), 9);
    }

    #[test]
    fn bucket_single_wall() {
        let r = Room::new(3, 3)
            .unwrap()
            .paint_tiles(&[p(1, 1)], TileKind::Wall, false)
            .unwrap();
        let r = r.bucket_paint(p(1, 1), TileKind::Floor).unwrap();
        assert_eq!(r.count(TileKind::Floor), 9);
    }

    #[test]
    fn bucket_skips_locked_tile() {
        // 5x5 room: a wall ring splits the centre 3x3 floor area from the
        // outer floor ring; one centre tile is a locked floor.
        let mut room = Room::new(5, 5).unwrap();
        let ring: Vec<Position> = (1..4)
            .flat_map(|c| [p(1, c), p(3, c)])
            .chain([p(2, 1), p(2, 3)])
            .collect();
        room = room.paint_tiles(&ring, TileKind::Wall, false).unwrap();
        room = room.lock_tiles(&[p(0, 2)], true).unwrap();
        let out = room.bucket_paint(p(0, 0), TileKind::Enemy).unwrap();

        // Independent oracle: breadth-first region over the pre-edit room.
        let mut region = alloc::collections::BTreeSet::new();
        let mut stack = vec![p(0, 0)];
        while let Some(q) = stack.pop() {
            if room.tile(q) != TileKind::Floor || !region.insert(q) {
                continue;
            }
            if q.row > 0 {
                stack.push(p(q.row - 1, q.col));
            }
            if q.col > 0 {
                stack.push(p(q.row, q.col - 1));
            }
            if q.row < 4 {
                stack.push(p(q.row + 1, q.col));
            }
            if q.col < 4 {
                stack.push(p(q.row, q.col + 1));
            }
        }
        assert_eq!(region.len(), 16);
        for q in room.positions() {
            let expected = if region.contains(&q) && q != p(0, 2) {
                TileKind::Enemy
            } else {
                room.tile(q)
            };
            assert_eq!(out.tile(q), expected, "at {q}");
        }
        assert_eq!(out.tile(p(2, 2)), TileKind::Floor);
    }

    #[test]
    fn doors_untouched_by_edits() {
        let mut tiles = vec![TileKind::Floor; 9];
        tiles[1] = TileKind::Door;
        let r = Room::from_tiles(3, 3, tiles, vec![false; 9]).unwrap();
        assert_eq!(r.doors(), &[p(0, 1)]);
        let r2 = r
            .paint_brush(p(1, 1), Brush::Cross, TileKind::Wall, true)
            .unwrap();
        assert_eq!(r2.tile(p(0, 1)), TileKind::Door);
        assert!(!r2.is_locked(p(0, 1)));
        let r3 = r2.bucket_paint(p(0, 1), TileKind::Wall).unwrap();
        assert_eq!(r3.doors(), r.doors());
    }

    #[test]
    fn from_tiles_rejects_inner_door() {
        let mut tiles = vec![TileKind::Floor; 9];
        tiles[4] = TileKind::Door;
        assert_eq!(
            Room::from_tiles(3, 3, tiles, vec![false; 9]),
            Err(RoomError::DoorNotOnBorder(p(1, 1)))
        );
    }

    #[test]
    fn genotype_equality_ignores_locks() {
        let a = Room::new(4, 4).unwrap();
        let b = a.lock_tiles(&[p(1, 1)], true).unwrap().with_id(RoomId(7));
        assert!(a.same_genotype(&b));
        assert_ne!(a, b);
    }
}
