//! Path queries across a dungeon.
//!
//! Paths move orthogonally between passable tiles and cross a connection
//! from one door to its paired door in a single step. Each heuristic is an
//! additive cost per entered tile, compared lexicographically as
//! `(primary, secondary)`:
//!
//! | heuristic    | primary                   | secondary           |
//! |--------------|---------------------------|---------------------|
//! | `Fastest`    | 1                         | 0                   |
//! | `Rewarding`  | 1                         | -1 per treasure     |
//! | `LessDanger` | 1 + `ENEMY_PENALTY`/enemy | 0                   |
//! | `MoreDanger` | 1                         | -1 per enemy        |
//!
//! Equal-cost frontiers are expanded lowest `(row, col, room)` first.

use alloc::collections::{BTreeMap, BinaryHeap};
use alloc::vec::Vec;
use core::cmp::Reverse;

use crate::dungeon::{Dungeon, DungeonError};
use crate::room::{Position, Room, RoomId, TileKind};

/// Extra cost for entering an enemy tile under `LessDanger`.
pub const ENEMY_PENALTY: u64 = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PathHeuristic {
    Fastest,
    Rewarding,
    LessDanger,
    MoreDanger,
}

impl PathHeuristic {
    pub const ALL: [PathHeuristic; 4] = [
        PathHeuristic::Fastest,
        PathHeuristic::Rewarding,
        PathHeuristic::LessDanger,
        PathHeuristic::MoreDanger,
    ];

    pub fn name(self) -> &'static str {
        match self {
            PathHeuristic::Fastest => "fastest",
            PathHeuristic::Rewarding => "rewarding",
            PathHeuristic::LessDanger => "less-danger",
            PathHeuristic::MoreDanger => "more-danger",
        }
    }

    pub fn from_name(name: &str) -> Option<PathHeuristic> {
        let name = name.to_ascii_lowercase().replace('_', "-");
        Self::ALL.into_iter().find(|h| h.name() == name)
    }

    /// Cost of stepping onto a tile of `kind`.
    pub fn step_cost(self, kind: TileKind) -> (u64, i64) {
        match (self, kind) {
            (PathHeuristic::LessDanger, TileKind::Enemy) => (1 + ENEMY_PENALTY, 0),
            (PathHeuristic::Rewarding, TileKind::Treasure) => (1, -1),
            (PathHeuristic::MoreDanger, TileKind::Enemy) => (1, -1),
            _ => (1, 0),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Location {
    pub room: RoomId,
    pub pos: Position,
}

impl Location {
    pub const fn new(room: RoomId, pos: Position) -> Self {
        Location { room, pos }
    }

    fn key(self) -> (usize, usize, RoomId) {
        (self.pos.row, self.pos.col, self.room)
    }
}

impl Dungeon {
    /// Optimal path from `from` to `to` (both included) under `heuristic`.
    pub fn find_path(
        &self,
        from: Location,
        to: Location,
        heuristic: PathHeuristic,
    ) -> Result<Vec<Location>, DungeonError> {
        for loc in [from, to] {
            let room = self
                .room(loc.room)
                .ok_or(DungeonError::UnknownRoom(loc.room))?;
            match room.get(loc.pos) {
                Some(kind) if kind.is_passable() => {}
                _ => {
                    return Err(DungeonError::NotPassable {
                        room: loc.room,
                        pos: loc.pos,
                    })
                }
            }
        }

        type Cost = (u64, i64);
        let mut best: BTreeMap<Location, Cost> = BTreeMap::new();
        let mut parent: BTreeMap<Location, Location> = BTreeMap::new();
        let mut heap = BinaryHeap::new();
        best.insert(from, (0, 0));
        heap.push(Reverse(((0u64, 0i64), from.key())));

        while let Some(Reverse((cost, key))) = heap.pop() {
            let here = Location::new(key.2, Position::new(key.0, key.1));
            if best.get(&here).is_some_and(|&c| c < cost) {
                continue;
            }
            if here == to {
                let mut path = alloc::vec![to];
                let mut cur = to;
                while let Some(&prev) = parent.get(&cur) {
                    path.push(prev);
                    cur = prev;
                }
                path.reverse();
                return Ok(path);
            }
            let room = self.room(here.room).expect("locations stay in the dungeon");
            let mut next: Vec<Location> = room
                .neighbors(here.pos)
                .filter(|&n| room.tile(n).is_passable())
                .map(|n| Location::new(here.room, n))
                .collect();
            if room.tile(here.pos) == TileKind::Door {
                if let Some((r, p)) = self.across(here.room, here.pos) {
                    next.push(Location::new(r, p));
                }
            }
            for n in next {
                let kind = self.room(n.room).unwrap().tile(n.pos);
                let step = heuristic.step_cost(kind);
                let c = (cost.0 + step.0, cost.1 + step.1);
                if best.get(&n).is_none_or(|&old| c < old) {
                    best.insert(n, c);
                    parent.insert(n, here);
                    heap.push(Reverse((c, n.key())));
                }
            }
        }
        Err(DungeonError::NoPath)
    }
}

/// Path between two tiles of a single room.
pub fn find_path_in_room(
    room: &Room,
    from: Position,
    to: Position,
    heuristic: PathHeuristic,
) -> Result<Vec<Position>, DungeonError> {
    let id = room.id();
    let dungeon = Dungeon::new().add_room(room.clone())?;
    let path = dungeon.find_path(Location::new(id, from), Location::new(id, to), heuristic)?;
    Ok(path.into_iter().map(|l| l.pos).collect())
}
