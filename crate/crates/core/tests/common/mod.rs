#![allow(dead_code)]

use edd_core::{Position, Room, TileKind};
use proptest::prelude::*;

/// Rooms of any legal size with mostly floor, some walls and content, a few
/// border doors and occasional locks.
pub fn arb_room() -> impl Strategy<Value = Room> {
    (3usize..=20, 3usize..=20).prop_flat_map(|(w, h)| {
        (
            proptest::collection::vec((0u8..100, 0u8..100), w * h),
            Just((w, h)),
        )
            .prop_map(|(cells, (w, h))| build(w, h, &cells, 3))
    })
}

/// Small rooms, whose pattern graphs stay small enough for brute force.
pub fn arb_small_room() -> impl Strategy<Value = Room> {
    (3usize..=7, 3usize..=7).prop_flat_map(|(w, h)| {
        (
            proptest::collection::vec((0u8..100, 0u8..100), w * h),
            Just((w, h)),
        )
            .prop_map(|(cells, (w, h))| build(w, h, &cells, 25))
    })
}

/// `door_pct` percent of border tiles become doors.
pub fn build(w: usize, h: usize, cells: &[(u8, u8)], door_pct: u8) -> Room {
    let mut tiles = Vec::with_capacity(w * h);
    let mut locks = Vec::with_capacity(w * h);
    for (i, &(k, l)) in cells.iter().enumerate() {
        let (r, c) = (i / w, i % w);
        let border = r == 0 || c == 0 || r + 1 == h || c + 1 == w;
        let kind = match k {
            _ if border && k >= 100 - door_pct => TileKind::Door,
            0..=54 => TileKind::Floor,
            55..=84 => TileKind::Wall,
            85..=91 => TileKind::Enemy,
            92..=96 => TileKind::Treasure,
            _ => TileKind::Floor,
        };
        tiles.push(kind);
        locks.push(kind != TileKind::Door && l < 5);
    }
    Room::from_tiles(w, h, tiles, locks).unwrap()
}

/// Orthogonal neighbours inside a `w` x `h` grid.
pub fn around(p: Position, w: usize, h: usize) -> Vec<Position> {
    let mut out = Vec::new();
    if p.row > 0 {
        out.push(Position::new(p.row - 1, p.col));
    }
    if p.col > 0 {
        out.push(Position::new(p.row, p.col - 1));
    }
    if p.col + 1 < w {
        out.push(Position::new(p.row, p.col + 1));
    }
    if p.row + 1 < h {
        out.push(Position::new(p.row + 1, p.col));
    }
    out
}

/// Breadth-first flood over passable tiles of one room.
pub fn flood_room(room: &Room, start: Position) -> Vec<bool> {
    let (w, h) = (room.width(), room.height());
    let mut seen = vec![false; w * h];
    if !room.tile(start).is_passable() {
        return seen;
    }
    let mut queue = std::collections::VecDeque::from([start]);
    seen[start.row * w + start.col] = true;
    while let Some(p) = queue.pop_front() {
        for n in around(p, w, h) {
            let i = n.row * w + n.col;
            if !seen[i] && room.tile(n).is_passable() {
                seen[i] = true;
                queue.push_back(n);
            }
        }
    }
    seen
}
