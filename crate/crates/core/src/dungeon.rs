//! Dungeons: graphs of rooms joined through border doors.

use alloc::collections::{BTreeMap, VecDeque};
use alloc::vec::Vec;

use thiserror::Error;

use crate::grid;
use crate::room::{Position, Room, RoomId, TileKind};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DungeonError {
    #[error("room {0} does not exist")]
    UnknownRoom(RoomId),
    #[error("room {0} already exists")]
    DuplicateRoom(RoomId),
    #[error("a room cannot be connected to itself")]
    SelfLoop,
    #[error("tile {pos} of room {room} already holds a connection")]
    OccupiedEndpoint { room: RoomId, pos: Position },
    #[error("tile {pos} of room {room} is not a border tile")]
    NotBorder { room: RoomId, pos: Position },
    #[error("tile {pos} of room {room} is not passable")]
    NotPassable { room: RoomId, pos: Position },
    #[error("connection {0} does not exist")]
    UnknownConnection(usize),
    #[error("the dungeon has no initial room")]
    MissingInitialRoom,
    #[error("no path between the requested tiles")]
    NoPath,
    #[error("door {pos} of room {room} has no connection")]
    DanglingDoor { room: RoomId, pos: Position },
    #[error("replacement for room {0} must keep its size and doors")]
    IncompatibleReplacement(RoomId),
}

/// A bidirectional link between two door tiles of different rooms.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Connection {
    pub room_a: RoomId,
    pub tile_a: Position,
    pub room_b: RoomId,
    pub tile_b: Position,
    /// Tiles the doors replaced, restored when the connection goes away.
    replaced: [TileKind; 2],
}

impl Connection {
    /// The endpoint on `room` at `pos`, if this connection has one there.
    pub fn touches(&self, room: RoomId, pos: Position) -> bool {
        (self.room_a == room && self.tile_a == pos) || (self.room_b == room && self.tile_b == pos)
    }

    /// The tile on the other side of the endpoint (`room`, `pos`).
    pub fn across(&self, room: RoomId, pos: Position) -> Option<(RoomId, Position)> {
        if self.room_a == room && self.tile_a == pos {
            Some((self.room_b, self.tile_b))
        } else if self.room_b == room && self.tile_b == pos {
            Some((self.room_a, self.tile_a))
        } else {
            None
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct FeasibilityReport {
    pub feasible: bool,
    pub unreachable_rooms: Vec<RoomId>,
    pub unreachable_tiles: BTreeMap<RoomId, Vec<Position>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Dungeon {
    rooms: BTreeMap<RoomId, Room>,
    connections: Vec<Connection>,
    initial_room: Option<RoomId>,
}

impl Dungeon {
    pub fn new() -> Dungeon {
        Dungeon::default()
    }

    pub fn rooms(&self) -> impl Iterator<Item = &Room> {
        self.rooms.values()
    }

    pub fn room(&self, id: RoomId) -> Option<&Room> {
        self.rooms.get(&id)
    }

    pub fn room_count(&self) -> usize {
        self.rooms.len()
    }

    pub fn connections(&self) -> &[Connection] {
        &self.connections
    }

    pub fn initial_room(&self) -> Option<RoomId> {
        self.initial_room
    }

    fn get(&self, id: RoomId) -> Result<&Room, DungeonError> {
        self.rooms.get(&id).ok_or(DungeonError::UnknownRoom(id))
    }

    pub fn add_room(&self, room: Room) -> Result<Dungeon, DungeonError> {
        if self.rooms.contains_key(&room.id()) {
            return Err(DungeonError::DuplicateRoom(room.id()));
        }
        let mut out = self.clone();
        out.rooms.insert(room.id(), room);
        Ok(out)
    }

    /// Removes a room together with its connections. Peer rooms get their
    /// door tiles back as they were before the connection.
    pub fn remove_room(&self, id: RoomId) -> Result<Dungeon, DungeonError> {
        self.get(id)?;
        let mut out = self.clone();
        let mut idx = out.connections.len();
        while idx > 0 {
            idx -= 1;
            let c = &out.connections[idx];
            if c.room_a == id || c.room_b == id {
                out.drop_connection(idx);
            }
        }
        out.rooms.remove(&id);
        if out.initial_room == Some(id) {
            out.initial_room = None;
        }
        Ok(out)
    }

    fn check_endpoint(&self, room: RoomId, pos: Position) -> Result<(), DungeonError> {
        let r = self.get(room)?;
        if !r.is_border(pos) {
            return Err(DungeonError::NotBorder { room, pos });
        }
        if !r.tile(pos).is_passable() {
            return Err(DungeonError::NotPassable { room, pos });
        }
        if self.connections.iter().any(|c| c.touches(room, pos)) {
            return Err(DungeonError::OccupiedEndpoint { room, pos });
        }
        Ok(())
    }

    pub fn connect_rooms(
        &self,
        a: RoomId,
        tile_a: Position,
        b: RoomId,
        tile_b: Position,
    ) -> Result<Dungeon, DungeonError> {
        if a == b {
            return Err(DungeonError::SelfLoop);
        }
        self.check_endpoint(a, tile_a)?;
        self.check_endpoint(b, tile_b)?;
        let mut out = self.clone();
        let mut replaced = [TileKind::Floor; 2];
        for (slot, (id, pos)) in [(a, tile_a), (b, tile_b)].into_iter().enumerate() {
            let room = out.rooms.get_mut(&id).expect("checked above");
            let before = room.tile(pos);
            if before != TileKind::Door {
                replaced[slot] = before;
            }
            room.place_door(pos);
        }
        out.connections.push(Connection {
            room_a: a,
            tile_a,
            room_b: b,
            tile_b,
            replaced,
        });
        Ok(out)
    }

    pub fn disconnect(&self, index: usize) -> Result<Dungeon, DungeonError> {
        if index >= self.connections.len() {
            return Err(DungeonError::UnknownConnection(index));
        }
        let mut out = self.clone();
        out.drop_connection(index);
        Ok(out)
    }

    fn drop_connection(&mut self, index: usize) {
        let c = self.connections.remove(index);
        for (slot, (id, pos)) in [(c.room_a, c.tile_a), (c.room_b, c.tile_b)]
            .into_iter()
            .enumerate()
        {
            if let Some(room) = self.rooms.get_mut(&id) {
                room.remove_door(pos, c.replaced[slot]);
            }
        }
    }

    pub fn set_initial_room(&self, id: RoomId) -> Result<Dungeon, DungeonError> {
        self.get(id)?;
        let mut out = self.clone();
        out.initial_room = Some(id);
        Ok(out)
    }

    /// Swaps in an edited version of a room. The replacement must keep the
    /// room's size and door tiles so connections stay valid.
    pub fn replace_room(&self, room: Room) -> Result<Dungeon, DungeonError> {
        let old = self.get(room.id())?;
        if old.width() != room.width()
            || old.height() != room.height()
            || old.doors() != room.doors()
        {
            return Err(DungeonError::IncompatibleReplacement(room.id()));
        }
        let mut out = self.clone();
        out.rooms.insert(room.id(), room);
        Ok(out)
    }

    /// Checks that every door tile is the endpoint of exactly one connection.
    pub fn validate(&self) -> Result<(), DungeonError> {
        for room in self.rooms.values() {
            for &pos in room.doors() {
                if !self.connections.iter().any(|c| c.touches(room.id(), pos)) {
                    return Err(DungeonError::DanglingDoor {
                        room: room.id(),
                        pos,
                    });
                }
            }
        }
        Ok(())
    }

    /// The door on the other side of (`room`, `pos`), if it is connected.
    pub fn across(&self, room: RoomId, pos: Position) -> Option<(RoomId, Position)> {
        self.connections.iter().find_map(|c| c.across(room, pos))
    }

    /// Tiles the player starts from: the largest passable region of the
    /// initial room (ties go to the region reached first in row-major order).
    pub fn entry_tiles(&self) -> Result<Vec<Position>, DungeonError> {
        let id = self.initial_room.ok_or(DungeonError::MissingInitialRoom)?;
        let room = self.get(id)?;
        let (labels, count) =
            grid::components(room.width(), room.height(), |p| room.tile(p).is_passable());
        let mut sizes = alloc::vec![0usize; count];
        for l in labels.iter().flatten() {
            sizes[*l] += 1;
        }
        let Some(best) = (0..count).max_by_key(|&c| (sizes[c], core::cmp::Reverse(c))) else {
            return Ok(Vec::new());
        };
        Ok(labels
            .iter()
            .enumerate()
            .filter(|(_, l)| **l == Some(best))
            .map(|(i, _)| room.position(i))
            .collect())
    }

    /// Reachability over passable tiles from the initial room, crossing
    /// connections between paired doors.
    pub fn check_feasibility(&self) -> Result<FeasibilityReport, DungeonError> {
        let start = self.initial_room.ok_or(DungeonError::MissingInitialRoom)?;
        let mut reached: BTreeMap<RoomId, Vec<bool>> = self
            .rooms
            .iter()
            .map(|(&id, r)| (id, alloc::vec![false; r.len()]))
            .collect();
        let mut queue = VecDeque::new();
        for pos in self.entry_tiles()? {
            let room = &self.rooms[&start];
            reached.get_mut(&start).unwrap()[room.index(pos)] = true;
            queue.push_back((start, pos));
        }
        while let Some((id, pos)) = queue.pop_front() {
            let room = &self.rooms[&id];
            let mut next: Vec<(RoomId, Position)> = room
                .neighbors(pos)
                .filter(|&n| room.tile(n).is_passable())
                .map(|n| (id, n))
                .collect();
            if room.tile(pos) == TileKind::Door {
                next.extend(self.across(id, pos));
            }
            for (nid, n) in next {
                let r = &self.rooms[&nid];
                let seen = &mut reached.get_mut(&nid).unwrap()[r.index(n)];
                if !*seen && r.tile(n).is_passable() {
                    *seen = true;
                    queue.push_back((nid, n));
                }
            }
        }

        let mut report = FeasibilityReport::default();
        for (&id, room) in &self.rooms {
            let mask = &reached[&id];
            let missing: Vec<Position> = room
                .positions()
                .filter(|&p| room.tile(p).is_passable() && !mask[room.index(p)])
                .collect();
            if missing.is_empty() {
                continue;
            }
            if !mask.iter().any(|&m| m) {
                report.unreachable_rooms.push(id);
            }
            report.unreachable_tiles.insert(id, missing);
        }
        report.feasible =
            report.unreachable_rooms.is_empty() && report.unreachable_tiles.is_empty();
        Ok(report)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn room(id: u32, w: usize, h: usize) -> Room {
        Room::new(w, h).unwrap().with_id(RoomId(id))
    }

    fn p(r: usize, c: usize) -> Position {
        Position::new(r, c)
    }

    fn two_rooms() -> Dungeon {
        Dungeon::new()
            .add_room(room(1, 3, 3))
            .unwrap()
            .add_room(room(2, 3, 3))
            .unwrap()
    }

    #[test]
    fn add_two_rooms() {
        let d = two_rooms();
        assert_eq!(d.room_count(), 2);
        assert!(d.connections().is_empty());
        assert_eq!(
            d.add_room(room(1, 4, 4)),
            Err(DungeonError::DuplicateRoom(RoomId(1)))
        );
    }

    #[test]
    fn connect_marks_doors() {
        let d = two_rooms()
            .connect_rooms(RoomId(1), p(1, 2), RoomId(2), p(1, 0))
            .unwrap();
        assert_eq!(d.room(RoomId(1)).unwrap().tile(p(1, 2)), TileKind::Door);
        assert_eq!(d.room(RoomId(2)).unwrap().tile(p(1, 0)), TileKind::Door);
        assert_eq!(d.connections().len(), 1);
        d.validate().unwrap();
    }

    #[test]
    fn connect_errors() {
        let d = two_rooms();
        assert_eq!(
            d.connect_rooms(RoomId(1), p(0, 0), RoomId(1), p(2, 2)),
            Err(DungeonError::SelfLoop)
        );
        let d = d
            .connect_rooms(RoomId(1), p(1, 2), RoomId(2), p(1, 0))
            .unwrap();
        assert_eq!(
            d.connect_rooms(RoomId(1), p(1, 2), RoomId(2), p(0, 0)),
            Err(DungeonError::OccupiedEndpoint {
                room: RoomId(1),
                pos: p(1, 2)
            })
        );
        assert_eq!(
            d.connect_rooms(RoomId(1), p(1, 1), RoomId(2), p(0, 0)),
            Err(DungeonError::NotBorder {
                room: RoomId(1),
                pos: p(1, 1)
            })
        );
        let walled = d
            .replace_room(
                d.room(RoomId(2))
                    .unwrap()
                    .paint_tiles(&[p(0, 0)], TileKind::Wall, false)
                    .unwrap(),
            )
            .unwrap();
        assert_eq!(
            walled.connect_rooms(RoomId(1), p(0, 0), RoomId(2), p(0, 0)),
            Err(DungeonError::NotPassable {
                room: RoomId(2),
                pos: p(0, 0)
            })
        );
        assert_eq!(
            d.connect_rooms(RoomId(1), p(0, 0), RoomId(9), p(0, 0)),
            Err(DungeonError::UnknownRoom(RoomId(9)))
        );
    }

    #[test]
    fn remove_room_clears_peer_doors() {
        let d = Dungeon::new()
            .add_room(room(1, 3, 3))
            .unwrap()
            .add_room(room(2, 3, 3))
            .unwrap()
            .add_room(room(3, 3, 3))
            .unwrap()
            .connect_rooms(RoomId(1), p(1, 2), RoomId(2), p(1, 0))
            .unwrap()
            .connect_rooms(RoomId(3), p(0, 1), RoomId(2), p(2, 1))
            .unwrap();
        let d = d.remove_room(RoomId(2)).unwrap();
        assert!(d.connections().is_empty());
        assert!(d.room(RoomId(1)).unwrap().doors().is_empty());
        assert!(d.room(RoomId(3)).unwrap().doors().is_empty());
        assert_eq!(
            d.remove_room(RoomId(2)),
            Err(DungeonError::UnknownRoom(RoomId(2)))
        );
    }

    #[test]
    fn disconnect_restores_original() {
        let base = two_rooms();
        let base = base
            .replace_room(
                base.room(RoomId(1))
                    .unwrap()
                    .paint_tiles(&[p(0, 1)], TileKind::Enemy, false)
                    .unwrap(),
            )
            .unwrap();
        let d = base
            .connect_rooms(RoomId(1), p(0, 1), RoomId(2), p(2, 1))
            .unwrap();
        assert_eq!(d.disconnect(0).unwrap(), base);
    }

    #[test]
    fn initial_room_designation() {
        let d = two_rooms();
        let d = d.set_initial_room(RoomId(1)).unwrap();
        let d = d.set_initial_room(RoomId(2)).unwrap();
        assert_eq!(d.initial_room(), Some(RoomId(2)));
        assert_eq!(
            Dungeon::new().set_initial_room(RoomId(1)),
            Err(DungeonError::UnknownRoom(RoomId(1)))
        );
        let d = d.remove_room(RoomId(2)).unwrap();
        assert_eq!(d.initial_room(), None);
        assert_eq!(d.check_feasibility(), Err(DungeonError::MissingInitialRoom));
    }

    #[test]
    fn feasibility_cases() {
        let d = two_rooms()
            .connect_rooms(RoomId(1), p(1, 2), RoomId(2), p(1, 0))
            .unwrap()
            .set_initial_room(RoomId(1))
            .unwrap();
        let rep = d.check_feasibility().unwrap();
        assert!(rep.feasible);

        // Walled-off pocket at (0,2) of room 2.
        let r2 = d
            .room(RoomId(2))
            .unwrap()
            .paint_tiles(&[p(1, 2), p(2, 1), p(2, 2)], TileKind::Wall, false)
            .unwrap()
            .paint_tiles(&[p(0, 1), p(1, 1)], TileKind::Wall, false)
            .unwrap();
        let d2 = d.replace_room(r2).unwrap();
        let rep = d2.check_feasibility().unwrap();
        assert!(!rep.feasible);
        assert_eq!(rep.unreachable_tiles[&RoomId(2)], alloc::vec![p(0, 2)]);
        assert!(rep.unreachable_rooms.is_empty());

        let d3 = d.add_room(room(3, 4, 4)).unwrap();
        let rep = d3.check_feasibility().unwrap();
        assert!(!rep.feasible);
        assert_eq!(rep.unreachable_rooms, alloc::vec![RoomId(3)]);
        assert_eq!(rep.unreachable_tiles[&RoomId(3)].len(), 16);
    }
}
