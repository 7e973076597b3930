//! Room files and dungeon manifests.
//!
//! A room file holds one room in the plain-text room format. A dungeon
//! manifest lists rooms, connections and the initial room:
//!
//! ```text
//! # comments start with '#'
//! room 1 entrance.room
//! room 2 hall.room
//! connect 1 2 6 2 0 2
//! initial 1
//! ```
//!
//! `connect` takes `<room> <row> <col> <room> <row> <col>`. Room paths are
//! relative to the manifest.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use edd_core::{Dungeon, DungeonError, Position, Room, RoomError, RoomId};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum FileError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Room { path: PathBuf, source: RoomError },
    #[error("{path}:{line}: {message}")]
    Manifest {
        path: PathBuf,
        line: usize,
        message: String,
    },
    #[error("{path}:{line}: {source}")]
    Dungeon {
        path: PathBuf,
        line: usize,
        source: DungeonError,
    },
}

fn io_error(path: &Path) -> impl FnOnce(std::io::Error) -> FileError + '_ {
    move |source| FileError::Io {
        path: path.to_path_buf(),
        source,
    }
}

pub fn read_room(path: &Path) -> Result<Room, FileError> {
    let text = fs::read_to_string(path).map_err(io_error(path))?;
    Room::parse(&text).map_err(|source| FileError::Room {
        path: path.to_path_buf(),
        source,
    })
}

pub fn write_room(path: &Path, room: &Room) -> Result<(), FileError> {
    fs::write(path, room.to_text()).map_err(io_error(path))
}

pub fn load_dungeon(path: &Path) -> Result<Dungeon, FileError> {
    let text = fs::read_to_string(path).map_err(io_error(path))?;
    let base = path.parent().unwrap_or(Path::new("."));
    let mut dungeon = Dungeon::new();
    let mut last_line = 0;
    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        last_line = line_no;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let bad = |message: &str| FileError::Manifest {
            path: path.to_path_buf(),
            line: line_no,
            message: message.to_string(),
        };
        let dungeon_err = |source| FileError::Dungeon {
            path: path.to_path_buf(),
            line: line_no,
            source,
        };
        let fields: Vec<&str> = line.split_whitespace().collect();
        let number = |s: &str| s.parse::<u32>().map_err(|_| bad("expected a number"));
        match fields[0] {
            "room" if fields.len() == 3 => {
                let id = RoomId(number(fields[1])?);
                let room = read_room(&base.join(fields[2]))?.with_id(id);
                dungeon = dungeon.add_room(room).map_err(dungeon_err)?;
            }
            "connect" if fields.len() == 7 => {
                let n: Vec<u32> = fields[1..]
                    .iter()
                    .map(|s| number(s))
                    .collect::<Result<_, _>>()?;
                let pos = |r: u32, c: u32| Position::new(r as usize, c as usize);
                dungeon = dungeon
                    .connect_rooms(RoomId(n[0]), pos(n[1], n[2]), RoomId(n[3]), pos(n[4], n[5]))
                    .map_err(dungeon_err)?;
            }
            "initial" if fields.len() == 2 => {
                let id = RoomId(number(fields[1])?);
                dungeon = dungeon.set_initial_room(id).map_err(dungeon_err)?;
            }
            "room" | "connect" | "initial" => return Err(bad("wrong number of fields")),
            _ => return Err(bad("unknown directive")),
        }
    }
    dungeon.validate().map_err(|source| FileError::Dungeon {
        path: path.to_path_buf(),
        line: last_line,
        source,
    })?;
    Ok(dungeon)
}

/// Writes `dungeon.txt` and one `room<id>.room` file per room into `dir`.
pub fn save_dungeon(dir: &Path, dungeon: &Dungeon) -> Result<PathBuf, FileError> {
    fs::create_dir_all(dir).map_err(io_error(dir))?;
    let mut manifest = String::new();
    for room in dungeon.rooms() {
        let name = format!("room{}.room", room.id().0);
        write_room(&dir.join(&name), room)?;
        writeln!(manifest, "room {} {}", room.id().0, name).unwrap();
    }
    for c in dungeon.connections() {
        writeln!(
            manifest,
            "connect {} {} {} {} {} {}",
            c.room_a.0, c.tile_a.row, c.tile_a.col, c.room_b.0, c.tile_b.row, c.tile_b.col
        )
        .unwrap();
    }
    if let Some(id) = dungeon.initial_room() {
        writeln!(manifest, "initial {}", id.0).unwrap();
    }
    let path = dir.join("dungeon.txt");
    fs::write(&path, manifest).map_err(io_error(&path))?;
    Ok(path)
}
