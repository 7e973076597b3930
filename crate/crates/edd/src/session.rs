//! Editor sessions.
//!
//! A [`Session`] turns protocol requests into dungeon edits and engine
//! commands, and engine events into protocol events. It holds no engine of
//! its own: [`run_session`] pairs it with an engine worker thread, and
//! [`serve`] accepts one editor client at a time over TCP.

use std::collections::VecDeque;
use std::io::{self, BufRead, BufReader, Write};
use std::net::{TcpListener, TcpStream};
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::mpsc::{self, Receiver, TryRecvError};
use std::sync::Arc;
use std::thread;

use edd_core::engine::{run_continuous, Pending, SinkFn};
use edd_core::{
    Archive, Brush, CommandSource, DimensionDescriptor, Dungeon, EngineCommand, EngineConfig,
    EngineEvent, Individual, PathHeuristic, Room, RoomId,
};
use serde::de::DeserializeOwned;
use serde::Deserialize;
use serde_json::{json, Value};

use crate::protocol::{
    tile_kind, DimensionJson, EliteJson, GridCellJson, Kind, LocationJson, RoomJson,
    SessionMessage, TileRef, SCHEMA_VERSION,
};

/// Ops a client may send.
pub const OPS: [&str; 20] = [
    "getDungeon",
    "addRoom",
    "removeRoom",
    "connectRooms",
    "disconnect",
    "setInitialRoom",
    "paintTiles",
    "bucketPaint",
    "lockTiles",
    "checkFeasibility",
    "findPath",
    "updateTarget",
    "setDimensions",
    "start",
    "stop",
    "requestSnapshot",
    "applySuggestion",
    "getSuggestions",
    "resync",
    "ping",
];

/// How many suggestions `getSuggestions` returns.
pub const SUGGESTIONS: usize = 6;

/// Where the engine's target comes from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum TargetSource {
    DungeonRoom(RoomId),
    Standalone,
}

/// The latest known elite grid.
#[derive(Debug, Clone, Default)]
struct Grid {
    descriptors: Vec<DimensionDescriptor>,
    elites: Vec<Option<Individual>>,
}

impl Grid {
    fn cell_index(&self, flat: usize) -> Vec<usize> {
        let mut index = vec![0; self.descriptors.len()];
        let mut rest = flat;
        for (k, d) in self.descriptors.iter().enumerate().rev() {
            index[k] = rest % d.granularity;
            rest /= d.granularity;
        }
        index
    }

    fn cell_json(&self, flat: usize) -> GridCellJson {
        GridCellJson {
            cell: flat,
            index: self.cell_index(flat),
            elite: self.elites[flat].as_ref().map(EliteJson::from_individual),
        }
    }

    fn full_json(&self) -> Vec<GridCellJson> {
        (0..self.elites.len()).map(|i| self.cell_json(i)).collect()
    }
}

fn descriptors_json(d: &[DimensionDescriptor]) -> Vec<DimensionJson> {
    d.iter().map(DimensionJson::from_descriptor).collect()
}

/// Result of handling one input: messages for the client and commands for
/// the engine, both in order.
#[derive(Debug, Default)]
pub struct Output {
    pub messages: Vec<SessionMessage>,
    pub commands: Vec<EngineCommand>,
}

type OpResult = Result<(Value, Vec<EngineCommand>), (&'static str, String)>;

fn bad(message: impl Into<String>) -> (&'static str, String) {
    ("bad-request", message.into())
}

fn args<T: DeserializeOwned>(payload: &Value) -> Result<T, (&'static str, String)> {
    let payload = if payload.is_null() {
        json!({})
    } else {
        payload.clone()
    };
    serde_json::from_value(payload).map_err(|e| bad(e.to_string()))
}

#[derive(Deserialize)]
struct IdArgs {
    id: u32,
}

#[derive(Deserialize)]
struct AddRoomArgs {
    id: Option<u32>,
    width: Option<usize>,
    height: Option<usize>,
    room: Option<RoomJson>,
}

#[derive(Deserialize)]
struct ConnectArgs {
    a: LocationJson,
    b: LocationJson,
}

#[derive(Deserialize)]
struct IndexArgs {
    index: usize,
}

#[derive(Deserialize)]
struct PaintArgs {
    room: u32,
    cells: Vec<TileRef>,
    tile: String,
    #[serde(default)]
    lock: bool,
    brush: Option<String>,
}

#[derive(Deserialize)]
struct BucketArgs {
    room: u32,
    row: usize,
    col: usize,
    tile: String,
}

#[derive(Deserialize)]
struct LockArgs {
    room: u32,
    cells: Vec<TileRef>,
    locked: bool,
}

#[derive(Deserialize)]
struct PathArgs {
    from: LocationJson,
    to: LocationJson,
    #[serde(default = "default_heuristic")]
    heuristic: String,
}

fn default_heuristic() -> String {
    "fastest".into()
}

#[derive(Deserialize)]
#[serde(rename_all = "camelCase")]
struct TargetArgs {
    room_id: Option<u32>,
    room: Option<RoomJson>,
}

#[derive(Deserialize)]
struct DimensionsArgs {
    dimensions: Vec<DimensionJson>,
}

#[derive(Deserialize)]
struct CellArgs {
    cell: usize,
}

pub struct Session {
    dungeon: Dungeon,
    target: Option<(TargetSource, Room)>,
    grid: Option<Grid>,
    /// Grid as the client last saw it, for incremental broadcasts.
    client_grid: Option<Grid>,
    pending_snapshots: VecDeque<u64>,
    event_seq: u64,
    last_generation: u64,
}

impl Default for Session {
    fn default() -> Self {
        Session::new()
    }
}

impl Session {
    pub fn new() -> Session {
        Session {
            dungeon: Dungeon::new(),
            target: None,
            grid: None,
            client_grid: None,
            pending_snapshots: VecDeque::new(),
            event_seq: 0,
            last_generation: 0,
        }
    }

    pub fn dungeon(&self) -> &Dungeon {
        &self.dungeon
    }

    pub fn target(&self) -> Option<&Room> {
        self.target.as_ref().map(|(_, r)| r)
    }

    /// The handshake event sent to a client on connect.
    pub fn hello(&mut self) -> SessionMessage {
        SessionMessage::event(
            "hello",
            0,
            0,
            json!({ "schemaVersion": SCHEMA_VERSION, "server": "edd", "ops": OPS }),
        )
    }

    fn next_event(&mut self, op: &str, generation: u64, payload: Value) -> Option<SessionMessage> {
        if generation <= self.last_generation {
            return None;
        }
        self.last_generation = generation;
        self.event_seq += 1;
        Some(SessionMessage::event(
            op,
            self.event_seq,
            generation,
            payload,
        ))
    }

    /// Handles one line sent by the client.
    pub fn handle_line(&mut self, line: &str) -> Output {
        let msg: SessionMessage = match serde_json::from_str(line) {
            Ok(m) => m,
            Err(e) => {
                return Output {
                    messages: vec![SessionMessage::error("", 0, "malformed", e.to_string())],
                    commands: Vec::new(),
                }
            }
        };
        if msg.kind != Kind::Request {
            return Output {
                messages: vec![SessionMessage::error(
                    &msg.op,
                    msg.seq,
                    "malformed",
                    "only requests can be sent to the server",
                )],
                commands: Vec::new(),
            };
        }
        if msg.op == "requestSnapshot" {
            if self.target.is_none() {
                return self.fail(&msg, ("no-target", "no target room has been set".into()));
            }
            self.pending_snapshots.push_back(msg.seq);
            return Output {
                messages: Vec::new(),
                commands: vec![EngineCommand::RequestSnapshot],
            };
        }
        match self.dispatch(&msg.op, &msg.payload) {
            Ok((payload, commands)) => Output {
                messages: vec![SessionMessage::response(&msg.op, msg.seq, payload)],
                commands,
            },
            Err(e) => self.fail(&msg, e),
        }
    }

    fn fail(&self, msg: &SessionMessage, (code, message): (&'static str, String)) -> Output {
        Output {
            messages: vec![SessionMessage::error(&msg.op, msg.seq, code, message)],
            commands: Vec::new(),
        }
    }

    fn dungeon_json(&self) -> Value {
        let rooms: Vec<RoomJson> = self.dungeon.rooms().map(RoomJson::from_room).collect();
        let connections: Vec<Value> = self
            .dungeon
            .connections()
            .iter()
            .map(|c| {
                json!({
                    "a": LocationJson { room: c.room_a.0, row: c.tile_a.row, col: c.tile_a.col },
                    "b": LocationJson { room: c.room_b.0, row: c.tile_b.row, col: c.tile_b.col },
                })
            })
            .collect();
        json!({
            "rooms": rooms,
            "connections": connections,
            "initialRoom": self.dungeon.initial_room().map(|r| r.0),
        })
    }

    fn set_dungeon(&mut self, dungeon: Dungeon) {
        self.dungeon = dungeon;
        if let Some((TargetSource::DungeonRoom(id), _)) = self.target {
            if self.dungeon.room(id).is_none() {
                self.target = None;
            }
        }
    }

    fn room(&self, id: u32) -> Result<&Room, (&'static str, String)> {
        self.dungeon
            .room(RoomId(id))
            .ok_or_else(|| ("unknown-room", format!("room {id} does not exist")))
    }

    fn edit_room(&mut self, room: Room) -> OpResult {
        let d = self
            .dungeon
            .replace_room(room.clone())
            .map_err(|e| bad(e.to_string()))?;
        self.set_dungeon(d);
        Ok((json!({ "room": RoomJson::from_room(&room) }), Vec::new()))
    }

    fn dispatch(&mut self, op: &str, payload: &Value) -> OpResult {
        let dungeon_err = |e: edd_core::DungeonError| bad(e.to_string());
        match op {
            "ping" => Ok((json!({}), Vec::new())),
            "getDungeon" => Ok((self.dungeon_json(), Vec::new())),
            "addRoom" => {
                let a: AddRoomArgs = args(payload)?;
                let room = match (a.room, a.width, a.height) {
                    (Some(r), _, _) => r.to_room().map_err(bad)?,
                    (None, Some(w), Some(h)) => Room::new(w, h).map_err(|e| bad(e.to_string()))?,
                    _ => return Err(bad("addRoom needs `room` or `width` and `height`")),
                };
                let id = a.id.map(RoomId).unwrap_or_else(|| {
                    RoomId(
                        self.dungeon
                            .rooms()
                            .map(|r| r.id().0 + 1)
                            .max()
                            .unwrap_or(1),
                    )
                });
                let room = room.with_id(id);
                let d = self.dungeon.add_room(room.clone()).map_err(dungeon_err)?;
                self.set_dungeon(d);
                Ok((json!({ "room": RoomJson::from_room(&room) }), Vec::new()))
            }
            "removeRoom" => {
                let a: IdArgs = args(payload)?;
                let d = self
                    .dungeon
                    .remove_room(RoomId(a.id))
                    .map_err(dungeon_err)?;
                self.set_dungeon(d);
                Ok((json!({}), Vec::new()))
            }
            "connectRooms" => {
                let a: ConnectArgs = args(payload)?;
                let d = self
                    .dungeon
                    .connect_rooms(
                        RoomId(a.a.room),
                        TileRef {
                            row: a.a.row,
                            col: a.a.col,
                        }
                        .into(),
                        RoomId(a.b.room),
                        TileRef {
                            row: a.b.row,
                            col: a.b.col,
                        }
                        .into(),
                    )
                    .map_err(dungeon_err)?;
                self.set_dungeon(d);
                Ok((
                    json!({ "index": self.dungeon.connections().len() - 1 }),
                    Vec::new(),
                ))
            }
            "disconnect" => {
                let a: IndexArgs = args(payload)?;
                let d = self.dungeon.disconnect(a.index).map_err(dungeon_err)?;
                self.set_dungeon(d);
                Ok((json!({}), Vec::new()))
            }
            "setInitialRoom" => {
                let a: IdArgs = args(payload)?;
                let d = self
                    .dungeon
                    .set_initial_room(RoomId(a.id))
                    .map_err(dungeon_err)?;
                self.set_dungeon(d);
                Ok((json!({}), Vec::new()))
            }
            "paintTiles" => {
                let a: PaintArgs = args(payload)?;
                let kind = tile_kind(&a.tile).map_err(bad)?;
                let room = self.room(a.room)?;
                let cells: Vec<_> = a.cells.iter().map(|&c| c.into()).collect();
                let painted = match a.brush.as_deref() {
                    None | Some("single") => room.paint_tiles(&cells, kind, a.lock),
                    Some("cross") => cells.iter().try_fold(room.clone(), |r, &c| {
                        r.paint_brush(c, Brush::Cross, kind, a.lock)
                    }),
                    Some(other) => return Err(bad(format!("unknown brush `{other}`"))),
                }
                .map_err(|e| bad(e.to_string()))?;
                self.edit_room(painted)
            }
            "bucketPaint" => {
                let a: BucketArgs = args(payload)?;
                let kind = tile_kind(&a.tile).map_err(bad)?;
                let painted = self
                    .room(a.room)?
                    .bucket_paint(
                        TileRef {
                            row: a.row,
                            col: a.col,
                        }
                        .into(),
                        kind,
                    )
                    .map_err(|e| bad(e.to_string()))?;
                self.edit_room(painted)
            }
            "lockTiles" => {
                let a: LockArgs = args(payload)?;
                let cells: Vec<_> = a.cells.iter().map(|&c| c.into()).collect();
                let locked = self
                    .room(a.room)?
                    .lock_tiles(&cells, a.locked)
                    .map_err(|e| bad(e.to_string()))?;
                self.edit_room(locked)
            }
            "checkFeasibility" => {
                let report = self.dungeon.check_feasibility().map_err(dungeon_err)?;
                let tiles: Vec<Value> = report
                    .unreachable_tiles
                    .iter()
                    .map(|(id, ps)| {
                        let cells: Vec<TileRef> = ps.iter().map(|&p| p.into()).collect();
                        json!({ "room": id.0, "cells": cells })
                    })
                    .collect();
                let rooms: Vec<u32> = report.unreachable_rooms.iter().map(|r| r.0).collect();
                Ok((
                    json!({
                        "feasible": report.feasible,
                        "unreachableRooms": rooms,
                        "unreachableTiles": tiles,
                    }),
                    Vec::new(),
                ))
            }
            "findPath" => {
                let a: PathArgs = args(payload)?;
                let h = PathHeuristic::from_name(&a.heuristic)
                    .ok_or_else(|| bad(format!("unknown heuristic `{}`", a.heuristic)))?;
                let path = self
                    .dungeon
                    .find_path(a.from.into(), a.to.into(), h)
                    .map_err(|e| ("no-path", e.to_string()))?;
                let path: Vec<LocationJson> = path.into_iter().map(Into::into).collect();
                Ok((json!({ "path": path }), Vec::new()))
            }
            "updateTarget" => {
                let a: TargetArgs = args(payload)?;
                let (source, room) = match (a.room_id, a.room) {
                    (Some(id), _) => (
                        TargetSource::DungeonRoom(RoomId(id)),
                        self.room(id)?.clone(),
                    ),
                    (None, Some(r)) => (TargetSource::Standalone, r.to_room().map_err(bad)?),
                    _ => return Err(bad("updateTarget needs `roomId` or `room`")),
                };
                self.target = Some((source, room.clone()));
                Ok((
                    json!({ "target": RoomJson::from_room(&room) }),
                    vec![EngineCommand::UpdateTarget(room)],
                ))
            }
            "setDimensions" => {
                let a: DimensionsArgs = args(payload)?;
                let dims = a
                    .dimensions
                    .iter()
                    .map(DimensionJson::to_descriptor)
                    .collect::<Result<Vec<_>, _>>()
                    .map_err(bad)?;
                Archive::new(&dims).map_err(|e| bad(e.to_string()))?;
                Ok((
                    json!({ "dimensions": descriptors_json(&dims) }),
                    vec![EngineCommand::SetDimensions(dims)],
                ))
            }
            "start" => {
                if self.target.is_none() {
                    return Err(("no-target", "no target room has been set".into()));
                }
                Ok((json!({}), vec![EngineCommand::Start]))
            }
            "stop" => Ok((json!({}), vec![EngineCommand::Stop])),
            "applySuggestion" => {
                let a: CellArgs = args(payload)?;
                let elite = self
                    .grid
                    .as_ref()
                    .and_then(|g| g.elites.get(a.cell).cloned().flatten())
                    .ok_or_else(|| ("empty-cell", format!("cell {} has no elite", a.cell)))?;
                let (source, _) = self
                    .target
                    .as_ref()
                    .map(|t| (t.0, ()))
                    .ok_or_else(|| ("no-target", "no target room has been set".to_string()))?;
                let room = match source {
                    TargetSource::DungeonRoom(id) => {
                        let room = elite.genotype.with_id(id);
                        let d = self
                            .dungeon
                            .replace_room(room.clone())
                            .map_err(|e| bad(e.to_string()))?;
                        self.set_dungeon(d);
                        room
                    }
                    TargetSource::Standalone => elite.genotype,
                };
                self.target = Some((source, room.clone()));
                Ok((
                    json!({ "room": RoomJson::from_room(&room) }),
                    vec![EngineCommand::UpdateTarget(room)],
                ))
            }
            "getSuggestions" => {
                let cells = self.grid.as_ref().map_or_else(Vec::new, |g| {
                    let mut filled: Vec<usize> = (0..g.elites.len())
                        .filter(|&i| g.elites[i].is_some())
                        .collect();
                    let fit = |i: usize| g.elites[i].as_ref().unwrap().fitness;
                    filled.sort_by(|&x, &y| fit(y).total_cmp(&fit(x)).then(x.cmp(&y)));
                    filled
                        .into_iter()
                        .take(SUGGESTIONS)
                        .map(|i| g.cell_json(i))
                        .collect()
                });
                Ok((json!({ "suggestions": cells }), Vec::new()))
            }
            "resync" => {
                let payload = match &self.grid {
                    Some(g) => json!({
                        "descriptors": descriptors_json(&g.descriptors),
                        "cells": g.full_json(),
                    }),
                    None => json!({ "descriptors": [], "cells": [] }),
                };
                self.client_grid = self.grid.clone();
                Ok((payload, Vec::new()))
            }
            _ => Err(("unknown-op", format!("unknown op `{op}`"))),
        }
    }

    /// Handles one engine event.
    pub fn handle_event(&mut self, event: EngineEvent) -> Vec<SessionMessage> {
        match event {
            EngineEvent::ElitesBroadcast {
                generation,
                descriptors,
                elites,
                target,
            } => {
                let grid = Grid {
                    descriptors,
                    elites,
                };
                let full = self
                    .client_grid
                    .as_ref()
                    .is_none_or(|c| c.descriptors != grid.descriptors);
                let cells: Vec<GridCellJson> = if full {
                    grid.full_json()
                } else {
                    let seen = self.client_grid.as_ref().unwrap();
                    (0..grid.elites.len())
                        .filter(|&i| grid.elites[i] != seen.elites[i])
                        .map(|i| grid.cell_json(i))
                        .collect()
                };
                let payload = json!({
                    "full": full,
                    "descriptors": descriptors_json(&grid.descriptors),
                    "cells": cells,
                    "target": RoomJson::from_room(&target),
                });
                self.grid = Some(grid.clone());
                self.client_grid = Some(grid);
                self.next_event("elites", generation, payload)
                    .into_iter()
                    .collect()
            }
            EngineEvent::CellsImproved {
                generation,
                descriptors,
                cells,
            } => {
                let grid = self.grid.get_or_insert_with(Grid::default);
                if grid.descriptors != descriptors {
                    let total = descriptors.iter().map(|d| d.granularity).product();
                    *grid = Grid {
                        descriptors,
                        elites: vec![None; total],
                    };
                }
                for (i, ind) in cells.iter() {
                    grid.elites[*i] = Some(ind.clone());
                }
                let payload = json!({
                    "descriptors": descriptors_json(&grid.descriptors),
                    "cells": cells.iter().map(|(i, _)| grid.cell_json(*i)).collect::<Vec<_>>(),
                });
                if let Some(client) = self.client_grid.as_mut() {
                    if client.descriptors == grid.descriptors {
                        for (i, ind) in cells {
                            client.elites[i] = Some(ind);
                        }
                    }
                }
                self.next_event("cellsImproved", generation, payload)
                    .into_iter()
                    .collect()
            }
            EngineEvent::Snapshot {
                generation,
                archive,
            } => {
                let Some(seq) = self.pending_snapshots.pop_front() else {
                    return Vec::new();
                };
                let cells: Vec<Value> = archive
                    .cells()
                    .iter()
                    .enumerate()
                    .map(|(i, c)| {
                        json!({
                            "cell": i,
                            "index": c.index,
                            "feasible": c.feasible.len(),
                            "infeasible": c.infeasible.len(),
                            "elite": c.elite().map(EliteJson::from_individual),
                        })
                    })
                    .collect();
                let target = self.target().map(RoomJson::from_room);
                vec![SessionMessage::response(
                    "requestSnapshot",
                    seq,
                    json!({
                        "generation": generation,
                        "descriptors": descriptors_json(archive.descriptors()),
                        "target": target,
                        "cells": cells,
                    }),
                )]
            }
            EngineEvent::Error {
                generation,
                message,
            } => {
                self.event_seq += 1;
                vec![SessionMessage::event(
                    "engineError",
                    self.event_seq,
                    generation,
                    json!({ "message": message }),
                )]
            }
            EngineEvent::Started { .. } | EngineEvent::Stopped { .. } => Vec::new(),
        }
    }
}

/// Engine commands arriving over a channel.
pub struct ChannelSource(pub Receiver<EngineCommand>);

impl CommandSource for ChannelSource {
    fn poll(&mut self, _generation: u64) -> Pending {
        match self.0.try_recv() {
            Ok(c) => Pending::Command(c),
            Err(TryRecvError::Empty) => Pending::Empty,
            Err(TryRecvError::Disconnected) => Pending::Closed,
        }
    }

    fn wait(&mut self) -> Option<EngineCommand> {
        self.0.recv().ok()
    }
}

enum Input {
    Line(String),
    Engine(EngineEvent),
    Closed,
}

fn write_message(out: &mut impl Write, msg: &SessionMessage) -> io::Result<()> {
    out.write_all(msg.to_line().as_bytes())?;
    out.write_all(b"\n")?;
    out.flush()
}

/// Runs one session over a connected stream until the client disconnects.
pub fn run_session(stream: TcpStream, cfg: EngineConfig) -> io::Result<()> {
    let (in_tx, in_rx) = mpsc::channel::<Input>();
    let (cmd_tx, cmd_rx) = mpsc::channel::<EngineCommand>();

    let engine_tx = in_tx.clone();
    let engine = thread::spawn(move || {
        let mut source = ChannelSource(cmd_rx);
        let mut sink = SinkFn(|e| {
            let _ = engine_tx.send(Input::Engine(e));
        });
        run_continuous(&mut source, &mut sink, cfg);
    });

    let reader = BufReader::new(stream.try_clone()?);
    let line_tx = in_tx;
    thread::spawn(move || {
        for line in reader.lines() {
            match line {
                Ok(l) if l.trim().is_empty() => continue,
                Ok(l) => {
                    if line_tx.send(Input::Line(l)).is_err() {
                        return;
                    }
                }
                Err(_) => break,
            }
        }
        let _ = line_tx.send(Input::Closed);
    });

    let mut out = io::BufWriter::new(stream);
    let mut session = Session::new();
    write_message(&mut out, &session.hello())?;
    let result = (|| {
        while let Ok(input) = in_rx.recv() {
            match input {
                Input::Line(line) => {
                    let output = session.handle_line(&line);
                    for c in output.commands {
                        let _ = cmd_tx.send(c);
                    }
                    for m in &output.messages {
                        write_message(&mut out, m)?;
                    }
                }
                Input::Engine(event) => {
                    for m in session.handle_event(event) {
                        write_message(&mut out, &m)?;
                    }
                }
                Input::Closed => break,
            }
        }
        Ok(())
    })();
    drop(cmd_tx);
    let _ = engine.join();
    result
}

/// Accepts editor clients forever. While a session is active, further
/// clients get a `session-busy` error and are disconnected.
pub fn serve(listener: TcpListener, cfg: EngineConfig) -> io::Result<()> {
    let busy = Arc::new(AtomicBool::new(false));
    for stream in listener.incoming() {
        let mut stream = stream?;
        if busy.swap(true, Ordering::SeqCst) {
            let refusal = SessionMessage::error(
                "connect",
                0,
                "session-busy",
                "another designer is connected",
            );
            let _ = write_message(&mut stream, &refusal);
            continue;
        }
        let busy = Arc::clone(&busy);
        let cfg = cfg.clone();
        thread::spawn(move || {
            let _ = run_session(stream, cfg);
            busy.store(false, Ordering::SeqCst);
        });
    }
    Ok(())
}
