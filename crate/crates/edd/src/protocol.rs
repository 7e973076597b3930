//! Wire format of the editor session: newline-delimited JSON messages.
//!
//! Requests carry a client-chosen `seq`; the matching response echoes it.
//! Events are numbered by the server and carry the engine generation. The
//! payload schemas are listed in `schema/protocol-v1.json`.

use edd_core::{
    Dimension, DimensionDescriptor, Individual, Location, Position, Room, RoomId, TileKind,
};
use serde::{Deserialize, Serialize};
use serde_json::Value;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Kind {
    Request,
    Response,
    Event,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorBody {
    pub code: String,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionMessage {
    pub kind: Kind,
    pub op: String,
    pub seq: u64,
    #[serde(default, skip_serializing_if = "Value::is_null")]
    pub payload: Value,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub generation: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<ErrorBody>,
}

impl SessionMessage {
    pub fn request(op: &str, seq: u64, payload: Value) -> Self {
        SessionMessage {
            kind: Kind::Request,
            op: op.to_string(),
            seq,
            payload,
            generation: None,
            error: None,
        }
    }

    pub fn response(op: &str, seq: u64, payload: Value) -> Self {
        SessionMessage {
            kind: Kind::Response,
            ..SessionMessage::request(op, seq, payload)
        }
    }

    pub fn error(op: &str, seq: u64, code: &str, message: impl Into<String>) -> Self {
        SessionMessage {
            error: Some(ErrorBody {
                code: code.to_string(),
                message: message.into(),
            }),
            ..SessionMessage::response(op, seq, Value::Null)
        }
    }

    pub fn event(op: &str, seq: u64, generation: u64, payload: Value) -> Self {
        SessionMessage {
            kind: Kind::Event,
            generation: Some(generation),
            ..SessionMessage::request(op, seq, payload)
        }
    }

    pub fn to_line(&self) -> String {
        serde_json::to_string(self).expect("messages always serialize")
    }
}

/// A room as sent over the wire: rows in the room text format.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoomJson {
    #[serde(default)]
    pub id: u32,
    pub width: usize,
    pub height: usize,
    pub rows: Vec<String>,
}

impl RoomJson {
    pub fn from_room(room: &Room) -> RoomJson {
        let text = room.to_text();
        RoomJson {
            id: room.id().0,
            width: room.width(),
            height: room.height(),
            rows: text.lines().skip(1).map(str::to_string).collect(),
        }
    }

    pub fn to_room(&self) -> Result<Room, String> {
        let mut text = format!("{} {}\n", self.width, self.height);
        for row in &self.rows {
            text.push_str(row);
            text.push('\n');
        }
        Room::parse(&text)
            .map(|r| r.with_id(RoomId(self.id)))
            .map_err(|e| e.to_string())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TileRef {
    pub row: usize,
    pub col: usize,
}

impl From<TileRef> for Position {
    fn from(c: TileRef) -> Position {
        Position::new(c.row, c.col)
    }
}

impl From<Position> for TileRef {
    fn from(p: Position) -> TileRef {
        TileRef {
            row: p.row,
            col: p.col,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LocationJson {
    pub room: u32,
    pub row: usize,
    pub col: usize,
}

impl From<LocationJson> for Location {
    fn from(l: LocationJson) -> Location {
        Location::new(RoomId(l.room), Position::new(l.row, l.col))
    }
}

impl From<Location> for LocationJson {
    fn from(l: Location) -> LocationJson {
        LocationJson {
            room: l.room.0,
            row: l.pos.row,
            col: l.pos.col,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DimensionJson {
    pub dimension: String,
    pub granularity: usize,
}

impl DimensionJson {
    pub fn from_descriptor(d: &DimensionDescriptor) -> DimensionJson {
        DimensionJson {
            dimension: d.kind.name().to_string(),
            granularity: d.granularity,
        }
    }

    pub fn to_descriptor(&self) -> Result<DimensionDescriptor, String> {
        let kind = Dimension::from_name(&self.dimension).map_err(|e| e.to_string())?;
        DimensionDescriptor::new(kind, self.granularity).map_err(|e| e.to_string())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EliteJson {
    pub room: RoomJson,
    pub fitness: f64,
    pub dims: Vec<f64>,
}

impl EliteJson {
    pub fn from_individual(ind: &Individual) -> EliteJson {
        EliteJson {
            room: RoomJson::from_room(&ind.genotype),
            fitness: ind.fitness,
            dims: ind.dims.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridCellJson {
    pub cell: usize,
    pub index: Vec<usize>,
    pub elite: Option<EliteJson>,
}

pub fn tile_kind(name: &str) -> Result<TileKind, String> {
    TileKind::from_name(name).ok_or_else(|| format!("unknown tile kind `{name}`"))
}
