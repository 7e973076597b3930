//! Core of the evolutionary dungeon designer.
//!
//! Rooms are tile grids edited by a designer and evolved by an interactive,
//! constrained MAP-Elites engine. Every cell of the archive keeps a feasible
//! and an infeasible population, the designer's room is continuously fed back
//! into the search, and the behavioral dimensions can be swapped at any time.
//!
//! The crate is `no_std` and only needs `alloc`. File IO, the CLI and the
//! editor session live in the `edd` crate.
#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod dungeon;
pub mod engine;
mod grid;
pub mod metrics;
pub mod path;
pub mod pattern;
pub mod room;
mod text;

pub use dungeon::{Connection, Dungeon, DungeonError, FeasibilityReport};
pub use engine::{
    Archive, Cell, CommandSource, Engine, EngineCommand, EngineConfig, EngineError, EngineEvent,
    EventSink, Individual, Pending, PopulationKind, ScriptedSource, SinkFn,
};
pub use metrics::{Dimension, DimensionDescriptor, FitnessConfig, MetricError, RoomMetrics};
pub use path::{Location, PathHeuristic};
pub use pattern::{MesoKind, MesoPattern, MesoRules, PatternGraph, PatternKind, SpatialPattern};
pub use room::{Brush, Position, Room, RoomError, RoomId, TileKind};
