//! File formats, headless experiments and the editor session service for
//! the `edd-core` dungeon designer.

pub mod experiment;
pub mod files;
pub mod protocol;
pub mod report;
pub mod session;
