//! Headless experiment runs.
//!
//! A run evolves rooms around a fixed target for a number of generations.
//! At every broadcast it writes one room file per filled cell
//! (`gen<G>_cell<i>_<j>.room`), appends the per-cell table to `elites.csv`
//! and one line to `summary.csv`.

use std::fs::{self, File};
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use edd_core::engine::{run_continuous, ScriptedSource, SinkFn};
use edd_core::{
    Dimension, DimensionDescriptor, EngineCommand, EngineConfig, EngineError, EngineEvent,
    Position, Room, TileKind,
};
use thiserror::Error;

use crate::files::{self, FileError};
use crate::report::{BroadcastStats, ComparisonTable, ElitesTable, SummaryTable};

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error("invalid experiment: {0}")]
    Invalid(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    File(#[from] FileError),
    #[error(transparent)]
    Engine(#[from] EngineError),
}

#[derive(Debug, Clone)]
pub struct ExperimentSpec {
    /// Size of the default target; ignored when `target` is set.
    pub width: usize,
    pub height: usize,
    pub target: Option<Room>,
    pub dims: Vec<DimensionDescriptor>,
    pub generations: u64,
    pub engine: EngineConfig,
    pub out_dir: PathBuf,
    /// Extra commands, each delivered at the start of the given generation.
    pub script: Vec<(u64, EngineCommand)>,
}

impl ExperimentSpec {
    /// A 13x7 run over spatial patterns and symmetry, five intervals each.
    pub fn new(out_dir: impl Into<PathBuf>) -> ExperimentSpec {
        let engine = EngineConfig::default();
        ExperimentSpec {
            width: 13,
            height: 7,
            target: None,
            dims: engine.dims.clone(),
            generations: 2000,
            engine,
            out_dir: out_dir.into(),
            script: Vec::new(),
        }
    }

    pub fn target_room(&self) -> Result<Room, ExperimentError> {
        match &self.target {
            Some(room) => Ok(room.clone()),
            None => default_target(self.width, self.height),
        }
    }

    pub fn validate(&self) -> Result<(), ExperimentError> {
        let invalid = |m: String| Err(ExperimentError::Invalid(m));
        if self.generations < self.engine.publish_gen {
            return invalid(format!(
                "generations ({}) must be at least the publishing interval ({})",
                self.generations, self.engine.publish_gen
            ));
        }
        if self.target.is_none() && self.dims.iter().any(|d| d.kind == Dimension::Similarity) {
            return invalid("the similarity dimension needs a target room".into());
        }
        if let Some((g, _)) = self.script.iter().find(|(g, _)| *g >= self.generations) {
            return invalid(format!(
                "script command at generation {g} is past the end of the run"
            ));
        }
        self.target_room()?;
        EngineConfig {
            dims: self.dims.clone(),
            ..self.engine.clone()
        }
        .validate()?;
        Ok(())
    }
}

/// Floor room with a door in the middle of every side.
pub fn default_target(width: usize, height: usize) -> Result<Room, ExperimentError> {
    let room = Room::new(width, height).map_err(|e| ExperimentError::Invalid(e.to_string()))?;
    let mut tiles = room.tiles().to_vec();
    for (r, c) in [
        (0, width / 2),
        (height - 1, width / 2),
        (height / 2, 0),
        (height / 2, width - 1),
    ] {
        tiles[room.index(Position::new(r, c))] = TileKind::Door;
    }
    Room::from_tiles(width, height, tiles, room.locks().to_vec())
        .map_err(|e| ExperimentError::Invalid(e.to_string()))
}

/// What a broadcast looked like.
#[derive(Debug, Clone, PartialEq)]
pub struct BroadcastRecord {
    pub stats: BroadcastStats,
    pub descriptors: Vec<DimensionDescriptor>,
    /// Best feasible fitness per cell, in flat order.
    pub fitness: Vec<Option<f64>>,
    /// Room file written for each cell, in flat order.
    pub rooms: Vec<Option<PathBuf>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentResult {
    pub broadcasts: Vec<BroadcastRecord>,
    pub elites_csv: PathBuf,
    pub summary_csv: PathBuf,
}

fn create(path: &Path) -> Result<BufWriter<File>, ExperimentError> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|source| ExperimentError::Io {
            path: path.to_path_buf(),
            source,
        })
}

/// `cell<i>_<j>` for a cell index.
pub fn cell_name(index: &[usize]) -> String {
    let parts: Vec<String> = index.iter().map(usize::to_string).collect();
    format!("cell{}", parts.join("_"))
}

fn cell_index(flat: usize, descriptors: &[DimensionDescriptor]) -> Vec<usize> {
    let mut index = vec![0; descriptors.len()];
    let mut rest = flat;
    for (k, d) in descriptors.iter().enumerate().rev() {
        index[k] = rest % d.granularity;
        rest /= d.granularity;
    }
    index
}

pub fn run_experiment(spec: &ExperimentSpec) -> Result<ExperimentResult, ExperimentError> {
    spec.validate()?;
    let target = spec.target_room()?;
    fs::create_dir_all(&spec.out_dir).map_err(|source| ExperimentError::Io {
        path: spec.out_dir.clone(),
        source,
    })?;
    let elites_csv = spec.out_dir.join("elites.csv");
    let summary_csv = spec.out_dir.join("summary.csv");
    let mut elites_table = ElitesTable::new(create(&elites_csv)?, &spec.dims)?;
    let mut summary_table = SummaryTable::new(create(&summary_csv)?)?;

    let mut script = vec![
        (0, EngineCommand::UpdateTarget(target)),
        (0, EngineCommand::Start),
    ];
    script.extend(spec.script.iter().cloned());
    script.push((spec.generations, EngineCommand::Stop));
    let mut source = ScriptedSource::new(script);

    let cfg = EngineConfig {
        dims: spec.dims.clone(),
        ..spec.engine.clone()
    };
    let mut broadcasts = Vec::new();
    let mut failure: Option<ExperimentError> = None;
    {
        let mut sink = SinkFn(|event: EngineEvent| {
            if failure.is_some() {
                return;
            }
            match event {
                EngineEvent::ElitesBroadcast {
                    generation,
                    descriptors,
                    elites,
                    ..
                } => {
                    let record = write_broadcast(
                        &spec.out_dir,
                        generation,
                        &descriptors,
                        &elites,
                        &mut elites_table,
                        &mut summary_table,
                    );
                    match record {
                        Ok(r) => broadcasts.push(r),
                        Err(e) => failure = Some(e),
                    }
                }
                EngineEvent::Error {
                    generation,
                    message,
                } => {
                    failure = Some(ExperimentError::Invalid(format!(
                        "generation {generation}: {message}"
                    )))
                }
                _ => {}
            }
        });
        run_continuous(&mut source, &mut sink, cfg);
    }
    if let Some(e) = failure {
        return Err(e);
    }
    Ok(ExperimentResult {
        broadcasts,
        elites_csv,
        summary_csv,
    })
}

fn write_broadcast(
    dir: &Path,
    generation: u64,
    descriptors: &[DimensionDescriptor],
    elites: &[Option<edd_core::Individual>],
    elites_table: &mut ElitesTable<BufWriter<File>>,
    summary_table: &mut SummaryTable<BufWriter<File>>,
) -> Result<BroadcastRecord, ExperimentError> {
    let mut rows = Vec::with_capacity(elites.len());
    let mut rooms = Vec::with_capacity(elites.len());
    for (flat, elite) in elites.iter().enumerate() {
        let cell = cell_name(&cell_index(flat, descriptors));
        match elite {
            Some(ind) => {
                let id = format!("gen{generation}_{cell}");
                let path = dir.join(format!("{id}.room"));
                files::write_room(&path, &ind.genotype)?;
                rooms.push(Some(path));
                rows.push((cell, Some((ind, id))));
            }
            None => {
                rooms.push(None);
                rows.push((cell, None));
            }
        }
    }
    elites_table.write(generation, &rows)?;
    let stats = BroadcastStats::from_elites(generation, elites);
    summary_table.write(&stats)?;
    Ok(BroadcastRecord {
        stats,
        descriptors: descriptors.to_vec(),
        fitness: elites
            .iter()
            .map(|e| e.as_ref().map(|i| i.fitness))
            .collect(),
        rooms,
    })
}

/// One run of a sweep and the dimension pair it used.
pub type PairRun = ((Dimension, Dimension), ExperimentResult);

/// All unordered pairs of the five dimensions.
pub fn dimension_pairs() -> Vec<(Dimension, Dimension)> {
    let all = Dimension::ALL;
    let mut out = Vec::new();
    for i in 0..all.len() {
        for j in i + 1..all.len() {
            out.push((all[i], all[j]));
        }
    }
    out
}

/// Runs every dimension pair with the base spec's settings, each into its
/// own `<x>_<y>` subdirectory, and writes `comparison.csv` with one row per
/// pair per broadcast.
pub fn sweep_all_pairs(base: &ExperimentSpec) -> Result<Vec<PairRun>, ExperimentError> {
    let granularity = base.dims.first().map_or(5, |d| d.granularity);
    let specs: Vec<((Dimension, Dimension), ExperimentSpec)> = dimension_pairs()
        .into_iter()
        .map(|(x, y)| {
            let dims = vec![
                DimensionDescriptor::new(x, granularity),
                DimensionDescriptor::new(y, granularity),
            ]
            .into_iter()
            .collect::<Result<Vec<_>, _>>()
            .map_err(EngineError::from)?;
            Ok((
                (x, y),
                ExperimentSpec {
                    dims,
                    out_dir: base.out_dir.join(format!("{}_{}", x.name(), y.name())),
                    ..base.clone()
                },
            ))
        })
        .collect::<Result<_, ExperimentError>>()?;
    for (_, spec) in &specs {
        spec.validate()?;
    }
    fs::create_dir_all(&base.out_dir).map_err(|source| ExperimentError::Io {
        path: base.out_dir.clone(),
        source,
    })?;
    let mut table = ComparisonTable::new(create(&base.out_dir.join("comparison.csv"))?)?;
    let mut out = Vec::new();
    for (pair, spec) in specs {
        let result = run_experiment(&spec)?;
        for b in &result.broadcasts {
            table.write(pair.0.name(), pair.1.name(), &b.stats)?;
        }
        out.push((pair, result));
    }
    Ok(out)
}

/// Parses a command script. Each non-empty line not starting with `#` is
/// `<generation> <command> [argument]`, where the command is one of
/// `dims <name:g,...>`, `target <room-file>`, `snapshot`, `stop` or `start`.
/// Room paths are relative to `base`.
pub fn parse_script(text: &str, base: &Path) -> Result<Vec<(u64, EngineCommand)>, ExperimentError> {
    let mut out = Vec::new();
    for (n, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let invalid = |m: &str| ExperimentError::Invalid(format!("script line {}: {m}", n + 1));
        let mut words = line.split_whitespace();
        let generation: u64 = words
            .next()
            .and_then(|w| w.parse().ok())
            .ok_or_else(|| invalid("expected a generation number"))?;
        let command = match (words.next(), words.next()) {
            (Some("dims"), Some(arg)) => {
                EngineCommand::SetDimensions(parse_dims(arg).map_err(|e| invalid(&e))?)
            }
            (Some("target"), Some(arg)) => {
                EngineCommand::UpdateTarget(files::read_room(&base.join(arg))?)
            }
            (Some("snapshot"), None) => EngineCommand::RequestSnapshot,
            (Some("stop"), None) => EngineCommand::Stop,
            (Some("start"), None) => EngineCommand::Start,
            _ => return Err(invalid("unknown command")),
        };
        if words.next().is_some() {
            return Err(invalid("trailing input"));
        }
        out.push((generation, command));
    }
    Ok(out)
}

/// Parses `name:g,name:g`.
pub fn parse_dims(text: &str) -> Result<Vec<DimensionDescriptor>, String> {
    text.split(',')
        .map(|d| DimensionDescriptor::parse(d.trim()).map_err(|e| e.to_string()))
        .collect()
}
