//! Interactive constrained MAP-Elites.
//!
//! The engine evolves rooms around a designer's target room. Every
//! generation it breeds the feasible and the infeasible populations
//! separately, and every `publish_gen` generations it broadcasts the best
//! feasible room of each cell, then reseeds the archive with mutated copies
//! of everything it holds plus the unchanged target.

mod archive;
mod operators;

use alloc::collections::VecDeque;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::metrics::{self, Dimension, DimensionDescriptor, FitnessConfig, MetricError};
use crate::room::Room;

pub use archive::{bin_index, Archive, Cell, Individual, PopulationKind, MAX_DIMENSIONS};
pub use operators::{breed, crossover, crossover_at, mutate, select_parents, tournament};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EngineError {
    #[error("invalid engine configuration: {0}")]
    InvalidConfig(&'static str),
    #[error("an archive needs 1 to {MAX_DIMENSIONS} dimensions, got {0}")]
    DimensionCount(usize),
    #[error("dimension {0} is listed twice")]
    DuplicateDimension(Dimension),
    #[error(transparent)]
    Metric(#[from] MetricError),
    #[error("breeding needs at least two parents, got {0}")]
    TooFewParents(usize),
    #[error("feasible and infeasible parents cannot breed together")]
    MixedParents,
    #[error("no target room has been set")]
    NoTarget,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EngineConfig {
    pub pop_size: usize,
    pub capacity: usize,
    pub publish_gen: u64,
    pub parents_per_pop: usize,
    /// Chance that an offspring goes through a mutation pass.
    pub mutation_chance: f64,
    /// Per-tile re-roll probability of a mutation pass.
    pub tile_mutation_rate: f64,
    /// Inclusive range of tournament sizes.
    pub tournament_sizes: (usize, usize),
    pub dims: Vec<DimensionDescriptor>,
    pub fitness: FitnessConfig,
    pub rng_seed: u64,
}

impl Default for EngineConfig {
    fn default() -> Self {
        EngineConfig {
            pop_size: 1000,
            capacity: 25,
            publish_gen: 100,
            parents_per_pop: 5,
            mutation_chance: 0.30,
            tile_mutation_rate: 0.05,
            tournament_sizes: (2, 5),
            dims: alloc::vec![
                DimensionDescriptor {
                    kind: Dimension::SpatialPatterns,
                    granularity: 5,
                },
                DimensionDescriptor {
                    kind: Dimension::Symmetry,
                    granularity: 5,
                },
            ],
            fitness: FitnessConfig::default(),
            rng_seed: 0,
        }
    }
}

impl EngineConfig {
    pub fn validate(&self) -> Result<(), EngineError> {
        let bad = EngineError::InvalidConfig;
        if self.pop_size == 0 {
            return Err(bad("pop_size must be at least 1"));
        }
        if self.capacity == 0 {
            return Err(bad("capacity must be at least 1"));
        }
        if self.publish_gen == 0 {
            return Err(bad("publish_gen must be at least 1"));
        }
        if self.parents_per_pop == 0 {
            return Err(bad("parents_per_pop must be at least 1"));
        }
        if !(0.0..=1.0).contains(&self.mutation_chance) {
            return Err(bad("mutation_chance must be in [0, 1]"));
        }
        if !(0.0..=1.0).contains(&self.tile_mutation_rate) {
            return Err(bad("tile_mutation_rate must be in [0, 1]"));
        }
        let (lo, hi) = self.tournament_sizes;
        if lo == 0 || lo > hi {
            return Err(bad("tournament sizes must satisfy 1 <= min <= max"));
        }
        archive::check_descriptors(&self.dims)
    }
}

/// Parents used by one breeding event.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Breeding {
    pub kind: PopulationKind,
    pub parents_feasible: Vec<bool>,
    pub offspring: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GenerationReport {
    pub generation: u64,
    pub breedings: Vec<Breeding>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum EngineCommand {
    UpdateTarget(Room),
    SetDimensions(Vec<DimensionDescriptor>),
    Start,
    Stop,
    RequestSnapshot,
}

#[derive(Debug, Clone, PartialEq)]
pub enum EngineEvent {
    /// Best feasible room per cell (flat order), `None` for empty cells.
    ElitesBroadcast {
        generation: u64,
        descriptors: Vec<DimensionDescriptor>,
        elites: Vec<Option<Individual>>,
        target: Room,
    },
    /// Cells whose best feasible fitness improved since the last report.
    CellsImproved {
        generation: u64,
        descriptors: Vec<DimensionDescriptor>,
        cells: Vec<(usize, Individual)>,
    },
    Snapshot {
        generation: u64,
        archive: Archive,
    },
    Started {
        generation: u64,
    },
    Stopped {
        generation: u64,
    },
    Error {
        generation: u64,
        message: String,
    },
}

pub struct Engine {
    cfg: EngineConfig,
    archive: Archive,
    target: Room,
    rng: ChaCha8Rng,
    generation: u64,
    pending_dims: Option<Vec<DimensionDescriptor>>,
    reported: Vec<Option<f64>>,
}

impl Engine {
    /// Creates the archive and fills it with `pop_size` mutated copies of
    /// the target.
    pub fn new(target: Room, cfg: EngineConfig) -> Result<Engine, EngineError> {
        cfg.validate()?;
        let archive = Archive::new(&cfg.dims)?;
        let mut engine = Engine {
            rng: ChaCha8Rng::seed_from_u64(cfg.rng_seed),
            reported: alloc::vec![None; archive.cells().len()],
            archive,
            target,
            cfg,
            generation: 0,
            pending_dims: None,
        };
        engine.init_population();
        Ok(engine)
    }

    fn init_population(&mut self) {
        for _ in 0..self.cfg.pop_size {
            let mut room = self.target.clone();
            mutate(&mut room, self.cfg.tile_mutation_rate, &mut self.rng);
            let ind = self.evaluate(room);
            self.archive.assign(ind);
        }
        self.archive.sort_and_trim(self.cfg.capacity, None);
    }

    pub fn config(&self) -> &EngineConfig {
        &self.cfg
    }

    pub fn archive(&self) -> &Archive {
        &self.archive
    }

    pub fn target(&self) -> &Room {
        &self.target
    }

    pub fn generation(&self) -> u64 {
        self.generation
    }

    pub fn descriptors(&self) -> &[DimensionDescriptor] {
        self.archive.descriptors()
    }

    pub fn elites(&self) -> Vec<Option<Individual>> {
        self.archive.elites()
    }

    /// Evaluates a genotype after forcing the target's doors and locks on it.
    pub fn evaluate(&self, mut genotype: Room) -> Individual {
        genotype.conform_to(&self.target);
        let eval = metrics::evaluate(
            &genotype,
            self.archive.descriptors(),
            Some(&self.target),
            &self.cfg.fitness,
        )
        .expect("genotypes share the target's size");
        Individual {
            genotype,
            fitness: eval.fitness,
            feasible: eval.feasible,
            dims: eval.dims,
        }
    }

    /// Replaces the target room. Stored genotypes are conformed to the new
    /// doors and locks and re-evaluated; a target of a different size
    /// restarts the population from it.
    pub fn update_target(&mut self, target: Room) {
        let resized =
            target.width() != self.target.width() || target.height() != self.target.height();
        self.target = target;
        if resized {
            self.archive.drain();
            self.init_population();
            return;
        }
        let all = self.archive.drain();
        for ind in all {
            let ind = self.evaluate(ind.genotype);
            self.archive.assign(ind);
        }
        self.archive.sort_and_trim(self.cfg.capacity, None);
    }

    /// Queues a new set of dimensions, applied at the start of the next
    /// generation. A later call replaces an earlier one that is still queued.
    pub fn set_dimensions(&mut self, dims: Vec<DimensionDescriptor>) -> Result<(), EngineError> {
        archive::check_descriptors(&dims)?;
        self.pending_dims = Some(dims);
        Ok(())
    }

    pub fn pending_dimensions(&self) -> Option<&[DimensionDescriptor]> {
        self.pending_dims.as_deref()
    }

    fn apply_dimension_change(&mut self, dims: Vec<DimensionDescriptor>) {
        let all = self.archive.drain();
        self.archive = Archive::new(&dims).expect("descriptors checked when queued");
        self.cfg.dims = dims;
        self.reported = alloc::vec![None; self.archive.cells().len()];
        for mut ind in all {
            ind.dims = metrics::dimension_values(
                &ind.genotype,
                self.archive.descriptors(),
                Some(&self.target),
            )
            .expect("genotypes share the target's size");
            self.archive.assign(ind);
        }
        self.archive.sort_and_trim(self.cfg.capacity, None);
    }

    /// One generation: pending dimension change, then selection, breeding
    /// and assignment for each population kind, then sort and trim.
    pub fn step_generation(&mut self) -> GenerationReport {
        if let Some(dims) = self.pending_dims.take() {
            self.apply_dimension_change(dims);
        }
        let mut breedings = Vec::new();
        for kind in PopulationKind::BOTH {
            let mut parents = select_parents(
                &self.archive,
                kind,
                self.cfg.parents_per_pop,
                self.cfg.tournament_sizes,
                &mut self.rng,
            );
            if parents.is_empty() {
                continue;
            }
            if parents.len() == 1 {
                parents.push(parents[0].clone());
            }
            let kids = breed(
                &parents,
                &self.target,
                self.cfg.mutation_chance,
                self.cfg.tile_mutation_rate,
                &mut self.rng,
            )
            .expect("parents come from a single population kind");
            breedings.push(Breeding {
                kind,
                parents_feasible: parents.iter().map(|p| p.feasible).collect(),
                offspring: kids.len(),
            });
            for kid in kids {
                let ind = self.evaluate(kid);
                self.archive.assign(ind);
            }
        }
        self.archive.sort_and_trim(self.cfg.capacity, None);
        self.generation += 1;
        GenerationReport {
            generation: self.generation,
            breedings,
        }
    }

    /// Broadcasts the current elites, then adds a mutated copy of every
    /// stored individual and the unchanged target before trimming.
    pub fn broadcast_and_reseed(&mut self) -> EngineEvent {
        let event = EngineEvent::ElitesBroadcast {
            generation: self.generation,
            descriptors: self.archive.descriptors().to_vec(),
            elites: self.archive.elites(),
            target: self.target.clone(),
        };
        self.reported = self.archive.best_fitness();
        let copies: Vec<Room> = self
            .archive
            .individuals()
            .map(|i| i.genotype.clone())
            .collect();
        for mut room in copies {
            mutate(&mut room, self.cfg.tile_mutation_rate, &mut self.rng);
            let ind = self.evaluate(room);
            self.archive.assign(ind);
        }
        let target = self.evaluate(self.target.clone());
        self.archive.assign(target);
        let keep = self.target.clone();
        self.archive.sort_and_trim(self.cfg.capacity, Some(&keep));
        event
    }

    /// Runs one generation and returns the events it produces: a broadcast
    /// on publishing generations, otherwise the cells whose best feasible
    /// fitness improved.
    pub fn advance(&mut self) -> Vec<EngineEvent> {
        self.step_generation();
        if self.generation.is_multiple_of(self.cfg.publish_gen) {
            return alloc::vec![self.broadcast_and_reseed()];
        }
        let mut cells = Vec::new();
        for (i, cell) in self.archive.cells().iter().enumerate() {
            if let Some(elite) = cell.elite() {
                if self.reported[i].is_none_or(|f| elite.fitness > f) {
                    self.reported[i] = Some(elite.fitness);
                    cells.push((i, elite.clone()));
                }
            }
        }
        if cells.is_empty() {
            Vec::new()
        } else {
            alloc::vec![EngineEvent::CellsImproved {
                generation: self.generation,
                descriptors: self.archive.descriptors().to_vec(),
                cells,
            }]
        }
    }

    pub fn snapshot(&self) -> EngineEvent {
        EngineEvent::Snapshot {
            generation: self.generation,
            archive: self.archive.clone(),
        }
    }
}

/// Result of asking a command source for work.
#[derive(Debug, Clone, PartialEq)]
pub enum Pending {
    Command(EngineCommand),
    /// Nothing queued right now.
    Empty,
    /// No more commands will ever arrive.
    Closed,
}

pub trait CommandSource {
    /// Non-blocking check, called at generation boundaries while running.
    fn poll(&mut self, generation: u64) -> Pending;
    /// Blocks until a command arrives; `None` once the source is closed.
    fn wait(&mut self) -> Option<EngineCommand>;
}

pub trait EventSink {
    fn emit(&mut self, event: EngineEvent);
}

impl EventSink for Vec<EngineEvent> {
    fn emit(&mut self, event: EngineEvent) {
        self.push(event);
    }
}

/// Adapts a closure into an [`EventSink`].
pub struct SinkFn<F>(pub F);

impl<F: FnMut(EngineEvent)> EventSink for SinkFn<F> {
    fn emit(&mut self, event: EngineEvent) {
        (self.0)(event)
    }
}

/// Commands delivered at fixed generations, for reproducible runs.
///
/// A command scheduled for generation `g` is handed over at the first
/// boundary at or after `g`. While the engine is stopped, the next command
/// is delivered regardless of its generation.
#[derive(Debug, Clone, Default)]
pub struct ScriptedSource {
    script: VecDeque<(u64, EngineCommand)>,
}

impl ScriptedSource {
    pub fn new(mut script: Vec<(u64, EngineCommand)>) -> Self {
        script.sort_by_key(|(g, _)| *g);
        ScriptedSource {
            script: script.into(),
        }
    }
}

impl CommandSource for ScriptedSource {
    fn poll(&mut self, generation: u64) -> Pending {
        match self.script.front() {
            Some((g, _)) if *g <= generation => {
                Pending::Command(self.script.pop_front().unwrap().1)
            }
            _ => Pending::Empty,
        }
    }

    fn wait(&mut self) -> Option<EngineCommand> {
        self.script.pop_front().map(|(_, c)| c)
    }
}

/// Drives an engine from a command source until the source closes.
///
/// Commands are only handled between generations. The engine is created by
/// the first `UpdateTarget`; dimensions set before that replace `cfg.dims`.
/// Returns the engine, if one was created.
pub fn run_continuous<S, E>(source: &mut S, sink: &mut E, mut cfg: EngineConfig) -> Option<Engine>
where
    S: CommandSource + ?Sized,
    E: EventSink + ?Sized,
{
    let mut engine: Option<Engine> = None;
    let mut running = false;
    loop {
        let generation = engine.as_ref().map_or(0, Engine::generation);
        let pending = if running {
            source.poll(generation)
        } else {
            source.wait().map_or(Pending::Closed, Pending::Command)
        };
        let error = |message: String| EngineEvent::Error {
            generation,
            message,
        };
        match pending {
            Pending::Closed => return engine,
            Pending::Empty => {
                let e = engine.as_mut().expect("running implies an engine");
                for event in e.advance() {
                    sink.emit(event);
                }
            }
            Pending::Command(EngineCommand::UpdateTarget(room)) => match engine.as_mut() {
                Some(e) => e.update_target(room),
                None => match Engine::new(room, cfg.clone()) {
                    Ok(e) => engine = Some(e),
                    Err(err) => sink.emit(error(err.to_string())),
                },
            },
            Pending::Command(EngineCommand::SetDimensions(dims)) => {
                let result = match engine.as_mut() {
                    Some(e) => e.set_dimensions(dims),
                    None => archive::check_descriptors(&dims).map(|()| cfg.dims = dims),
                };
                if let Err(err) = result {
                    sink.emit(error(err.to_string()));
                }
            }
            Pending::Command(EngineCommand::Start) => {
                if engine.is_some() {
                    running = true;
                    sink.emit(EngineEvent::Started { generation });
                } else {
                    sink.emit(error(EngineError::NoTarget.to_string()));
                }
            }
            Pending::Command(EngineCommand::Stop) => {
                if running {
                    running = false;
                    sink.emit(EngineEvent::Stopped { generation });
                }
            }
            Pending::Command(EngineCommand::RequestSnapshot) => match engine.as_ref() {
                Some(e) => sink.emit(e.snapshot()),
                None => sink.emit(error(EngineError::NoTarget.to_string())),
            },
        }
    }
}
