//! Behavioral dimensions, room feasibility and fitness.

use alloc::vec::Vec;
use core::fmt;

use thiserror::Error;

use crate::grid;
use crate::pattern::{self, PatternGraph, PatternKind};
use crate::room::{Room, TileKind};

/// Scale applied to the longest room side when normalizing the number of
/// spatial patterns.
pub const SPATIAL_K: f64 = 4.0;

pub const MIN_GRANULARITY: usize = 2;
pub const MAX_GRANULARITY: usize = 20;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MetricError {
    #[error("rooms differ in size ({0}x{1} vs {2}x{3})")]
    SizeMismatch(usize, usize, usize, usize),
    #[error("the similarity dimension needs a target room")]
    MissingTarget,
    #[error("at least one dimension is required")]
    NoDimensions,
    #[error("granularity {0} is outside {MIN_GRANULARITY}..={MAX_GRANULARITY}")]
    Granularity(usize),
    #[error("unknown dimension `{0}`")]
    UnknownDimension(alloc::string::String),
    #[error("feasible fitness requested for an infeasible room")]
    Infeasible,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Dimension {
    Symmetry,
    Similarity,
    MesoPatterns,
    SpatialPatterns,
    Linearity,
}

impl Dimension {
    pub const ALL: [Dimension; 5] = [
        Dimension::Symmetry,
        Dimension::Similarity,
        Dimension::MesoPatterns,
        Dimension::SpatialPatterns,
        Dimension::Linearity,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Dimension::Symmetry => "symmetry",
            Dimension::Similarity => "similarity",
            Dimension::MesoPatterns => "meso-patterns",
            Dimension::SpatialPatterns => "spatial-patterns",
            Dimension::Linearity => "linearity",
        }
    }

    pub fn from_name(name: &str) -> Result<Dimension, MetricError> {
        let key: alloc::string::String = name
            .chars()
            .filter(|c| c.is_ascii_alphanumeric())
            .map(|c| c.to_ascii_lowercase())
            .collect();
        match key.as_str() {
            "symmetry" | "sym" => Ok(Dimension::Symmetry),
            "similarity" | "sim" => Ok(Dimension::Similarity),
            "mesopatterns" | "meso" => Ok(Dimension::MesoPatterns),
            "spatialpatterns" | "spatial" => Ok(Dimension::SpatialPatterns),
            "linearity" | "lin" => Ok(Dimension::Linearity),
            _ => Err(MetricError::UnknownDimension(name.into())),
        }
    }
}

impl fmt::Display for Dimension {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// A behavioral dimension and the number of intervals its [0, 1] range is
/// split into.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct DimensionDescriptor {
    pub kind: Dimension,
    pub granularity: usize,
}

impl DimensionDescriptor {
    pub fn new(kind: Dimension, granularity: usize) -> Result<Self, MetricError> {
        if !(MIN_GRANULARITY..=MAX_GRANULARITY).contains(&granularity) {
            return Err(MetricError::Granularity(granularity));
        }
        Ok(DimensionDescriptor { kind, granularity })
    }

    /// Parses `name:granularity`.
    pub fn parse(spec: &str) -> Result<Self, MetricError> {
        let (name, g) = spec
            .split_once(':')
            .ok_or_else(|| MetricError::UnknownDimension(spec.into()))?;
        let g = g
            .trim()
            .parse::<usize>()
            .map_err(|_| MetricError::UnknownDimension(spec.into()))?;
        DimensionDescriptor::new(Dimension::from_name(name.trim())?, g)
    }
}

impl fmt::Display for DimensionDescriptor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.kind, self.granularity)
    }
}

/// Targets for the feasible fitness function.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitnessConfig {
    pub target_enemy_frac: f64,
    pub target_treasure_frac: f64,
    pub target_corridor_frac: f64,
    /// Feasible rooms must hold at least one enemy and one treasure.
    pub require_inventory: bool,
}

impl Default for FitnessConfig {
    fn default() -> Self {
        FitnessConfig {
            target_enemy_frac: 0.10,
            target_treasure_frac: 0.08,
            target_corridor_frac: 0.40,
            require_inventory: true,
        }
    }
}

/// Raw counts behind the pattern-based dimensions.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RoomMetrics {
    pub meso_count: usize,
    pub spatial_count: usize,
    pub door_path_count: usize,
    pub door_neighbor_count: usize,
    pub max_chambers: usize,
}

impl RoomMetrics {
    pub fn from_graph(room: &Room, graph: &PatternGraph) -> RoomMetrics {
        RoomMetrics {
            meso_count: graph.meso.len(),
            spatial_count: graph.nodes.len(),
            door_path_count: pattern::count_door_paths(graph),
            door_neighbor_count: door_neighbor_count(room),
            max_chambers: max_chambers(room),
        }
    }

    pub fn compute(room: &Room) -> RoomMetrics {
        RoomMetrics::from_graph(room, &pattern::analyze(room))
    }
}

/// Upper bound on 3x3 chambers that fit in the room.
pub fn max_chambers(room: &Room) -> usize {
    (room.width() / 3) * (room.height() / 3)
}

/// Passable in-room tiles orthogonally adjacent to a door, summed over doors.
pub fn door_neighbor_count(room: &Room) -> usize {
    room.doors()
        .iter()
        .map(|&d| {
            room.neighbors(d)
                .filter(|&n| room.tile(n).is_passable())
                .count()
        })
        .sum()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SymmetryAxis {
    /// Mirror rows (top/bottom).
    Horizontal,
    /// Mirror columns (left/right).
    Vertical,
    /// Main diagonal, top-left to bottom-right. Square rooms only.
    Backslash,
    /// Anti-diagonal, top-right to bottom-left. Square rooms only.
    Slash,
}

impl SymmetryAxis {
    pub const ALL: [SymmetryAxis; 4] = [
        SymmetryAxis::Horizontal,
        SymmetryAxis::Vertical,
        SymmetryAxis::Backslash,
        SymmetryAxis::Slash,
    ];
}

/// Share of non-floor tiles whose mirror image across `axis` holds the same
/// kind. `None` for diagonal axes on non-square rooms.
pub fn axis_symmetry(room: &Room, axis: SymmetryAxis) -> Option<f64> {
    let (w, h) = (room.width(), room.height());
    let diagonal = matches!(axis, SymmetryAxis::Backslash | SymmetryAxis::Slash);
    if diagonal && w != h {
        return None;
    }
    let mut total = 0usize;
    let mut matching = 0usize;
    for pos in room.positions() {
        let kind = room.tile(pos);
        if kind == TileKind::Floor {
            continue;
        }
        total += 1;
        let (r, c) = (pos.row, pos.col);
        let mirror = match axis {
            SymmetryAxis::Horizontal => (h - 1 - r, c),
            SymmetryAxis::Vertical => (r, w - 1 - c),
            SymmetryAxis::Backslash => (c, r),
            SymmetryAxis::Slash => (w - 1 - c, h - 1 - r),
        };
        if room.tiles()[mirror.0 * w + mirror.1] == kind {
            matching += 1;
        }
    }
    Some(if total == 0 {
        1.0
    } else {
        matching as f64 / total as f64
    })
}

/// Best symmetry over the applicable axes.
pub fn symmetry(room: &Room) -> f64 {
    SymmetryAxis::ALL
        .into_iter()
        .filter_map(|a| axis_symmetry(room, a))
        .fold(0.0, f64::max)
}

/// Fraction of positions holding the same tile in both rooms.
pub fn similarity(room: &Room, target: &Room) -> Result<f64, MetricError> {
    if room.width() != target.width() || room.height() != target.height() {
        return Err(MetricError::SizeMismatch(
            room.width(),
            room.height(),
            target.width(),
            target.height(),
        ));
    }
    let same = room
        .tiles()
        .iter()
        .zip(target.tiles())
        .filter(|(a, b)| a == b)
        .count();
    Ok(same as f64 / room.len() as f64)
}

fn meso_value(m: &RoomMetrics) -> f64 {
    (m.meso_count as f64 / m.max_chambers as f64).min(1.0)
}

fn spatial_value(m: &RoomMetrics, room: &Room) -> f64 {
    let side = room.width().max(room.height()) as f64;
    (m.spatial_count as f64 / (side * SPATIAL_K)).min(1.0)
}

fn linearity_value(m: &RoomMetrics, room: &Room) -> f64 {
    if room.doors().len() < 2 {
        return 1.0;
    }
    let denom = (m.spatial_count + m.door_neighbor_count) as f64;
    (1.0 - m.door_path_count as f64 / denom).clamp(0.0, 1.0)
}

pub fn meso_pattern_dimension(room: &Room) -> f64 {
    meso_value(&RoomMetrics::compute(room))
}

pub fn spatial_pattern_dimension(room: &Room) -> f64 {
    spatial_value(&RoomMetrics::compute(room), room)
}

pub fn linearity_dimension(room: &Room) -> f64 {
    linearity_value(&RoomMetrics::compute(room), room)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Violation {
    /// The room has no doors at all.
    NoDoors,
    /// Some pair of doors cannot reach each other.
    DoorsDisconnected,
    /// An enemy or treasure cannot be reached from any door.
    UnreachableContent,
    MissingEnemy,
    MissingTreasure,
}

impl Violation {
    pub fn name(self) -> &'static str {
        match self {
            Violation::NoDoors => "no-doors",
            Violation::DoorsDisconnected => "doors-disconnected",
            Violation::UnreachableContent => "unreachable-content",
            Violation::MissingEnemy => "missing-enemy",
            Violation::MissingTreasure => "missing-treasure",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RoomFeasibility {
    pub feasible: bool,
    pub violations: Vec<Violation>,
}

/// Connectivity facts shared by the feasibility check and the infeasible
/// fitness.
struct Reachability {
    door_pairs: usize,
    connected_pairs: usize,
    items: usize,
    reachable_items: usize,
}

fn reachability(room: &Room) -> Reachability {
    let (labels, _) = grid::components(room.width(), room.height(), |p| room.tile(p).is_passable());
    let door_labels: Vec<usize> = room
        .doors()
        .iter()
        .map(|&d| labels[room.index(d)].expect("doors are passable"))
        .collect();
    let n = door_labels.len();
    let mut connected_pairs = 0;
    for i in 0..n {
        for j in i + 1..n {
            if door_labels[i] == door_labels[j] {
                connected_pairs += 1;
            }
        }
    }
    let mut items = 0;
    let mut reachable_items = 0;
    for (i, t) in room.tiles().iter().enumerate() {
        if matches!(t, TileKind::Enemy | TileKind::Treasure) {
            items += 1;
            if labels[i].is_some_and(|l| door_labels.contains(&l)) {
                reachable_items += 1;
            }
        }
    }
    Reachability {
        door_pairs: n * n.saturating_sub(1) / 2,
        connected_pairs,
        items,
        reachable_items,
    }
}

pub fn room_feasibility(room: &Room, cfg: &FitnessConfig) -> RoomFeasibility {
    let mut violations = Vec::new();
    if room.doors().is_empty() {
        violations.push(Violation::NoDoors);
    } else {
        let r = reachability(room);
        if r.connected_pairs < r.door_pairs {
            violations.push(Violation::DoorsDisconnected);
        }
        if r.reachable_items < r.items {
            violations.push(Violation::UnreachableContent);
        }
    }
    if cfg.require_inventory {
        if room.count(TileKind::Enemy) == 0 {
            violations.push(Violation::MissingEnemy);
        }
        if room.count(TileKind::Treasure) == 0 {
            violations.push(Violation::MissingTreasure);
        }
    }
    RoomFeasibility {
        feasible: violations.is_empty(),
        violations,
    }
}

/// Normalized distance of `actual` from `target`, in [0, 1].
fn target_distance(actual: f64, target: f64) -> f64 {
    (actual - target).abs() / target.max(1.0 - target)
}

/// Inventory half of the feasible fitness: closeness of the enemy and
/// treasure shares of passable tiles to their targets.
pub fn inventory_score(room: &Room, cfg: &FitnessConfig) -> f64 {
    let passable = room.passable_count();
    if passable == 0 {
        return 0.0;
    }
    let p = passable as f64;
    let enemy = room.count(TileKind::Enemy) as f64 / p;
    let treasure = room.count(TileKind::Treasure) as f64 / p;
    1.0 - (target_distance(enemy, cfg.target_enemy_frac)
        + target_distance(treasure, cfg.target_treasure_frac))
        / 2.0
}

/// Spatial half of the feasible fitness: corridor share against its target
/// and how much chamber area is covered by meso patterns.
pub fn spatial_score(room: &Room, graph: &PatternGraph, cfg: &FitnessConfig) -> f64 {
    let passable = room.passable_count();
    if passable == 0 {
        return 0.0;
    }
    let corridor = (graph.tiles_of(PatternKind::Corridor) + graph.tiles_of(PatternKind::Connector))
        as f64
        / passable as f64;
    let chamber_tiles = graph.tiles_of(PatternKind::Chamber);
    let coverage = if chamber_tiles == 0 {
        1.0
    } else {
        let covered: usize = graph
            .meso
            .iter()
            .map(|m| graph.nodes[m.chamber].tiles.len())
            .sum();
        covered as f64 / chamber_tiles as f64
    };
    0.5 * (1.0 - target_distance(corridor, cfg.target_corridor_frac)) + 0.5 * coverage
}

fn feasible_fitness_from(room: &Room, graph: &PatternGraph, cfg: &FitnessConfig) -> f64 {
    0.5 * inventory_score(room, cfg) + 0.5 * spatial_score(room, graph, cfg)
}

pub fn fitness_feasible(room: &Room, cfg: &FitnessConfig) -> Result<f64, MetricError> {
    if !room_feasibility(room, cfg).feasible {
        return Err(MetricError::Infeasible);
    }
    Ok(feasible_fitness_from(room, &pattern::analyze(room), cfg))
}

/// Distance-to-feasibility score for infeasible rooms.
pub fn fitness_infeasible(room: &Room) -> f64 {
    let r = reachability(room);
    let ratio = |num: usize, den: usize| {
        if den == 0 {
            0.0
        } else {
            num as f64 / den as f64
        }
    };
    0.5 * ratio(r.connected_pairs, r.door_pairs) + 0.5 * ratio(r.reachable_items, r.items)
}

fn dimension_value(
    kind: Dimension,
    room: &Room,
    metrics: &RoomMetrics,
    target: Option<&Room>,
) -> Result<f64, MetricError> {
    Ok(match kind {
        Dimension::Symmetry => symmetry(room),
        Dimension::Similarity => similarity(room, target.ok_or(MetricError::MissingTarget)?)?,
        Dimension::MesoPatterns => meso_value(metrics),
        Dimension::SpatialPatterns => spatial_value(metrics, room),
        Dimension::Linearity => linearity_value(metrics, room),
    })
}

/// Values of `dims`, in order. `target` is only consulted for similarity.
pub fn dimension_values(
    room: &Room,
    dims: &[DimensionDescriptor],
    target: Option<&Room>,
) -> Result<Vec<f64>, MetricError> {
    if dims.is_empty() {
        return Err(MetricError::NoDimensions);
    }
    let metrics = RoomMetrics::compute(room);
    dims.iter()
        .map(|d| dimension_value(d.kind, room, &metrics, target))
        .collect()
}

/// Full evaluation of one room: fitness, feasibility and dimension values.
#[derive(Debug, Clone, PartialEq)]
pub struct Evaluation {
    pub fitness: f64,
    pub feasible: bool,
    pub dims: Vec<f64>,
}

pub fn evaluate(
    room: &Room,
    dims: &[DimensionDescriptor],
    target: Option<&Room>,
    cfg: &FitnessConfig,
) -> Result<Evaluation, MetricError> {
    if dims.is_empty() {
        return Err(MetricError::NoDimensions);
    }
    let graph = pattern::analyze(room);
    let metrics = RoomMetrics::from_graph(room, &graph);
    let feasible = room_feasibility(room, cfg).feasible;
    let fitness = if feasible {
        feasible_fitness_from(room, &graph, cfg)
    } else {
        fitness_infeasible(room)
    };
    let dims = dims
        .iter()
        .map(|d| dimension_value(d.kind, room, &metrics, target))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(Evaluation {
        fitness,
        feasible,
        dims,
    })
}
