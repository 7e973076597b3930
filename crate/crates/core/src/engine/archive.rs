//! The MAP-Elites archive: one cell per combination of dimension intervals,
//! each holding a feasible and an infeasible population.

use alloc::collections::BTreeSet;
use alloc::vec::Vec;

use crate::metrics::DimensionDescriptor;
use crate::room::{Room, TileKind};

use super::EngineError;

/// Most dimensions an archive can span.
pub const MAX_DIMENSIONS: usize = 4;

/// An evaluated room.
#[derive(Debug, Clone, PartialEq)]
pub struct Individual {
    pub genotype: Room,
    pub fitness: f64,
    pub feasible: bool,
    pub dims: Vec<f64>,
}

impl Individual {
    pub fn kind(&self) -> PopulationKind {
        PopulationKind::of(self.feasible)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum PopulationKind {
    Feasible,
    Infeasible,
}

impl PopulationKind {
    pub const BOTH: [PopulationKind; 2] = [PopulationKind::Feasible, PopulationKind::Infeasible];

    pub fn of(feasible: bool) -> PopulationKind {
        if feasible {
            PopulationKind::Feasible
        } else {
            PopulationKind::Infeasible
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Cell {
    pub index: Vec<usize>,
    pub feasible: Vec<Individual>,
    pub infeasible: Vec<Individual>,
}

impl Cell {
    pub fn population(&self, kind: PopulationKind) -> &[Individual] {
        match kind {
            PopulationKind::Feasible => &self.feasible,
            PopulationKind::Infeasible => &self.infeasible,
        }
    }

    fn population_mut(&mut self, kind: PopulationKind) -> &mut Vec<Individual> {
        match kind {
            PopulationKind::Feasible => &mut self.feasible,
            PopulationKind::Infeasible => &mut self.infeasible,
        }
    }

    /// Best feasible member, once populations are sorted.
    pub fn elite(&self) -> Option<&Individual> {
        self.feasible.first()
    }

    pub fn len(&self) -> usize {
        self.feasible.len() + self.infeasible.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Interval index of each value: `min(floor(v * g), g - 1)`.
pub fn bin_index(dims: &[f64], descriptors: &[DimensionDescriptor]) -> Vec<usize> {
    dims.iter()
        .zip(descriptors)
        .map(|(&v, d)| {
            let g = d.granularity;
            // Truncation is floor for the non-negative values produced here.
            ((v * g as f64) as usize).min(g - 1)
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct Archive {
    descriptors: Vec<DimensionDescriptor>,
    cells: Vec<Cell>,
}

impl Archive {
    /// Empty archive over the product of the descriptors' intervals. Cells
    /// are stored row-major with the first descriptor most significant.
    pub fn new(descriptors: &[DimensionDescriptor]) -> Result<Archive, EngineError> {
        check_descriptors(descriptors)?;
        let total: usize = descriptors.iter().map(|d| d.granularity).product();
        let cells = (0..total)
            .map(|flat| {
                let mut index = alloc::vec![0; descriptors.len()];
                let mut rest = flat;
                for (k, d) in descriptors.iter().enumerate().rev() {
                    index[k] = rest % d.granularity;
                    rest /= d.granularity;
                }
                Cell {
                    index,
                    feasible: Vec::new(),
                    infeasible: Vec::new(),
                }
            })
            .collect();
        Ok(Archive {
            descriptors: descriptors.to_vec(),
            cells,
        })
    }

    pub fn descriptors(&self) -> &[DimensionDescriptor] {
        &self.descriptors
    }

    pub fn cells(&self) -> &[Cell] {
        &self.cells
    }

    pub fn cell(&self, flat: usize) -> Option<&Cell> {
        self.cells.get(flat)
    }

    /// Flat position of a cell index.
    pub fn flat_index(&self, index: &[usize]) -> usize {
        index
            .iter()
            .zip(&self.descriptors)
            .fold(0, |acc, (&i, d)| acc * d.granularity + i)
    }

    /// Flat position of the cell the values fall in.
    pub fn cell_of(&self, dims: &[f64]) -> usize {
        self.flat_index(&bin_index(dims, &self.descriptors))
    }

    /// Number of stored individuals.
    pub fn len(&self) -> usize {
        self.cells.iter().map(Cell::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn individuals(&self) -> impl Iterator<Item = &Individual> {
        self.cells
            .iter()
            .flat_map(|c| c.feasible.iter().chain(&c.infeasible))
    }

    /// Cells with at least one feasible member.
    pub fn filled_cells(&self) -> usize {
        self.cells.iter().filter(|c| !c.feasible.is_empty()).count()
    }

    /// Adds an individual to the population its feasibility and dimension
    /// values point to. No trimming happens here.
    pub fn assign(&mut self, individual: Individual) {
        let flat = self.cell_of(&individual.dims);
        let kind = individual.kind();
        self.cells[flat].population_mut(kind).push(individual);
    }

    /// Sorts every population by fitness (descending, stable), collapses
    /// duplicate genotypes and keeps at most `capacity` members.
    ///
    /// If `keep` is given and a copy of it would be cut, it takes the place
    /// of the weakest survivor instead, as long as that survivor is not the
    /// population's best.
    pub fn sort_and_trim(&mut self, capacity: usize, keep: Option<&Room>) {
        for cell in &mut self.cells {
            for kind in PopulationKind::BOTH {
                trim_population(cell.population_mut(kind), capacity, keep);
            }
        }
    }

    /// Removes and returns every individual, leaving empty cells.
    pub fn drain(&mut self) -> Vec<Individual> {
        let mut out = Vec::with_capacity(self.len());
        for cell in &mut self.cells {
            out.append(&mut cell.feasible);
            out.append(&mut cell.infeasible);
        }
        out
    }

    /// Best feasible individual of every cell, in flat order.
    pub fn elites(&self) -> Vec<Option<Individual>> {
        self.cells.iter().map(|c| c.elite().cloned()).collect()
    }

    /// Best feasible fitness of every cell, in flat order.
    pub fn best_fitness(&self) -> Vec<Option<f64>> {
        self.cells
            .iter()
            .map(|c| c.elite().map(|e| e.fitness))
            .collect()
    }
}

fn trim_population(pop: &mut Vec<Individual>, capacity: usize, keep: Option<&Room>) {
    pop.sort_by(|a, b| b.fitness.total_cmp(&a.fitness));
    let mut seen: BTreeSet<Vec<TileKind>> = BTreeSet::new();
    pop.retain(|ind| seen.insert(ind.genotype.tiles().to_vec()));
    if pop.len() <= capacity {
        return;
    }
    let kept = keep.and_then(|room| {
        pop[capacity..]
            .iter()
            .position(|ind| ind.genotype.same_genotype(room))
            .map(|i| capacity + i)
    });
    match kept {
        Some(i) if capacity >= 2 => {
            pop.swap(capacity - 1, i);
            pop.truncate(capacity);
        }
        _ => pop.truncate(capacity),
    }
}

pub(crate) fn check_descriptors(descriptors: &[DimensionDescriptor]) -> Result<(), EngineError> {
    if descriptors.is_empty() || descriptors.len() > MAX_DIMENSIONS {
        return Err(EngineError::DimensionCount(descriptors.len()));
    }
    for (i, d) in descriptors.iter().enumerate() {
        if descriptors[..i].iter().any(|o| o.kind == d.kind) {
            return Err(EngineError::DuplicateDimension(d.kind));
        }
        DimensionDescriptor::new(d.kind, d.granularity)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metrics::Dimension;
    use crate::room::Position;

    fn desc(kind: Dimension, g: usize) -> DimensionDescriptor {
        DimensionDescriptor::new(kind, g).unwrap()
    }

    fn ind(room: Room, fitness: f64, feasible: bool, dims: &[f64]) -> Individual {
        Individual {
            genotype: room,
            fitness,
            feasible,
            dims: dims.to_vec(),
        }
    }

    fn variant(i: usize) -> Room {
        let r = Room::new(5, 5).unwrap();
        r.paint_tiles(&[Position::new(i / 5, i % 5)], TileKind::Wall, false)
            .unwrap()
    }

    #[test]
    fn bin_index_rule() {
        let d = [desc(Dimension::Symmetry, 5)];
        assert_eq!(bin_index(&[1.0], &d), [4]);
        assert_eq!(bin_index(&[0.0], &d), [0]);
        assert_eq!(bin_index(&[0.43], &d), [2]);
        assert_eq!(bin_index(&[0.2], &d), [1]);
        assert_eq!(bin_index(&[0.1999], &d), [0]);
    }

    #[test]
    fn create_cells() {
        let two = [
            desc(Dimension::SpatialPatterns, 5),
            desc(Dimension::Symmetry, 5),
        ];
        let a = Archive::new(&two).unwrap();
        assert_eq!(a.cells().len(), 25);
        assert!(a.is_empty());
        assert_eq!(a.cells()[7].index, [1, 2]);
        assert_eq!(a.flat_index(&[1, 2]), 7);
        assert_eq!(
            Archive::new(&[desc(Dimension::Linearity, 2)])
                .unwrap()
                .cells()
                .len(),
            2
        );
        assert_eq!(Archive::new(&[]), Err(EngineError::DimensionCount(0)));
        assert_eq!(
            Archive::new(&[desc(Dimension::Linearity, 2), desc(Dimension::Linearity, 3)]),
            Err(EngineError::DuplicateDimension(Dimension::Linearity))
        );
    }

    #[test]
    fn trim_keeps_best_and_dedups() {
        let mut a = Archive::new(&[desc(Dimension::Symmetry, 2)]).unwrap();
        for i in 0..10 {
            a.assign(ind(variant(i), i as f64 / 10.0, true, &[0.1]));
        }
        a.assign(ind(variant(9), 0.9, true, &[0.1]));
        a.assign(ind(variant(3), 0.5, false, &[0.9]));
        a.sort_and_trim(4, None);
        let fs: Vec<f64> = a.cells()[0].feasible.iter().map(|i| i.fitness).collect();
        assert_eq!(fs, [0.9, 0.8, 0.7, 0.6]);
        assert_eq!(a.cells()[1].infeasible.len(), 1);
        assert_eq!(a.len(), 5);
        assert_eq!(a.filled_cells(), 1);
    }

    #[test]
    fn trim_protects_kept_room() {
        let mut a = Archive::new(&[desc(Dimension::Symmetry, 2)]).unwrap();
        for i in 0..6 {
            a.assign(ind(variant(i), i as f64, true, &[0.1]));
        }
        a.sort_and_trim(3, Some(&variant(0)));
        let fs: Vec<f64> = a.cells()[0].feasible.iter().map(|i| i.fitness).collect();
        assert_eq!(fs, [5.0, 4.0, 0.0]);

        let mut b = Archive::new(&[desc(Dimension::Symmetry, 2)]).unwrap();
        b.assign(ind(variant(0), 0.0, true, &[0.1]));
        b.assign(ind(variant(1), 1.0, true, &[0.1]));
        b.sort_and_trim(1, Some(&variant(0)));
        assert_eq!(b.cells()[0].feasible[0].fitness, 1.0);
    }
}
