//! CSV exports of broadcasts.

use std::io::Write;

use edd_core::{DimensionDescriptor, Individual};

/// Per-cell rows of one broadcast.
pub struct ElitesTable<W: Write> {
    out: csv::Writer<W>,
    dims: usize,
}

impl<W: Write> ElitesTable<W> {
    /// Writes the header: `generation,cell,room-id,fitness,feasible` followed
    /// by one column per dimension. Rows written after a dimension change
    /// carry as many value columns as the new dimensions.
    pub fn new(inner: W, descriptors: &[DimensionDescriptor]) -> csv::Result<Self> {
        let mut out = csv::WriterBuilder::new().flexible(true).from_writer(inner);
        let mut header = vec![
            "generation".to_string(),
            "cell".to_string(),
            "room-id".to_string(),
            "fitness".to_string(),
            "feasible".to_string(),
        ];
        header.extend(descriptors.iter().map(|d| d.kind.name().to_string()));
        out.write_record(&header)?;
        Ok(ElitesTable {
            out,
            dims: descriptors.len(),
        })
    }

    /// One row per cell; empty cells get blank fields.
    pub fn write(
        &mut self,
        generation: u64,
        cells: &[(String, Option<(&Individual, String)>)],
    ) -> csv::Result<()> {
        for (cell, elite) in cells {
            let mut row = vec![generation.to_string(), cell.clone()];
            match elite {
                Some((ind, id)) => {
                    row.push(id.clone());
                    row.push(ind.fitness.to_string());
                    row.push(ind.feasible.to_string());
                    row.extend(ind.dims.iter().map(f64::to_string));
                }
                None => row.extend(std::iter::repeat_n(String::new(), 3 + self.dims)),
            }
            self.out.write_record(&row)?;
        }
        self.out.flush()?;
        Ok(())
    }
}

/// Aggregate statistics of one broadcast.
#[derive(Debug, Clone, PartialEq)]
pub struct BroadcastStats {
    pub generation: u64,
    pub filled: usize,
    pub empty: usize,
    pub mean_fitness: Option<f64>,
    pub max_fitness: Option<f64>,
}

impl BroadcastStats {
    pub fn from_elites(generation: u64, elites: &[Option<Individual>]) -> BroadcastStats {
        let fitness: Vec<f64> = elites.iter().flatten().map(|i| i.fitness).collect();
        let filled = fitness.len();
        BroadcastStats {
            generation,
            filled,
            empty: elites.len() - filled,
            mean_fitness: (filled > 0).then(|| fitness.iter().sum::<f64>() / filled as f64),
            max_fitness: fitness.iter().copied().reduce(f64::max),
        }
    }

    fn fields(&self) -> Vec<String> {
        let opt = |v: Option<f64>| v.map_or(String::new(), |v| v.to_string());
        vec![
            self.generation.to_string(),
            self.filled.to_string(),
            self.empty.to_string(),
            opt(self.mean_fitness),
            opt(self.max_fitness),
        ]
    }
}

pub const SUMMARY_HEADER: [&str; 5] = [
    "generation",
    "filled_cells",
    "empty_cells",
    "mean_fitness",
    "max_fitness",
];

/// `generation,filled_cells,empty_cells,mean_fitness,max_fitness`.
pub struct SummaryTable<W: Write> {
    out: csv::Writer<W>,
}

impl<W: Write> SummaryTable<W> {
    pub fn new(inner: W) -> csv::Result<Self> {
        let mut out = csv::Writer::from_writer(inner);
        out.write_record(SUMMARY_HEADER)?;
        Ok(SummaryTable { out })
    }

    pub fn write(&mut self, stats: &BroadcastStats) -> csv::Result<()> {
        self.out.write_record(stats.fields())?;
        self.out.flush()?;
        Ok(())
    }
}

/// Sweep table: the summary columns prefixed by the dimension pair.
pub struct ComparisonTable<W: Write> {
    out: csv::Writer<W>,
}

impl<W: Write> ComparisonTable<W> {
    pub fn new(inner: W) -> csv::Result<Self> {
        let mut out = csv::Writer::from_writer(inner);
        let mut header = vec!["dim_x", "dim_y"];
        header.extend(SUMMARY_HEADER);
        out.write_record(header)?;
        Ok(ComparisonTable { out })
    }

    pub fn write(&mut self, x: &str, y: &str, stats: &BroadcastStats) -> csv::Result<()> {
        let mut row = vec![x.to_string(), y.to_string()];
        row.extend(stats.fields());
        self.out.write_record(row)?;
        self.out.flush()?;
        Ok(())
    }
}
