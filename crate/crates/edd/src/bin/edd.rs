use std::io::{self, Write};
use std::net::TcpListener;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use edd::experiment::{self, parse_dims, parse_script, ExperimentSpec};
use edd::files;
use edd_core::metrics::evaluate;
use edd_core::{EngineConfig, Location, PathHeuristic, Position, RoomId};

#[derive(Parser)]
#[command(name = "edd", version, about = "Evolutionary dungeon designer")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one headless experiment.
    Run(RunArgs),
    /// Run every pair of dimensions and write a comparison table.
    Sweep(RunArgs),
    /// Serve editor sessions over TCP.
    Serve {
        #[arg(long, default_value_t = 7878)]
        port: u16,
        #[arg(long, default_value = "127.0.0.1")]
        host: String,
        #[command(flatten)]
        engine: EngineArgs,
    },
    /// Print fitness, feasibility and dimension values of room files as CSV.
    Eval {
        rooms: Vec<PathBuf>,
        #[arg(long, default_value = "spatial:5,symmetry:5")]
        dims: String,
        #[arg(long)]
        target: Option<PathBuf>,
    },
    /// Check that every passable tile of a dungeon is reachable.
    Check { manifest: PathBuf },
    /// Find a path through a dungeon between two `room:row:col` locations.
    Path {
        manifest: PathBuf,
        #[arg(long)]
        from: String,
        #[arg(long)]
        to: String,
        #[arg(long, default_value = "fastest")]
        heuristic: String,
    },
}

#[derive(Args)]
struct EngineArgs {
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 1000)]
    pop_size: usize,
    #[arg(long, default_value_t = 25)]
    capacity: usize,
    #[arg(long, default_value_t = 100)]
    publish_gen: u64,
    #[arg(long, default_value_t = 5)]
    parents: usize,
    #[arg(long, default_value_t = 0.3)]
    mutation_chance: f64,
    #[arg(long, default_value = "spatial:5,symmetry:5")]
    dims: String,
}

impl EngineArgs {
    fn config(&self) -> Result<EngineConfig, String> {
        let seed = match std::env::var("EDD_SEED") {
            Ok(v) => v
                .trim()
                .parse()
                .map_err(|_| format!("EDD_SEED is not a number: `{v}`"))?,
            Err(_) => self.seed,
        };
        let cfg = EngineConfig {
            pop_size: self.pop_size,
            capacity: self.capacity,
            publish_gen: self.publish_gen,
            parents_per_pop: self.parents,
            mutation_chance: self.mutation_chance,
            dims: parse_dims(&self.dims)?,
            rng_seed: seed,
            ..EngineConfig::default()
        };
        cfg.validate().map_err(|e| e.to_string())?;
        Ok(cfg)
    }
}

#[derive(Args)]
struct RunArgs {
    #[arg(long, default_value_t = 13)]
    width: usize,
    #[arg(long, default_value_t = 7)]
    height: usize,
    #[arg(long, default_value_t = 2000)]
    generations: u64,
    /// Target room file; defaults to a floor room with a door on every side.
    #[arg(long)]
    target: Option<PathBuf>,
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Command script, one `<generation> <command>` per line.
    #[arg(long)]
    script: Option<PathBuf>,
    #[command(flatten)]
    engine: EngineArgs,
}

impl RunArgs {
    fn spec(&self) -> Result<ExperimentSpec, String> {
        let engine = self.engine.config()?;
        let target = self
            .target
            .as_deref()
            .map(files::read_room)
            .transpose()
            .map_err(|e| e.to_string())?;
        let script = match &self.script {
            Some(path) => {
                let text = std::fs::read_to_string(path)
                    .map_err(|e| format!("{}: {e}", path.display()))?;
                let base = path.parent().unwrap_or(Path::new("."));
                parse_script(&text, base).map_err(|e| e.to_string())?
            }
            None => Vec::new(),
        };
        Ok(ExperimentSpec {
            width: self.width,
            height: self.height,
            target,
            dims: engine.dims.clone(),
            generations: self.generations,
            engine,
            out_dir: self.out.clone(),
            script,
        })
    }
}

fn location(text: &str) -> Result<Location, String> {
    let parts: Vec<&str> = text.split(':').collect();
    let nums: Option<Vec<usize>> = parts.iter().map(|p| p.parse().ok()).collect();
    match nums.as_deref() {
        Some(&[room, row, col]) => Ok(Location::new(RoomId(room as u32), Position::new(row, col))),
        _ => Err(format!("expected `room:row:col`, got `{text}`")),
    }
}

fn run(cli: Cli) -> Result<(), String> {
    let mut out = io::stdout().lock();
    match cli.command {
        Command::Run(args) => {
            let result = experiment::run_experiment(&args.spec()?).map_err(|e| e.to_string())?;
            if let Some(last) = result.broadcasts.last() {
                writeln!(
                    out,
                    "{} broadcasts; generation {}: {} filled, {} empty",
                    result.broadcasts.len(),
                    last.stats.generation,
                    last.stats.filled,
                    last.stats.empty
                )
                .map_err(|e| e.to_string())?;
            }
        }
        Command::Sweep(args) => {
            let runs = experiment::sweep_all_pairs(&args.spec()?).map_err(|e| e.to_string())?;
            for ((x, y), result) in runs {
                let filled = result.broadcasts.last().map_or(0, |b| b.stats.filled);
                writeln!(out, "{} x {}: {} filled", x.name(), y.name(), filled)
                    .map_err(|e| e.to_string())?;
            }
        }
        Command::Serve { port, host, engine } => {
            let cfg = engine.config()?;
            let listener = TcpListener::bind((host.as_str(), port)).map_err(|e| e.to_string())?;
            eprintln!(
                "listening on {}",
                listener.local_addr().map_err(|e| e.to_string())?
            );
            edd::session::serve(listener, cfg).map_err(|e| e.to_string())?;
        }
        Command::Eval {
            rooms,
            dims,
            target,
        } => {
            let dims = parse_dims(&dims)?;
            let target = target
                .as_deref()
                .map(files::read_room)
                .transpose()
                .map_err(|e| e.to_string())?;
            let mut header = vec!["room-id", "fitness", "feasible"];
            header.extend(dims.iter().map(|d| d.kind.name()));
            writeln!(out, "{}", header.join(",")).map_err(|e| e.to_string())?;
            for path in rooms {
                let room = files::read_room(&path).map_err(|e| e.to_string())?;
                let e = evaluate(&room, &dims, target.as_ref(), &Default::default())
                    .map_err(|e| format!("{}: {e}", path.display()))?;
                let id = path
                    .file_stem()
                    .map_or_else(String::new, |s| s.to_string_lossy().into());
                let mut row = vec![id, e.fitness.to_string(), e.feasible.to_string()];
                row.extend(e.dims.iter().map(f64::to_string));
                writeln!(out, "{}", row.join(",")).map_err(|e| e.to_string())?;
            }
        }
        Command::Check { manifest } => {
            let dungeon = files::load_dungeon(&manifest).map_err(|e| e.to_string())?;
            let report = dungeon.check_feasibility().map_err(|e| e.to_string())?;
            if report.feasible {
                writeln!(out, "feasible").map_err(|e| e.to_string())?;
            } else {
                writeln!(out, "infeasible").map_err(|e| e.to_string())?;
                for room in &report.unreachable_rooms {
                    writeln!(out, "unreachable room {}", room.0).map_err(|e| e.to_string())?;
                }
                for (room, tiles) in &report.unreachable_tiles {
                    for t in tiles {
                        writeln!(out, "unreachable tile {}:{}:{}", room.0, t.row, t.col)
                            .map_err(|e| e.to_string())?;
                    }
                }
            }
        }
        Command::Path {
            manifest,
            from,
            to,
            heuristic,
        } => {
            let dungeon = files::load_dungeon(&manifest).map_err(|e| e.to_string())?;
            let h = PathHeuristic::from_name(&heuristic)
                .ok_or_else(|| format!("unknown heuristic `{heuristic}`"))?;
            let path = dungeon
                .find_path(location(&from)?, location(&to)?, h)
                .map_err(|e| e.to_string())?;
            for l in path {
                writeln!(out, "{}:{}:{}", l.room.0, l.pos.row, l.pos.col)
                    .map_err(|e| e.to_string())?;
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("edd: {e}");
            ExitCode::FAILURE
        }
    }
}
