use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use quadalloc::oracle::{brute_force_empty_pixel, Grid, DEFAULT_BUDGET};
use quadalloc::realloc::cost_bounds;
use quadalloc::request::{Request, RequestSequence, ScenarioConfig, Strategy};
use quadalloc::sim::{self, SimulationResult};
use quadalloc::worst_case::{build_worst_case, verify_lower_bound};
use quadalloc::{Configuration, Dyadic, Layer, DEFAULT_MAX_DEPTH};

#[derive(Parser)]
#[command(
    name = "quadalloc",
    version,
    about = "Quadtree module allocation with defragmentation"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a random request sequence and write series.csv, summary.txt, plot.svg and sequence.csv.
    Simulate(SimulateArgs),
    /// Build the costliest configuration for an i-square and measure the insertion.
    Worstcase {
        #[arg(long = "i")]
        i: Layer,
    },
    /// Run a request sequence exported by `simulate`.
    Replay(ReplayArgs),
    /// Print facts about a configuration in canonical text form.
    Dump {
        #[arg(long)]
        config: PathBuf,
    },
    /// Fewest moves until a configuration has an empty pixel of the given layer.
    Oracle {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        layer: Layer,
        #[arg(long, default_value_t = DEFAULT_BUDGET)]
        budget: usize,
    },
}

#[derive(Args)]
struct SimulateArgs {
    /// Key-value scenario file; flags given explicitly override its entries.
    #[arg(long)]
    scenario: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    requests: Option<usize>,
    #[arg(long)]
    p_insert: Option<f64>,
    #[arg(long)]
    bound: Option<f64>,
    #[arg(long)]
    aspect: Option<f64>,
    /// first-fit or defrag-insert
    #[arg(long)]
    strategy: Option<Strategy>,
    #[arg(long, default_value = "out")]
    out_dir: PathBuf,
    #[arg(long, overrides_with = "no_checked")]
    checked: bool,
    #[arg(long)]
    no_checked: bool,
}

#[derive(Args)]
struct ReplayArgs {
    #[arg(long)]
    sequence: PathBuf,
    #[arg(long, default_value = "first-fit")]
    strategy: Strategy,
    /// Aspect ratio bound; defaults to the largest ratio in the sequence.
    #[arg(long)]
    aspect: Option<f64>,
    #[arg(long, default_value = "out")]
    out_dir: PathBuf,
    #[arg(long)]
    checked: bool,
}

fn main() -> Result<()> {
    match Cli::parse().command {
        Command::Simulate(args) => simulate(args),
        Command::Worstcase { i } => worstcase(i),
        Command::Replay(args) => replay(args),
        Command::Dump { config } => dump(&config),
        Command::Oracle {
            config,
            layer,
            budget,
        } => oracle(&config, layer, budget),
    }
}

fn simulate(args: SimulateArgs) -> Result<()> {
    let mut scenario = match &args.scenario {
        Some(path) => ScenarioConfig::load(path)?,
        None => ScenarioConfig::default(),
    };
    if let Some(v) = args.seed {
        scenario.seed = v;
    }
    if let Some(v) = args.requests {
        scenario.n_requests = v;
    }
    if let Some(v) = args.p_insert {
        scenario.p_insert = v;
    }
    if let Some(v) = args.bound {
        scenario.bound = v;
    }
    if let Some(v) = args.aspect {
        scenario.aspect = v;
    }
    if let Some(v) = args.strategy {
        scenario.strategy = v;
    }
    if args.checked {
        scenario.checked = Some(true);
    } else if args.no_checked {
        scenario.checked = Some(false);
    }
    scenario.validate()?;
    let (sequence, result) = sim::run(&scenario)?;
    finish(&args.out_dir, &sequence, &result)
}

fn replay(args: ReplayArgs) -> Result<()> {
    let sequence = RequestSequence::load(&args.sequence)?;
    let aspect = args.aspect.unwrap_or_else(|| {
        sequence
            .requests
            .iter()
            .filter_map(|r| match r {
                Request::Insert { shape, .. } => Some(shape.aspect_ratio()),
                Request::Delete { .. } => None,
            })
            .fold(1.0, f64::max)
    });
    let result = sim::replay(&sequence, args.strategy, aspect, args.checked)?;
    finish(&args.out_dir, &sequence, &result)
}

fn finish(out_dir: &Path, sequence: &RequestSequence, result: &SimulationResult) -> Result<()> {
    sim::write_outputs(out_dir, sequence, result)?;
    let s = &result.summary;
    println!(
        "{} requests, {} collisions, final u {:.4}, mean u {:.4}, max moves {}",
        s.requests, s.collisions, s.final_u, s.mean_u, s.max_moves
    );
    println!("wrote {}", out_dir.display());
    Ok(())
}

fn worstcase(i: Layer) -> Result<()> {
    if i == 0 || 2 * i as u32 > DEFAULT_MAX_DEPTH as u32 {
        bail!("--i must be between 1 and {}", DEFAULT_MAX_DEPTH / 2);
    }
    let tree = build_worst_case::<Dyadic>(i)?;
    println!("{}", tree.to_canonical());
    let ledger = verify_lower_bound::<Dyadic>(i)?;
    let bounds = cost_bounds::<Dyadic>(i, 2 * i);
    let rel = ledger.relative_volume().unwrap_or(Dyadic::ZERO);
    println!("capacity: {}", tree.total_capacity());
    println!("height: {}", tree.height().0);
    println!("moves: {} (bound {})", ledger.moves, bounds.moves);
    println!(
        "total_volume: {} (bound {})",
        ledger.total_volume, bounds.total_volume
    );
    println!("rel_volume: {} (bound {})", rel, bounds.relative_volume);
    if ledger.moves != bounds.moves || ledger.total_volume != bounds.total_volume {
        bail!("measured costs differ from the bounds");
    }
    Ok(())
}

fn load_config(path: &Path) -> Result<Configuration> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    Ok(Configuration::from_canonical(&text, DEFAULT_MAX_DEPTH)?)
}

fn dump(path: &Path) -> Result<()> {
    let tree = load_config(path)?;
    tree.validate()?;
    println!("{}", tree.to_canonical());
    println!("squares: {}", tree.len());
    println!("capacity: {}", tree.total_capacity());
    println!("height: {}", tree.height().0);
    println!("compact: {}", tree.is_compact());
    let empty: Vec<String> = tree
        .maximally_empty_pixels()
        .iter()
        .map(|p| p.to_string())
        .collect();
    println!("maximally_empty: {}", empty.join(" "));
    for (id, p) in tree.modules() {
        println!("module {id} at {p}");
    }
    Ok(())
}

fn oracle(path: &Path, layer: Layer, budget: usize) -> Result<()> {
    let tree = load_config(path)?;
    let grid = Grid::from_tree(&tree)?;
    match brute_force_empty_pixel(&grid, layer, budget)? {
        Some(m) => println!("{m}"),
        None => println!("unreachable"),
    }
    Ok(())
}
