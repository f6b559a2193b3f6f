//! `crowdmec`: incentive curves, join/leave game reports, station layouts and
//! the latency/accuracy simulation.
//!
//! Exit codes: 0 success, 1 invalid input, 2 filesystem failure.

use std::fmt;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crowdmec::config::{parse_config, ExperimentConfig};
use crowdmec::gametheory::{table1_game, table2_game, BaseGains};
use crowdmec::incentive::Order;
use crowdmec::report::{analyze_game, crossing_point, curves, write_curves_csv, GameTable};
use crowdmec::sim::{
    run_batch, run_traced, write_results_csv, write_summary_csv, Scenario, World, DATASET_SEED,
};
use crowdmec::topology::{synth_stations, write_stations, Cluster, Preset};

#[derive(Debug, Parser)]
#[command(name = "crowdmec", version, about = "Reward-penalty crowd-intelligence experiments")]
struct Cli {
    /// Flat `key = value` configuration file.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,

    /// Output directory. Without it, single-file outputs go to stdout and
    /// `simulate` writes to `./results`.
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<PathBuf>,

    /// Config override, applied after the file. Repeatable.
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    overrides: Vec<String>,

    /// Shorthand for `--set sim.seed=N`; for `gen-stations`, the layout seed.
    #[arg(long, global = true)]
    seed: Option<u64>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Truthful expected gain of the reward-penalty family vs the flat reward.
    Curves(CurvesArgs),
    /// Run every configured mode on paired seeds and write runs/summary CSVs.
    Simulate(SimulateArgs),
    /// Equilibrium report for the join/leave game.
    Game(GameArgs),
    /// Write a synthetic station layout.
    GenStations(GenStationsArgs),
}

#[derive(Debug, Args)]
struct CurvesArgs {
    /// Orders to tabulate; defaults to `incentive.k_choices`.
    #[arg(short, long, value_delimiter = ',')]
    k: Vec<u32>,
    /// Flat reward of the baseline; defaults to `incentive.rho`.
    #[arg(long)]
    rho: Option<f64>,
    #[arg(long, default_value_t = 0.01)]
    step: f64,
}

#[derive(Debug, Args)]
struct SimulateArgs {
    /// Also write the ledger journal of the first run of each mode.
    #[arg(long)]
    journal: bool,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum TableArg {
    #[value(name = "1")]
    One,
    #[value(name = "2")]
    Two,
}

#[derive(Debug, Args)]
struct GameArgs {
    #[arg(long, value_enum)]
    table: TableArg,
    #[arg(short)]
    a: f64,
    #[arg(short)]
    b: f64,
    #[arg(short)]
    c: f64,
    #[arg(short)]
    d: f64,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    beta: Option<f64>,
    #[arg(long)]
    eps1: Option<f64>,
    #[arg(long)]
    eps2: Option<f64>,
    /// Also write the report as `game.csv` in `--out`.
    #[arg(long, requires = "out")]
    csv: bool,
}

#[derive(Debug, Args)]
struct GenStationsArgs {
    #[arg(long, conflicts_with = "clusters", required_unless_present = "clusters")]
    preset: Option<String>,
    /// Mixture spec `lat,lon,stddev_km,weight;...`.
    #[arg(long, requires = "count")]
    clusters: Option<String>,
    /// Station count; defaults to the preset's.
    #[arg(long)]
    count: Option<usize>,
    /// Output file; defaults to `stations.csv` in `--out`, else stdout.
    #[arg(long, short = 'o', value_name = "PATH")]
    output: Option<PathBuf>,
}

/// Error with its exit status.
#[derive(Debug)]
enum Failure {
    Invalid(String),
    Io(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Invalid(_) => 1,
            Failure::Io(_) => 2,
        }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::Invalid(m) | Failure::Io(m) => f.write_str(m),
        }
    }
}

impl From<crowdmec::Error> for Failure {
    fn from(e: crowdmec::Error) -> Self {
        if e.is_io() {
            Failure::Io(e.to_string())
        } else {
            Failure::Invalid(e.to_string())
        }
    }
}

fn io_failure(context: impl fmt::Display, e: io::Error) -> Failure {
    Failure::Io(format!("{context}: {e}"))
}

type CliResult<T = ()> = Result<T, Failure>;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {f}");
            ExitCode::from(f.code())
        }
    }
}

fn run(cli: Cli) -> CliResult {
    match &cli.command {
        Command::Curves(args) => cmd_curves(&cli, args),
        Command::Simulate(args) => cmd_simulate(&cli, args),
        Command::Game(args) => cmd_game(&cli, args),
        Command::GenStations(args) => cmd_gen_stations(&cli, args),
    }
}

fn load_config(cli: &Cli) -> CliResult<ExperimentConfig> {
    let mut overrides = cli.overrides.clone();
    if let Some(seed) = cli.seed {
        overrides.push(format!("sim.seed={seed}"));
    }
    Ok(parse_config(cli.config.as_deref(), &overrides)?)
}

fn ensure_dir(dir: &Path) -> CliResult {
    fs::create_dir_all(dir).map_err(|e| io_failure(format!("creating {}", dir.display()), e))
}

fn write_file(path: &Path, bytes: &[u8]) -> CliResult {
    fs::write(path, bytes).map_err(|e| io_failure(format!("writing {}", path.display()), e))
}

/// Writes to `<out>/<name>` when `--out` is set, else to stdout.
fn emit(cli: &Cli, name: &str, bytes: &[u8]) -> CliResult {
    match &cli.out {
        Some(dir) => {
            ensure_dir(dir)?;
            write_file(&dir.join(name), bytes)
        }
        None => io::stdout()
            .write_all(bytes)
            .map_err(|e| io_failure("writing stdout", e)),
    }
}

fn cmd_curves(cli: &Cli, args: &CurvesArgs) -> CliResult {
    let cfg = load_config(cli)?;
    let ks = if args.k.is_empty() {
        cfg.sim.k_choices.clone()
    } else {
        args.k.iter().map(|&k| Order::new(k)).collect::<Result<Vec<_>, _>>()?
    };
    let rho = args.rho.unwrap_or(cfg.sim.rho);
    let rows = curves(&ks, rho, args.step)?;
    emit(cli, "curves.csv", write_curves_csv(&rows).as_bytes())?;
    for k in ks {
        if let Some(c) = crossing_point(k, rho) {
            eprintln!("k={k}: curves cross at c = {c:.6}");
        }
    }
    Ok(())
}

fn cmd_simulate(cli: &Cli, args: &SimulateArgs) -> CliResult {
    let cfg = load_config(cli)?;
    let dir = cli.out.clone().unwrap_or_else(|| PathBuf::from("results"));
    ensure_dir(&dir)?;

    let world = World::build(&cfg.sim)?;
    let mut batches = Vec::with_capacity(cfg.modes.len());
    for sim in cfg.per_mode() {
        let batch = run_batch(&sim, &world)?;
        eprintln!(
            "{:<11} makespan {:.4} (var {:.4})  accuracy {:.4}  over {} runs",
            sim.mode.label(),
            batch.makespan.mean,
            batch.makespan.variance,
            batch.accuracy.mean,
            batch.runs.len()
        );
        if args.journal {
            let scenario = Scenario::generate(&sim, &world, sim.seed)?;
            let trace = run_traced(&sim, &world.topology, scenario, sim.seed)?;
            let mut buf = Vec::new();
            trace.ledger.write_journal_csv(&mut buf, 0, true)?;
            write_file(&dir.join(format!("journal_{}.csv", sim.mode.as_str())), &buf)?;
        }
        batches.push(batch);
    }

    let mut runs = Vec::new();
    write_results_csv(&mut runs, &batches)?;
    write_file(&dir.join("runs.csv"), &runs)?;
    let mut summary = Vec::new();
    write_summary_csv(&mut summary, &batches)?;
    write_file(&dir.join("summary.csv"), &summary)?;
    write_file(&dir.join("config.txt"), cfg.emit().as_bytes())
}

fn cmd_game(cli: &Cli, args: &GameArgs) -> CliResult {
    let gains = BaseGains {
        a: args.a,
        b: args.b,
        c: args.c,
        d: args.d,
    };
    let missing = |name: &str| Failure::Invalid(format!("--{name} is required for this table"));
    let (table, game) = match args.table {
        TableArg::One => {
            let alpha = args.alpha.ok_or_else(|| missing("alpha"))?;
            let beta = args.beta.ok_or_else(|| missing("beta"))?;
            (GameTable::Untrusted, table1_game(gains, alpha, beta)?)
        }
        TableArg::Two => {
            let eps1 = args.eps1.ok_or_else(|| missing("eps1"))?;
            let eps2 = args.eps2.ok_or_else(|| missing("eps2"))?;
            let companion = match (args.alpha, args.beta) {
                (Some(alpha), Some(beta)) => Some((alpha, beta)),
                (None, None) => None,
                _ => return Err(Failure::Invalid("give both --alpha and --beta or neither".into())),
            };
            (GameTable::ContractEnforced, table2_game(gains, eps1, eps2, companion)?)
        }
    };
    let report = analyze_game(table, game);
    print!("{}", report.render_text());

    if args.csv {
        emit(cli, "game.csv", report.render_csv().as_bytes())?;
    }
    Ok(())
}

fn parse_clusters(spec: &str) -> CliResult<Vec<Cluster>> {
    spec.split(';')
        .filter(|s| !s.trim().is_empty())
        .map(|part| {
            let fields: Vec<f64> = part
                .split(',')
                .map(|f| f.trim().parse::<f64>())
                .collect::<Result<_, _>>()
                .map_err(|e| Failure::Invalid(format!("cluster `{part}`: {e}")))?;
            match fields[..] {
                [lat, lon, sd, w] => Ok(Cluster::new(lat, lon, sd, w)),
                _ => Err(Failure::Invalid(format!(
                    "cluster `{part}`: expected lat,lon,stddev_km,weight"
                ))),
            }
        })
        .collect()
}

fn cmd_gen_stations(cli: &Cli, args: &GenStationsArgs) -> CliResult {
    let seed = cli.seed.unwrap_or(DATASET_SEED);
    let stations = match (&args.preset, &args.clusters) {
        (Some(name), _) => {
            let preset: Preset = name.parse()?;
            let count = args.count.unwrap_or(preset.count());
            synth_stations(count, preset.clusters(), seed)?
        }
        (None, Some(spec)) => {
            let count = args.count.expect("clap enforces --count");
            synth_stations(count, &parse_clusters(spec)?, seed)?
        }
        (None, None) => unreachable!("clap enforces a source"),
    };
    let mut buf = Vec::new();
    write_stations(&mut buf, &stations).map_err(|e| io_failure("formatting stations", e))?;
    match &args.output {
        Some(path) => write_file(path, &buf),
        None => emit(cli, "stations.csv", &buf),
    }
}
