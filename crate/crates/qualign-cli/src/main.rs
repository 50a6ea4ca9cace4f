//! Command-line entry point.
//!
//! Verbs: `run` (one scenario), `study` (named protocol), `oracle`
//! (brute-force minima and optional landscape export), `timing` (scaling
//! report). Success exits 0; any failure prints a single machine-readable
//! JSON error record to stderr and exits 1.

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use qualign::oracle::LANDSCAPE_CAP;
use qualign::{brute_force_min, build_landscape, GradientMethod};

use qualign_cli::config::{CliOverrides, ScenarioConfig};
use qualign_cli::output::{self, bitstring, fmt_f64};
use qualign_cli::scenario::run_scenario;
use qualign_cli::study::{run_study, timing_report, StudyKind};

#[derive(Parser)]
#[command(name = "qualign-cli", version, about = "Experiment runner for the qualign solver")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one scenario config: per-seed training, histograms, traces.
    Run(RunArgs),
    /// Run a named study protocol derived from a base scenario config.
    Study(StudyArgs),
    /// Brute-force the instance: global minimum, local minima, flat nodes.
    Oracle(OracleArgs),
    /// Wall-clock per optimization iteration at n = 4, 8, 12, 16 qubits.
    Timing(TimingArgs),
}

#[derive(Args)]
struct CommonArgs {
    /// Scenario config file (TOML).
    #[arg(long)]
    config: PathBuf,
    /// Override the config's seed list (repeat for several seeds).
    #[arg(long)]
    seed: Vec<u64>,
    /// Override the config's output directory.
    #[arg(long)]
    out_dir: Option<PathBuf>,
    /// Override the config's shot count.
    #[arg(long)]
    shots: Option<u64>,
    /// Override the config's output formats (repeatable).
    #[arg(long, value_enum)]
    format: Vec<FormatArg>,
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    common: CommonArgs,
}

#[derive(Args)]
struct StudyArgs {
    /// One of: entanglement-sweep, cvar-compare, qaoa-vs-hea, noise-compare.
    kind: String,
    #[command(flatten)]
    common: CommonArgs,
}

#[derive(Args)]
struct OracleArgs {
    /// Scenario config file (only the instance section is used).
    #[arg(long)]
    config: PathBuf,
    /// Output directory (default: the config's, else the current one).
    #[arg(long)]
    out_dir: Option<PathBuf>,
    /// Restrict candidate minima to feasible states.
    #[arg(long)]
    feasible_only: bool,
    /// Also export the full landscape graph (node/edge CSVs, n ≤ 16).
    #[arg(long)]
    landscape: bool,
    /// Override the config's output formats (repeatable).
    #[arg(long, value_enum)]
    format: Vec<FormatArg>,
}

#[derive(Args)]
struct TimingArgs {
    /// Optional scenario config supplying the optimizer settings.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory (default: current directory).
    #[arg(long)]
    out_dir: Option<PathBuf>,
    /// Measured optimization iterations per width (default 10).
    #[arg(long, default_value_t = 10)]
    iterations: usize,
    /// Override the shot count (default 2000 or the config's).
    #[arg(long)]
    shots: Option<u64>,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Json,
    Csv,
}

impl FormatArg {
    fn name(self) -> String {
        match self {
            FormatArg::Json => "json".to_string(),
            FormatArg::Csv => "csv".to_string(),
        }
    }
}

/// The machine-readable failure record printed to stderr.
#[derive(Serialize)]
struct ErrorRecord<'a> {
    error: ErrorBody<'a>,
}

#[derive(Serialize)]
struct ErrorBody<'a> {
    kind: &'a str,
    message: String,
}

enum CliError {
    Config(qualign_cli::config::ConfigError),
    Engine(qualign::Error),
    Usage(String),
}

impl CliError {
    fn kind(&self) -> &'static str {
        match self {
            CliError::Config(_) => "config",
            CliError::Engine(_) => "engine",
            CliError::Usage(_) => "usage",
        }
    }

    fn message(&self) -> String {
        match self {
            CliError::Config(e) => e.to_string(),
            CliError::Engine(e) => e.to_string(),
            CliError::Usage(m) => m.clone(),
        }
    }
}

impl From<qualign_cli::config::ConfigError> for CliError {
    fn from(e: qualign_cli::config::ConfigError) -> Self {
        CliError::Config(e)
    }
}

impl From<qualign::Error> for CliError {
    fn from(e: qualign::Error) -> Self {
        CliError::Engine(e)
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Run(args) => cmd_run(args),
        Command::Study(args) => cmd_study(args),
        Command::Oracle(args) => cmd_oracle(args),
        Command::Timing(args) => cmd_timing(args),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            let record = ErrorRecord {
                error: ErrorBody {
                    kind: err.kind(),
                    message: err.message(),
                },
            };
            eprintln!(
                "{}",
                serde_json::to_string(&record).expect("error record serializes")
            );
            ExitCode::FAILURE
        }
    }
}

fn overrides_of(common: &CommonArgs) -> CliOverrides {
    CliOverrides {
        seeds: common.seed.clone(),
        shots: common.shots,
        out_dir: common.out_dir.clone(),
        formats: common.format.iter().map(|f| f.name()).collect(),
    }
}

fn base_dir_of(config_path: &Path) -> PathBuf {
    config_path
        .parent()
        .filter(|p| !p.as_os_str().is_empty())
        .map(Path::to_path_buf)
        .unwrap_or_else(|| PathBuf::from("."))
}

fn cmd_run(args: RunArgs) -> Result<(), CliError> {
    let config = ScenarioConfig::load(&args.common.config)?;
    let resolved = config.resolve(&base_dir_of(&args.common.config), &overrides_of(&args.common))?;
    let result = run_scenario(&resolved)?;
    result.write(&resolved.out_dir, &resolved)?;

    println!(
        "{} seeds, mean final energy {}, best sampled energy {}{}",
        result.outcomes.len(),
        fmt_f64(result.aggregate.mean_final_energy),
        fmt_f64(result.aggregate.best_energy),
        result
            .aggregate
            .hit_rate
            .map_or_else(String::new, |r| format!(", hit rate {}", fmt_f64(r))),
    );
    println!("top of pooled histogram (full tables in {}):", resolved.out_dir.display());
    let pooled = result.pooled_histogram(&resolved.instance);
    for row in pooled.top(10) {
        println!(
            "  {}  count {:>6}  energy {}  {}",
            row.bitstring,
            row.count,
            fmt_f64(row.energy),
            row.class
        );
    }
    Ok(())
}

fn cmd_study(args: StudyArgs) -> Result<(), CliError> {
    let kind = StudyKind::from_str(&args.kind).map_err(CliError::Usage)?;
    let config = ScenarioConfig::load(&args.common.config)?;
    let resolved = config.resolve(&base_dir_of(&args.common.config), &overrides_of(&args.common))?;
    let study = run_study(kind, &resolved)?;
    study.write(&resolved.out_dir, &resolved)?;

    println!("study {} -> {}", kind.as_str(), resolved.out_dir.display());
    for arm in &study.arms {
        let agg = &arm.result.aggregate;
        println!(
            "  {:<16} mean final energy {}{}",
            arm.name,
            fmt_f64(agg.mean_final_energy),
            agg.hit_rate
                .map_or_else(String::new, |r| format!(", hit rate {}", fmt_f64(r))),
        );
    }
    Ok(())
}

fn cmd_oracle(args: OracleArgs) -> Result<(), CliError> {
    let config = ScenarioConfig::load(&args.config)?;
    let overrides = CliOverrides {
        out_dir: args.out_dir.clone(),
        formats: args.format.iter().map(|f| f.name()).collect(),
        ..CliOverrides::default()
    };
    let resolved = config.resolve(&base_dir_of(&args.config), &overrides)?;
    let instance = &resolved.instance;
    let n = instance.set().num_qubits();
    let report = brute_force_min(instance, args.feasible_only)?;

    std::fs::create_dir_all(&resolved.out_dir).map_err(qualign::Error::from)?;
    if resolved.formats.json {
        #[derive(Serialize)]
        struct Entry {
            bitstring: String,
            energy: f64,
        }
        #[derive(Serialize)]
        struct MinimaJson {
            num_qubits: usize,
            feasible_only: bool,
            global_energy: f64,
            global_states: Vec<String>,
            local_minima: Vec<Entry>,
            flat_nodes: Vec<Entry>,
        }
        let to_entries = |entries: &[qualign::MinimumEntry]| {
            entries
                .iter()
                .map(|e| Entry {
                    bitstring: bitstring(e.index, n),
                    energy: e.energy,
                })
                .collect::<Vec<_>>()
        };
        let json = MinimaJson {
            num_qubits: report.num_qubits,
            feasible_only: report.feasible_only,
            global_energy: report.global_energy,
            global_states: report.global_states.iter().map(|&s| bitstring(s, n)).collect(),
            local_minima: to_entries(&report.local_minima),
            flat_nodes: to_entries(&report.flat_nodes),
        };
        output::write_json(&resolved.out_dir.join("minima.json"), &json)
            .map_err(qualign::Error::from)?;
    }
    if resolved.formats.csv {
        output::write_with(&resolved.out_dir.join("minima.csv"), |out| {
            use std::io::Write;
            writeln!(out, "kind,bitstring,energy")?;
            for &s in &report.global_states {
                writeln!(out, "global,{},{}", bitstring(s, n), fmt_f64(report.global_energy))?;
            }
            for e in &report.local_minima {
                writeln!(out, "local,{},{}", bitstring(e.index, n), fmt_f64(e.energy))?;
            }
            for e in &report.flat_nodes {
                writeln!(out, "flat,{},{}", bitstring(e.index, n), fmt_f64(e.energy))?;
            }
            Ok(())
        })
        .map_err(qualign::Error::from)?;
    }

    if args.landscape {
        if n > LANDSCAPE_CAP {
            return Err(CliError::Usage(format!(
                "landscape export needs n <= {LANDSCAPE_CAP}, got {n}"
            )));
        }
        let graph = build_landscape(instance, args.feasible_only)?;
        let nodes = std::fs::File::create(resolved.out_dir.join("landscape_nodes.csv"))
            .map_err(qualign::Error::from)?;
        graph.write_node_csv(std::io::BufWriter::new(nodes))?;
        let edges = std::fs::File::create(resolved.out_dir.join("landscape_edges.csv"))
            .map_err(qualign::Error::from)?;
        graph.write_edge_csv(std::io::BufWriter::new(edges))?;
    }

    println!(
        "global minimum {} over {} states ({} minimizers, {} strict local minima, {} flat nodes)",
        fmt_f64(report.global_energy),
        1usize << n,
        report.global_states.len(),
        report.local_minima.len(),
        report.flat_nodes.len(),
    );
    Ok(())
}

fn cmd_timing(args: TimingArgs) -> Result<(), CliError> {
    let (method, shots) = match &args.config {
        Some(path) => {
            let config = ScenarioConfig::load(path)?;
            let resolved = config.resolve(&base_dir_of(path), &CliOverrides::default())?;
            (resolved.optimizer.method, resolved.optimizer.shots)
        }
        None => (GradientMethod::ParameterShift, 2000),
    };
    let shots = args.shots.unwrap_or(shots);
    let out_dir = args.out_dir.clone().unwrap_or_else(|| PathBuf::from("."));
    let rows = timing_report(&out_dir, method, shots, args.iterations)?;
    println!("num_qubits,mean_seconds_per_iteration");
    for r in &rows {
        println!("{},{}", r.num_qubits, fmt_f64(r.mean_seconds_per_iteration));
    }
    Ok(())
}
