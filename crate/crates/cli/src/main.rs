use std::fs::{self, File};
use std::io::{self, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use mtcache::harness::{
    capacity_sweep, compare_policies, parse_policy_list, parse_targets, run_events, run_scenario,
    suggest_dc_size_with, write_samples, write_sweep, ConfigError, HarnessError, PolicyKind,
    Scenario, SearchBounds, SizingOptions, DEFAULT_RESOLUTION, DEFAULT_SIZING_TXNS, DEFAULT_TRIALS,
};
use mtcache::workload::trace::{read_trace, write_trace};
use mtcache::workload::{generate_stream, DEFAULT_UNIVERSE_SIZE};

#[derive(Parser)]
#[command(name = "mtcache", version, about = "Multi-tenant slot cache simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one scenario and write its samples as CSV.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Override the scenario seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Replay this trace instead of generating the stream.
        #[arg(long)]
        trace: Option<PathBuf>,
        /// Override the sampling stride (1 = every transaction).
        #[arg(long)]
        sample_every: Option<u64>,
        /// Output file; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Replay one generated trace through several policies.
    Compare {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, default_value = "global,static,maxmin_fair")]
        policies: String,
        /// Directory receiving one `<policy>.csv` per policy.
        #[arg(long)]
        out: PathBuf,
    },
    /// Smallest capacity meeting each target hit rate, per policy.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        /// `start:end:step` or a comma-separated list.
        #[arg(long, default_value = "0.3:0.9:0.1")]
        targets: String,
        #[arg(long, default_value = "global,static,maxmin_fair")]
        policies: String,
        /// Smallest capacity tried (defaults to the resolution).
        #[arg(long)]
        lower: Option<usize>,
        /// Largest capacity tried (defaults to the sum of tenant universes).
        #[arg(long)]
        upper: Option<usize>,
        #[arg(long, default_value_t = DEFAULT_RESOLUTION)]
        resolution: usize,
        #[arg(long, default_value_t = DEFAULT_TRIALS)]
        trials: u32,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Dedicated partition size meeting a hard requirement.
    SuggestDc {
        #[arg(long)]
        hard: f64,
        /// Least skewed Zipf exponent the tenant may show.
        #[arg(long)]
        alpha: f64,
        #[arg(long, default_value_t = DEFAULT_UNIVERSE_SIZE)]
        universe: u64,
        #[arg(long, default_value_t = DEFAULT_RESOLUTION)]
        resolution: usize,
        #[arg(long, default_value_t = DEFAULT_TRIALS)]
        trials: u32,
        #[arg(long, default_value_t = DEFAULT_SIZING_TXNS)]
        txns: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Write the scenario's generated access stream as a trace file.
    ExportTrace {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

enum Failure {
    Config(String),
    Infeasible(String),
    Io(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Io(_) => 1,
            Failure::Config(_) => 2,
            Failure::Infeasible(_) => 3,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Config(m) | Failure::Infeasible(m) | Failure::Io(m) => m,
        }
    }
}

impl From<HarnessError> for Failure {
    fn from(e: HarnessError) -> Self {
        match e {
            HarnessError::Config(_) | HarnessError::UnknownTenant(_) => {
                Failure::Config(e.to_string())
            }
            HarnessError::Infeasible { .. } => Failure::Infeasible(e.to_string()),
            HarnessError::Sharing(_) => Failure::Io(e.to_string()),
        }
    }
}

impl From<ConfigError> for Failure {
    fn from(e: ConfigError) -> Self {
        Failure::Config(e.to_string())
    }
}

fn io_err(path: &Path) -> impl Fn(io::Error) -> Failure + '_ {
    move |e| Failure::Io(format!("{}: {e}", path.display()))
}

fn load_scenario(path: &Path) -> Result<Scenario, Failure> {
    let text = fs::read_to_string(path).map_err(io_err(path))?;
    Ok(Scenario::from_json(&text)?)
}

fn output(path: Option<&Path>) -> Result<Box<dyn Write>, Failure> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p).map_err(io_err(p))?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn finish(mut w: Box<dyn Write>, path: Option<&Path>) -> Result<(), Failure> {
    w.flush().map_err(|e| {
        Failure::Io(format!(
            "{}: {e}",
            path.map_or("stdout".into(), |p| p.display().to_string())
        ))
    })
}

fn policies(list: &str) -> Result<Vec<PolicyKind>, Failure> {
    parse_policy_list(list).map_err(|e| Failure::Config(format!("--policies: {e}")))
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Run {
            config,
            seed,
            trace,
            sample_every,
            out,
        } => {
            let mut scenario = load_scenario(&config)?;
            if let Some(seed) = seed {
                scenario.seed = seed;
            }
            if let Some(every) = sample_every {
                scenario.sample_every = every;
                scenario.validate()?;
            }
            let records = match trace {
                Some(path) => {
                    let file = File::open(&path).map_err(io_err(&path))?;
                    let events = read_trace(BufReader::new(file))
                        .map_err(|e| Failure::Config(format!("{}: {e}", path.display())))?;
                    run_events(&scenario, events)?
                }
                None => run_scenario(&scenario)?,
            };
            let mut w = output(out.as_deref())?;
            write_samples(&records, &mut w).map_err(|e| Failure::Io(e.to_string()))?;
            finish(w, out.as_deref())
        }
        Command::Compare {
            config,
            policies: list,
            out,
        } => {
            let scenario = load_scenario(&config)?;
            let list = policies(&list)?;
            let results = compare_policies(&scenario, &list)?;
            fs::create_dir_all(&out).map_err(io_err(&out))?;
            for (policy, records) in results {
                let path = out.join(format!("{policy}.csv"));
                let mut w = output(Some(&path))?;
                write_samples(&records, &mut w).map_err(io_err(&path))?;
                finish(w, Some(&path))?;
            }
            Ok(())
        }
        Command::Sweep {
            config,
            targets,
            policies: list,
            lower,
            upper,
            resolution,
            trials,
            out,
        } => {
            let scenario = load_scenario(&config)?;
            let list = policies(&list)?;
            let targets =
                parse_targets(&targets).map_err(|e| Failure::Config(format!("--targets: {e}")))?;
            let upper = upper.unwrap_or_else(|| {
                scenario
                    .tenants
                    .iter()
                    .map(|t| t.workload.universe_size as usize)
                    .sum()
            });
            let bounds = SearchBounds::new(lower.unwrap_or(resolution), upper)
                .with_resolution(resolution)
                .with_trials(trials);
            let rows = capacity_sweep(&scenario, &targets, &list, &bounds)?;
            let mut w = output(out.as_deref())?;
            write_sweep(&rows, &mut w).map_err(|e| Failure::Io(e.to_string()))?;
            finish(w, out.as_deref())?;
            if let Some(r) = rows.iter().find(|r| r.min_slots.is_none()) {
                return Err(Failure::Infeasible(format!(
                    "target {} is not met by {} within {upper} slots",
                    r.target, r.policy
                )));
            }
            Ok(())
        }
        Command::SuggestDc {
            hard,
            alpha,
            universe,
            resolution,
            trials,
            txns,
            seed,
        } => {
            let opts = SizingOptions {
                resolution,
                trials,
                total_txns: txns,
                seed,
            };
            let slots = suggest_dc_size_with(hard, alpha, universe, &opts)?;
            println!("{slots}");
            Ok(())
        }
        Command::ExportTrace { config, seed, out } => {
            let scenario = load_scenario(&config)?;
            let stream = generate_stream(
                &scenario.workloads(),
                scenario.total_txns,
                seed.unwrap_or(scenario.seed),
            )
            .map_err(|e| Failure::Config(e.to_string()))?;
            let mut w = output(out.as_deref())?;
            write_trace(stream, &mut w).map_err(|e| Failure::Io(e.to_string()))?;
            finish(w, out.as_deref())
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("mtcache: {}", f.message());
            ExitCode::from(f.code())
        }
    }
}
