use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Duration;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

use covred::bench::{self, Algorithm, BenchConfig, BenchError, ReportFormat};
use covred::ingest::{self, IngestError};
use covred::{
    all_reducts, nihv, related_family, CoveringDecisionSystem, CoveringMutation, DynamicError, IncrementalState,
    MutationFile, MutationKind, ReductReport,
};

#[derive(Parser)]
#[command(name = "covred", version, about = "Attribute reduction for covering decision systems")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compute reducts of a dataset or system file.
    Reduce {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, default_value_t = 0.05)]
        epsilon: f64,
        #[arg(long, value_enum, default_value_t = ReduceAlgo::Nihv)]
        algo: ReduceAlgo,
        /// Build one covering from all attributes instead of one per attribute.
        #[arg(long)]
        joint: bool,
        /// Decision column name (default: last column).
        #[arg(long)]
        decision: Option<String>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Mutate one covering and update reducts incrementally.
    Dynamic {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, value_enum)]
        mode: Mode,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 0.3)]
        intensity: f64,
        #[arg(long, value_enum)]
        algo: DynamicAlgo,
        /// Explicit mutation JSON instead of a random one.
        #[arg(long)]
        mutation: Option<PathBuf>,
        /// Covering to mutate (default: last).
        #[arg(long)]
        target: Option<usize>,
        #[arg(long, default_value_t = 0.05)]
        epsilon: f64,
        #[arg(long)]
        decision: Option<String>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Time NIHV against the incremental reducers over fraction sub-systems.
    Bench {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, value_enum)]
        mode: Mode,
        #[arg(long, default_value = "10:100:10")]
        fractions: String,
        #[arg(long, default_value_t = 10)]
        repeats: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value = "csv")]
        format: String,
        #[arg(long, default_value_t = 0.05)]
        epsilon: f64,
        #[arg(long, default_value_t = 0.3)]
        intensity: f64,
        /// Comma-separated subset of NIHV,IHVR,IHVC,ALL_EXACT,ALL_INCR.
        #[arg(long)]
        algos: Option<String>,
        /// Shuffle objects with this seed before taking fractions.
        #[arg(long)]
        shuffle: Option<u64>,
        /// Per-run cap in seconds.
        #[arg(long)]
        timeout: Option<f64>,
        #[arg(long)]
        decision: Option<String>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum ReduceAlgo {
    Nihv,
    All,
}

#[derive(Clone, Copy, ValueEnum)]
enum DynamicAlgo {
    Ihvr,
    Ihvc,
    AllIncr,
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Refine,
    Coarsen,
}

impl From<Mode> for MutationKind {
    fn from(m: Mode) -> Self {
        match m {
            Mode::Refine => MutationKind::Refine,
            Mode::Coarsen => MutationKind::Coarsen,
        }
    }
}

enum Failure {
    Validation(String),
    Io(String),
}

impl From<IngestError> for Failure {
    fn from(e: IngestError) -> Self {
        match e {
            IngestError::Io { .. } => Failure::Io(e.to_string()),
            _ => Failure::Validation(e.to_string()),
        }
    }
}

impl From<BenchError> for Failure {
    fn from(e: BenchError) -> Self {
        match e {
            BenchError::Io { .. } => Failure::Io(e.to_string()),
            BenchError::Ingest(e) => e.into(),
            _ => Failure::Validation(e.to_string()),
        }
    }
}

impl From<DynamicError> for Failure {
    fn from(e: DynamicError) -> Self {
        Failure::Validation(e.to_string())
    }
}

fn load_system(
    path: &Path,
    epsilon: f64,
    joint: bool,
    decision: Option<&str>,
) -> Result<CoveringDecisionSystem, Failure> {
    if path.extension().is_some_and(|e| e == "json") {
        return Ok(bench::load_system_file(path)?);
    }
    let table = ingest::normalize(&ingest::load_csv(path, decision)?);
    let system = if joint {
        ingest::build_joint_cdis(&table, epsilon)?
    } else {
        ingest::build_cdis(&table, epsilon)?
    };
    Ok(system)
}

fn write_json<T: Serialize>(value: &T, out: Option<&Path>) -> Result<(), Failure> {
    let text = serde_json::to_string_pretty(value).expect("output serializes");
    match out {
        Some(p) => std::fs::write(p, text + "\n").map_err(|e| Failure::Io(format!("{}: {e}", p.display()))),
        None => {
            println!("{text}");
            Ok(())
        }
    }
}

#[derive(Serialize)]
struct DynamicReport {
    target: usize,
    kind: MutationKind,
    generation: u64,
    mutation: MutationFile,
    heuristic: Vec<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    reducts: Option<Vec<Vec<usize>>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    retained: Option<Vec<Vec<usize>>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    added: Option<Vec<Vec<usize>>>,
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Reduce { input, epsilon, algo, joint, decision, out } => {
            let system = load_system(&input, epsilon, joint, decision.as_deref())?;
            let heuristic = nihv(&system).to_vec();
            let reducts = match algo {
                ReduceAlgo::All => Some(all_reducts(&related_family(&system)).to_lists()),
                ReduceAlgo::Nihv => None,
            };
            write_json(&ReductReport { reducts, heuristic }, out.as_deref())
        }
        Command::Dynamic {
            input,
            mode,
            seed,
            intensity,
            algo,
            mutation,
            target,
            epsilon,
            decision,
            out,
        } => {
            let kind = MutationKind::from(mode);
            match (algo, kind) {
                (DynamicAlgo::Ihvr, MutationKind::Coarsen) => {
                    return Err(Failure::Validation("ihvr needs --mode refine".into()))
                }
                (DynamicAlgo::Ihvc, MutationKind::Refine) => {
                    return Err(Failure::Validation("ihvc needs --mode coarsen".into()))
                }
                _ => {}
            }
            let system = load_system(&input, epsilon, false, decision.as_deref())?;
            let mutation = match mutation {
                Some(path) => {
                    let text = std::fs::read_to_string(&path)
                        .map_err(|e| Failure::Io(format!("{}: {e}", path.display())))?;
                    let file: MutationFile = serde_json::from_str(&text)
                        .map_err(|e| Failure::Validation(format!("{}: {e}", path.display())))?;
                    if file.kind != kind {
                        return Err(Failure::Validation("mutation kind disagrees with --mode".into()));
                    }
                    CoveringMutation::from_file(&system, file)?
                }
                None => {
                    let t = target.unwrap_or(system.len() - 1);
                    if t >= system.len() {
                        return Err(DynamicError::TargetOutOfRange { target: t, m: system.len() }.into());
                    }
                    let outcome = match kind {
                        MutationKind::Refine => ingest::random_refine(system.covering(t), seed, intensity)?,
                        MutationKind::Coarsen => ingest::random_coarsen(system.covering(t), seed, intensity)?,
                    };
                    CoveringMutation::new(&system, t, kind, outcome.covering)?
                }
            };
            let t = mutation.target();
            let mut state = IncrementalState::new(system, t)?;
            let exact = matches!(algo, DynamicAlgo::AllIncr);
            if exact {
                state = state.with_reducts();
            }
            let family = match kind {
                MutationKind::Refine => state.update_related_refine(&mutation)?,
                MutationKind::Coarsen => state.update_related_coarsen(&mutation)?,
            };
            let heuristic = match kind {
                MutationKind::Refine => state.ihvr(&family),
                MutationKind::Coarsen => state.ihvc(&family),
            };
            let split = if exact {
                Some(match kind {
                    MutationKind::Refine => state.incremental_all_reducts_refine(&family)?,
                    MutationKind::Coarsen => state.incremental_all_reducts_coarsen(&family)?,
                })
            } else {
                None
            };
            let report = DynamicReport {
                target: t,
                kind,
                generation: state.generation() + 1,
                mutation: mutation.to_file(),
                heuristic: heuristic.to_vec(),
                reducts: split.as_ref().map(|s| s.all.to_lists()),
                retained: split.as_ref().map(|s| s.retained.to_lists()),
                added: split.as_ref().map(|s| s.added.to_lists()),
            };
            write_json(&report, out.as_deref())
        }
        Command::Bench {
            input,
            mode,
            fractions,
            repeats,
            seed,
            out,
            format,
            epsilon,
            intensity,
            algos,
            shuffle,
            timeout,
            decision,
        } => {
            let format: ReportFormat = format.parse().map_err(Failure::Validation)?;
            let mut config = BenchConfig::new(&input, mode.into());
            config.fractions = bench::parse_fractions(&fractions).map_err(Failure::Validation)?;
            config.repeats = repeats;
            config.seed = seed;
            config.epsilon = epsilon;
            config.intensity = intensity;
            config.shuffle = shuffle;
            config.decision_column = decision;
            if let Some(t) = timeout {
                if !(t > 0.0 && t.is_finite()) {
                    return Err(Failure::Validation(format!("timeout must be positive, got {t}")));
                }
                config.timeout = Some(Duration::from_secs_f64(t));
            }
            if let Some(list) = algos {
                config.algorithms = list
                    .split(',')
                    .map(|a| a.trim().parse::<Algorithm>())
                    .collect::<Result<_, _>>()
                    .map_err(Failure::Validation)?;
            }
            let report = bench::run_benchmark(&config)?;
            for path in bench::emit_report(&report, format, &out)? {
                log::info!("wrote {}", path.display());
            }
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
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
        Err(Failure::Validation(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Io(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
