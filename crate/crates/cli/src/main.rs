//! Command-line front end: hash and pattern inspection, recipe training,
//! synthetic generation, realism metrics, and schedule simulation.
//!
//! Exit codes: 0 on success, 1 for invalid input, 2 for usage errors, 3 for
//! internal failures. Errors print to stderr as `error: <category>: <message>`.

use std::fmt::Write as _;
use std::fs;
use std::panic;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Mutex;

use clap::{Parser, Subcommand, ValueEnum};
use wfforge::recipe_file;
use wfforge::sim_csv;
use wfforge::trace;
use wfforge_core::generator::generate;
use wfforge_core::metrics::{aed_report, thf_report, MetricDetails, MetricReport};
use wfforge_core::model::{normalize_entries_exits, Platform, Workflow};
use wfforge_core::patterns::detect_pattern_occurrences;
use wfforge_core::recipe::{Recipe, RecipeDraft, RECIPE_SCHEMA_VERSION};
use wfforge_core::simulator::{makespan_rel_diff, rmspe_start_dates, simulate};
use wfforge_core::typehash::{compute_type_hashes, debug_strings, DIGEST_VERSION};

/// Largest graph that still gets canonical hash strings printed.
const DEBUG_STRING_LIMIT: usize = 50;

fn version_string() -> String {
    format!(
        "{} (recipe-schema {RECIPE_SCHEMA_VERSION}, digest {DIGEST_VERSION})",
        env!("CARGO_PKG_VERSION")
    )
}

#[derive(Parser)]
#[command(name = "wfforge", version = version_string(), about = "Workflow trace analysis, recipe training, and synthetic generation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print each vertex's type hash, one `id<TAB>digest` line per vertex.
    Hash {
        /// Trace file to hash.
        trace: PathBuf,
        /// Append canonical hash strings (graphs up to 50 vertices).
        #[arg(long)]
        debug_strings: bool,
    },
    /// Detect pattern occurrences, one `pattern<TAB>members` line each.
    Patterns {
        /// Trace file to scan.
        trace: PathBuf,
    },
    /// Recipe training.
    Recipe {
        #[command(subcommand)]
        action: RecipeAction,
    },
    /// Grow a synthetic workflow from a recipe.
    Generate {
        /// Recipe file produced by `recipe build`.
        #[arg(long)]
        recipe: PathBuf,
        /// Requested number of tasks, dummies included.
        #[arg(long)]
        num_tasks: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Where to write the generated trace.
        #[arg(long)]
        out: PathBuf,
        /// Candidates grown per request; the closest to the training
        /// distribution wins.
        #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u32).range(1..))]
        samples: u32,
    },
    /// Score a synthetic trace against a real one.
    Metrics {
        #[arg(long, value_enum)]
        metric: MetricChoice,
        /// Reference trace.
        real: PathBuf,
        /// Trace under evaluation.
        synth: PathBuf,
        /// Also print the per-hash residuals or the edit breakdown.
        #[arg(long)]
        details: bool,
    },
    /// Schedule a trace and emit the resulting CSV.
    Simulate {
        /// Cluster shape as NODESxCORES.
        #[arg(long, default_value = "4x48")]
        platform: String,
        /// Trace file to schedule; every task needs a runtime.
        trace: PathBuf,
    },
    /// Compare two schedule CSVs.
    Compare {
        /// Reference schedule.
        #[arg(long)]
        real: PathBuf,
        /// Schedule under evaluation.
        #[arg(long)]
        synth: PathBuf,
    },
}

#[derive(Subcommand)]
enum RecipeAction {
    /// Train a recipe from one or more trace files.
    Build {
        /// Where to write the recipe.
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Growth replicas averaged per error-matrix cell.
        #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u32).range(1..))]
        samples: u32,
        /// Worker threads for the error matrix.
        #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u64).range(1..))]
        jobs: u64,
        /// Training traces.
        #[arg(required = true)]
        traces: Vec<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum MetricChoice {
    Thf,
    Aed,
}

/// An input failure: anything the user can fix. Always exits 1.
struct AppError {
    category: &'static str,
    message: String,
}

impl AppError {
    fn new(category: &'static str, message: impl Into<String>) -> AppError {
        AppError { category, message: message.into() }
    }
}

fn io_error(path: &Path, e: std::io::Error) -> AppError {
    AppError::new("io", format!("{}: {e}", path.display()))
}

fn read_file(path: &Path) -> Result<String, AppError> {
    fs::read_to_string(path).map_err(|e| io_error(path, e))
}

fn write_file(path: &Path, text: &str) -> Result<(), AppError> {
    fs::write(path, text).map_err(|e| io_error(path, e))
}

fn load_trace(path: &Path) -> Result<Workflow, AppError> {
    let text = read_file(path)?;
    trace::parse_trace(&text).map_err(|e| {
        let category = match e {
            trace::TraceError::Invalid(_) => "validate",
            _ => "parse",
        };
        AppError::new(category, format!("{}: {e}", path.display()))
    })
}

fn parse_platform(s: &str) -> Result<Platform, AppError> {
    let invalid = || AppError::new("input", format!("invalid platform {s:?}: expected NODESxCORES"));
    let (nodes, cores) = s.split_once('x').ok_or_else(invalid)?;
    let nodes: usize = nodes.parse().map_err(|_| invalid())?;
    let cores: usize = cores.parse().map_err(|_| invalid())?;
    Platform::new(nodes, cores).map_err(|_| invalid())
}

fn run(cli: Cli) -> Result<(), AppError> {
    match cli.command {
        Command::Hash { trace, debug_strings } => run_hash(&trace, debug_strings),
        Command::Patterns { trace } => run_patterns(&trace),
        Command::Recipe { action } => {
            let RecipeAction::Build { out, seed, samples, jobs, traces } = action;
            run_recipe_build(&out, seed, samples, jobs as usize, &traces)
        }
        Command::Generate { recipe, num_tasks, seed, out, samples } => {
            run_generate(&recipe, num_tasks, seed, &out, samples)
        }
        Command::Metrics { metric, real, synth, details } => {
            run_metrics(metric, &real, &synth, details)
        }
        Command::Simulate { platform, trace } => run_simulate(&platform, &trace),
        Command::Compare { real, synth } => run_compare(&real, &synth),
    }
}

fn run_hash(path: &Path, with_strings: bool) -> Result<(), AppError> {
    let w = load_trace(path)?;
    let hashes = compute_type_hashes(&w);

    let strings = if with_strings {
        if w.len() <= DEBUG_STRING_LIMIT {
            Some(debug_strings(&w))
        } else {
            eprintln!(
                "note: skipping canonical strings, {} vertices exceeds the {} limit",
                w.len(),
                DEBUG_STRING_LIMIT
            );
            None
        }
    } else {
        None
    };

    let mut out = String::new();
    for v in w.vertices() {
        let th = hashes.th(&v.id).expect("hashes cover every vertex");
        match &strings {
            Some(map) => {
                let s = &map[&v.id];
                let _ = writeln!(out, "{}\t{}\t{}", v.id, th.to_hex(), s.th);
            }
            None => {
                let _ = writeln!(out, "{}\t{}", v.id, th.to_hex());
            }
        }
    }
    print!("{out}");
    Ok(())
}

fn run_patterns(path: &Path) -> Result<(), AppError> {
    let w = load_trace(path)?;
    let w = normalize_entries_exits(&w);
    let hashes = compute_type_hashes(&w);
    let occurrences = detect_pattern_occurrences(&w, &hashes)
        .map_err(|e| AppError::new("input", format!("{}: {e}", path.display())))?;

    let mut out = String::new();
    for po in &occurrences {
        let members: Vec<&str> = po.vertices.iter().map(String::as_str).collect();
        let _ = writeln!(out, "{}\t{}", po.pattern_hash.to_hex(), members.join(","));
    }
    print!("{out}");
    Ok(())
}

/// Fill the error matrix, fanning the (base, target) cells across `jobs`
/// threads. Cells are keyed, so the merge order does not matter.
fn evaluate_cells(
    draft: &RecipeDraft,
    seed: u64,
    samples: u32,
    jobs: usize,
) -> Vec<((usize, usize), f64)> {
    let pairs = draft.error_pairs();
    if jobs <= 1 || pairs.len() <= 1 {
        return pairs
            .into_iter()
            .map(|(b, t)| ((b, t), draft.evaluate_pair(b, t, seed, samples)))
            .collect();
    }

    let jobs = jobs.min(pairs.len());
    let chunk_len = pairs.len().div_ceil(jobs);
    let cells = Mutex::new(Vec::with_capacity(pairs.len()));
    std::thread::scope(|scope| {
        for chunk in pairs.chunks(chunk_len) {
            scope.spawn(|| {
                let local: Vec<((usize, usize), f64)> = chunk
                    .iter()
                    .map(|&(b, t)| ((b, t), draft.evaluate_pair(b, t, seed, samples)))
                    .collect();
                cells.lock().expect("no panics hold the lock").extend(local);
            });
        }
    });
    cells.into_inner().expect("all workers joined")
}

fn run_recipe_build(
    out: &Path,
    seed: u64,
    samples: u32,
    jobs: usize,
    traces: &[PathBuf],
) -> Result<(), AppError> {
    let workflows = traces.iter().map(|p| load_trace(p)).collect::<Result<Vec<_>, _>>()?;
    let draft = RecipeDraft::prepare(workflows, seed)
        .map_err(|e| AppError::new("input", e.to_string()))?;
    let cells = evaluate_cells(&draft, seed, samples, jobs);
    let recipe = draft.finish(cells);
    write_file(out, &recipe_file::save_recipe(&recipe))
}

fn load_recipe(path: &Path) -> Result<Recipe, AppError> {
    let text = read_file(path)?;
    recipe_file::load_recipe(&text)
        .map_err(|e| AppError::new("parse", format!("{}: {e}", path.display())))
}

fn run_generate(
    recipe_path: &Path,
    num_tasks: usize,
    seed: u64,
    out: &Path,
    samples: u32,
) -> Result<(), AppError> {
    let recipe = load_recipe(recipe_path)?;
    let w = generate(&recipe, num_tasks, seed, samples)
        .map_err(|e| AppError::new("input", e.to_string()))?;
    write_file(out, &trace::write_trace(&w))
}

fn run_metrics(
    metric: MetricChoice,
    real: &Path,
    synth: &Path,
    details: bool,
) -> Result<(), AppError> {
    let real = normalize_entries_exits(&load_trace(real)?);
    let synth = normalize_entries_exits(&load_trace(synth)?);
    let report: MetricReport = match metric {
        MetricChoice::Thf => thf_report(&real, &synth),
        MetricChoice::Aed => aed_report(&real, &synth),
    }
    .map_err(|e| AppError::new("input", e.to_string()))?;

    let mut out = format!("{:.6}\n", report.value);
    if details {
        match &report.details {
            MetricDetails::HashResiduals(residuals) => {
                out.push_str("hash,real,synth\n");
                for r in residuals {
                    let _ = writeln!(out, "{},{:.6},{:.6}", r.hash.to_hex(), r.left, r.right);
                }
            }
            MetricDetails::Edits(counts) => {
                let _ = writeln!(out, "matched_vertices,{}", counts.matched_vertices);
                let _ = writeln!(out, "removed_vertices,{}", counts.removed_vertices);
                let _ = writeln!(out, "added_vertices,{}", counts.added_vertices);
                let _ = writeln!(out, "removed_edges,{}", counts.removed_edges);
                let _ = writeln!(out, "added_edges,{}", counts.added_edges);
                let _ = writeln!(out, "total_edits,{}", counts.total());
            }
        }
    }
    print!("{out}");
    Ok(())
}

fn run_simulate(platform: &str, path: &Path) -> Result<(), AppError> {
    let platform = parse_platform(platform)?;
    let w = load_trace(path)?;
    let trace = simulate(&w, platform)
        .map_err(|e| AppError::new("input", format!("{}: {e}", path.display())))?;
    print!("{}", sim_csv::write_schedule(&trace));
    Ok(())
}

fn load_schedule(path: &Path) -> Result<wfforge_core::simulator::ExecutionTrace, AppError> {
    let text = read_file(path)?;
    sim_csv::read_schedule(&text)
        .map_err(|e| AppError::new("parse", format!("{}: {e}", path.display())))
}

fn run_compare(real: &Path, synth: &Path) -> Result<(), AppError> {
    let real = load_schedule(real)?;
    let synth = load_schedule(synth)?;
    let map_err = |e: wfforge_core::simulator::CompareError| AppError::new("input", e.to_string());
    let makespan = makespan_rel_diff(&real, &synth).map_err(map_err)?;
    let rmspe = rmspe_start_dates(&real, &synth).map_err(map_err)?;
    print!("makespan_rel_diff,{makespan:.6}\nrmspe_start_dates,{rmspe:.6}\n");
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    // A panic past argument parsing is an internal failure: report it as one
    // line on stderr instead of a backtrace, and exit 3.
    panic::set_hook(Box::new(|_| {}));
    let outcome = panic::catch_unwind(move || run(cli));
    let _ = panic::take_hook();
    match outcome {
        Ok(Ok(())) => ExitCode::SUCCESS,
        Ok(Err(e)) => {
            eprintln!("error: {}: {}", e.category, e.message);
            ExitCode::from(1)
        }
        Err(cause) => {
            let message = cause
                .downcast_ref::<&str>()
                .map(|s| (*s).to_string())
                .or_else(|| cause.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".to_string());
            eprintln!("error: internal: {message}");
            ExitCode::from(3)
        }
    }
}
