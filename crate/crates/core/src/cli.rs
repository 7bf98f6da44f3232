//! `wsan plan | validate | run`.
//!
//! Exit codes: 0 all fires contained (or nothing to contain), 1 invalid
//! input, 2 runtime failure, 3 run finished with a fire still burning.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};

use crate::engine::{run, Metrics};
use crate::geometry::{node_count_center, node_count_intersection, plan_deployment, GridSpec};
use crate::scenario::{load_and_validate, LoadError, Scenario};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INVALID: i32 = 1;
pub const EXIT_RUNTIME: i32 = 2;
pub const EXIT_UNCONTAINED: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "wsan", version, about = "WSAN and cloud integration simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Print node placements for an n x n grid with sensing range r.
    Plan {
        #[arg(long)]
        n: u32,
        #[arg(long)]
        r: f64,
    },
    /// Check scenario files and list every violation.
    Validate {
        #[arg(required = true)]
        scenarios: Vec<PathBuf>,
    },
    /// Run scenarios, writing a trace and a metrics table for each.
    Run {
        #[arg(required = true)]
        scenarios: Vec<PathBuf>,
        /// Trace output path (single scenario only).
        #[arg(long)]
        trace: Option<PathBuf>,
        /// Metrics CSV output path (single scenario only).
        #[arg(long)]
        metrics: Option<PathBuf>,
        /// Directory for `<stem>.trace.jsonl` and `<stem>.metrics.csv`.
        #[arg(long, default_value = ".")]
        out_dir: PathBuf,
        /// Overrides the scenario's network seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Suppress the summary.
        #[arg(long)]
        quiet: bool,
    },
}

/// Writes via a sibling temp file and a rename, so readers never see a
/// half-written file.
pub fn write_atomic(path: &Path, contents: &[u8]) -> std::io::Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    std::fs::create_dir_all(dir)?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(contents)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| e.error)?;
    Ok(())
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map_or_else(|| "-".to_owned(), |x| format!("{x:.3}"))
}

fn summary(name: &str, m: &Metrics, out: &mut impl Write) -> std::io::Result<()> {
    writeln!(out, "scenario {name}: {} fire(s)", m.fires.len())?;
    writeln!(out, "  fire   detect  dispatch  response  contained  burned_m2")?;
    for f in &m.fires {
        writeln!(
            out,
            "  {:<4} {:>8} {:>9} {:>9} {:>10} {:>10}",
            f.fire_id.0,
            fmt_opt(f.detection_latency()),
            fmt_opt(f.dispatch_latency()),
            fmt_opt(f.response_latency()),
            fmt_opt(f.containment_time()),
            fmt_opt(f.burned_area_at_containment),
        )?;
    }
    for (class, c) in &m.links {
        writeln!(out, "  {}: sent {} delivered {} dropped {}", class.name(), c.sent, c.delivered, c.dropped)?;
    }
    writeln!(out, "  pubsub deliveries: {}", m.pubsub_deliveries)?;
    writeln!(out, "  {}", if m.all_contained() { "all fires contained" } else { "NOT CONTAINED" })
}

fn cmd_plan(n: u32, r: f64, out: &mut impl Write, err: &mut impl Write) -> std::io::Result<i32> {
    let spec = match GridSpec::new(n, r) {
        Ok(s) => s,
        Err(e) => {
            writeln!(err, "error: {e}")?;
            return Ok(EXIT_INVALID);
        }
    };
    let d = plan_deployment(&spec);
    writeln!(out, "grid n={n} r={r} cell_side={} side={}", spec.cell_side(), spec.side())?;
    writeln!(out, "sensors ({}):", d.sensors.len())?;
    for s in &d.sensors {
        writeln!(out, "  sensor {} ({}, {}) ch {}", s.id, s.position.x, s.position.y, s.chno)?;
    }
    writeln!(out, "cluster heads ({}):", d.cluster_heads.len())?;
    for c in &d.cluster_heads {
        writeln!(out, "  ch {} ({}, {})", c.chno, c.position.x, c.position.y)?;
    }
    writeln!(out, "actors ({}):", d.actors.len())?;
    for a in &d.actors {
        writeln!(out, "  actor {} home ({}, {})", a.aa, a.home.x, a.home.y)?;
    }
    let center = node_count_center(n).expect("n already validated");
    let intersection = node_count_intersection(n).expect("n already validated");
    writeln!(out, "center: {center}, intersection: {intersection}")?;
    Ok(EXIT_OK)
}

fn load_all(paths: &[PathBuf], err: &mut impl Write) -> std::io::Result<Option<Vec<Scenario>>> {
    let mut ok = Vec::new();
    let mut failed = false;
    for p in paths {
        match load_and_validate(p) {
            Ok(s) => ok.push(s),
            Err(e) => {
                failed = true;
                match e {
                    LoadError::Invalid(rep) => write!(err, "{}: {rep}", p.display())?,
                    other => writeln!(err, "{}: {other}", p.display())?,
                }
            }
        }
    }
    Ok((!failed).then_some(ok))
}

fn output_paths(scenario: &Path, out_dir: &Path) -> (PathBuf, PathBuf) {
    let stem = scenario.file_stem().map_or_else(|| "scenario".into(), |s| s.to_string_lossy().into_owned());
    (out_dir.join(format!("{stem}.trace.jsonl")), out_dir.join(format!("{stem}.metrics.csv")))
}

#[allow(clippy::too_many_arguments)]
fn cmd_run(
    paths: &[PathBuf],
    trace: Option<PathBuf>,
    metrics: Option<PathBuf>,
    out_dir: &Path,
    seed: Option<u64>,
    quiet: bool,
    out: &mut impl Write,
    err: &mut impl Write,
) -> std::io::Result<i32> {
    if paths.len() > 1 && (trace.is_some() || metrics.is_some()) {
        writeln!(err, "error: --trace and --metrics take a single scenario; use --out-dir for several")?;
        return Ok(EXIT_INVALID);
    }
    let Some(scenarios) = load_all(paths, err)? else {
        return Ok(EXIT_INVALID);
    };
    let mut code = EXIT_OK;
    for (path, mut sc) in paths.iter().zip(scenarios) {
        if let Some(s) = seed {
            sc.network.seed = s;
        }
        let result = match run(&sc) {
            Ok(r) => r,
            Err(e) => {
                writeln!(err, "{}: runtime error: {e}", path.display())?;
                code = EXIT_RUNTIME;
                continue;
            }
        };
        let (default_trace, default_metrics) = output_paths(path, out_dir);
        let trace_path = trace.clone().unwrap_or(default_trace);
        let metrics_path = metrics.clone().unwrap_or(default_metrics);
        let written = write_atomic(&trace_path, result.trace.to_text().as_bytes())
            .and_then(|_| write_atomic(&metrics_path, result.metrics.to_csv().as_bytes()));
        if let Err(e) = written {
            writeln!(err, "{}: cannot write outputs: {e}", path.display())?;
            code = EXIT_RUNTIME;
            continue;
        }
        if !quiet {
            summary(&sc.name, &result.metrics, out)?;
            writeln!(out, "  trace: {}\n  metrics: {}", trace_path.display(), metrics_path.display())?;
        }
        if !result.all_contained && code == EXIT_OK {
            code = EXIT_UNCONTAINED;
        }
    }
    Ok(code)
}

/// Parses `args` (including the program name) and runs the command.
pub fn main_with_args<I, T>(args: I, out: &mut impl Write, err: &mut impl Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = write!(err, "{e}");
            return if e.use_stderr() { EXIT_INVALID } else { EXIT_OK };
        }
    };
    let result = match cli.command {
        Command::Plan { n, r } => cmd_plan(n, r, out, err),
        Command::Validate { scenarios } => load_all(&scenarios, err).and_then(|ok| {
            if let Some(list) = &ok {
                for (p, s) in scenarios.iter().zip(list) {
                    writeln!(out, "{}: ok ({}, hash {})", p.display(), s.name, s.structure_hash())?;
                }
            }
            Ok(if ok.is_some() { EXIT_OK } else { EXIT_INVALID })
        }),
        Command::Run { scenarios, trace, metrics, out_dir, seed, quiet } => {
            cmd_run(&scenarios, trace, metrics, &out_dir, seed, quiet, out, err)
        }
    };
    result.unwrap_or_else(|e| {
        let _ = writeln!(err, "io error: {e}");
        EXIT_RUNTIME
    })
}
