//! Argument parsing and the subcommands.

use std::ffi::OsString;
use std::fmt;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use clap::{Args, Parser, Subcommand};
use vmac_core::admission::{decide, AdmissionRequest, LinkConfig, Policy, QualityClass, Verdict, BITS_PER_MBIT};
use vmac_core::bounds::{hoeffding_delta, HoeffdingQuery};
use vmac_core::experiments::{
    run_burstiness_table, run_content_comparison, run_probability_sweep, run_rate_timeseries, run_window_sweep,
    sample_scenario, timeseries_seed, ExperimentConfig, ScenarioPins, SeriesSource,
};
use vmac_core::synth::{synth_bounded_trace, synth_class_trace, ClassProfile};
use vmac_core::trace::{load_trace_dir, parse_trace_file, ContentClass, FlowRateBounds, VideoTrace};
use vmac_core::{Error, Execution};

use crate::table::{format_real, Cell, OutputTable};

const DEFAULT_SEED: u64 = 1;

#[derive(Parser)]
#[command(
    name = "vmac",
    version,
    about = "Average vs instantaneous aggregate-rate admission control for VBR video"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Summarize a trace file.
    Ingest {
        path: PathBuf,
        /// Frame rate for files without a `# fps=` header.
        #[arg(long)]
        fps: Option<f64>,
    },
    /// P(average < instantaneous) against the number of flows.
    SweepFlows {
        #[command(flatten)]
        lib: LibraryArgs,
        #[command(flatten)]
        mc: MonteCarloArgs,
        /// Flow counts: `start:end:step`, a comma list, or a single count.
        #[arg(long, default_value = "5:40:5")]
        flows: FlowCounts,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Instantaneous and window-average aggregate rate for one flow set.
    Timeseries {
        #[command(flatten)]
        lib: LibraryArgs,
        #[arg(long, default_value_t = 20)]
        flows: usize,
        #[arg(long, default_value_t = 5000)]
        duration: u64,
        #[arg(long, default_value_t = ExperimentConfig::DEFAULT_WINDOW)]
        window: u64,
        #[arg(long, env = "VMAC_SEED", default_value_t = DEFAULT_SEED)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Peak-to-mean ratio and coefficient of variation of both rate series.
    Burstiness {
        #[command(flatten)]
        lib: LibraryArgs,
        #[command(flatten)]
        mc: MonteCarloArgs,
        #[arg(long, default_value = "5,40")]
        flows: FlowCounts,
        /// Slots per time series.
        #[arg(long, default_value_t = 5000)]
        duration: u64,
        /// `slots` (one flow set over time) or `decisions` (the sweep samples).
        #[arg(long, default_value = "slots")]
        source: SourceArg,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Probability against the measurement window length.
    SweepWindow {
        #[command(flatten)]
        lib: LibraryArgs,
        #[command(flatten)]
        mc: MonteCarloArgs,
        #[arg(long, default_value_t = 40)]
        flows: usize,
        /// Window lengths in slots: `start:end:step` or a comma list.
        #[arg(long, default_value = "5,10,15,20,25")]
        windows: FlowCounts,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Probability per content class.
    Content {
        #[command(flatten)]
        lib: LibraryArgs,
        #[command(flatten)]
        mc: MonteCarloArgs,
        /// Comma list of classes present in the library.
        #[arg(long, default_value = "sports,news")]
        classes: String,
        #[arg(long, default_value = "5,40")]
        flows: FlowCounts,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Hoeffding bound on the instantaneous rate exceeding its average.
    Hoeffding {
        #[arg(long)]
        n: usize,
        /// Per-flow deviation, in the same unit as the widths.
        #[arg(long)]
        epsilon: f64,
        /// Comma list of per-flow range widths; a single value applies to all flows.
        #[arg(long, value_delimiter = ',', required = true)]
        widths: Vec<f64>,
    },
    /// One admission decision on a seeded scenario.
    Admit {
        #[command(flatten)]
        lib: LibraryArgs,
        #[arg(long)]
        policy: String,
        #[arg(long)]
        capacity_mbps: f64,
        #[arg(long, conflicts_with = "rate_mbps", required_unless_present = "rate_mbps")]
        class: Option<String>,
        #[arg(long)]
        rate_mbps: Option<f64>,
        #[arg(long)]
        flows: usize,
        #[arg(long, default_value_t = ExperimentConfig::DEFAULT_WINDOW)]
        window: u64,
        #[arg(long, env = "VMAC_SEED", default_value_t = DEFAULT_SEED)]
        seed: u64,
        /// Start every flow at this frame offset.
        #[arg(long)]
        offset: Option<usize>,
        /// Decide at this slot.
        #[arg(long)]
        slot: Option<u64>,
    },
    /// Write a synthetic trace file.
    Synth {
        /// Content class profile; mutually exclusive with the bounded-uniform mode.
        #[arg(long, conflicts_with_all = ["min_mbps", "max_mbps"])]
        class: Option<ContentClass>,
        /// Mean rate of the class profile.
        #[arg(long)]
        mean_mbps: Option<f64>,
        /// Lower rate bound for i.i.d. uniform frames.
        #[arg(long, requires = "max_mbps")]
        min_mbps: Option<f64>,
        #[arg(long, requires = "min_mbps")]
        max_mbps: Option<f64>,
        #[arg(long, default_value_t = 7500)]
        frames: usize,
        #[arg(long, default_value_t = 25.0)]
        fps: f64,
        #[arg(long, env = "VMAC_SEED", default_value_t = DEFAULT_SEED)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
struct LibraryArgs {
    /// Directory of `*.trace` / `*.txt` files.
    #[arg(long, default_value = "traces")]
    traces_dir: PathBuf,
    /// Frame rate for trace files without a `# fps=` header.
    #[arg(long)]
    fps: Option<f64>,
    /// Run on one thread.
    #[arg(long)]
    sequential: bool,
}

#[derive(Args)]
struct MonteCarloArgs {
    #[arg(long, default_value_t = ExperimentConfig::DEFAULT_WINDOW)]
    window: u64,
    #[arg(long, default_value_t = ExperimentConfig::DEFAULT_RUNS)]
    runs: usize,
    #[arg(long, default_value_t = ExperimentConfig::DEFAULT_REPS)]
    reps: usize,
    #[arg(long, env = "VMAC_SEED", default_value_t = DEFAULT_SEED)]
    seed: u64,
    #[arg(long, default_value_t = ExperimentConfig::DEFAULT_CONFIDENCE)]
    confidence: f64,
}

#[derive(Clone, Debug)]
struct FlowCounts(Vec<usize>);

impl std::str::FromStr for FlowCounts {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let num = |t: &str| t.trim().parse::<usize>().map_err(|_| format!("not a count: {t:?}"));
        let counts = if s.contains(':') {
            let parts: Vec<&str> = s.split(':').collect();
            let [start, end, step] = parts.as_slice() else {
                return Err(format!("expected start:end:step, got {s:?}"));
            };
            let (start, end, step) = (num(start)?, num(end)?, num(step)?);
            if step == 0 || end < start {
                return Err(format!("empty or unbounded range {s:?}"));
            }
            (start..=end).step_by(step).collect()
        } else {
            s.split(',').map(num).collect::<Result<Vec<_>, _>>()?
        };
        if counts.contains(&0) {
            return Err("counts must be at least 1".into());
        }
        Ok(FlowCounts(counts))
    }
}

#[derive(Clone, Copy, Debug)]
enum SourceArg {
    Slots,
    Decisions,
}

impl std::str::FromStr for SourceArg {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "slots" => Ok(SourceArg::Slots),
            "decisions" => Ok(SourceArg::Decisions),
            _ => Err(format!("expected slots or decisions, got {s:?}")),
        }
    }
}

/// A failure with its exit status.
#[derive(Debug)]
enum Failure {
    /// Bad flags or configuration (exit 2).
    Config(String),
    /// Unreadable or unusable data (exit 3).
    Data(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Config(_) => 2,
            Failure::Data(_) => 3,
        }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::Config(m) | Failure::Data(m) => f.write_str(m),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let msg = e.to_string();
        match e {
            Error::InvalidConfig(_)
            | Error::InvalidBounds { .. }
            | Error::BoundsTooTight { .. }
            | Error::DegenerateRanges
            | Error::WindowOutOfRange { .. }
            | Error::InvalidFps(_) => Failure::Config(msg),
            _ => Failure::Data(msg),
        }
    }
}

fn io_failure(path: &Path, e: std::io::Error) -> Failure {
    Failure::Data(format!("{}: {e}", path.display()))
}

fn mbps(bps: f64) -> f64 {
    bps / BITS_PER_MBIT
}

/// Shortest decimal form, trailing zeros dropped: 0.48, 30, 29.97.
fn short(x: f64) -> String {
    let s = format!("{x:.6}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s == "-0" {
        "0".into()
    } else {
        s.into()
    }
}

fn execution(sequential: bool) -> Execution {
    if sequential {
        Execution::Sequential
    } else {
        Execution::Parallel
    }
}

fn load_library(lib: &LibraryArgs) -> Result<Vec<VideoTrace>, Failure> {
    load_trace_dir(&lib.traces_dir, lib.fps).map_err(|e| match e {
        Error::EmptyLibrary => Failure::Data(format!("{}: no trace files found", lib.traces_dir.display())),
        Error::Io { .. } | Error::MalformedLine { .. } => Failure::Data(e.to_string()),
        other => Failure::from(other),
    })
}

fn experiment(lib: &LibraryArgs, mc: &MonteCarloArgs, flows: Vec<usize>) -> Result<ExperimentConfig, Failure> {
    let mut cfg = ExperimentConfig::new(load_library(lib)?, flows, mc.seed);
    cfg.window_slots = mc.window;
    cfg.runs_per_rep = mc.runs;
    cfg.reps = mc.reps;
    cfg.confidence = mc.confidence;
    cfg.execution = execution(lib.sequential);
    cfg.validate()?;
    Ok(cfg)
}

/// Writes `text` to `out`, or hands it back for stdout when `out` is `None`.
fn emit_text(text: String, out: Option<&Path>) -> Result<String, Failure> {
    match out {
        Some(p) => std::fs::write(p, text)
            .map(|_| String::new())
            .map_err(|e| io_failure(p, e)),
        None => Ok(text),
    }
}

fn emit(table: &OutputTable, out: Option<&Path>) -> Result<String, Failure> {
    emit_text(table.to_csv(), out)
}

fn push(table: &mut OutputTable, row: Vec<Cell>) {
    table.push(row).expect("row matches header");
}

fn cmd_ingest(path: &Path, fps: Option<f64>) -> Result<String, Failure> {
    let trace = parse_trace_file(path, fps).map_err(|e| match e {
        Error::Io { .. } => Failure::Data(e.to_string()),
        other => Failure::Data(format!("{}: {other}", path.display())),
    })?;
    let rates: Vec<f64> = trace.rates().collect();
    let mean = rates.iter().sum::<f64>() / rates.len() as f64;
    let peak = rates.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min = rates.iter().copied().fold(f64::INFINITY, f64::min);
    let mut line = format!(
        "frames={} fps={} mean={}Mbps peak={}Mbps min={}Mbps",
        trace.len(),
        short(trace.fps()),
        short(mbps(mean)),
        short(mbps(peak)),
        short(mbps(min))
    );
    if trace.content_class() != ContentClass::Unknown {
        line.push_str(&format!(" class={}", trace.content_class()));
    }
    line.push('\n');
    Ok(line)
}

fn cmd_sweep_flows(
    lib: &LibraryArgs,
    mc: &MonteCarloArgs,
    flows: FlowCounts,
    out: Option<&Path>,
) -> Result<String, Failure> {
    let cfg = experiment(lib, mc, flows.0)?;
    let result = run_probability_sweep(&cfg)?;
    let mut t = OutputTable::new(&["flows", "prob_mean", "ci_half_width", "confidence"]);
    for row in &result.rows {
        let p = row.probability;
        push(
            &mut t,
            vec![
                row.flow_count.into(),
                p.mean.into(),
                p.ci_half_width.into(),
                p.confidence.into(),
            ],
        );
    }
    emit(&t, out)
}

fn cmd_timeseries(
    lib: &LibraryArgs,
    flows: usize,
    duration: u64,
    window: u64,
    seed: u64,
    out: Option<&Path>,
) -> Result<String, Failure> {
    let mut cfg = ExperimentConfig::new(load_library(lib)?, vec![flows], seed);
    cfg.window_slots = window;
    cfg.execution = execution(lib.sequential);
    let ts = run_rate_timeseries(&cfg, flows, duration, timeseries_seed(seed, flows))?;
    let mut t = OutputTable::new(&["slot", "inst_bps", "avg_bps"]);
    for i in 0..ts.len() {
        push(
            &mut t,
            vec![ts.slots[i].into(), ts.instantaneous[i].into(), ts.average[i].into()],
        );
    }
    emit(&t, out)
}

fn cmd_burstiness(
    lib: &LibraryArgs,
    mc: &MonteCarloArgs,
    flows: FlowCounts,
    duration: u64,
    source: SourceArg,
    out: Option<&Path>,
) -> Result<String, Failure> {
    let cfg = experiment(lib, mc, flows.0.clone())?;
    let wanted = match source {
        SourceArg::Slots => SeriesSource::Slots,
        SourceArg::Decisions => SeriesSource::Decisions,
    };
    let rows = run_burstiness_table(&cfg, &flows.0, duration)?;
    let mut t = OutputTable::new(&["flows", "rate_kind", "pmr", "cov"]);
    for r in rows.iter().filter(|r| r.source == wanted) {
        push(
            &mut t,
            vec![
                r.flow_count.into(),
                r.rate_kind.name().into(),
                r.peak_to_mean.into(),
                r.cov.into(),
            ],
        );
    }
    emit(&t, out)
}

fn cmd_sweep_window(
    lib: &LibraryArgs,
    mc: &MonteCarloArgs,
    flows: usize,
    windows: FlowCounts,
    out: Option<&Path>,
) -> Result<String, Failure> {
    let cfg = experiment(lib, mc, vec![flows])?;
    let windows: Vec<u64> = windows.0.iter().map(|&w| w as u64).collect();
    let rows = run_window_sweep(&cfg, flows, &windows)?;
    let mut t = OutputTable::new(&["window_slots", "prob_mean", "ci_half_width"]);
    for r in &rows {
        push(
            &mut t,
            vec![
                r.window_slots.into(),
                r.probability.mean.into(),
                r.probability.ci_half_width.into(),
            ],
        );
    }
    emit(&t, out)
}

fn cmd_content(
    lib: &LibraryArgs,
    mc: &MonteCarloArgs,
    classes: &str,
    flows: FlowCounts,
    out: Option<&Path>,
) -> Result<String, Failure> {
    let classes = classes
        .split(',')
        .map(|c| c.parse::<ContentClass>())
        .collect::<Result<Vec<_>, _>>()?;
    let cfg = experiment(lib, mc, flows.0.clone())?;
    let rows = run_content_comparison(&cfg, &classes, &flows.0)?;
    let mut t = OutputTable::new(&["class", "flows", "prob_mean", "ci_half_width"]);
    for r in &rows {
        push(
            &mut t,
            vec![
                r.class.name().into(),
                r.flow_count.into(),
                r.probability.mean.into(),
                r.probability.ci_half_width.into(),
            ],
        );
    }
    emit(&t, out)
}

fn cmd_hoeffding(n: usize, epsilon: f64, widths: &[f64]) -> Result<String, Failure> {
    let widths = match widths {
        [w] => vec![*w; n],
        ws if ws.len() == n => ws.to_vec(),
        ws => {
            return Err(Failure::Config(format!(
                "got {} widths for n={n}; give one or n",
                ws.len()
            )));
        }
    };
    let bound = hoeffding_delta(&HoeffdingQuery::from_widths(epsilon, &widths)?)?;
    let mut line = format!(
        "delta={} exponent={}",
        format_real(bound.delta),
        format_real(bound.exponent)
    );
    if bound.underflow {
        line.push_str(" underflow=true");
    }
    line.push('\n');
    Ok(line)
}

struct AdmitArgs<'a> {
    lib: &'a LibraryArgs,
    policy: &'a str,
    capacity_mbps: f64,
    class: Option<&'a str>,
    rate_mbps: Option<f64>,
    flows: usize,
    window: u64,
    seed: u64,
    pins: ScenarioPins,
}

fn cmd_admit(a: AdmitArgs<'_>) -> Result<(Verdict, String), Failure> {
    let policy: Policy = a.policy.parse()?;
    let link = LinkConfig::new("link", a.capacity_mbps * BITS_PER_MBIT)?;
    let request = match (a.class, a.rate_mbps) {
        (Some(c), _) => AdmissionRequest::for_class(c.parse::<QualityClass>()?),
        (None, Some(r)) => AdmissionRequest::new(r * BITS_PER_MBIT)?,
        (None, None) => return Err(Failure::Config("give --class or --rate-mbps".into())),
    };
    if a.flows == 0 {
        return Err(Failure::Config("flow count must be at least 1".into()));
    }
    let library: Vec<Arc<VideoTrace>> = load_library(a.lib)?.into_iter().map(Arc::new).collect();
    let (_, sample) = sample_scenario(&library, a.flows, a.window, a.seed, a.pins)?;
    let d = decide(policy, policy.measured_rate(&sample), &request, &link);
    let line = format!(
        "verdict={} policy={} slot={} measured={}Mbps inst={}Mbps avg={}Mbps requested={}Mbps capacity={}Mbps headroom={}Mbps",
        if d.admitted() { "admit" } else { "reject" },
        d.policy,
        sample.window.end_slot(),
        format_real(mbps(d.measured_rate)),
        format_real(mbps(sample.instantaneous)),
        format_real(mbps(sample.average)),
        format_real(mbps(d.requested_rate)),
        format_real(mbps(link.capacity())),
        format_real(mbps(d.headroom)),
    );
    Ok((d.verdict, line + "\n"))
}

#[allow(clippy::too_many_arguments)]
fn cmd_synth(
    class: Option<ContentClass>,
    mean_mbps: Option<f64>,
    min_mbps: Option<f64>,
    max_mbps: Option<f64>,
    frames: usize,
    fps: f64,
    seed: u64,
    out: Option<&Path>,
) -> Result<String, Failure> {
    let (trace, recipe) = match (class, min_mbps, max_mbps) {
        (Some(class), _, _) => {
            let mut profile = ClassProfile::for_class(class);
            if let Some(m) = mean_mbps {
                profile = profile.with_mean_rate(m * BITS_PER_MBIT);
            }
            let trace = synth_class_trace(&profile, frames, fps, seed)?;
            let recipe = format!(
                "vmac synth --class {class} --mean-mbps {} --frames {frames} --fps {} --seed {seed}",
                short(mbps(profile.mean_rate)),
                short(fps)
            );
            (trace, recipe)
        }
        (None, Some(lo), Some(hi)) => {
            let bounds = FlowRateBounds::new(lo * BITS_PER_MBIT, hi * BITS_PER_MBIT)?;
            let trace = synth_bounded_trace(frames, bounds, fps, seed)?;
            let recipe = format!(
                "vmac synth --min-mbps {} --max-mbps {} --frames {frames} --fps {} --seed {seed}",
                short(lo),
                short(hi),
                short(fps)
            );
            (trace, recipe)
        }
        _ => return Err(Failure::Config("give --class or both --min-mbps and --max-mbps".into())),
    };
    let trace = match out.and_then(Path::file_stem) {
        Some(stem) => trace.with_id(stem.to_string_lossy()),
        None => trace,
    };
    let text = format!("# generated by: {recipe}\n{}", trace.to_text());
    emit_text(text, out)
}

fn dispatch(cli: Cli) -> Result<(u8, String), Failure> {
    let text = match cli.command {
        Command::Ingest { path, fps } => cmd_ingest(&path, fps)?,
        Command::SweepFlows { lib, mc, flows, out } => cmd_sweep_flows(&lib, &mc, flows, out.as_deref())?,
        Command::Timeseries {
            lib,
            flows,
            duration,
            window,
            seed,
            out,
        } => cmd_timeseries(&lib, flows, duration, window, seed, out.as_deref())?,
        Command::Burstiness {
            lib,
            mc,
            flows,
            duration,
            source,
            out,
        } => cmd_burstiness(&lib, &mc, flows, duration, source, out.as_deref())?,
        Command::SweepWindow {
            lib,
            mc,
            flows,
            windows,
            out,
        } => cmd_sweep_window(&lib, &mc, flows, windows, out.as_deref())?,
        Command::Content {
            lib,
            mc,
            classes,
            flows,
            out,
        } => cmd_content(&lib, &mc, &classes, flows, out.as_deref())?,
        Command::Hoeffding { n, epsilon, widths } => cmd_hoeffding(n, epsilon, &widths)?,
        Command::Admit {
            lib,
            policy,
            capacity_mbps,
            class,
            rate_mbps,
            flows,
            window,
            seed,
            offset,
            slot,
        } => {
            let (verdict, text) = cmd_admit(AdmitArgs {
                lib: &lib,
                policy: &policy,
                capacity_mbps,
                class: class.as_deref(),
                rate_mbps,
                flows,
                window,
                seed,
                pins: ScenarioPins {
                    offset,
                    decision_slot: slot,
                },
            })
            // the admit command reports every failure as status 2
            .map_err(|f| Failure::Config(f.to_string()))?;
            let code = match verdict {
                Verdict::Admit => 0,
                Verdict::Reject => 1,
            };
            return Ok((code, text));
        }
        Command::Synth {
            class,
            mean_mbps,
            min_mbps,
            max_mbps,
            frames,
            fps,
            seed,
            out,
        } => cmd_synth(class, mean_mbps, min_mbps, max_mbps, frames, fps, seed, out.as_deref())?,
    };
    Ok((0, text))
}

/// Runs one `vmac` invocation. `args` includes the program name. Normal
/// output goes to `out`, diagnostics to `err`; returns the exit status.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = if e.use_stderr() {
                write!(err, "{}", e.render())
            } else {
                write!(out, "{}", e.render())
            };
            return e.exit_code() as u8;
        }
    };
    match dispatch(cli) {
        Ok((code, text)) => match out.write_all(text.as_bytes()) {
            Ok(()) => code,
            Err(e) => {
                let _ = writeln!(err, "error: stdout: {e}");
                3
            }
        },
        Err(f) => {
            let _ = writeln!(err, "error: {f}");
            f.code()
        }
    }
}
