//! Monte Carlo harness for the average-vs-instantaneous rate experiments.
//!
//! A *run* draws `n` flows (each picks a library trace and a start offset
//! uniformly at random), draws a decision instant uniformly over the slots
//! where the measurement window fits, and takes one [`RateSample`]. A
//! *repetition* is `runs_per_rep` runs and yields one probability that the
//! average is below the instantaneous rate; the reported row is the mean and
//! Student-t interval over repetitions.
//!
//! Seeds: the cell for flow count `n` uses `stream_seed(master, n)` as its
//! master, and run `(rep, run)` of that cell draws from
//! `derive_run_seed(cell_master, rep, run)`. The cell master does not depend
//! on the window length or the content class, so window and class sweeps
//! compare conditions on common random numbers.

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::rate::{rate_sample, sliding_series, MeasurementWindow, RateSample};
pub use crate::seed::{derive_run_seed, stream_seed};
use crate::stats::{
    coefficient_of_variation, empirical_probability_avg_below_inst, mean_and_ci, peak_to_mean, MeanWithCI,
};
use crate::trace::{ContentClass, FlowInstance, VideoTrace};

const TIMESERIES_STREAM: u64 = 1 << 40;

#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub trace_library: Vec<Arc<VideoTrace>>,
    pub flow_counts: Vec<usize>,
    pub window_slots: u64,
    pub runs_per_rep: usize,
    pub reps: usize,
    pub master_seed: u64,
    pub confidence: f64,
    pub execution: Execution,
}

impl ExperimentConfig {
    pub const DEFAULT_WINDOW: u64 = 5;
    pub const DEFAULT_RUNS: usize = 100;
    pub const DEFAULT_REPS: usize = 5;
    pub const DEFAULT_CONFIDENCE: f64 = 0.95;

    pub fn new(library: Vec<VideoTrace>, flow_counts: Vec<usize>, master_seed: u64) -> Self {
        Self {
            trace_library: library.into_iter().map(Arc::new).collect(),
            flow_counts,
            window_slots: Self::DEFAULT_WINDOW,
            runs_per_rep: Self::DEFAULT_RUNS,
            reps: Self::DEFAULT_REPS,
            master_seed,
            confidence: Self::DEFAULT_CONFIDENCE,
            execution: Execution::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        library_geometry(&self.trace_library)?;
        if self.flow_counts.contains(&0) {
            return Err(Error::InvalidConfig("flow counts must be at least 1".into()));
        }
        if self.window_slots == 0 {
            return Err(Error::InvalidConfig("window must span at least one slot".into()));
        }
        if self.runs_per_rep == 0 {
            return Err(Error::InvalidConfig("runs per repetition must be at least 1".into()));
        }
        if self.reps < 2 {
            return Err(Error::InvalidConfig(
                "need at least 2 repetitions for a confidence interval".into(),
            ));
        }
        if !(self.confidence > 0.0 && self.confidence < 1.0) {
            return Err(Error::InvalidConfig(format!(
                "confidence must lie in (0, 1), got {}",
                self.confidence
            )));
        }
        Ok(())
    }
}

/// Shared fps and the shortest trace length of a library.
fn library_geometry(library: &[Arc<VideoTrace>]) -> Result<(f64, usize)> {
    let first = library.first().ok_or(Error::EmptyLibrary)?;
    if let Some(other) = library.iter().find(|t| t.fps() != first.fps()) {
        return Err(Error::MixedFps {
            first: first.fps(),
            other: other.fps(),
        });
    }
    let horizon = library.iter().map(|t| t.len()).min().unwrap_or(0);
    Ok((first.fps(), horizon))
}

fn check_history(horizon: usize, window_slots: u64) -> Result<()> {
    if (horizon as u64) < window_slots {
        return Err(Error::InsufficientHistory {
            available: horizon,
            needed: window_slots as usize,
        });
    }
    Ok(())
}

/// `n` (trace index, start offset) pairs, both uniform.
fn draw_picks<R: Rng + ?Sized>(library: &[Arc<VideoTrace>], n: usize, rng: &mut R) -> Vec<(usize, usize)> {
    (0..n)
        .map(|_| {
            let trace = rng.random_range(0..library.len());
            (trace, rng.random_range(0..library[trace].len()))
        })
        .collect()
}

fn build_flows(library: &[Arc<VideoTrace>], picks: &[(usize, usize)]) -> Vec<FlowInstance> {
    picks
        .iter()
        .enumerate()
        .map(|(id, &(trace, offset))| FlowInstance::new(Arc::clone(&library[trace]), offset, id as u64))
        .collect()
}

/// `n` flows, each on a uniformly chosen trace at a uniform start offset.
pub fn draw_flows<R: Rng + ?Sized>(library: &[Arc<VideoTrace>], n: usize, rng: &mut R) -> Vec<FlowInstance> {
    let picks = draw_picks(library, n, rng);
    build_flows(library, &picks)
}

/// Optional overrides for a single scenario.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ScenarioPins {
    /// Start every flow at this offset instead of a random one.
    pub offset: Option<usize>,
    /// Take the decision at this slot instead of a random one.
    pub decision_slot: Option<u64>,
}

/// One run: draw flows and a decision instant from `seed`, measure.
pub fn sample_scenario(
    library: &[Arc<VideoTrace>],
    flow_count: usize,
    window_slots: u64,
    seed: u64,
    pins: ScenarioPins,
) -> Result<(Vec<FlowInstance>, RateSample)> {
    let (_, horizon) = library_geometry(library)?;
    if window_slots == 0 {
        return Err(Error::InvalidConfig("window must span at least one slot".into()));
    }
    check_history(horizon, window_slots)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut picks = draw_picks(library, flow_count, &mut rng);
    if let Some(offset) = pins.offset {
        picks.iter_mut().for_each(|p| p.1 = offset);
    }
    let flows = build_flows(library, &picks);
    let end = rng.random_range(window_slots - 1..horizon as u64);
    let end = pins.decision_slot.unwrap_or(end);
    let sample = rate_sample(&flows, MeasurementWindow::new(end, window_slots)?)?;
    Ok((flows, sample))
}

fn run_once(library: &[Arc<VideoTrace>], horizon: u64, n: usize, window_slots: u64, seed: u64) -> Result<RateSample> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let flows = draw_flows(library, n, &mut rng);
    let end = rng.random_range(window_slots - 1..horizon);
    rate_sample(&flows, MeasurementWindow::new(end, window_slots)?)
}

/// Probability statistics for one (library, flow count, window) cell.
#[derive(Debug, Clone)]
struct Cell {
    stats: MeanWithCI,
    rep_probabilities: Vec<f64>,
    samples: Vec<RateSample>,
}

fn probability_cell(cfg: &ExperimentConfig, library: &[Arc<VideoTrace>], n: usize, window_slots: u64) -> Result<Cell> {
    let (_, horizon) = library_geometry(library)?;
    check_history(horizon, window_slots)?;
    let cell_master = stream_seed(cfg.master_seed, n as u64);
    let runs = cfg.runs_per_rep;
    let results = cfg.execution.map(cfg.reps * runs, |idx| {
        let seed = derive_run_seed(cell_master, (idx / runs) as u64, (idx % runs) as u64);
        run_once(library, horizon as u64, n, window_slots, seed)
    });
    let samples = results.into_iter().collect::<Result<Vec<_>>>()?;
    let rep_probabilities = samples
        .chunks(runs)
        .map(empirical_probability_avg_below_inst)
        .collect::<Result<Vec<_>>>()?;
    Ok(Cell {
        stats: mean_and_ci(&rep_probabilities, cfg.confidence)?,
        rep_probabilities,
        samples,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepRow {
    pub flow_count: usize,
    pub probability: MeanWithCI,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub rows: Vec<SweepRow>,
}

impl SweepResult {
    pub fn row(&self, flow_count: usize) -> Option<&SweepRow> {
        self.rows.iter().find(|r| r.flow_count == flow_count)
    }
}

/// Probability that the average is below the instantaneous rate, per flow count.
pub fn run_probability_sweep(cfg: &ExperimentConfig) -> Result<SweepResult> {
    cfg.validate()?;
    let rows = cfg
        .flow_counts
        .iter()
        .map(|&n| {
            let cell = probability_cell(cfg, &cfg.trace_library, n, cfg.window_slots)?;
            Ok(SweepRow {
                flow_count: n,
                probability: cell.stats,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SweepResult { rows })
}

/// Per-repetition probabilities behind one sweep cell.
pub fn repetition_probabilities(cfg: &ExperimentConfig, flow_count: usize) -> Result<Vec<f64>> {
    cfg.validate()?;
    Ok(probability_cell(cfg, &cfg.trace_library, flow_count, cfg.window_slots)?.rep_probabilities)
}

#[derive(Debug, Clone, PartialEq)]
pub struct TimeSeriesResult {
    pub slots: Vec<u64>,
    pub instantaneous: Vec<f64>,
    pub average: Vec<f64>,
}

impl TimeSeriesResult {
    pub fn len(&self) -> usize {
        self.slots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.slots.is_empty()
    }
}

/// Fixes one random flow set and emits the instantaneous aggregate and the
/// trailing-window average for every slot from `window_slots - 1` on.
pub fn run_rate_timeseries(
    cfg: &ExperimentConfig,
    flow_count: usize,
    duration_slots: u64,
    seed: u64,
) -> Result<TimeSeriesResult> {
    library_geometry(&cfg.trace_library)?;
    if flow_count == 0 {
        return Err(Error::InvalidConfig("flow count must be at least 1".into()));
    }
    if cfg.window_slots == 0 || duration_slots < cfg.window_slots {
        return Err(Error::InvalidConfig(format!(
            "duration of {duration_slots} slots is shorter than the {}-slot window",
            cfg.window_slots
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let flows = draw_flows(&cfg.trace_library, flow_count, &mut rng);
    let (slots, instantaneous, average) = sliding_series(&flows, duration_slots, cfg.window_slots)?;
    Ok(TimeSeriesResult {
        slots,
        instantaneous,
        average,
    })
}

/// Seed of the burstiness time series for `flow_count`.
pub fn timeseries_seed(master_seed: u64, flow_count: usize) -> u64 {
    stream_seed(master_seed, TIMESERIES_STREAM | flow_count as u64)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RateKind {
    Average,
    Instantaneous,
}

impl RateKind {
    pub fn name(self) -> &'static str {
        match self {
            RateKind::Average => "average",
            RateKind::Instantaneous => "instantaneous",
        }
    }
}

/// Which series a burstiness row was computed from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SeriesSource {
    /// Every slot of one fixed flow set over the simulated duration.
    Slots,
    /// The decision samples of the probability sweep (fresh flows each run).
    Decisions,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BurstinessRow {
    pub flow_count: usize,
    pub rate_kind: RateKind,
    pub source: SeriesSource,
    pub peak_to_mean: f64,
    pub cov: f64,
}

/// Peak-to-mean ratio and coefficient of variation of both rate series.
///
/// For each flow count the slot series come from
/// `run_rate_timeseries(cfg, n, duration_slots, timeseries_seed(master, n))`
/// and the decision series from the probability sweep cell at `n`.
pub fn run_burstiness_table(
    cfg: &ExperimentConfig,
    flow_counts: &[usize],
    duration_slots: u64,
) -> Result<Vec<BurstinessRow>> {
    cfg.validate()?;
    let mut rows = Vec::with_capacity(flow_counts.len() * 4);
    for &n in flow_counts {
        let ts = run_rate_timeseries(cfg, n, duration_slots, timeseries_seed(cfg.master_seed, n))?;
        let cell = probability_cell(cfg, &cfg.trace_library, n, cfg.window_slots)?;
        let decision_avg: Vec<f64> = cell.samples.iter().map(|s| s.average).collect();
        let decision_inst: Vec<f64> = cell.samples.iter().map(|s| s.instantaneous).collect();
        let series = [
            (SeriesSource::Slots, RateKind::Average, &ts.average),
            (SeriesSource::Slots, RateKind::Instantaneous, &ts.instantaneous),
            (SeriesSource::Decisions, RateKind::Average, &decision_avg),
            (SeriesSource::Decisions, RateKind::Instantaneous, &decision_inst),
        ];
        for (source, rate_kind, values) in series {
            rows.push(BurstinessRow {
                flow_count: n,
                rate_kind,
                source,
                peak_to_mean: peak_to_mean(values)?,
                cov: coefficient_of_variation(values)?,
            });
        }
    }
    Ok(rows)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WindowRow {
    pub window_slots: u64,
    pub probability: MeanWithCI,
}

/// Probability sweep over window lengths at a fixed flow count.
pub fn run_window_sweep(cfg: &ExperimentConfig, flow_count: usize, windows: &[u64]) -> Result<Vec<WindowRow>> {
    cfg.validate()?;
    if flow_count == 0 {
        return Err(Error::InvalidConfig("flow count must be at least 1".into()));
    }
    if windows.contains(&0) {
        return Err(Error::InvalidConfig("window must span at least one slot".into()));
    }
    windows
        .iter()
        .map(|&w| {
            Ok(WindowRow {
                window_slots: w,
                probability: probability_cell(cfg, &cfg.trace_library, flow_count, w)?.stats,
            })
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ContentRow {
    pub class: ContentClass,
    pub flow_count: usize,
    pub probability: MeanWithCI,
}

/// Probability sweep with the library restricted to each content class.
pub fn run_content_comparison(
    cfg: &ExperimentConfig,
    classes: &[ContentClass],
    flow_counts: &[usize],
) -> Result<Vec<ContentRow>> {
    cfg.validate()?;
    if flow_counts.contains(&0) {
        return Err(Error::InvalidConfig("flow counts must be at least 1".into()));
    }
    let mut rows = Vec::with_capacity(classes.len() * flow_counts.len());
    for &class in classes {
        let subset: Vec<Arc<VideoTrace>> = cfg
            .trace_library
            .iter()
            .filter(|t| t.content_class() == class)
            .cloned()
            .collect();
        if subset.is_empty() {
            return Err(Error::ClassMissing(class));
        }
        for &n in flow_counts {
            rows.push(ContentRow {
                class,
                flow_count: n,
                probability: probability_cell(cfg, &subset, n, cfg.window_slots)?.stats,
            });
        }
    }
    Ok(rows)
}
