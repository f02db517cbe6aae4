//! Hoeffding bound on the instantaneous aggregate rate exceeding its
//! windowed average, and a Monte Carlo check of it.
//!
//! For `n` independent flows with `x_min_i <= x_i <= x_max_i`:
//!
//! ```text
//! Pr{ X_inst >= mu_r + n * eps } <= delta = exp(-2 n^2 eps^2 / sum_i (x_max_i - x_min_i)^2)
//! ```
//!
//! The mean in the bound is taken to be the windowed average `mu_r`, pairing
//! the measured average directly with the distributional mean.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::rate::{common_fps, rate_sample, MeasurementWindow};
use crate::seed::derive_run_seed;
use crate::trace::{FlowInstance, FlowRateBounds};

#[derive(Debug, Clone, PartialEq)]
pub struct HoeffdingQuery {
    epsilon: f64,
    ranges: Vec<FlowRateBounds>,
}

impl HoeffdingQuery {
    /// One range per flow; `n` is `ranges.len()`. `epsilon` is the per-flow
    /// deviation in bits/s.
    pub fn new(epsilon: f64, ranges: Vec<FlowRateBounds>) -> Result<Self> {
        if !(epsilon.is_finite() && epsilon > 0.0) {
            return Err(Error::InvalidConfig(format!("epsilon must be positive, got {epsilon}")));
        }
        if ranges.is_empty() {
            return Err(Error::InvalidConfig("need at least one flow range".into()));
        }
        Ok(Self { epsilon, ranges })
    }

    /// `n` flows that all share the range `[0, width]`.
    pub fn uniform(n: usize, epsilon: f64, width: f64) -> Result<Self> {
        let range = FlowRateBounds::new(0.0, width)?;
        Self::new(epsilon, vec![range; n])
    }

    /// Ranges given by their widths only; the bound depends on nothing else.
    pub fn from_widths(epsilon: f64, widths: &[f64]) -> Result<Self> {
        let ranges = widths
            .iter()
            .map(|&w| FlowRateBounds::new(0.0, w))
            .collect::<Result<Vec<_>>>()?;
        Self::new(epsilon, ranges)
    }

    pub fn n(&self) -> usize {
        self.ranges.len()
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn ranges(&self) -> &[FlowRateBounds] {
        &self.ranges
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundResult {
    pub delta: f64,
    pub exponent: f64,
    /// `exp(exponent)` underflowed; `delta` holds the smallest positive f64.
    pub underflow: bool,
}

/// Smallest positive (subnormal) f64.
const SMALLEST_POSITIVE: f64 = f64::from_bits(1);

pub fn hoeffding_delta(q: &HoeffdingQuery) -> Result<BoundResult> {
    let widest = q.ranges.iter().map(FlowRateBounds::width).fold(0.0, f64::max);
    if widest == 0.0 {
        return Err(Error::DegenerateRanges);
    }
    // sqrt(sum w^2) with the widths pre-scaled so the squares cannot overflow
    let norm = widest
        * q.ranges
            .iter()
            .map(|r| (r.width() / widest).powi(2))
            .sum::<f64>()
            .sqrt();
    let ratio = q.n() as f64 * (q.epsilon / norm);
    let mut exponent = -2.0 * ratio * ratio;
    if !exponent.is_finite() {
        exponent = f64::MIN;
    }
    let delta = exponent.exp();
    Ok(if delta > 0.0 {
        BoundResult {
            delta: delta.min(1.0),
            exponent,
            underflow: false,
        }
    } else {
        BoundResult {
            delta: SMALLEST_POSITIVE,
            exponent,
            underflow: true,
        }
    })
}

/// Fraction of `samples` random decision instants at which
/// `X_inst >= mu_r + n * epsilon`.
///
/// Decision instants are uniform over `window_slots - 1 ..= H - 1`, with `H`
/// the shortest trace among `flows`. Sample `i` draws from its own stream
/// seeded by `derive_run_seed(seed, 0, i)`.
pub fn empirical_exceedance(
    flows: &[FlowInstance],
    window_slots: u64,
    epsilon: f64,
    samples: usize,
    seed: u64,
    exec: Execution,
) -> Result<f64> {
    if flows.is_empty() {
        return Err(Error::InvalidConfig("need at least one flow".into()));
    }
    if samples == 0 {
        return Err(Error::InvalidConfig("need at least one sample".into()));
    }
    if window_slots == 0 {
        return Err(Error::InvalidConfig("window must span at least one slot".into()));
    }
    common_fps(flows)?;
    let horizon = flows.iter().map(|f| f.trace().len()).min().unwrap_or(0) as u64;
    if horizon < window_slots {
        return Err(Error::InsufficientHistory {
            available: horizon as usize,
            needed: window_slots as usize,
        });
    }
    let margin = flows.len() as f64 * epsilon;

    let hits = exec.map(samples, |i| -> Result<bool> {
        let mut rng = ChaCha8Rng::seed_from_u64(derive_run_seed(seed, 0, i as u64));
        let end = rng.random_range(window_slots - 1..horizon);
        let s = rate_sample(flows, MeasurementWindow::new(end, window_slots)?)?;
        Ok(s.instantaneous >= s.average + margin)
    });
    let mut count = 0usize;
    for hit in hits {
        count += hit? as usize;
    }
    Ok(count as f64 / samples as f64)
}
