//! Burstiness metrics and summary statistics.

use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::error::{Error, Result};
use crate::rate::RateSample;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeriesSummary {
    pub mean: f64,
    /// Sample standard deviation (divisor `count - 1`); 0 for a single value.
    pub sample_std: f64,
    pub peak: f64,
    pub count: usize,
}

pub fn summarize(series: &[f64]) -> Result<SeriesSummary> {
    if series.is_empty() {
        return Err(Error::TooShort { needed: 1, got: 0 });
    }
    let count = series.len();
    let mean = series.iter().sum::<f64>() / count as f64;
    let peak = series.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let sample_std = if count > 1 && series.iter().any(|&x| x != series[0]) {
        let ss: f64 = series.iter().map(|x| (x - mean).powi(2)).sum();
        (ss / (count - 1) as f64).sqrt()
    } else {
        0.0
    };
    Ok(SeriesSummary {
        mean,
        sample_std,
        peak,
        count,
    })
}

/// max / mean
pub fn peak_to_mean(series: &[f64]) -> Result<f64> {
    let s = summarize(series)?;
    if s.mean == 0.0 {
        return Err(Error::ZeroMean);
    }
    // a constant series has peak == mean in exact arithmetic; the summed
    // mean can be off by an ulp
    if s.sample_std == 0.0 {
        return Ok(1.0);
    }
    Ok(s.peak / s.mean)
}

/// Sample standard deviation / mean.
pub fn coefficient_of_variation(series: &[f64]) -> Result<f64> {
    if series.len() < 2 {
        return Err(Error::TooShort {
            needed: 2,
            got: series.len(),
        });
    }
    let s = summarize(series)?;
    if s.mean == 0.0 {
        return Err(Error::ZeroMean);
    }
    Ok(s.sample_std / s.mean)
}

/// Fraction of samples whose average is strictly below the instantaneous
/// rate. Ties count as not-below.
pub fn empirical_probability_avg_below_inst(samples: &[RateSample]) -> Result<f64> {
    if samples.is_empty() {
        return Err(Error::TooShort { needed: 1, got: 0 });
    }
    let below = samples.iter().filter(|s| s.average < s.instantaneous).count();
    Ok(below as f64 / samples.len() as f64)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeanWithCI {
    pub mean: f64,
    pub ci_half_width: f64,
    pub confidence: f64,
    pub reps: usize,
}

impl MeanWithCI {
    pub fn lower(&self) -> f64 {
        self.mean - self.ci_half_width
    }

    pub fn upper(&self) -> f64 {
        self.mean + self.ci_half_width
    }
}

/// Two-sided Student-t quantile `t_{(1 + confidence) / 2, dof}`.
pub fn t_quantile(confidence: f64, dof: usize) -> Result<f64> {
    if !(confidence > 0.0 && confidence < 1.0) {
        return Err(Error::InvalidConfig(format!(
            "confidence must lie in (0, 1), got {confidence}"
        )));
    }
    if dof == 0 {
        return Err(Error::TooShort { needed: 2, got: 1 });
    }
    let dist = StudentsT::new(0.0, 1.0, dof as f64).map_err(|e| Error::InvalidConfig(e.to_string()))?;
    Ok(dist.inverse_cdf((1.0 + confidence) / 2.0))
}

/// Mean of the repetition values with a Student-t confidence half-width
/// `t * s / sqrt(n)`.
pub fn mean_and_ci(rep_values: &[f64], confidence: f64) -> Result<MeanWithCI> {
    if rep_values.len() < 2 {
        return Err(Error::TooShort {
            needed: 2,
            got: rep_values.len(),
        });
    }
    let s = summarize(rep_values)?;
    let n = rep_values.len();
    let t = t_quantile(confidence, n - 1)?;
    Ok(MeanWithCI {
        mean: s.mean,
        ci_half_width: t * s.sample_std / (n as f64).sqrt(),
        confidence,
        reps: n,
    })
}
