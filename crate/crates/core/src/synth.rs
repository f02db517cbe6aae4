//! Synthetic trace generators.
//!
//! [`synth_bounded_trace`] draws i.i.d. per-slot rates inside declared
//! bounds. [`synth_class_trace`] produces VBR traces shaped after a content
//! class profile; the bundled sample traces under `traces/` come from it.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::trace::{ContentClass, FlowRateBounds, FrameRecord, FrameType, VideoTrace};

/// Per-slot rates drawn uniformly from `bounds`, stored as whole bytes.
///
/// A drawn rate is rounded down to a whole byte count and then clamped to the
/// smallest byte count whose rate is still `>= min_rate`, so every slot rate
/// of the result lies inside `bounds`.
pub fn synth_bounded_trace(length: usize, bounds: FlowRateBounds, fps: f64, seed: u64) -> Result<VideoTrace> {
    if length == 0 {
        return Err(Error::EmptyTrace);
    }
    if !(fps.is_finite() && fps > 0.0) {
        return Err(Error::InvalidFps(fps));
    }
    let per_byte = 8.0 * fps;
    let lo = (bounds.min_rate() / per_byte).ceil();
    let hi = (bounds.max_rate() / per_byte).floor();
    if hi < lo {
        return Err(Error::BoundsTooTight {
            min: bounds.min_rate(),
            max: bounds.max_rate(),
            fps,
        });
    }
    let (lo, hi) = (lo as u64, hi as u64);

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let sizes = (0..length).map(|_| {
        let rate = if bounds.width() > 0.0 {
            rng.random_range(bounds.min_rate()..=bounds.max_rate())
        } else {
            bounds.min_rate()
        };
        ((rate / per_byte).floor() as u64).clamp(lo, hi)
    });
    VideoTrace::from_sizes(
        format!("bounded-{seed}"),
        sizes.collect::<Vec<_>>(),
        fps,
        ContentClass::Unknown,
    )
}

/// Runs of multiplicative gain applied to consecutive frames.
///
/// Each slot not already inside a run starts one with probability
/// `onset_prob`; the run lasts a uniform number of slots in
/// `min_len..=max_len` and scales those frames by `gain`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpisodeProcess {
    pub onset_prob: f64,
    pub min_len: usize,
    pub max_len: usize,
    pub gain: f64,
}

impl EpisodeProcess {
    pub const NONE: EpisodeProcess = EpisodeProcess {
        onset_prob: 0.0,
        min_len: 1,
        max_len: 1,
        gain: 1.0,
    };

    fn apply(&self, rng: &mut ChaCha8Rng, levels: &mut [f64]) {
        if self.onset_prob <= 0.0 {
            return;
        }
        let mut t = 0;
        while t < levels.len() {
            if rng.random_bool(self.onset_prob) {
                let len = rng.random_range(self.min_len..=self.max_len);
                let end = (t + len).min(levels.len());
                levels[t..end].iter_mut().for_each(|x| *x *= self.gain);
                t = end;
            } else {
                t += 1;
            }
        }
    }
}

/// Shape parameters of a synthetic content class.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassProfile {
    pub class: ContentClass,
    /// Long-run mean rate of the generated trace, bits/s.
    pub mean_rate: f64,
    pub gop_len: usize,
    /// Size of an I frame relative to the other frames of its GOP.
    pub i_frame_ratio: f64,
    /// Relative standard deviation of per-frame Gaussian jitter.
    pub jitter: f64,
    /// Short motion drops.
    pub drops: EpisodeProcess,
    /// Rare deep dips (fades, cuts to static shots).
    pub fades: EpisodeProcess,
    /// Scene-change bursts.
    pub bursts: EpisodeProcess,
}

impl ClassProfile {
    /// High-motion content encoded close to its rate cap: frames sit near the
    /// cap with frequent one-frame drops and occasional deep fades. The rate
    /// distribution is left-skewed.
    pub fn sports() -> Self {
        Self {
            class: ContentClass::Sports,
            mean_rate: 8e6,
            gop_len: 24,
            i_frame_ratio: 1.0,
            jitter: 0.03,
            drops: EpisodeProcess {
                onset_prob: 0.04,
                min_len: 1,
                max_len: 1,
                gain: 0.8,
            },
            fades: EpisodeProcess {
                onset_prob: 0.002,
                min_len: 2,
                max_len: 8,
                gain: 0.1,
            },
            bursts: EpisodeProcess::NONE,
        }
    }

    /// Low-motion studio content: a flat base rate with visible I frames and
    /// short bursts at scene changes. The rate distribution is right-skewed.
    pub fn news() -> Self {
        Self {
            class: ContentClass::News,
            mean_rate: 2e6,
            gop_len: 12,
            i_frame_ratio: 1.3,
            jitter: 0.03,
            drops: EpisodeProcess::NONE,
            fades: EpisodeProcess::NONE,
            bursts: EpisodeProcess {
                onset_prob: 0.005,
                min_len: 2,
                max_len: 5,
                gain: 1.3,
            },
        }
    }

    /// Feature film: sports-like dynamics on a shorter GOP at a lower rate.
    pub fn movie() -> Self {
        Self {
            class: ContentClass::Movie,
            mean_rate: 5e6,
            gop_len: 12,
            ..Self::sports()
        }
    }

    /// High-rate demo reel.
    pub fn demo() -> Self {
        Self {
            class: ContentClass::Demo,
            mean_rate: 11e6,
            ..Self::sports()
        }
    }

    pub fn for_class(class: ContentClass) -> Self {
        match class {
            ContentClass::News => Self::news(),
            ContentClass::Sports => Self::sports(),
            ContentClass::Movie => Self::movie(),
            ContentClass::Demo => Self::demo(),
            ContentClass::Unknown => Self {
                class: ContentClass::Unknown,
                ..Self::movie()
            },
        }
    }

    pub fn with_mean_rate(mut self, mean_rate: f64) -> Self {
        self.mean_rate = mean_rate;
        self
    }
}

/// Generates a VBR trace of `length` frames following `profile`.
pub fn synth_class_trace(profile: &ClassProfile, length: usize, fps: f64, seed: u64) -> Result<VideoTrace> {
    if length == 0 {
        return Err(Error::EmptyTrace);
    }
    if !(fps.is_finite() && fps > 0.0) {
        return Err(Error::InvalidFps(fps));
    }
    if !(profile.mean_rate.is_finite() && profile.mean_rate > 0.0) || profile.gop_len == 0 {
        return Err(Error::InvalidConfig(format!("bad class profile {profile:?}")));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let phase = rng.random_range(0..profile.gop_len);
    let mut levels: Vec<f64> = (0..length)
        .map(|k| {
            let base = if (k + phase) % profile.gop_len == 0 {
                profile.i_frame_ratio
            } else {
                1.0
            };
            let noise: f64 = rng.sample(StandardNormal);
            base * (1.0 + profile.jitter * noise)
        })
        .collect();
    for process in [&profile.drops, &profile.fades, &profile.bursts] {
        process.apply(&mut rng, &mut levels);
    }
    levels.iter_mut().for_each(|x| *x = x.max(0.0));

    let mean_level = levels.iter().sum::<f64>() / length as f64;
    let scale = if mean_level > 0.0 {
        profile.mean_rate / (8.0 * fps) / mean_level
    } else {
        0.0
    };
    let frames = levels
        .iter()
        .enumerate()
        .map(|(k, level)| FrameRecord {
            index: k as u64,
            frame_type: if (k + phase) % profile.gop_len == 0 {
                FrameType::I
            } else {
                FrameType::P
            },
            size: (level * scale).floor() as u64,
        })
        .collect();
    VideoTrace::new(format!("{}-{seed}", profile.class), frames, fps, profile.class)
}
