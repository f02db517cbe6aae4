//! Measurement-based admission control for VBR video on a single link.
//!
//! The crate compares two admission rules. The classic rule admits a new
//! session when the *instantaneous* aggregate arrival rate plus the
//! requested rate fits the link capacity. The alternative uses the
//! *average* aggregate rate over a short trailing window instead. Around
//! those rules it provides:
//!
//! - [`trace`]: frame-size traces, flows replaying them, rate lookups;
//! - [`synth`]: bounded-uniform and content-class trace generators;
//! - [`rate`]: instantaneous and windowed-average aggregate rates;
//! - [`admission`]: the two decision rules and the quality-class rates;
//! - [`bounds`]: the Hoeffding bound and its empirical check;
//! - [`stats`]: peak-to-mean ratio, coefficient of variation, Student-t CIs;
//! - [`experiments`]: the seeded Monte Carlo harness.
//!
//! Rates are bits/s throughout. Monte Carlo work runs on rayon when the
//! `parallel` feature is enabled (the default) and returns bit-identical
//! results either way.

pub mod admission;
pub mod bounds;
pub mod error;
pub mod exec;
pub mod experiments;
pub mod rate;
pub mod seed;
pub mod stats;
pub mod synth;
pub mod trace;

pub use error::{Error, Result};
pub use exec::Execution;
