//! Admission decisions on a single link.
//!
//! Two policies share one rule, `measured + requested <= capacity`, and
//! differ only in the measured rate: the instantaneous aggregate rate at the
//! decision instant, or its average over the measurement window. Equality
//! admits. No per-flow state is kept.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::rate::RateSample;

pub const BITS_PER_MBIT: f64 = 1e6;

#[derive(Debug, Clone, PartialEq)]
pub struct LinkConfig {
    link_id: String,
    capacity: f64,
    utilization_target: f64,
}

impl LinkConfig {
    /// `capacity` in bits/s.
    pub fn new(link_id: impl Into<String>, capacity: f64) -> Result<Self> {
        if !(capacity.is_finite() && capacity > 0.0) {
            return Err(Error::InvalidConfig(format!(
                "link capacity must be positive, got {capacity}"
            )));
        }
        Ok(Self {
            link_id: link_id.into(),
            capacity,
            utilization_target: 1.0,
        })
    }

    /// Scales the admissible capacity by `target` in `(0, 1]`. This is an
    /// extension; the decision rule itself uses a target of 1.
    pub fn with_utilization_target(mut self, target: f64) -> Result<Self> {
        if !(target > 0.0 && target <= 1.0) {
            return Err(Error::InvalidConfig(format!(
                "utilization target must be in (0, 1], got {target}"
            )));
        }
        self.utilization_target = target;
        Ok(self)
    }

    pub fn link_id(&self) -> &str {
        &self.link_id
    }

    pub fn capacity(&self) -> f64 {
        self.capacity
    }

    pub fn utilization_target(&self) -> f64 {
        self.utilization_target
    }

    pub fn admissible_capacity(&self) -> f64 {
        if self.utilization_target == 1.0 {
            self.capacity
        } else {
            self.capacity * self.utilization_target
        }
    }
}

/// Requested-rate classes for a new session.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum QualityClass {
    FullHd,
    HdReady,
    Sd,
    HdWeb,
}

impl QualityClass {
    pub const ALL: [QualityClass; 4] = [
        QualityClass::FullHd,
        QualityClass::HdReady,
        QualityClass::Sd,
        QualityClass::HdWeb,
    ];

    /// Requested rate in bits/s.
    pub fn rate(self) -> f64 {
        match self {
            QualityClass::FullHd => 11e6,
            QualityClass::HdReady => 8e6,
            QualityClass::Sd => 2e6,
            QualityClass::HdWeb => 1.25e6,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            QualityClass::FullHd => "fullhd",
            QualityClass::HdReady => "hdready",
            QualityClass::Sd => "sd",
            QualityClass::HdWeb => "hdweb",
        }
    }
}

impl FromStr for QualityClass {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let lower = s.trim().to_ascii_lowercase();
        QualityClass::ALL
            .into_iter()
            .find(|c| c.name() == lower)
            .ok_or_else(|| Error::InvalidConfig(format!("unknown quality class {s:?}")))
    }
}

pub fn quality_class_rate(class: QualityClass) -> f64 {
    class.rate()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdmissionRequest {
    requested_rate: f64,
}

impl AdmissionRequest {
    pub fn new(requested_rate: f64) -> Result<Self> {
        if !(requested_rate.is_finite() && requested_rate > 0.0) {
            return Err(Error::InvalidConfig(format!(
                "requested rate must be positive, got {requested_rate}"
            )));
        }
        Ok(Self { requested_rate })
    }

    pub fn for_class(class: QualityClass) -> Self {
        Self {
            requested_rate: class.rate(),
        }
    }

    pub fn requested_rate(&self) -> f64 {
        self.requested_rate
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Admit,
    Reject,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Policy {
    Instantaneous,
    Average,
}

impl Policy {
    pub fn name(self) -> &'static str {
        match self {
            Policy::Instantaneous => "instantaneous",
            Policy::Average => "average",
        }
    }

    pub fn measured_rate(self, sample: &RateSample) -> f64 {
        match self {
            Policy::Instantaneous => sample.instantaneous,
            Policy::Average => sample.average,
        }
    }
}

impl fmt::Display for Policy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Policy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "inst" | "instantaneous" => Ok(Policy::Instantaneous),
            "avg" | "average" => Ok(Policy::Average),
            _ => Err(Error::InvalidConfig(format!(
                "unknown policy {s:?} (expected avg or inst)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdmissionDecision {
    pub verdict: Verdict,
    pub measured_rate: f64,
    pub requested_rate: f64,
    /// `capacity - measured - requested`; negative on rejection.
    pub headroom: f64,
    pub policy: Policy,
}

impl AdmissionDecision {
    pub fn admitted(&self) -> bool {
        self.verdict == Verdict::Admit
    }
}

/// Shared rule: admit iff `measured + requested <= capacity`.
pub fn decide(policy: Policy, measured_rate: f64, req: &AdmissionRequest, link: &LinkConfig) -> AdmissionDecision {
    let capacity = link.admissible_capacity();
    let load = measured_rate + req.requested_rate;
    AdmissionDecision {
        verdict: if load <= capacity {
            Verdict::Admit
        } else {
            Verdict::Reject
        },
        measured_rate,
        requested_rate: req.requested_rate,
        headroom: capacity - load,
        policy,
    }
}

/// X_inst(l, t) + x_new <= C_l
pub fn decide_instantaneous(sample: &RateSample, req: &AdmissionRequest, link: &LinkConfig) -> AdmissionDecision {
    decide(Policy::Instantaneous, sample.instantaneous, req, link)
}

/// mu_r(l, tau) + x_new <= C_l
pub fn decide_average(sample: &RateSample, req: &AdmissionRequest, link: &LinkConfig) -> AdmissionDecision {
    decide(Policy::Average, sample.average, req, link)
}
