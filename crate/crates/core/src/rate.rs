//! Instantaneous and windowed-average aggregate arrival rates.
//!
//! Aggregation runs on whole bytes per slot and converts to bits/s only at
//! the end, so the windowed average is an exact finite sum of piecewise
//! constant slot rates. For constant-rate flows the average and the
//! instantaneous rate come out bit-identical.

use crate::error::{Error, Result};
use crate::trace::FlowInstance;

/// Trailing measurement window `[end_slot - length_slots + 1, end_slot]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MeasurementWindow {
    end_slot: u64,
    length_slots: u64,
}

impl MeasurementWindow {
    pub const DEFAULT_LENGTH: u64 = 5;

    pub fn new(end_slot: u64, length_slots: u64) -> Result<Self> {
        if length_slots == 0 || end_slot + 1 < length_slots {
            return Err(Error::WindowOutOfRange { end_slot, length_slots });
        }
        Ok(Self { end_slot, length_slots })
    }

    pub fn end_slot(&self) -> u64 {
        self.end_slot
    }

    pub fn length_slots(&self) -> u64 {
        self.length_slots
    }

    pub fn start_slot(&self) -> u64 {
        self.end_slot + 1 - self.length_slots
    }

    pub fn slots(&self) -> std::ops::RangeInclusive<u64> {
        self.start_slot()..=self.end_slot
    }
}

/// Instantaneous aggregate rate at the decision instant paired with the
/// windowed average over the measurement period ending there.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateSample {
    pub instantaneous: f64,
    pub average: f64,
    pub window: MeasurementWindow,
}

/// The frame rate shared by all `flows`, `None` for an empty set.
pub fn common_fps(flows: &[FlowInstance]) -> Result<Option<f64>> {
    let Some(first) = flows.first() else {
        return Ok(None);
    };
    let fps = first.fps();
    match flows.iter().find(|f| f.fps() != fps) {
        Some(other) => Err(Error::MixedFps {
            first: fps,
            other: other.fps(),
        }),
        None => Ok(Some(fps)),
    }
}

pub(crate) fn aggregate_bytes(flows: &[FlowInstance], slot: u64) -> u64 {
    flows.iter().map(|f| f.bytes_at(slot)).sum()
}

fn bits_per_byte_slot(flows: &[FlowInstance]) -> Result<f64> {
    Ok(common_fps(flows)?.map_or(0.0, |fps| 8.0 * fps))
}

/// X_inst(l, t) = sum of x_i(l, t) over all flows.
pub fn instantaneous_aggregate_rate(flows: &[FlowInstance], slot: u64) -> Result<f64> {
    let scale = bits_per_byte_slot(flows)?;
    Ok(aggregate_bytes(flows, slot) as f64 * scale)
}

/// mu_r(l, tau): mean of the per-slot aggregate rate over `window`.
pub fn average_aggregate_rate(flows: &[FlowInstance], window: MeasurementWindow) -> Result<f64> {
    let scale = bits_per_byte_slot(flows)?;
    let total: u128 = window.slots().map(|k| aggregate_bytes(flows, k) as u128).sum();
    Ok(total as f64 / window.length_slots() as f64 * scale)
}

/// Instantaneous rate at the last slot of `window` plus the window average.
pub fn rate_sample(flows: &[FlowInstance], window: MeasurementWindow) -> Result<RateSample> {
    let scale = bits_per_byte_slot(flows)?;
    let mut total: u128 = 0;
    let mut last = 0;
    for k in window.slots() {
        last = aggregate_bytes(flows, k);
        total += last as u128;
    }
    Ok(RateSample {
        instantaneous: last as f64 * scale,
        average: total as f64 / window.length_slots() as f64 * scale,
        window,
    })
}

/// Per-slot aggregate rates for `slots`, in bits/s.
pub fn aggregate_series(flows: &[FlowInstance], slots: std::ops::Range<u64>) -> Result<Vec<f64>> {
    let scale = bits_per_byte_slot(flows)?;
    Ok(slots.map(|k| aggregate_bytes(flows, k) as f64 * scale).collect())
}

/// Instantaneous and trailing-average series for every slot in
/// `window_len - 1 .. duration`. Uses a running byte sum.
pub(crate) fn sliding_series(
    flows: &[FlowInstance],
    duration: u64,
    window_len: u64,
) -> Result<(Vec<u64>, Vec<f64>, Vec<f64>)> {
    let scale = bits_per_byte_slot(flows)?;
    if window_len == 0 || duration < window_len {
        return Err(Error::WindowOutOfRange {
            end_slot: duration.saturating_sub(1),
            length_slots: window_len,
        });
    }
    let bytes: Vec<u64> = (0..duration).map(|k| aggregate_bytes(flows, k)).collect();
    let mut running: u128 = bytes[..window_len as usize - 1].iter().map(|&b| b as u128).sum();
    let count = (duration - window_len + 1) as usize;
    let mut slots = Vec::with_capacity(count);
    let mut inst = Vec::with_capacity(count);
    let mut avg = Vec::with_capacity(count);
    for end in (window_len - 1)..duration {
        let e = end as usize;
        running += bytes[e] as u128;
        slots.push(end);
        inst.push(bytes[e] as f64 * scale);
        avg.push(running as f64 / window_len as f64 * scale);
        running -= bytes[e + 1 - window_len as usize] as u128;
    }
    Ok((slots, inst, avg))
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use proptest::prelude::*;

    use super::*;
    use crate::trace::{ContentClass, VideoTrace};

    /// One-frame-per-slot flow whose slot rates are `mbps`, at 25 fps.
    fn flow_mbps(mbps: &[f64]) -> FlowInstance {
        let sizes = mbps.iter().map(|m| (m * 1e6 / 200.0) as u64);
        let t = VideoTrace::from_sizes("f", sizes.collect::<Vec<_>>(), 25.0, ContentClass::Unknown).unwrap();
        FlowInstance::new(Arc::new(t), 0, 0)
    }

    fn sizes_flow(sizes: Vec<u64>, fps: f64, offset: usize) -> FlowInstance {
        let t = VideoTrace::from_sizes("f", sizes, fps, ContentClass::Unknown).unwrap();
        FlowInstance::new(Arc::new(t), offset, 0)
    }

    #[test]
    fn window_validation() {
        assert!(MeasurementWindow::new(3, 5).is_err());
        assert!(MeasurementWindow::new(4, 0).is_err());
        let w = MeasurementWindow::new(4, 5).unwrap();
        assert_eq!(w.slots(), 0..=4);
    }

    #[test]
    fn instantaneous_sums_flows() {
        let flows = [flow_mbps(&[1.0]), flow_mbps(&[2.0]), flow_mbps(&[3.0])];
        assert_eq!(instantaneous_aggregate_rate(&flows, 7).unwrap(), 6e6);
        assert_eq!(instantaneous_aggregate_rate(&[], 7).unwrap(), 0.0);
        assert_eq!(
            instantaneous_aggregate_rate(&flows[1..2], 3).unwrap(),
            flows[1].rate_at(3)
        );
    }

    #[test]
    fn mixed_fps_rejected() {
        let flows = [sizes_flow(vec![1], 25.0, 0), sizes_flow(vec![1], 30.0, 0)];
        assert!(matches!(
            instantaneous_aggregate_rate(&flows, 0),
            Err(Error::MixedFps { .. })
        ));
        let w = MeasurementWindow::new(4, 5).unwrap();
        assert!(average_aggregate_rate(&flows, w).is_err());
    }

    #[test]
    fn average_examples() {
        let w5 = MeasurementWindow::new(4, 5).unwrap();
        let f = flow_mbps(&[1.0, 2.0, 3.0, 4.0, 5.0]);
        assert_eq!(average_aggregate_rate(&[f], w5).unwrap(), 3e6);
        let w4 = MeasurementWindow::new(3, 4).unwrap();
        let f = flow_mbps(&[1.0, 1.0, 3.0, 3.0]);
        assert_eq!(average_aggregate_rate(&[f], w4).unwrap(), 2e6);
    }

    #[test]
    fn sample_examples() {
        let w = MeasurementWindow::new(4, 5).unwrap();
        let s = rate_sample(&[flow_mbps(&[1.0, 1.0, 1.0, 1.0, 5.0])], w).unwrap();
        assert_eq!((s.instantaneous, s.average), (5e6, 1.8e6));
        let s = rate_sample(&[flow_mbps(&[5.0, 1.0, 1.0, 1.0, 1.0])], w).unwrap();
        assert_eq!((s.instantaneous, s.average), (1e6, 1.8e6));
    }

    #[test]
    fn cbr_average_equals_instantaneous_exactly() {
        let flows: Vec<_> = (0..7)
            .map(|k| sizes_flow(vec![3331 + k; 9], 29.97, k as usize))
            .collect();
        for end in 4..40 {
            let s = rate_sample(&flows, MeasurementWindow::new(end, 5).unwrap()).unwrap();
            assert_eq!(s.average, s.instantaneous);
        }
    }

    #[test]
    fn sliding_series_matches_pointwise() {
        let flows = [
            sizes_flow(vec![5, 9, 1, 7, 3, 8], 10.0, 2),
            sizes_flow(vec![4, 4, 11], 10.0, 1),
        ];
        let (slots, inst, avg) = sliding_series(&flows, 20, 4).unwrap();
        assert_eq!(slots.len(), 17);
        for (k, &slot) in slots.iter().enumerate() {
            let s = rate_sample(&flows, MeasurementWindow::new(slot, 4).unwrap()).unwrap();
            assert_eq!(inst[k], s.instantaneous);
            assert_eq!(avg[k], s.average);
        }
    }

    fn arb_flows() -> impl Strategy<Value = Vec<FlowInstance>> {
        prop::collection::vec((prop::collection::vec(0u64..50_000, 1..20), 0usize..20), 1..8)
            .prop_map(|v| v.into_iter().map(|(s, off)| sizes_flow(s, 25.0, off)).collect())
    }

    proptest! {
        #[test]
        fn average_is_sandwiched(flows in arb_flows(), end in 0u64..60, len in 1u64..12) {
            prop_assume!(end + 1 >= len);
            let w = MeasurementWindow::new(end, len).unwrap();
            let avg = average_aggregate_rate(&flows, w).unwrap();
            let per_slot: Vec<f64> = w.slots().map(|k| instantaneous_aggregate_rate(&flows, k).unwrap()).collect();
            let lo = per_slot.iter().cloned().fold(f64::INFINITY, f64::min);
            let hi = per_slot.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            prop_assert!(lo <= avg && avg <= hi);
        }

        #[test]
        fn average_ignores_flow_order(mut flows in arb_flows(), end in 10u64..60) {
            let w = MeasurementWindow::new(end, 5).unwrap();
            let a = rate_sample(&flows, w).unwrap();
            flows.reverse();
            let b = rate_sample(&flows, w).unwrap();
            prop_assert_eq!(a, b);
        }

        #[test]
        fn doubling_sizes_doubles_rates(sizes in prop::collection::vec(0u64..1_000_000, 1..30), off in 0usize..30, end in 4u64..80) {
            let w = MeasurementWindow::new(end, 5).unwrap();
            let one = rate_sample(&[sizes_flow(sizes.clone(), 24.0, off)], w).unwrap();
            let two = rate_sample(&[sizes_flow(sizes.iter().map(|s| 2 * s).collect(), 24.0, off)], w).unwrap();
            prop_assert_eq!(two.instantaneous, 2.0 * one.instantaneous);
            prop_assert_eq!(two.average, 2.0 * one.average);
        }

        #[test]
        fn flow_rate_is_periodic(sizes in prop::collection::vec(0u64..1000, 1..25), off in 0usize..50, slot in 0u64..500) {
            let f = sizes_flow(sizes.clone(), 30.0, off);
            prop_assert_eq!(f.rate_at(slot), f.rate_at(slot + sizes.len() as u64));
        }
    }
}
