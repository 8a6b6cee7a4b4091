//! Closed-form cycle counts for the fully parallel and layer-reused designs,
//! activation-unit savings and throughput figures.

use serde::Serialize;
use thiserror::Error;

use crate::engine::CycleReport;
use crate::model::NetworkConfig;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TimingError {
    #[error("timing inputs need at least one layer")]
    Empty,
    #[error("layer {0} has zero FMAs")]
    ZeroLayer(usize),
    #[error("clock frequency must be positive and finite, got {0}")]
    BadClock(f64),
}

/// The per-layer FMA counts `n(1..=L)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TimingInputs {
    n: Vec<u64>,
}

impl TimingInputs {
    pub fn new(n: Vec<u64>) -> Result<Self, TimingError> {
        if n.is_empty() {
            return Err(TimingError::Empty);
        }
        if let Some(l) = n.iter().position(|&v| v == 0) {
            return Err(TimingError::ZeroLayer(l));
        }
        Ok(Self { n })
    }

    /// Every entry of `layer_sizes`, the input dimension included.
    pub fn with_input(cfg: &NetworkConfig) -> Result<Self, TimingError> {
        Self::new(cfg.layer_sizes.iter().map(|&v| v as u64).collect())
    }

    /// Only the compute layers.
    pub fn compute_only(cfg: &NetworkConfig) -> Result<Self, TimingError> {
        Self::new(cfg.compute_widths().iter().map(|&v| v as u64).collect())
    }

    pub fn n(&self) -> &[u64] {
        &self.n
    }

    pub fn layers(&self) -> usize {
        self.n.len()
    }

    /// `T_R` is not meaningful for a single layer.
    pub fn is_degenerate(&self) -> bool {
        self.n.len() < 2
    }
}

/// `sum_{l=1}^{L-1} n(l) + L - 1`
pub fn t_parallel(t: &TimingInputs) -> u64 {
    let l = t.n.len() as u64;
    t.n[..t.n.len() - 1].iter().sum::<u64>() + l - 1
}

/// `sum_{l=1}^{L} n(l) + 2L - 3`
pub fn t_reuse(t: &TimingInputs) -> u64 {
    let l = t.n.len() as u64;
    // n(1) >= 1, so the sum is never below 3 - 2L.
    t.n.iter().sum::<u64>() + 2 * l - 3
}

/// Both closed forms under one reading of the `n` list.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct ClosedForms {
    pub t_parallel: u64,
    pub t_reuse: u64,
    pub degenerate: bool,
}

impl ClosedForms {
    pub fn of(t: &TimingInputs) -> Self {
        Self { t_parallel: t_parallel(t), t_reuse: t_reuse(t), degenerate: t.is_degenerate() }
    }
}

/// The closed forms evaluated with and without the input dimension in `n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct AnalyticTiming {
    pub with_input: ClosedForms,
    pub compute_only: ClosedForms,
}

impl AnalyticTiming {
    pub fn of(cfg: &NetworkConfig) -> Result<Self, TimingError> {
        Ok(Self {
            with_input: ClosedForms::of(&TimingInputs::with_input(cfg)?),
            compute_only: ClosedForms::of(&TimingInputs::compute_only(cfg)?),
        })
    }
}

/// Activation units saved by sharing one unit instead of one per neuron.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct AfSavings {
    /// `n(l) - 1` for each compute layer.
    pub per_layer: Vec<u64>,
    /// Per-neuron units of a fully parallel design.
    pub per_neuron_units: u64,
    pub instantiated: u64,
    pub network_total: u64,
}

pub fn af_savings(cfg: &NetworkConfig) -> AfSavings {
    let widths = cfg.compute_widths();
    let per_neuron_units: u64 = widths.iter().map(|&n| n as u64).sum();
    AfSavings {
        per_layer: widths.iter().map(|&n| n as u64 - 1).collect(),
        per_neuron_units,
        instantiated: 1,
        network_total: per_neuron_units.saturating_sub(1),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Throughput {
    pub gops: f64,
    pub cycles: u64,
    pub inferences_per_sec: f64,
}

/// Multiply and add count as two operations.
pub fn throughput_report(report: &CycleReport, clock_hz: f64) -> Result<Throughput, TimingError> {
    if !(clock_hz.is_finite() && clock_hz > 0.0) {
        return Err(TimingError::BadClock(clock_hz));
    }
    let cycles = report.total_cycles;
    if cycles == 0 {
        return Ok(Throughput { gops: 0.0, cycles, inferences_per_sec: 0.0 });
    }
    Ok(Throughput {
        gops: 2.0 * report.mac_ops as f64 * clock_hz / cycles as f64 / 1e9,
        cycles,
        inferences_per_sec: clock_hz / cycles as f64,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn ti(n: &[u64]) -> TimingInputs {
        TimingInputs::new(n.to_vec()).unwrap()
    }

    #[test]
    fn closed_form_examples() {
        assert_eq!(t_parallel(&ti(&[196, 64, 32, 32, 10])), 328);
        assert_eq!(t_reuse(&ti(&[196, 64, 32, 32, 10])), 341);
        assert_eq!(t_parallel(&ti(&[64, 32, 32, 10])), 131);
        assert_eq!(t_reuse(&ti(&[64, 32, 32, 10])), 143);
        assert_eq!(t_parallel(&ti(&[7])), 0);
        assert_eq!(t_reuse(&ti(&[7])), 6);
        assert!(ti(&[7]).is_degenerate());
        assert_eq!(t_reuse(&ti(&[1, 1])), 3);
    }

    #[test]
    fn timing_inputs_reject_bad_lists() {
        assert_eq!(TimingInputs::new(vec![]), Err(TimingError::Empty));
        assert_eq!(TimingInputs::new(vec![3, 0]), Err(TimingError::ZeroLayer(1)));
    }

    #[test]
    fn both_interpretations_from_config() {
        let a = AnalyticTiming::of(&NetworkConfig::benchmark()).unwrap();
        assert_eq!((a.with_input.t_parallel, a.with_input.t_reuse), (328, 341));
        assert_eq!((a.compute_only.t_parallel, a.compute_only.t_reuse), (131, 143));
    }

    #[test]
    fn savings() {
        let s = af_savings(&NetworkConfig::benchmark());
        assert_eq!(s.per_layer, vec![63, 31, 31, 9]);
        assert_eq!(s.network_total, 137);
        let one = af_savings(&NetworkConfig::new(vec![5, 1], crate::fxp::QFormat::Q8_3));
        assert_eq!((one.per_layer[0], one.network_total), (0, 0));
    }

    proptest! {
        #[test]
        fn reuse_minus_parallel_identity(n in proptest::collection::vec(1u64..10_000, 1..12)) {
            let t = ti(&n);
            prop_assert_eq!(t_reuse(&t) - t_parallel(&t), n[n.len() - 1] + n.len() as u64 - 2);
        }

        #[test]
        fn savings_monotone(widths in proptest::collection::vec(1usize..200, 1..6), idx in 0usize..6, bump in 1usize..50) {
            let mut sizes = vec![4];
            sizes.extend(&widths);
            let cfg = NetworkConfig::new(sizes.clone(), crate::fxp::QFormat::Q8_3);
            let i = 1 + idx % widths.len();
            sizes[i] += bump;
            let bigger = NetworkConfig::new(sizes, crate::fxp::QFormat::Q8_3);
            prop_assert!(af_savings(&bigger).network_total > af_savings(&cfg).network_total);
        }
    }
}
