use serde::Serialize;

use crate::timing::AnalyticTiming;

use super::EngineMode;

/// Cycle accounting of one compute layer. Cycles are absolute clock counts;
/// a layer starts at the cycle whose end preloads its biases, so its first
/// MAC step completes at `start_cycle + 1`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LayerTiming {
    pub layer: usize,
    pub inputs: usize,
    pub neurons: usize,
    pub passes: usize,
    pub start_cycle: u64,
    pub first_output_cycle: u64,
    /// Cycle of the last store into the output bank.
    pub end_cycle: u64,
    pub mac_cycles: u64,
    pub piso_load_cycles: u64,
    /// AF latency plus one emission per neuron, per pass.
    pub serialize_cycles: u64,
    pub layer_total: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CycleReport {
    pub mode: EngineMode,
    pub max_fma: usize,
    pub per_layer: Vec<LayerTiming>,
    pub total_cycles: u64,
    pub mac_ops: u64,
    pub af_invocations: u64,
    pub fma_utilization: f64,
    pub softmax_cycles: u64,
    /// Cycles that loading the input, weight and bias banks would cost if
    /// it were not done before the layer starts. Not part of `total_cycles`.
    pub hypothetical_load_cycles: u64,
    pub analytic: AnalyticTiming,
}

impl CycleReport {
    pub fn layer(&self, l: usize) -> &LayerTiming {
        &self.per_layer[l]
    }
}
