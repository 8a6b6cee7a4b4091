use thiserror::Error;

use crate::engine::Phase;

/// Internal contract violation of the simulated hardware: a control-logic
/// bug, not bad user input.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Fault {
    #[error("FMA unit {unit} stepped while power-gated")]
    GatedUnitStepped { unit: usize },
    #[error("FMA unit {unit} stepped past its {limit} configured inputs")]
    UnitOverrun { unit: usize, limit: usize },
    #[error("PISO shifted with nothing left to emit")]
    PisoDrained,
    #[error("engine stepped after ANN done")]
    SteppedAfterDone,
    #[error("illegal phase transition {from:?} -> {to:?}")]
    IllegalTransition { from: Phase, to: Phase },
    #[error("engine reconfigured while not idle")]
    NotIdle,
    #[error("PISO load requested while the serializer is still draining")]
    SerializerBusy,
}
