//! Structural models of the three hardware blocks of one physical layer:
//! the FMA units, the parallel-in-serial-out buffer and the single shared
//! activation unit.

mod activation;
mod fma;
mod piso;

use thiserror::Error;

pub use activation::{activation_units_constructed, apply_af, build_sigmoid_lut, ActivationUnit, AfKind, MAX_LUT_BITS};
pub use fma::{fma_step, FmaUnit};
pub use piso::{piso_load, piso_shift, PisoBuffer};

use crate::error::Fault;
use crate::fxp::{FxpError, QFormat};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DatapathError {
    #[error(transparent)]
    Fault(#[from] Fault),
    #[error(transparent)]
    Fxp(#[from] FxpError),
    #[error("PISO load of {len} values exceeds capacity {capacity}")]
    PisoOverCapacity { len: usize, capacity: usize },
    #[error("sigmoid activation selected but no lookup table was built")]
    MissingLut,
    #[error("sigmoid lookup table for {0} would need more than 2^16 entries")]
    LutTooLarge(QFormat),
}
