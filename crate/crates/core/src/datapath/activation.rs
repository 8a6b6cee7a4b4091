use std::cell::Cell;
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::fxp::{quantize, QFormat, QValue};

use super::DatapathError;

/// Largest format width for which a full sigmoid table is built.
pub const MAX_LUT_BITS: u32 = 16;

thread_local! {
    static CONSTRUCTED: Cell<usize> = const { Cell::new(0) };
}

/// Number of [`ActivationUnit`]s constructed on the current thread so far.
/// Used to audit that an engine instantiates exactly one.
pub fn activation_units_constructed() -> usize {
    CONSTRUCTED.with(Cell::get)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AfKind {
    #[default]
    Relu,
    #[serde(rename = "sigmoid")]
    SigmoidLut,
    Identity,
}

impl AfKind {
    /// Real-valued reference of the same function.
    pub fn apply_f64(self, x: f64) -> f64 {
        match self {
            AfKind::Relu => x.max(0.0),
            AfKind::SigmoidLut => sigmoid(x),
            AfKind::Identity => x,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            AfKind::Relu => "relu",
            AfKind::SigmoidLut => "sigmoid",
            AfKind::Identity => "identity",
        }
    }
}

impl fmt::Display for AfKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for AfKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "relu" => Ok(AfKind::Relu),
            "sigmoid" | "sigmoid_lut" => Ok(AfKind::SigmoidLut),
            "identity" | "linear" => Ok(AfKind::Identity),
            other => Err(format!("unknown activation '{other}' (expected relu, sigmoid or identity)")),
        }
    }
}

pub(crate) fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

/// Entry `i` holds `quantize(sigmoid(v))` where `v` is the value whose bit
/// pattern is `i`.
pub fn build_sigmoid_lut(fmt: QFormat) -> Result<Vec<QValue>, DatapathError> {
    let bits = fmt.total_bits();
    if bits > MAX_LUT_BITS {
        return Err(DatapathError::LutTooLarge(fmt));
    }
    let size = 1i64 << bits;
    (0..size)
        .map(|pattern| {
            let raw = if pattern > fmt.max_raw() { pattern - size } else { pattern };
            let v = QValue::from_raw(raw, fmt)?;
            Ok(quantize(sigmoid(v.to_f64()), fmt)?)
        })
        .collect()
}

/// The single reconfigurable activation unit fed by the PISO.
#[derive(Debug)]
pub struct ActivationUnit {
    kind: AfKind,
    lut: Option<Arc<[QValue]>>,
    invocations: u64,
}

// A clone is another physical unit, so it is counted too.
impl Clone for ActivationUnit {
    fn clone(&self) -> Self {
        CONSTRUCTED.with(|c| c.set(c.get() + 1));
        Self { kind: self.kind, lut: self.lut.clone(), invocations: self.invocations }
    }
}

impl ActivationUnit {
    pub fn new(kind: AfKind, lut: Option<Vec<QValue>>) -> Self {
        CONSTRUCTED.with(|c| c.set(c.get() + 1));
        Self { kind, lut: lut.map(Into::into), invocations: 0 }
    }

    /// A unit able to run every [`AfKind`] in `fmt` (table built when the
    /// format is small enough).
    pub fn for_format(kind: AfKind, fmt: QFormat) -> Self {
        Self::new(kind, build_sigmoid_lut(fmt).ok())
    }

    pub fn kind(&self) -> AfKind {
        self.kind
    }

    pub fn has_lut(&self) -> bool {
        self.lut.is_some()
    }

    pub fn invocations(&self) -> u64 {
        self.invocations
    }

    pub fn reconfigure(&mut self, kind: AfKind) -> Result<(), DatapathError> {
        if kind == AfKind::SigmoidLut && self.lut.is_none() {
            return Err(DatapathError::MissingLut);
        }
        self.kind = kind;
        Ok(())
    }

    pub fn apply(&mut self, x: QValue) -> Result<QValue, DatapathError> {
        let y = apply_af(self, x)?;
        self.invocations += 1;
        Ok(y)
    }
}

/// Pure evaluation of the unit's current function.
pub fn apply_af(afu: &ActivationUnit, x: QValue) -> Result<QValue, DatapathError> {
    match afu.kind {
        AfKind::Relu => Ok(QValue::saturating_from_raw(x.raw().max(0) as i128, x.fmt())),
        AfKind::Identity => Ok(x),
        AfKind::SigmoidLut => {
            let lut = afu.lut.as_ref().ok_or(DatapathError::MissingLut)?;
            let y = lut.get(x.bit_pattern() as usize).copied().ok_or(DatapathError::MissingLut)?;
            if y.fmt() != x.fmt() {
                return Err(crate::fxp::FxpError::FormatMismatch { expected: y.fmt(), found: x.fmt() }.into());
            }
            Ok(y)
        }
    }
}
