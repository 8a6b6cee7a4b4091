use crate::error::Fault;
use crate::fxp::QValue;

use super::DatapathError;

/// Parallel-in-serial-out register bank between the FMA array and the
/// activation unit. Loaded from all lanes in one cycle, drained one value per
/// cycle in lane order.
#[derive(Debug, Clone, PartialEq)]
pub struct PisoBuffer {
    slots: Vec<QValue>,
    capacity: usize,
    shift_index: usize,
}

impl PisoBuffer {
    pub fn new(capacity: usize) -> Self {
        Self { slots: Vec::with_capacity(capacity), capacity, shift_index: 0 }
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn loaded_count(&self) -> usize {
        self.slots.len()
    }

    pub fn shift_index(&self) -> usize {
        self.shift_index
    }

    pub fn remaining(&self) -> usize {
        self.slots.len() - self.shift_index
    }

    pub fn is_drained(&self) -> bool {
        self.remaining() == 0
    }

    pub fn load<I>(&mut self, values: I) -> Result<(), DatapathError>
    where
        I: IntoIterator<Item = QValue>,
    {
        let values: Vec<QValue> = values.into_iter().collect();
        if values.len() > self.capacity {
            return Err(DatapathError::PisoOverCapacity { len: values.len(), capacity: self.capacity });
        }
        self.slots = values;
        self.shift_index = 0;
        Ok(())
    }

    pub fn shift(&mut self) -> Result<QValue, Fault> {
        let value = *self.slots.get(self.shift_index).ok_or(Fault::PisoDrained)?;
        self.shift_index += 1;
        Ok(value)
    }
}

pub fn piso_load(mut piso: PisoBuffer, values: &[QValue]) -> Result<PisoBuffer, DatapathError> {
    piso.load(values.iter().copied())?;
    Ok(piso)
}

pub fn piso_shift(mut piso: PisoBuffer) -> Result<(PisoBuffer, QValue), Fault> {
    let v = piso.shift()?;
    Ok((piso, v))
}
