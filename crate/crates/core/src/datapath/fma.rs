use crate::error::Fault;
use crate::fxp::{acc_init_bias, AccLayout, Accumulation, QValue, WideAcc};

use super::DatapathError;

/// One fused multiply-accumulate lane of the 1-D array.
#[derive(Debug, Clone, PartialEq)]
pub struct FmaUnit {
    index: usize,
    acc: WideAcc,
    enabled: bool,
    steps_taken: usize,
    step_limit: usize,
    total_steps: u64,
}

impl FmaUnit {
    /// A power-gated unit with a cleared accumulator.
    pub fn new(index: usize, layout: AccLayout) -> Self {
        Self {
            index,
            acc: layout.zero(),
            enabled: false,
            steps_taken: 0,
            step_limit: 0,
            total_steps: 0,
        }
    }

    pub fn index(&self) -> usize {
        self.index
    }

    pub fn acc(&self) -> WideAcc {
        self.acc
    }

    pub fn is_enabled(&self) -> bool {
        self.enabled
    }

    pub fn steps_taken(&self) -> usize {
        self.steps_taken
    }

    /// MAC steps over the unit's lifetime.
    pub fn total_steps(&self) -> u64 {
        self.total_steps
    }

    pub fn gate(&mut self) {
        self.enabled = false;
    }

    /// Wake the unit for a layer of `inputs` steps and preload `bias`.
    pub fn start(&mut self, bias: QValue, inputs: usize) -> Result<(), DatapathError> {
        self.acc = acc_init_bias(self.acc.layout(), bias)?;
        self.enabled = true;
        self.steps_taken = 0;
        self.step_limit = inputs;
        Ok(())
    }

    pub fn step(&mut self, input: QValue, weight: QValue, mode: Accumulation) -> Result<(), DatapathError> {
        if !self.enabled {
            return Err(Fault::GatedUnitStepped { unit: self.index }.into());
        }
        if self.steps_taken >= self.step_limit {
            return Err(Fault::UnitOverrun { unit: self.index, limit: self.step_limit }.into());
        }
        let acc = self.acc.mac(input, weight)?;
        self.acc = match mode {
            Accumulation::Fused => acc,
            Accumulation::PerStep => acc.requantized(),
        };
        self.steps_taken += 1;
        self.total_steps += 1;
        Ok(())
    }

    /// The rounded, saturated result presented to the PISO.
    pub fn output(&self) -> QValue {
        self.acc.round()
    }
}

/// Functional form of [`FmaUnit::step`] with fused accumulation.
pub fn fma_step(mut unit: FmaUnit, input: QValue, weight: QValue) -> Result<FmaUnit, DatapathError> {
    unit.step(input, weight, Accumulation::Fused)?;
    Ok(unit)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fxp::{QFormat, QValue};

    fn q(raw: i64) -> QValue {
        QValue::from_raw(raw, QFormat::Q8_3).unwrap()
    }

    fn unit() -> FmaUnit {
        FmaUnit::new(0, AccLayout::new(QFormat::Q8_3, 196).unwrap())
    }

    #[test]
    fn accumulates_a_full_layer_exactly() {
        let mut u = unit();
        u.start(q(-20), 196).unwrap();
        let mut expected: i128 = -20 * 32;
        for i in 0..196i64 {
            let x = (i * 37) % 256 - 128;
            let w = (i * 91 + 5) % 256 - 128;
            u = fma_step(u, q(x), q(w)).unwrap();
            expected += (x * w) as i128;
        }
        assert_eq!(u.acc().raw(), expected);
        assert_eq!(u.steps_taken(), 196);
    }

    #[test]
    fn zero_input_leaves_acc_unchanged() {
        let mut u = unit();
        u.start(q(9), 2).unwrap();
        let before = u.acc();
        u = fma_step(u, q(0), q(-128)).unwrap();
        assert_eq!(u.acc(), before);
    }

    #[test]
    fn gated_unit_faults() {
        let u = unit();
        assert_eq!(
            fma_step(u, q(1), q(1)).unwrap_err(),
            DatapathError::Fault(Fault::GatedUnitStepped { unit: 0 })
        );
    }

    #[test]
    fn overrun_faults() {
        let mut u = unit();
        u.start(q(0), 1).unwrap();
        u.step(q(1), q(1), Accumulation::Fused).unwrap();
        assert!(matches!(
            u.step(q(1), q(1), Accumulation::Fused),
            Err(DatapathError::Fault(Fault::UnitOverrun { .. }))
        ));
    }

    #[test]
    fn gating_freezes_accumulator() {
        let mut u = unit();
        u.start(q(3), 4).unwrap();
        u.step(q(5), q(7), Accumulation::Fused).unwrap();
        let held = u.acc();
        u.gate();
        assert!(u.step(q(5), q(7), Accumulation::Fused).is_err());
        assert_eq!(u.acc(), held);
        assert_eq!(u.total_steps(), 1);
    }
}
