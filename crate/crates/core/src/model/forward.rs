//! Functional forward passes with no notion of time. The quantized pass is
//! the bit-exact reference the cycle-accurate engine is checked against.

use crate::datapath::{build_sigmoid_lut, AfKind};
use crate::fxp::{acc_init_bias, acc_mac, acc_round, Accumulation, QValue};

use super::{FloatParams, ModelError, NetworkConfig, QuantParams};

fn check_input(expected: usize, found: usize) -> Result<(), ModelError> {
    if expected != found {
        return Err(ModelError::InputLength { expected, found });
    }
    Ok(())
}

/// Dense forward pass in `f64` with the configured activation of each layer.
pub fn forward_float(cfg: &NetworkConfig, params: &FloatParams, input: &[f64]) -> Result<Vec<f64>, ModelError> {
    params.check_shape(cfg)?;
    check_input(cfg.input_size(), input.len())?;
    let mut x = input.to_vec();
    for (l, layer) in params.layers().iter().enumerate() {
        let af = cfg.af(l);
        x = layer
            .rows()
            .zip(layer.biases())
            .map(|(row, &b)| af.apply_f64(b + row.iter().zip(&x).map(|(w, v)| w * v).sum::<f64>()))
            .collect();
    }
    Ok(x)
}

/// Per neuron: preload bias, accumulate every input, round once, activate.
pub fn forward_quantized(cfg: &NetworkConfig, params: &QuantParams, input: &[QValue]) -> Result<Vec<QValue>, ModelError> {
    params.check_shape(cfg)?;
    params.check_format(cfg.qformat)?;
    check_input(cfg.input_size(), input.len())?;
    let layout = cfg.acc_layout()?;
    let lut = if cfg.af_per_layer.contains(&AfKind::SigmoidLut) {
        Some(build_sigmoid_lut(cfg.qformat)?)
    } else {
        None
    };
    let mut x = input.to_vec();
    for (l, layer) in params.layers().iter().enumerate() {
        let mut next = Vec::with_capacity(layer.neurons());
        for (row, &bias) in layer.rows().zip(layer.biases()) {
            let mut acc = acc_init_bias(layout, bias)?;
            for (&w, &v) in row.iter().zip(&x) {
                acc = acc_mac(acc, v, w)?;
                if cfg.accumulation == Accumulation::PerStep {
                    acc = acc.requantized();
                }
            }
            let y = acc_round(acc, cfg.qformat);
            let y = match cfg.af(l) {
                AfKind::Relu => QValue::saturating_from_raw(y.raw().max(0) as i128, y.fmt()),
                AfKind::Identity => y,
                AfKind::SigmoidLut => lut.as_ref().expect("table built above")[y.bit_pattern() as usize],
            };
            next.push(y);
        }
        x = next;
    }
    Ok(x)
}
