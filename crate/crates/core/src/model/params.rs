use crate::fxp::{quantize, QFormat, QValue};

use super::{ModelError, NetworkConfig};

/// Weights (`neurons x inputs`, row-major) and biases of one dense layer.
#[derive(Debug, Clone, PartialEq)]
pub struct LayerParams<T> {
    neurons: usize,
    inputs: usize,
    weights: Vec<T>,
    biases: Vec<T>,
}

impl<T: Copy> LayerParams<T> {
    pub fn new(neurons: usize, inputs: usize, weights: Vec<T>, biases: Vec<T>) -> Result<Self, ModelError> {
        if weights.len() != neurons * inputs {
            return Err(ModelError::Shape(format!(
                "weight matrix has {} entries, expected {neurons}x{inputs}",
                weights.len()
            )));
        }
        if biases.len() != neurons {
            return Err(ModelError::Shape(format!("{} biases for {neurons} neurons", biases.len())));
        }
        Ok(Self { neurons, inputs, weights, biases })
    }

    pub fn filled(neurons: usize, inputs: usize, value: T) -> Self {
        Self { neurons, inputs, weights: vec![value; neurons * inputs], biases: vec![value; neurons] }
    }

    pub fn neurons(&self) -> usize {
        self.neurons
    }

    pub fn inputs(&self) -> usize {
        self.inputs
    }

    pub fn weight(&self, neuron: usize, input: usize) -> T {
        self.weights[neuron * self.inputs + input]
    }

    pub fn row(&self, neuron: usize) -> &[T] {
        &self.weights[neuron * self.inputs..(neuron + 1) * self.inputs]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[T]> {
        self.weights.chunks(self.inputs.max(1)).take(self.neurons)
    }

    pub fn weights(&self) -> &[T] {
        &self.weights
    }

    pub fn weights_mut(&mut self) -> &mut [T] {
        &mut self.weights
    }

    pub fn biases(&self) -> &[T] {
        &self.biases
    }

    pub fn biases_mut(&mut self) -> &mut [T] {
        &mut self.biases
    }

    pub fn map<U: Copy, E>(&self, mut f: impl FnMut(T) -> Result<U, E>) -> Result<LayerParams<U>, E> {
        Ok(LayerParams {
            neurons: self.neurons,
            inputs: self.inputs,
            weights: self.weights.iter().map(|&w| f(w)).collect::<Result<_, _>>()?,
            biases: self.biases.iter().map(|&b| f(b)).collect::<Result<_, _>>()?,
        })
    }
}

/// Parameters of a whole network.
#[derive(Debug, Clone, PartialEq)]
pub struct Params<T> {
    layers: Vec<LayerParams<T>>,
}

pub type FloatParams = Params<f64>;
pub type QuantParams = Params<QValue>;

impl<T: Copy> Params<T> {
    /// Layers must chain: each layer's input count equals the previous width.
    pub fn new(layers: Vec<LayerParams<T>>) -> Result<Self, ModelError> {
        if layers.is_empty() {
            return Err(ModelError::Shape("a network needs at least one layer".into()));
        }
        for (l, pair) in layers.windows(2).enumerate() {
            if pair[1].inputs != pair[0].neurons {
                return Err(ModelError::Shape(format!(
                    "layer {} expects {} inputs but layer {l} has {} neurons",
                    l + 1,
                    pair[1].inputs,
                    pair[0].neurons
                )));
            }
        }
        Ok(Self { layers })
    }

    /// All parameters set to `value`, shaped for `cfg`.
    pub fn filled(cfg: &NetworkConfig, value: T) -> Self {
        let layers = (0..cfg.compute_layers())
            .map(|l| LayerParams::filled(cfg.neurons(l), cfg.inputs(l), value))
            .collect();
        Self { layers }
    }

    pub fn layers(&self) -> &[LayerParams<T>] {
        &self.layers
    }

    pub fn layers_mut(&mut self) -> &mut [LayerParams<T>] {
        &mut self.layers
    }

    pub fn layer_sizes(&self) -> Vec<usize> {
        std::iter::once(self.layers[0].inputs).chain(self.layers.iter().map(|l| l.neurons)).collect()
    }

    pub fn check_shape(&self, cfg: &NetworkConfig) -> Result<(), ModelError> {
        let sizes = self.layer_sizes();
        if sizes != cfg.layer_sizes {
            return Err(ModelError::Shape(format!(
                "parameters are shaped {sizes:?} but the configuration is {:?}",
                cfg.layer_sizes
            )));
        }
        Ok(())
    }
}

impl QuantParams {
    /// Format shared by every weight and bias.
    pub fn qformat(&self) -> QFormat {
        self.layers[0].biases.first().or(self.layers[0].weights.first()).map(|v| v.fmt()).unwrap_or_default()
    }

    /// Checks that every value uses `fmt`.
    pub fn check_format(&self, fmt: QFormat) -> Result<(), ModelError> {
        let uniform = self
            .layers
            .iter()
            .all(|l| l.weights.iter().chain(&l.biases).all(|v| v.fmt() == fmt));
        if !uniform {
            return Err(ModelError::Shape(format!("parameters are not uniformly in {fmt}")));
        }
        Ok(())
    }

    pub fn to_float(&self) -> FloatParams {
        Params {
            layers: self
                .layers
                .iter()
                .map(|l| l.map(|v| Ok::<_, ModelError>(v.to_f64())).expect("infallible"))
                .collect(),
        }
    }
}

/// Element-wise quantization of weights and biases into `fmt`.
pub fn quantize_params(params: &FloatParams, fmt: QFormat) -> Result<QuantParams, ModelError> {
    let layers = params
        .layers
        .iter()
        .enumerate()
        .map(|(l, layer)| {
            for (i, &w) in layer.weights.iter().enumerate() {
                if !w.is_finite() {
                    return Err(ModelError::NonFiniteParam {
                        layer: l,
                        row: i / layer.inputs,
                        col: Some(i % layer.inputs),
                    });
                }
            }
            for (row, &b) in layer.biases.iter().enumerate() {
                if !b.is_finite() {
                    return Err(ModelError::NonFiniteParam { layer: l, row, col: None });
                }
            }
            layer.map(|x| quantize(x, fmt).map_err(ModelError::from))
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(Params { layers })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny(w: f64) -> FloatParams {
        Params::new(vec![LayerParams::new(2, 2, vec![w, 0.2, -0.5, 10.0], vec![0.0, 1.0]).unwrap()]).unwrap()
    }

    #[test]
    fn quantizes_elementwise() {
        let q = quantize_params(&tiny(0.0), QFormat::Q8_3).unwrap();
        let l = &q.layers()[0];
        assert_eq!(l.weight(0, 1).to_f64(), 0.1875);
        assert_eq!(l.weight(1, 1).to_f64(), 3.96875);
        assert_eq!(l.biases()[1].raw(), 32);
        assert_eq!(q.qformat(), QFormat::Q8_3);
        q.check_format(QFormat::Q8_3).unwrap();
    }

    #[test]
    fn zeros_stay_zero() {
        let cfg = NetworkConfig::benchmark();
        let q = quantize_params(&Params::filled(&cfg, 0.0), QFormat::Q8_3).unwrap();
        assert!(q.layers().iter().all(|l| l.weights().iter().chain(l.biases()).all(|v| v.raw() == 0)));
        q.check_shape(&cfg).unwrap();
    }

    #[test]
    fn non_finite_weight_names_coordinates() {
        let err = quantize_params(&tiny(f64::NAN), QFormat::Q8_3).unwrap_err();
        assert!(matches!(err, ModelError::NonFiniteParam { layer: 0, row: 0, col: Some(0) }));
    }

    #[test]
    fn shape_checks() {
        assert!(LayerParams::new(2, 2, vec![0.0; 3], vec![0.0; 2]).is_err());
        assert!(LayerParams::new(2, 2, vec![0.0; 4], vec![0.0; 1]).is_err());
        let a = LayerParams::filled(3, 4, 0.0);
        let b = LayerParams::filled(2, 2, 0.0);
        assert!(Params::new(vec![a.clone(), b]).is_err());
        let p = Params::new(vec![a, LayerParams::filled(2, 3, 0.0)]).unwrap();
        assert_eq!(p.layer_sizes(), vec![4, 3, 2]);
        assert!(p.check_shape(&NetworkConfig::new(vec![4, 3, 3], QFormat::Q8_3)).is_err());
    }
}
