//! Plain mini-batch SGD with softmax cross-entropy, only to manufacture
//! realistic parameters for the simulator. Single-threaded so the result is
//! bit-identical for a given seed.

use rand::distributions::{Distribution, Uniform};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::datapath::AfKind;
use crate::dataio::Dataset;

use super::{FloatParams, LayerParams, ModelError, NetworkConfig, Params};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrainOptions {
    pub epochs: usize,
    pub lr: f64,
    pub seed: u64,
    pub batch_size: usize,
    /// The loss is cross-entropy of `softmax(logit_scale * z)`; values above
    /// 1 keep the raw logits `z` small enough for narrow fixed-point formats.
    pub logit_scale: f64,
}

impl Default for TrainOptions {
    fn default() -> Self {
        Self { epochs: 8, lr: 0.1, seed: 2024, batch_size: 32, logit_scale: 4.0 }
    }
}

/// Trains on the dataset's folded images (196 inputs per sample).
pub fn train_minimal(data: &Dataset, cfg: &NetworkConfig, opts: &TrainOptions) -> Result<FloatParams, ModelError> {
    let samples: Vec<(&[f64], usize)> = data.iter().map(|(img, label)| (img.as_slice(), label as usize)).collect();
    train_on(&samples, cfg, opts)
}

/// Glorot-uniform initialisation from `ChaCha8Rng::seed_from_u64(seed)`.
pub fn initial_params(cfg: &NetworkConfig, rng: &mut ChaCha8Rng) -> FloatParams {
    let layers = (0..cfg.compute_layers())
        .map(|l| {
            let (fan_in, fan_out) = (cfg.inputs(l), cfg.neurons(l));
            let bound = (6.0 / (fan_in + fan_out) as f64).sqrt();
            let dist = Uniform::new_inclusive(-bound, bound);
            let weights = (0..fan_in * fan_out).map(|_| dist.sample(rng)).collect();
            LayerParams::new(fan_out, fan_in, weights, vec![0.0; fan_out]).expect("shape by construction")
        })
        .collect();
    Params::new(layers).expect("chained by construction")
}

fn derivative(af: AfKind, pre: f64, post: f64) -> f64 {
    match af {
        AfKind::Relu => {
            if pre > 0.0 {
                1.0
            } else {
                0.0
            }
        }
        AfKind::SigmoidLut => post * (1.0 - post),
        AfKind::Identity => 1.0,
    }
}

fn softmax(logits: &[f64]) -> Vec<f64> {
    let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = logits.iter().map(|&z| (z - max).exp()).collect();
    let sum: f64 = exps.iter().sum();
    exps.into_iter().map(|e| e / sum).collect()
}

/// Same as [`train_minimal`] over arbitrary `(input, label)` pairs.
pub fn train_on(samples: &[(&[f64], usize)], cfg: &NetworkConfig, opts: &TrainOptions) -> Result<FloatParams, ModelError> {
    if samples.is_empty() {
        return Err(ModelError::EmptyDataset);
    }
    cfg.validate()?;
    let classes = cfg.output_size();
    for &(x, label) in samples {
        if x.len() != cfg.input_size() {
            return Err(ModelError::InputLength { expected: cfg.input_size(), found: x.len() });
        }
        if label >= classes {
            return Err(ModelError::Shape(format!("label {label} outside {classes} classes")));
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut params = initial_params(cfg, &mut rng);
    let layers = cfg.compute_layers();
    let batch_size = opts.batch_size.max(1);
    let mut order: Vec<usize> = (0..samples.len()).collect();

    for _ in 0..opts.epochs {
        order.shuffle(&mut rng);
        for batch in order.chunks(batch_size) {
            let mut grads: Vec<LayerParams<f64>> = params
                .layers()
                .iter()
                .map(|l| LayerParams::filled(l.neurons(), l.inputs(), 0.0))
                .collect();
            for &idx in batch {
                let (x, label) = samples[idx];
                // acts[l] is the input of layer l; pres[l] its pre-activation.
                let mut acts: Vec<Vec<f64>> = vec![x.to_vec()];
                let mut pres: Vec<Vec<f64>> = Vec::with_capacity(layers);
                for (l, layer) in params.layers().iter().enumerate() {
                    let input = &acts[l];
                    let pre: Vec<f64> = layer
                        .rows()
                        .zip(layer.biases())
                        .map(|(row, &b)| b + row.iter().zip(input).map(|(w, v)| w * v).sum::<f64>())
                        .collect();
                    acts.push(pre.iter().map(|&z| cfg.af(l).apply_f64(z)).collect());
                    pres.push(pre);
                }
                let scaled: Vec<f64> = acts[layers].iter().map(|z| z * opts.logit_scale).collect();
                let mut delta = softmax(&scaled);
                delta[label] -= 1.0;
                for d in &mut delta {
                    *d *= opts.logit_scale;
                }
                for l in (0..layers).rev() {
                    let dz: Vec<f64> = delta
                        .iter()
                        .zip(&pres[l])
                        .zip(&acts[l + 1])
                        .map(|((&d, &z), &a)| d * derivative(cfg.af(l), z, a))
                        .collect();
                    let layer = &params.layers()[l];
                    let inputs = layer.inputs();
                    let g = &mut grads[l];
                    for (n, &d) in dz.iter().enumerate() {
                        if d == 0.0 {
                            continue;
                        }
                        let row = &mut g.weights_mut()[n * inputs..(n + 1) * inputs];
                        for (gw, &a) in row.iter_mut().zip(&acts[l]) {
                            *gw += d * a;
                        }
                        g.biases_mut()[n] += d;
                    }
                    if l > 0 {
                        let mut prev = vec![0.0; inputs];
                        for (n, &d) in dz.iter().enumerate() {
                            if d == 0.0 {
                                continue;
                            }
                            for (p, &w) in prev.iter_mut().zip(layer.row(n)) {
                                *p += d * w;
                            }
                        }
                        delta = prev;
                    }
                }
            }
            let step = opts.lr / batch.len() as f64;
            for (layer, g) in params.layers_mut().iter_mut().zip(&grads) {
                for (w, gw) in layer.weights_mut().iter_mut().zip(g.weights()) {
                    *w -= step * gw;
                }
                for (b, gb) in layer.biases_mut().iter_mut().zip(g.biases()) {
                    *b -= step * gb;
                }
            }
        }
    }
    Ok(params)
}
