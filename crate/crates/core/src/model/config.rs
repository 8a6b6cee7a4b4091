use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::datapath::{AfKind, MAX_LUT_BITS};
use crate::engine::EngineMode;
use crate::fxp::{AccLayout, Accumulation, FxpError, QFormat};

/// FMA lanes in the reference design's physical layer.
pub const DEFAULT_MAX_FMA: usize = 64;

/// Reference topology: 196 inputs (14x14 pixels), hidden 64/32/32, 10 classes.
pub const BENCHMARK_LAYERS: [usize; 5] = [196, 64, 32, 32, 10];

/// One violated configuration invariant.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConfigError {
    #[error("need at least an input size and one layer, got {0} layer sizes")]
    TooFewLayers(usize),
    #[error("layer size at position {0} is zero")]
    ZeroWidth(usize),
    #[error("{found} activation kinds given for {expected} compute layers")]
    AfCountMismatch { expected: usize, found: usize },
    #[error("max_fma must be at least 1")]
    ZeroMaxFma,
    #[error("layer {layer} has {width} neurons but only {max_fma} FMA units (enable tiling to split it)")]
    WidthExceedsMaxFma { layer: usize, width: usize, max_fma: usize },
    #[error("layer {layer} uses a sigmoid table, which needs at most {MAX_LUT_BITS} bits (format is {fmt})")]
    SigmoidTooWide { layer: usize, fmt: QFormat },
    #[error("tiling is only supported in store-and-forward mode")]
    TilingWithStreamed,
    #[error(transparent)]
    Accumulator(FxpError),
}

/// Every violation found by [`NetworkConfig::validate`].
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigErrors(pub Vec<ConfigError>);

impl fmt::Display for ConfigErrors {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let msgs: Vec<String> = self.0.iter().map(ToString::to_string).collect();
        write!(f, "invalid network configuration: {}", msgs.join("; "))
    }
}

impl std::error::Error for ConfigErrors {}

#[derive(Debug, Error)]
pub enum ConfigLoadError {
    #[error("cannot read config {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("cannot parse config {path}: {source}")]
    Parse { path: String, source: toml::de::Error },
    #[error(transparent)]
    Invalid(#[from] ConfigErrors),
}

/// Pre-synthesis design parameters made runtime data.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NetworkConfig {
    /// Input dimension followed by each compute layer's width.
    pub layer_sizes: Vec<usize>,
    #[serde(default = "default_max_fma")]
    pub max_fma: usize,
    #[serde(default)]
    pub qformat: QFormat,
    /// One entry per compute layer; empty means ReLU hidden layers and an
    /// identity output layer.
    #[serde(default)]
    pub af_per_layer: Vec<AfKind>,
    #[serde(default)]
    pub mode: EngineMode,
    #[serde(default)]
    pub softmax_cycles: u64,
    #[serde(default)]
    pub tiling: bool,
    #[serde(default)]
    pub accumulation: Accumulation,
}

fn default_max_fma() -> usize {
    DEFAULT_MAX_FMA
}

/// ReLU on hidden layers, identity on the output layer.
pub fn default_activations(compute_layers: usize) -> Vec<AfKind> {
    (0..compute_layers)
        .map(|l| if l + 1 == compute_layers { AfKind::Identity } else { AfKind::Relu })
        .collect()
}

impl NetworkConfig {
    pub fn new(layer_sizes: Vec<usize>, qformat: QFormat) -> Self {
        let af_per_layer = default_activations(layer_sizes.len().saturating_sub(1));
        Self {
            layer_sizes,
            max_fma: DEFAULT_MAX_FMA,
            qformat,
            af_per_layer,
            mode: EngineMode::default(),
            softmax_cycles: 0,
            tiling: false,
            accumulation: Accumulation::Fused,
        }
    }

    /// 196:64:32:32:10 on 64 FMA lanes in `Q<8,3>`.
    pub fn benchmark() -> Self {
        Self::new(BENCHMARK_LAYERS.to_vec(), QFormat::Q8_3)
    }

    pub fn from_toml_str(text: &str) -> Result<Self, toml::de::Error> {
        let mut cfg: NetworkConfig = toml::from_str(text)?;
        if cfg.af_per_layer.is_empty() {
            cfg.af_per_layer = default_activations(cfg.layer_sizes.len().saturating_sub(1));
        }
        Ok(cfg)
    }

    /// Read and validate a TOML config file.
    pub fn load(path: &Path) -> Result<Self, ConfigLoadError> {
        let display = path.display().to_string();
        let text = std::fs::read_to_string(path)
            .map_err(|source| ConfigLoadError::Io { path: display.clone(), source })?;
        let cfg = Self::from_toml_str(&text).map_err(|source| ConfigLoadError::Parse { path: display, source })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn compute_layers(&self) -> usize {
        self.layer_sizes.len().saturating_sub(1)
    }

    pub fn input_size(&self) -> usize {
        self.layer_sizes[0]
    }

    pub fn output_size(&self) -> usize {
        *self.layer_sizes.last().expect("non-empty layer_sizes")
    }

    /// Inputs of compute layer `l` (0-based).
    pub fn inputs(&self, l: usize) -> usize {
        self.layer_sizes[l]
    }

    /// Neurons of compute layer `l` (0-based).
    pub fn neurons(&self, l: usize) -> usize {
        self.layer_sizes[l + 1]
    }

    /// Widths of the compute layers (the input dimension excluded).
    pub fn compute_widths(&self) -> &[usize] {
        &self.layer_sizes[1..]
    }

    pub fn max_inputs(&self) -> usize {
        self.layer_sizes[..self.compute_layers()].iter().copied().max().unwrap_or(1)
    }

    pub fn af(&self, l: usize) -> AfKind {
        self.af_per_layer[l]
    }

    /// Multiply-accumulate operations of one inference.
    pub fn mac_ops(&self) -> u64 {
        (0..self.compute_layers()).map(|l| (self.inputs(l) * self.neurons(l)) as u64).sum()
    }

    pub fn acc_layout(&self) -> Result<AccLayout, FxpError> {
        AccLayout::new(self.qformat, self.max_inputs())
    }

    /// Checks every invariant and reports all violations at once.
    pub fn validate(&self) -> Result<(), ConfigErrors> {
        let mut errors = Vec::new();
        if self.layer_sizes.len() < 2 {
            errors.push(ConfigError::TooFewLayers(self.layer_sizes.len()));
        }
        for (i, &w) in self.layer_sizes.iter().enumerate() {
            if w == 0 {
                errors.push(ConfigError::ZeroWidth(i));
            }
        }
        let layers = self.compute_layers();
        if self.af_per_layer.len() != layers {
            errors.push(ConfigError::AfCountMismatch { expected: layers, found: self.af_per_layer.len() });
        }
        if self.max_fma == 0 {
            errors.push(ConfigError::ZeroMaxFma);
        } else if !self.tiling {
            for (layer, &width) in self.compute_widths().iter().enumerate() {
                if width > self.max_fma {
                    errors.push(ConfigError::WidthExceedsMaxFma { layer, width, max_fma: self.max_fma });
                }
            }
        }
        for (layer, af) in self.af_per_layer.iter().enumerate() {
            if *af == AfKind::SigmoidLut && self.qformat.total_bits() > MAX_LUT_BITS {
                errors.push(ConfigError::SigmoidTooWide { layer, fmt: self.qformat });
            }
        }
        if self.tiling && self.mode == EngineMode::Streamed {
            errors.push(ConfigError::TilingWithStreamed);
        }
        if layers >= 1 {
            if let Err(e) = self.acc_layout() {
                errors.push(ConfigError::Accumulator(e));
            }
        }
        if errors.is_empty() {
            Ok(())
        } else {
            Err(ConfigErrors(errors))
        }
    }
}

impl Default for NetworkConfig {
    fn default() -> Self {
        Self::benchmark()
    }
}

/// Parses `196:64:32:32:10` (also accepts commas).
pub fn parse_layer_sizes(text: &str) -> Result<Vec<usize>, String> {
    text.split([':', ','])
        .map(|part| part.trim().parse::<usize>().map_err(|e| format!("bad layer size '{part}': {e}")))
        .collect()
}
