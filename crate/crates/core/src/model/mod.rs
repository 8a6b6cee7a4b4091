//! Network configuration, parameter storage and quantization, the functional
//! golden models and a small deterministic trainer.

mod config;
mod forward;
mod io;
mod params;
mod train;

use thiserror::Error;

pub use config::{
    default_activations, parse_layer_sizes, ConfigError, ConfigErrors, ConfigLoadError, NetworkConfig,
    BENCHMARK_LAYERS, DEFAULT_MAX_FMA,
};
pub use forward::{forward_float, forward_quantized};
pub use io::{load_params, save_params, write_params, read_params, AnyParams, PARAMS_FORMAT_VERSION};
pub use params::{quantize_params, FloatParams, LayerParams, Params, QuantParams};
pub use train::{train_minimal, TrainOptions};

use crate::datapath::DatapathError;
use crate::fxp::FxpError;

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("parameter shape mismatch: {0}")]
    Shape(String),
    #[error("input has {found} values, network expects {expected}")]
    InputLength { expected: usize, found: usize },
    /// `col` is `None` for a bias.
    #[error("non-finite parameter at layer {layer}, row {row}, column {col:?}")]
    NonFiniteParam { layer: usize, row: usize, col: Option<usize> },
    #[error(transparent)]
    Fxp(#[from] FxpError),
    #[error(transparent)]
    Datapath(#[from] DatapathError),
    #[error(transparent)]
    Config(#[from] ConfigErrors),
    #[error("empty training set")]
    EmptyDataset,
    #[error("cannot read parameters {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("malformed parameter file: {0}")]
    Parse(String),
    #[error("unsupported parameter file version {found} (expected {expected})")]
    Version { found: u64, expected: u64 },
    #[error("parameters are already quantized ({0})")]
    AlreadyQuantized(crate::fxp::QFormat),
}
