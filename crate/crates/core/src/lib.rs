//! Cycle-accurate simulator and fixed-point inference library for HYDRA, a
//! layer-multiplexed fully connected DNN accelerator: one physical layer of
//! FMA units and a single shared activation unit execute every layer of the
//! network in turn.
//!
//! ```
//! use hydra::engine::run_inference;
//! use hydra::model::{quantize_params, NetworkConfig, Params};
//!
//! let cfg = NetworkConfig::benchmark();
//! let params = quantize_params(&Params::filled(&cfg, 0.0), cfg.qformat).unwrap();
//! let input = vec![cfg.qformat.zero(); cfg.input_size()];
//! let (_, report) = run_inference(&cfg, &params, &input).unwrap();
//! assert_eq!(report.layer(0).first_output_cycle, 198);
//! assert_eq!(report.total_cycles, 470);
//! ```

pub mod cli;
pub mod datapath;
pub mod dataio;
pub mod engine;
pub mod error;
pub mod fxp;
pub mod model;
pub mod timing;

pub use engine::{classify, run_inference, CycleReport, Engine, EngineMode};
pub use fxp::{QFormat, QValue};
pub use model::NetworkConfig;
