//! Accuracy of one trained model at several datapath widths.
//!
//! Reads IDX files from `HYDRA_MNIST_DIR` (default `data/mnist`).

use std::path::PathBuf;

use hydra::cli::{accuracy, engine_predictions, float_predictions};
use hydra::dataio::{Dataset, FoldMode};
use hydra::fxp::QFormat;
use hydra::model::{quantize_params, train_minimal, NetworkConfig, TrainOptions};

fn main() {
    let dir = std::env::var_os("HYDRA_MNIST_DIR").map_or_else(|| PathBuf::from("data/mnist"), PathBuf::from);
    let load = |img: &str, lbl: &str, n| Dataset::load(&dir.join(img), &dir.join(lbl), FoldMode::Average, Some(n));
    let (train, test) = match (
        load("train-images-idx3-ubyte", "train-labels-idx1-ubyte", 10_000),
        load("t10k-images-idx3-ubyte", "t10k-labels-idx1-ubyte", 2_000),
    ) {
        (Ok(a), Ok(b)) => (a, b),
        (Err(e), _) | (_, Err(e)) => {
            eprintln!("{e}\nfetch the data with scripts/fetch_mnist.sh");
            std::process::exit(1);
        }
    };

    let base = NetworkConfig::benchmark();
    let params = train_minimal(&train, &base, &TrainOptions::default()).unwrap();
    println!("float   {:.4}", accuracy(&float_predictions(&base, &params, &test).unwrap(), test.labels()));
    for bits in [4, 5, 6, 8, 12, 16, 32] {
        let mut cfg = base.clone();
        cfg.qformat = QFormat::new(bits, 3).unwrap();
        let q = quantize_params(&params, cfg.qformat).unwrap();
        let acc = accuracy(&engine_predictions(&cfg, &q, &test).unwrap(), test.labels());
        println!("{:<7} {acc:.4}", cfg.qformat.to_string());
    }
}
