//! Trains the benchmark network on MNIST, quantizes it to `Q<8,3>` and
//! classifies the first test images on the engine.
//!
//! Reads IDX files from `HYDRA_MNIST_DIR` (default `data/mnist`).

use std::path::PathBuf;

use hydra::dataio::{to_input_vector, Dataset, FoldMode};
use hydra::engine::{classify, run_inference};
use hydra::model::{quantize_params, train_minimal, NetworkConfig, TrainOptions};

fn main() {
    let dir = std::env::var_os("HYDRA_MNIST_DIR").map_or_else(|| PathBuf::from("data/mnist"), PathBuf::from);
    let load = |img: &str, lbl: &str, n| Dataset::load(&dir.join(img), &dir.join(lbl), FoldMode::Average, Some(n));
    let (train, test) = match (
        load("train-images-idx3-ubyte", "train-labels-idx1-ubyte", 10_000),
        load("t10k-images-idx3-ubyte", "t10k-labels-idx1-ubyte", 20),
    ) {
        (Ok(a), Ok(b)) => (a, b),
        (Err(e), _) | (_, Err(e)) => {
            eprintln!("{e}\nfetch the data with scripts/fetch_mnist.sh");
            std::process::exit(1);
        }
    };

    let cfg = NetworkConfig::benchmark();
    let params = train_minimal(&train, &cfg, &TrainOptions::default()).unwrap();
    let q = quantize_params(&params, cfg.qformat).unwrap();
    let mut hits = 0;
    for (img, label) in test.iter() {
        let (out, report) = run_inference(&cfg, &q, &to_input_vector(img, cfg.qformat)).unwrap();
        let pred = classify(&out).unwrap();
        hits += usize::from(pred == label as usize);
        println!("label {label} predicted {pred} in {} cycles", report.total_cycles);
    }
    println!("{hits}/{} correct", test.len());
}
