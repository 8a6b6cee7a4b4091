//! The two engine modes on the benchmark network: same outputs, different
//! schedules.

use hydra::engine::{run_inference, EngineMode};
use hydra::fxp::quantize;
use hydra::model::{quantize_params, LayerParams, NetworkConfig, Params};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn main() {
    let base = NetworkConfig::benchmark();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let layers = (0..base.compute_layers())
        .map(|l| {
            let (n, i) = (base.neurons(l), base.inputs(l));
            let w = (0..n * i).map(|_| rng.gen_range(-0.3..0.3)).collect();
            let b = (0..n).map(|_| rng.gen_range(-0.1..0.1)).collect();
            LayerParams::new(n, i, w, b).unwrap()
        })
        .collect();
    let q = quantize_params(&Params::new(layers).unwrap(), base.qformat).unwrap();
    let x: Vec<_> = (0..196).map(|_| quantize(rng.gen_range(0.0..1.0), base.qformat).unwrap()).collect();

    let mut outputs = Vec::new();
    for mode in [EngineMode::StoreAndForward, EngineMode::Streamed] {
        let mut cfg = base.clone();
        cfg.mode = mode;
        let (out, report) = run_inference(&cfg, &q, &x).unwrap();
        let starts: Vec<u64> = report.per_layer.iter().map(|t| t.start_cycle).collect();
        let firsts: Vec<u64> = report.per_layer.iter().map(|t| t.first_output_cycle).collect();
        println!("{mode:>17}: {} cycles, layer starts {starts:?}, first outputs {firsts:?}", report.total_cycles);
        outputs.push(out);
    }
    println!("outputs identical: {}", outputs[0] == outputs[1]);
}
