//! Per-cycle controller log of a toy 3:2:1 network.

use hydra::engine::{Engine, EngineMode};
use hydra::fxp::{quantize, QFormat};
use hydra::model::{quantize_params, NetworkConfig, Params};

fn main() {
    let mode = match std::env::args().nth(1) {
        Some(m) => m.parse().unwrap(),
        None => EngineMode::StoreAndForward,
    };
    let mut cfg = NetworkConfig::new(vec![3, 2, 1], QFormat::Q8_3);
    cfg.mode = mode;
    let q = quantize_params(&Params::filled(&cfg, 0.25), cfg.qformat).unwrap();
    let x: Vec<_> = [1.0, 0.5, -0.5].iter().map(|&v| quantize(v, cfg.qformat).unwrap()).collect();

    let mut engine = Engine::new(&cfg, &q).unwrap();
    engine.set_trace(true);
    let (out, report) = engine.run(&x).unwrap();
    for rec in engine.trace() {
        println!("{rec}");
    }
    println!("output {:?} after {} cycles ({mode})", out.iter().map(|v| v.to_f64()).collect::<Vec<_>>(), report.total_cycles);
}
