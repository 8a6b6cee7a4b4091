//! Cycle accounting of the 196:64:32:32:10 benchmark network, simulated and
//! closed-form.

use hydra::engine::run_inference;
use hydra::model::{quantize_params, NetworkConfig, Params};
use hydra::timing::{af_savings, throughput_report};

fn main() {
    let cfg = NetworkConfig::benchmark();
    let q = quantize_params(&Params::filled(&cfg, 0.01), cfg.qformat).unwrap();
    let (_, report) = run_inference(&cfg, &q, &vec![cfg.qformat.zero(); cfg.input_size()]).unwrap();

    println!("layer  start  first  end  total");
    for t in &report.per_layer {
        println!("{:>5}  {:>5}  {:>5}  {:>3}  {:>5}", t.layer + 1, t.start_cycle, t.first_output_cycle, t.end_cycle, t.layer_total);
    }
    println!("total {} cycles, {} MACs, {} AF invocations", report.total_cycles, report.mac_ops, report.af_invocations);
    println!("fma utilization {:.3}", report.fma_utilization);

    let a = report.analytic;
    println!("closed forms with input:   T_P {}  T_R {}", a.with_input.t_parallel, a.with_input.t_reuse);
    println!("closed forms compute only: T_P {}  T_R {}", a.compute_only.t_parallel, a.compute_only.t_reuse);

    let s = af_savings(&cfg);
    println!("AF units: {} instantiated instead of {}, saved per layer {:?}", s.instantiated, s.per_neuron_units, s.per_layer);
    let tp = throughput_report(&report, 100e6).unwrap();
    println!("at 100 MHz: {:.3} GOPS, {:.0} inferences/s", tp.gops, tp.inferences_per_sec);
}
