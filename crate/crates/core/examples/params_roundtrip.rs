//! Parameter files: float JSON, quantized JSON, and the network config TOML.

use hydra::model::{quantize_params, read_params, write_params, AnyParams, NetworkConfig, Params};

fn main() {
    let cfg = NetworkConfig::new(vec![4, 3, 2], hydra::QFormat::Q8_3);
    println!("{}", cfg.to_toml_string());

    let float = Params::filled(&cfg, 0.3);
    let text = write_params(&AnyParams::Float(float.clone()));
    println!("{text}");
    match read_params(&text).unwrap() {
        AnyParams::Float(back) => assert_eq!(back, float),
        AnyParams::Quant(_) => unreachable!(),
    }

    let q = quantize_params(&float, cfg.qformat).unwrap();
    let text = write_params(&AnyParams::Quant(q.clone()));
    println!("{text}");
    let back = read_params(&text).unwrap();
    println!("quantized file reads back as {:?} with sizes {:?}", back.qformat(), back.layer_sizes());
    assert!(matches!(back, AnyParams::Quant(b) if b == q));
}
