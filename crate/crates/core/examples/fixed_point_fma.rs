//! One FMA lane computing a dot product in `Q<8,3>`, next to the exact value.

use hydra::fxp::{acc_init_bias, acc_round, dequantize, quantize, AccLayout, QFormat};

fn main() {
    let fmt = QFormat::Q8_3;
    let xs = [0.75, -1.5, 2.0, 0.1];
    let ws = [0.5, 0.25, -0.8, 3.9];
    let bias = 0.3;

    let layout = AccLayout::new(fmt, xs.len()).unwrap();
    println!("{fmt}: ulp {}, range [{}, {}], accumulator {} bits", fmt.ulp(), fmt.min_value(), fmt.max_value(), layout.width());

    let mut acc = acc_init_bias(layout, quantize(bias, fmt).unwrap()).unwrap();
    for (&x, &w) in xs.iter().zip(&ws) {
        let (qx, qw) = (quantize(x, fmt).unwrap(), quantize(w, fmt).unwrap());
        acc = acc.mac(qx, qw).unwrap();
        println!("  {} * {} -> acc {}", dequantize(qx), dequantize(qw), acc.to_f64());
    }
    let exact: f64 = bias + xs.iter().zip(&ws).map(|(x, w)| x * w).sum::<f64>();
    println!("rounded once: {}  (real-valued {exact:.4})", dequantize(acc_round(acc, fmt)));

    // Saturation at the format edges.
    for x in [5.0, -4.0, 3.93, -3.97] {
        println!("quantize({x}) = {}", quantize(x, fmt).unwrap());
    }
}
