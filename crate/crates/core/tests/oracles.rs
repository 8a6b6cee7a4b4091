//! Library results checked against independent arbitrary-precision oracles.

use hydra::datapath::{apply_af, build_sigmoid_lut, ActivationUnit, AfKind};
use hydra::engine::{run_inference, EngineMode};
use hydra::fxp::{acc_init_bias, acc_mac, acc_round, dequantize, quantize, AccLayout, QFormat, QValue};
use hydra::model::{forward_float, forward_quantized, quantize_params, LayerParams, NetworkConfig, Params};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use proptest::prelude::*;

fn fmt(t: u32, i: u32) -> QFormat {
    QFormat::new(t, i).unwrap()
}

fn round_half_even(x: &BigRational) -> BigInt {
    let floor = x.floor();
    let frac = x - &floor;
    let half = BigRational::new(BigInt::one(), BigInt::from(2));
    let base = floor.to_integer();
    let odd = !(&base % BigInt::from(2)).is_zero();
    if frac > half || (frac == half && odd) {
        base + 1
    } else {
        base
    }
}

fn clamp(x: BigInt, f: QFormat) -> i64 {
    let lo = BigInt::from(f.min_raw());
    let hi = BigInt::from(f.max_raw());
    let c = if x < lo { lo } else if x > hi { hi } else { x };
    i64::try_from(c).unwrap()
}

/// Exact dot product plus bias, rounded once to `f`.
fn dot_oracle(bias: i64, xs: &[i64], ws: &[i64], f: QFormat) -> i64 {
    let frac = f.frac_bits();
    let mut sum = BigInt::from(bias) << frac;
    for (x, w) in xs.iter().zip(ws) {
        sum += BigInt::from(*x) * BigInt::from(*w);
    }
    let scaled = BigRational::new(sum, BigInt::one() << frac);
    clamp(round_half_even(&scaled), f)
}

/// Nearest raw to `x`, ties to even, saturated; exact rational arithmetic.
fn quantize_oracle(x: f64, f: QFormat) -> i64 {
    let r = BigRational::from_float(x).unwrap() * BigRational::from_integer(BigInt::one() << f.frac_bits());
    clamp(round_half_even(&r), f)
}

fn raw_strategy(f: QFormat) -> impl Strategy<Value = i64> {
    f.min_raw()..=f.max_raw()
}

fn any_format() -> impl Strategy<Value = QFormat> {
    (4u32..=32).prop_flat_map(|t| (Just(t), 1..=t)).prop_map(|(t, i)| fmt(t, i))
}

#[test]
fn quantize_reference_points() {
    let q = QFormat::Q8_3;
    assert_eq!(quantize(0.0, q).unwrap().raw(), 0);
    assert_eq!(quantize(5.0, q).unwrap().raw(), 127);
    assert_eq!(quantize(-4.0, q).unwrap().raw(), -128);
    assert_eq!(quantize(0.2, q).unwrap().raw(), 6);
    assert_eq!(dequantize(QValue::from_raw(6, q).unwrap()), 0.1875);
    assert!(quantize(f64::NAN, q).is_err());
}

#[test]
fn sigmoid_table_is_monotone_in_value() {
    for f in [fmt(5, 3), QFormat::Q8_3, fmt(12, 4)] {
        let lut = build_sigmoid_lut(f).unwrap();
        let mut by_value: Vec<(i64, i64)> = lut.iter().enumerate().map(|(i, y)| (sign_extend(i as u64, f), y.raw())).collect();
        by_value.sort();
        assert!(by_value.windows(2).all(|w| w[0].1 <= w[1].1), "{f}");
    }
}

fn sign_extend(pattern: u64, f: QFormat) -> i64 {
    let shift = 64 - f.total_bits();
    ((pattern << shift) as i64) >> shift
}

#[test]
fn dot_products_of_full_benchmark_length() {
    let f = QFormat::Q8_3;
    let layout = AccLayout::new(f, 196).unwrap();
    let mut state = 0x2545_f491_4f6c_dd1du64;
    let mut next = || {
        state ^= state << 13;
        state ^= state >> 7;
        state ^= state << 17;
        (state % 256) as i64 - 128
    };
    for _ in 0..200 {
        let bias = next();
        let xs: Vec<i64> = (0..196).map(|_| next()).collect();
        let ws: Vec<i64> = (0..196).map(|_| next()).collect();
        let mut acc = acc_init_bias(layout, QValue::from_raw(bias, f).unwrap()).unwrap();
        for (x, w) in xs.iter().zip(&ws) {
            acc = acc_mac(acc, QValue::from_raw(*x, f).unwrap(), QValue::from_raw(*w, f).unwrap()).unwrap();
        }
        assert_eq!(acc_round(acc, f).raw(), dot_oracle(bias, &xs, &ws, f));
    }
}

#[test]
fn hand_rolled_float_forward_agrees() {
    let cfg = NetworkConfig::new(vec![5, 4, 3], QFormat::Q8_3);
    let w1: Vec<f64> = (0..20).map(|i| ((i * 7) % 11) as f64 / 10.0 - 0.5).collect();
    let w2: Vec<f64> = (0..12).map(|i| ((i * 5) % 13) as f64 / 10.0 - 0.6).collect();
    let p = Params::new(vec![
        LayerParams::new(4, 5, w1.clone(), vec![0.1, -0.2, 0.3, 0.0]).unwrap(),
        LayerParams::new(3, 4, w2.clone(), vec![0.05, 0.0, -0.1]).unwrap(),
    ])
    .unwrap();
    let x = [0.9, 0.1, 0.4, 0.7, 0.2];
    let mut h = [0.0; 4];
    let b1 = [0.1, -0.2, 0.3, 0.0];
    for n in 0..4 {
        let mut s = b1[n];
        for i in 0..5 {
            s += w1[n * 5 + i] * x[i];
        }
        h[n] = if s > 0.0 { s } else { 0.0 };
    }
    let b2 = [0.05, 0.0, -0.1];
    let got = forward_float(&cfg, &p, &x).unwrap();
    for n in 0..3 {
        let mut s = b2[n];
        for i in 0..4 {
            s += w2[n * 4 + i] * h[i];
        }
        assert!((got[n] - s).abs() <= 1e-12 * s.abs().max(1.0));
    }
}

proptest! {
    #[test]
    fn quantize_matches_rational_oracle(f in any_format(), x in -1e4f64..1e4) {
        prop_assert_eq!(quantize(x, f).unwrap().raw(), quantize_oracle(x, f));
    }

    #[test]
    fn quantize_is_monotone(f in any_format(), a in -100f64..100.0, b in -100f64..100.0) {
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        prop_assert!(quantize(lo, f).unwrap().raw() <= quantize(hi, f).unwrap().raw());
    }

    #[test]
    fn quantization_error_is_half_an_ulp(f in any_format(), u in 0f64..1.0) {
        let x = f.min_value() + u * (f.max_value() - f.min_value());
        let err = (dequantize(quantize(x, f).unwrap()) - x).abs();
        prop_assert!(err <= f.ulp() / 2.0);
    }

    #[test]
    fn single_rounding_matches_big_integer(
        (f, bias, pairs) in any_format().prop_flat_map(|f| (
            Just(f),
            raw_strategy(f),
            proptest::collection::vec((raw_strategy(f), raw_strategy(f)), 0..=196),
        ))
    ) {
        let layout = AccLayout::new(f, 196).unwrap();
        let mut acc = acc_init_bias(layout, QValue::from_raw(bias, f).unwrap()).unwrap();
        for &(x, w) in &pairs {
            acc = acc_mac(acc, QValue::from_raw(x, f).unwrap(), QValue::from_raw(w, f).unwrap()).unwrap();
        }
        let (xs, ws): (Vec<i64>, Vec<i64>) = pairs.into_iter().unzip();
        prop_assert_eq!(acc_round(acc, f).raw(), dot_oracle(bias, &xs, &ws, f));
    }

    #[test]
    fn worst_case_accumulation_fits(f in any_format(), n in 1usize..=256) {
        let layout = AccLayout::new(f, n).unwrap();
        let min = QValue::from_raw(f.min_raw(), f).unwrap();
        let mut acc = acc_init_bias(layout, min).unwrap();
        for _ in 0..n {
            acc = acc_mac(acc, min, min).unwrap();
        }
        let max = QValue::from_raw(f.max_raw(), f).unwrap();
        let mut neg = acc_init_bias(layout, min).unwrap();
        for _ in 0..n {
            neg = acc_mac(neg, min, max).unwrap();
        }
        prop_assert!(acc.raw() > 0 && neg.raw() < 0);
    }

    #[test]
    fn relu_is_idempotent(f in any_format(), raw in any::<i64>()) {
        let x = QValue::saturating_from_raw(raw as i128, f);
        let afu = ActivationUnit::new(AfKind::Relu, None);
        let once = apply_af(&afu, x).unwrap();
        prop_assert_eq!(apply_af(&afu, once).unwrap(), once);
        prop_assert!(once.raw() >= 0);
    }

    #[test]
    fn engine_equals_golden_model(
        sizes in proptest::collection::vec(1usize..20, 2..5),
        weights in proptest::collection::vec(-1.0f64..1.0, 2000),
        streamed in any::<bool>(),
        bits in prop::sample::select(vec![5u32, 8, 16, 32]),
    ) {
        let mut cfg = NetworkConfig::new(sizes, fmt(bits, 3));
        if streamed {
            cfg.mode = EngineMode::Streamed;
        }
        let mut it = weights.iter().cycle().copied();
        let layers = (0..cfg.compute_layers())
            .map(|l| {
                let (n, i) = (cfg.neurons(l), cfg.inputs(l));
                LayerParams::new(n, i, it.by_ref().take(n * i).collect(), it.by_ref().take(n).collect()).unwrap()
            })
            .collect();
        let q = quantize_params(&Params::new(layers).unwrap(), cfg.qformat).unwrap();
        let x: Vec<QValue> = (0..cfg.input_size()).map(|_| quantize(it.next().unwrap().abs(), cfg.qformat).unwrap()).collect();
        let (out, _) = run_inference(&cfg, &q, &x).unwrap();
        prop_assert_eq!(out, forward_quantized(&cfg, &q, &x).unwrap());
    }
}
