//! Signed two's-complement fixed-point arithmetic.
//!
//! Every datapath signal (pixels, weights, biases, activations) is a [`QValue`]
//! in a [`QFormat`] `Q<t,i>`: `t` stored bits, `i` integer bits counting the
//! sign bit, `t - i` fractional bits. The fused multiply-accumulate keeps its
//! running sum in a [`WideAcc`] at product scale (twice the fractional bits)
//! and rounds exactly once, when the sum leaves the unit.

use std::fmt;

use thiserror::Error;

/// Bit widths the accelerator was characterised at.
pub const CHARACTERISED_WIDTHS: [u8; 4] = [5, 8, 16, 32];

pub const MIN_TOTAL_BITS: u8 = 4;
pub const MAX_TOTAL_BITS: u8 = 64;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FxpError {
    #[error("cannot quantize non-finite value {0}")]
    NonFinite(f64),
    #[error("invalid fixed-point format: {total_bits} total bits, {int_bits} integer bits")]
    InvalidFormat { total_bits: u32, int_bits: u32 },
    #[error("raw value {raw} does not fit in {fmt}")]
    RawOutOfRange { raw: i64, fmt: QFormat },
    #[error("format mismatch: expected {expected}, found {found}")]
    FormatMismatch { expected: QFormat, found: QFormat },
    #[error("accumulator overflowed its {width}-bit register (too many inputs for the guard bits)")]
    AccumulatorOverflow { width: u32 },
    #[error("accumulator for {fmt} with {guard_bits} guard bits needs {width} bits (max 128)")]
    AccumulatorTooWide { fmt: QFormat, guard_bits: u32, width: u32 },
}

/// Signed fixed-point format `Q<total_bits, int_bits>`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(try_from = "FormatFields", into = "FormatFields")]
pub struct QFormat {
    total_bits: u8,
    int_bits: u8,
}

impl QFormat {
    /// The 8-bit, 3-integer-bit format of the reference design.
    pub const Q8_3: QFormat = QFormat { total_bits: 8, int_bits: 3 };

    pub fn new(total_bits: u32, int_bits: u32) -> Result<Self, FxpError> {
        let valid = (MIN_TOTAL_BITS as u32..=MAX_TOTAL_BITS as u32).contains(&total_bits)
            && int_bits >= 1
            && int_bits <= total_bits;
        if !valid {
            return Err(FxpError::InvalidFormat { total_bits, int_bits });
        }
        Ok(Self { total_bits: total_bits as u8, int_bits: int_bits as u8 })
    }

    pub fn total_bits(self) -> u32 {
        self.total_bits as u32
    }

    pub fn int_bits(self) -> u32 {
        self.int_bits as u32
    }

    pub fn frac_bits(self) -> u32 {
        (self.total_bits - self.int_bits) as u32
    }

    /// True for the widths in [`CHARACTERISED_WIDTHS`]; other widths work but
    /// callers may want to warn.
    pub fn is_characterised(self) -> bool {
        CHARACTERISED_WIDTHS.contains(&self.total_bits)
    }

    pub fn min_raw(self) -> i64 {
        // total_bits == 64 gives i64::MIN, which the shift below would overflow.
        if self.total_bits == 64 {
            i64::MIN
        } else {
            -(1i64 << (self.total_bits - 1))
        }
    }

    pub fn max_raw(self) -> i64 {
        if self.total_bits == 64 {
            i64::MAX
        } else {
            (1i64 << (self.total_bits - 1)) - 1
        }
    }

    /// Weight of one least-significant bit, `2^-frac_bits`.
    pub fn ulp(self) -> f64 {
        pow2(-(self.frac_bits() as i32))
    }

    pub fn min_value(self) -> f64 {
        self.min_raw() as f64 * self.ulp()
    }

    pub fn max_value(self) -> f64 {
        self.max_raw() as f64 * self.ulp()
    }

    pub fn contains_raw(self, raw: i64) -> bool {
        (self.min_raw()..=self.max_raw()).contains(&raw)
    }

    pub fn saturate(self, raw: i128) -> i64 {
        raw.clamp(self.min_raw() as i128, self.max_raw() as i128) as i64
    }

    pub fn zero(self) -> QValue {
        QValue { raw: 0, fmt: self }
    }
}

#[derive(serde::Serialize, serde::Deserialize)]
struct FormatFields {
    total_bits: u32,
    int_bits: u32,
}

impl TryFrom<FormatFields> for QFormat {
    type Error = FxpError;

    fn try_from(f: FormatFields) -> Result<Self, Self::Error> {
        QFormat::new(f.total_bits, f.int_bits)
    }
}

impl From<QFormat> for FormatFields {
    fn from(f: QFormat) -> Self {
        FormatFields { total_bits: f.total_bits(), int_bits: f.int_bits() }
    }
}

impl Default for QFormat {
    fn default() -> Self {
        Self::Q8_3
    }
}

impl fmt::Display for QFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Q<{},{}>", self.total_bits, self.int_bits)
    }
}

/// A value in a [`QFormat`]; represents exactly `raw * 2^-frac_bits`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct QValue {
    raw: i64,
    fmt: QFormat,
}

impl QValue {
    pub fn from_raw(raw: i64, fmt: QFormat) -> Result<Self, FxpError> {
        if !fmt.contains_raw(raw) {
            return Err(FxpError::RawOutOfRange { raw, fmt });
        }
        Ok(Self { raw, fmt })
    }

    pub fn saturating_from_raw(raw: i128, fmt: QFormat) -> Self {
        Self { raw: fmt.saturate(raw), fmt }
    }

    pub fn raw(self) -> i64 {
        self.raw
    }

    pub fn fmt(self) -> QFormat {
        self.fmt
    }

    pub fn to_f64(self) -> f64 {
        dequantize(self)
    }

    /// Two's-complement bit pattern as an unsigned table index.
    pub fn bit_pattern(self) -> u64 {
        let bits = self.fmt.total_bits();
        let mask = if bits == 64 { u64::MAX } else { (1u64 << bits) - 1 };
        (self.raw as u64) & mask
    }

    fn ensure_fmt(self, expected: QFormat) -> Result<(), FxpError> {
        if self.fmt != expected {
            return Err(FxpError::FormatMismatch { expected, found: self.fmt });
        }
        Ok(())
    }
}

impl fmt::Display for QValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_f64())
    }
}

fn pow2(exp: i32) -> f64 {
    2f64.powi(exp)
}

/// Nearest representable value, ties to even; out-of-range values saturate.
pub fn quantize(x: f64, fmt: QFormat) -> Result<QValue, FxpError> {
    if !x.is_finite() {
        return Err(FxpError::NonFinite(x));
    }
    // Scaling by a power of two is exact unless it overflows, and an overflow
    // to infinity saturates below anyway.
    let scaled = (x * pow2(fmt.frac_bits() as i32)).round_ties_even();
    let lower = fmt.min_raw() as f64;
    let raw = if scaled >= -lower {
        fmt.max_raw()
    } else if scaled <= lower {
        fmt.min_raw()
    } else {
        scaled as i64
    };
    Ok(QValue { raw, fmt })
}

pub fn dequantize(v: QValue) -> f64 {
    v.raw as f64 * v.fmt.ulp()
}

/// Where rounding happens inside the multiply-accumulate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Accumulation {
    /// Wide accumulator, one rounding when the result leaves the unit.
    #[default]
    Fused,
    /// Round and saturate back to the datapath format after every step.
    PerStep,
}

/// Guard bits that make `max_inputs` full-scale products plus a bias safe:
/// `ceil(log2(max_inputs)) + 1`.
pub fn guard_bits_for(max_inputs: usize) -> u32 {
    let n = max_inputs.max(1);
    (usize::BITS - (n - 1).leading_zeros()) + 1
}

/// Register geometry of an accumulator: datapath format plus guard bits.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AccLayout {
    fmt: QFormat,
    guard_bits: u32,
}

impl AccLayout {
    pub fn new(fmt: QFormat, max_inputs: usize) -> Result<Self, FxpError> {
        Self::with_guard_bits(fmt, guard_bits_for(max_inputs))
    }

    pub fn with_guard_bits(fmt: QFormat, guard_bits: u32) -> Result<Self, FxpError> {
        let width = 2 * fmt.total_bits() - 1 + guard_bits;
        if width > 128 {
            return Err(FxpError::AccumulatorTooWide { fmt, guard_bits, width });
        }
        Ok(Self { fmt, guard_bits })
    }

    pub fn fmt(self) -> QFormat {
        self.fmt
    }

    pub fn guard_bits(self) -> u32 {
        self.guard_bits
    }

    /// Signed register width in bits: `2*total_bits - 1 + guard_bits`.
    pub fn width(self) -> u32 {
        2 * self.fmt.total_bits() - 1 + self.guard_bits
    }

    pub fn min_raw(self) -> i128 {
        if self.width() == 128 {
            i128::MIN
        } else {
            -(1i128 << (self.width() - 1))
        }
    }

    pub fn max_raw(self) -> i128 {
        if self.width() == 128 {
            i128::MAX
        } else {
            (1i128 << (self.width() - 1)) - 1
        }
    }

    pub fn zero(self) -> WideAcc {
        WideAcc { raw: 0, layout: self }
    }

    fn checked(self, raw: Option<i128>) -> Result<WideAcc, FxpError> {
        match raw {
            Some(raw) if (self.min_raw()..=self.max_raw()).contains(&raw) => {
                Ok(WideAcc { raw, layout: self })
            }
            _ => Err(FxpError::AccumulatorOverflow { width: self.width() }),
        }
    }
}

/// Accumulator at product scale (`2 * frac_bits` fractional bits).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct WideAcc {
    raw: i128,
    layout: AccLayout,
}

impl WideAcc {
    pub fn raw(self) -> i128 {
        self.raw
    }

    pub fn layout(self) -> AccLayout {
        self.layout
    }

    pub fn fmt(self) -> QFormat {
        self.layout.fmt
    }

    /// Exact real value held, `raw * 2^-(2*frac_bits)`.
    pub fn to_f64(self) -> f64 {
        self.raw as f64 * pow2(-2 * self.fmt().frac_bits() as i32)
    }

    pub fn mac(self, a: QValue, w: QValue) -> Result<Self, FxpError> {
        acc_mac(self, a, w)
    }

    pub fn round(self) -> QValue {
        acc_round(self, self.fmt())
    }

    /// Round to the datapath format and re-align; used by per-step accumulation.
    pub fn requantized(self) -> Self {
        let v = self.round();
        WideAcc { raw: align(v), layout: self.layout }
    }
}

fn align(v: QValue) -> i128 {
    (v.raw as i128) << v.fmt.frac_bits()
}

/// Accumulator preloaded with `bias`, shifted left by `frac_bits` onto the
/// product scale.
pub fn acc_init_bias(layout: AccLayout, bias: QValue) -> Result<WideAcc, FxpError> {
    bias.ensure_fmt(layout.fmt)?;
    Ok(WideAcc { raw: align(bias), layout })
}

/// `acc + raw(a) * raw(w)`, exact.
pub fn acc_mac(acc: WideAcc, a: QValue, w: QValue) -> Result<WideAcc, FxpError> {
    a.ensure_fmt(acc.fmt())?;
    w.ensure_fmt(acc.fmt())?;
    let product = (a.raw as i128).checked_mul(w.raw as i128);
    acc.layout.checked(product.and_then(|p| acc.raw.checked_add(p)))
}

/// Rescale from product scale to `fmt`, round half to even, then saturate.
pub fn acc_round(acc: WideAcc, fmt: QFormat) -> QValue {
    let product_frac = 2 * acc.fmt().frac_bits();
    let target_frac = fmt.frac_bits();
    let raw = if target_frac <= product_frac {
        round_shift_ties_even(acc.raw, product_frac - target_frac)
    } else {
        acc.raw
            .checked_shl(target_frac - product_frac)
            .filter(|r| r >> (target_frac - product_frac) == acc.raw)
            .unwrap_or(if acc.raw < 0 { i128::MIN } else { i128::MAX })
    };
    QValue::saturating_from_raw(raw, fmt)
}

/// `x / 2^shift` rounded to nearest, ties to even.
pub(crate) fn round_shift_ties_even(x: i128, shift: u32) -> i128 {
    if shift == 0 {
        return x;
    }
    let quotient = x >> shift;
    let remainder = x - (quotient << shift);
    let half = 1i128 << (shift - 1);
    if remainder > half || (remainder == half && quotient & 1 == 1) {
        quotient + 1
    } else {
        quotient
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q83(raw: i64) -> QValue {
        QValue::from_raw(raw, QFormat::Q8_3).unwrap()
    }

    fn layout() -> AccLayout {
        AccLayout::new(QFormat::Q8_3, 196).unwrap()
    }

    /// Nearest raw by exhaustive search, ties to the even raw.
    fn brute_force_nearest(x: f64, fmt: QFormat) -> i64 {
        let mut best = fmt.min_raw();
        for raw in fmt.min_raw()..=fmt.max_raw() {
            let d = (raw as f64 * fmt.ulp() - x).abs();
            let db = (best as f64 * fmt.ulp() - x).abs();
            if d < db || (d == db && raw % 2 == 0) {
                best = raw;
            }
        }
        best
    }

    #[test]
    fn quantize_examples() {
        let f = QFormat::Q8_3;
        assert_eq!(quantize(0.0, f).unwrap().raw(), 0);
        assert_eq!(quantize(5.0, f).unwrap().raw(), 127);
        assert_eq!(quantize(5.0, f).unwrap().to_f64(), 3.96875);
        assert_eq!(quantize(-4.0, f).unwrap().raw(), -128);
        assert_eq!(quantize(0.2, f).unwrap().raw(), 6);
        assert_eq!(quantize(0.2, f).unwrap().to_f64(), 0.1875);
    }

    #[test]
    fn quantize_matches_brute_force_nearest() {
        let f = QFormat::Q8_3;
        let mut x = -5.0;
        while x <= 5.0 {
            assert_eq!(quantize(x, f).unwrap().raw(), brute_force_nearest(x, f), "x = {x}");
            x += 0.0061;
        }
        // Exact ties between neighbours.
        for raw in -128..127 {
            let tie = (raw as f64 + 0.5) * f.ulp();
            assert_eq!(quantize(tie, f).unwrap().raw(), brute_force_nearest(tie, f));
        }
    }

    #[test]
    fn quantize_rejects_non_finite() {
        assert!(matches!(quantize(f64::NAN, QFormat::Q8_3), Err(FxpError::NonFinite(_))));
        assert!(quantize(f64::INFINITY, QFormat::Q8_3).is_err());
    }

    #[test]
    fn dequantize_examples() {
        assert_eq!(dequantize(q83(6)), 0.1875);
        assert_eq!(dequantize(q83(0)), 0.0);
        assert_eq!(dequantize(q83(-128)), -4.0);
    }

    #[test]
    fn format_bounds() {
        assert!(QFormat::new(3, 1).is_err());
        assert!(QFormat::new(65, 3).is_err());
        assert!(QFormat::new(8, 0).is_err());
        assert!(QFormat::new(8, 9).is_err());
        let f = QFormat::new(8, 8).unwrap();
        assert_eq!(f.frac_bits(), 0);
        let f64fmt = QFormat::new(64, 1).unwrap();
        assert_eq!(f64fmt.min_raw(), i64::MIN);
        assert_eq!(f64fmt.max_raw(), i64::MAX);
        assert_eq!(QFormat::Q8_3.min_value(), -4.0);
        assert_eq!(QFormat::Q8_3.max_value(), 3.96875);
        assert!(QFormat::Q8_3.is_characterised());
        assert!(!QFormat::new(4, 3).unwrap().is_characterised());
    }

    #[test]
    fn bias_preload_examples() {
        assert_eq!(acc_init_bias(layout(), q83(32)).unwrap().raw(), 1024);
        assert_eq!(acc_init_bias(layout(), q83(0)).unwrap().raw(), 0);
        assert_eq!(acc_init_bias(layout(), q83(-128)).unwrap().raw(), -4096);
    }

    #[test]
    fn mac_examples() {
        let acc = acc_mac(layout().zero(), q83(16), q83(16)).unwrap();
        assert_eq!(acc.raw(), 256);
        assert_eq!(acc.to_f64(), 0.25);

        let x = acc_init_bias(layout(), q83(-77)).unwrap();
        assert_eq!(acc_mac(x, q83(0), q83(-128)).unwrap(), x);

        let acc = acc_init_bias(layout(), q83(32)).unwrap();
        let acc = acc_mac(acc, q83(16), q83(16)).unwrap();
        assert_eq!(acc.raw(), 1280);
        assert_eq!(acc.to_f64(), 1.25);
    }

    #[test]
    fn round_examples() {
        let acc = acc_init_bias(layout(), q83(40)).unwrap();
        assert_eq!(acc.raw(), 1280);
        assert_eq!(acc_round(acc, QFormat::Q8_3).raw(), 40);

        // 3.9 (nearest raw 125) + 2.0 * 2.0 saturates.
        let b = quantize(3.9, QFormat::Q8_3).unwrap();
        let two = quantize(2.0, QFormat::Q8_3).unwrap();
        let acc = acc_mac(acc_init_bias(layout(), b).unwrap(), two, two).unwrap();
        assert_eq!(acc_round(acc, QFormat::Q8_3).raw(), 127);
        assert_eq!(acc_round(acc, QFormat::Q8_3).to_f64(), 3.96875);

        let tie = layout().checked(Some(48)).unwrap();
        assert_eq!(acc_round(tie, QFormat::Q8_3).raw(), 2);
        let tie = layout().checked(Some(16)).unwrap();
        assert_eq!(acc_round(tie, QFormat::Q8_3).raw(), 0);
        let tie = layout().checked(Some(-48)).unwrap();
        assert_eq!(acc_round(tie, QFormat::Q8_3).raw(), -2);
    }

    #[test]
    fn mac_checks_formats() {
        let other = QFormat::new(16, 3).unwrap();
        let a = QValue::from_raw(1, other).unwrap();
        assert!(matches!(
            acc_mac(layout().zero(), a, q83(1)),
            Err(FxpError::FormatMismatch { .. })
        ));
        assert!(acc_init_bias(layout(), a).is_err());
    }

    #[test]
    fn guard_bits_sizing() {
        assert_eq!(guard_bits_for(1), 1);
        assert_eq!(guard_bits_for(2), 2);
        assert_eq!(guard_bits_for(196), 9);
        assert_eq!(guard_bits_for(256), 9);
        assert_eq!(guard_bits_for(257), 10);
        assert_eq!(layout().width(), 2 * 8 - 1 + 9);
        assert!(AccLayout::new(QFormat::new(64, 3).unwrap(), 196).is_err());
        assert!(AccLayout::new(QFormat::new(32, 3).unwrap(), 196).is_ok());
    }

    #[test]
    fn guard_bits_survive_worst_case() {
        for bits in [5u32, 8, 16, 32] {
            let fmt = QFormat::new(bits, 3).unwrap();
            let n = 196;
            let l = AccLayout::new(fmt, n).unwrap();
            let min = QValue::from_raw(fmt.min_raw(), fmt).unwrap();
            let max = QValue::from_raw(fmt.max_raw(), fmt).unwrap();
            let mut hi = acc_init_bias(l, max).unwrap();
            let mut lo = acc_init_bias(l, min).unwrap();
            for _ in 0..n {
                hi = acc_mac(hi, min, min).unwrap();
                lo = acc_mac(lo, min, max).unwrap();
            }
            assert_eq!(hi.raw(), fmt.max_raw() as i128 * (1 << fmt.frac_bits()) + n as i128 * (fmt.min_raw() as i128).pow(2));
        }
    }

    #[test]
    fn overflow_is_reported_past_the_guard_bits() {
        let fmt = QFormat::Q8_3;
        let l = AccLayout::with_guard_bits(fmt, 1).unwrap();
        let min = QValue::from_raw(-128, fmt).unwrap();
        let mut acc = l.zero();
        let mut result = Ok(acc);
        for _ in 0..4 {
            result = acc_mac(acc, min, min);
            match result {
                Ok(a) => acc = a,
                Err(_) => break,
            }
        }
        assert!(matches!(result, Err(FxpError::AccumulatorOverflow { width: 16 })));
    }

    #[test]
    fn per_step_requantize_rounds_each_time() {
        let l = layout();
        let acc = acc_mac(l.zero(), q83(1), q83(16)).unwrap(); // 16 at product scale = 0.5 ulp
        assert_eq!(acc.requantized().raw(), 0);
        assert_eq!(acc.round().raw(), 0);
        let two = acc_mac(acc, q83(1), q83(16)).unwrap();
        assert_eq!(two.round().raw(), 1);
        assert_eq!(acc_mac(acc.requantized(), q83(1), q83(16)).unwrap().requantized().raw(), 0);
    }

    #[test]
    fn bit_pattern_is_twos_complement() {
        assert_eq!(q83(-1).bit_pattern(), 0xff);
        assert_eq!(q83(-128).bit_pattern(), 0x80);
        assert_eq!(q83(5).bit_pattern(), 5);
    }
}
