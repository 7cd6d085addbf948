//! Deterministic decimal formatting for file output.

/// Plain decimal with 9 significant digits, trailing zeros trimmed but at
/// least one decimal kept: `1.0`, `-2.0`, `0.0597057756`.
pub fn sig9(value: f64) -> String {
    format_sig(value, 9)
}

/// Fixed-significant-digit decimal formatting. Never emits scientific
/// notation, so output is safe for CSV columns and SVG attributes alike.
pub fn format_sig(value: f64, digits: u32) -> String {
    assert!(digits >= 1);
    if value == 0.0 {
        // Covers -0.0 as well.
        return "0.0".to_string();
    }
    debug_assert!(value.is_finite(), "cannot format {value}");
    let magnitude = value.abs().log10().floor() as i32;
    let decimals = ((digits as i32 - 1) - magnitude).clamp(0, 17) as usize;
    let mut s = format!("{value:.decimals$}");
    if s.contains('.') {
        while s.ends_with('0') {
            s.pop();
        }
        if s.ends_with('.') {
            s.push('0');
        }
    } else {
        s.push_str(".0");
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn plain_values() {
        assert_eq!(sig9(0.0), "0.0");
        assert_eq!(sig9(-0.0), "0.0");
        assert_eq!(sig9(1.0), "1.0");
        assert_eq!(sig9(-2.0), "-2.0");
        assert_eq!(sig9(0.5), "0.5");
    }

    #[test]
    fn nine_significant_digits() {
        assert_eq!(sig9(1.0 / 9.0), "0.111111111");
        assert_eq!(sig9(-1.0 / 18.0), "-0.0555555556");
        assert_eq!(sig9(123.456789123), "123.456789");
    }

    #[test]
    fn rounding_carries() {
        assert_eq!(sig9(0.9999999999), "1.0");
        assert_eq!(sig9(0.999999999), "0.999999999");
    }

    #[test]
    fn round_trips_within_precision() {
        for &x in &[3.78159265358979, -0.00012345678, 250000.125] {
            let s = sig9(x);
            let back: f64 = s.parse().unwrap();
            assert!((back - x).abs() <= 1e-8 * x.abs().max(1.0), "{x} -> {s}");
        }
    }
}
