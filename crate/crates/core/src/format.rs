//! Number formatting shared by the CSV emitters.

/// Formats `x` with `digits` significant digits using `%g` rules: fixed
/// notation for moderate exponents, scientific otherwise, trailing zeros
/// removed.
pub fn sig(x: f64, digits: usize) -> String {
    if !x.is_finite() {
        return format!("{x}");
    }
    if x == 0.0 {
        return "0".to_string();
    }
    let digits = digits.max(1);
    let sci = format!("{:.*e}", digits - 1, x);
    let (mantissa, exp) = sci.split_once('e').expect("scientific format");
    let exp: i32 = exp.parse().expect("exponent");
    if exp < -5 || exp >= digits as i32 {
        format!("{}e{}", trim_zeros(mantissa), exp)
    } else {
        let decimals = (digits as i32 - 1 - exp).max(0) as usize;
        trim_zeros(&format!("{:.*}", decimals, x)).to_string()
    }
}

/// Nine significant digits, the precision of every emitted trace column.
pub fn sig9(x: f64) -> String {
    sig(x, 9)
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matches_printf_g() {
        assert_eq!(sig9(50.0), "50");
        assert_eq!(sig9(49.123456789), "49.1234568");
        assert_eq!(sig9(-0.5), "-0.5");
        assert_eq!(sig9(0.0), "0");
        assert_eq!(sig9(1.0e-7), "1e-7");
        assert_eq!(sig9(123456789012.0), "1.23456789e11");
        assert_eq!(sig9(0.00012345), "0.00012345");
    }

    #[test]
    fn round_trips_within_nine_digits() {
        for &x in &[49.87654321987, -0.000123456789123, 3.0e15, 1.0 / 3.0] {
            let y: f64 = sig9(x).parse().unwrap();
            assert!(((x - y) / x).abs() < 1e-8, "{x} -> {y}");
        }
    }
}
