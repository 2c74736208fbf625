//! Locale-independent number formatting.

/// Formats `x` with `sig` significant digits in the style of C's `%g`:
/// fixed notation for exponents in `[-4, sig)`, scientific otherwise, trailing
/// zeros removed.
pub fn sig(x: f64, sig: usize) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return "0".into();
    }
    let sig = sig.max(1);
    let sci = format!("{:.*e}", sig - 1, x);
    let (mantissa, exp) = sci.split_once('e').expect("scientific format has an exponent");
    let exp: i32 = exp.parse().expect("integer exponent");
    if exp < -4 || exp >= sig as i32 {
        let mantissa = trim_zeros(mantissa);
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{mantissa}e{sign}{:02}", exp.abs())
    } else {
        let decimals = (sig as i32 - 1 - exp).max(0) as usize;
        trim_zeros(&format!("{x:.decimals$}")).to_string()
    }
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
    use super::sig;

    #[test]
    fn matches_printf_g() {
        let cases = [
            (0.0, "0"),
            (1.0, "1"),
            (0.414_213_562_373, "0.414214"),
            (1.668_179_3, "1.66818"),
            (-2.5, "-2.5"),
            (0.046, "0.046"),
            (123_456_789.0, "1.23457e+08"),
            (0.000_012_345_67, "1.23457e-05"),
            (0.000_123_456_7, "0.000123457"),
            (999_999.5, "1e+06"),
            (100_000.0, "100000"),
            (0.002_179_449_471_770_337, "0.00217945"),
        ];
        for (x, want) in cases {
            assert_eq!(sig(x, 6), want, "{x}");
        }
        assert_eq!(sig(f64::NAN, 6), "nan");
        assert_eq!(sig(f64::NEG_INFINITY, 6), "-inf");
    }
}
