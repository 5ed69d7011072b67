//! Plain-text output helpers shared by every table writer.

/// Formats a real with 9 significant digits; integers-valued reals stay
/// compact, very small or large magnitudes switch to exponent notation.
pub fn fmt_real(v: f64) -> String {
    if !v.is_finite() {
        return if v.is_nan() { "nan".into() } else if v > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if v == 0.0 {
        return "0".into();
    }
    let mag = v.abs().log10().floor() as i32;
    if !(-4..9).contains(&mag) {
        return format!("{v:.8e}");
    }
    let decimals = (8 - mag).max(0) as usize;
    let s = format!("{v:.decimals$}");
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    }
}

/// Joins already formatted fields into one CSV line (no trailing newline).
pub fn csv_line<S: AsRef<str>>(fields: &[S]) -> String {
    fields.iter().map(|f| f.as_ref()).collect::<Vec<_>>().join(",")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nine_significant_digits() {
        assert_eq!(fmt_real(std::f64::consts::E.recip()), "0.367879441");
        assert_eq!(fmt_real(4.291_932_052_578_694), "4.29193205");
        assert_eq!(fmt_real(0.5), "0.5");
        assert_eq!(fmt_real(-2.0), "-2");
        assert_eq!(fmt_real(1.349_898_031_630_094_6e-5), "1.34989803e-5");
        assert_eq!(fmt_real(123_456_789.4), "123456789");
        assert_eq!(fmt_real(0.0), "0");
        assert_eq!(fmt_real(f64::NAN), "nan");
    }
}
