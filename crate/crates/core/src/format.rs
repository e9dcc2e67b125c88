//! Fixed-precision number formatting for CSV and JSON outputs.

/// Significant digits used in every emitted number.
pub const SIGNIFICANT_DIGITS: usize = 9;

/// Formats `x` with nine significant digits, trailing zeros kept.
///
/// Plain decimal notation is used for magnitudes in [1e-4, 1e9); anything
/// else falls back to scientific notation.
pub fn sig9(x: f64) -> String {
    if x == 0.0 {
        return format!("{:.*}", SIGNIFICANT_DIGITS - 1, 0.0);
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let a = x.abs();
    if (1e-4..1e9).contains(&a) {
        // Round first so that e.g. 9.9999999996 picks the right exponent.
        let rounded: f64 = format!("{:.*e}", SIGNIFICANT_DIGITS - 1, x)
            .parse()
            .unwrap_or(x);
        let exp = rounded.abs().log10().floor() as i32;
        let decimals = (SIGNIFICANT_DIGITS as i32 - 1 - exp).max(0) as usize;
        format!("{:.*}", decimals, rounded)
    } else {
        format!("{:.*e}", SIGNIFICANT_DIGITS - 1, x)
    }
}

/// `x` rounded to nine significant digits, for JSON output.
pub fn round9(x: f64) -> f64 {
    if !x.is_finite() || x == 0.0 {
        return x;
    }
    format!("{:.*e}", SIGNIFICANT_DIGITS - 1, x)
        .parse()
        .unwrap_or(x)
}
