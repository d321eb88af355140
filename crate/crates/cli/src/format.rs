//! Fixed-precision number formatting shared by all outputs.

/// Formats `x` with exactly 12 significant digits: positional notation for
/// decimal exponents in `[-5, 12)`, scientific otherwise. Trailing zeros are
/// kept so every row has the same precision.
pub fn sig12(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return "0.00000000000".into();
    }
    // rounding first fixes the exponent, e.g. 9.99999999999996 -> 1.0e1
    let sci = format!("{x:.11e}");
    let exp: i32 = sci
        .rsplit_once('e')
        .and_then(|(_, e)| e.parse().ok())
        .unwrap_or(0);
    if (-5..12).contains(&exp) {
        let decimals = (11 - exp) as usize;
        format!("{x:.decimals$}")
    } else {
        sci
    }
}

/// Fixed 12 decimal places, used for single-value console output.
pub fn fixed12(x: f64) -> String {
    format!("{x:.12}")
}
