/// Significant digits in machine-readable output.
pub const MACHINE_DIGITS: usize = 12;
/// Significant digits in human-readable tables.
pub const HUMAN_DIGITS: usize = 6;

/// `x` to `digits` significant digits, without trailing zeros. Very small
/// and very large magnitudes use exponent notation.
pub fn sig(x: f64, digits: usize) -> String {
    if !x.is_finite() {
        return if x.is_nan() { "nan".into() } else if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return "0".into();
    }
    let digits = digits.max(1);
    let mag = x.abs();
    if !(1e-6..1e15).contains(&mag) {
        let s = format!("{:.*e}", digits - 1, x);
        let (mantissa, exp) = s.split_once('e').expect("exponent form");
        return format!("{}e{exp}", trim(mantissa));
    }
    let decimals = digits as i32 - 1 - mag.log10().floor() as i32;
    let s = if decimals >= 0 {
        format!("{:.*}", decimals as usize, x)
    } else {
        let scale = 10f64.powi(-decimals);
        format!("{}", (x / scale).round() * scale)
    };
    let s = trim(&s);
    if s == "-0" {
        "0".into()
    } else {
        s
    }
}

fn trim(s: &str) -> String {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s.to_string()
    }
}

/// `x` rounded to `digits` significant digits.
pub fn round_sig(x: f64, digits: usize) -> f64 {
    if !x.is_finite() {
        return x;
    }
    sig(x, digits).parse().unwrap_or(x)
}

/// Probabilities for human tables: 6 significant digits, with magnitudes
/// below `1e-13` shown as 0.
pub fn human(x: f64) -> String {
    if x.abs() < 1e-13 {
        "0".into()
    } else {
        sig(x, HUMAN_DIGITS)
    }
}

/// A deviation in compact exponent form.
pub fn deviation(x: f64) -> String {
    if x == 0.0 {
        "0".into()
    } else {
        format!("{x:.1e}")
    }
}
