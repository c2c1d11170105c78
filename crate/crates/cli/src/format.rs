//! Number formatting shared by the CSV and JSON writers.
//!
//! Every floating-point value is rounded to 12 significant digits before it
//! is written, so golden files compare exactly across platforms.

use serde_json::Value;

pub const SIGNIFICANT_DIGITS: usize = 12;

/// Rounds `x` to 12 significant digits (non-finite values pass through).
pub fn round_sig(x: f64) -> f64 {
    if !x.is_finite() || x == 0.0 {
        return x;
    }
    format!("{:.*e}", SIGNIFICANT_DIGITS - 1, x)
        .parse()
        .expect("formatted float parses")
}

/// Shortest text for the 12-significant-digit rounding of `x`: plain
/// notation in `[1e-4, 1e15)`, scientific otherwise. Non-finite values
/// become an empty field.
pub fn fmt_num(x: f64) -> String {
    if !x.is_finite() {
        return String::new();
    }
    let r = round_sig(x);
    let magnitude = r.abs();
    if r == 0.0 {
        "0".to_string()
    } else if (1e-4..1e15).contains(&magnitude) {
        format!("{r}")
    } else {
        format!("{r:e}")
    }
}

/// Rounds every number in a JSON tree in place; non-finite numbers cannot
/// occur in `serde_json::Value`.
pub fn round_json(value: &mut Value) {
    match value {
        Value::Number(n) if n.is_f64() => {
            let x = n.as_f64().expect("f64 number");
            if let Some(rounded) = serde_json::Number::from_f64(round_sig(x)) {
                *n = rounded;
            }
        }
        Value::Array(items) => items.iter_mut().for_each(round_json),
        Value::Object(map) => map.values_mut().for_each(round_json),
        _ => {}
    }
}
