//! Report rendering: JSON with 17 significant digits and plain-text tables.

use std::fmt::Write as _;

use gumbel_order::OrderVerdict;
use serde::Serialize;
use serde_json::{json, Number, Value};

/// A float as a JSON number with 17 significant digits; non-finite values
/// become `null`.
pub fn num(x: f64) -> Value {
    if !x.is_finite() {
        return Value::Null;
    }
    let text = format!("{x:.16e}");
    Value::Number(text.parse::<Number>().expect("scientific notation is valid JSON"))
}

/// Rewrites every non-integer number in `v` with [`num`].
pub fn normalize(v: Value) -> Value {
    match v {
        Value::Number(n) => {
            let s = n.to_string();
            if s.contains(['.', 'e', 'E']) {
                num(s.parse::<f64>().expect("JSON numbers parse as f64"))
            } else {
                Value::Number(n)
            }
        }
        Value::Array(items) => Value::Array(items.into_iter().map(normalize).collect()),
        Value::Object(map) => Value::Object(map.into_iter().map(|(k, v)| (k, normalize(v))).collect()),
        other => other,
    }
}

pub fn to_json<T: Serialize>(value: &T) -> Value {
    normalize(serde_json::to_value(value).expect("report types serialize"))
}

pub fn verdict_json(v: &OrderVerdict) -> Value {
    json!({
        "relation": v.relation.as_str(),
        "direction": v.direction.as_str(),
        "outcome": v.outcome.to_string(),
        "witness_x": v.witness.map_or(Value::Null, |w| num(w.x)),
        "witness_lhs": v.witness.map_or(Value::Null, |w| num(w.lhs)),
        "witness_rhs": v.witness.map_or(Value::Null, |w| num(w.rhs)),
        "margin": num(v.margin),
        "points_checked": v.points_checked,
        "note": v.note,
    })
}

pub fn render_json(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("values serialize");
    s.push('\n');
    s
}

/// Fixed-width rows of verdicts.
pub fn verdict_table(verdicts: &[OrderVerdict]) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{:<9}{:<15}{:<14}{:>24}  {:>24}", "relation", "direction", "outcome", "margin", "witness_x");
    for v in verdicts {
        let witness = v.witness.map_or_else(|| "-".to_string(), |w| format!("{:.9e}", w.x));
        let _ = writeln!(
            out,
            "{:<9}{:<15}{:<14}{:>24}  {:>24}",
            v.relation.as_str(),
            v.direction.as_str(),
            v.outcome.to_string(),
            format!("{:.9e}", v.margin),
            witness
        );
        if let Some(note) = &v.note {
            let _ = writeln!(out, "    note: {note}");
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn numbers_round_trip_bit_for_bit() {
        for x in [0.1, 1.0 / 3.0, -2.913_473_986_927_79, 1e-300, 6.02e23, f64::MIN_POSITIVE] {
            let text = serde_json::to_string(&num(x)).unwrap();
            assert_eq!(text.parse::<f64>().unwrap().to_bits(), x.to_bits(), "{text}");
        }
        assert_eq!(num(f64::NAN), Value::Null);
    }

    #[test]
    fn normalize_keeps_integers() {
        let v = normalize(json!({"a": 3, "b": [0.5, 2.0], "c": "x"}));
        assert_eq!(
            serde_json::to_string(&v).unwrap(),
            r#"{"a":3,"b":[5.0000000000000000e-1,2.0000000000000000e+0],"c":"x"}"#
        );
    }
}
