//! Fixed 17-significant-digit number formatting for CSV and JSON output.
//!
//! Every float leaves the crate as `d.dddddddddddddddde±x`, which round-trips
//! exactly through `f64` parsing and keeps repeated runs byte-identical.

use serde::Serializer;

/// Formats `x` with 17 significant digits. Non-finite values map to
/// `nan`, `inf` and `-inf`.
pub fn sig17(x: f64) -> String {
    if x.is_finite() {
        format!("{:.16e}", x)
    } else if x.is_nan() {
        "nan".to_string()
    } else if x > 0.0 {
        "inf".to_string()
    } else {
        "-inf".to_string()
    }
}

/// Joins values into one CSV record.
pub fn csv_row(values: &[f64]) -> String {
    values.iter().map(|&v| sig17(v)).collect::<Vec<_>>().join(",")
}

fn json_number(x: f64) -> Option<serde_json::Number> {
    if x.is_finite() {
        sig17(x).parse().ok()
    } else {
        None
    }
}

/// `serialize_with` helper: a float as a 17-digit JSON number (`null` if
/// not finite).
pub fn ser_f64<S: Serializer>(x: &f64, s: S) -> Result<S::Ok, S::Error> {
    use serde::Serialize;
    json_number(*x).serialize(s)
}

/// `serialize_with` helper for float sequences.
pub fn ser_vec<S: Serializer>(xs: &[f64], s: S) -> Result<S::Ok, S::Error> {
    use serde::ser::SerializeSeq;
    let mut seq = s.serialize_seq(Some(xs.len()))?;
    for &x in xs {
        seq.serialize_element(&json_number(x))?;
    }
    seq.end()
}

/// `serialize_with` helper for optional floats.
pub fn ser_opt<S: Serializer>(x: &Option<f64>, s: S) -> Result<S::Ok, S::Error> {
    use serde::Serialize;
    x.and_then(json_number).serialize(s)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seventeen_digits_round_trip() {
        for &x in &[1.0, -0.1, 1.6118548977353129, 1e-300, 123_456_789.123_456_79] {
            let s = sig17(x);
            let mantissa = s.split('e').next().unwrap().trim_start_matches('-');
            assert_eq!(mantissa.chars().filter(|c| c.is_ascii_digit()).count(), 17);
            assert_eq!(s.parse::<f64>().unwrap(), x);
        }
    }

    #[test]
    fn json_numbers_keep_their_text() {
        #[derive(serde::Serialize)]
        struct Row {
            #[serde(serialize_with = "ser_f64")]
            v: f64,
        }
        let text = serde_json::to_string(&Row { v: 0.5 }).unwrap();
        assert_eq!(text, r#"{"v":5.0000000000000000e-1}"#);
        let text = serde_json::to_string(&Row { v: f64::NAN }).unwrap();
        assert_eq!(text, r#"{"v":null}"#);
    }
}
