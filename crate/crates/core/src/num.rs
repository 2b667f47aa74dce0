/// Parses a finite decimal number; `nan`/`inf` spellings are rejected.
pub(crate) fn parse_finite(tok: &str) -> Option<f64> {
    tok.parse::<f64>().ok().filter(|v| v.is_finite())
}

/// Formats `v` with at least `min_decimals` places when that representation
/// parses back to the same value, otherwise falls back to the shortest exact form.
pub(crate) fn fmt_num(v: f64, min_decimals: usize) -> String {
    let s = format!("{v:.min_decimals$}");
    if s.parse::<f64>().ok() == Some(v) {
        s
    } else {
        format!("{v}")
    }
}

/// Rounds to `digits` significant digits.
pub(crate) fn round_sig(v: f64, digits: usize) -> f64 {
    if v == 0.0 || !v.is_finite() {
        return v;
    }
    let s = format!("{:.*e}", digits.saturating_sub(1), v);
    s.parse().unwrap_or(v)
}

/// Serializes a derived ratio with six significant digits.
pub(crate) fn ser_sig6<S: serde::Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_f64(round_sig(*v, 6))
}

pub(crate) fn ser_opt_sig6<S: serde::Serializer>(v: &Option<f64>, s: S) -> Result<S::Ok, S::Error> {
    match v {
        Some(v) => s.serialize_some(&round_sig(*v, 6)),
        None => s.serialize_none(),
    }
}
