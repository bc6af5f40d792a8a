//! Fixed number formats of the CSV and JSON outputs.

/// Volts with 9 significant digits.
pub fn volts(v: f64) -> String {
    special(v).unwrap_or_else(|| format!("{v:.8e}"))
}

/// Decibels with 4 decimals; `inf` for error-free results.
pub fn db(v: f64) -> String {
    special(v).unwrap_or_else(|| format!("{v:.4}"))
}

/// Dimensionless quantities with 10 significant digits.
pub fn real(v: f64) -> String {
    special(v).unwrap_or_else(|| format!("{v:.9e}"))
}

fn special(v: f64) -> Option<String> {
    if v.is_nan() {
        Some("nan".into())
    } else if v.is_infinite() {
        Some(if v > 0.0 { "inf" } else { "-inf" }.into())
    } else {
        None
    }
}

/// A number as a JSON value: non-finite values become strings.
pub fn json(text: String) -> String {
    match text.as_str() {
        "nan" | "inf" | "-inf" => format!("\"{text}\""),
        _ => text,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fixed_formats() {
        assert_eq!(volts(0.0394), "3.94000000e-2");
        assert_eq!(volts(0.5122), "5.12200000e-1");
        assert_eq!(db(20.92731), "20.9273");
        assert_eq!(db(f64::INFINITY), "inf");
        assert_eq!(db(f64::NAN), "nan");
        assert_eq!(real(-0.0022325511426466945), "-2.232551143e-3");
        assert_eq!(json(db(f64::INFINITY)), "\"inf\"");
        assert_eq!(json(db(3.0)), "3.0000");
    }
}
