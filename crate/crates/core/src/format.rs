//! Text formatting shared by the report writers.

/// Formats `v` with 17 significant digits in scientific notation, which is
/// enough to round-trip any `f64`.
pub fn float17(v: f64) -> String {
    format!("{v:.16e}")
}
