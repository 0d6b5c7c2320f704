//! Round-trip-exact decimal formatting for exported numbers.

/// Shortest decimal string that parses back to exactly `v`. Very small and
/// very large magnitudes use exponent notation to keep rows short.
pub fn real(v: f64) -> String {
    let a = v.abs();
    if v == 0.0 || (1e-5..1e16).contains(&a) || !v.is_finite() {
        format!("{v}")
    } else {
        format!("{v:e}")
    }
}
