//! Number formatting for reports.

/// Significant digits used in every printed value.
pub const SIG_DIGITS: usize = 10;

/// Rounds to `SIG_DIGITS` significant digits.
pub fn round_sig(x: f64) -> f64 {
    if !x.is_finite() || x == 0.0 {
        return if x == 0.0 { 0.0 } else { x };
    }
    let s = format!("{:.*e}", SIG_DIGITS - 1, x);
    let r: f64 = s.parse().expect("scientific notation parses");
    if r == 0.0 {
        0.0
    } else {
        r
    }
}

/// Shortest text of `round_sig(x)`, e.g. `9.986666667`, `108` or
/// `7.105427358e-15`. Exponent form is used outside `[1e-6, 1e15)`.
pub fn fmt_sig(x: f64) -> String {
    let r = round_sig(x);
    let a = r.abs();
    if a != 0.0 && !(1e-6..1e15).contains(&a) {
        format!("{r:e}")
    } else {
        format!("{r}")
    }
}
