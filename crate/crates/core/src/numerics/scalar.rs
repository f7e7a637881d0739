/// Relative slack used when a real-valued formula lands on an integer.
///
/// Quantities like `1/(2ε)` for `ε = 1/12` evaluate to `6.000000000000001`
/// in floating point; without snapping, a ceiling would jump to the next
/// integer.
pub const INTEGER_SNAP: f64 = 1e-9;

/// Rounds values within [`INTEGER_SNAP`] (relative) of an integer onto it.
pub fn snap(x: f64) -> f64 {
    let r = x.round();
    if (x - r).abs() <= INTEGER_SNAP * r.abs().max(1.0) {
        r
    } else {
        x
    }
}

/// `⌈x⌉` after snapping.
pub fn ceil_real(x: f64) -> i64 {
    snap(x).ceil() as i64
}

/// `⌈log₂ x⌉` for a real `x > 0`, after snapping `x` to nearby powers of two.
pub fn ceil_log2_real(x: f64) -> i64 {
    let lg = x.log2();
    ceil_real(lg)
}

/// `⌈log₂ n⌉` for integers, with `⌈log₂ 1⌉ = 0`.
pub fn ceil_log2(n: u64) -> u32 {
    assert!(n > 0, "log of zero");
    if n == 1 {
        0
    } else {
        64 - (n - 1).leading_zeros()
    }
}
