use crate::{Error, Result};

/// Number of series terms summed explicitly before the tail correction.
const DIRECT_TERMS: usize = 100_000;

/// Hurwitz zeta function `ζ(x, a) = Σ_{j≥0} (j + a)^(-x)`.
///
/// The first [`DIRECT_TERMS`] terms are summed directly (smallest first).
/// The remainder is the Euler–Maclaurin tail: the integral from the cut, the
/// half-term at the cut and the first two derivative corrections. At the
/// cut the neglected terms are below `1e-20` relative for every `x > 1`.
pub fn hurwitz_zeta(x: f64, a: f64) -> Result<f64> {
    if !(x > 1.0) || !x.is_finite() {
        return Err(Error::domain(format!(
            "hurwitz_zeta requires x > 1, got {x}"
        )));
    }
    if !(a > 0.0) || !a.is_finite() {
        return Err(Error::domain(format!(
            "hurwitz_zeta requires a > 0, got {a}"
        )));
    }

    let direct: f64 = (0..DIRECT_TERMS)
        .rev()
        .map(|j| (j as f64 + a).powf(-x))
        .sum();

    let b = DIRECT_TERMS as f64 + a;
    let fb = b.powf(-x);
    let integral = b * fb / (x - 1.0);
    let half = 0.5 * fb;
    let first = x / 12.0 * fb / b;
    let second = x * (x + 1.0) * (x + 2.0) / 720.0 * fb / (b * b * b);

    Ok(direct + (integral + half + first - second))
}
