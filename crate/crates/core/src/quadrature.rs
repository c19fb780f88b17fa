//! Composite Simpson quadrature.

use crate::error::{Error, Result};

/// Integrates `f` over `[a, b]` with `panels` Simpson panels (`2 * panels`
/// subintervals).
pub fn simpson<F>(f: F, a: f64, b: f64, panels: usize) -> Result<f64>
where
    F: Fn(f64) -> f64,
{
    if panels == 0 {
        return Err(Error::param("panels", "must be positive"));
    }
    if !(a.is_finite() && b.is_finite()) {
        return Err(Error::param(
            "interval",
            format!("[{a}, {b}] is not finite"),
        ));
    }
    let n = 2 * panels;
    let h = (b - a) / n as f64;
    let x = |i: usize| {
        if i == n {
            b
        } else {
            a + (b - a) * (i as f64 / n as f64)
        }
    };
    let mut odd = 0.0;
    let mut even = 0.0;
    for i in 1..n {
        if i % 2 == 1 {
            odd += f(x(i));
        } else {
            even += f(x(i));
        }
    }
    Ok(h / 3.0 * (f(a) + f(b) + 4.0 * odd + 2.0 * even))
}
