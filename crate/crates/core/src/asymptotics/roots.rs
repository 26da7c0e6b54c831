//! Bracketed scalar root finding: secant steps safeguarded by bisection.

use crate::error::{Error, Result};

/// Finds a root of `f` in `[a, b]`, where `f(a)` and `f(b)` differ in sign,
/// to within `xtol` in the argument.
pub fn find_root<F: FnMut(f64) -> Result<f64>>(mut f: F, mut a: f64, mut b: f64, xtol: f64) -> Result<f64> {
    let mut fa = f(a)?;
    let mut fb = f(b)?;
    if fa == 0.0 {
        return Ok(a);
    }
    if fb == 0.0 {
        return Ok(b);
    }
    if fa.signum() == fb.signum() {
        return Err(Error::Convergence(format!(
            "no sign change on [{a}, {b}]: f = {fa:e}, {fb:e}"
        )));
    }
    let mut last_width = b - a;
    for _ in 0..200 {
        let width = b - a;
        if width <= xtol {
            break;
        }
        // Secant through the bracket ends; fall back to the midpoint when it
        // leaves the interior or the bracket stopped shrinking fast enough.
        let mut x = b - fb * (b - a) / (fb - fa);
        let margin = 0.01 * width;
        if !(x > a + margin && x < b - margin) || width > 0.5 * last_width {
            x = 0.5 * (a + b);
        }
        last_width = width;
        let fx = f(x)?;
        if fx == 0.0 {
            return Ok(x);
        }
        if fx.signum() == fa.signum() {
            a = x;
            fa = fx;
        } else {
            b = x;
            fb = fx;
        }
    }
    if b - a > xtol {
        return Err(Error::Convergence(format!("bracket [{a}, {b}] did not shrink below {xtol:e}")));
    }
    Ok(if fa.abs() < fb.abs() { a } else { b })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn square_root_of_two() {
        let r = find_root(|x| Ok(x * x - 2.0), 0.0, 2.0, 1e-15).unwrap();
        assert!((r - std::f64::consts::SQRT_2).abs() < 1e-14);
    }

    #[test]
    fn missing_bracket() {
        assert!(find_root(|x| Ok(x * x + 1.0), -1.0, 1.0, 1e-12).is_err());
    }
}
