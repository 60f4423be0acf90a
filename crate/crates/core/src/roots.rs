//! Bracketed root finding for smooth scalar functions.

use crate::error::{HqcError, Result};

/// Width at which bisection hands over to the secant polish.
pub const BRACKET_WIDTH: f64 = 1e-13;

/// Root of `f` in `[a, b]` given a sign change: bisection down to
/// [`BRACKET_WIDTH`], then one secant step kept only if it stays inside the bracket.
pub fn bisect_secant(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> Result<f64> {
    let mut fa = f(a);
    let fb = f(b);
    if fa == 0.0 {
        return Ok(a);
    }
    if fb == 0.0 {
        return Ok(b);
    }
    if !(fa.is_finite() && fb.is_finite()) || fa.signum() == fb.signum() {
        return Err(HqcError::domain(format!("no sign change on [{a}, {b}]")));
    }
    let mut fb = fb;
    while (b - a).abs() > BRACKET_WIDTH {
        let m = 0.5 * (a + b);
        if m <= a.min(b) || m >= a.max(b) {
            break;
        }
        let fm = f(m);
        if fm == 0.0 {
            return Ok(m);
        }
        if fm.signum() == fa.signum() {
            a = m;
            fa = fm;
        } else {
            b = m;
            fb = fm;
        }
    }
    let secant = b - fb * (b - a) / (fb - fa);
    if secant.is_finite() && secant >= a.min(b) && secant <= a.max(b) {
        Ok(secant)
    } else {
        Ok(0.5 * (a + b))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn square_root_of_two() {
        let r = bisect_secant(|x| x * x - 2.0, 0.0, 2.0).unwrap();
        assert!((r - 2f64.sqrt()).abs() < 1e-14);
    }

    #[test]
    fn reversed_bracket() {
        let r = bisect_secant(|x| x.cos(), 3.0, 1.0).unwrap();
        assert!((r - std::f64::consts::FRAC_PI_2).abs() < 1e-14);
    }

    #[test]
    fn endpoint_root_and_no_sign_change() {
        assert_eq!(bisect_secant(|x| x - 1.0, 1.0, 2.0).unwrap(), 1.0);
        assert!(bisect_secant(|x| x * x + 1.0, -1.0, 1.0).is_err());
    }
}
