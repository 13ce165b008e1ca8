use crate::error::{CoosError, Result};

/// Stop once `|u(x) − n(x)|` falls below this.
pub const BISECTION_TOLERANCE: f64 = 1e-9;
/// Stop once the bracket is narrower than this.
pub const BISECTION_WIDTH: f64 = 1e-12;

/// Point in `[lo, hi]` where the utility and norm curves cross, by bisection
/// on `u − n`. The difference must change sign strictly over the interval (an
/// endpoint where it is exactly zero counts as the crossing).
pub fn cross_point<U, N>(u: U, n: N, lo: f64, hi: f64) -> Result<f64>
where
    U: Fn(f64) -> f64,
    N: Fn(f64) -> f64,
{
    if !(lo.is_finite() && hi.is_finite() && lo < hi) {
        return Err(CoosError::domain(format!("invalid interval [{lo}, {hi}]")));
    }
    let f = |x: f64| u(x) - n(x);
    let (mut a, mut b) = (lo, hi);
    let (mut fa, fb) = (f(a), f(b));
    if !(fa.is_finite() && fb.is_finite()) {
        return Err(CoosError::domain("curves are not finite at the interval ends"));
    }
    if fa == 0.0 && fb == 0.0 {
        return Err(CoosError::Bracketing(
            "curves coincide at both interval ends".into(),
        ));
    }
    if fa == 0.0 {
        return Ok(a);
    }
    if fb == 0.0 {
        return Ok(b);
    }
    if fa.signum() == fb.signum() {
        return Err(CoosError::Bracketing(format!(
            "u - n has the same sign at {lo} and {hi}"
        )));
    }
    loop {
        let m = 0.5 * (a + b);
        let fm = f(m);
        if fm.abs() < BISECTION_TOLERANCE || b - a < BISECTION_WIDTH || m <= a || m >= b {
            return Ok(m);
        }
        if fm.signum() == fa.signum() {
            a = m;
            fa = fm;
        } else {
            b = m;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn symmetric_crossing() {
        let x = cross_point(|x| x, |x| 1.0 - x, 0.0, 1.0).unwrap();
        assert_abs_diff_eq!(x, 0.5, epsilon = 1e-9);
    }

    #[test]
    fn analytic_root() {
        let x = cross_point(|x| x * x, |_| 0.25, 0.0, 1.0).unwrap();
        assert_abs_diff_eq!(x, 0.5, epsilon = 1e-9);
    }

    #[test]
    fn identical_curves_do_not_bracket() {
        assert!(matches!(
            cross_point(|x| x, |x| x, 0.0, 1.0),
            Err(CoosError::Bracketing(_))
        ));
    }

    #[test]
    fn same_sign_does_not_bracket() {
        assert!(matches!(
            cross_point(|x| x + 2.0, |_| 0.0, 0.0, 1.0),
            Err(CoosError::Bracketing(_))
        ));
    }

    #[test]
    fn endpoint_root_is_returned() {
        assert_eq!(cross_point(|x| x, |_| 0.0, 0.0, 1.0).unwrap(), 0.0);
    }

    #[test]
    fn residual_meets_tolerance() {
        let x = cross_point(|x: f64| x.exp(), |_| 3.0, 0.0, 2.0).unwrap();
        assert!((x.exp() - 3.0).abs() < 1e-8);
    }
}
