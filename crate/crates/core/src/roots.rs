//! Bracketed root refinement for functions that are monotone on an interval.

#[derive(Debug, Clone, Copy, PartialEq, thiserror::Error)]
pub enum RootError {
    #[error("no sign change on [{lo}, {hi}]")]
    NotBracketed { lo: f64, hi: f64 },
    #[error("function is not finite at {0}")]
    NonFinite(f64),
}

/// Bisection of a strictly decreasing `f` on the open interval `(lo, hi)`.
///
/// The endpoints may be poles and are never evaluated. `f` must be positive
/// just right of `lo` and negative just left of `hi`; this is checked at the
/// first interior point only through the sign of the final bracket. Stops
/// once the bracket is narrower than `tol·max(1, |x|)` or stops shrinking.
pub fn bisect_decreasing(f: impl Fn(f64) -> f64, lo: f64, hi: f64, tol: f64) -> Result<Bracket, RootError> {
    if !(lo < hi) {
        return Err(RootError::NotBracketed { lo, hi });
    }
    let (mut a, mut b) = (lo, hi);
    let mut saw_pos = false;
    let mut saw_neg = false;
    for _ in 0..400 {
        let mid = 0.5 * (a + b);
        if mid <= a || mid >= b {
            break;
        }
        let v = f(mid);
        if v.is_nan() {
            return Err(RootError::NonFinite(mid));
        }
        if v > 0.0 {
            a = mid;
            saw_pos = true;
        } else if v < 0.0 {
            b = mid;
            saw_neg = true;
        } else {
            return Ok(Bracket { lo: mid, hi: mid, root: mid });
        }
        if b - a <= tol * mid.abs().max(1.0) {
            break;
        }
    }
    // a bracket that only ever moved one side may not contain a root
    if !(saw_pos || a > lo) || !(saw_neg || b < hi) {
        return Err(RootError::NotBracketed { lo, hi });
    }
    Ok(Bracket { lo: a, hi: b, root: 0.5 * (a + b) })
}

/// Result of a bracketed search: `root ∈ [lo, hi]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bracket {
    pub lo: f64,
    pub hi: f64,
    pub root: f64,
}

impl Bracket {
    /// One Newton step from the midpoint, kept only if it stays in the bracket.
    pub fn polish(self, f: impl Fn(f64) -> f64, df: impl Fn(f64) -> f64) -> f64 {
        let x = self.root;
        let d = df(x);
        if d == 0.0 || !d.is_finite() {
            return x;
        }
        let y = x - f(x) / d;
        if y.is_finite() && y >= self.lo && y <= self.hi {
            y
        } else {
            x
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn finds_root_between_poles() {
        // 1/(x+1) + 1/(x-1) has a zero at 0 between poles at ±1 and is decreasing there
        let f = |x: f64| 1.0 / (x + 1.0) + 1.0 / (x - 1.0);
        let b = bisect_decreasing(f, -1.0, 1.0, 1e-14).unwrap();
        assert!(b.root.abs() < 1e-13);
    }

    #[test]
    fn polish_improves_smooth_root() {
        let f = |x: f64| 2.0 - x * x * x;
        let df = |x: f64| -3.0 * x * x;
        let b = bisect_decreasing(f, 0.0, 3.0, 1e-8).unwrap();
        let x = b.polish(f, df);
        assert!((x - 2f64.cbrt()).abs() < 1e-14);
    }

    #[test]
    fn reports_missing_sign_change() {
        let f = |x: f64| 1.0 + x * 0.0;
        assert!(bisect_decreasing(f, 0.0, 1.0, 1e-12).is_err());
        assert!(bisect_decreasing(f, 1.0, 0.0, 1e-12).is_err());
    }
}
