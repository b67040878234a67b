//! Scalar root finding on brackets.

#[derive(Debug, Clone, Copy, PartialEq, thiserror::Error)]
pub enum RootError {
    #[error("no sign change on [{lo}, {hi}]")]
    NotBracketed { lo: f64, hi: f64 },
    #[error("root finder stalled after {iterations} iterations near x = {x}")]
    NoConvergence { x: f64, iterations: usize },
    #[error("function returned a non-finite value at x = {x}")]
    NonFinite { x: f64 },
}

/// Newton iteration safeguarded by bisection (rtsafe).
///
/// `f` returns the value and derivative. `fa` and `fb` must have opposite signs
/// or one of them must vanish. Stops once the bracket or the Newton step is
/// below `xtol_rel * |x|`.
pub fn newton_bracketed<F>(
    mut f: F,
    lo: f64,
    hi: f64,
    x0: f64,
    xtol_rel: f64,
) -> Result<f64, RootError>
where
    F: FnMut(f64) -> Result<(f64, f64), RootError>,
{
    const MAX_ITER: usize = 200;
    let (flo, _) = f(lo)?;
    if flo == 0.0 {
        return Ok(lo);
    }
    let (fhi, _) = f(hi)?;
    if fhi == 0.0 {
        return Ok(hi);
    }
    if (flo > 0.0) == (fhi > 0.0) {
        return Err(RootError::NotBracketed { lo, hi });
    }
    // orient so that g(neg) < 0 < g(pos)
    let (mut neg, mut pos) = if flo < 0.0 { (lo, hi) } else { (hi, lo) };
    let mut x = if x0 > lo.min(hi) && x0 < lo.max(hi) { x0 } else { 0.5 * (lo + hi) };
    for it in 0..MAX_ITER {
        let (fx, dfx) = f(x)?;
        if !fx.is_finite() {
            return Err(RootError::NonFinite { x });
        }
        if fx == 0.0 {
            return Ok(x);
        }
        if fx < 0.0 {
            neg = x;
        } else {
            pos = x;
        }
        let tol = xtol_rel * x.abs().max(f64::MIN_POSITIVE);
        let (a, b) = if neg < pos { (neg, pos) } else { (pos, neg) };
        let newton = x - fx / dfx;
        let next = if dfx != 0.0 && dfx.is_finite() && newton > a && newton < b {
            newton
        } else {
            0.5 * (a + b)
        };
        if (next - x).abs() <= tol || (b - a) <= tol {
            return Ok(next);
        }
        x = next;
        if it + 1 == MAX_ITER {
            break;
        }
    }
    Err(RootError::NoConvergence { x, iterations: MAX_ITER })
}

/// Geometric search for an upper bracket: returns the first `b = start * factor^k`
/// with `pred(b)` true.
pub fn grow_until<P: FnMut(f64) -> Result<bool, RootError>>(
    start: f64,
    factor: f64,
    limit: f64,
    mut pred: P,
) -> Result<f64, RootError> {
    let mut b = start;
    loop {
        if pred(b)? {
            return Ok(b);
        }
        let next = b * factor;
        if (factor > 1.0 && next > limit) || (factor < 1.0 && next < limit) || !next.is_finite() {
            return Err(RootError::NotBracketed { lo: start, hi: b });
        }
        b = next;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn finds_cube_root() {
        let r = newton_bracketed(|x| Ok((x * x * x - 2.0, 3.0 * x * x)), 0.0, 2.0, 1.0, 1e-15).unwrap();
        assert!((r - libm::cbrt(2.0)).abs() < 1e-14);
    }

    #[test]
    fn survives_bad_derivative() {
        // flat derivative at the start forces bisection
        let r = newton_bracketed(|x| Ok((libm::atan(x - 0.3), 0.0)), -5.0, 5.0, 0.0, 1e-14).unwrap();
        assert!((r - 0.3).abs() < 1e-12);
    }

    #[test]
    fn rejects_missing_bracket() {
        let r = newton_bracketed(|x| Ok((x * x + 1.0, 2.0 * x)), -1.0, 1.0, 0.0, 1e-12);
        assert!(matches!(r, Err(RootError::NotBracketed { .. })));
    }

    #[test]
    fn grows_geometrically() {
        let b = grow_until(1.0, 2.0, 1e9, |b| Ok(b * b > 1000.0)).unwrap();
        assert_eq!(b, 32.0);
        assert!(grow_until(1.0, 2.0, 10.0, |_| Ok(false)).is_err());
    }
}
