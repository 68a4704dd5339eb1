//! Safeguarded bisection/secant root finding on a sign-changing bracket.

/// Outcome of [`bisect_secant`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Root {
    pub x: f64,
    pub fx: f64,
    pub iterations: usize,
}

const MAX_ITER: usize = 400;

/// Finds a root of `f` on `[lo, hi]` where `f(lo)` and `f(hi)` differ in sign.
///
/// Odd iterations take a secant step from the bracket ends when it lands in
/// the middle 90% of the bracket; all other iterations bisect, so the bracket
/// at least halves every two steps. Iteration stops
/// once `|f| <= ftol` and the bracket is narrower than `xtol`, or the bracket
/// collapses to adjacent floats. Returns the best point seen; the caller
/// decides whether `fx` is small enough.
pub fn bisect_secant<F>(mut f: F, mut lo: f64, mut hi: f64, xtol: f64, ftol: f64) -> Root
where
    F: FnMut(f64) -> f64,
{
    let mut flo = f(lo);
    let mut fhi = f(hi);
    let mut best = if flo.abs() <= fhi.abs() { (lo, flo) } else { (hi, fhi) };
    let mut iterations = 0;

    while iterations < MAX_ITER {
        if best.1 == 0.0 {
            break;
        }
        let width = hi - lo;
        if best.1.abs() <= ftol && width <= xtol {
            break;
        }
        let mid = lo + 0.5 * width;
        if mid <= lo || mid >= hi {
            break;
        }
        iterations += 1;

        let secant = hi - fhi * (hi - lo) / (fhi - flo);
        let margin = 0.05 * width;
        let use_secant = iterations % 2 == 1
            && secant.is_finite()
            && secant > lo + margin
            && secant < hi - margin;
        let x = if use_secant { secant } else { mid };

        let fx = f(x);
        if fx.abs() < best.1.abs() {
            best = (x, fx);
        }
        if (fx < 0.0) == (flo < 0.0) {
            lo = x;
            flo = fx;
        } else {
            hi = x;
            fhi = fx;
        }
    }

    Root {
        x: best.0,
        fx: best.1,
        iterations,
    }
}
