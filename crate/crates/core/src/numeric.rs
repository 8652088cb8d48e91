//! Root finding and a small dense solve used by the suspension and load models.

use crate::Scalar;

/// Safeguarded Newton iteration on a sign-changing bracket `[lo, hi]`.
///
/// `f` returns `(value, derivative)`. Newton steps that leave the current bracket fall
/// back to bisection, so convergence is guaranteed for continuous `f`.
pub(crate) fn bracketed_root<T: Scalar>(mut lo: T, mut hi: T, tol: T, f: impl Fn(T) -> (T, T)) -> T {
    let (mut f_lo, _) = f(lo);
    let (f_hi, _) = f(hi);
    if f_lo == T::zero() {
        return lo;
    }
    if f_hi == T::zero() {
        return hi;
    }
    let half = T::lit(0.5);
    let mut x = (lo + hi) * half;
    for _ in 0..200 {
        let (fx, dfx) = f(x);
        if fx == T::zero() {
            return x;
        }
        if (fx < T::zero()) == (f_lo < T::zero()) {
            lo = x;
            f_lo = fx;
        } else {
            hi = x;
        }
        let newton = if dfx != T::zero() { x - fx / dfx } else { T::nan() };
        let next = if newton.is_finite() && newton > lo && newton < hi {
            newton
        } else {
            (lo + hi) * half
        };
        if (next - x).abs() <= tol || (hi - lo) <= tol {
            return next;
        }
        x = next;
    }
    x
}

/// Solves the 3x3 system `m * x = b` by Gaussian elimination with partial pivoting.
pub(crate) fn solve3<T: Scalar>(mut m: [[T; 3]; 3], mut b: [T; 3]) -> Option<[T; 3]> {
    for col in 0..3 {
        let pivot = (col..3)
            .max_by(|&i, &j| m[i][col].abs().partial_cmp(&m[j][col].abs()).unwrap())
            .unwrap();
        if m[pivot][col].abs() <= T::epsilon() {
            return None;
        }
        m.swap(col, pivot);
        b.swap(col, pivot);
        for row in col + 1..3 {
            let factor = m[row][col] / m[col][col];
            let pivot_row = m[col];
            for (dst, &v) in m[row].iter_mut().zip(&pivot_row).skip(col) {
                *dst -= factor * v;
            }
            let v = b[col];
            b[row] -= factor * v;
        }
    }
    let mut x = [T::zero(); 3];
    for row in (0..3).rev() {
        let mut acc = b[row];
        for k in row + 1..3 {
            acc -= m[row][k] * x[k];
        }
        x[row] = acc / m[row][row];
    }
    Some(x)
}
