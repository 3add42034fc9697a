//! Scalar abstraction and small numerical kernels shared by the closed forms.

use num_complex::{Complex64, ComplexFloat};

/// Real or complex scalar on which the closed forms are evaluated.
///
/// Every formula in the crate is written once over `T: Scalar`; `f64` is the
/// probabilistic path and `Complex64` feeds the transform inversions.
pub trait Scalar: ComplexFloat<Real = f64> + From<f64> + Send + Sync + std::fmt::Debug + 'static {}

impl Scalar for f64 {}
impl Scalar for Complex64 {}

#[inline]
pub(crate) fn s<T: Scalar>(v: f64) -> T {
    <T as From<f64>>::from(v)
}

/// (e^z - 1)/z, accurate near z = 0.
pub fn exprel<T: Scalar>(z: T) -> T {
    if z.abs() < 0.5 {
        let mut term = T::one();
        let mut sum = T::one();
        for n in 2..40 {
            term = term * z / s(n as f64);
            sum = sum + term;
            if term.abs() <= 1e-17 * sum.abs() {
                break;
            }
        }
        sum
    } else {
        (z.exp() - T::one()) / z
    }
}

/// (e^z (z - 1) + 1)/z^2 = sum z^n / (n! (n + 2)).
pub fn exprel2<T: Scalar>(z: T) -> T {
    if z.abs() < 1.0 {
        let mut fact = T::one();
        let mut sum: T = s(0.5);
        for n in 1..60 {
            fact = fact * z / s(n as f64);
            let term = fact / s((n + 2) as f64);
            sum = sum + term;
            if term.abs() <= 1e-17 * sum.abs() {
                break;
            }
        }
        sum
    } else {
        (z.exp() * (z - T::one()) + T::one()) / (z * z)
    }
}

/// (e^{ax} - e^{bx})/(a - b), continuous across a = b where it equals x e^{ax}.
///
/// The exponential with the larger real part is factored out so the remaining
/// `exprel` argument never overflows.
pub fn exp_diff_quotient<T: Scalar>(a: T, b: T, x: f64) -> T {
    let xs: T = s(x);
    if (a - b).re() <= 0.0 {
        (b * xs).exp() * xs * exprel((a - b) * xs)
    } else {
        (a * xs).exp() * xs * exprel((b - a) * xs)
    }
}

/// Hybrid Newton/bisection root of an increasing-through-zero function on `[lo, hi]`.
///
/// Requires `f(lo) < 0 < f(hi)`. Stops when the step falls below
/// `tol * max(1, |x|)` or the residual vanishes.
pub fn safeguarded_newton<F>(f: F, mut lo: f64, mut hi: f64, start: f64, tol: f64) -> f64
where
    F: Fn(f64) -> (f64, f64),
{
    let mut x = start.clamp(lo, hi);
    if !(x > lo && x < hi) {
        x = 0.5 * (lo + hi);
    }
    for _ in 0..200 {
        let (fx, dfx) = f(x);
        if fx == 0.0 {
            return x;
        }
        if fx < 0.0 {
            lo = x;
        } else {
            hi = x;
        }
        let newton = x - fx / dfx;
        let next = if dfx > 0.0 && newton > lo && newton < hi { newton } else { 0.5 * (lo + hi) };
        let step = (next - x).abs();
        x = next;
        if step <= tol * x.abs().max(1.0) || hi - lo <= tol * x.abs().max(1.0) {
            return x;
        }
    }
    x
}
