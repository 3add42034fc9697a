//! Scale functions of the spectrally negative representative.
//!
//! For the catalog, `1/(psi(beta) - q) = den(beta) / (A (beta - beta_+)(beta - beta_-))`,
//! so `W^(q)` is a sum of two exponentials, or `(c0 + c1 x) e^{beta_0 x}` once
//! the roots merge at `q = xi*`. Every integral below is taken in closed form.

use crate::error::{Error, Result};
use crate::model::{Exponent, LevyModel, RootPair};
use crate::numeric::{exp_diff_quotient, exprel, exprel2, s, Scalar};

/// Roots closer than this (relative) use the merged representation for integrals.
const MERGE_TOL: f64 = 1e-6;

#[derive(Clone, Copy, Debug)]
enum Terms<T> {
    Simple { c_plus: T, c_minus: T },
    Merged { beta0: T, c0: T, c1: T },
}

/// `W^(q)` and its companions for a fixed (possibly complex) `q`.
#[derive(Clone, Copy, Debug)]
pub struct ScaleContext<T: Scalar = f64> {
    exponent: Exponent,
    q: T,
    roots: RootPair<T>,
    terms: Terms<T>,
}

impl<T: Scalar> ScaleContext<T> {
    pub fn new(model: &LevyModel, q: T) -> Result<Self> {
        Self::from_exponent(model.exponent(), q)
    }

    pub fn from_exponent(exponent: Exponent, q: T) -> Result<Self> {
        let roots = exponent.roots(q)?;
        let a = exponent.leading();
        let (_, d1) = exponent.den_coeffs();
        let gap = roots.plus - roots.minus;
        let terms = if gap.abs() < MERGE_TOL * roots.plus.abs().max(1.0) {
            let beta0 = (roots.plus + roots.minus) * s(0.5);
            Terms::Merged { beta0, c0: s(d1 / a), c1: exponent.den(beta0) / s(a) }
        } else {
            Terms::Simple {
                c_plus: exponent.den(roots.plus) / (gap * s(a)),
                c_minus: -exponent.den(roots.minus) / (gap * s(a)),
            }
        };
        Ok(ScaleContext { exponent, q, roots, terms })
    }

    pub fn q(&self) -> T {
        self.q
    }

    pub fn roots(&self) -> RootPair<T> {
        self.roots
    }

    pub fn exponent(&self) -> &Exponent {
        &self.exponent
    }

    /// Exponential-polynomial terms `(a0, a1, rate)` meaning `(a0 + a1 y) e^{rate y}`.
    fn term_list(&self) -> ([(T, T, T); 2], usize) {
        match self.terms {
            Terms::Simple { c_plus, c_minus } => {
                ([(c_plus, T::zero(), self.roots.plus), (c_minus, T::zero(), self.roots.minus)], 2)
            }
            Terms::Merged { beta0, c0, c1 } => ([(c0, c1, beta0), (T::zero(), T::zero(), beta0)], 1),
        }
    }

    /// W^(q)(x); zero for negative x.
    pub fn w(&self, x: f64) -> T {
        if x < 0.0 {
            return T::zero();
        }
        let e = &self.exponent;
        let (_, d1) = e.den_coeffs();
        let RootPair { plus, minus } = self.roots;
        let body = e.den(plus) * exp_diff_quotient(plus, minus, x) + (minus * s(x)).exp() * s(d1);
        body / s(e.leading())
    }

    /// W^(q)(0), positive exactly for bounded variation.
    pub fn w_zero(&self) -> T {
        let (_, d1) = self.exponent.den_coeffs();
        s(d1 / self.exponent.leading())
    }

    /// W^(q)'(0+).
    pub fn w_prime_zero(&self) -> T {
        let e = &self.exponent;
        let (_, d1) = e.den_coeffs();
        (self.roots.minus * s(d1) + e.den(self.roots.plus)) / s(e.leading())
    }

    /// integral_0^x e^{-sv y} W^(q)(y) dy for x >= 0.
    pub fn integral_exp_w(&self, sv: T, x: f64) -> T {
        let xs: T = s(x);
        let (terms, n) = self.term_list();
        let mut acc = T::zero();
        for &(a0, a1, rate) in &terms[..n] {
            let u = (rate - sv) * xs;
            acc = acc + a0 * xs * exprel(u);
            if a1 != T::zero() {
                acc = acc + a1 * xs * xs * exprel2(u);
            }
        }
        acc
    }

    /// integral_0^x W^(q)(y) dy.
    pub fn int_w(&self, x: f64) -> T {
        self.integral_exp_w(T::zero(), x)
    }

    /// Z^(q)(x) = 1 + q integral_0^x W^(q).
    pub fn z(&self, x: f64) -> T {
        if x <= 0.0 {
            return T::one();
        }
        T::one() + self.q * self.int_w(x)
    }

    fn check_argument(&self, beta: T) -> Result<()> {
        let lb = self.exponent.lower_bound();
        if !(beta.re() > lb) {
            return Err(Error::Domain(format!(
                "exponent argument {:?} outside ({lb}, inf) of the representative",
                beta
            )));
        }
        Ok(())
    }

    /// Z^{(q),beta}(x) = 1 + (q - psi(beta)) integral_0^x e^{-beta y} W^(q)(y) dy.
    pub fn z_beta(&self, beta: T, x: f64) -> Result<T> {
        self.check_argument(beta)?;
        if x <= 0.0 {
            return Ok(T::one());
        }
        Ok(T::one() + (self.q - self.exponent.psi(beta)) * self.integral_exp_w(beta, x))
    }

    /// W_v^{(p)}(x) = e^{-v x} W^(q)(x) with p = q - psi(v).
    pub fn tilted_w(&self, v: T, x: f64) -> T {
        if x < 0.0 {
            return T::zero();
        }
        // shift both exponents so large x does not overflow before the product
        let e = &self.exponent;
        let (_, d1) = e.den_coeffs();
        let RootPair { plus, minus } = self.roots;
        let body = e.den(plus) * exp_diff_quotient(plus - v, minus - v, x) + ((minus - v) * s(x)).exp() * s(d1);
        body / s(e.leading())
    }

    /// integral_0^x e^{-alpha (x - y)} W^(q)(y) dy, evaluated without overflow.
    pub fn convolution_exp_w(&self, alpha: T, x: f64) -> T {
        if x <= 0.0 {
            return T::zero();
        }
        let xs: T = s(x);
        let (terms, n) = self.term_list();
        let mut acc = T::zero();
        for &(a0, a1, rate) in &terms[..n] {
            acc = acc + a0 * exp_diff_quotient(rate, -alpha, x);
            if a1 != T::zero() {
                let w = rate + alpha;
                let part = if w.re() <= 0.0 {
                    (-alpha * xs).exp() * xs * xs * exprel2(w * xs)
                } else {
                    let m = -w * xs;
                    (rate * xs).exp() * xs * xs * (exprel(m) - exprel2(m))
                };
                acc = acc + a1 * part;
            }
        }
        acc
    }

    /// G_1(alpha, x, q) with the inner integral in closed form.
    pub fn g1(&self, alpha: T, x: f64) -> T {
        let w0 = self.w_zero();
        let decay = (-alpha * s(x)).exp();
        w0 + self.w(x) - decay * w0 - alpha * self.convolution_exp_w(alpha, x)
    }

    /// G_2(alpha, x, q); integrating the double integral by parts leaves
    /// `-integral_0^x e^{-alpha (x - y)} W(y) dy`.
    pub fn g2(&self, alpha: T, x: f64) -> T {
        -self.convolution_exp_w(alpha, x)
    }

    /// e^{v x} Z^{(q),v}(x), stable for large v.
    pub fn exp_z_beta(&self, v: T, x: f64) -> Result<T> {
        self.check_argument(v)?;
        let near = |r: T| (v - r).abs() < 1e-2 * (1.0 + v.abs());
        let (terms, n) = self.term_list();
        if terms[..n].iter().any(|t| near(t.2)) || x <= 0.0 {
            return Ok((v * s(x)).exp() * self.z_beta(v, x)?);
        }
        let xs: T = s(x);
        let mut tail = T::zero();
        for &(a0, a1, rate) in &terms[..n] {
            let d = v - rate;
            tail = tail + (rate * xs).exp() * ((a0 + a1 * xs) / d + a1 / (d * d));
        }
        Ok(-(self.q - self.exponent.psi(v)) * tail)
    }

    /// (q - psi(v)) / (Phi(q) - v), written through the factorisation so it is
    /// finite at v = Phi(q).
    pub fn exit_ratio(&self, v: T) -> T {
        let e = &self.exponent;
        s::<T>(e.leading()) * (v - self.roots.minus) / e.den(v)
    }

    /// E_x[e^{-q tau_0^- + v X(tau_0^-)}; tau_0^- < inf] for the representative.
    pub fn undershoot(&self, v: T, x: f64) -> T {
        if x < 0.0 {
            return (v * s(x)).exp();
        }
        let e = &self.exponent;
        (self.roots.minus * s(x)).exp() * e.den(self.roots.minus) / e.den(v)
    }

    /// The same quantity assembled from scale functions:
    /// e^{vx} Z^{(q),v}(x) - (q - psi(v)) W^(q)(x) / (Phi(q) - v).
    pub fn undershoot_via_scale(&self, v: T, x: f64) -> Result<T> {
        Ok(self.exp_z_beta(v, x)? - self.exit_ratio(v) * self.w(x))
    }

    /// E_x[e^{-alpha X(e_q)}; tau_0^- > e_q] for the representative.
    pub fn killed(&self, alpha: T, x: f64) -> T {
        if x < 0.0 {
            return T::zero();
        }
        let e = &self.exponent;
        let (_, d1) = e.den_coeffs();
        let RootPair { plus, minus } = self.roots;
        let body = e.den(minus) * exp_diff_quotient(minus, -alpha, x) + (-alpha * s(x)).exp() * s(d1);
        self.q * body / (s::<T>(e.leading()) * (plus + alpha))
    }

    /// The same quantity from the G-kernels (atom term included once).
    pub fn killed_via_kernels(&self, alpha: T, x: f64) -> T {
        let phi = self.roots.plus;
        let w0 = self.w_zero();
        let atom = w0 * (T::one() - (-alpha * s(x)).exp());
        self.q / (phi + alpha) * (self.g1(alpha, x) - atom) + phi * self.q / (phi + alpha) * self.g2(alpha, x)
    }
}

impl ScaleContext<f64> {
    /// P(sup_{s <= e_q} Y_s <= z) for the spectrally positive member Y of the dual pair.
    pub fn sup_cdf(&self, z: f64) -> f64 {
        if z < 0.0 {
            return 0.0;
        }
        // survival is e^{beta_- z} den(beta_-)/den(0); the scale-function form cancels badly
        1.0 - self.undershoot(0.0, z)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Orientation;
    use num_complex::Complex64;

    fn bm() -> LevyModel {
        LevyModel::brownian(Orientation::SpectrallyNegative, 1.0, 1.0).unwrap()
    }

    fn cl() -> LevyModel {
        LevyModel::cramer_lundberg(1.0, 3.0, 2.0).unwrap()
    }

    fn quad(f: impl Fn(f64) -> f64, a: f64, b: f64) -> f64 {
        quadrature::double_exponential::integrate(f, a, b, 1e-13).integral
    }

    #[test]
    fn brownian_w_at_q_zero() {
        let ctx = ScaleContext::new(&bm(), 0.0).unwrap();
        for &x in &[0.0, 0.3, 1.0, 2.5] {
            let expected = f64::exp(2.0 * x) - 1.0;
            assert!((ctx.w(x) - expected).abs() < 1e-13 * expected.max(1.0));
        }
        assert_eq!(ctx.w(-1.0), 0.0);
    }

    #[test]
    fn atom_dichotomy() {
        let c = ScaleContext::new(&cl(), 0.0).unwrap();
        assert!((c.w(0.0) - 1.0).abs() < 1e-15);
        let b = ScaleContext::new(&bm(), 0.4).unwrap();
        assert_eq!(b.w(0.0), 0.0);
        assert!((b.w_prime_zero() - 2.0).abs() < 1e-13);
        let b2 =
            ScaleContext::new(&LevyModel::brownian(Orientation::SpectrallyNegative, 2.0, 1.0).unwrap(), 0.0).unwrap();
        assert!((b2.w_prime_zero() - 0.5).abs() < 1e-14);
    }

    #[test]
    fn w_prime_zero_matches_finite_difference() {
        for model in [bm(), cl()] {
            let ctx = ScaleContext::new(&model, 0.8).unwrap();
            let h = 1e-7;
            let fd = (ctx.w(h) - ctx.w(0.0)) / h;
            assert!((fd - ctx.w_prime_zero()).abs() < 1e-5 * fd.abs());
        }
    }

    #[test]
    fn z_beta_examples() {
        let ctx = ScaleContext::new(&bm(), 0.0).unwrap();
        assert_eq!(ctx.z_beta(0.7, 0.0).unwrap(), 1.0);
        let v = ctx.z_beta(1.0, 1.0).unwrap();
        let oracle = 1.0 + 0.5 * quad(|y| f64::exp(-y) * (f64::exp(2.0 * y) - 1.0), 0.0, 1.0);
        assert!((v - oracle).abs() < 1e-12);
        assert!((v - 1.543_080_634_815_24).abs() < 1e-12);
        let ctx = ScaleContext::new(&cl(), 0.6).unwrap();
        assert!((ctx.z_beta(0.0, 1.3).unwrap() - ctx.z(1.3)).abs() < 1e-14);
    }

    #[test]
    fn z_beta_domain_is_checked() {
        let ctx = ScaleContext::new(&cl(), 0.5).unwrap();
        assert!(ctx.z_beta(-2.5, 1.0).is_err());
        assert!(ctx.z_beta(-1.5, 1.0).is_ok());
    }

    #[test]
    fn tilted_w_examples() {
        let ctx = ScaleContext::new(&bm(), 0.0).unwrap();
        assert_eq!(ctx.tilted_w(0.0, 1.3), ctx.w(1.3));
        assert_eq!(ctx.tilted_w(1.0, -0.5), 0.0);
        let expected = f64::exp(-1.0) * (f64::exp(2.0) - 1.0);
        assert!((ctx.tilted_w(1.0, 1.0) - expected).abs() < 1e-14);
    }

    #[test]
    fn g_kernel_examples() {
        let ctx = ScaleContext::new(&bm(), 0.0).unwrap();
        let w = |z: f64| f64::exp(2.0 * z) - 1.0;
        let g1 = ctx.g1(1.0, 1.0);
        let oracle = w(1.0) - f64::exp(-1.0) * quad(|z| f64::exp(z) * w(z), 0.0, 1.0);
        assert!((g1 - oracle).abs() < 1e-12 * oracle.abs());
        for model in [bm(), cl()] {
            let ctx = ScaleContext::new(&model, 0.9).unwrap();
            assert!((ctx.g1(0.0, 1.2) - ctx.w(1.2)).abs() < 1e-13);
            assert!((ctx.g2(0.0, 1.2) + ctx.int_w(1.2)).abs() < 1e-13);
            assert!((ctx.g1(1e-8, 1.2) - ctx.w(1.2)).abs() < 1e-6);
            assert!((ctx.g2(1e-8, 1.2) + ctx.int_w(1.2)).abs() < 1e-6);
        }
    }

    #[test]
    fn g2_matches_double_integral_definition() {
        let ctx = ScaleContext::new(&cl(), 0.5).unwrap();
        let (alpha, x) = (0.8, 1.4);
        let inner = |z: f64| quad(|y| ctx.w(y), 0.0, z);
        let outer = quad(|z| f64::exp(alpha * z) * inner(z), 0.0, x);
        let oracle = alpha * f64::exp(-alpha * x) * outer - ctx.int_w(x);
        assert!((ctx.g2(alpha, x) - oracle).abs() < 1e-10);
    }

    #[test]
    fn undershoot_routes_agree() {
        for model in [bm(), cl()] {
            for &q in &[0.2, 1.5] {
                let ctx = ScaleContext::new(&model, q).unwrap();
                for &v in &[-0.4, 0.0, 0.9, 3.0, 25.0] {
                    for &x in &[0.0, 0.5, 2.0] {
                        let a = ctx.undershoot(v, x);
                        let b = ctx.undershoot_via_scale(v, x).unwrap();
                        assert!((a - b).abs() < 1e-10 * a.abs().max(1.0), "q={q} v={v} x={x}: {a} {b}");
                    }
                }
            }
        }
    }

    #[test]
    fn killed_routes_agree() {
        for model in [bm(), cl()] {
            let ctx = ScaleContext::new(&model, 0.7).unwrap();
            for &alpha in &[0.0, 0.5, 2.0] {
                for &x in &[0.0, 0.4, 1.7] {
                    let a = ctx.killed(alpha, x);
                    let b = ctx.killed_via_kernels(alpha, x);
                    assert!((a - b).abs() < 1e-12, "alpha={alpha} x={x}: {a} {b}");
                }
            }
        }
    }

    #[test]
    fn exp_z_beta_routes_agree() {
        let ctx = ScaleContext::new(&cl(), 0.4).unwrap();
        for &v in &[0.5, 2.0, 7.0] {
            let direct = f64::exp(v * 1.1) * ctx.z_beta(v, 1.1).unwrap();
            let stable = ctx.exp_z_beta(v, 1.1).unwrap();
            assert!((direct - stable).abs() < 1e-11 * direct.abs());
        }
    }

    #[test]
    fn merged_and_near_merged_forms_are_continuous() {
        for model in [bm(), cl()] {
            let xi = model.expansion_point().unwrap().xi_star;
            let at = ScaleContext::new(&model, xi).unwrap();
            let near = ScaleContext::new(&model, xi + 1e-9).unwrap();
            let off = ScaleContext::new(&model, xi + 1e-6).unwrap();
            for &x in &[0.3, 1.0, 3.0] {
                assert!((at.w(x) - near.w(x)).abs() < 1e-6 * at.w(x).abs());
                assert!((at.int_w(x) - off.int_w(x)).abs() < 1e-4 * at.int_w(x).abs());
                assert!((at.g2(0.5, x) - near.g2(0.5, x)).abs() < 1e-6 * at.g2(0.5, x).abs());
            }
        }
    }

    #[test]
    fn complex_path_matches_real_path() {
        for model in [bm(), cl()] {
            let r = ScaleContext::new(&model, 0.6).unwrap();
            let c = ScaleContext::new(&model, Complex64::new(0.6, 0.0)).unwrap();
            for &x in &[0.0, 0.7, 2.0] {
                assert!((c.w(x).re - r.w(x)).abs() < 1e-13 * r.w(x).abs().max(1.0));
                let a = Complex64::new(0.3, 0.0);
                assert!((c.g1(a, x).re - r.g1(0.3, x)).abs() < 1e-12);
                assert!((c.killed(a, x).re - r.killed(0.3, x)).abs() < 1e-13);
            }
        }
    }

    #[test]
    fn sup_cdf_has_atom_and_tends_to_one() {
        let ctx = ScaleContext::new(&cl(), 1.0).unwrap();
        let atom = ctx.sup_cdf(0.0);
        assert!((atom - 1.0 / ctx.roots().plus).abs() < 1e-14);
        assert!((ctx.sup_cdf(40.0) - 1.0).abs() < 1e-9);
        let z = 1.5;
        let via_scale = ctx.q() / ctx.roots().plus * ctx.w(z) - ctx.q() * ctx.int_w(z);
        assert!((ctx.sup_cdf(z) - via_scale).abs() < 1e-12);
        let b = ScaleContext::new(&bm(), 1.0).unwrap();
        assert_eq!(b.sup_cdf(0.0), 0.0);
    }
}
