//! Euler-summation inversion of Laplace transforms and the finite-time
//! quantities it yields from the resolvents.
//!
//! `f(t) ~ e^{A/2}/t [Re F(A/2t)/2 + sum_k (-1)^k Re F((A + 2 k pi i)/2t)]`,
//! with binomial averaging of the last partial sums. Each call is evaluated
//! twice with different truncation points and the two must agree.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::model::LevyModel;
use crate::resolvent::parisian_split;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EulerInversion {
    /// Discretisation parameter; the aliasing error is about e^{-a}.
    pub a: f64,
    /// Terms before averaging.
    pub terms: usize,
    /// Binomial averaging order.
    pub averaging: usize,
    /// Allowed disagreement between the two truncations, relative to max(|f|, floor).
    pub tol: f64,
    pub floor: f64,
}

impl Default for EulerInversion {
    fn default() -> Self {
        EulerInversion { a: 18.4, terms: 32, averaging: 32, tol: 1e-6, floor: 1e-6 }
    }
}

impl EulerInversion {
    fn estimate(&self, values: &[Complex64], n: usize) -> Complex64 {
        let mut sum: Complex64 = values[..n].iter().sum();
        let m = self.averaging;
        let mut binom = 1.0f64;
        let mut acc = Complex64::new(0.0, 0.0);
        for (j, v) in values[n..=n + m].iter().enumerate() {
            sum += v;
            acc += sum * binom;
            binom = binom * (m - j) as f64 / (j + 1) as f64;
        }
        acc * 0.5f64.powi(m as i32)
    }

    fn run<G>(&self, term: G, t: f64) -> Result<Complex64>
    where
        G: Fn(Complex64) -> Result<Complex64>,
    {
        if !(t > 0.0) {
            return Err(Error::Domain(format!("inversion point t = {t} must be positive")));
        }
        let second = self.terms + self.averaging / 2 + 1;
        let count = second + self.averaging + 1;
        let mut values = Vec::with_capacity(count);
        for k in 0..count {
            let s = Complex64::new(self.a, 2.0 * std::f64::consts::PI * k as f64) / (2.0 * t);
            let mut v = term(s)?;
            if k == 0 {
                v *= 0.5;
            }
            if k % 2 == 1 {
                v = -v;
            }
            values.push(v);
        }
        let scale = (0.5 * self.a).exp() / t;
        let first = self.estimate(&values, self.terms) * scale;
        let second = self.estimate(&values, second) * scale;
        if !(first.norm().is_finite()) || (first - second).norm() > self.tol * first.norm().max(self.floor) {
            return Err(Error::Inversion { t, first: first.re, second: second.re });
        }
        Ok(first)
    }

    /// f(t) from its transform F, for real f and t > 0.
    pub fn invert<F>(&self, f: F, t: f64) -> Result<f64>
    where
        F: Fn(Complex64) -> Result<Complex64>,
    {
        Ok(self.run(|s| Ok(Complex64::new(f(s)?.re, 0.0)), t)?.re)
    }

    /// The same for a complex-valued original; needs F at conjugate points too.
    pub fn invert_complex<F>(&self, f: F, t: f64) -> Result<Complex64>
    where
        F: Fn(Complex64) -> Result<Complex64>,
    {
        self.run(|s| Ok((f(s)? + f(s.conj())?) * 0.5), t)
    }
}

/// P_x(tau^theta > t), from the q-transform of the alpha = 0 resolvent.
pub fn survival_probability(model: &LevyModel, x: f64, theta: f64, t: f64, inv: &EulerInversion) -> Result<f64> {
    inv.invert(|q| Ok(parisian_split(model, x, Complex64::new(0.0, 0.0), q, theta)?.total() / q), t)
}

/// E_x[e^{-alpha X_t}; tau^theta > t].
pub fn survival_moment(model: &LevyModel, x: f64, alpha: f64, theta: f64, t: f64, inv: &EulerInversion) -> Result<f64> {
    inv.invert(|q| Ok(parisian_split(model, x, Complex64::new(alpha, 0.0), q, theta)?.total() / q), t)
}

/// Density of X_t on {tau^theta > t} at y, by inverting in alpha and then in q.
pub fn survival_density(model: &LevyModel, x: f64, theta: f64, t: f64, y: f64, inv: &EulerInversion) -> Result<f64> {
    let inner = EulerInversion { tol: 1e-4, ..*inv };
    inv.invert(
        |q| {
            if y > 0.0 {
                inner.invert_complex(|a| Ok(parisian_split(model, x, a, q, theta)?.positive / q), y)
            } else {
                let u = (-y).max(1e-12);
                inner.invert_complex(|a| Ok(parisian_split(model, x, -a, q, theta)?.negative / q), u)
            }
        },
        t,
    )
}
