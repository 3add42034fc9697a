//! Parisian quasi-stationary laws.
//!
//! Near the branch point the Parisian resolvent behaves like
//! `C(alpha, x) + H(alpha, x) (q - xi*)^{1/2}`, and the quasi-stationary law
//! has transform `H(alpha, x)/H(0, x)`. `H` is `k*` times the derivative of
//! the resolvent in `b = Phi(q)` with `b` and the conjugate root merged at
//! `q*`. Its part on `(-inf, 0)` is a single exponential with rate
//! [`QsdTransform::alpha_max`].

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::inversion::EulerInversion;
use crate::model::{ExpansionPoint, LevyModel, Orientation, Variation};
use crate::numeric::{s, Scalar};
use crate::resolvent::{classic_continued, convergence_abscissa, parisian_split, Split};
use crate::scale::ScaleContext;

/// -2 sqrt(pi).
pub const GAMMA_MINUS_HALF: f64 = -3.544_907_701_811_032;

/// `H(alpha, x)` split by the sign of the limiting position.
pub fn h_parts<T: Scalar>(model: &LevyModel, alpha: T, x: f64, theta: f64) -> Result<Split<T>> {
    let ep = model.expansion_point()?;
    let e = model.exponent();
    let outer = e.roots(ep.xi_star + theta)?;
    let (rp, rm) = (s::<T>(outer.plus), s::<T>(outer.minus));
    let q: T = s(ep.xi_star);
    let th: T = s(theta);
    let a: T = s(e.leading());
    let b0: T = s(ep.q_star);
    let k: T = s(ep.k_star);
    let xs: T = s(x);
    match model.orientation() {
        Orientation::SpectrallyPositive => {
            let decay = (-b0 * xs).exp();
            let dc = -q * xs * decay * e.den(alpha) / (a * (alpha - b0) * (alpha - b0));
            let r0p = q * e.den(b0) / (a * (alpha - b0) * (rp - b0));
            let dr0p = -q * (alpha - rm) / (th * (alpha - b0) * (alpha - b0));
            let r0n = q * (rp - b0) / (th * (rp - alpha));
            let dr0n = -q / (th * (rp - alpha));
            Ok(Split { positive: k * (dc - xs * decay * r0p + decay * dr0p), negative: k * decay * (-xs * r0n + dr0n) })
        }
        Orientation::SpectrallyNegative => {
            let ctx = ScaleContext::<T>::from_exponent(e, q)?;
            let w = ctx.w(x);
            let den_r = e.den(rp);
            let d_theta = (b0 * xs).exp() * e.den(b0) / den_r;
            let dc = -q * w / ((b0 + alpha) * (b0 + alpha));
            let r0p = q * (rp - b0) / (th * (b0 + alpha));
            let dr0p = -q * (rp + alpha) / (th * (b0 + alpha) * (b0 + alpha));
            let dd = -a * w / den_r;
            Ok(Split {
                positive: k * (dc + dr0p * d_theta + r0p * dd),
                negative: k * q / (th * (alpha + rm)) * (d_theta + a * (rp - b0) * w / den_r),
            })
        }
    }
}

fn check_side(model: &LevyModel, side: Orientation) -> Result<()> {
    if model.orientation() != side {
        return Err(Error::Domain(format!("operation needs a {} model, got {}", side.label(), model.id())));
    }
    Ok(())
}

pub fn h_p(model: &LevyModel, alpha: f64, x: f64, theta: f64) -> Result<f64> {
    check_side(model, Orientation::SpectrallyPositive)?;
    Ok(h_parts(model, alpha, x, theta)?.total())
}

pub fn h_n(model: &LevyModel, alpha: f64, x: f64, theta: f64) -> Result<f64> {
    check_side(model, Orientation::SpectrallyNegative)?;
    Ok(h_parts(model, alpha, x, theta)?.total())
}

/// Normalised transform `alpha -> H(alpha, x)/H(0, x)` of the Parisian
/// quasi-stationary law started from `x`.
#[derive(Clone, Debug)]
pub struct QsdTransform {
    pub model: LevyModel,
    pub x: f64,
    pub theta: f64,
    pub h_zero: f64,
    /// Rate of the exponential part on (-inf, 0); the transform is finite below it.
    pub alpha_max: f64,
    pub orientation: Orientation,
    pub variation: Variation,
}

impl QsdTransform {
    pub fn h_at<T: Scalar>(&self, alpha: T) -> Result<T> {
        Ok(h_parts(&self.model, alpha, self.x, self.theta)?.total())
    }

    pub fn parts<T: Scalar>(&self, alpha: T) -> Result<Split<T>> {
        let h = h_parts(&self.model, alpha, self.x, self.theta)?;
        let n: T = s(self.h_zero);
        Ok(Split { positive: h.positive / n, negative: h.negative / n })
    }

    pub fn normalized<T: Scalar>(&self, alpha: T) -> Result<T> {
        Ok(self.h_at(alpha)? / s(self.h_zero))
    }

    /// Mass of the limit law on (-inf, 0).
    pub fn negative_mass(&self) -> Result<f64> {
        Ok(self.parts(0.0)?.negative)
    }
}

pub fn qsd_transform(model: &LevyModel, x: f64, theta: f64) -> Result<QsdTransform> {
    if !(x >= 0.0) || !x.is_finite() {
        return Err(Error::Domain(format!("start level x = {x} must be finite and >= 0")));
    }
    let ep = model.expansion_point()?;
    if !(theta > -ep.xi_star) || !theta.is_finite() {
        return Err(Error::Domain(format!(
            "theta = {theta} must exceed |xi*| = {} for the quasi-stationary law to exist",
            -ep.xi_star
        )));
    }
    let outer = model.exponent().roots(ep.xi_star + theta)?;
    let alpha_max = match model.orientation() {
        Orientation::SpectrallyPositive => outer.plus,
        Orientation::SpectrallyNegative => -outer.minus,
    };
    let h_zero = h_parts(model, 0.0, x, theta)?.total();
    if !(h_zero.abs() > 1e-12) {
        return Err(Error::DegenerateNormalization(h_zero));
    }
    Ok(QsdTransform {
        model: *model,
        x,
        theta,
        h_zero,
        alpha_max,
        orientation: model.orientation(),
        variation: model.variation(),
    })
}

/// Transform of the classical (tau_0^-) quasi-stationary law.
pub fn classical_qsd_transform(model: &LevyModel, alpha: f64) -> Result<f64> {
    let ep = model.expansion_point()?;
    Ok(match model.orientation() {
        Orientation::SpectrallyNegative => {
            let r = ep.big_q_star / (ep.big_q_star + alpha);
            r * r
        }
        Orientation::SpectrallyPositive => ep.xi_star / (ep.xi_star - model.neg_exponent(alpha)),
    })
}

/// Gamma(2, Q*) density of the classical spectrally negative law.
pub fn classical_qsd_density_sn(model: &LevyModel, y: f64) -> Result<f64> {
    check_side(model, Orientation::SpectrallyNegative)?;
    if y < 0.0 {
        return Ok(0.0);
    }
    let r = model.expansion_point()?.big_q_star;
    Ok(r * r * y * (-r * y).exp())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FitTarget {
    Parisian,
    Classical,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ExpansionFit {
    pub c_const: f64,
    pub h_coef: f64,
    /// Coefficient of the linear correction term.
    pub linear: f64,
    /// Residual of the three-term fit `a + b sqrt(d) + c d`.
    pub residual: f64,
}

pub const FIT_OFFSETS: [f64; 4] = [1e-4, 1e-5, 1e-6, 1e-7];

/// Largest accepted three-term residual relative to the fitted constant.
/// Beyond it the fitted coefficient is typically off by more than 1e-3,
/// as happens when alpha sits close to the pole at `alpha_max`.
pub const FIT_RESIDUAL_LIMIT: f64 = 5e-6;

/// Largest accepted ratio of the pole's movement over the offsets to the
/// distance from alpha to the pole.
pub const POLE_MARGIN: f64 = 0.01;

/// Least-squares polynomial fit in `u = sqrt(d / d_max)`; returns coefficients of `u^k`.
fn fit_powers(us: &[f64], rhs: &DVector<f64>, terms: usize) -> Result<(DVector<f64>, f64)> {
    let design = DMatrix::<f64>::from_fn(us.len(), terms, |i, k| us[i].powi(k as i32));
    let coef = design
        .clone()
        .svd(true, true)
        .solve(rhs, 1e-14)
        .map_err(|e| Error::Singularity(format!("expansion fit: {e}")))?;
    let residual = (&design * &coef - rhs).norm();
    Ok((coef, residual))
}

/// Fit of the resolvent at `q = xi* + d` by `a + b sqrt(d) + c d + e d^{3/2}`.
///
/// The `d^{3/2}` column keeps the fit accurate when `|xi*|` is small and the
/// offsets are no longer small on the model's own scale. The conditioning
/// check uses the residual of the three-term fit.
pub fn expansion_fit(model: &LevyModel, x: f64, alpha: f64, theta: f64, target: FitTarget) -> Result<ExpansionFit> {
    let ep: ExpansionPoint = model.expansion_point()?;
    let d_max = FIT_OFFSETS[0];
    // the fit error grows like (shift / distance)^2 once the offsets move the pole
    if let (FitTarget::Parisian, Ok(p0), Ok(p1)) =
        (target, convergence_abscissa(model, ep.xi_star, theta), convergence_abscissa(model, ep.xi_star + d_max, theta))
    {
        let shift = (p1 - p0).abs();
        if shift > POLE_MARGIN * (alpha - p0).abs() {
            return Err(Error::FitNearPole { alpha, pole: p0, shift });
        }
    }
    let mut rhs = DVector::<f64>::zeros(FIT_OFFSETS.len());
    let mut us = Vec::with_capacity(FIT_OFFSETS.len());
    for (i, &d) in FIT_OFFSETS.iter().enumerate() {
        let q = ep.xi_star + d;
        rhs[i] = match target {
            FitTarget::Parisian => parisian_split(model, x, alpha, q, theta)?.total(),
            FitTarget::Classical => classic_continued(model, x, alpha, q)?,
        };
        us.push((d / d_max).sqrt());
    }
    let (_, residual) = fit_powers(&us, &rhs, 3)?;
    let (coef, _) = fit_powers(&us, &rhs, 4)?;
    let fit = ExpansionFit { c_const: coef[0], h_coef: coef[1] / d_max.sqrt(), linear: coef[2] / d_max, residual };
    if !(residual <= FIT_RESIDUAL_LIMIT * fit.c_const.abs()) {
        return Err(Error::IllConditionedFit { residual, constant: fit.c_const });
    }
    Ok(fit)
}

/// Two-sided density of the Parisian quasi-stationary law on `y_grid`.
///
/// Positive `y` inverts the `[0, inf)` part of the transform; negative `y`
/// inverts the `(-inf, 0)` part reflected. At `y = 0` the average of the
/// two one-sided limits is returned.
pub fn qsd_density(transform: &QsdTransform, y_grid: &[f64], inv: &EulerInversion) -> Result<Vec<(f64, f64)>> {
    y_grid
        .iter()
        .map(|&y| {
            let v = if y > 0.0 {
                inv.invert(|a| Ok(transform.parts(a)?.positive), y)?
            } else if y < 0.0 {
                inv.invert(|a| Ok(transform.parts(-a)?.negative), -y)?
            } else {
                // midpoint of the one-sided limits s L(s), as inversion gives at a jump
                let big = Complex64::new(1e7, 0.0);
                let right = (big * transform.parts(big)?.positive).re;
                let left = (big * transform.parts(-big)?.negative).re;
                0.5 * (left + right)
            };
            Ok((y, v))
        })
        .collect()
}

/// Leading-order `E_x[e^{-alpha X_t}; tau^theta > t]` for large `t`.
pub fn survival_asymptote(model: &LevyModel, x: f64, theta: f64, t: f64, alpha: f64) -> Result<f64> {
    if !(t > 0.0) {
        return Err(Error::Domain(format!("t = {t} must be positive")));
    }
    let ep = model.expansion_point()?;
    let h = h_parts(model, alpha, x, theta)?.total();
    Ok(h / ep.xi_star / GAMMA_MINUS_HALF * t.powf(-1.5) * (ep.xi_star * t).exp())
}

/// Literal transcriptions of the published `H` formulas, for comparison only.
pub mod printed {
    use super::*;

    pub fn h_p(model: &LevyModel, alpha: f64, x: f64, theta: f64) -> Result<f64> {
        let ep = model.expansion_point()?;
        let e = model.exponent();
        let xi = ep.xi_star;
        let k = ep.k_star;
        let br = model.phi_inverse(xi + theta)?;
        let pa = model.neg_exponent(alpha);
        let exi = (-xi * x).exp();
        let ea = (-alpha * x).exp();
        Ok(match model.variation() {
            Variation::Bounded => {
                let inner = (br - xi)
                    * xi
                    * (xi - alpha)
                    * (k * theta / ((br - xi) * (br - xi))
                        - k * xi * (xi - pa) / ((xi - alpha) * (xi - alpha) * (xi + theta)))
                    - k * (theta / (br - xi) + xi * (xi - pa) / ((xi - alpha) * (xi + theta))
                        - (xi - pa + theta) / (br - alpha))
                        * (-2.0 * xi * alpha + br * (xi + alpha) + (br - xi) * xi * x * (xi - alpha));
                xi / (xi - alpha).powi(3)
                    * (-2.0 * xi * k * (-exi + ea)
                        + k * (xi - alpha) * (-exi + ea + exi * xi * x)
                        + exi / theta * inner)
            }
            Variation::Unbounded => {
                let w0 = e.w_prime_zero(0.0);
                let wq = e.w_prime_zero(ep.q_star);
                let wr = e.w_prime_zero(ep.q_star + theta);
                let pa_over_alpha = if alpha == 0.0 { e.psi_prime(0.0) } else { pa / alpha };
                let d = br * w0 * xi - w0 * xi * xi + wr * theta * (xi + theta);
                let t1 = -2.0 * (-exi + ea) * xi * (xi - alpha);
                let t2 = -(exi * xi * (-br + xi) * (w0 * (xi - alpha).powi(2) + wq * xi * (xi - pa)))
                    / (-br * w0 * xi + w0 * xi * xi - wr * theta * (xi + theta));
                // the printed `-e^{-xi*}` is read as `-e^{-xi* x}`
                let t3 = (xi - alpha).powi(2) * (-exi + ea + exi * xi * x);
                let bracket = wq * xi * (xi - pa) / ((xi - alpha) * (xi + theta))
                    + w0 * xi * (1.0 - pa_over_alpha) / (xi + theta)
                    - wr * (xi - pa + theta) / (br - alpha);
                let tail = 2.0 * br * br * w0 * xi * alpha
                    + 2.0 * xi * alpha * (w0 * xi * xi - wr * theta * (xi + theta))
                    + br * (-4.0 * w0 * xi * xi * alpha + wr * (xi + alpha) * theta * (xi + theta))
                    + (br - xi) * xi * x * (xi - alpha) * d;
                let t4 = -exi * (xi - alpha) * (xi + theta) / (d * d) * bracket * tail;
                k * xi / (xi - alpha).powi(4) * (t1 + t2 + t3 + t4)
            }
        })
    }

    pub fn h_n(model: &LevyModel, alpha: f64, x: f64, theta: f64) -> Result<f64> {
        let ep = model.expansion_point()?;
        let e = model.exponent();
        let xi = ep.xi_star;
        let k = ep.k_star;
        let ctx = ScaleContext::new(model, ep.q_star)?;
        let g1 = ctx.g1(alpha, x);
        let g2 = ctx.g2(alpha, x);
        let w = ctx.w(x);
        let phi_r = model.phi_inverse(ep.q_star + theta)?;
        let zr = ctx.exp_z_beta(phi_r, x)?;
        let br = model.phi_inverse(xi + theta)?;
        let pa = e.psi(alpha);
        let exi = (xi * x).exp();
        Ok(match model.variation() {
            Variation::Bounded => {
                let inner = -g2 * xi.powi(3) * alpha + xi * w * alpha * alpha + g2 * xi * alpha.powi(3)
                    - exi * xi * xi * x * (xi + alpha).powi(2)
                    - xi * xi * w * pa
                    - xi * xi * w * theta
                    - g2 * xi * xi * alpha * theta
                    + w * alpha * alpha * theta
                    + g2 * alpha.powi(3) * theta
                    + g1 * (xi * xi - alpha * alpha) * (xi + theta);
                k * xi / ((xi - alpha) * (xi + alpha).powi(3) * theta * (xi + theta))
                    * (-theta * inner
                        + zr * (br + alpha) * (xi * alpha * alpha + alpha * alpha * theta - xi * xi * (pa + theta)))
            }
            Variation::Unbounded => {
                let wq = ctx.w_prime_zero();
                let d = -br * br + br * xi + wq * theta;
                k * xi
                    * (-g1 / (xi + alpha).powi(2)
                        + g2 * alpha / (xi + alpha).powi(2)
                        + xi * xi * w * (-xi + pa) / ((xi - alpha) * (xi + alpha).powi(3) * (xi + theta))
                        - wq * (zr * (-br + xi) + w * theta) / ((xi + alpha).powi(2) * d)
                        + zr * wq / ((xi - alpha) * (xi + alpha).powi(2) * (xi + theta) * d * d)
                        - br * w
                            * theta
                            * (xi * xi * (xi + alpha).powi(2)
                                + wq * (2.0 * xi.powi(3) - xi * alpha * alpha - alpha * alpha * theta
                                    + xi * xi * (-pa + theta)))
                            / ((xi - alpha) * (xi + alpha).powi(2) * (xi + theta) * d * d)
                        + exi * xi * xi * x / ((xi * xi - alpha * alpha) * (xi + theta)))
            }
        })
    }
}
