//! Catalog of spectrally one-sided Lévy models and their Laplace exponents.
//!
//! All evaluation happens on the spectrally negative representative: the
//! model itself when it is spectrally negative, its dual `-X` otherwise. The
//! representative exponent is written `psi` throughout the crate.

use crate::error::{Error, Result};
use crate::numeric::{s, safeguarded_newton, Scalar};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Orientation {
    SpectrallyNegative,
    SpectrallyPositive,
}

impl Orientation {
    pub fn label(self) -> &'static str {
        match self {
            Orientation::SpectrallyNegative => "spectrally-negative",
            Orientation::SpectrallyPositive => "spectrally-positive",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Variation {
    Bounded,
    Unbounded,
}

impl Variation {
    pub fn label(self) -> &'static str {
        match self {
            Variation::Bounded => "bounded-variation",
            Variation::Unbounded => "unbounded-variation",
        }
    }
}

/// Path law of the supported families.
///
/// `Brownian` is `X_t = sigma B_t - c t` in both orientations. `CompoundPoisson`
/// is `X_t = c t - sum J_i` when spectrally negative (Cramér–Lundberg) and
/// `X_t = sum J_i - c t` when spectrally positive (M/M/1 input), with
/// `J_i ~ Exp(nu)` arriving at rate `lambda`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Family {
    Brownian { sigma: f64, c: f64 },
    CompoundPoisson { c: f64, lambda: f64, nu: f64 },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Assumptions {
    pub a1: bool,
    pub a2: bool,
    pub a3: bool,
    pub a4: bool,
    pub a5: bool,
}

/// psi(beta) = drift beta + half_variance beta^2 - lambda beta / (nu + beta).
///
/// The catalog never mixes the Gaussian and jump parts, so `(psi(beta) - q)`
/// times the linear denominator `den(beta)` is a quadratic in beta.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Exponent {
    pub drift: f64,
    pub half_variance: f64,
    pub lambda: f64,
    pub nu: f64,
}

impl Exponent {
    fn has_jumps(&self) -> bool {
        self.lambda > 0.0
    }

    pub fn psi<T: Scalar>(&self, beta: T) -> T {
        let mut v = beta * s(self.drift) + beta * beta * s(self.half_variance);
        if self.has_jumps() {
            v = v - beta * s(self.lambda) / (beta + s(self.nu));
        }
        v
    }

    pub fn psi_prime<T: Scalar>(&self, beta: T) -> T {
        let mut v = s::<T>(self.drift) + beta * s(2.0 * self.half_variance);
        if self.has_jumps() {
            let d = beta + s(self.nu);
            v = v - s::<T>(self.lambda * self.nu) / (d * d);
        }
        v
    }

    pub fn psi_second<T: Scalar>(&self, beta: T) -> T {
        let mut v = s::<T>(2.0 * self.half_variance);
        if self.has_jumps() {
            let d = beta + s(self.nu);
            v = v + s::<T>(2.0 * self.lambda * self.nu) / (d * d * d);
        }
        v
    }

    /// Infimum of the domain of psi (the jump MGF pole).
    pub fn lower_bound(&self) -> f64 {
        if self.has_jumps() {
            -self.nu
        } else {
            f64::NEG_INFINITY
        }
    }

    /// Leading coefficient `A` of `(psi(beta) - q) den(beta)`.
    pub fn leading(&self) -> f64 {
        if self.has_jumps() {
            self.drift
        } else {
            self.half_variance
        }
    }

    /// Coefficients `(d0, d1)` of `den(beta) = d0 + d1 beta`.
    pub fn den_coeffs(&self) -> (f64, f64) {
        if self.has_jumps() {
            (self.nu, 1.0)
        } else {
            (1.0, 0.0)
        }
    }

    pub fn den<T: Scalar>(&self, beta: T) -> T {
        let (d0, d1) = self.den_coeffs();
        s::<T>(d0) + beta * s(d1)
    }

    /// `(A, B, C)` with `(psi(beta) - q) den(beta) = A beta^2 + B beta + C`.
    pub fn quadratic<T: Scalar>(&self, q: T) -> (f64, T, T) {
        if self.has_jumps() {
            let b = s::<T>(self.drift * self.nu - self.lambda) - q;
            (self.drift, b, -q * s(self.nu))
        } else {
            (self.half_variance, s(self.drift), -q)
        }
    }

    /// W^(q)'(0+) without solving for the roots; polynomial in q.
    pub fn w_prime_zero<T: Scalar>(&self, q: T) -> T {
        let (a, b, _) = self.quadratic(q);
        let (d0, d1) = self.den_coeffs();
        // (d0 + d1 (beta_+ + beta_-)) / A with beta_+ + beta_- = -B / A
        (s::<T>(d0) - b * s(d1 / a)) / s(a)
    }

    /// Both roots of `psi(beta) = q`; `plus` has the larger real part.
    pub fn roots<T: Scalar>(&self, q: T) -> Result<RootPair<T>> {
        let (a, b, c) = self.quadratic(q);
        let four_ac = c * s(4.0 * a);
        let mut disc = b * b - four_ac;
        if disc.im() == 0.0 && disc.re() < 0.0 {
            let scale = (b * b).abs() + four_ac.abs();
            if disc.re() > -1e-12 * scale {
                disc = T::zero();
            } else {
                let xi = self.minimum().map(|m| m.1).unwrap_or(f64::NAN);
                return Err(Error::Branch { q: q.re(), xi_star: xi });
            }
        }
        let sq = disc.sqrt();
        let half: T = s(0.5);
        let (plus, minus) = if b.re() >= 0.0 {
            let t = -(b + sq) * half;
            let minus = t / s(a);
            let plus = if t == T::zero() { minus } else { c / t };
            (plus, minus)
        } else {
            let t = (sq - b) * half;
            let plus = t / s(a);
            let minus = if t == T::zero() { plus } else { c / t };
            (plus, minus)
        };
        Ok(RootPair { plus, minus })
    }

    /// Minimiser of psi and the minimum value.
    pub fn minimum(&self) -> Result<(f64, f64)> {
        let lb = self.lower_bound();
        let down = |k: i32| {
            if lb.is_finite() {
                lb + (1.0 - lb) * 0.5f64.powi(k)
            } else {
                1.0 - 2f64.powi(k)
            }
        };
        let d1 = |b: f64| self.psi_prime(b);
        let (mut lo, mut hi) = (1.0, 1.0);
        if d1(1.0) > 0.0 {
            let mut k = 1;
            while d1(lo) >= 0.0 {
                lo = down(k);
                k += 1;
                if k > 1100 {
                    return Err(Error::Assumption("Laplace exponent has no interior minimum".into()));
                }
            }
        } else {
            let mut k = 0;
            while d1(hi) <= 0.0 {
                hi = 1.0 + 2f64.powi(k);
                k += 1;
                if k > 1000 {
                    return Err(Error::Assumption("Laplace exponent has no interior minimum".into()));
                }
            }
        }
        let m = safeguarded_newton(|b| (d1(b), self.psi_second(b)), lo, hi, 1.0, 1e-15);
        Ok((m, self.psi(m)))
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RootPair<T> {
    pub plus: T,
    pub minus: T,
}

/// The critical point governing every large-time asymptotic.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ExpansionPoint {
    /// Signed minimiser: negative for spectrally positive models (hat convention).
    pub q_star: f64,
    pub xi_star: f64,
    pub k_star: f64,
    /// Upper end of the domain of the process exponent `log E e^{beta X_1}`.
    pub theta_r: f64,
    /// Minimiser of the process exponent on (0, theta_r].
    pub big_q_star: f64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LevyModel {
    orientation: Orientation,
    family: Family,
}

impl LevyModel {
    pub fn new(orientation: Orientation, family: Family) -> Result<Self> {
        let model = LevyModel { orientation, family };
        match family {
            Family::Brownian { sigma, c } => {
                if !(sigma > 0.0 && sigma.is_finite()) {
                    return Err(Error::Config(format!("sigma must be positive, got {sigma}")));
                }
                if !(c > 0.0 && c.is_finite()) {
                    return Err(Error::Assumption(format!("drift must push X to -infinity: need c > 0, got {c}")));
                }
            }
            Family::CompoundPoisson { c, lambda, nu } => {
                for (name, v) in [("c", c), ("lambda", lambda), ("nu", nu)] {
                    if !(v > 0.0 && v.is_finite()) {
                        return Err(Error::Config(format!("{name} must be positive, got {v}")));
                    }
                }
                let mean = match orientation {
                    Orientation::SpectrallyNegative => c - lambda / nu,
                    Orientation::SpectrallyPositive => lambda / nu - c,
                };
                if mean >= 0.0 {
                    return Err(Error::Assumption(format!("long-run drift E X_1 = {mean} must be negative")));
                }
            }
        }
        Ok(model)
    }

    pub fn brownian(orientation: Orientation, sigma: f64, c: f64) -> Result<Self> {
        Self::new(orientation, Family::Brownian { sigma, c })
    }

    pub fn compound_poisson(orientation: Orientation, c: f64, lambda: f64, nu: f64) -> Result<Self> {
        Self::new(orientation, Family::CompoundPoisson { c, lambda, nu })
    }

    /// Cramér–Lundberg surplus `c t - sum J_i`.
    pub fn cramer_lundberg(c: f64, lambda: f64, nu: f64) -> Result<Self> {
        Self::compound_poisson(Orientation::SpectrallyNegative, c, lambda, nu)
    }

    /// M/M/1 workload input `sum J_i - t`.
    pub fn mm1_input(lambda: f64, nu: f64) -> Result<Self> {
        Self::compound_poisson(Orientation::SpectrallyPositive, 1.0, lambda, nu)
    }

    pub fn orientation(&self) -> Orientation {
        self.orientation
    }

    pub fn family(&self) -> Family {
        self.family
    }

    pub fn variation(&self) -> Variation {
        match self.family {
            Family::Brownian { .. } => Variation::Unbounded,
            Family::CompoundPoisson { .. } => Variation::Bounded,
        }
    }

    pub fn gaussian_coefficient(&self) -> f64 {
        match self.family {
            Family::Brownian { sigma, .. } => sigma,
            Family::CompoundPoisson { .. } => 0.0,
        }
    }

    /// (A1)-(A5) hold for every catalog model; the constructor rejects the rest.
    pub fn assumptions(&self) -> Assumptions {
        Assumptions { a1: true, a2: true, a3: true, a4: true, a5: true }
    }

    pub fn is_spectrally_negative(&self) -> bool {
        self.orientation == Orientation::SpectrallyNegative
    }

    /// Exponent of the spectrally negative representative.
    pub fn exponent(&self) -> Exponent {
        match (self.family, self.orientation) {
            (Family::Brownian { sigma, c }, o) => Exponent {
                drift: if o == Orientation::SpectrallyNegative { -c } else { c },
                half_variance: 0.5 * sigma * sigma,
                lambda: 0.0,
                nu: 0.0,
            },
            (Family::CompoundPoisson { c, lambda, nu }, _) => Exponent { drift: c, half_variance: 0.0, lambda, nu },
        }
    }

    /// phi(beta) for spectrally negative models, the dual phihat(beta) = phi(-beta) otherwise.
    pub fn laplace_exponent(&self, beta: f64) -> Result<f64> {
        let e = self.exponent();
        if !(beta > e.lower_bound()) || !beta.is_finite() {
            return Err(Error::Domain(format!("exponent argument {beta} outside ({}, inf)", e.lower_bound())));
        }
        Ok(e.psi(beta))
    }

    pub fn laplace_exponent_derivative(&self, beta: f64) -> Result<f64> {
        self.laplace_exponent(beta)?;
        Ok(self.exponent().psi_prime(beta))
    }

    pub fn laplace_exponent_second(&self, beta: f64) -> Result<f64> {
        self.laplace_exponent(beta)?;
        Ok(self.exponent().psi_second(beta))
    }

    /// `log E e^{-alpha X_1}` of the process itself.
    pub fn neg_exponent<T: Scalar>(&self, alpha: T) -> T {
        let e = self.exponent();
        match self.orientation {
            Orientation::SpectrallyNegative => e.psi(-alpha),
            Orientation::SpectrallyPositive => e.psi(alpha),
        }
    }

    /// Largest root of psi(beta) = q by bracketed Newton right of the minimiser.
    pub fn phi_inverse(&self, q: f64) -> Result<f64> {
        let e = self.exponent();
        let (m, xi) = e.minimum()?;
        if !q.is_finite() {
            return Err(Error::Domain(format!("q = {q}")));
        }
        if q < xi - 1e-12 * xi.abs().max(1.0) {
            return Err(Error::Branch { q, xi_star: xi });
        }
        if q <= xi {
            return Ok(m);
        }
        let f = |b: f64| (e.psi(b) - q, e.psi_prime(b));
        let mut width = 1.0;
        let mut hi = m + width;
        while f(hi).0 <= 0.0 {
            width *= 2.0;
            hi = m + width;
        }
        Ok(safeguarded_newton(f, m, hi, hi, 1e-12))
    }

    pub fn expansion_point(&self) -> Result<ExpansionPoint> {
        let e = self.exponent();
        let (m, xi) = e.minimum()?;
        if !(xi < 0.0) {
            return Err(Error::Assumption(format!("infimum of the exponent is {xi}, not negative")));
        }
        let k_star = (2.0 / e.psi_second(m)).sqrt();
        let theta_r = match (self.orientation, self.family) {
            (Orientation::SpectrallyPositive, Family::CompoundPoisson { nu, .. }) => nu,
            _ => f64::INFINITY,
        };
        Ok(ExpansionPoint { q_star: m, xi_star: xi, k_star, theta_r, big_q_star: m.abs() })
    }

    /// (kappa(alpha, beta), kappahat(alpha, beta)) of the Wiener–Hopf factorisation.
    pub fn wiener_hopf_kappa(&self, alpha: f64, beta: f64) -> Result<(f64, f64)> {
        let phi = self.phi_inverse(alpha)?;
        let e = self.exponent();
        let kappa = phi + beta;
        let hat = if (phi - beta).abs() < 1e-8 * phi.abs().max(1.0) {
            e.psi_prime(phi)
        } else {
            (alpha - self.laplace_exponent(beta)?) / (phi - beta)
        };
        Ok((kappa, hat))
    }

    /// Laplace transform of the descending ladder renewal measure, 1/kappahat(0, alpha).
    pub fn renewal_transform(&self, alpha: f64) -> Result<f64> {
        let phi0 = self.phi_inverse(0.0)?;
        Ok((alpha - phi0) / self.laplace_exponent(alpha)?)
    }

    pub fn root_pair<T: Scalar>(&self, q: T) -> Result<RootPair<T>> {
        self.exponent().roots(q)
    }

    /// Short human-readable identifier used in CSV artifacts.
    pub fn id(&self) -> String {
        let side = match self.orientation {
            Orientation::SpectrallyNegative => "sn",
            Orientation::SpectrallyPositive => "sp",
        };
        match self.family {
            Family::Brownian { sigma, c } => format!("bm-{side}(sigma={sigma},c={c})"),
            Family::CompoundPoisson { c, lambda, nu } => {
                format!("cp-{side}(c={c},lambda={lambda},nu={nu})")
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bm(sigma: f64) -> LevyModel {
        LevyModel::brownian(Orientation::SpectrallyNegative, sigma, 1.0).unwrap()
    }

    #[test]
    fn brownian_exponent_values() {
        let m = bm(1.0);
        assert_eq!(m.laplace_exponent(2.0).unwrap(), 0.0);
        assert_eq!(m.laplace_exponent(0.0).unwrap(), 0.0);
    }

    #[test]
    fn mm1_dual_exponent_value() {
        let m = LevyModel::mm1_input(1.0, 4.0).unwrap();
        assert!((m.laplace_exponent(1.0).unwrap() - 0.8).abs() < 1e-15);
    }

    #[test]
    fn drift_condition_is_enforced() {
        assert!(LevyModel::mm1_input(5.0, 4.0).is_err());
        assert!(LevyModel::cramer_lundberg(1.0, 1.0, 2.0).is_err());
        assert!(LevyModel::brownian(Orientation::SpectrallyPositive, 1.0, -1.0).is_err());
        assert!(LevyModel::brownian(Orientation::SpectrallyNegative, 0.0, 1.0).is_err());
    }

    #[test]
    fn phi_inverse_examples() {
        assert!((bm(1.0).phi_inverse(0.0).unwrap() - 2.0).abs() < 1e-12);
        let mm1 = LevyModel::mm1_input(1.0, 4.0).unwrap();
        let expected = (-2.0 + 20f64.sqrt()) / 2.0;
        assert!((mm1.phi_inverse(1.0).unwrap() - expected).abs() < 1e-12);
    }

    #[test]
    fn phi_inverse_rejects_below_branch_point() {
        match bm(1.0).phi_inverse(-0.6) {
            Err(Error::Branch { xi_star, .. }) => assert!((xi_star + 0.5).abs() < 1e-12),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn expansion_point_examples() {
        let ep = bm(1.0).expansion_point().unwrap();
        assert!((ep.q_star - 1.0).abs() < 1e-12);
        assert!((ep.xi_star + 0.5).abs() < 1e-12);
        assert!((ep.k_star - 2f64.sqrt()).abs() < 1e-12);
        let ep = LevyModel::mm1_input(1.0, 4.0).unwrap().expansion_point().unwrap();
        assert!((ep.q_star + 2.0).abs() < 1e-12);
        assert!((ep.xi_star + 1.0).abs() < 1e-12);
        assert!((ep.big_q_star - 2.0).abs() < 1e-12);
        assert_eq!(ep.theta_r, 4.0);
        let ep = LevyModel::cramer_lundberg(1.0, 3.0, 2.0).unwrap().expansion_point().unwrap();
        assert!((ep.q_star - (6f64.sqrt() - 2.0)).abs() < 1e-12);
        assert!((ep.xi_star + 0.101_020_514_433_644).abs() < 1e-12);
        assert!((ep.k_star - 6f64.powf(0.25)).abs() < 1e-10);
    }

    #[test]
    fn kappa_examples() {
        let m = bm(1.0);
        let (k, _) = m.wiener_hopf_kappa(0.0, 3.0).unwrap();
        assert!((k - 5.0).abs() < 1e-12);
        let (_, khat) = m.wiener_hopf_kappa(0.0, 1.0).unwrap();
        assert!((khat - 0.5).abs() < 1e-12);
        let (k, _) = m.wiener_hopf_kappa(0.7, 0.0).unwrap();
        assert!((k - m.phi_inverse(0.7).unwrap()).abs() < 1e-15);
        // removable point beta = Phi(alpha): limit psi'(Phi(alpha))
        let (_, khat) = m.wiener_hopf_kappa(0.0, 2.0).unwrap();
        assert!((khat - 1.0).abs() < 1e-12);
    }

    #[test]
    fn closed_form_roots_agree_with_newton() {
        for model in [
            bm(1.0),
            bm(2.0),
            LevyModel::mm1_input(1.0, 4.0).unwrap(),
            LevyModel::cramer_lundberg(1.0, 3.0, 2.0).unwrap(),
        ] {
            for &q in &[0.0, 0.3, 1.0, 7.5] {
                let r = model.root_pair(q).unwrap();
                let newton = model.phi_inverse(q).unwrap();
                assert!((r.plus - newton).abs() < 1e-11 * newton.abs().max(1.0));
                let e = model.exponent();
                assert!((e.psi(r.minus) - q).abs() < 1e-10 * q.abs().max(1.0));
            }
        }
    }

    #[test]
    fn w_prime_zero_polynomial_matches_roots() {
        let e = LevyModel::cramer_lundberg(1.0, 3.0, 2.0).unwrap().exponent();
        let q = 0.7;
        let expected = (3.0 + q) / 1.0;
        assert!((e.w_prime_zero(q) - expected).abs() < 1e-14);
        let e = bm(2.0).exponent();
        assert!((e.w_prime_zero(0.3) - 0.5).abs() < 1e-15);
    }
}
