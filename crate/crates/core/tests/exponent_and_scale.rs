use parisian_qsd::{LevyModel, Orientation, ScaleContext};
use proptest::prelude::*;

fn brownian(sn: bool, sigma: f64, c: f64) -> LevyModel {
    let o = if sn { Orientation::SpectrallyNegative } else { Orientation::SpectrallyPositive };
    LevyModel::brownian(o, sigma, c).unwrap()
}

/// Compound Poisson models with negative long-run drift.
fn compound(sn: bool, c: f64, nu: f64, excess: f64) -> LevyModel {
    if sn {
        LevyModel::cramer_lundberg(c, c * nu * (1.0 + excess), nu).unwrap()
    } else {
        LevyModel::compound_poisson(Orientation::SpectrallyPositive, c, c * nu / (1.0 + excess), nu).unwrap()
    }
}

fn any_model() -> impl Strategy<Value = LevyModel> {
    prop_oneof![
        (any::<bool>(), 0.3..3.0f64, 0.2..2.0f64).prop_map(|(sn, s, c)| brownian(sn, s, c)),
        (any::<bool>(), 0.5..2.0f64, 0.5..5.0f64, 0.1..2.0f64).prop_map(|(sn, c, nu, e)| compound(sn, c, nu, e)),
    ]
}

/// Composite Simpson on [0, upper] for e^{-alpha x} W(x).
fn simpson_transform(ctx: &ScaleContext<f64>, alpha: f64, upper: f64, n: usize) -> f64 {
    let h = upper / n as f64;
    let f = |x: f64| ctx.tilted_w(alpha, x);
    let mut s = f(0.0) + f(upper);
    for i in 1..n {
        s += f(i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
    }
    s * h / 3.0
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn inverse_exponent_solves_the_equation(m in any_model(), u in 0.0..1.0f64) {
        let xi = m.expansion_point().unwrap().xi_star;
        let q = xi + 10f64.powf(-6.0 + 8.0 * u);
        let b = m.phi_inverse(q).unwrap();
        let r = m.laplace_exponent(b).unwrap() - q;
        prop_assert!(r.abs() <= 1e-10 * q.abs().max(1.0), "residual {r}");
        prop_assert!(m.laplace_exponent_derivative(b).unwrap() >= 0.0);
    }

    #[test]
    fn scale_function_has_the_right_laplace_transform(m in any_model(), q in 0.0..3.0f64, gap in 0.5..3.0f64) {
        let ctx = ScaleContext::<f64>::new(&m, q).unwrap();
        let alpha = m.phi_inverse(q).unwrap() + gap;
        let lhs = simpson_transform(&ctx, alpha, 40.0 / gap, 20_000);
        let rhs = 1.0 / (m.laplace_exponent(alpha).unwrap() - q);
        prop_assert!(((lhs - rhs) / rhs).abs() < 1e-6, "{lhs} vs {rhs}");
    }

    #[test]
    fn supremum_cdf_is_a_distribution_function(m in any_model(), q in 0.05..3.0f64) {
        let ctx = ScaleContext::<f64>::new(&m, q).unwrap();
        let mut prev = 0.0;
        for i in 0..40 {
            let v = ctx.sup_cdf(0.25 * i as f64);
            prop_assert!((-1e-12..=1.0 + 1e-12).contains(&v));
            prop_assert!(v >= prev - 1e-12);
            prev = v;
        }
        // decay rate is at least of order q / c
        prop_assert!(ctx.sup_cdf(4000.0) > 1.0 - 1e-9);
    }
}

#[test]
fn brownian_scale_function_closed_form() {
    // psi(b) = b^2/2 - b has roots 0 and 2 at q = 0
    let m = brownian(true, 1.0, 1.0);
    let ctx = ScaleContext::<f64>::new(&m, 0.0).unwrap();
    for &x in &[0.0, 0.3, 1.0, 2.5] {
        assert!((ctx.w(x) - ((2.0 * x).exp() - 1.0)).abs() < 1e-12 * (2.0 * x).exp());
    }
}

#[test]
fn cramer_lundberg_scale_function_at_zero_is_one_over_drift() {
    let m = LevyModel::cramer_lundberg(1.5, 3.0, 1.0).unwrap();
    for &q in &[0.0, 0.7, 4.0] {
        let ctx = ScaleContext::<f64>::new(&m, q).unwrap();
        assert!((ctx.w(0.0) - 1.0 / 1.5).abs() < 1e-14);
    }
}

#[test]
fn expansion_point_of_the_queue_input() {
    let ep = LevyModel::mm1_input(1.0, 4.0).unwrap().expansion_point().unwrap();
    assert!((ep.q_star + 2.0).abs() < 1e-9);
    assert!((ep.xi_star + 1.0).abs() < 1e-12);
    assert!((ep.k_star - 2f64.sqrt()).abs() < 1e-9);
}

#[test]
fn supremum_atom_vanishes_for_brownian_motion() {
    let m = brownian(true, 1.0, 1.0);
    let ctx = ScaleContext::<f64>::new(&m, 1.0).unwrap();
    assert!(ctx.sup_cdf(0.0).abs() < 1e-14);
}

#[test]
fn tilted_scale_function_survives_where_w_overflows() {
    // Phi(0) = 2c / sigma^2 is about 41, so W(80) is far beyond f64
    let m = brownian(true, 0.3, 1.858);
    let ctx = ScaleContext::<f64>::new(&m, 0.0).unwrap();
    assert!(ctx.w(80.0).is_infinite());
    let v = ctx.tilted_w(41.0, 80.0);
    assert!(v.is_finite() && v > 0.0);
    let direct = (-41.0 * 5.0f64).exp() * ctx.w(5.0);
    assert!((ctx.tilted_w(41.0, 5.0) / direct - 1.0).abs() < 1e-12);
}
