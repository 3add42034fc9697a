//! The acceptance suite: ten numbered criteria, each returning PASS/FAIL with
//! a one-line detail and an optional CSV artifact.
//!
//! Criteria 6 and 7 test large-time asymptotics at horizons where the exact
//! finite-time law (computed by transform inversion) is still far from its
//! limit. They are run as stated and are expected to fail; their notes carry
//! the exact finite-time comparison.

use std::path::Path;

use crate::error::{Error, Result};
use crate::inversion::{survival_moment, survival_probability, EulerInversion};
use crate::model::{Family, LevyModel, Orientation};
use crate::qsd::{classical_qsd_transform, expansion_fit, h_parts, qsd_density, qsd_transform, FitTarget};
use crate::report::{num, CsvTable};
use crate::resolvent::{parisian_resolvent, sup_at_exponential_cdf, ResolventQuery};
use crate::scale::ScaleContext;
use crate::simulate::{
    mc_conditional_histogram, mc_conditional_moments, mc_resolvent_grid, mc_sup_at_exponential, mc_survival_curve,
    ResolventEstimate, SimConfig,
};

pub const KNOWN_UNATTAINABLE: [u32; 2] = [6, 7];
/// Criteria that make sense for a single user-supplied model.
pub const MODEL_CRITERIA: [u32; 6] = [1, 2, 3, 4, 5, 8];

#[derive(Clone, Debug, PartialEq)]
pub struct NamedModel {
    pub name: String,
    pub model: LevyModel,
}

impl NamedModel {
    pub fn new(name: &str, model: LevyModel) -> Self {
        NamedModel { name: name.to_string(), model }
    }
}

/// Models used by the full suite.
pub fn catalog() -> Vec<NamedModel> {
    let bm = |o| LevyModel::brownian(o, 1.0, 1.0).expect("catalog model");
    vec![
        NamedModel::new("bm", bm(Orientation::SpectrallyNegative)),
        NamedModel::new("bm-sp", bm(Orientation::SpectrallyPositive)),
        NamedModel::new("mm1", LevyModel::mm1_input(1.0, 4.0).expect("catalog model")),
        NamedModel::new("mm1-slow", LevyModel::mm1_input(1.0, 1.21).expect("catalog model")),
        NamedModel::new("cl", LevyModel::cramer_lundberg(1.0, 3.0, 2.0).expect("catalog model")),
    ]
}

fn pick(names: &[&str]) -> Vec<NamedModel> {
    catalog().into_iter().filter(|m| names.contains(&m.name.as_str())).collect()
}

#[derive(Clone, Debug, PartialEq)]
pub enum Scope {
    Full,
    Model(NamedModel),
}

impl Scope {
    pub fn criteria(&self) -> Vec<u32> {
        match self {
            Scope::Full => (1..=10).collect(),
            Scope::Model(_) => MODEL_CRITERIA.to_vec(),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ValidationOptions {
    pub seed: u64,
    /// Multiplies every Monte Carlo path count; 1 runs the stated sizes.
    pub path_scale: f64,
}

impl Default for ValidationOptions {
    fn default() -> Self {
        ValidationOptions { seed: 0xC0FFEE, path_scale: 1.0 }
    }
}

impl ValidationOptions {
    fn paths(&self, n: usize) -> usize {
        ((n as f64 * self.path_scale).round() as usize).max(100)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CriterionResult {
    pub id: u32,
    pub name: String,
    pub passed: bool,
    pub detail: String,
    pub notes: Vec<String>,
    pub artifact: Option<CsvTable>,
}

impl CriterionResult {
    fn new(id: u32, passed: bool, detail: String) -> Self {
        CriterionResult { id, name: criterion_name(id).to_string(), passed, detail, notes: Vec::new(), artifact: None }
    }

    pub fn line(&self) -> String {
        format!("{} [{}] {}: {}", if self.passed { "PASS" } else { "FAIL" }, self.id, self.name, self.detail)
    }

    pub fn known_unattainable(&self) -> bool {
        KNOWN_UNATTAINABLE.contains(&self.id)
    }
}

pub fn criterion_name(id: u32) -> &'static str {
    match id {
        1 => "exponent inverse residuals",
        2 => "scale function transform identity",
        3 => "expansion coefficient",
        4 => "resolvent vs Monte Carlo",
        5 => "H function vs expansion fit",
        6 => "quasi-stationary density",
        7 => "survival ratio law",
        8 => "classical limit",
        9 => "supremum law",
        10 => "determinism",
        _ => "unknown",
    }
}

/// Runs one criterion; numerical errors become a FAIL carrying the message.
pub fn evaluate(id: u32, scope: &Scope, opts: &ValidationOptions) -> CriterionResult {
    let models = match scope {
        Scope::Full => None,
        Scope::Model(m) => Some(vec![m.clone()]),
    };
    let full = |names: &[&str]| models.clone().unwrap_or_else(|| pick(names));
    let out = match id {
        1 => c1(&full(&["bm", "bm-sp", "mm1", "mm1-slow", "cl"])),
        2 => c2(&full(&["bm", "mm1", "mm1-slow", "cl"])),
        3 => match &models {
            None => c3_pinned(),
            Some(m) => c3_generic(m),
        },
        4 => c4(&full(&["mm1", "cl", "bm", "bm-sp"]), opts),
        5 => c5(&full(&["bm", "bm-sp", "mm1", "mm1-slow", "cl"])),
        6 => c6(opts),
        7 => c7(opts),
        8 => c8(&full(&["bm", "bm-sp", "mm1", "cl"])),
        9 => c9(opts),
        10 => c10(opts),
        _ => Err(Error::Config(format!("no criterion {id}"))),
    };
    out.unwrap_or_else(|e| CriterionResult::new(id, false, format!("error: {e}")))
}

/// Writes each artifact as `criterion-NN.csv` in `dir`.
pub fn write_artifacts(results: &[CriterionResult], dir: &Path) -> std::io::Result<()> {
    std::fs::create_dir_all(dir)?;
    for r in results {
        if let Some(t) = &r.artifact {
            t.write(dir.join(format!("criterion-{:02}.csv", r.id)))?;
        }
    }
    Ok(())
}

fn tick(ok: bool) -> String {
    if ok { "pass" } else { "fail" }.to_string()
}

fn c1(models: &[NamedModel]) -> Result<CriterionResult> {
    let mut t = CsvTable::new(&["model", "q", "phi_inverse", "residual"]);
    let mut worst: f64 = 0.0;
    for m in models {
        let ep = m.model.expansion_point()?;
        let e = m.model.exponent();
        for i in 0..50 {
            let q = ep.xi_star + 10f64.powf(-6.0 + 8.0 * i as f64 / 49.0);
            let b = m.model.phi_inverse(q)?;
            let r = (e.psi(b) - q).abs() / q.abs().max(1.0);
            worst = worst.max(r);
            t.push(vec![m.name.clone(), num(q), num(b), num(r)]);
        }
    }
    let mut r = CriterionResult::new(1, worst <= 1e-10, format!("worst scaled residual {worst:.2e} (limit 1e-10)"));
    r.artifact = Some(t);
    Ok(r)
}

fn integrate_exp_w(ctx: &ScaleContext<f64>, alpha: f64, upper: f64) -> f64 {
    let pieces = 32;
    (0..pieces)
        .map(|k| {
            let a = upper * k as f64 / pieces as f64;
            let b = upper * (k + 1) as f64 / pieces as f64;
            quadrature::double_exponential::integrate(|x| (-alpha * x).exp() * ctx.w(x), a, b, 1e-14).integral
        })
        .sum()
}

fn c2(models: &[NamedModel]) -> Result<CriterionResult> {
    let mut t = CsvTable::new(&["model", "q", "alpha", "quadrature", "closed_form", "rel_err"]);
    let mut worst: f64 = 0.0;
    let mut count = 0;
    for m in models {
        for (q, gap) in [(0.0, 1.0), (0.5, 0.5), (2.0, 2.0)] {
            let ctx = ScaleContext::<f64>::new(&m.model, q)?;
            let alpha = m.model.phi_inverse(q)? + gap;
            let lhs = integrate_exp_w(&ctx, alpha, 45.0 / gap);
            let rhs = 1.0 / (m.model.exponent().psi(alpha) - q);
            let rel = ((lhs - rhs) / rhs).abs();
            worst = worst.max(rel);
            count += 1;
            t.push(vec![m.name.clone(), num(q), num(alpha), num(lhs), num(rhs), num(rel)]);
        }
    }
    let mut r = CriterionResult::new(
        2,
        worst <= 1e-6,
        format!("{count} combos, worst relative error {worst:.2e} (limit 1e-6)"),
    );
    r.artifact = Some(t);
    Ok(r)
}

/// `(Phi(q) - q*)/sqrt(q - xi*)` at `q - xi* = 1e-6`.
fn expansion_ratio(model: &LevyModel) -> Result<f64> {
    let ep = model.expansion_point()?;
    let d = 1e-6;
    Ok((model.phi_inverse(ep.xi_star + d)? - ep.q_star) / d.sqrt())
}

fn c3_pinned() -> Result<CriterionResult> {
    let mut t = CsvTable::new(&["model", "q_star", "xi_star", "ratio", "k_star_target", "abs_err"]);
    let mut ok = true;
    let mut worst: f64 = 0.0;
    // both have psi''(q*) = 1, so k* = sqrt(2)
    let bm = LevyModel::brownian(Orientation::SpectrallyNegative, 1.0, 1.0)?;
    let mm1 = LevyModel::mm1_input(1.0, 4.0)?;
    for (name, m) in [("bm", bm), ("mm1", mm1)] {
        let ep = m.expansion_point()?;
        let ratio = expansion_ratio(&m)?;
        let err = (ratio - std::f64::consts::SQRT_2).abs();
        worst = worst.max(err);
        ok &= err <= 1e-3;
        t.push(vec![name.into(), num(ep.q_star), num(ep.xi_star), num(ratio), num(std::f64::consts::SQRT_2), num(err)]);
    }
    let ep = mm1.expansion_point()?;
    let pinned = (ep.q_star + 2.0).abs() <= 1e-9 && (ep.xi_star + 1.0).abs() <= 1e-9;
    ok &= pinned;
    let mut r = CriterionResult::new(
        3,
        ok,
        format!("worst |ratio - k*| {worst:.2e} (limit 1e-3); M/M/1 q* = {:.12}, xi* = {:.12}", ep.q_star, ep.xi_star),
    );
    r.artifact = Some(t);
    Ok(r)
}

fn c3_generic(models: &[NamedModel]) -> Result<CriterionResult> {
    let mut t = CsvTable::new(&["model", "q_star", "xi_star", "ratio", "k_star_target", "abs_err"]);
    let mut worst: f64 = 0.0;
    for m in models {
        let ep = m.model.expansion_point()?;
        let e = m.model.exponent();
        let h = 1e-4;
        let second = (e.psi(ep.q_star + h) - 2.0 * e.psi(ep.q_star) + e.psi(ep.q_star - h)) / (h * h);
        let target = (2.0 / second).sqrt();
        let ratio = expansion_ratio(&m.model)?;
        let err = (ratio - target).abs();
        worst = worst.max(err);
        t.push(vec![m.name.clone(), num(ep.q_star), num(ep.xi_star), num(ratio), num(target), num(err)]);
    }
    let mut r = CriterionResult::new(3, worst <= 1e-3, format!("worst |ratio - k*| {worst:.2e} (limit 1e-3)"));
    r.artifact = Some(t);
    Ok(r)
}

fn c4(models: &[NamedModel], opts: &ValidationOptions) -> Result<CriterionResult> {
    let (thetas, alphas, qs) = ([1.0, 2.0], [0.0, 0.5], [0.5, 1.0]);
    let mut t = CsvTable::new(&[
        "model",
        "theta",
        "alpha",
        "q",
        "exact",
        "mc",
        "stderr",
        "step_difference",
        "allowance",
        "status",
    ]);
    // Brownian models in both orientations are the same process; simulate it once
    let mut cache: Vec<(Family, Vec<ResolventEstimate>)> = Vec::new();
    let (mut cells, mut failed, mut worst_z) = (0, 0, 0.0f64);
    for m in models {
        let family = m.model.family();
        let grid = match cache.iter().find(|(f, _)| *f == family) {
            Some((_, g)) => g.clone(),
            None => {
                let mut cfg = SimConfig::new(m.model, 1.0, 1.0);
                cfg.seed = opts.seed;
                cfg.paths = opts.paths(if m.model.gaussian_coefficient() > 0.0 { 100_000 } else { 1_000_000 });
                cfg.step = 1e-4;
                let g = mc_resolvent_grid(&cfg, &thetas, &alphas, &qs)?;
                cache.push((family, g.clone()));
                g
            }
        };
        for est in grid {
            let exact =
                parisian_resolvent(&m.model, ResolventQuery { x: 1.0, alpha: est.alpha, q: est.q, theta: est.theta })?
                    .value;
            let best = est.best();
            let ok = (best.mean - exact).abs() <= est.allowance() && est.step_gate();
            worst_z = worst_z.max(best.z_score(exact));
            cells += 1;
            failed += usize::from(!ok);
            t.push(vec![
                m.name.clone(),
                num(est.theta),
                num(est.alpha),
                num(est.q),
                num(exact),
                num(best.mean),
                num(best.stderr),
                num(est.step_difference.map_or(0.0, |d| d.mean)),
                num(est.allowance()),
                tick(ok),
            ]);
        }
    }
    let mut r = CriterionResult::new(
        4,
        failed == 0,
        format!("{cells} cells, {failed} outside allowance, largest |z| {worst_z:.2}"),
    );
    r.artifact = Some(t);
    Ok(r)
}

/// Points where the resolvent near the branch point has a pole in alpha.
fn on_exponent_pole(model: &LevyModel, alpha: f64) -> bool {
    let e = model.exponent();
    let d = match model.orientation() {
        Orientation::SpectrallyNegative => e.den(-alpha),
        Orientation::SpectrallyPositive => e.den(alpha),
    };
    d.abs() < 1e-9
}

fn c5(models: &[NamedModel]) -> Result<CriterionResult> {
    let mut t = CsvTable::new(&["model", "x", "theta", "alpha", "closed_form", "fit", "rel_err"]);
    let (mut worst, mut count) = (0.0f64, 0);
    let mut skipped = Vec::new();
    for m in models {
        let ep = m.model.expansion_point()?;
        for &theta in &[1.0, 2.0] {
            if theta <= -ep.xi_star {
                skipped.push(format!("{} theta={theta} (theta <= |xi*|)", m.name));
                continue;
            }
            for &x in &[0.5, 1.0] {
                for &alpha in &[0.0, 0.5, 2.0] {
                    if on_exponent_pole(&m.model, alpha) {
                        skipped.push(format!("{} alpha={alpha} (pole of the exponent)", m.name));
                        continue;
                    }
                    let closed = h_parts(&m.model, alpha, x, theta)?.total();
                    let fit = expansion_fit(&m.model, x, alpha, theta, FitTarget::Parisian)?.h_coef;
                    let rel = ((fit - closed) / closed).abs();
                    worst = worst.max(rel);
                    count += 1;
                    t.push(vec![m.name.clone(), num(x), num(theta), num(alpha), num(closed), num(fit), num(rel)]);
                }
            }
        }
    }
    skipped.dedup();
    let mut r = CriterionResult::new(
        5,
        count > 0 && worst <= 1e-3,
        format!("{count} points, worst relative error {worst:.2e} (limit 1e-3)"),
    );
    r.notes = skipped.into_iter().map(|s| format!("skipped {s}")).collect();
    r.artifact = Some(t);
    Ok(r)
}

fn slow_mm1() -> Result<LevyModel> {
    LevyModel::mm1_input(1.0, 1.21)
}

fn slow_cfg(opts: &ValidationOptions) -> Result<SimConfig> {
    let mut cfg = SimConfig::new(slow_mm1()?, 1.0, 1.0);
    cfg.seed = opts.seed;
    cfg.paths = opts.paths(1_000_000);
    cfg.horizon = 1000.0;
    Ok(cfg)
}

/// Exact `(S(t), E[e^{-alpha X_t} | survival])` by inversion.
fn exact_conditional(model: &LevyModel, alpha: f64, t: f64) -> Result<(f64, f64)> {
    let inv = EulerInversion::default();
    let s = survival_probability(model, 1.0, 1.0, t, &inv)?;
    Ok((s, survival_moment(model, 1.0, alpha, 1.0, t, &inv)? / s))
}

fn c6(opts: &ValidationOptions) -> Result<CriterionResult> {
    let model = slow_mm1()?;
    let qt = qsd_transform(&model, 1.0, 1.0)?;
    let inv = EulerInversion::default();

    // density on a grid wide enough to hold the tail
    let h = 0.05;
    let grid: Vec<f64> = (0..=4400).map(|i| -20.0 + h * i as f64).collect();
    let dens = qsd_density(&qt, &grid, &inv)?;
    let min = dens.iter().map(|d| d.1).fold(f64::INFINITY, f64::min);
    let mass: f64 = dens.windows(2).map(|w| 0.5 * h * (w[0].1 + w[1].1)).sum();
    let density_ok = min >= -1e-6 && (mass - 1.0).abs() <= 1e-3;

    // doubling test for the conditional law
    let cfg = slow_cfg(opts)?;
    let alphas = [0.5, 1.0];
    let ts = [25.0, 50.0, 100.0, 200.0];
    let mut moments = Vec::new();
    for &t in &ts {
        moments.push(mc_conditional_moments(&cfg, t, &alphas)?);
    }
    let mut stable_at = None;
    for i in 0..ts.len() - 1 {
        let close = (0..alphas.len()).all(|j| {
            let (a, b) = (moments[i][j], moments[i + 1][j]);
            (a.mean - b.mean).abs() <= 3.0 * a.stderr.hypot(b.stderr)
        });
        if close {
            stable_at = Some(ts[i]);
            break;
        }
    }
    let t_hist = stable_at.unwrap_or(50.0);

    // histogram against bin masses of the limit law
    let edges: Vec<f64> = (-5..=60).map(f64::from).collect();
    let (survivors, hist) = mc_conditional_histogram(&cfg, t_hist, &edges)?;
    let neg_mass = qt.negative_mass()?;
    let rate = qt.alpha_max;
    let cdf_pos = |y: f64| -> Result<f64> {
        if y <= 0.0 {
            return Ok(0.0);
        }
        inv.invert(|a| Ok(qt.parts(a)?.positive / a), y)
    };
    let mut t = CsvTable::new(&["lo", "hi", "mc_density", "stderr", "limit_density", "status"]);
    let (mut occupied, mut outside) = (0, 0);
    for (k, est) in hist.iter().enumerate() {
        let (lo, hi) = (edges[k], edges[k + 1]);
        let mass =
            if hi <= 0.0 { neg_mass * ((rate * hi).exp() - (rate * lo).exp()) } else { cdf_pos(hi)? - cdf_pos(lo)? };
        let limit = mass / (hi - lo);
        let count = est.mean * (hi - lo) * survivors as f64;
        let used = count >= 10.0;
        let ok = !used || (est.mean - limit).abs() <= 3.0 * est.stderr;
        occupied += usize::from(used);
        outside += usize::from(!ok);
        t.push(vec![num(lo), num(hi), num(est.mean), num(est.stderr), num(limit), tick(ok)]);
    }
    t.meta("histogram_t", num(t_hist)).meta("survivors", survivors);

    let passed = density_ok && stable_at.is_some() && occupied >= 20 && outside == 0;
    let mut r = CriterionResult::new(
        6,
        passed,
        format!(
            "density min {min:.1e}, mass {mass:.6}; conditional law {} by t=200; at t={t_hist}: {occupied} occupied bins, {outside} outside 3 sigma",
            if stable_at.is_some() { "stabilised" } else { "not stabilised" }
        ),
    );
    let qsd_half = qt.normalized(0.5)?;
    for (i, &t) in ts.iter().enumerate() {
        let mc = moments[i][0];
        match exact_conditional(&model, 0.5, t) {
            Ok((_, exact)) => r.notes.push(format!(
                "t={t}: E[e^(-X/2) | survival] MC {:.5} +- {:.5}, exact finite-t {exact:.5} (z {:.2}), limit {qsd_half:.5}",
                mc.mean,
                mc.stderr,
                mc.z_score(exact)
            )),
            Err(e) => r.notes.push(format!("t={t}: exact finite-t value unavailable ({e})")),
        }
    }
    if let Ok((_, late)) = exact_conditional(&model, 0.5, 800.0) {
        r.notes.push(format!(
            "the exact conditional moment is still {late:.5} at t=800 (limit {qsd_half:.5}); the limit law is not reached at reachable t"
        ));
    }
    r.artifact = Some(t);
    Ok(r)
}

fn c7(opts: &ValidationOptions) -> Result<CriterionResult> {
    let model = slow_mm1()?;
    let xi = model.expansion_point()?.xi_star;
    let cfg = slow_cfg(opts)?;
    let s = mc_survival_curve(&cfg, &[50.0, 60.0])?;
    let ratio = s[1].mean / s[0].mean;
    // nested events on common paths: the ratio is a binomial proportion among survivors at 50
    let se = (ratio * (1.0 - ratio) / (cfg.paths as f64 * s[0].mean)).sqrt();
    let law = (10.0 * xi).exp() * (50.0f64 / 60.0).powf(1.5);
    let z = (ratio - law).abs() / se;
    let mut r = CriterionResult::new(
        7,
        z <= 3.0,
        format!("MC ratio {ratio:.5} +- {se:.5}, asymptotic law {law:.5}, |z| {z:.1}"),
    );
    let inv = EulerInversion::default();
    let mut t = CsvTable::new(&["t", "mc_survival", "stderr", "exact_survival"]);
    let mut exact = Vec::new();
    for (i, &tt) in [50.0, 60.0].iter().enumerate() {
        let e = survival_probability(&model, 1.0, 1.0, tt, &inv).unwrap_or(f64::NAN);
        exact.push(e);
        t.push_nums(&[tt, s[i].mean, s[i].stderr, e]);
    }
    let exact_ratio = exact[1] / exact[0];
    r.notes.push(format!(
        "exact finite-t ratio by inversion {exact_ratio:.5}; MC agrees with it (|z| {:.2}), the t^(-3/2) regime is not reached by t=60",
        (ratio - exact_ratio).abs() / se
    ));
    r.artifact = Some(t);
    Ok(r)
}

fn c8(models: &[NamedModel]) -> Result<CriterionResult> {
    let theta = 1e4;
    let mut t = CsvTable::new(&["model", "alpha", "parisian", "classical", "abs_diff"]);
    let mut worst = 0.0f64;
    let mut notes = Vec::new();
    for m in models {
        let qt = qsd_transform(&m.model, 1.0, theta)?;
        let mut dropped = 0;
        for i in 0..=50 {
            let alpha = 0.1 * i as f64;
            // the transform only exists below the rate of its negative part
            if alpha >= qt.alpha_max - 1e-3 {
                dropped += 1;
                continue;
            }
            let p = qt.normalized(alpha)?;
            let c = classical_qsd_transform(&m.model, alpha)?;
            worst = worst.max((p - c).abs());
            t.push(vec![m.name.clone(), num(alpha), num(p), num(c), num((p - c).abs())]);
        }
        if dropped > 0 {
            notes.push(format!(
                "{}: {dropped} grid points at or beyond alpha_max = {:.6} left out",
                m.name, qt.alpha_max
            ));
        }
    }
    let mut r = CriterionResult::new(8, worst <= 1e-2, format!("theta=1e4, worst deviation {worst:.2e} (limit 1e-2)"));
    r.notes = notes;
    r.artifact = Some(t);
    Ok(r)
}

fn c9(opts: &ValidationOptions) -> Result<CriterionResult> {
    let model = LevyModel::cramer_lundberg(1.0, 3.0, 2.0)?;
    let mut cfg = SimConfig::new(model, 0.0, 1.0);
    cfg.seed = opts.seed;
    cfg.paths = opts.paths(1_000_000);
    let q = 1.0;
    let zs = [0.0, 0.5, 1.0, 2.0, 4.0];
    let est = mc_sup_at_exponential(&cfg, q, &zs)?;
    let mut t = CsvTable::new(&["z", "closed_form", "mc", "stderr", "status"]);
    let mut worst = 0.0f64;
    let mut ok = true;
    for (z, e) in zs.iter().zip(&est) {
        let exact = sup_at_exponential_cdf(&model, q, *z)?;
        let z_score = e.z_score(exact);
        worst = worst.max(z_score);
        ok &= z_score <= 3.0;
        t.push(vec![num(*z), num(exact), num(e.mean), num(e.stderr), tick(z_score <= 3.0)]);
    }
    let mut r = CriterionResult::new(9, ok, format!("5 points, largest |z| {worst:.2}"));
    r.artifact = Some(t);
    Ok(r)
}

/// A reduced artifact (resolvent grid and supremum law) rendered to CSV.
fn determinism_artifact(opts: &ValidationOptions) -> Result<String> {
    let model = LevyModel::cramer_lundberg(1.0, 3.0, 2.0)?;
    let mut cfg = SimConfig::new(model, 1.0, 1.0);
    cfg.seed = opts.seed;
    cfg.paths = 20_000;
    let mut t = CsvTable::new(&["kind", "a", "b", "c", "mean", "stderr"]);
    t.meta("seed", opts.seed);
    for e in mc_resolvent_grid(&cfg, &[1.0, 2.0], &[0.0, 0.5], &[0.5, 1.0])? {
        t.push(vec![
            "resolvent".into(),
            num(e.theta),
            num(e.alpha),
            num(e.q),
            num(e.estimate.mean),
            num(e.estimate.stderr),
        ]);
    }
    let zs = [0.0, 1.0, 2.0];
    for (z, e) in zs.iter().zip(mc_sup_at_exponential(&cfg, 1.0, &zs)?) {
        t.push(vec!["sup".into(), num(1.0), num(*z), num(0.0), num(e.mean), num(e.stderr)]);
    }
    Ok(t.render())
}

fn c10(opts: &ValidationOptions) -> Result<CriterionResult> {
    let run = |threads: usize| -> Result<String> {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
        pool.install(|| determinism_artifact(opts))
    };
    let a = run(1)?;
    let b = run(3)?;
    let c = run(1)?;
    let same = a == b && a == c;
    let mut r = CriterionResult::new(
        10,
        same,
        format!("three runs (1, 3, 1 worker threads) {}", if same { "byte-identical" } else { "differ" }),
    );
    let mut t = CsvTable::new(&["run", "bytes", "identical_to_first"]);
    for (i, s) in [&a, &b, &c].iter().enumerate() {
        t.push(vec![i.to_string(), s.len().to_string(), tick(**s == a)]);
    }
    r.artifact = Some(t);
    Ok(r)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cheap_criteria_pass() {
        let opts = ValidationOptions::default();
        for id in [1, 2, 3, 5, 8] {
            let r = evaluate(id, &Scope::Full, &opts);
            assert!(r.passed, "{}", r.line());
        }
    }

    #[test]
    fn model_scope_runs_generic_checks() {
        let m = NamedModel::new("cl", LevyModel::cramer_lundberg(1.0, 3.0, 2.0).unwrap());
        let scope = Scope::Model(m);
        assert_eq!(scope.criteria(), MODEL_CRITERIA.to_vec());
        let r = evaluate(3, &scope, &ValidationOptions::default());
        assert!(r.passed, "{}", r.line());
    }

    #[test]
    fn unknown_criterion_fails() {
        assert!(!evaluate(42, &Scope::Full, &ValidationOptions::default()).passed);
    }
}
