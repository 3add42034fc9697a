//! Monte Carlo oracle.
//!
//! Compound Poisson paths are simulated exactly: they are piecewise linear,
//! so every zero crossing is solved in closed form. Brownian paths live on a
//! grid of half the configured step; the same path read at every other grid
//! point gives the configured step, so each run also measures how far the
//! estimate moves when the step is halved.
//!
//! Each path owns independent random streams keyed by `(seed, path, tag)`.
//! Paths are processed in fixed-size chunks whose partial sums are reduced
//! in chunk order, so results do not depend on the number of worker threads
//! (`PARISIAN_QSD_THREADS`).

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Exp1, StandardNormal};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::model::{Family, LevyModel, Orientation};

const TAG_PATH: u64 = 0;
const TAG_CLOCKS: u64 = 1;
const TAG_KILL: u64 = 2;
const TAG_AUX: u64 = 3;
const CHUNK: usize = 4096;

pub const THREADS_ENV: &str = "PARISIAN_QSD_THREADS";

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SimConfig {
    pub model: LevyModel,
    pub x0: f64,
    pub theta: f64,
    pub horizon: f64,
    pub paths: usize,
    pub seed: u64,
    /// Grid step for Brownian models; unused for compound Poisson.
    pub step: f64,
    /// Seed for the excursion clocks only; defaults to `seed`.
    pub clock_seed: Option<u64>,
}

impl SimConfig {
    pub fn new(model: LevyModel, x0: f64, theta: f64) -> Self {
        SimConfig { model, x0, theta, horizon: 200.0, paths: 100_000, seed: 0xC0FFEE, step: 1e-4, clock_seed: None }
    }

    pub fn validate(&self) -> Result<()> {
        if self.paths == 0 {
            return Err(Error::Config("paths must be at least 1".into()));
        }
        if !(self.horizon > 0.0) || !self.horizon.is_finite() {
            return Err(Error::Config(format!("horizon = {} must be positive", self.horizon)));
        }
        if !(self.theta > 0.0) {
            return Err(Error::Config(format!("theta = {} must be positive", self.theta)));
        }
        if !(self.x0 >= 0.0) || !self.x0.is_finite() {
            return Err(Error::Config(format!("x0 = {} must be finite and >= 0", self.x0)));
        }
        if self.model.gaussian_coefficient() > 0.0 && !(self.step > 0.0) {
            return Err(Error::Config(format!("step = {} must be positive for Brownian models", self.step)));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct McEstimate {
    pub mean: f64,
    pub stderr: f64,
    pub n: usize,
    pub seed: u64,
}

impl McEstimate {
    /// Number of standard errors separating the estimate from `target`.
    pub fn z_score(&self, target: f64) -> f64 {
        (self.mean - target).abs() / self.stderr.max(f64::MIN_POSITIVE)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PathOutcome {
    pub ruin_time: Option<f64>,
    /// X at the horizon, whether or not the path was ruined before.
    pub terminal_value: f64,
    pub classical_ruin_time: Option<f64>,
}

fn stream(seed: u64, path: usize, tag: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(path as u64 * 4 + tag);
    rng
}

/// Runs `f` inside a pool capped by `PARISIAN_QSD_THREADS` when it is set.
pub fn with_thread_pool<R: Send>(f: impl FnOnce() -> R + Send) -> R {
    let cap = std::env::var(THREADS_ENV).ok().and_then(|v| v.trim().parse::<usize>().ok());
    match cap {
        Some(n) if n > 0 => match rayon::ThreadPoolBuilder::new().num_threads(n).build() {
            Ok(pool) => pool.install(f),
            Err(_) => f(),
        },
        _ => f(),
    }
}

/// Column sums and sums of squares over paths, reduced in a fixed order.
fn accumulate<F>(paths: usize, width: usize, per_path: F) -> Result<(Vec<f64>, Vec<f64>)>
where
    F: Fn(usize) -> Result<Vec<f64>> + Sync,
{
    let chunks = paths.div_ceil(CHUNK);
    let partials: Vec<Result<(Vec<f64>, Vec<f64>)>> = with_thread_pool(|| {
        (0..chunks)
            .into_par_iter()
            .map(|c| {
                let mut sum = vec![0.0; width];
                let mut sq = vec![0.0; width];
                for p in c * CHUNK..((c + 1) * CHUNK).min(paths) {
                    let v = per_path(p)?;
                    for j in 0..width {
                        sum[j] += v[j];
                        sq[j] += v[j] * v[j];
                    }
                }
                Ok((sum, sq))
            })
            .collect()
    });
    let mut sum = vec![0.0; width];
    let mut sq = vec![0.0; width];
    for part in partials {
        let (s, q) = part?;
        for j in 0..width {
            sum[j] += s[j];
            sq[j] += q[j];
        }
    }
    Ok((sum, sq))
}

fn estimate(sum: f64, sq: f64, n: usize, seed: u64) -> McEstimate {
    let nf = n as f64;
    let mean = sum / nf;
    let var = if n > 1 { ((sq - nf * mean * mean) / (nf - 1.0)).max(0.0) } else { 0.0 };
    McEstimate { mean, stderr: (var / nf).sqrt(), n, seed }
}

/// Excursion bookkeeping for a family of clock intensities sharing one path.
/// The k-th excursion gets `E_k / theta` for every theta.
#[derive(Clone, Debug)]
struct Detector {
    clocks: ChaCha8Rng,
    in_excursion: bool,
    start: f64,
    clock: f64,
    ruin: Vec<Option<f64>>,
    classical: Option<f64>,
}

impl Detector {
    fn new(clocks: ChaCha8Rng, n: usize) -> Self {
        Detector { clocks, in_excursion: false, start: 0.0, clock: 0.0, ruin: vec![None; n], classical: None }
    }

    fn enter(&mut self, t: f64) {
        self.in_excursion = true;
        self.start = t;
        self.clock = self.clocks.sample(Exp1);
        self.classical.get_or_insert(t);
    }

    /// Records ruin for clocks that expire no later than `t` while the
    /// excursion is still running at `t`; ties count as ruin.
    fn advance(&mut self, thetas: &[f64], t: f64) {
        if !self.in_excursion {
            return;
        }
        for (k, &th) in thetas.iter().enumerate() {
            if self.ruin[k].is_none() {
                let deadline = self.start + self.clock / th;
                if deadline <= t {
                    self.ruin[k] = Some(deadline);
                }
            }
        }
    }

    fn exit(&mut self, thetas: &[f64], t: f64) {
        self.advance(thetas, t);
        self.in_excursion = false;
    }

    fn all_ruined(&self) -> bool {
        self.ruin.iter().all(Option::is_some)
    }
}

/// What a single path has to report.
struct Plan<'a> {
    thetas: &'a [f64],
    /// Observation times in increasing order.
    times: &'a [f64],
    /// Keep simulating after every clock has fired (for the supremum and raw output).
    track_after_ruin: bool,
}

struct Trace {
    x: Vec<f64>,
    sup: Vec<f64>,
    /// `alive[k * times.len() + i]` for intensity k at time i.
    alive: Vec<bool>,
    /// The same on the doubled grid (Brownian only).
    alive_coarse: Option<Vec<bool>>,
    ruin: Vec<Option<f64>>,
    classical: Option<f64>,
}

fn record(det: &Detector, alive: &mut [bool], n_times: usize, i: usize) {
    for (k, r) in det.ruin.iter().enumerate() {
        alive[k * n_times + i] = r.is_none();
    }
}

fn run_path(cfg: &SimConfig, path: usize, plan: &Plan) -> Trace {
    let clocks = stream(cfg.clock_seed.unwrap_or(cfg.seed), path, TAG_CLOCKS);
    match cfg.model.family() {
        Family::CompoundPoisson { c, lambda, nu } => run_cp(cfg, path, plan, clocks, c, lambda, nu),
        Family::Brownian { sigma, c } => run_bm(cfg, path, plan, clocks, sigma, c),
    }
}

#[allow(clippy::too_many_arguments)]
fn run_cp(cfg: &SimConfig, path: usize, plan: &Plan, clocks: ChaCha8Rng, c: f64, lambda: f64, nu: f64) -> Trace {
    let sn = cfg.model.orientation() == Orientation::SpectrallyNegative;
    // X' = slope between jumps; jumps have sign `jump_sign`
    let (slope, jump_sign) = if sn { (c, -1.0) } else { (-c, 1.0) };
    // Y is the spectrally positive member of the dual pair
    let y_sign = if sn { -1.0 } else { 1.0 };
    let n_times = plan.times.len();
    let mut rng = stream(cfg.seed, path, TAG_PATH);
    let mut det = Detector::new(clocks, plan.thetas.len());
    let mut xs = vec![f64::NAN; n_times];
    let mut sups = vec![f64::NAN; n_times];
    let mut alive = vec![false; plan.thetas.len() * n_times];

    let mut t = 0.0;
    let mut x = cfg.x0;
    let mut sup = y_sign * x;
    if x < 0.0 || (x == 0.0 && slope < 0.0) {
        det.enter(0.0);
    }
    let mut next_obs = 0;
    while next_obs < n_times {
        let dt: f64 = rng.sample::<f64, _>(Exp1) / lambda;
        let t_jump = t + dt;
        // zero crossing of the linear piece inside (t, t_jump)
        let crossing = if det.in_excursion && slope > 0.0 {
            Some(t + (-x) / slope)
        } else if !det.in_excursion && slope < 0.0 {
            Some(t + x / (-slope))
        } else {
            None
        }
        .filter(|&tc| tc < t_jump);
        let mut crossed = false;
        while next_obs < n_times && plan.times[next_obs] < t_jump {
            let s = plan.times[next_obs];
            if let Some(tc) = crossing {
                if !crossed && tc <= s {
                    cross(&mut det, plan.thetas, tc, slope);
                    crossed = true;
                }
            }
            det.advance(plan.thetas, s);
            let xv = x + slope * (s - t);
            xs[next_obs] = xv;
            sups[next_obs] = sup.max(y_sign * xv);
            record(&det, &mut alive, n_times, next_obs);
            next_obs += 1;
        }
        if next_obs >= n_times {
            break;
        }
        if let Some(tc) = crossing {
            if !crossed {
                cross(&mut det, plan.thetas, tc, slope);
            }
        }
        det.advance(plan.thetas, t_jump);
        let before = x + slope * dt;
        let size: f64 = rng.sample::<f64, _>(Exp1) / nu;
        x = before + jump_sign * size;
        t = t_jump;
        sup = sup.max(y_sign * before).max(y_sign * x);
        if det.in_excursion && x >= 0.0 {
            det.exit(plan.thetas, t);
        } else if !det.in_excursion && x < 0.0 {
            det.enter(t);
        }
        if !plan.track_after_ruin && det.all_ruined() && !plan.thetas.is_empty() {
            for i in next_obs..n_times {
                record(&det, &mut alive, n_times, i);
            }
            break;
        }
    }
    Trace { x: xs, sup: sups, alive, alive_coarse: None, ruin: det.ruin.clone(), classical: det.classical }
}

fn cross(det: &mut Detector, thetas: &[f64], tc: f64, slope: f64) {
    if slope > 0.0 {
        det.exit(thetas, tc);
    } else {
        det.enter(tc);
    }
}

/// Rate-`theta_max` Poisson marks, run only while some grid is below zero.
/// Each mark carries a uniform label; it counts for intensity `theta` when
/// `label * theta_max <= theta`, which thins it to a rate-`theta` process.
struct Marks {
    rng: ChaCha8Rng,
    rate: f64,
    next: Option<(f64, f64)>,
}

impl Marks {
    fn draw(&mut self, from: f64) -> (f64, f64) {
        let e: f64 = self.rng.sample(Exp1);
        (from + e / self.rate, self.rng.random::<f64>())
    }

    fn sync(&mut self, t: f64, below: bool) {
        if !below {
            self.next = None;
        } else if self.next.is_none() && self.rate > 0.0 {
            self.next = Some(self.draw(t));
        }
    }

    fn pop_before(&mut self, t: f64) -> Option<(f64, f64)> {
        match self.next {
            Some((m, u)) if m < t => {
                self.next = Some(self.draw(m));
                Some((m, u))
            }
            _ => None,
        }
    }
}

#[derive(Clone, Debug)]
struct GridState {
    below: bool,
    ruin: Vec<Option<f64>>,
    classical: Option<f64>,
}

impl GridState {
    fn new(n: usize) -> Self {
        GridState { below: false, ruin: vec![None; n], classical: None }
    }

    fn set(&mut self, t: f64, x: f64) {
        self.below = x < 0.0;
        if self.below {
            self.classical.get_or_insert(t);
        }
    }

    fn mark(&mut self, thetas: &[f64], rate: f64, m: f64, u: f64) {
        if !self.below {
            return;
        }
        for (k, &th) in thetas.iter().enumerate() {
            if self.ruin[k].is_none() && u * rate <= th {
                self.ruin[k] = Some(m);
            }
        }
    }

    fn record(&self, alive: &mut [bool], n_times: usize, i: usize) {
        for (k, r) in self.ruin.iter().enumerate() {
            alive[k * n_times + i] = r.is_none();
        }
    }

    fn all_ruined(&self) -> bool {
        self.ruin.iter().all(Option::is_some)
    }
}

/// Brownian paths on a grid of `step / 2`; the "coarse" state reads the same
/// path every other point. Excursions are detected from grid signs only.
/// Both grids share one mark process, so their difference is tightly coupled.
fn run_bm(cfg: &SimConfig, path: usize, plan: &Plan, clocks: ChaCha8Rng, sigma: f64, c: f64) -> Trace {
    let n_times = plan.times.len();
    let nth = plan.thetas.len();
    let mut rng = stream(cfg.seed, path, TAG_PATH);
    let mut aux = stream(cfg.seed, path, TAG_AUX);
    let rate = plan.thetas.iter().copied().fold(0.0, f64::max);
    let mut marks = Marks { rng: clocks, rate, next: None };
    let mut fine = GridState::new(nth);
    let mut coarse = GridState::new(nth);
    let mut xs = vec![f64::NAN; n_times];
    let mut sups = vec![f64::NAN; n_times];
    let mut alive = vec![false; nth * n_times];
    let mut alive_c = vec![false; nth * n_times];
    let y_sign = if cfg.model.orientation() == Orientation::SpectrallyNegative { -1.0 } else { 1.0 };

    let h = cfg.step;
    let hf = 0.5 * h;
    let drift = -c * hf;
    let vol = sigma * hf.sqrt();
    let mut x = cfg.x0;
    let mut sup = y_sign * x;
    fine.set(0.0, x);
    coarse.set(0.0, x);
    marks.sync(0.0, fine.below || coarse.below);
    let mut next_obs = 0;
    let mut j: u64 = 0;
    while next_obs < n_times {
        let t0 = j as f64 * h;
        let tm = t0 + hf;
        let t1 = (j + 1) as f64 * h;
        let z1: f64 = rng.sample(StandardNormal);
        let z2: f64 = rng.sample(StandardNormal);
        let xm = x + drift + vol * z1;
        let x1 = xm + drift + vol * z2;
        let (mut ta, mut xa) = (t0, x);
        let mut sup_here = sup;
        for (half, (tb, xb)) in [(tm, xm), (t1, x1)].into_iter().enumerate() {
            if half == 1 {
                fine.set(tm, xm);
                marks.sync(tm, fine.below || coarse.below);
                sup_here = sup_here.max(y_sign * xm);
                ta = tm;
                xa = xm;
            }
            loop {
                let obs = plan.times.get(next_obs).copied().filter(|&s| s < tb);
                let mark = marks.next.filter(|&(m, _)| m < tb && obs.map_or(true, |s| m < s));
                if mark.is_some() {
                    let (m, u) = marks.pop_before(tb).expect("pending mark");
                    fine.mark(plan.thetas, rate, m, u);
                    coarse.mark(plan.thetas, rate, m, u);
                } else if let Some(s) = obs {
                    // Brownian bridge from (ta, xa) to (tb, xb)
                    let w = (s - ta) / (tb - ta);
                    let sd = sigma * ((s - ta) * (tb - s) / (tb - ta)).max(0.0).sqrt();
                    let z: f64 = aux.sample(StandardNormal);
                    let xv = xa + w * (xb - xa) + sd * z;
                    ta = s;
                    xa = xv;
                    xs[next_obs] = xv;
                    sups[next_obs] = sup_here.max(y_sign * xv);
                    fine.record(&mut alive, n_times, next_obs);
                    coarse.record(&mut alive_c, n_times, next_obs);
                    next_obs += 1;
                } else {
                    break;
                }
            }
        }
        fine.set(t1, x1);
        coarse.set(t1, x1);
        marks.sync(t1, fine.below || coarse.below);
        sup = sup_here.max(y_sign * x1);
        x = x1;
        j += 1;
        if !plan.track_after_ruin && nth > 0 && fine.all_ruined() && coarse.all_ruined() {
            for i in next_obs..n_times {
                fine.record(&mut alive, n_times, i);
                coarse.record(&mut alive_c, n_times, i);
            }
            break;
        }
    }
    Trace { x: xs, sup: sups, alive, alive_coarse: Some(alive_c), ruin: fine.ruin, classical: fine.classical }
}

/// One path up to the horizon.
pub fn simulate_parisian_path(cfg: &SimConfig, path_index: usize) -> Result<PathOutcome> {
    cfg.validate()?;
    let thetas = [cfg.theta];
    let times = [cfg.horizon];
    let tr = run_path(cfg, path_index, &Plan { thetas: &thetas, times: &times, track_after_ruin: true });
    Ok(PathOutcome {
        ruin_time: tr.ruin[0].filter(|&r| r <= cfg.horizon),
        terminal_value: tr.x[0],
        classical_ruin_time: tr.classical.filter(|&r| r <= cfg.horizon),
    })
}

/// Exponential killing times `E/q` for every q from one Exp(1) variable,
/// conditioned on not exceeding the horizon.
fn killing_times(cfg: &SimConfig, path: usize, qs: &[f64]) -> Vec<f64> {
    let e: f64 = stream(cfg.seed, path, TAG_KILL).sample(Exp1);
    qs.iter()
        .map(|&q| {
            let t = e / q;
            if t <= cfg.horizon {
                t
            } else {
                let u = -(-e).exp_m1();
                -(-u * -(-q * cfg.horizon).exp_m1()).ln_1p() / q
            }
        })
        .collect()
}

fn check_horizon(cfg: &SimConfig, q: f64) -> Result<()> {
    if !(q > 0.0) {
        return Err(Error::Config(format!("q = {q} must be positive")));
    }
    if q * cfg.horizon < 40.0 {
        return Err(Error::Config(format!(
            "q * horizon = {} is below 40; raise the horizon to at least {}",
            q * cfg.horizon,
            40.0 / q
        )));
    }
    Ok(())
}

/// Sorted unique times and, for each input time, its position.
fn sort_times(times: &[f64]) -> (Vec<f64>, Vec<usize>) {
    let mut order: Vec<usize> = (0..times.len()).collect();
    order.sort_by(|&a, &b| times[a].total_cmp(&times[b]));
    let mut sorted = Vec::with_capacity(times.len());
    let mut pos = vec![0; times.len()];
    for &i in &order {
        if sorted.last() != Some(&times[i]) {
            sorted.push(times[i]);
        }
        pos[i] = sorted.len() - 1;
    }
    (sorted, pos)
}

/// Estimates for one `(theta, alpha, q)` cell of a resolvent grid.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ResolventEstimate {
    pub theta: f64,
    pub alpha: f64,
    pub q: f64,
    /// At the configured step (exact for compound Poisson).
    pub estimate: McEstimate,
    /// Brownian only: the estimate at half the step and the paired difference
    /// (half step minus full step).
    pub refined: Option<McEstimate>,
    pub step_difference: Option<McEstimate>,
}

impl ResolventEstimate {
    /// Best available estimate: the finer grid when there is one.
    pub fn best(&self) -> McEstimate {
        self.refined.unwrap_or(self.estimate)
    }

    /// Allowance for disagreement with an exact value: three standard errors
    /// plus, on a grid, the bias implied by an O(sqrt(step)) error law.
    /// With biases `b` and `sqrt(2) b` on the two grids the paired difference
    /// is `(1 - sqrt(2)) b`.
    pub fn allowance(&self) -> f64 {
        3.0 * self.best().stderr + self.bias_bound()
    }

    pub fn bias_bound(&self) -> f64 {
        self.step_difference.map(|d| d.mean.abs() / (std::f64::consts::SQRT_2 - 1.0)).unwrap_or(0.0)
    }

    /// Step-halving gate: refining the grid moved the estimate by less than its stderr.
    pub fn step_gate(&self) -> bool {
        match (self.step_difference, self.refined) {
            (Some(d), Some(r)) => d.mean.abs() < r.stderr,
            _ => true,
        }
    }
}

/// Resolvent estimates on a grid of clock intensities, alphas and qs; every
/// cell is computed from the same paths. `cfg.theta` is ignored.
pub fn mc_resolvent_grid(
    cfg: &SimConfig,
    thetas: &[f64],
    alphas: &[f64],
    qs: &[f64],
) -> Result<Vec<ResolventEstimate>> {
    cfg.validate()?;
    for &q in qs {
        check_horizon(cfg, q)?;
    }
    for &th in thetas {
        if !(th > 0.0) {
            return Err(Error::Config(format!("theta = {th} must be positive")));
        }
    }
    let grid = cfg.model.gaussian_coefficient() > 0.0;
    let cells = thetas.len() * alphas.len() * qs.len();
    let width = if grid { 3 * cells } else { cells };
    let (sum, sq) = accumulate(cfg.paths, width, |p| {
        let kill = killing_times(cfg, p, qs);
        let (times, pos) = sort_times(&kill);
        let tr = run_path(cfg, p, &Plan { thetas, times: &times, track_after_ruin: false });
        let nt = times.len();
        let mut out = vec![0.0; width];
        let mut cell = 0;
        for k in 0..thetas.len() {
            for &alpha in alphas {
                for &i in &pos {
                    let weight = (-alpha * tr.x[i]).exp();
                    let fine = if tr.alive[k * nt + i] { weight } else { 0.0 };
                    if let Some(ac) = &tr.alive_coarse {
                        let coarse = if ac[k * nt + i] { weight } else { 0.0 };
                        out[3 * cell] = coarse;
                        out[3 * cell + 1] = fine;
                        out[3 * cell + 2] = fine - coarse;
                    } else {
                        out[cell] = fine;
                    }
                    cell += 1;
                }
            }
        }
        Ok(out)
    })?;
    let mut res = Vec::with_capacity(cells);
    let mut cell = 0;
    for &theta in thetas {
        for &alpha in alphas {
            for &q in qs {
                let est = |j: usize| estimate(sum[j], sq[j], cfg.paths, cfg.seed);
                res.push(if grid {
                    ResolventEstimate {
                        theta,
                        alpha,
                        q,
                        estimate: est(3 * cell),
                        refined: Some(est(3 * cell + 1)),
                        step_difference: Some(est(3 * cell + 2)),
                    }
                } else {
                    ResolventEstimate { theta, alpha, q, estimate: est(cell), refined: None, step_difference: None }
                });
                cell += 1;
            }
        }
    }
    Ok(res)
}

/// E_x[e^{-alpha X(e_q)}; tau^theta > e_q] at the configured step.
pub fn mc_resolvent(cfg: &SimConfig, alpha: f64, q: f64) -> Result<McEstimate> {
    Ok(mc_resolvent_grid(cfg, &[cfg.theta], &[alpha], &[q])?[0].estimate)
}

/// P(tau^theta > t) at each of `times`, all from the same paths.
pub fn mc_survival_curve(cfg: &SimConfig, times: &[f64]) -> Result<Vec<McEstimate>> {
    cfg.validate()?;
    if times.iter().any(|&t| !(t >= 0.0) || t > cfg.horizon) {
        return Err(Error::Config("survival times must lie in [0, horizon]".into()));
    }
    let (sorted, pos) = sort_times(times);
    let thetas = [cfg.theta];
    let (sum, sq) = accumulate(cfg.paths, times.len(), |p| {
        let tr = run_path(cfg, p, &Plan { thetas: &thetas, times: &sorted, track_after_ruin: false });
        Ok(pos.iter().map(|&i| if tr.alive[i] { 1.0 } else { 0.0 }).collect())
    })?;
    Ok((0..times.len()).map(|j| estimate(sum[j], sq[j], cfg.paths, cfg.seed)).collect())
}

pub fn mc_survival(cfg: &SimConfig, t: f64) -> Result<McEstimate> {
    Ok(mc_survival_curve(cfg, &[t])?[0])
}

/// Survivor count and per-path weights `1{alive} f(X_t)` for the given functions.
fn conditional_sums<F>(cfg: &SimConfig, t: f64, width: usize, f: F) -> Result<(f64, Vec<f64>, Vec<f64>)>
where
    F: Fn(f64) -> Vec<f64> + Sync,
{
    cfg.validate()?;
    if !(t > 0.0) || t > cfg.horizon {
        return Err(Error::Config(format!("t = {t} must lie in (0, horizon]")));
    }
    let thetas = [cfg.theta];
    let times = [t];
    let (sum, sq) = accumulate(cfg.paths, width + 1, |p| {
        let tr = run_path(cfg, p, &Plan { thetas: &thetas, times: &times, track_after_ruin: false });
        let mut out = vec![0.0; width + 1];
        if tr.alive[0] {
            out[0] = 1.0;
            for (j, v) in f(tr.x[0]).into_iter().enumerate() {
                out[j + 1] = v;
            }
        }
        Ok(out)
    })?;
    let alive = sum[0];
    if alive < 1.0 {
        return Err(Error::InsufficientSurvivors { t, paths: cfg.paths });
    }
    Ok((alive, sum[1..].to_vec(), sq[1..].to_vec()))
}

/// E[e^{-alpha X_t} | tau^theta > t] by the ratio estimator with delta-method errors.
pub fn mc_conditional_moments(cfg: &SimConfig, t: f64, alphas: &[f64]) -> Result<Vec<McEstimate>> {
    let (alive, sum, sq) = conditional_sums(cfg, t, alphas.len(), |x| alphas.iter().map(|a| (-a * x).exp()).collect())?;
    Ok((0..alphas.len())
        .map(|j| {
            let r = sum[j] / alive;
            let dev = (sq[j] - 2.0 * r * sum[j] + r * r * alive).max(0.0);
            McEstimate { mean: r, stderr: dev.sqrt() / alive, n: alive as usize, seed: cfg.seed }
        })
        .collect())
}

/// Histogram density of X_t given survival, on bins `edges[i]..edges[i+1]`.
/// Returns the survivor count alongside one estimate per bin.
pub fn mc_conditional_histogram(cfg: &SimConfig, t: f64, edges: &[f64]) -> Result<(usize, Vec<McEstimate>)> {
    if edges.len() < 2 || edges.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::Config("histogram edges must be increasing".into()));
    }
    let bins = edges.len() - 1;
    let (alive, sum, _) = conditional_sums(cfg, t, bins, |x| {
        let mut v = vec![0.0; bins];
        if x >= edges[0] && x < edges[bins] {
            let i = edges.partition_point(|&e| e <= x) - 1;
            v[i] = 1.0;
        }
        v
    })?;
    let est = (0..bins)
        .map(|j| {
            let width = edges[j + 1] - edges[j];
            let p = sum[j] / alive;
            McEstimate {
                mean: p / width,
                stderr: (p * (1.0 - p) / alive).sqrt() / width,
                n: alive as usize,
                seed: cfg.seed,
            }
        })
        .collect();
    Ok((alive as usize, est))
}

/// P(sup_{s <= e_q} Y_s <= z) for the spectrally positive member Y of the dual pair.
/// Brownian suprema are read off the grid and are biased low.
pub fn mc_sup_at_exponential(cfg: &SimConfig, q: f64, z_grid: &[f64]) -> Result<Vec<McEstimate>> {
    cfg.validate()?;
    check_horizon(cfg, q)?;
    let (sum, sq) = accumulate(cfg.paths, z_grid.len(), |p| {
        let times = killing_times(cfg, p, &[q]);
        let tr = run_path(cfg, p, &Plan { thetas: &[], times: &times, track_after_ruin: true });
        // measured from the starting point
        let y0 = if cfg.model.orientation() == Orientation::SpectrallyNegative { -cfg.x0 } else { cfg.x0 };
        let sup = tr.sup[0] - y0;
        Ok(z_grid.iter().map(|&z| if sup <= z { 1.0 } else { 0.0 }).collect())
    })?;
    Ok((0..z_grid.len()).map(|j| estimate(sum[j], sq[j], cfg.paths, cfg.seed)).collect())
}
