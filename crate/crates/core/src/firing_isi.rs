//! Firing mechanism of the FHN model and the interspike-interval statistics it induces.
//!
//! Pipeline: conditional firing probabilities on the probe line below the rest state,
//! a sigmoid regression on those estimates, its image in normal-form distance, the
//! resulting hazard rate on the radial LIF state, and ISI densities from that hazard
//! compared against first-spike times of the full model.

use std::f64::consts::{PI, TAU};
use std::io::{self, Write};
use std::ops::ControlFlow;

use serde::{Deserialize, Serialize};

use crate::ensemble::map_trials;
use crate::error::{invalid, Error, Result};
use crate::fhn_model::FhnParams;
use crate::lif_reduction::{polar_radial_model, radial_ou_model, LifModel};
use crate::linearization::{normal_form, NormalForm};
use crate::output::fmt17;
use crate::sde_engine::{
    derive_seed, drive, first_passage_streamed, interpolate_crossing, Detector, Event, EventKind, NoiseStream,
    SdeSystem, Trajectory, DEFAULT_DT,
};
use crate::stats::{cumulative_trapezoid, interp, ks_against_cdf, mean, std_error, trapezoid};

/// `w` coordinate where the probe line meets the separatrix.
pub const SEPARATRIX_W: f64 = -0.453;
pub const N_PROBE_POINTS: usize = 35;
pub const DEFAULT_TRIALS: u64 = 1000;
/// Deterministic periods allowed for the first cycle before a trial is abandoned.
pub const CYCLE_CAP_PERIODS: f64 = 3.0;

/// Starting points `L_i = (v_e, w_e − iδ)` on the probe line.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FiringProbeGrid {
    pub x_e: [f64; 2],
    pub delta: f64,
    pub n_points: usize,
    pub trials_per_point: u64,
    pub dt: f64,
}

impl FiringProbeGrid {
    pub fn new(params: &FhnParams) -> Result<Self> {
        let fp = params.fixed_point()?;
        Ok(FiringProbeGrid {
            x_e: fp.state(),
            delta: (fp.w_e - SEPARATRIX_W).abs() / 20.0,
            n_points: N_PROBE_POINTS,
            trials_per_point: DEFAULT_TRIALS,
            dt: DEFAULT_DT,
        })
    }

    pub fn with_trials(mut self, trials: u64) -> Self {
        self.trials_per_point = trials;
        self
    }

    pub fn distance(&self, i: usize) -> f64 {
        i as f64 * self.delta
    }

    pub fn point(&self, i: usize) -> [f64; 2] {
        [self.x_e[0], self.x_e[1] - self.distance(i)]
    }
}

/// First upward crossing of `v = 0` along a stored trajectory.
pub fn detect_spike(tr: &Trajectory<2>) -> Option<Event<2>> {
    let dt = tr.dt;
    tr.states.windows(2).enumerate().find_map(|(k, w)| {
        if w[0][0] < 0.0 && w[1][0] >= 0.0 {
            let t = tr.time(k + 1);
            let (time, state) = interpolate_crossing(w[0][0], w[1][0], t, dt, &w[0], &w[1]);
            Some(Event {
                kind: EventKind::Spike,
                time,
                state,
                step: k + 1,
                detector: 0,
            })
        } else {
            None
        }
    })
}

/// Spike detector for [`crate::sde_engine::integrate`].
pub fn spike_detector<'a>() -> Detector<'a, 2> {
    Detector::new(EventKind::Spike, |x: &[f64; 2]| x[0])
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CycleOutcome {
    Spike,
    /// Returned around the rest state without firing.
    Quiet,
    /// Neither fired nor completed a turn before the cap.
    Capped,
}

/// Runs one probe trial from `x0`: stops at the first spike or when the winding angle
/// of `x − x_e` has advanced a full turn in the direction `sign(rotation)`.
pub fn first_cycle_trial<S: SdeSystem<2>>(
    sys: &S,
    x_e: [f64; 2],
    x0: [f64; 2],
    rotation: f64,
    dt: f64,
    cap_steps: usize,
    noise: impl IntoIterator<Item = f64>,
) -> Result<CycleOutcome> {
    let angle = |x: &[f64; 2]| (x[1] - x_e[1]).atan2(x[0] - x_e[0]);
    let mut last = angle(&x0);
    let mut wound = 0.0;
    let mut outcome = CycleOutcome::Capped;
    drive(sys, x0, 0.0, dt, noise.into_iter().take(cap_steps), |_, _, prev, next| {
        if prev[0] < 0.0 && next[0] >= 0.0 {
            outcome = CycleOutcome::Spike;
            return ControlFlow::Break(());
        }
        let a = angle(next);
        let mut d = a - last;
        if d > PI {
            d -= TAU;
        } else if d <= -PI {
            d += TAU;
        }
        wound += d;
        last = a;
        if wound * rotation >= TAU {
            outcome = CycleOutcome::Quiet;
            return ControlFlow::Break(());
        }
        ControlFlow::Continue(())
    })?;
    Ok(outcome)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FiringRow {
    pub i: usize,
    pub l_i: f64,
    pub p_hat: f64,
    pub se: f64,
    pub spikes: u64,
    pub capped: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FiringTable {
    pub sigma0: f64,
    pub trials_per_point: u64,
    pub rows: Vec<FiringRow>,
}

impl FiringTable {
    pub fn distances(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.l_i).collect()
    }

    pub fn probabilities(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.p_hat).collect()
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "sigma0,i,l_i,p_hat,se")?;
        for r in &self.rows {
            writeln!(w, "{},{},{},{},{}", fmt17(self.sigma0), r.i, fmt17(r.l_i), fmt17(r.p_hat), fmt17(r.se))?;
        }
        Ok(())
    }
}

/// Binomial standard error `√(p(1−p)/n)`.
pub fn binomial_se(p: f64, n: u64) -> f64 {
    (p * (1.0 - p) / n as f64).sqrt()
}

/// Estimates the conditional firing probability at every probe point. Trial `j` at
/// point `i` uses noise stream `i·trials + j` of `seed`.
pub fn estimate_firing_prob(params: &FhnParams, grid: &FiringProbeGrid, seed: u64) -> Result<FiringTable> {
    params.validate()?;
    if !(params.noise.sigma0 > 0.0) {
        return Err(invalid("firing probabilities need sigma0 > 0"));
    }
    if grid.trials_per_point == 0 {
        return Err(invalid("trials_per_point must be positive"));
    }
    let fp = params.fixed_point()?;
    let (_, nu) = fp.focus_or_err()?;
    let rotation = fp.jacobian.get(1, 0).signum();
    let cap_steps = (CYCLE_CAP_PERIODS * TAU / nu / grid.dt).ceil() as usize;
    let sys = params.system();
    let n = grid.trials_per_point;
    let total = grid.n_points as u64 * n;
    let outcomes: Vec<Result<CycleOutcome>> = map_trials(total, |id| {
        let x0 = grid.point((id / n) as usize);
        let noise = NoiseStream::new(seed, id, grid.dt)?;
        first_cycle_trial(&sys, grid.x_e, x0, rotation, grid.dt, cap_steps, noise)
    });
    let mut rows = Vec::with_capacity(grid.n_points);
    for (i, chunk) in outcomes.chunks(n as usize).enumerate() {
        let mut spikes = 0;
        let mut capped = 0;
        for o in chunk {
            match o.clone()? {
                CycleOutcome::Spike => spikes += 1,
                CycleOutcome::Capped => capped += 1,
                CycleOutcome::Quiet => {}
            }
        }
        let p_hat = spikes as f64 / n as f64;
        rows.push(FiringRow {
            i,
            l_i: grid.distance(i),
            p_hat,
            se: binomial_se(p_hat, n),
            spikes,
            capped,
        });
    }
    Ok(FiringTable {
        sigma0: params.noise.sigma0,
        trials_per_point: n,
        rows,
    })
}

/// `p(l) = 1/(1 + e^{(a−l)/b})`.
#[inline]
pub fn sigmoid(a: f64, b: f64, l: f64) -> f64 {
    1.0 / (1.0 + ((a - l) / b).exp())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SigmoidFit {
    pub sigma0: f64,
    pub a: f64,
    pub b: f64,
    pub a_star: f64,
    pub b_star: f64,
    pub residual: f64,
    pub iterations: usize,
}

impl SigmoidFit {
    pub fn probability(&self, l: f64) -> f64 {
        sigmoid(self.a, self.b, l)
    }
}

const FIT_MAX_ITER: usize = 200;
const FIT_STEP_TOL: f64 = 1e-10;

pub fn fit_sigmoid(table: &FiringTable) -> Result<SigmoidFit> {
    let mut fit = fit_sigmoid_points(&table.distances(), &table.probabilities())?;
    fit.sigma0 = table.sigma0;
    Ok(fit)
}

fn sum_sq(ls: &[f64], ps: &[f64], a: f64, b: f64) -> f64 {
    ls.iter().zip(ps).map(|(&l, &p)| (p - sigmoid(a, b, l)).powi(2)).sum()
}

/// Levenberg-Marquardt least squares for `(a, b)`, unweighted. `a_star`/`b_star` are
/// left at zero until [`transform_fit`].
pub fn fit_sigmoid_points(ls: &[f64], ps: &[f64]) -> Result<SigmoidFit> {
    if ls.len() != ps.len() || ls.len() < 2 {
        return Err(invalid("need at least two (l, p) pairs of equal length"));
    }
    if ps.iter().all(|&p| p <= 0.0) || ps.iter().all(|&p| p >= 1.0) {
        return Err(Error::FitFailure("all probabilities are 0 or all are 1".into()));
    }
    let (mut a, mut b) = initial_guess(ls, ps);
    let mut ssr = sum_sq(ls, ps, a, b);
    let mut lambda = 1e-3;
    let mut iterations = 0;
    while iterations < FIT_MAX_ITER {
        iterations += 1;
        let (mut jtj, mut jtr) = ([[0.0; 2]; 2], [0.0; 2]);
        for (&l, &p) in ls.iter().zip(ps) {
            let m = sigmoid(a, b, l);
            let s = m * (1.0 - m);
            let g = [-s / b, s * (a - l) / (b * b)];
            let r = p - m;
            for i in 0..2 {
                jtr[i] += g[i] * r;
                for j in 0..2 {
                    jtj[i][j] += g[i] * g[j];
                }
            }
        }
        let mut accepted = None;
        while lambda < 1e16 {
            let m11 = jtj[0][0] * (1.0 + lambda);
            let m22 = jtj[1][1] * (1.0 + lambda);
            let det = m11 * m22 - jtj[0][1] * jtj[1][0];
            if det.abs() > 0.0 && det.is_finite() {
                let da = (m22 * jtr[0] - jtj[0][1] * jtr[1]) / det;
                let db = (m11 * jtr[1] - jtj[1][0] * jtr[0]) / det;
                let (na, nb) = (a + da, b + db);
                if nb > 0.0 {
                    let new_ssr = sum_sq(ls, ps, na, nb);
                    if new_ssr <= ssr {
                        accepted = Some((na, nb, new_ssr, da.hypot(db)));
                        break;
                    }
                }
            }
            lambda *= 10.0;
        }
        match accepted {
            Some((na, nb, new_ssr, step_norm)) => {
                a = na;
                b = nb;
                ssr = new_ssr;
                lambda = (lambda / 10.0).max(1e-12);
                if step_norm < FIT_STEP_TOL {
                    break;
                }
            }
            None => break,
        }
    }
    if !(a.is_finite() && b.is_finite() && b > 0.0) {
        return Err(Error::FitFailure(format!("diverged at a={a}, b={b}")));
    }
    Ok(SigmoidFit {
        sigma0: f64::NAN,
        a,
        b,
        a_star: 0.0,
        b_star: 0.0,
        residual: ssr,
        iterations,
    })
}

/// Distance where the piecewise-linear interpolant of `ps` first reaches `level`.
fn level_crossing(ls: &[f64], ps: &[f64], level: f64) -> Option<f64> {
    ls.windows(2).zip(ps.windows(2)).find_map(|(l, p)| {
        if p[0] < level && p[1] >= level {
            Some(l[0] + (level - p[0]) / (p[1] - p[0]) * (l[1] - l[0]))
        } else {
            None
        }
    })
}

fn initial_guess(ls: &[f64], ps: &[f64]) -> (f64, f64) {
    let span = ls.iter().cloned().fold(f64::NEG_INFINITY, f64::max) - ls.iter().cloned().fold(f64::INFINITY, f64::min);
    let a = level_crossing(ls, ps, 0.5).unwrap_or_else(|| mean(ls));
    let spread = match (level_crossing(ls, ps, 0.25), level_crossing(ls, ps, 0.75)) {
        (Some(lo), Some(hi)) if hi > lo => (hi - lo) / (2.0 * 3f64.ln()),
        _ => 0.0,
    };
    let floor = span / (4.0 * ls.len() as f64);
    (a, spread.max(floor).max(f64::MIN_POSITIVE))
}

/// Rescales `(a, b)` into normal-form distance.
pub fn transform_fit(fit: &SigmoidFit, nf: &NormalForm) -> SigmoidFit {
    let s = nf.distance_scale();
    SigmoidFit {
        a_star: s * fit.a,
        b_star: s * fit.b,
        ..*fit
    }
}

/// Hazard `α(r) = (ν/2π)·p*(r)` on the radial state.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Hazard {
    pub nu: f64,
    pub a_star: f64,
    pub b_star: f64,
}

impl Hazard {
    pub fn new(fit: &SigmoidFit, nu: f64) -> Self {
        Hazard {
            nu,
            a_star: fit.a_star,
            b_star: fit.b_star,
        }
    }

    #[inline]
    pub fn rate(&self, r: f64) -> f64 {
        self.nu / TAU * sigmoid(self.a_star, self.b_star, r)
    }
}

pub fn hazard_rate(fit: &SigmoidFit, nu: f64, r: f64) -> f64 {
    Hazard::new(fit, nu).rate(r)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IsiDensityConfig {
    pub t_grid: Vec<f64>,
    /// Monte Carlo paths.
    pub m: u64,
    /// Trapezoid panels per evaluation time.
    pub n: usize,
    pub seed: u64,
    pub dt: f64,
}

impl IsiDensityConfig {
    /// `points` equispaced times on `[0, t_end]`.
    pub fn uniform(t_end: f64, points: usize, m: u64, n: usize, seed: u64) -> Self {
        let t_grid = (0..points).map(|k| t_end * k as f64 / (points - 1) as f64).collect();
        IsiDensityConfig {
            t_grid,
            m,
            n,
            seed,
            dt: DEFAULT_DT,
        }
    }

    pub fn default_grid(m: u64, n: usize, seed: u64) -> Self {
        Self::uniform(3000.0, 150, m, n, seed)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IsiDensity {
    pub t: Vec<f64>,
    pub g: Vec<f64>,
    pub se: Vec<f64>,
    pub m: u64,
    pub n: usize,
}

impl IsiDensity {
    pub fn mass(&self) -> f64 {
        trapezoid(&self.t, &self.g)
    }

    pub fn cdf(&self) -> Vec<f64> {
        cumulative_trapezoid(&self.t, &self.g)
    }

    /// Integrated CDF at `t` (linear between grid points, clamped outside).
    pub fn cdf_at(&self, t: f64) -> f64 {
        interp(&self.t, &self.cdf(), t)
    }

    pub fn mean_time(&self) -> f64 {
        let tg: Vec<f64> = self.t.iter().zip(&self.g).map(|(t, g)| t * g).collect();
        trapezoid(&self.t, &tg) / self.mass()
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "t,g_t,se")?;
        for k in 0..self.t.len() {
            writeln!(w, "{},{},{}", fmt17(self.t[k]), fmt17(self.g[k]), fmt17(self.se[k]))?;
        }
        Ok(())
    }
}

/// Monte Carlo estimate of the first-firing density
/// `g(t) = E[α(R_t)·exp(−∫₀ᵗ α(R_s) ds)]`, with the integral replaced by an
/// `n`-panel trapezoid rule on `{it/n}`. Radial paths start at the model's reset state.
pub fn isi_density(lif: &LifModel, hazard: &Hazard, cfg: &IsiDensityConfig) -> Result<IsiDensity> {
    if cfg.m < 2 || cfg.n < 1 {
        return Err(invalid("need m >= 2 paths and n >= 1 panels"));
    }
    if cfg.t_grid.is_empty() || cfg.t_grid.iter().any(|t| !(*t >= 0.0)) {
        return Err(invalid("time grid must be non-empty and non-negative"));
    }
    let n = cfg.n;
    // Query times t_j·i/n in increasing order, tagged with (j, i).
    let mut queries: Vec<(f64, usize, usize)> = Vec::with_capacity(cfg.t_grid.len() * (n + 1));
    for (j, &t) in cfg.t_grid.iter().enumerate() {
        for i in 0..=n {
            queries.push((t * i as f64 / n as f64, j, i));
        }
    }
    queries.sort_by(|x, y| x.0.total_cmp(&y.0));
    let t_end = queries.last().map(|q| q.0).unwrap_or(0.0);
    let n_steps = (t_end / cfg.dt).ceil() as usize;
    let sys = lif.system(cfg.dt);
    let n_t = cfg.t_grid.len();

    let per_path: Vec<Result<Vec<f64>>> = map_trials(cfg.m, |path_id| {
        let mut alpha = vec![0.0; n_t * (n + 1)];
        let mut q = 0;
        let r0 = lif.reset_state;
        while q < queries.len() && queries[q].0 <= 0.0 {
            alpha[queries[q].1 * (n + 1) + queries[q].2] = hazard.rate(r0);
            q += 1;
        }
        let noise = NoiseStream::new(cfg.seed, path_id, cfg.dt)?;
        drive(&sys, [r0], 0.0, cfg.dt, noise.take(n_steps), |_, t, prev, next| {
            while q < queries.len() && queries[q].0 <= t {
                let frac = 1.0 - (t - queries[q].0) / cfg.dt;
                let r = prev[0] + frac.clamp(0.0, 1.0) * (next[0] - prev[0]);
                alpha[queries[q].1 * (n + 1) + queries[q].2] = hazard.rate(r);
                q += 1;
            }
            if q == queries.len() {
                ControlFlow::Break(())
            } else {
                ControlFlow::Continue(())
            }
        })?;
        let mut g = Vec::with_capacity(n_t);
        for (j, &t) in cfg.t_grid.iter().enumerate() {
            let row = &alpha[j * (n + 1)..(j + 1) * (n + 1)];
            let integral: f64 = row.windows(2).map(|w| 0.5 * (w[0] + w[1])).sum::<f64>() * t / n as f64;
            g.push(row[n] * (-integral).exp());
        }
        Ok(g)
    });
    let mut samples = vec![Vec::with_capacity(cfg.m as usize); n_t];
    for g in per_path {
        for (j, v) in g?.into_iter().enumerate() {
            samples[j].push(v);
        }
    }
    Ok(IsiDensity {
        t: cfg.t_grid.clone(),
        g: samples.iter().map(|s| mean(s)).collect(),
        se: samples.iter().map(|s| std_error(s)).collect(),
        m: cfg.m,
        n,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IsiSampleConfig {
    pub n_spikes: u64,
    pub seed: u64,
    pub dt: f64,
    pub t_max: f64,
}

impl IsiSampleConfig {
    pub fn new(n_spikes: u64, seed: u64) -> Self {
        IsiSampleConfig {
            n_spikes,
            seed,
            dt: DEFAULT_DT,
            t_max: 1e5,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IsiSample {
    /// Onset of the firing cycle: last passage through the probe line before the spike,
    /// or the reset time when the first cycle already fires.
    pub isis: Vec<f64>,
    /// Upward crossing of `v = 0` on the same paths.
    pub spike_times: Vec<f64>,
    pub censored: u64,
    pub t_max: f64,
}

impl IsiSample {
    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "isi,spike_time")?;
        for (x, s) in self.isis.iter().zip(&self.spike_times) {
            writeln!(w, "{},{}", fmt17(*x), fmt17(*s))?;
        }
        Ok(())
    }
}

/// Firing times of the FHN model restarted at the rest state after each spike.
/// Every interval uses its own noise stream, so the reset makes the intervals i.i.d.
pub fn isi_histogram(params: &FhnParams, cfg: &IsiSampleConfig) -> Result<IsiSample> {
    params.validate()?;
    if !(cfg.t_max > 0.0) {
        return Err(invalid("t_max must be positive"));
    }
    let x_e = params.fixed_point()?.state();
    let sys = params.system();
    let n_steps = (cfg.t_max / cfg.dt).ceil() as usize;
    let dt = cfg.dt;
    let trial = |id: u64| -> Result<Option<(f64, f64)>> {
        let noise = NoiseStream::new(cfg.seed, id, dt)?;
        let mut onset = 0.0;
        let mut hit = None;
        drive(&sys, x_e, 0.0, dt, noise.take(n_steps), |_, t, prev, next| {
            let (fp, fnx) = (prev[0] - x_e[0], next[0] - x_e[0]);
            if fp < 0.0 && fnx >= 0.0 {
                let (tc, xc) = interpolate_crossing(fp, fnx, t, dt, prev, next);
                if xc[1] < x_e[1] {
                    onset = tc;
                }
            }
            if prev[0] < 0.0 && next[0] >= 0.0 {
                hit = Some((onset, interpolate_crossing(prev[0], next[0], t, dt, prev, next).0));
                return ControlFlow::Break(());
            }
            ControlFlow::Continue(())
        })?;
        Ok(hit)
    };
    // Without noise every interval is the same deterministic run.
    let outcomes: Vec<Result<Option<(f64, f64)>>> = if params.noise.sigma0 == 0.0 {
        let once = trial(0)?;
        (0..cfg.n_spikes).map(|_| Ok(once)).collect()
    } else {
        map_trials(cfg.n_spikes, trial)
    };
    let mut isis = Vec::new();
    let mut spike_times = Vec::new();
    let mut censored = 0;
    for o in outcomes {
        match o? {
            Some((onset, spike)) => {
                isis.push(onset);
                spike_times.push(spike);
            }
            None => censored += 1,
        }
    }
    Ok(IsiSample {
        isis,
        spike_times,
        censored,
        t_max: cfg.t_max,
    })
}

/// KS distance between an ISI sample and the integrated CDF of a model density.
pub fn ks_sample_vs_density(sample: &[f64], density: &IsiDensity) -> f64 {
    let cdf = density.cdf();
    ks_against_cdf(sample, |t| interp(&density.t, &cdf, t))
}

/// Sup distance between the integrated CDFs of two densities on a shared grid.
pub fn ks_between_densities(d1: &IsiDensity, d2: &IsiDensity) -> Result<f64> {
    if d1.t != d2.t {
        return Err(invalid("densities are on different time grids"));
    }
    Ok(d1
        .cdf()
        .iter()
        .zip(d2.cdf())
        .fold(0.0f64, |m, (a, b)| m.max((a - b).abs())))
}

/// Empirical and model ISI laws side by side.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IsiResult {
    pub empirical_isis: Vec<f64>,
    pub censored: u64,
    pub density: IsiDensity,
    pub ks_distance: f64,
}

impl IsiResult {
    pub fn new(sample: IsiSample, density: IsiDensity) -> Self {
        let ks_distance = ks_sample_vs_density(&sample.isis, &density);
        IsiResult {
            empirical_isis: sample.isis,
            censored: sample.censored,
            density,
            ks_distance,
        }
    }
}

/// Knobs for the full ISI comparison: firing fit, both model densities, empirical sample.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IsiExperimentConfig {
    pub firing_trials: u64,
    pub m: u64,
    pub n: usize,
    pub t_end: f64,
    pub points: usize,
    pub n_spikes: u64,
    pub seed: u64,
    pub dt: f64,
}

impl Default for IsiExperimentConfig {
    fn default() -> Self {
        IsiExperimentConfig {
            firing_trials: DEFAULT_TRIALS,
            m: 1000,
            n: 10,
            t_end: 3000.0,
            points: 150,
            n_spikes: 1000,
            seed: 0,
            dt: DEFAULT_DT,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IsiComparison {
    pub fit: SigmoidFit,
    pub radial_ou: IsiDensity,
    pub polar_radial: IsiDensity,
    pub sample: IsiSample,
    pub ks_sample_radial_ou: f64,
    pub ks_sample_polar_radial: f64,
    pub ks_models: f64,
    /// Same statistic against `v = 0` crossing times instead of cycle onsets.
    pub ks_spike_time_radial_ou: f64,
}

impl IsiComparison {
    pub fn max_ks(&self) -> f64 {
        self.ks_sample_radial_ou.max(self.ks_sample_polar_radial).max(self.ks_models)
    }
}

/// Fits the firing sigmoid at the params' σ₀, turns it into a hazard, and compares
/// both LIF densities with first-spike times of the FHN model restarted at rest.
pub fn isi_experiment(params: &FhnParams, cfg: &IsiExperimentConfig) -> Result<IsiComparison> {
    let nf = normal_form(params)?;
    let grid = FiringProbeGrid::new(params)?.with_trials(cfg.firing_trials);
    let grid = FiringProbeGrid { dt: cfg.dt, ..grid };
    let table = estimate_firing_prob(params, &grid, derive_seed(cfg.seed, 1))?;
    let fit = transform_fit(&fit_sigmoid(&table)?, &nf);
    let hazard = Hazard::new(&fit, nf.nu);
    let dcfg = IsiDensityConfig {
        dt: cfg.dt,
        ..IsiDensityConfig::uniform(cfg.t_end, cfg.points, cfg.m, cfg.n, derive_seed(cfg.seed, 2))
    };
    let radial_ou = isi_density(&radial_ou_model(params)?, &hazard, &dcfg)?;
    let polar_radial = isi_density(&polar_radial_model(params)?, &hazard, &dcfg)?;
    let scfg = IsiSampleConfig {
        dt: cfg.dt,
        ..IsiSampleConfig::new(cfg.n_spikes, derive_seed(cfg.seed, 3))
    };
    let sample = isi_histogram(params, &scfg)?;
    Ok(IsiComparison {
        fit,
        ks_sample_radial_ou: ks_sample_vs_density(&sample.isis, &radial_ou),
        ks_sample_polar_radial: ks_sample_vs_density(&sample.isis, &polar_radial),
        ks_models: ks_between_densities(&radial_ou, &polar_radial)?,
        ks_spike_time_radial_ou: ks_sample_vs_density(&sample.spike_times, &radial_ou),
        radial_ou,
        polar_radial,
        sample,
    })
}

/// First-passage times of a radial LIF model from its reset state to `threshold`.
pub fn lif_first_passage_times(
    lif: &LifModel,
    threshold: f64,
    n_trials: u64,
    seed: u64,
    dt: f64,
    t_max: f64,
) -> Result<Vec<Option<f64>>> {
    let sys = lif.system(dt);
    let n_steps = (t_max / dt).ceil() as usize;
    map_trials(n_trials, |id| {
        let noise = NoiseStream::new(seed, id, dt)?;
        let hit = first_passage_streamed(&sys, [lif.reset_state], 0.0, dt, noise.take(n_steps), |x| x[0] - threshold)?;
        Ok(hit.map(|e| e.time))
    })
    .into_iter()
    .collect()
}
