//! Numerical experiments around the random pullback attractor of the stochastic FHN model.
//!
//! Additive noise is removed by subtracting the stationary OU process
//! `η = (0, σ₀z)`, leaving the random ODE `Ẏ = F(Y + η) + η` whose squared norm is
//! dominated by `Ṙ = 2a + ‖F(η) + η‖²/b − bR`. Multiplicative noise is removed by
//! the conjugacy `Y = diag(1, e^{−σ₀z})·X`.

use std::ops::ControlFlow;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::ensemble::map_trials;
use crate::error::{invalid, Error, Result};
use crate::fhn_model::{FhnParams, NoiseKind, NoiseSpec};
use crate::linalg::{add2, norm2, sub2};
use crate::sde_engine::{
    derive_seed, drive, integrate, BrownianPath, FnSystem, Interpretation, BLOWUP_NORM, DEFAULT_DT,
};
use crate::stats::{batch_means_se, mean, median};

/// Grid offset of a path start, as an integer number of steps from time zero.
fn grid_index(t: f64, dt: f64) -> Result<i64> {
    let k = t / dt;
    let r = k.round();
    if (k - r).abs() > 1e-6 {
        return Err(invalid(format!("time {t} is off the grid of step {dt}")));
    }
    Ok(r as i64)
}

/// Wiener shift `θ_s`: the same increments read from time `s` onward, so the new path
/// at time `u` carries the original increment at `u + s`. Start times are tracked as
/// integer grid offsets, which makes `θ_a∘θ_b = θ_{a+b}` exact.
pub fn wiener_shift(path: &BrownianPath, s: f64) -> Result<BrownianPath> {
    let k0 = grid_index(path.t0, path.dt)?;
    let ks = grid_index(s, path.dt)?;
    Ok(BrownianPath {
        t0: (k0 - ks) as f64 * path.dt,
        ..path.clone()
    })
}

/// Discretized solution of `dz = −κz dt + dB` started at 0, `burn_in` time units before
/// `t0`, on the grid of the driving path.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StationaryOu {
    pub t0: f64,
    pub dt: f64,
    pub values: Vec<f64>,
    pub burn_in: f64,
    pub rate: f64,
}

impl StationaryOu {
    /// Runs the OU equation along `path`, discarding the first `burn_in` time units.
    pub fn along(path: &BrownianPath, burn_in: f64, rate: f64) -> Result<StationaryOu> {
        let kb = (burn_in / path.dt).round() as usize;
        if kb > path.n_steps() {
            return Err(invalid("burn-in is longer than the path"));
        }
        let ou = FnSystem::new(move |x: &[f64; 1], _| [-rate * x[0]], |_: &[f64; 1], _| [1.0], Interpretation::Stratonovich);
        let mut values = Vec::with_capacity(path.n_steps() + 1 - kb);
        if kb == 0 {
            values.push(0.0);
        }
        drive(&ou, [0.0], path.t0, path.dt, path.increments.iter().copied(), |k, _, _, next| {
            if k >= kb {
                values.push(next[0]);
            }
            ControlFlow::Continue(())
        })?;
        Ok(StationaryOu {
            t0: path.time(kb),
            dt: path.dt,
            values,
            burn_in: kb as f64 * path.dt,
            rate,
        })
    }

    /// Unit-rate OU over `[t_start, t_start + duration]` with burn-in `10/rate`,
    /// generated from its own stream.
    pub fn generate(seed: u64, stream_id: u64, dt: f64, t_start: f64, duration: f64) -> Result<StationaryOu> {
        let burn = 10.0;
        let n = ((burn + duration) / dt).round() as usize;
        let path = BrownianPath::generate(seed, stream_id, dt, t_start - burn, n)?;
        Self::along(&path, burn, 1.0)
    }

    pub fn time(&self, k: usize) -> f64 {
        self.t0 + k as f64 * self.dt
    }
}

/// Cocycle defect `‖φ(t+s, ω)x₀ − φ(t, θ_sω)φ(s, ω)x₀‖` for the discrete flow.
pub fn cocycle_check(params: &FhnParams, x0: [f64; 2], path: &BrownianPath, t: f64, s: f64) -> Result<f64> {
    let sys = params.system();
    let ks = path.index_of(path.t0 + s).ok_or_else(|| invalid("s is off the path grid"))?;
    let kts = path.index_of(path.t0 + s + t).ok_or_else(|| invalid("t + s is off the path grid"))?;
    let run = |x: [f64; 2], increments: &[f64]| -> Result<[f64; 2]> {
        Ok(drive(&sys, x, 0.0, path.dt, increments.iter().copied(), |_, _, _, _| ControlFlow::Continue(()))?.state)
    };
    let whole = run(x0, &path.increments[..kts])?;
    let first = run(x0, &path.increments[..ks])?;
    let shifted = wiener_shift(path, s)?.window(path.t0, t)?;
    let second = run(first, &shifted.increments)?;
    Ok(norm2(&sub2(&whole, &second)))
}

/// `‖F(η) + η‖²` for `η = (0, σ₀z)`.
fn forcing(params: &FhnParams, sigma0_z: f64) -> f64 {
    let eta = [0.0, sigma0_z];
    let f = params.drift(&eta);
    let v = add2(&f, &eta);
    v[0] * v[0] + v[1] * v[1]
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AbsorptionRadius {
    pub r_star: f64,
    /// Bound on the neglected part `∫_{−∞}^{−T}` of the integral.
    pub tail_bound: f64,
    pub truncation: f64,
}

/// `R* = ∫_{−T}^0 [2a + ‖F(η_s) + η_s‖²/b] e^{bs} ds` by the trapezoid rule, with `z`
/// given on `[−T, 0]`.
pub fn absorption_radius_additive(params: &FhnParams, z: &StationaryOu) -> Result<AbsorptionRadius> {
    if params.noise.kind != NoiseKind::Additive {
        return Err(invalid("absorption radius R* is defined for additive noise"));
    }
    let d = params.dissipativity_constants()?;
    let (a, b) = (d.a, d.b);
    let s0 = params.noise.sigma0;
    let n = z.values.len();
    if n < 2 {
        return Err(invalid("need at least two samples of z"));
    }
    let t_end = z.time(n - 1);
    let mut integral = 0.0;
    let mut cap: f64 = 0.0;
    let mut prev = None;
    for (k, &zk) in z.values.iter().enumerate() {
        let g = 2.0 * a + forcing(params, s0 * zk) / b;
        cap = cap.max(g);
        let val = g * (b * (z.time(k) - t_end)).exp();
        if let Some(p) = prev {
            integral += 0.5 * (p + val) * z.dt;
        }
        prev = Some(val);
    }
    let truncation = t_end - z.t0;
    Ok(AbsorptionRadius {
        r_star: integral,
        tail_bound: (-b * truncation).exp() * cap / b,
        truncation,
    })
}

/// Closed form of `R*` without noise: `(2a + ‖F(0)‖²/b)/b`.
pub fn absorption_radius_deterministic(params: &FhnParams) -> Result<f64> {
    let d = params.dissipativity_constants()?;
    Ok((2.0 * d.a + forcing(params, 0.0) / d.b) / d.b)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AbsorptionCheck {
    pub n_paths: u64,
    /// Grid times with `‖Y‖² > R` for `R` started at `‖Y₀‖²`.
    pub comparison_violations: u64,
    /// Grid times with `‖Y‖² > 1.01·R*(θ_tω)` for starts inside the ball.
    pub invariance_violations: u64,
    /// Smallest `R − ‖Y‖²` seen along the comparison runs.
    pub min_margin: f64,
    pub mean_r_star: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AbsorptionConfig {
    pub n_paths: u64,
    pub seed: u64,
    pub dt: f64,
    pub horizon: f64,
    /// Truncation of the `R*` integral.
    pub t_burn: f64,
    /// Initial states are drawn uniformly from the disc of this radius around `η₀`,
    /// intersected with the absorbing ball.
    pub start_radius: f64,
}

impl Default for AbsorptionConfig {
    fn default() -> Self {
        AbsorptionConfig {
            n_paths: 100,
            seed: 0,
            dt: DEFAULT_DT,
            horizon: 100.0,
            t_burn: 500.0,
            start_radius: 3.0,
        }
    }
}

/// Pathwise comparison principle and forward invariance of the absorbing ball for the
/// additive random ODE `Ẏ = F(Y + η) + η`, integrated with Heun on the `η` grid.
pub fn absorption_check(params: &FhnParams, cfg: &AbsorptionConfig) -> Result<AbsorptionCheck> {
    if params.noise.kind != NoiseKind::Additive {
        return Err(invalid("absorption check needs additive noise"));
    }
    let d = params.dissipativity_constants()?;
    let (a, b) = (d.a, d.b);
    let s0 = params.noise.sigma0;
    let dt = cfg.dt;
    let n_steps = (cfg.horizon / dt).round() as usize;
    let g = |eta: f64, y: &[f64; 2]| -> [f64; 2] {
        let e = [0.0, eta];
        add2(&params.drift(&add2(y, &e)), &e)
    };
    let rate = |eta: f64, r: f64| 2.0 * a + forcing(params, eta) / b - b * r;
    let results: Vec<Result<(u64, u64, f64, f64)>> = map_trials(cfg.n_paths, |id| {
        let z = StationaryOu::generate(cfg.seed, id, dt, -cfg.t_burn, cfg.t_burn + cfg.horizon)?;
        let k0 = (cfg.t_burn / dt).round() as usize;
        let past = StationaryOu {
            values: z.values[..=k0].to_vec(),
            ..z.clone()
        };
        let r_star = absorption_radius_additive(params, &past)?.r_star;
        let mut pick = ChaCha8Rng::seed_from_u64(derive_seed(cfg.seed, 1));
        pick.set_stream(id);
        let (u, angle): (f64, f64) = (pick.gen(), std::f64::consts::TAU * pick.gen::<f64>());
        let rad = cfg.start_radius.min(r_star.sqrt()) * u.sqrt();
        let mut y = [rad * angle.cos(), rad * angle.sin()];
        let mut r_cmp = y[0] * y[0] + y[1] * y[1];
        let mut r_inv = r_star;
        let (mut cmp_viol, mut inv_viol, mut margin) = (0, 0, f64::INFINITY);
        for k in k0..k0 + n_steps {
            let (e0, e1) = (s0 * z.values[k], s0 * z.values[k + 1]);
            let f0 = g(e0, &y);
            let pred = [y[0] + dt * f0[0], y[1] + dt * f0[1]];
            let f1 = g(e1, &pred);
            y = [y[0] + 0.5 * dt * (f0[0] + f1[0]), y[1] + 0.5 * dt * (f0[1] + f1[1])];
            for r in [&mut r_cmp, &mut r_inv] {
                let k1 = rate(e0, *r);
                let k2 = rate(e1, *r + dt * k1);
                *r += 0.5 * dt * (k1 + k2);
            }
            let y2 = y[0] * y[0] + y[1] * y[1];
            if !y2.is_finite() {
                return Err(Error::BlowUp {
                    last_finite_step: k - k0,
                    time: (k - k0) as f64 * dt,
                });
            }
            margin = margin.min(r_cmp - y2);
            cmp_viol += (y2 > r_cmp) as u64;
            inv_viol += (y2 > 1.01 * r_inv) as u64;
        }
        Ok((cmp_viol, inv_viol, margin, r_star))
    });
    let mut out = AbsorptionCheck {
        n_paths: cfg.n_paths,
        comparison_violations: 0,
        invariance_violations: 0,
        min_margin: f64::INFINITY,
        mean_r_star: 0.0,
    };
    for r in results {
        let (c, i, m, rs) = r?;
        out.comparison_violations += c;
        out.invariance_violations += i;
        out.min_margin = out.min_margin.min(m);
        out.mean_r_star += rs / cfg.n_paths as f64;
    }
    Ok(out)
}

/// Right-hand side `G(z, Y)` of the random ODE obtained from multiplicative noise.
pub fn conjugate_rhs(params: &FhnParams, z: f64, y: &[f64; 2]) -> [f64; 2] {
    let s = params.noise.sigma0 * z;
    let (ep, em) = (s.exp(), (-s).exp());
    let (v, wb) = (y[0], y[1]);
    let eps = params.epsilon;
    [
        v - v * v * v / 3.0 - ep * wb + params.current,
        em * eps * v + (s - eps * params.beta) * wb + eps * params.alpha * em,
    ]
}

/// `T(z)x = (v, e^{−σ₀z}w)`.
pub fn conjugacy(sigma0: f64, z: f64, x: &[f64; 2]) -> [f64; 2] {
    [x[0], (-sigma0 * z).exp() * x[1]]
}

pub fn conjugacy_inverse(sigma0: f64, z: f64, y: &[f64; 2]) -> [f64; 2] {
    [y[0], (sigma0 * z).exp() * y[1]]
}

/// `q(z) = σ₀z − εβ/4`.
pub fn q_coefficient(params: &FhnParams, z: f64) -> f64 {
    params.noise.sigma0 * z - params.epsilon * params.beta / 4.0
}

/// State-free part of the norm inequality for the conjugated system.
pub fn p_coefficient(params: &FhnParams, z: f64) -> f64 {
    let s = params.noise.sigma0 * z;
    let (eps, beta) = (params.epsilon, params.beta);
    let eb = eps * beta;
    let bracket = 1.0 + (eps * (-s).exp() - s.exp()).powi(2) / (2.0 * eb) - s + eb / 2.0;
    3.0 * bracket * bracket
        + 4.0 / eb * (params.current.powi(2) + (eps * params.alpha).powi(2) * (-2.0 * s).exp())
}

/// Integrates the conjugated random ODE along `z` with Heun's method.
pub fn solve_conjugate(params: &FhnParams, z: &StationaryOu, x0: [f64; 2], n_steps: usize) -> Result<Vec<[f64; 2]>> {
    if n_steps + 1 > z.values.len() {
        return Err(invalid("z path is shorter than the requested horizon"));
    }
    let s0 = params.noise.sigma0;
    let dt = z.dt;
    let mut y = conjugacy(s0, z.values[0], &x0);
    let mut xs = Vec::with_capacity(n_steps + 1);
    xs.push(x0);
    for k in 0..n_steps {
        let f0 = conjugate_rhs(params, z.values[k], &y);
        let pred = [y[0] + dt * f0[0], y[1] + dt * f0[1]];
        let f1 = conjugate_rhs(params, z.values[k + 1], &pred);
        y = [y[0] + 0.5 * dt * (f0[0] + f1[0]), y[1] + 0.5 * dt * (f0[1] + f1[1])];
        let x = conjugacy_inverse(s0, z.values[k + 1], &y);
        if !(x[0].is_finite() && x[1].is_finite()) || norm2(&x) > BLOWUP_NORM {
            return Err(Error::BlowUp {
                last_finite_step: k,
                time: z.time(k),
            });
        }
        xs.push(x);
    }
    Ok(xs)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RoundTrip {
    pub dt: f64,
    pub sup_error: f64,
}

/// Sup-norm gap between the mapped-back random ODE solution and the direct Stratonovich
/// solution under one Brownian path, at step `dt` and at each of the `refinements`
/// successive halvings. The finest path is generated once and coarsened.
pub fn conjugacy_round_trip(
    params: &FhnParams,
    x0: [f64; 2],
    horizon: f64,
    dt: f64,
    refinements: usize,
    seed: u64,
) -> Result<Vec<RoundTrip>> {
    if params.noise.kind != NoiseKind::Multiplicative {
        return Err(invalid("round trip is defined for multiplicative noise"));
    }
    let burn = 10.0;
    let fine_dt = dt / (1usize << refinements) as f64;
    let n_fine = ((burn + horizon) / fine_dt).round() as usize;
    let fine = BrownianPath::generate(seed, 0, fine_dt, -burn, n_fine)?;
    let sys = params.system();
    let mut out = Vec::with_capacity(refinements + 1);
    for level in 0..=refinements {
        let factor = 1usize << (refinements - level);
        let path = fine.coarsen(factor)?;
        let h = path.dt;
        let z = StationaryOu::along(&path, burn, 1.0)?;
        let n = (horizon / h).round() as usize;
        let kb = (burn / h).round() as usize;
        let rde = solve_conjugate(params, &z, x0, n)?;
        let direct_path = BrownianPath {
            t0: 0.0,
            increments: path.increments[kb..kb + n].to_vec(),
            ..path.clone()
        };
        let direct = integrate(&sys, x0, &direct_path, &[])?;
        let sup = rde
            .iter()
            .zip(&direct.states)
            .fold(0.0f64, |m, (a, b)| m.max((a[0] - b[0]).abs().max((a[1] - b[1]).abs())));
        out.push(RoundTrip { dt: h, sup_error: sup });
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BirkhoffAverage {
    pub average: f64,
    pub standard_error: f64,
    pub expected: f64,
}

/// Time average of `q(z_t)` over `z` with a batch-means standard error.
pub fn birkhoff_average_q(params: &FhnParams, z: &StationaryOu) -> BirkhoffAverage {
    let qs: Vec<f64> = z.values.iter().map(|&zi| q_coefficient(params, zi)).collect();
    BirkhoffAverage {
        average: mean(&qs),
        standard_error: batch_means_se(&qs, 100),
        expected: -params.epsilon * params.beta / 4.0,
    }
}

/// `R̄ = ∫_{−T}^0 p(z_s) exp(∫_s^0 q(z_u) du) ds` over the supplied `z` (ending at 0).
pub fn absorption_radius_multiplicative(params: &FhnParams, z: &StationaryOu) -> f64 {
    let n = z.values.len();
    let dt = z.dt;
    let mut inner = 0.0;
    let mut total = 0.0;
    let mut prev: Option<f64> = None;
    for k in (0..n).rev() {
        if k + 1 < n {
            inner += 0.5 * (q_coefficient(params, z.values[k]) + q_coefficient(params, z.values[k + 1])) * dt;
        }
        let val = p_coefficient(params, z.values[k]) * inner.exp();
        if let Some(p) = prev {
            total += 0.5 * (p + val) * dt;
        }
        prev = Some(val);
    }
    total
}

/// `(1/t)·log‖T(z_t)‖` with the operator norm `max(1, e^{−σ₀z_t})`.
pub fn temperedness_estimate(sigma0: f64, z_t: f64, t: f64) -> f64 {
    (-sigma0 * z_t).max(0.0) / t
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Temperedness {
    pub horizon: f64,
    /// Estimate at the final time.
    pub estimate: f64,
    /// Largest estimate over the tail window `[T/2, T]`.
    pub tail_sup: f64,
}

pub fn temperedness_check(sigma0: f64, z: &StationaryOu) -> Temperedness {
    let n = z.values.len();
    let horizon = z.time(n - 1) - z.t0;
    let mut tail_sup: f64 = 0.0;
    for k in (n / 2).max(1)..n {
        let t = z.time(k) - z.t0;
        tail_sup = tail_sup.max(temperedness_estimate(sigma0, z.values[k], t));
    }
    Temperedness {
        horizon,
        estimate: temperedness_estimate(sigma0, z.values[n - 1], horizon),
        tail_sup,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PullbackResult {
    pub times: Vec<f64>,
    /// Largest pairwise distance at time 0 among the pulled-back states, per horizon.
    pub separations: Vec<f64>,
    /// Largest distance from the rest state at time 0 over all horizons and states.
    pub radius_estimate: f64,
}

/// Starts every state of `x_set` at time `−t` for each horizon `t` and integrates to
/// time 0 on one two-sided noise path, re-based with [`wiener_shift`].
pub fn pullback_experiment(
    params: &FhnParams,
    x_set: &[[f64; 2]],
    horizons: &[f64],
    seed: u64,
    stream_id: u64,
    dt: f64,
) -> Result<PullbackResult> {
    if x_set.len() < 2 {
        return Err(invalid("need at least two initial states"));
    }
    if horizons.is_empty() || horizons.windows(2).any(|w| w[1] <= w[0]) || horizons[0] <= 0.0 {
        return Err(invalid("horizons must be positive and increasing"));
    }
    let t_max = *horizons.last().unwrap();
    let n = (t_max / dt).round() as usize;
    let path = BrownianPath::generate(seed, stream_id, dt, -(n as f64) * dt, n)?;
    let x_e = params.fixed_point()?.state();
    let sys = params.system();
    let mut separations = Vec::with_capacity(horizons.len());
    let mut radius: f64 = 0.0;
    for &t in horizons {
        let shifted = wiener_shift(&path, -t)?;
        let window = shifted.window(0.0, t)?;
        let finals = x_set
            .iter()
            .map(|&x| {
                Ok(drive(&sys, x, 0.0, dt, window.increments.iter().copied(), |_, _, _, _| ControlFlow::Continue(()))?.state)
            })
            .collect::<Result<Vec<_>>>()?;
        let mut sep: f64 = 0.0;
        for i in 0..finals.len() {
            radius = radius.max(norm2(&sub2(&finals[i], &x_e)));
            for j in i + 1..finals.len() {
                sep = sep.max(norm2(&sub2(&finals[i], &finals[j])));
            }
        }
        separations.push(sep);
    }
    Ok(PullbackResult {
        times: horizons.to_vec(),
        separations,
        radius_estimate: radius,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PullbackSummary {
    pub times: Vec<f64>,
    pub median_separation: Vec<f64>,
    /// Fraction of seeds whose separation at the last horizon is below `tol`.
    pub fraction_below: f64,
    pub tol: f64,
    pub median_monotone: bool,
    pub runs: Vec<PullbackResult>,
}

pub fn pullback_ensemble(
    params: &FhnParams,
    x_set: &[[f64; 2]],
    horizons: &[f64],
    n_seeds: u64,
    seed: u64,
    dt: f64,
    tol: f64,
) -> Result<PullbackSummary> {
    let runs = map_trials(n_seeds, |k| pullback_experiment(params, x_set, horizons, seed, k, dt))
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
    let median_separation: Vec<f64> = (0..horizons.len())
        .map(|j| median(&runs.iter().map(|r| r.separations[j]).collect::<Vec<_>>()))
        .collect();
    let last = horizons.len() - 1;
    let below = runs.iter().filter(|r| r.separations[last] < tol).count();
    Ok(PullbackSummary {
        times: horizons.to_vec(),
        median_monotone: median_separation.windows(2).all(|w| w[1] <= w[0]),
        median_separation,
        fraction_below: below as f64 / n_seeds as f64,
        tol,
        runs,
    })
}

/// Scalar summary emitted by the `verify` command.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttractorReport {
    pub cocycle_dev: f64,
    #[serde(rename = "R_star")]
    pub r_star: f64,
    pub pullback: Vec<(f64, f64)>,
    pub birkhoff_avg: f64,
    pub tempered_est: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VerifyConfig {
    pub seed: u64,
    pub dt: f64,
    pub pullback_seeds: u64,
    pub ergodic_horizon: f64,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        VerifyConfig {
            seed: 0,
            dt: DEFAULT_DT,
            pullback_seeds: 100,
            ergodic_horizon: 1e4,
        }
    }
}

/// Runs the attractor checks for `params` and collects one number per check. The
/// pullback entry lists median separations over the seed ensemble.
pub fn verify_attractor(params: &FhnParams, cfg: &VerifyConfig) -> Result<AttractorReport> {
    let x_e = params.fixed_point()?.state();
    let path = BrownianPath::generate(cfg.seed, 0, cfg.dt, 0.0, (20.0 / cfg.dt).round() as usize)?;
    let cocycle_dev = cocycle_check(params, x_e, &path, 10.0, 10.0)?;
    let additive = params.with_noise(NoiseSpec::additive(params.noise.sigma0));
    let t_burn = 10.0 / additive.dissipativity_constants()?.b;
    let eta = StationaryOu::generate(cfg.seed, 1, cfg.dt, -t_burn, t_burn)?;
    let r_star = absorption_radius_additive(&additive, &eta)?.r_star;
    let shift = [0.3, 0.3];
    let x_set = [x_e, add2(&x_e, &shift)];
    let pb = pullback_ensemble(params, &x_set, &[50.0, 200.0, 800.0], cfg.pullback_seeds, derive_seed(cfg.seed, 2), cfg.dt, 1e-2)?;
    let z = StationaryOu::generate(cfg.seed, 3, cfg.dt, 0.0, cfg.ergodic_horizon)?;
    let multiplicative = params.with_noise(NoiseSpec::multiplicative(params.noise.sigma0));
    Ok(AttractorReport {
        cocycle_dev,
        r_star,
        pullback: pb.times.iter().copied().zip(pb.median_separation.iter().copied()).collect(),
        birkhoff_avg: birkhoff_average_q(&multiplicative, &z).average,
        tempered_est: temperedness_check(params.noise.sigma0, &z).estimate,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sde_engine::brownian_path;

    fn chosen() -> FhnParams {
        FhnParams::default()
    }

    #[test]
    fn wiener_shift_identity_group_and_offsets() {
        let path = brownian_path(3, 0, 0.01, 200).unwrap();
        assert_eq!(wiener_shift(&path, 0.0).unwrap(), path);
        let composed = wiener_shift(&wiener_shift(&path, 0.3).unwrap(), 0.5).unwrap();
        assert_eq!(composed, wiener_shift(&path, 0.8).unwrap());
        let shifted = wiener_shift(&path, 0.3).unwrap();
        let w = shifted.window(0.0, 1.0).unwrap();
        assert_eq!(&w.increments[..], &path.increments[30..130]);
        assert!(wiener_shift(&path, 0.0037).is_err());
    }

    #[test]
    fn stationary_ou_variance() {
        let z = StationaryOu::generate(5, 0, 0.01, 0.0, 2e4).unwrap();
        let var = crate::stats::variance(&z.values);
        assert!((var - 0.5).abs() < 0.05, "{var}");
        assert_eq!(z.t0, 0.0);
        assert_eq!(z.values.len(), 2_000_001);
    }

    #[test]
    fn cocycle_is_exact_on_the_grid() {
        let p = chosen();
        let x0 = p.fixed_point().unwrap().state();
        let path = brownian_path(1, 0, 0.01, 2000).unwrap();
        assert_eq!(cocycle_check(&p, x0, &path, 0.0, 10.0).unwrap(), 0.0);
        assert_eq!(cocycle_check(&p, x0, &path, 10.0, 0.0).unwrap(), 0.0);
        assert!(cocycle_check(&p, x0, &path, 10.0, 10.0).unwrap() < 1e-9);
        assert!(cocycle_check(&p, [0.5, -0.2], &path, 7.5, 3.25).unwrap() < 1e-9);
    }

    #[test]
    fn deterministic_absorption_radius_matches_closed_form() {
        let p = chosen().with_sigma0(0.0);
        let z = StationaryOu::generate(0, 0, 0.01, -1000.0, 1000.0).unwrap();
        let r = absorption_radius_additive(&p, &z).unwrap();
        let exact = absorption_radius_deterministic(&p).unwrap();
        let d = p.dissipativity_constants().unwrap();
        let f0 = [p.current, p.epsilon * p.alpha];
        assert!((exact - (2.0 * d.a + (f0[0] * f0[0] + f0[1] * f0[1]) / d.b) / d.b).abs() < 1e-9);
        // Trapezoid error on e^{bs} with h = 0.01 is ~ (bh)²/12 relative.
        assert!((r.r_star - exact).abs() < r.tail_bound + 1e-6 * exact, "{} vs {exact}", r.r_star);
    }

    #[test]
    fn truncation_of_r_star_is_stable() {
        let p = chosen();
        let z = StationaryOu::generate(8, 0, 0.01, -1000.0, 1000.0).unwrap();
        let long = absorption_radius_additive(&p, &z).unwrap();
        let k = z.values.len() / 2;
        let half = StationaryOu {
            t0: z.time(k),
            values: z.values[k..].to_vec(),
            ..z.clone()
        };
        let short = absorption_radius_additive(&p, &half).unwrap();
        assert!((long.r_star - short.r_star).abs() < 0.01 * long.r_star);
        assert!(short.tail_bound < 1e-3 * short.r_star);
    }

    #[test]
    fn comparison_and_invariance_hold_pathwise() {
        let cfg = AbsorptionConfig {
            n_paths: 20,
            ..Default::default()
        };
        let c = absorption_check(&chosen(), &cfg).unwrap();
        assert_eq!(c.comparison_violations, 0);
        assert_eq!(c.invariance_violations, 0);
        assert!(c.min_margin >= 0.0);
        let mult = chosen().with_noise(NoiseSpec::multiplicative(0.01));
        assert!(absorption_check(&mult, &cfg).is_err());
    }

    #[test]
    fn zero_noise_conjugacy_is_the_identity() {
        let p = chosen().with_noise(NoiseSpec::multiplicative(0.0));
        for x in [[0.3, -0.2], [-1.2, 0.7]] {
            for z in [-2.0, 0.0, 1.5] {
                assert_eq!(conjugacy(0.0, z, &x), x);
                let (a, b) = (conjugate_rhs(&p, z, &x), p.drift(&x));
                assert!((a[0] - b[0]).abs() < 1e-14 && (a[1] - b[1]).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn conjugacy_round_trip_converges_at_first_order() {
        let p = chosen().with_noise(NoiseSpec::multiplicative(0.01));
        let xe = p.fixed_point().unwrap().state();
        let rt = conjugacy_round_trip(&p, [xe[0], xe[1] - 0.1], 100.0, 0.01, 2, 3).unwrap();
        assert!(rt.iter().all(|r| r.sup_error < 5e-2));
        let ratio = (rt[0].sup_error / rt[2].sup_error).sqrt();
        assert!((1.5..=2.5).contains(&ratio), "{ratio}");
    }

    #[test]
    fn q_has_the_expected_birkhoff_average() {
        let p = chosen().with_noise(NoiseSpec::multiplicative(0.01));
        assert!((q_coefficient(&p, 0.0) + 0.015).abs() < 1e-15);
        let z = StationaryOu::generate(2, 0, 0.01, 0.0, 1e4).unwrap();
        let b = birkhoff_average_q(&p, &z);
        assert!((b.average - b.expected).abs() < 3.0 * b.standard_error);
        let zp = StationaryOu::generate(2, 1, 0.01, -1000.0, 1000.0).unwrap();
        let r_bar = absorption_radius_multiplicative(&p, &zp);
        assert!(r_bar.is_finite() && r_bar > 0.0);
        assert!(p_coefficient(&p, 0.0) > 0.0);
    }

    #[test]
    fn temperedness_vanishes() {
        let z = StationaryOu::generate(6, 0, 0.01, 0.0, 1e4).unwrap();
        assert_eq!(temperedness_check(0.0, &z).estimate, 0.0);
        assert_eq!(temperedness_check(0.0, &z).tail_sup, 0.0);
        assert!(temperedness_check(0.01, &z).estimate.abs() < 1e-2);
    }

    #[test]
    fn temperedness_tail_halves_when_horizon_doubles() {
        let (mut short, mut long) = (0.0, 0.0);
        for seed in 0..20 {
            short += temperedness_check(0.01, &StationaryOu::generate(seed, 0, 0.01, 0.0, 1e4).unwrap()).tail_sup;
            long += temperedness_check(0.01, &StationaryOu::generate(seed, 1, 0.01, 0.0, 2e4).unwrap()).tail_sup;
        }
        let ratio = short / long;
        assert!((1.6..=2.4).contains(&ratio), "{ratio}");
    }

    #[test]
    fn deterministic_pullback_collapses() {
        let p = chosen().with_sigma0(0.0);
        let xe = p.fixed_point().unwrap().state();
        let r = pullback_experiment(&p, &[xe, [xe[0] + 0.3, xe[1] + 0.3]], &[50.0, 200.0, 1000.0], 0, 0, 0.01).unwrap();
        assert!(r.separations[2] < 1e-3);
        assert!(r.separations.iter().all(|s| *s >= 0.0));
        assert!(pullback_experiment(&p, &[xe], &[1.0], 0, 0, 0.01).is_err());
        assert!(pullback_experiment(&p, &[xe, xe], &[2.0, 1.0], 0, 0, 0.01).is_err());
    }

    #[test]
    fn noisy_pullback_synchronizes() {
        let p = chosen();
        let xe = p.fixed_point().unwrap().state();
        let s = pullback_ensemble(&p, &[xe, [xe[0] + 0.3, xe[1] + 0.3]], &[50.0, 200.0, 800.0], 20, 4, 0.01, 1e-2).unwrap();
        assert!(s.median_monotone);
        assert!(s.fraction_below >= 0.9);
    }
}
