//! Seeded Brownian paths and fixed-step SDE integration.
//!
//! Stratonovich systems are advanced with the stochastic Heun predictor-corrector,
//! Itô systems with Euler-Maruyama. Both are driven by a single scalar Brownian
//! motion; the increments come either from a materialized [`BrownianPath`] or
//! directly from a [`NoiseStream`], and the two produce identical numbers for the
//! same `(seed, stream_id, dt)`.
//!
//! Per-trial streams use ChaCha8 keyed by the base seed with the trial index as
//! the 64-bit stream selector, so trial `i` can be regenerated in isolation.

use std::io::{self, Write};
use std::ops::ControlFlow;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::output::fmt17;

/// Paths whose state norm exceeds this are aborted as blown up.
pub const BLOWUP_NORM: f64 = 1e6;

/// Default step size.
pub const DEFAULT_DT: f64 = 0.01;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Interpretation {
    Stratonovich,
    Ito,
}

/// Drift/diffusion pair driven by one scalar Brownian motion.
pub trait SdeSystem<const N: usize> {
    fn drift(&self, x: &[f64; N], t: f64) -> [f64; N];

    /// Vector field multiplying the scalar noise increment.
    fn diffusion(&self, x: &[f64; N], t: f64) -> [f64; N];

    fn interpretation(&self) -> Interpretation {
        Interpretation::Stratonovich
    }

    /// Projection applied after each step. Returns `true` if it changed the state.
    fn guard(&self, _x: &mut [f64; N]) -> bool {
        false
    }
}

impl<const N: usize, S: SdeSystem<N> + ?Sized> SdeSystem<N> for &S {
    fn drift(&self, x: &[f64; N], t: f64) -> [f64; N] {
        (**self).drift(x, t)
    }
    fn diffusion(&self, x: &[f64; N], t: f64) -> [f64; N] {
        (**self).diffusion(x, t)
    }
    fn interpretation(&self) -> Interpretation {
        (**self).interpretation()
    }
    fn guard(&self, x: &mut [f64; N]) -> bool {
        (**self).guard(x)
    }
}

/// An [`SdeSystem`] assembled from two closures.
pub struct FnSystem<F, G> {
    drift: F,
    diffusion: G,
    interpretation: Interpretation,
}

impl<F, G> FnSystem<F, G> {
    pub fn new(drift: F, diffusion: G, interpretation: Interpretation) -> Self {
        FnSystem {
            drift,
            diffusion,
            interpretation,
        }
    }
}

impl<const N: usize, F, G> SdeSystem<N> for FnSystem<F, G>
where
    F: Fn(&[f64; N], f64) -> [f64; N],
    G: Fn(&[f64; N], f64) -> [f64; N],
{
    fn drift(&self, x: &[f64; N], t: f64) -> [f64; N] {
        (self.drift)(x, t)
    }
    fn diffusion(&self, x: &[f64; N], t: f64) -> [f64; N] {
        (self.diffusion)(x, t)
    }
    fn interpretation(&self) -> Interpretation {
        self.interpretation
    }
}

pub fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Derives an independent base seed for a sub-experiment (e.g. a σ₀ grid point).
pub fn derive_seed(seed: u64, salt: u64) -> u64 {
    splitmix64(seed ^ splitmix64(salt.wrapping_add(0x5851_f42d_4c95_7f2d)))
}

/// Infinite stream of N(0, dt) increments for one trial.
#[derive(Debug, Clone)]
pub struct NoiseStream {
    rng: ChaCha8Rng,
    sqrt_dt: f64,
}

impl NoiseStream {
    pub fn new(seed: u64, stream_id: u64, dt: f64) -> Result<Self> {
        check_dt(dt)?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream_id);
        Ok(NoiseStream {
            rng,
            sqrt_dt: dt.sqrt(),
        })
    }

    /// A standard normal draw (not scaled by √dt).
    pub fn standard_normal(&mut self) -> f64 {
        StandardNormal.sample(&mut self.rng)
    }
}

impl Iterator for NoiseStream {
    type Item = f64;

    #[inline]
    fn next(&mut self) -> Option<f64> {
        let z: f64 = StandardNormal.sample(&mut self.rng);
        Some(self.sqrt_dt * z)
    }
}

fn check_dt(dt: f64) -> Result<()> {
    if !(dt > 0.0) || !dt.is_finite() {
        return Err(invalid(format!("dt must be positive and finite, got {dt}")));
    }
    Ok(())
}

/// Discretized scalar Brownian motion on the grid `t0 + k·dt`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BrownianPath {
    pub t0: f64,
    pub dt: f64,
    pub increments: Vec<f64>,
    pub seed: u64,
    pub stream_id: u64,
}

/// Generates `n_steps` increments starting at `t0 = 0`.
pub fn brownian_path(seed: u64, stream_id: u64, dt: f64, n_steps: usize) -> Result<BrownianPath> {
    BrownianPath::generate(seed, stream_id, dt, 0.0, n_steps)
}

impl BrownianPath {
    pub fn generate(
        seed: u64,
        stream_id: u64,
        dt: f64,
        t0: f64,
        n_steps: usize,
    ) -> Result<BrownianPath> {
        let increments = NoiseStream::new(seed, stream_id, dt)?
            .take(n_steps)
            .collect();
        Ok(BrownianPath {
            t0,
            dt,
            increments,
            seed,
            stream_id,
        })
    }

    /// A path with all increments zero (deterministic integration).
    pub fn zeros(dt: f64, t0: f64, n_steps: usize) -> Result<BrownianPath> {
        check_dt(dt)?;
        Ok(BrownianPath {
            t0,
            dt,
            increments: vec![0.0; n_steps],
            seed: 0,
            stream_id: 0,
        })
    }

    pub fn n_steps(&self) -> usize {
        self.increments.len()
    }

    pub fn time(&self, k: usize) -> f64 {
        self.t0 + k as f64 * self.dt
    }

    pub fn t_end(&self) -> f64 {
        self.time(self.n_steps())
    }

    /// Cumulative values `B(t0 + k·dt) − B(t0)` for `k = 0..=n_steps`.
    pub fn values(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.increments.len() + 1);
        let mut b = 0.0;
        out.push(b);
        for dw in &self.increments {
            b += dw;
            out.push(b);
        }
        out
    }

    /// Grid index of time `t`, if `t` lies on the grid within the path.
    pub fn index_of(&self, t: f64) -> Option<usize> {
        let k = (t - self.t0) / self.dt;
        let r = k.round();
        if (k - r).abs() > 1e-6 || r < 0.0 || r > self.n_steps() as f64 {
            return None;
        }
        Some(r as usize)
    }

    /// Sub-path covering `[t_start, t_start + duration]`; both ends must be on the grid.
    pub fn window(&self, t_start: f64, duration: f64) -> Result<BrownianPath> {
        let start = self
            .index_of(t_start)
            .ok_or_else(|| invalid(format!("window start {t_start} is off the path grid")))?;
        let end = self
            .index_of(t_start + duration)
            .filter(|&e| e >= start)
            .ok_or_else(|| invalid(format!("window end {} is off the path grid", t_start + duration)))?;
        Ok(BrownianPath {
            t0: self.time(start),
            dt: self.dt,
            increments: self.increments[start..end].to_vec(),
            seed: self.seed,
            stream_id: self.stream_id,
        })
    }

    /// Path on the grid with step `factor·dt`, summing consecutive increments.
    pub fn coarsen(&self, factor: usize) -> Result<BrownianPath> {
        if factor == 0 || self.n_steps() % factor != 0 {
            return Err(invalid(format!(
                "cannot coarsen {} steps by factor {factor}",
                self.n_steps()
            )));
        }
        Ok(BrownianPath {
            t0: self.t0,
            dt: self.dt * factor as f64,
            increments: self
                .increments
                .chunks_exact(factor)
                .map(|c| c.iter().sum())
                .collect(),
            seed: self.seed,
            stream_id: self.stream_id,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EventKind {
    Spike,
    LineCrossing,
    Stop,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Event<const N: usize> {
    pub kind: EventKind,
    /// Crossing time, linearly interpolated between the bracketing grid points.
    pub time: f64,
    pub state: [f64; N],
    /// Grid index of the first state at or above the threshold.
    pub step: usize,
    /// Position of the detector in the list passed to [`integrate`].
    pub detector: usize,
}

/// Upward zero crossing of a scalar functional of the state.
pub struct Detector<'a, const N: usize> {
    pub kind: EventKind,
    pub functional: Box<dyn Fn(&[f64; N]) -> f64 + 'a>,
    pub terminal: bool,
}

impl<'a, const N: usize> Detector<'a, N> {
    pub fn new(kind: EventKind, functional: impl Fn(&[f64; N]) -> f64 + 'a) -> Self {
        Detector {
            kind,
            functional: Box::new(functional),
            terminal: false,
        }
    }

    pub fn terminal(mut self) -> Self {
        self.terminal = true;
        self
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory<const N: usize> {
    pub t0: f64,
    pub dt: f64,
    pub states: Vec<[f64; N]>,
    pub events: Vec<Event<N>>,
    /// `true` when a terminal detector stopped the integration before the path ended.
    pub halted: bool,
}

impl<const N: usize> Trajectory<N> {
    pub fn time(&self, k: usize) -> f64 {
        self.t0 + k as f64 * self.dt
    }

    pub fn last(&self) -> &[f64; N] {
        self.states.last().expect("trajectory always holds the initial state")
    }

    pub fn component(&self, i: usize) -> Vec<f64> {
        self.states.iter().map(|x| x[i]).collect()
    }

    /// CSV with header `t,x1[,x2]`, 17 significant digits.
    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        let mut header = String::from("t");
        for i in 1..=N {
            header.push_str(&format!(",x{i}"));
        }
        writeln!(w, "{header}")?;
        for (k, x) in self.states.iter().enumerate() {
            write!(w, "{}", fmt17(self.time(k)))?;
            for xi in x {
                write!(w, ",{}", fmt17(*xi))?;
            }
            writeln!(w)?;
        }
        Ok(())
    }
}

/// One step of the scheme matching the system's interpretation.
#[inline]
pub fn step<S: SdeSystem<N>, const N: usize>(
    sys: &S,
    x: &[f64; N],
    t: f64,
    dt: f64,
    dw: f64,
) -> [f64; N] {
    let f0 = sys.drift(x, t);
    let g0 = sys.diffusion(x, t);
    let mut out = [0.0; N];
    match sys.interpretation() {
        Interpretation::Ito => {
            for i in 0..N {
                out[i] = x[i] + f0[i] * dt + g0[i] * dw;
            }
        }
        Interpretation::Stratonovich => {
            let mut pred = [0.0; N];
            for i in 0..N {
                pred[i] = x[i] + f0[i] * dt + g0[i] * dw;
            }
            let f1 = sys.drift(&pred, t + dt);
            let g1 = sys.diffusion(&pred, t + dt);
            for i in 0..N {
                out[i] = x[i] + 0.5 * (f0[i] + f1[i]) * dt + 0.5 * (g0[i] + g1[i]) * dw;
            }
        }
    }
    out
}

#[inline]
fn escaped<const N: usize>(x: &[f64; N]) -> bool {
    let mut sq = 0.0;
    for xi in x {
        if !xi.is_finite() {
            return true;
        }
        sq += xi * xi;
    }
    sq > BLOWUP_NORM * BLOWUP_NORM
}

/// Where a [`drive`] run ended.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DriveEnd<const N: usize> {
    pub state: [f64; N],
    pub steps: usize,
    pub time: f64,
    pub stopped: bool,
}

/// Streams the scheme over `increments`, calling `observe(k, t_k, x_{k-1}, x_k)`
/// after each step. The observer may break to stop early.
pub fn drive<S, I, F, const N: usize>(
    sys: &S,
    x0: [f64; N],
    t0: f64,
    dt: f64,
    increments: I,
    mut observe: F,
) -> Result<DriveEnd<N>>
where
    S: SdeSystem<N>,
    I: IntoIterator<Item = f64>,
    F: FnMut(usize, f64, &[f64; N], &[f64; N]) -> ControlFlow<()>,
{
    check_dt(dt)?;
    if x0.iter().any(|v| !v.is_finite()) {
        return Err(invalid("initial state must be finite"));
    }
    let mut x = x0;
    let mut k = 0usize;
    for dw in increments {
        let t = t0 + k as f64 * dt;
        let mut next = step(sys, &x, t, dt, dw);
        sys.guard(&mut next);
        if escaped(&next) {
            return Err(Error::BlowUp {
                last_finite_step: k,
                time: t,
            });
        }
        k += 1;
        let tk = t0 + k as f64 * dt;
        let flow = observe(k, tk, &x, &next);
        x = next;
        if flow.is_break() {
            return Ok(DriveEnd {
                state: x,
                steps: k,
                time: tk,
                stopped: true,
            });
        }
    }
    Ok(DriveEnd {
        state: x,
        steps: k,
        time: t0 + k as f64 * dt,
        stopped: false,
    })
}

/// Interpolated crossing between `(t - dt, prev)` and `(t, next)` given the
/// functional values on both sides.
#[inline]
pub fn interpolate_crossing<const N: usize>(
    f_prev: f64,
    f_next: f64,
    t: f64,
    dt: f64,
    prev: &[f64; N],
    next: &[f64; N],
) -> (f64, [f64; N]) {
    let denom = f_next - f_prev;
    let frac = if denom > 0.0 {
        (-f_prev / denom).clamp(0.0, 1.0)
    } else {
        1.0
    };
    let mut state = [0.0; N];
    for i in 0..N {
        state[i] = prev[i] + frac * (next[i] - prev[i]);
    }
    (t - dt + frac * dt, state)
}

/// Integrates `system` from `x0` along `path`, recording every grid state and
/// every upward zero crossing of the detectors.
pub fn integrate<S: SdeSystem<N>, const N: usize>(
    system: &S,
    x0: [f64; N],
    path: &BrownianPath,
    detectors: &[Detector<'_, N>],
) -> Result<Trajectory<N>> {
    let mut states = Vec::with_capacity(path.n_steps() + 1);
    states.push(x0);
    let mut last_vals: Vec<f64> = detectors.iter().map(|d| (d.functional)(&x0)).collect();
    let mut events = Vec::new();
    let dt = path.dt;
    let end = drive(
        system,
        x0,
        path.t0,
        dt,
        path.increments.iter().copied(),
        |k, t, prev, next| {
            states.push(*next);
            let mut stop = false;
            for (j, d) in detectors.iter().enumerate() {
                let v = (d.functional)(next);
                if last_vals[j] < 0.0 && v >= 0.0 {
                    let (time, state) = interpolate_crossing(last_vals[j], v, t, dt, prev, next);
                    events.push(Event {
                        kind: d.kind,
                        time,
                        state,
                        step: k,
                        detector: j,
                    });
                    stop |= d.terminal;
                }
                last_vals[j] = v;
            }
            if stop {
                ControlFlow::Break(())
            } else {
                ControlFlow::Continue(())
            }
        },
    )?;
    Ok(Trajectory {
        t0: path.t0,
        dt,
        states,
        events,
        halted: end.stopped,
    })
}

/// First upward zero crossing of `predicate` along the path, if any.
pub fn first_passage<S, P, const N: usize>(
    system: &S,
    x0: [f64; N],
    path: &BrownianPath,
    predicate: P,
) -> Result<Option<Event<N>>>
where
    S: SdeSystem<N>,
    P: Fn(&[f64; N]) -> f64,
{
    first_passage_streamed(system, x0, path.t0, path.dt, path.increments.iter().copied(), predicate)
}

/// [`first_passage`] over an arbitrary increment source (e.g. a [`NoiseStream`]
/// limited with `take`).
pub fn first_passage_streamed<S, I, P, const N: usize>(
    system: &S,
    x0: [f64; N],
    t0: f64,
    dt: f64,
    increments: I,
    predicate: P,
) -> Result<Option<Event<N>>>
where
    S: SdeSystem<N>,
    I: IntoIterator<Item = f64>,
    P: Fn(&[f64; N]) -> f64,
{
    let mut last = predicate(&x0);
    let mut hit = None;
    drive(system, x0, t0, dt, increments, |k, t, prev, next| {
        let v = predicate(next);
        if last < 0.0 && v >= 0.0 {
            let (time, state) = interpolate_crossing(last, v, t, dt, prev, next);
            hit = Some(Event {
                kind: EventKind::Stop,
                time,
                state,
                step: k,
                detector: 0,
            });
            return ControlFlow::Break(());
        }
        last = v;
        ControlFlow::Continue(())
    })?;
    Ok(hit)
}
