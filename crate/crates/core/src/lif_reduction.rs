//! One-dimensional LIF equations embedded in the FHN model.
//!
//! In normal-form coordinates `Ȳ = Q⁻¹X̄` the linearized dynamics read
//! `dȲ = AȲ dt + h_e dB`. Two scalar equations approximate `‖Ȳ‖`:
//!
//! * radial OU (averaged): `dR = [σ²/(2R) − μR] dt + σ dB̃`
//! * polar radial: `dR̄ = [(‖h_e‖² − ⟨h_e, θ_t⟩²)/(2R̄) − μR̄] dt + ⟨θ_t, h_e⟩ dB`,
//!   `θ_t = (sin νt, cos νt)`.
//!
//! Both are Itô equations with a repelling singularity at the origin. They are
//! integrated with Euler-Maruyama, reflecting `R ← |R|` after each step, and
//! with the `1/R` term evaluated no closer to the origin than one diffusion
//! length `σ√dt` so that a start at the reset state `R = 0` stays finite.

use std::ops::ControlFlow;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::fhn_model::FhnParams;
use crate::linalg::{dot2, norm2, Mat2};
use crate::linearization::{normal_form, NormalForm};
use crate::sde_engine::{drive, integrate, step, BrownianPath, FnSystem, Interpretation, SdeSystem};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LifKind {
    RadialOu,
    PolarRadial,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LifModel {
    pub kind: LifKind,
    pub mu: f64,
    pub nu: f64,
    /// Effective isotropic diffusion of the radial OU equation.
    pub sigma_eff: f64,
    pub h_e: [f64; 2],
    pub reset_state: f64,
    /// Phase offset of `θ_t = (sin(νt + φ), cos(νt + φ))`.
    pub phase0: f64,
}

/// `Q⁻¹ x`.
pub fn transform_state(nf: &NormalForm, x: &[f64; 2]) -> [f64; 2] {
    nf.q_inv.mul_vec(x)
}

/// `Q y`.
pub fn inverse_transform_state(nf: &NormalForm, y: &[f64; 2]) -> [f64; 2] {
    nf.q.mul_vec(y)
}

/// `σ = √(−m₁₂/(2ν²m₂₁))·σ₀`.
pub fn sigma_eff(params: &FhnParams) -> Result<f64> {
    let nf = normal_form(params)?;
    let m = nf.jacobian;
    Ok((-m.get(0, 1) / (2.0 * nf.nu * nf.nu * m.get(1, 0))).sqrt() * params.noise.sigma0)
}

/// `√(tr(CCᵀ)/2)` with `C = Q⁻¹·diag(0, σ₀)`.
pub fn sigma_eff_from_trace(params: &FhnParams) -> Result<f64> {
    let nf = normal_form(params)?;
    let c = nf.q_inv.mul(&Mat2::diag(0.0, params.noise.sigma0));
    Ok((0.5 * c.mul(&c.transpose()).trace()).sqrt())
}

pub fn radial_ou_model(params: &FhnParams) -> Result<LifModel> {
    let nf = normal_form(params)?;
    let sigma = sigma_eff(params)?;
    if !(sigma > 0.0) {
        return Err(invalid("radial OU model needs sigma0 > 0"));
    }
    Ok(LifModel {
        kind: LifKind::RadialOu,
        mu: nf.mu,
        nu: nf.nu,
        sigma_eff: sigma,
        h_e: nf.h_e,
        reset_state: 0.0,
        phase0: 0.0,
    })
}

pub fn polar_radial_model(params: &FhnParams) -> Result<LifModel> {
    let nf = normal_form(params)?;
    Ok(LifModel {
        kind: LifKind::PolarRadial,
        mu: nf.mu,
        nu: nf.nu,
        sigma_eff: sigma_eff(params)?,
        h_e: nf.h_e,
        reset_state: 0.0,
        phase0: 0.0,
    })
}

impl LifModel {
    pub fn theta(&self, t: f64) -> [f64; 2] {
        let (s, c) = (self.nu * t + self.phase0).sin_cos();
        [s, c]
    }

    /// Drift as a function of `(R, t)`; errors on the singular set `R ≤ 0`.
    pub fn drift(&self, r: f64, t: f64) -> Result<f64> {
        if !(r > 0.0) {
            return Err(Error::Singular(format!("radial drift at R = {r}")));
        }
        Ok(self.drift_unchecked(r, t))
    }

    #[inline]
    fn drift_unchecked(&self, r: f64, t: f64) -> f64 {
        match self.kind {
            LifKind::RadialOu => self.sigma_eff * self.sigma_eff / (2.0 * r) - self.mu * r,
            LifKind::PolarRadial => {
                let he2 = dot2(&self.h_e, &self.h_e);
                let proj = dot2(&self.h_e, &self.theta(t));
                (he2 - proj * proj) / (2.0 * r) - self.mu * r
            }
        }
    }

    #[inline]
    pub fn diffusion(&self, t: f64) -> f64 {
        match self.kind {
            LifKind::RadialOu => self.sigma_eff,
            LifKind::PolarRadial => dot2(&self.theta(t), &self.h_e),
        }
    }

    /// Zero of the radial-OU drift, `σ/√(2μ)` (the Rayleigh scale of the stationary law).
    pub fn drift_root(&self) -> f64 {
        self.sigma_eff / (2.0 * self.mu).sqrt()
    }

    /// Stationary mean of the radius, `σ√(π/(4μ))`.
    pub fn stationary_mean(&self) -> f64 {
        self.sigma_eff * (std::f64::consts::PI / (4.0 * self.mu)).sqrt()
    }

    /// Largest diffusion amplitude over a period.
    fn diffusion_scale(&self) -> f64 {
        match self.kind {
            LifKind::RadialOu => self.sigma_eff,
            LifKind::PolarRadial => norm2(&self.h_e),
        }
    }

    /// Engine system for step size `dt` (Itô, reflecting guard).
    pub fn system(&self, dt: f64) -> RadialSde {
        RadialSde {
            model: *self,
            floor: self.diffusion_scale() * dt.sqrt(),
        }
    }

    /// Simulates `R` along `path` from `r0`, returning the grid values and the number of
    /// reflected steps.
    pub fn simulate(&self, r0: f64, path: &BrownianPath) -> Result<RadialPath> {
        let sys = self.system(path.dt);
        let mut values = Vec::with_capacity(path.n_steps() + 1);
        values.push(r0);
        let mut reflections = 0;
        drive(&sys, [r0], path.t0, path.dt, path.increments.iter().copied(), |_, _, _, next| {
            values.push(next[0]);
            ControlFlow::Continue(())
        })?;
        for (k, w) in values.windows(2).enumerate() {
            let raw = step(&sys, &[w[0]], path.time(k), path.dt, path.increments[k]);
            if raw[0] < 0.0 {
                reflections += 1;
            }
        }
        Ok(RadialPath {
            t0: path.t0,
            dt: path.dt,
            values,
            reflections,
        })
    }
}

/// Radial values on a time grid.
#[derive(Debug, Clone, PartialEq)]
pub struct RadialPath {
    pub t0: f64,
    pub dt: f64,
    pub values: Vec<f64>,
    pub reflections: usize,
}

/// Itô form of a [`LifModel`] with the reflecting guard.
#[derive(Debug, Clone, Copy)]
pub struct RadialSde {
    pub model: LifModel,
    floor: f64,
}

impl SdeSystem<1> for RadialSde {
    #[inline]
    fn drift(&self, x: &[f64; 1], t: f64) -> [f64; 1] {
        [self.model.drift_unchecked(x[0].abs().max(self.floor), t)]
    }

    #[inline]
    fn diffusion(&self, _x: &[f64; 1], t: f64) -> [f64; 1] {
        [self.model.diffusion(t)]
    }

    fn interpretation(&self) -> Interpretation {
        Interpretation::Ito
    }

    #[inline]
    fn guard(&self, x: &mut [f64; 1]) -> bool {
        if x[0] < 0.0 {
            x[0] = -x[0];
            true
        } else {
            false
        }
    }
}

/// Simulates the normal-form linear system `dȲ = AȲ dt + h_e dB` (Stratonovich and Itô
/// coincide for additive noise).
pub fn simulate_normal_form(nf: &NormalForm, y0: [f64; 2], path: &BrownianPath) -> Result<Vec<[f64; 2]>> {
    let sys = NormalFormSystem { a: nf.a, h: nf.h_e };
    let tr = integrate(&sys, y0, path, &[])?;
    Ok(tr.states)
}

#[derive(Debug, Clone, Copy)]
struct NormalFormSystem {
    a: Mat2,
    h: [f64; 2],
}

impl SdeSystem<2> for NormalFormSystem {
    fn drift(&self, x: &[f64; 2], _t: f64) -> [f64; 2] {
        self.a.mul_vec(x)
    }
    fn diffusion(&self, _x: &[f64; 2], _t: f64) -> [f64; 2] {
        self.h
    }
}

/// The averaged approximation `Ȳ^app_t = (σ/√μ)·Rot_{−νt}·S̄_{μt}`.
#[derive(Debug, Clone, PartialEq)]
pub struct AveragedTrajectory {
    /// Physical times `t_k = s_k/μ`.
    pub times: Vec<f64>,
    /// `S̄` on the rescaled grid `s_k`.
    pub s_bar: Vec<[f64; 2]>,
    pub y_app: Vec<[f64; 2]>,
}

impl AveragedTrajectory {
    pub fn norms(&self) -> Vec<f64> {
        self.y_app.iter().map(norm2).collect()
    }
}

pub fn rotation(s: f64) -> Mat2 {
    let (sn, cs) = s.sin_cos();
    Mat2::new(cs, -sn, sn, cs)
}

/// Builds `Ȳ^app` from two independent scalar Brownian paths driving the components of
/// `dS̄ = −S̄ ds + dB`. The paths are on the rescaled clock `s = μt`, so their step is
/// `μ·dt` for a physical step `dt`.
pub fn averaged_process(
    params: &FhnParams,
    path2d: [&BrownianPath; 2],
    y0: [f64; 2],
) -> Result<AveragedTrajectory> {
    let [p1, p2] = path2d;
    if p1.n_steps() != p2.n_steps() || p1.dt != p2.dt {
        return Err(invalid("component paths must share a grid"));
    }
    let model = radial_ou_model(params)?;
    let (mu, nu, sigma) = (model.mu, model.nu, model.sigma_eff);
    let scale = sigma / mu.sqrt();
    let s0 = [y0[0] / scale, y0[1] / scale];
    let ou = FnSystem::new(
        |x: &[f64; 1], _| [-x[0]],
        |_: &[f64; 1], _| [1.0],
        Interpretation::Stratonovich,
    );
    let c1 = integrate(&ou, [s0[0]], p1, &[])?;
    let c2 = integrate(&ou, [s0[1]], p2, &[])?;
    let n = c1.states.len();
    let mut times = Vec::with_capacity(n);
    let mut s_bar = Vec::with_capacity(n);
    let mut y_app = Vec::with_capacity(n);
    for k in 0..n {
        let t = (p1.t0 + k as f64 * p1.dt) / mu;
        let s = [c1.states[k][0], c2.states[k][0]];
        let y = rotation(-nu * t).mul_vec(&s);
        times.push(t);
        s_bar.push(s);
        y_app.push([scale * y[0], scale * y[1]]);
    }
    Ok(AveragedTrajectory { times, s_bar, y_app })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelSummary {
    pub mu: f64,
    pub nu: f64,
    pub sigma_eff: f64,
    pub h_e: [f64; 2],
    pub h_e_norm_sq: f64,
    pub drift_root: f64,
    pub stationary_mean: f64,
    pub distance_scale: f64,
}

pub fn model_summary(params: &FhnParams) -> Result<ModelSummary> {
    let nf = normal_form(params)?;
    let m = radial_ou_model(params)?;
    Ok(ModelSummary {
        mu: m.mu,
        nu: m.nu,
        sigma_eff: m.sigma_eff,
        h_e: m.h_e,
        h_e_norm_sq: dot2(&m.h_e, &m.h_e),
        drift_root: m.drift_root(),
        stationary_mean: m.stationary_mean(),
        distance_scale: nf.distance_scale(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sde_engine::brownian_path;
    use crate::stats::mean;

    fn chosen() -> FhnParams {
        FhnParams::default()
    }

    #[test]
    fn transform_examples() {
        let nf = normal_form(&chosen()).unwrap();
        assert_eq!(transform_state(&nf, &[0.0, 0.0]), [0.0, 0.0]);
        let x = [0.013, -0.27];
        let back = inverse_transform_state(&nf, &transform_state(&nf, &x));
        assert!((back[0] - x[0]).abs() < 1e-12 && (back[1] - x[1]).abs() < 1e-12);
        let l = 0.03;
        let y = transform_state(&nf, &[0.0, l]);
        assert!((norm2(&y) - nf.distance_scale() * l).abs() < 1e-12);
        assert!((nf.distance_scale() - 12.565).abs() < 1e-3);
    }

    #[test]
    fn sigma_eff_examples() {
        assert_eq!(sigma_eff(&chosen().with_sigma0(0.0)).unwrap(), 0.0);
        let s = sigma_eff(&chosen()).unwrap();
        let nu = normal_form(&chosen()).unwrap().nu;
        assert!((s - (1.0 / (2.0 * nu * nu * 0.08)).sqrt() * 0.01).abs() < 1e-12);
        assert!((s - 0.08885).abs() < 1e-4);
        let t = sigma_eff_from_trace(&chosen()).unwrap();
        assert!((s - t).abs() < 1e-10);
    }

    #[test]
    fn radial_ou_drift_root_and_singularity() {
        let m = radial_ou_model(&chosen()).unwrap();
        let root = m.drift_root();
        assert!((root - 0.3554).abs() < 1e-3);
        assert!(m.drift(root, 0.0).unwrap().abs() < 1e-12);
        assert!(matches!(m.drift(0.0, 0.0), Err(Error::Singular(_))));
        assert!(matches!(m.drift(-0.1, 0.0), Err(Error::Singular(_))));
        assert!(radial_ou_model(&chosen().with_sigma0(0.0)).is_err());
    }

    #[test]
    fn zero_noise_polar_model_decays_exponentially() {
        let m = polar_radial_model(&chosen().with_sigma0(0.0)).unwrap();
        let path = BrownianPath::zeros(0.01, 0.0, 10_000).unwrap();
        let rp = m.simulate(1.0, &path).unwrap();
        let exact = (-m.mu * 100.0).exp();
        assert!((rp.values.last().unwrap() - exact).abs() < 1e-3 * exact);
    }

    #[test]
    fn radial_ou_long_run_mean() {
        let m = radial_ou_model(&chosen()).unwrap();
        let path = brownian_path(21, 0, 0.01, 1_000_000).unwrap();
        let rp = m.simulate(m.drift_root(), &path).unwrap();
        let avg = mean(&rp.values);
        let target = m.stationary_mean();
        assert!((avg - target).abs() < 0.1 * target, "{avg} vs {target}");
    }

    #[test]
    fn polar_coefficients_regenerated() {
        let m = polar_radial_model(&chosen()).unwrap();
        let s0 = 0.01;
        let he2 = dot2(&m.h_e, &m.h_e) / (s0 * s0);
        assert!((he2 - 157.881).abs() < 0.05);
        assert!((m.diffusion(0.0) - 12.5 * s0).abs() < 1e-2 * s0);
        let quarter = std::f64::consts::FRAC_PI_2 / m.nu;
        assert!((m.diffusion(quarter) - 1.27722 * s0).abs() < 1e-2 * s0);
    }

    #[test]
    fn period_averaged_polar_drift_is_radial_ou() {
        let pm = polar_radial_model(&chosen()).unwrap();
        let period = std::f64::consts::TAU / pm.nu;
        let he2 = dot2(&pm.h_e, &pm.h_e);
        let n = 20_000;
        for r in [0.1, 0.4, 1.3] {
            let avg: f64 = (0..n)
                .map(|k| pm.drift(r, (k as f64 + 0.5) * period / n as f64).unwrap())
                .sum::<f64>()
                / n as f64;
            let radial = LifModel {
                kind: LifKind::RadialOu,
                sigma_eff: (he2 / 2.0).sqrt(),
                ..pm
            };
            assert!((avg - radial.drift(r, 0.0).unwrap()).abs() < 1e-6);
        }
        // ‖h_e‖²/2 equals σ² of the radial OU model.
        assert!((he2 / 2.0 - pm.sigma_eff * pm.sigma_eff).abs() < 1e-12);
    }

    #[test]
    fn averaged_process_norms_and_initial_condition() {
        let p = chosen();
        let m = radial_ou_model(&p).unwrap();
        let ds = m.mu * 0.01;
        let b1 = brownian_path(5, 0, ds, 10_000).unwrap();
        let b2 = brownian_path(5, 1, ds, 10_000).unwrap();
        let y0 = [0.2, -0.1];
        let tr = averaged_process(&p, [&b1, &b2], y0).unwrap();
        assert!((tr.y_app[0][0] - y0[0]).abs() < 1e-12 && (tr.y_app[0][1] - y0[1]).abs() < 1e-12);
        let scale = m.sigma_eff / m.mu.sqrt();
        for (y, s) in tr.y_app.iter().zip(&tr.s_bar) {
            assert!((norm2(y) - scale * norm2(s)).abs() < 1e-12);
        }
    }

    #[test]
    fn reflections_keep_radius_non_negative() {
        let m = radial_ou_model(&chosen().with_sigma0(0.015)).unwrap();
        for stream in 0..20 {
            let path = brownian_path(77, stream, 0.01, 20_000).unwrap();
            let rp = m.simulate(0.05, &path).unwrap();
            assert!(rp.values.iter().all(|&r| r >= 0.0));
        }
        let rp = m.simulate(0.0, &brownian_path(1, 0, 0.01, 1000).unwrap()).unwrap();
        assert!(rp.values.iter().all(|r| r.is_finite() && *r >= 0.0));
    }

    #[test]
    fn radial_ou_matches_norm_of_planar_ou() {
        use crate::stats::{ks_pvalue, ks_two_sample};
        let m = radial_ou_model(&chosen()).unwrap();
        let (dt, n_steps, n) = (0.01, 5000, 2000u64);
        let planar = FnSystem::new(
            |x: &[f64; 1], _| [-m.mu * x[0]],
            |_: &[f64; 1], _| [m.sigma_eff],
            Interpretation::Ito,
        );
        let r0 = 0.3;
        let mut norms = Vec::new();
        let mut radii = Vec::new();
        for k in 0..n {
            let y1 = integrate(&planar, [r0], &brownian_path(3, 3 * k, dt, n_steps).unwrap(), &[]).unwrap();
            let y2 = integrate(&planar, [0.0], &brownian_path(3, 3 * k + 1, dt, n_steps).unwrap(), &[]).unwrap();
            norms.push(y1.last()[0].hypot(y2.last()[0]));
            let rp = m.simulate(r0, &brownian_path(3, 3 * k + 2, dt, n_steps).unwrap()).unwrap();
            radii.push(*rp.values.last().unwrap());
        }
        let d = ks_two_sample(&norms, &radii);
        let p = ks_pvalue(d, norms.len(), radii.len());
        assert!(p > 0.01, "KS d={d} p={p}");
    }
}
