//! Browser bindings: phase portraits, firing-probability curves and ISI densities.
//! The plain functions below do the work; the `#[wasm_bindgen]` layer only converts.

use fhn_lif::firing_isi::{
    estimate_firing_prob, fit_sigmoid, isi_experiment, FiringProbeGrid, IsiExperimentConfig,
};
use fhn_lif::sde_engine::{brownian_path, integrate};
use fhn_lif::FhnParams;
use wasm_bindgen::prelude::*;

fn params(sigma0: f64) -> fhn_lif::Result<FhnParams> {
    let p = FhnParams::default().with_sigma0(sigma0);
    p.validate()?;
    Ok(p)
}

fn js(e: fhn_lif::Error) -> JsError {
    JsError::new(&e.to_string())
}

/// Interleaved `(v, w)` samples of one path, every `stride`-th step.
pub fn portrait(sigma0: f64, v0: f64, w0: f64, horizon: f64, seed: u64, stride: usize) -> fhn_lif::Result<Vec<f64>> {
    let p = params(sigma0)?;
    let dt = 0.01;
    let path = brownian_path(seed, 0, dt, (horizon / dt).round() as usize)?;
    let tr = integrate(&p.system(), [v0, w0], &path, &[])?;
    Ok(tr.states.iter().step_by(stride.max(1)).flat_map(|x| [x[0], x[1]]).collect())
}

#[wasm_bindgen]
pub fn rest_state() -> Result<Vec<f64>, JsError> {
    let fp = FhnParams::default().fixed_point().map_err(js)?;
    Ok(vec![fp.v_e, fp.w_e])
}

#[wasm_bindgen]
pub fn phase_portrait(sigma0: f64, v0: f64, w0: f64, horizon: f64, seed: u32) -> Result<Vec<f64>, JsError> {
    portrait(sigma0, v0, w0, horizon, seed as u64, 5).map_err(js)
}

#[wasm_bindgen]
pub struct FiringCurve {
    distances: Vec<f64>,
    probabilities: Vec<f64>,
    a: f64,
    b: f64,
}

#[wasm_bindgen]
impl FiringCurve {
    #[wasm_bindgen(getter)]
    pub fn distances(&self) -> Vec<f64> {
        self.distances.clone()
    }
    #[wasm_bindgen(getter)]
    pub fn probabilities(&self) -> Vec<f64> {
        self.probabilities.clone()
    }
    #[wasm_bindgen(getter)]
    pub fn a(&self) -> f64 {
        self.a
    }
    #[wasm_bindgen(getter)]
    pub fn b(&self) -> f64 {
        self.b
    }
}

pub fn firing(sigma0: f64, trials: u64, seed: u64) -> fhn_lif::Result<FiringCurve> {
    let p = params(sigma0)?;
    let grid = FiringProbeGrid::new(&p)?.with_trials(trials);
    let table = estimate_firing_prob(&p, &grid, seed)?;
    let fit = fit_sigmoid(&table)?;
    Ok(FiringCurve {
        distances: table.distances(),
        probabilities: table.probabilities(),
        a: fit.a,
        b: fit.b,
    })
}

#[wasm_bindgen]
pub fn firing_curve(sigma0: f64, trials: u32, seed: u32) -> Result<FiringCurve, JsError> {
    firing(sigma0, trials as u64, seed as u64).map_err(js)
}

#[wasm_bindgen]
pub struct IsiView {
    t: Vec<f64>,
    g_radial_ou: Vec<f64>,
    g_polar_radial: Vec<f64>,
    samples: Vec<f64>,
    ks: f64,
}

#[wasm_bindgen]
impl IsiView {
    #[wasm_bindgen(getter)]
    pub fn t(&self) -> Vec<f64> {
        self.t.clone()
    }
    #[wasm_bindgen(getter)]
    pub fn g_radial_ou(&self) -> Vec<f64> {
        self.g_radial_ou.clone()
    }
    #[wasm_bindgen(getter)]
    pub fn g_polar_radial(&self) -> Vec<f64> {
        self.g_polar_radial.clone()
    }
    #[wasm_bindgen(getter)]
    pub fn samples(&self) -> Vec<f64> {
        self.samples.clone()
    }
    /// Largest pairwise KS distance among sample and both densities.
    #[wasm_bindgen(getter)]
    pub fn ks(&self) -> f64 {
        self.ks
    }
}

pub fn isi(sigma0: f64, trials: u64, m: u64, spikes: u64, seed: u64) -> fhn_lif::Result<IsiView> {
    let cfg = IsiExperimentConfig {
        firing_trials: trials,
        m,
        n: 10,
        t_end: 1500.0,
        points: 76,
        n_spikes: spikes,
        seed,
        ..IsiExperimentConfig::default()
    };
    let res = isi_experiment(&params(sigma0)?, &cfg)?;
    Ok(IsiView {
        ks: res.max_ks(),
        t: res.radial_ou.t,
        g_radial_ou: res.radial_ou.g,
        g_polar_radial: res.polar_radial.g,
        samples: res.sample.isis,
    })
}

#[wasm_bindgen]
pub fn isi_densities(sigma0: f64, trials: u32, m: u32, spikes: u32, seed: u32) -> Result<IsiView, JsError> {
    isi(sigma0, trials as u64, m as u64, spikes as u64, seed as u64).map_err(js)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn portrait_layout() {
        let xs = portrait(0.0, -1.00125, -0.46, 10.0, 1, 5).unwrap();
        assert_eq!(xs.len(), 2 * 201);
        assert_eq!(&xs[..2], &[-1.00125, -0.46]);
        assert!(portrait(-1.0, 0.0, 0.0, 1.0, 1, 1).is_err());
    }

    #[test]
    fn firing_curve_is_increasing_overall() {
        let c = firing(0.01, 40, 3).unwrap();
        assert_eq!(c.distances.len(), 35);
        assert!(c.probabilities[0] < 0.2 && c.probabilities[34] > 0.8);
        assert!((c.a - 0.05).abs() < 0.01);
    }

    #[test]
    fn isi_view_shapes() {
        let v = isi(0.01, 30, 40, 40, 2).unwrap();
        assert_eq!(v.t.len(), 76);
        assert_eq!(v.g_radial_ou.len(), 76);
        assert!(!v.samples.is_empty());
        assert!(v.ks.is_finite());
    }
}
