//! Welch power spectral densities and a shape-overlap score between spectra.

use std::io::{self, Write};

use rustfft::num_complex::Complex;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::ensemble::map_trials;
use crate::error::{invalid, Result};
use crate::fhn_model::FhnParams;
use crate::lif_reduction::{polar_radial_model, radial_ou_model, simulate_normal_form};
use crate::linalg::norm2;
use crate::linearization::{linearized_system, normal_form, shifted_system};
use crate::output::fmt17;
use crate::sde_engine::{brownian_path, integrate, DEFAULT_DT};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Psd {
    pub freqs: Vec<f64>,
    pub power: Vec<f64>,
    /// Factor applied to the raw density estimate.
    pub scale: f64,
    pub n_segments: usize,
}

impl Psd {
    pub fn bin_width(&self) -> f64 {
        if self.freqs.len() < 2 {
            0.0
        } else {
            self.freqs[1] - self.freqs[0]
        }
    }

    pub fn argmax(&self) -> usize {
        self.power
            .iter()
            .enumerate()
            .fold((0, f64::NEG_INFINITY), |(bi, bv), (i, &v)| if v > bv { (i, v) } else { (bi, bv) })
            .0
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "freq,power")?;
        for (f, p) in self.freqs.iter().zip(&self.power) {
            writeln!(w, "{},{}", fmt17(*f), fmt17(*p))?;
        }
        Ok(())
    }
}

fn hann(n: usize) -> Vec<f64> {
    (0..n)
        .map(|k| 0.5 - 0.5 * (std::f64::consts::TAU * k as f64 / n as f64).cos())
        .collect()
}

/// Welch estimate: Hann-windowed, mean-detrended segments of `segment_len` samples with
/// fractional `overlap`, averaged periodograms, one-sided density (power per unit
/// frequency) on `k/(segment_len·dt)`.
pub fn estimate_psd(series: &[f64], dt: f64, segment_len: usize, overlap: f64) -> Result<Psd> {
    if !(dt > 0.0) {
        return Err(invalid("dt must be positive"));
    }
    if segment_len < 16 || series.len() < segment_len {
        return Err(invalid(format!(
            "need series length >= segment length >= 16, got {} and {segment_len}",
            series.len()
        )));
    }
    if !(0.0..=0.9).contains(&overlap) {
        return Err(invalid("overlap must lie in [0, 0.9]"));
    }
    let hop = ((segment_len as f64 * (1.0 - overlap)).round() as usize).max(1);
    let window = hann(segment_len);
    let wss: f64 = window.iter().map(|w| w * w).sum();
    let fs = 1.0 / dt;
    let fft = FftPlanner::new().plan_fft_forward(segment_len);
    let n_bins = segment_len / 2 + 1;
    let mut acc = vec![0.0; n_bins];
    let mut buf = vec![Complex::new(0.0, 0.0); segment_len];
    let mut n_segments = 0;
    let mut start = 0;
    while start + segment_len <= series.len() {
        let seg = &series[start..start + segment_len];
        let m = seg.iter().sum::<f64>() / segment_len as f64;
        for (b, (x, w)) in buf.iter_mut().zip(seg.iter().zip(&window)) {
            *b = Complex::new((x - m) * w, 0.0);
        }
        fft.process(&mut buf);
        for (k, a) in acc.iter_mut().enumerate() {
            *a += buf[k].norm_sqr();
        }
        n_segments += 1;
        start += hop;
    }
    let norm = 1.0 / (fs * wss * n_segments as f64);
    let power = acc
        .iter()
        .enumerate()
        .map(|(k, a)| {
            let one_sided = if k == 0 || (segment_len % 2 == 0 && k == n_bins - 1) { 1.0 } else { 2.0 };
            a * norm * one_sided
        })
        .collect();
    let freqs = (0..n_bins).map(|k| k as f64 * fs / segment_len as f64).collect();
    Ok(Psd {
        freqs,
        power,
        scale: 1.0,
        n_segments,
    })
}

/// Segment length giving `n_segments` half-overlapping segments over `len` samples.
pub fn segment_len_for(len: usize, n_segments: usize) -> usize {
    2 * len / (n_segments + 1)
}

/// Welch with 8 half-overlapping segments.
pub fn estimate_psd_default(series: &[f64], dt: f64) -> Result<Psd> {
    estimate_psd(series, dt, segment_len_for(series.len(), 8), 0.5)
}

pub fn scale_to_max(psd: &Psd, target: f64) -> Result<Psd> {
    let max = psd.power.iter().cloned().fold(0.0, f64::max);
    if !(max > 0.0) {
        return Err(invalid("spectrum has no positive power"));
    }
    let c = target / max;
    Ok(Psd {
        freqs: psd.freqs.clone(),
        power: psd.power.iter().map(|p| p * c).collect(),
        scale: psd.scale * c,
        n_segments: psd.n_segments,
    })
}

/// Cosine similarity `⟨p₁,p₂⟩/(‖p₁‖‖p₂‖)` of two spectra on a common grid.
pub fn spectral_overlap(a: &Psd, b: &Psd) -> Result<f64> {
    if a.freqs != b.freqs {
        return Err(invalid("spectra are on different frequency grids"));
    }
    let dot: f64 = a.power.iter().zip(&b.power).map(|(x, y)| x * y).sum();
    let na = a.power.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nb = b.power.iter().map(|x| x * x).sum::<f64>().sqrt();
    if na == 0.0 || nb == 0.0 {
        return Err(invalid("overlap of an all-zero spectrum"));
    }
    Ok((dot / (na * nb)).clamp(0.0, 1.0))
}

/// Bin-wise mean of spectra on one grid.
pub fn average_psd(psds: &[Psd]) -> Result<Psd> {
    let first = psds.first().ok_or_else(|| invalid("no spectra to average"))?;
    let mut power = vec![0.0; first.power.len()];
    for p in psds {
        if p.freqs != first.freqs {
            return Err(invalid("spectra are on different frequency grids"));
        }
        for (acc, v) in power.iter_mut().zip(&p.power) {
            *acc += v;
        }
    }
    let n = psds.len() as f64;
    Ok(Psd {
        freqs: first.freqs.clone(),
        power: power.into_iter().map(|p| p / n).collect(),
        scale: first.scale,
        n_segments: first.n_segments * psds.len(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OverlapReport {
    pub label: String,
    pub overlap: f64,
    pub n_segments: usize,
    pub scale: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectralConfig {
    pub horizon: f64,
    pub dt: f64,
    pub n_seeds: u64,
    pub seed: u64,
    /// Starting displacement from the rest state.
    pub x0: [f64; 2],
}

impl Default for SpectralConfig {
    fn default() -> Self {
        SpectralConfig {
            horizon: 50.0,
            dt: DEFAULT_DT,
            n_seeds: 20,
            seed: 0,
            x0: [0.0, 0.0],
        }
    }
}

/// Ensemble-averaged spectra of named series, each scaled to peak 40.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectralComparison {
    pub names: Vec<String>,
    pub spectra: Vec<Psd>,
    pub overlaps: Vec<OverlapReport>,
}

impl SpectralComparison {
    pub fn min_overlap(&self) -> f64 {
        self.overlaps.iter().map(|o| o.overlap).fold(1.0, f64::min)
    }
}

fn compare(names: &[&str], per_seed: Vec<Result<Vec<Vec<f64>>>>, dt: f64, pairs: &[(usize, usize)]) -> Result<SpectralComparison> {
    let mut by_series: Vec<Vec<Psd>> = vec![Vec::new(); names.len()];
    for seed_series in per_seed {
        for (j, s) in seed_series?.iter().enumerate() {
            by_series[j].push(estimate_psd_default(s, dt)?);
        }
    }
    let spectra = by_series
        .iter()
        .map(|ps| average_psd(ps).and_then(|p| scale_to_max(&p, 40.0)))
        .collect::<Result<Vec<_>>>()?;
    let overlaps = pairs
        .iter()
        .map(|&(i, j)| {
            Ok(OverlapReport {
                label: format!("{}~{}", names[i], names[j]),
                overlap: spectral_overlap(&spectra[i], &spectra[j])?,
                n_segments: spectra[i].n_segments,
                scale: spectra[i].scale,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SpectralComparison {
        names: names.iter().map(|s| s.to_string()).collect(),
        spectra,
        overlaps,
    })
}

/// Shifted FHN process vs its linearization under a shared noise path, per component.
pub fn linearization_spectra(params: &FhnParams, cfg: &SpectralConfig) -> Result<SpectralComparison> {
    let shifted = shifted_system(params)?;
    let linear = linearized_system(params)?;
    let n_steps = (cfg.horizon / cfg.dt).round() as usize;
    let per_seed = map_trials(cfg.n_seeds, |k| {
        let path = brownian_path(cfg.seed, k, cfg.dt, n_steps)?;
        let a = integrate(&shifted, cfg.x0, &path, &[])?;
        let b = integrate(&linear, cfg.x0, &path, &[])?;
        Ok(vec![a.component(0), b.component(0), a.component(1), b.component(1)])
    });
    compare(
        &["shifted_v", "linear_v", "shifted_w", "linear_w"],
        per_seed,
        cfg.dt,
        &[(0, 1), (2, 3)],
    )
}

/// `‖Ȳ‖` of the normal-form system vs the radial OU `R` and the polar radial `R̄`, all
/// started from `‖Q⁻¹x₀‖`. `Ȳ` and `R̄` share a noise path; `R` has its own.
pub fn radial_spectra(params: &FhnParams, cfg: &SpectralConfig) -> Result<SpectralComparison> {
    let nf = normal_form(params)?;
    let ou = radial_ou_model(params)?;
    let polar = polar_radial_model(params)?;
    let y0 = nf.q_inv.mul_vec(&cfg.x0);
    let r0 = norm2(&y0);
    let n_steps = (cfg.horizon / cfg.dt).round() as usize;
    let per_seed = map_trials(cfg.n_seeds, |k| {
        let path = brownian_path(cfg.seed, 2 * k, cfg.dt, n_steps)?;
        let independent = brownian_path(cfg.seed, 2 * k + 1, cfg.dt, n_steps)?;
        let y = simulate_normal_form(&nf, y0, &path)?;
        let norms: Vec<f64> = y.iter().map(norm2).collect();
        let r = ou.simulate(r0, &independent)?.values;
        let r_bar = polar.simulate(r0, &path)?.values;
        Ok(vec![norms, r, r_bar])
    });
    compare(&["norm_y", "radial_ou", "polar_radial"], per_seed, cfg.dt, &[(0, 1), (0, 2), (1, 2)])
}
