//! One function per subcommand; each fills a [`RunDir`].

use std::io::Write;
use std::path::Path;

use anyhow::{bail, Context, Result};
use fhn_lif::firing_isi::{
    estimate_firing_prob, fit_sigmoid, fit_sigmoid_points, isi_experiment, spike_detector, transform_fit,
    FiringProbeGrid, FiringTable, IsiExperimentConfig, SigmoidFit,
};
use fhn_lif::lif_reduction::{model_summary, polar_radial_model, radial_ou_model, simulate_normal_form};
use fhn_lif::linalg::norm2;
use fhn_lif::linearization::{approximation_experiment, lambda_condition, normal_form, ApproxConfig};
use fhn_lif::output::fmt17;
use fhn_lif::sde_engine::{derive_seed, integrate, BrownianPath};
use fhn_lif::spectral::{linearization_spectra, radial_spectra, SpectralComparison, SpectralConfig};
use fhn_lif::attractor_checks::{verify_attractor, VerifyConfig};
use fhn_lif::stats::spearman;
use fhn_lif::FhnParams;
use serde::Serialize;
use serde_json::json;

use crate::config::RunConfig;
use crate::emit::RunDir;

pub fn fixed_point(cfg: &RunConfig, out: &mut RunDir) -> Result<()> {
    let p = cfg.params()?;
    let fp = p.fixed_point()?;
    let (mu, nu) = fp.focus_or_err()?;
    let nf = normal_form(&p)?;
    let unit = normal_form(&p.with_sigma0(1.0))?;
    out.json(
        "fixed_point.json",
        &json!({
            "v_e": fp.v_e,
            "w_e": fp.w_e,
            "mu": mu,
            "nu": nu,
            "ratio": mu / nu,
            "p": fp.p,
            "q": fp.q,
            "delta": fp.delta,
            "jacobian": fp.jacobian,
            "excitable": p.validate_excitable(cfg.model.ratio_threshold),
            "dissipativity": p.dissipativity_constants()?,
            "distance_scale": nf.distance_scale(),
            "h_e_unit": unit.h_e,
            "h_e_unit_norm_sq": unit.h_e[0] * unit.h_e[0] + unit.h_e[1] * unit.h_e[1],
            "lambda": lambda_condition(&p)?,
        }),
    )
}

pub fn simulate(cfg: &RunConfig, out: &mut RunDir) -> Result<()> {
    let p = cfg.params()?;
    let s = &cfg.simulate;
    let n = (s.horizon / cfg.run.dt).round() as usize;
    let path = BrownianPath::generate(cfg.seed(), 0, cfg.run.dt, 0.0, n)?;
    let tr = integrate(&p.system(), [s.v0, s.w0], &path, &[spike_detector()])?;
    out.write("trajectory.csv", |w| tr.write_csv(w))?;
    let spikes: Vec<f64> = tr.events.iter().map(|e| e.time).collect();
    out.json("events.json", &json!({ "spike_times": spikes, "n_spikes": spikes.len() }))
}

pub fn linearize(cfg: &RunConfig, out: &mut RunDir) -> Result<()> {
    let p = cfg.params()?;
    let l = &cfg.linearize;
    let runs = l
        .radii
        .iter()
        .enumerate()
        .map(|(k, &r)| {
            let ac = ApproxConfig {
                horizon: l.horizon,
                dt: cfg.run.dt,
                ..ApproxConfig::new(r, cfg.trials(l.trials), derive_seed(cfg.seed(), k as u64))
            };
            approximation_experiment(&p, &ac)
        })
        .collect::<fhn_lif::Result<Vec<_>>>()?;
    out.json("linearize.json", &json!({ "lambda": lambda_condition(&p)?, "runs": runs }))
}

pub fn lif(cfg: &RunConfig, out: &mut RunDir) -> Result<()> {
    let p = cfg.params()?;
    let nf = normal_form(&p)?;
    let ou = radial_ou_model(&p)?;
    let polar = polar_radial_model(&p)?;
    let n = (cfg.lif.horizon / cfg.run.dt).round() as usize;
    let path = BrownianPath::generate(cfg.seed(), 0, cfg.run.dt, 0.0, n)?;
    let y = simulate_normal_form(&nf, [0.0, 0.0], &path)?;
    let r_ou = ou.simulate(ou.reset_state, &path)?;
    let r_polar = polar.simulate(polar.reset_state, &path)?;
    out.write("lif_paths.csv", |w| {
        writeln!(w, "t,norm_y,radial_ou,polar_radial")?;
        for k in 0..=n {
            writeln!(
                w,
                "{},{},{},{}",
                fmt17(path.time(k)),
                fmt17(norm2(&y[k])),
                fmt17(r_ou.values[k]),
                fmt17(r_polar.values[k])
            )?;
        }
        Ok(())
    })?;
    out.json(
        "lif_models.json",
        &json!({
            "summary": model_summary(&p)?,
            "radial_ou": ou,
            "polar_radial": polar,
            "reflections": { "radial_ou": r_ou.reflections, "polar_radial": r_polar.reflections },
        }),
    )
}

fn firing_table(p: &FhnParams, cfg: &RunConfig) -> Result<FiringTable> {
    let grid = FiringProbeGrid::new(p)?.with_trials(cfg.trials(cfg.firing.trials));
    let grid = FiringProbeGrid { dt: cfg.run.dt, ..grid };
    Ok(estimate_firing_prob(p, &grid, cfg.seed())?)
}

pub fn firing_prob(cfg: &RunConfig, out: &mut RunDir) -> Result<()> {
    let table = firing_table(&cfg.params()?, cfg)?;
    out.write("firing_prob.csv", |w| table.write_csv(w))
}

#[derive(Serialize)]
struct FitRow {
    sigma0: f64,
    a: f64,
    b: f64,
    a_star: f64,
    b_star: f64,
    residual: f64,
}

impl From<SigmoidFit> for FitRow {
    fn from(f: SigmoidFit) -> Self {
        FitRow {
            sigma0: f.sigma0,
            a: f.a,
            b: f.b,
            a_star: f.a_star,
            b_star: f.b_star,
            residual: f.residual,
        }
    }
}

/// Reads a `sigma0,i,l_i,p_hat,se` file back into `(σ₀, distances, probabilities)`.
fn read_firing_csv(path: &Path) -> Result<(f64, Vec<f64>, Vec<f64>)> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let mut lines = text.lines();
    if lines.next().map(str::trim) != Some("sigma0,i,l_i,p_hat,se") {
        bail!("{}: expected header sigma0,i,l_i,p_hat,se", path.display());
    }
    let (mut sigma0, mut ls, mut ps) = (f64::NAN, Vec::new(), Vec::new());
    for (k, line) in lines.enumerate().filter(|(_, l)| !l.trim().is_empty()) {
        let cols: Vec<&str> = line.split(',').collect();
        if cols.len() != 5 {
            bail!("{}: line {} has {} columns", path.display(), k + 2, cols.len());
        }
        sigma0 = cols[0].trim().parse()?;
        ls.push(cols[2].trim().parse()?);
        ps.push(cols[3].trim().parse()?);
    }
    Ok((sigma0, ls, ps))
}

pub fn fit(cfg: &RunConfig, input: Option<&Path>, out: &mut RunDir) -> Result<()> {
    let p = cfg.params()?;
    let nf = normal_form(&p)?;
    let fit = match input {
        Some(path) => {
            let (sigma0, ls, ps) = read_firing_csv(path)?;
            SigmoidFit {
                sigma0,
                ..fit_sigmoid_points(&ls, &ps)?
            }
        }
        None => fit_sigmoid(&firing_table(&p, cfg)?)?,
    };
    out.json("fit.json", &FitRow::from(transform_fit(&fit, &nf)))
}

pub fn isi(cfg: &RunConfig, out: &mut RunDir) -> Result<()> {
    let p = cfg.params()?;
    let i = &cfg.isi;
    let ec = IsiExperimentConfig {
        firing_trials: cfg.trials(cfg.firing.trials),
        m: cfg.trials(i.m),
        n: i.n,
        t_end: i.t_end,
        points: i.points,
        n_spikes: cfg.trials(i.spikes),
        seed: cfg.seed(),
        dt: cfg.run.dt,
    };
    let res = isi_experiment(&p, &ec)?;
    out.write("isi_density.csv", |w| res.radial_ou.write_csv(w))?;
    out.write("isi_density_polar.csv", |w| res.polar_radial.write_csv(w))?;
    out.write("isi_samples.csv", |w| res.sample.write_csv(w))?;
    out.json(
        "isi.json",
        &json!({
            "fit": FitRow::from(res.fit),
            "ks_sample_radial_ou": res.ks_sample_radial_ou,
            "ks_sample_polar_radial": res.ks_sample_polar_radial,
            "ks_models": res.ks_models,
            "ks_spike_time_radial_ou": res.ks_spike_time_radial_ou,
            "mass_radial_ou": res.radial_ou.mass(),
            "mass_polar_radial": res.polar_radial.mass(),
            "n_isis": res.sample.isis.len(),
            "censored": res.sample.censored,
        }),
    )
}

fn write_spectra(out: &mut RunDir, cmp: &SpectralComparison) -> Result<()> {
    for (name, psd) in cmp.names.iter().zip(&cmp.spectra) {
        out.write(&format!("psd_{name}.csv"), |w| psd.write_csv(w))?;
    }
    Ok(())
}

pub fn psd(cfg: &RunConfig, out: &mut RunDir) -> Result<()> {
    let p = cfg.params()?;
    let sc = SpectralConfig {
        horizon: cfg.psd.horizon,
        dt: cfg.run.dt,
        n_seeds: cfg.trials(cfg.psd.seeds),
        seed: cfg.seed(),
        ..SpectralConfig::default()
    };
    let lin = linearization_spectra(&p, &sc)?;
    let rad = radial_spectra(&p, &sc)?;
    write_spectra(out, &lin)?;
    write_spectra(out, &rad)?;
    out.json("psd.json", &json!({ "linearization": lin.overlaps, "radial": rad.overlaps }))
}

pub fn verify(cfg: &RunConfig, out: &mut RunDir) -> Result<()> {
    let p = cfg.params()?;
    let vc = VerifyConfig {
        seed: cfg.seed(),
        dt: cfg.run.dt,
        pullback_seeds: cfg.trials(cfg.verify.pullback_seeds),
        ergodic_horizon: cfg.verify.ergodic_horizon,
    };
    out.json("verify.json", &verify_attractor(&p, &vc)?)
}

pub fn table1(cfg: &RunConfig, out: &mut RunDir) -> Result<()> {
    let base = cfg.params()?;
    let nf = normal_form(&base)?;
    let mut tables = Vec::new();
    let mut rows = Vec::new();
    for &s in &cfg.table1.sigmas {
        let p = base.with_sigma0(s);
        let table = firing_table(&p, cfg)?;
        rows.push(FitRow::from(transform_fit(&fit_sigmoid(&table)?, &nf)));
        tables.push(table);
    }
    out.write("table1_firing.csv", |w| {
        for (k, t) in tables.iter().enumerate() {
            let mut buf = Vec::new();
            t.write_csv(&mut buf)?;
            let text = String::from_utf8_lossy(&buf);
            let body = if k == 0 { &text[..] } else { text.split_once('\n').map_or("", |x| x.1) };
            w.write_all(body.as_bytes())?;
        }
        Ok(())
    })?;
    let sig: Vec<f64> = rows.iter().map(|r| r.sigma0).collect();
    let bs: Vec<f64> = rows.iter().map(|r| r.b).collect();
    let rho = if rows.len() >= 2 { Some(spearman(&sig, &bs)) } else { None };
    out.json("table1.json", &json!({ "rows": rows, "b_spearman": rho }))
}
