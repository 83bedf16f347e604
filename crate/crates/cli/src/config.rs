//! Run configuration: `[section]` / `key = value` files, overridden by flags.

use std::path::Path;

use anyhow::{anyhow, bail, Context, Result};
use fhn_lif::{FhnParams, NoiseKind, NoiseSpec};
use ini::Ini;
use serde::Serialize;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ModelSection {
    pub current: f64,
    pub alpha: f64,
    pub beta: f64,
    pub epsilon: f64,
    pub sigma0: f64,
    pub noise: NoiseKind,
    pub ratio_threshold: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunSection {
    pub seed: u64,
    pub dt: f64,
    pub quick: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimulateSection {
    pub horizon: f64,
    pub v0: f64,
    pub w0: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LinearizeSection {
    pub radii: Vec<f64>,
    pub trials: u64,
    pub horizon: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LifSection {
    pub horizon: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FiringSection {
    pub trials: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IsiSection {
    pub m: u64,
    pub n: usize,
    pub t_end: f64,
    pub points: usize,
    pub spikes: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PsdSection {
    pub horizon: f64,
    pub seeds: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerifySection {
    pub pullback_seeds: u64,
    pub ergodic_horizon: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Table1Section {
    pub sigmas: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub model: ModelSection,
    pub run: RunSection,
    pub simulate: SimulateSection,
    pub linearize: LinearizeSection,
    pub lif: LifSection,
    pub firing: FiringSection,
    pub isi: IsiSection,
    pub psd: PsdSection,
    pub verify: VerifySection,
    pub table1: Table1Section,
}

impl Default for RunConfig {
    fn default() -> Self {
        let p = FhnParams::default();
        RunConfig {
            model: ModelSection {
                current: p.current,
                alpha: p.alpha,
                beta: p.beta,
                epsilon: p.epsilon,
                sigma0: p.noise.sigma0,
                noise: p.noise.kind,
                ratio_threshold: fhn_lif::fhn_model::DEFAULT_RATIO_THRESHOLD,
            },
            run: RunSection {
                seed: 2024,
                dt: fhn_lif::sde_engine::DEFAULT_DT,
                quick: false,
            },
            simulate: SimulateSection {
                horizon: 1000.0,
                v0: -1.00125,
                w0: -0.46,
            },
            linearize: LinearizeSection {
                radii: vec![0.05, 0.1, 0.2],
                trials: 1000,
                horizon: 200.0,
            },
            lif: LifSection { horizon: 1000.0 },
            firing: FiringSection { trials: 1000 },
            isi: IsiSection {
                m: 1000,
                n: 10,
                t_end: 3000.0,
                points: 150,
                spikes: 1000,
            },
            psd: PsdSection {
                horizon: 50.0,
                seeds: 20,
            },
            verify: VerifySection {
                pullback_seeds: 100,
                ergodic_horizon: 1e4,
            },
            table1: Table1Section {
                sigmas: vec![0.001, 0.005, 0.01],
            },
        }
    }
}

fn parse_list(s: &str) -> Result<Vec<f64>> {
    s.split(',')
        .map(|x| x.trim().parse::<f64>().map_err(|e| anyhow!("`{x}`: {e}")))
        .collect()
}

fn join(xs: &[f64]) -> String {
    xs.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",")
}

macro_rules! fields {
    ($($sec:ident { $($key:ident),* })*) => {
        fn set(cfg: &mut RunConfig, section: &str, key: &str, value: &str) -> Result<()> {
            match (section, key) {
                $($( (stringify!($sec), stringify!($key)) => {
                    cfg.$sec.$key = Value::parse(value)
                        .with_context(|| format!("[{section}] {key} = {value}"))?;
                } )*)*
                _ => bail!("unknown key `{key}` in section [{section}]"),
            }
            Ok(())
        }

        fn to_ini(cfg: &RunConfig) -> Ini {
            let mut ini = Ini::new();
            $(
                let mut s = ini.with_section(Some(stringify!($sec)));
                $( s.set(stringify!($key), cfg.$sec.$key.render()); )*
            )*
            ini
        }
    };
}

trait Value: Sized {
    fn parse(s: &str) -> Result<Self>;
    fn render(&self) -> String;
}

impl Value for f64 {
    fn parse(s: &str) -> Result<Self> {
        Ok(s.trim().parse()?)
    }
    fn render(&self) -> String {
        self.to_string()
    }
}

impl Value for u64 {
    fn parse(s: &str) -> Result<Self> {
        Ok(s.trim().parse()?)
    }
    fn render(&self) -> String {
        self.to_string()
    }
}

impl Value for usize {
    fn parse(s: &str) -> Result<Self> {
        Ok(s.trim().parse()?)
    }
    fn render(&self) -> String {
        self.to_string()
    }
}

impl Value for bool {
    fn parse(s: &str) -> Result<Self> {
        Ok(s.trim().parse()?)
    }
    fn render(&self) -> String {
        self.to_string()
    }
}

impl Value for NoiseKind {
    fn parse(s: &str) -> Result<Self> {
        Ok(s.parse()?)
    }
    fn render(&self) -> String {
        match self {
            NoiseKind::Additive => "additive".into(),
            NoiseKind::Multiplicative => "multiplicative".into(),
        }
    }
}

impl Value for Vec<f64> {
    fn parse(s: &str) -> Result<Self> {
        parse_list(s)
    }
    fn render(&self) -> String {
        join(self)
    }
}

fields! {
    model { current, alpha, beta, epsilon, sigma0, noise, ratio_threshold }
    run { seed, dt, quick }
    simulate { horizon, v0, w0 }
    linearize { radii, trials, horizon }
    lif { horizon }
    firing { trials }
    isi { m, n, t_end, points, spikes }
    psd { horizon, seeds }
    verify { pullback_seeds, ergodic_horizon }
    table1 { sigmas }
}

impl RunConfig {
    pub fn from_ini_str(text: &str) -> Result<Self> {
        let ini = Ini::load_from_str(text).map_err(|e| anyhow!("{e}"))?;
        let mut cfg = RunConfig::default();
        for (section, props) in ini.iter() {
            let Some(section) = section else {
                if props.iter().next().is_some() {
                    bail!("keys must sit inside a [section]");
                }
                continue;
            };
            for (k, v) in props.iter() {
                set(&mut cfg, section, k, v)?;
            }
        }
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        Self::from_ini_str(&text)
    }

    /// Canonical text form; also what gets hashed for the output directory.
    pub fn to_ini_string(&self) -> String {
        let mut buf = Vec::new();
        to_ini(self).write_to(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("ini is utf-8")
    }

    pub fn params(&self) -> Result<FhnParams> {
        let m = &self.model;
        let p = FhnParams {
            current: m.current,
            alpha: m.alpha,
            beta: m.beta,
            epsilon: m.epsilon,
            noise: NoiseSpec {
                kind: m.noise,
                sigma0: m.sigma0,
            },
        };
        p.validate()?;
        Ok(p)
    }

    /// Trial counts shrink tenfold under `quick`.
    pub fn trials(&self, n: u64) -> u64 {
        if self.run.quick {
            n.div_ceil(10).max(1)
        } else {
            n
        }
    }

    pub fn seed(&self) -> u64 {
        self.run.seed
    }
}
