//! `fhnlif`: runs the FHN/LIF experiments and writes plot-ready CSV/JSON.

mod commands;
mod config;
mod emit;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use fhn_lif::NoiseKind;

use config::RunConfig;
use emit::RunDir;

#[derive(Parser)]
#[command(name = "fhnlif", version, about = "Stochastic FitzHugh-Nagumo and LIF reduction experiments")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Global {
    /// INI file with `[section]` headers and `key = value` lines.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Noise intensity; for `table1` it restricts the run to this column.
    #[arg(long, global = true)]
    sigma0: Option<f64>,
    #[arg(long, global = true, value_enum)]
    noise: Option<Noise>,
    /// Root under which the content-addressed run directory is created.
    #[arg(long, global = true, default_value = "runs")]
    out: PathBuf,
    /// Ten times fewer trials.
    #[arg(long, global = true)]
    quick: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum Noise {
    Additive,
    Multiplicative,
}

#[derive(Subcommand)]
enum Command {
    /// Rest state, eigenvalues and derived constants.
    FixedPoint,
    /// One stochastic FHN trajectory with spike events.
    Simulate,
    /// Linearization error experiments over the configured radii.
    Linearize,
    /// Build both radial LIF models and drive them with the normal form on one path.
    Lif,
    /// Firing probabilities on the probe line.
    FiringProb,
    /// Sigmoid fit of firing probabilities (from `--input` or a fresh estimate).
    FitSigmoid {
        #[arg(long)]
        input: Option<PathBuf>,
    },
    /// Model ISI densities against the empirical FHN sample.
    Isi,
    /// Power spectra and overlap scores.
    Psd,
    /// Random-attractor property checks.
    Verify {
        #[arg(default_value = "attractor", value_parser = ["attractor"])]
        target: String,
    },
    /// Sigmoid fits for every configured σ₀.
    Table1,
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::FixedPoint => "fixed-point",
            Command::Simulate => "simulate",
            Command::Linearize => "linearize",
            Command::Lif => "lif",
            Command::FiringProb => "firing-prob",
            Command::FitSigmoid { .. } => "fit-sigmoid",
            Command::Isi => "isi",
            Command::Psd => "psd",
            Command::Verify { .. } => "verify",
            Command::Table1 => "table1",
        }
    }
}

fn error_kind(e: &anyhow::Error) -> &'static str {
    use fhn_lif::Error as E;
    match e.downcast_ref::<E>() {
        Some(E::InvalidArgument(_)) => "invalid_argument",
        Some(E::BlowUp { .. }) => "blow_up",
        Some(E::NotUniqueFixedPoint { .. }) => "not_unique_fixed_point",
        Some(E::UnsupportedRegime(_)) => "unsupported_regime",
        Some(E::Singular(_)) => "singular",
        Some(E::FitFailure(_)) => "fit_failure",
        None if e.downcast_ref::<std::io::Error>().is_some() => "io",
        None => "invalid_config",
    }
}

fn fail(kind: &str, message: String, code: u8) -> ExitCode {
    let err = serde_json::json!({ "error": { "kind": kind, "message": message } });
    eprintln!("{err}");
    ExitCode::from(code)
}

fn resolve(g: &Global) -> anyhow::Result<RunConfig> {
    let mut cfg = match &g.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    if let Some(s) = g.seed {
        cfg.run.seed = s;
    }
    if let Some(s) = g.sigma0 {
        cfg.model.sigma0 = s;
        cfg.table1.sigmas = vec![s];
    }
    if let Some(n) = g.noise {
        cfg.model.noise = match n {
            Noise::Additive => NoiseKind::Additive,
            Noise::Multiplicative => NoiseKind::Multiplicative,
        };
    }
    cfg.run.quick |= g.quick;
    cfg.params()?;
    Ok(cfg)
}

fn run(cli: &Cli) -> anyhow::Result<PathBuf> {
    let cfg = resolve(&cli.global)?;
    let name = cli.command.name();
    let mut out = RunDir::create(&cli.global.out, name, &cfg)?;
    match &cli.command {
        Command::FixedPoint => commands::fixed_point(&cfg, &mut out)?,
        Command::Simulate => commands::simulate(&cfg, &mut out)?,
        Command::Linearize => commands::linearize(&cfg, &mut out)?,
        Command::Lif => commands::lif(&cfg, &mut out)?,
        Command::FiringProb => commands::firing_prob(&cfg, &mut out)?,
        Command::FitSigmoid { input } => commands::fit(&cfg, input.as_deref(), &mut out)?,
        Command::Isi => commands::isi(&cfg, &mut out)?,
        Command::Psd => commands::psd(&cfg, &mut out)?,
        Command::Verify { .. } => commands::verify(&cfg, &mut out)?,
        Command::Table1 => commands::table1(&cfg, &mut out)?,
    }
    out.finish(name, &cfg)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => return fail("usage", e.to_string().trim_end().to_string(), 2),
    };
    match run(&cli) {
        Ok(dir) => {
            println!("{}", dir.display());
            ExitCode::SUCCESS
        }
        Err(e) => fail(error_kind(&e), format!("{e:#}"), 1),
    }
}
