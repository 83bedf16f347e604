//! Artifact writing: 17-digit JSON, content-addressed run directories, manifests.

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use fhn_lif::output::fmt17;
use serde::Serialize;
use serde_json::ser::{Formatter, PrettyFormatter};
use sha2::{Digest, Sha256};

use crate::config::RunConfig;

/// Pretty JSON whose floats carry 17 significant digits.
struct Digits17<'a>(PrettyFormatter<'a>);

impl Formatter for Digits17<'_> {
    fn write_f64<W: ?Sized + Write>(&mut self, w: &mut W, value: f64) -> io::Result<()> {
        w.write_all(fmt17(value).as_bytes())
    }
    fn write_f32<W: ?Sized + Write>(&mut self, w: &mut W, value: f32) -> io::Result<()> {
        self.write_f64(w, value as f64)
    }
    fn begin_array<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_array(w)
    }
    fn end_array<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_array(w)
    }
    fn begin_array_value<W: ?Sized + Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_array_value(w, first)
    }
    fn end_array_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_array_value(w)
    }
    fn begin_object<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object(w)
    }
    fn end_object<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object(w)
    }
    fn begin_object_key<W: ?Sized + Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_object_key(w, first)
    }
    fn begin_object_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object_value(w)
    }
    fn end_object_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object_value(w)
    }
}

pub fn to_json<T: Serialize + ?Sized>(value: &T) -> Result<String> {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, Digits17(PrettyFormatter::new()));
    value.serialize(&mut ser)?;
    buf.push(b'\n');
    Ok(String::from_utf8(buf)?)
}

/// Output directory of one run, named by a hash of command and resolved config.
pub struct RunDir {
    pub path: PathBuf,
    pub hash: String,
    artifacts: Vec<String>,
}

impl RunDir {
    pub fn create(root: &Path, command: &str, cfg: &RunConfig) -> Result<Self> {
        let mut h = Sha256::new();
        h.update(command.as_bytes());
        h.update(b"\n");
        h.update(cfg.to_ini_string().as_bytes());
        let hash = hex::encode(h.finalize());
        let path = root.join(format!("{command}-{}", &hash[..16]));
        fs::create_dir_all(&path).with_context(|| format!("creating {}", path.display()))?;
        fs::write(path.join("config.ini"), cfg.to_ini_string())?;
        Ok(RunDir {
            path,
            hash,
            artifacts: vec!["config.ini".into()],
        })
    }

    pub fn json<T: Serialize + ?Sized>(&mut self, name: &str, value: &T) -> Result<()> {
        let text = to_json(value)?;
        self.write(name, |w| w.write_all(text.as_bytes()))
    }

    pub fn write(&mut self, name: &str, f: impl FnOnce(&mut io::BufWriter<fs::File>) -> io::Result<()>) -> Result<()> {
        let file = fs::File::create(self.path.join(name)).with_context(|| format!("creating {name}"))?;
        let mut w = io::BufWriter::new(file);
        f(&mut w)?;
        w.flush()?;
        self.artifacts.push(name.to_string());
        Ok(())
    }

    /// Written last, so an existing manifest means the run completed.
    pub fn finish(mut self, command: &str, cfg: &RunConfig) -> Result<PathBuf> {
        #[derive(Serialize)]
        struct Manifest<'a> {
            command: &'a str,
            seed: u64,
            config_hash: &'a str,
            config: &'a RunConfig,
            versions: Versions,
            artifacts: &'a [String],
        }
        #[derive(Serialize)]
        struct Versions {
            #[serde(rename = "fhn-lif")]
            core: &'static str,
            fhnlif: &'static str,
        }
        self.artifacts.sort();
        let m = Manifest {
            command,
            seed: cfg.seed(),
            config_hash: &self.hash,
            config: cfg,
            versions: Versions {
                core: fhn_lif::VERSION,
                fhnlif: env!("CARGO_PKG_VERSION"),
            },
            artifacts: &self.artifacts,
        };
        fs::write(self.path.join("manifest.json"), to_json(&m)?)?;
        Ok(self.path)
    }
}
