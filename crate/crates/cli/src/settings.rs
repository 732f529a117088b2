//! Resolution of the effective run configuration and output provenance.

use std::path::{Path, PathBuf};

use clap::Args;
use peh_core::config::RunConfig;
use peh_core::discretization::Refinement;
use peh_core::{Error, Result};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

#[derive(Debug, Clone, Args, Serialize, Deserialize, Default)]
pub struct ConfigArgs {
    /// Run configuration file (TOML).
    #[arg(long, global = true, visible_alias = "scenario", value_name = "FILE")]
    pub config: Option<PathBuf>,

    /// Bundled configuration used when no file is given.
    #[arg(long, global = true, default_value = "verification_device")]
    #[serde(default)]
    pub fixture: String,

    /// Override of the RNG seed.
    #[arg(long, global = true)]
    pub seed: Option<u64>,

    /// Override of the retained mode count.
    #[arg(long, global = true)]
    pub modes: Option<usize>,

    /// Override of the mesh as `DEGREExNXxNY`, e.g. `3x16x16`.
    #[arg(long, global = true, value_name = "PxNXxNY")]
    pub mesh: Option<String>,

    /// Design override `NAME=VALUE` with NAME in L, R, l, H, h; repeatable.
    #[arg(long = "set", global = true, value_name = "NAME=VALUE")]
    #[serde(default)]
    pub set: Vec<String>,
}

/// The configuration as run, with the text it was hashed from.
#[derive(Debug, Clone)]
pub struct Settings {
    pub config: RunConfig,
    pub hash: String,
    /// Everything needed to rebuild `config` later (stored in run directories).
    pub record: SettingsRecord,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SettingsRecord {
    pub origin: String,
    pub text: String,
    pub args: ConfigArgs,
}

impl Settings {
    pub fn load(args: &ConfigArgs) -> Result<Self> {
        let (origin, text) = match &args.config {
            Some(p) => (
                p.display().to_string(),
                std::fs::read_to_string(p).map_err(|e| Error::Config(format!("{}: {e}", p.display())))?,
            ),
            None => {
                let text = match args.fixture.as_str() {
                    "verification_device" => peh_core::config::VERIFICATION_DEVICE,
                    "commercial_bimorph" => peh_core::config::COMMERCIAL_BIMORPH,
                    other => return Err(Error::Config(format!("unknown fixture '{other}'"))),
                };
                (args.fixture.clone(), text.to_string())
            }
        };
        Self::from_record(SettingsRecord {
            origin,
            text,
            args: args.clone(),
        })
    }

    pub fn from_record(record: SettingsRecord) -> Result<Self> {
        let mut config = RunConfig::parse(&record.text, &record.origin)?;
        let a = &record.args;
        if let Some(s) = a.seed {
            config.seed = s;
            config.pso.seed = s;
        }
        if let Some(m) = a.modes {
            config.modes = m;
        }
        if let Some(m) = &a.mesh {
            config.refinement = parse_mesh(m)?;
        }
        for s in &a.set {
            let (name, value) = s
                .split_once('=')
                .ok_or_else(|| Error::InvalidInput(format!("--set expects NAME=VALUE, got '{s}'")))?;
            let name = name.trim();
            let dim = if matches!(name, "L" | "h") {
                peh_core::config::Dimension::Length
            } else {
                peh_core::config::Dimension::Dimensionless
            };
            let v = peh_core::config::parse_quantity(value, dim).map_err(|e| Error::InvalidInput(format!("--set {name}: {e}")))?;
            config.design.set(name, v)?;
        }
        let mut h = Sha256::new();
        h.update(record.text.as_bytes());
        h.update(serde_json::to_vec(&(&a.seed, &a.modes, &a.mesh, &a.set))?);
        let hash = hex::encode(h.finalize());
        Ok(Self { config, hash, record })
    }

    /// `#`-prefixed lines opening every CSV output.
    pub fn header(&self, extra: &[(&str, String)]) -> String {
        let mut s = format!(
            "# peh {}\n# config_sha256 {}\n# seed {}\n",
            env!("CARGO_PKG_VERSION"),
            self.hash,
            self.config.seed
        );
        for (k, v) in extra {
            s.push_str(&format!("# {k} {v}\n"));
        }
        s
    }

    pub fn provenance(&self) -> serde_json::Value {
        serde_json::json!({
            "version": env!("CARGO_PKG_VERSION"),
            "config_sha256": self.hash,
            "seed": self.config.seed,
        })
    }
}

pub fn parse_mesh(s: &str) -> Result<Refinement> {
    let parts: Vec<usize> = s
        .split('x')
        .map(|p| p.trim().parse::<usize>())
        .collect::<std::result::Result<_, _>>()
        .map_err(|_| Error::InvalidInput(format!("mesh '{s}' is not DEGREExNXxNY")))?;
    match parts[..] {
        [p, nx, ny] => Ok(Refinement::new(p, nx, ny)),
        [p, n] => Ok(Refinement::uniform(p, n)),
        _ => Err(Error::InvalidInput(format!("mesh '{s}' is not DEGREExNXxNY"))),
    }
}

/// CSV text with the provenance header prepended, written atomically enough
/// for our purposes (whole file at once).
pub fn write_with_header(path: &Path, header: &str, body: &str) -> Result<()> {
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir)?;
    }
    std::fs::write(path, format!("{header}{body}"))?;
    Ok(())
}

pub fn write_json(path: &Path, value: &impl Serialize) -> Result<()> {
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir)?;
    }
    std::fs::write(path, serde_json::to_string_pretty(value)? + "\n")?;
    Ok(())
}

pub fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::InvalidInput(format!("{}: {e}", path.display())))?;
    Ok(serde_json::from_str(&text)?)
}
