use std::path::{Path, PathBuf};

use serde::Deserialize;
use witamp_core::{Construction, Cutoff, PipelineConfig};

use crate::Failure;

pub const DEFAULT_MAX_QUBITS: u32 = 22;

/// Which random instances a run generates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InstanceClass {
    /// Alternating yes- and no-instances, starting with a yes-instance.
    #[default]
    Mixed,
    Yes,
    No,
    /// Haar-random unitaries with no promise on the spectrum.
    Haar,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum InstanceSource {
    Random {
        #[serde(default = "default_count")]
        count: usize,
        #[serde(default = "default_witness_width")]
        witness_width: u32,
        #[serde(default)]
        class: InstanceClass,
    },
    /// Instance JSON files, relative to the config file.
    Files { paths: Vec<PathBuf> },
}

fn default_count() -> usize {
    5
}

fn default_witness_width() -> u32 {
    1
}

impl Default for InstanceSource {
    fn default() -> Self {
        InstanceSource::Random {
            count: default_count(),
            witness_width: default_witness_width(),
            class: InstanceClass::Mixed,
        }
    }
}

/// A `run` configuration, read from TOML or JSON.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub construction: Construction,
    pub p: u64,
    pub c: f64,
    pub s: f64,
    #[serde(default)]
    pub cutoff: Option<Cutoff>,
    #[serde(default)]
    pub seed: u64,
    /// Output directory, relative to the config file.
    #[serde(default)]
    pub out: Option<PathBuf>,
    #[serde(default)]
    pub max_qubits: Option<u32>,
    #[serde(default)]
    pub instances: InstanceSource,
}

impl RunConfig {
    pub fn pipeline(&self) -> PipelineConfig {
        PipelineConfig {
            p: self.p,
            c: self.c,
            s: self.s,
            construction: self.construction,
            cutoff: self.cutoff,
            seed: self.seed,
        }
    }

    pub fn validate(&self) -> Result<(), Failure> {
        self.pipeline().validate()?;
        match &self.instances {
            InstanceSource::Random { count, witness_width, .. } => {
                if *count == 0 {
                    return Err(Failure::Invalid("instances.count must be at least 1".into()));
                }
                if !(1..=6).contains(witness_width) {
                    return Err(Failure::Invalid(format!(
                        "instances.witness_width = {witness_width} outside [1, 6]"
                    )));
                }
            }
            InstanceSource::Files { paths } if paths.is_empty() => {
                return Err(Failure::Invalid("instances.paths is empty".into()));
            }
            InstanceSource::Files { .. } => {}
        }
        Ok(())
    }
}

/// Parses a config document; `.json` files are JSON, everything else TOML.
pub fn parse_config(path: &Path, text: &str) -> Result<RunConfig, Failure> {
    let parsed = if path.extension().is_some_and(|e| e == "json") {
        serde_json::from_str(text).map_err(|e| Failure::Invalid(format!("{}: {e}", path.display())))
    } else {
        toml::from_str(text).map_err(|e| Failure::Invalid(format!("{}: {e}", path.display())))
    }?;
    Ok(parsed)
}

pub fn load_config(path: &Path) -> Result<RunConfig, Failure> {
    let text = std::fs::read_to_string(path).map_err(|e| Failure::Io(format!("{}: {e}", path.display())))?;
    let mut cfg = parse_config(path, &text)?;
    let base = path.parent().unwrap_or(Path::new("."));
    if let Some(out) = &cfg.out {
        cfg.out = Some(base.join(out));
    }
    if let InstanceSource::Files { paths } = &mut cfg.instances {
        for p in paths.iter_mut() {
            *p = base.join(&p);
        }
    }
    Ok(cfg)
}
