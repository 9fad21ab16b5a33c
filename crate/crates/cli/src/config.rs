use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::Deserialize;

/// Settings file for `generate`. Keys mirror the command-line flags; flags
/// given on the command line win.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub struct ConfigFile {
    pub seed: Option<String>,
    pub melody_seed: Option<String>,
    pub chord_seed: Option<String>,
    pub bass_seed: Option<String>,
    pub structure_seed: Option<String>,
    pub structure: Option<String>,
    pub alpha_chords: Option<f64>,
    pub alpha_melody: Option<f64>,
    pub distinctive_threshold: Option<f64>,
    pub rhythm_threshold: Option<f64>,
    pub candidates: Option<usize>,
    pub rng_seed: Option<u64>,
    pub stats: Option<PathBuf>,
    pub out: Option<PathBuf>,
}

impl ConfigFile {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        toml::from_str(&text).with_context(|| format!("parsing {}", path.display()))
    }
}
