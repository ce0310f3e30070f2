//! Optional TOML defaults. Values found here sit below environment variables
//! and command-line flags, which clap has already merged by the time the file
//! is consulted.

use std::path::Path;

use homodyne_core::sweep::OutputFormat;
use serde::Deserialize;

use crate::Usage;

#[derive(Debug, Default, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    #[serde(rename = "N")]
    pub atoms: Option<usize>,
    pub chi_x: Option<f64>,
    pub chi_p: Option<f64>,
    pub eta: Option<f64>,
    pub outcome: Option<f64>,
    #[serde(rename = "n")]
    pub rounds: Option<usize>,
    pub n_t: Option<f64>,
    pub g: Option<f64>,
    pub delta: Option<f64>,
    pub kappa: Option<f64>,
    pub np: Option<f64>,
    pub threshold: Option<f64>,
    pub shots: Option<usize>,
    pub seed: Option<u64>,
    pub out: Option<String>,
    pub format: Option<OutputFormat>,
}

impl FileConfig {
    pub fn load(path: Option<&Path>) -> Result<Self, Usage> {
        let Some(path) = path else {
            return Ok(Self::default());
        };
        let text = std::fs::read_to_string(path)
            .map_err(|e| Usage(format!("cannot read config {}: {e}", path.display())))?;
        toml::from_str(&text).map_err(|e| Usage(format!("bad config {}: {e}", path.display())))
    }
}
