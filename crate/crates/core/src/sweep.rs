//! Sweep specifications and tabular results with CSV/JSON encodings.
//!
//! Every encoded result embeds its [`SweepSpec`] so a file can be traced
//! back to the exact run that produced it. CSV output carries the metadata
//! as a single `# {json}` comment line ahead of the header.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scale {
    Linear,
    Log,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    #[default]
    Csv,
    Json,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepGrid {
    pub start: f64,
    pub stop: f64,
    pub count: usize,
    pub scale: Scale,
}

impl SweepGrid {
    pub fn linear(start: f64, stop: f64, count: usize) -> Self {
        Self {
            start,
            stop,
            count,
            scale: Scale::Linear,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.count < 2 {
            return invalid(format!("grid needs at least 2 points, got {}", self.count));
        }
        if !(self.start.is_finite() && self.stop.is_finite()) {
            return invalid("grid bounds must be finite");
        }
        if self.scale == Scale::Log && !(self.start > 0.0 && self.stop > 0.0) {
            return invalid("log grid bounds must be positive");
        }
        Ok(())
    }

    pub fn values(&self) -> Result<Vec<f64>> {
        self.validate()?;
        let last = (self.count - 1) as f64;
        let lerp = |a: f64, b: f64, i: usize| {
            if i == self.count - 1 {
                b
            } else {
                a + (b - a) * i as f64 / last
            }
        };
        Ok((0..self.count)
            .map(|i| match self.scale {
                Scale::Linear => lerp(self.start, self.stop, i),
                Scale::Log => {
                    if i == self.count - 1 {
                        self.stop
                    } else {
                        lerp(self.start.ln(), self.stop.ln(), i).exp()
                    }
                }
            })
            .collect())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepSpec {
    pub protocol: String,
    pub parameter: String,
    pub grid: SweepGrid,
    pub fixed: BTreeMap<String, f64>,
    pub seed: u64,
    pub output: Option<String>,
    pub format: OutputFormat,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepMetadata {
    pub spec: SweepSpec,
    pub tool_version: String,
    pub seed: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub metadata: SweepMetadata,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

/// Per-point seed derived from the master seed with the SplitMix64 finalizer.
pub fn derive_seed(master: u64, index: u64) -> u64 {
    let mut z = master ^ index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn fmt_float(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.16e}")
    } else {
        // NaN/inf never round-trip through CSV numerics otherwise
        format!("{v}")
    }
}

impl SweepResult {
    pub fn new(spec: SweepSpec, columns: Vec<String>, rows: Vec<Vec<f64>>) -> Result<Self> {
        if let Some(bad) = rows.iter().find(|r| r.len() != columns.len()) {
            return Err(Error::Internal(format!(
                "row width {} != {} columns",
                bad.len(),
                columns.len()
            )));
        }
        let seed = spec.seed;
        Ok(Self {
            metadata: SweepMetadata {
                spec,
                tool_version: TOOL_VERSION.to_string(),
                seed,
            },
            columns,
            rows,
        })
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let k = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| r[k]).collect())
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        let meta = serde_json::to_string(&self.metadata).expect("metadata serializes");
        let _ = writeln!(out, "# {meta}");
        let _ = writeln!(out, "{}", self.columns.join(","));
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(|v| fmt_float(*v)).collect();
            let _ = writeln!(out, "{}", cells.join(","));
        }
        out
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let mut lines = text.lines();
        let meta_line = lines
            .next()
            .and_then(|l| l.strip_prefix("# "))
            .ok_or_else(|| Error::InvalidArgument("missing metadata line".into()))?;
        let metadata: SweepMetadata =
            serde_json::from_str(meta_line).map_err(|e| Error::InvalidArgument(e.to_string()))?;
        let columns: Vec<String> = lines
            .next()
            .ok_or_else(|| Error::InvalidArgument("missing header".into()))?
            .split(',')
            .map(str::to_string)
            .collect();
        let rows = lines
            .filter(|l| !l.is_empty())
            .map(|l| {
                l.split(',')
                    .map(|c| {
                        c.parse::<f64>()
                            .map_err(|e| Error::InvalidArgument(format!("{c}: {e}")))
                    })
                    .collect::<Result<Vec<f64>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            metadata,
            columns,
            rows,
        })
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("result serializes");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::InvalidArgument(e.to_string()))
    }

    pub fn encode(&self, format: OutputFormat) -> String {
        match format {
            OutputFormat::Csv => self.to_csv(),
            OutputFormat::Json => self.to_json(),
        }
    }
}
