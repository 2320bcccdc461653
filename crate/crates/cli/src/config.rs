use std::path::PathBuf;

use anyhow::{bail, Context};
use serde::{Deserialize, Serialize};

/// Resolved experiment configuration. Config-file keys match these field
/// names exactly; command-line flags override file values.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub command: String,
    pub ensemble: EnsembleChoice,
    pub f_id: String,
    pub nu: f64,
    pub alpha_list: Vec<f64>,
    pub k_list: Vec<f64>,
    #[serde(rename = "N_list")]
    pub n_list: Vec<usize>,
    pub mc_replicates: usize,
    pub seed: u64,
    pub quad_n: usize,
    pub out_format: OutFormat,
    pub out_path: Option<PathBuf>,
    #[serde(default)]
    pub power_list: Vec<u32>,
    #[serde(default)]
    pub workers: usize,
    #[serde(default)]
    pub manifest: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EnsembleChoice {
    Sine,
    Bessel,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutFormat {
    Csv,
    Json,
}

/// Partial configuration as read from a JSON config file; every field is
/// optional so flags and defaults can fill the gaps. The command always
/// comes from the CLI subcommand.
#[derive(Debug, Clone, Default, Deserialize)]
pub struct PartialConfig {
    pub ensemble: Option<EnsembleChoice>,
    pub f_id: Option<String>,
    pub nu: Option<f64>,
    pub alpha_list: Option<Vec<f64>>,
    pub k_list: Option<Vec<f64>>,
    #[serde(rename = "N_list")]
    pub n_list: Option<Vec<usize>>,
    pub mc_replicates: Option<usize>,
    pub seed: Option<u64>,
    pub quad_n: Option<usize>,
    pub out_format: Option<OutFormat>,
    pub out_path: Option<PathBuf>,
    pub power_list: Option<Vec<u32>>,
    pub workers: Option<usize>,
}

impl PartialConfig {
    pub fn from_file(path: &std::path::Path) -> anyhow::Result<PartialConfig> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading config file {}", path.display()))?;
        serde_json::from_str(&text)
            .with_context(|| format!("parsing config file {}", path.display()))
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> anyhow::Result<()> {
        let needs_alpha = matches!(
            self.command.as_str(),
            "mean" | "variance" | "cf" | "trace-powers" | "identities"
        );
        if needs_alpha && self.alpha_list.is_empty() {
            bail!("command '{}' requires a non-empty alpha list", self.command);
        }
        if self.command == "cf" && self.k_list.is_empty() {
            bail!("command 'cf' requires a non-empty k list");
        }
        if matches!(self.command.as_str(), "montecarlo" | "kernel-convergence")
            && self.n_list.is_empty()
        {
            bail!("command '{}' requires a non-empty N list", self.command);
        }
        if self.command == "trace-powers" && self.power_list.is_empty() {
            bail!("command 'trace-powers' requires a non-empty power list");
        }
        if self.quad_n == 0 {
            bail!("quad_n must be positive");
        }
        if self.manifest && self.out_path.is_none() {
            bail!("--manifest requires --out so the manifest has somewhere to live");
        }
        Ok(())
    }
}
