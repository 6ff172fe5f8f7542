//! Run configuration: command-line flags layered over an optional JSON manifest.

use crate::CliError;
use clap::{Args, ValueEnum};
use graphon_chroma::graphon::{block_lower, block_upper, BlockGraphon, Builtin, GeneralGraphon};
use graphon_chroma::qcore::OptimizerConfig;
use serde::Deserialize;
use std::path::{Path, PathBuf};

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Approx {
    Upper,
    Lower,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    Block1,
    Block2,
}

/// Every option of every command. Flags win over manifest values; unset
/// options fall back to per-command defaults.
#[derive(Clone, Debug, Default, Args, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    /// figure-block, W_L, W_R, constant:<p>, or a JSON file
    /// ({"masses":[..],"P":[[..]]} or {"kind":"grid","values":[[..]]}).
    #[arg(long, global = true)]
    pub graphon: Option<String>,
    /// Block count for W_L and grid graphons.
    #[arg(long, global = true)]
    pub blocks: Option<usize>,
    /// Which block approximation to use for W_L and grids (default upper).
    #[arg(long, global = true, value_enum)]
    pub approx: Option<Approx>,
    #[arg(long, global = true)]
    pub n: Option<usize>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Comma-separated seeds.
    #[arg(long, global = true, value_delimiter = ',')]
    pub seeds: Option<Vec<u64>>,
    #[arg(long, global = true)]
    pub multistart: Option<usize>,
    /// Candidate classes per colour in balanced colouring.
    #[arg(long, global = true)]
    pub restarts: Option<usize>,
    #[arg(long, global = true)]
    pub trials: Option<usize>,
    /// Comma-separated property suites (default all).
    #[arg(long, global = true, value_delimiter = ',')]
    pub suites: Option<Vec<String>>,
    /// Comma-separated: balanced, greedy-decomp, optimal-decomp, dsatur.
    #[arg(long, global = true, value_delimiter = ',')]
    pub strategies: Option<Vec<String>>,
    /// greedy, optimal, trivial, or a JSON file {"parts":[..]}.
    #[arg(long, global = true)]
    pub decomposition: Option<String>,
    /// Comma-separated block sizes: sample a block model instead of G(n, W).
    #[arg(long, global = true, value_delimiter = ',')]
    pub sizes: Option<Vec<usize>>,
    #[arg(long, global = true, value_enum)]
    pub family: Option<Family>,
    #[arg(long, global = true, value_delimiter = ',')]
    pub lengths: Option<Vec<f64>>,
    #[arg(long, global = true, value_delimiter = ',')]
    pub p_vec: Option<Vec<f64>>,
    #[arg(long, global = true)]
    pub p: Option<f64>,
    #[arg(long, global = true)]
    pub p0: Option<f64>,
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    /// Manifest only: optimizer settings ({"multistart":..,"seed":..,...}).
    #[arg(skip)]
    pub optimizer: Option<OptimizerConfig>,
}

macro_rules! overlay {
    ($flags:expr, $file:expr, $($f:ident),*) => {
        RunConfig { $($f: $flags.$f.or($file.$f),)* }
    };
}

impl RunConfig {
    /// `self` (flags) over the manifest at `path`.
    pub fn over_manifest(self, path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        let file: RunConfig = serde_json::from_str(&text).map_err(|e| CliError::parse(path, e))?;
        Ok(overlay!(
            self, file, graphon, blocks, approx, n, seed, seeds, multistart, restarts, trials, suites, strategies,
            decomposition, sizes, family, lengths, p_vec, p, p0, out, format, optimizer
        ))
    }

    pub fn optimizer(&self) -> Result<OptimizerConfig, CliError> {
        let mut cfg = self.optimizer.clone().unwrap_or_default();
        if let Some(m) = self.multistart {
            cfg.multistart = m;
        }
        if let Some(s) = self.seed {
            cfg.seed = s;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn need<T: Clone>(&self, v: &Option<T>, flag: &str) -> Result<T, CliError> {
        v.clone().ok_or_else(|| CliError::usage(format!("--{flag} is required for this command")))
    }

    pub fn graphon(&self) -> Result<(String, BlockGraphon), CliError> {
        let spec = self.need(&self.graphon, "graphon")?;
        let w = resolve_graphon(&spec, self.blocks, self.approx.unwrap_or(Approx::Upper))?;
        Ok((spec, w))
    }
}

fn resolve_graphon(spec: &str, blocks: Option<usize>, approx: Approx) -> Result<BlockGraphon, CliError> {
    let general = |g: GeneralGraphon| -> Result<BlockGraphon, CliError> {
        let k = blocks.ok_or_else(|| CliError::usage("this graphon is not a block graphon; pass --blocks".into()))?;
        Ok(match approx {
            Approx::Upper => block_upper(&g, k)?,
            Approx::Lower => block_lower(&g, k)?,
        })
    };
    if let Some(p) = spec.strip_prefix("constant:") {
        let p: f64 = p
            .parse()
            .map_err(|_| CliError::usage(format!("constant:<p> needs a number, got {p:?}")))?;
        return Ok(BlockGraphon::constant(p)?);
    }
    match Builtin::from_name(spec) {
        Some(Builtin::FigureBlock) => return Ok(BlockGraphon::figure_block()),
        Some(Builtin::WR) => return Ok(BlockGraphon::w_r()),
        Some(Builtin::WL) => return general(GeneralGraphon::Builtin { name: Builtin::WL }),
        None => {}
    }
    let path = Path::new(spec);
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    let value: serde_json::Value = serde_json::from_str(&text).map_err(|e| CliError::parse(path, e))?;
    if value.get("kind").is_some() {
        let g: GeneralGraphon = serde_json::from_value(value).map_err(|e| CliError::parse(path, e))?;
        g.validate()?;
        general(g)
    } else {
        // Shape errors carry line context; value errors come from validation.
        let raw: RawBlock = serde_json::from_str(&text).map_err(|e| CliError::parse(path, e))?;
        Ok(BlockGraphon::new(raw.masses, raw.p)?)
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawBlock {
    masses: Vec<f64>,
    #[serde(rename = "P")]
    p: Vec<Vec<f64>>,
}
