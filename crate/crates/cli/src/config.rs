//! The resolved experiment description. It is written verbatim as
//! `manifest.json` and can be fed back through `scanorder run --config`.

use std::path::{Path, PathBuf};

use clap::ValueEnum;
use serde::{Deserialize, Serialize};

use scanorder::coupling::Sampler;
use scanorder::model::ModelSpec;

use crate::error::CliError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Analysis {
    Spectral,
    Mixing,
    Lumped,
    Coupling,
    Verify,
}

impl Analysis {
    pub fn as_str(self) -> &'static str {
        match self {
            Analysis::Spectral => "spectral",
            Analysis::Mixing => "mixing",
            Analysis::Lumped => "lumped",
            Analysis::Coupling => "coupling",
            Analysis::Verify => "verify",
        }
    }

    fn randomized(self) -> bool {
        matches!(self, Analysis::Coupling | Analysis::Verify)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Suite {
    Theorem1,
    Identities,
    Prop5,
    Mixing,
    Fill,
}

impl Suite {
    pub fn as_str(self) -> &'static str {
        match self {
            Suite::Theorem1 => "theorem1",
            Suite::Identities => "identities",
            Suite::Prop5 => "prop5",
            Suite::Mixing => "mixing",
            Suite::Fill => "fill",
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum MixingMethod {
    /// Step-by-step powering up to 256 states, doubling above.
    #[default]
    Auto,
    /// Step-by-step powering; the curve lists every `t`.
    Iterate,
    /// Squaring and binary search; the curve lists the evaluated `t` only.
    Doubling,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub model: Option<ModelSpec>,
    pub analyses: Vec<Analysis>,
    pub samplers: Vec<Sampler>,
    pub lazy: bool,
    pub coupling_lazy: bool,
    pub threshold: f64,
    pub t_max: u64,
    pub mixing_method: MixingMethod,
    pub max_updates: u64,
    pub replicates: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    pub cap: usize,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub lumped_sizes: Vec<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub suite: Option<Suite>,
    pub trials: usize,
    pub max_side: usize,
    pub out: PathBuf,
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<(), CliError> {
        let stage = "config";
        if self.analyses.is_empty() {
            return Err(CliError::user(stage, "no analyses selected"));
        }
        if self.samplers.is_empty() {
            return Err(CliError::user(stage, "no samplers selected"));
        }
        if self.seed.is_none() {
            if let Some(a) = self.analyses.iter().find(|a| a.randomized()) {
                return Err(CliError::user(stage, format!("--seed is required for {}", a.as_str())));
            }
        }
        if !(self.threshold > 0.0 && self.threshold < 1.0) {
            return Err(CliError::user(stage, format!("threshold {} not in (0, 1)", self.threshold)));
        }
        if self.t_max == 0 || self.replicates == 0 || self.max_updates == 0 || self.trials == 0 {
            return Err(CliError::user(
                stage,
                "t_max, replicates, max_updates and trials must be positive",
            ));
        }
        if self.max_side == 0 {
            return Err(CliError::user(stage, "max_side must be positive"));
        }
        let needs_model = self
            .analyses
            .iter()
            .any(|a| matches!(a, Analysis::Spectral | Analysis::Mixing | Analysis::Coupling));
        if needs_model && self.model.is_none() {
            return Err(CliError::user(stage, "a model is required (--model or --model-file)"));
        }
        if self.analyses.contains(&Analysis::Lumped)
            && self.lumped_sizes.is_empty()
            && !matches!(self.model, Some(ModelSpec::HardcoreKnn { .. }))
        {
            return Err(CliError::user(
                stage,
                "lumped analysis needs a hardcore_knn model or --sizes",
            ));
        }
        if self.analyses.contains(&Analysis::Verify) && self.suite.is_none() {
            return Err(CliError::user(stage, "verify needs --suite"));
        }
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let stage = "read config";
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::user(stage, format!("{}: {e}", path.display())))?;
        parse_json(&text, "parse config")
    }
}

/// Byte offset of a 1-based line/column position.
pub fn byte_offset(text: &str, line: usize, column: usize) -> usize {
    let start: usize = text
        .split_inclusive('\n')
        .take(line.saturating_sub(1))
        .map(str::len)
        .sum();
    (start + column.saturating_sub(1)).min(text.len())
}

pub fn parse_json<T: for<'de> Deserialize<'de>>(text: &str, stage: &str) -> Result<T, CliError> {
    serde_json::from_str(text).map_err(|e| {
        let offset = byte_offset(text, e.line(), e.column());
        CliError::user(stage, format!("{e} (byte offset {offset})"))
    })
}

/// Parses `4-22`, `4..=22`, `3,5,8` or any comma-separated mix.
pub fn parse_sizes(spec: &str) -> Result<Vec<usize>, CliError> {
    let bad = || CliError::user("arguments", format!("cannot parse sizes {spec:?}"));
    let mut out = Vec::new();
    for part in spec.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        let range = part.split_once("..=").or_else(|| part.split_once('-'));
        match range {
            Some((a, b)) => {
                let (a, b): (usize, usize) = (a.trim().parse().map_err(|_| bad())?, b.trim().parse().map_err(|_| bad())?);
                if a > b {
                    return Err(bad());
                }
                out.extend(a..=b);
            }
            None => out.push(part.parse().map_err(|_| bad())?),
        }
    }
    if out.is_empty() {
        return Err(bad());
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn offsets() {
        let text = "{\n  \"a\": ,\n}";
        assert_eq!(byte_offset(text, 2, 8), 9);
        assert_eq!(&text[9..10], ",");
        assert_eq!(byte_offset(text, 1, 1), 0);
    }

    #[test]
    fn sizes() {
        assert_eq!(parse_sizes("4-6").unwrap(), vec![4, 5, 6]);
        assert_eq!(parse_sizes("2..=3,7").unwrap(), vec![2, 3, 7]);
        assert!(parse_sizes("6-4").is_err());
        assert!(parse_sizes("x").is_err());
    }
}
