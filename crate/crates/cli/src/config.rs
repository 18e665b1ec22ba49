//! Run configuration: a TOML file with one table per concern, overridden
//! field by field from the command line.

use std::path::Path;

use anyhow::{bail, Context, Result};
use graphcomplete::eval::{MethodVariant, SweepSampling};
use graphcomplete::graphbuild::GraphBuildConfig;
use graphcomplete::io::IngestConfig;
use graphcomplete::solver::SolverConfig;
use graphcomplete::synthgen::{SamplingMode, SyntheticRecipe};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RunConfig {
    pub seed: u64,
    pub recipe: SyntheticRecipe,
    pub sampling: SamplingSection,
    pub solver: SolverConfig,
    pub graph: GraphSection,
    pub cv: CvSection,
    pub sweep: SweepSection,
    pub ingest: IngestSection,
}

impl RunConfig {
    pub fn load(path: Option<&Path>) -> Result<Self> {
        match path {
            None => Ok(RunConfig::default()),
            Some(p) => {
                let text = std::fs::read_to_string(p).with_context(|| format!("reading config {}", p.display()))?;
                let raw: toml::Table = toml::from_str(&text).with_context(|| format!("parsing config {}", p.display()))?;
                let cfg: RunConfig = raw
                    .clone()
                    .try_into()
                    .with_context(|| format!("parsing config {}", p.display()))?;
                let known = toml::Table::try_from(&cfg)?;
                let unknown = unknown_keys(&raw, &known, "");
                if !unknown.is_empty() {
                    bail!("{}: unknown config keys: {}", p.display(), unknown.join(", "));
                }
                Ok(cfg)
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum SamplingKind {
    Uniform,
    PowerLaw,
}

/// Observation sampler used by `synth`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SamplingSection {
    pub mode: SamplingKind,
    pub fraction: f64,
    /// Power-law epochs; when unset they are tuned to reach `fraction`.
    pub epochs: Option<u32>,
}

impl Default for SamplingSection {
    fn default() -> Self {
        SamplingSection { mode: SamplingKind::Uniform, fraction: 0.2, epochs: None }
    }
}

impl SamplingSection {
    pub fn mode_for(&self, m: usize, n: usize) -> Result<SamplingMode> {
        Ok(match self.mode {
            SamplingKind::Uniform => SamplingMode::Uniform { fraction: self.fraction },
            SamplingKind::PowerLaw => SamplingMode::PowerLaw {
                epochs: match self.epochs {
                    Some(s) => s,
                    None => graphcomplete::synthgen::epochs_for_density(m, n, self.fraction)?,
                },
            },
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum GraphMethod {
    Epsilon,
    Knn,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GraphSection {
    pub method: GraphMethod,
    #[serde(flatten)]
    pub build: GraphBuildConfig,
    /// Neighbors per vertex for `method = "knn"`.
    pub k: usize,
}

impl Default for GraphSection {
    fn default() -> Self {
        GraphSection { method: GraphMethod::Epsilon, build: GraphBuildConfig::default(), k: 10 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CvSection {
    pub folds: usize,
    pub gamma_n: Vec<f64>,
    pub gamma_r: Vec<f64>,
    pub gamma_c: Vec<f64>,
    pub variant: MethodVariant,
    /// Clip predictions to `[lo, hi]` before scoring.
    pub clip: Option<[f64; 2]>,
}

impl Default for CvSection {
    fn default() -> Self {
        let grid = graphcomplete::eval::Grid::default();
        CvSection {
            folds: 5,
            gamma_n: grid.gamma_n,
            gamma_r: grid.gamma_r,
            gamma_c: grid.gamma_c,
            variant: MethodVariant::Combined,
            clip: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SweepSection {
    pub levels: Vec<f64>,
    pub sampling: SweepSampling,
    pub variants: Vec<MethodVariant>,
    pub test_fraction: f64,
}

impl Default for SweepSection {
    fn default() -> Self {
        let d = graphcomplete::eval::SweepConfig::default();
        SweepSection { levels: d.levels, sampling: d.sampling, variants: d.variants, test_fraction: d.test_fraction }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct IngestSection {
    #[serde(flatten)]
    pub select: IngestConfig,
    pub delimiter: String,
    pub rating_min: f64,
    pub rating_max: f64,
}

impl Default for IngestSection {
    fn default() -> Self {
        IngestSection { select: IngestConfig::default(), delimiter: "::".into(), rating_min: 0.5, rating_max: 5.0 }
    }
}

pub fn parse_variant(s: &str) -> Result<MethodVariant> {
    match MethodVariant::parse(s) {
        Some(v) => Ok(v),
        None => bail!("unknown variant `{s}` (expected nuclear_only, graphs_only or combined)"),
    }
}

/// Keys of `raw` (recursively) that do not survive a parse/serialize round
/// trip, i.e. keys no config field consumed.
fn unknown_keys(raw: &toml::Table, known: &toml::Table, prefix: &str) -> Vec<String> {
    let mut out = Vec::new();
    for (k, v) in raw {
        let path = if prefix.is_empty() { k.clone() } else { format!("{prefix}.{k}") };
        match (v, known.get(k)) {
            (_, None) => out.push(path),
            (toml::Value::Table(r), Some(toml::Value::Table(kt))) => out.extend(unknown_keys(r, kt, &path)),
            _ => {}
        }
    }
    out
}

/// Writes `value` into `slot` when a flag was given.
pub fn set<T>(slot: &mut T, value: Option<T>) {
    if let Some(v) = value {
        *slot = v;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_file_gives_defaults() {
        let cfg: RunConfig = toml::from_str("").unwrap();
        assert_eq!(cfg, RunConfig::default());
    }

    #[test]
    fn sections_parse() {
        let cfg: RunConfig = toml::from_str(
            r#"
            seed = 9
            [recipe]
            n_rows = 40
            [solver]
            rho = 0.1
            [graph]
            method = "knn"
            epsilon = 0.9
            [cv]
            variant = "nuclear_only"
            clip = [1.0, 5.0]
            [sweep]
            sampling = "power_law"
            [ingest]
            target_rows = 20
            delimiter = "\t"
            "#,
        )
        .unwrap();
        assert_eq!(cfg.seed, 9);
        assert_eq!(cfg.recipe.n_rows, 40);
        assert_eq!(cfg.recipe.n_cols, 200);
        assert_eq!(cfg.solver.rho, 0.1);
        assert_eq!(cfg.graph.method, GraphMethod::Knn);
        assert_eq!(cfg.graph.build.epsilon, 0.9);
        assert_eq!(cfg.cv.variant, MethodVariant::NuclearOnly);
        assert_eq!(cfg.sweep.sampling, SweepSampling::PowerLaw);
        assert_eq!(cfg.ingest.select.target_rows, 20);
        assert_eq!(cfg.ingest.delimiter, "\t");
    }

    #[test]
    fn unknown_keys_are_reported() {
        let raw: toml::Table = toml::from_str("seed = 1\n[solver]\nrhoo = 1.0\nrho = 2.0\n[graph]\nk = 4\nepsilon = 1.0\n").unwrap();
        let cfg: RunConfig = raw.clone().try_into().unwrap();
        let known = toml::Table::try_from(&cfg).unwrap();
        assert_eq!(unknown_keys(&raw, &known, ""), vec!["solver.rhoo".to_string()]);
    }
}
