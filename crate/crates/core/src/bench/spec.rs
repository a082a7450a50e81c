//! Experiment description: what to cluster, with which algorithms, under
//! which budgets. Serialized as JSON so runs are reproducible artifacts.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::bench::io::{load_csv, minmax_scale, subsample};
use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::local_search::LsVariant;
use crate::seeding::rng_from_seed;
use crate::synthetic::MixtureSpec;

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(tag = "type", rename_all = "kebab-case")]
pub enum DatasetSource {
    Csv {
        path: PathBuf,
        #[serde(default = "default_delimiter")]
        delimiter: char,
        #[serde(default)]
        header: bool,
    },
    Synthetic(MixtureSpec),
}

fn default_delimiter() -> char {
    ','
}

/// One arm of an experiment. `p` is the swap size where it applies.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(tag = "variant", rename_all = "kebab-case")]
pub enum AlgorithmSpec {
    /// Seeding only; always present in results as the baseline.
    Kmpp,
    /// Single-swap local search (p = 1).
    Ssls,
    /// Exhaustive multi-swap.
    Msls { p: usize },
    /// Greedy multi-swap.
    MslsG { p: usize },
    /// Grid-refined candidates.
    NineEps {
        epsilon: f64,
        #[serde(default)]
        candidate_budget: Option<usize>,
    },
}

impl AlgorithmSpec {
    /// Table label; doubles as the CLI algorithm name.
    pub fn name(&self) -> &'static str {
        match self {
            AlgorithmSpec::Kmpp => "kmpp",
            AlgorithmSpec::Ssls => "ssls",
            AlgorithmSpec::Msls { .. } => "msls",
            AlgorithmSpec::MslsG { .. } => "msls-g",
            AlgorithmSpec::NineEps { .. } => "nine-eps",
        }
    }

    pub fn p(&self) -> Option<usize> {
        match self {
            AlgorithmSpec::Kmpp => None,
            AlgorithmSpec::Ssls => Some(1),
            AlgorithmSpec::Msls { p } | AlgorithmSpec::MslsG { p } => Some(*p),
            AlgorithmSpec::NineEps { .. } => None,
        }
    }

    /// Swap engine for the variants that use one.
    pub(crate) fn ls_variant(&self) -> Option<(LsVariant, usize)> {
        match self {
            AlgorithmSpec::Ssls => Some((LsVariant::MslsG, 1)),
            AlgorithmSpec::Msls { p } => Some((LsVariant::Msls, *p)),
            AlgorithmSpec::MslsG { p } => Some((LsVariant::MslsG, *p)),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(rename_all = "snake_case")]
pub struct ExperimentSpec {
    pub dataset: DatasetSource,
    /// Label used in result rows; defaults to the file stem or a synthetic tag.
    #[serde(default)]
    pub name: Option<String>,
    pub k: usize,
    pub algorithms: Vec<AlgorithmSpec>,
    /// Local-search steps per run (trajectory and Lloyd modes).
    #[serde(default = "default_steps")]
    pub steps: usize,
    /// Lloyd iterations appended in Lloyd mode.
    #[serde(default = "default_lloyd_iters")]
    pub lloyd_iters: usize,
    pub seeds: Vec<u64>,
    /// Deadline multipliers; empty means 1..=20.
    #[serde(default)]
    pub lambdas: Vec<u32>,
    /// Keep a uniform sample of this fraction of rows before clustering.
    #[serde(default)]
    pub subsample: Option<f64>,
    #[serde(default)]
    pub subsample_seed: u64,
    /// Apply min-max scaling to the working dataset.
    #[serde(default)]
    pub scale: bool,
    /// Scale the full dataset before subsampling instead of after. Off by
    /// default: the working (subsampled) dataset defines the min/max.
    #[serde(default)]
    pub scale_before_subsample: bool,
}

fn default_steps() -> usize {
    50
}

fn default_lloyd_iters() -> usize {
    10
}

impl ExperimentSpec {
    pub fn validate(&self) -> Result<()> {
        if self.k == 0 {
            return Err(Error::InvalidConfig("k must be at least 1".into()));
        }
        if self.seeds.is_empty() {
            return Err(Error::InvalidConfig("seeds must be nonempty".into()));
        }
        if self.algorithms.is_empty() {
            return Err(Error::InvalidConfig("algorithms must be nonempty".into()));
        }
        if let Some(f) = self.subsample {
            if !(f > 0.0 && f <= 1.0) {
                return Err(Error::InvalidConfig(format!(
                    "subsample fraction must be in (0, 1], got {f}"
                )));
            }
        }
        if self.lambdas.iter().any(|&l| l == 0) {
            return Err(Error::InvalidConfig("lambda multipliers must be positive".into()));
        }
        for alg in &self.algorithms {
            match alg {
                AlgorithmSpec::Msls { p } | AlgorithmSpec::MslsG { p } if *p == 0 => {
                    return Err(Error::InvalidConfig("swap size p must be at least 1".into()));
                }
                AlgorithmSpec::NineEps { epsilon, .. }
                    if !(*epsilon > 0.0 && *epsilon < 1.0) =>
                {
                    return Err(Error::InvalidConfig(format!(
                        "epsilon must be in (0, 1), got {epsilon}"
                    )));
                }
                _ => {}
            }
        }
        Ok(())
    }

    pub fn from_json_file(path: &Path) -> Result<ExperimentSpec> {
        let text = std::fs::read_to_string(path)?;
        let spec: ExperimentSpec = serde_json::from_str(&text)?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn dataset_label(&self) -> String {
        if let Some(name) = &self.name {
            return name.clone();
        }
        match &self.dataset {
            DatasetSource::Csv { path, .. } => path
                .file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_else(|| "dataset".into()),
            DatasetSource::Synthetic(m) => {
                format!("synthetic-{}x{}-c{}", m.n, m.dim, m.components)
            }
        }
    }

    pub fn effective_lambdas(&self) -> Vec<u32> {
        if self.lambdas.is_empty() {
            (1..=20).collect()
        } else {
            self.lambdas.clone()
        }
    }

    /// Loads the source and applies subsampling/scaling in the configured
    /// order, yielding the working dataset every arm runs on.
    pub fn working_dataset(&self) -> Result<Dataset> {
        let mut data = match &self.dataset {
            DatasetSource::Csv { path, delimiter, header } => {
                load_csv(path, *delimiter as u8, *header)?
            }
            DatasetSource::Synthetic(m) => m.generate().0,
        };
        if self.scale && self.scale_before_subsample {
            data = minmax_scale(&data);
        }
        if let Some(fraction) = self.subsample {
            let mut rng = rng_from_seed(self.subsample_seed);
            data = subsample(&data, fraction, &mut rng);
        }
        if self.scale && !self.scale_before_subsample {
            data = minmax_scale(&data);
        }
        if self.k > data.len() {
            return Err(Error::KTooLarge { k: self.k, n: data.len() });
        }
        Ok(data)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample_spec() -> ExperimentSpec {
        ExperimentSpec {
            dataset: DatasetSource::Synthetic(MixtureSpec::standard(60, 2, 3, 7)),
            name: None,
            k: 3,
            algorithms: vec![AlgorithmSpec::Kmpp, AlgorithmSpec::MslsG { p: 2 }],
            steps: 5,
            lloyd_iters: 2,
            seeds: vec![1, 2],
            lambdas: vec![],
            subsample: None,
            subsample_seed: 0,
            scale: false,
            scale_before_subsample: false,
        }
    }

    #[test]
    fn json_round_trip() {
        let spec = sample_spec();
        let text = serde_json::to_string_pretty(&spec).unwrap();
        let back: ExperimentSpec = serde_json::from_str(&text).unwrap();
        assert_eq!(back, spec);
    }

    #[test]
    fn validation_catches_bad_fields() {
        let mut spec = sample_spec();
        spec.seeds.clear();
        assert!(spec.validate().is_err());

        let mut spec = sample_spec();
        spec.lambdas = vec![3, 0];
        assert!(spec.validate().is_err());

        let mut spec = sample_spec();
        spec.subsample = Some(1.5);
        assert!(spec.validate().is_err());

        let mut spec = sample_spec();
        spec.algorithms = vec![AlgorithmSpec::NineEps { epsilon: 1.0, candidate_budget: None }];
        assert!(spec.validate().is_err());
    }

    #[test]
    fn defaults_fill_in() {
        let text = r#"{
            "dataset": {"type": "synthetic", "n": 40, "dim": 2, "components": 2, "seed": 3},
            "k": 2,
            "algorithms": [{"variant": "ssls"}],
            "seeds": [0]
        }"#;
        let spec: ExperimentSpec = serde_json::from_str(text).unwrap();
        assert_eq!(spec.steps, 50);
        assert_eq!(spec.lloyd_iters, 10);
        assert_eq!(spec.effective_lambdas(), (1..=20).collect::<Vec<_>>());
        assert!(spec.validate().is_ok());
        assert_eq!(spec.dataset_label(), "synthetic-40x2-c2");
    }

    #[test]
    fn working_dataset_pipeline_order() {
        let mut spec = sample_spec();
        spec.subsample = Some(0.5);
        spec.scale = true;
        let data = spec.working_dataset().unwrap();
        assert_eq!(data.len(), 30);
        // Post-subsample scaling: the working rows span [0,1] exactly.
        for j in 0..data.dim() {
            let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
            for row in data.iter() {
                lo = lo.min(row[j]);
                hi = hi.max(row[j]);
            }
            assert_eq!(lo, 0.0);
            assert_eq!(hi, 1.0);
        }
        assert!(data.scaling.is_some(), "applied ranges recorded");
    }
}
