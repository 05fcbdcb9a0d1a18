//! Resolved run configuration: built-in defaults, overlaid by an optional
//! JSON config file, overlaid by command-line flags.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use topicrefine::classify::{SvmParams, DEFAULT_TRAIN_FRACTION};
use topicrefine::llm::ENV_CACHE_DIR;
use topicrefine::metrics::{DEFAULT_EPSILON, DEFAULT_WINDOW};
use topicrefine::refine::ContextMode;
use topicrefine::{Error, LlmConfig, PreprocessConfig, Result};

pub const DEFAULT_SEED: u64 = 42;

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Inputs {
    pub corpus: Option<PathBuf>,
    pub labels: Option<PathBuf>,
    pub topics: Option<PathBuf>,
    pub baseline: Option<PathBuf>,
    pub vocab: Option<PathBuf>,
    pub embeddings: Option<PathBuf>,
    pub reference: Option<PathBuf>,
    pub doc_embeddings: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LdaSection {
    pub num_topics: usize,
    pub iterations: usize,
    /// Defaults to 50 / K.
    pub alpha: Option<f64>,
    /// Defaults to 0.01.
    pub beta: Option<f64>,
    pub top_n: usize,
}

impl Default for LdaSection {
    fn default() -> Self {
        LdaSection {
            num_topics: 20,
            iterations: 1000,
            alpha: None,
            beta: None,
            top_n: 10,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RefineSection {
    pub context: ContextMode,
    /// Mock backend coherence threshold on mean cosine similarity.
    pub threshold: f64,
    pub parse_retries: u32,
}

impl Default for RefineSection {
    fn default() -> Self {
        RefineSection {
            context: ContextMode::Original,
            threshold: 0.5,
            parse_retries: 2,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MetricsSection {
    pub window: usize,
    pub epsilon: f64,
}

impl Default for MetricsSection {
    fn default() -> Self {
        MetricsSection {
            window: DEFAULT_WINDOW,
            epsilon: DEFAULT_EPSILON,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ClassifySection {
    pub train_fraction: f64,
    pub epochs: usize,
    pub svm_c: f64,
}

impl Default for ClassifySection {
    fn default() -> Self {
        let svm = SvmParams::default();
        ClassifySection {
            train_fraction: DEFAULT_TRAIN_FRACTION,
            epochs: svm.epochs,
            svm_c: svm.c,
        }
    }
}

/// Everything that determines a run's outputs. The output directory is
/// deliberately excluded so identical runs into different directories
/// produce identical files.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RunConfig {
    pub command: String,
    pub seed: u64,
    pub deterministic: bool,
    /// Topic-level workers; 0 means one per logical core.
    pub jobs: usize,
    pub inputs: Inputs,
    pub preprocess: PreprocessConfig,
    pub lda: LdaSection,
    pub llm: LlmConfig,
    pub refine: RefineSection,
    pub metrics: MetricsSection,
    pub classify: ClassifySection,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            command: String::new(),
            seed: DEFAULT_SEED,
            deterministic: false,
            jobs: 0,
            inputs: Inputs::default(),
            preprocess: PreprocessConfig::default(),
            lda: LdaSection::default(),
            llm: LlmConfig::default(),
            refine: RefineSection::default(),
            metrics: MetricsSection::default(),
            classify: ClassifySection::default(),
        }
    }
}

impl RunConfig {
    /// Defaults, or the contents of `path` layered over them.
    pub fn load(path: Option<&Path>) -> Result<Self> {
        match path {
            None => Ok(RunConfig::default()),
            Some(p) => {
                let text = topicrefine::fsutil::read_to_string(p)?;
                serde_json::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", p.display())))
            }
        }
    }

    /// Fills values that depend on the environment and enforces
    /// cross-field rules.
    pub fn finalize(&mut self) -> Result<()> {
        if self.llm.cache_dir.is_none() {
            self.llm.cache_dir = std::env::var_os(ENV_CACHE_DIR).filter(|v| !v.is_empty()).map(PathBuf::from);
        }
        if self.deterministic {
            self.jobs = 1;
        } else if self.jobs == 0 {
            self.jobs = std::thread::available_parallelism().map_or(1, |n| n.get());
        }
        if self.lda.top_n == 0 {
            return Err(Error::Config("top-n must be at least 1".into()));
        }
        if !(-1.0..=1.0).contains(&self.refine.threshold) {
            return Err(Error::Config(format!("threshold {} outside [-1, 1]", self.refine.threshold)));
        }
        if !(self.metrics.epsilon > 0.0) {
            return Err(Error::Config("epsilon must be positive".into()));
        }
        self.llm.validate()
    }

    pub fn svm_params(&self) -> SvmParams {
        SvmParams {
            epochs: self.classify.epochs,
            c: self.classify.svm_c,
            seed: self.seed,
        }
    }
}

/// Returns the input or a usage error naming the missing flag.
pub fn require<'a>(value: &'a Option<PathBuf>, flag: &str) -> Result<&'a Path> {
    value
        .as_deref()
        .ok_or_else(|| Error::Config(format!("missing required input --{flag}")))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn partial_file_keeps_defaults() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("c.json");
        std::fs::write(&p, r#"{"seed": 7, "lda": {"num_topics": 3}}"#).unwrap();
        let c = RunConfig::load(Some(&p)).unwrap();
        assert_eq!(c.seed, 7);
        assert_eq!(c.lda.num_topics, 3);
        assert_eq!(c.lda.top_n, 10);
        assert_eq!(c.metrics.window, 10);
    }

    #[test]
    fn bad_file_is_config_error() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("c.json");
        std::fs::write(&p, "{").unwrap();
        assert!(matches!(RunConfig::load(Some(&p)), Err(Error::Config(_))));
    }

    #[test]
    fn deterministic_forces_one_job() {
        let mut c = RunConfig {
            deterministic: true,
            jobs: 8,
            ..RunConfig::default()
        };
        c.finalize().unwrap();
        assert_eq!(c.jobs, 1);
    }

    #[test]
    fn round_trip() {
        let c = RunConfig::default();
        let back: RunConfig = serde_json::from_str(&serde_json::to_string(&c).unwrap()).unwrap();
        assert_eq!(c, back);
    }
}
