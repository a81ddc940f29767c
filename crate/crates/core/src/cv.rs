//! Stratified k-fold cross-validation of the full pipeline.
//!
//! Every fold mines features, selects subsets and fits the ensemble on its
//! training split alone; the test split is propositionalized against the
//! training split's features.

use std::fmt::Write as _;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::ensemble::{from_archive, Combination};
use crate::error::{Error, Result};
use crate::grasp::{grasp_fs, ArchivedSolution, GraspConfig};
use crate::logic::{Bias, Dataset};
use crate::metrics::{auc_pr, auc_roc, mean_std};
use crate::miner::{mine, FeatureSet, MiningConfig, DEFAULT_MAX_LENGTH, DEFAULT_MIN_SUPPORT};
use crate::propmat::build_matrix;

pub const PR_CONVENTION: &str =
    "non-interpolated step area: sum over distinct thresholds of recall gain times precision";

#[derive(Debug, Clone, PartialEq)]
pub struct PipelineConfig {
    pub min_support: f64,
    pub max_length: usize,
    pub grasp: GraspConfig,
    pub ensemble_size: usize,
    pub combination: Combination,
    /// Class whose combined posterior is the AUC score.
    pub positive_class: usize,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            min_support: DEFAULT_MIN_SUPPORT,
            max_length: DEFAULT_MAX_LENGTH,
            grasp: GraspConfig::default(),
            ensemble_size: 1,
            combination: Combination::Mean,
            positive_class: 0,
        }
    }
}

/// Per-class seeded shuffle, then round-robin over folds continuing across
/// classes. Returns the fold of every example.
pub fn stratified_folds(labels: &[usize], num_classes: usize, k: usize, seed: u64) -> Vec<usize> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut fold_of = vec![0; labels.len()];
    let mut next = 0;
    for class in 0..num_classes {
        let mut members: Vec<usize> = (0..labels.len()).filter(|&i| labels[i] == class).collect();
        members.shuffle(&mut rng);
        for i in members {
            fold_of[i] = next % k;
            next += 1;
        }
    }
    fold_of
}

#[derive(Debug, Clone, PartialEq)]
pub struct FoldResult {
    pub fold: usize,
    pub train: Vec<usize>,
    pub test: Vec<usize>,
    pub features: FeatureSet,
    pub archive: Vec<ArchivedSolution>,
    pub members: usize,
    pub accuracy: f64,
    pub auc_roc: Option<f64>,
    pub auc_pr: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvalReport {
    pub config: PipelineConfig,
    pub folds: Vec<FoldResult>,
    pub examples: usize,
    pub class_names: Vec<String>,
    pub accuracy_mean: f64,
    pub accuracy_std: f64,
    pub auc_roc_mean: Option<f64>,
    pub auc_pr_mean: Option<f64>,
}

fn mean_defined(values: impl Iterator<Item = Option<f64>>) -> Option<f64> {
    let v: Vec<f64> = values.flatten().collect();
    (!v.is_empty()).then(|| mean_std(&v).0)
}

fn run_fold(d: &Dataset, bias: &Bias, cfg: &PipelineConfig, fold: usize, fold_of: &[usize]) -> Result<FoldResult> {
    let train: Vec<usize> = (0..d.len()).filter(|&i| fold_of[i] != fold).collect();
    let test: Vec<usize> = (0..d.len()).filter(|&i| fold_of[i] == fold).collect();
    let train_set = d.subset(&train);
    let test_set = d.subset(&test);
    let mut present = vec![false; d.num_classes()];
    for e in train_set.examples() {
        present[e.label] = true;
    }
    if let Some(class) = present.iter().position(|p| !p) {
        return Err(Error::FoldMissingClass { fold, class });
    }

    let mining = MiningConfig { min_support: cfg.min_support, max_length: cfg.max_length, bias: bias.clone() };
    let features = mine(&train_set, &mining)?;
    let train_m = build_matrix(&train_set, &features);
    let grasp = GraspConfig { seed: cfg.grasp.seed.wrapping_add(fold as u64), ..cfg.grasp.clone() };
    let archive = grasp_fs(&train_m, &grasp)?;
    let ensemble = from_archive(&train_m, &archive, cfg.ensemble_size, grasp.smoothing, cfg.combination)?;

    let test_m = build_matrix(&test_set, &features);
    let mut correct = 0;
    let mut scores = Vec::with_capacity(test.len());
    let mut positives = Vec::with_capacity(test.len());
    for k in 0..test_m.rows() {
        let (class, posterior) = ensemble.predict_at(&test_m, k);
        let label = test_m.labels()[k];
        if class == label {
            correct += 1;
        }
        scores.push(posterior[cfg.positive_class]);
        positives.push(label == cfg.positive_class);
    }
    let binary = d.num_classes() == 2;
    Ok(FoldResult {
        fold,
        accuracy: correct as f64 / test.len() as f64,
        auc_roc: if binary { auc_roc(&scores, &positives) } else { None },
        auc_pr: if binary { auc_pr(&scores, &positives) } else { None },
        members: ensemble.members().len(),
        train,
        test,
        features,
        archive,
    })
}

/// Runs stratified `folds`-fold cross-validation of mine, select, ensemble.
/// Fold assignment and each fold's GRASP stream derive from `cfg.grasp.seed`.
pub fn cross_validate(d: &Dataset, bias: &Bias, folds: usize, cfg: &PipelineConfig) -> Result<EvalReport> {
    if folds < 2 {
        return Err(Error::Config(format!("need at least 2 folds, got {folds}")));
    }
    if folds > d.len() {
        return Err(Error::Config(format!("{folds} folds for {} examples", d.len())));
    }
    if cfg.positive_class >= d.num_classes() {
        return Err(Error::Config(format!("positive class {} does not exist", cfg.positive_class)));
    }
    MiningConfig { min_support: cfg.min_support, max_length: cfg.max_length, bias: bias.clone() }.validate()?;
    cfg.grasp.validate()?;
    if cfg.ensemble_size == 0 {
        return Err(Error::Config("ensemble size must be at least 1".into()));
    }

    let fold_of = stratified_folds(&d.labels(), d.num_classes(), folds, cfg.grasp.seed);
    let results =
        (0..folds).into_par_iter().map(|f| run_fold(d, bias, cfg, f, &fold_of)).collect::<Result<Vec<_>>>()?;

    let accuracies: Vec<f64> = results.iter().map(|r| r.accuracy).collect();
    let (accuracy_mean, accuracy_std) = mean_std(&accuracies);
    Ok(EvalReport {
        config: cfg.clone(),
        examples: d.len(),
        class_names: d.class_names().iter().map(|c| c.to_string()).collect(),
        accuracy_mean,
        accuracy_std,
        auc_roc_mean: mean_defined(results.iter().map(|r| r.auc_roc)),
        auc_pr_mean: mean_defined(results.iter().map(|r| r.auc_pr)),
        folds: results,
    })
}

fn opt(v: Option<f64>) -> String {
    v.map_or_else(|| "undefined".to_string(), |x| format!("{x:.6}"))
}

fn opt_exact(v: Option<f64>) -> String {
    v.map_or_else(|| "undefined".to_string(), |x| format!("{x:?}"))
}

impl EvalReport {
    /// Human-readable table followed by a `key=value` block at full precision.
    pub fn render(&self) -> String {
        let c = &self.config;
        let mut out = String::new();
        writeln!(out, "# cross-validation report").unwrap();
        writeln!(out, "# PR curve: {PR_CONVENTION}").unwrap();
        writeln!(
            out,
            "# {} examples, {} folds, classes: {}, positive: {}",
            self.examples,
            self.folds.len(),
            self.class_names.join(" "),
            self.class_names[c.positive_class]
        )
        .unwrap();
        writeln!(out).unwrap();
        writeln!(
            out,
            "{:>4} {:>6} {:>5} {:>8} {:>7} {:>9} {:>9} {:>9}",
            "fold", "train", "test", "features", "members", "accuracy", "auc_roc", "auc_pr"
        )
        .unwrap();
        for f in &self.folds {
            writeln!(
                out,
                "{:>4} {:>6} {:>5} {:>8} {:>7} {:>9.6} {:>9} {:>9}",
                f.fold,
                f.train.len(),
                f.test.len(),
                f.features.len(),
                f.members,
                f.accuracy,
                opt(f.auc_roc),
                opt(f.auc_pr)
            )
            .unwrap();
        }
        writeln!(out).unwrap();
        writeln!(out, "accuracy {:.6} +/- {:.6}", self.accuracy_mean, self.accuracy_std).unwrap();
        writeln!(out, "auc_roc  {}", opt(self.auc_roc_mean)).unwrap();
        writeln!(out, "auc_pr   {}", opt(self.auc_pr_mean)).unwrap();
        writeln!(out).unwrap();
        writeln!(out, "[summary]").unwrap();
        let kv: Vec<(String, String)> = vec![
            ("seed".into(), c.grasp.seed.to_string()),
            ("folds".into(), self.folds.len().to_string()),
            ("examples".into(), self.examples.to_string()),
            ("min_support".into(), format!("{:?}", c.min_support)),
            ("max_length".into(), c.max_length.to_string()),
            ("maxiter".into(), c.grasp.maxiter.to_string()),
            ("ensemble_size".into(), c.ensemble_size.to_string()),
            ("smoothing".into(), format!("{:?}", c.grasp.smoothing)),
            ("max_subset_size".into(), c.grasp.max_subset_size.map_or("none".into(), |s| s.to_string())),
            ("combination".into(), c.combination.to_string()),
            ("positive_class".into(), self.class_names[c.positive_class].clone()),
            ("pr_convention".into(), "step".into()),
            ("accuracy_mean".into(), format!("{:?}", self.accuracy_mean)),
            ("accuracy_std".into(), format!("{:?}", self.accuracy_std)),
            ("auc_roc_mean".into(), opt_exact(self.auc_roc_mean)),
            ("auc_pr_mean".into(), opt_exact(self.auc_pr_mean)),
        ];
        for (k, v) in kv {
            writeln!(out, "{k}={v}").unwrap();
        }
        for f in &self.folds {
            writeln!(out, "fold.{}.accuracy={:?}", f.fold, f.accuracy).unwrap();
            writeln!(out, "fold.{}.auc_roc={}", f.fold, opt_exact(f.auc_roc)).unwrap();
            writeln!(out, "fold.{}.auc_pr={}", f.fold, opt_exact(f.auc_pr)).unwrap();
            writeln!(out, "fold.{}.features={}", f.fold, f.features.len()).unwrap();
            writeln!(out, "fold.{}.members={}", f.fold, f.members).unwrap();
        }
        out
    }
}

/// Parses the trailing `key=value` block of a rendered report.
pub fn summary_values(report: &str) -> Vec<(String, String)> {
    report
        .lines()
        .skip_while(|l| l.trim() != "[summary]")
        .skip(1)
        .filter_map(|l| l.split_once('=').map(|(k, v)| (k.to_string(), v.to_string())))
        .collect()
}
