//! A trained pipeline: bias, class names, features and ensemble, storable as text.

use std::fmt::Write as _;

use crate::ensemble::{from_archive, Combination, Ensemble};
use crate::error::{Error, Result};
use crate::grasp::{grasp_fs, ArchivedSolution, GraspConfig};
use crate::logic::{Bias, Dataset, Sym};
use crate::miner::FeatureSet;
use crate::parse::{parse_bias, parse_facts};
use crate::propmat::{build_matrix, FeatureMatrix};

const MAGIC: &str = "relprop-model 1";

#[derive(Debug, Clone, PartialEq)]
pub struct TrainedModel {
    pub bias: Bias,
    pub class_names: Vec<Sym>,
    pub features: FeatureSet,
    pub ensemble: Ensemble,
}

/// One prediction for one example.
#[derive(Debug, Clone, PartialEq)]
pub struct Prediction {
    pub id: Sym,
    /// Declared label, when it names a class known to the model.
    pub actual: Option<usize>,
    pub predicted: usize,
    pub posterior: Vec<f64>,
}

/// Propositionalizes `d` with `features`, runs GRASP and fits the ensemble.
pub fn train(
    d: &Dataset,
    bias: &Bias,
    features: FeatureSet,
    cfg: &GraspConfig,
    ensemble_size: usize,
    combination: Combination,
) -> Result<(TrainedModel, Vec<ArchivedSolution>, FeatureMatrix)> {
    let m = build_matrix(d, &features);
    let archive = grasp_fs(&m, cfg)?;
    let ensemble = from_archive(&m, &archive, ensemble_size, cfg.smoothing, combination)?;
    let model = TrainedModel { bias: bias.clone(), class_names: d.class_names().to_vec(), features, ensemble };
    Ok((model, archive, m))
}

impl TrainedModel {
    /// Predicts every example of `d`; labels are matched to classes by name.
    pub fn predict(&self, d: &Dataset) -> Vec<Prediction> {
        let m = build_matrix(d, &self.features);
        d.examples()
            .iter()
            .enumerate()
            .map(|(k, e)| {
                let label = &d.class_names()[e.label];
                let (predicted, posterior) = self.ensemble.predict_at(&m, k);
                Prediction {
                    id: e.id.clone(),
                    actual: self.class_names.iter().position(|c| c == label),
                    predicted,
                    posterior,
                }
            })
            .collect()
    }

    /// Parses a facts file with this model's bias and predicts it.
    pub fn predict_facts(&self, facts_text: &str) -> Result<Vec<Prediction>> {
        Ok(self.predict(&parse_facts(facts_text, &self.bias)?))
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("{MAGIC}\nclasses");
        for c in &self.class_names {
            write!(out, " {c}").unwrap();
        }
        out.push_str("\nbias\n");
        out.push_str(&self.bias.to_string());
        writeln!(out, "end\nfeatures {}", self.features.len()).unwrap();
        out.push_str(&self.features.to_text());
        out.push_str(&self.ensemble.to_text());
        out
    }

    pub fn from_text(text: &str) -> Result<TrainedModel> {
        let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l)).filter(|(_, l)| !l.trim().is_empty());
        let mut next = |what: &str| {
            lines
                .next()
                .ok_or_else(|| Error::Format { line: 0, msg: format!("unexpected end of model, expected {what}") })
        };
        let (no, magic) = next("header")?;
        if magic.trim() != MAGIC {
            return Err(Error::Format { line: no, msg: format!("expected `{MAGIC}`") });
        }
        let (no, classes) = next("classes")?;
        let class_names: Vec<Sym> = match classes.split_whitespace().collect::<Vec<_>>().split_first() {
            Some((&"classes", names)) if !names.is_empty() => names.iter().map(|s| Sym::from(*s)).collect(),
            _ => return Err(Error::Format { line: no, msg: "expected `classes <name>...`".into() }),
        };
        let (no, tag) = next("bias")?;
        if tag.trim() != "bias" {
            return Err(Error::Format { line: no, msg: "expected `bias`".into() });
        }
        let mut bias_text = String::new();
        loop {
            let (_, line) = next("end of bias")?;
            if line.trim() == "end" {
                break;
            }
            bias_text.push_str(line);
            bias_text.push('\n');
        }
        let bias = parse_bias(&bias_text)?;
        let (no, header) = next("features")?;
        let count: usize = header
            .strip_prefix("features ")
            .and_then(|n| n.trim().parse().ok())
            .ok_or_else(|| Error::Format { line: no, msg: "expected `features <count>`".into() })?;
        let mut feature_text = String::new();
        for _ in 0..count {
            let (_, line) = next("feature")?;
            feature_text.push_str(line);
            feature_text.push('\n');
        }
        let features = FeatureSet::from_text(&feature_text)?;
        let ensemble = Ensemble::read(&mut lines)?;
        if ensemble.num_classes() != class_names.len() {
            return Err(Error::Format { line: no, msg: "ensemble and class list disagree".into() });
        }
        if let Some(bad) = ensemble.members().iter().flat_map(|m| m.subset()).find(|&&i| i >= features.len()) {
            return Err(Error::Format { line: no, msg: format!("member uses feature {bad} of {}", features.len()) });
        }
        Ok(TrainedModel { bias, class_names, features, ensemble })
    }
}
