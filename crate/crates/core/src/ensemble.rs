//! Random-subspace ensemble whose subspaces come from the GRASP archive.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;

use crate::bayes::{argmax, fit, NBModel};
use crate::error::{Error, Result};
use crate::grasp::{grasp_fs, ArchivedSolution, GraspConfig};
use crate::propmat::FeatureMatrix;

/// How member outputs are merged.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Combination {
    /// Arithmetic mean of member posteriors.
    #[default]
    Mean,
    /// Fraction of members voting for each class.
    MajorityVote,
}

impl fmt::Display for Combination {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Combination::Mean => "mean",
            Combination::MajorityVote => "vote",
        })
    }
}

impl FromStr for Combination {
    type Err = Error;

    fn from_str(s: &str) -> Result<Combination> {
        match s {
            "mean" => Ok(Combination::Mean),
            "vote" => Ok(Combination::MajorityVote),
            other => Err(Error::Config(format!("unknown combination `{other}` (expected mean or vote)"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Ensemble {
    members: Vec<NBModel>,
    requested_size: usize,
    combination: Combination,
}

/// Runs GRASP on `m` and fits one model per subset in the best
/// `min(ensemble_size, archive length)` archived solutions.
pub fn rsm_fit(m: &FeatureMatrix, cfg: &GraspConfig, ensemble_size: usize) -> Result<Ensemble> {
    if ensemble_size == 0 {
        return Err(Error::Config("ensemble size must be at least 1".into()));
    }
    let archive = grasp_fs(m, cfg)?;
    from_archive(m, &archive, ensemble_size, cfg.smoothing, Combination::Mean)
}

/// Fits members on the archive tail (the lowest-error solutions).
pub fn from_archive(
    m: &FeatureMatrix,
    archive: &[ArchivedSolution],
    ensemble_size: usize,
    smoothing: f64,
    combination: Combination,
) -> Result<Ensemble> {
    if ensemble_size == 0 {
        return Err(Error::Config("ensemble size must be at least 1".into()));
    }
    if archive.is_empty() {
        return Err(Error::Config("empty archive".into()));
    }
    let take = ensemble_size.min(archive.len());
    if take < ensemble_size {
        log::warn!(
            "archive holds {} solutions; ensemble has {take} of {ensemble_size} requested members",
            archive.len()
        );
    }
    let members = archive[archive.len() - take..]
        .par_iter()
        .map(|a| fit(m, &a.solution.subset, smoothing))
        .collect::<Result<Vec<_>>>()?;
    Ensemble::new(members, ensemble_size, combination)
}

impl Ensemble {
    pub fn new(members: Vec<NBModel>, requested_size: usize, combination: Combination) -> Result<Ensemble> {
        let Some(first) = members.first() else {
            return Err(Error::Config("an ensemble needs at least one member".into()));
        };
        if members.iter().any(|m| m.num_classes() != first.num_classes()) {
            return Err(Error::Config("members disagree on the number of classes".into()));
        }
        if members.len() > requested_size {
            return Err(Error::Config("more members than requested".into()));
        }
        Ok(Ensemble { members, requested_size, combination })
    }

    pub fn members(&self) -> &[NBModel] {
        &self.members
    }

    pub fn requested_size(&self) -> usize {
        self.requested_size
    }

    /// True when the archive could not supply the requested number of members.
    pub fn is_short(&self) -> bool {
        self.members.len() < self.requested_size
    }

    pub fn combination(&self) -> Combination {
        self.combination
    }

    pub fn with_combination(mut self, combination: Combination) -> Ensemble {
        self.combination = combination;
        self
    }

    pub fn num_classes(&self) -> usize {
        self.members[0].num_classes()
    }

    fn combine(&self, member_outputs: impl Iterator<Item = Vec<f64>>) -> (usize, Vec<f64>) {
        let q = self.num_classes();
        let mut combined = vec![0.0; q];
        let mut lo = vec![f64::INFINITY; q];
        let mut hi = vec![f64::NEG_INFINITY; q];
        for posterior in member_outputs {
            for j in 0..q {
                lo[j] = lo[j].min(posterior[j]);
                hi[j] = hi[j].max(posterior[j]);
            }
            match self.combination {
                Combination::Mean => {
                    for (c, p) in combined.iter_mut().zip(&posterior) {
                        *c += p;
                    }
                }
                Combination::MajorityVote => combined[argmax(&posterior)] += 1.0,
            }
        }
        let k = self.members.len() as f64;
        for (j, c) in combined.iter_mut().enumerate() {
            *c /= k;
            if self.combination == Combination::Mean {
                // rounding in the sum must not push the mean outside the members' range
                *c = c.clamp(lo[j], hi[j]);
            }
        }
        (argmax(&combined), combined)
    }

    /// Predicted class and combined class distribution for a row over all features.
    pub fn predict(&self, row: &[bool]) -> (usize, Vec<f64>) {
        self.combine(self.members.iter().map(|m| m.posterior(&m.project(row))))
    }

    pub fn predict_at(&self, m: &FeatureMatrix, k: usize) -> (usize, Vec<f64>) {
        self.combine(self.members.iter().map(|model| model.posterior_at(m, k)))
    }

    /// Header line, then each member as a `member` subset header followed by
    /// its model text.
    pub fn to_text(&self) -> String {
        let mut out = format!(
            "ensemble requested {} members {} combine {}\n",
            self.requested_size,
            self.members.len(),
            self.combination
        );
        for (i, m) in self.members.iter().enumerate() {
            out.push_str(&format!("member {i} subset"));
            for s in m.subset() {
                out.push_str(&format!(" {s}"));
            }
            out.push('\n');
            out.push_str(&m.to_text());
        }
        out
    }

    pub fn read<'a, I>(lines: &mut I) -> Result<Ensemble>
    where
        I: Iterator<Item = (usize, &'a str)>,
    {
        let (no, header) = lines.next().ok_or(Error::Format { line: 0, msg: "missing ensemble header".into() })?;
        let bad = |msg: &str| Error::Format { line: no, msg: msg.into() };
        let f: Vec<&str> = header.split_whitespace().collect();
        if f.len() != 7 || f[0] != "ensemble" || f[1] != "requested" || f[3] != "members" || f[5] != "combine" {
            return Err(bad("expected `ensemble requested <m> members <k> combine <rule>`"));
        }
        let requested: usize = f[2].parse().map_err(|_| bad("bad requested size"))?;
        let count: usize = f[4].parse().map_err(|_| bad("bad member count"))?;
        let combination: Combination = f[6].parse()?;
        let mut members = Vec::with_capacity(count);
        for i in 0..count {
            let (no, line) = lines.next().ok_or(Error::Format { line: no, msg: "missing member".into() })?;
            let f: Vec<&str> = line.split_whitespace().collect();
            if f.len() < 3 || f[0] != "member" || f[1] != i.to_string() || f[2] != "subset" {
                return Err(Error::Format { line: no, msg: format!("expected `member {i} subset ...`") });
            }
            let model = NBModel::read(lines)?;
            let header: Vec<String> = model.subset().iter().map(|s| s.to_string()).collect();
            if f[3..] != header.iter().map(String::as_str).collect::<Vec<_>>()[..] {
                return Err(Error::Format { line: no, msg: "member header disagrees with model subset".into() });
            }
            members.push(model);
        }
        Ensemble::new(members, requested, combination)
    }

    pub fn from_text(text: &str) -> Result<Ensemble> {
        let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l)).filter(|(_, l)| !l.trim().is_empty());
        Ensemble::read(&mut lines)
    }
}
