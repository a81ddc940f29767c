//! Naive Bayes over boolean features.
//!
//! With `p_ij = P(x_i = 1 | c_j)` the class discriminant is
//!
//! ```text
//! g_j(x) = sum_i x_i ln(p_ij / (1 - p_ij)) + sum_i ln(1 - p_ij) + ln p(c_j)
//! ```
//!
//! and prediction takes the class with the largest `g_j`, lowest index on ties.
//! Conditionals are estimated as `(count + a) / (class_rows + 2a)`; priors are
//! the raw class frequencies.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::propmat::FeatureMatrix;

pub const DEFAULT_SMOOTHING: f64 = 1.0;

/// Smoothed estimate of `P(x = 1 | class)`.
#[inline]
pub fn estimate(count: usize, class_rows: usize, smoothing: f64) -> f64 {
    (count as f64 + smoothing) / (class_rows as f64 + 2.0 * smoothing)
}

/// Index of the largest value, lowest index among ties.
pub fn argmax(values: &[f64]) -> usize {
    let mut best = 0;
    for (j, &v) in values.iter().enumerate().skip(1) {
        if v > values[best] {
            best = j;
        }
    }
    best
}

/// Log-sum-exp stabilised normalisation of log scores into probabilities.
pub fn softmax(scores: &[f64]) -> Vec<f64> {
    let max = scores.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = scores.iter().map(|g| (g - max).exp()).collect();
    let total: f64 = exps.iter().sum();
    exps.into_iter().map(|e| e / total).collect()
}

fn check_smoothing(smoothing: f64) -> Result<()> {
    if smoothing.is_finite() && smoothing >= 0.0 {
        Ok(())
    } else {
        Err(Error::Config(format!("smoothing must be finite and >= 0, got {smoothing}")))
    }
}

fn check_classes(m: &FeatureMatrix) -> Result<Vec<usize>> {
    let counts = m.class_counts();
    match counts.iter().position(|&c| c == 0) {
        Some(class) => Err(Error::EmptyClass { class }),
        None => Ok(counts),
    }
}

fn conditionals(m: &FeatureMatrix, feature: usize, class_rows: &[usize], smoothing: f64) -> Result<Vec<f64>> {
    let with = m.class_counts_with(feature);
    let p: Vec<f64> = with.iter().zip(class_rows).map(|(&c, &n)| estimate(c, n, smoothing)).collect();
    match p.iter().position(|&p| !(p > 0.0 && p < 1.0)) {
        Some(class) => Err(Error::Degenerate { feature, class, p: p[class] }),
        None => Ok(p),
    }
}

#[inline]
fn log_odds(p: f64) -> f64 {
    (p / (1.0 - p)).ln()
}

/// A fitted model over an ordered feature subset.
#[derive(Debug, Clone, PartialEq)]
pub struct NBModel {
    subset: Vec<usize>,
    priors: Vec<f64>,
    log_priors: Vec<f64>,
    /// `cond[s][j]` is `p_ij` for feature `subset[s]`.
    cond: Vec<Vec<f64>>,
    log_odds: Vec<Vec<f64>>,
    /// `sum_i ln(1 - p_ij)` per class.
    offsets: Vec<f64>,
}

/// Estimates the model for `subset` from every row of `m`.
pub fn fit(m: &FeatureMatrix, subset: &[usize], smoothing: f64) -> Result<NBModel> {
    check_smoothing(smoothing)?;
    if let Some(&bad) = subset.iter().find(|&&i| i >= m.cols()) {
        return Err(Error::Config(format!("feature index {bad} out of range ({} features)", m.cols())));
    }
    let class_rows = check_classes(m)?;
    let n = m.rows() as f64;
    let priors = class_rows.iter().map(|&c| c as f64 / n).collect();
    let cond = subset.iter().map(|&i| conditionals(m, i, &class_rows, smoothing)).collect::<Result<Vec<_>>>()?;
    NBModel::from_parts(subset.to_vec(), priors, cond)
}

impl NBModel {
    /// Assembles a model from priors and conditional tables, deriving the
    /// log-odds and offsets.
    pub fn from_parts(subset: Vec<usize>, priors: Vec<f64>, cond: Vec<Vec<f64>>) -> Result<NBModel> {
        let q = priors.len();
        if q == 0 || cond.len() != subset.len() || cond.iter().any(|c| c.len() != q) {
            return Err(Error::Config("inconsistent model dimensions".into()));
        }
        if priors.iter().any(|&p| !(p > 0.0 && p <= 1.0)) {
            return Err(Error::Config("priors must lie in (0, 1]".into()));
        }
        for (s, row) in cond.iter().enumerate() {
            if let Some(class) = row.iter().position(|&p| !(p > 0.0 && p < 1.0)) {
                return Err(Error::Degenerate { feature: subset[s], class, p: row[class] });
            }
        }
        let log_priors = priors.iter().map(|p| p.ln()).collect();
        let log_odds = cond.iter().map(|row| row.iter().map(|&p| log_odds(p)).collect()).collect();
        let offsets = (0..q).map(|j| cond.iter().fold(0.0, |acc, row| acc + (1.0 - row[j]).ln())).collect();
        Ok(NBModel { subset, priors, log_priors, cond, log_odds, offsets })
    }

    pub fn subset(&self) -> &[usize] {
        &self.subset
    }

    pub fn num_classes(&self) -> usize {
        self.priors.len()
    }

    pub fn priors(&self) -> &[f64] {
        &self.priors
    }

    pub fn log_priors(&self) -> &[f64] {
        &self.log_priors
    }

    /// `p_ij` for the `s`-th feature of the subset.
    pub fn conditional(&self, s: usize, class: usize) -> f64 {
        self.cond[s][class]
    }

    /// Restricts a full feature row to this model's subset.
    pub fn project(&self, full_row: &[bool]) -> Vec<bool> {
        self.subset.iter().map(|&i| full_row[i]).collect()
    }

    fn score(&self, j: usize, x: impl Fn(usize) -> bool) -> f64 {
        let mut active = 0.0;
        for (s, lo) in self.log_odds.iter().enumerate() {
            if x(s) {
                active += lo[j];
            }
        }
        active + self.offsets[j] + self.log_priors[j]
    }

    /// `g_j` for every class; `row` holds the subset's features in subset order.
    pub fn discriminant(&self, row: &[bool]) -> Vec<f64> {
        assert_eq!(row.len(), self.subset.len(), "row must be restricted to the model subset");
        (0..self.num_classes()).map(|j| self.score(j, |s| row[s])).collect()
    }

    /// `g_j` for row `k` of a full matrix.
    pub fn discriminant_at(&self, m: &FeatureMatrix, k: usize) -> Vec<f64> {
        (0..self.num_classes()).map(|j| self.score(j, |s| m.get(k, self.subset[s]))).collect()
    }

    pub fn posterior(&self, row: &[bool]) -> Vec<f64> {
        softmax(&self.discriminant(row))
    }

    pub fn posterior_at(&self, m: &FeatureMatrix, k: usize) -> Vec<f64> {
        softmax(&self.discriminant_at(m, k))
    }

    pub fn predict(&self, row: &[bool]) -> usize {
        argmax(&self.discriminant(row))
    }

    pub fn predict_at(&self, m: &FeatureMatrix, k: usize) -> usize {
        argmax(&self.discriminant_at(m, k))
    }

    /// Text form: subset indices, priors and the `p_ij` table, each float
    /// written in shortest round-trip notation.
    pub fn to_text(&self) -> String {
        let mut out = String::from("nbmodel\n");
        writeln!(out, "classes {}", self.num_classes()).unwrap();
        out.push_str("subset");
        for i in &self.subset {
            write!(out, " {i}").unwrap();
        }
        out.push_str("\npriors");
        for p in &self.priors {
            write!(out, " {p:?}").unwrap();
        }
        out.push('\n');
        for (i, row) in self.subset.iter().zip(&self.cond) {
            write!(out, "p {i}").unwrap();
            for p in row {
                write!(out, " {p:?}").unwrap();
            }
            out.push('\n');
        }
        out.push_str("end\n");
        out
    }

    /// Reads one model from `lines`, which yields `(line number, text)`.
    pub fn read<'a, I>(lines: &mut I) -> Result<NBModel>
    where
        I: Iterator<Item = (usize, &'a str)>,
    {
        let mut next = |want: &str| -> Result<(usize, Vec<&'a str>)> {
            let (no, line) = lines.next().ok_or(Error::Format { line: 0, msg: format!("missing `{want}`") })?;
            let mut parts = line.split_whitespace();
            match parts.next() {
                Some(tag) if tag == want => Ok((no, parts.collect())),
                _ => Err(Error::Format { line: no, msg: format!("expected `{want}`") }),
            }
        };
        next("nbmodel")?;
        let (no, classes) = next("classes")?;
        let q: usize = parse_num(no, classes.first().copied())?;
        let (no, subset) = next("subset")?;
        let subset = subset.iter().map(|s| parse_num(no, Some(s))).collect::<Result<Vec<usize>>>()?;
        let (no, priors) = next("priors")?;
        let priors = priors.iter().map(|s| parse_num(no, Some(s))).collect::<Result<Vec<f64>>>()?;
        if priors.len() != q {
            return Err(Error::Format { line: no, msg: format!("expected {q} priors") });
        }
        let mut cond = Vec::with_capacity(subset.len());
        for &i in &subset {
            let (no, fields) = next("p")?;
            let idx: usize = parse_num(no, fields.first().copied())?;
            if idx != i || fields.len() != q + 1 {
                return Err(Error::Format { line: no, msg: format!("expected {q} probabilities for feature {i}") });
            }
            cond.push(fields[1..].iter().map(|s| parse_num(no, Some(s))).collect::<Result<Vec<f64>>>()?);
        }
        next("end")?;
        NBModel::from_parts(subset, priors, cond)
    }

    pub fn from_text(text: &str) -> Result<NBModel> {
        let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l)).filter(|(_, l)| !l.trim().is_empty());
        NBModel::read(&mut lines)
    }
}

fn parse_num<T: std::str::FromStr>(line: usize, s: Option<&str>) -> Result<T> {
    s.and_then(|s| s.parse().ok())
        .ok_or_else(|| Error::Format { line, msg: format!("bad number `{}`", s.unwrap_or("")) })
}

/// Training-set misclassification count of the model fitted on `subset`.
pub fn err(m: &FeatureMatrix, subset: &[usize], smoothing: f64) -> Result<usize> {
    let model = fit(m, subset, smoothing)?;
    Ok((0..m.rows()).filter(|&k| model.predict_at(m, k) != m.labels()[k]).count())
}

/// Scores many subsets of one matrix without refitting.
///
/// Every conditional depends only on its own column and the class totals, so
/// per-feature log-odds and `ln(1 - p)` tables are computed once. Scores are
/// bit-identical to [`err`]: the same estimates are summed in the same order.
#[derive(Debug, Clone)]
pub struct SubsetScorer<'m> {
    matrix: &'m FeatureMatrix,
    log_priors: Vec<f64>,
    /// Per feature: `(log_odds[j], ln(1 - p_j))`, or the degeneracy error.
    tables: Vec<Result<(Vec<f64>, Vec<f64>)>>,
}

impl<'m> SubsetScorer<'m> {
    pub fn new(matrix: &'m FeatureMatrix, smoothing: f64) -> Result<SubsetScorer<'m>> {
        check_smoothing(smoothing)?;
        let class_rows = check_classes(matrix)?;
        let n = matrix.rows() as f64;
        let log_priors = class_rows.iter().map(|&c| (c as f64 / n).ln()).collect();
        let tables = (0..matrix.cols())
            .map(|i| {
                conditionals(matrix, i, &class_rows, smoothing)
                    .map(|p| (p.iter().map(|&p| log_odds(p)).collect(), p.iter().map(|&p| (1.0 - p).ln()).collect()))
            })
            .collect();
        Ok(SubsetScorer { matrix, log_priors, tables })
    }

    pub fn matrix(&self) -> &FeatureMatrix {
        self.matrix
    }

    pub fn err(&self, subset: &[usize]) -> Result<usize> {
        let mut tables = Vec::with_capacity(subset.len());
        for &i in subset {
            match self.tables.get(i) {
                Some(Ok(t)) => tables.push((i, t)),
                Some(Err(e)) => return Err(e.clone()),
                None => return Err(Error::Config(format!("feature index {i} out of range"))),
            }
        }
        let q = self.log_priors.len();
        let offsets: Vec<f64> = (0..q).map(|j| tables.iter().fold(0.0, |acc, (_, (_, l1m))| acc + l1m[j])).collect();
        let m = self.matrix;
        let mut g = vec![0.0; q];
        let mut errors = 0;
        for k in 0..m.rows() {
            for (j, gj) in g.iter_mut().enumerate() {
                let mut active = 0.0;
                for (i, (lo, _)) in &tables {
                    if m.get(k, *i) {
                        active += lo[j];
                    }
                }
                *gj = active + offsets[j] + self.log_priors[j];
            }
            if argmax(&g) != m.labels()[k] {
                errors += 1;
            }
        }
        Ok(errors)
    }
}
