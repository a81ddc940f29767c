//! GRASP feature-subset search minimising naive Bayes training error.
//!
//! Each iteration draws a greediness level `alpha` in `[0, 1)`, builds a
//! subset by randomised greedy construction, improves it by best-improvement
//! local search over add/replace moves, and archives it when it beats every
//! solution archived so far. The whole archive is returned, oldest first.
//!
//! Random draws happen in a fixed order from one ChaCha8 stream seeded with
//! `GraspConfig::seed`: `rng.gen::<f64>()` for `alpha` at the start of each
//! iteration, then one `rng.gen_range(0..rcl.len())` per construction step.
//! Candidate scoring never touches the stream, so parallel evaluation does
//! not affect results.

use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::bayes::{SubsetScorer, DEFAULT_SMOOTHING};
use crate::error::{Error, Result};
use crate::propmat::FeatureMatrix;

pub const DEFAULT_MAXITER: usize = 100;

/// A feature subset (sorted ascending) with its training error.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Solution {
    pub subset: Vec<usize>,
    pub score: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GraspConfig {
    pub maxiter: usize,
    pub seed: u64,
    pub smoothing: f64,
    /// Largest subset the search may build; `None` means no cap.
    pub max_subset_size: Option<usize>,
}

impl Default for GraspConfig {
    fn default() -> Self {
        GraspConfig { maxiter: DEFAULT_MAXITER, seed: 0, smoothing: DEFAULT_SMOOTHING, max_subset_size: None }
    }
}

impl GraspConfig {
    pub fn validate(&self) -> Result<()> {
        if self.maxiter == 0 {
            return Err(Error::Config("maxiter must be at least 1".into()));
        }
        if !(self.smoothing.is_finite() && self.smoothing >= 0.0) {
            return Err(Error::Config(format!("smoothing must be finite and >= 0, got {}", self.smoothing)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ArchivedSolution {
    /// 0-based iteration that produced the solution.
    pub iteration: usize,
    pub solution: Solution,
}

/// `iteration\tscore\tindex\tindex...` per archived solution.
pub fn archive_to_text(archive: &[ArchivedSolution]) -> String {
    let mut out = String::new();
    for a in archive {
        write!(out, "{}\t{}", a.iteration, a.solution.score).unwrap();
        for i in &a.solution.subset {
            write!(out, "\t{i}").unwrap();
        }
        out.push('\n');
    }
    out
}

fn with_added(subset: &[usize], f: usize) -> Vec<usize> {
    let mut s = subset.to_vec();
    let at = s.binary_search(&f).unwrap_err();
    s.insert(at, f);
    s
}

fn with_replaced(subset: &[usize], out: usize, add: usize) -> Vec<usize> {
    let mut s: Vec<usize> = subset.iter().copied().filter(|&i| i != out).collect();
    let at = s.binary_search(&add).unwrap_err();
    s.insert(at, add);
    s
}

/// Search state over one training matrix.
pub struct Grasp<'m> {
    scorer: SubsetScorer<'m>,
    cap: usize,
}

impl<'m> Grasp<'m> {
    pub fn new(m: &'m FeatureMatrix, cfg: &GraspConfig) -> Result<Grasp<'m>> {
        cfg.validate()?;
        Ok(Grasp {
            scorer: SubsetScorer::new(m, cfg.smoothing)?,
            cap: cfg.max_subset_size.unwrap_or(usize::MAX).min(m.cols()),
        })
    }

    pub fn score(&self, subset: &[usize]) -> Result<usize> {
        self.scorer.err(subset)
    }

    fn score_all(&self, subsets: Vec<Vec<usize>>) -> Result<Vec<Solution>> {
        subsets.into_par_iter().map(|subset| self.scorer.err(&subset).map(|score| Solution { subset, score })).collect()
    }

    fn unused(&self, subset: &[usize]) -> impl Iterator<Item = usize> + '_ {
        let d = self.scorer.matrix().cols();
        let used = subset.to_vec();
        (0..d).filter(move |i| used.binary_search(i).is_err())
    }

    /// Randomised greedy construction from the empty subset.
    ///
    /// Each step scores every one-feature addition, keeps those within
    /// `alpha_blend` of the best (the restricted candidate list), draws one
    /// uniformly and accepts it only if it strictly lowers the error;
    /// otherwise construction ends.
    pub fn construct<R: Rng>(&self, alpha_blend: f64, rng: &mut R) -> Result<Solution> {
        let mut current = Solution { subset: Vec::new(), score: self.scorer.err(&[])? };
        while current.subset.len() < self.cap {
            let candidates: Vec<Vec<usize>> =
                self.unused(&current.subset).map(|f| with_added(&current.subset, f)).collect();
            let scored = self.score_all(candidates)?;
            let lo = scored.iter().map(|s| s.score).min().expect("at least one unused feature");
            let hi = scored.iter().map(|s| s.score).max().expect("at least one unused feature");
            let threshold = lo as f64 + alpha_blend * (hi - lo) as f64;
            let mut rcl: Vec<Solution> = scored.into_iter().filter(|s| s.score as f64 <= threshold).collect();
            let pick = rcl.swap_remove(rng.gen_range(0..rcl.len()));
            if pick.score < current.score {
                current = pick;
            } else {
                break;
            }
        }
        Ok(current)
    }

    /// All add-one and replace-one neighbours of `subset`, unscored.
    pub fn neighbours(&self, subset: &[usize]) -> Vec<Vec<usize>> {
        let mut out = Vec::new();
        for add in self.unused(subset) {
            if subset.len() < self.cap {
                out.push(with_added(subset, add));
            }
            for &drop in subset {
                out.push(with_replaced(subset, drop, add));
            }
        }
        out
    }

    /// Best-improvement descent; ties go to the lexicographically smallest subset.
    pub fn local_search(&self, mut current: Solution) -> Result<Solution> {
        loop {
            let scored = self.score_all(self.neighbours(&current.subset))?;
            let best = scored
                .into_iter()
                .filter(|s| s.score < current.score)
                .min_by(|a, b| a.score.cmp(&b.score).then_with(|| a.subset.cmp(&b.subset)));
            match best {
                Some(next) => current = next,
                None => return Ok(current),
            }
        }
    }

    pub fn run(&self, maxiter: usize, seed: u64) -> Result<Vec<ArchivedSolution>> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut archive: Vec<ArchivedSolution> = Vec::new();
        for iteration in 0..maxiter {
            let alpha_blend: f64 = rng.gen();
            let built = self.construct(alpha_blend, &mut rng)?;
            let solution = self.local_search(built)?;
            if archive.last().is_none_or(|best| solution.score < best.solution.score) {
                log::debug!("iteration {iteration}: archived score {} with {:?}", solution.score, solution.subset);
                archive.push(ArchivedSolution { iteration, solution });
            }
        }
        Ok(archive)
    }
}

/// Runs the full search; the archive has strictly decreasing scores and its
/// last entry is the best subset found.
pub fn grasp_fs(m: &FeatureMatrix, cfg: &GraspConfig) -> Result<Vec<ArchivedSolution>> {
    Grasp::new(m, cfg)?.run(cfg.maxiter, cfg.seed)
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Feature 0 separates the classes; 1 and 2 are noise.
    fn separable() -> FeatureMatrix {
        FeatureMatrix::from_rows(
            &[
                vec![true, true, false],
                vec![true, false, true],
                vec![true, true, true],
                vec![false, true, false],
                vec![false, false, true],
                vec![false, false, false],
            ],
            vec![0, 0, 0, 1, 1, 1],
            2,
        )
    }

    #[test]
    fn greedy_picks_the_perfect_feature() {
        let m = separable();
        let g = Grasp::new(&m, &GraspConfig::default()).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let s = g.construct(0.0, &mut rng).unwrap();
        assert_eq!(s, Solution { subset: vec![0], score: 0 });
    }

    #[test]
    fn local_search_replaces_a_bad_feature() {
        let m = separable();
        let g = Grasp::new(&m, &GraspConfig::default()).unwrap();
        let start = Solution { subset: vec![1], score: g.score(&[1]).unwrap() };
        assert!(start.score > 0);
        let end = g.local_search(start).unwrap();
        assert_eq!(end.score, 0);
        assert_eq!(end.subset, vec![0]);
    }

    #[test]
    fn single_iteration_archives_once() {
        let cfg = GraspConfig { maxiter: 1, ..GraspConfig::default() };
        let archive = grasp_fs(&separable(), &cfg).unwrap();
        assert_eq!(archive.len(), 1);
        assert_eq!(archive[0].iteration, 0);
    }

    #[test]
    fn no_features_yields_majority_solution() {
        let m = FeatureMatrix::from_rows(&vec![vec![]; 3], vec![0, 1, 1], 2);
        let archive = grasp_fs(&m, &GraspConfig { maxiter: 5, ..GraspConfig::default() }).unwrap();
        assert_eq!(archive.len(), 1);
        assert_eq!(archive[0].solution, Solution { subset: vec![], score: 1 });
    }

    #[test]
    fn cap_limits_subset_size() {
        let cfg = GraspConfig { max_subset_size: Some(0), maxiter: 3, ..GraspConfig::default() };
        let archive = grasp_fs(&separable(), &cfg).unwrap();
        assert!(archive.iter().all(|a| a.solution.subset.is_empty()));
    }

    #[test]
    fn neighbourhood_size() {
        let m = separable();
        let g = Grasp::new(&m, &GraspConfig::default()).unwrap();
        // 2 adds + 1*2 replaces
        assert_eq!(g.neighbours(&[1]).len(), 4);
        assert_eq!(g.neighbours(&[]).len(), 3);
        assert_eq!(g.neighbours(&[0, 1, 2]).len(), 0);
    }

    #[test]
    fn zero_maxiter_rejected() {
        let cfg = GraspConfig { maxiter: 0, ..GraspConfig::default() };
        assert!(grasp_fs(&separable(), &cfg).unwrap_err().is_config());
    }

    #[test]
    fn archive_text() {
        let archive = vec![ArchivedSolution { iteration: 2, solution: Solution { subset: vec![1, 4], score: 3 } }];
        assert_eq!(archive_to_text(&archive), "2\t3\t1\t4\n");
    }
}
