//! Boolean propositionalization of a dataset against mined queries.

use std::fmt::Write as _;

use rayon::prelude::*;

use crate::logic::{Dataset, Sym};
use crate::miner::FeatureSet;
use crate::subsume::MatchIndex;

/// Row-major, bit-packed `n x d` boolean matrix with one class label per row.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FeatureMatrix {
    rows: usize,
    cols: usize,
    words: usize,
    bits: Vec<u64>,
    labels: Vec<usize>,
    num_classes: usize,
}

impl FeatureMatrix {
    pub fn zeros(cols: usize, labels: Vec<usize>, num_classes: usize) -> FeatureMatrix {
        assert!(labels.iter().all(|&l| l < num_classes), "label out of range");
        let words = cols.div_ceil(64);
        FeatureMatrix { rows: labels.len(), cols, words, bits: vec![0; words * labels.len()], labels, num_classes }
    }

    pub fn from_rows(rows: &[Vec<bool>], labels: Vec<usize>, num_classes: usize) -> FeatureMatrix {
        assert_eq!(rows.len(), labels.len());
        let cols = rows.first().map_or(0, Vec::len);
        let mut m = FeatureMatrix::zeros(cols, labels, num_classes);
        for (k, row) in rows.iter().enumerate() {
            assert_eq!(row.len(), cols, "ragged rows");
            for (i, &b) in row.iter().enumerate() {
                if b {
                    m.set(k, i);
                }
            }
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn num_classes(&self) -> usize {
        self.num_classes
    }

    pub fn set(&mut self, row: usize, col: usize) {
        assert!(col < self.cols);
        self.bits[row * self.words + col / 64] |= 1 << (col % 64);
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> bool {
        debug_assert!(col < self.cols);
        self.bits[row * self.words + col / 64] >> (col % 64) & 1 == 1
    }

    /// Packed words of one row; bit `i % 64` of word `i / 64` is feature `i`.
    pub fn row_words(&self, row: usize) -> &[u64] {
        &self.bits[row * self.words..(row + 1) * self.words]
    }

    pub fn row(&self, row: usize) -> Vec<bool> {
        (0..self.cols).map(|i| self.get(row, i)).collect()
    }

    pub fn column_count(&self, col: usize) -> usize {
        (0..self.rows).filter(|&k| self.get(k, col)).count()
    }

    /// Rows per class.
    pub fn class_counts(&self) -> Vec<usize> {
        let mut counts = vec![0; self.num_classes];
        for &l in &self.labels {
            counts[l] += 1;
        }
        counts
    }

    /// Rows per class having feature `col` set.
    pub fn class_counts_with(&self, col: usize) -> Vec<usize> {
        let mut counts = vec![0; self.num_classes];
        for (k, &l) in self.labels.iter().enumerate() {
            if self.get(k, col) {
                counts[l] += 1;
            }
        }
        counts
    }

    /// Matrix made of the given columns, in the given order.
    pub fn select_columns(&self, cols: &[usize]) -> FeatureMatrix {
        let mut m = FeatureMatrix::zeros(cols.len(), self.labels.clone(), self.num_classes);
        for k in 0..self.rows {
            for (j, &c) in cols.iter().enumerate() {
                if self.get(k, c) {
                    m.set(k, j);
                }
            }
        }
        m
    }

    /// CSV with a header of feature indices and a trailing label column.
    pub fn to_csv(&self, class_names: &[Sym]) -> String {
        let mut out = String::new();
        for i in 0..self.cols {
            write!(out, "{i},").unwrap();
        }
        out.push_str("label\n");
        for k in 0..self.rows {
            for i in 0..self.cols {
                out.push(if self.get(k, i) { '1' } else { '0' });
                out.push(',');
            }
            let l = self.labels[k];
            match class_names.get(l) {
                Some(name) => out.push_str(name),
                None => write!(out, "{l}").unwrap(),
            }
            out.push('\n');
        }
        out
    }
}

/// Bit `[k][i]` is set iff query `i` OI-subsumes example `k`.
pub fn build_matrix(d: &Dataset, f: &FeatureSet) -> FeatureMatrix {
    let index = MatchIndex::from_examples(d.examples());
    let compiled: Vec<_> = f.queries.iter().map(|q| index.compile(q)).collect();
    let words = f.len().div_ceil(64);
    let rows: Vec<Vec<u64>> = (0..d.len())
        .into_par_iter()
        .map(|k| {
            let mut row = vec![0u64; words];
            for (i, cq) in compiled.iter().enumerate() {
                if index.matches(cq, k) {
                    row[i / 64] |= 1 << (i % 64);
                }
            }
            row
        })
        .collect();
    let mut m = FeatureMatrix::zeros(f.len(), d.labels(), d.num_classes());
    m.bits = rows.concat();
    m
}
