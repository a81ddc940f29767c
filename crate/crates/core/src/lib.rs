//! Selective propositionalization for relational classification.
//!
//! The pipeline mines frequent linked queries from Prolog-style examples
//! under OI-subsumption ([`miner`]), turns every example into a boolean
//! feature vector ([`propmat`]), searches feature subsets with GRASP to
//! minimise naive Bayes training error ([`grasp`], [`bayes`]) and classifies
//! with an ensemble of naive Bayes models, one per archived subset
//! ([`ensemble`]). [`cv`] cross-validates the whole chain.

pub mod bayes;
pub mod cv;
pub mod ensemble;
pub mod error;
pub mod fixture;
pub mod grasp;
pub mod logic;
pub mod metrics;
pub mod miner;
pub mod model;
pub mod parse;
pub mod propmat;
pub mod subsume;

pub use bayes::{err, fit, NBModel, SubsetScorer};
pub use cv::{cross_validate, EvalReport, PipelineConfig};
pub use ensemble::{rsm_fit, Combination, Ensemble};
pub use error::{Error, Result};
pub use grasp::{grasp_fs, ArchivedSolution, GraspConfig, Solution};
pub use logic::{Atom, Bias, BiasDecl, Dataset, Example, Query, Term};
pub use metrics::{auc_pr, auc_roc};
pub use miner::{mine, refine, FeatureSet, MiningConfig};
pub use model::TrainedModel;
pub use parse::{parse_bias, parse_dataset, parse_facts, parse_query};
pub use propmat::{build_matrix, FeatureMatrix};
pub use subsume::{oi_equivalent, oi_subsumes, MatchIndex, Substitution};
