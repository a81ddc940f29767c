//! Fixture T1: a 12-example, two-class dataset small enough to analyse exhaustively.

use crate::logic::{Bias, Dataset};
use crate::parse::parse_dataset;

pub const T1_FACTS: &str = include_str!("../data/t1.facts");
pub const T1_BIAS: &str = include_str!("../data/t1.bias");

/// Mining threshold and length bound the fixture is designed around.
pub const T1_MIN_SUPPORT: f64 = 0.25;
pub const T1_MAX_LENGTH: usize = 2;

pub fn t1() -> (Dataset, Bias) {
    parse_dataset(T1_FACTS, T1_BIAS).expect("fixture T1 parses")
}
