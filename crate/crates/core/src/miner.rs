//! Level-wise mining of frequent linked queries.
//!
//! Level 1 holds one most general atom per declared predicate. Level k+1 is
//! obtained by refining every frequent level-k query with one more atom,
//! dropping variants of candidates already generated at that level, and
//! keeping the candidates whose support reaches the threshold.

use std::collections::{HashMap, HashSet};
use std::fmt::Write as _;
use std::time::Instant;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::logic::{var_name, Atom, Bias, BiasDecl, Dataset, Query, Sym, Term, KEY_TYPE};
use crate::parse::parse_query;
use crate::subsume::{oi_equivalent, MatchIndex};

pub const DEFAULT_MIN_SUPPORT: f64 = 0.1;
pub const DEFAULT_MAX_LENGTH: usize = 6;

#[derive(Debug, Clone)]
pub struct MiningConfig {
    pub min_support: f64,
    pub max_length: usize,
    pub bias: Bias,
}

impl MiningConfig {
    pub fn new(bias: Bias) -> MiningConfig {
        MiningConfig { min_support: DEFAULT_MIN_SUPPORT, max_length: DEFAULT_MAX_LENGTH, bias }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.min_support > 0.0 && self.min_support <= 1.0) {
            return Err(Error::Config(format!("min_support must lie in (0, 1], got {}", self.min_support)));
        }
        if self.max_length == 0 {
            return Err(Error::Config("max_length must be at least 1".into()));
        }
        Ok(())
    }
}

/// Mined queries in discovery order with their supports.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureSet {
    pub queries: Vec<Query>,
    pub supports: Vec<f64>,
}

impl FeatureSet {
    pub fn empty() -> FeatureSet {
        FeatureSet { queries: Vec::new(), supports: Vec::new() }
    }

    pub fn len(&self) -> usize {
        self.queries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.queries.is_empty()
    }

    /// One `<support>\t<query>.` line per feature.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for (q, s) in self.queries.iter().zip(&self.supports) {
            writeln!(out, "{s}\t{q}.").unwrap();
        }
        out
    }

    pub fn from_text(text: &str) -> Result<FeatureSet> {
        let mut fs = FeatureSet::empty();
        for (i, line) in text.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let bad = |msg: String| Error::Format { line: i + 1, msg };
            let (support, query) =
                line.split_once('\t').ok_or_else(|| bad("expected `<support>\\t<query>.`".into()))?;
            let support: f64 = support.trim().parse().map_err(|_| bad(format!("bad support `{support}`")))?;
            let query = parse_query(query).map_err(|e| bad(e.to_string()))?;
            fs.queries.push(query);
            fs.supports.push(support);
        }
        Ok(fs)
    }
}

/// The argument type of each variable, taken from its first typed position.
fn var_types(q: &Query, bias: &Bias) -> HashMap<Sym, Sym> {
    let mut types = HashMap::new();
    for atom in q.atoms() {
        let Some(decl) = bias.get(&atom.predicate) else { continue };
        if decl.arity() != atom.arity() {
            continue;
        }
        for (t, ty) in atom.args.iter().zip(&decl.arg_types) {
            if let Term::Var(v) = t {
                types.entry(v.clone()).or_insert_with(|| ty.clone());
            }
        }
    }
    types
}

/// The single-atom query with a distinct variable in every position.
pub fn most_general(decl: &BiasDecl) -> Query {
    let args = (0..decl.arity()).map(|i| Term::Var(var_name(i).into())).collect();
    Query::new(vec![Atom { predicate: decl.predicate.clone(), args }]).expect("single atom")
}

#[derive(Clone)]
enum Choice {
    Existing(Sym),
    Fresh,
}

/// All one-atom extensions of `q` allowed by the bias.
///
/// Each argument of the new atom is an existing variable of the declared type
/// or a fresh variable (distinct per position); key positions never take a
/// fresh variable. At least one argument must reuse an existing variable, and
/// extensions that are variants of `q` itself (a repeated atom) are dropped.
pub fn refine(q: &Query, bias: &Bias) -> Vec<Query> {
    let types = var_types(q, bias);
    let taken: HashSet<&str> = q.vars().iter().map(|v| &**v).collect();
    let mut out = Vec::new();
    for decl in bias.decls() {
        let options: Vec<Vec<Choice>> = decl
            .arg_types
            .iter()
            .map(|ty| {
                let mut opts: Vec<Choice> = q
                    .vars()
                    .iter()
                    .filter(|v| types.get(*v) == Some(ty))
                    .map(|v| Choice::Existing(v.clone()))
                    .collect();
                if &**ty != KEY_TYPE {
                    opts.push(Choice::Fresh);
                }
                opts
            })
            .collect();
        if options.iter().any(Vec::is_empty) {
            continue;
        }
        let mut pick = vec![0usize; options.len()];
        loop {
            let linked = pick.iter().zip(&options).any(|(&k, o)| matches!(o[k], Choice::Existing(_)));
            if linked {
                let mut fresh = (0..).map(var_name).filter(|n| !taken.contains(n.as_str()));
                let args = pick
                    .iter()
                    .zip(&options)
                    .map(|(&k, o)| match &o[k] {
                        Choice::Existing(v) => Term::Var(v.clone()),
                        Choice::Fresh => Term::Var(fresh.next().expect("unbounded names").into()),
                    })
                    .collect();
                let atom = Atom { predicate: decl.predicate.clone(), args };
                // With set semantics only a repeated atom can make the extension a variant of q.
                if !q.atoms().contains(&atom) {
                    out.push(q.extended(atom).expect("linked extension"));
                }
            }
            if !advance(&mut pick, &options) {
                break;
            }
        }
    }
    out
}

/// Odometer step over per-position choices; false once every tuple was visited.
fn advance(pick: &mut [usize], options: &[Vec<Choice>]) -> bool {
    for pos in (0..pick.len()).rev() {
        pick[pos] += 1;
        if pick[pos] < options[pos].len() {
            return true;
        }
        pick[pos] = 0;
    }
    false
}

/// Renaming- and order-invariant fingerprint of a query; variants share it.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
struct VariantKey {
    atoms: Vec<(Sym, Vec<ArgShape>)>,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
enum ArgShape {
    Const(Sym),
    /// (first index of this variable within the atom, total occurrences in the query)
    Var(usize, usize),
}

fn variant_key(q: &Query) -> VariantKey {
    let distinct: HashSet<&Atom> = q.atoms().iter().collect();
    let mut occurrences: HashMap<&Sym, usize> = HashMap::new();
    for a in distinct {
        for v in a.vars() {
            *occurrences.entry(v).or_default() += 1;
        }
    }
    let mut atoms: Vec<(Sym, Vec<ArgShape>)> = q
        .atoms()
        .iter()
        .map(|a| {
            let shape = a
                .args
                .iter()
                .map(|t| match t {
                    Term::Const(c) => ArgShape::Const(c.clone()),
                    Term::Var(v) => {
                        let first = a.args.iter().position(|u| u == t).unwrap();
                        ArgShape::Var(first, occurrences[v])
                    }
                })
                .collect();
            (a.predicate.clone(), shape)
        })
        .collect();
    atoms.sort();
    atoms.dedup();
    VariantKey { atoms }
}

/// Keeps the first query of every variant class, preserving order.
pub fn dedup_variants(queries: Vec<Query>) -> Vec<Query> {
    dedup_tagged(queries.into_iter().map(|q| (q, ())).collect()).into_iter().map(|(q, ())| q).collect()
}

fn dedup_tagged<T>(queries: Vec<(Query, T)>) -> Vec<(Query, T)> {
    let mut buckets: HashMap<VariantKey, Vec<usize>> = HashMap::new();
    let mut kept: Vec<(Query, T)> = Vec::new();
    for (q, tag) in queries {
        let bucket = buckets.entry(variant_key(&q)).or_default();
        if bucket.iter().any(|&i| oi_equivalent(&kept[i].0, &q)) {
            continue;
        }
        bucket.push(kept.len());
        kept.push((q, tag));
    }
    kept
}

/// Number of examples each query OI-subsumes.
pub fn support_counts(index: &MatchIndex, queries: &[Query]) -> Vec<usize> {
    queries
        .par_iter()
        .map(|q| {
            let cq = index.compile(q);
            (0..index.len()).filter(|&k| index.matches(&cq, k)).count()
        })
        .collect()
}

/// Frequent queries of length at most `cfg.max_length`, one per variant class.
pub fn mine(d: &Dataset, cfg: &MiningConfig) -> Result<FeatureSet> {
    cfg.validate()?;
    if d.is_empty() {
        return Err(Error::Config("cannot mine an empty dataset".into()));
    }
    let n = d.len();
    if cfg.min_support * (n as f64) < 1.0 {
        log::warn!("min_support {} is below one example out of {n}; every matching query is frequent", cfg.min_support);
    }
    let index = MatchIndex::from_examples(d.examples());
    let mut out = FeatureSet::empty();
    let all: Vec<u32> = (0..n as u32).collect();
    // Each candidate carries the cover of the query it refines; by
    // anti-monotonicity it can only match examples in that cover.
    let mut level: Vec<(Query, usize)> = cfg.bias.decls().iter().map(|d| (most_general(d), 0)).collect();
    let mut parent_covers: Vec<Vec<u32>> = vec![all];
    for length in 1..=cfg.max_length {
        let started = Instant::now();
        let covers: Vec<Vec<u32>> = level
            .par_iter()
            .map(|(q, parent)| {
                let cq = index.compile(q);
                parent_covers[*parent].iter().copied().filter(|&k| index.matches(&cq, k as usize)).collect()
            })
            .collect();
        log::debug!("level {length}: supports counted ({:?})", started.elapsed());
        let mut frequent = Vec::new();
        let mut frequent_covers = Vec::new();
        for ((q, _), cover) in level.into_iter().zip(covers) {
            let support = cover.len() as f64 / n as f64;
            if support >= cfg.min_support {
                out.queries.push(q.clone());
                out.supports.push(support);
                frequent.push(q);
                frequent_covers.push(cover);
            }
        }
        log::debug!("level {length}: {} frequent queries", frequent.len());
        if length == cfg.max_length || frequent.is_empty() {
            break;
        }
        let started = Instant::now();
        let candidates: Vec<(Query, usize)> = frequent
            .iter()
            .enumerate()
            .flat_map(|(i, q)| refine(q, &cfg.bias).into_iter().map(move |r| (r.normalized(), i)))
            .collect();
        let raw = candidates.len();
        level = dedup_tagged(candidates);
        parent_covers = frequent_covers;
        log::debug!("level {}: {raw} refinements, {} distinct ({:?})", length + 1, level.len(), started.elapsed());
    }
    Ok(out)
}
