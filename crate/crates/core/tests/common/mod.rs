//! Brute-force oracles and random generators shared by the integration tests.
//! Nothing here calls the code paths it is used to check.
#![allow(dead_code)]

use std::collections::{BTreeSet, HashSet};

use rand::seq::SliceRandom;
use rand::Rng;
use relprop::logic::{Atom, Bias, Dataset, Example, Query, Term, KEY_TYPE};
use relprop::propmat::FeatureMatrix;

pub const PREDICATES: [(&str, usize); 3] = [("p", 2), ("q", 2), ("r", 3)];

fn var(i: usize) -> Term {
    Term::var(&format!("V{i}"))
}

fn constant(i: usize) -> Term {
    Term::constant(&format!("c{i}"))
}

/// Linked query of 1..=max_atoms atoms over at most `max_vars` variables,
/// constants drawn from `c0..c{num_consts-1}` with probability `const_p`.
pub fn random_query<R: Rng>(rng: &mut R, max_atoms: usize, max_vars: usize, num_consts: usize, const_p: f64) -> Query {
    let n_atoms = rng.gen_range(1..=max_atoms);
    let mut atoms: Vec<Atom> = Vec::new();
    for a in 0..n_atoms {
        let (pred, arity) = PREDICATES[rng.gen_range(0..PREDICATES.len())];
        let mut args: Vec<Term> = (0..arity)
            .map(|_| {
                if rng.gen_bool(const_p) {
                    constant(rng.gen_range(0..num_consts))
                } else {
                    var(rng.gen_range(0..max_vars))
                }
            })
            .collect();
        let seen: HashSet<Term> = atoms.iter().flat_map(|x| x.args.iter().filter(|t| t.is_var()).cloned()).collect();
        let pos = rng.gen_range(0..arity);
        if a == 0 {
            if !args.iter().any(Term::is_var) {
                args[pos] = var(rng.gen_range(0..max_vars));
            }
        } else if !args.iter().any(|t| seen.contains(t)) {
            let pool: Vec<&Term> = seen.iter().collect();
            args[pos] = (*pool.choose(rng).unwrap()).clone();
        }
        atoms.push(Atom::new(pred, args));
    }
    Query::new(atoms).unwrap()
}

pub fn random_example<R: Rng>(rng: &mut R, max_facts: usize, num_consts: usize) -> Example {
    let n = rng.gen_range(0..=max_facts);
    let facts = (0..n)
        .map(|_| {
            let (pred, arity) = PREDICATES[rng.gen_range(0..PREDICATES.len())];
            Atom::new(pred, (0..arity).map(|_| constant(rng.gen_range(0..num_consts))).collect())
        })
        .collect();
    Example { id: "e".into(), facts, label: 0 }
}

/// All injective maps from `k` slots into `pool`, as index vectors.
fn injections(k: usize, pool: usize) -> Vec<Vec<usize>> {
    fn go(k: usize, pool: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for c in 0..pool {
            if !cur.contains(&c) {
                cur.push(c);
                go(k, pool, cur, out);
                cur.pop();
            }
        }
    }
    let mut out = Vec::new();
    go(k, pool, &mut Vec::new(), &mut out);
    out
}

fn apply(q: &Query, names: &[Term], image: &[Term]) -> Vec<Atom> {
    q.atoms()
        .iter()
        .map(|a| Atom {
            predicate: a.predicate.clone(),
            args: a
                .args
                .iter()
                .map(|t| match names.iter().position(|n| n == t) {
                    Some(i) => image[i].clone(),
                    None => t.clone(),
                })
                .collect(),
        })
        .collect()
}

/// Tries every injective variable-to-constant map avoiding query constants.
pub fn brute_subsumes(q: &Query, facts: &[Atom]) -> bool {
    let query_consts: HashSet<Term> =
        q.atoms().iter().flat_map(|a| a.args.iter().filter(|t| !t.is_var()).cloned()).collect();
    let pool: Vec<Term> = facts
        .iter()
        .flat_map(|a| a.args.iter().cloned())
        .filter(|t| !query_consts.contains(t))
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    let names: Vec<Term> = q.vars().iter().map(|v| Term::Var(v.clone())).collect();
    let fact_set: HashSet<&Atom> = facts.iter().collect();
    injections(names.len(), pool.len()).into_iter().any(|inj| {
        let image: Vec<Term> = inj.iter().map(|&i| pool[i].clone()).collect();
        apply(q, &names, &image).iter().all(|a| fact_set.contains(a))
    })
}

/// Tries every bijection between the two variable sets and compares atom sets.
pub fn brute_equivalent(q1: &Query, q2: &Query) -> bool {
    if q1.vars().len() != q2.vars().len() {
        return false;
    }
    let names: Vec<Term> = q1.vars().iter().map(|v| Term::Var(v.clone())).collect();
    let targets: Vec<Term> = q2.vars().iter().map(|v| Term::Var(v.clone())).collect();
    let target_set: HashSet<Atom> = q2.atoms().iter().cloned().collect();
    injections(names.len(), targets.len()).into_iter().any(|perm| {
        let image: Vec<Term> = perm.iter().map(|&i| targets[i].clone()).collect();
        let renamed: HashSet<Atom> = apply(q1, &names, &image).into_iter().collect();
        renamed == target_set
    })
}

/// Renames variables with a random bijection and shuffles atoms, keeping the
/// result linked.
pub fn random_variant<R: Rng>(rng: &mut R, q: &Query) -> Query {
    let names: Vec<Term> = q.vars().iter().map(|v| Term::Var(v.clone())).collect();
    let mut image: Vec<Term> = (0..names.len()).map(|i| Term::var(&format!("W{i}"))).collect();
    image.shuffle(rng);
    let mut atoms = apply(q, &names, &image);
    for _ in 0..10 {
        atoms.shuffle(rng);
        if let Ok(v) = Query::new(atoms.clone()) {
            return v;
        }
    }
    Query::new(apply(q, &names, &image)).unwrap()
}

/// Restricted-growth strings: every way to label `n` positions with
/// variables up to renaming.
fn partitions(n: usize) -> Vec<Vec<usize>> {
    fn go(n: usize, cur: &mut Vec<usize>, next: usize, out: &mut Vec<Vec<usize>>) {
        if cur.len() == n {
            out.push(cur.clone());
            return;
        }
        for v in 0..=next {
            cur.push(v);
            go(n, cur, if v == next { next + 1 } else { next }, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    go(n, &mut Vec::new(), 0, &mut out);
    out
}

/// Every query of length 1 or 2 in the mining language, one per variant
/// class, found by labelling all argument positions of every predicate pair
/// and filtering:
/// - the first atom has pairwise distinct variables;
/// - each variable has one declared type; key positions share one variable;
/// - variables new in the second atom occur once (fresh and distinct);
/// - the second atom shares a variable with the first and differs from it.
pub fn brute_language_upto2(bias: &Bias) -> Vec<Query> {
    let mut out: Vec<Query> = Vec::new();
    let decls = bias.decls();
    for d1 in decls {
        let args = (0..d1.arity()).map(var).collect();
        out.push(Query::new(vec![Atom { predicate: d1.predicate.clone(), args }]).unwrap());
    }
    for d1 in decls {
        for d2 in decls {
            let (a1, a2) = (d1.arity(), d2.arity());
            let types: Vec<&str> = d1.arg_types.iter().chain(&d2.arg_types).map(|t| &**t).collect();
            'label: for lab in partitions(a1 + a2) {
                let first = &lab[..a1];
                let second = &lab[a1..];
                if first.iter().collect::<HashSet<_>>().len() != a1 {
                    continue;
                }
                for (i, &v) in lab.iter().enumerate() {
                    for (j, &w) in lab.iter().enumerate() {
                        if v == w && types[i] != types[j] {
                            continue 'label;
                        }
                        if types[i] == KEY_TYPE && types[j] == KEY_TYPE && v != w {
                            continue 'label;
                        }
                    }
                }
                for &v in second {
                    if !first.contains(&v) && second.iter().filter(|&&w| w == v).count() > 1 {
                        continue 'label;
                    }
                }
                if !second.iter().any(|v| first.contains(v)) {
                    continue;
                }
                let atom1 = Atom { predicate: d1.predicate.clone(), args: first.iter().map(|&v| var(v)).collect() };
                let atom2 = Atom { predicate: d2.predicate.clone(), args: second.iter().map(|&v| var(v)).collect() };
                if atom1 == atom2 {
                    continue;
                }
                let q = Query::new(vec![atom1, atom2]).unwrap();
                if !out.iter().any(|o| brute_equivalent(o, &q)) {
                    out.push(q);
                }
            }
        }
    }
    out
}

/// Frequent queries of length <= 2 with exact supports, by exhaustive enumeration.
pub fn brute_frequent_upto2(d: &Dataset, bias: &Bias, min_support: f64) -> Vec<(Query, f64)> {
    brute_language_upto2(bias)
        .into_iter()
        .map(|q| {
            let c = d.examples().iter().filter(|e| brute_subsumes(&q, &e.facts)).count();
            (q, c as f64 / d.len() as f64)
        })
        .filter(|(_, s)| *s >= min_support)
        .collect()
}

/// Misclassification count of naive Bayes on `subset`, written directly from
/// the counting estimates and the log-odds discriminant.
pub fn oracle_err(m: &FeatureMatrix, subset: &[usize], alpha: f64) -> usize {
    let (n, q) = (m.rows(), m.num_classes());
    let labels = m.labels();
    let mut eta = vec![0usize; q];
    for &l in labels {
        eta[l] += 1;
    }
    let p: Vec<Vec<f64>> = subset
        .iter()
        .map(|&i| {
            (0..q)
                .map(|j| {
                    let count = (0..n).filter(|&k| labels[k] == j && m.get(k, i)).count();
                    (count as f64 + alpha) / (eta[j] as f64 + 2.0 * alpha)
                })
                .collect()
        })
        .collect();
    let mut wrong = 0;
    for k in 0..n {
        let g: Vec<f64> = (0..q)
            .map(|j| {
                let mut active = 0.0;
                let mut offset = 0.0;
                for (s, &i) in subset.iter().enumerate() {
                    let x = if m.get(k, i) { 1.0 } else { 0.0 };
                    active += x * (p[s][j] / (1.0 - p[s][j])).ln();
                    offset += (1.0 - p[s][j]).ln();
                }
                active + offset + (eta[j] as f64 / n as f64).ln()
            })
            .collect();
        let mut best = 0;
        for j in 1..q {
            if g[j] > g[best] {
                best = j;
            }
        }
        if best != labels[k] {
            wrong += 1;
        }
    }
    wrong
}

pub fn all_subsets(d: usize) -> impl Iterator<Item = Vec<usize>> {
    (0u64..(1 << d)).map(move |mask| (0..d).filter(|i| mask >> i & 1 == 1).collect())
}

/// Minimum `oracle_err` over all 2^d subsets.
pub fn exhaustive_optimum(m: &FeatureMatrix, alpha: f64) -> usize {
    all_subsets(m.cols()).map(|s| oracle_err(m, &s, alpha)).min().unwrap()
}

/// Add-one and replace-one neighbours of a sorted subset, built independently.
pub fn neighbourhood(subset: &[usize], d: usize) -> Vec<Vec<usize>> {
    let inside: BTreeSet<usize> = subset.iter().copied().collect();
    let mut out = Vec::new();
    for add in (0..d).filter(|i| !inside.contains(i)) {
        let mut s = inside.clone();
        s.insert(add);
        out.push(s.into_iter().collect());
        for &drop in &inside {
            let mut s = inside.clone();
            s.remove(&drop);
            s.insert(add);
            out.push(s.into_iter().collect());
        }
    }
    out
}

pub fn pairwise_auc(scores: &[f64], labels: &[bool]) -> Option<f64> {
    let (mut wins, mut ties, mut pairs) = (0usize, 0usize, 0usize);
    for (i, &li) in labels.iter().enumerate() {
        for (j, &lj) in labels.iter().enumerate() {
            if li && !lj {
                pairs += 1;
                if scores[i] > scores[j] {
                    wins += 1;
                } else if scores[i] == scores[j] {
                    ties += 1;
                }
            }
        }
    }
    (pairs > 0).then(|| (wins as f64 + 0.5 * ties as f64) / pairs as f64)
}

pub fn threshold_ap(scores: &[f64], labels: &[bool]) -> Option<f64> {
    let pos = labels.iter().filter(|&&l| l).count();
    if pos == 0 {
        return None;
    }
    let mut thresholds: Vec<f64> = scores.to_vec();
    thresholds.sort_by(|a, b| b.total_cmp(a));
    thresholds.dedup();
    let mut area = 0.0;
    let mut last_recall = 0.0;
    for t in thresholds {
        let tp = (0..scores.len()).filter(|&i| scores[i] >= t && labels[i]).count();
        let fp = (0..scores.len()).filter(|&i| scores[i] >= t && !labels[i]).count();
        let recall = tp as f64 / pos as f64;
        area += (recall - last_recall) * (tp as f64 / (tp + fp) as f64);
        last_recall = recall;
    }
    Some(area)
}

/// Random boolean matrix with every class present.
pub fn random_matrix<R: Rng>(rng: &mut R, rows: usize, cols: usize, classes: usize) -> FeatureMatrix {
    let mut labels: Vec<usize> = (0..rows).map(|k| k % classes).collect();
    labels.shuffle(rng);
    let data: Vec<Vec<bool>> = (0..rows).map(|_| (0..cols).map(|_| rng.gen_bool(0.4)).collect()).collect();
    FeatureMatrix::from_rows(&data, labels, classes)
}

/// Adds a random (not necessarily injective) grounding of `q` to `e`, so the
/// random pairs contain plenty of positive and near-miss cases.
pub fn plant<R: Rng>(rng: &mut R, q: &Query, e: &mut Example, num_consts: usize) {
    let names: Vec<Term> = q.vars().iter().map(|v| Term::Var(v.clone())).collect();
    let image: Vec<Term> = names.iter().map(|_| constant(rng.gen_range(0..num_consts))).collect();
    let mut atoms = apply(q, &names, &image);
    if rng.gen_bool(0.3) && atoms.len() > 1 {
        atoms.remove(rng.gen_range(0..atoms.len()));
    }
    e.facts.extend(atoms);
    e.facts.shuffle(rng);
}

/// A random (query, example) pair within the given size limits.
pub fn random_pair<R: Rng>(rng: &mut R) -> (Query, Example) {
    let q = random_query(rng, 3, 4, 6, 0.15);
    let mut e = random_example(rng, 6, 6);
    if rng.gen_bool(0.6) {
        plant(rng, &q, &mut e, 6);
    }
    (q, e)
}
