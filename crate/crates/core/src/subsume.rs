//! θ-subsumption under object identity.
//!
//! A query OI-subsumes a set of ground facts when some substitution maps every
//! query atom onto a fact, binds distinct variables to distinct constants, and
//! never binds a variable to a constant written in the query itself.

use std::collections::HashMap;

use crate::logic::{Atom, Example, Query, Sym, Term};

/// Variable-to-constant binding found by a successful match.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Substitution {
    binding: Vec<(Sym, Term)>,
}

impl Substitution {
    pub fn get(&self, var: &str) -> Option<&Term> {
        self.binding.iter().find(|(v, _)| &**v == var).map(|(_, t)| t)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Sym, &Term)> {
        self.binding.iter().map(|(v, t)| (v, t))
    }

    pub fn len(&self) -> usize {
        self.binding.len()
    }

    pub fn is_empty(&self) -> bool {
        self.binding.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Arg {
    Var(usize),
    Const(u32),
}

#[derive(Debug, Clone)]
struct CompiledAtom {
    pred: usize,
    args: Vec<Arg>,
    /// Bit `v` set when variable `v` occurs (only kept for the first 64 variables).
    vars: u64,
}

/// A query resolved against the symbols of one [`MatchIndex`].
#[derive(Debug, Clone)]
pub struct CompiledQuery {
    atoms: Vec<CompiledAtom>,
    num_vars: usize,
    /// Ids of constants occurring in the query; no variable may take them.
    forbidden: Vec<u32>,
    /// Some atom names a predicate or constant absent from the index.
    unsatisfiable: bool,
}

/// Facts of one predicate within one fact set.
#[derive(Debug, Clone, Default)]
struct Table {
    arity: usize,
    len: usize,
    /// Arguments of all facts, fact after fact.
    args: Vec<u32>,
    /// Per argument position, `(constant, fact number)` sorted.
    by_pos: Vec<Vec<(u32, u32)>>,
}

impl Table {
    fn fact(&self, f: usize) -> &[u32] {
        &self.args[f * self.arity..(f + 1) * self.arity]
    }

    fn with(&self, pos: usize, constant: u32) -> &[(u32, u32)] {
        let col = &self.by_pos[pos];
        let lo = col.partition_point(|&(c, _)| c < constant);
        let hi = col.partition_point(|&(c, _)| c <= constant);
        &col[lo..hi]
    }
}

/// Interned, predicate-indexed fact sets for repeated matching.
///
/// Each fact set keeps one table per predicate with a sorted index on every
/// argument position, so a query atom with a bound argument only visits facts
/// carrying that constant.
#[derive(Debug, Clone, Default)]
pub struct MatchIndex {
    terms: HashMap<Term, u32>,
    names: Vec<Term>,
    preds: HashMap<(Sym, usize), usize>,
    fact_sets: Vec<Vec<Table>>,
}

impl MatchIndex {
    pub fn new<'a, I>(fact_sets: I) -> MatchIndex
    where
        I: IntoIterator<Item = &'a [Atom]>,
    {
        let mut index = MatchIndex::default();
        for facts in fact_sets {
            index.push(facts);
        }
        index
    }

    pub fn from_examples(examples: &[Example]) -> MatchIndex {
        MatchIndex::new(examples.iter().map(|e| e.facts.as_slice()))
    }

    fn intern(&mut self, t: &Term) -> u32 {
        if let Some(&id) = self.terms.get(t) {
            return id;
        }
        let id = self.names.len() as u32;
        self.names.push(t.clone());
        self.terms.insert(t.clone(), id);
        id
    }

    fn push(&mut self, facts: &[Atom]) {
        let mut tables: Vec<Table> = Vec::new();
        for atom in facts {
            let key = (atom.predicate.clone(), atom.arity());
            let next = self.preds.len();
            let pred = *self.preds.entry(key).or_insert(next);
            if tables.len() <= pred {
                tables.resize(pred + 1, Table::default());
            }
            let ids: Vec<u32> = atom.args.iter().map(|t| self.intern(t)).collect();
            let table = &mut tables[pred];
            table.arity = atom.arity();
            table.args.extend(ids);
            table.len += 1;
        }
        for table in &mut tables {
            table.by_pos = (0..table.arity)
                .map(|p| {
                    let mut col: Vec<(u32, u32)> = (0..table.len).map(|f| (table.fact(f)[p], f as u32)).collect();
                    col.sort_unstable();
                    col
                })
                .collect();
        }
        self.fact_sets.push(tables);
    }

    pub fn len(&self) -> usize {
        self.fact_sets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.fact_sets.is_empty()
    }

    pub fn compile(&self, q: &Query) -> CompiledQuery {
        let mut unsatisfiable = false;
        let mut forbidden = Vec::new();
        let atoms = q
            .atoms()
            .iter()
            .map(|a| {
                let pred = match self.preds.get(&(a.predicate.clone(), a.arity())) {
                    Some(&p) => p,
                    None => {
                        unsatisfiable = true;
                        usize::MAX
                    }
                };
                let args: Vec<Arg> = a
                    .args
                    .iter()
                    .map(|t| match t {
                        Term::Var(v) => Arg::Var(q.vars().iter().position(|w| w == v).expect("query variable")),
                        Term::Const(_) => match self.terms.get(t) {
                            Some(&id) => {
                                if !forbidden.contains(&id) {
                                    forbidden.push(id);
                                }
                                Arg::Const(id)
                            }
                            None => {
                                unsatisfiable = true;
                                Arg::Const(u32::MAX)
                            }
                        },
                    })
                    .collect();
                let vars = args.iter().fold(0u64, |m, a| match *a {
                    Arg::Var(v) if v < 64 => m | 1 << v,
                    _ => m,
                });
                CompiledAtom { pred, args, vars }
            })
            .collect();
        CompiledQuery { atoms, num_vars: q.vars().len(), forbidden, unsatisfiable }
    }

    /// OI-subsumption test of a compiled query against fact set `set`.
    pub fn matches(&self, q: &CompiledQuery, set: usize) -> bool {
        self.solve(q, set).is_some()
    }

    fn solve(&self, q: &CompiledQuery, set: usize) -> Option<Vec<u32>> {
        if q.unsatisfiable {
            return None;
        }
        let mut m = Matcher {
            tables: &self.fact_sets[set],
            atoms: &q.atoms,
            forbidden: &q.forbidden,
            binding: vec![UNBOUND; q.num_vars],
            used: Vec::with_capacity(q.num_vars),
            done: vec![false; q.atoms.len()],
        };
        m.search(q.atoms.len()).then_some(m.binding)
    }

    /// The witnessing substitution, if the query matches fact set `set`.
    pub fn find(&self, q: &Query, set: usize) -> Option<Substitution> {
        let binding = self.solve(&self.compile(q), set)?;
        Some(Substitution {
            binding: q.vars().iter().zip(binding).map(|(v, id)| (v.clone(), self.names[id as usize].clone())).collect(),
        })
    }
}

const UNBOUND: u32 = u32::MAX;

struct Matcher<'a> {
    tables: &'a [Table],
    atoms: &'a [CompiledAtom],
    forbidden: &'a [u32],
    binding: Vec<u32>,
    /// Constants taken by bound variables, in binding order.
    used: Vec<u32>,
    done: Vec<bool>,
}

/// Facts of one table that can match an atom, narrowed by its most selective
/// bound argument.
enum Candidates<'t> {
    All(usize),
    Some(&'t [(u32, u32)]),
}

impl Candidates<'_> {
    fn len(&self) -> usize {
        match self {
            Candidates::All(n) => *n,
            Candidates::Some(s) => s.len(),
        }
    }

    fn get(&self, k: usize) -> usize {
        match self {
            Candidates::All(_) => k,
            Candidates::Some(s) => s[k].1 as usize,
        }
    }
}

impl<'a> Matcher<'a> {
    fn candidates(&self, atom: &CompiledAtom) -> Option<(&'a Table, Candidates<'a>)> {
        let tables: &'a [Table] = self.tables;
        let table = tables.get(atom.pred).filter(|t| t.len > 0)?;
        let mut best = Candidates::All(table.len);
        for (p, arg) in atom.args.iter().enumerate() {
            let constant = match *arg {
                Arg::Const(k) => k,
                Arg::Var(v) if self.binding[v] != UNBOUND => self.binding[v],
                Arg::Var(_) => continue,
            };
            let hits = table.with(p, constant);
            if hits.len() < best.len() {
                best = Candidates::Some(hits);
            }
        }
        Some((table, best))
    }

    /// Solves the `left` unsolved atoms, always expanding the one with the
    /// fewest facts consistent with the current binding and failing as soon
    /// as some atom has none.
    fn search(&mut self, left: usize) -> bool {
        if left == 0 {
            return true;
        }
        let atoms: &'a [CompiledAtom] = self.atoms;
        let parts = self.components();
        if parts.len() > 1 && !parts.iter().all(|p| self.solvable_alone(p)) {
            return false;
        }
        let mut best: Option<(usize, usize)> = None;
        for (i, atom) in atoms.iter().enumerate() {
            if self.done[i] {
                continue;
            }
            let Some((table, cands)) = self.candidates(atom) else { return false };
            let limit = best.map_or(usize::MAX, |(_, c)| c);
            let mut count = 0;
            for k in 0..cands.len() {
                let mark = self.used.len();
                if self.unify(&atom.args, table.fact(cands.get(k))) {
                    count += 1;
                }
                self.undo(mark);
                if count >= limit {
                    break;
                }
            }
            if count == 0 {
                return false;
            }
            if best.is_none_or(|(_, c)| count < c) {
                best = Some((i, count));
            }
        }
        let (i, _) = best.expect("an unsolved atom remains");
        let Some((table, cands)) = self.candidates(&atoms[i]) else { return false };
        self.done[i] = true;
        for k in 0..cands.len() {
            let mark = self.used.len();
            if self.unify(&atoms[i].args, table.fact(cands.get(k))) && self.search(left - 1) {
                return true;
            }
            self.undo(mark);
        }
        self.done[i] = false;
        false
    }

    /// Unsolved atoms with at least one unbound variable, grouped by shared
    /// unbound variables; empty when they form a single group.
    fn components(&self) -> Vec<Vec<usize>> {
        if self.binding.len() > 64 {
            return Vec::new();
        }
        let bound = self.binding.iter().enumerate().fold(0u64, |m, (v, &b)| if b == UNBOUND { m } else { m | 1 << v });
        let open: Vec<(usize, u64)> = (0..self.atoms.len())
            .filter(|&i| !self.done[i])
            .map(|i| (i, self.atoms[i].vars & !bound))
            .filter(|&(_, free)| free != 0)
            .collect();
        let mut taken = vec![false; open.len()];
        let mut parts = Vec::new();
        for start in 0..open.len() {
            if taken[start] {
                continue;
            }
            taken[start] = true;
            let mut part = vec![open[start].0];
            let mut reach = open[start].1;
            let mut grew = true;
            while grew {
                grew = false;
                for (k, &(i, free)) in open.iter().enumerate() {
                    if !taken[k] && free & reach != 0 {
                        taken[k] = true;
                        part.push(i);
                        reach |= free;
                        grew = true;
                    }
                }
            }
            if parts.is_empty() && part.len() == open.len() {
                return Vec::new();
            }
            parts.push(part);
        }
        parts
    }

    /// Whether `part` can be solved on its own under the current binding,
    /// ignoring the other unsolved atoms. Leaves the state unchanged.
    fn solvable_alone(&mut self, part: &[usize]) -> bool {
        let saved = self.done.clone();
        for (i, d) in self.done.iter_mut().enumerate() {
            if !part.contains(&i) {
                *d = true;
            }
        }
        let mark = self.used.len();
        let ok = self.search(part.len());
        self.undo(mark);
        self.done = saved;
        ok
    }

    fn unify(&mut self, args: &[Arg], fact: &[u32]) -> bool {
        for (arg, &c) in args.iter().zip(fact) {
            match *arg {
                Arg::Const(k) => {
                    if k != c {
                        return false;
                    }
                }
                Arg::Var(v) => {
                    let b = self.binding[v];
                    if b == UNBOUND {
                        if self.used.contains(&c) || self.forbidden.contains(&c) {
                            return false;
                        }
                        self.binding[v] = c;
                        self.used.push(c);
                    } else if b != c {
                        return false;
                    }
                }
            }
        }
        true
    }

    fn undo(&mut self, mark: usize) {
        for c in self.used.drain(mark..) {
            if let Some(b) = self.binding.iter_mut().find(|b| **b == c) {
                *b = UNBOUND;
            }
        }
    }
}

/// Whether `q` OI-subsumes the facts of `e`.
pub fn oi_subsumes(q: &Query, e: &Example) -> bool {
    find_substitution(q, e).is_some()
}

pub fn find_substitution(q: &Query, e: &Example) -> Option<Substitution> {
    MatchIndex::new([e.facts.as_slice()]).find(q, 0)
}

/// True when `source` OI-subsumes `target` read as a fact set whose
/// variables are fresh constants.
fn oi_matches_query(source: &Query, target: &Query) -> bool {
    let index = MatchIndex::new([target.atoms()]);
    index.matches(&index.compile(source), 0)
}

/// Whether two queries are variants: equal as atom sets up to a bijective
/// renaming of variables. Decided by OI-matching each onto the other.
pub fn oi_equivalent(q1: &Query, q2: &Query) -> bool {
    q1.vars().len() == q2.vars().len() && oi_matches_query(q1, q2) && oi_matches_query(q2, q1)
}
