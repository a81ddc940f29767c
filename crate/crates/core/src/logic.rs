//! Terms, atoms, queries, examples and language-bias declarations.

use std::collections::HashSet;
use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};

/// Interned-by-refcount symbol name.
pub type Sym = Arc<str>;

/// Reserved argument type marking the example key position.
pub const KEY_TYPE: &str = "key";

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Term {
    Var(Sym),
    Const(Sym),
}

impl Term {
    pub fn var(name: &str) -> Term {
        Term::Var(name.into())
    }

    pub fn constant(name: &str) -> Term {
        Term::Const(name.into())
    }

    pub fn is_var(&self) -> bool {
        matches!(self, Term::Var(_))
    }

    pub fn name(&self) -> &str {
        match self {
            Term::Var(s) | Term::Const(s) => s,
        }
    }
}

/// True when `s` can be written bare as a constant: a lowercase identifier or a number.
pub(crate) fn is_plain_constant(s: &str) -> bool {
    let mut chars = s.chars();
    match chars.next() {
        Some(c) if c.is_ascii_lowercase() => s.chars().all(|c| c.is_ascii_alphanumeric() || c == '_'),
        Some(c) if c.is_ascii_digit() || c == '-' => is_number(s),
        _ => false,
    }
}

fn is_number(s: &str) -> bool {
    let body = s.strip_prefix('-').unwrap_or(s);
    let (int, frac) = match body.split_once('.') {
        Some((i, f)) => (i, Some(f)),
        None => (body, None),
    };
    !int.is_empty()
        && int.bytes().all(|b| b.is_ascii_digit())
        && frac.is_none_or(|f| !f.is_empty() && f.bytes().all(|b| b.is_ascii_digit()))
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Var(s) => f.write_str(s),
            Term::Const(s) if is_plain_constant(s) => f.write_str(s),
            Term::Const(s) => write!(f, "'{}'", s.replace('\\', "\\\\").replace('\'', "\\'")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Atom {
    pub predicate: Sym,
    pub args: Vec<Term>,
}

impl Atom {
    pub fn new(predicate: &str, args: Vec<Term>) -> Atom {
        Atom { predicate: predicate.into(), args }
    }

    pub fn arity(&self) -> usize {
        self.args.len()
    }

    pub fn is_ground(&self) -> bool {
        self.args.iter().all(|t| !t.is_var())
    }

    pub fn vars(&self) -> impl Iterator<Item = &Sym> {
        self.args.iter().filter_map(|t| match t {
            Term::Var(v) => Some(v),
            Term::Const(_) => None,
        })
    }
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}(", self.predicate)?;
        for (i, t) in self.args.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{t}")?;
        }
        f.write_str(")")
    }
}

/// A linked conjunction of atoms; the unit of relational feature.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Query {
    atoms: Vec<Atom>,
    vars: Vec<Sym>,
}

impl Query {
    /// Builds a query, checking it is non-empty and linked: every atom after
    /// the first shares a variable with the atoms before it.
    pub fn new(atoms: Vec<Atom>) -> Result<Query> {
        if atoms.is_empty() {
            return Err(Error::Query("a query needs at least one atom".into()));
        }
        let mut vars: Vec<Sym> = Vec::new();
        let mut seen: HashSet<Sym> = HashSet::new();
        for (i, atom) in atoms.iter().enumerate() {
            if i > 0 && !atom.vars().any(|v| seen.contains(v)) {
                return Err(Error::Query(format!("atom {atom} shares no variable with the atoms before it")));
            }
            for v in atom.vars() {
                if seen.insert(v.clone()) {
                    vars.push(v.clone());
                }
            }
        }
        Ok(Query { atoms, vars })
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    /// Distinct variables in first-occurrence order.
    pub fn vars(&self) -> &[Sym] {
        &self.vars
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn constants(&self) -> impl Iterator<Item = &Sym> {
        self.atoms.iter().flat_map(|a| {
            a.args.iter().filter_map(|t| match t {
                Term::Const(c) => Some(c),
                Term::Var(_) => None,
            })
        })
    }

    /// Appends an atom, keeping the linkedness invariant.
    pub fn extended(&self, atom: Atom) -> Result<Query> {
        let mut atoms = self.atoms.clone();
        atoms.push(atom);
        Query::new(atoms)
    }

    /// The query with its last atom removed, if that leaves a non-empty query.
    pub fn parent(&self) -> Option<Query> {
        if self.atoms.len() < 2 {
            return None;
        }
        Query::new(self.atoms[..self.atoms.len() - 1].to_vec()).ok()
    }

    /// Same query with variables renamed `A, B, C, ...` in first-occurrence order.
    pub fn normalized(&self) -> Query {
        let rename = |v: &Sym| -> Sym {
            let i = self.vars.iter().position(|w| w == v).expect("variable of query");
            var_name(i).into()
        };
        let atoms = self
            .atoms
            .iter()
            .map(|a| Atom {
                predicate: a.predicate.clone(),
                args: a
                    .args
                    .iter()
                    .map(|t| match t {
                        Term::Var(v) => Term::Var(rename(v)),
                        c => c.clone(),
                    })
                    .collect(),
            })
            .collect();
        Query::new(atoms).expect("renaming preserves linkedness")
    }
}

/// Generated variable names: `A`..`Z`, then `V26`, `V27`, ...
pub fn var_name(i: usize) -> String {
    if i < 26 {
        char::from(b'A' + i as u8).to_string()
    } else {
        format!("V{i}")
    }
}

impl fmt::Display for Query {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, a) in self.atoms.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{a}")?;
        }
        Ok(())
    }
}

/// One relational example: its key constant, ground facts and class index.
///
/// Class indices are 0-based; `Dataset::class_names` maps them back to labels.
#[derive(Debug, Clone, PartialEq)]
pub struct Example {
    pub id: Sym,
    pub facts: Vec<Atom>,
    pub label: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    examples: Vec<Example>,
    class_names: Vec<Sym>,
}

impl Dataset {
    pub fn new(examples: Vec<Example>, class_names: Vec<Sym>) -> Result<Dataset> {
        let mut ids = HashSet::new();
        for e in &examples {
            if !ids.insert(e.id.clone()) {
                return Err(Error::Config(format!("duplicate example id {}", e.id)));
            }
            if e.label >= class_names.len() {
                return Err(Error::Config(format!(
                    "example {} has class index {} but only {} classes exist",
                    e.id,
                    e.label,
                    class_names.len()
                )));
            }
            if let Some(a) = e.facts.iter().find(|a| !a.is_ground()) {
                return Err(Error::Config(format!("fact {a} of example {} is not ground", e.id)));
            }
        }
        Ok(Dataset { examples, class_names })
    }

    pub fn examples(&self) -> &[Example] {
        &self.examples
    }

    pub fn class_names(&self) -> &[Sym] {
        &self.class_names
    }

    pub fn num_classes(&self) -> usize {
        self.class_names.len()
    }

    pub fn len(&self) -> usize {
        self.examples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.examples.is_empty()
    }

    pub fn labels(&self) -> Vec<usize> {
        self.examples.iter().map(|e| e.label).collect()
    }

    /// Examples at `indices`, in that order, with the same class vocabulary.
    pub fn subset(&self, indices: &[usize]) -> Dataset {
        Dataset {
            examples: indices.iter().map(|&i| self.examples[i].clone()).collect(),
            class_names: self.class_names.clone(),
        }
    }

    pub fn class_index(&self, name: &str) -> Option<usize> {
        self.class_names.iter().position(|c| &**c == name)
    }
}

/// Language-bias declaration: argument types for one predicate.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct BiasDecl {
    pub predicate: Sym,
    pub arg_types: Vec<Sym>,
    /// Position typed as the example key.
    pub key_position: usize,
}

impl BiasDecl {
    pub fn new(predicate: &str, arg_types: &[&str]) -> Result<BiasDecl> {
        let keys: Vec<usize> = arg_types.iter().enumerate().filter(|(_, t)| **t == KEY_TYPE).map(|(i, _)| i).collect();
        if keys.len() != 1 {
            return Err(Error::Config(format!(
                "declaration for {predicate} must have exactly one `{KEY_TYPE}` argument, found {}",
                keys.len()
            )));
        }
        Ok(BiasDecl {
            predicate: predicate.into(),
            arg_types: arg_types.iter().map(|t| Sym::from(*t)).collect(),
            key_position: keys[0],
        })
    }

    pub fn arity(&self) -> usize {
        self.arg_types.len()
    }
}

impl fmt::Display for BiasDecl {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "decl({}(", self.predicate)?;
        for (i, t) in self.arg_types.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            f.write_str(t)?;
        }
        f.write_str(")).")
    }
}

/// The predicate vocabulary, in declaration order.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Bias {
    decls: Vec<BiasDecl>,
}

impl Bias {
    pub fn new(decls: Vec<BiasDecl>) -> Result<Bias> {
        let mut seen = HashSet::new();
        for d in &decls {
            if !seen.insert(d.predicate.clone()) {
                return Err(Error::Config(format!("predicate {} declared twice", d.predicate)));
            }
        }
        Ok(Bias { decls })
    }

    pub fn decls(&self) -> &[BiasDecl] {
        &self.decls
    }

    pub fn get(&self, predicate: &str) -> Option<&BiasDecl> {
        self.decls.iter().find(|d| &*d.predicate == predicate)
    }
}

impl fmt::Display for Bias {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for d in &self.decls {
            writeln!(f, "{d}")?;
        }
        Ok(())
    }
}
