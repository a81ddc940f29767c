//! Readers for facts files, bias files and query strings.
//!
//! All three share one small Prolog-flavoured lexer: lowercase identifiers,
//! numbers and single-quoted names are constants, capitalised or `_`-prefixed
//! identifiers are variables, `%` starts a comment running to end of line.

use std::collections::{HashMap, HashSet};

use crate::error::{Error, Pos, Result};
use crate::logic::{Atom, Bias, BiasDecl, Dataset, Example, Query, Sym, Term, KEY_TYPE};

/// Predicate used to declare examples in a facts file.
pub const EXAMPLE_PREDICATE: &str = "example";

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Ident(String),
    Var(String),
    Num(String),
    Quoted(String),
    LParen,
    RParen,
    Comma,
    Dot,
    Eof,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Ident(s) | Tok::Var(s) | Tok::Num(s) => format!("`{s}`"),
            Tok::Quoted(s) => format!("'{s}'"),
            Tok::LParen => "`(`".into(),
            Tok::RParen => "`)`".into(),
            Tok::Comma => "`,`".into(),
            Tok::Dot => "`.`".into(),
            Tok::Eof => "end of input".into(),
        }
    }
}

fn syntax(pos: Pos, msg: impl Into<String>) -> Error {
    Error::Syntax { pos, msg: msg.into() }
}

fn data(pos: Pos, msg: impl Into<String>) -> Error {
    Error::Data { pos, msg: msg.into() }
}

struct Cursor {
    chars: Vec<char>,
    i: usize,
    pos: Pos,
}

impl Cursor {
    fn peek(&self) -> Option<char> {
        self.chars.get(self.i).copied()
    }

    fn peek2(&self) -> Option<char> {
        self.chars.get(self.i + 1).copied()
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.peek()?;
        self.i += 1;
        if c == '\n' {
            self.pos.line += 1;
            self.pos.col = 1;
        } else {
            self.pos.col += 1;
        }
        Some(c)
    }

    fn take_while(&mut self, s: &mut String, f: impl Fn(char) -> bool) {
        while let Some(c) = self.peek().filter(|&c| f(c)) {
            s.push(c);
            self.bump();
        }
    }
}

fn lex(text: &str) -> Result<Vec<(Tok, Pos)>> {
    let mut cur = Cursor { chars: text.chars().collect(), i: 0, pos: Pos { line: 1, col: 1 } };
    let mut out = Vec::new();
    while let Some(c) = cur.peek() {
        let pos = cur.pos;
        if c.is_whitespace() {
            cur.bump();
            continue;
        }
        if c == '%' {
            while cur.peek().is_some_and(|c| c != '\n') {
                cur.bump();
            }
            continue;
        }
        let punct = match c {
            '(' => Some(Tok::LParen),
            ')' => Some(Tok::RParen),
            ',' => Some(Tok::Comma),
            '.' => Some(Tok::Dot),
            _ => None,
        };
        if let Some(tok) = punct {
            cur.bump();
            out.push((tok, pos));
            continue;
        }
        if c == '\'' {
            cur.bump();
            let mut s = String::new();
            loop {
                match cur.bump() {
                    None => return Err(syntax(pos, "unterminated quoted name")),
                    Some('\'') => break,
                    Some('\\') => match cur.bump() {
                        Some(e) => s.push(e),
                        None => return Err(syntax(pos, "unterminated quoted name")),
                    },
                    Some(e) => s.push(e),
                }
            }
            if s.is_empty() {
                return Err(syntax(pos, "empty quoted name"));
            }
            out.push((Tok::Quoted(s), pos));
            continue;
        }
        if c.is_ascii_digit() || (c == '-' && cur.peek2().is_some_and(|d| d.is_ascii_digit())) {
            let mut s = String::new();
            s.push(c);
            cur.bump();
            cur.take_while(&mut s, |d| d.is_ascii_digit());
            // a dot is a decimal point only when a digit follows; otherwise it ends the clause
            if cur.peek() == Some('.') && cur.peek2().is_some_and(|d| d.is_ascii_digit()) {
                s.push('.');
                cur.bump();
                cur.take_while(&mut s, |d| d.is_ascii_digit());
            }
            out.push((Tok::Num(s), pos));
            continue;
        }
        if c.is_alphabetic() || c == '_' {
            let mut s = String::new();
            cur.take_while(&mut s, |d| d.is_alphanumeric() || d == '_');
            let tok = if c.is_uppercase() || c == '_' {
                Tok::Var(s)
            } else if c.is_ascii_lowercase() {
                Tok::Ident(s)
            } else {
                return Err(syntax(pos, format!("name `{s}` must start with an ASCII letter")));
            };
            out.push((tok, pos));
            continue;
        }
        return Err(syntax(pos, format!("unexpected character `{c}`")));
    }
    out.push((Tok::Eof, cur.pos));
    Ok(out)
}

struct Parser {
    toks: Vec<(Tok, Pos)>,
    at: usize,
}

impl Parser {
    fn new(text: &str) -> Result<Parser> {
        Ok(Parser { toks: lex(text)?, at: 0 })
    }

    fn peek(&self) -> &(Tok, Pos) {
        &self.toks[self.at]
    }

    fn next(&mut self) -> (Tok, Pos) {
        let t = self.toks[self.at].clone();
        if self.at + 1 < self.toks.len() {
            self.at += 1;
        }
        t
    }

    fn expect(&mut self, want: Tok) -> Result<Pos> {
        let (tok, pos) = self.next();
        if tok == want {
            Ok(pos)
        } else {
            Err(syntax(pos, format!("expected {}, found {}", want.describe(), tok.describe())))
        }
    }

    fn at_eof(&self) -> bool {
        self.peek().0 == Tok::Eof
    }

    fn term(&mut self) -> Result<Term> {
        let (tok, pos) = self.next();
        let term = match tok {
            Tok::Var(s) => Term::Var(s.into()),
            Tok::Ident(s) | Tok::Num(s) | Tok::Quoted(s) => Term::Const(s.into()),
            other => return Err(syntax(pos, format!("expected a term, found {}", other.describe()))),
        };
        if self.peek().0 == Tok::LParen {
            return Err(syntax(self.peek().1, "compound terms are not supported"));
        }
        Ok(term)
    }

    /// `name(term, ..., term)`
    fn atom(&mut self) -> Result<(Atom, Pos)> {
        let (tok, pos) = self.next();
        let name = match tok {
            Tok::Ident(s) => s,
            other => return Err(syntax(pos, format!("expected a predicate name, found {}", other.describe()))),
        };
        self.expect(Tok::LParen)?;
        let mut args = vec![self.term()?];
        while self.peek().0 == Tok::Comma {
            self.next();
            args.push(self.term()?);
        }
        self.expect(Tok::RParen)?;
        Ok((Atom::new(&name, args), pos))
    }

    fn clauses(&mut self) -> Result<Vec<(Atom, Pos)>> {
        let mut out = Vec::new();
        while !self.at_eof() {
            let clause = self.atom()?;
            self.expect(Tok::Dot)?;
            out.push(clause);
        }
        Ok(out)
    }
}

/// Parses `decl(pred(type, ...)).` clauses.
pub fn parse_bias(text: &str) -> Result<Bias> {
    let mut p = Parser::new(text)?;
    let mut decls: Vec<BiasDecl> = Vec::new();
    while !p.at_eof() {
        let (tok, pos) = p.next();
        if tok != Tok::Ident("decl".into()) {
            return Err(syntax(pos, format!("expected `decl`, found {}", tok.describe())));
        }
        p.expect(Tok::LParen)?;
        let (inner, inner_pos) = p.atom()?;
        p.expect(Tok::RParen)?;
        p.expect(Tok::Dot)?;
        let mut types = Vec::with_capacity(inner.arity());
        for t in &inner.args {
            match t {
                Term::Const(s) if crate::logic::is_plain_constant(s) => types.push(&**s),
                _ => return Err(syntax(inner_pos, format!("`{t}` is not a type name"))),
            }
        }
        if &*inner.predicate == EXAMPLE_PREDICATE {
            return Err(data(inner_pos, "`example` is reserved and cannot be declared"));
        }
        if decls.iter().any(|d| d.predicate == inner.predicate) {
            return Err(data(inner_pos, format!("predicate {} declared twice", inner.predicate)));
        }
        let keys = types.iter().filter(|t| **t == KEY_TYPE).count();
        if keys != 1 {
            return Err(data(
                inner_pos,
                format!("{} must have exactly one `{KEY_TYPE}` argument, found {keys}", inner.predicate),
            ));
        }
        decls.push(BiasDecl::new(&inner.predicate, &types)?);
    }
    Bias::new(decls)
}

/// Parses a facts file and bias file into a dataset and its bias.
pub fn parse_dataset(facts_text: &str, bias_text: &str) -> Result<(Dataset, Bias)> {
    let bias = parse_bias(bias_text)?;
    let dataset = parse_facts(facts_text, &bias)?;
    Ok((dataset, bias))
}

/// Parses a facts file against an already known bias.
///
/// Class labels become 0-based class indices in order of first appearance.
pub fn parse_facts(facts_text: &str, bias: &Bias) -> Result<Dataset> {
    let clauses = Parser::new(facts_text)?.clauses()?;

    for (atom, pos) in &clauses {
        if let Some(t) = atom.args.iter().find(|t| t.is_var()) {
            return Err(data(*pos, format!("fact {atom} is not ground (variable {t})")));
        }
    }

    let mut examples: Vec<Example> = Vec::new();
    let mut by_id: HashMap<Sym, usize> = HashMap::new();
    let mut classes: Vec<Sym> = Vec::new();
    for (atom, pos) in clauses.iter().filter(|(a, _)| &*a.predicate == EXAMPLE_PREDICATE) {
        if atom.arity() != 2 {
            return Err(data(*pos, format!("example/{} found, expected example/2", atom.arity())));
        }
        let id = Sym::from(atom.args[0].name());
        let label = Sym::from(atom.args[1].name());
        if by_id.contains_key(&id) {
            return Err(data(*pos, format!("example {id} declared twice")));
        }
        let class = match classes.iter().position(|c| *c == label) {
            Some(c) => c,
            None => {
                classes.push(label);
                classes.len() - 1
            }
        };
        by_id.insert(id.clone(), examples.len());
        examples.push(Example { id, facts: Vec::new(), label: class });
    }
    if examples.is_empty() {
        return Err(Error::NoExamples);
    }

    let mut seen: Vec<HashSet<Atom>> = vec![HashSet::new(); examples.len()];
    for (atom, pos) in clauses.iter().filter(|(a, _)| &*a.predicate != EXAMPLE_PREDICATE) {
        let decl = bias
            .get(&atom.predicate)
            .ok_or_else(|| data(*pos, format!("predicate {} has no bias declaration", atom.predicate)))?;
        if decl.arity() != atom.arity() {
            return Err(data(
                *pos,
                format!(
                    "arity mismatch: {} used with {} arguments, declared with {}",
                    atom.predicate,
                    atom.arity(),
                    decl.arity()
                ),
            ));
        }
        let key = atom.args[decl.key_position].name();
        let &k = by_id.get(key).ok_or_else(|| data(*pos, format!("unknown example ID {key} in fact {atom}")))?;
        if seen[k].insert(atom.clone()) {
            examples[k].facts.push(atom.clone());
        }
    }
    Dataset::new(examples, classes)
}

/// Parses a comma-separated conjunction such as `bond(K,X,Y), atom(K,X,c)`.
/// A trailing `.` is accepted. Every atom must contain a variable and the
/// conjunction must be linked.
pub fn parse_query(text: &str) -> Result<Query> {
    let mut p = Parser::new(text)?;
    let mut atoms: Vec<Atom> = Vec::new();
    let mut arities: HashMap<Sym, usize> = HashMap::new();
    let mut vars: HashSet<Sym> = HashSet::new();
    loop {
        let (atom, pos) = p.atom()?;
        if atom.is_ground() {
            return Err(syntax(pos, format!("atom {atom} has no variables")));
        }
        if let Some(&a) = arities.get(&atom.predicate) {
            if a != atom.arity() {
                return Err(syntax(pos, format!("{} used with arities {a} and {}", atom.predicate, atom.arity())));
            }
        }
        if !atoms.is_empty() && !atom.vars().any(|v| vars.contains(v)) {
            return Err(syntax(pos, format!("atom {atom} is not linked to the atoms before it")));
        }
        arities.insert(atom.predicate.clone(), atom.arity());
        vars.extend(atom.vars().cloned());
        atoms.push(atom);
        match p.next() {
            (Tok::Comma, _) => continue,
            (Tok::Dot, _) => {
                p.expect(Tok::Eof)?;
                break;
            }
            (Tok::Eof, _) => break,
            (tok, pos) => return Err(syntax(pos, format!("expected `,` or end of query, found {}", tok.describe()))),
        }
    }
    Query::new(atoms)
}

#[cfg(test)]
mod tests {
    use super::*;

    const BOND_BIAS: &str = "decl(bond(key,obj,obj)).";

    #[test]
    fn minimal_dataset() {
        let (d, bias) = parse_dataset("example(e1,pos). bond(e1,a,b).", BOND_BIAS).unwrap();
        assert_eq!(d.len(), 1);
        assert_eq!(bias.decls().len(), 1);
        let e = &d.examples()[0];
        assert_eq!(&*e.id, "e1");
        assert_eq!(e.label, 0);
        assert_eq!(d.class_names()[0].as_ref(), "pos");
        assert_eq!(e.facts.len(), 1);
        assert_eq!(e.facts[0].to_string(), "bond(e1,a,b)");
    }

    #[test]
    fn empty_facts_is_an_error() {
        assert_eq!(parse_dataset("", BOND_BIAS).unwrap_err(), Error::NoExamples);
        assert_eq!(parse_dataset("% only a comment\n", BOND_BIAS).unwrap_err(), Error::NoExamples);
    }

    #[test]
    fn unknown_example_id() {
        let err = parse_dataset("example(e1,pos). bond(e2,a,b).", BOND_BIAS).unwrap_err();
        match err {
            Error::Data { pos, msg } => {
                assert_eq!(pos, Pos { line: 1, col: 18 });
                assert!(msg.contains("unknown example ID e2"), "{msg}");
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn undeclared_predicate_and_arity() {
        let err = parse_dataset("example(e1,pos).\natom(e1,a).", BOND_BIAS).unwrap_err();
        assert!(matches!(err, Error::Data { pos: Pos { line: 2, col: 1 }, .. }));
        let err = parse_dataset("example(e1,pos).\nbond(e1,a).", BOND_BIAS).unwrap_err();
        assert!(matches!(&err, Error::Data { msg, .. } if msg.contains("arity mismatch")));
    }

    #[test]
    fn labels_in_first_appearance_order() {
        let facts = "example(a, neg).\nexample(b, pos).\nexample(c, neg).\n% trailing comment";
        let d = parse_facts(facts, &Bias::default()).unwrap();
        assert_eq!(d.labels(), vec![0, 1, 0]);
        let names: Vec<&str> = d.class_names().iter().map(|c| &**c).collect();
        assert_eq!(names, ["neg", "pos"]);
    }

    #[test]
    fn key_position_other_than_first() {
        let bias = parse_bias("decl(link(obj,key,obj)).").unwrap();
        let d = parse_facts("example(m1,y). link(a,m1,b). link(a,m1,b).", &bias).unwrap();
        assert_eq!(d.examples()[0].facts.len(), 1, "duplicate facts collapse");
    }

    #[test]
    fn numbers_and_quoted_constants() {
        let bias = parse_bias("decl(charge(key,obj,num)).").unwrap();
        let d = parse_facts("example(m1,y).\ncharge(m1, 'Atom 1', -0.117).\ncharge(m1,a2,3).", &bias).unwrap();
        let facts: Vec<String> = d.examples()[0].facts.iter().map(|a| a.to_string()).collect();
        assert_eq!(facts, ["charge(m1,'Atom 1',-0.117)", "charge(m1,a2,3)"]);
    }

    #[test]
    fn facts_must_be_ground() {
        let err = parse_dataset("example(e1,pos). bond(e1,X,b).", BOND_BIAS).unwrap_err();
        assert!(matches!(err, Error::Data { .. }));
    }

    #[test]
    fn bias_errors() {
        assert!(matches!(parse_bias("decl(p(obj)).").unwrap_err(), Error::Data { .. }));
        assert!(matches!(parse_bias("decl(p(key)). decl(p(key)).").unwrap_err(), Error::Data { .. }));
        assert!(matches!(parse_bias("decl(example(key,obj)).").unwrap_err(), Error::Data { .. }));
        assert!(matches!(parse_bias("dec(p(key)).").unwrap_err(), Error::Syntax { .. }));
        assert!(matches!(parse_bias("decl(p(key))").unwrap_err(), Error::Syntax { .. }));
    }

    #[test]
    fn query_single_atom() {
        let q = parse_query("bond(K,X,Y)").unwrap();
        assert_eq!(q.len(), 1);
        assert_eq!(q.vars().len(), 3);
    }

    #[test]
    fn query_shared_variables() {
        let q = parse_query("bond(K,X,Y), bond(K,Y,Z)").unwrap();
        assert_eq!(q.len(), 2);
        let names: Vec<&str> = q.vars().iter().map(|v| &**v).collect();
        assert_eq!(names, ["K", "X", "Y", "Z"]);
        assert_eq!(q.atoms()[0].args[2], q.atoms()[1].args[1]);
    }

    #[test]
    fn query_missing_paren() {
        match parse_query("bond(K,X").unwrap_err() {
            Error::Syntax { pos, msg } => {
                assert_eq!(pos, Pos { line: 1, col: 9 });
                assert!(msg.contains("`)`"), "{msg}");
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn query_rejections() {
        assert!(parse_query("bond(e1,a,b)").is_err());
        assert!(parse_query("bond(K,X,Y), bond(L,Z,W)").is_err());
        assert!(parse_query("bond(K,X,Y), bond(K,X)").is_err());
        assert!(parse_query("bond(K,f(X),Y)").is_err());
        assert!(parse_query("").is_err());
        assert!(parse_query("bond(K,X,Y).").is_ok());
        assert!(parse_query("bond(K,X,Y). bond(K,X,Y)").is_err());
    }
}
