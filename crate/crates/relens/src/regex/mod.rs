//! Regular expressions over ASCII strings, named definitions, and the
//! language-level decision procedures the rest of the crate relies on.
//!
//! Expressions are ordinary syntax trees ([`Regex`]); names ([`Regex::Var`])
//! refer to earlier bindings in a [`Definitions`] table and are kept opaque
//! by most of the pipeline — decision procedures resolve them first.
//!
//! The decision procedures (emptiness, disjointness, equivalence,
//! concatenation and iteration unambiguity) compile expressions to small
//! byte-alphabet automata; see [`automata`] for the constructions.

pub mod automata;

use std::collections::{BTreeSet, HashSet};
use std::fmt;

use indexmap::IndexMap;
use thiserror::Error;

use automata::Dfa;

/// A regular expression over ASCII strings.
///
/// `Str("")` is the empty string; `Empty` is the empty language. `Var`
/// names a user definition and is treated as an opaque token until
/// resolved against a [`Definitions`] table.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Regex {
    Str(String),
    Empty,
    Star(Box<Regex>),
    Concat(Box<Regex>, Box<Regex>),
    Or(Box<Regex>, Box<Regex>),
    Var(String),
}

impl Regex {
    pub fn lit(s: impl Into<String>) -> Regex {
        Regex::Str(s.into())
    }

    pub fn var(name: impl Into<String>) -> Regex {
        Regex::Var(name.into())
    }

    pub fn star(inner: Regex) -> Regex {
        Regex::Star(Box::new(inner))
    }

    pub fn concat(a: Regex, b: Regex) -> Regex {
        Regex::Concat(Box::new(a), Box::new(b))
    }

    /// Right-associated concatenation of a whole list; empty input is `""`.
    pub fn concat_all(parts: impl IntoIterator<Item = Regex>) -> Regex {
        let mut parts: Vec<Regex> = parts.into_iter().collect();
        match parts.pop() {
            None => Regex::lit(""),
            Some(last) => parts
                .into_iter()
                .rev()
                .fold(last, |acc, r| Regex::concat(r, acc)),
        }
    }

    pub fn or(a: Regex, b: Regex) -> Regex {
        Regex::Or(Box::new(a), Box::new(b))
    }

    /// Right-associated union of a whole list; empty input is `Empty`.
    pub fn or_all(parts: impl IntoIterator<Item = Regex>) -> Regex {
        let mut parts: Vec<Regex> = parts.into_iter().collect();
        match parts.pop() {
            None => Regex::Empty,
            Some(last) => parts
                .into_iter()
                .rev()
                .fold(last, |acc, r| Regex::or(r, acc)),
        }
    }

    /// Free names occurring anywhere in the expression.
    pub fn free_vars(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_vars(&mut out);
        out
    }

    fn collect_vars(&self, out: &mut BTreeSet<String>) {
        match self {
            Regex::Str(_) | Regex::Empty => {}
            Regex::Var(x) => {
                out.insert(x.clone());
            }
            Regex::Star(r) => r.collect_vars(out),
            Regex::Concat(a, b) | Regex::Or(a, b) => {
                a.collect_vars(out);
                b.collect_vars(out);
            }
        }
    }

    pub fn is_var_free(&self) -> bool {
        match self {
            Regex::Str(_) | Regex::Empty => true,
            Regex::Var(_) => false,
            Regex::Star(r) => r.is_var_free(),
            Regex::Concat(a, b) | Regex::Or(a, b) => a.is_var_free() && b.is_var_free(),
        }
    }

    /// Number of constructors in the expression tree.
    pub fn size(&self) -> usize {
        match self {
            Regex::Str(_) | Regex::Empty | Regex::Var(_) => 1,
            Regex::Star(r) => 1 + r.size(),
            Regex::Concat(a, b) | Regex::Or(a, b) => 1 + a.size() + b.size(),
        }
    }

    /// Distinct bytes appearing in any literal of the expression.
    pub fn literal_bytes(&self) -> BTreeSet<u8> {
        let mut out = BTreeSet::new();
        self.collect_bytes(&mut out);
        out
    }

    fn collect_bytes(&self, out: &mut BTreeSet<u8>) {
        match self {
            Regex::Str(s) => out.extend(s.bytes()),
            Regex::Empty | Regex::Var(_) => {}
            Regex::Star(r) => r.collect_bytes(out),
            Regex::Concat(a, b) | Regex::Or(a, b) => {
                a.collect_bytes(out);
                b.collect_bytes(out);
            }
        }
    }
}

/// Errors raised by name resolution and parsing.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RegexError {
    #[error("unbound name `{0}`")]
    UnboundVariable(String),
}

/// An ordered table of named regular expressions.
///
/// Bindings are acyclic by construction: a body may only mention names
/// bound earlier, which [`Definitions::define`] enforces.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Definitions {
    bindings: IndexMap<String, Regex>,
}

impl Definitions {
    pub fn new() -> Definitions {
        Definitions::default()
    }

    /// Add a binding. The body must only reference already-bound names, and
    /// the name must be fresh.
    pub fn define(&mut self, name: impl Into<String>, body: Regex) -> Result<(), RegexError> {
        let name = name.into();
        if self.bindings.contains_key(&name) {
            // Redefinition would silently change earlier bodies' meaning.
            return Err(RegexError::UnboundVariable(name));
        }
        for v in body.free_vars() {
            if !self.bindings.contains_key(&v) {
                return Err(RegexError::UnboundVariable(v));
            }
        }
        self.bindings.insert(name, body);
        Ok(())
    }

    pub fn lookup(&self, name: &str) -> Option<&Regex> {
        self.bindings.get(name)
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.bindings.keys().map(|s| s.as_str())
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &Regex)> {
        self.bindings.iter().map(|(k, v)| (k.as_str(), v))
    }

    pub fn len(&self) -> usize {
        self.bindings.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bindings.is_empty()
    }

    /// Replace every name with its (recursively resolved) body.
    pub fn resolve(&self, r: &Regex) -> Result<Regex, RegexError> {
        match r {
            Regex::Str(_) | Regex::Empty => Ok(r.clone()),
            Regex::Var(x) => {
                let body = self
                    .lookup(x)
                    .ok_or_else(|| RegexError::UnboundVariable(x.clone()))?;
                // Bodies only mention earlier names, so this terminates.
                self.resolve(body)
            }
            Regex::Star(inner) => Ok(Regex::star(self.resolve(inner)?)),
            Regex::Concat(a, b) => Ok(Regex::concat(self.resolve(a)?, self.resolve(b)?)),
            Regex::Or(a, b) => Ok(Regex::or(self.resolve(a)?, self.resolve(b)?)),
        }
    }
}

/// A parse of a string against a [`Regex`], mirroring the expression shape.
///
/// `VarNode` marks a name boundary and wraps the parse against the
/// definition body.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ParseTree {
    Leaf(String),
    StarNode(Vec<ParseTree>),
    ConcatNode(Box<ParseTree>, Box<ParseTree>),
    OrLeft(Box<ParseTree>),
    OrRight(Box<ParseTree>),
    VarNode(String, Box<ParseTree>),
}

impl ParseTree {
    /// The string this tree is a parse of.
    pub fn flatten(&self) -> String {
        let mut out = String::new();
        self.flatten_into(&mut out);
        out
    }

    fn flatten_into(&self, out: &mut String) {
        match self {
            ParseTree::Leaf(s) => out.push_str(s),
            ParseTree::StarNode(children) => {
                for c in children {
                    c.flatten_into(out);
                }
            }
            ParseTree::ConcatNode(a, b) => {
                a.flatten_into(out);
                b.flatten_into(out);
            }
            ParseTree::OrLeft(t) | ParseTree::OrRight(t) | ParseTree::VarNode(_, t) => {
                t.flatten_into(out)
            }
        }
    }
}

fn resolved(defs: &Definitions, r: &Regex) -> Regex {
    defs.resolve(r)
        .unwrap_or_else(|e| panic!("regex operation on unresolvable expression: {e}"))
}

/// Does the (resolved) expression denote the empty language?
pub fn language_empty(r: &Regex, defs: &Definitions) -> bool {
    automata::language_empty(&resolved(defs, r))
}

/// Do the two expressions share no string?
pub fn languages_disjoint(r1: &Regex, r2: &Regex, defs: &Definitions) -> bool {
    automata::languages_disjoint(&resolved(defs, r1), &resolved(defs, r2))
}

/// Do the two expressions denote the same language?
pub fn lang_equiv(r1: &Regex, r2: &Regex, defs: &Definitions) -> bool {
    automata::lang_equiv(&resolved(defs, r1), &resolved(defs, r2))
}

/// Is every string of `L(r1)·L(r2)` split in exactly one way into a member
/// of `L(r1)` followed by a member of `L(r2)`?
pub fn unambig_concat(r1: &Regex, r2: &Regex, defs: &Definitions) -> bool {
    automata::unambig_concat(&resolved(defs, r1), &resolved(defs, r2))
}

/// Is every string of `L(r)*` built from members of `L(r)` in exactly one
/// way (including the choice of how many)?
pub fn unambig_iter(r: &Regex, defs: &Definitions) -> bool {
    let r = resolved(defs, r);
    !automata::accepts_empty_string(&r) && automata::unambig_concat(&r, &Regex::star(r.clone()))
}

/// Every string of the language has exactly one parse: unions are disjoint,
/// concatenations split uniquely, stars iterate uniquely, recursively.
/// Subterms denoting the empty language pass vacuously.
pub fn strongly_unambiguous(r: &Regex, defs: &Definitions) -> bool {
    let r = resolved(defs, r);
    strongly_unambiguous_resolved(&r)
}

fn strongly_unambiguous_resolved(r: &Regex) -> bool {
    // A disjunction of plain literals — the shape character classes expand
    // to — has one parse per string exactly when the literals are pairwise
    // distinct. Deciding that by set membership sidesteps the quadratic
    // automata work the generic recursion would spend on a wide chain.
    if let Some(lits) = literal_alternatives(r) {
        let mut seen = HashSet::new();
        return lits.into_iter().all(|s| seen.insert(s));
    }
    // The empty-language escape comes first so dead subterms never fail the
    // structural checks below.
    if automata::language_empty(r) {
        return true;
    }
    match r {
        Regex::Str(_) | Regex::Empty => true,
        Regex::Var(_) => unreachable!("resolved expression"),
        Regex::Concat(a, b) => {
            strongly_unambiguous_resolved(a)
                && strongly_unambiguous_resolved(b)
                && automata::unambig_concat(a, b)
        }
        Regex::Or(a, b) => {
            // Branchwise disjointness: comparing leaves pairwise keeps each
            // automaton small on wide union chains, where comparing a branch
            // against the whole rest of the chain would not.
            fn leaves<'r>(r: &'r Regex, out: &mut Vec<&'r Regex>) {
                match r {
                    Regex::Or(x, y) => {
                        leaves(x, out);
                        leaves(y, out);
                    }
                    _ => out.push(r),
                }
            }
            let (mut la, mut lb) = (Vec::new(), Vec::new());
            leaves(a, &mut la);
            leaves(b, &mut lb);
            strongly_unambiguous_resolved(a)
                && strongly_unambiguous_resolved(b)
                && la
                    .iter()
                    .all(|x| lb.iter().all(|y| automata::languages_disjoint(x, y)))
        }
        Regex::Star(inner) => {
            strongly_unambiguous_resolved(inner)
                && !automata::accepts_empty_string(inner)
                && automata::unambig_concat(inner, &Regex::star((**inner).clone()))
        }
    }
}

/// The leaves of a chain of alternations, provided every one is a string
/// literal; `None` as soon as any other constructor appears.
fn literal_alternatives(r: &Regex) -> Option<Vec<&str>> {
    match r {
        Regex::Str(s) => Some(vec![s.as_str()]),
        Regex::Or(a, b) => {
            let mut lits = literal_alternatives(a)?;
            lits.extend(literal_alternatives(b)?);
            Some(lits)
        }
        _ => None,
    }
}

/// All strings of the language with length at most `max_len`, in length
/// then lexicographic order.
pub fn enumerate_strings(r: &Regex, max_len: usize, defs: &Definitions) -> Vec<String> {
    let r = resolved(defs, r);
    let alphabet: Vec<u8> = r.literal_bytes().into_iter().collect();
    let dfa = Dfa::compile(&r, &alphabet);
    dfa.enumerate(max_len)
}

/// Like [`enumerate_strings`], but gives up (returning `None`) once more
/// than `max_count` strings exist within the bound.
pub fn enumerate_strings_capped(
    r: &Regex,
    max_len: usize,
    max_count: usize,
    defs: &Definitions,
) -> Option<Vec<String>> {
    let r = resolved(defs, r);
    let alphabet: Vec<u8> = r.literal_bytes().into_iter().collect();
    let dfa = Dfa::compile(&r, &alphabet);
    dfa.enumerate_capped(max_len, max_count)
}

/// Is `s` in the language of `r`?
pub fn matches(r: &Regex, s: &str, defs: &Definitions) -> bool {
    let r = resolved(defs, r);
    let alphabet: Vec<u8> = r.literal_bytes().into_iter().collect();
    Dfa::compile(&r, &alphabet).accepts(s.as_bytes())
}

/// Parse `s` against `r`, keeping name boundaries as [`ParseTree::VarNode`]s.
///
/// Returns `None` when `s` is not in the language. When the expression is
/// strongly unambiguous the result is the unique parse; debug builds probe
/// for a second parse and panic if one exists.
pub fn parse_unique(r: &Regex, s: &str, defs: &Definitions) -> Option<ParseTree> {
    let limit = if cfg!(debug_assertions) { 2 } else { 1 };
    let parses = parse_collect(r, s, defs, limit);
    debug_assert!(
        parses.len() <= 1,
        "ambiguity violation: {s:?} has multiple parses against {r}"
    );
    parses.into_iter().next()
}

/// Collect up to `limit` parses of `s` against `r`.
pub fn parse_collect(r: &Regex, s: &str, defs: &Definitions, limit: usize) -> Vec<ParseTree> {
    let mut out = Vec::new();
    parse_span(r, s.as_bytes(), 0, s.len(), defs, limit, &mut |t| {
        out.push(t)
    });
    out
}

/// Backtracking parser over the expression tree; calls `emit` for each parse
/// of `s[i..j]` until `limit` parses have been emitted overall.
fn parse_span(
    r: &Regex,
    s: &[u8],
    i: usize,
    j: usize,
    defs: &Definitions,
    limit: usize,
    emit: &mut dyn FnMut(ParseTree),
) -> usize {
    let mut emitted = 0;
    match r {
        Regex::Empty => {}
        Regex::Str(t) => {
            if &s[i..j] == t.as_bytes() {
                emit(ParseTree::Leaf(t.clone()));
                emitted += 1;
            }
        }
        Regex::Var(x) => {
            let Some(body) = defs.lookup(x) else {
                return 0;
            };
            let mut wrapped = |t: ParseTree| emit(ParseTree::VarNode(x.clone(), Box::new(t)));
            emitted += parse_span(body, s, i, j, defs, limit, &mut wrapped);
        }
        Regex::Or(a, b) => {
            let mut left = |t: ParseTree| emit(ParseTree::OrLeft(Box::new(t)));
            emitted += parse_span(a, s, i, j, defs, limit, &mut left);
            if emitted < limit {
                let mut right = |t: ParseTree| emit(ParseTree::OrRight(Box::new(t)));
                emitted += parse_span(b, s, i, j, defs, limit - emitted, &mut right);
            }
        }
        Regex::Concat(a, b) => {
            for k in i..=j {
                if emitted >= limit {
                    break;
                }
                let mut lefts = Vec::new();
                parse_span(a, s, i, k, defs, limit, &mut |t| lefts.push(t));
                if lefts.is_empty() {
                    continue;
                }
                let mut rights = Vec::new();
                parse_span(b, s, k, j, defs, limit, &mut |t| rights.push(t));
                for l in &lefts {
                    for rt in &rights {
                        if emitted >= limit {
                            break;
                        }
                        emit(ParseTree::ConcatNode(
                            Box::new(l.clone()),
                            Box::new(rt.clone()),
                        ));
                        emitted += 1;
                    }
                }
            }
        }
        Regex::Star(inner) => {
            if i == j {
                emit(ParseTree::StarNode(Vec::new()));
                emitted += 1;
            } else {
                // Pieces are required to be nonempty; iteration of a language
                // containing the empty string is caught by the typecheckers
                // before evaluation ever parses against it.
                for k in (i + 1)..=j {
                    if emitted >= limit {
                        break;
                    }
                    let mut heads = Vec::new();
                    parse_span(inner, s, i, k, defs, limit, &mut |t| heads.push(t));
                    if heads.is_empty() {
                        continue;
                    }
                    let mut tails = Vec::new();
                    parse_span(r, s, k, j, defs, limit, &mut |t| tails.push(t));
                    for h in &heads {
                        for t in &tails {
                            if emitted >= limit {
                                break;
                            }
                            let ParseTree::StarNode(rest) = t else {
                                unreachable!()
                            };
                            let mut children = Vec::with_capacity(rest.len() + 1);
                            children.push(h.clone());
                            children.extend(rest.iter().cloned());
                            emit(ParseTree::StarNode(children));
                            emitted += 1;
                        }
                    }
                }
            }
        }
    }
    emitted
}

/// Concrete syntax, matching what the file parser accepts: quoted literals,
/// juxtaposition for concatenation, `|`, postfix `*`, `empty`, bare names.
impl fmt::Display for Regex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_regex(self, f, 0)
    }
}

/// Precedence levels: 0 union, 1 concatenation, 2 star/primary.
fn write_regex(r: &Regex, f: &mut fmt::Formatter<'_>, prec: u8) -> fmt::Result {
    match r {
        Regex::Str(s) => write!(f, "\"{}\"", escape_literal(s)),
        Regex::Empty => write!(f, "empty"),
        Regex::Var(x) => write!(f, "{x}"),
        Regex::Star(inner) => {
            write_regex(inner, f, 2)?;
            write!(f, "*")
        }
        Regex::Concat(a, b) => {
            if prec > 1 {
                write!(f, "(")?;
            }
            write_regex(a, f, 2)?;
            write!(f, " ")?;
            write_regex(b, f, 1)?;
            if prec > 1 {
                write!(f, ")")?;
            }
            Ok(())
        }
        Regex::Or(a, b) => {
            if prec > 0 {
                write!(f, "(")?;
            }
            write_regex(a, f, 1)?;
            write!(f, " | ")?;
            write_regex(b, f, 0)?;
            if prec > 0 {
                write!(f, ")")?;
            }
            Ok(())
        }
    }
}

pub fn escape_literal(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            '\t' => out.push_str("\\t"),
            c => out.push(c),
        }
    }
    out
}
