//! Regular expressions in disjunctive normal form.
//!
//! A normal form is a union of *sequences*; a sequence alternates literal
//! strings and *atoms* (starred normal forms or opaque names):
//!
//! ```text
//!   ⟨ s0 A1 s1 … An sn  ∨  t0 B1 t1 … Bm tm  ∨ … ⟩
//! ```
//!
//! The representation is exact: a sequence with `n` atoms has `n + 1`
//! literal slots, so adjacent literals cannot exist unmerged. Conversion
//! from tree form ([`to_dnf`]) distributes concatenation over union and
//! wraps stars and names as atoms; [`to_regex`] reads a tree back without
//! padding (no empty-string units, no empty-language summands), and the two
//! compose to the identity on normal forms.
//!
//! The rewrite system ([`apply_rewrite_at`]) unrolls stars to the left or
//! right and substitutes name definitions, preserving the denoted language;
//! [`current_set`] / [`transitive_set`] summarize at which star depths each
//! name occurs, now and after any sequence of rewrites.

use std::collections::BTreeSet;

use thiserror::Error;

use crate::regex::{Definitions, Regex, RegexError};

/// An atom: a starred normal form or an opaque name.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Atom {
    Star(DnfRegex),
    Var(String),
}

/// `strings.len() == atoms.len() + 1` always holds; `strings[k]` sits
/// before `atoms[k]` and `strings[n]` closes the sequence.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Sequence {
    pub strings: Vec<String>,
    pub atoms: Vec<Atom>,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct DnfRegex {
    pub seqs: Vec<Sequence>,
}

impl Sequence {
    pub fn new(strings: Vec<String>, atoms: Vec<Atom>) -> Sequence {
        assert_eq!(
            strings.len(),
            atoms.len() + 1,
            "sequence needs one more literal slot than atoms"
        );
        Sequence { strings, atoms }
    }

    /// The sequence holding exactly one literal string and no atoms.
    pub fn of_str(s: impl Into<String>) -> Sequence {
        Sequence {
            strings: vec![s.into()],
            atoms: Vec::new(),
        }
    }

    pub fn arity(&self) -> usize {
        self.atoms.len()
    }
}

impl DnfRegex {
    pub fn empty_language() -> DnfRegex {
        DnfRegex { seqs: Vec::new() }
    }

    pub fn of_str(s: impl Into<String>) -> DnfRegex {
        DnfRegex {
            seqs: vec![Sequence::of_str(s)],
        }
    }
}

/// Join two sequences; the boundary literals merge into one slot.
pub fn seq_concat(a: &Sequence, b: &Sequence) -> Sequence {
    let mut strings = Vec::with_capacity(a.strings.len() + b.strings.len() - 1);
    strings.extend_from_slice(&a.strings[..a.strings.len() - 1]);
    let mut glue = a.strings[a.strings.len() - 1].clone();
    glue.push_str(&b.strings[0]);
    strings.push(glue);
    strings.extend_from_slice(&b.strings[1..]);
    let mut atoms = a.atoms.clone();
    atoms.extend(b.atoms.iter().cloned());
    Sequence { strings, atoms }
}

/// Distribute concatenation over the unions, pairing sequences in order:
/// all products of the first left sequence, then of the second, and so on.
pub fn dnf_concat(a: &DnfRegex, b: &DnfRegex) -> DnfRegex {
    let mut seqs = Vec::with_capacity(a.seqs.len() * b.seqs.len());
    for sa in &a.seqs {
        for sb in &b.seqs {
            seqs.push(seq_concat(sa, sb));
        }
    }
    DnfRegex { seqs }
}

/// Union, keeping both operand orders intact.
pub fn dnf_or(a: &DnfRegex, b: &DnfRegex) -> DnfRegex {
    let mut seqs = a.seqs.clone();
    seqs.extend(b.seqs.iter().cloned());
    DnfRegex { seqs }
}

/// Lift an atom to the normal form `⟨ "" A "" ⟩`.
pub fn atom_to_dnf(a: Atom) -> DnfRegex {
    DnfRegex {
        seqs: vec![Sequence {
            strings: vec![String::new(), String::new()],
            atoms: vec![a],
        }],
    }
}

/// Convert tree form to normal form. Names stay opaque atoms.
pub fn to_dnf(r: &Regex) -> DnfRegex {
    match r {
        Regex::Str(s) => DnfRegex::of_str(s.clone()),
        Regex::Empty => DnfRegex::empty_language(),
        Regex::Var(x) => atom_to_dnf(Atom::Var(x.clone())),
        Regex::Star(inner) => atom_to_dnf(Atom::Star(to_dnf(inner))),
        Regex::Concat(a, b) => dnf_concat(&to_dnf(a), &to_dnf(b)),
        Regex::Or(a, b) => dnf_or(&to_dnf(a), &to_dnf(b)),
    }
}

/// How many sequences [`to_dnf`] would produce, without building them —
/// concatenation multiplies the counts, so this can be astronomically
/// larger than the input expression. Saturates instead of overflowing.
pub fn dnf_width(r: &Regex) -> usize {
    match r {
        Regex::Str(_) | Regex::Var(_) | Regex::Star(_) => 1,
        Regex::Empty => 0,
        Regex::Concat(a, b) => dnf_width(a).saturating_mul(dnf_width(b)),
        Regex::Or(a, b) => dnf_width(a).saturating_add(dnf_width(b)),
    }
}

/// Read a normal form back as a tree: unions and concatenations associate
/// to the right, empty literal slots vanish, and a normal form with no
/// sequences is the empty language. Satisfies `to_dnf(to_regex(d)) == d`.
pub fn to_regex(d: &DnfRegex) -> Regex {
    Regex::or_all(d.seqs.iter().map(sequence_to_regex))
}

/// Tree form of a single sequence.
pub fn sequence_to_regex(sq: &Sequence) -> Regex {
    let mut parts: Vec<Regex> = Vec::new();
    for (k, s) in sq.strings.iter().enumerate() {
        if !s.is_empty() {
            parts.push(Regex::lit(s.clone()));
        }
        if k < sq.atoms.len() {
            parts.push(atom_to_regex(&sq.atoms[k]));
        }
    }
    Regex::concat_all(parts)
}

pub fn atom_to_regex(a: &Atom) -> Regex {
    match a {
        Atom::Star(d) => Regex::star(to_regex(d)),
        Atom::Var(x) => Regex::var(x.clone()),
    }
}

/// `D* ⇝ ⟨""⟩ ⊕ (D ⊙ ⟨"" D* ""⟩)`: peel one iteration off the front.
pub fn unroll_star_left(a: &Atom) -> Result<DnfRegex, RewriteError> {
    let Atom::Star(body) = a else {
        return Err(RewriteError::NotAStar);
    };
    Ok(dnf_or(
        &DnfRegex::of_str(""),
        &dnf_concat(body, &atom_to_dnf(a.clone())),
    ))
}

/// `D* ⇝ ⟨""⟩ ⊕ (⟨"" D* ""⟩ ⊙ D)`: peel one iteration off the back.
pub fn unroll_star_right(a: &Atom) -> Result<DnfRegex, RewriteError> {
    let Atom::Star(body) = a else {
        return Err(RewriteError::NotAStar);
    };
    Ok(dnf_or(
        &DnfRegex::of_str(""),
        &dnf_concat(&atom_to_dnf(a.clone()), body),
    ))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RewriteRule {
    UnrollLeft,
    UnrollRight,
    Substitute,
}

/// Address of an atom: one `(sequence, atom)` step per star nesting level,
/// outermost first. A path of length > 1 descends through star bodies.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct AtomPath(pub Vec<(usize, usize)>);

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RewriteError {
    #[error("rewrite target is not a star atom")]
    NotAStar,
    #[error("rewrite path addresses no atom")]
    BadPath,
    #[error("rewrite rule does not apply to the addressed atom")]
    RuleInapplicable,
    #[error(transparent)]
    Unbound(#[from] RegexError),
}

/// Apply one rewrite step at the addressed atom. The surrounding normal
/// form is rebuilt by splicing the replacement between the sequence's
/// prefix and suffix; at nested levels only the enclosing star's body
/// changes shape.
pub fn apply_rewrite_at(
    d: &DnfRegex,
    path: &AtomPath,
    rule: RewriteRule,
    defs: &Definitions,
) -> Result<DnfRegex, RewriteError> {
    apply_at(d, &path.0, rule, defs)
}

fn apply_at(
    d: &DnfRegex,
    path: &[(usize, usize)],
    rule: RewriteRule,
    defs: &Definitions,
) -> Result<DnfRegex, RewriteError> {
    let Some(&(i, j)) = path.first() else {
        return Err(RewriteError::BadPath);
    };
    let seq = d.seqs.get(i).ok_or(RewriteError::BadPath)?;
    let atom = seq.atoms.get(j).ok_or(RewriteError::BadPath)?;

    let replacement = if path.len() > 1 {
        // Descend: rewrite inside the star body, keep the atom in place.
        let Atom::Star(body) = atom else {
            return Err(RewriteError::BadPath);
        };
        let body2 = apply_at(body, &path[1..], rule, defs)?;
        atom_to_dnf(Atom::Star(body2))
    } else {
        match rule {
            RewriteRule::UnrollLeft => unroll_star_left(atom)?,
            RewriteRule::UnrollRight => unroll_star_right(atom)?,
            RewriteRule::Substitute => {
                let Atom::Var(x) = atom else {
                    return Err(RewriteError::RuleInapplicable);
                };
                let body = defs
                    .lookup(x)
                    .ok_or_else(|| RegexError::UnboundVariable(x.clone()))?;
                to_dnf(body)
            }
        }
    };

    let prefix = Sequence::new(seq.strings[..=j].to_vec(), seq.atoms[..j].to_vec());
    let suffix = Sequence::new(seq.strings[j + 1..].to_vec(), seq.atoms[j + 1..].to_vec());
    let spliced = dnf_concat(
        &dnf_concat(&DnfRegex { seqs: vec![prefix] }, &replacement),
        &DnfRegex { seqs: vec![suffix] },
    );

    let mut seqs = d.seqs[..i].to_vec();
    seqs.extend(spliced.seqs);
    seqs.extend(d.seqs[i + 1..].iter().cloned());
    Ok(DnfRegex { seqs })
}

/// Every applicable single rewrite step, in a fixed traversal order:
/// sequences left to right, atoms left to right; a star atom offers its two
/// unrollings and then the positions inside its body, a name offers
/// substitution.
pub fn enumerate_expansions(d: &DnfRegex, defs: &Definitions) -> Vec<(AtomPath, RewriteRule)> {
    let mut out = Vec::new();
    collect_expansions(d, defs, &mut Vec::new(), &mut out);
    out
}

fn collect_expansions(
    d: &DnfRegex,
    defs: &Definitions,
    prefix: &mut Vec<(usize, usize)>,
    out: &mut Vec<(AtomPath, RewriteRule)>,
) {
    for (i, seq) in d.seqs.iter().enumerate() {
        for (j, atom) in seq.atoms.iter().enumerate() {
            prefix.push((i, j));
            match atom {
                Atom::Star(body) => {
                    out.push((AtomPath(prefix.clone()), RewriteRule::UnrollLeft));
                    out.push((AtomPath(prefix.clone()), RewriteRule::UnrollRight));
                    collect_expansions(body, defs, prefix, out);
                }
                Atom::Var(x) => {
                    if defs.lookup(x).is_some() {
                        out.push((AtomPath(prefix.clone()), RewriteRule::Substitute));
                    }
                }
            }
            prefix.pop();
        }
    }
}

/// Substitute every occurrence of `name` at exactly the given star depth,
/// returning the rewritten form and how many occurrences were replaced.
pub fn substitute_at_depth(
    d: &DnfRegex,
    name: &str,
    depth: usize,
    defs: &Definitions,
) -> Result<(DnfRegex, usize), RewriteError> {
    let body = defs
        .lookup(name)
        .ok_or_else(|| RegexError::UnboundVariable(name.to_string()))?;
    let replacement = to_dnf(body);
    Ok(subst_rec(d, name, depth, &replacement))
}

fn subst_rec(d: &DnfRegex, name: &str, depth: usize, replacement: &DnfRegex) -> (DnfRegex, usize) {
    let mut count = 0;
    let mut result = DnfRegex::empty_language();
    for seq in &d.seqs {
        let mut acc = DnfRegex::of_str(seq.strings[0].clone());
        for (k, atom) in seq.atoms.iter().enumerate() {
            let piece = match atom {
                Atom::Var(x) if depth == 0 && x == name => {
                    count += 1;
                    replacement.clone()
                }
                Atom::Star(body) if depth > 0 => {
                    let (body2, c) = subst_rec(body, name, depth - 1, replacement);
                    count += c;
                    atom_to_dnf(Atom::Star(body2))
                }
                other => atom_to_dnf(other.clone()),
            };
            acc = dnf_concat(&acc, &piece);
            acc = dnf_concat(&acc, &DnfRegex::of_str(seq.strings[k + 1].clone()));
        }
        result = dnf_or(&result, &acc);
    }
    (result, count)
}

/// `(name, star depth)` pairs for every name occurrence in the form.
pub fn current_set(d: &DnfRegex) -> BTreeSet<(String, usize)> {
    let mut out = BTreeSet::new();
    collect_current(d, 0, &mut out);
    out
}

fn collect_current(d: &DnfRegex, depth: usize, out: &mut BTreeSet<(String, usize)>) {
    for seq in &d.seqs {
        for atom in &seq.atoms {
            match atom {
                Atom::Var(x) => {
                    out.insert((x.clone(), depth));
                }
                Atom::Star(body) => collect_current(body, depth + 1, out),
            }
        }
    }
}

/// All `(name, depth)` pairs reachable by rewriting: the current pairs,
/// closed under definition expansion (a name occurring at depth `k` inside
/// a definition body surfaces at `i + k`) and under star unrolling (which
/// lifts an occurrence one level up, so depths close downward to 0).
pub fn transitive_set(
    d: &DnfRegex,
    defs: &Definitions,
) -> Result<BTreeSet<(String, usize)>, RegexError> {
    let mut out = current_set(d);
    let mut work: Vec<(String, usize)> = out.iter().cloned().collect();
    let mut body_sets: std::collections::HashMap<String, BTreeSet<(String, usize)>> =
        std::collections::HashMap::new();
    while let Some((name, depth)) = work.pop() {
        if depth > 0 {
            let down = (name.clone(), depth - 1);
            if out.insert(down.clone()) {
                work.push(down);
            }
        }
        if !body_sets.contains_key(&name) {
            let body = defs
                .lookup(&name)
                .ok_or_else(|| RegexError::UnboundVariable(name.clone()))?;
            body_sets.insert(name.clone(), current_set(&to_dnf(body)));
        }
        for (inner, k) in body_sets[&name].clone() {
            let pair = (inner, depth + k);
            if out.insert(pair.clone()) {
                work.push(pair);
            }
        }
    }
    Ok(out)
}
