//! Lenses over normal-form formats.
//!
//! A [`DnfLens`] mirrors the shape of the two [`DnfRegex`]es it connects:
//! one [`SequenceLens`] per source sequence, holding one literal pair per
//! literal slot and one [`AtomLens`] per atom, plus permutations saying
//! which target sequence/atom each source piece lands in. Both permutations
//! follow the same convention: `perm.apply(target_position)` is the source
//! position feeding it.
//!
//! [`typecheck_dnf_lens`] verifies a lens against its two formats;
//! [`dnf_lens_get`]/[`dnf_lens_put`] run it directly on the normal forms,
//! and [`dnf_lens_to_lens`] compiles it to the combinator language of
//! [`crate::lens`] — two independent evaluation routes for the same object.
//!
//! Name atoms are mapped through a [`VarLenses`] provider; the default
//! [`IdentityVars`] lets a name correspond only to itself.

use std::cell::RefCell;
use std::collections::{BTreeSet, HashMap};
use std::rc::Rc;

use thiserror::Error;

use crate::dnf::{atom_to_regex, sequence_to_regex, to_regex, Atom, DnfRegex, Sequence};
use crate::lens::{factorize, find_split, lens_get, lens_put, lens_type, Evaluator, Lens};
use crate::regex::automata::Dfa;
use crate::regex::{
    enumerate_strings_capped, lang_equiv, language_empty, languages_disjoint, strongly_unambiguous,
    unambig_concat, unambig_iter, Definitions, Regex, RegexError,
};

/// A permutation of `0..n`. `apply(i)` reads the backing table, so a table
/// `[2, 0, 1]` sends 0↦2, 1↦0, 2↦1.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Perm(Vec<usize>);

impl Perm {
    pub fn identity(n: usize) -> Perm {
        Perm((0..n).collect())
    }

    /// Wrap a table, checking it is a bijection on `0..len`.
    pub fn new(table: Vec<usize>) -> Perm {
        let mut seen = vec![false; table.len()];
        for &v in &table {
            assert!(v < table.len() && !seen[v], "not a permutation: {table:?}");
            seen[v] = true;
        }
        Perm(table)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn is_identity(&self) -> bool {
        self.0.iter().enumerate().all(|(i, &v)| i == v)
    }

    pub fn apply(&self, i: usize) -> usize {
        self.0[i]
    }

    pub fn inverse(&self) -> Perm {
        let mut inv = vec![0; self.0.len()];
        for (i, &v) in self.0.iter().enumerate() {
            inv[v] = i;
        }
        Perm(inv)
    }

    /// `a.then(b)` applies `a` first: `a.then(b).apply(i) == b.apply(a.apply(i))`.
    pub fn then(&self, b: &Perm) -> Perm {
        assert_eq!(self.len(), b.len());
        Perm(self.0.iter().map(|&v| b.0[v]).collect())
    }

    /// The stable sorting permutation: `sorted[k] == items[perm.apply(k)]`,
    /// with equal items kept in their original order.
    pub fn sorting<T: Ord>(items: &[T]) -> Perm {
        let mut idx: Vec<usize> = (0..items.len()).collect();
        idx.sort_by(|&a, &b| items[a].cmp(&items[b]).then(a.cmp(&b)));
        Perm(idx)
    }
}

/// Maps one source atom onto one target atom.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum AtomLens {
    /// Maps each iteration of a starred format through the inner lens.
    Iterate(DnfLens),
    /// Maps the content of one named format onto another's.
    Var { src: String, tgt: String },
}

/// Maps one source sequence onto one target sequence. `string_pairs[k]`
/// pairs the two sides' literal slot `k`; `atom_lenses[k]` transforms
/// source atom `k`; `perm.apply(target_slot)` names the source atom whose
/// output lands in that target slot.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SequenceLens {
    pub string_pairs: Vec<(String, String)>,
    pub atom_lenses: Vec<AtomLens>,
    pub perm: Perm,
}

/// Maps a whole normal form onto another. `seq_lenses[i]` transforms
/// source sequence `i`; `perm.apply(target_index)` names the source
/// sequence paired with that target sequence. The permutation matters only
/// for typing — each input string selects its sequence by membership.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct DnfLens {
    pub seq_lenses: Vec<SequenceLens>,
    pub perm: Perm,
}

/// Supplies the lens connecting two named formats, when they correspond.
pub trait VarLenses {
    fn lens_between(&self, a: &str, b: &str) -> Option<Lens>;
}

/// Every name corresponds only to itself, mapping content unchanged.
pub struct IdentityVars;

impl VarLenses for IdentityVars {
    fn lens_between(&self, a: &str, b: &str) -> Option<Lens> {
        (a == b).then(|| Lens::Identity(Regex::var(a)))
    }
}

/// The lens mapping every member of `d` to itself.
pub fn identity_dnf_lens(d: &DnfRegex) -> DnfLens {
    DnfLens {
        seq_lenses: d
            .seqs
            .iter()
            .map(|sq| SequenceLens {
                string_pairs: sq.strings.iter().map(|s| (s.clone(), s.clone())).collect(),
                atom_lenses: sq
                    .atoms
                    .iter()
                    .map(|a| match a {
                        Atom::Star(inner) => AtomLens::Iterate(identity_dnf_lens(inner)),
                        Atom::Var(x) => AtomLens::Var {
                            src: x.clone(),
                            tgt: x.clone(),
                        },
                    })
                    .collect(),
                perm: Perm::identity(sq.arity()),
            })
            .collect(),
        perm: Perm::identity(d.seqs.len()),
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DnfTypeError {
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("literal slot {slot} on the {side} side: lens writes {lens:?}, format has {format:?}")]
    LiteralMismatch {
        side: &'static str,
        slot: usize,
        lens: String,
        format: String,
    },
    #[error("{side} sequences {i} and {j} overlap")]
    OverlappingSequences {
        side: &'static str,
        i: usize,
        j: usize,
    },
    #[error("{side} sequence `{seq}` concatenates ambiguously")]
    AmbiguousSequence { side: &'static str, seq: String },
    #[error("{side} star `{star}` iterates ambiguously")]
    AmbiguousIteration { side: &'static str, star: String },
    #[error("names `{src}` and `{tgt}` are not translatable")]
    UnrelatedVars { src: String, tgt: String },
    #[error(transparent)]
    Unbound(#[from] RegexError),
}

/// Does the interleaving `s0 · A0 · s1 · … · A(n-1) · sn` split uniquely?
///
/// A sequence with a dead component denotes no strings, so it passes
/// vacuously. Otherwise it suffices to check each accumulated prefix
/// against the following atom: appending a single literal can never
/// introduce a second split.
pub fn seq_unambig_concat(sq: &Sequence, defs: &Definitions) -> bool {
    let atoms: Vec<Regex> = sq.atoms.iter().map(atom_to_regex).collect();
    if atoms.iter().any(|a| language_empty(a, defs)) {
        return true;
    }
    let mut prefix = Regex::lit(sq.strings[0].clone());
    for (k, atom) in atoms.into_iter().enumerate() {
        if !unambig_concat(&prefix, &atom, defs) {
            return false;
        }
        prefix = Regex::concat(prefix, atom);
        prefix = Regex::concat(prefix, Regex::lit(sq.strings[k + 1].clone()));
    }
    true
}

/// Verify `dl : src ⇔ tgt`: matching shapes and literals, translatable
/// name pairs, unambiguous sequence splits and star iterations on both
/// sides, and pairwise-disjoint sequences on both sides.
pub fn typecheck_dnf_lens(
    dl: &DnfLens,
    src: &DnfRegex,
    tgt: &DnfRegex,
    defs: &Definitions,
    vars: &dyn VarLenses,
) -> Result<(), DnfTypeError> {
    let n = src.seqs.len();
    if tgt.seqs.len() != n || dl.seq_lenses.len() != n || dl.perm.len() != n {
        return Err(DnfTypeError::Shape(format!(
            "{} sequence lenses over {} source and {} target sequences (permutation of {})",
            dl.seq_lenses.len(),
            n,
            tgt.seqs.len(),
            dl.perm.len()
        )));
    }
    let to_slot = dl.perm.inverse();
    for (i, sl) in dl.seq_lenses.iter().enumerate() {
        check_seq_lens(sl, &src.seqs[i], &tgt.seqs[to_slot.apply(i)], defs, vars)?;
    }
    for side in ["source", "target"] {
        let seqs = if side == "source" { &src.seqs } else { &tgt.seqs };
        let regexes: Vec<Regex> = seqs.iter().map(sequence_to_regex).collect();
        for i in 0..n {
            for j in i + 1..n {
                if !languages_disjoint(&regexes[i], &regexes[j], defs) {
                    return Err(DnfTypeError::OverlappingSequences { side, i, j });
                }
            }
        }
    }
    Ok(())
}

fn check_seq_lens(
    sl: &SequenceLens,
    sq: &Sequence,
    tq: &Sequence,
    defs: &Definitions,
    vars: &dyn VarLenses,
) -> Result<(), DnfTypeError> {
    let n = sq.arity();
    if tq.arity() != n
        || sl.atom_lenses.len() != n
        || sl.string_pairs.len() != n + 1
        || sl.perm.len() != n
    {
        return Err(DnfTypeError::Shape(format!(
            "sequence lens of arity {} between sequences of arity {} and {}",
            sl.atom_lenses.len(),
            n,
            tq.arity()
        )));
    }
    for (k, (ls, lt)) in sl.string_pairs.iter().enumerate() {
        if ls != &sq.strings[k] {
            return Err(DnfTypeError::LiteralMismatch {
                side: "source",
                slot: k,
                lens: ls.clone(),
                format: sq.strings[k].clone(),
            });
        }
        if lt != &tq.strings[k] {
            return Err(DnfTypeError::LiteralMismatch {
                side: "target",
                slot: k,
                lens: lt.clone(),
                format: tq.strings[k].clone(),
            });
        }
    }
    let to_slot = sl.perm.inverse();
    for (k, al) in sl.atom_lenses.iter().enumerate() {
        check_atom_lens(al, &sq.atoms[k], &tq.atoms[to_slot.apply(k)], defs, vars)?;
    }
    if !seq_unambig_concat(sq, defs) {
        return Err(DnfTypeError::AmbiguousSequence {
            side: "source",
            seq: sequence_to_regex(sq).to_string(),
        });
    }
    if !seq_unambig_concat(tq, defs) {
        return Err(DnfTypeError::AmbiguousSequence {
            side: "target",
            seq: sequence_to_regex(tq).to_string(),
        });
    }
    Ok(())
}

fn check_atom_lens(
    al: &AtomLens,
    a: &Atom,
    b: &Atom,
    defs: &Definitions,
    vars: &dyn VarLenses,
) -> Result<(), DnfTypeError> {
    match (al, a, b) {
        (AtomLens::Iterate(inner), Atom::Star(d1), Atom::Star(d2)) => {
            typecheck_dnf_lens(inner, d1, d2, defs, vars)?;
            for (side, d) in [("source", d1), ("target", d2)] {
                if !unambig_iter(&to_regex(d), defs) {
                    return Err(DnfTypeError::AmbiguousIteration {
                        side,
                        star: atom_to_regex(if side == "source" { a } else { b }).to_string(),
                    });
                }
            }
            Ok(())
        }
        (AtomLens::Var { src, tgt }, Atom::Var(x), Atom::Var(y)) if src == x && tgt == y => {
            if vars.lens_between(src, tgt).is_none() {
                return Err(DnfTypeError::UnrelatedVars {
                    src: src.clone(),
                    tgt: tgt.clone(),
                });
            }
            Ok(())
        }
        _ => Err(DnfTypeError::Shape(format!(
            "atom lens {al:?} does not fit atoms {} and {}",
            atom_to_regex(a),
            atom_to_regex(b)
        ))),
    }
}

/// Resolve-and-compile cache so repeated structure shares automata within
/// one evaluation.
pub(crate) struct DfaCache<'a> {
    pub(crate) defs: &'a Definitions,
    map: RefCell<HashMap<Regex, Rc<Dfa>>>,
}

impl<'a> DfaCache<'a> {
    pub(crate) fn new(defs: &'a Definitions) -> DfaCache<'a> {
        DfaCache {
            defs,
            map: RefCell::new(HashMap::new()),
        }
    }

    pub(crate) fn dfa(&self, r: &Regex) -> Option<Rc<Dfa>> {
        if let Some(d) = self.map.borrow().get(r) {
            return Some(d.clone());
        }
        let resolved = self.defs.resolve(r).ok()?;
        let alphabet: Vec<u8> = resolved.literal_bytes().into_iter().collect();
        let d = Rc::new(Dfa::compile(&resolved, &alphabet));
        self.map.borrow_mut().insert(r.clone(), d.clone());
        Some(d)
    }
}

/// Run a normal-form lens forwards. `None` when the input is outside the
/// source format (or a name translation fails).
pub fn dnf_lens_get(
    dl: &DnfLens,
    src: &DnfRegex,
    tgt: &DnfRegex,
    input: &str,
    defs: &Definitions,
    vars: &dyn VarLenses,
) -> Option<String> {
    let cache = DfaCache::new(defs);
    eval_dnf(dl, src, tgt, input.as_bytes(), &cache, vars, EvalDir::Get)
}

/// Run a normal-form lens backwards. `None` when the input is outside the
/// target format (or a name translation fails).
pub fn dnf_lens_put(
    dl: &DnfLens,
    src: &DnfRegex,
    tgt: &DnfRegex,
    input: &str,
    defs: &Definitions,
    vars: &dyn VarLenses,
) -> Option<String> {
    let cache = DfaCache::new(defs);
    eval_dnf(dl, src, tgt, input.as_bytes(), &cache, vars, EvalDir::Put)
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum EvalDir {
    Get,
    Put,
}

fn eval_dnf(
    dl: &DnfLens,
    src: &DnfRegex,
    tgt: &DnfRegex,
    input: &[u8],
    cache: &DfaCache,
    vars: &dyn VarLenses,
    dir: EvalDir,
) -> Option<String> {
    let to_slot = dl.perm.inverse();
    for (i, sl) in dl.seq_lenses.iter().enumerate() {
        let sq = &src.seqs[i];
        let tq = &tgt.seqs[to_slot.apply(i)];
        let read_side = if dir == EvalDir::Get { sq } else { tq };
        if cache.dfa(&sequence_to_regex(read_side))?.accepts(input) {
            return eval_seq(sl, sq, tq, input, cache, vars, dir);
        }
    }
    None
}

fn eval_seq(
    sl: &SequenceLens,
    sq: &Sequence,
    tq: &Sequence,
    input: &[u8],
    cache: &DfaCache,
    vars: &dyn VarLenses,
    dir: EvalDir,
) -> Option<String> {
    let n = sq.arity();
    match dir {
        EvalDir::Get => {
            // Read source order, write target order.
            let spans = split_sequence(sq, input, cache)?;
            let to_slot = sl.perm.inverse();
            let mut transformed = Vec::with_capacity(n);
            for (k, al) in sl.atom_lenses.iter().enumerate() {
                let piece = &input[spans[k].0..spans[k].1];
                transformed.push(eval_atom(
                    al,
                    &sq.atoms[k],
                    &tq.atoms[to_slot.apply(k)],
                    piece,
                    cache,
                    vars,
                    dir,
                )?);
            }
            let mut out = tq.strings[0].clone();
            for j in 0..n {
                out.push_str(&transformed[sl.perm.apply(j)]);
                out.push_str(&tq.strings[j + 1]);
            }
            Some(out)
        }
        EvalDir::Put => {
            // Read target order, write source order.
            let spans = split_sequence(tq, input, cache)?;
            let to_slot = sl.perm.inverse();
            let mut out = sq.strings[0].clone();
            for (k, al) in sl.atom_lenses.iter().enumerate() {
                let slot = to_slot.apply(k);
                let piece = &input[spans[slot].0..spans[slot].1];
                out.push_str(&eval_atom(
                    al,
                    &sq.atoms[k],
                    &tq.atoms[slot],
                    piece,
                    cache,
                    vars,
                    dir,
                )?);
                out.push_str(&sq.strings[k + 1]);
            }
            Some(out)
        }
    }
}

fn eval_atom(
    al: &AtomLens,
    a: &Atom,
    b: &Atom,
    content: &[u8],
    cache: &DfaCache,
    vars: &dyn VarLenses,
    dir: EvalDir,
) -> Option<String> {
    match al {
        AtomLens::Var { src, tgt } => {
            let lens = vars.lens_between(src, tgt)?;
            let text = std::str::from_utf8(content).ok()?;
            match dir {
                EvalDir::Get => lens_get(&lens, cache.defs, text).ok(),
                EvalDir::Put => lens_put(&lens, cache.defs, text).ok(),
            }
        }
        AtomLens::Iterate(inner) => {
            let (Atom::Star(d1), Atom::Star(d2)) = (a, b) else {
                return None;
            };
            let piece_format = match dir {
                EvalDir::Get => d1,
                EvalDir::Put => d2,
            };
            let dfa = cache.dfa(&to_regex(piece_format))?;
            let spans = factorize(&dfa, content)?;
            let mut out = String::new();
            for (x, y) in spans {
                out.push_str(&eval_dnf(inner, d1, d2, &content[x..y], cache, vars, dir)?);
            }
            Some(out)
        }
    }
}

/// Byte spans of the atom contents when `input` is read against the
/// sequence: literals are stripped as fixed text, and each atom's extent is
/// the unique cut against the remaining tail.
pub(crate) fn split_sequence(
    sq: &Sequence,
    input: &[u8],
    cache: &DfaCache,
) -> Option<Vec<(usize, usize)>> {
    let mut pos = 0;
    let strip = |pos: &mut usize, lit: &str| -> Option<()> {
        let bytes = lit.as_bytes();
        input[*pos..].starts_with(bytes).then(|| *pos += bytes.len())
    };
    strip(&mut pos, &sq.strings[0])?;
    let mut spans = Vec::with_capacity(sq.arity());
    for k in 0..sq.arity() {
        let atom_dfa = cache.dfa(&atom_to_regex(&sq.atoms[k]))?;
        let tail = Sequence::new(sq.strings[k + 1..].to_vec(), sq.atoms[k + 1..].to_vec());
        let tail_dfa = cache.dfa(&sequence_to_regex(&tail))?;
        let cut = find_split(&atom_dfa, &tail_dfa, &input[pos..])?;
        spans.push((pos, pos + cut));
        pos += cut;
        strip(&mut pos, &sq.strings[k + 1])?;
    }
    (pos == input.len()).then_some(spans)
}

/// Compile a normal-form lens to the combinator language.
///
/// Sequences denoting no strings are dropped (a lens with none left
/// becomes the identity on the empty format). Within a sequence, a
/// separable atom permutation becomes a tree of `swap`/`.` nodes with the
/// literal slots mapped by `const` glue; a non-separable one falls back to
/// a composition that first maps every atom in place and then reorders
/// adjacent blocks step by step.
pub fn dnf_lens_to_lens(
    dl: &DnfLens,
    src: &DnfRegex,
    tgt: &DnfRegex,
    defs: &Definitions,
    vars: &dyn VarLenses,
) -> Result<Lens, DnfTypeError> {
    let to_slot = dl.perm.inverse();
    let mut branches = Vec::new();
    for (i, sl) in dl.seq_lenses.iter().enumerate() {
        let sq = &src.seqs[i];
        let tq = &tgt.seqs[to_slot.apply(i)];
        if language_empty(&sequence_to_regex(sq), defs)
            || language_empty(&sequence_to_regex(tq), defs)
        {
            continue;
        }
        branches.push(seq_lens_to_lens(sl, sq, tq, defs, vars)?);
    }
    let mut branches = branches.into_iter().rev();
    match branches.next() {
        None => Ok(Lens::Identity(Regex::Empty)),
        Some(last) => Ok(branches.fold(last, |acc, l| Lens::or(l, acc))),
    }
}

fn seq_lens_to_lens(
    sl: &SequenceLens,
    sq: &Sequence,
    tq: &Sequence,
    defs: &Definitions,
    vars: &dyn VarLenses,
) -> Result<Lens, DnfTypeError> {
    let n = sq.arity();
    if n == 0 {
        return Ok(Lens::Const(sq.strings[0].clone(), tq.strings[0].clone()));
    }
    if let Some(middle) = separable_tree(sl, sq, tq, 0, n, defs, vars) {
        let middle = middle?;
        return Ok(Lens::concat(
            Lens::concat(
                Lens::Const(sq.strings[0].clone(), tq.strings[0].clone()),
                middle,
            ),
            Lens::Const(sq.strings[n].clone(), tq.strings[n].clone()),
        ));
    }
    bubble_lens(sl, sq, tq, defs, vars)
}

fn atom_lens_to_lens(
    al: &AtomLens,
    a: &Atom,
    b: &Atom,
    defs: &Definitions,
    vars: &dyn VarLenses,
) -> Result<Lens, DnfTypeError> {
    match al {
        AtomLens::Var { src, tgt } => {
            vars.lens_between(src, tgt)
                .ok_or_else(|| DnfTypeError::UnrelatedVars {
                    src: src.clone(),
                    tgt: tgt.clone(),
                })
        }
        AtomLens::Iterate(inner) => {
            let (Atom::Star(d1), Atom::Star(d2)) = (a, b) else {
                return Err(DnfTypeError::Shape(format!(
                    "iteration lens over non-star atoms {} and {}",
                    atom_to_regex(a),
                    atom_to_regex(b)
                )));
            };
            Ok(Lens::iterate(dnf_lens_to_lens(inner, d1, d2, defs, vars)?))
        }
    }
}

/// Build the swap/concat tree for target slots `lo..hi`, whose source
/// image must be contiguous. `None` marks a non-separable permutation;
/// errors from deeper conversions pass through.
fn separable_tree(
    sl: &SequenceLens,
    sq: &Sequence,
    tq: &Sequence,
    lo: usize,
    hi: usize,
    defs: &Definitions,
    vars: &dyn VarLenses,
) -> Option<Result<Lens, DnfTypeError>> {
    if hi - lo == 1 {
        let k = sl.perm.apply(lo);
        return Some(atom_lens_to_lens(
            &sl.atom_lenses[k],
            &sq.atoms[k],
            &tq.atoms[lo],
            defs,
            vars,
        ));
    }
    let image = |a: usize, b: usize| -> (usize, usize, bool) {
        let vals: BTreeSet<usize> = (a..b).map(|j| sl.perm.apply(j)).collect();
        let (mn, mx) = (*vals.first().unwrap(), *vals.last().unwrap());
        (mn, mx, mx - mn + 1 == b - a)
    };
    let (a, _, _) = image(lo, hi);
    for k in lo + 1..hi {
        let (lmin, lmax, lc) = image(lo, k);
        let (_, _, rc) = image(k, hi);
        if !lc || !rc {
            continue;
        }
        if lmin == a {
            // Left target block reads the left source block; the source
            // literal between the blocks sits at index lmax + 1.
            let left = separable_tree(sl, sq, tq, lo, k, defs, vars)?;
            let right = separable_tree(sl, sq, tq, k, hi, defs, vars)?;
            return Some(left.and_then(|l| {
                right.map(|r| {
                    Lens::concat(
                        Lens::concat(
                            l,
                            Lens::Const(sq.strings[lmax + 1].clone(), tq.strings[k].clone()),
                        ),
                        r,
                    )
                })
            }));
        }
        // Left target block reads the right source block: a swap. The
        // source literal between the source blocks sits at index lmin.
        let second = separable_tree(sl, sq, tq, lo, k, defs, vars)?;
        let first = separable_tree(sl, sq, tq, k, hi, defs, vars)?;
        return Some(first.and_then(|l1| {
            second.map(|l2| {
                Lens::swap(
                    Lens::concat(l1, Lens::Const(sq.strings[lmin].clone(), String::new())),
                    Lens::concat(l2, Lens::Const(String::new(), tq.strings[k].clone())),
                )
            })
        }));
    }
    None
}

/// Fallback for non-separable permutations: map every atom in place,
/// attaching to each output the target literal that must follow it, then
/// sort the resulting blocks with adjacent swaps, one composition stage
/// per swap.
fn bubble_lens(
    sl: &SequenceLens,
    sq: &Sequence,
    tq: &Sequence,
    defs: &Definitions,
    vars: &dyn VarLenses,
) -> Result<Lens, DnfTypeError> {
    let n = sq.arity();
    let to_slot = sl.perm.inverse();

    // Unit k: target atom fed by source atom k, then the literal after it.
    let unit_regex: Vec<Regex> = (0..n)
        .map(|k| {
            Regex::concat(
                atom_to_regex(&tq.atoms[to_slot.apply(k)]),
                Regex::lit(tq.strings[to_slot.apply(k) + 1].clone()),
            )
        })
        .collect();

    let mut parts = vec![Lens::Const(sq.strings[0].clone(), tq.strings[0].clone())];
    for (k, al) in sl.atom_lenses.iter().enumerate() {
        let content = atom_lens_to_lens(al, &sq.atoms[k], &tq.atoms[to_slot.apply(k)], defs, vars)?;
        parts.push(Lens::concat(
            content,
            Lens::Const(
                sq.strings[k + 1].clone(),
                tq.strings[to_slot.apply(k) + 1].clone(),
            ),
        ));
    }
    let map_stage = chain_concat(parts);

    let mut stages = Vec::new();
    let mut order: Vec<usize> = (0..n).collect();
    for j in 0..n {
        let want = sl.perm.apply(j);
        let mut q = order.iter().position(|&u| u == want).expect("permutation");
        while q > j {
            stages.push(swap_stage(&order, q - 1, &unit_regex, &tq.strings[0]));
            order.swap(q - 1, q);
            q -= 1;
        }
    }

    Ok(stages
        .into_iter()
        .fold(map_stage, |acc, s| Lens::compose(acc, s)))
}

/// One reordering stage: identity on every block except the adjacent pair
/// at `p`, which swaps.
fn swap_stage(order: &[usize], p: usize, unit_regex: &[Regex], lead: &str) -> Lens {
    let mut parts = vec![Lens::Identity(Regex::lit(lead))];
    let mut r = 0;
    while r < order.len() {
        if r == p {
            parts.push(Lens::swap(
                Lens::Identity(unit_regex[order[p]].clone()),
                Lens::Identity(unit_regex[order[p + 1]].clone()),
            ));
            r += 2;
        } else {
            parts.push(Lens::Identity(unit_regex[order[r]].clone()));
            r += 1;
        }
    }
    chain_concat(parts)
}

fn chain_concat(parts: Vec<Lens>) -> Lens {
    let mut it = parts.into_iter();
    let first = it.next().expect("nonempty chain");
    it.fold(first, |acc, l| Lens::concat(acc, l))
}

/// Clean up a well-typed lens without changing its meaning: merge and drop
/// trivial literal maps, factor shared parts out of alternatives, collapse
/// subtrees that demonstrably behave as the identity, and tidy identity
/// formats. Runs to a fixed point and is idempotent.
pub fn simplify_lens(l: &Lens, defs: &Definitions) -> Lens {
    let mut cur = l.clone();
    for _ in 0..100 {
        let next = simplify_pass(&cur, defs);
        if next == cur {
            break;
        }
        cur = next;
    }
    cur
}

fn simplify_pass(l: &Lens, defs: &Definitions) -> Lens {
    let rebuilt = match l {
        Lens::Concat(a, b) => Lens::concat(simplify_pass(a, defs), simplify_pass(b, defs)),
        Lens::Swap(a, b) => Lens::swap(simplify_pass(a, defs), simplify_pass(b, defs)),
        Lens::Or(a, b) => Lens::or(simplify_pass(a, defs), simplify_pass(b, defs)),
        Lens::Iterate(a) => Lens::iterate(simplify_pass(a, defs)),
        Lens::Compose(a, b) => Lens::compose(simplify_pass(a, defs), simplify_pass(b, defs)),
        Lens::Identity(r) => Lens::Identity(simplify_regex(r)),
        Lens::Const(..) | Lens::Ref { .. } => l.clone(),
    };
    local_rules(rebuilt, defs)
}

fn is_unit_const(l: &Lens) -> bool {
    matches!(l, Lens::Const(s, t) if s.is_empty() && t.is_empty())
        || matches!(l, Lens::Identity(Regex::Str(s)) if s.is_empty())
}

fn local_rules(l: Lens, defs: &Definitions) -> Lens {
    let l = match l {
        Lens::Concat(a, b) if is_unit_const(&a) => *b,
        Lens::Concat(a, b) if is_unit_const(&b) => *a,
        Lens::Concat(a, b) => match (*a, *b) {
            (Lens::Const(s1, t1), Lens::Const(s2, t2)) => Lens::Const(s1 + &s2, t1 + &t2),
            // Re-associate so literal maps meeting across a nesting
            // boundary still merge.
            (Lens::Concat(x, c1), c2) => match (*c1, c2) {
                (Lens::Const(s1, t1), Lens::Const(s2, t2)) => {
                    Lens::Concat(x, Box::new(Lens::Const(s1 + &s2, t1 + &t2)))
                }
                (c1, c2) => Lens::concat(Lens::Concat(x, Box::new(c1)), c2),
            },
            (c1, Lens::Concat(c2, y)) => match (c1, *c2) {
                (Lens::Const(s1, t1), Lens::Const(s2, t2)) => {
                    Lens::Concat(Box::new(Lens::Const(s1 + &s2, t1 + &t2)), y)
                }
                (c1, c2) => Lens::concat(c1, Lens::Concat(Box::new(c2), y)),
            },
            (a, b) => Lens::concat(a, b),
        },
        Lens::Or(a, b) => match (*a, *b) {
            // Shared leading or trailing part of both alternatives moves
            // outside the choice.
            (Lens::Concat(x1, y1), Lens::Concat(x2, y2)) if x1 == x2 => {
                Lens::Concat(x1, Box::new(Lens::Or(y1, y2)))
            }
            (Lens::Concat(x1, y1), Lens::Concat(x2, y2)) if y1 == y2 => {
                Lens::Concat(Box::new(Lens::Or(x1, x2)), y1)
            }
            (a, b) => Lens::or(a, b),
        },
        Lens::Compose(a, b) if matches!(*a, Lens::Identity(_)) => *b,
        Lens::Compose(a, b) if matches!(*b, Lens::Identity(_)) => *a,
        Lens::Const(s, t) if s == t && !s.is_empty() => Lens::Identity(Regex::lit(s)),
        other => other,
    };
    try_identity_collapse(l, defs)
}

/// Replace a composite subtree by `id` of its source format when source
/// and target denote the same language, the source has unique parses, and
/// the lens maps every enumerated short string to itself.
fn try_identity_collapse(l: Lens, defs: &Definitions) -> Lens {
    let is_compose = match &l {
        Lens::Compose(..) => true,
        Lens::Concat(..) | Lens::Swap(..) | Lens::Or(..) | Lens::Iterate(_) => false,
        _ => return l,
    };
    let ty = lens_type(&l);
    // Outside a composition the two types are built from the same leaves,
    // so an identity-acting lens has them structurally equal; testing that
    // first keeps the automata work off the no-collapse path.
    if !is_compose && ty.src != ty.tgt {
        return l;
    }
    if defs.resolve(&ty.src).is_err() || defs.resolve(&ty.tgt).is_err() {
        return l;
    }
    let Some(samples) = enumerate_strings_capped(&ty.src, 6, 200, defs) else {
        return l;
    };
    let Ok(eval) = Evaluator::new(&l, defs) else {
        return l;
    };
    let acts_as_identity = samples
        .iter()
        .all(|s| eval.get(s).as_deref() == Ok(s.as_str()));
    if !acts_as_identity {
        return l;
    }
    if is_compose && !lang_equiv(&ty.src, &ty.tgt, defs) {
        return l;
    }
    if !strongly_unambiguous(&ty.src, defs) {
        return l;
    }
    Lens::Identity(simplify_regex(&ty.src))
}

/// Language-preserving cleanup of a format: drop dead alternatives and
/// empty-string units, merge adjacent literals, flatten trivial stars.
fn simplify_regex(r: &Regex) -> Regex {
    match r {
        Regex::Str(_) | Regex::Empty | Regex::Var(_) => r.clone(),
        Regex::Star(inner) => match simplify_regex(inner) {
            Regex::Empty => Regex::lit(""),
            Regex::Str(s) if s.is_empty() => Regex::lit(""),
            inner => Regex::star(inner),
        },
        Regex::Or(a, b) => match (simplify_regex(a), simplify_regex(b)) {
            (Regex::Empty, b) => b,
            (a, Regex::Empty) => a,
            (a, b) => Regex::or(a, b),
        },
        Regex::Concat(a, b) => match (simplify_regex(a), simplify_regex(b)) {
            (Regex::Empty, _) | (_, Regex::Empty) => Regex::Empty,
            (Regex::Str(s), b) if s.is_empty() => b,
            (a, Regex::Str(s)) if s.is_empty() => a,
            (Regex::Str(s1), Regex::Str(s2)) => Regex::lit(s1 + &s2),
            (Regex::Str(s1), Regex::Concat(b1, b2)) => match *b1 {
                Regex::Str(s2) => Regex::Concat(Box::new(Regex::lit(s1 + &s2)), b2),
                b1 => Regex::concat(Regex::lit(s1), Regex::Concat(Box::new(b1), b2)),
            },
            (Regex::Concat(a1, a2), Regex::Str(s2)) => match *a2 {
                Regex::Str(s1) => Regex::Concat(a1, Box::new(Regex::lit(s1 + &s2))),
                a2 => Regex::concat(Regex::Concat(a1, Box::new(a2)), Regex::lit(s2)),
            },
            (a, b) => Regex::concat(a, b),
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dnf::{atom_to_dnf, dnf_concat, to_dnf};
    use crate::lens::{typecheck_lens, Evaluator};
    use crate::sampling;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn perm_laws() {
        let p = Perm::new(vec![2, 0, 1]);
        assert_eq!(p.apply(0), 2);
        assert_eq!(p.inverse().apply(2), 0);
        assert!(p.then(&p.inverse()).is_identity());
        assert!(p.inverse().then(&p).is_identity());
        let q = Perm::new(vec![1, 0, 2]);
        // then applies left first.
        assert_eq!(p.then(&q).apply(0), q.apply(p.apply(0)));
    }

    #[test]
    fn sorting_perm_is_stable() {
        let items = vec!["b", "a", "b", "a"];
        let p = Perm::sorting(&items);
        let sorted: Vec<&str> = (0..4).map(|k| items[p.apply(k)]).collect();
        assert_eq!(sorted, vec!["a", "a", "b", "b"]);
        // Equal items keep their original relative order.
        assert_eq!((p.apply(0), p.apply(1)), (1, 3));
        assert_eq!((p.apply(2), p.apply(3)), (0, 2));
    }

    fn title_defs() -> Definitions {
        let mut defs = Definitions::new();
        defs.define("text_char", Regex::or(Regex::lit("a"), Regex::lit("b")))
            .unwrap();
        defs
    }

    #[test]
    fn identity_lens_round_trips() {
        let defs = title_defs();
        let r = Regex::concat(
            Regex::lit("<"),
            Regex::concat(Regex::star(Regex::var("text_char")), Regex::lit(">")),
        );
        let d = to_dnf(&r);
        let dl = identity_dnf_lens(&d);
        typecheck_dnf_lens(&dl, &d, &d, &defs, &IdentityVars).unwrap();
        let got = dnf_lens_get(&dl, &d, &d, "<ab>", &defs, &IdentityVars).unwrap();
        assert_eq!(got, "<ab>");
        let back = dnf_lens_put(&dl, &d, &d, "<ab>", &defs, &IdentityVars).unwrap();
        assert_eq!(back, "<ab>");
        assert_eq!(dnf_lens_get(&dl, &d, &d, "<c>", &defs, &IdentityVars), None);
    }

    /// `< X - Y >` ⇔ `[ Y | X ]`: one sequence, two name atoms, swapped.
    fn swap_fixture() -> (Definitions, DnfRegex, DnfRegex, DnfLens) {
        let mut defs = Definitions::new();
        defs.define("X", Regex::or(Regex::lit("a"), Regex::lit("b")))
            .unwrap();
        defs.define("Y", Regex::lit("c")).unwrap();
        let src = DnfRegex {
            seqs: vec![Sequence::new(
                vec!["<".into(), "-".into(), ">".into()],
                vec![Atom::Var("X".into()), Atom::Var("Y".into())],
            )],
        };
        let tgt = DnfRegex {
            seqs: vec![Sequence::new(
                vec!["[".into(), "|".into(), "]".into()],
                vec![Atom::Var("Y".into()), Atom::Var("X".into())],
            )],
        };
        let dl = DnfLens {
            seq_lenses: vec![SequenceLens {
                string_pairs: vec![
                    ("<".into(), "[".into()),
                    ("-".into(), "|".into()),
                    (">".into(), "]".into()),
                ],
                atom_lenses: vec![
                    AtomLens::Var {
                        src: "X".into(),
                        tgt: "X".into(),
                    },
                    AtomLens::Var {
                        src: "Y".into(),
                        tgt: "Y".into(),
                    },
                ],
                // Target slot 0 reads source atom 1, slot 1 reads atom 0.
                perm: Perm::new(vec![1, 0]),
            }],
            perm: Perm::identity(1),
        };
        (defs, src, tgt, dl)
    }

    #[test]
    fn swapped_sequence_lens_evaluates() {
        let (defs, src, tgt, dl) = swap_fixture();
        typecheck_dnf_lens(&dl, &src, &tgt, &defs, &IdentityVars).unwrap();
        assert_eq!(
            dnf_lens_get(&dl, &src, &tgt, "<a-c>", &defs, &IdentityVars).unwrap(),
            "[c|a]"
        );
        assert_eq!(
            dnf_lens_put(&dl, &src, &tgt, "[c|b]", &defs, &IdentityVars).unwrap(),
            "<b-c>"
        );
    }

    #[test]
    fn conversion_agrees_with_direct_evaluation() {
        let (defs, src, tgt, dl) = swap_fixture();
        let lens = dnf_lens_to_lens(&dl, &src, &tgt, &defs, &IdentityVars).unwrap();
        typecheck_lens(&lens, &defs).unwrap();
        let ev = Evaluator::new(&lens, &defs).unwrap();
        for s in ["<a-c>", "<b-c>"] {
            let direct = dnf_lens_get(&dl, &src, &tgt, s, &defs, &IdentityVars).unwrap();
            assert_eq!(ev.get(s).unwrap(), direct);
            assert_eq!(ev.put(&direct).unwrap(), s);
        }
    }

    #[test]
    fn typecheck_rejects_bad_literal_and_overlap() {
        let (defs, src, tgt, mut dl) = swap_fixture();
        dl.seq_lenses[0].string_pairs[1].1 = "!".into();
        assert!(matches!(
            typecheck_dnf_lens(&dl, &src, &tgt, &defs, &IdentityVars),
            Err(DnfTypeError::LiteralMismatch {
                side: "target",
                slot: 1,
                ..
            })
        ));

        // Duplicate sequences overlap.
        let d = DnfRegex {
            seqs: vec![Sequence::of_str("a"), Sequence::of_str("a")],
        };
        let dl = identity_dnf_lens(&d);
        assert!(matches!(
            typecheck_dnf_lens(&dl, &d, &d, &defs, &IdentityVars),
            Err(DnfTypeError::OverlappingSequences { i: 0, j: 1, .. })
        ));
    }

    #[test]
    fn typecheck_rejects_ambiguous_sequence() {
        let defs = Definitions::new();
        let a_star = || Atom::Star(DnfRegex::of_str("a"));
        let d = DnfRegex {
            seqs: vec![Sequence::new(
                vec!["".into(), "".into(), "".into()],
                vec![a_star(), a_star()],
            )],
        };
        let dl = identity_dnf_lens(&d);
        assert!(matches!(
            typecheck_dnf_lens(&dl, &d, &d, &defs, &IdentityVars),
            Err(DnfTypeError::AmbiguousSequence { side: "source", .. })
        ));
    }

    #[test]
    fn seq_unambig_concat_is_vacuous_for_dead_components() {
        let mut defs = Definitions::new();
        defs.define("dead", Regex::Empty).unwrap();
        let a_star = || Atom::Star(DnfRegex::of_str("a"));
        let sq = Sequence::new(
            vec!["".into(), "".into(), "".into(), "".into()],
            vec![a_star(), a_star(), Atom::Var("dead".into())],
        );
        assert!(seq_unambig_concat(&sq, &defs));
        let live = Sequence::new(
            vec!["".into(), "".into(), "".into()],
            vec![a_star(), a_star()],
        );
        assert!(!seq_unambig_concat(&live, &defs));
    }

    /// Four starred atoms rearranged by the smallest non-separable
    /// permutation; conversion must fall back to composed stages.
    #[test]
    fn non_separable_permutation_compiles_via_stages() {
        let defs = Definitions::new();
        let star = |c: &str| Atom::Star(DnfRegex::of_str(c));
        let blank = |n: usize| vec![String::new(); n];
        let src = DnfRegex {
            seqs: vec![Sequence::new(
                blank(5),
                vec![star("a"), star("b"), star("c"), star("d")],
            )],
        };
        // Target slots read source atoms 1, 3, 0, 2.
        let perm = Perm::new(vec![1, 3, 0, 2]);
        let tgt = DnfRegex {
            seqs: vec![Sequence::new(
                blank(5),
                vec![star("b"), star("d"), star("a"), star("c")],
            )],
        };
        let atom_lens = |piece: &str| {
            AtomLens::Iterate(DnfLens {
                seq_lenses: vec![SequenceLens {
                    string_pairs: vec![(piece.to_string(), piece.to_string())],
                    atom_lenses: vec![],
                    perm: Perm::identity(0),
                }],
                perm: Perm::identity(1),
            })
        };
        let dl = DnfLens {
            seq_lenses: vec![SequenceLens {
                string_pairs: vec![(String::new(), String::new()); 5],
                atom_lenses: vec![atom_lens("a"), atom_lens("b"), atom_lens("c"), atom_lens("d")],
                perm,
            }],
            perm: Perm::identity(1),
        };
        typecheck_dnf_lens(&dl, &src, &tgt, &defs, &IdentityVars).unwrap();

        let direct = dnf_lens_get(&dl, &src, &tgt, "aabbbcd", &defs, &IdentityVars).unwrap();
        assert_eq!(direct, "bbbdaac");

        let lens = dnf_lens_to_lens(&dl, &src, &tgt, &defs, &IdentityVars).unwrap();
        // The fallback really was taken: the compiled lens composes stages.
        assert!(matches!(lens, Lens::Compose(..)));
        typecheck_lens(&lens, &defs).unwrap();
        let ev = Evaluator::new(&lens, &defs).unwrap();
        assert_eq!(ev.get("aabbbcd").unwrap(), "bbbdaac");
        assert_eq!(ev.put("bbbdaac").unwrap(), "aabbbcd");
        for s in ["", "abcd", "dddd", "bc"] {
            let s: String = s.chars().collect();
            assert_eq!(
                ev.get(&s).ok(),
                dnf_lens_get(&dl, &src, &tgt, &s, &defs, &IdentityVars)
            );
        }
    }

    #[test]
    fn separable_permutation_compiles_without_composition() {
        // Slots read source atoms 2, 0, 1 — separable.
        let defs = Definitions::new();
        let star = |c: &str| Atom::Star(DnfRegex::of_str(c));
        let src = DnfRegex {
            seqs: vec![Sequence::new(
                vec!["".into(), "-".into(), "-".into(), "".into()],
                vec![star("a"), star("b"), star("c")],
            )],
        };
        let tgt = DnfRegex {
            seqs: vec![Sequence::new(
                vec!["".into(), "+".into(), "+".into(), "".into()],
                vec![star("c"), star("a"), star("b")],
            )],
        };
        let atom_lens = |piece: &str| {
            AtomLens::Iterate(DnfLens {
                seq_lenses: vec![SequenceLens {
                    string_pairs: vec![(piece.to_string(), piece.to_string())],
                    atom_lenses: vec![],
                    perm: Perm::identity(0),
                }],
                perm: Perm::identity(1),
            })
        };
        let dl = DnfLens {
            seq_lenses: vec![SequenceLens {
                string_pairs: vec![
                    ("".into(), "".into()),
                    ("-".into(), "+".into()),
                    ("-".into(), "+".into()),
                    ("".into(), "".into()),
                ],
                atom_lenses: vec![atom_lens("a"), atom_lens("b"), atom_lens("c")],
                perm: Perm::new(vec![2, 0, 1]),
            }],
            perm: Perm::identity(1),
        };
        typecheck_dnf_lens(&dl, &src, &tgt, &defs, &IdentityVars).unwrap();
        let lens = dnf_lens_to_lens(&dl, &src, &tgt, &defs, &IdentityVars).unwrap();
        fn has_compose(l: &Lens) -> bool {
            match l {
                Lens::Compose(..) => true,
                Lens::Concat(a, b) | Lens::Swap(a, b) | Lens::Or(a, b) => {
                    has_compose(a) || has_compose(b)
                }
                Lens::Iterate(a) => has_compose(a),
                _ => false,
            }
        }
        assert!(!has_compose(&lens));
        typecheck_lens(&lens, &defs).unwrap();
        let ev = Evaluator::new(&lens, &defs).unwrap();
        assert_eq!(ev.get("aa-b-ccc").unwrap(), "ccc+aa+b");
        assert_eq!(ev.put("ccc+aa+b").unwrap(), "aa-b-ccc");
        assert_eq!(
            dnf_lens_get(&dl, &src, &tgt, "aa-b-ccc", &defs, &IdentityVars).unwrap(),
            "ccc+aa+b"
        );
    }

    #[test]
    fn dead_sequences_are_dropped() {
        let mut defs = Definitions::new();
        defs.define("dead", Regex::Empty).unwrap();
        let live = DnfRegex::of_str("a");
        let d = crate::dnf::dnf_or(&atom_to_dnf(Atom::Var("dead".into())), &live);
        let dl = identity_dnf_lens(&d);
        typecheck_dnf_lens(&dl, &d, &d, &defs, &IdentityVars).unwrap();
        let lens = dnf_lens_to_lens(&dl, &d, &d, &defs, &IdentityVars).unwrap();
        typecheck_lens(&lens, &defs).unwrap();
        assert_eq!(lens_get(&lens, &defs, "a").unwrap(), "a");

        let all_dead = atom_to_dnf(Atom::Var("dead".into()));
        let lens = dnf_lens_to_lens(
            &identity_dnf_lens(&all_dead),
            &all_dead,
            &all_dead,
            &defs,
            &IdentityVars,
        )
        .unwrap();
        assert_eq!(lens, Lens::Identity(Regex::Empty));
    }

    #[test]
    fn simplify_merges_and_drops_literal_maps() {
        let defs = Definitions::new();
        let l = Lens::concat(
            Lens::concat(Lens::constant("a", "x"), Lens::constant("", "")),
            Lens::constant("b", "y"),
        );
        assert_eq!(simplify_lens(&l, &defs), Lens::constant("ab", "xy"));
    }

    #[test]
    fn simplify_factors_shared_alternative_parts() {
        let defs = Definitions::new();
        let l = Lens::or(
            Lens::concat(Lens::constant("a", "a"), Lens::constant("b", "x")),
            Lens::concat(Lens::constant("a", "a"), Lens::constant("c", "y")),
        );
        let got = simplify_lens(&l, &defs);
        assert_eq!(
            got,
            Lens::concat(
                Lens::Identity(Regex::lit("a")),
                Lens::or(Lens::constant("b", "x"), Lens::constant("c", "y")),
            )
        );
    }

    #[test]
    fn simplify_collapses_identity_behavior() {
        let defs = Definitions::new();
        let l = Lens::or(Lens::constant("a", "a"), Lens::constant("bc", "bc"));
        assert_eq!(
            simplify_lens(&l, &defs),
            Lens::Identity(Regex::or(Regex::lit("a"), Regex::lit("bc")))
        );
        // A value-changing lens of identical formats must survive.
        let twist = Lens::or(Lens::constant("a", "b"), Lens::constant("b", "a"));
        assert_eq!(simplify_lens(&twist, &defs), twist);
    }

    #[test]
    fn simplify_tidies_identity_formats() {
        let defs = Definitions::new();
        let messy = Regex::concat(
            Regex::lit(""),
            Regex::or(Regex::Empty, Regex::concat(Regex::lit("a"), Regex::lit("b"))),
        );
        let l = Lens::Identity(messy);
        assert_eq!(simplify_lens(&l, &defs), Lens::Identity(Regex::lit("ab")));
    }

    #[test]
    fn simplify_preserves_semantics_and_is_idempotent() {
        let defs = Definitions::new();
        let mut rng = ChaCha8Rng::seed_from_u64(41);
        for _ in 0..25 {
            let l = sampling::random_well_typed_lens(&mut rng, 3, &['a', 'b']);
            let s = simplify_lens(&l, &defs);
            assert_eq!(simplify_lens(&s, &defs), s, "not idempotent on {l}");
            typecheck_lens(&s, &defs).unwrap_or_else(|e| panic!("simplified {l} ill-typed: {e}"));
            let ty = typecheck_lens(&l, &defs).unwrap();
            let src = defs.resolve(&ty.src).unwrap();
            if language_empty(&src, &defs) {
                continue;
            }
            let ev_before = Evaluator::new(&l, &defs).unwrap();
            let ev_after = Evaluator::new(&s, &defs).unwrap();
            for _ in 0..8 {
                let input = sampling::sample_member(&mut rng, &src, 3);
                assert_eq!(
                    ev_before.get(&input).unwrap(),
                    ev_after.get(&input).unwrap(),
                    "meaning changed: {l} vs {s} on {input:?}"
                );
            }
        }
        let _ = rng.gen::<u8>();
    }

    #[test]
    fn dnf_and_compiled_routes_agree_on_random_identities() {
        let defs = title_defs();
        let mut rng = ChaCha8Rng::seed_from_u64(57);
        for _ in 0..30 {
            let r = sampling::random_strongly_unambiguous(&mut rng, 3, &['a', 'b'], 500);
            let d = to_dnf(&r);
            let dl = identity_dnf_lens(&d);
            if typecheck_dnf_lens(&dl, &d, &d, &defs, &IdentityVars).is_err() {
                // Strong unambiguity of the tree form does not promise
                // sequence-level unambiguity of the distributed form.
                continue;
            }
            let lens = dnf_lens_to_lens(&dl, &d, &d, &defs, &IdentityVars).unwrap();
            typecheck_lens(&lens, &defs).unwrap();
            let resolved = defs.resolve(&r).unwrap();
            if language_empty(&resolved, &defs) {
                continue;
            }
            let ev = Evaluator::new(&lens, &defs).unwrap();
            for _ in 0..5 {
                let s = sampling::sample_member(&mut rng, &resolved, 3);
                let via_dnf = dnf_lens_get(&dl, &d, &d, &s, &defs, &IdentityVars);
                assert_eq!(via_dnf.as_deref(), Some(s.as_str()));
                assert_eq!(ev.get(&s).unwrap(), s);
            }
        }
    }

    #[test]
    fn eval_handles_nested_stars_and_multiple_sequences() {
        let defs = title_defs();
        // ("x" text_char* ";")* | "none"
        let r = Regex::or(
            Regex::star(Regex::concat(
                Regex::lit("x"),
                Regex::concat(Regex::star(Regex::var("text_char")), Regex::lit(";")),
            )),
            Regex::lit("none"),
        );
        let d = to_dnf(&r);
        let dl = identity_dnf_lens(&d);
        typecheck_dnf_lens(&dl, &d, &d, &defs, &IdentityVars).unwrap();
        for s in ["", "xab;x;", "none", "xa;xb;xab;"] {
            assert_eq!(
                dnf_lens_get(&dl, &d, &d, s, &defs, &IdentityVars).as_deref(),
                Some(s)
            );
            assert_eq!(
                dnf_lens_put(&dl, &d, &d, s, &defs, &IdentityVars).as_deref(),
                Some(s)
            );
        }
        assert_eq!(dnf_lens_get(&dl, &d, &d, "x", &defs, &IdentityVars), None);
    }

    #[test]
    fn concat_product_lens_evaluates() {
        // Source ⟨"l" X | "r" Y⟩ against itself, using ⊙ to build shapes.
        let mut defs = Definitions::new();
        defs.define("X", Regex::lit("a")).unwrap();
        defs.define("Y", Regex::lit("b")).unwrap();
        let d = dnf_concat(
            &crate::dnf::dnf_or(
                &dnf_concat(&DnfRegex::of_str("l"), &atom_to_dnf(Atom::Var("X".into()))),
                &dnf_concat(&DnfRegex::of_str("r"), &atom_to_dnf(Atom::Var("Y".into()))),
            ),
            &DnfRegex::of_str("!"),
        );
        let dl = identity_dnf_lens(&d);
        typecheck_dnf_lens(&dl, &d, &d, &defs, &IdentityVars).unwrap();
        for s in ["la!", "rb!"] {
            assert_eq!(
                dnf_lens_get(&dl, &d, &d, s, &defs, &IdentityVars).as_deref(),
                Some(s)
            );
        }
    }
}
