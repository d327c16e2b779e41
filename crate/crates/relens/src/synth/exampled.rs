//! Normal forms with example fragments attached.
//!
//! Each example string is parsed against the normal form; the fragment
//! landing on each atom is recorded under an *iteration label*: the
//! top-level example `i` (1-based) has label `[i]`, and the `k`-th piece
//! (1-based) of a starred atom's content prepends `k` to its enclosing
//! label. Labels therefore read innermost-first.
//!
//! Alignment never looks at literal slots: two exampled forms correspond
//! exactly when their [`keys`](DnfKey) — atoms sorted into a canonical
//! order, with name content translated to each class representative, plus
//! the label sets at every level — are equal.

use std::collections::BTreeMap;

use crate::dnf::{sequence_to_regex, to_regex, Atom, DnfRegex};
use crate::dnf_lens::{split_sequence, DfaCache};
use crate::lens::factorize;
use crate::regex::Definitions;
use crate::synth::library::LensLibrary;

/// An iteration label; see the module docs for the numbering.
pub type IntList = Vec<usize>;

/// A set of labels. The derived order — lexicographic over sorted
/// elements — is exactly the order alignment needs.
pub type IlSet = std::collections::BTreeSet<IntList>;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ExAtom {
    Star { body: ExDnf },
    Var { name: String, sils: BTreeMap<IntList, String> },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExSeq {
    pub strings: Vec<String>,
    pub atoms: Vec<ExAtom>,
    pub ils: IlSet,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExDnf {
    pub seqs: Vec<ExSeq>,
    pub ils: IlSet,
}

/// Parse one side's example strings (label `[i+1]` for position `i`)
/// against the form. `None` when some example is not a member.
pub fn embed_examples(
    d: &DnfRegex,
    examples: &[&str],
    defs: &Definitions,
) -> Option<ExDnf> {
    let cache = DfaCache::new(defs);
    let labeled: Vec<(IntList, &[u8])> = examples
        .iter()
        .enumerate()
        .map(|(i, s)| (vec![i + 1], s.as_bytes()))
        .collect();
    embed_dnf(d, &labeled, &cache)
}

fn embed_dnf(d: &DnfRegex, items: &[(IntList, &[u8])], cache: &DfaCache) -> Option<ExDnf> {
    let mut per_seq: Vec<Vec<(IntList, &[u8])>> = vec![Vec::new(); d.seqs.len()];
    'items: for (il, s) in items {
        for (i, sq) in d.seqs.iter().enumerate() {
            if cache.dfa(&sequence_to_regex(sq))?.accepts(s) {
                per_seq[i].push((il.clone(), s));
                continue 'items;
            }
        }
        return None;
    }

    let mut seqs = Vec::with_capacity(d.seqs.len());
    let mut all_ils = IlSet::new();
    for (sq, owned) in d.seqs.iter().zip(per_seq) {
        let n = sq.arity();
        let mut var_sils: Vec<BTreeMap<IntList, String>> = vec![BTreeMap::new(); n];
        let mut star_items: Vec<Vec<(IntList, &[u8])>> = vec![Vec::new(); n];
        let mut ils = IlSet::new();
        for (il, s) in owned {
            let spans = split_sequence(sq, s, cache)?;
            for (k, atom) in sq.atoms.iter().enumerate() {
                let content = &s[spans[k].0..spans[k].1];
                match atom {
                    Atom::Var(_) => {
                        let text = std::str::from_utf8(content).ok()?.to_string();
                        var_sils[k].insert(il.clone(), text);
                    }
                    Atom::Star(body) => {
                        let dfa = cache.dfa(&to_regex(body))?;
                        for (piece_no, (a, b)) in
                            factorize(&dfa, content)?.into_iter().enumerate()
                        {
                            let mut label = vec![piece_no + 1];
                            label.extend_from_slice(&il);
                            star_items[k].push((label, &content[a..b]));
                        }
                    }
                }
            }
            ils.insert(il);
        }
        let mut atoms = Vec::with_capacity(n);
        for (k, atom) in sq.atoms.iter().enumerate() {
            atoms.push(match atom {
                Atom::Var(name) => ExAtom::Var {
                    name: name.clone(),
                    sils: std::mem::take(&mut var_sils[k]),
                },
                Atom::Star(body) => ExAtom::Star {
                    body: embed_dnf(body, &star_items[k], cache)?,
                },
            });
        }
        all_ils.extend(ils.iter().cloned());
        seqs.push(ExSeq {
            strings: sq.strings.clone(),
            atoms,
            ils,
        });
    }
    Some(ExDnf {
        seqs,
        ils: all_ils,
    })
}

/// Comparable shape of an exampled atom. `Var` orders before `Star`; name
/// atoms compare by class representative and representative-translated
/// fragments, so corresponding names with matching content coincide.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub enum AtomKey {
    Var(String, BTreeMap<IntList, String>),
    Star(DnfKey),
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct SeqKey {
    /// Atom keys in sorted order — literal slots and atom positions do
    /// not participate in alignment.
    pub atoms: Vec<AtomKey>,
    pub ils: IlSet,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct DnfKey {
    /// Sequence keys in sorted order.
    pub seqs: Vec<SeqKey>,
    pub ils: IlSet,
}

pub fn atom_key(a: &ExAtom, lib: &LensLibrary, defs: &Definitions) -> AtomKey {
    match a {
        ExAtom::Var { name, sils } => AtomKey::Var(
            lib.canonical(name).to_string(),
            sils.iter()
                .map(|(il, s)| (il.clone(), lib.canonical_content(name, s, defs)))
                .collect(),
        ),
        ExAtom::Star { body } => AtomKey::Star(dnf_key(body, lib, defs)),
    }
}

pub fn seq_key(sq: &ExSeq, lib: &LensLibrary, defs: &Definitions) -> SeqKey {
    let mut atoms: Vec<AtomKey> = sq.atoms.iter().map(|a| atom_key(a, lib, defs)).collect();
    atoms.sort();
    SeqKey {
        atoms,
        ils: sq.ils.clone(),
    }
}

pub fn dnf_key(d: &ExDnf, lib: &LensLibrary, defs: &Definitions) -> DnfKey {
    let mut seqs: Vec<SeqKey> = d.seqs.iter().map(|sq| seq_key(sq, lib, defs)).collect();
    seqs.sort();
    DnfKey {
        seqs,
        ils: d.ils.clone(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dnf::to_dnf;
    use crate::regex::Regex;

    fn tc_defs() -> Definitions {
        let mut defs = Definitions::new();
        defs.define("text_char", Regex::or(Regex::lit("a"), Regex::lit("b")))
            .unwrap();
        defs
    }

    #[test]
    fn star_pieces_get_prepended_labels() {
        let defs = tc_defs();
        let d = to_dnf(&Regex::star(Regex::var("text_char")));
        let ex = embed_examples(&d, &["aa", "b"], &defs).unwrap();
        assert_eq!(ex.ils, IlSet::from([vec![1], vec![2]]));
        let ExAtom::Star { body } = &ex.seqs[0].atoms[0] else {
            panic!("expected a star atom");
        };
        // "aa" as example 1 yields pieces [1,1] and [2,1]; "b" as example
        // 2 yields [1,2].
        assert_eq!(
            body.ils,
            IlSet::from([vec![1, 1], vec![2, 1], vec![1, 2]])
        );
        let ExAtom::Var { sils, .. } = &body.seqs[0].atoms[0] else {
            panic!("expected a name atom");
        };
        assert_eq!(sils[&vec![1, 1]], "a");
        assert_eq!(sils[&vec![2, 1]], "a");
        assert_eq!(sils[&vec![1, 2]], "b");
    }

    #[test]
    fn examples_split_across_sequences() {
        let defs = tc_defs();
        let d = to_dnf(&Regex::or(
            Regex::concat(Regex::lit("<"), Regex::lit(">")),
            Regex::concat(Regex::var("text_char"), Regex::lit("!")),
        ));
        let ex = embed_examples(&d, &["a!", "<>", "b!"], &defs).unwrap();
        assert_eq!(ex.seqs[0].ils, IlSet::from([vec![2]]));
        assert_eq!(ex.seqs[1].ils, IlSet::from([vec![1], vec![3]]));
        assert_eq!(embed_examples(&d, &["nope"], &defs), None);
    }

    #[test]
    fn keys_ignore_literals_but_see_content() {
        let defs = tc_defs();
        let lib = LensLibrary::new();
        let d1 = to_dnf(&Regex::concat(Regex::lit("<"), Regex::var("text_char")));
        let d2 = to_dnf(&Regex::concat(Regex::lit("["), Regex::var("text_char")));
        // Same content behind different literals: keys agree.
        let e1 = embed_examples(&d1, &["<a"], &defs).unwrap();
        let e2 = embed_examples(&d2, &["[a"], &defs).unwrap();
        assert_eq!(dnf_key(&e1, &lib, &defs), dnf_key(&e2, &lib, &defs));
        // Different content: keys differ.
        let e3 = embed_examples(&d2, &["[b"], &defs).unwrap();
        assert_ne!(dnf_key(&e1, &lib, &defs), dnf_key(&e3, &lib, &defs));
    }

    #[test]
    fn keys_translate_content_across_registered_names() {
        let mut defs = Definitions::new();
        defs.define("A", Regex::or(Regex::lit("a"), Regex::lit("b")))
            .unwrap();
        defs.define("B", Regex::or(Regex::lit("x"), Regex::lit("y")))
            .unwrap();
        let mut lib = LensLibrary::new();
        lib.register(
            "A",
            "B",
            crate::lens::Lens::or(
                crate::lens::Lens::constant("a", "x"),
                crate::lens::Lens::constant("b", "y"),
            ),
        );
        let da = to_dnf(&Regex::var("A"));
        let db = to_dnf(&Regex::var("B"));
        let ea = embed_examples(&da, &["a"], &defs).unwrap();
        let matching = embed_examples(&db, &["x"], &defs).unwrap();
        let clashing = embed_examples(&db, &["y"], &defs).unwrap();
        assert_eq!(dnf_key(&ea, &lib, &defs), dnf_key(&matching, &lib, &defs));
        assert_ne!(dnf_key(&ea, &lib, &defs), dnf_key(&clashing, &lib, &defs));
    }

    #[test]
    fn var_orders_before_star() {
        let defs = tc_defs();
        let lib = LensLibrary::new();
        let v = atom_key(
            &ExAtom::Var {
                name: "text_char".into(),
                sils: BTreeMap::new(),
            },
            &lib,
            &defs,
        );
        let s = atom_key(
            &ExAtom::Star {
                body: ExDnf {
                    seqs: vec![],
                    ils: IlSet::new(),
                },
            },
            &lib,
            &defs,
        );
        assert!(v < s);
    }
}
