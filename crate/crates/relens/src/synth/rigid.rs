//! Alignment of two exampled normal forms of identical shape.
//!
//! Both sides' pieces are sorted by their [keys](crate::synth::exampled);
//! if the sorted lists agree position by position, pairing the `k`-th
//! smallest with the `k`-th smallest yields the permutations and atom
//! pairings of a [`DnfLens`] directly. Key equality carries the example
//! fragments (translated to class representatives), so the resulting lens
//! is consistent with every example by construction. No search happens
//! here — a shape mismatch just means `None`.

use crate::dnf::{Atom, DnfRegex, Sequence};
use crate::dnf_lens::{AtomLens, DnfLens, Perm, SequenceLens, VarLenses};
use crate::regex::Definitions;
use crate::synth::exampled::{atom_key, seq_key, ExAtom, ExDnf, ExSeq};
use crate::synth::library::LensLibrary;

pub fn rigid_synth(
    src: &DnfRegex,
    e_src: &ExDnf,
    tgt: &DnfRegex,
    e_tgt: &ExDnf,
    lib: &LensLibrary,
    defs: &Definitions,
) -> Option<DnfLens> {
    let n = src.seqs.len();
    if tgt.seqs.len() != n || e_src.ils != e_tgt.ils {
        return None;
    }
    let k1: Vec<_> = e_src.seqs.iter().map(|s| seq_key(s, lib, defs)).collect();
    let k2: Vec<_> = e_tgt.seqs.iter().map(|s| seq_key(s, lib, defs)).collect();
    let s1 = Perm::sorting(&k1);
    let s2 = Perm::sorting(&k2);
    let mut seq_lenses: Vec<Option<SequenceLens>> = vec![None; n];
    let mut table = vec![0; n];
    for k in 0..n {
        let si = s1.apply(k);
        let ti = s2.apply(k);
        if k1[si] != k2[ti] {
            return None;
        }
        seq_lenses[si] = Some(rigid_seq(
            &src.seqs[si],
            &e_src.seqs[si],
            &tgt.seqs[ti],
            &e_tgt.seqs[ti],
            lib,
            defs,
        )?);
        table[ti] = si;
    }
    Some(DnfLens {
        seq_lenses: seq_lenses.into_iter().map(Option::unwrap).collect(),
        perm: Perm::new(table),
    })
}

fn rigid_seq(
    sq: &Sequence,
    e_sq: &ExSeq,
    tq: &Sequence,
    e_tq: &ExSeq,
    lib: &LensLibrary,
    defs: &Definitions,
) -> Option<SequenceLens> {
    let n = sq.arity();
    if tq.arity() != n || e_sq.ils != e_tq.ils {
        return None;
    }
    let k1: Vec<_> = e_sq.atoms.iter().map(|a| atom_key(a, lib, defs)).collect();
    let k2: Vec<_> = e_tq.atoms.iter().map(|a| atom_key(a, lib, defs)).collect();
    let s1 = Perm::sorting(&k1);
    let s2 = Perm::sorting(&k2);
    let mut atom_lenses: Vec<Option<AtomLens>> = vec![None; n];
    let mut table = vec![0; n];
    for k in 0..n {
        let sa = s1.apply(k);
        let ta = s2.apply(k);
        if k1[sa] != k2[ta] {
            return None;
        }
        let al = match (&sq.atoms[sa], &tq.atoms[ta]) {
            (Atom::Var(x), Atom::Var(y)) => {
                lib.lens_between(x, y)?;
                AtomLens::Var {
                    src: x.clone(),
                    tgt: y.clone(),
                }
            }
            (Atom::Star(b1), Atom::Star(b2)) => {
                let (ExAtom::Star { body: eb1 }, ExAtom::Star { body: eb2 }) =
                    (&e_sq.atoms[sa], &e_tq.atoms[ta])
                else {
                    return None;
                };
                AtomLens::Iterate(rigid_synth(b1, eb1, b2, eb2, lib, defs)?)
            }
            _ => return None,
        };
        atom_lenses[sa] = Some(al);
        table[ta] = sa;
    }
    Some(SequenceLens {
        string_pairs: (0..=n)
            .map(|k| (sq.strings[k].clone(), tq.strings[k].clone()))
            .collect(),
        atom_lenses: atom_lenses.into_iter().map(Option::unwrap).collect(),
        perm: Perm::new(table),
    })
}
