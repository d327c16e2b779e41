//! Brute-force reference implementations used by the test suites.
//!
//! Everything here works on bounded language enumerations computed directly
//! from the expression structure, deliberately sharing no code with the
//! automata-based decision procedures it cross-checks. Results are exact for
//! properties whose witnesses fit in the length bound.

use std::collections::BTreeSet;

use crate::regex::Regex;

/// All strings of `L(r)` with length at most `max_len`. The expression must
/// be name-free (resolve first).
pub fn lang(r: &Regex, max_len: usize) -> BTreeSet<String> {
    match r {
        Regex::Str(s) => {
            let mut out = BTreeSet::new();
            if s.len() <= max_len {
                out.insert(s.clone());
            }
            out
        }
        Regex::Empty => BTreeSet::new(),
        Regex::Var(x) => panic!("oracle on unresolved name `{x}`"),
        Regex::Or(a, b) => {
            let mut out = lang(a, max_len);
            out.extend(lang(b, max_len));
            out
        }
        Regex::Concat(a, b) => {
            let left = lang(a, max_len);
            let right = lang(b, max_len);
            let mut out = BTreeSet::new();
            for l in &left {
                for r2 in &right {
                    if l.len() + r2.len() <= max_len {
                        out.insert(format!("{l}{r2}"));
                    }
                }
            }
            out
        }
        Regex::Star(inner) => {
            let pieces = lang(inner, max_len);
            let mut out: BTreeSet<String> = BTreeSet::new();
            out.insert(String::new());
            loop {
                let mut grew = false;
                let snapshot: Vec<String> = out.iter().cloned().collect();
                for s in &snapshot {
                    for p in &pieces {
                        if p.is_empty() {
                            continue;
                        }
                        if s.len() + p.len() <= max_len {
                            let cand = format!("{s}{p}");
                            if out.insert(cand) {
                                grew = true;
                            }
                        }
                    }
                }
                if !grew {
                    break;
                }
            }
            out
        }
    }
}

pub fn equiv(r1: &Regex, r2: &Regex, max_len: usize) -> bool {
    lang(r1, max_len) == lang(r2, max_len)
}

pub fn disjoint(r1: &Regex, r2: &Regex, max_len: usize) -> bool {
    lang(r1, max_len).intersection(&lang(r2, max_len)).count() == 0
}

/// Does every string of `L(r1)·L(r2)` (up to the bound) split exactly one
/// way? Counts the splits of each concatenation of enumerated members.
pub fn concat_unambiguous(r1: &Regex, r2: &Regex, max_len: usize) -> bool {
    let left = lang(r1, max_len);
    let right = lang(r2, max_len);
    let mut products: BTreeSet<String> = BTreeSet::new();
    for l in &left {
        for r2s in &right {
            if l.len() + r2s.len() <= max_len {
                products.insert(format!("{l}{r2s}"));
            }
        }
    }
    for s in &products {
        let mut splits = 0;
        for k in 0..=s.len() {
            if left.contains(&s[..k]) && right.contains(&s[k..]) {
                splits += 1;
                if splits > 1 {
                    return false;
                }
            }
        }
    }
    true
}

/// Does every string of `L(r)*` (up to the bound) factor uniquely into
/// members of `L(r)`, including the choice of piece count?
pub fn iter_unambiguous(r: &Regex, max_len: usize) -> bool {
    let pieces = lang(r, max_len);
    if pieces.contains("") {
        // The empty string already factors as zero pieces and as one.
        return false;
    }
    // Enumerate the bounded star language, then count factorizations.
    let star = lang(&Regex::star(r.clone()), max_len);
    for s in &star {
        if count_factorizations(s, &pieces, 2) > 1 {
            return false;
        }
    }
    true
}

fn count_factorizations(s: &str, pieces: &BTreeSet<String>, cap: usize) -> usize {
    if s.is_empty() {
        return 1;
    }
    let mut count = 0;
    for k in 1..=s.len() {
        if pieces.contains(&s[..k]) {
            count += count_factorizations(&s[k..], pieces, cap - count);
            if count >= cap {
                return count;
            }
        }
    }
    count
}
