//! Seeded random generators for expressions, strings and lenses.
//!
//! These back the randomized test suites and the benchmark harness. All
//! generators are driven by a caller-supplied RNG so suites can pin seeds.

use rand::prelude::*;

use crate::lens::{typecheck_lens, Lens};
use crate::regex::{self, Definitions, Regex};

/// A random expression of the given depth over single-byte literals drawn
/// from `alphabet`, plus occasionally the empty string, and (rarely) the
/// empty language. Name-free.
pub fn random_regex(rng: &mut impl Rng, depth: usize, alphabet: &[char]) -> Regex {
    let leaf = depth == 0 || rng.gen_bool(0.25);
    if leaf {
        match rng.gen_range(0..10) {
            0 => Regex::lit(""),
            1 => Regex::Empty,
            _ => {
                let len = rng.gen_range(1..=2);
                let s: String = (0..len)
                    .map(|_| *alphabet.choose(rng).expect("nonempty alphabet"))
                    .collect();
                Regex::lit(s)
            }
        }
    } else {
        match rng.gen_range(0..3) {
            0 => Regex::star(random_regex(rng, depth - 1, alphabet)),
            1 => Regex::concat(
                random_regex(rng, depth - 1, alphabet),
                random_regex(rng, depth - 1, alphabet),
            ),
            _ => Regex::or(
                random_regex(rng, depth - 1, alphabet),
                random_regex(rng, depth - 1, alphabet),
            ),
        }
    }
}

/// A random strongly unambiguous, nonempty-language expression. Retries
/// until the filter passes; panics after `tries` failures (callers pin
/// seeds, so a failure would be deterministic).
pub fn random_strongly_unambiguous(
    rng: &mut impl Rng,
    depth: usize,
    alphabet: &[char],
    tries: usize,
) -> Regex {
    let defs = Definitions::new();
    for _ in 0..tries {
        let r = random_regex(rng, depth, alphabet);
        if !regex::language_empty(&r, &defs) && regex::strongly_unambiguous(&r, &defs) {
            return r;
        }
    }
    panic!("no strongly unambiguous expression found in {tries} tries");
}

/// Sample a member of `L(r)`; stars take at most `star_cap` turns. The
/// expression must be name-free and denote a nonempty language.
pub fn sample_member(rng: &mut impl Rng, r: &Regex, star_cap: usize) -> String {
    let defs = Definitions::new();
    match r {
        Regex::Str(s) => s.clone(),
        Regex::Empty => panic!("sampling from the empty language"),
        Regex::Var(x) => panic!("sampling from unresolved name `{x}`"),
        Regex::Concat(a, b) => {
            let mut s = sample_member(rng, a, star_cap);
            s.push_str(&sample_member(rng, b, star_cap));
            s
        }
        Regex::Or(a, b) => {
            let left_ok = !regex::language_empty(a, &defs);
            let right_ok = !regex::language_empty(b, &defs);
            let go_left = match (left_ok, right_ok) {
                (true, true) => rng.gen_bool(0.5),
                (true, false) => true,
                (false, true) => false,
                (false, false) => panic!("sampling from the empty language"),
            };
            if go_left {
                sample_member(rng, a, star_cap)
            } else {
                sample_member(rng, b, star_cap)
            }
        }
        Regex::Star(inner) => {
            if regex::language_empty(inner, &defs) {
                return String::new();
            }
            let n = rng.gen_range(0..=star_cap);
            (0..n).map(|_| sample_member(rng, inner, star_cap)).collect()
        }
    }
}

/// A random well-typed, compose-free lens of at most the given depth over
/// name-free types. Source and target types are strongly unambiguous by
/// construction (every combinator's side conditions are checked during
/// generation).
pub fn random_well_typed_lens(rng: &mut impl Rng, depth: usize, alphabet: &[char]) -> Lens {
    let defs = Definitions::new();
    for _ in 0..2000 {
        let cand = random_lens_candidate(rng, depth, alphabet);
        if typecheck_lens(&cand, &defs).is_ok() {
            return cand;
        }
    }
    panic!("no well-typed lens found");
}

fn random_lens_candidate(rng: &mut impl Rng, depth: usize, alphabet: &[char]) -> Lens {
    let leaf = depth == 0 || rng.gen_bool(0.3);
    if leaf {
        if rng.gen_bool(0.5) {
            let s1 = random_short_string(rng, alphabet);
            let s2 = random_short_string(rng, alphabet);
            Lens::constant(s1, s2)
        } else {
            Lens::Identity(random_strongly_unambiguous(rng, 2, alphabet, 200))
        }
    } else {
        let sub = |rng: &mut _| Box::new(random_lens_candidate(rng, depth - 1, alphabet));
        match rng.gen_range(0..4) {
            0 => Lens::Concat(sub(rng), sub(rng)),
            1 => Lens::Swap(sub(rng), sub(rng)),
            2 => Lens::Or(sub(rng), sub(rng)),
            _ => Lens::Iterate(sub(rng)),
        }
    }
}

fn random_short_string(rng: &mut impl Rng, alphabet: &[char]) -> String {
    let len = rng.gen_range(0..=2);
    (0..len)
        .map(|_| *alphabet.choose(rng).expect("nonempty alphabet"))
        .collect()
}
