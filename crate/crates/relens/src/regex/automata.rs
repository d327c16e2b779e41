//! Byte-alphabet automata backing the regex decision procedures.
//!
//! Expressions compile to epsilon-NFAs (Thompson construction) and on to
//! DFAs by subset construction. Only bytes that actually occur in literals
//! are tracked: a byte outside both operands' literals can never appear in
//! an accepted string, so restricting the alphabet preserves every
//! language-level question asked here.
//!
//! Concatenation unambiguity is decided on quotient languages: `L1·L2` is
//! ambiguous iff some nonempty `v` both extends a member of `L1` to a member
//! of `L1` (`∃u: u ∈ L1, uv ∈ L1`) and starts a member of `L2` whose
//! remainder is itself a member of `L2` (`∃w: w ∈ L2, vw ∈ L2`); the two
//! candidate splits are then `u·(vw)` and `(uv)·w`.

use std::cell::RefCell;
use std::collections::{HashMap, HashSet, VecDeque};
use std::rc::Rc;

use super::Regex;

/// A memo table whose footprint is tracked in regex nodes retained as keys.
/// When the budget is exceeded the table is dropped wholesale — crude, but
/// it bounds memory without bookkeeping on the hot path, and the common
/// workloads never come close to the limit.
struct Memo<K, V> {
    map: HashMap<K, V>,
    key_nodes: usize,
    budget: usize,
}

impl<K: std::hash::Hash + Eq, V> Memo<K, V> {
    fn new(budget: usize) -> Memo<K, V> {
        Memo {
            map: HashMap::new(),
            key_nodes: 0,
            budget,
        }
    }

    fn insert(&mut self, key: K, weight: usize, value: V) {
        if self.key_nodes + weight > self.budget {
            self.map.clear();
            self.key_nodes = 0;
        }
        if self.map.insert(key, value).is_none() {
            self.key_nodes += weight;
        }
    }
}

thread_local! {
    /// Subset construction dominates every language question asked here, and
    /// the callers ask about the same few expressions over and over (each
    /// union branch is compared against many partners, each star body
    /// re-checked along every recursion path). Memoizing compiled automata
    /// per thread collapses that repetition.
    static DFA_MEMO: RefCell<Memo<(Regex, Vec<u8>), Rc<Dfa>>> =
        RefCell::new(Memo::new(1 << 21));

    /// Results of the boolean predicates below, likewise per thread: the
    /// same operand pairs recur once normal forms carry duplicated subterms.
    static PRED_MEMO: RefCell<Memo<(u8, Regex, Regex), bool>> =
        RefCell::new(Memo::new(1 << 21));
}

fn compile_cached(r: &Regex, alphabet: &[u8]) -> Rc<Dfa> {
    DFA_MEMO.with(|memo| {
        let key = (r.clone(), alphabet.to_vec());
        if let Some(d) = memo.borrow().map.get(&key) {
            return Rc::clone(d);
        }
        let d = Rc::new(Dfa::compile(r, alphabet));
        let weight = r.size() + alphabet.len();
        memo.borrow_mut().insert(key, weight, Rc::clone(&d));
        d
    })
}

fn pred_cached(tag: u8, r1: &Regex, r2: &Regex, compute: impl FnOnce() -> bool) -> bool {
    let key = (tag, r1.clone(), r2.clone());
    if let Some(v) = PRED_MEMO.with(|m| m.borrow().map.get(&key).copied()) {
        return v;
    }
    let v = compute();
    let weight = r1.size() + r2.size();
    PRED_MEMO.with(|m| m.borrow_mut().insert(key, weight, v));
    v
}

/// Epsilon-NFA with a single start and a single accept state.
struct Nfa {
    eps: Vec<Vec<usize>>,
    trans: Vec<Vec<(u8, usize)>>,
    start: usize,
    accept: usize,
}

impl Nfa {
    fn compile(r: &Regex) -> Nfa {
        let mut nfa = Nfa {
            eps: Vec::new(),
            trans: Vec::new(),
            start: 0,
            accept: 0,
        };
        let (s, a) = nfa.build(r);
        nfa.start = s;
        nfa.accept = a;
        nfa
    }

    fn fresh(&mut self) -> usize {
        self.eps.push(Vec::new());
        self.trans.push(Vec::new());
        self.eps.len() - 1
    }

    fn build(&mut self, r: &Regex) -> (usize, usize) {
        match r {
            Regex::Str(s) => {
                let start = self.fresh();
                let mut cur = start;
                for b in s.bytes() {
                    let next = self.fresh();
                    self.trans[cur].push((b, next));
                    cur = next;
                }
                (start, cur)
            }
            Regex::Empty => {
                let start = self.fresh();
                let accept = self.fresh();
                (start, accept)
            }
            Regex::Var(x) => panic!("automaton construction on unresolved name `{x}`"),
            Regex::Concat(a, b) => {
                let (s1, a1) = self.build(a);
                let (s2, a2) = self.build(b);
                self.eps[a1].push(s2);
                (s1, a2)
            }
            Regex::Or(a, b) => {
                let start = self.fresh();
                let accept = self.fresh();
                let (s1, a1) = self.build(a);
                let (s2, a2) = self.build(b);
                self.eps[start].push(s1);
                self.eps[start].push(s2);
                self.eps[a1].push(accept);
                self.eps[a2].push(accept);
                (start, accept)
            }
            Regex::Star(inner) => {
                let start = self.fresh();
                let accept = self.fresh();
                let (s1, a1) = self.build(inner);
                self.eps[start].push(s1);
                self.eps[start].push(accept);
                self.eps[a1].push(s1);
                self.eps[a1].push(accept);
                (start, accept)
            }
        }
    }

    fn closure(&self, set: &mut Vec<usize>) {
        let mut seen: HashSet<usize> = set.iter().copied().collect();
        let mut stack: Vec<usize> = set.clone();
        while let Some(q) = stack.pop() {
            for &n in &self.eps[q] {
                if seen.insert(n) {
                    set.push(n);
                    stack.push(n);
                }
            }
        }
        set.sort_unstable();
    }
}

/// Deterministic automaton over an explicit byte alphabet. Transitions are
/// total; missing moves go to an implicit dead state encoded as `usize::MAX`.
pub struct Dfa {
    alphabet: Vec<u8>,
    /// `trans[q][k]`: successor of state `q` on `alphabet[k]`.
    trans: Vec<Vec<usize>>,
    accept: Vec<bool>,
    start: usize,
    /// States from which some accepting state is reachable.
    live: Vec<bool>,
}

pub const DEAD: usize = usize::MAX;

impl Dfa {
    /// Subset-construct a DFA for `r` (which must be name-free) over the
    /// given alphabet. Bytes outside the alphabet are rejected implicitly.
    pub fn compile(r: &Regex, alphabet: &[u8]) -> Dfa {
        let nfa = Nfa::compile(r);
        let mut start_set = vec![nfa.start];
        nfa.closure(&mut start_set);

        let mut index: HashMap<Vec<usize>, usize> = HashMap::new();
        let mut sets: Vec<Vec<usize>> = Vec::new();
        let mut trans: Vec<Vec<usize>> = Vec::new();
        let mut accept: Vec<bool> = Vec::new();

        index.insert(start_set.clone(), 0);
        sets.push(start_set);
        let mut work = VecDeque::from([0usize]);
        while let Some(q) = work.pop_front() {
            let set = sets[q].clone();
            accept.resize(sets.len(), false);
            accept[q] = set.contains(&nfa.accept);
            let mut row = Vec::with_capacity(alphabet.len());
            for &b in alphabet {
                let mut next: Vec<usize> = Vec::new();
                for &s in &set {
                    for &(tb, t) in &nfa.trans[s] {
                        if tb == b {
                            next.push(t);
                        }
                    }
                }
                if next.is_empty() {
                    row.push(DEAD);
                    continue;
                }
                next.sort_unstable();
                next.dedup();
                nfa.closure(&mut next);
                let id = *index.entry(next.clone()).or_insert_with(|| {
                    sets.push(next);
                    work.push_back(sets.len() - 1);
                    sets.len() - 1
                });
                row.push(id);
            }
            if trans.len() <= q {
                trans.resize(q + 1, Vec::new());
            }
            trans[q] = row;
        }
        accept.resize(sets.len(), false);
        for (q, set) in sets.iter().enumerate() {
            accept[q] = set.contains(&nfa.accept);
        }

        let live = compute_live(&trans, &accept);
        Dfa {
            alphabet: alphabet.to_vec(),
            trans,
            accept,
            start: 0,
            live,
        }
    }

    pub fn accepts(&self, s: &[u8]) -> bool {
        let mut q = self.start;
        for &b in s {
            let Some(k) = self.alphabet.iter().position(|&a| a == b) else {
                return false;
            };
            q = self.trans[q][k];
            if q == DEAD {
                return false;
            }
        }
        self.accept[q]
    }

    /// Like [`Dfa::enumerate`], but gives up (returning `None`) as soon as
    /// more than `max_count` strings have been found.
    pub fn enumerate_capped(&self, max_len: usize, max_count: usize) -> Option<Vec<String>> {
        let mut out = Vec::new();
        if !self.live[self.start] {
            return Some(out);
        }
        let mut frontier: Vec<(usize, String)> = vec![(self.start, String::new())];
        if self.accept[self.start] {
            out.push(String::new());
        }
        for _ in 0..max_len {
            let mut next = Vec::new();
            for (q, s) in &frontier {
                for (k, &b) in self.alphabet.iter().enumerate() {
                    let t = self.trans[*q][k];
                    if t == DEAD || !self.live[t] {
                        continue;
                    }
                    let mut s2 = s.clone();
                    s2.push(b as char);
                    if self.accept[t] {
                        if out.len() >= max_count {
                            return None;
                        }
                        out.push(s2.clone());
                    }
                    next.push((t, s2));
                }
            }
            if next.is_empty() {
                break;
            }
            frontier = next;
        }
        Some(out)
    }

    /// All accepted strings of length at most `max_len`, shortest first,
    /// lexicographic within a length.
    pub fn enumerate(&self, max_len: usize) -> Vec<String> {
        let mut out = Vec::new();
        if !self.live[self.start] {
            return out;
        }
        let mut frontier: Vec<(usize, String)> = vec![(self.start, String::new())];
        if self.accept[self.start] {
            out.push(String::new());
        }
        for _ in 0..max_len {
            let mut next = Vec::new();
            for (q, s) in &frontier {
                for (k, &b) in self.alphabet.iter().enumerate() {
                    let t = self.trans[*q][k];
                    if t == DEAD || !self.live[t] {
                        continue;
                    }
                    let mut s2 = s.clone();
                    s2.push(b as char);
                    if self.accept[t] {
                        out.push(s2.clone());
                    }
                    next.push((t, s2));
                }
            }
            if next.is_empty() {
                break;
            }
            frontier = next;
        }
        out
    }

    fn accepting_states(&self) -> Vec<usize> {
        (0..self.accept.len()).filter(|&q| self.accept[q]).collect()
    }

    /// `result[i]` ⇔ `s[..i]` is accepted. One forward pass.
    pub fn prefix_acceptance(&self, s: &[u8]) -> Vec<bool> {
        let mut out = Vec::with_capacity(s.len() + 1);
        let mut q = self.start;
        out.push(self.accept[q]);
        for &b in s {
            if q != DEAD {
                q = match self.alphabet.iter().position(|&a| a == b) {
                    Some(k) => self.trans[q][k],
                    None => DEAD,
                };
            }
            out.push(q != DEAD && self.accept[q]);
        }
        out
    }

    /// `result[j]` ⇔ `s[j..]` is accepted. One backward pass tracking, for
    /// every state, whether the remaining suffix leads it to acceptance.
    pub fn suffix_acceptance(&self, s: &[u8]) -> Vec<bool> {
        let n = self.accept.len();
        let mut ok = self.accept.clone();
        let mut out = vec![false; s.len() + 1];
        out[s.len()] = ok[self.start];
        for j in (0..s.len()).rev() {
            let b = s[j];
            let next = match self.alphabet.iter().position(|&a| a == b) {
                Some(k) => {
                    let mut next = vec![false; n];
                    for (q, slot) in next.iter_mut().enumerate() {
                        let t = self.trans[q][k];
                        *slot = t != DEAD && ok[t];
                    }
                    next
                }
                None => vec![false; n],
            };
            ok = next;
            out[j] = ok[self.start];
        }
        out
    }
}

fn compute_live(trans: &[Vec<usize>], accept: &[bool]) -> Vec<bool> {
    let n = accept.len();
    let mut rev: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (q, row) in trans.iter().enumerate() {
        for &t in row {
            if t != DEAD {
                rev[t].push(q);
            }
        }
    }
    let mut live = vec![false; n];
    let mut work: VecDeque<usize> = VecDeque::new();
    for q in 0..n {
        if accept[q] {
            live[q] = true;
            work.push_back(q);
        }
    }
    while let Some(q) = work.pop_front() {
        for &p in &rev[q] {
            if !live[p] {
                live[p] = true;
                work.push_back(p);
            }
        }
    }
    live
}

fn union_alphabet(r1: &Regex, r2: &Regex) -> Vec<u8> {
    let mut bytes = r1.literal_bytes();
    bytes.extend(r2.literal_bytes());
    bytes.into_iter().collect()
}

pub fn language_empty(r: &Regex) -> bool {
    let alphabet: Vec<u8> = r.literal_bytes().into_iter().collect();
    let dfa = compile_cached(r, &alphabet);
    !dfa.live[dfa.start]
}

pub fn accepts_empty_string(r: &Regex) -> bool {
    let alphabet: Vec<u8> = r.literal_bytes().into_iter().collect();
    compile_cached(r, &alphabet).accepts(b"")
}

/// Explore the product of two DFAs over a shared alphabet, returning every
/// reachable pair. The dead state participates (as `DEAD`) so the product
/// also covers strings one side rejects.
fn product_states(d1: &Dfa, d2: &Dfa) -> Vec<(usize, usize)> {
    let mut seen: HashSet<(usize, usize)> = HashSet::new();
    let mut work = VecDeque::from([(d1.start, d2.start)]);
    seen.insert((d1.start, d2.start));
    let width = d1.alphabet.len();
    while let Some((p, q)) = work.pop_front() {
        for k in 0..width {
            let p2 = if p == DEAD { DEAD } else { d1.trans[p][k] };
            let q2 = if q == DEAD { DEAD } else { d2.trans[q][k] };
            if p2 == DEAD && q2 == DEAD {
                continue;
            }
            if seen.insert((p2, q2)) {
                work.push_back((p2, q2));
            }
        }
    }
    seen.into_iter().collect()
}

pub fn languages_disjoint(r1: &Regex, r2: &Regex) -> bool {
    pred_cached(0, r1, r2, || {
        let alphabet = union_alphabet(r1, r2);
        let d1 = compile_cached(r1, &alphabet);
        let d2 = compile_cached(r2, &alphabet);
        !product_states(&d1, &d2)
            .into_iter()
            .any(|(p, q)| p != DEAD && q != DEAD && d1.accept[p] && d2.accept[q])
    })
}

pub fn lang_equiv(r1: &Regex, r2: &Regex) -> bool {
    pred_cached(1, r1, r2, || {
        let alphabet = union_alphabet(r1, r2);
        let d1 = compile_cached(r1, &alphabet);
        let d2 = compile_cached(r2, &alphabet);
        product_states(&d1, &d2).into_iter().all(|(p, q)| {
            let a1 = p != DEAD && d1.accept[p];
            let a2 = q != DEAD && d2.accept[q];
            a1 == a2
        })
    })
}

/// Decide unambiguous concatenability of `L(r1)·L(r2)`.
pub fn unambig_concat(r1: &Regex, r2: &Regex) -> bool {
    pred_cached(2, r1, r2, || unambig_concat_uncached(r1, r2))
}

fn unambig_concat_uncached(r1: &Regex, r2: &Regex) -> bool {
    let alphabet = union_alphabet(r1, r2);
    let d1 = compile_cached(r1, &alphabet);
    let d2 = compile_cached(r2, &alphabet);

    // Language A = { v | ∃u: u ∈ L1, uv ∈ L1 }: run d1 starting from the
    // set of its (reachable) accepting states.
    let init: Vec<usize> = d1.accepting_states();
    if init.is_empty() {
        return true; // L1 empty: nothing to split.
    }

    // Language B = { v | ∃w: w ∈ L2, vw ∈ L2 } = strings leading d2 from its
    // start to a state q such that (q, start) can reach an accepting pair in
    // the product of d2 with itself.
    let valid = valid_midpoints(&d2);

    // Search the product of (determinized A-automaton) × d2 for an accepting
    // pair reached by at least one byte.
    let width = alphabet.len();
    let step = |set: &Vec<usize>, k: usize| -> Vec<usize> {
        let mut next: Vec<usize> = set
            .iter()
            .filter_map(|&q| {
                let t = d1.trans[q][k];
                (t != DEAD).then_some(t)
            })
            .collect();
        next.sort_unstable();
        next.dedup();
        next
    };

    let mut seen: HashSet<(Vec<usize>, usize)> = HashSet::new();
    let mut work: VecDeque<(Vec<usize>, usize)> = VecDeque::new();
    // Seed with all one-byte successors so acceptance below always witnesses
    // a nonempty v.
    for k in 0..width {
        let s2 = step(&init, k);
        let q2 = d2.trans[d2.start][k];
        if s2.is_empty() || q2 == DEAD {
            continue;
        }
        if seen.insert((s2.clone(), q2)) {
            work.push_back((s2, q2));
        }
    }
    while let Some((set, q)) = work.pop_front() {
        if set.iter().any(|&s| d1.accept[s]) && valid[q] {
            return false; // found nonempty v ∈ A ∩ B: ambiguous
        }
        for k in 0..width {
            let s2 = step(&set, k);
            let q2 = if q == DEAD { DEAD } else { d2.trans[q][k] };
            if s2.is_empty() || q2 == DEAD {
                continue;
            }
            if seen.insert((s2.clone(), q2)) {
                work.push_back((s2, q2));
            }
        }
    }
    true
}

/// States `q` of `d` such that some `w` is accepted both from `q` and from
/// the start state — i.e. `(q, start)` reaches an accepting pair in `d × d`.
fn valid_midpoints(d: &Dfa) -> Vec<bool> {
    let n = d.accept.len();
    let width = d.alphabet.len();
    // Backward reachability to accept×accept over the full product.
    let idx = |p: usize, q: usize| p * n + q;
    let mut rev: Vec<Vec<usize>> = vec![Vec::new(); n * n];
    for p in 0..n {
        for q in 0..n {
            for k in 0..width {
                let p2 = d.trans[p][k];
                let q2 = d.trans[q][k];
                if p2 != DEAD && q2 != DEAD {
                    rev[idx(p2, q2)].push(idx(p, q));
                }
            }
        }
    }
    let mut co = vec![false; n * n];
    let mut work = VecDeque::new();
    for p in 0..n {
        for q in 0..n {
            if d.accept[p] && d.accept[q] {
                co[idx(p, q)] = true;
                work.push_back(idx(p, q));
            }
        }
    }
    while let Some(s) = work.pop_front() {
        for &pr in &rev[s] {
            if !co[pr] {
                co[pr] = true;
                work.push_back(pr);
            }
        }
    }
    (0..n).map(|q| co[idx(q, d.start)]).collect()
}
