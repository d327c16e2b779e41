//! Example-guided synthesis of bijective string lenses.
//!
//! Given two formats and input/output example pairs, [`synth_lens`] finds a
//! well-typed lens between them. Both formats are taken to normal form and
//! a best-first search runs over pairs of rewritings, cheapest (fewest
//! rewrite steps) first. At each state the embedded examples are
//! [aligned rigidly](rigid); on a miss the state's successors are its
//! single-step rewrites.
//!
//! Two refinements keep the queue small, and can be switched off to
//! measure their effect:
//!
//! * **forced substitution** — when one side uses a definition (at some
//!   star depth) that the other side can never surface by any rewriting,
//!   that definition is inlined immediately rather than searched over;
//! * **targeted expansion** — when one side's current definitions are a
//!   strict superset of the other's, only the deficient side is rewritten,
//!   and only in ways that keep the missing definition reachable.

pub mod exampled;
pub mod library;
pub mod rigid;

pub use library::LensLibrary;

use std::cmp::Reverse;
use std::collections::{BTreeSet, BinaryHeap, HashSet};
use std::time::{Duration, Instant};

use thiserror::Error;

use crate::dnf::{
    apply_rewrite_at, current_set, dnf_width, enumerate_expansions, substitute_at_depth, to_dnf,
    transitive_set, DnfRegex,
};
use crate::dnf_lens::{dnf_lens_to_lens, typecheck_dnf_lens, DnfLens};
use crate::lens::{lens_get, lens_put, typecheck_lens, Lens};
use crate::regex::{matches, strongly_unambiguous, Definitions, Regex};
use crate::synth::exampled::embed_examples;
use crate::synth::rigid::rigid_synth;

#[derive(Debug, Clone)]
pub struct SynthConfig {
    /// Inline definitions the other side can never surface.
    pub forced_substitution: bool,
    /// Rewrite only the deficient side when one side lacks a definition.
    pub targeted_expansion: bool,
    /// Inline every definition before searching (stars still search).
    pub inline_definitions: bool,
    /// Give up after this many states.
    pub budget_pops: usize,
    /// Give up after this much wall time.
    pub budget: Duration,
}

impl Default for SynthConfig {
    fn default() -> SynthConfig {
        SynthConfig {
            forced_substitution: true,
            targeted_expansion: true,
            inline_definitions: false,
            budget_pops: 1_000_000,
            budget: Duration::from_secs(60),
        }
    }
}

/// Ablation switch names used by the CLI and the benchmark CSV.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    /// Everything on.
    Full,
    /// No targeted expansion.
    NoFpe,
    /// Neither targeted expansion nor forced substitution.
    NoEr,
    /// Definitions inlined up front.
    NoUd,
}

impl Mode {
    pub const ALL: [Mode; 4] = [Mode::Full, Mode::NoFpe, Mode::NoEr, Mode::NoUd];

    pub fn config(self) -> SynthConfig {
        let mut cfg = SynthConfig::default();
        match self {
            Mode::Full => {}
            Mode::NoFpe => cfg.targeted_expansion = false,
            Mode::NoEr => {
                cfg.targeted_expansion = false;
                cfg.forced_substitution = false;
            }
            Mode::NoUd => cfg.inline_definitions = true,
        }
        cfg
    }
}

impl std::fmt::Display for Mode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Mode::Full => "full",
            Mode::NoFpe => "nofpe",
            Mode::NoEr => "noer",
            Mode::NoUd => "noud",
        })
    }
}

impl std::str::FromStr for Mode {
    type Err = String;

    fn from_str(s: &str) -> Result<Mode, String> {
        match s {
            "full" => Ok(Mode::Full),
            "nofpe" => Ok(Mode::NoFpe),
            "noer" => Ok(Mode::NoEr),
            "noud" => Ok(Mode::NoUd),
            other => Err(format!(
                "unknown mode `{other}` (expected full, nofpe, noer, or noud)"
            )),
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct SynthStats {
    /// States taken off the queue.
    pub pops: usize,
    /// Rewrite steps enqueued or forced, in total.
    pub expansions_total: usize,
    /// Substitutions applied by the forced rule (occurrences replaced).
    pub forced_expansions: usize,
    /// One `(definition, depth, successors kept)` record per targeted
    /// expansion round.
    pub reveal_events: Vec<(String, usize, usize)>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SynthError {
    #[error("invalid task: {0}")]
    ValidationFailed(String),
    #[error("search budget exhausted")]
    BudgetExhausted,
    #[error("search space exhausted without a match")]
    SearchExhausted,
}

/// Total union sequences retained across the search frontier. Inlining
/// definitions can grow candidates much faster than the clock-based budget
/// is consulted, so crossing this ceiling also counts as running out of
/// budget rather than letting memory climb unchecked.
const FRONTIER_SEQ_CAP: usize = 20_000;

/// Largest state (total sequences on both sides) worth attempting to align
/// and typecheck. Checking a pair of unions costs quadratically many
/// language queries, so beyond this size an attempt could outlast the whole
/// budget inside a single call; such states can still be expanded.
const MATCH_CAP: usize = 150;

/// Search for a normal-form lens between rewritings of `src` and `tgt`
/// consistent with the examples. Returns the lens together with the two
/// rewritten formats it connects and the search statistics.
pub fn synth_dnf_lens(
    src: &DnfRegex,
    tgt: &DnfRegex,
    examples: &[(String, String)],
    lib: &LensLibrary,
    defs: &Definitions,
    cfg: &SynthConfig,
) -> Result<(DnfLens, DnfRegex, DnfRegex, SynthStats), SynthError> {
    let (res, stats) = search(src, tgt, examples, lib, defs, cfg);
    res.map(|(dl, s, t)| (dl, s, t, stats))
}

/// Like [`synth_dnf_lens`], but hands back the statistics even when the
/// search fails — benchmarking wants to know how much a failure cost.
#[allow(clippy::type_complexity)]
fn search(
    src: &DnfRegex,
    tgt: &DnfRegex,
    examples: &[(String, String)],
    lib: &LensLibrary,
    defs: &Definitions,
    cfg: &SynthConfig,
) -> (
    Result<(DnfLens, DnfRegex, DnfRegex), SynthError>,
    SynthStats,
) {
    for d in [src, tgt] {
        if let Err(e) = transitive_set(d, defs) {
            return (
                Err(SynthError::ValidationFailed(e.to_string())),
                SynthStats::default(),
            );
        }
    }
    let ins: Vec<&str> = examples.iter().map(|(a, _)| a.as_str()).collect();
    let outs: Vec<&str> = examples.iter().map(|(_, b)| b.as_str()).collect();

    let start = Instant::now();
    let mut stats = SynthStats::default();
    let mut visited: HashSet<(DnfRegex, DnfRegex)> = HashSet::new();
    let mut heap: BinaryHeap<(Reverse<(usize, usize)>, DnfRegex, DnfRegex)> = BinaryHeap::new();
    let mut seq_no = 0usize;
    let mut frontier_seqs = src.seqs.len() + tgt.seqs.len();
    heap.push((Reverse((0, seq_no)), src.clone(), tgt.clone()));

    while let Some((Reverse((e, _)), mut s, mut t)) = heap.pop() {
        stats.pops += 1;
        frontier_seqs = frontier_seqs.saturating_sub(s.seqs.len() + t.seqs.len());
        if stats.pops > cfg.budget_pops || start.elapsed() > cfg.budget {
            return (Err(SynthError::BudgetExhausted), stats);
        }
        let mut e = e;
        if cfg.forced_substitution {
            if let Err(err) = force_substitutions(&mut s, &mut t, &mut e, lib, defs, &mut stats) {
                return (Err(err), stats);
            }
        }
        if !visited.insert((s.clone(), t.clone())) {
            continue;
        }
        if s.seqs.len() + t.seqs.len() <= MATCH_CAP {
            if let (Some(es), Some(et)) = (
                embed_examples(&s, &ins, defs),
                embed_examples(&t, &outs, defs),
            ) {
                if let Some(dl) = rigid_synth(&s, &es, &t, &et, lib, defs) {
                    if typecheck_dnf_lens(&dl, &s, &t, defs, lib).is_ok() {
                        return (Ok((dl, s, t)), stats);
                    }
                }
            }
        }

        let mut push = |heap: &mut BinaryHeap<_>,
                        side: bool,
                        d: DnfRegex,
                        stats: &mut SynthStats,
                        frontier_seqs: &mut usize| {
            seq_no += 1;
            stats.expansions_total += 1;
            let (ns, nt) = if side {
                (d, t.clone())
            } else {
                (s.clone(), d)
            };
            *frontier_seqs += ns.seqs.len() + nt.seqs.len();
            heap.push((Reverse((e + 1, seq_no)), ns, nt));
            *frontier_seqs <= FRONTIER_SEQ_CAP
        };

        if cfg.targeted_expansion {
            let mut revealed = Vec::new();
            for (elt, on_src) in missing_elements(&s, &t, lib) {
                let deficient = if on_src { &s } else { &t };
                let mut kept = 0;
                for (path, rule) in enumerate_expansions(deficient, defs) {
                    if start.elapsed() > cfg.budget {
                        return (Err(SynthError::BudgetExhausted), stats);
                    }
                    let d = apply_rewrite_at(deficient, &path, rule, defs)
                        .expect("enumerated rewrite applies");
                    if canon_set(&transitive_set(&d, defs).unwrap(), lib).contains(&elt) {
                        kept += 1;
                        revealed.push((on_src, d));
                    }
                }
                stats.reveal_events.push((elt.0.clone(), elt.1, kept));
            }
            if !revealed.is_empty() {
                for (on_src, d) in revealed {
                    if !push(&mut heap, on_src, d, &mut stats, &mut frontier_seqs) {
                        return (Err(SynthError::BudgetExhausted), stats);
                    }
                }
                continue;
            }
        }
        for (side, d0) in [(true, s.clone()), (false, t.clone())] {
            for (path, rule) in enumerate_expansions(&d0, defs) {
                if start.elapsed() > cfg.budget {
                    return (Err(SynthError::BudgetExhausted), stats);
                }
                let d = apply_rewrite_at(&d0, &path, rule, defs)
                    .expect("enumerated rewrite applies");
                if !push(&mut heap, side, d, &mut stats, &mut frontier_seqs) {
                    return (Err(SynthError::BudgetExhausted), stats);
                }
            }
        }
    }
    (Err(SynthError::SearchExhausted), stats)
}

fn canon_set(set: &BTreeSet<(String, usize)>, lib: &LensLibrary) -> BTreeSet<(String, usize)> {
    set.iter()
        .map(|(n, d)| (lib.canonical(n).to_string(), *d))
        .collect()
}

/// Inline, on either side, every definition occurrence whose class the
/// other side can never surface at that depth; repeats to a fixpoint.
fn force_substitutions(
    s: &mut DnfRegex,
    t: &mut DnfRegex,
    e: &mut usize,
    lib: &LensLibrary,
    defs: &Definitions,
    stats: &mut SynthStats,
) -> Result<(), SynthError> {
    let fail = |err: crate::dnf::RewriteError| SynthError::ValidationFailed(err.to_string());
    loop {
        let ts_s = canon_set(
            &transitive_set(s, defs).map_err(|e| SynthError::ValidationFailed(e.to_string()))?,
            lib,
        );
        let ts_t = canon_set(
            &transitive_set(t, defs).map_err(|e| SynthError::ValidationFailed(e.to_string()))?,
            lib,
        );
        let pick = |d: &DnfRegex, other_ts: &BTreeSet<(String, usize)>| {
            current_set(d)
                .into_iter()
                .find(|(n, i)| !other_ts.contains(&(lib.canonical(n).to_string(), *i)))
        };
        if let Some((n, i)) = pick(s, &ts_t) {
            let (next, count) = substitute_at_depth(s, &n, i, defs).map_err(fail)?;
            *s = next;
            *e += count;
            stats.forced_expansions += count;
            stats.expansions_total += count;
        } else if let Some((n, i)) = pick(t, &ts_s) {
            let (next, count) = substitute_at_depth(t, &n, i, defs).map_err(fail)?;
            *t = next;
            *e += count;
            stats.forced_expansions += count;
            stats.expansions_total += count;
        } else {
            return Ok(());
        }
    }
}

/// Every `(definition class, depth)` pair one side currently uses and the
/// other does not; `true` marks the *source* as the side that must be
/// rewritten to surface it.
fn missing_elements(
    s: &DnfRegex,
    t: &DnfRegex,
    lib: &LensLibrary,
) -> Vec<((String, usize), bool)> {
    let cs_s = canon_set(&current_set(s), lib);
    let cs_t = canon_set(&current_set(t), lib);
    let mut out: Vec<_> = cs_t
        .difference(&cs_s)
        .map(|elt| (elt.clone(), true))
        .collect();
    out.extend(cs_s.difference(&cs_t).map(|elt| (elt.clone(), false)));
    out
}

/// Full pipeline: validate the task, normalize, search, compile to the
/// combinator language, and simplify. The result is well-typed and maps
/// every example, both ways.
pub fn synth_lens(
    src: &Regex,
    tgt: &Regex,
    examples: &[(String, String)],
    lib: &LensLibrary,
    defs: &Definitions,
    cfg: &SynthConfig,
) -> Result<(Lens, SynthStats), SynthError> {
    let (res, stats) = synth_lens_with_stats(src, tgt, examples, lib, defs, cfg);
    res.map(|l| (l, stats))
}

/// Like [`synth_lens`], but hands back the statistics even when the search
/// fails — benchmarking wants to know how much a failure cost.
pub fn synth_lens_with_stats(
    src: &Regex,
    tgt: &Regex,
    examples: &[(String, String)],
    lib: &LensLibrary,
    defs: &Definitions,
    cfg: &SynthConfig,
) -> (Result<Lens, SynthError>, SynthStats) {
    let timing = std::env::var_os("RELENS_TIMING").is_some();
    let mut mark = std::time::Instant::now();
    let mut lap = |label: &str| {
        if timing {
            eprintln!("[timing] {label}: {:?}", mark.elapsed());
        }
        mark = std::time::Instant::now();
    };
    let invalid = |m: String| SynthError::ValidationFailed(m);
    let reject = |m: String| (Err(invalid(m)), SynthStats::default());
    for (side, r) in [("source", src), ("target", tgt)] {
        if let Err(e) = defs.resolve(r) {
            return reject(format!("{side} format: {e}"));
        }
        if !strongly_unambiguous(r, defs) {
            return reject(format!("{side} format `{r}` is ambiguous"));
        }
    }
    lap("validate");
    for (i, o) in examples {
        if !matches(src, i, defs) {
            return reject(format!("example input {i:?} is not in the source format"));
        }
        if !matches(tgt, o, defs) {
            return reject(format!("example output {o:?} is not in the target format"));
        }
    }
    let (rs, rt) = if cfg.inline_definitions {
        (defs.resolve(src).unwrap(), defs.resolve(tgt).unwrap())
    } else {
        (src.clone(), tgt.clone())
    };
    // Inlining can blow the normal form up combinatorially (concatenation
    // multiplies union widths); refuse to even build a starting state that
    // could not fit the search frontier.
    if dnf_width(&rs).saturating_add(dnf_width(&rt)) > FRONTIER_SEQ_CAP {
        return (Err(SynthError::BudgetExhausted), SynthStats::default());
    }
    let (ds0, dt0) = (to_dnf(&rs), to_dnf(&rt));
    lap("to_dnf");
    let (res, stats) = search(&ds0, &dt0, examples, lib, defs, cfg);
    lap("search");
    let (dl, ds, dt) = match res {
        Ok(found) => found,
        Err(e) => return (Err(e), stats),
    };
    let lens = match dnf_lens_to_lens(&dl, &ds, &dt, defs, lib) {
        Ok(l) => l,
        Err(e) => return (Err(invalid(format!("compiling the found lens: {e}"))), stats),
    };
    lap("to_lens");
    let lens = crate::dnf_lens::simplify_lens(&lens, defs);
    lap("simplify");
    typecheck_lens(&lens, defs).expect("synthesized lens typechecks");
    lap("typecheck");
    for (i, o) in examples {
        assert_eq!(&lens_get(&lens, defs, i).expect("example maps forward"), o);
        assert_eq!(&lens_put(&lens, defs, o).expect("example maps backward"), i);
    }
    lap("examples");
    (Ok(lens), stats)
}
