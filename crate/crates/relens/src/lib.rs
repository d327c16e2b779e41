//! relens: bijective string lenses between regular-expression formats.
//!
//! The library is layered:
//!
//! * [`regex`] — regular expressions over ASCII byte strings, named
//!   definitions, language-level decision procedures (emptiness,
//!   disjointness, equivalence, concatenation/iteration unambiguity) and
//!   unique parsing.
//! * [`dnf`] — regular expressions in disjunctive normal form: flat unions
//!   of sequences of star/name atoms, the conversions to and from the tree
//!   form, and the rewrite system (star unrollings and name substitution)
//!   used by the synthesizer.
//! * [`lens`] — the combinator language of bijective lenses (`const`,
//!   concat, `swap`, union, `iterate`, compose, `id`), its typechecker and
//!   its evaluator.
//! * [`dnf_lens`] — lenses in normal form mirroring [`dnf`], their
//!   typechecker and evaluator, the translation back to combinator lenses,
//!   and lens simplification.
//! * [`synth`] — example-directed synthesis: a best-first search over pairs
//!   of normal forms, structural alignment of equally-shaped operands, and
//!   inference of required rewrites.
//! * [`specfile`] — the concrete syntax for definition/task/lens files.
//! * [`cli`] — the `synth`/`run`/`check`/`bench` commands.
//!
//! [`oracle`] and [`sampling`] hold brute-force reference implementations
//! and seeded random generators; they back the test suites and are not used
//! by the main pipeline.

pub mod cli;
pub mod dnf;
pub mod dnf_lens;
pub mod lens;
pub mod oracle;
pub mod regex;
pub mod sampling;
pub mod specfile;
pub mod synth;
