//! The lens language: invertible string transformations between two
//! regular formats.
//!
//! A lens `l` denotes a bijection between the languages of its source and
//! target formats. [`typecheck_lens`] establishes the side conditions that
//! make the denotation a function in both directions (unambiguous splits,
//! disjoint alternatives, unambiguous iteration, language-equal seams);
//! [`Evaluator`] then runs a well-typed lens forwards ([`Evaluator::get`])
//! or backwards ([`Evaluator::put`]) using one automaton per split point.
//!
//! [`invert`] flips a lens structurally: `invert(l)` is a lens of the
//! swapped type whose `get` is `l`'s `put`.

use std::fmt;

use thiserror::Error;

use crate::regex::automata::Dfa;
use crate::regex::{
    escape_literal, lang_equiv, languages_disjoint, strongly_unambiguous, unambig_concat,
    unambig_iter, Definitions, Regex, RegexError,
};

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Lens {
    /// `const("s","t")`: maps exactly `s` to exactly `t`.
    Const(String, String),
    /// `l1 . l2`: splits the input, maps the parts, keeps their order.
    Concat(Box<Lens>, Box<Lens>),
    /// `swap(l1, l2)`: splits the input, maps the parts, exchanges them.
    Swap(Box<Lens>, Box<Lens>),
    /// `l1 | l2`: applies whichever side the input belongs to.
    Or(Box<Lens>, Box<Lens>),
    /// `iterate(l)`: maps each iteration of a starred format.
    Iterate(Box<Lens>),
    /// `l1 ; l2`: runs `l1` forwards, then `l2` on its output.
    Compose(Box<Lens>, Box<Lens>),
    /// `id(R)`: maps every member of `R` to itself.
    Identity(Regex),
    /// A named lens pulled from the surrounding file; behaves exactly like
    /// the definition it points at and prints as the bare name.
    Ref { name: String, inner: Box<Lens> },
}

impl Lens {
    pub fn constant(s: impl Into<String>, t: impl Into<String>) -> Lens {
        Lens::Const(s.into(), t.into())
    }

    pub fn concat(a: Lens, b: Lens) -> Lens {
        Lens::Concat(Box::new(a), Box::new(b))
    }

    pub fn swap(a: Lens, b: Lens) -> Lens {
        Lens::Swap(Box::new(a), Box::new(b))
    }

    pub fn or(a: Lens, b: Lens) -> Lens {
        Lens::Or(Box::new(a), Box::new(b))
    }

    pub fn iterate(a: Lens) -> Lens {
        Lens::Iterate(Box::new(a))
    }

    pub fn compose(a: Lens, b: Lens) -> Lens {
        Lens::Compose(Box::new(a), Box::new(b))
    }

    pub fn reference(name: impl Into<String>, inner: Lens) -> Lens {
        Lens::Ref {
            name: name.into(),
            inner: Box::new(inner),
        }
    }
}

/// Source and target formats of a lens, as written (names unresolved).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LensType {
    pub src: Regex,
    pub tgt: Regex,
}

/// The type a lens would have if its side conditions hold. Purely
/// structural; see [`typecheck_lens`] for the checked version.
pub fn lens_type(l: &Lens) -> LensType {
    match l {
        Lens::Const(s, t) => LensType {
            src: Regex::lit(s.clone()),
            tgt: Regex::lit(t.clone()),
        },
        Lens::Concat(a, b) => {
            let (ta, tb) = (lens_type(a), lens_type(b));
            LensType {
                src: Regex::concat(ta.src, tb.src),
                tgt: Regex::concat(ta.tgt, tb.tgt),
            }
        }
        Lens::Swap(a, b) => {
            let (ta, tb) = (lens_type(a), lens_type(b));
            LensType {
                src: Regex::concat(ta.src, tb.src),
                tgt: Regex::concat(tb.tgt, ta.tgt),
            }
        }
        Lens::Or(a, b) => {
            let (ta, tb) = (lens_type(a), lens_type(b));
            LensType {
                src: Regex::or(ta.src, tb.src),
                tgt: Regex::or(ta.tgt, tb.tgt),
            }
        }
        Lens::Iterate(a) => {
            let ta = lens_type(a);
            LensType {
                src: Regex::star(ta.src),
                tgt: Regex::star(ta.tgt),
            }
        }
        Lens::Compose(a, b) => LensType {
            src: lens_type(a).src,
            tgt: lens_type(b).tgt,
        },
        Lens::Identity(r) => LensType {
            src: r.clone(),
            tgt: r.clone(),
        },
        Lens::Ref { inner, .. } => lens_type(inner),
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TypeError {
    #[error("{side} side of `{lens}` concatenates ambiguously")]
    AmbiguousConcat { side: &'static str, lens: String },
    #[error("{side} side of `{lens}` has overlapping alternatives")]
    OverlappingOr { side: &'static str, lens: String },
    #[error("{side} side of `{lens}` iterates ambiguously")]
    AmbiguousIteration { side: &'static str, lens: String },
    #[error("`{lens}` composes a lens producing `{mid_tgt}` with one expecting `{mid_src}`")]
    ComposeTypeMismatch {
        lens: String,
        mid_tgt: String,
        mid_src: String,
    },
    #[error("`id({regex})` needs a format where every string has one parse")]
    AmbiguousIdentity { regex: String },
    #[error(transparent)]
    Unbound(#[from] RegexError),
}

/// Check every side condition and return the lens's type.
///
/// Splits must be unambiguous on both sides, alternatives disjoint on both
/// sides, iterated formats unambiguously iterable, composition seams
/// language-equal, and an identity format strongly unambiguous — except
/// that `id(NAME)` trusts the named format as a unit.
pub fn typecheck_lens(l: &Lens, defs: &Definitions) -> Result<LensType, TypeError> {
    match l {
        Lens::Const(s, t) => Ok(LensType {
            src: Regex::lit(s.clone()),
            tgt: Regex::lit(t.clone()),
        }),
        Lens::Identity(r) => {
            defs.resolve(r)?;
            if !matches!(r, Regex::Var(_)) && !strongly_unambiguous(r, defs) {
                return Err(TypeError::AmbiguousIdentity {
                    regex: r.to_string(),
                });
            }
            Ok(LensType {
                src: r.clone(),
                tgt: r.clone(),
            })
        }
        Lens::Concat(a, b) => {
            let (ta, tb) = (typecheck_lens(a, defs)?, typecheck_lens(b, defs)?);
            if !unambig_concat(&ta.src, &tb.src, defs) {
                return Err(TypeError::AmbiguousConcat {
                    side: "source",
                    lens: l.to_string(),
                });
            }
            if !unambig_concat(&ta.tgt, &tb.tgt, defs) {
                return Err(TypeError::AmbiguousConcat {
                    side: "target",
                    lens: l.to_string(),
                });
            }
            Ok(LensType {
                src: Regex::concat(ta.src, tb.src),
                tgt: Regex::concat(ta.tgt, tb.tgt),
            })
        }
        Lens::Swap(a, b) => {
            let (ta, tb) = (typecheck_lens(a, defs)?, typecheck_lens(b, defs)?);
            if !unambig_concat(&ta.src, &tb.src, defs) {
                return Err(TypeError::AmbiguousConcat {
                    side: "source",
                    lens: l.to_string(),
                });
            }
            if !unambig_concat(&tb.tgt, &ta.tgt, defs) {
                return Err(TypeError::AmbiguousConcat {
                    side: "target",
                    lens: l.to_string(),
                });
            }
            Ok(LensType {
                src: Regex::concat(ta.src, tb.src),
                tgt: Regex::concat(tb.tgt, ta.tgt),
            })
        }
        Lens::Or(a, b) => {
            let (ta, tb) = (typecheck_lens(a, defs)?, typecheck_lens(b, defs)?);
            if !unions_disjoint(&ta.src, &tb.src, defs) {
                return Err(TypeError::OverlappingOr {
                    side: "source",
                    lens: l.to_string(),
                });
            }
            if !unions_disjoint(&ta.tgt, &tb.tgt, defs) {
                return Err(TypeError::OverlappingOr {
                    side: "target",
                    lens: l.to_string(),
                });
            }
            Ok(LensType {
                src: Regex::or(ta.src, tb.src),
                tgt: Regex::or(ta.tgt, tb.tgt),
            })
        }
        Lens::Iterate(a) => {
            let ta = typecheck_lens(a, defs)?;
            if !unambig_iter(&ta.src, defs) {
                return Err(TypeError::AmbiguousIteration {
                    side: "source",
                    lens: l.to_string(),
                });
            }
            if !unambig_iter(&ta.tgt, defs) {
                return Err(TypeError::AmbiguousIteration {
                    side: "target",
                    lens: l.to_string(),
                });
            }
            Ok(LensType {
                src: Regex::star(ta.src),
                tgt: Regex::star(ta.tgt),
            })
        }
        Lens::Compose(a, b) => {
            let (ta, tb) = (typecheck_lens(a, defs)?, typecheck_lens(b, defs)?);
            if !lang_equiv(&ta.tgt, &tb.src, defs) {
                return Err(TypeError::ComposeTypeMismatch {
                    lens: l.to_string(),
                    mid_tgt: ta.tgt.to_string(),
                    mid_src: tb.src.to_string(),
                });
            }
            Ok(LensType {
                src: ta.src,
                tgt: tb.tgt,
            })
        }
        Lens::Ref { inner, .. } => typecheck_lens(inner, defs),
    }
}

/// Union disjointness checked branchwise: `L(a) ∩ L(b) = ∅` exactly when
/// every alternative of `a` is disjoint from every alternative of `b`.
/// Along a chain of unions this asks quadratically many small questions
/// instead of linearly many against ever-wider rest-of-chain unions, which
/// both keeps the automata small and lets repeated operand pairs memoize.
fn unions_disjoint(a: &Regex, b: &Regex, defs: &Definitions) -> bool {
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
    la.iter()
        .all(|x| lb.iter().all(|y| languages_disjoint(x, y, defs)))
}

/// The lens of swapped type whose forward direction is `l`'s backward
/// direction. Named references are unwrapped, since the name stands for the
/// original orientation.
pub fn invert(l: &Lens) -> Lens {
    match l {
        Lens::Const(s, t) => Lens::Const(t.clone(), s.clone()),
        Lens::Concat(a, b) => Lens::concat(invert(a), invert(b)),
        Lens::Swap(a, b) => Lens::swap(invert(b), invert(a)),
        Lens::Or(a, b) => Lens::or(invert(a), invert(b)),
        Lens::Iterate(a) => Lens::iterate(invert(a)),
        Lens::Compose(a, b) => Lens::compose(invert(b), invert(a)),
        Lens::Identity(r) => Lens::Identity(r.clone()),
        Lens::Ref { inner, .. } => invert(inner),
    }
}

// Printing: `;` binds loosest, then `|`, then `.`; all associate left.
impl fmt::Display for Lens {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.fmt_prec(f, 0)
    }
}

impl Lens {
    fn fmt_prec(&self, f: &mut fmt::Formatter<'_>, prec: u8) -> fmt::Result {
        match self {
            Lens::Compose(a, b) => {
                if prec > 0 {
                    write!(f, "(")?;
                }
                a.fmt_prec(f, 0)?;
                write!(f, " ; ")?;
                b.fmt_prec(f, 1)?;
                if prec > 0 {
                    write!(f, ")")?;
                }
                Ok(())
            }
            Lens::Or(a, b) => {
                if prec > 1 {
                    write!(f, "(")?;
                }
                a.fmt_prec(f, 1)?;
                write!(f, " | ")?;
                b.fmt_prec(f, 2)?;
                if prec > 1 {
                    write!(f, ")")?;
                }
                Ok(())
            }
            Lens::Concat(a, b) => {
                if prec > 2 {
                    write!(f, "(")?;
                }
                a.fmt_prec(f, 2)?;
                write!(f, " . ")?;
                b.fmt_prec(f, 3)?;
                if prec > 2 {
                    write!(f, ")")?;
                }
                Ok(())
            }
            Lens::Const(s, t) => {
                write!(f, "const(\"{}\", \"{}\")", escape_literal(s), escape_literal(t))
            }
            Lens::Swap(a, b) => write!(f, "swap({a}, {b})"),
            Lens::Iterate(a) => write!(f, "iterate({a})"),
            Lens::Identity(r) => write!(f, "id({r})"),
            Lens::Ref { name, .. } => write!(f, "{name}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EvalError {
    #[error("input does not match the source format: {0:?}")]
    InputNotInSource(String),
    #[error("input does not match the target format: {0:?}")]
    InputNotInTarget(String),
    #[error(transparent)]
    Unbound(#[from] RegexError),
}

/// A lens compiled for evaluation: every split point carries the automata
/// of its component formats, with all names resolved up front.
pub struct Evaluator {
    root: Node,
}

enum Node {
    Const(Vec<u8>, Vec<u8>),
    Identity(Dfa),
    Concat {
        left: Box<Node>,
        right: Box<Node>,
        src_l: Dfa,
        src_r: Dfa,
        tgt_l: Dfa,
        tgt_r: Dfa,
    },
    Swap {
        left: Box<Node>,
        right: Box<Node>,
        src_l: Dfa,
        src_r: Dfa,
        tgt_l: Dfa,
        tgt_r: Dfa,
    },
    Or {
        left: Box<Node>,
        right: Box<Node>,
        src_l: Dfa,
        src_r: Dfa,
        tgt_l: Dfa,
        tgt_r: Dfa,
    },
    Iterate {
        body: Box<Node>,
        src: Dfa,
        tgt: Dfa,
    },
    Compose {
        left: Box<Node>,
        right: Box<Node>,
    },
}

fn dfa_of(r: &Regex) -> Dfa {
    let alphabet: Vec<u8> = r.literal_bytes().into_iter().collect();
    Dfa::compile(r, &alphabet)
}

impl Evaluator {
    pub fn new(l: &Lens, defs: &Definitions) -> Result<Evaluator, RegexError> {
        let (root, _, _) = compile_node(l, defs)?;
        Ok(Evaluator { root })
    }

    /// Map a source string forwards. Fails only when the input is outside
    /// the source format.
    pub fn get(&self, input: &str) -> Result<String, EvalError> {
        match eval(&self.root, input.as_bytes(), Dir::Get) {
            Some(bytes) => Ok(expect_utf8(bytes)),
            None => Err(EvalError::InputNotInSource(input.to_string())),
        }
    }

    /// Map a target string backwards. Fails only when the input is outside
    /// the target format.
    pub fn put(&self, input: &str) -> Result<String, EvalError> {
        match eval(&self.root, input.as_bytes(), Dir::Put) {
            Some(bytes) => Ok(expect_utf8(bytes)),
            None => Err(EvalError::InputNotInTarget(input.to_string())),
        }
    }
}

fn expect_utf8(bytes: Vec<u8>) -> String {
    String::from_utf8(bytes).expect("lens output is valid UTF-8")
}

/// One-shot forward evaluation; builds the automata each call.
pub fn lens_get(l: &Lens, defs: &Definitions, input: &str) -> Result<String, EvalError> {
    Evaluator::new(l, defs)?.get(input)
}

/// One-shot backward evaluation; builds the automata each call.
pub fn lens_put(l: &Lens, defs: &Definitions, input: &str) -> Result<String, EvalError> {
    Evaluator::new(l, defs)?.put(input)
}

fn compile_node(l: &Lens, defs: &Definitions) -> Result<(Node, Regex, Regex), RegexError> {
    Ok(match l {
        Lens::Const(s, t) => (
            Node::Const(s.clone().into_bytes(), t.clone().into_bytes()),
            Regex::lit(s.clone()),
            Regex::lit(t.clone()),
        ),
        Lens::Identity(r) => {
            let rr = defs.resolve(r)?;
            (Node::Identity(dfa_of(&rr)), rr.clone(), rr)
        }
        Lens::Concat(a, b) => {
            let (na, sa, ta) = compile_node(a, defs)?;
            let (nb, sb, tb) = compile_node(b, defs)?;
            let node = Node::Concat {
                left: Box::new(na),
                right: Box::new(nb),
                src_l: dfa_of(&sa),
                src_r: dfa_of(&sb),
                tgt_l: dfa_of(&ta),
                tgt_r: dfa_of(&tb),
            };
            (node, Regex::concat(sa, sb), Regex::concat(ta, tb))
        }
        Lens::Swap(a, b) => {
            let (na, sa, ta) = compile_node(a, defs)?;
            let (nb, sb, tb) = compile_node(b, defs)?;
            let node = Node::Swap {
                left: Box::new(na),
                right: Box::new(nb),
                src_l: dfa_of(&sa),
                src_r: dfa_of(&sb),
                tgt_l: dfa_of(&ta),
                tgt_r: dfa_of(&tb),
            };
            (node, Regex::concat(sa, sb), Regex::concat(tb, ta))
        }
        Lens::Or(a, b) => {
            let (na, sa, ta) = compile_node(a, defs)?;
            let (nb, sb, tb) = compile_node(b, defs)?;
            let node = Node::Or {
                left: Box::new(na),
                right: Box::new(nb),
                src_l: dfa_of(&sa),
                src_r: dfa_of(&sb),
                tgt_l: dfa_of(&ta),
                tgt_r: dfa_of(&tb),
            };
            (node, Regex::or(sa, sb), Regex::or(ta, tb))
        }
        Lens::Iterate(a) => {
            let (na, sa, ta) = compile_node(a, defs)?;
            let node = Node::Iterate {
                body: Box::new(na),
                src: dfa_of(&sa),
                tgt: dfa_of(&ta),
            };
            (node, Regex::star(sa), Regex::star(ta))
        }
        Lens::Compose(a, b) => {
            let (na, sa, _) = compile_node(a, defs)?;
            let (nb, _, tb) = compile_node(b, defs)?;
            let node = Node::Compose {
                left: Box::new(na),
                right: Box::new(nb),
            };
            (node, sa, tb)
        }
        Lens::Ref { inner, .. } => compile_node(inner, defs)?,
    })
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Dir {
    Get,
    Put,
}

/// Evaluate one direction. `None` means the input does not fit the format
/// on the evaluated side; for a well-typed lens every split below a fitting
/// input succeeds, so failures surface only from unfitting inputs.
fn eval(n: &Node, input: &[u8], dir: Dir) -> Option<Vec<u8>> {
    match n {
        Node::Const(s, t) => {
            let (from, to) = match dir {
                Dir::Get => (s, t),
                Dir::Put => (t, s),
            };
            (input == from.as_slice()).then(|| to.clone())
        }
        Node::Identity(dfa) => dfa.accepts(input).then(|| input.to_vec()),
        Node::Concat {
            left,
            right,
            src_l,
            src_r,
            tgt_l,
            tgt_r,
        } => {
            let (dl, dr) = match dir {
                Dir::Get => (src_l, src_r),
                Dir::Put => (tgt_l, tgt_r),
            };
            let i = find_split(dl, dr, input)?;
            let mut out = eval(left, &input[..i], dir)?;
            out.extend(eval(right, &input[i..], dir)?);
            Some(out)
        }
        Node::Swap {
            left,
            right,
            src_l,
            src_r,
            tgt_l,
            tgt_r,
        } => match dir {
            Dir::Get => {
                // Source reads left·right, target writes right·left.
                let i = find_split(src_l, src_r, input)?;
                let mut out = eval(right, &input[i..], Dir::Get)?;
                out.extend(eval(left, &input[..i], Dir::Get)?);
                Some(out)
            }
            Dir::Put => {
                let i = find_split(tgt_r, tgt_l, input)?;
                let mut out = eval(left, &input[i..], Dir::Put)?;
                out.extend(eval(right, &input[..i], Dir::Put)?);
                Some(out)
            }
        },
        Node::Or {
            left,
            right,
            src_l,
            src_r,
            tgt_l,
            tgt_r,
        } => {
            let (dl, dr) = match dir {
                Dir::Get => (src_l, src_r),
                Dir::Put => (tgt_l, tgt_r),
            };
            if dl.accepts(input) {
                eval(left, input, dir)
            } else if dr.accepts(input) {
                eval(right, input, dir)
            } else {
                None
            }
        }
        Node::Iterate { body, src, tgt } => {
            let dfa = match dir {
                Dir::Get => src,
                Dir::Put => tgt,
            };
            let spans = factorize(dfa, input)?;
            let mut out = Vec::new();
            for (a, b) in spans {
                out.extend(eval(body, &input[a..b], dir)?);
            }
            Some(out)
        }
        Node::Compose { left, right } => match dir {
            Dir::Get => eval(right, &eval(left, input, Dir::Get)?, Dir::Get),
            Dir::Put => eval(left, &eval(right, input, Dir::Put)?, Dir::Put),
        },
    }
}

/// The split position `i` with `input[..i]` in the left format and
/// `input[i..]` in the right one; unique for inputs of an unambiguous
/// concatenation.
pub(crate) fn find_split(dl: &Dfa, dr: &Dfa, input: &[u8]) -> Option<usize> {
    let pre = dl.prefix_acceptance(input);
    let suf = dr.suffix_acceptance(input);
    (0..=input.len()).find(|&i| pre[i] && suf[i])
}

/// Cut `input` into consecutive nonempty members of the piece format;
/// unique for members of an unambiguously iterable star.
pub(crate) fn factorize(piece: &Dfa, input: &[u8]) -> Option<Vec<(usize, usize)>> {
    let n = input.len();
    let mut jump = vec![usize::MAX; n + 1];
    let mut ok = vec![false; n + 1];
    ok[n] = true;
    for j in (0..n).rev() {
        let pre = piece.prefix_acceptance(&input[j..]);
        for k in j + 1..=n {
            if pre[k - j] && ok[k] {
                ok[j] = true;
                jump[j] = k;
                break;
            }
        }
    }
    if !ok[0] {
        return None;
    }
    let mut spans = Vec::new();
    let mut p = 0;
    while p < n {
        let k = jump[p];
        spans.push((p, k));
        p = k;
    }
    Some(spans)
}
