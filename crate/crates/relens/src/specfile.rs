//! The spec-file format: definitions, synthesis tasks, and hand-written
//! lenses in one plain-text file.
//!
//! ```text
//! typedef NAME = REGEX;
//! synth NAME : REGEX <=> REGEX with { "in" <-> "out", ... };
//! lens NAME = LENS;
//! ```
//!
//! Regexes are quoted strings, names, `[a-z0-9_]` character classes
//! (sugar for the alternation of their characters), postfix `*`,
//! concatenation by juxtaposition or `.`, and `|`; `empty` denotes the
//! empty language. Lens syntax matches [`Lens`]'s printing: `const`,
//! `swap`, `iterate`, `id`, names of earlier `lens` declarations, with
//! `.`, `|`, and `;` in increasing binding order... lowest `;`, then `|`,
//! then `.`. Comments run `//` or `#` to end of line. A file written by
//! [`print_spec`] parses back to the same structures.

use std::fmt;
use std::path::Path;

use thiserror::Error;

use crate::lens::Lens;
use crate::regex::{escape_literal, Definitions, Regex};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SynthTask {
    pub name: String,
    pub source: Regex,
    pub target: Regex,
    pub examples: Vec<(String, String)>,
}

#[derive(Debug, Default)]
pub struct SpecFile {
    pub definitions: Definitions,
    /// Character classes encountered, as written, with their expansions.
    pub char_classes: Vec<(String, Regex)>,
    pub tasks: Vec<SynthTask>,
    pub lens_decls: Vec<(String, Lens)>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{line}:{col}: {msg}")]
pub struct SyntaxError {
    pub line: usize,
    pub col: usize,
    pub msg: String,
}

#[derive(Debug, Error)]
pub enum SpecError {
    #[error("{path}: {err}")]
    Syntax { path: String, err: SyntaxError },
    #[error("{path}: {err}")]
    Io { path: String, err: std::io::Error },
}

pub fn parse_spec(path: &Path) -> Result<SpecFile, SpecError> {
    let text = std::fs::read_to_string(path).map_err(|err| SpecError::Io {
        path: path.display().to_string(),
        err,
    })?;
    parse_spec_str(&text).map_err(|err| SpecError::Syntax {
        path: path.display().to_string(),
        err,
    })
}

pub fn parse_spec_str(text: &str) -> Result<SpecFile, SyntaxError> {
    let tokens = lex(text)?;
    Parser {
        tokens,
        pos: 0,
        spec: SpecFile::default(),
    }
    .file()
}

// ---------------------------------------------------------------- lexing

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Ident(String),
    Str(String),
    /// Raw text of a character class together with its members.
    Class(String, Vec<char>),
    Punct(&'static str),
    Eof,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Ident(s) => write!(f, "`{s}`"),
            Tok::Str(s) => write!(f, "\"{}\"", escape_literal(s)),
            Tok::Class(raw, _) => write!(f, "`{raw}`"),
            Tok::Punct(p) => write!(f, "`{p}`"),
            Tok::Eof => write!(f, "end of file"),
        }
    }
}

struct Spanned {
    tok: Tok,
    line: usize,
    col: usize,
}

fn lex(text: &str) -> Result<Vec<Spanned>, SyntaxError> {
    let mut out = Vec::new();
    let mut line = 1usize;
    let mut col = 1usize;
    let mut chars = text.chars().peekable();
    let err = |line, col, msg: String| SyntaxError { line, col, msg };

    macro_rules! bump {
        ($c:expr) => {{
            if $c == '\n' {
                line += 1;
                col = 1;
            } else {
                col += 1;
            }
        }};
    }

    while let Some(&c) = chars.peek() {
        let (tline, tcol) = (line, col);
        if c.is_whitespace() {
            chars.next();
            bump!(c);
            continue;
        }
        if c == '#' {
            while let Some(&c) = chars.peek() {
                chars.next();
                bump!(c);
                if c == '\n' {
                    break;
                }
            }
            continue;
        }
        if !c.is_ascii() {
            return Err(err(tline, tcol, format!("non-ASCII character {c:?}")));
        }
        match c {
            '/' => {
                chars.next();
                bump!(c);
                if chars.peek() == Some(&'/') {
                    while let Some(&c) = chars.peek() {
                        chars.next();
                        bump!(c);
                        if c == '\n' {
                            break;
                        }
                    }
                } else {
                    return Err(err(tline, tcol, "stray `/` (comments are `//`)".into()));
                }
            }
            '"' => {
                chars.next();
                bump!(c);
                let mut s = String::new();
                loop {
                    let Some(c) = chars.next() else {
                        return Err(err(tline, tcol, "unterminated string".into()));
                    };
                    bump!(c);
                    match c {
                        '"' => break,
                        '\\' => {
                            let Some(e) = chars.next() else {
                                return Err(err(tline, tcol, "unterminated string".into()));
                            };
                            bump!(e);
                            s.push(match e {
                                '"' => '"',
                                '\\' => '\\',
                                'n' => '\n',
                                't' => '\t',
                                other => {
                                    return Err(err(
                                        line,
                                        col,
                                        format!("unknown escape `\\{other}`"),
                                    ))
                                }
                            });
                        }
                        '\n' => return Err(err(tline, tcol, "unterminated string".into())),
                        c if c.is_ascii() => s.push(c),
                        c => return Err(err(line, col, format!("non-ASCII character {c:?}"))),
                    }
                }
                out.push(Spanned {
                    tok: Tok::Str(s),
                    line: tline,
                    col: tcol,
                });
            }
            '[' => {
                chars.next();
                bump!(c);
                let mut raw = String::from("[");
                let mut members = Vec::new();
                let mut pending: Option<char> = None;
                loop {
                    let Some(c) = chars.next() else {
                        return Err(err(tline, tcol, "unterminated character class".into()));
                    };
                    bump!(c);
                    if !c.is_ascii() {
                        return Err(err(line, col, format!("non-ASCII character {c:?}")));
                    }
                    raw.push(c);
                    match c {
                        ']' => break,
                        '\n' => {
                            return Err(err(tline, tcol, "unterminated character class".into()))
                        }
                        '-' if pending.is_some() => {
                            let lo = pending.take().unwrap();
                            let Some(hi) = chars.next() else {
                                return Err(err(
                                    tline,
                                    tcol,
                                    "unterminated character class".into(),
                                ));
                            };
                            bump!(hi);
                            raw.push(hi);
                            if !hi.is_ascii() || hi == ']' || hi == '-' {
                                return Err(err(line, col, format!("bad range end {hi:?}")));
                            }
                            if hi < lo {
                                return Err(err(
                                    line,
                                    col,
                                    format!("inverted range `{lo}-{hi}`"),
                                ));
                            }
                            members.extend((lo..=hi).filter(char::is_ascii));
                        }
                        '\\' => {
                            if let Some(p) = pending.take() {
                                members.push(p);
                            }
                            let Some(e) = chars.next() else {
                                return Err(err(
                                    tline,
                                    tcol,
                                    "unterminated character class".into(),
                                ));
                            };
                            bump!(e);
                            raw.push(e);
                            pending = Some(match e {
                                ']' => ']',
                                '\\' => '\\',
                                '-' => '-',
                                'n' => '\n',
                                't' => '\t',
                                other => {
                                    return Err(err(
                                        line,
                                        col,
                                        format!("unknown escape `\\{other}`"),
                                    ))
                                }
                            });
                        }
                        c => {
                            if let Some(p) = pending.take() {
                                members.push(p);
                            }
                            pending = Some(c);
                        }
                    }
                }
                if let Some(p) = pending {
                    members.push(p);
                }
                out.push(Spanned {
                    tok: Tok::Class(raw, members),
                    line: tline,
                    col: tcol,
                });
            }
            c if c.is_ascii_alphabetic() || c == '_' => {
                let mut s = String::new();
                while let Some(&c) = chars.peek() {
                    if c.is_ascii_alphanumeric() || c == '_' {
                        s.push(c);
                        chars.next();
                        bump!(c);
                    } else {
                        break;
                    }
                }
                out.push(Spanned {
                    tok: Tok::Ident(s),
                    line: tline,
                    col: tcol,
                });
            }
            '<' => {
                chars.next();
                bump!(c);
                let mut took = String::from("<");
                for _ in 0..2 {
                    if let Some(&c) = chars.peek() {
                        if c == '=' || c == '-' || c == '>' {
                            took.push(c);
                            chars.next();
                            bump!(c);
                        }
                    }
                }
                let p = match took.as_str() {
                    "<=>" => "<=>",
                    "<->" => "<->",
                    other => {
                        return Err(err(
                            tline,
                            tcol,
                            format!("expected `<=>` or `<->`, found `{other}`"),
                        ))
                    }
                };
                out.push(Spanned {
                    tok: Tok::Punct(p),
                    line: tline,
                    col: tcol,
                });
            }
            _ => {
                let p = match c {
                    '=' => "=",
                    ';' => ";",
                    ':' => ":",
                    ',' => ",",
                    '{' => "{",
                    '}' => "}",
                    '(' => "(",
                    ')' => ")",
                    '|' => "|",
                    '.' => ".",
                    '*' => "*",
                    other => return Err(err(tline, tcol, format!("unexpected `{other}`"))),
                };
                chars.next();
                bump!(c);
                out.push(Spanned {
                    tok: Tok::Punct(p),
                    line: tline,
                    col: tcol,
                });
            }
        }
    }
    out.push(Spanned {
        tok: Tok::Eof,
        line,
        col,
    });
    Ok(out)
}

// --------------------------------------------------------------- parsing

struct Parser {
    tokens: Vec<Spanned>,
    pos: usize,
    spec: SpecFile,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.tokens[self.pos].tok
    }

    fn next(&mut self) -> &Tok {
        let t = &self.tokens[self.pos].tok;
        if !matches!(t, Tok::Eof) {
            self.pos += 1;
        }
        t
    }

    fn error(&self, msg: String) -> SyntaxError {
        let at = &self.tokens[self.pos.min(self.tokens.len() - 1)];
        SyntaxError {
            line: at.line,
            col: at.col,
            msg,
        }
    }

    fn expect(&mut self, p: &'static str) -> Result<(), SyntaxError> {
        if self.peek() == &Tok::Punct(p) {
            self.next();
            Ok(())
        } else {
            Err(self.error(format!("expected `{p}`, found {}", self.peek())))
        }
    }

    fn ident(&mut self, what: &str) -> Result<String, SyntaxError> {
        match self.peek() {
            Tok::Ident(s) if is_keyword(s) => {
                Err(self.error(format!("`{s}` is a reserved word, expected {what}")))
            }
            Tok::Ident(s) => {
                let s = s.clone();
                self.next();
                Ok(s)
            }
            other => Err(self.error(format!("expected {what}, found {other}"))),
        }
    }

    fn string(&mut self) -> Result<String, SyntaxError> {
        match self.peek() {
            Tok::Str(s) => {
                let s = s.clone();
                self.next();
                Ok(s)
            }
            other => Err(self.error(format!("expected a string, found {other}"))),
        }
    }

    fn file(mut self) -> Result<SpecFile, SyntaxError> {
        loop {
            match self.peek().clone() {
                Tok::Eof => return Ok(self.spec),
                Tok::Ident(kw) if kw == "typedef" => {
                    self.next();
                    let name = self.ident("a definition name")?;
                    let err_at = self.pos - 1;
                    self.expect("=")?;
                    let body = self.regex()?;
                    self.expect(";")?;
                    if let Err(e) = self.spec.definitions.define(name.as_str(), body) {
                        let at = &self.tokens[err_at];
                        let msg = if self.spec.definitions.lookup(&name).is_some() {
                            format!("`{name}` is already defined")
                        } else {
                            e.to_string()
                        };
                        return Err(SyntaxError {
                            line: at.line,
                            col: at.col,
                            msg,
                        });
                    }
                }
                Tok::Ident(kw) if kw == "synth" => {
                    self.next();
                    let name = self.ident("a task name")?;
                    if self.spec.tasks.iter().any(|t| t.name == name)
                        || self.spec.lens_decls.iter().any(|(n, _)| n == &name)
                    {
                        return Err(self.error(format!("`{name}` is already declared")));
                    }
                    self.expect(":")?;
                    let source = self.regex()?;
                    self.expect("<=>")?;
                    let target = self.regex()?;
                    let mut examples = Vec::new();
                    if matches!(self.peek(), Tok::Ident(s) if s == "with") {
                        self.next();
                        self.expect("{")?;
                        while self.peek() != &Tok::Punct("}") {
                            let a = self.string()?;
                            self.expect("<->")?;
                            let b = self.string()?;
                            examples.push((a, b));
                            if self.peek() == &Tok::Punct(",") {
                                self.next();
                            } else {
                                break;
                            }
                        }
                        self.expect("}")?;
                    }
                    self.expect(";")?;
                    self.spec.tasks.push(SynthTask {
                        name,
                        source,
                        target,
                        examples,
                    });
                }
                Tok::Ident(kw) if kw == "lens" => {
                    self.next();
                    let name = self.ident("a lens name")?;
                    if self.spec.lens_decls.iter().any(|(n, _)| n == &name)
                        || self.spec.tasks.iter().any(|t| t.name == name)
                    {
                        return Err(self.error(format!("`{name}` is already declared")));
                    }
                    self.expect("=")?;
                    let l = self.lens()?;
                    self.expect(";")?;
                    self.spec.lens_decls.push((name, l));
                }
                other => {
                    return Err(self.error(format!(
                        "expected `typedef`, `synth`, or `lens`, found {other}"
                    )))
                }
            }
        }
    }

    // Regex grammar: union < concatenation (juxtaposition or `.`) < `*`.
    fn regex(&mut self) -> Result<Regex, SyntaxError> {
        let mut parts = vec![self.regex_concat()?];
        while self.peek() == &Tok::Punct("|") {
            self.next();
            parts.push(self.regex_concat()?);
        }
        Ok(Regex::or_all(parts))
    }

    fn regex_concat(&mut self) -> Result<Regex, SyntaxError> {
        let mut parts = vec![self.regex_postfix()?];
        loop {
            if self.peek() == &Tok::Punct(".") {
                self.next();
                parts.push(self.regex_postfix()?);
                continue;
            }
            let starts_primary = matches!(
                self.peek(),
                Tok::Str(_) | Tok::Class(..) | Tok::Punct("(")
            ) || matches!(self.peek(), Tok::Ident(s) if !is_keyword(s));
            if starts_primary {
                parts.push(self.regex_postfix()?);
            } else {
                break;
            }
        }
        Ok(if parts.len() == 1 {
            parts.pop().unwrap()
        } else {
            Regex::concat_all(parts)
        })
    }

    fn regex_postfix(&mut self) -> Result<Regex, SyntaxError> {
        let mut r = self.regex_primary()?;
        while self.peek() == &Tok::Punct("*") {
            self.next();
            r = Regex::star(r);
        }
        Ok(r)
    }

    fn regex_primary(&mut self) -> Result<Regex, SyntaxError> {
        match self.peek().clone() {
            Tok::Str(s) => {
                self.next();
                Ok(Regex::lit(s))
            }
            Tok::Class(raw, members) => {
                self.next();
                if !self.spec.char_classes.iter().any(|(r, _)| r == &raw) {
                    let expansion =
                        Regex::or_all(members.iter().map(|c| Regex::lit(c.to_string())));
                    self.spec.char_classes.push((raw.clone(), expansion));
                }
                let (_, expansion) = self
                    .spec
                    .char_classes
                    .iter()
                    .find(|(r, _)| r == &raw)
                    .unwrap();
                Ok(expansion.clone())
            }
            Tok::Ident(s) if s == "empty" => {
                self.next();
                Ok(Regex::Empty)
            }
            Tok::Ident(s) if !is_keyword(&s) => {
                self.next();
                Ok(Regex::var(s))
            }
            Tok::Punct("(") => {
                self.next();
                let r = self.regex()?;
                self.expect(")")?;
                Ok(r)
            }
            other => Err(self.error(format!("expected a regex, found {other}"))),
        }
    }

    // Lens grammar: `;` < `|` < `.` < primary.
    fn lens(&mut self) -> Result<Lens, SyntaxError> {
        let mut l = self.lens_or()?;
        while self.peek() == &Tok::Punct(";") {
            // `;` also ends the declaration, so compose only when a lens
            // follows. A declaration always ends `;` then a keyword or EOF.
            let after = &self.tokens[self.pos + 1].tok;
            let ends = matches!(after, Tok::Eof)
                || matches!(after, Tok::Ident(s) if is_item_keyword(s));
            if ends {
                break;
            }
            self.next();
            l = Lens::compose(l, self.lens_or()?);
        }
        Ok(l)
    }

    fn lens_or(&mut self) -> Result<Lens, SyntaxError> {
        let mut l = self.lens_concat()?;
        while self.peek() == &Tok::Punct("|") {
            self.next();
            l = Lens::or(l, self.lens_concat()?);
        }
        Ok(l)
    }

    fn lens_concat(&mut self) -> Result<Lens, SyntaxError> {
        let mut l = self.lens_primary()?;
        while self.peek() == &Tok::Punct(".") {
            self.next();
            l = Lens::concat(l, self.lens_primary()?);
        }
        Ok(l)
    }

    fn lens_primary(&mut self) -> Result<Lens, SyntaxError> {
        match self.peek().clone() {
            Tok::Ident(kw) if kw == "const" => {
                self.next();
                self.expect("(")?;
                let s = self.string()?;
                self.expect(",")?;
                let t = self.string()?;
                self.expect(")")?;
                Ok(Lens::constant(s, t))
            }
            Tok::Ident(kw) if kw == "swap" => {
                self.next();
                self.expect("(")?;
                let a = self.lens()?;
                self.expect(",")?;
                let b = self.lens()?;
                self.expect(")")?;
                Ok(Lens::swap(a, b))
            }
            Tok::Ident(kw) if kw == "iterate" => {
                self.next();
                self.expect("(")?;
                let a = self.lens()?;
                self.expect(")")?;
                Ok(Lens::iterate(a))
            }
            Tok::Ident(kw) if kw == "id" => {
                self.next();
                self.expect("(")?;
                let r = self.regex()?;
                self.expect(")")?;
                Ok(Lens::Identity(r))
            }
            Tok::Ident(name) if !is_keyword(&name) => {
                self.next();
                match self.spec.lens_decls.iter().find(|(n, _)| n == &name) {
                    Some((_, inner)) => Ok(Lens::reference(name, inner.clone())),
                    None => Err(self.error(format!("unknown lens `{name}`"))),
                }
            }
            Tok::Punct("(") => {
                self.next();
                let l = self.lens()?;
                self.expect(")")?;
                Ok(l)
            }
            other => Err(self.error(format!("expected a lens, found {other}"))),
        }
    }
}

fn is_keyword(s: &str) -> bool {
    matches!(
        s,
        "typedef" | "synth" | "lens" | "with" | "empty" | "const" | "swap" | "iterate" | "id"
    )
}

fn is_item_keyword(s: &str) -> bool {
    matches!(s, "typedef" | "synth" | "lens")
}

// -------------------------------------------------------------- printing

/// Render a spec file in the concrete syntax; the result parses back to
/// structurally equal contents (character classes print expanded).
pub fn print_spec(spec: &SpecFile) -> String {
    let mut out = String::new();
    for (name, body) in spec.definitions.iter() {
        out.push_str(&format!("typedef {name} = {body};\n"));
    }
    for task in &spec.tasks {
        out.push_str(&format!(
            "synth {} : {} <=> {}",
            task.name, task.source, task.target
        ));
        if !task.examples.is_empty() {
            out.push_str(" with {\n");
            for (a, b) in &task.examples {
                out.push_str(&format!(
                    "  \"{}\" <-> \"{}\",\n",
                    escape_literal(a),
                    escape_literal(b)
                ));
            }
            out.push('}');
        }
        out.push_str(";\n");
    }
    for (name, l) in &spec.lens_decls {
        out.push_str(&format!("lens {name} = {l};\n"));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(text: &str) -> SpecFile {
        parse_spec_str(text).unwrap()
    }

    #[test]
    fn empty_file_parses_to_nothing() {
        let spec = parse("");
        assert_eq!(spec.definitions.iter().count(), 0);
        assert!(spec.tasks.is_empty());
        assert!(spec.lens_decls.is_empty());
        let spec = parse("// just a comment\n# and another\n");
        assert!(spec.tasks.is_empty());
    }

    #[test]
    fn title_style_definitions_parse() {
        let spec = parse(concat!(
            "typedef text_char = [a-c];\n",
            "typedef legacy_title = \"<Field Id=2>\" text_char* \"</Field>\";\n",
            "typedef modern_title = (\"Title: \" text_char* text_char \",\") | \"\";\n",
            "synth title : legacy_title <=> modern_title;\n",
        ));
        let tc = Regex::or_all(vec![Regex::lit("a"), Regex::lit("b"), Regex::lit("c")]);
        assert_eq!(spec.definitions.lookup("text_char"), Some(&tc));
        assert_eq!(
            spec.definitions.lookup("legacy_title"),
            Some(&Regex::concat_all(vec![
                Regex::lit("<Field Id=2>"),
                Regex::star(Regex::var("text_char")),
                Regex::lit("</Field>"),
            ]))
        );
        assert_eq!(
            spec.definitions.lookup("modern_title"),
            Some(&Regex::or(
                Regex::concat_all(vec![
                    Regex::lit("Title: "),
                    Regex::star(Regex::var("text_char")),
                    Regex::var("text_char"),
                    Regex::lit(","),
                ]),
                Regex::lit(""),
            ))
        );
        assert_eq!(spec.tasks.len(), 1);
        assert_eq!(spec.tasks[0].source, Regex::var("legacy_title"));
        assert_eq!(spec.char_classes.len(), 1);
        assert_eq!(spec.char_classes[0].0, "[a-c]");
    }

    #[test]
    fn examples_and_dots_parse() {
        let spec = parse(concat!(
            "synth t : \"a\" . \"b\"* <=> \"x\" (\"y\" | \"z\")\n",
            "  with { \"ab\" <-> \"xy\", \"a\" <-> \"xz\" };\n",
        ));
        let t = &spec.tasks[0];
        assert_eq!(
            t.source,
            Regex::concat(Regex::lit("a"), Regex::star(Regex::lit("b")))
        );
        assert_eq!(
            t.target,
            Regex::concat(
                Regex::lit("x"),
                Regex::or(Regex::lit("y"), Regex::lit("z"))
            )
        );
        assert_eq!(
            t.examples,
            vec![
                ("ab".to_string(), "xy".to_string()),
                ("a".to_string(), "xz".to_string())
            ]
        );
    }

    #[test]
    fn lens_declarations_parse_with_precedence() {
        let spec = parse(concat!(
            "lens base = const(\"a\", \"x\") | const(\"b\", \"y\");\n",
            "lens chain = base ; id(\"x\" | \"y\") . id(\"\");\n",
            "lens nested = swap(iterate(base), id(empty));\n",
        ));
        let base = Lens::or(Lens::constant("a", "x"), Lens::constant("b", "y"));
        assert_eq!(spec.lens_decls[0].1, base);
        assert_eq!(
            spec.lens_decls[1].1,
            Lens::compose(
                Lens::reference("base", base.clone()),
                Lens::concat(
                    Lens::Identity(Regex::or(Regex::lit("x"), Regex::lit("y"))),
                    Lens::Identity(Regex::lit("")),
                )
            )
        );
        assert_eq!(
            spec.lens_decls[2].1,
            Lens::swap(
                Lens::iterate(Lens::reference("base", base)),
                Lens::Identity(Regex::Empty)
            )
        );
    }

    #[test]
    fn escapes_round_trip() {
        let text = "typedef odd = \"a\\\"b\\\\c\\nd\\te\";\n";
        let spec = parse(text);
        assert_eq!(
            spec.definitions.lookup("odd"),
            Some(&Regex::lit("a\"b\\c\nd\te"))
        );
        let printed = print_spec(&spec);
        let spec2 = parse(&printed);
        assert_eq!(
            spec.definitions.lookup("odd"),
            spec2.definitions.lookup("odd")
        );
    }

    #[test]
    fn printing_round_trips_structurally() {
        let text = concat!(
            "typedef c = [ab];\n",
            "typedef u = c* \"!\" | \"\";\n",
            "synth t : u <=> u with { \"ab!\" <-> \"ab!\" };\n",
            "lens l = const(\"\", \"\") | (id(c) ; id(c));\n",
        );
        let spec = parse(text);
        let printed = print_spec(&spec);
        let spec2 = parse(&printed);
        assert_eq!(
            spec.definitions.iter().collect::<Vec<_>>(),
            spec2.definitions.iter().collect::<Vec<_>>()
        );
        assert_eq!(spec.tasks, spec2.tasks);
        assert_eq!(spec.lens_decls, spec2.lens_decls);
        // Printing is a fixpoint from the first print on.
        assert_eq!(printed, print_spec(&spec2));
    }

    #[test]
    fn errors_carry_positions() {
        let e = parse_spec_str("typedef x = \"a\"").unwrap_err();
        assert_eq!((e.line, e.col), (1, 16));
        let e = parse_spec_str("typedef x = \"a\";\nsynth \"s\" : x <=> x;").unwrap_err();
        assert_eq!(e.line, 2);
        assert!(e.msg.contains("task name"), "{}", e.msg);
        let e = parse_spec_str("lens l = missing;").unwrap_err();
        assert!(e.msg.contains("unknown lens"), "{}", e.msg);
        let e = parse_spec_str("typedef x = y;").unwrap_err();
        assert!(e.msg.contains("unbound"), "{}", e.msg);
        let e = parse_spec_str("typedef x = \"a\";\ntypedef x = \"b\";").unwrap_err();
        assert!(e.msg.contains("already defined"), "{}", e.msg);
        let e = parse_spec_str("typedef x = \"é\";").unwrap_err();
        assert!(e.msg.contains("non-ASCII"), "{}", e.msg);
    }

    #[test]
    fn class_edge_cases() {
        let spec = parse("typedef d = [0-9];\ntypedef sym = [\\-\\]x];\n");
        let digits: Vec<Regex> = ('0'..='9').map(|c| Regex::lit(c.to_string())).collect();
        assert_eq!(spec.definitions.lookup("d"), Some(&Regex::or_all(digits)));
        assert_eq!(
            spec.definitions.lookup("sym"),
            Some(&Regex::or_all(vec![
                Regex::lit("-"),
                Regex::lit("]"),
                Regex::lit("x"),
            ]))
        );
        assert!(parse_spec_str("typedef bad = [z-a];").is_err());
    }
}
