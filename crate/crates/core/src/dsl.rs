//! Text notation for setups.
//!
//! An element is written `Name[input,arg,...]`, where `input` is a placeholder
//! (`ψ`, `psi` or `XXX`) or another element, which is then applied first.
//! Elements may be separated by commas, whitespace, newlines, quotes or
//! arrows (`->`, `→`). `#` starts a comment.
//!
//! A setup file may start with `@key value` directives, see [`SetupDocument`].

use crate::detect::Trigger;
use crate::elements::BsConvention;
use crate::error::{Error, ParseError, ParseErrorKind, Result};
use crate::mode::{PathAlphabet, PathId};
use crate::setup::{Element, ElementKind, ExperimentConfig};

const PLACEHOLDERS: [&str; 3] = ["ψ", "psi", "XXX"];

struct Parser<'a> {
    chars: Vec<char>,
    pos: usize,
    line: usize,
    col: usize,
    alphabet: &'a PathAlphabet,
}

struct Token {
    text: String,
    line: usize,
    col: usize,
}

impl<'a> Parser<'a> {
    fn new(text: &str, alphabet: &'a PathAlphabet) -> Self {
        Parser {
            chars: text.chars().collect(),
            pos: 0,
            line: 1,
            col: 1,
            alphabet,
        }
    }

    fn peek(&self) -> Option<char> {
        self.chars.get(self.pos).copied()
    }

    fn peek_at(&self, k: usize) -> Option<char> {
        self.chars.get(self.pos + k).copied()
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.peek()?;
        self.pos += 1;
        if c == '\n' {
            self.line += 1;
            self.col = 1;
        } else {
            self.col += 1;
        }
        Some(c)
    }

    fn err(&self, line: usize, col: usize, kind: ParseErrorKind) -> ParseError {
        ParseError { line, column: col, kind }
    }

    fn here(&self, kind: ParseErrorKind) -> ParseError {
        self.err(self.line, self.col, kind)
    }

    fn skip_separators(&mut self) {
        while let Some(c) = self.peek() {
            match c {
                c if c.is_whitespace() => {
                    self.bump();
                }
                ',' | '"' | '→' => {
                    self.bump();
                }
                '-' if self.peek_at(1) == Some('>') => {
                    self.bump();
                    self.bump();
                }
                '\\' if self.peek_at(1) == Some('t') && self.peek_at(2) == Some('o') => {
                    for _ in 0..3 {
                        self.bump();
                    }
                }
                '#' => {
                    while let Some(c) = self.peek() {
                        if c == '\n' {
                            break;
                        }
                        self.bump();
                    }
                }
                _ => break,
            }
        }
    }

    fn skip_ws(&mut self) {
        while self.peek().is_some_and(|c| c.is_whitespace()) {
            self.bump();
        }
    }

    /// Reads up to the next delimiter.
    fn word(&mut self) -> Token {
        self.skip_ws();
        let (line, col) = (self.line, self.col);
        let mut text = String::new();
        while let Some(c) = self.peek() {
            if c == '[' || c == ']' || c == ',' || c == '"' || c.is_whitespace() {
                break;
            }
            text.push(c);
            self.bump();
        }
        Token { text, line, col }
    }

    fn expect(&mut self, want: char) -> std::result::Result<(), ParseError> {
        self.skip_ws();
        match self.peek() {
            Some(c) if c == want => {
                self.bump();
                Ok(())
            }
            Some(c) => Err(self.here(ParseErrorKind::Syntax(format!(
                "expected `{want}`, found `{c}`"
            )))),
            None => Err(self.here(ParseErrorKind::Syntax(format!(
                "expected `{want}`, found end of input"
            )))),
        }
    }

    fn document(&mut self) -> std::result::Result<Vec<Element>, ParseError> {
        let mut out = Vec::new();
        loop {
            self.skip_separators();
            if self.peek().is_none() {
                return Ok(out);
            }
            self.element(&mut out)?;
        }
    }

    fn element(&mut self, out: &mut Vec<Element>) -> std::result::Result<(), ParseError> {
        let name = self.word();
        if name.text.is_empty() {
            let c = self.peek().unwrap_or(' ');
            return Err(self.here(ParseErrorKind::Syntax(format!("unexpected `{c}`"))));
        }
        let kind = ElementKind::from_name(&name.text).ok_or_else(|| {
            self.err(name.line, name.col, ParseErrorKind::UnknownElement(name.text.clone()))
        })?;
        self.expect('[')?;

        // input: a placeholder or a nested element
        let save = (self.pos, self.line, self.col);
        let target = self.word();
        self.skip_ws();
        if self.peek() == Some('[') {
            (self.pos, self.line, self.col) = save;
            self.element(out)?;
        } else if !PLACEHOLDERS.contains(&target.text.as_str()) {
            return Err(self.err(
                target.line,
                target.col,
                ParseErrorKind::Syntax(format!(
                    "expected an input placeholder (ψ, psi, XXX) or element, found `{}`",
                    target.text
                )),
            ));
        }

        let mut args = Vec::new();
        loop {
            self.skip_ws();
            match self.peek() {
                Some(',') => {
                    self.bump();
                    args.push(self.word());
                }
                Some(']') => {
                    self.bump();
                    break;
                }
                Some(c) => {
                    return Err(self.here(ParseErrorKind::Syntax(format!(
                        "expected `,` or `]`, found `{c}`"
                    ))))
                }
                None => {
                    return Err(self.here(ParseErrorKind::Syntax(
                        "unterminated element".into(),
                    )))
                }
            }
        }
        if args.len() != kind.arity() {
            return Err(self.err(
                name.line,
                name.col,
                ParseErrorKind::Arity {
                    element: name.text,
                    expected: kind.arity(),
                    found: args.len(),
                },
            ));
        }
        let mut paths = Vec::new();
        for a in &args[..kind.path_count()] {
            let mut cs = a.text.chars();
            let p = match (cs.next(), cs.next()) {
                (Some(c), None) => PathId::new(c).ok().filter(|p| self.alphabet.contains(*p)),
                _ => None,
            };
            paths.push(p.ok_or_else(|| {
                self.err(a.line, a.col, ParseErrorKind::UnknownPath(a.text.clone()))
            })?);
        }
        let param = if kind.has_param() {
            let a = &args[kind.path_count()];
            parse_int(&a.text)
                .ok_or_else(|| self.err(a.line, a.col, ParseErrorKind::MalformedInteger(a.text.clone())))?
        } else {
            0
        };
        out.push(Element::from_parts(kind, &paths, param));
        Ok(())
    }
}

fn parse_int(s: &str) -> Option<i32> {
    let s = s.replace('−', "-");
    let digits = s.strip_prefix(['-', '+']).unwrap_or(&s);
    if digits.is_empty() || !digits.chars().all(|c| c.is_ascii_digit()) {
        return None;
    }
    s.parse().ok()
}

/// Parses a setup using paths `a`..`f`.
pub fn parse_setup(text: &str) -> std::result::Result<ExperimentConfig, ParseError> {
    parse_setup_with(text, &PathAlphabet::default())
}

pub fn parse_setup_with(
    text: &str,
    alphabet: &PathAlphabet,
) -> std::result::Result<ExperimentConfig, ParseError> {
    Ok(ExperimentConfig::new(Parser::new(text, alphabet).document()?))
}

/// One element per line, composites expanded between name comments.
pub fn print_setup(config: &ExperimentConfig) -> String {
    let mut out = String::new();
    let mut first = true;
    print_into(&config.elements, &mut out, &mut first);
    out
}

fn print_into(elements: &[Element], out: &mut String, first: &mut bool) {
    for e in elements {
        if let Element::Composite(c) = e {
            out.push_str(&format!("# begin {}\n", c.name));
            print_into(&c.elements, out, first);
            out.push_str(&format!("# end {}\n", c.name));
            continue;
        }
        out.push_str(&e.to_dsl(if *first { "ψ" } else { "XXX" }));
        out.push('\n');
        *first = false;
    }
}

/// What a setup file asks to be computed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SetupMode {
    #[default]
    Srv,
    Cycle,
}

/// A setup together with its `@` directives:
///
/// ```text
/// @mode srv
/// @dc 1
/// @trigger |0>+|1>
/// @convention symmetric
/// @basis a,b
/// ```
#[derive(Debug, Clone, PartialEq, Default)]
pub struct SetupDocument {
    pub mode: SetupMode,
    pub dc: Option<u32>,
    pub trigger: Option<Trigger>,
    pub convention: Option<BsConvention>,
    pub basis_paths: Option<Vec<PathId>>,
    pub config: ExperimentConfig,
}

impl SetupDocument {
    pub fn parse(text: &str) -> Result<SetupDocument> {
        let mut doc = SetupDocument::default();
        let mut body = String::new();
        for (i, line) in text.lines().enumerate() {
            let t = line.trim();
            let Some(d) = t.strip_prefix('@') else {
                body.push_str(line);
                body.push('\n');
                continue;
            };
            body.push('\n');
            let bad = |msg: String| {
                Error::Parse(ParseError {
                    line: i + 1,
                    column: 1,
                    kind: ParseErrorKind::Syntax(msg),
                })
            };
            let (key, value) = d.split_once(char::is_whitespace).unwrap_or((d, ""));
            let value = value.trim();
            match key {
                "mode" => {
                    doc.mode = match value {
                        "srv" => SetupMode::Srv,
                        "cycle" => SetupMode::Cycle,
                        v => return Err(bad(format!("unknown mode `{v}`"))),
                    }
                }
                "dc" => {
                    doc.dc = Some(value.parse().map_err(|_| bad(format!("bad dc `{value}`")))?)
                }
                "trigger" => doc.trigger = Some(value.parse().map_err(|e: Error| bad(e.to_string()))?),
                "convention" => {
                    doc.convention = Some(value.parse().map_err(|e: Error| bad(e.to_string()))?)
                }
                "basis" => {
                    let ps = value
                        .split(',')
                        .map(|p| {
                            let mut cs = p.trim().chars();
                            match (cs.next(), cs.next()) {
                                (Some(c), None) => PathId::new(c),
                                _ => Err(Error::InvalidParameter(p.into())),
                            }
                        })
                        .collect::<Result<Vec<_>>>()
                        .map_err(|e| bad(e.to_string()))?;
                    doc.basis_paths = Some(ps);
                }
                k => return Err(bad(format!("unknown directive `@{k}`"))),
            }
        }
        doc.config = parse_setup(&body)?;
        Ok(doc)
    }

    pub fn print(&self) -> String {
        let mut out = String::new();
        out.push_str(match self.mode {
            SetupMode::Srv => "@mode srv\n",
            SetupMode::Cycle => "@mode cycle\n",
        });
        if let Some(dc) = self.dc {
            out.push_str(&format!("@dc {dc}\n"));
        }
        if let Some(t) = &self.trigger {
            out.push_str(&format!("@trigger {t}\n"));
        }
        if let Some(c) = self.convention {
            out.push_str(&format!("@convention {c}\n"));
        }
        if let Some(ps) = &self.basis_paths {
            let s: Vec<String> = ps.iter().map(|p| p.to_string()).collect();
            out.push_str(&format!("@basis {}\n", s.join(",")));
        }
        out.push_str(&print_setup(&self.config));
        out
    }
}
