//! Attribute-value matrix text format.
//!
//! ```text
//! value  := tag? body | tag
//! tag    := "[" digits "]"
//! body   := "[" sort? (PATH value | "!" PATH value)* "]"
//!         | "<" (value ("," value)* ("|" value)?)? ">"
//!         | "{" (value ("," value)* ("|" value)?)? "}"
//!         | sort
//! PATH   := FEATURE ("|" FEATURE)*
//! ```
//!
//! Sorts are lower case, features upper case. A tag is printed with its value
//! on first occurrence and bare afterwards. `<a, b>` is a FIRST/REST chain
//! ending in `elist`, `{a}` the same with `neset`/`eset`. `!PATH v` attaches a
//! negative constraint to the enclosing node. At the root of a sign, `PHON`
//! takes a list of quoted word forms.

use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

use super::dag::Dag;
use super::fs::{FeatureStructure, Graph, NegConstraint, NodeId};
use super::signature::{Feature, Signature, Sort};

const WIDTH: usize = 72;

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
#[error("{line}:{col}: {message}")]
pub struct AvmError {
    pub line: usize,
    pub col: usize,
    pub message: String,
}

/// Multi-line rendering of a structure.
pub fn render(sig: &Signature, fs: &FeatureStructure) -> String {
    Renderer::new(sig, &fs.graph, &[fs.root()], true).root(fs.root(), None)
}

/// Single-line rendering.
pub fn render_inline(sig: &Signature, fs: &FeatureStructure) -> String {
    Renderer::new(sig, &fs.graph, &[fs.root()], false).root(fs.root(), None)
}

/// Renders a sign: a structure with its PHON list shown at the root.
pub fn render_with_phon(sig: &Signature, fs: &FeatureStructure, phon: &[String], pretty: bool) -> String {
    Renderer::new(sig, &fs.graph, &[fs.root()], pretty).root(fs.root(), Some(phon))
}

/// Renders several roots of one graph with a shared tag numbering.
pub fn render_roots(sig: &Signature, graph: &Graph, roots: &[NodeId], pretty: bool) -> Vec<String> {
    let mut r = Renderer::new(sig, graph, roots, pretty);
    roots.iter().map(|&n| r.root(n, None)).collect()
}

struct Renderer<'a> {
    sig: &'a Signature,
    graph: &'a Graph,
    refs: Vec<usize>,
    tags: HashMap<NodeId, usize>,
    pretty: bool,
    by_anchor: HashMap<NodeId, Vec<&'a NegConstraint>>,
    kinds: Option<[Sort; 6]>,
}

impl<'a> Renderer<'a> {
    fn new(sig: &'a Signature, graph: &'a Graph, roots: &[NodeId], pretty: bool) -> Self {
        let mut refs = vec![0; graph.len()];
        let mut seen = vec![false; graph.len()];
        let mut stack: Vec<NodeId> = roots.to_vec();
        for &r in roots {
            refs[r.index()] += 1;
        }
        while let Some(n) = stack.pop() {
            if std::mem::replace(&mut seen[n.index()], true) {
                continue;
            }
            for &(_, t) in graph.arcs(n) {
                refs[t.index()] += 1;
                stack.push(t);
            }
        }
        let mut by_anchor: HashMap<NodeId, Vec<&NegConstraint>> = HashMap::new();
        for c in graph.constraints() {
            by_anchor.entry(c.anchor).or_default().push(c);
        }
        let kinds = (|| {
            Some([
                sig.sort("list")?,
                sig.sort("elist")?,
                sig.sort("nelist")?,
                sig.sort("set")?,
                sig.sort("eset")?,
                sig.sort("neset")?,
            ])
        })();
        Renderer { sig, graph, refs, tags: HashMap::new(), pretty, by_anchor, kinds }
    }

    fn root(&mut self, n: NodeId, phon: Option<&[String]>) -> String {
        match phon {
            None => self.value(n),
            Some(words) => {
                let phon = format!(
                    "<{}>",
                    words.iter().map(|w| format!("{w:?}")).collect::<Vec<_>>().join(", ")
                );
                self.matrix(n, vec![("PHON".to_string(), phon)])
            }
        }
    }

    fn value(&mut self, n: NodeId) -> String {
        if self.refs[n.index()] > 1 {
            if let Some(t) = self.tags.get(&n) {
                return format!("[{t}]");
            }
            let t = self.tags.len() + 1;
            self.tags.insert(n, t);
            let body = self.body(n);
            return format!("[{t}] {body}");
        }
        self.body(n)
    }

    fn body(&mut self, n: NodeId) -> String {
        let sort = self.graph.sort(n);
        let plain = !self.by_anchor.contains_key(&n);
        if plain {
            if let Some(k) = self.kinds {
                let empty_list = sort == k[1];
                let empty_set = sort == k[4];
                if (empty_list || empty_set) && self.graph.arcs(n).is_empty() {
                    return if empty_list { "<>".into() } else { "{}".into() };
                }
                if let Some(set) = self.chain_kind(n) {
                    return self.chain(n, set);
                }
            }
        }
        if plain && self.graph.arcs(n).is_empty() {
            return self.sig.sort_name(sort).to_string();
        }
        self.matrix(n, Vec::new())
    }

    /// `Some(is_set)` if `n` is a cons cell with exactly FIRST and REST.
    fn chain_kind(&self, n: NodeId) -> Option<bool> {
        let k = self.kinds?;
        let sort = self.graph.sort(n);
        let is_list = self.sig.is_subsort(sort, k[2]);
        let is_set = self.sig.is_subsort(sort, k[5]);
        if !(is_list || is_set) || self.by_anchor.contains_key(&n) {
            return None;
        }
        let arcs = self.graph.arcs(n);
        let names: Vec<&str> = arcs.iter().map(|(f, _)| self.sig.feature_name(*f)).collect();
        if names.len() == 2 && names.contains(&"FIRST") && names.contains(&"REST") {
            Some(is_set)
        } else {
            None
        }
    }

    fn chain(&mut self, start: NodeId, set: bool) -> String {
        let k = self.kinds.expect("chain sorts present");
        let first = self.sig.feature("FIRST").unwrap();
        let rest = self.sig.feature("REST").unwrap();
        let (open, close, empty) = if set { ('{', '}', k[4]) } else { ('<', '>', k[1]) };
        let mut items = Vec::new();
        let mut n = start;
        let tail = loop {
            items.push(self.value(self.graph.arc(n, first).unwrap()));
            let next = self.graph.arc(n, rest).unwrap();
            if self.refs[next.index()] == 1 && self.chain_kind(next) == Some(set) {
                n = next;
                continue;
            }
            if self.refs[next.index()] == 1
                && self.graph.sort(next) == empty
                && self.graph.arcs(next).is_empty()
                && !self.by_anchor.contains_key(&next)
            {
                break None;
            }
            break Some(self.value(next));
        };
        let multiline = self.pretty
            && (items.iter().any(|i| i.contains('\n'))
                || items.iter().map(|i| i.len() + 2).sum::<usize>() > WIDTH);
        let mut out = String::new();
        out.push(open);
        for (i, item) in items.iter().enumerate() {
            if i > 0 {
                out.push_str(if multiline { ",\n " } else { ", " });
            }
            out.push_str(&indent(item, 1));
        }
        if let Some(t) = tail {
            out.push_str(if multiline { "\n | " } else { " | " });
            out.push_str(&indent(&t, 3));
        }
        out.push(close);
        out
    }

    fn matrix(&mut self, n: NodeId, mut lines: Vec<(String, String)>) -> String {
        let sort = self.sig.sort_name(self.graph.sort(n)).to_string();
        for &(f, t) in self.graph.arcs(n) {
            let v = self.value(t);
            lines.push((self.sig.feature_name(f).to_string(), v));
        }
        if let Some(cs) = self.by_anchor.get(&n).cloned() {
            for c in cs {
                let v = Renderer::new(self.sig, &c.forbidden.graph, &[NodeId(0)], self.pretty)
                    .value(NodeId(0));
                lines.push((format!("!{}", self.sig.path_string(&c.path)), v));
            }
        }
        let inline = format!(
            "[{sort}{}]",
            lines.iter().map(|(f, v)| format!(" {f} {v}")).collect::<String>()
        );
        if !self.pretty || (inline.len() <= WIDTH && !inline.contains('\n')) {
            return inline;
        }
        let mut out = format!("[{sort}");
        for (f, v) in &lines {
            out.push_str("\n  ");
            out.push_str(f);
            out.push(' ');
            out.push_str(&indent(v, 2));
        }
        out.push(']');
        out
    }
}

fn indent(text: &str, by: usize) -> String {
    let pad = " ".repeat(by);
    text.replace('\n', &format!("\n{pad}"))
}

// ---------------------------------------------------------------------------
// parsing

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    LBrack,
    RBrack,
    Tag(u32),
    LAngle,
    RAngle,
    LBrace,
    RBrace,
    Comma,
    Bar,
    Bang,
    Ident(String),
    Str(String),
    Eof,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::LBrack => write!(f, "`[`"),
            Tok::RBrack => write!(f, "`]`"),
            Tok::Tag(t) => write!(f, "tag [{t}]"),
            Tok::LAngle => write!(f, "`<`"),
            Tok::RAngle => write!(f, "`>`"),
            Tok::LBrace => write!(f, "`{{`"),
            Tok::RBrace => write!(f, "`}}`"),
            Tok::Comma => write!(f, "`,`"),
            Tok::Bar => write!(f, "`|`"),
            Tok::Bang => write!(f, "`!`"),
            Tok::Ident(s) => write!(f, "`{s}`"),
            Tok::Str(s) => write!(f, "{s:?}"),
            Tok::Eof => write!(f, "end of input"),
        }
    }
}

fn lex(text: &str) -> Result<Vec<(Tok, usize, usize)>, AvmError> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0, 1, 1);
    let err = |line, col, message: String| AvmError { line, col, message };
    while i < chars.len() {
        let c = chars[i];
        let (l, cl) = (line, col);
        let mut advance = |n: usize, i: &mut usize| {
            for _ in 0..n {
                if chars[*i] == '\n' {
                    line += 1;
                    col = 1;
                } else {
                    col += 1;
                }
                *i += 1;
            }
        };
        if c.is_whitespace() {
            advance(1, &mut i);
            continue;
        }
        let simple = match c {
            ']' => Some(Tok::RBrack),
            '<' => Some(Tok::LAngle),
            '>' => Some(Tok::RAngle),
            '{' => Some(Tok::LBrace),
            '}' => Some(Tok::RBrace),
            ',' => Some(Tok::Comma),
            '|' => Some(Tok::Bar),
            '!' => Some(Tok::Bang),
            _ => None,
        };
        if let Some(t) = simple {
            out.push((t, l, cl));
            advance(1, &mut i);
            continue;
        }
        if c == '[' {
            let mut j = i + 1;
            while j < chars.len() && chars[j].is_ascii_digit() {
                j += 1;
            }
            if j > i + 1 && j < chars.len() && chars[j] == ']' {
                let digits: String = chars[i + 1..j].iter().collect();
                let t = digits.parse().map_err(|_| err(l, cl, "tag out of range".into()))?;
                out.push((Tok::Tag(t), l, cl));
                advance(j + 1 - i, &mut i);
            } else {
                out.push((Tok::LBrack, l, cl));
                advance(1, &mut i);
            }
            continue;
        }
        if c == '"' {
            let mut j = i + 1;
            let mut s = String::new();
            while j < chars.len() && chars[j] != '"' {
                if chars[j] == '\\' && j + 1 < chars.len() {
                    j += 1;
                }
                s.push(chars[j]);
                j += 1;
            }
            if j >= chars.len() {
                return Err(err(l, cl, "unterminated string".into()));
            }
            out.push((Tok::Str(s), l, cl));
            advance(j + 1 - i, &mut i);
            continue;
        }
        if is_ident_char(c) {
            let mut j = i;
            while j < chars.len() && is_ident_char(chars[j]) {
                j += 1;
            }
            out.push((Tok::Ident(chars[i..j].iter().collect()), l, cl));
            advance(j - i, &mut i);
            continue;
        }
        return Err(err(l, cl, format!("unexpected character `{c}`")));
    }
    out.push((Tok::Eof, line, col));
    Ok(out)
}

fn is_ident_char(c: char) -> bool {
    c.is_ascii_alphanumeric() || matches!(c, '-' | '_' | '*' | '+' | '.')
}

fn is_feature(s: &str) -> bool {
    s.starts_with(|c: char| c.is_ascii_uppercase())
}

struct Parser<'t, 's> {
    toks: &'t [(Tok, usize, usize)],
    pos: usize,
    dag: Dag<'s>,
    sig: &'s Signature,
    tags: HashMap<u32, NodeId>,
    phon: Option<Vec<String>>,
    allow_phon: bool,
}

impl<'t, 's> Parser<'t, 's> {
    fn new(sig: &'s Signature, toks: &'t [(Tok, usize, usize)], pos: usize) -> Self {
        Parser {
            toks,
            pos,
            dag: Dag::new(sig),
            sig,
            tags: HashMap::new(),
            phon: None,
            allow_phon: false,
        }
    }

    fn peek(&self) -> &Tok {
        &self.toks[self.pos].0
    }

    fn next(&mut self) -> Tok {
        let t = self.toks[self.pos].0.clone();
        if t != Tok::Eof {
            self.pos += 1;
        }
        t
    }

    fn error(&self, message: impl Into<String>) -> AvmError {
        let (_, line, col) = self.toks[self.pos.min(self.toks.len() - 1)];
        AvmError { line, col, message: message.into() }
    }

    fn error_at(&self, pos: usize, message: impl Into<String>) -> AvmError {
        let (_, line, col) = self.toks[pos];
        AvmError { line, col, message: message.into() }
    }

    fn expect(&mut self, t: Tok) -> Result<(), AvmError> {
        if *self.peek() == t {
            self.next();
            Ok(())
        } else {
            Err(self.error(format!("expected {t}, found {}", self.peek())))
        }
    }

    fn starts_body(&self) -> bool {
        match self.peek() {
            Tok::LBrack | Tok::LAngle | Tok::LBrace => true,
            Tok::Ident(s) => !is_feature(s),
            _ => false,
        }
    }

    fn value(&mut self) -> Result<NodeId, AvmError> {
        if let Tok::Tag(t) = *self.peek() {
            self.next();
            let top = self.sig.top();
            let node = match self.tags.get(&t) {
                Some(&n) => n,
                None => {
                    let n = self.dag.add_node(top);
                    self.tags.insert(t, n);
                    n
                }
            };
            if self.starts_body() {
                let at = self.pos;
                let b = self.body()?;
                self.dag
                    .unify(node, b)
                    .map_err(|c| self.error_at(at, format!("tag [{t}]: {c}")))?;
            }
            return Ok(node);
        }
        self.body()
    }

    fn body(&mut self) -> Result<NodeId, AvmError> {
        let at = self.pos;
        match self.next() {
            Tok::LBrack => self.matrix(),
            Tok::LAngle => self.sequence(false),
            Tok::LBrace => self.sequence(true),
            Tok::Ident(s) if !is_feature(&s) => {
                let sort = self.sort(&s, at)?;
                Ok(self.dag.add_node(sort))
            }
            t => Err(self.error_at(at, format!("expected a value, found {t}"))),
        }
    }

    fn sort(&self, name: &str, at: usize) -> Result<Sort, AvmError> {
        self.sig
            .sort(name)
            .ok_or_else(|| self.error_at(at, format!("unknown sort `{name}`")))
    }

    fn path(&mut self) -> Result<Vec<Feature>, AvmError> {
        let mut path = Vec::new();
        loop {
            let at = self.pos;
            match self.next() {
                Tok::Ident(f) if is_feature(&f) => path.push(
                    self.sig
                        .feature(&f)
                        .ok_or_else(|| self.error_at(at, format!("unknown feature `{f}`")))?,
                ),
                t => return Err(self.error_at(at, format!("expected a feature, found {t}"))),
            }
            if *self.peek() == Tok::Bar {
                self.next();
            } else {
                return Ok(path);
            }
        }
    }

    fn matrix(&mut self) -> Result<NodeId, AvmError> {
        let root_level = std::mem::replace(&mut self.allow_phon, false);
        let node = self.dag.add_node(self.sig.top());
        if let Tok::Ident(s) = self.peek().clone() {
            if !is_feature(&s) {
                let at = self.pos;
                self.next();
                let sort = self.sort(&s, at)?;
                self.dag.constrain(node, sort).map_err(|c| self.error_at(at, c.to_string()))?;
            }
        }
        loop {
            match self.peek().clone() {
                Tok::RBrack => {
                    self.next();
                    return Ok(node);
                }
                Tok::Ident(f) if f == "PHON" && root_level => {
                    self.next();
                    self.phon = Some(self.words()?);
                }
                Tok::Ident(f) if is_feature(&f) => {
                    let at = self.pos;
                    let path = self.path()?;
                    let v = self.value()?;
                    let end = self
                        .dag
                        .follow_or_create(node, &path)
                        .map_err(|c| self.error_at(at, c.to_string()))?;
                    self.dag
                        .unify(end, v)
                        .map_err(|c| self.error_at(at, c.within(&self.sig.path_string(&path)).to_string()))?;
                }
                Tok::Bang => {
                    self.next();
                    let path = self.path()?;
                    let mut sub = Parser::new(self.sig, self.toks, self.pos);
                    let root = sub.value()?;
                    let forbidden = sub.dag.extract_fs(root);
                    self.pos = sub.pos;
                    self.dag.add_constraint(node, path, Arc::new(forbidden));
                }
                t => return Err(self.error(format!("expected a feature or `]`, found {t}"))),
            }
        }
    }

    fn words(&mut self) -> Result<Vec<String>, AvmError> {
        self.expect(Tok::LAngle)?;
        let mut words = Vec::new();
        loop {
            match self.next() {
                Tok::RAngle => return Ok(words),
                Tok::Str(s) => {
                    words.push(s);
                    match self.peek() {
                        Tok::Comma => {
                            self.next();
                        }
                        Tok::RAngle => {}
                        t => return Err(self.error(format!("expected `,` or `>`, found {t}"))),
                    }
                }
                t => return Err(self.error(format!("expected a quoted word, found {t}"))),
            }
        }
    }

    fn sequence(&mut self, set: bool) -> Result<NodeId, AvmError> {
        let close = if set { Tok::RBrace } else { Tok::RAngle };
        let (empty, cons) = if set { ("eset", "neset") } else { ("elist", "nelist") };
        let empty = self.sort(empty, self.pos)?;
        let cons = self.sort(cons, self.pos)?;
        let first = self.sig.feature("FIRST").ok_or_else(|| self.error("FIRST undeclared"))?;
        let rest = self.sig.feature("REST").ok_or_else(|| self.error("REST undeclared"))?;
        let mut items = Vec::new();
        let mut tail = None;
        if *self.peek() != close {
            loop {
                items.push(self.value()?);
                match self.peek() {
                    Tok::Comma => {
                        self.next();
                    }
                    Tok::Bar => {
                        self.next();
                        tail = Some(self.value()?);
                        break;
                    }
                    _ => break,
                }
            }
        }
        self.expect(close)?;
        let mut next = match tail {
            Some(t) => t,
            None => self.dag.add_node(empty),
        };
        for item in items.into_iter().rev() {
            let cell = self.dag.add_node(cons);
            let at = self.pos;
            self.dag
                .set_arc_typed(cell, first, item)
                .and_then(|_| self.dag.set_arc_typed(cell, rest, next))
                .map_err(|c| self.error_at(at.saturating_sub(1), c.to_string()))?;
            next = cell;
        }
        Ok(next)
    }
}

/// Parses a structure. The result is well-typed and canonical.
pub fn parse(sig: &Signature, text: &str) -> Result<FeatureStructure, AvmError> {
    parse_with_phon(sig, text).map(|(fs, _)| fs)
}

/// Parses a structure whose root matrix may carry `PHON <"w", ...>`.
pub fn parse_with_phon(sig: &Signature, text: &str) -> Result<(FeatureStructure, Option<Vec<String>>), AvmError> {
    let toks = lex(text)?;
    let mut p = Parser::new(sig, &toks, 0);
    p.allow_phon = true;
    let root = p.value()?;
    if *p.peek() != Tok::Eof {
        return Err(p.error(format!("trailing input: {}", p.peek())));
    }
    p.dag
        .check_constraints()
        .map_err(|c| AvmError { line: 1, col: 1, message: c.to_string() })?;
    Ok((p.dag.extract_fs(root), p.phon))
}
