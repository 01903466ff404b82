//! Judgment corpus, regression runner and renderers.
//!
//! A corpus file has one item per line, tab separated:
//!
//! ```text
//! id <TAB> G|* <TAB> tokens <TAB> label [<TAB> note]
//! ```
//!
//! Blank lines and lines starting with `#` are skipped.

pub mod render;

use std::cmp::Ordering;
use std::fmt;
use std::path::Path;

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::parser::{tokenize, ParseError, Parser};
pub use render::{render_avm, render_derivation, render_derivation_json, DerivationFormat};

pub const REPORT_SCHEMA: &str = "strand-report/1";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Judgment {
    Grammatical,
    Ungrammatical,
}

impl Judgment {
    pub fn mark(self) -> &'static str {
        match self {
            Judgment::Grammatical => "G",
            Judgment::Ungrammatical => "*",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CorpusItem {
    pub id: String,
    pub expected: Judgment,
    pub tokens: Vec<String>,
    pub label: String,
    pub note: Option<String>,
}

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("line {line}: {message}")]
    Line { line: usize, message: String },
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
}

/// Reads a corpus from text. Tokens are lower-cased and stripped of
/// punctuation.
pub fn parse_corpus(text: &str) -> Result<Vec<CorpusItem>, HarnessError> {
    let mut items: Vec<CorpusItem> = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let err = |message: String| HarnessError::Line { line, message };
        if raw.trim().is_empty() || raw.trim_start().starts_with('#') {
            continue;
        }
        let cols: Vec<&str> = raw.split('\t').map(str::trim).collect();
        if !(4..=5).contains(&cols.len()) {
            return Err(err(format!("expected 4 or 5 tab-separated fields, found {}", cols.len())));
        }
        let expected = match cols[1] {
            "G" => Judgment::Grammatical,
            "*" => Judgment::Ungrammatical,
            other => return Err(err(format!("judgment must be G or *, not {other:?}"))),
        };
        if cols[0].is_empty() {
            return Err(err("empty id".into()));
        }
        if items.iter().any(|it| it.id == cols[0]) {
            return Err(err(format!("duplicate id {}", cols[0])));
        }
        let tokens = tokenize(cols[2]);
        if tokens.is_empty() {
            return Err(err("no tokens".into()));
        }
        items.push(CorpusItem {
            id: cols[0].to_string(),
            expected,
            tokens,
            label: cols[3].to_string(),
            note: cols.get(4).filter(|n| !n.is_empty()).map(|n| n.to_string()),
        });
    }
    Ok(items)
}

pub fn load_corpus(path: &Path) -> Result<Vec<CorpusItem>, HarnessError> {
    let text = std::fs::read_to_string(path)
        .map_err(|source| HarnessError::Io { path: path.display().to_string(), source })?;
    parse_corpus(&text)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Outcome {
    pub id: String,
    pub label: String,
    pub sentence: String,
    pub expected: Judgment,
    pub parses: u64,
    pub pass: bool,
    /// Why a failing item failed.
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub explanation: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Report {
    pub schema: &'static str,
    pub total: usize,
    pub passed: usize,
    pub failed: usize,
    pub items: Vec<Outcome>,
}

impl Report {
    pub fn all_pass(&self) -> bool {
        self.failed == 0
    }

    pub fn outcome(&self, id: &str) -> Option<&Outcome> {
        self.items.iter().find(|o| o.id == id)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

impl fmt::Display for Report {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let width = self.items.iter().map(|o| o.id.len()).max().unwrap_or(0);
        for o in &self.items {
            writeln!(
                f,
                "{} {:width$}  {}  {:>3}  {}  {}",
                if o.pass { "PASS" } else { "FAIL" },
                o.id,
                o.expected.mark(),
                o.parses,
                o.sentence,
                o.label,
            )?;
            for line in &o.explanation {
                writeln!(f, "       {line}")?;
            }
        }
        write!(f, "{}/{} passed", self.passed, self.total)
    }
}

/// Ids compare by their leading number, then by the rest.
fn id_order(a: &str, b: &str) -> Ordering {
    let split = |s: &str| {
        let digits = s.chars().take_while(char::is_ascii_digit).count();
        (s[..digits].parse::<u64>().ok(), s[digits..].to_string())
    };
    let ((na, ra), (nb, rb)) = (split(a), split(b));
    match (na, nb) {
        (Some(x), Some(y)) => x.cmp(&y).then(ra.cmp(&rb)),
        (Some(_), None) => Ordering::Less,
        (None, Some(_)) => Ordering::Greater,
        (None, None) => a.cmp(b),
    }
}

const EXPLAIN_LIMIT: usize = 8;

fn run_item(parser: &Parser, item: &CorpusItem) -> Outcome {
    let sentence = item.tokens.join(" ");
    let (parses, forest) = match parser.parse(&item.tokens) {
        Ok(f) => (f.parse_count(), Some(f)),
        Err(_) => (0, None),
    };
    let pass = match item.expected {
        Judgment::Grammatical => parses >= 1,
        Judgment::Ungrammatical => parses == 0,
    };
    let mut explanation = Vec::new();
    if !pass {
        match (item.expected, &forest) {
            (Judgment::Ungrammatical, Some(f)) => {
                if let Some(t) = f.root_trees(1).first() {
                    explanation.extend(render_derivation(parser.grammar(), f, t).lines().map(str::to_string));
                }
            }
            _ => explanation.extend(explain_failure(parser, &item.tokens).into_iter().take(EXPLAIN_LIMIT)),
        }
    }
    Outcome { id: item.id.clone(), label: item.label.clone(), sentence, expected: item.expected, parses, pass, explanation }
}

/// The widest partial edges, then every distinct rejected combination,
/// widest first.
pub fn explain_failure(parser: &Parser, tokens: &[String]) -> Vec<String> {
    let mut cfg = parser.config().clone();
    cfg.explain = true;
    let p = Parser::new(parser.grammar().clone(), cfg);
    match p.parse(tokens) {
        Err(ParseError::UnknownWords(w)) => vec![format!("unknown words: {}", w.join(", "))],
        Err(e) => vec![e.to_string()],
        Ok(f) => {
            let mut out: Vec<String> = Vec::new();
            for &e in &f.widest_edges() {
                let e = &f.edges[e];
                let line = format!("widest edge {}..{}: {}", e.start, e.end, e.sign.phon.join(" "));
                if !out.contains(&line) {
                    out.push(line);
                }
            }
            let mut rejections: Vec<_> = f.rejections.iter().collect();
            rejections.sort_by_key(|r| (std::cmp::Reverse(r.end - r.start), r.start));
            for r in rejections {
                let line = format!("{} {}: {}", r.schema, r.daughters, r.reason);
                if !out.contains(&line) {
                    out.push(line);
                }
            }
            out
        }
    }
}

/// Parses every item; the report is ordered by id whatever the scheduling.
pub fn run_items(parser: &Parser, items: &[CorpusItem]) -> Report {
    let mut outcomes: Vec<Outcome> = if parser.config().parallel {
        items.par_iter().map(|it| run_item(parser, it)).collect()
    } else {
        items.iter().map(|it| run_item(parser, it)).collect()
    };
    outcomes.sort_by(|a, b| id_order(&a.id, &b.id));
    let passed = outcomes.iter().filter(|o| o.pass).count();
    Report { schema: REPORT_SCHEMA, total: outcomes.len(), passed, failed: outcomes.len() - passed, items: outcomes }
}

pub fn run_corpus(parser: &Parser, path: &Path) -> Result<Report, HarnessError> {
    Ok(run_items(parser, &load_corpus(path)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lexicon::Grammar;
    use crate::parser::ParserConfig;

    fn parser() -> Parser {
        Parser::new(Grammar::shipped(), ParserConfig::default())
    }

    const SMALL: &str = "# comment\n\n1b\t*\tWat schenkt Beatrix het huis aan?\t(1b)\n1c\tG\twaar schenkt beatrix het huis aan\t(1c)\tnote\n";

    #[test]
    fn corpus_lines() {
        let items = parse_corpus(SMALL).unwrap();
        assert_eq!(items.len(), 2);
        assert_eq!(items[0].tokens.join(" "), "wat schenkt beatrix het huis aan");
        assert_eq!(items[0].expected, Judgment::Ungrammatical);
        assert_eq!(items[1].note.as_deref(), Some("note"));
    }

    #[test]
    fn malformed_lines_report_their_number() {
        let bad = "1a\tG\taan welke stichting\t(1a)\n\n1b\tmaybe\twat\t(1b)\n";
        match parse_corpus(bad) {
            Err(HarnessError::Line { line, .. }) => assert_eq!(line, 3),
            other => panic!("{other:?}"),
        }
        assert!(parse_corpus("x\tG\tonly three").is_err());
        assert!(parse_corpus("x\tG\ta\tl\nx\tG\tb\tl").is_err());
    }

    #[test]
    fn empty_corpus_passes_vacuously() {
        let r = run_items(&parser(), &parse_corpus("# nothing\n").unwrap());
        assert_eq!((r.total, r.passed), (0, 0));
        assert!(r.all_pass());
    }

    #[test]
    fn flipped_judgment_fails() {
        let flipped = SMALL.replace("1b\t*", "1b\tG");
        let r = run_items(&parser(), &parse_corpus(&flipped).unwrap());
        assert_eq!((r.passed, r.failed), (1, 1));
        let o = r.outcome("1b").unwrap();
        assert!(!o.pass);
        assert!(!o.explanation.is_empty());
    }

    #[test]
    fn ids_sort_numerically() {
        let mut ids = vec!["fn5-dat", "16a-daar", "1c", "10a", "8b", "1a"];
        ids.sort_by(|a, b| id_order(a, b));
        assert_eq!(ids, ["1a", "1c", "8b", "10a", "16a-daar", "fn5-dat"]);
    }

    #[test]
    fn report_json_is_versioned() {
        let r = run_items(&parser(), &parse_corpus(SMALL).unwrap());
        let v: serde_json::Value = serde_json::from_str(&r.to_json()).unwrap();
        assert_eq!(v["schema"], REPORT_SCHEMA);
        assert_eq!(v["items"][1]["expected"], "grammatical");
        assert_eq!(v["items"][1]["parses"], 1);
    }
}
