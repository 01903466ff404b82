//! Record syntax of `.lex` files.
//!
//! ```text
//! # comment
//! sort   neut < gender                      (declarations, see the sorts file)
//! word   schenkt := verb(vform=fin, rel=donate, comps=[np pp:aan])
//! word   huis    := noun(gender=neut) & [SYNSEM|LOCAL|CONTENT nom-obj]
//! ```
//!
//! A line starting with whitespace continues the previous record.

use std::fmt;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Param {
    Atom(String),
    List(Vec<String>),
}

impl fmt::Display for Param {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Param::Atom(a) => f.write_str(a),
            Param::List(xs) => write!(f, "[{}]", xs.join(" ")),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Record {
    pub line: usize,
    pub form: String,
    pub template: String,
    pub params: Vec<(String, Param)>,
    /// AVM text after `&`, unified into the expansion.
    pub extra: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Line {
    Declaration(String),
    Record(Record),
}

/// Splits a source into declaration lines and word records, with 1-based
/// line numbers. Comments and blank lines are dropped.
pub fn parse_lines(text: &str) -> Result<Vec<(usize, Line)>, (usize, String)> {
    let mut logical: Vec<(usize, String)> = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let body = raw.split('#').next().unwrap_or("");
        if body.trim().is_empty() {
            continue;
        }
        if body.starts_with(char::is_whitespace) {
            match logical.last_mut() {
                Some((_, prev)) => {
                    prev.push(' ');
                    prev.push_str(body.trim());
                }
                None => return Err((i + 1, "continuation line with nothing to continue".into())),
            }
        } else {
            logical.push((i + 1, body.trim().to_string()));
        }
    }
    logical
        .into_iter()
        .map(|(line, text)| {
            if let Some(rest) = text.strip_prefix("word ") {
                parse_record(line, rest).map(|r| (line, Line::Record(r))).map_err(|m| (line, m))
            } else if text.starts_with("sort ") || text.starts_with("approp ") {
                Ok((line, Line::Declaration(text)))
            } else {
                Err((line, format!("expected `word`, `sort` or `approp`, found `{text}`")))
            }
        })
        .collect()
}

fn parse_record(line: usize, text: &str) -> Result<Record, String> {
    let (lhs, rhs) = text.split_once(":=").ok_or("missing `:=`")?;
    let form = lhs.trim();
    if form.is_empty() || form.contains(char::is_whitespace) {
        return Err(format!("bad word form `{form}`"));
    }
    let rhs = rhs.trim();
    let open = rhs.find('(').ok_or("missing `(` after template name")?;
    let template = rhs[..open].trim();
    if template.is_empty() || !template.chars().all(|c| c.is_ascii_alphanumeric() || c == '_') {
        return Err(format!("bad template name `{template}`"));
    }
    let close = matching_paren(rhs, open).ok_or("unbalanced `(`")?;
    let params = parse_params(&rhs[open + 1..close])?;
    let tail = rhs[close + 1..].trim();
    let extra = if tail.is_empty() {
        None
    } else {
        let avm = tail.strip_prefix('&').ok_or_else(|| format!("unexpected `{tail}` after `)`"))?;
        Some(avm.trim().to_string())
    };
    Ok(Record {
        line,
        form: form.to_string(),
        template: template.to_string(),
        params,
        extra,
    })
}

fn matching_paren(s: &str, open: usize) -> Option<usize> {
    let mut depth = 0;
    for (i, c) in s.char_indices().skip_while(|&(i, _)| i < open) {
        match c {
            '(' => depth += 1,
            ')' => {
                depth -= 1;
                if depth == 0 {
                    return Some(i);
                }
            }
            _ => {}
        }
    }
    None
}

fn parse_params(text: &str) -> Result<Vec<(String, Param)>, String> {
    let mut out: Vec<(String, Param)> = Vec::new();
    let mut depth = 0;
    let mut start = 0;
    let mut pieces = Vec::new();
    for (i, c) in text.char_indices() {
        match c {
            '[' => depth += 1,
            ']' => depth -= 1,
            ',' if depth == 0 => {
                pieces.push(&text[start..i]);
                start = i + 1;
            }
            _ => {}
        }
    }
    pieces.push(&text[start..]);
    for piece in pieces.into_iter().map(str::trim).filter(|p| !p.is_empty()) {
        let (k, v) = piece.split_once('=').ok_or_else(|| format!("expected key=value, found `{piece}`"))?;
        let (k, v) = (k.trim(), v.trim());
        if out.iter().any(|(seen, _)| seen == k) {
            return Err(format!("parameter `{k}` given twice"));
        }
        let value = match v.strip_prefix('[') {
            Some(inner) => {
                let inner = inner.strip_suffix(']').ok_or_else(|| format!("unclosed list in `{piece}`"))?;
                Param::List(inner.split_whitespace().map(String::from).collect())
            }
            None if !v.is_empty() && !v.contains(char::is_whitespace) => Param::Atom(v.to_string()),
            None => return Err(format!("bad value in `{piece}`")),
        };
        out.push((k.to_string(), value));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn record_with_list_and_extra() {
        let lines = parse_lines(
            "# fragment\nword schenkt := verb(vform=fin, rel=donate, comps=[np pp:aan])\n\
             word huis := noun(gender=neut)\n  & [SYNSEM|LOCAL|CONTENT nom-obj]\n",
        )
        .unwrap();
        assert_eq!(lines.len(), 2);
        let Line::Record(r) = &lines[0].1 else { panic!() };
        assert_eq!(r.template, "verb");
        assert_eq!(r.params[2], ("comps".into(), Param::List(vec!["np".into(), "pp:aan".into()])));
        let Line::Record(r) = &lines[1].1 else { panic!() };
        assert_eq!(r.line, 3);
        assert_eq!(r.extra.as_deref(), Some("[SYNSEM|LOCAL|CONTENT nom-obj]"));
    }

    #[test]
    fn errors_report_lines() {
        assert_eq!(parse_lines("\n\nword x = np()").unwrap_err().0, 3);
        assert!(parse_lines("word x := np(case=nom, case=acc)").unwrap_err().1.contains("twice"));
        assert!(parse_lines("  word x := np()").is_err());
        assert!(parse_lines("lemma x").is_err());
        assert!(parse_lines("").unwrap().is_empty());
    }
}
