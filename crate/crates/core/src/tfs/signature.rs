use std::collections::HashMap;
use std::fmt;

use thiserror::Error;

/// A sort in the hierarchy. Only meaningful together with the [`Signature`]
/// that issued it.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Sort(pub(crate) u16);

/// An interned feature name.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Feature(pub(crate) u16);

impl Sort {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl Feature {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum SignatureError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("line {line}: unknown sort `{sort}`")]
    UnknownSort { line: usize, sort: String },
    #[error("line {line}: sort `{sort}` declared twice")]
    Duplicate { line: usize, sort: String },
    #[error("no top sort declared")]
    NoTop,
    #[error("more than one top sort: `{0}` and `{1}`")]
    TwoTops(String, String),
    #[error("sorts `{0}` and `{1}` have common subsorts but no unique greatest lower bound")]
    NotBoundedComplete(String, String),
    #[error("feature `{0}` has no unique introducing sort")]
    NoUniqueIntroduction(String),
    #[error("feature `{feature}` on sort `{sort}`: declared value sorts have no common subsort")]
    ValueClash { feature: String, sort: String },
    #[error("unknown sort `{0}`")]
    Unknown(String),
}

/// Collects `sort` and `approp` declarations, possibly from several sources,
/// before they are frozen into a [`Signature`].
#[derive(Clone, Debug, Default)]
pub struct SignatureBuilder {
    sorts: Vec<(String, Vec<String>, usize)>,
    approps: Vec<(String, String, String, usize)>,
}

impl SignatureBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    /// Parses declaration lines. Blank lines and `#` comments are skipped.
    pub fn add_source(&mut self, text: &str) -> Result<(), SignatureError> {
        for (i, raw) in text.lines().enumerate() {
            self.add_line(raw, i + 1)?;
        }
        Ok(())
    }

    /// Parses a single declaration line; returns `Ok(false)` when the line is
    /// not a declaration (so callers can interleave other record kinds).
    pub fn add_line(&mut self, raw: &str, line: usize) -> Result<bool, SignatureError> {
        let text = strip_comment(raw).trim();
        if text.is_empty() {
            return Ok(true);
        }
        let mut words = text.split_whitespace();
        match words.next() {
            Some("sort") => {
                let rest = text["sort".len()..].trim();
                let (name, parents) = match rest.split_once('<') {
                    Some((name, parents)) => (
                        name.trim(),
                        parents
                            .split(',')
                            .map(|p| p.trim().to_string())
                            .collect::<Vec<_>>(),
                    ),
                    None => (rest, Vec::new()),
                };
                if name.is_empty() || name.contains(char::is_whitespace) {
                    return Err(SignatureError::Syntax {
                        line,
                        message: format!("malformed sort declaration `{text}`"),
                    });
                }
                if parents.iter().any(|p| p.is_empty() || p.contains(char::is_whitespace)) {
                    return Err(SignatureError::Syntax {
                        line,
                        message: format!("malformed parent list in `{text}`"),
                    });
                }
                self.sorts.push((name.to_string(), parents, line));
                Ok(true)
            }
            Some("approp") => {
                let parts: Vec<&str> = words.collect();
                if parts.len() != 3 {
                    return Err(SignatureError::Syntax {
                        line,
                        message: "expected `approp <sort> <FEATURE> <value-sort>`".into(),
                    });
                }
                self.approps.push((
                    parts[0].to_string(),
                    parts[1].to_string(),
                    parts[2].to_string(),
                    line,
                ));
                Ok(true)
            }
            _ => Ok(false),
        }
    }

    pub fn build(self) -> Result<Signature, SignatureError> {
        let mut sort_names: Vec<String> = Vec::new();
        let mut sort_index: HashMap<String, Sort> = HashMap::new();
        let mut parents: Vec<Vec<Sort>> = Vec::new();
        let mut top: Option<Sort> = None;

        for (name, ps, line) in &self.sorts {
            if sort_index.contains_key(name) {
                return Err(SignatureError::Duplicate { line: *line, sort: name.clone() });
            }
            // Parents must already be declared, which keeps the relation acyclic.
            let mut resolved = Vec::new();
            for p in ps {
                let s = *sort_index
                    .get(p)
                    .ok_or_else(|| SignatureError::UnknownSort { line: *line, sort: p.clone() })?;
                resolved.push(s);
            }
            let id = Sort(sort_names.len() as u16);
            if resolved.is_empty() {
                if let Some(t) = top {
                    return Err(SignatureError::TwoTops(
                        sort_names[t.index()].clone(),
                        name.clone(),
                    ));
                }
                top = Some(id);
            }
            sort_names.push(name.clone());
            sort_index.insert(name.clone(), id);
            parents.push(resolved);
        }
        let top = top.ok_or(SignatureError::NoTop)?;
        let n = sort_names.len();

        // below[b][a] <=> a ≤ b
        let mut below = vec![vec![false; n]; n];
        for a in 0..n {
            let mut stack = vec![a];
            while let Some(x) = stack.pop() {
                if !below[x][a] {
                    below[x][a] = true;
                    stack.extend(parents[x].iter().map(|p| p.index()));
                }
            }
        }

        let mut glb = vec![None; n * n];
        for a in 0..n {
            for b in 0..n {
                let common: Vec<usize> = (0..n).filter(|&c| below[a][c] && below[b][c]).collect();
                if common.is_empty() {
                    continue;
                }
                let max = common
                    .iter()
                    .copied()
                    .find(|&m| common.iter().all(|&c| below[m][c]));
                match max {
                    Some(m) => glb[a * n + b] = Some(Sort(m as u16)),
                    None => {
                        return Err(SignatureError::NotBoundedComplete(
                            sort_names[a].clone(),
                            sort_names[b].clone(),
                        ))
                    }
                }
            }
        }

        let mut feature_names: Vec<String> = Vec::new();
        let mut feature_index: HashMap<String, Feature> = HashMap::new();
        let mut decls: Vec<Vec<(Sort, Sort)>> = Vec::new();
        for (s, f, v, line) in &self.approps {
            let s = *sort_index
                .get(s)
                .ok_or_else(|| SignatureError::UnknownSort { line: *line, sort: s.clone() })?;
            let v = *sort_index
                .get(v)
                .ok_or_else(|| SignatureError::UnknownSort { line: *line, sort: v.clone() })?;
            if !f.chars().next().is_some_and(|c| c.is_ascii_uppercase()) {
                return Err(SignatureError::Syntax {
                    line: *line,
                    message: format!("feature names are upper case: `{f}`"),
                });
            }
            let fid = *feature_index.entry(f.clone()).or_insert_with(|| {
                feature_names.push(f.clone());
                decls.push(Vec::new());
                Feature((feature_names.len() - 1) as u16)
            });
            decls[fid.index()].push((s, v));
        }

        let nf = feature_names.len();
        let mut intro = Vec::with_capacity(nf);
        for (fi, ds) in decls.iter().enumerate() {
            let root = ds
                .iter()
                .map(|(s, _)| *s)
                .find(|&r| ds.iter().all(|(d, _)| below[r.index()][d.index()]))
                .ok_or_else(|| SignatureError::NoUniqueIntroduction(feature_names[fi].clone()))?;
            intro.push(root);
        }

        let mut approp = vec![None; n * nf];
        for s in 0..n {
            for (fi, ds) in decls.iter().enumerate() {
                if !below[intro[fi].index()][s] {
                    continue;
                }
                let mut value = Sort(top.0);
                for (d, v) in ds {
                    if below[d.index()][s] {
                        value = glb[value.index() * n + v.index()].ok_or_else(|| {
                            SignatureError::ValueClash {
                                feature: feature_names[fi].clone(),
                                sort: sort_names[s].clone(),
                            }
                        })?;
                    }
                }
                approp[s * nf + fi] = Some(value);
            }
        }

        Ok(Signature {
            sort_names,
            sort_index,
            parents,
            top,
            below,
            glb,
            feature_names,
            feature_index,
            intro,
            approp,
        })
    }
}

fn strip_comment(line: &str) -> &str {
    match line.find('#') {
        Some(i) => &line[..i],
        None => line,
    }
}

/// The sort hierarchy with its appropriateness table.
///
/// Every pair of sorts either has a unique greatest lower bound or none at
/// all; this is checked when the signature is built, so [`Signature::glb`]
/// is a table lookup afterwards.
#[derive(Clone)]
pub struct Signature {
    sort_names: Vec<String>,
    sort_index: HashMap<String, Sort>,
    parents: Vec<Vec<Sort>>,
    top: Sort,
    below: Vec<Vec<bool>>,
    glb: Vec<Option<Sort>>,
    feature_names: Vec<String>,
    feature_index: HashMap<String, Feature>,
    intro: Vec<Sort>,
    approp: Vec<Option<Sort>>,
}

impl fmt::Debug for Signature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Signature")
            .field("sorts", &self.sort_names.len())
            .field("features", &self.feature_names.len())
            .finish()
    }
}

impl Signature {
    pub fn parse(text: &str) -> Result<Self, SignatureError> {
        let mut b = SignatureBuilder::new();
        b.add_source(text)?;
        b.build()
    }

    pub fn top(&self) -> Sort {
        self.top
    }

    pub fn sort(&self, name: &str) -> Option<Sort> {
        self.sort_index.get(name).copied()
    }

    pub fn sort_name(&self, s: Sort) -> &str {
        &self.sort_names[s.index()]
    }

    pub fn sorts(&self) -> impl Iterator<Item = Sort> + '_ {
        (0..self.sort_names.len()).map(|i| Sort(i as u16))
    }

    pub fn sort_count(&self) -> usize {
        self.sort_names.len()
    }

    pub fn parents(&self, s: Sort) -> &[Sort] {
        &self.parents[s.index()]
    }

    pub fn feature(&self, name: &str) -> Option<Feature> {
        self.feature_index.get(name).copied()
    }

    pub fn feature_name(&self, f: Feature) -> &str {
        &self.feature_names[f.index()]
    }

    pub fn features(&self) -> impl Iterator<Item = Feature> + '_ {
        (0..self.feature_names.len()).map(|i| Feature(i as u16))
    }

    /// `a ≤ b`: `a` is `b` or one of its subsorts.
    pub fn is_subsort(&self, a: Sort, b: Sort) -> bool {
        self.below[b.index()][a.index()]
    }

    pub fn glb(&self, a: Sort, b: Sort) -> Option<Sort> {
        self.glb[a.index() * self.sort_names.len() + b.index()]
    }

    /// Name-level glb; unknown names are a declaration error.
    pub fn glb_named(&self, a: &str, b: &str) -> Result<Option<&str>, SignatureError> {
        let sa = self.sort(a).ok_or_else(|| SignatureError::Unknown(a.to_string()))?;
        let sb = self.sort(b).ok_or_else(|| SignatureError::Unknown(b.to_string()))?;
        Ok(self.glb(sa, sb).map(|s| self.sort_name(s)))
    }

    /// The most general sort on which `f` is appropriate.
    pub fn intro(&self, f: Feature) -> Sort {
        self.intro[f.index()]
    }

    /// The value sort of `f` on `s`, or `None` when `f` is not appropriate.
    pub fn approp(&self, s: Sort, f: Feature) -> Option<Sort> {
        self.approp[s.index() * self.feature_names.len() + f.index()]
    }

    /// Features appropriate for `s`, in declaration order.
    pub fn appropriate_features(&self, s: Sort) -> impl Iterator<Item = (Feature, Sort)> + '_ {
        self.features().filter_map(move |f| self.approp(s, f).map(|v| (f, v)))
    }

    /// All sorts `≤ s`, in declaration order.
    pub fn subsorts_of(&self, s: Sort) -> impl Iterator<Item = Sort> + '_ {
        self.sorts().filter(move |&t| self.is_subsort(t, s))
    }

    /// Parses a `A|B|C` path. The empty string is the empty path.
    pub fn path(&self, text: &str) -> Option<Vec<Feature>> {
        let text = text.trim();
        if text.is_empty() {
            return Some(Vec::new());
        }
        text.split('|').map(|f| self.feature(f.trim())).collect()
    }

    pub fn path_string(&self, path: &[Feature]) -> String {
        path.iter()
            .map(|&f| self.feature_name(f))
            .collect::<Vec<_>>()
            .join("|")
    }
}
