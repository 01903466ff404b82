//! The full-form lexicon and the grammar bundle built around it.

pub mod file;
pub mod templates;

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;
use std::sync::{Arc, OnceLock};

use thiserror::Error;

use crate::grammar::{Geometry, GeometryError, Sign};
use crate::lexrules::{close_lexicon, Rule, RuleSet};
use crate::tfs::{avm, unify, FeatureStructure, NegConstraint, Signature, SignatureBuilder, SignatureError};
use file::Line;

pub const SHIPPED_LEXICON: &str = include_str!("../../../../grammar/dutch.lex");

#[derive(Debug, Error)]
pub enum LexiconError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("entry {id} (line {line}): {message}")]
    Entry { id: String, line: usize, message: String },
    #[error(transparent)]
    Signature(#[from] SignatureError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error("unknown preposition form `{0}`")]
    UnknownPform(String),
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Provenance {
    Base,
    Derived { rule: Rule, base: String },
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct LexicalEntry {
    /// `form.n` for base entries, `form.n+RULE` for derived ones.
    pub id: String,
    pub phon: String,
    pub template: String,
    pub wh: bool,
    pub sign: Sign,
    pub provenance: Provenance,
}

impl LexicalEntry {
    pub fn is_base(&self) -> bool {
        self.provenance == Provenance::Base
    }

    pub fn rule(&self) -> Option<Rule> {
        match &self.provenance {
            Provenance::Base => None,
            Provenance::Derived { rule, .. } => Some(*rule),
        }
    }

    pub fn neg_constraints(&self) -> &[NegConstraint] {
        self.sign.fs.constraints()
    }

    /// A derived entry: same word, new sign.
    pub fn derive(&self, rule: Rule, fs: FeatureStructure) -> LexicalEntry {
        LexicalEntry {
            id: format!("{}+{}", self.id, rule),
            phon: self.phon.clone(),
            template: self.template.clone(),
            wh: self.wh,
            sign: Sign::new(self.sign.phon.clone(), fs),
            provenance: Provenance::Derived { rule, base: self.id.clone() },
        }
    }
}

impl fmt::Display for LexicalEntry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.rule() {
            None => f.write_str(&self.phon),
            Some(r) => write!(f, "{} ⟨{}⟩", self.phon, r.name()),
        }
    }
}

/// Entries in id order with a case-insensitive index on word forms.
#[derive(Clone, Debug, Default)]
pub struct Lexicon {
    entries: Vec<LexicalEntry>,
    by_form: BTreeMap<String, Vec<usize>>,
}

impl Lexicon {
    pub fn new(mut entries: Vec<LexicalEntry>) -> Self {
        entries.sort_by(|a, b| entry_order(&a.id).cmp(&entry_order(&b.id)));
        let mut by_form: BTreeMap<String, Vec<usize>> = BTreeMap::new();
        for (i, e) in entries.iter().enumerate() {
            by_form.entry(e.phon.to_lowercase()).or_default().push(i);
        }
        Lexicon { entries, by_form }
    }

    pub fn entries(&self) -> &[LexicalEntry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, i: usize) -> &LexicalEntry {
        &self.entries[i]
    }

    pub fn base(&self) -> impl Iterator<Item = &LexicalEntry> {
        self.entries.iter().filter(|e| e.is_base())
    }

    pub fn derived(&self) -> impl Iterator<Item = &LexicalEntry> {
        self.entries.iter().filter(|e| !e.is_base())
    }

    pub fn by_id(&self, id: &str) -> Option<&LexicalEntry> {
        self.entries.iter().find(|e| e.id == id)
    }

    /// Indices of all entries, base and derived, spelled `word`.
    pub fn lookup_indices(&self, word: &str) -> &[usize] {
        self.by_form.get(&word.to_lowercase()).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn lookup(&self, word: &str) -> Vec<&LexicalEntry> {
        self.lookup_indices(word).iter().map(|&i| &self.entries[i]).collect()
    }
}

/// Sort key: word, homograph number, then rule and position.
fn entry_order(id: &str) -> (String, u32, String) {
    let (base, rule) = id.split_once('+').unwrap_or((id, ""));
    let (form, n) = base.rsplit_once('.').unwrap_or((base, "0"));
    (form.to_string(), n.parse().unwrap_or(0), rule.to_string())
}

/// Parses word records against `sig`. Declaration lines are skipped: they
/// belong to the signature.
pub fn parse_lexicon(sig: &Signature, text: &str) -> Result<Vec<LexicalEntry>, LexiconError> {
    let lines = file::parse_lines(text).map_err(|(line, message)| LexiconError::Syntax { line, message })?;
    let mut counts: BTreeMap<String, u32> = BTreeMap::new();
    let mut out = Vec::new();
    for (_, line) in lines {
        let Line::Record(rec) = line else { continue };
        let n = counts.entry(rec.form.to_lowercase()).or_insert(0);
        *n += 1;
        let id = format!("{}.{}", rec.form.to_lowercase(), n);
        let fail = |message: String| LexiconError::Entry { id: id.clone(), line: rec.line, message };
        let exp = templates::expand(&rec).map_err(fail)?;
        let mut fs = avm::parse(sig, &exp.avm).map_err(|e| fail(e.message))?;
        if let Some(extra) = &rec.extra {
            let more = avm::parse(sig, extra).map_err(|e| fail(format!("after `&`: {e}")))?;
            fs = unify(sig, &fs, &more).map_err(|c| fail(c.to_string()))?;
        }
        if sig.sort_name(fs.root_sort()) != "sign" {
            return Err(fail("entry is not a sign".into()));
        }
        out.push(LexicalEntry {
            id,
            phon: rec.form.clone(),
            template: rec.template.clone(),
            wh: exp.wh,
            sign: Sign::new(vec![rec.form.clone()], fs),
            provenance: Provenance::Base,
        });
    }
    Ok(out)
}

/// Reads a lexicon file. The signature must already include any
/// declarations the file makes.
pub fn load_lexicon(sig: &Signature, path: &Path) -> Result<Vec<LexicalEntry>, LexiconError> {
    parse_lexicon(sig, &read(path)?)
}

fn read(path: &Path) -> Result<String, LexiconError> {
    std::fs::read_to_string(path).map_err(|source| LexiconError::Io { path: path.display().to_string(), source })
}

/// Signature, sign geometry and closed lexicon.
#[derive(Clone, Debug)]
pub struct Grammar {
    pub sig: Arc<Signature>,
    pub geo: Geometry,
    pub lexicon: Arc<Lexicon>,
    base: Arc<Vec<LexicalEntry>>,
    rules: RuleSet,
}

impl Grammar {
    /// The embedded Dutch grammar with every rule enabled.
    pub fn shipped() -> Grammar {
        static G: OnceLock<Grammar> = OnceLock::new();
        G.get_or_init(|| {
            Grammar::from_sources(crate::tfs::SHIPPED_SORTS, SHIPPED_LEXICON).expect("shipped grammar loads")
        })
        .clone()
    }

    /// Builds a grammar from a sorts text and a lexicon text. Declarations
    /// may appear in either.
    pub fn from_sources(sorts: &str, lexicon: &str) -> Result<Grammar, LexiconError> {
        let mut b = SignatureBuilder::new();
        b.add_source(sorts)?;
        let lines = file::parse_lines(lexicon).map_err(|(line, message)| LexiconError::Syntax { line, message })?;
        for (n, line) in &lines {
            if let Line::Declaration(d) = line {
                b.add_line(d, *n)?;
            }
        }
        let sig = Arc::new(b.build()?);
        let geo = Geometry::new(&sig)?;
        let base = parse_lexicon(&sig, lexicon)?;
        Ok(Grammar::assemble(sig, geo, base, RuleSet::all()))
    }

    /// Loads every `*.sorts` and `*.lex` file in `dir`, in name order.
    pub fn load_dir(dir: &Path) -> Result<Grammar, LexiconError> {
        let io = |source| LexiconError::Io { path: dir.display().to_string(), source };
        let mut files: Vec<_> = std::fs::read_dir(dir)
            .map_err(io)?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .collect();
        files.sort();
        let (mut sorts, mut lex) = (String::new(), String::new());
        for f in files {
            match f.extension().and_then(|e| e.to_str()) {
                Some("sorts") => sorts.push_str(&read(&f)?),
                Some("lex") => lex.push_str(&read(&f)?),
                _ => continue,
            }
            sorts.push('\n');
            lex.push('\n');
        }
        Grammar::from_sources(&sorts, &lex)
    }

    fn assemble(sig: Arc<Signature>, geo: Geometry, base: Vec<LexicalEntry>, rules: RuleSet) -> Grammar {
        let closed = close_lexicon(&sig, &geo, &base, rules);
        Grammar { sig, geo, lexicon: Arc::new(Lexicon::new(closed)), base: Arc::new(base), rules }
    }

    /// The same base lexicon closed under a different rule set.
    pub fn with_rules(&self, rules: RuleSet) -> Grammar {
        Grammar::assemble(self.sig.clone(), self.geo.clone(), self.base.to_vec(), rules)
    }

    pub fn rules(&self) -> RuleSet {
        self.rules
    }

    pub fn lookup(&self, word: &str) -> Vec<&LexicalEntry> {
        self.lexicon.lookup(word)
    }

    /// A fresh preposition entry built from the template.
    pub fn instantiate_p0(&self, pform: &str) -> Result<LexicalEntry, LexiconError> {
        let known = self.sig.sort("pform").is_some_and(|p| {
            self.sig.sort(pform).is_some_and(|s| s != p && self.sig.is_subsort(s, p))
        });
        if !known {
            return Err(LexiconError::UnknownPform(pform.to_string()));
        }
        let fs = avm::parse(&self.sig, &templates::p0(pform)).expect("template is well-formed");
        Ok(LexicalEntry {
            id: format!("{pform}.p0"),
            phon: pform.to_string(),
            template: "p0".into(),
            wh: false,
            sign: Sign::new(vec![pform.to_string()], fs),
            provenance: Provenance::Base,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tfs::subsumes_at;

    fn g() -> Grammar {
        Grammar::shipped()
    }

    #[test]
    fn shipped_lexicon_loads() {
        let g = g();
        assert!(g.lexicon.base().count() >= 30);
        assert!(g.lexicon.base().all(|e| e.sign.slash(&g.sig, &g.geo).is_empty()));
    }

    #[test]
    fn empty_source_is_empty_lexicon() {
        assert!(parse_lexicon(&g().sig, "").unwrap().is_empty());
        assert!(parse_lexicon(&g().sig, "# nothing\n\n").unwrap().is_empty());
    }

    #[test]
    fn gender_on_a_verb_is_rejected() {
        let g = g();
        let err = parse_lexicon(&g.sig, "word x := verb(vform=fin, rel=appreciate) & [SYNSEM|LOCAL|CAT|HEAD|GENDER neut]")
            .unwrap_err();
        assert!(matches!(err, LexiconError::Entry { ref id, .. } if id == "x.1"), "{err}");
        assert!(err.to_string().contains("GENDER"), "{err}");
        let err = parse_lexicon(&g.sig, "word x := noun(gender=neuter)").unwrap_err();
        assert!(err.to_string().contains("unknown sort"), "{err}");
        let err = parse_lexicon(&g.sig, "word x := noun(gender=neut, case=acc)").unwrap_err();
        assert!(err.to_string().contains("no parameter `case`"), "{err}");
    }

    #[test]
    fn lookup_is_case_insensitive_and_total() {
        let g = g();
        assert_eq!(g.lookup("Beatrix").len(), g.lookup("beatrix").len());
        assert!(g.lookup("xyzzy").is_empty());
        let hets: Vec<_> = g.lookup("het").iter().map(|e| e.template.clone()).collect();
        assert_eq!(hets, ["pron", "det"]);
    }

    #[test]
    fn waar_is_an_r_plus_wh_pronoun() {
        let g = g();
        let waar = g.lookup("waar");
        assert_eq!(waar.len(), 1);
        let e = waar[0];
        assert!(e.wh);
        let want = avm::parse(
            &g.sig,
            "[SYNSEM|LOCAL [CAT [HEAD [noun CASE acc R plus PRON plus]] CONTENT [ppro INDEX [GENDER neut]]]]",
        )
        .unwrap();
        assert!(subsumes_at(&g.sig, &want, e.sign.fs.graph(), e.sign.fs.root()));
        let wat = g.lookup("wat")[0];
        assert!(wat.wh && !subsumes_at(&g.sig, &want, wat.sign.fs.graph(), wat.sign.fs.root()));
    }

    #[test]
    fn instantiate_p0_checks_the_form() {
        let g = g();
        let aan = g.instantiate_p0("aan").unwrap();
        assert_eq!(aan.neg_constraints().len(), 1);
        assert_eq!(aan.sign.fs, g.lexicon.by_id("aan.1").unwrap().sign.fs);
        assert!(matches!(g.instantiate_p0("naar"), Err(LexiconError::UnknownPform(_))));
        assert!(matches!(g.instantiate_p0("pform"), Err(LexiconError::UnknownPform(_))));
    }

    #[test]
    fn pronouns_are_fully_specified() {
        let g = g();
        let r = g.geo.r_path();
        let gender = [g.geo.synsem, g.geo.local, g.geo.content, g.geo.index, g.geo.gender];
        for e in g.lexicon.base().filter(|e| e.template == "pron") {
            let r = e.sign.sort_at(&r).unwrap();
            let gd = e.sign.sort_at(&gender).unwrap();
            assert!(r == g.geo.plus || r == g.geo.minus, "{}", e.id);
            assert!(g.sig.subsorts_of(gd).all(|s| s == gd), "{}: gender {}", e.id, g.sig.sort_name(gd));
        }
    }
}
