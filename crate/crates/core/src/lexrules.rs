//! Extraction lexical rules and the closure of a lexicon under them.

use std::fmt;

use rayon::prelude::*;
use thiserror::Error;

use crate::grammar::Geometry;
use crate::lexicon::LexicalEntry;
use crate::tfs::{Dag, NodeId, Signature, Sort};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Rule {
    Selr,
    /// Removal position on COMPS.
    Vcelr(usize),
    Pcelr,
}

impl Rule {
    pub fn name(self) -> &'static str {
        match self {
            Rule::Selr => "SELR",
            Rule::Vcelr(_) => "VCELR",
            Rule::Pcelr => "PCELR",
        }
    }
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Rule::Vcelr(i) => write!(f, "VCELR@{i}"),
            r => f.write_str(r.name()),
        }
    }
}

/// Which rules take part in closure.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct RuleSet {
    pub selr: bool,
    pub vcelr: bool,
    pub pcelr: bool,
}

impl RuleSet {
    pub fn all() -> Self {
        RuleSet { selr: true, vcelr: true, pcelr: true }
    }

    pub fn none() -> Self {
        RuleSet { selr: false, vcelr: false, pcelr: false }
    }

    /// Disables a rule by name (`SELR`, `VCELR`, `PCELR`, any case).
    pub fn without(mut self, name: &str) -> Option<Self> {
        match name.to_ascii_uppercase().as_str() {
            "SELR" => self.selr = false,
            "VCELR" => self.vcelr = false,
            "PCELR" => self.pcelr = false,
            _ => return None,
        }
        Some(self)
    }
}

impl Default for RuleSet {
    fn default() -> Self {
        RuleSet::all()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum Inapplicable {
    #[error("head is not verbal")]
    NotVerbal,
    #[error("head is not prepositional")]
    NotPrepositional,
    #[error("INHER|SLASH is not empty")]
    Slashed,
    #[error("SUBJ is not a one-element list")]
    SubjectNotSingleton,
    #[error("COMPS has no element {0}")]
    OutOfRange(usize),
    #[error("COMPS element {0} is neither an R- NP nor a PP")]
    NotExtractable(usize),
    #[error("not a P0 entry: {0}")]
    NotP0(&'static str),
    #[error("{0}")]
    Clash(String),
}

struct Work<'s> {
    d: Dag<'s>,
    root: NodeId,
    geo: &'s Geometry,
}

impl<'s> Work<'s> {
    fn new(sig: &'s Signature, geo: &'s Geometry, e: &LexicalEntry) -> Result<Self, Inapplicable> {
        let mut d = Dag::new(sig);
        let root = d.import(&e.sign.fs);
        let w = Work { d, root, geo };
        let slash = w.at(&geo.inher_slash_path())?;
        if !w.is(slash, geo.eset) {
            return Err(Inapplicable::Slashed);
        }
        Ok(w)
    }

    fn at(&self, path: &[crate::tfs::Feature]) -> Result<NodeId, Inapplicable> {
        self.d
            .follow(self.root, path)
            .ok_or_else(|| Inapplicable::Clash(format!("no {}", self.d.signature().path_string(path))))
    }

    fn is(&self, n: NodeId, sort: Sort) -> bool {
        self.d.signature().is_subsort(self.d.sort(n), sort)
    }

    fn head_is(&self, sort: Sort) -> bool {
        self.at(&self.geo.head_path()).is_ok_and(|h| self.is(h, sort))
    }

    /// (cell, member) pairs of an explicit FIRST/REST prefix, and its tail.
    fn cells(&self, mut n: NodeId) -> (Vec<(NodeId, NodeId)>, NodeId) {
        let mut out = Vec::new();
        while let (Some(f), Some(r)) = (self.d.arc(n, self.geo.first), self.d.arc(n, self.geo.rest)) {
            out.push((n, f));
            n = r;
        }
        (out, n)
    }

    fn node(&mut self, sort: Sort) -> NodeId {
        self.d.add_node(sort)
    }

    fn singleton_set(&mut self, member: NodeId) -> NodeId {
        let cell = self.node(self.geo.neset);
        let end = self.node(self.geo.eset);
        self.d.set_arc(cell, self.geo.first, member);
        self.d.set_arc(cell, self.geo.rest, end);
        cell
    }

    fn set_inher_slash(&mut self, member: NodeId) -> Result<(), Inapplicable> {
        let inher = self.at(&[self.geo.synsem, self.geo.nonlocal, self.geo.inher])?;
        let set = self.singleton_set(member);
        self.d.set_arc(inher, self.geo.slash, set);
        Ok(())
    }

    fn local_of(&mut self, synsem: NodeId) -> Result<NodeId, Inapplicable> {
        self.d.follow_or_create(synsem, &[self.geo.local]).map_err(|c| Inapplicable::Clash(c.to_string()))
    }

    fn constrain_r(&mut self, local: NodeId, r: Sort) -> Result<(), Inapplicable> {
        let g = self.geo;
        let node = self
            .d
            .follow_or_create(local, &[g.cat, g.head, g.r])
            .map_err(|c| Inapplicable::Clash(c.to_string()))?;
        self.d.constrain(node, r).map_err(|c| Inapplicable::Clash(c.to_string()))
    }

    fn finish(self, e: &LexicalEntry, rule: Rule) -> Result<LexicalEntry, Inapplicable> {
        self.d.check_constraints().map_err(|c| Inapplicable::Clash(c.to_string()))?;
        Ok(e.derive(rule, self.d.extract_fs(self.root)))
    }
}

/// Subject extraction: SUBJ ⟨1⟩ becomes ⟨⟩ and INHER|SLASH {LOCAL of 1},
/// the extracted element constrained R-.
pub fn apply_selr(sig: &Signature, geo: &Geometry, e: &LexicalEntry) -> Result<LexicalEntry, Inapplicable> {
    let mut w = Work::new(sig, geo, e)?;
    if !w.head_is(geo.verb) {
        return Err(Inapplicable::NotVerbal);
    }
    let cat = w.at(&[geo.synsem, geo.local, geo.cat])?;
    let subj = w.at(&geo.valence_path(geo.subj))?;
    let (cells, tail) = w.cells(subj);
    if cells.len() != 1 || !w.is(tail, geo.elist) {
        return Err(Inapplicable::SubjectNotSingleton);
    }
    let local = w.local_of(cells[0].1)?;
    w.constrain_r(local, geo.minus)?;
    let empty = w.node(geo.elist);
    w.d.set_arc(cat, geo.subj, empty);
    w.set_inher_slash(local)?;
    w.finish(e, Rule::Selr)
}

/// Complement extraction from a verb: COMPS element `position` is removed
/// and its LOCAL becomes the INHER|SLASH member. NPs must be R-; PPs are
/// extracted whole.
pub fn apply_vcelr(sig: &Signature, geo: &Geometry, e: &LexicalEntry, position: usize) -> Result<LexicalEntry, Inapplicable> {
    let mut w = Work::new(sig, geo, e)?;
    if !w.head_is(geo.verb) {
        return Err(Inapplicable::NotVerbal);
    }
    let cat = w.at(&[geo.synsem, geo.local, geo.cat])?;
    let comps = w.at(&geo.valence_path(geo.comps))?;
    let (cells, _) = w.cells(comps);
    let &(cell, elem) = cells.get(position).ok_or(Inapplicable::OutOfRange(position))?;
    let head = w.d.follow(elem, &[geo.local, geo.cat, geo.head]);
    let is_np = match head {
        Some(h) if w.is(h, geo.noun) => {
            let r = w.d.follow(h, &[geo.r]);
            if !r.is_some_and(|r| w.is(r, geo.minus)) {
                return Err(Inapplicable::NotExtractable(position));
            }
            true
        }
        Some(h) if w.is(h, geo.prep) => false,
        _ => return Err(Inapplicable::NotExtractable(position)),
    };
    let mut spine = w.d.arc(cell, geo.rest).expect("cell has REST");
    for &(_, member) in cells[..position].iter().rev() {
        let c = w.node(geo.nelist);
        w.d.set_arc(c, geo.first, member);
        w.d.set_arc(c, geo.rest, spine);
        spine = c;
    }
    w.d.set_arc(cat, geo.comps, spine);
    let local = w.local_of(elem)?;
    if is_np {
        w.constrain_r(local, geo.minus)?;
    }
    w.set_inher_slash(local)?;
    w.finish(e, Rule::Vcelr(position))
}

/// Preposition complement extraction: the single R- complement leaves
/// COMPS, the negative constraint is erased, and the preposition's CONTENT
/// becomes a fresh neuter ppro shared with the SLASH member, which is the
/// complement's LOCAL with R overwritten to plus.
pub fn apply_pcelr(sig: &Signature, geo: &Geometry, e: &LexicalEntry) -> Result<LexicalEntry, Inapplicable> {
    let mut w = Work::new(sig, geo, e)?;
    if !w.head_is(geo.prep) {
        return Err(Inapplicable::NotPrepositional);
    }
    let cat = w.at(&[geo.synsem, geo.local, geo.cat])?;
    let p_local = w.at(&geo.local_path())?;
    let comps = w.at(&geo.valence_path(geo.comps))?;
    let (cells, tail) = w.cells(comps);
    if cells.len() != 1 || !w.is(tail, geo.elist) {
        return Err(Inapplicable::NotP0("COMPS is not a one-element list"));
    }
    let c_local = w.d.follow(cells[0].1, &[geo.local]).ok_or(Inapplicable::NotP0("complement has no LOCAL"))?;
    let shared = match (w.d.arc(c_local, geo.content), w.d.arc(p_local, geo.content)) {
        (Some(a), Some(b)) => w.d.same(a, b),
        _ => false,
    };
    if !shared {
        return Err(Inapplicable::NotP0("CONTENT is not shared with the complement"));
    }
    if !w.d.follow(c_local, &[geo.cat, geo.head, geo.r]).is_some_and(|r| w.is(r, geo.minus)) {
        return Err(Inapplicable::NotP0("complement is not R-"));
    }
    if w.d.remove_constraints_at(p_local) == 0 {
        return Err(Inapplicable::NotP0("no negative constraint"));
    }
    let content = w.node(geo.ppro);
    let index = w.node(sig.approp(geo.nom_obj, geo.index).expect("nom-obj has INDEX"));
    let gender = w.node(geo.neut);
    w.d.set_arc(index, geo.gender, gender);
    w.d.set_arc(content, geo.index, index);
    w.d.set_arc(p_local, geo.content, content);
    w.d.set_arc(c_local, geo.content, content);
    let c_head = w.d.follow(c_local, &[geo.cat, geo.head]).expect("checked above");
    let plus = w.node(geo.plus);
    w.d.set_arc(c_head, geo.r, plus);
    let empty = w.node(geo.elist);
    w.d.set_arc(cat, geo.comps, empty);
    w.set_inher_slash(c_local)?;
    w.finish(e, Rule::Pcelr)
}

/// Every output of every enabled rule on `e`, in rule order.
pub fn derive_all(sig: &Signature, geo: &Geometry, e: &LexicalEntry, rules: RuleSet) -> Vec<LexicalEntry> {
    if !e.is_base() {
        return Vec::new();
    }
    let mut out = Vec::new();
    if rules.pcelr {
        out.extend(apply_pcelr(sig, geo, e).ok());
    }
    if rules.selr {
        out.extend(apply_selr(sig, geo, e).ok());
    }
    if rules.vcelr {
        for i in 0.. {
            match apply_vcelr(sig, geo, e, i) {
                Ok(d) => out.push(d),
                Err(Inapplicable::NotExtractable(_)) => continue,
                Err(_) => break,
            }
        }
    }
    out
}

/// The lexicon plus every rule output on its base entries. Derived entries
/// in the input are kept but never fed to a rule, so closing twice adds
/// nothing.
pub fn close_lexicon(sig: &Signature, geo: &Geometry, lexicon: &[LexicalEntry], rules: RuleSet) -> Vec<LexicalEntry> {
    let derived: Vec<Vec<LexicalEntry>> = lexicon.par_iter().map(|e| derive_all(sig, geo, e, rules)).collect();
    let mut out = lexicon.to_vec();
    for d in derived.into_iter().flatten() {
        if !out.iter().any(|e| e.id == d.id) {
            out.push(d);
        }
    }
    out.sort_by(|a, b| a.id.cmp(&b.id));
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lexicon::{parse_lexicon, Grammar};
    use crate::tfs::{avm, subsumes_at, FeatureStructure};

    fn g() -> Grammar {
        Grammar::shipped()
    }

    fn base(g: &Grammar, id: &str) -> LexicalEntry {
        g.lexicon.by_id(id).unwrap_or_else(|| panic!("no {id}")).clone()
    }

    fn slash_member(g: &Grammar, e: &LexicalEntry) -> (FeatureStructure, NodeId) {
        let members = e.sign.slash(&g.sig, &g.geo);
        assert_eq!(members.len(), 1, "{}", e.id);
        (e.sign.fs.clone(), members[0])
    }

    /// Does the word's LOCAL unify with the entry's SLASH member?
    fn binds(g: &Grammar, e: &LexicalEntry, word: &str) -> bool {
        let filler = g.lookup(word).into_iter().find(|w| w.template == "pron").unwrap().clone();
        let (fs, m) = slash_member(g, e);
        let mut d = Dag::new(&g.sig);
        let base = d.import(&fs);
        let member = NodeId(base.0 + m.0);
        let f = d.import(&filler.sign.fs);
        let f_local = d.follow(f, &g.geo.local_path()).unwrap();
        d.unify(member, f_local).is_ok() && d.check_constraints().is_ok()
    }

    fn r_of(g: &Grammar, fs: &FeatureStructure, local: NodeId) -> String {
        let r = fs.graph().follow(local, &[g.geo.cat, g.geo.head, g.geo.r]).unwrap();
        g.sig.sort_name(fs.sort(r)).to_string()
    }

    #[test]
    fn selr_on_schenkt() {
        let g = g();
        let d = apply_selr(&g.sig, &g.geo, &base(&g, "schenkt.1")).unwrap();
        assert_eq!(d.id, "schenkt.1+SELR");
        let subj = d.sign.sort_at(&g.geo.valence_path(g.geo.subj)).unwrap();
        assert_eq!(subj, g.geo.elist);
        let (fs, m) = slash_member(&g, &d);
        let nom = avm::parse(&g.sig, "[local CAT [HEAD [noun CASE nom R minus]]]").unwrap();
        assert!(subsumes_at(&g.sig, &nom, fs.graph(), m));
        // the extracted subject's index is still the donor role
        let idx = fs.graph().follow(m, &[g.geo.content, g.geo.index]).unwrap();
        let arg1 = fs.resolve_path(&g.sig.path("SYNSEM|LOCAL|CONTENT|ARG1").unwrap()).unwrap();
        assert_eq!(idx, arg1);
        assert!(matches!(apply_selr(&g.sig, &g.geo, &d), Err(Inapplicable::Slashed)));
    }

    #[test]
    fn selr_needs_one_subject_and_a_verb() {
        let g = g();
        let e = &parse_lexicon(&g.sig, "word x := verb(vform=fin, rel=appreciate, subj=none, comps=[np])").unwrap()[0];
        assert_eq!(apply_selr(&g.sig, &g.geo, e).unwrap_err(), Inapplicable::SubjectNotSingleton);
        assert_eq!(apply_selr(&g.sig, &g.geo, &base(&g, "hem.1")).unwrap_err(), Inapplicable::NotVerbal);
    }

    #[test]
    fn vcelr_on_waarderen() {
        let g = g();
        let d = apply_vcelr(&g.sig, &g.geo, &base(&g, "waarderen.1"), 0).unwrap();
        assert_eq!(d.sign.sort_at(&g.geo.valence_path(g.geo.comps)), Some(g.geo.elist));
        let (fs, m) = slash_member(&g, &d);
        assert_eq!(r_of(&g, &fs, m), "minus");
        assert!(binds(&g, &d, "dat"));
        assert!(!binds(&g, &d, "daar"));
        assert_eq!(
            apply_vcelr(&g.sig, &g.geo, &base(&g, "waarderen.1"), 1).unwrap_err(),
            Inapplicable::OutOfRange(1)
        );
    }

    #[test]
    fn vcelr_keeps_the_other_complements_in_order() {
        let g = g();
        let d = apply_vcelr(&g.sig, &g.geo, &base(&g, "schenkt.1"), 0).unwrap();
        let comps = d.sign.at(&g.geo.valence_path(g.geo.comps)).unwrap();
        let (members, end) = d.sign.fs.graph().chain(&g.sig, comps);
        assert_eq!(members.len(), 1);
        assert_eq!(d.sign.fs.sort(end), g.geo.elist);
        let pp = avm::parse(&g.sig, "[synsem LOCAL [CAT [HEAD [prep PFORM aan]]]]").unwrap();
        assert!(subsumes_at(&g.sig, &pp, d.sign.fs.graph(), members[0]));
        // ARG3 still reaches the remaining PP
        let arg3 = d.sign.at(&g.sig.path("SYNSEM|LOCAL|CONTENT|ARG3").unwrap()).unwrap();
        let pp_idx = d.sign.fs.graph().follow(members[0], &g.sig.path("LOCAL|CONTENT|INDEX").unwrap());
        assert_eq!(pp_idx, Some(arg3));
    }

    #[test]
    fn vcelr_refuses_composed_verbal_complements() {
        let g = g();
        assert_eq!(apply_vcelr(&g.sig, &g.geo, &base(&g, "zal.1"), 0).unwrap_err(), Inapplicable::NotExtractable(0));
        assert_eq!(apply_vcelr(&g.sig, &g.geo, &base(&g, "zal.1"), 1).unwrap_err(), Inapplicable::OutOfRange(1));
    }

    #[test]
    fn pcelr_binds_r_plus_neuter_only() {
        let g = g();
        let aan = apply_pcelr(&g.sig, &g.geo, &g.instantiate_p0("aan").unwrap()).unwrap();
        assert!(aan.neg_constraints().is_empty());
        let (fs, m) = slash_member(&g, &aan);
        assert_eq!(r_of(&g, &fs, m), "plus");
        let content = fs.resolve_path(&[g.geo.synsem, g.geo.local, g.geo.content]).unwrap();
        assert_eq!(fs.graph().arc(m, g.geo.content), Some(content));
        assert!(binds(&g, &aan, "waar"));
        assert!(binds(&g, &aan, "er"));
        assert!(!binds(&g, &aan, "wat"));
        assert!(!binds(&g, &aan, "het"));
        assert!(!binds(&g, &aan, "hem"));
        assert_eq!(apply_pcelr(&g.sig, &g.geo, &aan).unwrap_err(), Inapplicable::Slashed);
        assert_eq!(apply_pcelr(&g.sig, &g.geo, &base(&g, "schenkt.1")).unwrap_err(), Inapplicable::NotPrepositional);
    }

    #[test]
    fn closure_contents() {
        let g = g();
        let ids = |form: &str| -> Vec<String> { g.lookup(form).iter().map(|e| e.id.clone()).collect() };
        assert_eq!(ids("schenkt"), ["schenkt.1", "schenkt.1+SELR", "schenkt.1+VCELR@0", "schenkt.1+VCELR@1"]);
        assert_eq!(ids("aan"), ["aan.1", "aan.1+PCELR"]);
        assert_eq!(ids("op"), ["op.1", "op.1+PCELR"]);
        for p in ["hij", "hem", "daar", "er", "waar", "beatrix"] {
            assert_eq!(ids(p).len(), 1, "{p}");
        }
    }

    #[test]
    fn closure_is_idempotent_and_one_step() {
        let g = g();
        let once = g.lexicon.entries().to_vec();
        let twice = close_lexicon(&g.sig, &g.geo, &once, RuleSet::all());
        assert_eq!(once.len(), twice.len());
        for e in &once {
            let n = e.sign.slash(&g.sig, &g.geo).len();
            assert_eq!(n, usize::from(!e.is_base()), "{}", e.id);
            if let Some(rule) = e.rule() {
                let (fs, m) = slash_member(&g, e);
                let head = fs.graph().follow(m, &[g.geo.cat, g.geo.head]).unwrap();
                if g.sig.is_subsort(fs.sort(head), g.geo.prep) {
                    // a whole PP, fronted
                    assert!(matches!(rule, Rule::Vcelr(_)), "{}", e.id);
                    continue;
                }
                let want = if rule == Rule::Pcelr { "plus" } else { "minus" };
                assert_eq!(r_of(&g, &fs, m), want, "{}", e.id);
            }
        }
    }

    #[test]
    fn ablation_drops_exactly_that_rule() {
        let g = g().with_rules(RuleSet::all().without("pcelr").unwrap());
        assert!(g.lexicon.derived().all(|e| e.rule() != Some(Rule::Pcelr)));
        assert!(g.lexicon.derived().any(|e| e.rule() == Some(Rule::Selr)));
        assert!(RuleSet::all().without("CELR").is_none());
    }
}
