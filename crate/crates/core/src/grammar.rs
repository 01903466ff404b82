//! Signs, local trees, and the principles checked on them.

use std::fmt;

use serde::Serialize;
use thiserror::Error;

use crate::tfs::{Dag, FeatureStructure, Feature, Graph, NodeId, Signature, Sort};

#[derive(Debug, Error, PartialEq, Eq)]
#[error("signature lacks `{0}`, which the sign geometry needs")]
pub struct GeometryError(pub String);

macro_rules! geometry {
    (features { $($f:ident = $fname:literal),* $(,)? } sorts { $($s:ident = $sname:literal),* $(,)? }) => {
        /// Interned features and sorts of the sign geometry.
        #[derive(Clone, Debug)]
        pub struct Geometry {
            $(pub $f: Feature,)*
            $(pub $s: Sort,)*
        }

        impl Geometry {
            pub fn new(sig: &Signature) -> Result<Self, GeometryError> {
                Ok(Geometry {
                    $($f: sig.feature($fname).ok_or_else(|| GeometryError($fname.into()))?,)*
                    $($s: sig.sort($sname).ok_or_else(|| GeometryError($sname.into()))?,)*
                })
            }
        }
    };
}

geometry! {
    features {
        synsem = "SYNSEM", local = "LOCAL", nonlocal = "NONLOCAL", cat = "CAT",
        content = "CONTENT", head = "HEAD", subj = "SUBJ", spr = "SPR", comps = "COMPS",
        inher = "INHER", to_bind = "TO-BIND", slash = "SLASH", first = "FIRST", rest = "REST",
        vform = "VFORM", case = "CASE", r = "R", pron = "PRON", pform = "PFORM", modified = "MOD",
        index = "INDEX", gender = "GENDER",
    }
    sorts {
        sign = "sign", synsem_sort = "synsem", local_sort = "local", category = "category",
        nonlocal_sort = "nonlocal", inherited = "inherited", to_bind_sort = "to-bind",
        verb = "verb", noun = "noun", prep = "prep", det = "det", modifier = "modifier",
        adv = "adv", adj = "adj",
        list = "list", elist = "elist", nelist = "nelist", set = "set", eset = "eset", neset = "neset",
        plus = "plus", minus = "minus", fin = "fin", nom_obj = "nom-obj", ppro = "ppro",
        neut = "neut", acc = "acc",
    }
}

impl Geometry {
    pub fn local_path(&self) -> [Feature; 2] {
        [self.synsem, self.local]
    }
    pub fn head_path(&self) -> [Feature; 4] {
        [self.synsem, self.local, self.cat, self.head]
    }
    pub fn valence_path(&self, f: Feature) -> [Feature; 4] {
        [self.synsem, self.local, self.cat, f]
    }
    pub fn content_path(&self) -> [Feature; 3] {
        [self.synsem, self.local, self.content]
    }
    pub fn inher_slash_path(&self) -> [Feature; 4] {
        [self.synsem, self.nonlocal, self.inher, self.slash]
    }
    pub fn to_bind_slash_path(&self) -> [Feature; 4] {
        [self.synsem, self.nonlocal, self.to_bind, self.slash]
    }
    /// From a sign to its R value.
    pub fn r_path(&self) -> [Feature; 5] {
        [self.synsem, self.local, self.cat, self.head, self.r]
    }
}

/// A word or phrase: its phonology plus the feature structure rooted at a
/// `sign` node.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Sign {
    pub phon: Vec<String>,
    pub fs: FeatureStructure,
}

impl Sign {
    pub fn new(phon: Vec<String>, fs: FeatureStructure) -> Self {
        Sign { phon, fs }
    }

    pub fn at(&self, path: &[Feature]) -> Option<NodeId> {
        self.fs.resolve_path(path)
    }

    pub fn sort_at(&self, path: &[Feature]) -> Option<Sort> {
        self.at(path).map(|n| self.fs.sort(n))
    }

    /// Members of INHER|SLASH, by node.
    pub fn slash(&self, sig: &Signature, geo: &Geometry) -> Vec<NodeId> {
        match self.at(&geo.inher_slash_path()) {
            Some(n) => self.fs.graph().chain(sig, n).0,
            None => Vec::new(),
        }
    }

    pub fn head_sort(&self, geo: &Geometry) -> Option<Sort> {
        self.sort_at(&geo.head_path())
    }
}

/// True iff SUBJ and COMPS are both the empty list.
pub fn is_saturated(sig: &Signature, geo: &Geometry, sign: &Sign) -> bool {
    [geo.subj, geo.comps].iter().all(|&f| {
        sign.sort_at(&geo.valence_path(f))
            .is_some_and(|s| sig.is_subsort(s, geo.elist))
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    Subject,
    Complement,
    Specifier,
    Filler,
    Adjunct,
}

impl fmt::Display for Role {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Role::Subject => "subject",
            Role::Complement => "complement",
            Role::Specifier => "specifier",
            Role::Filler => "filler",
            Role::Adjunct => "adjunct",
        })
    }
}

/// Position of a daughter in the surface string.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum Slot {
    Head,
    Other(usize),
}

/// A local tree: mother, head daughter and role-labelled non-head daughters,
/// all living in one graph so that token identity between them is node
/// identity. `others` is in valence order (the order the head lists its
/// arguments); `surface` gives the word order.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct PhraseConfig {
    pub graph: Graph,
    pub mother: NodeId,
    pub head: NodeId,
    pub others: Vec<(Role, NodeId)>,
    pub surface: Vec<Slot>,
}

impl PhraseConfig {
    /// Puts independent signs side by side in one graph, with no sharing
    /// between them. A missing mother becomes a bare `sign` node.
    pub fn assemble(
        sig: &Signature,
        mother: Option<&Sign>,
        head: &Sign,
        others: &[(Role, &Sign)],
        surface: Vec<Slot>,
    ) -> PhraseConfig {
        let mut dag = Dag::new(sig);
        let m = match mother {
            Some(m) => dag.import(&m.fs),
            None => dag.add_node(sig.sort("sign").expect("sign sort")),
        };
        let h = dag.import(&head.fs);
        let os: Vec<NodeId> = others.iter().map(|(_, s)| dag.import(&s.fs)).collect();
        PhraseConfig::from_dag(&dag, m, h, others.iter().map(|(r, _)| *r).zip(os).collect(), surface)
    }

    pub fn from_dag(dag: &Dag, mother: NodeId, head: NodeId, others: Vec<(Role, NodeId)>, surface: Vec<Slot>) -> PhraseConfig {
        let mut roots = vec![mother, head];
        roots.extend(others.iter().map(|(_, n)| *n));
        let (graph, ids) = dag.extract(&roots);
        PhraseConfig {
            graph,
            mother: ids[0],
            head: ids[1],
            others: others.iter().map(|(r, _)| *r).zip(ids[2..].iter().copied()).collect(),
            surface,
        }
    }

    /// All daughters, head first, then `others` in valence order.
    pub fn daughters(&self) -> impl Iterator<Item = NodeId> + '_ {
        std::iter::once(self.head).chain(self.others.iter().map(|(_, n)| *n))
    }

    pub fn with_role(&self, role: Role) -> impl Iterator<Item = NodeId> + '_ {
        self.others.iter().filter(move |(r, _)| *r == role).map(|(_, n)| *n)
    }

    /// The mother as a standalone structure.
    pub fn mother_fs(&self, sig: &Signature) -> FeatureStructure {
        let mut dag = Dag::new(sig);
        dag.import_graph(&self.graph);
        dag.extract_fs(self.mother)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
#[error("{feature} element {index}: {reason}")]
pub struct ValenceViolation {
    pub feature: String,
    pub index: usize,
    pub reason: String,
}

/// Residual valence lists, as nodes of the configuration's graph.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Valence {
    pub subj: NodeId,
    pub spr: NodeId,
    pub comps: NodeId,
}

/// Valence Principle. For each valence feature the head's list must begin
/// with the SYNSEMs of the daughters bearing the matching role, in the order
/// they are listed in `others`; what remains is the mother's value.
pub fn check_valence(sig: &Signature, geo: &Geometry, config: &PhraseConfig) -> Result<Valence, ValenceViolation> {
    let mut dag = Dag::new(sig);
    dag.import_graph(&config.graph);
    let mut residues = [NodeId(0); 3];
    for (slot, (feature, role)) in [(geo.subj, Role::Subject), (geo.spr, Role::Specifier), (geo.comps, Role::Complement)]
        .into_iter()
        .enumerate()
    {
        let name = sig.feature_name(feature).to_string();
        let violation = |index, reason: &str| ValenceViolation {
            feature: name.clone(),
            index,
            reason: reason.to_string(),
        };
        let mut list = dag
            .follow(config.head, &geo.valence_path(feature))
            .ok_or_else(|| violation(0, "head daughter has no value"))?;
        for (i, d) in config.with_role(role).enumerate() {
            let (Some(elem), Some(rest)) = (dag.arc(list, geo.first), dag.arc(list, geo.rest)) else {
                return Err(violation(i, "more daughters than the head selects"));
            };
            let syn = dag
                .follow(d, &[geo.synsem])
                .ok_or_else(|| violation(i, "daughter has no SYNSEM"))?;
            if !dag.same(elem, syn) && !dag.compatible(elem, syn) {
                return Err(violation(i, "daughter does not unify with the selected element"));
            }
            list = rest;
        }
        if let Some(m) = dag.follow(config.mother, &geo.valence_path(feature)) {
            if !dag.same(m, list) && !dag.compatible(m, list) {
                let n = config.with_role(role).count();
                return Err(violation(n, "mother's value differs from the head's remainder"));
            }
        }
        residues[slot] = dag.find(list);
    }
    Ok(Valence { subj: residues[0], spr: residues[1], comps: residues[2] })
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum NfpViolation {
    #[error("TO-BIND|SLASH member is not inherited from any daughter")]
    NothingToBind,
    #[error("a daughter's INHER|SLASH is not a closed set")]
    OpenSet,
    #[error("mother's INHER|SLASH differs from the daughters' union minus TO-BIND")]
    Mismatch,
}

/// Nonlocal Feature Principle for SLASH. Returns the mother's required
/// INHER|SLASH members; subtraction and comparison are by token identity.
pub fn check_nfp(sig: &Signature, geo: &Geometry, config: &PhraseConfig) -> Result<Vec<NodeId>, NfpViolation> {
    let g = &config.graph;
    let closed = |n: NodeId| -> Result<Vec<NodeId>, NfpViolation> {
        let (members, end) = g.chain(sig, n);
        if sig.is_subsort(g.sort(end), geo.eset) {
            Ok(members)
        } else {
            Err(NfpViolation::OpenSet)
        }
    };
    let mut union: Vec<NodeId> = Vec::new();
    for d in config.daughters() {
        if let Some(s) = g.follow(d, &geo.inher_slash_path()) {
            for m in closed(s)? {
                if !union.contains(&m) {
                    union.push(m);
                }
            }
        }
    }
    // An unspecified TO-BIND binds nothing.
    let to_bind = match g.follow(config.head, &geo.to_bind_slash_path()) {
        Some(s) if g.arc(s, geo.first).is_some() || sig.is_subsort(g.sort(s), geo.eset) => closed(s)?,
        _ => Vec::new(),
    };
    if to_bind.iter().any(|b| !union.contains(b)) {
        return Err(NfpViolation::NothingToBind);
    }
    let required: Vec<NodeId> = union.into_iter().filter(|m| !to_bind.contains(m)).collect();
    if let Some(s) = g.follow(config.mother, &geo.inher_slash_path()) {
        let actual = closed(s).map_err(|_| NfpViolation::Mismatch)?;
        let same = actual.len() == required.len() && actual.iter().all(|a| required.contains(a));
        if !same {
            return Err(NfpViolation::Mismatch);
        }
    }
    Ok(required)
}

/// Head features are token-identical between mother and head daughter.
pub fn check_head_feature(geo: &Geometry, config: &PhraseConfig) -> bool {
    let g = &config.graph;
    match (g.follow(config.mother, &geo.head_path()), g.follow(config.head, &geo.head_path())) {
        (Some(m), Some(h)) => m == h,
        _ => false,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lexicon::Grammar;
    use crate::parser::{Analysis, Forest, Parser, ParserConfig};
    use crate::tfs::{avm, subsumes_at};

    fn forest(s: &str) -> (Grammar, Forest) {
        let g = Grammar::shipped();
        let f = Parser::new(g.clone(), ParserConfig::default()).parse_str(s).unwrap();
        (g, f)
    }

    /// The single edge with this PHON.
    fn sign<'f>(f: &'f Forest, phon: &str) -> &'f Sign {
        let hits: Vec<&Sign> = f.edges.iter().map(|e| &e.sign).filter(|s| s.phon.join(" ") == phon).collect();
        assert_eq!(hits.len(), 1, "{phon}");
        hits[0]
    }

    fn entry(g: &Grammar, id: &str) -> Sign {
        g.lexicon.by_id(id).unwrap().sign.clone()
    }

    #[test]
    fn schenkt_with_all_arguments_is_saturated() {
        let (g, f) = forest("beatrix schenkt het huis aan de stichting");
        let head = entry(&g, "schenkt.1");
        let others = [
            (Role::Subject, sign(&f, "beatrix")),
            (Role::Complement, sign(&f, "het huis")),
            (Role::Complement, sign(&f, "aan de stichting")),
        ];
        let c = PhraseConfig::assemble(&g.sig, None, &head, &others, vec![Slot::Head, Slot::Other(0), Slot::Other(1), Slot::Other(2)]);
        let v = check_valence(&g.sig, &g.geo, &c).unwrap();
        assert_eq!(c.graph.sort(v.subj), g.geo.elist);
        assert_eq!(c.graph.sort(v.comps), g.geo.elist);
    }

    #[test]
    fn projection_without_daughters() {
        let (g, f) = forest("beatrix");
        let c = PhraseConfig::assemble(&g.sig, None, sign(&f, "beatrix"), &[], vec![Slot::Head]);
        let v = check_valence(&g.sig, &g.geo, &c).unwrap();
        assert_eq!(Some(v.comps), c.graph.follow(c.head, &g.geo.valence_path(g.geo.comps)));
    }

    #[test]
    fn residue_of_a_partial_comps() {
        let (g, f) = forest("schenkt het huis");
        let head = entry(&g, "schenkt.1");
        let others = [(Role::Complement, sign(&f, "het huis"))];
        let c = PhraseConfig::assemble(&g.sig, None, &head, &others, vec![Slot::Head, Slot::Other(0)]);
        let v = check_valence(&g.sig, &g.geo, &c).unwrap();
        let (members, end) = c.graph.chain(&g.sig, v.comps);
        assert_eq!(members.len(), 1);
        assert_eq!(c.graph.sort(end), g.geo.elist);
        let pp = avm::parse(&g.sig, "[synsem LOCAL [CAT [HEAD [prep PFORM aan]]]]").unwrap();
        assert!(subsumes_at(&g.sig, &pp, &c.graph, members[0]));
    }

    #[test]
    fn too_many_complements() {
        let (g, f) = forest("waardeert het huis dat");
        let head = entry(&g, "waardeert.1");
        let others = [(Role::Complement, sign(&f, "het huis")), (Role::Complement, sign(&f, "dat"))];
        let c = PhraseConfig::assemble(&g.sig, None, &head, &others, vec![Slot::Head, Slot::Other(0), Slot::Other(1)]);
        let v = check_valence(&g.sig, &g.geo, &c).unwrap_err();
        assert_eq!((v.feature.as_str(), v.index), ("COMPS", 1));
    }

    #[test]
    fn nfp_with_nothing_slashed() {
        let (g, f) = forest("het huis");
        let e = f.edges.iter().find(|e| e.sign.phon.len() == 2).unwrap();
        let Analysis::Phrase { config, .. } = &e.analyses[0] else { panic!() };
        assert_eq!(check_nfp(&g.sig, &g.geo, config), Ok(vec![]));
        assert!(check_head_feature(&g.geo, config));
    }

    #[test]
    fn nfp_passes_the_stranded_object_up() {
        let (g, f) = forest("schenkt beatrix het huis aan");
        let aan = entry(&g, "aan.1+PCELR");
        let others = [
            (Role::Subject, sign(&f, "beatrix")),
            (Role::Complement, sign(&f, "het huis")),
            (Role::Complement, &aan),
        ];
        let c = PhraseConfig::assemble(&g.sig, None, &entry(&g, "schenkt.1"), &others, vec![Slot::Head, Slot::Other(0), Slot::Other(1), Slot::Other(2)]);
        let slash = check_nfp(&g.sig, &g.geo, &c).unwrap();
        let from_aan = c.graph.follow(c.others[2].1, &g.geo.inher_slash_path()).unwrap();
        assert_eq!(slash, c.graph.chain(&g.sig, from_aan).0);
    }

    #[test]
    fn nfp_binds_the_filler_at_the_top() {
        let (g, f) = forest("waar schenkt beatrix het huis aan");
        let root = &f.edges[f.roots[0]];
        let Analysis::Phrase { config, .. } = &root.analyses[0] else { panic!() };
        assert_eq!(check_nfp(&g.sig, &g.geo, config), Ok(vec![]));
        assert!(is_saturated(&g.sig, &g.geo, &root.sign));
    }

    #[test]
    fn binder_without_a_bindee() {
        let g = Grammar::shipped();
        let fs = avm::parse(&g.sig, "[SYNSEM|NONLOCAL|TO-BIND|SLASH {[local]} SYNSEM|NONLOCAL|INHER|SLASH {}]").unwrap();
        let c = PhraseConfig::assemble(&g.sig, None, &Sign::new(vec![], fs), &[], vec![Slot::Head]);
        assert_eq!(check_nfp(&g.sig, &g.geo, &c), Err(NfpViolation::NothingToBind));
    }

    #[test]
    fn saturation() {
        let (g, f) = forest("beatrix");
        assert!(!is_saturated(&g.sig, &g.geo, &entry(&g, "schenkt.1")));
        assert!(is_saturated(&g.sig, &g.geo, sign(&f, "beatrix")));
    }
}
