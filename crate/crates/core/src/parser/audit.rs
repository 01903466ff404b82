//! Independent re-check of every analysis in a forest.
//!
//! Nothing here trusts how an edge was built: each stored configuration is
//! re-read from its own graph and the principles are checked again.

use std::fmt;

use serde::Serialize;

use super::{is_root, Analysis, Edge, Forest, Schema};
use crate::grammar::{check_head_feature, check_nfp, check_valence, Role, Slot};
use crate::lexicon::Grammar;
use crate::tfs::{subsumes_at, NodeId};

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Violation {
    pub edge: usize,
    pub analysis: usize,
    pub check: &'static str,
    pub detail: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "edge {} analysis {}: {}: {}", self.edge, self.analysis, self.check, self.detail)
    }
}

struct Walker<'a> {
    g: &'a Grammar,
    forest: &'a Forest,
    out: Vec<Violation>,
}

impl Walker<'_> {
    fn flag(&mut self, edge: usize, analysis: usize, check: &'static str, detail: impl Into<String>) {
        self.out.push(Violation { edge, analysis, check, detail: detail.into() });
    }

    fn lexical(&mut self, e: &Edge, a: usize, entry: usize) {
        let lex = self.g.lexicon.get(entry);
        if lex.sign != e.sign {
            self.flag(e.id, a, "lexical", format!("sign differs from {}", lex.id));
        }
        if e.end != e.start + 1 || !lex.phon.eq_ignore_ascii_case(&self.forest.tokens[e.start]) {
            self.flag(e.id, a, "lexical", "entry does not match its token");
        }
    }

    fn phrase(&mut self, e: &Edge, a: usize, analysis: &Analysis) {
        let Analysis::Phrase { schema, head, others, config } = analysis else { return };
        let (sig, geo) = (&*self.g.sig, &self.g.geo);
        let edges = &self.forest.edges;
        let graph = &config.graph;

        // spans tile the edge in surface order, and PHON follows them
        let mut at = e.start;
        let mut phon = Vec::new();
        for (_, d) in analysis.surface() {
            if edges[d].start != at {
                self.flag(e.id, a, "span", format!("daughter {d} starts at {} not {at}", edges[d].start));
            }
            at = edges[d].end;
            phon.extend(edges[d].sign.phon.iter().cloned());
        }
        if at != e.end {
            self.flag(e.id, a, "span", "daughters do not reach the end of the edge");
        }
        if phon != e.sign.phon {
            self.flag(e.id, a, "phon", "PHON is not the daughters' PHON in order");
        }
        if config.surface.len() != others.len() + 1 || !config.surface.contains(&Slot::Head) {
            self.flag(e.id, a, "surface", "surface order does not place every daughter once");
        }

        // the configuration really contains the daughter edges and the mother
        if config.mother_fs(sig) != e.sign.fs {
            self.flag(e.id, a, "mother", "stored mother differs from the edge sign");
        }
        let daughters = std::iter::once((*head, config.head)).chain(others.iter().zip(&config.others).map(|((_, d), (_, n))| (*d, *n)));
        for (d, node) in daughters {
            if !subsumes_at(sig, &edges[d].sign.fs, graph, node) {
                self.flag(e.id, a, "daughter", format!("edge {d} does not subsume its configuration node"));
            }
        }
        if others.iter().map(|(r, _)| r).ne(config.others.iter().map(|(r, _)| r)) {
            self.flag(e.id, a, "roles", "role labels differ between analysis and configuration");
        }

        match check_valence(sig, geo, config) {
            Err(v) => self.flag(e.id, a, "valence", v.to_string()),
            Ok(res) => {
                for (f, r) in [(geo.subj, res.subj), (geo.spr, res.spr), (geo.comps, res.comps)] {
                    let Some(m) = graph.follow(config.mother, &geo.valence_path(f)) else {
                        self.flag(e.id, a, "valence", format!("mother has no {}", sig.feature_name(f)));
                        continue;
                    };
                    let both_empty = sig.is_subsort(graph.sort(m), geo.elist) && sig.is_subsort(graph.sort(r), geo.elist);
                    if m != r && !both_empty {
                        self.flag(e.id, a, "valence", format!("mother {} is not the head's remainder", sig.feature_name(f)));
                    }
                }
            }
        }
        if let Err(v) = check_nfp(sig, geo, config) {
            self.flag(e.id, a, "nfp", v.to_string());
        }
        if !check_head_feature(geo, config) {
            self.flag(e.id, a, "head-feature", "mother and head daughter HEAD are not shared");
        }
        let content = |n: NodeId| graph.follow(n, &geo.content_path());
        if content(config.mother).is_none() || content(config.mother) != content(config.head) {
            self.flag(e.id, a, "content", "mother CONTENT is not the head's");
        }

        // a filler's LOCAL is what the head binds
        if matches!(schema, Schema::III | Schema::IIIb) {
            let bound = graph.follow(config.head, &geo.to_bind_slash_path()).map(|s| graph.chain(sig, s).0).unwrap_or_default();
            for f in config.with_role(Role::Filler) {
                let local = graph.follow(f, &geo.local_path());
                if local.is_none_or(|l| !bound.contains(&l)) {
                    self.flag(e.id, a, "filler", "filler LOCAL is not bound by the head");
                }
            }
        }
    }

    fn root(&mut self, e: &Edge) {
        if !is_root(self.g, self.forest, e) {
            self.flag(e.id, 0, "root", "listed as a root but fails the root condition");
        }
    }
}

/// Every violation found in `forest`; empty when all checks pass.
pub fn audit(g: &Grammar, forest: &Forest) -> Vec<Violation> {
    let mut w = Walker { g, forest, out: Vec::new() };
    for e in &forest.edges {
        for (i, a) in e.analyses.iter().enumerate() {
            match a {
                Analysis::Lexical { entry } => w.lexical(e, i, *entry),
                Analysis::Phrase { .. } => w.phrase(e, i, a),
            }
        }
    }
    for &r in &forest.roots {
        w.root(&forest.edges[r]);
    }
    for e in &forest.edges {
        if is_root(g, forest, e) && !forest.roots.contains(&e.id) {
            w.flag(e.id, 0, "root", "satisfies the root condition but is not listed");
        }
    }
    w.out
}

/// Base prepositions whose complement is a neuter pronoun, anywhere below
/// a root. The negative constraint should make this impossible.
pub fn neuter_under_base_p(g: &Grammar, forest: &Forest) -> Vec<usize> {
    let neuter = crate::tfs::avm::parse(&g.sig, "[ppro INDEX [GENDER neut]]").expect("shipped sorts");
    let mut hits = Vec::new();
    for e in &forest.edges {
        for a in &e.analyses {
            let Analysis::Phrase { head, others, .. } = a else { continue };
            let Some(entry) = forest.edges[*head].entry() else { continue };
            let p = g.lexicon.get(entry);
            if !p.is_base() || !p.sign.head_sort(&g.geo).is_some_and(|h| g.sig.is_subsort(h, g.geo.prep)) {
                continue;
            }
            for (_, d) in others {
                let c = &forest.edges[*d].sign;
                if c.at(&g.geo.content_path()).is_some_and(|n| subsumes_at(&g.sig, &neuter, c.fs.graph(), n)) {
                    hits.push(e.id);
                }
            }
        }
    }
    hits
}
