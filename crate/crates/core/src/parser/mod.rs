//! CKY chart parser over flat and binary ID schemata.
//!
//! Edges are packed: one edge per (span, sign), each with every analysis
//! that licenses it. Spans of one length only depend on shorter spans, so a
//! length's cells are filled independently (optionally in parallel) and
//! merged in start order.

pub mod audit;
pub mod schema;

use std::collections::HashMap;
use std::sync::Arc;

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::grammar::{is_saturated, PhraseConfig, Role, Sign, Slot};
use crate::lexicon::Grammar;
pub use schema::{build_edge, lp_ok, lp_violation, Built, Candidate, Schema};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ParserConfig {
    pub disable_iiib: bool,
    /// Parsing stops with an error once the chart holds more edges.
    pub edge_limit: usize,
    pub parallel: bool,
    /// Keep rejected combinations and their reasons.
    pub explain: bool,
}

impl Default for ParserConfig {
    fn default() -> Self {
        ParserConfig { disable_iiib: false, edge_limit: 20_000, parallel: true, explain: false }
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ParseError {
    #[error("unknown word(s): {}", .0.join(", "))]
    UnknownWords(Vec<String>),
    #[error("edge limit of {0} exceeded")]
    EdgeLimit(usize),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Analysis {
    Lexical { entry: usize },
    Phrase {
        schema: Schema,
        head: usize,
        /// Valence order, matching `config.others`.
        others: Vec<(Role, usize)>,
        config: Arc<PhraseConfig>,
    },
}

impl Analysis {
    /// Daughter edges left to right, `None` marking the head.
    pub fn surface(&self) -> Vec<(Option<Role>, usize)> {
        match self {
            Analysis::Lexical { .. } => Vec::new(),
            Analysis::Phrase { head, others, config, .. } => config
                .surface
                .iter()
                .map(|slot| match slot {
                    Slot::Head => (None, *head),
                    Slot::Other(i) => (Some(others[*i].0), others[*i].1),
                })
                .collect(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Edge {
    pub id: usize,
    pub start: usize,
    pub end: usize,
    pub sign: Sign,
    pub analyses: Vec<Analysis>,
}

impl Edge {
    pub fn is_lexical(&self) -> bool {
        matches!(self.analyses[0], Analysis::Lexical { .. })
    }

    /// The first lexical entry behind a word edge.
    pub fn entry(&self) -> Option<usize> {
        self.analyses.iter().find_map(|a| match a {
            Analysis::Lexical { entry } => Some(*entry),
            _ => None,
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Rejection {
    pub start: usize,
    pub end: usize,
    pub schema: Schema,
    pub daughters: String,
    pub reason: String,
}

/// A derivation tree read off the forest.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Tree {
    Word { edge: usize, entry: usize },
    Phrase { edge: usize, schema: Schema, daughters: Vec<(Option<Role>, Tree)> },
}

impl Tree {
    pub fn edge(&self) -> usize {
        match self {
            Tree::Word { edge, .. } | Tree::Phrase { edge, .. } => *edge,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Forest {
    pub tokens: Vec<String>,
    pub edges: Vec<Edge>,
    pub roots: Vec<usize>,
    pub rejections: Vec<Rejection>,
}

impl Forest {
    /// Number of derivations below each edge.
    pub fn tree_counts(&self) -> Vec<u64> {
        let mut counts = vec![0u64; self.edges.len()];
        for e in &self.edges {
            counts[e.id] = e
                .analyses
                .iter()
                .map(|a| match a {
                    Analysis::Lexical { .. } => 1,
                    Analysis::Phrase { .. } => a
                        .surface()
                        .iter()
                        .fold(1u64, |acc, (_, d)| acc.saturating_mul(counts[*d])),
                })
                .fold(0u64, u64::saturating_add);
        }
        counts
    }

    pub fn parse_count(&self) -> u64 {
        let counts = self.tree_counts();
        self.roots.iter().map(|&r| counts[r]).fold(0, u64::saturating_add)
    }

    /// Up to `limit` derivations of `edge`, in analysis order.
    pub fn trees(&self, edge: usize, limit: usize) -> Vec<Tree> {
        let mut out = Vec::new();
        for a in &self.edges[edge].analyses {
            if out.len() >= limit {
                break;
            }
            match a {
                Analysis::Lexical { entry } => out.push(Tree::Word { edge, entry: *entry }),
                Analysis::Phrase { schema, .. } => {
                    let mut partial: Vec<Vec<(Option<Role>, Tree)>> = vec![Vec::new()];
                    for (role, d) in a.surface() {
                        let subs = self.trees(d, limit);
                        let mut next = Vec::new();
                        'fill: for p in &partial {
                            for s in &subs {
                                if next.len() >= limit {
                                    break 'fill;
                                }
                                let mut q = p.clone();
                                q.push((role, s.clone()));
                                next.push(q);
                            }
                        }
                        partial = next;
                    }
                    for daughters in partial {
                        if out.len() < limit {
                            out.push(Tree::Phrase { edge, schema: *schema, daughters });
                        }
                    }
                }
            }
        }
        out
    }

    /// Root derivations, up to `limit`.
    pub fn root_trees(&self, limit: usize) -> Vec<Tree> {
        let mut out = Vec::new();
        for &r in &self.roots {
            let left = limit.saturating_sub(out.len());
            out.extend(self.trees(r, left));
        }
        out
    }

    /// Edges covering the most tokens, for diagnostics.
    pub fn widest_edges(&self) -> Vec<usize> {
        let width = self.edges.iter().map(|e| e.end - e.start).max().unwrap_or(0);
        self.edges.iter().filter(|e| e.end - e.start == width).map(|e| e.id).collect()
    }
}

/// Lower-cases and drops punctuation.
pub fn tokenize(sentence: &str) -> Vec<String> {
    sentence
        .split_whitespace()
        .map(|w| w.chars().filter(|c| c.is_alphanumeric() || *c == '-' || *c == '\'').collect::<String>())
        .filter(|w| !w.is_empty())
        .map(|w| w.to_lowercase())
        .collect()
}

/// Saturated, finite, verbal, nothing left in INHER|SLASH.
pub fn is_root_sign(g: &Grammar, sign: &Sign) -> bool {
    let geo = &g.geo;
    let mut vform = geo.head_path().to_vec();
    vform.push(geo.vform);
    is_saturated(&g.sig, geo, sign)
        && sign.head_sort(geo).is_some_and(|h| g.sig.is_subsort(h, geo.verb))
        && sign.sort_at(&vform).is_some_and(|v| g.sig.is_subsort(v, geo.fin))
        && sign.sort_at(&geo.inher_slash_path()).is_some_and(|s| g.sig.is_subsort(s, geo.eset))
}

pub fn is_root(g: &Grammar, forest: &Forest, edge: &Edge) -> bool {
    edge.start == 0 && edge.end == forest.tokens.len() && is_root_sign(g, &edge.sign)
}

pub struct Parser {
    grammar: Grammar,
    config: ParserConfig,
}

type Cells = Vec<Vec<Vec<usize>>>;

struct Span<'p> {
    p: &'p Parser,
    edges: &'p [Edge],
    cells: &'p Cells,
    start: usize,
    end: usize,
    found: Vec<(Sign, Analysis)>,
    rejected: Vec<Rejection>,
}

impl Parser {
    pub fn new(grammar: Grammar, config: ParserConfig) -> Self {
        Parser { grammar, config }
    }

    pub fn grammar(&self) -> &Grammar {
        &self.grammar
    }

    pub fn config(&self) -> &ParserConfig {
        &self.config
    }

    pub fn parse_str(&self, sentence: &str) -> Result<Forest, ParseError> {
        self.parse(&tokenize(sentence))
    }

    pub fn parse(&self, tokens: &[String]) -> Result<Forest, ParseError> {
        let g = &self.grammar;
        let unknown: Vec<String> =
            tokens.iter().filter(|t| g.lexicon.lookup_indices(t).is_empty()).cloned().collect();
        if !unknown.is_empty() {
            return Err(ParseError::UnknownWords(unknown));
        }
        let n = tokens.len();
        let mut cells: Cells = vec![vec![Vec::new(); n + 1]; n + 1];
        let mut edges: Vec<Edge> = Vec::new();
        let mut rejections = Vec::new();
        let mut index: HashMap<(usize, usize, Sign), usize> = HashMap::new();
        let mut add = |edges: &mut Vec<Edge>, cells: &mut Cells, start: usize, end: usize, sign: Sign, a: Analysis| {
            match index.get(&(start, end, sign.clone())) {
                Some(&id) => edges[id].analyses.push(a),
                None => {
                    let id = edges.len();
                    index.insert((start, end, sign.clone()), id);
                    cells[start][end].push(id);
                    edges.push(Edge { id, start, end, sign, analyses: vec![a] });
                }
            }
        };
        for (i, t) in tokens.iter().enumerate() {
            for &entry in g.lexicon.lookup_indices(t) {
                let sign = g.lexicon.get(entry).sign.clone();
                add(&mut edges, &mut cells, i, i + 1, sign, Analysis::Lexical { entry });
            }
        }
        for len in 2..=n {
            let starts: Vec<usize> = (0..=n - len).collect();
            let fill = |&start: &usize| {
                let mut s = Span {
                    p: self,
                    edges: &edges,
                    cells: &cells,
                    start,
                    end: start + len,
                    found: Vec::new(),
                    rejected: Vec::new(),
                };
                s.fill();
                (start, s.found, s.rejected)
            };
            let results: Vec<_> = if self.config.parallel {
                starts.par_iter().map(fill).collect()
            } else {
                starts.iter().map(fill).collect()
            };
            for (start, found, rejected) in results {
                for (sign, a) in found {
                    add(&mut edges, &mut cells, start, start + len, sign, a);
                }
                rejections.extend(rejected);
            }
            if edges.len() > self.config.edge_limit {
                return Err(ParseError::EdgeLimit(self.config.edge_limit));
            }
        }
        let mut forest = Forest { tokens: tokens.to_vec(), edges, roots: Vec::new(), rejections };
        forest.roots = forest.edges.iter().filter(|e| is_root(g, &forest, e)).map(|e| e.id).collect();
        Ok(forest)
    }
}

fn permutations(items: &[usize]) -> Vec<Vec<usize>> {
    if items.len() <= 1 {
        return vec![items.to_vec()];
    }
    let mut out = Vec::new();
    for i in 0..items.len() {
        let mut rest = items.to_vec();
        let x = rest.remove(i);
        for mut p in permutations(&rest) {
            p.insert(0, x);
            out.push(p);
        }
    }
    out
}

impl<'p> Span<'p> {
    fn g(&self) -> &'p Grammar {
        &self.p.grammar
    }

    fn head_is(&self, e: usize, sort: crate::tfs::Sort) -> bool {
        self.edges[e].sign.head_sort(&self.g().geo).is_some_and(|h| self.g().sig.is_subsort(h, sort))
    }

    fn list_nonempty(&self, e: usize, f: crate::tfs::Feature) -> bool {
        let g = self.g();
        self.edges[e].sign.sort_at(&g.geo.valence_path(f)).is_some_and(|s| g.sig.is_subsort(s, g.geo.nelist))
    }

    fn is_marker(&self, e: usize) -> bool {
        self.edges[e].entry().is_some_and(|i| self.g().lexicon.get(i).template == "marker")
    }

    fn attempt(&mut self, c: Candidate, head: usize, ids: &[usize]) {
        match build_edge(self.g(), &c) {
            Ok(b) => {
                let others = c.others.iter().zip(ids).map(|((r, _), &id)| (*r, id)).collect();
                self.found.push((
                    b.sign,
                    Analysis::Phrase { schema: c.schema, head, others, config: Arc::new(b.config) },
                ));
            }
            Err(reason) => {
                if self.p.config.explain {
                    let daughters = c
                        .surface
                        .iter()
                        .map(|s| match s {
                            Slot::Head => format!("*{}*", self.edges[head].sign.phon.join(" ")),
                            Slot::Other(i) => format!("[{}]", self.edges[ids[*i]].sign.phon.join(" ")),
                        })
                        .collect::<Vec<_>>()
                        .join(" ");
                    self.rejected.push(Rejection { start: self.start, end: self.end, schema: c.schema, daughters, reason });
                }
            }
        }
    }

    fn fill(&mut self) {
        self.binary();
        self.flat();
    }

    fn binary(&mut self) {
        let (i, j) = (self.start, self.end);
        let (g, edges, cells) = (self.g(), self.edges, self.cells);
        let geo = &g.geo;
        for k in i + 1..j {
            for &l in &cells[i][k] {
                for &r in &cells[k][j] {
                    let (left, right) = (&edges[l], &edges[r]);
                    if self.head_is(r, geo.verb) {
                        let members = right.sign.slash(&g.sig, geo).len();
                        for m in 0..members {
                            let c = Candidate {
                                schema: Schema::III,
                                head: &right.sign,
                                head_entry: None,
                                others: vec![(Role::Filler, &left.sign)],
                                surface: vec![Slot::Other(0), Slot::Head],
                                binding: Some((0, m)),
                            };
                            self.attempt(c, r, &[l]);
                        }
                    }
                    if self.head_is(r, geo.noun) && self.list_nonempty(r, geo.spr) {
                        for (schema, role, sort) in [(Schema::Spec, Role::Specifier, geo.det), (Schema::Adjunct, Role::Adjunct, geo.adj)] {
                            if self.head_is(l, sort) {
                                let c = Candidate {
                                    schema,
                                    head: &right.sign,
                                    head_entry: None,
                                    others: vec![(role, &left.sign)],
                                    surface: vec![Slot::Other(0), Slot::Head],
                                    binding: None,
                                };
                                self.attempt(c, r, &[l]);
                            }
                        }
                    }
                    if k == i + 1 && self.is_marker(l) && self.head_is(r, geo.verb) {
                        let entry = left.entry().map(|e| g.lexicon.get(e));
                        let c = Candidate {
                            schema: Schema::Marker,
                            head: &left.sign,
                            head_entry: entry,
                            others: vec![(Role::Complement, &right.sign)],
                            surface: vec![Slot::Head, Slot::Other(0)],
                            binding: None,
                        };
                        self.attempt(c, l, &[r]);
                    }
                }
            }
        }
    }

    fn tilings(&self, from: usize, to: usize) -> Vec<Vec<usize>> {
        if from == to {
            return vec![Vec::new()];
        }
        let mut out = Vec::new();
        for k in from + 1..=to {
            let usable: Vec<usize> = self.cells[from][k].iter().copied().filter(|&e| self.flat_daughter(e)).collect();
            if usable.is_empty() {
                continue;
            }
            let rests = self.tilings(k, to);
            for &e in &usable {
                for rest in &rests {
                    let mut t = vec![e];
                    t.extend(rest);
                    out.push(t);
                }
            }
        }
        out
    }

    /// Non-verbal daughters of a flat clause are saturated phrases.
    fn flat_daughter(&self, e: usize) -> bool {
        let geo = &self.g().geo;
        self.head_is(e, geo.verb) || !(self.list_nonempty(e, geo.comps) || self.list_nonempty(e, geo.spr))
    }

    fn flat(&mut self) {
        let (i, j) = (self.start, self.end);
        let (g, edges) = (self.g(), self.edges);
        let geo = &g.geo;
        let heads: Vec<usize> = self.cells[i][i + 1]
            .iter()
            .copied()
            .filter(|&h| !self.is_marker(h) && (self.head_is(h, geo.verb) || self.head_is(h, geo.prep)))
            .collect();
        if heads.is_empty() {
            return;
        }
        let mut schemas = vec![Schema::I, Schema::II];
        if !self.p.config.disable_iiib {
            schemas.push(Schema::IIIb);
        }
        for tiling in self.tilings(i + 1, j) {
            let adv: Vec<bool> = tiling.iter().map(|&e| self.head_is(e, geo.adv)).collect();
            let nominal: Vec<bool> = tiling.iter().map(|&e| self.head_is(e, geo.noun)).collect();
            let r_plus: Vec<bool> = tiling
                .iter()
                .map(|&e| self.edges[e].sign.sort_at(&geo.r_path()).is_some_and(|r| g.sig.is_subsort(r, geo.plus)))
                .collect();
            let k = tiling.len();
            // (subject, filler) choices per schema
            let mut choices: Vec<(Schema, Option<usize>, Option<usize>)> = Vec::new();
            for &schema in &schemas {
                match schema {
                    Schema::I => choices.extend((0..k).filter(|&s| nominal[s]).map(|s| (schema, Some(s), None))),
                    Schema::II => choices.push((schema, None, None)),
                    _ => {
                        for f in (0..k).filter(|&f| nominal[f] && r_plus[f]) {
                            choices.push((schema, None, Some(f)));
                            choices.extend((0..k).filter(|&s| s != f && nominal[s]).map(|s| (schema, Some(s), Some(f))));
                        }
                    }
                }
            }
            for (schema, subj, filler) in choices {
                let comps: Vec<usize> =
                    (0..k).filter(|&p| Some(p) != subj && Some(p) != filler && !adv[p]).collect();
                let adjuncts: Vec<usize> = (0..k).filter(|&p| adv[p]).collect();
                for perm in permutations(&comps) {
                    // valence order: subject, complements, filler, adjuncts
                    let mut order: Vec<(Role, usize)> = Vec::new();
                    order.extend(subj.map(|s| (Role::Subject, s)));
                    order.extend(perm.iter().map(|&p| (Role::Complement, p)));
                    order.extend(filler.map(|f| (Role::Filler, f)));
                    order.extend(adjuncts.iter().map(|&p| (Role::Adjunct, p)));
                    let ids: Vec<usize> = order.iter().map(|&(_, p)| tiling[p]).collect();
                    let mut surface = vec![Slot::Head];
                    for p in 0..k {
                        surface.push(Slot::Other(order.iter().position(|&(_, q)| q == p).expect("placed")));
                    }
                    let mut bindings = vec![None];
                    if schema == Schema::IIIb {
                        bindings = order
                            .iter()
                            .enumerate()
                            .filter(|(_, (r, _))| *r == Role::Complement)
                            .flat_map(|(oi, &(_, p))| {
                                let n = self.edges[tiling[p]].sign.slash(&g.sig, geo).len();
                                (0..n).map(move |m| Some((oi + 1, m)))
                            })
                            .collect();
                    }
                    for &h in &heads {
                        let entry = edges[h].entry().map(|e| g.lexicon.get(e));
                        for &binding in &bindings {
                            let c = Candidate {
                                schema,
                                head: &edges[h].sign,
                                head_entry: entry,
                                others: order.iter().map(|&(r, p)| (r, &edges[tiling[p]].sign)).collect(),
                                surface: surface.clone(),
                                binding,
                            };
                            self.attempt(c, h, &ids);
                        }
                    }
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parser(config: ParserConfig) -> Parser {
        Parser::new(Grammar::shipped(), config)
    }

    fn count(s: &str) -> u64 {
        parser(ParserConfig::default()).parse_str(s).unwrap().parse_count()
    }

    #[test]
    fn spec_sentences() {
        assert!(count("waar schenkt beatrix het huis aan") >= 1);
        assert_eq!(count("wat schenkt beatrix het huis aan"), 0);
        assert!(count("daar zal peggy waarschijnlijk op rekenen") >= 1);
    }

    #[test]
    fn roots_of_the_waar_question() {
        let g = Grammar::shipped();
        let f = parser(ParserConfig::default()).parse_str("waar schenkt beatrix het huis aan").unwrap();
        assert_eq!(f.roots.len(), 1);
        assert!(is_root(&g, &f, &f.edges[f.roots[0]]));
        let clause = f.edges.iter().find(|e| e.start == 1 && e.end == 6).unwrap();
        assert!(!is_root(&g, &f, clause));
        assert_eq!(clause.sign.slash(&g.sig, &g.geo).len(), 1);
        let pp = f.edges.iter().find(|e| e.sign.head_sort(&g.geo).is_some_and(|h| g.sig.is_subsort(h, g.geo.prep))).unwrap();
        assert!(!is_root(&g, &f, pp));
    }

    #[test]
    fn unknown_words_are_listed() {
        let e = parser(ParserConfig::default()).parse_str("waar schenkt Jan het boek aan").unwrap_err();
        assert_eq!(e, ParseError::UnknownWords(vec!["jan".into(), "boek".into()]));
    }

    #[test]
    fn edge_limit() {
        let p = parser(ParserConfig { edge_limit: 5, ..ParserConfig::default() });
        assert_eq!(p.parse_str("beatrix schenkt het huis aan de stichting").unwrap_err(), ParseError::EdgeLimit(5));
    }

    #[test]
    fn tokens_are_normalised() {
        assert_eq!(tokenize("Aan welke stichting schenkt Beatrix het huis?"), ["aan", "welke", "stichting", "schenkt", "beatrix", "het", "huis"]);
        assert!(tokenize(" ?! ").is_empty());
    }

    #[test]
    fn scheduling_does_not_change_the_forest() {
        let s = "peggy hoeft daar niet op te rekenen";
        let serial = parser(ParserConfig { parallel: false, explain: true, ..ParserConfig::default() }).parse_str(s).unwrap();
        for _ in 0..4 {
            let par = parser(ParserConfig { explain: true, ..ParserConfig::default() }).parse_str(s).unwrap();
            assert_eq!(par, serial);
        }
    }

    #[test]
    fn mittelfeld_schema_can_be_switched_off() {
        let p = parser(ParserConfig { disable_iiib: true, ..ParserConfig::default() });
        assert_eq!(p.parse_str("beatrix schenkt er geen huis aan").unwrap().parse_count(), 0);
        assert_eq!(p.parse_str("waar schenkt beatrix het huis aan").unwrap().parse_count(), 1);
    }

    #[test]
    fn packed_counts_match_unpacked_trees() {
        let f = parser(ParserConfig::default()).parse_str("beatrix schenkt het huis aan de stichting").unwrap();
        assert_eq!(f.root_trees(100).len() as u64, f.parse_count());
    }

    #[test]
    fn permutations_of_three() {
        let p = permutations(&[1, 2, 3]);
        assert_eq!(p.len(), 6);
        assert_eq!(p[0], [1, 2, 3]);
        assert_eq!(p[5], [3, 2, 1]);
    }
}
