//! Acceptance suite: one test per criterion. Run with
//! `cargo test -p strand --test acceptance`.

use std::collections::BTreeSet;
use std::path::PathBuf;
use std::time::{Duration, Instant};

use rand::seq::IteratorRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use strand::grammar::{Role, Slot};
use strand::harness::{load_corpus, run_items, CorpusItem, Judgment, Report};
use strand::lexicon::Grammar;
use strand::lexrules::{apply_pcelr, RuleSet};
use strand::parser::{audit, build_edge, Analysis, Candidate, Forest, Parser, ParserConfig, Schema, Tree};
use strand::tfs::{avm, subsumes, subsumes_at, unify, Dag, FeatureStructure, NodeId, Signature, Sort};

fn corpus(name: &str) -> Vec<CorpusItem> {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../corpus").join(name);
    load_corpus(&path).unwrap()
}

fn everything() -> Vec<CorpusItem> {
    let mut items = corpus("stranding.tsv");
    items.extend(corpus("sanity.tsv"));
    items
}

fn parser(g: Grammar, config: ParserConfig) -> Parser {
    Parser::new(g, config)
}

/// Ids that get at least one parse.
fn parsed(p: &Parser, items: &[CorpusItem]) -> BTreeSet<String> {
    run_items(p, items).items.into_iter().filter(|o| o.parses > 0).map(|o| o.id).collect()
}

fn ids(v: &[&str]) -> BTreeSet<String> {
    v.iter().map(|s| s.to_string()).collect()
}

#[test]
fn corpus_fidelity() {
    let p = parser(Grammar::shipped(), ParserConfig::default());
    let start = Instant::now();
    let main = run_items(&p, &corpus("stranding.tsv"));
    let elapsed = start.elapsed();
    let sanity = run_items(&p, &corpus("sanity.tsv"));
    eprintln!("{main}\n{sanity}\nstranding corpus in {elapsed:?}");
    assert_eq!((main.total, main.passed), (18, 18));
    assert_eq!((sanity.total, sanity.passed), (2, 2));
    assert!(elapsed < Duration::from_secs(1), "{elapsed:?}");
}

#[test]
fn derived_entry_fidelity() {
    let g = Grammar::shipped();
    let derived = apply_pcelr(&g.sig, &g.geo, &g.instantiate_p0("aan").unwrap()).unwrap();
    // written out by hand from the derived-preposition matrix: NP[ACC][R+]
    // is a saturated accusative R+ nominal LOCAL
    let expected = r#"
        [sign
          PHON <"aan">
          SYNSEM [synsem
            LOCAL [local
              CAT [category HEAD [prep PFORM aan] SUBJ <> SPR <> COMPS <>]
              CONTENT [7] [ppro INDEX [index GENDER neut]]]
            NONLOCAL [nonlocal
              INHER [inherited
                SLASH {[local
                  CAT [category HEAD [noun CASE acc R plus] SUBJ <> SPR <> COMPS <>]
                  CONTENT [7]]}]
              TO-BIND [to-bind SLASH {}]]]]"#;
    let (fs, phon) = avm::parse_with_phon(&g.sig, expected).unwrap();
    assert_eq!(phon.unwrap(), derived.sign.phon);
    assert!(derived.neg_constraints().is_empty());
    assert_eq!(derived.sign.fs, fs, "\n{}", avm::render(&g.sig, &derived.sign.fs));
}

#[test]
fn rule_interaction_with_mittelfeld_schema() {
    let items = everything();
    let on = parsed(&parser(Grammar::shipped(), ParserConfig::default()), &items);
    let off = parsed(&parser(Grammar::shipped(), ParserConfig { disable_iiib: true, ..ParserConfig::default() }), &items);
    let lost: BTreeSet<String> = on.difference(&off).cloned().collect();
    let gained: BTreeSet<String> = off.difference(&on).cloned().collect();
    assert_eq!(lost, ids(&["16a-daar", "16b-er"]));
    assert!(gained.is_empty(), "{gained:?}");
}

/// Grammatical items whose first word is a nominative subject.
fn subject_initial(g: &Grammar, items: &[CorpusItem]) -> BTreeSet<String> {
    let nom = avm::parse(&g.sig, "[SYNSEM|LOCAL|CAT|HEAD [noun CASE nom]]").unwrap();
    items
        .iter()
        .filter(|it| it.expected == Judgment::Grammatical)
        .filter(|it| g.lookup(&it.tokens[0]).iter().any(|e| subsumes(&g.sig, &nom, &e.sign.fs)))
        .map(|it| it.id.clone())
        .collect()
}

#[test]
fn lexical_rule_ablation() {
    let items = everything();
    let g = Grammar::shipped();
    let full = parsed(&parser(g.clone(), ParserConfig::default()), &items);
    let without = |rule: &str| {
        let ablated = g.with_rules(RuleSet::all().without(rule).unwrap());
        let kept = parsed(&parser(ablated, ParserConfig::default()), &items);
        assert!(kept.is_subset(&full), "{rule} added parses");
        full.difference(&kept).cloned().collect::<BTreeSet<String>>()
    };
    assert_eq!(without("PCELR"), ids(&["1c", "8c", "16a-daar", "16b-er"]));
    let declaratives = subject_initial(&g, &items);
    assert_eq!(declaratives.len(), 7, "{declaratives:?}");
    assert_eq!(without("SELR"), declaratives);
}

fn filler_count(t: &Tree) -> usize {
    match t {
        Tree::Word { .. } => 0,
        Tree::Phrase { daughters, .. } => daughters
            .iter()
            .map(|(r, d)| usize::from(*r == Some(Role::Filler)) + filler_count(d))
            .sum(),
    }
}

fn derived_leaves(g: &Grammar, t: &Tree) -> usize {
    match t {
        Tree::Word { entry, .. } => usize::from(!g.lexicon.get(*entry).is_base()),
        Tree::Phrase { daughters, .. } => daughters.iter().map(|(_, d)| derived_leaves(g, d)).sum(),
    }
}

#[test]
fn principle_audit() {
    let items = everything();
    let g = Grammar::shipped();
    let setups = [
        (g.clone(), false),
        (g.clone(), true),
        (g.with_rules(RuleSet::all().without("PCELR").unwrap()), false),
        (g.with_rules(RuleSet::all().without("SELR").unwrap()), false),
        (g.with_rules(RuleSet::none()), false),
    ];
    let (mut edges, mut analyses) = (0, 0);
    for (grammar, disable_iiib) in setups {
        let p = parser(grammar.clone(), ParserConfig { disable_iiib, ..ParserConfig::default() });
        for it in &items {
            let f = p.parse(&it.tokens).unwrap();
            edges += f.edges.len();
            analyses += f.edges.iter().map(|e| e.analyses.len()).sum::<usize>();
            let v = audit::audit(&grammar, &f);
            assert!(v.is_empty(), "{}: {:?}", it.id, v);
            assert!(audit::neuter_under_base_p(&grammar, &f).is_empty(), "{}", it.id);
            // every gap comes from exactly one rule application
            for t in f.root_trees(100) {
                assert_eq!(filler_count(&t), derived_leaves(&grammar, &t), "{}", it.id);
            }
        }
    }
    eprintln!("audited {edges} edges, {analyses} analyses");
}

fn random_fs(rng: &mut ChaCha8Rng, sig: &Signature, root: Sort, depth: u32) -> FeatureStructure {
    fn node(rng: &mut ChaCha8Rng, sig: &Signature, d: &mut Dag, done: &mut Vec<NodeId>, sort: Sort, depth: u32) -> NodeId {
        let n = d.add_node(sort);
        if depth > 0 {
            for (f, value) in sig.appropriate_features(sort).collect::<Vec<_>>() {
                if !rng.gen_bool(0.6) {
                    continue;
                }
                let shareable: Vec<NodeId> = done.iter().copied().filter(|&m| sig.is_subsort(d.sort(m), value)).collect();
                let child = if !shareable.is_empty() && rng.gen_bool(0.2) {
                    shareable[rng.gen_range(0..shareable.len())]
                } else {
                    let s = sig.subsorts_of(value).choose(rng).unwrap();
                    node(rng, sig, d, done, s, depth - 1)
                };
                d.set_arc(n, f, child);
            }
        }
        done.push(n);
        n
    }
    let mut d = Dag::new(sig);
    let r = node(rng, sig, &mut d, &mut Vec::new(), root, depth);
    d.extract_fs(r)
}

#[test]
fn unification_lattice_properties() {
    let g = Grammar::shipped();
    let sig = &*g.sig;
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let (mut structures, mut unified) = (0, 0);
    while structures < 10_000 {
        let root = sig.sorts().choose(&mut rng).unwrap();
        let depth = rng.gen_range(1..5);
        let a = random_fs(&mut rng, sig, root, depth);
        let other = sig.sorts().filter(|&t| sig.is_subsort(t, root) || sig.is_subsort(root, t)).choose(&mut rng).unwrap();
        let b = random_fs(&mut rng, sig, other, depth);
        structures += 2;

        assert_eq!(unify(sig, &a, &a).unwrap(), a, "idempotence");
        assert_eq!(a.copy(), a, "copy");
        match (unify(sig, &a, &b), unify(sig, &b, &a)) {
            (Ok(ab), Ok(ba)) => {
                unified += 1;
                assert_eq!(ab, ba, "commutativity");
                assert!(subsumes(sig, &a, &ab) && subsumes(sig, &b, &ab), "result below both inputs");
                assert!(subsumes(sig, &ab, &ba) && subsumes(sig, &ba, &ab), "mutual subsumption");
            }
            (Err(_), Err(_)) => {}
            _ => panic!("unification succeeds in one order only"),
        }
    }
    eprintln!("{structures} structures, {unified} of {} pairs unified", structures / 2);
    assert!(unified > structures / 10);
}

#[test]
fn negative_constraint_property() {
    let g = Grammar::shipped();
    let neuter = avm::parse(&g.sig, "[ppro INDEX [GENDER neut]]").unwrap();
    let prep = |e: &&strand::lexicon::LexicalEntry| e.sign.head_sort(&g.geo).is_some_and(|h| g.sig.is_subsort(h, g.geo.prep));
    let mut mismatches = Vec::new();
    let mut pairs = 0;
    for q in g.lexicon.base().filter(prep) {
        for p in g.lexicon.base().filter(|e| e.template == "pron") {
            pairs += 1;
            let content = p.sign.at(&g.geo.content_path()).unwrap();
            let oracle = !subsumes_at(&g.sig, &neuter, p.sign.fs.graph(), content);
            let c = Candidate {
                schema: Schema::II,
                head: &q.sign,
                head_entry: Some(q),
                others: vec![(Role::Complement, &p.sign)],
                surface: vec![Slot::Head, Slot::Other(0)],
                binding: None,
            };
            let combines = build_edge(&g, &c);
            if combines.is_ok() != oracle {
                mismatches.push(format!("{} + {}: oracle {oracle}, parser {:?}", q.phon, p.phon, combines.err()));
            }
        }
    }
    assert!(pairs > 0);
    assert!(mismatches.is_empty(), "{} of {pairs} pairs disagree:\n{}", mismatches.len(), mismatches.join("\n"));
}

fn forests(p: &Parser, items: &[CorpusItem]) -> Vec<Forest> {
    items.iter().map(|it| p.parse(&it.tokens).unwrap()).collect()
}

fn report_json(p: &Parser, items: &[CorpusItem]) -> String {
    let r: Report = run_items(p, items);
    r.to_json()
}

#[test]
fn determinism() {
    let items = everything();
    let serial = parser(Grammar::shipped(), ParserConfig { parallel: false, explain: true, ..ParserConfig::default() });
    let reference = forests(&serial, &items);
    let reference_json = report_json(&serial, &items);
    for _ in 0..3 {
        let par = parser(Grammar::shipped(), ParserConfig { explain: true, ..ParserConfig::default() });
        assert_eq!(forests(&par, &items), reference);
        assert_eq!(report_json(&par, &items), reference_json);
    }
    // a freshly loaded grammar gives the same forests
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../grammar");
    let loaded = parser(Grammar::load_dir(&dir).unwrap(), ParserConfig { parallel: false, explain: true, ..ParserConfig::default() });
    assert_eq!(forests(&loaded, &items), reference);
    let roots: usize = reference.iter().map(|f| f.roots.len()).sum();
    assert!(roots > 0);
    assert!(reference.iter().flat_map(|f| &f.edges).any(|e| matches!(e.analyses[0], Analysis::Phrase { .. })));
}
