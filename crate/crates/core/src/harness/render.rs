//! Text and JSON renderings of signs and derivations.

use serde::Serialize;

use crate::grammar::{Role, Sign};
use crate::lexicon::Grammar;
use crate::parser::{Forest, Tree};
use crate::tfs::avm;

pub const DERIVATION_SCHEMA: &str = "strand-derivation/1";

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DerivationFormat {
    Text,
    Json,
}

/// Bracketed matrix with PHON at the top. Tags are numbered in order of
/// first occurrence, so the output parses back to the same sign.
pub fn render_avm(g: &Grammar, s: &Sign) -> String {
    avm::render_with_phon(&g.sig, &s.fs, &s.phon, true)
}

fn role_name(role: Option<Role>) -> String {
    role.map_or_else(|| "head".to_string(), |r| r.to_string())
}

/// Indented tree, one constituent per line. Phrases show their schema,
/// words their lexical rule, if any.
pub fn render_derivation(g: &Grammar, forest: &Forest, tree: &Tree) -> String {
    let mut out = String::new();
    text(g, forest, tree, None, 0, &mut out);
    out.pop();
    out
}

fn text(g: &Grammar, forest: &Forest, tree: &Tree, role: Option<Option<Role>>, depth: usize, out: &mut String) {
    out.push_str(&"  ".repeat(depth));
    if let Some(r) = role {
        out.push_str(&role_name(r));
        out.push_str(": ");
    }
    match tree {
        Tree::Word { entry, .. } => out.push_str(&g.lexicon.get(*entry).to_string()),
        Tree::Phrase { edge, schema, daughters } => {
            out.push_str(&format!("[{schema}] {}", forest.edges[*edge].sign.phon.join(" ")));
            out.push('\n');
            for (r, d) in daughters {
                text(g, forest, d, Some(*r), depth + 1, out);
            }
            return;
        }
    }
    out.push('\n');
}

#[derive(Serialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
enum Node {
    Word {
        role: Option<String>,
        span: [usize; 2],
        form: String,
        entry: String,
        rule: Option<String>,
    },
    Phrase {
        role: Option<String>,
        span: [usize; 2],
        schema: String,
        phon: String,
        daughters: Vec<Node>,
    },
}

fn node(g: &Grammar, forest: &Forest, tree: &Tree, role: Option<String>) -> Node {
    let e = &forest.edges[tree.edge()];
    let span = [e.start, e.end];
    match tree {
        Tree::Word { entry, .. } => {
            let lex = g.lexicon.get(*entry);
            Node::Word {
                role,
                span,
                form: lex.phon.clone(),
                entry: lex.id.clone(),
                rule: lex.rule().map(|r| r.to_string()),
            }
        }
        Tree::Phrase { schema, daughters, .. } => Node::Phrase {
            role,
            span,
            schema: schema.name().to_string(),
            phon: e.sign.phon.join(" "),
            daughters: daughters.iter().map(|(r, d)| node(g, forest, d, Some(role_name(*r)))).collect(),
        },
    }
}

#[derive(Serialize)]
struct Derivations<'a> {
    schema: &'static str,
    tokens: &'a [String],
    trees: Vec<Node>,
}

/// Versioned JSON for a list of derivations of one sentence.
pub fn render_derivation_json(g: &Grammar, forest: &Forest, trees: &[Tree]) -> serde_json::Value {
    let d = Derivations {
        schema: DERIVATION_SCHEMA,
        tokens: &forest.tokens,
        trees: trees.iter().map(|t| node(g, forest, t, None)).collect(),
    };
    serde_json::to_value(d).expect("derivation serializes")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parser::{Parser, ParserConfig};

    fn parse(s: &str) -> (Grammar, Forest) {
        let g = Grammar::shipped();
        let f = Parser::new(g.clone(), ParserConfig::default()).parse_str(s).unwrap();
        (g, f)
    }

    #[test]
    fn waar_clause_tree() {
        let (g, f) = parse("waar schenkt beatrix het huis aan");
        let trees = f.root_trees(10);
        assert_eq!(trees.len(), 1);
        let t = render_derivation(&g, &f, &trees[0]);
        let lines: Vec<&str> = t.lines().collect();
        assert_eq!(lines[0], "[III] waar schenkt beatrix het huis aan");
        assert_eq!(lines[1], "  filler: waar");
        assert!(lines[2].starts_with("  head: [I] schenkt"), "{t}");
        assert!(t.contains("complement: aan ⟨PCELR⟩"), "{t}");
    }

    #[test]
    fn er_is_a_sister_of_the_verb() {
        let (g, f) = parse("beatrix schenkt er geen huis aan");
        let t = render_derivation(&g, &f, &f.root_trees(1)[0]);
        assert!(t.contains("  head: [IIIb] schenkt er geen huis aan"), "{t}");
        assert!(t.contains("    head: schenkt ⟨SELR⟩"), "{t}");
        assert!(t.contains("    filler: er"), "{t}");
    }

    #[test]
    fn lexical_edge_is_one_leaf() {
        let (g, f) = parse("beatrix");
        let t = f.trees(0, 5);
        assert_eq!(render_derivation(&g, &f, &t[0]), "beatrix");
        let v = render_derivation_json(&g, &f, &t);
        assert_eq!(v["schema"], DERIVATION_SCHEMA);
        assert_eq!(v["trees"][0]["kind"], "word");
        assert_eq!(v["trees"][0]["entry"], "beatrix.1");
    }

    #[test]
    fn json_tree_has_rules_on_leaves() {
        let (g, f) = parse("waar schenkt beatrix het huis aan");
        let v = render_derivation_json(&g, &f, &f.root_trees(1));
        let root = &v["trees"][0];
        assert_eq!(root["schema"], "III");
        assert_eq!(root["span"], serde_json::json!([0, 6]));
        let clause = &root["daughters"][1];
        assert_eq!(clause["role"], "head");
        let aan = clause["daughters"].as_array().unwrap().last().unwrap();
        assert_eq!(aan["rule"], "PCELR");
        assert_eq!(aan["role"], "complement");
    }

    #[test]
    fn saturated_sign_shows_empty_lists() {
        let (g, f) = parse("beatrix waardeert dat");
        let s = render_avm(&g, &f.edges[f.roots[0]].sign);
        assert!(s.contains("SUBJ <>") || s.contains("SUBJ elist"), "{s}");
        assert!(s.contains("COMPS <>") || s.contains("COMPS elist"), "{s}");
    }
}
