use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser as ClapParser, Subcommand};
use serde_json::json;

use strand::harness::{explain_failure, render_avm, render_derivation, render_derivation_json, run_corpus};
use strand::lexicon::Grammar;
use strand::lexrules::RuleSet;
use strand::parser::{audit, tokenize, ParseError, Parser, ParserConfig};

/// Parser and regression runner for the Dutch extraction grammar.
#[derive(ClapParser)]
#[command(name = "strand", version)]
struct Cli {
    /// Directory holding *.sorts and *.lex files (default: the built-in grammar).
    #[arg(long, global = true)]
    grammar: Option<PathBuf>,
    /// Leave a lexical rule out of closure (SELR, VCELR or PCELR). Repeatable.
    #[arg(long = "disable-rule", global = true)]
    disable_rule: Vec<String>,
    /// Fill chart cells on one thread.
    #[arg(long, global = true)]
    serial: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Parse one sentence.
    Parse(ParseArgs),
    /// Judgment corpora.
    #[command(subcommand)]
    Corpus(CorpusCommand),
    /// Inspect the lexicon.
    #[command(subcommand)]
    Lexicon(LexiconCommand),
}

#[derive(Args)]
struct ParseArgs {
    sentence: String,
    /// Print the root signs as attribute-value matrices.
    #[arg(long)]
    avm: bool,
    /// Print derivation trees.
    #[arg(long)]
    derivation: bool,
    #[arg(long)]
    json: bool,
    /// When nothing parses, show the widest edges and rejected combinations.
    #[arg(long)]
    explain: bool,
    #[arg(long)]
    disable_schema_iiib: bool,
    /// Most derivations to print.
    #[arg(long, default_value_t = 20)]
    limit: usize,
}

#[derive(Subcommand)]
enum CorpusCommand {
    /// Run a corpus file and report pass/fail per item.
    Run {
        file: PathBuf,
        #[arg(long)]
        json: bool,
        #[arg(long)]
        disable_schema_iiib: bool,
    },
}

#[derive(Subcommand)]
enum LexiconCommand {
    /// Print entries as attribute-value matrices.
    Dump {
        /// Include entries produced by lexical rules.
        #[arg(long)]
        derived: bool,
    },
}

fn grammar(cli: &Cli) -> Result<Grammar, String> {
    let g = match &cli.grammar {
        Some(dir) => Grammar::load_dir(dir).map_err(|e| e.to_string())?,
        None => Grammar::shipped(),
    };
    if cli.disable_rule.is_empty() {
        return Ok(g);
    }
    let mut rules = RuleSet::all();
    for r in &cli.disable_rule {
        rules = rules.without(r).ok_or_else(|| format!("unknown rule {r}"))?;
    }
    Ok(g.with_rules(rules))
}

fn config(cli: &Cli, disable_iiib: bool) -> ParserConfig {
    ParserConfig { disable_iiib, parallel: !cli.serial, ..ParserConfig::default() }
}

fn parse(cli: &Cli, g: Grammar, a: &ParseArgs) -> ExitCode {
    let parser = Parser::new(g.clone(), config(cli, a.disable_schema_iiib));
    let tokens = tokenize(&a.sentence);
    let forest = match parser.parse(&tokens) {
        Ok(f) => f,
        Err(e @ ParseError::UnknownWords(_)) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    };
    let count = forest.parse_count();
    let trees = forest.root_trees(a.limit);
    let explanation = if count == 0 && a.explain { explain_failure(&parser, &tokens) } else { Vec::new() };
    let violations = audit::audit(&g, &forest);
    if a.json {
        let mut out = json!({
            "schema": "strand-parse/1",
            "tokens": tokens,
            "parses": count,
            "audit_violations": violations,
        });
        if a.derivation {
            out["derivations"] = render_derivation_json(&g, &forest, &trees);
        }
        if a.avm {
            out["roots"] = forest.roots.iter().map(|&r| render_avm(&g, &forest.edges[r].sign)).collect();
        }
        if a.explain {
            out["explanation"] = json!(explanation);
        }
        println!("{}", serde_json::to_string_pretty(&out).expect("serializes"));
    } else {
        println!("{} parse{}: {}", count, if count == 1 { "" } else { "s" }, tokens.join(" "));
        if a.derivation {
            for t in &trees {
                println!("\n{}", render_derivation(&g, &forest, t));
            }
        }
        if a.avm {
            for &r in &forest.roots {
                println!("\n{}", render_avm(&g, &forest.edges[r].sign));
            }
        }
        for line in &explanation {
            println!("{line}");
        }
        for v in &violations {
            eprintln!("audit: {v}");
        }
    }
    if count > 0 && violations.is_empty() {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let g = match grammar(&cli) {
        Ok(g) => g,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    match &cli.command {
        Command::Parse(a) => parse(&cli, g, a),
        Command::Corpus(CorpusCommand::Run { file, json, disable_schema_iiib }) => {
            let parser = Parser::new(g, config(&cli, *disable_schema_iiib));
            match run_corpus(&parser, file) {
                Err(e) => {
                    eprintln!("error: {e}");
                    ExitCode::from(2)
                }
                Ok(r) => {
                    if *json {
                        println!("{}", r.to_json());
                    } else {
                        println!("{r}");
                    }
                    if r.all_pass() {
                        ExitCode::SUCCESS
                    } else {
                        ExitCode::from(1)
                    }
                }
            }
        }
        Command::Lexicon(LexiconCommand::Dump { derived }) => {
            for e in g.lexicon.entries().iter().filter(|e| *derived || e.is_base()) {
                println!("{}  ({})\n{}\n", e.id, e, render_avm(&g, &e.sign));
            }
            ExitCode::SUCCESS
        }
    }
}
