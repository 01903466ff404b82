//! A typed-feature-structure engine and chart parser for a fragment of
//! Dutch, with extraction handled by lexical rules instead of traces.

pub mod grammar;
pub mod harness;
pub mod lexicon;
pub mod lexrules;
pub mod parser;
pub mod tfs;
