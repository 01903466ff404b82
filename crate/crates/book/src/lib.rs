//! The guide's code listings, compiled and run as doc-tests. Each chapter
//! is a module so a failure points at its file.

#[doc = include_str!("../../../book/src/introduction.md")]
pub mod introduction {}
#[doc = include_str!("../../../book/src/feature-structures.md")]
pub mod feature_structures {}
#[doc = include_str!("../../../book/src/lexicon.md")]
pub mod lexicon {}
#[doc = include_str!("../../../book/src/lexical-rules.md")]
pub mod lexical_rules {}
#[doc = include_str!("../../../book/src/parsing.md")]
pub mod parsing {}
#[doc = include_str!("../../../book/src/corpus.md")]
pub mod corpus {}
