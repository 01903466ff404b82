//! Typed feature structures: the sort hierarchy, non-destructive graph
//! unification with structure sharing, subsumption, and negative constraints.

pub mod avm;
mod dag;
mod fs;
#[cfg(test)]
mod lattice;
mod signature;

use std::sync::{Arc, OnceLock};

pub use dag::{unify, unify_at, Clash, ClashKind, Dag};
pub use fs::{subsumes, subsumes_at, FeatureStructure, Graph, NegConstraint, NodeId};
pub use signature::{Feature, Signature, SignatureBuilder, SignatureError, Sort};

pub(crate) use fs::chain_of;

/// Text of the shipped sort hierarchy.
pub const SHIPPED_SORTS: &str = include_str!("../../../../grammar/dutch.sorts");

/// The shipped signature, parsed once.
pub fn shipped_signature() -> Arc<Signature> {
    static SIG: OnceLock<Arc<Signature>> = OnceLock::new();
    SIG.get_or_init(|| Arc::new(Signature::parse(SHIPPED_SORTS).expect("shipped sorts are valid")))
        .clone()
}

/// Greatest lower bound of two sorts by name.
pub fn glb<'a>(sig: &'a Signature, a: &str, b: &str) -> Result<Option<&'a str>, SignatureError> {
    sig.glb_named(a, b)
}
