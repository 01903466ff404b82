//! Algebraic properties of unification on random well-typed structures.

use std::sync::Arc;

use rand::seq::IteratorRandom;
use rand::Rng;

use super::{shipped_signature, subsumes, unify, Dag, FeatureStructure, NodeId, Signature, Sort};

fn random_sort(rng: &mut impl Rng, sig: &Signature) -> Sort {
    sig.sorts().choose(rng).expect("signature has sorts")
}

/// A sort comparable with `s`: one of its subsorts or ancestors.
fn related_sort(rng: &mut impl Rng, sig: &Signature, s: Sort) -> Sort {
    sig.sorts()
        .filter(|&t| sig.is_subsort(t, s) || sig.is_subsort(s, t))
        .choose(rng)
        .expect("s is related to itself")
}

struct Gen<'a, R> {
    rng: &'a mut R,
    sig: &'a Signature,
    dag: Dag<'a>,
    /// Finished nodes, available for sharing.
    done: Vec<NodeId>,
}

impl<R: Rng> Gen<'_, R> {
    fn node(&mut self, sort: Sort, depth: u32) -> NodeId {
        let sig = self.sig;
        let n = self.dag.add_node(sort);
        if depth > 0 {
            let features: Vec<_> = sig.appropriate_features(sort).collect();
            for (f, value) in features {
                if !self.rng.gen_bool(0.6) {
                    continue;
                }
                let shareable: Vec<NodeId> =
                    self.done.iter().copied().filter(|&d| sig.is_subsort(self.dag.sort(d), value)).collect();
                let child = if !shareable.is_empty() && self.rng.gen_bool(0.2) {
                    shareable[self.rng.gen_range(0..shareable.len())]
                } else {
                    let s = sig.subsorts_of(value).choose(self.rng).expect("value sort");
                    self.node(s, depth - 1)
                };
                self.dag.set_arc(n, f, child);
            }
        }
        self.done.push(n);
        n
    }
}

/// A structure rooted at `root`, at most `depth` arcs deep, with random
/// reentrancies.
fn random_fs(rng: &mut impl Rng, sig: &Signature, root: Sort, depth: u32) -> FeatureStructure {
    generate(rng, sig, root, depth, false)
}

/// As [`random_fs`], sometimes with a satisfied negative constraint on a
/// root feature.
fn random_fs_constrained(rng: &mut impl Rng, sig: &Signature, root: Sort, depth: u32) -> FeatureStructure {
    generate(rng, sig, root, depth, true)
}

fn generate(rng: &mut impl Rng, sig: &Signature, root: Sort, depth: u32, constrain: bool) -> FeatureStructure {
    let mut g = Gen { rng, sig, dag: Dag::new(sig), done: Vec::new() };
    let r = g.node(root, depth);
    if constrain && g.rng.gen_bool(0.2) {
        if let Some((f, value)) = sig.appropriate_features(root).choose(g.rng) {
            let forbidden = sig.subsorts_of(value).choose(g.rng).expect("value sort");
            g.dag.add_constraint(r, vec![f], Arc::new(FeatureStructure::atom(forbidden)));
            if g.dag.check_constraints().is_err() {
                g.dag.remove_constraints_at(r);
            }
        }
    }
    g.dag.extract_fs(r)
}

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(512))]

    #[test]
    fn unification_is_a_meet(seed in any::<u64>(), depth in 1u32..5) {
        let sig = shipped_signature();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let root = random_sort(&mut rng, &sig);
        let a = random_fs_constrained(&mut rng, &sig, root, depth);
        let other = related_sort(&mut rng, &sig, root);
        let b = random_fs_constrained(&mut rng, &sig, other, depth);

        let aa = unify(&sig, &a, &a);
        prop_assert_eq!(aa.as_ref().ok(), Some(&a));
        prop_assert_eq!(&a.copy(), &a);
        let ab = unify(&sig, &a, &b);
        let ba = unify(&sig, &b, &a);
        prop_assert_eq!(ab.is_ok(), ba.is_ok());
        if let (Ok(ab), Ok(ba)) = (ab, ba) {
            prop_assert_eq!(&ab, &ba);
            prop_assert!(subsumes(&sig, &a, &ab));
            prop_assert!(subsumes(&sig, &b, &ab));
            prop_assert!(subsumes(&sig, &ab, &ba) && subsumes(&sig, &ba, &ab));
        }
    }

    // negative constraints are outside the order, so only positive
    // structures are compared here
    #[test]
    fn subsumption_is_reflexive_and_antisymmetric(seed in any::<u64>()) {
        let sig = shipped_signature();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let root = random_sort(&mut rng, &sig);
        let a = random_fs(&mut rng, &sig, root, 3);
        let b = random_fs(&mut rng, &sig, root, 3);
        prop_assert!(subsumes(&sig, &a, &a));
        if subsumes(&sig, &a, &b) && subsumes(&sig, &b, &a) {
            prop_assert_eq!(a, b);
        }
    }
}
