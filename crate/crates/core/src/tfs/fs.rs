use std::collections::HashMap;
use std::sync::Arc;

use super::signature::{Feature, Signature, Sort};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct NodeId(pub(crate) u32);

impl NodeId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub(crate) struct Node {
    pub(crate) sort: Sort,
    /// Sorted by feature.
    pub(crate) arcs: Vec<(Feature, NodeId)>,
}

/// A negative constraint: the value at `path` below `anchor` must not be
/// subsumed by `forbidden`. An undefined value never violates.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct NegConstraint {
    pub anchor: NodeId,
    pub path: Vec<Feature>,
    pub forbidden: Arc<FeatureStructure>,
}

impl PartialOrd for FeatureStructure {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for FeatureStructure {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.key().cmp(&other.key())
    }
}

/// A node arena with attached negative constraints. Graphs produced by the
/// unifier are canonical: nodes are numbered in depth-first order from the
/// roots, following arcs in feature order, so structural equality is
/// isomorphism.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Graph {
    pub(crate) nodes: Vec<Node>,
    pub(crate) constraints: Vec<NegConstraint>,
}

impl Graph {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn sort(&self, n: NodeId) -> Sort {
        self.nodes[n.index()].sort
    }

    pub fn arc(&self, n: NodeId, f: Feature) -> Option<NodeId> {
        let arcs = &self.nodes[n.index()].arcs;
        arcs.binary_search_by_key(&f, |(g, _)| *g)
            .ok()
            .map(|i| arcs[i].1)
    }

    pub fn arcs(&self, n: NodeId) -> &[(Feature, NodeId)] {
        &self.nodes[n.index()].arcs
    }

    pub fn constraints(&self) -> &[NegConstraint] {
        &self.constraints
    }

    pub fn follow(&self, mut n: NodeId, path: &[Feature]) -> Option<NodeId> {
        for &f in path {
            n = self.arc(n, f)?;
        }
        Some(n)
    }

    /// Members of a FIRST/REST chain starting at `n` (list or set), and the
    /// node the chain ends on.
    pub fn chain(&self, sig: &Signature, n: NodeId) -> (Vec<NodeId>, NodeId) {
        chain_of(self, sig, n)
    }
}

/// A rooted, well-typed feature structure. The root is always node 0.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct FeatureStructure {
    pub(crate) graph: Graph,
}

impl FeatureStructure {
    /// The structure with a single node of sort `sort`.
    pub fn atom(sort: Sort) -> Self {
        FeatureStructure {
            graph: Graph {
                nodes: vec![Node { sort, arcs: Vec::new() }],
                constraints: Vec::new(),
            },
        }
    }

    pub fn root(&self) -> NodeId {
        NodeId(0)
    }

    pub fn graph(&self) -> &Graph {
        &self.graph
    }

    pub fn root_sort(&self) -> Sort {
        self.graph.sort(NodeId(0))
    }

    pub fn node_count(&self) -> usize {
        self.graph.len()
    }

    pub fn sort(&self, n: NodeId) -> Sort {
        self.graph.sort(n)
    }

    pub fn arc(&self, n: NodeId, f: Feature) -> Option<NodeId> {
        self.graph.arc(n, f)
    }

    pub fn arcs(&self, n: NodeId) -> &[(Feature, NodeId)] {
        self.graph.arcs(n)
    }

    pub fn constraints(&self) -> &[NegConstraint] {
        &self.graph.constraints
    }

    /// Follows `path` from the root; `None` if any step is missing.
    pub fn resolve_path(&self, path: &[Feature]) -> Option<NodeId> {
        self.graph.follow(NodeId(0), path)
    }

    /// A structure with fresh node identities and no sharing with `self`.
    /// Graphs own their nodes, so this is a deep clone.
    pub fn copy(&self) -> Self {
        self.clone()
    }

    /// The substructure rooted at `n`, re-canonicalised.
    pub fn substructure(&self, sig: &Signature, n: NodeId) -> FeatureStructure {
        let mut dag = super::Dag::new(sig);
        let base = dag.import_graph(&self.graph);
        dag.extract_fs(NodeId(base + n.0))
    }

    fn key(&self) -> (&[Node], &[NegConstraint]) {
        (&self.graph.nodes, &self.graph.constraints)
    }
}

impl Ord for Node {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        (self.sort, &self.arcs).cmp(&(other.sort, &other.arcs))
    }
}

impl PartialOrd for Node {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

/// Read access shared by canonical graphs and the unification workspace.
pub(crate) trait View {
    fn v_sort(&self, n: NodeId) -> Sort;
    fn v_arc(&self, n: NodeId, f: Feature) -> Option<NodeId>;
    fn v_arcs(&self, n: NodeId) -> Vec<(Feature, NodeId)>;
    fn v_id(&self, n: NodeId) -> NodeId {
        n
    }
}

impl View for Graph {
    fn v_sort(&self, n: NodeId) -> Sort {
        self.sort(n)
    }
    fn v_arc(&self, n: NodeId, f: Feature) -> Option<NodeId> {
        self.arc(n, f)
    }
    fn v_arcs(&self, n: NodeId) -> Vec<(Feature, NodeId)> {
        self.arcs(n).to_vec()
    }
}

pub(crate) fn chain_of<V: View>(view: &V, sig: &Signature, start: NodeId) -> (Vec<NodeId>, NodeId) {
    let first = sig.feature("FIRST").expect("signature declares FIRST");
    let rest = sig.feature("REST").expect("signature declares REST");
    let mut members = Vec::new();
    let mut n = view.v_id(start);
    let mut seen = Vec::new();
    loop {
        if seen.contains(&n) {
            break;
        }
        seen.push(n);
        match (view.v_arc(n, first), view.v_arc(n, rest)) {
            (Some(m), Some(r)) => {
                members.push(view.v_id(m));
                n = view.v_id(r);
            }
            _ => break,
        }
    }
    (members, n)
}

/// Subsumption between two views: every sort, arc and reentrancy demand of
/// `general` (from `g`) holds in `specific` (from `s`).
pub(crate) fn subsumes_view<G: View, S: View>(
    sig: &Signature,
    general: &G,
    g: NodeId,
    specific: &S,
    s: NodeId,
) -> bool {
    let mut map: HashMap<NodeId, NodeId> = HashMap::new();
    let mut stack = vec![(general.v_id(g), specific.v_id(s))];
    while let Some((g, s)) = stack.pop() {
        match map.get(&g) {
            Some(&prev) if prev == s => continue,
            Some(_) => return false,
            None => {}
        }
        map.insert(g, s);
        if !sig.is_subsort(specific.v_sort(s), general.v_sort(g)) {
            return false;
        }
        for (f, gt) in general.v_arcs(g) {
            match specific.v_arc(s, f) {
                Some(st) => stack.push((general.v_id(gt), specific.v_id(st))),
                None => return false,
            }
        }
    }
    true
}

/// `general ⊑ specific`. Negative constraints are not part of the order.
pub fn subsumes(sig: &Signature, general: &FeatureStructure, specific: &FeatureStructure) -> bool {
    subsumes_view(sig, &general.graph, NodeId(0), &specific.graph, NodeId(0))
}

/// Subsumption between a whole structure and a node of some graph.
pub fn subsumes_at(sig: &Signature, general: &FeatureStructure, graph: &Graph, node: NodeId) -> bool {
    subsumes_view(sig, &general.graph, NodeId(0), graph, node)
}
