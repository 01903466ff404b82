use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

use super::fs::{subsumes_view, FeatureStructure, Graph, NegConstraint, Node, NodeId, View};
use super::signature::{Feature, Signature, Sort};

/// Why a unification failed, with the path of the conflict relative to the
/// point where unification started.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Clash {
    pub path: String,
    pub kind: ClashKind,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ClashKind {
    Sorts { left: String, right: String },
    Inappropriate { feature: String, sort: String },
    Negative { forbidden: String },
}

impl Clash {
    /// Prefixes the conflict path with `context`.
    pub fn within(mut self, context: &str) -> Self {
        self.path = match (context.is_empty(), self.path.is_empty()) {
            (true, _) => self.path,
            (false, true) => context.to_string(),
            (false, false) => format!("{context}|{}", self.path),
        };
        self
    }
}

impl fmt::Display for Clash {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let at = if self.path.is_empty() { "<root>" } else { &self.path };
        match &self.kind {
            ClashKind::Sorts { left, right } => write!(f, "sort clash at {at}: {left} vs {right}"),
            ClashKind::Inappropriate { feature, sort } => {
                write!(f, "feature {feature} not appropriate for {sort} at {at}")
            }
            ClashKind::Negative { forbidden } => {
                write!(f, "negative constraint violated at {at}: value is a {forbidden}")
            }
        }
    }
}

impl std::error::Error for Clash {}

#[derive(Clone, Debug)]
struct WNode {
    sort: Sort,
    arcs: Vec<(Feature, NodeId)>,
    fwd: Option<NodeId>,
}

#[derive(Clone, Debug)]
struct WConstraint {
    anchor: NodeId,
    path: Vec<Feature>,
    forbidden: Arc<FeatureStructure>,
}

/// A mutable unification workspace. Structures are imported, merged with
/// union-find, and extracted again as canonical graphs.
///
/// After a failed operation the workspace is in an unspecified state and
/// should be dropped (or a clone taken beforehand).
#[derive(Clone, Debug)]
pub struct Dag<'s> {
    sig: &'s Signature,
    nodes: Vec<WNode>,
    constraints: Vec<WConstraint>,
}

impl<'s> Dag<'s> {
    pub fn new(sig: &'s Signature) -> Self {
        Dag { sig, nodes: Vec::new(), constraints: Vec::new() }
    }

    pub fn signature(&self) -> &'s Signature {
        self.sig
    }

    pub fn add_node(&mut self, sort: Sort) -> NodeId {
        self.nodes.push(WNode { sort, arcs: Vec::new(), fwd: None });
        NodeId((self.nodes.len() - 1) as u32)
    }

    /// Copies `graph` in; returns the offset of its node 0.
    pub fn import_graph(&mut self, graph: &Graph) -> u32 {
        let base = self.nodes.len() as u32;
        for n in &graph.nodes {
            self.nodes.push(WNode {
                sort: n.sort,
                arcs: n.arcs.iter().map(|&(f, t)| (f, NodeId(t.0 + base))).collect(),
                fwd: None,
            });
        }
        for c in &graph.constraints {
            self.constraints.push(WConstraint {
                anchor: NodeId(c.anchor.0 + base),
                path: c.path.clone(),
                forbidden: c.forbidden.clone(),
            });
        }
        base
    }

    pub fn import(&mut self, fs: &FeatureStructure) -> NodeId {
        NodeId(self.import_graph(&fs.graph))
    }

    pub fn find(&self, mut n: NodeId) -> NodeId {
        while let Some(next) = self.nodes[n.index()].fwd {
            n = next;
        }
        n
    }

    pub fn sort(&self, n: NodeId) -> Sort {
        self.nodes[self.find(n).index()].sort
    }

    pub fn arc(&self, n: NodeId, f: Feature) -> Option<NodeId> {
        let n = self.find(n);
        let arcs = &self.nodes[n.index()].arcs;
        arcs.binary_search_by_key(&f, |(g, _)| *g)
            .ok()
            .map(|i| self.find(arcs[i].1))
    }

    pub fn follow(&self, mut n: NodeId, path: &[Feature]) -> Option<NodeId> {
        for &f in path {
            n = self.arc(n, f)?;
        }
        Some(self.find(n))
    }

    pub fn same(&self, a: NodeId, b: NodeId) -> bool {
        self.find(a) == self.find(b)
    }

    /// Follows `path`, creating missing arcs with nodes of the appropriate
    /// value sort. Fails if a feature is not appropriate on the way.
    pub fn follow_or_create(&mut self, n: NodeId, path: &[Feature]) -> Result<NodeId, Clash> {
        let mut n = self.find(n);
        for (i, &f) in path.iter().enumerate() {
            if let Some(t) = self.arc(n, f) {
                n = t;
                continue;
            }
            let here = self.sort(n);
            let widened = self.sig.glb(here, self.sig.intro(f)).ok_or_else(|| Clash {
                path: self.sig.path_string(&path[..i]),
                kind: ClashKind::Inappropriate {
                    feature: self.sig.feature_name(f).to_string(),
                    sort: self.sig.sort_name(here).to_string(),
                },
            })?;
            let value = self.sig.approp(widened, f).expect("intro sort carries feature");
            let t = self.add_node(value);
            self.set_arc(n, f, t);
            if widened != here {
                self.nodes[n.index()].sort = widened;
                let prefix = path[..i].to_vec();
                self.retype(vec![(n, prefix)])?;
            }
            n = self.find(t);
        }
        Ok(n)
    }

    /// Points `n.f` at `target`, replacing any existing arc. This is the one
    /// non-monotonic operation; lexical rules and phrase assembly use it.
    pub fn set_arc(&mut self, n: NodeId, f: Feature, target: NodeId) {
        let n = self.find(n);
        let arcs = &mut self.nodes[n.index()].arcs;
        match arcs.binary_search_by_key(&f, |(g, _)| *g) {
            Ok(i) => arcs[i].1 = target,
            Err(i) => arcs.insert(i, (f, target)),
        }
    }

    /// Sets the arc and re-establishes well-typing around `n`.
    pub fn set_arc_typed(&mut self, n: NodeId, f: Feature, target: NodeId) -> Result<(), Clash> {
        self.set_arc(n, f, target);
        self.retype(vec![(self.find(n), Vec::new())])
    }

    pub fn add_constraint(&mut self, anchor: NodeId, path: Vec<Feature>, forbidden: Arc<FeatureStructure>) {
        self.constraints.push(WConstraint { anchor, path, forbidden });
    }

    /// Drops every constraint anchored at `anchor`; returns how many.
    pub fn remove_constraints_at(&mut self, anchor: NodeId) -> usize {
        let anchor = self.find(anchor);
        let before = self.constraints.len();
        let mut kept = Vec::new();
        for c in std::mem::take(&mut self.constraints) {
            if self.find(c.anchor) != anchor {
                kept.push(c);
            }
        }
        self.constraints = kept;
        before - self.constraints.len()
    }

    pub fn constraints_at(&self, anchor: NodeId) -> Vec<(Vec<Feature>, Arc<FeatureStructure>)> {
        let anchor = self.find(anchor);
        self.constraints
            .iter()
            .filter(|c| self.find(c.anchor) == anchor)
            .map(|c| (c.path.clone(), c.forbidden.clone()))
            .collect()
    }

    /// Restricts the sort of `n` to `glb(sort(n), sort)`.
    pub fn constrain(&mut self, n: NodeId, sort: Sort) -> Result<(), Clash> {
        let n = self.find(n);
        let cur = self.nodes[n.index()].sort;
        let new = self.sig.glb(cur, sort).ok_or_else(|| Clash {
            path: String::new(),
            kind: ClashKind::Sorts {
                left: self.sig.sort_name(cur).to_string(),
                right: self.sig.sort_name(sort).to_string(),
            },
        })?;
        if new != cur {
            self.nodes[n.index()].sort = new;
            self.retype(vec![(n, Vec::new())])?;
        }
        Ok(())
    }

    /// Destructively unifies the nodes `a` and `b`.
    pub fn unify(&mut self, a: NodeId, b: NodeId) -> Result<(), Clash> {
        let mut pending = vec![(a, b, Vec::<Feature>::new())];
        let mut touched = Vec::new();
        while let Some((a, b, path)) = pending.pop() {
            let (a, b) = (self.find(a), self.find(b));
            if a == b {
                continue;
            }
            let (sa, sb) = (self.nodes[a.index()].sort, self.nodes[b.index()].sort);
            let s = self.sig.glb(sa, sb).ok_or_else(|| Clash {
                path: self.sig.path_string(&path),
                kind: ClashKind::Sorts {
                    left: self.sig.sort_name(sa).to_string(),
                    right: self.sig.sort_name(sb).to_string(),
                },
            })?;
            let b_arcs = std::mem::take(&mut self.nodes[b.index()].arcs);
            self.nodes[b.index()].fwd = Some(a);
            self.nodes[a.index()].sort = s;
            for (f, t) in b_arcs {
                match self.arc(a, f) {
                    Some(ta) => {
                        let mut p = path.clone();
                        p.push(f);
                        pending.push((ta, t, p));
                    }
                    None => self.set_arc(a, f, t),
                }
            }
            touched.push((a, path));
        }
        self.retype(touched)
    }

    /// Type inference to a fixpoint: a node carrying feature F is at least the
    /// sort introducing F, and every value is at least its appropriate sort.
    fn retype(&mut self, mut work: Vec<(NodeId, Vec<Feature>)>) -> Result<(), Clash> {
        while let Some((n, path)) = work.pop() {
            let n = self.find(n);
            let mut s = self.nodes[n.index()].sort;
            let arcs = self.nodes[n.index()].arcs.clone();
            for &(f, _) in &arcs {
                s = self.sig.glb(s, self.sig.intro(f)).ok_or_else(|| Clash {
                    path: self.sig.path_string(&path),
                    kind: ClashKind::Inappropriate {
                        feature: self.sig.feature_name(f).to_string(),
                        sort: self.sig.sort_name(self.nodes[n.index()].sort).to_string(),
                    },
                })?;
            }
            self.nodes[n.index()].sort = s;
            for (f, t) in arcs {
                let t = self.find(t);
                let v = self.sig.approp(s, f).expect("sort is below the feature's introducer");
                let cur = self.nodes[t.index()].sort;
                let new = self.sig.glb(cur, v).ok_or_else(|| {
                    let mut p = path.clone();
                    p.push(f);
                    Clash {
                        path: self.sig.path_string(&p),
                        kind: ClashKind::Sorts {
                            left: self.sig.sort_name(cur).to_string(),
                            right: self.sig.sort_name(v).to_string(),
                        },
                    }
                })?;
                if new != cur {
                    self.nodes[t.index()].sort = new;
                    let mut p = path.clone();
                    p.push(f);
                    work.push((t, p));
                }
            }
        }
        Ok(())
    }

    /// Re-checks every negative constraint against the current graph.
    pub fn check_constraints(&self) -> Result<(), Clash> {
        for c in &self.constraints {
            if let Some(v) = self.follow(c.anchor, &c.path) {
                if subsumes_view(self.sig, &c.forbidden.graph, NodeId(0), self, v) {
                    return Err(Clash {
                        path: self.sig.path_string(&c.path),
                        kind: ClashKind::Negative {
                            forbidden: super::avm::render_inline(self.sig, &c.forbidden),
                        },
                    });
                }
            }
        }
        Ok(())
    }

    /// Tests whether `a` and `b` could be unified, without changing `self`.
    pub fn compatible(&self, a: NodeId, b: NodeId) -> bool {
        let mut scratch = self.clone();
        scratch.unify(a, b).is_ok() && scratch.check_constraints().is_ok()
    }

    /// Extracts the canonical graph reachable from `roots`; returns it with
    /// the new ids of the roots.
    pub fn extract(&self, roots: &[NodeId]) -> (Graph, Vec<NodeId>) {
        let mut map: HashMap<NodeId, NodeId> = HashMap::new();
        let mut order: Vec<NodeId> = Vec::new();
        let mut out_roots = Vec::with_capacity(roots.len());
        for &r in roots {
            out_roots.push(self.visit(self.find(r), &mut map, &mut order));
        }
        let nodes = order
            .iter()
            .map(|&old| {
                let w = &self.nodes[old.index()];
                Node {
                    sort: w.sort,
                    arcs: w.arcs.iter().map(|&(f, t)| (f, map[&self.find(t)])).collect(),
                }
            })
            .collect();
        let mut constraints: Vec<NegConstraint> = self
            .constraints
            .iter()
            .filter_map(|c| {
                map.get(&self.find(c.anchor)).map(|&anchor| NegConstraint {
                    anchor,
                    path: c.path.clone(),
                    forbidden: c.forbidden.clone(),
                })
            })
            .collect();
        constraints.sort();
        constraints.dedup();
        (Graph { nodes, constraints }, out_roots)
    }

    fn visit(&self, n: NodeId, map: &mut HashMap<NodeId, NodeId>, order: &mut Vec<NodeId>) -> NodeId {
        if let Some(&m) = map.get(&n) {
            return m;
        }
        let id = NodeId(order.len() as u32);
        map.insert(n, id);
        order.push(n);
        let arcs = self.nodes[n.index()].arcs.clone();
        for (_, t) in arcs {
            self.visit(self.find(t), map, order);
        }
        id
    }

    pub fn extract_fs(&self, root: NodeId) -> FeatureStructure {
        let (graph, _) = self.extract(&[root]);
        FeatureStructure { graph }
    }

    /// Path (in feature order, breadth first) from `from` to `to`, for
    /// diagnostics.
    pub fn path_between(&self, from: NodeId, to: NodeId) -> Option<Vec<Feature>> {
        let to = self.find(to);
        let mut seen = vec![self.find(from)];
        let mut queue = std::collections::VecDeque::from([(self.find(from), Vec::new())]);
        while let Some((n, p)) = queue.pop_front() {
            if n == to {
                return Some(p);
            }
            for &(f, t) in &self.nodes[n.index()].arcs {
                let t = self.find(t);
                if !seen.contains(&t) {
                    seen.push(t);
                    let mut q = p.clone();
                    q.push(f);
                    queue.push_back((t, q));
                }
            }
        }
        None
    }
}

impl View for Dag<'_> {
    fn v_sort(&self, n: NodeId) -> Sort {
        self.sort(n)
    }
    fn v_arc(&self, n: NodeId, f: Feature) -> Option<NodeId> {
        self.arc(n, f)
    }
    fn v_arcs(&self, n: NodeId) -> Vec<(Feature, NodeId)> {
        let n = self.find(n);
        self.nodes[n.index()].arcs.iter().map(|&(f, t)| (f, self.find(t))).collect()
    }
    fn v_id(&self, n: NodeId) -> NodeId {
        self.find(n)
    }
}

/// Non-destructive unification: the least upper bound of `f` and `g` in the
/// subsumption order, with the negative constraints of both re-checked.
pub fn unify(sig: &Signature, f: &FeatureStructure, g: &FeatureStructure) -> Result<FeatureStructure, Clash> {
    let mut dag = Dag::new(sig);
    let a = dag.import(f);
    let b = dag.import(g);
    dag.unify(a, b)?;
    dag.check_constraints()?;
    Ok(dag.extract_fs(a))
}

/// Unifies `g` into the node at `path` of `f` (creating the path if needed).
pub fn unify_at(
    sig: &Signature,
    f: &FeatureStructure,
    path: &[Feature],
    g: &FeatureStructure,
) -> Result<FeatureStructure, Clash> {
    let mut dag = Dag::new(sig);
    let a = dag.import(f);
    let at = dag.follow_or_create(a, path)?;
    let b = dag.import(g);
    dag.unify(at, b).map_err(|c| c.within(&sig.path_string(path)))?;
    dag.check_constraints()?;
    Ok(dag.extract_fs(a))
}
