//! S-trees: finite trees whose oriented edges are labelled by oriented
//! separations, with `α(y,x) = α(x,y)*`.
//!
//! Node ids are arbitrary integers so that subtrees keep the ids of the tree
//! they came from. Serialization renumbers nodes densely.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use serde::{Deserialize, Serialize};

use crate::error::{usage, Error, Result};
use crate::separation::{SeparationSystem, SetSep};

pub type Node = usize;

/// A tree with at least one edge and a labelling of its oriented edges.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct STree {
    /// `adj[x]` lists `(y, α(x,y))` for every neighbour `y` of `x`, sorted by `y`.
    adj: BTreeMap<Node, Vec<(Node, SetSep)>>,
}

/// Membership oracle for the sets associated with nodes.
pub trait NodeStarCheck {
    fn accepts(&self, star: &[SetSep]) -> bool;
}

impl<F: Fn(&[SetSep]) -> bool> NodeStarCheck for F {
    fn accepts(&self, star: &[SetSep]) -> bool {
        self(star)
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct ValidationReport {
    /// Nodes whose associated set is not in the family.
    pub bad_nodes: Vec<(Node, Vec<SetSep>)>,
    /// Oriented edges whose label is not in the separation system.
    pub foreign_labels: Vec<(Node, Node, SetSep)>,
}

impl ValidationReport {
    pub fn is_ok(&self) -> bool {
        self.bad_nodes.is_empty() && self.foreign_labels.is_empty()
    }

    pub fn describe(&self) -> String {
        let mut parts = Vec::new();
        for (x, y, s) in &self.foreign_labels {
            parts.push(format!("edge ({x},{y}) is labelled {s}, which is not in the separation system"));
        }
        for (t, star) in &self.bad_nodes {
            let items: Vec<String> = star.iter().map(|s| s.to_string()).collect();
            parts.push(format!("node {t} has associated set {{{}}} outside the family", items.join(", ")));
        }
        parts.join("; ")
    }
}

impl STree {
    /// Builds a tree from `(x, y, α(x,y))` triples.
    pub fn from_edges(edges: impl IntoIterator<Item = (Node, Node, SetSep)>) -> Result<Self> {
        let mut adj: BTreeMap<Node, Vec<(Node, SetSep)>> = BTreeMap::new();
        let mut count = 0usize;
        for (x, y, s) in edges {
            if x == y {
                return Err(Error::Input(format!("loop at node {x}")));
            }
            if adj.get(&x).is_some_and(|n| n.iter().any(|&(z, _)| z == y)) {
                return Err(Error::Input(format!("edge {{{x},{y}}} listed twice")));
            }
            adj.entry(x).or_default().push((y, s));
            adj.entry(y).or_default().push((x, s.inverse()));
            count += 1;
        }
        if count == 0 {
            return Err(Error::Input("an S-tree needs at least one edge".into()));
        }
        if count + 1 != adj.len() {
            return Err(Error::Input("edges do not form a tree".into()));
        }
        for list in adj.values_mut() {
            list.sort_by_key(|&(y, _)| y);
        }
        let tree = STree { adj };
        if tree.component_of(tree.any_node(), None).len() != tree.adj.len() {
            return Err(Error::Input("edges do not form a tree".into()));
        }
        Ok(tree)
    }

    /// `K_2` with `α(0,1) = s`.
    pub fn single_edge(s: SetSep) -> Self {
        STree::from_edges([(0, 1, s)]).expect("single edge")
    }

    /// A star with centre 0 and leaves `1..`, where `α(leaf_i, centre)` is the i-th element.
    pub fn star(incoming: &[SetSep]) -> Result<Self> {
        STree::from_edges(incoming.iter().enumerate().map(|(i, &s)| (i + 1, 0, s)))
    }

    fn any_node(&self) -> Node {
        *self.adj.keys().next().expect("non-empty tree")
    }

    pub fn nodes(&self) -> impl Iterator<Item = Node> + '_ {
        self.adj.keys().copied()
    }

    pub fn node_count(&self) -> usize {
        self.adj.len()
    }

    pub fn edge_count(&self) -> usize {
        self.adj.len() - 1
    }

    pub fn contains_node(&self, t: Node) -> bool {
        self.adj.contains_key(&t)
    }

    pub fn max_node(&self) -> Node {
        *self.adj.keys().next_back().expect("non-empty tree")
    }

    pub fn neighbours(&self, t: Node) -> impl Iterator<Item = Node> + '_ {
        self.adj.get(&t).into_iter().flatten().map(|&(y, _)| y)
    }

    pub fn degree(&self, t: Node) -> usize {
        self.adj.get(&t).map_or(0, |n| n.len())
    }

    pub fn is_leaf(&self, t: Node) -> bool {
        self.degree(t) == 1
    }

    pub fn leaves(&self) -> Vec<Node> {
        self.nodes().filter(|&t| self.is_leaf(t)).collect()
    }

    /// `α(x,y)`, if `xy` is an edge.
    pub fn alpha(&self, x: Node, y: Node) -> Option<SetSep> {
        self.adj.get(&x)?.iter().find(|&&(z, _)| z == y).map(|&(_, s)| s)
    }

    /// Every oriented edge `(x, y, α(x,y))`.
    pub fn oriented_edges(&self) -> impl Iterator<Item = (Node, Node, SetSep)> + '_ {
        self.adj.iter().flat_map(|(&x, list)| list.iter().map(move |&(y, s)| (x, y, s)))
    }

    /// Each edge once, as `(x, y, α(x,y))` with `x < y`.
    pub fn edges(&self) -> Vec<(Node, Node, SetSep)> {
        self.oriented_edges().filter(|&(x, y, _)| x < y).collect()
    }

    /// The set `α(F_t)` of labels of edges pointing at `t`, sorted and deduplicated.
    pub fn oriented_star_at(&self, t: Node) -> Vec<SetSep> {
        let mut star: Vec<SetSep> =
            self.adj.get(&t).into_iter().flatten().map(|&(_, s)| s.inverse()).collect();
        star.sort();
        star.dedup();
        star
    }

    /// Checks that every label lies in `system` and every associated set is accepted.
    pub fn validate_over(&self, system: &SeparationSystem, family: &dyn NodeStarCheck) -> ValidationReport {
        let mut report = ValidationReport::default();
        for (x, y, s) in self.oriented_edges() {
            if !system.contains(&s) {
                report.foreign_labels.push((x, y, s));
            }
        }
        for t in self.nodes() {
            let star = self.oriented_star_at(t);
            if !family.accepts(&star) {
                report.bad_nodes.push((t, star));
            }
        }
        report
    }

    /// Nodes reachable from `start` without crossing the edge to `blocked`.
    fn component_of(&self, start: Node, blocked: Option<(Node, Node)>) -> BTreeSet<Node> {
        let mut seen = BTreeSet::from([start]);
        let mut queue = VecDeque::from([start]);
        while let Some(u) = queue.pop_front() {
            for v in self.neighbours(u) {
                if let Some((a, b)) = blocked {
                    if (u, v) == (a, b) || (u, v) == (b, a) {
                        continue;
                    }
                }
                if seen.insert(v) {
                    queue.push_back(v);
                }
            }
        }
        seen
    }

    fn restricted_to(&self, keep: &BTreeSet<Node>) -> STree {
        let adj = self
            .adj
            .iter()
            .filter(|(t, _)| keep.contains(t))
            .map(|(&t, list)| (t, list.iter().copied().filter(|(y, _)| keep.contains(y)).collect()))
            .collect();
        STree { adj }
    }

    /// Node sequence of the path from `a` to `b`.
    pub fn path(&self, a: Node, b: Node) -> Vec<Node> {
        let mut parent = BTreeMap::from([(a, a)]);
        let mut queue = VecDeque::from([a]);
        while let Some(u) = queue.pop_front() {
            if u == b {
                break;
            }
            for v in self.neighbours(u) {
                if let std::collections::btree_map::Entry::Vacant(e) = parent.entry(v) {
                    e.insert(u);
                    queue.push_back(v);
                }
            }
        }
        let mut out = vec![b];
        let mut cur = b;
        while cur != a {
            cur = parent[&cur];
            out.push(cur);
        }
        out.reverse();
        out
    }

    fn distance(&self, a: Node, b: Node) -> usize {
        self.path(a, b).len() - 1
    }

    /// A node `t` with distinct neighbours `t', t''` such that `α(t',t) = α(t'',t)`.
    pub fn redundancy(&self) -> Option<(Node, Node, Node)> {
        for (&t, list) in &self.adj {
            for (i, &(a, sa)) in list.iter().enumerate() {
                if let Some(&(b, _)) = list[i + 1..].iter().find(|&&(_, sb)| sb == sa) {
                    return Some((t, a, b));
                }
            }
        }
        None
    }

    pub fn is_irredundant(&self) -> bool {
        self.redundancy().is_none()
    }

    /// Repeatedly deletes, at a redundant node, the branch that does not
    /// contain `x`. The result is an irredundant subtree containing `x`.
    pub fn prune(&self, x: Node) -> Result<STree> {
        if !self.contains_node(x) {
            return usage(format!("node {x} is not in the tree"));
        }
        let mut tree = self.clone();
        while let Some((t, a, b)) = tree.redundancy() {
            // drop whichever of the two branches at t avoids x
            let branch_a = tree.component_of(a, Some((a, t)));
            let drop = if branch_a.contains(&x) { b } else { a };
            let removed = tree.component_of(drop, Some((drop, t)));
            let keep: BTreeSet<Node> = tree.nodes().filter(|n| !removed.contains(n)).collect();
            tree = tree.restricted_to(&keep);
        }
        Ok(tree)
    }

    /// Natural order on oriented edges: `(x,y) < (u,v)` when the path between
    /// the two edges starts at `y` and ends at `u`. Reflexive on equal pairs.
    pub fn natural_leq(&self, e1: (Node, Node), e2: (Node, Node)) -> bool {
        let ((x, y), (u, v)) = (e1, e2);
        if e1 == e2 {
            return true;
        }
        if (x, y) == (v, u) {
            return false;
        }
        let dy = self.distance(y, u).min(self.distance(y, v));
        let dx = self.distance(x, u).min(self.distance(x, v));
        let du = self.distance(u, x).min(self.distance(u, y));
        let dv = self.distance(v, x).min(self.distance(v, y));
        dy < dx && du < dv && self.distance(y, u) == dy
    }

    /// Replaces the part of the tree around `t` between `t'` and `t''` by a
    /// single edge labelled `α(t',t)`, where `α(t',t) = α(t,t'')`.
    fn splice_out(&self, t_prev: Node, t: Node, t_next: Node) -> STree {
        let label = self.alpha(t_prev, t).expect("edge t't");
        let mut middle = self.component_of(t, Some((t, t_prev)));
        let beyond = self.component_of(t_next, Some((t_next, t)));
        middle.retain(|n| !beyond.contains(n));
        let keep: BTreeSet<Node> = self.nodes().filter(|n| !middle.contains(n)).collect();
        let mut tree = self.restricted_to(&keep);
        tree.adj.get_mut(&t_prev).expect("t'").push((t_next, label));
        tree.adj.get_mut(&t_next).expect("t''").push((t_prev, label.inverse()));
        for list in tree.adj.values_mut() {
            list.sort_by_key(|&(y, _)| y);
        }
        tree
    }

    fn non_antisymmetric_node(&self) -> Option<(Node, Node, Node)> {
        for (&t, list) in &self.adj {
            for &(a, out_a) in list {
                // α(a,t) = out_a*, want some b != a with α(t,b) = α(a,t)
                let incoming = out_a.inverse();
                if let Some(&(b, _)) = list.iter().find(|&&(b, s)| b != a && s == incoming) {
                    return Some((a, t, b));
                }
            }
        }
        None
    }

    /// Contracts until every associated set is antisymmetric. The result is
    /// over the same family, and its leaves are leaves of the input.
    pub fn contract_nonantisymmetric(&self) -> STree {
        let mut tree = self.clone();
        while let Some((a, t, b)) = tree.non_antisymmetric_node() {
            tree = tree.splice_out(a, t, b);
        }
        tree
    }

    /// Prunes around the leaf `x` and contracts until the label of the edge
    /// leaving `x` occurs on no other oriented edge.
    pub fn reduce_to_unique_leaf_occurrence(&self, x: Node, system: &SeparationSystem) -> Result<STree> {
        if !self.is_leaf(x) {
            return usage(format!("node {x} is not a leaf"));
        }
        let (y, r) = self.adj[&x][0];
        let _ = y;
        let rid = system.id_of(&r).ok_or_else(|| Error::Usage(format!("leaf label {r} is not in the system")))?;
        if system.is_degenerate(rid) {
            return usage(format!("leaf label {r} is degenerate"));
        }
        if system.is_trivial(rid) {
            return usage(format!("leaf label {r} is trivial"));
        }
        let mut tree = self.prune(x)?;
        loop {
            let y = tree.adj[&x][0].0;
            let other = tree.oriented_edges().find(|&(a, b, s)| s == r && (a, b) != (x, y));
            let Some((f_start, f_end, _)) = other else { return Ok(tree) };
            let path = tree.path(x, f_start);
            if path.len() < 2 || path[path.len() - 1] != f_start || path.contains(&f_end) {
                return Err(Error::Internal(format!(
                    "label {r} reappears on an edge not above the leaf edge; the tree is not over stars"
                )));
            }
            let t_prev = path[path.len() - 2];
            if tree.alpha(t_prev, f_start) != Some(r) {
                return Err(Error::Internal(format!("labels between two occurrences of {r} differ")));
            }
            tree = tree.splice_out(t_prev, f_start, f_end).prune(x)?;
        }
    }

    /// Applies `f` to every label, keeping condition (i) by labelling the
    /// reverse orientation with the image of the reverse label.
    pub fn map_labels(&self, mut f: impl FnMut(SetSep) -> Result<SetSep>) -> Result<STree> {
        let mut adj = BTreeMap::new();
        for (&x, list) in &self.adj {
            let mut out = Vec::with_capacity(list.len());
            for &(y, s) in list {
                out.push((y, f(s)?));
            }
            adj.insert(x, out);
        }
        let tree = STree { adj };
        for (x, y, s) in tree.oriented_edges() {
            if tree.alpha(y, x) != Some(s.inverse()) {
                return Err(Error::Internal(format!("relabelling broke the inverse condition on edge ({x},{y})")));
            }
        }
        Ok(tree)
    }

    /// Shifts every node id by `offset`.
    pub fn offset_ids(&self, offset: usize) -> STree {
        let adj = self
            .adj
            .iter()
            .map(|(&x, list)| (x + offset, list.iter().map(|&(y, s)| (y + offset, s)).collect()))
            .collect();
        STree { adj }
    }

    /// Removes leaf `x` and returns its neighbour.
    fn without_leaf(&self, x: Node) -> (STree, Node) {
        let y = self.adj[&x][0].0;
        let mut tree = self.clone();
        tree.adj.remove(&x);
        tree.adj.get_mut(&y).expect("neighbour").retain(|&(z, _)| z != x);
        (tree, y)
    }

    /// Joins `t1 - x1` and `t2 - x2` by an edge `y2 y1` with `α(y2,y1) = s0`,
    /// where `x1` carries `{s0*}` in `t1` and `x2` carries `{s0}` in `t2`.
    pub fn merge_at_leaves(t1: &STree, x1: Node, t2: &STree, x2: Node, s0: SetSep) -> Result<STree> {
        if !t1.is_leaf(x1) || t1.oriented_star_at(x1) != [s0.inverse()] {
            return usage(format!("node {x1} of the first tree is not a leaf carrying {{{}}}", s0.inverse()));
        }
        if !t2.is_leaf(x2) || t2.oriented_star_at(x2) != [s0] {
            return usage(format!("node {x2} of the second tree is not a leaf carrying {{{s0}}}"));
        }
        let (a, y1) = t1.without_leaf(x1);
        let offset = t1.max_node() + 1;
        let (b, y2) = t2.offset_ids(offset).without_leaf(x2 + offset);
        let mut adj = a.adj;
        adj.extend(b.adj);
        adj.get_mut(&y2).expect("y2").push((y1, s0));
        adj.get_mut(&y1).expect("y1").push((y2, s0.inverse()));
        let mut tree = STree { adj };
        for list in tree.adj.values_mut() {
            list.sort_by_key(|&(y, _)| y);
        }
        if tree.node_count() < 2 {
            return Err(Error::Internal("merge produced a tree without edges".into()));
        }
        Ok(tree.renumbered())
    }

    /// Same tree with nodes renumbered `0..n` in breadth-first order from the
    /// smallest node, neighbours visited in increasing old id.
    pub fn renumbered(&self) -> STree {
        let root = self.any_node();
        let mut order = vec![root];
        let mut seen = BTreeSet::from([root]);
        let mut i = 0;
        while i < order.len() {
            let u = order[i];
            for v in self.neighbours(u) {
                if seen.insert(v) {
                    order.push(v);
                }
            }
            i += 1;
        }
        let index: BTreeMap<Node, Node> = order.iter().enumerate().map(|(i, &n)| (n, i)).collect();
        let adj = self
            .adj
            .iter()
            .map(|(x, list)| {
                let mut l: Vec<(Node, SetSep)> = list.iter().map(|(y, s)| (index[y], *s)).collect();
                l.sort_by_key(|&(y, _)| y);
                (index[x], l)
            })
            .collect();
        STree { adj }
    }

    pub fn to_json(&self) -> STreeJson {
        let tree = self.renumbered();
        STreeJson {
            kind: "stree".into(),
            nodes: tree.nodes().collect(),
            edges: tree.edges().into_iter().map(|(x, y, s)| EdgeJson { x, y, alpha_xy: s }).collect(),
        }
    }

    pub fn from_json(json: &STreeJson) -> Result<Self> {
        if json.kind != "stree" {
            return Err(Error::Input(format!("expected kind \"stree\", found {:?}", json.kind)));
        }
        let tree = STree::from_edges(json.edges.iter().map(|e| (e.x, e.y, e.alpha_xy)))?;
        let listed: BTreeSet<Node> = json.nodes.iter().copied().collect();
        let present: BTreeSet<Node> = tree.nodes().collect();
        if !json.nodes.is_empty() && listed != present {
            return Err(Error::Input("node list does not match the edge list".into()));
        }
        Ok(tree)
    }
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq, Eq)]
pub struct EdgeJson {
    pub x: Node,
    pub y: Node,
    pub alpha_xy: SetSep,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq, Eq)]
pub struct STreeJson {
    pub kind: String,
    pub nodes: Vec<Node>,
    pub edges: Vec<EdgeJson>,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::universe::{Graph, Universe};

    fn sep(a: &[usize], b: &[usize]) -> SetSep {
        SetSep::from_sides(a, b)
    }

    fn accept_all(_: &[SetSep]) -> bool {
        true
    }

    #[test]
    fn stars_at_nodes() {
        let r = sep(&[0], &[0, 1, 2]);
        let t = STree::single_edge(r);
        assert_eq!(t.oriented_star_at(1), vec![r]);
        assert_eq!(t.oriented_star_at(0), vec![r.inverse()]);
        let v = sep(&[0, 1], &[0, 1]);
        let d = STree::single_edge(v);
        assert_eq!(d.oriented_star_at(0), vec![v]);
        assert_eq!(d.oriented_star_at(1), vec![v]);
        let s = STree::star(&[sep(&[0], &[0, 1, 2]), sep(&[1], &[0, 1, 2]), sep(&[2], &[0, 1, 2])]).unwrap();
        assert_eq!(s.oriented_star_at(0).len(), 3);
    }

    #[test]
    fn validation_reports_every_offender() {
        let u = Universe::vertex_separations(Graph::path(3)).unwrap();
        let sys = u.system_below(2).unwrap();
        let s = sep(&[0, 1], &[1, 2]);
        let t = STree::single_edge(s);
        let ok = t.validate_over(&sys, &accept_all);
        assert!(ok.is_ok());
        let none = |_: &[SetSep]| false;
        assert_eq!(t.validate_over(&sys, &none).bad_nodes.len(), 2);
        let big = STree::single_edge(sep(&[0, 1, 2], &[0, 1, 2]));
        assert_eq!(big.validate_over(&sys, &accept_all).foreign_labels.len(), 2);
    }

    #[test]
    fn prune_removes_duplicate_branch() {
        let r = sep(&[0], &[0, 1]);
        // centre 0 with two leaves both sending r inward, plus a third leaf
        let t = STree::from_edges([(1, 0, r), (2, 0, r), (3, 0, sep(&[1], &[0, 1]))]).unwrap();
        assert!(!t.is_irredundant());
        let p = t.prune(3).unwrap();
        assert!(p.is_irredundant());
        assert_eq!(p.node_count(), 3);
        assert!(p.contains_node(3));
        assert_eq!(p.prune(3).unwrap(), p);
        let q = t.prune(2).unwrap();
        assert!(q.contains_node(2) && !q.contains_node(1));
    }

    #[test]
    fn natural_order_on_path() {
        let s = sep(&[0], &[0, 1]);
        let t = STree::from_edges([(0, 1, s), (1, 2, s)]).unwrap();
        assert!(t.natural_leq((0, 1), (1, 2)));
        assert!(!t.natural_leq((0, 1), (2, 1)));
        assert!(!t.natural_leq((0, 1), (1, 0)));
        assert!(!t.natural_leq((1, 2), (0, 1)));
    }

    #[test]
    fn contraction_splices_middle() {
        let s = sep(&[0], &[0, 1, 2]);
        let other = sep(&[1], &[0, 1, 2]);
        // 1 -> 0 -> 2 with α(1,0) = s = α(0,2), node 0 also has leaf 3
        let t = STree::from_edges([(1, 0, s), (0, 2, s), (3, 0, other)]).unwrap();
        let c = t.contract_nonantisymmetric();
        assert_eq!(c.node_count(), 2);
        assert_eq!(c.alpha(1, 2), Some(s));
        let leaves_before: BTreeSet<Node> = t.leaves().into_iter().collect();
        assert!(c.leaves().iter().all(|l| leaves_before.contains(l)));
        let already = STree::single_edge(s);
        assert_eq!(already.contract_nonantisymmetric(), already);
    }

    #[test]
    fn merge_two_edges() {
        let s0 = sep(&[0, 1], &[1, 2]);
        let t1 = STree::single_edge(s0);
        // in t1 node 1 carries {s0}, node 0 carries {s0*}
        let t2 = STree::single_edge(s0);
        let m = STree::merge_at_leaves(&t1, 0, &t2, 1, s0).unwrap();
        assert_eq!(m.node_count(), 2);
        assert_eq!(m.edges().len(), 1);
        let labels: BTreeSet<SetSep> = m.oriented_edges().map(|(_, _, s)| s).collect();
        assert_eq!(labels, BTreeSet::from([s0, s0.inverse()]));
        assert!(STree::merge_at_leaves(&t1, 1, &t2, 1, s0).is_err());
    }

    #[test]
    fn json_round_trip() {
        let s = STree::star(&[sep(&[0], &[0, 1, 2]), sep(&[1], &[0, 1, 2])]).unwrap();
        let j = s.to_json();
        let text = serde_json::to_string(&j).unwrap();
        let back: STreeJson = serde_json::from_str(&text).unwrap();
        assert_eq!(STree::from_json(&back).unwrap(), s.renumbered());
        assert!(text.contains("\"alpha_xy\""));
    }

    #[test]
    fn rejects_non_trees() {
        let s = sep(&[0], &[0]);
        assert!(STree::from_edges([(0, 1, s), (1, 2, s), (2, 0, s)]).is_err());
        assert!(STree::from_edges([(0, 1, s), (2, 3, s)]).is_err());
        assert!(STree::from_edges(std::iter::empty()).is_err());
    }
}
