//! Classical decompositions and dense objects, and their translation to and
//! from S-trees and tangles.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::bits::{self, Bits};
use crate::error::{usage, Error, Result};
use crate::separation::{Orientation, SeparationSystem, SetSep};
use crate::stree::{Node, STree};
use crate::universe::{Graph, Matroid};

/// An unlabelled tree on nodes `0..node_count`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PlainTree {
    pub node_count: usize,
    pub edges: Vec<(usize, usize)>,
}

impl PlainTree {
    pub fn new(node_count: usize, edges: Vec<(usize, usize)>) -> Result<Self> {
        if node_count == 0 {
            return Err(Error::Validation("a tree needs at least one node".into()));
        }
        if edges.len() + 1 != node_count {
            return Err(Error::Validation(format!("{} edges on {node_count} nodes is not a tree", edges.len())));
        }
        let tree = PlainTree { node_count, edges };
        if tree.edges.iter().any(|&(x, y)| x >= node_count || y >= node_count || x == y) {
            return Err(Error::Validation("tree edge with a bad endpoint".into()));
        }
        let mut seen = vec![false; node_count];
        let mut stack = vec![0];
        seen[0] = true;
        let adj = tree.adjacency();
        while let Some(t) = stack.pop() {
            for &u in &adj[t] {
                if !seen[u] {
                    seen[u] = true;
                    stack.push(u);
                }
            }
        }
        if seen.iter().any(|&s| !s) {
            return Err(Error::Validation("tree is not connected".into()));
        }
        Ok(tree)
    }

    pub fn adjacency(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.node_count];
        for &(x, y) in &self.edges {
            adj[x].push(y);
            adj[y].push(x);
        }
        adj
    }

    /// Nodes on `x`'s side of the edge `xy`.
    pub fn side(&self, x: usize, y: usize) -> Vec<usize> {
        let adj = self.adjacency();
        let mut seen = vec![false; self.node_count];
        seen[x] = true;
        seen[y] = true;
        let mut out = vec![x];
        let mut stack = vec![x];
        while let Some(t) = stack.pop() {
            for &u in &adj[t] {
                if !seen[u] {
                    seen[u] = true;
                    out.push(u);
                    stack.push(u);
                }
            }
        }
        out
    }

    fn from_stree(tree: &STree) -> (PlainTree, Vec<Node>) {
        let ids: Vec<Node> = tree.nodes().collect();
        let index: BTreeMap<Node, usize> = ids.iter().enumerate().map(|(i, &t)| (t, i)).collect();
        let edges = tree.edges().into_iter().map(|(x, y, _)| (index[&x], index[&y])).collect();
        (PlainTree { node_count: ids.len(), edges }, ids)
    }
}

// ---------------------------------------------------------------- tree-decompositions

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TreeDecomposition {
    pub tree: PlainTree,
    pub bags: Vec<Bits>,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq, Eq)]
pub struct TreeDecompositionJson {
    pub bags: BTreeMap<String, Vec<usize>>,
    pub edges: Vec<[usize; 2]>,
}

impl TreeDecomposition {
    pub fn new(tree: PlainTree, bags: Vec<Bits>) -> Result<Self> {
        if bags.len() != tree.node_count {
            return Err(Error::Validation("one bag per node is required".into()));
        }
        Ok(TreeDecomposition { tree, bags })
    }

    /// Largest bag size minus one.
    pub fn width(&self) -> usize {
        self.bags.iter().map(|&b| bits::len(b)).max().unwrap_or(0).saturating_sub(1)
    }

    /// Largest `|V_s ∩ V_t|` over tree edges; the size of the only bag for a
    /// single-node decomposition.
    pub fn adhesion(&self) -> usize {
        if self.tree.edges.is_empty() {
            return bits::len(self.bags[0]);
        }
        self.tree.edges.iter().map(|&(s, t)| bits::len(self.bags[s] & self.bags[t])).max().unwrap_or(0)
    }

    /// Checks vertex cover, edge cover and that every vertex's bags form a subtree.
    pub fn validate(&self, g: &Graph) -> Result<()> {
        let covered = self.bags.iter().fold(0, |acc, &b| acc | b);
        if covered != g.vertices() {
            let missing = g.vertices() & !covered;
            return Err(Error::Validation(format!("vertices {} lie in no bag", bits::fmt_set(missing))));
        }
        for &(u, v) in g.edges() {
            if !self.bags.iter().any(|&b| bits::contains(b, u) && bits::contains(b, v)) {
                return Err(Error::Validation(format!("edge {u}-{v} lies in no bag")));
            }
        }
        for v in 0..g.vertex_count() {
            let nodes: Vec<usize> = (0..self.bags.len()).filter(|&t| bits::contains(self.bags[t], v)).collect();
            let inner = self
                .tree
                .edges
                .iter()
                .filter(|&&(s, t)| bits::contains(self.bags[s], v) && bits::contains(self.bags[t], v))
                .count();
            if inner + 1 != nodes.len() {
                return Err(Error::Validation(format!("the bags containing vertex {v} do not form a subtree")));
            }
        }
        Ok(())
    }

    pub fn to_json(&self) -> TreeDecompositionJson {
        TreeDecompositionJson {
            bags: self.bags.iter().enumerate().map(|(t, &b)| (t.to_string(), bits::to_vec(b))).collect(),
            edges: self.tree.edges.iter().map(|&(s, t)| [s, t]).collect(),
        }
    }

    pub fn from_json(json: &TreeDecompositionJson) -> Result<Self> {
        let mut bags = vec![0; json.bags.len()];
        for (key, members) in &json.bags {
            let t: usize = key.parse().map_err(|_| Error::Input(format!("bag key {key:?} is not a node index")))?;
            if t >= bags.len() {
                return Err(Error::Input(format!("bag key {t} out of range")));
            }
            bags[t] = bits::from_iter(members.iter().copied());
        }
        let tree = PlainTree::new(bags.len(), json.edges.iter().map(|e| (e[0], e[1])).collect())?;
        TreeDecomposition::new(tree, bags)
    }
}

/// Bags `V_t = ⋂ B` over the incoming labels `(A, B) = α(s, t)`.
pub fn stree_to_tree_decomposition(tree: &STree, ground: Bits) -> TreeDecomposition {
    let (plain, ids) = PlainTree::from_stree(tree);
    let bags = ids.iter().map(|&t| tree.oriented_star_at(t).iter().fold(ground, |acc, s| acc & s.b)).collect();
    TreeDecomposition { tree: plain, bags }
}

/// Labels each edge `t1 t2` with `(U_1, U_2)`, the unions of the bags on
/// either side. A single-node decomposition is padded with a copy of `V`.
pub fn tree_decomposition_to_stree(td: &TreeDecomposition, g: &Graph) -> Result<STree> {
    td.validate(g)?;
    if td.tree.node_count == 1 {
        let v = g.vertices();
        return Ok(STree::single_edge(SetSep::new(v, v)));
    }
    let mut edges = Vec::new();
    for &(s, t) in &td.tree.edges {
        let union = |nodes: Vec<usize>| nodes.into_iter().fold(0, |acc, x| acc | td.bags[x]);
        let us = union(td.tree.side(s, t));
        let ut = union(td.tree.side(t, s));
        edges.push((s, t, SetSep::new(us, ut)));
    }
    STree::from_edges(edges)
}

// ---------------------------------------------------------------- branch-decompositions

/// A tree whose leaves correspond to the edges of a graph. For graphs with
/// at most one edge the tree is a single node.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BranchDecomposition {
    pub tree: PlainTree,
    /// `leaf_of[i]` is the leaf holding graph edge `i`.
    pub leaf_of: Vec<usize>,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq, Eq)]
pub struct BranchDecompositionJson {
    pub tree: PlainTree,
    pub leaf_map: BTreeMap<String, usize>,
}

impl BranchDecomposition {
    pub fn validate(&self, g: &Graph) -> Result<()> {
        let m = g.edge_count();
        if self.leaf_of.len() != m {
            return Err(Error::Validation(format!("{} leaves mapped for {m} edges", self.leaf_of.len())));
        }
        if m <= 1 {
            return Ok(());
        }
        let adj = self.tree.adjacency();
        let leaves: BTreeSet<usize> = (0..self.tree.node_count).filter(|&t| adj[t].len() == 1).collect();
        let images: BTreeSet<usize> = self.leaf_of.iter().copied().collect();
        if images.len() != m || images != leaves {
            return Err(Error::Validation("leaf map is not a bijection onto the leaves".into()));
        }
        if let Some(t) = (0..self.tree.node_count).find(|&t| adj[t].len() != 1 && adj[t].len() != 3) {
            return Err(Error::Validation(format!("internal node {t} has degree {}", adj[t].len())));
        }
        Ok(())
    }

    /// Vertices incident with edges on both sides of tree edge `xy`.
    pub fn middle_set(&self, g: &Graph, x: usize, y: usize) -> Bits {
        let side: BTreeSet<usize> = self.tree.side(x, y).into_iter().collect();
        let (mut left, mut right) = (0, 0);
        for (i, &(u, v)) in g.edges().iter().enumerate() {
            let ends = bits::bit(u) | bits::bit(v);
            if side.contains(&self.leaf_of[i]) {
                left |= ends;
            } else {
                right |= ends;
            }
        }
        left & right
    }

    pub fn width(&self, g: &Graph) -> usize {
        if g.edge_count() <= 1 {
            return 0;
        }
        self.tree.edges.iter().map(|&(x, y)| bits::len(self.middle_set(g, x, y))).max().unwrap_or(0)
    }

    pub fn to_json(&self) -> BranchDecompositionJson {
        BranchDecompositionJson {
            tree: self.tree.clone(),
            leaf_map: self.leaf_of.iter().enumerate().map(|(i, &l)| (i.to_string(), l)).collect(),
        }
    }
}

/// Builds a branch-decomposition of width `< k` from an `S_k`-tree over the
/// graph tangle stars. Needs `k >= 3`.
pub fn stree_to_branch_decomposition(tree: &STree, g: &Graph, k: usize) -> Result<BranchDecomposition> {
    if k <= 2 {
        return usage("branch-decompositions correspond to S_k-trees only for k >= 3; for k <= 2 use the tangle number");
    }
    let m = g.edge_count();
    if m <= 1 {
        return Ok(BranchDecomposition { tree: PlainTree { node_count: 1, edges: Vec::new() }, leaf_of: vec![0; m] });
    }
    let start = tree.nodes().next().expect("trees are non-empty");
    let tree = tree.prune(start)?;
    let (plain, ids) = PlainTree::from_stree(&tree);
    let adj = plain.adjacency();
    let alpha = |s: usize, t: usize| tree.alpha(ids[s], ids[t]).expect("tree edge");

    // the node all of whose edges point towards e, and a neighbour whose small side holds e
    let mut groups: BTreeMap<(usize, usize), Vec<usize>> = BTreeMap::new();
    for (i, &(u, v)) in g.edges().iter().enumerate() {
        let ends = bits::bit(u) | bits::bit(v);
        let mut t = 0;
        let mut prev = usize::MAX;
        loop {
            let next = adj[t].iter().copied().find(|&s| s != prev && !bits::is_subset(ends, alpha(s, t).b));
            match next {
                Some(s) => {
                    prev = t;
                    t = s;
                }
                None => break,
            }
        }
        let j = adj[t]
            .iter()
            .copied()
            .find(|&s| bits::is_subset(ends, alpha(s, t).a))
            .ok_or_else(|| Error::Validation(format!("edge {u}-{v} is covered by no small side at node {}", ids[t])))?;
        groups.entry((t, j)).or_default().push(i);
    }

    // subdivide t–j once per edge of G placed there and hang a leaf off each new node
    let mut edges: Vec<(usize, usize)> = Vec::new();
    let mut node_count = plain.node_count;
    let mut leaf_of = vec![usize::MAX; m];
    for &(x, y) in &plain.edges {
        let near_x = groups.get(&(x, y)).into_iter().flatten();
        let near_y = groups.get(&(y, x)).into_iter().flatten().rev();
        let mut chain = vec![x];
        for &e in near_x.chain(near_y) {
            let (mid, leaf) = (node_count, node_count + 1);
            node_count += 2;
            chain.push(mid);
            edges.push((mid, leaf));
            leaf_of[e] = leaf;
        }
        chain.push(y);
        edges.extend(chain.windows(2).map(|w| (w[0], w[1])));
    }
    let keep: BTreeSet<usize> = leaf_of.iter().copied().collect();
    let tree = simplify(node_count, edges, &keep);
    let renumber: BTreeMap<usize, usize> = tree.0.iter().enumerate().map(|(i, &t)| (t, i)).collect();
    let plain = PlainTree::new(
        tree.0.len(),
        tree.1.iter().map(|&(a, b)| (renumber[&a], renumber[&b])).collect(),
    )?;
    let bd = BranchDecomposition { tree: plain, leaf_of: leaf_of.iter().map(|l| renumber[l]).collect() };
    bd.validate(g)?;
    Ok(bd)
}

/// Deletes leaves outside `keep` until none remain, then suppresses nodes of
/// degree 2. Returns the surviving nodes and edges.
fn simplify(node_count: usize, edges: Vec<(usize, usize)>, keep: &BTreeSet<usize>) -> (Vec<usize>, Vec<(usize, usize)>) {
    let mut adj: BTreeMap<usize, BTreeSet<usize>> = (0..node_count).map(|t| (t, BTreeSet::new())).collect();
    for (x, y) in edges {
        adj.get_mut(&x).unwrap().insert(y);
        adj.get_mut(&y).unwrap().insert(x);
    }
    loop {
        let dead: Vec<usize> =
            adj.iter().filter(|(t, n)| n.len() <= 1 && !keep.contains(t) && adj.len() > 1).map(|(&t, _)| t).collect();
        if dead.is_empty() {
            break;
        }
        for t in dead {
            if let Some(ns) = adj.remove(&t) {
                for u in ns {
                    if let Some(set) = adj.get_mut(&u) {
                        set.remove(&t);
                    }
                }
            }
        }
    }
    // suppress degree-2 nodes, unless the tree would collapse to a single edge
    loop {
        let Some(t) = adj.iter().find(|(_, n)| n.len() == 2).map(|(&t, _)| t) else { break };
        if adj.len() <= 2 {
            break;
        }
        let ns: Vec<usize> = adj.remove(&t).unwrap().into_iter().collect();
        let (a, b) = (ns[0], ns[1]);
        adj.get_mut(&a).unwrap().remove(&t);
        adj.get_mut(&b).unwrap().remove(&t);
        adj.get_mut(&a).unwrap().insert(b);
        adj.get_mut(&b).unwrap().insert(a);
    }
    let nodes: Vec<usize> = adj.keys().copied().collect();
    let mut out = Vec::new();
    for (&x, ns) in &adj {
        for &y in ns {
            if x < y {
                out.push((x, y));
            }
        }
    }
    (nodes, out)
}

/// Builds an `S_k`-tree over the graph tangle stars from a branch-decomposition
/// of width `< k`. Isolated vertices are hung off the tree as extra leaves.
pub fn branch_decomposition_to_stree(bd: &BranchDecomposition, g: &Graph, k: usize) -> Result<STree> {
    if k <= 2 {
        return usage("branch-decompositions correspond to S_k-trees only for k >= 3; for k <= 2 use the tangle number");
    }
    bd.validate(g)?;
    let v = g.vertices();
    // items: graph edges, then isolated vertices
    let mut items: Vec<Bits> = g.edges().iter().map(|&(a, b)| bits::bit(a) | bits::bit(b)).collect();
    let isolated: Vec<usize> = (0..g.vertex_count()).filter(|&x| g.degree(x) == 0).collect();
    items.extend(isolated.iter().map(|&x| bits::bit(x)));
    if items.len() == 1 {
        return Ok(STree::single_edge(SetSep::new(v, v)));
    }
    let m = g.edge_count();
    let mut item_of_leaf: BTreeMap<usize, usize> = BTreeMap::new();
    let (mut node_count, mut edges) = if m >= 2 {
        for (i, &l) in bd.leaf_of.iter().enumerate() {
            item_of_leaf.insert(l, i);
        }
        (bd.tree.node_count, bd.tree.edges.clone())
    } else {
        item_of_leaf.insert(0, 0);
        (1, Vec::new())
    };
    for idx in m.max(1)..items.len() {
        let leaf = node_count;
        if let Some(&(a, b)) = edges.first() {
            let mid = node_count + 1;
            node_count += 2;
            edges.remove(0);
            edges.extend([(a, mid), (mid, b), (mid, leaf)]);
        } else {
            node_count += 1;
            edges.push((0, leaf));
        }
        item_of_leaf.insert(leaf, idx);
    }
    if node_count == 2 {
        // two items on a single edge: put a node between them
        edges = vec![(0, 2), (2, 1)];
        node_count = 3;
    }
    let plain = PlainTree::new(node_count, edges)?;
    let adj = plain.adjacency();
    let mut labelled = Vec::new();
    for &(x, y) in &plain.edges {
        for (s, t) in [(x, y), (y, x)] {
            if adj[s].len() == 1 {
                let item = items[item_of_leaf[&s]];
                labelled.push((s, t, SetSep::new(item, v)));
            } else if adj[t].len() != 1 {
                let side: BTreeSet<usize> = plain.side(s, t).into_iter().collect();
                let (mut a, mut b) = (0, 0);
                for (&leaf, &i) in &item_of_leaf {
                    if side.contains(&leaf) {
                        a |= items[i];
                    } else {
                        b |= items[i];
                    }
                }
                labelled.push((s, t, SetSep::new(a, b)));
            }
        }
    }
    // from_edges wants one entry per edge; keep the first orientation listed
    let mut seen = BTreeSet::new();
    let unique: Vec<(usize, usize, SetSep)> =
        labelled.into_iter().filter(|&(s, t, _)| seen.insert((s.min(t), s.max(t)))).collect();
    STree::from_edges(unique)
}

// ---------------------------------------------------------------- brambles

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Bramble {
    pub sets: Vec<Bits>,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq, Eq)]
pub struct BrambleJson {
    pub sets: Vec<Vec<usize>>,
}

fn touch(g: &Graph, x: Bits, y: Bits) -> bool {
    x & y != 0 || (g.neighbourhood(x) & y) != 0
}

impl Bramble {
    pub fn validate(&self, g: &Graph) -> Result<()> {
        for &c in &self.sets {
            if !g.is_connected_set(c) {
                return Err(Error::Validation(format!("{} is not connected", bits::fmt_set(c))));
            }
        }
        for (i, &x) in self.sets.iter().enumerate() {
            for &y in &self.sets[i + 1..] {
                if !touch(g, x, y) {
                    return Err(Error::Validation(format!(
                        "{} and {} do not touch",
                        bits::fmt_set(x),
                        bits::fmt_set(y)
                    )));
                }
            }
        }
        Ok(())
    }

    /// Smallest number of vertices meeting every set.
    pub fn order(&self, g: &Graph) -> usize {
        let n = g.vertex_count();
        let mut best = n;
        for cover in 0..(1u64 << n) {
            let size = bits::len(cover);
            if size < best && self.sets.iter().all(|&c| c & cover != 0) {
                best = size;
            }
        }
        best
    }

    pub fn to_json(&self) -> BrambleJson {
        BrambleJson { sets: self.sets.iter().map(|&c| bits::to_vec(c)).collect() }
    }

    pub fn from_json(json: &BrambleJson) -> Self {
        Bramble { sets: json.sets.iter().map(|c| bits::from_iter(c.iter().copied())).collect() }
    }
}

/// One component of `G − X` for every `|X| < k`: the one whose separation
/// `(V∖C, C ∪ N(C))` the tangle contains.
pub fn bramble_from_tangle(o: &Orientation, system: &SeparationSystem, g: &Graph, k: usize) -> Result<Bramble> {
    let v = g.vertices();
    let chosen: BTreeSet<SetSep> = o.payloads(system).into_iter().collect();
    let mut sets = BTreeSet::new();
    for x in bits::subsets(v) {
        if bits::len(x) >= k || x == v {
            continue;
        }
        let mut found = None;
        for c in g.components(v & !x) {
            let big = SetSep::new(v & !c, c | g.neighbourhood(c));
            if chosen.contains(&big) {
                found = Some(c);
                break;
            }
        }
        let c = found.ok_or_else(|| {
            Error::Validation(format!("the orientation points to no component of G - {}", bits::fmt_set(x)))
        })?;
        sets.insert(c);
    }
    Ok(Bramble { sets: sets.into_iter().collect() })
}

/// Orients every `{A, B}` in `S_k` towards the side whose private part
/// contains a bramble set.
pub fn tangle_from_bramble(br: &Bramble, system: &SeparationSystem) -> Result<Orientation> {
    let mut ids = Vec::new();
    for id in system.ids() {
        let s = system.get(id);
        if s.is_degenerate() {
            ids.push(id);
            continue;
        }
        let private = s.b & !s.a;
        if br.sets.iter().any(|&c| bits::is_subset(c, private)) {
            ids.push(id);
        }
    }
    Orientation::new(system, ids).map_err(|e| Error::Validation(format!("bramble does not orient S_k: {e}")))
}

// ---------------------------------------------------------------- blockages

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Blockage {
    pub sets: BTreeSet<Bits>,
    pub k: usize,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq, Eq)]
pub struct BlockageJson {
    pub sets: Vec<Vec<usize>>,
    pub k: usize,
}

impl Blockage {
    /// Checks (B1)–(B3) against `S_k`, naming the first failing clause.
    pub fn validate(&self, g: &Graph, system: &SeparationSystem) -> Result<()> {
        let k = self.k;
        for &x in &self.sets {
            if bits::len(g.boundary(x)) >= k {
                return Err(Error::Validation(format!("(B1) fails: {} has boundary of size >= {k}", bits::fmt_set(x))));
            }
        }
        for x in bits::subsets(g.vertices()) {
            if self.sets.contains(&x) || bits::len(g.boundary(x)) >= k {
                continue;
            }
            if let Some(&big) = self.sets.iter().find(|&&y| bits::is_subset(x, y)) {
                return Err(Error::Validation(format!(
                    "(B2) fails: {} is missing although it lies in {}",
                    bits::fmt_set(x),
                    bits::fmt_set(big)
                )));
            }
        }
        for id in system.separations() {
            let s = system.get(id);
            if s.is_degenerate() {
                continue;
            }
            let (a, b) = (self.sets.contains(&s.a), self.sets.contains(&s.b));
            if a == b {
                return Err(Error::Validation(format!(
                    "(B3) fails: {} of {{{}, {}}} lie in the blockage",
                    if a { "both" } else { "neither" },
                    bits::fmt_set(s.a),
                    bits::fmt_set(s.b)
                )));
            }
        }
        Ok(())
    }

    pub fn to_json(&self) -> BlockageJson {
        BlockageJson { sets: self.sets.iter().map(|&x| bits::to_vec(x)).collect(), k: self.k }
    }

    pub fn from_json(json: &BlockageJson) -> Self {
        Blockage { sets: json.sets.iter().map(|x| bits::from_iter(x.iter().copied())).collect(), k: json.k }
    }
}

/// The small sides of a tangle.
pub fn blockage_from_tangle(o: &Orientation, system: &SeparationSystem, k: usize) -> Blockage {
    Blockage { sets: o.payloads(system).into_iter().map(|s| s.a).collect(), k }
}

/// `{(X, Y) ∈ S_k : X ∈ B}`.
pub fn tangle_from_blockage(bl: &Blockage, system: &SeparationSystem) -> Result<Orientation> {
    let ids = system.ids().filter(|&id| bl.sets.contains(&system.get(id).a)).collect();
    Orientation::new(system, ids).map_err(|e| Error::Validation(format!("blockage does not orient S_k: {e}")))
}

// ---------------------------------------------------------------- matroid tree-decompositions

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MatroidTreeDecomposition {
    pub tree: PlainTree,
    /// `tau[e]` is the node holding ground element `e`.
    pub tau: Vec<usize>,
}

impl MatroidTreeDecomposition {
    pub fn validate(&self, m: &Matroid) -> Result<()> {
        if self.tau.len() != m.ground_size() {
            return Err(Error::Validation("tau must map every ground element".into()));
        }
        if self.tau.iter().any(|&t| t >= self.tree.node_count) {
            return Err(Error::Validation("tau maps to a missing node".into()));
        }
        Ok(())
    }

    fn preimage(&self, nodes: &[usize]) -> Bits {
        let set: BTreeSet<usize> = nodes.iter().copied().collect();
        self.tau.iter().enumerate().filter(|(_, t)| set.contains(t)).fold(0, |acc, (e, _)| acc | bits::bit(e))
    }

    /// `Σ r(E ∖ F_i) − (d − 1)·r(M)` over the components of `T − t`.
    pub fn node_width(&self, m: &Matroid, t: usize) -> usize {
        let adj = self.tree.adjacency();
        if adj[t].is_empty() {
            return m.full_rank();
        }
        let e = m.ground();
        let d = adj[t].len();
        let sum: usize = adj[t].iter().map(|&s| m.rank(e & !self.preimage(&self.tree.side(s, t)))).sum();
        sum - (d - 1) * m.full_rank()
    }

    pub fn width(&self, m: &Matroid) -> usize {
        (0..self.tree.node_count).map(|t| self.node_width(m, t)).max().unwrap_or(0)
    }
}

/// Sends each element to the node all tree edges point to.
pub fn stree_to_matroid_decomposition(tree: &STree, m: &Matroid) -> MatroidTreeDecomposition {
    let (plain, ids) = PlainTree::from_stree(tree);
    let adj = plain.adjacency();
    let tau = (0..m.ground_size())
        .map(|e| {
            let mut t = 0;
            let mut prev = usize::MAX;
            while let Some(s) = adj[t]
                .iter()
                .copied()
                .find(|&s| s != prev && !bits::contains(tree.alpha(ids[s], ids[t]).expect("edge").b, e))
            {
                prev = t;
                t = s;
            }
            t
        })
        .collect();
    MatroidTreeDecomposition { tree: plain, tau }
}

/// Labels `st` with `(τ⁻¹(T_s), τ⁻¹(T_t))`; for `r(M) < k` the two-node tree on `(∅, E)`.
pub fn matroid_decomposition_to_stree(md: &MatroidTreeDecomposition, m: &Matroid, k: usize) -> Result<STree> {
    md.validate(m)?;
    let e = m.ground();
    if m.full_rank() < k || md.tree.node_count == 1 {
        return Ok(STree::single_edge(SetSep::new(0, e)));
    }
    let edges = md
        .tree
        .edges
        .iter()
        .map(|&(s, t)| {
            let a = md.preimage(&md.tree.side(s, t));
            (s, t, SetSep::new(a, e & !a))
        })
        .collect::<Vec<_>>();
    STree::from_edges(edges)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::duality::validate_tree;
    use crate::families::{BagFamily, MatroidFamily, TangleFamily};
    use crate::problem::{Instance, Mode, Problem};
    use crate::universe::Universe;

    fn solve(g: &Graph, mode: Mode, k: usize) -> (Problem, crate::duality::DualityWitness) {
        let p = Problem::build(&Instance::Graph(g.clone()), mode, k, None, None).unwrap();
        let w = p.solve().unwrap();
        (p, w)
    }

    #[test]
    fn single_bag_is_padded() {
        let g = Graph::complete(2);
        let td = TreeDecomposition::new(PlainTree::new(1, vec![]).unwrap(), vec![0b11]).unwrap();
        let t = tree_decomposition_to_stree(&td, &g).unwrap();
        assert_eq!(t.node_count(), 2);
        let u = Universe::vertex_separations(g).unwrap();
        let sys = u.system_below(3).unwrap();
        let f = BagFamily::treewidth(u, 3).unwrap();
        assert!(validate_tree(&t, &sys, &f).is_ok());
        assert_eq!(td.width(), 1);
        assert_eq!(td.adhesion(), 2);
    }

    #[test]
    fn path_bags_round_trip() {
        let g = Graph::path(3);
        let td = TreeDecomposition::new(PlainTree::new(2, vec![(0, 1)]).unwrap(), vec![0b011, 0b110]).unwrap();
        let t = tree_decomposition_to_stree(&td, &g).unwrap();
        let u = Universe::vertex_separations(g.clone()).unwrap();
        let sys = u.system_below(3).unwrap();
        let f = BagFamily::treewidth(u, 3).unwrap();
        assert!(validate_tree(&t, &sys, &f).is_ok());
        let back = stree_to_tree_decomposition(&t, g.vertices());
        back.validate(&g).unwrap();
        assert_eq!(back.width(), 1);
    }

    #[test]
    fn engine_trees_give_narrow_decompositions() {
        for (g, k) in [(Graph::cycle(5), 4), (Graph::path(5), 3), (Graph::star(4), 3)] {
            let (_, w) = solve(&g, Mode::Tree, k);
            let crate::duality::DualityWitness::Tree(t) = w else { panic!("expected a tree") };
            let td = stree_to_tree_decomposition(&t, g.vertices());
            td.validate(&g).unwrap();
            assert!(td.width() < k - 1);
        }
    }

    #[test]
    fn branch_translations() {
        for (g, k, width) in [
            (Graph::star(3), 3, 1),
            (Graph::path(4), 3, 2),
            (Graph::cycle(5), 3, 2),
            (Graph::complete(4), 4, 3),
            (Graph::matching(2), 3, 0),
            (Graph::new(5, [(0, 1), (1, 2)]).unwrap(), 3, 1),
        ] {
            let (p, w) = solve(&g, Mode::Branch, k);
            let crate::duality::DualityWitness::Tree(t) = w else { panic!("expected a tree for {g:?}") };
            let bd = stree_to_branch_decomposition(&t, &g, k).unwrap();
            assert!(bd.width(&g) < k);
            assert!(bd.width(&g) >= width);
            let back = branch_decomposition_to_stree(&bd, &g, k).unwrap();
            let report = validate_tree(&back, &p.system, p.family());
            assert!(report.is_ok(), "{g:?}: {}", report.describe());
        }
        assert!(stree_to_branch_decomposition(&STree::single_edge(SetSep::new(1, 1)), &Graph::star(3), 2).is_err());
    }

    #[test]
    fn tiny_branch_cases() {
        let fam = |g: &Graph| TangleFamily::new(Universe::vertex_separations(g.clone()).unwrap(), 3, true).unwrap();
        for g in [Graph::complete(2), Graph::edgeless(1), Graph::edgeless(4), Graph::matching(1)] {
            let bd = BranchDecomposition {
                tree: PlainTree::new(1, vec![]).unwrap(),
                leaf_of: vec![0; g.edge_count()],
            };
            assert_eq!(bd.width(&g), 0);
            let t = branch_decomposition_to_stree(&bd, &g, 3).unwrap();
            let sys = Universe::vertex_separations(g.clone()).unwrap().system_below(3).unwrap();
            let report = validate_tree(&t, &sys, &fam(&g));
            assert!(report.is_ok(), "{g:?}: {}", report.describe());
        }
    }

    #[test]
    fn bramble_round_trip_on_k3() {
        let g = Graph::complete(3);
        let (p, w) = solve(&g, Mode::Tree, 3);
        let crate::duality::DualityWitness::Tangle(o) = w else { panic!("K3 has a tangle") };
        let br = bramble_from_tangle(&o, &p.system, &g, 3).unwrap();
        br.validate(&g).unwrap();
        assert!(br.order(&g) >= 3);
        let back = tangle_from_bramble(&br, &p.system).unwrap();
        assert_eq!(back, o);
        let singletons = Bramble { sets: vec![0b001, 0b010, 0b100] };
        singletons.validate(&g).unwrap();
        assert_eq!(singletons.order(&g), 3);
    }

    #[test]
    fn blockage_round_trip() {
        let g = Graph::complete(2);
        let (p, w) = solve(&g, Mode::Path, 2);
        let crate::duality::DualityWitness::Tangle(o) = w else { panic!("pw(K2) = 1") };
        let bl = blockage_from_tangle(&o, &p.system, 2);
        bl.validate(&g, &p.system).unwrap();
        assert_eq!(tangle_from_blockage(&bl, &p.system).unwrap(), o);
        let mut broken = bl.clone();
        broken.sets.insert(g.vertices());
        assert!(broken.validate(&g, &p.system).is_err());
    }

    #[test]
    fn matroid_translations() {
        let m = Matroid::graphic(Graph::complete(3)).unwrap();
        let single = MatroidTreeDecomposition { tree: PlainTree::new(1, vec![]).unwrap(), tau: vec![0; 3] };
        assert_eq!(single.width(&m), 2);
        let u = Universe::matroid(m.clone()).unwrap();
        let p = Problem::build(&Instance::Matroid(m.clone()), Mode::MatroidTree, 3, None, None).unwrap();
        let crate::duality::DualityWitness::Tree(t) = p.solve().unwrap() else { panic!("tw(K3) = 2 < 3") };
        let md = stree_to_matroid_decomposition(&t, &m);
        assert!(md.width(&m) < 3);
        let back = matroid_decomposition_to_stree(&md, &m, 3).unwrap();
        let f = MatroidFamily::new(u, 3).unwrap();
        assert!(validate_tree(&back, &p.system, &f).is_ok());
    }
}
