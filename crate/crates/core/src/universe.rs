//! Concrete separation universes and the order functions that define `S_k`.
//!
//! Two universes are supported:
//!
//! * vertex separations `(A, B)` of a graph (no edge between `A∖B` and
//!   `B∖A`), ordered by `|A ∩ B|`;
//! * bipartitions `(X, E∖X)` of a ground set, ordered by a matroid's
//!   connectivity function, by cut size (carving-width) or by cut-rank
//!   (rank-width).
//!
//! Both are closed under the set-theoretic join and meet, so the universe
//! itself is never materialised: membership is a predicate and only the
//! bounded-order systems `S_k` are enumerated.

use serde::{Deserialize, Serialize};

use crate::bits::{self, Bits};
use crate::error::{usage, Error, Result};
use crate::separation::{SeparationSystem, SetSep};

/// Default cap on graph order for vertex-separation enumeration.
pub const DEFAULT_VERTEX_CAP: usize = 12;
/// Cap on ground-set size for bipartition universes (`2^16` elements).
pub const BIPARTITION_CAP: usize = 16;

/// Vertex cap, overridable through `WDK_CAP_VERTICES`.
pub fn vertex_cap() -> usize {
    std::env::var("WDK_CAP_VERTICES")
        .ok()
        .and_then(|v| v.trim().parse().ok())
        .map(|v: usize| v.min(63))
        .unwrap_or(DEFAULT_VERTEX_CAP)
}

/// A finite simple graph on vertices `0..n`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Graph {
    n: usize,
    adj: Vec<Bits>,
    edges: Vec<(usize, usize)>,
}

impl Graph {
    pub fn new(n: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        if n > 63 {
            return Err(Error::Cap(format!("graph with {n} vertices exceeds the 63-vertex representation limit")));
        }
        let mut adj = vec![0; n];
        let mut list = Vec::new();
        for (u, v) in edges {
            if u >= n || v >= n {
                return Err(Error::Input(format!("edge ({u},{v}) has an endpoint outside 0..{n}")));
            }
            if u == v {
                return Err(Error::Input(format!("loop at vertex {u}")));
            }
            if bits::contains(adj[u], v) {
                return Err(Error::Input(format!("parallel edge ({u},{v})")));
            }
            adj[u] |= bits::bit(v);
            adj[v] |= bits::bit(u);
            list.push((u.min(v), u.max(v)));
        }
        list.sort_unstable();
        Ok(Graph { n, adj, edges: list })
    }

    pub fn edgeless(n: usize) -> Self {
        Graph::new(n, []).expect("edgeless graph")
    }

    pub fn path(n: usize) -> Self {
        Graph::new(n, (1..n).map(|i| (i - 1, i))).expect("path")
    }

    pub fn cycle(n: usize) -> Self {
        assert!(n >= 3, "cycles need at least 3 vertices");
        Graph::new(n, (0..n).map(|i| (i, (i + 1) % n))).expect("cycle")
    }

    pub fn complete(n: usize) -> Self {
        Graph::new(n, (0..n).flat_map(|u| (u + 1..n).map(move |v| (u, v)))).expect("complete graph")
    }

    /// `K_{1,leaves}` with centre 0.
    pub fn star(leaves: usize) -> Self {
        Graph::new(leaves + 1, (1..=leaves).map(|v| (0, v))).expect("star")
    }

    /// `m` disjoint edges.
    pub fn matching(m: usize) -> Self {
        Graph::new(2 * m, (0..m).map(|i| (2 * i, 2 * i + 1))).expect("matching")
    }

    /// Complete binary tree of the given depth (depth 0 is a single vertex).
    pub fn complete_binary_tree(depth: usize) -> Self {
        let n = (1usize << (depth + 1)) - 1;
        Graph::new(n, (1..n).map(|v| ((v - 1) / 2, v))).expect("binary tree")
    }

    pub fn vertex_count(&self) -> usize {
        self.n
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn vertices(&self) -> Bits {
        bits::full(self.n)
    }

    pub fn neighbours(&self, v: usize) -> Bits {
        self.adj[v]
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        bits::contains(self.adj[u], v)
    }

    pub fn degree(&self, v: usize) -> usize {
        bits::len(self.adj[v])
    }

    /// Union of the neighbourhoods of `set`, minus `set`.
    pub fn neighbourhood(&self, set: Bits) -> Bits {
        bits::iter(set).fold(0, |acc, v| acc | self.adj[v]) & !set
    }

    /// Vertices of `set` with a neighbour outside `set`.
    pub fn boundary(&self, set: Bits) -> Bits {
        bits::iter(set).filter(|&v| self.adj[v] & !set != 0).fold(0, |acc, v| acc | bits::bit(v))
    }

    /// Connected components of the subgraph induced by `set`, in order of
    /// their smallest vertex.
    pub fn components(&self, set: Bits) -> Vec<Bits> {
        let mut rest = set;
        let mut out = Vec::new();
        while rest != 0 {
            let start = rest & rest.wrapping_neg();
            let mut comp = start;
            let mut frontier = start;
            while frontier != 0 {
                let grown = bits::iter(frontier).fold(0, |acc, v| acc | self.adj[v]) & set & !comp;
                comp |= grown;
                frontier = grown;
            }
            out.push(comp);
            rest &= !comp;
        }
        out
    }

    pub fn is_connected(&self) -> bool {
        self.components(self.vertices()).len() <= 1
    }

    pub fn is_connected_set(&self, set: Bits) -> bool {
        set != 0 && self.components(set).len() == 1
    }

    /// True if no edge joins `A∖B` to `B∖A` and `A ∪ B = V`.
    pub fn is_vertex_separation(&self, s: SetSep) -> bool {
        if s.a | s.b != self.vertices() {
            return false;
        }
        let only_a = s.a & !s.b;
        let only_b = s.b & !s.a;
        bits::iter(only_a).all(|v| self.adj[v] & only_b == 0)
    }

    /// Edges with both ends in `set`, as indices into [`Graph::edges`].
    pub fn induced_edges(&self, set: Bits) -> Bits {
        self.edges
            .iter()
            .enumerate()
            .filter(|(_, &(u, v))| bits::contains(set, u) && bits::contains(set, v))
            .fold(0, |acc, (i, _)| acc | bits::bit(i))
    }

    /// Number of edges between `set` and its complement.
    pub fn cut_size(&self, set: Bits) -> usize {
        bits::iter(set).map(|v| bits::len(self.adj[v] & !set & self.vertices())).sum()
    }

    /// GF(2) rank of the adjacency submatrix `set × (V∖set)`.
    pub fn cut_rank(&self, set: Bits) -> usize {
        let rest = self.vertices() & !set;
        bits::gf2_rank(bits::iter(set).map(|v| self.adj[v] & rest))
    }

    pub fn relabel(&self, perm: &[usize]) -> Graph {
        Graph::new(self.n, self.edges.iter().map(|&(u, v)| (perm[u], perm[v]))).expect("relabelled graph")
    }

    pub fn to_json(&self) -> GraphJson {
        GraphJson { vertices: self.n, edges: self.edges.iter().map(|&(u, v)| [u, v]).collect() }
    }

    pub fn from_json_str(text: &str) -> Result<Self> {
        let parsed: GraphJson =
            serde_json::from_str(text).map_err(|e| Error::Input(format!("graph JSON: {e}")))?;
        parsed.build()
    }

    /// Parses `p edge n m` / `e u v` text with 1-based vertices.
    pub fn from_dimacs(text: &str) -> Result<Self> {
        let mut n = None;
        let mut edges = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let mut parts = line.split_whitespace();
            let bad = || Error::Input(format!("line {}: malformed `{}`", lineno + 1, line.trim()));
            match parts.next() {
                None | Some("c") => {}
                Some("p") => {
                    let _kind = parts.next().ok_or_else(bad)?;
                    let count: usize = parts.next().and_then(|t| t.parse().ok()).ok_or_else(bad)?;
                    n = Some(count);
                }
                Some("e") => {
                    let u: usize = parts.next().and_then(|t| t.parse().ok()).ok_or_else(bad)?;
                    let v: usize = parts.next().and_then(|t| t.parse().ok()).ok_or_else(bad)?;
                    if u == 0 || v == 0 {
                        return Err(Error::Input(format!("line {}: vertices are 1-based", lineno + 1)));
                    }
                    edges.push((u - 1, v - 1));
                }
                Some(_) => return Err(bad()),
            }
        }
        let n = n.ok_or_else(|| Error::Input("missing `p edge n m` line".into()))?;
        Graph::new(n, edges)
    }

    /// Reads a graph in either JSON or DIMACS form, by sniffing the first byte.
    pub fn parse(text: &str) -> Result<Self> {
        if text.trim_start().starts_with('{') {
            Graph::from_json_str(text)
        } else {
            Graph::from_dimacs(text)
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq, Eq)]
pub struct GraphJson {
    pub vertices: usize,
    pub edges: Vec<[usize; 2]>,
}

impl GraphJson {
    pub fn build(&self) -> Result<Graph> {
        Graph::new(self.vertices, self.edges.iter().map(|e| (e[0], e[1])))
    }
}

/// How a matroid's rank function is computed.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum MatroidBacking {
    /// Cycle matroid of a graph; element `i` is the graph's `i`-th edge.
    Graphic(Graph),
    /// Column matroid of a GF(2) matrix; `columns[j]` has bit `i` set when row `i` has a 1.
    LinearGf2 { rows: usize, columns: Vec<Bits> },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Matroid {
    backing: MatroidBacking,
}

impl Matroid {
    pub fn graphic(g: Graph) -> Result<Self> {
        if g.edge_count() > 64 {
            return Err(Error::Cap("graphic matroid with more than 64 elements".into()));
        }
        Ok(Matroid { backing: MatroidBacking::Graphic(g) })
    }

    pub fn linear_gf2(rows: usize, columns: Vec<Bits>) -> Result<Self> {
        if rows > 64 || columns.len() > 64 {
            return Err(Error::Cap("GF(2) matrix larger than 64x64".into()));
        }
        Ok(Matroid { backing: MatroidBacking::LinearGf2 { rows, columns } })
    }

    /// Builds from row bit-strings; column `j` is ground element `j`.
    pub fn from_rows(rows: &[String]) -> Result<Self> {
        let width = rows.first().map_or(0, |r| r.len());
        let mut columns = vec![0u64; width];
        for (i, row) in rows.iter().enumerate() {
            if row.len() != width {
                return Err(Error::Input(format!("row {i} has length {} but row 0 has {width}", row.len())));
            }
            for (j, ch) in row.chars().enumerate() {
                match ch {
                    '0' => {}
                    '1' => columns[j] |= bits::bit(i),
                    other => return Err(Error::Input(format!("row {i}: unexpected character {other:?}"))),
                }
            }
        }
        Matroid::linear_gf2(rows.len(), columns)
    }

    pub fn backing(&self) -> &MatroidBacking {
        &self.backing
    }

    pub fn ground_size(&self) -> usize {
        match &self.backing {
            MatroidBacking::Graphic(g) => g.edge_count(),
            MatroidBacking::LinearGf2 { columns, .. } => columns.len(),
        }
    }

    pub fn ground(&self) -> Bits {
        bits::full(self.ground_size())
    }

    pub fn rank(&self, set: Bits) -> usize {
        match &self.backing {
            MatroidBacking::Graphic(g) => graphic_rank(g, set),
            MatroidBacking::LinearGf2 { columns, .. } => bits::gf2_rank(bits::iter(set).map(|j| columns[j])),
        }
    }

    pub fn full_rank(&self) -> usize {
        self.rank(self.ground())
    }

    /// Connectivity `λ(X) = r(X) + r(E∖X) − r(M)`.
    pub fn lambda(&self, set: Bits) -> usize {
        let rest = self.ground() & !set;
        self.rank(set) + self.rank(rest) - self.full_rank()
    }

    pub fn from_json_str(text: &str) -> Result<Self> {
        let parsed: MatroidJson =
            serde_json::from_str(text).map_err(|e| Error::Input(format!("matroid JSON: {e}")))?;
        match parsed {
            MatroidJson::Graphic { graph } => Matroid::graphic(graph.build()?),
            MatroidJson::LinearGf2 { rows } => Matroid::from_rows(&rows),
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum MatroidJson {
    Graphic { graph: GraphJson },
    LinearGf2 { rows: Vec<String> },
}

/// `|vertices touched by X| − #components of the edge set X`.
fn graphic_rank(g: &Graph, set: Bits) -> usize {
    let mut parent: Vec<usize> = (0..g.vertex_count()).collect();
    fn find(parent: &mut [usize], mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    let mut rank = 0;
    for i in bits::iter(set) {
        let (u, v) = g.edges()[i];
        let (ru, rv) = (find(&mut parent, u), find(&mut parent, v));
        if ru != rv {
            parent[ru] = rv;
            rank += 1;
        }
    }
    rank
}

/// Order function on a universe.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum OrderFunction {
    /// `|A ∩ B|` on vertex separations.
    Vertex,
    /// Matroid connectivity `λ(X)` on bipartitions.
    Matroid(Matroid),
    /// Number of edges across the cut `(X, V∖X)`.
    Carving(Graph),
    /// GF(2) rank of the `X × (V∖X)` adjacency submatrix.
    CutRank(Graph),
}

impl OrderFunction {
    pub fn kind(&self) -> &'static str {
        match self {
            OrderFunction::Vertex => "vertex",
            OrderFunction::Matroid(_) => "matroid",
            OrderFunction::Carving(_) => "carving",
            OrderFunction::CutRank(_) => "cutrank",
        }
    }

    pub fn eval(&self, s: SetSep) -> usize {
        match self {
            OrderFunction::Vertex => s.separator_size(),
            OrderFunction::Matroid(m) => m.lambda(s.a),
            OrderFunction::Carving(g) => g.cut_size(s.a),
            OrderFunction::CutRank(g) => g.cut_rank(s.a),
        }
    }
}

pub fn vertex_order(s: SetSep) -> usize {
    s.separator_size()
}

pub fn carving_order(g: &Graph, set: Bits) -> usize {
    g.cut_size(set)
}

pub fn cut_rank(g: &Graph, set: Bits) -> usize {
    g.cut_rank(set)
}

pub fn matroid_rank(m: &Matroid, set: Bits) -> usize {
    m.rank(set)
}

pub fn matroid_lambda(m: &Matroid, set: Bits) -> usize {
    m.lambda(set)
}

#[derive(Clone, Debug, PartialEq, Eq)]
enum Kind {
    Vertex(Graph),
    Bipartition(usize),
}

/// A universe of separations with its order function.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Universe {
    kind: Kind,
    order: OrderFunction,
}

impl Universe {
    /// Vertex separations of `g` with `ord(A,B) = |A∩B|`.
    pub fn vertex_separations(g: Graph) -> Result<Self> {
        let cap = vertex_cap();
        if g.vertex_count() > cap {
            return Err(Error::Cap(format!(
                "graph has {} vertices; the enumeration cap is {cap} (set WDK_CAP_VERTICES to raise it)",
                g.vertex_count()
            )));
        }
        if g.vertex_count() == 0 {
            return usage("the graph must have at least one vertex");
        }
        Ok(Universe { kind: Kind::Vertex(g), order: OrderFunction::Vertex })
    }

    fn bipartitions(ground: usize, order: OrderFunction) -> Result<Self> {
        if ground > BIPARTITION_CAP {
            return Err(Error::Cap(format!(
                "bipartition universe over {ground} elements exceeds the cap of {BIPARTITION_CAP}"
            )));
        }
        if ground == 0 {
            return usage("the ground set must be non-empty");
        }
        Ok(Universe { kind: Kind::Bipartition(ground), order })
    }

    /// Bipartitions of `V(g)` ordered by cut size.
    pub fn carving(g: Graph) -> Result<Self> {
        let n = g.vertex_count();
        Universe::bipartitions(n, OrderFunction::Carving(g))
    }

    /// Bipartitions of `V(g)` ordered by cut-rank.
    pub fn cut_rank(g: Graph) -> Result<Self> {
        let n = g.vertex_count();
        Universe::bipartitions(n, OrderFunction::CutRank(g))
    }

    /// Bipartitions of `E(M)` ordered by `λ`.
    pub fn matroid(m: Matroid) -> Result<Self> {
        let n = m.ground_size();
        Universe::bipartitions(n, OrderFunction::Matroid(m))
    }

    pub fn ground_size(&self) -> usize {
        match &self.kind {
            Kind::Vertex(g) => g.vertex_count(),
            Kind::Bipartition(n) => *n,
        }
    }

    pub fn ground(&self) -> Bits {
        bits::full(self.ground_size())
    }

    pub fn graph(&self) -> Option<&Graph> {
        match &self.kind {
            Kind::Vertex(g) => Some(g),
            Kind::Bipartition(_) => match &self.order {
                OrderFunction::Carving(g) | OrderFunction::CutRank(g) => Some(g),
                _ => None,
            },
        }
    }

    pub fn matroid_ref(&self) -> Option<&Matroid> {
        match &self.order {
            OrderFunction::Matroid(m) => Some(m),
            _ => None,
        }
    }

    pub fn is_bipartition(&self) -> bool {
        matches!(self.kind, Kind::Bipartition(_))
    }

    pub fn order_function(&self) -> &OrderFunction {
        &self.order
    }

    pub fn contains(&self, s: SetSep) -> bool {
        match &self.kind {
            Kind::Vertex(g) => g.is_vertex_separation(s),
            Kind::Bipartition(n) => s.a & s.b == 0 && s.a | s.b == bits::full(*n),
        }
    }

    pub fn order(&self, s: SetSep) -> usize {
        self.order.eval(s)
    }

    pub fn join(&self, r: SetSep, s: SetSep) -> SetSep {
        r.join(s)
    }

    pub fn meet(&self, r: SetSep, s: SetSep) -> SetSep {
        r.meet(s)
    }

    /// Every element of the universe between `lo` and `hi`, in canonical order.
    pub fn between(&self, lo: SetSep, hi: SetSep) -> Vec<SetSep> {
        if !lo.leq(hi) {
            return Vec::new();
        }
        let mut out: Vec<SetSep> = match &self.kind {
            Kind::Bipartition(n) => {
                let full = bits::full(*n);
                bits::subsets(hi.a & !lo.a).map(|x| SetSep::new(lo.a | x, full & !(lo.a | x))).collect()
            }
            Kind::Vertex(g) => {
                let v = g.vertices();
                let mut acc = Vec::new();
                for extra_a in bits::subsets(hi.a & !lo.a) {
                    let c = lo.a | extra_a;
                    let forced_b = (v & !c) | hi.b;
                    for extra_b in bits::subsets(lo.b & !forced_b) {
                        let s = SetSep::new(c, forced_b | extra_b);
                        if g.is_vertex_separation(s) {
                            acc.push(s);
                        }
                    }
                }
                acc
            }
        };
        out.retain(|s| lo.leq(*s) && s.leq(hi));
        out.sort();
        out
    }

    /// An element `s` of minimum order with `lo <= s <= hi`, ties broken by
    /// canonical order. `None` only when `lo` is not below `hi`.
    pub fn min_order_between(&self, lo: SetSep, hi: SetSep) -> Option<SetSep> {
        if !lo.leq(hi) {
            return None;
        }
        let mut best: Option<(usize, SetSep)> = None;
        let offer = |s: SetSep, best: &mut Option<(usize, SetSep)>| {
            let ord = self.order(s);
            if best.is_none_or(|(bo, bs)| ord < bo || (ord == bo && s < bs)) {
                *best = Some((ord, s));
            }
        };
        match &self.kind {
            Kind::Bipartition(n) => {
                let full = bits::full(*n);
                for x in bits::subsets(hi.a & !lo.a) {
                    let a = lo.a | x;
                    offer(SetSep::new(a, full & !a), &mut best);
                }
            }
            Kind::Vertex(g) => {
                // For a fixed A-side C the smallest admissible B-side is forced:
                // everything outside C, hi's B-side, and C's boundary vertices.
                let v = g.vertices();
                for x in bits::subsets(hi.a & !lo.a) {
                    let c = lo.a | x;
                    let d = (v & !c) | hi.b | g.boundary(c);
                    if bits::is_subset(d, lo.b) {
                        offer(SetSep::new(c, d), &mut best);
                    }
                }
            }
        }
        best.map(|(_, s)| s)
    }

    /// All oriented separations of order `< k`, generated without filtering
    /// the whole universe.
    pub fn enumerate_below(&self, k: usize) -> Vec<SetSep> {
        match &self.kind {
            Kind::Vertex(g) => {
                let v = g.vertices();
                let mut out = Vec::new();
                for sep in bits::subsets(v) {
                    if bits::len(sep) >= k {
                        continue;
                    }
                    let comps = g.components(v & !sep);
                    for mask in 0u64..(1u64 << comps.len()) {
                        let a_extra = comps
                            .iter()
                            .enumerate()
                            .filter(|(i, _)| mask >> i & 1 == 1)
                            .fold(0, |acc, (_, &c)| acc | c);
                        let a = sep | a_extra;
                        let b = sep | (v & !sep & !a_extra);
                        out.push(SetSep::new(a, b));
                    }
                }
                out.sort();
                out
            }
            Kind::Bipartition(n) => {
                let full = bits::full(*n);
                let mut out: Vec<SetSep> = bits::subsets(full)
                    .map(|x| SetSep::new(x, full & !x))
                    .filter(|&s| self.order(s) < k)
                    .collect();
                out.sort();
                out
            }
        }
    }

    /// The separation system `S_k` of all separations of order `< k`.
    pub fn system_below(&self, k: usize) -> Result<SeparationSystem> {
        if k == 0 {
            return usage("k must be a positive integer");
        }
        SeparationSystem::new(self.ground_size(), self.enumerate_below(k))
    }
}

/// `S_k` restricted from a universe; `k = 0` is rejected.
pub fn restrict_sk(universe: &Universe, k: usize) -> Result<SeparationSystem> {
    universe.system_below(k)
}

/// Vertex separations of `g` of order below `k_cap`.
pub fn build_graph_universe(g: &Graph, k_cap: usize) -> Result<(Universe, SeparationSystem)> {
    let universe = Universe::vertex_separations(g.clone())?;
    let system = universe.system_below(k_cap)?;
    Ok((universe, system))
}
