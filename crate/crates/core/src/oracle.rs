//! Brute-force ground truth, kept apart from the engine and the family code:
//! its own membership rules for the forbidden stars, an exhaustive tangle
//! search, exact classical widths by subset dynamic programming, a small-graph
//! corpus, the dichotomy check and negative controls.

use std::collections::HashSet;
use std::time::Instant;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::bits::{self, Bits};
use crate::duality::DualityWitness;
use crate::error::{Error, Result};
use crate::problem::{Instance, Mode, Problem};
use crate::separation::{Orientation, SepId, SeparationSystem, SetSep};
use crate::stree::STree;
use crate::universe::{Graph, Matroid, OrderFunction};

/// Most non-degenerate separations [`enumerate_consistent_orientations`] accepts.
pub const ORIENTATION_CAP: usize = 24;
/// Most items the branch-style width DPs accept (`3^n` work).
pub const WIDTH_DP_CAP: usize = 14;

fn leq(r: SetSep, s: SetSep) -> bool {
    r.a & !s.a == 0 && s.b & !r.b == 0
}

fn inv(s: SetSep) -> SetSep {
    SetSep { a: s.b, b: s.a }
}

/// `r` and `s` point towards each other.
fn pair_is_star(r: SetSep, s: SetSep) -> bool {
    leq(r, inv(s))
}

fn is_star(members: &[SetSep]) -> bool {
    !members.is_empty()
        && members.iter().enumerate().all(|(i, &r)| members[i + 1..].iter().all(|&s| r == s || pair_is_star(r, s)))
}

/// No `x*` and `s` of distinct separations with `x* < s`; a degenerate `x`
/// below any other member also counts.
pub fn is_consistent(set: &[SetSep]) -> bool {
    set.iter().all(|&x| set.iter().all(|&s| s == x || s == inv(x) || !leq(inv(x), s)))
}

// ---------------------------------------------------------------- membership rules

#[derive(Clone, Debug)]
enum Rule {
    /// Stars with `|⋂ B| < w`, optionally of bounded size.
    Bags { ground: Bits, w: usize, max_size: Option<usize> },
    /// At most three small sides covering the instance, plus leaf singletons
    /// for bipartitions.
    Cover { graph: Option<Graph>, stars_only: bool },
    /// Stars with `Σ r(B_i) − (|σ|−1)·r(M) < k`.
    MatroidStars { matroid: Matroid, k: usize },
    Listed(Vec<Vec<SetSep>>),
}

/// An independent description of a problem's forbidden family and of `S_k`.
#[derive(Clone, Debug)]
pub struct Oracle {
    rule: Rule,
    /// The graph of a vertex-separation universe.
    graph: Option<Graph>,
    order: OrderFunction,
    bipartition: bool,
    ground: Bits,
    k: usize,
}

impl Oracle {
    /// The family the problem's trees are built over.
    pub fn for_problem(p: &Problem) -> Result<Self> {
        let ground = p.universe.ground();
        let k = p.k;
        let rule = match p.mode {
            Mode::Tree => Rule::Bags { ground, w: k, max_size: None },
            Mode::Path => Rule::Bags { ground, w: k, max_size: Some(2) },
            Mode::Adhesion => Rule::Bags { ground, w: p.w.unwrap_or(k), max_size: None },
            Mode::Branch | Mode::Carving | Mode::Rank => {
                let graph = if p.universe.is_bipartition() { None } else { p.universe.graph().cloned() };
                if let Some(g) = &graph {
                    if g.vertex_count() + g.edge_count() > 64 + 128 || g.edge_count() > 128 {
                        return Err(Error::Cap("graph too large for the covering oracle".into()));
                    }
                }
                Rule::Cover { graph, stars_only: true }
            }
            Mode::MatroidTree => Rule::MatroidStars {
                matroid: p.universe.matroid_ref().cloned().ok_or_else(|| Error::Internal("no matroid".into()))?,
                k,
            },
            Mode::Custom => Rule::Listed(p.custom_stars.clone()),
        };
        let graph = if p.universe.is_bipartition() { None } else { p.universe.graph().cloned() };
        Ok(Oracle { rule, graph, order: p.universe.order_function().clone(), bipartition: p.universe.is_bipartition(), ground, k })
    }

    /// The classical version: covering triples need not be stars.
    pub fn classical(mut self) -> Self {
        if let Rule::Cover { stars_only, .. } = &mut self.rule {
            *stars_only = false;
        }
        self
    }

    /// Own order computation and membership test for `S_k`.
    pub fn in_system(&self, s: SetSep) -> bool {
        let order = match &self.order {
            OrderFunction::Vertex => {
                let g = self.graph.as_ref();
                if s.a | s.b != self.ground {
                    return false;
                }
                if let Some(g) = g {
                    let (left, right) = (s.a & !s.b, s.b & !s.a);
                    if g.edges().iter().any(|&(u, v)| {
                        (bits::contains(left, u) && bits::contains(right, v))
                            || (bits::contains(left, v) && bits::contains(right, u))
                    }) {
                        return false;
                    }
                }
                bits::len(s.a & s.b)
            }
            OrderFunction::Carving(g) => {
                if s.a & s.b != 0 || s.a | s.b != self.ground {
                    return false;
                }
                g.edges().iter().filter(|&&(u, v)| bits::contains(s.a, u) != bits::contains(s.a, v)).count()
            }
            OrderFunction::CutRank(g) => {
                if s.a & s.b != 0 || s.a | s.b != self.ground {
                    return false;
                }
                bits::gf2_rank(bits::iter(s.a).map(|u| g.neighbours(u) & s.b))
            }
            OrderFunction::Matroid(m) => {
                if s.a & s.b != 0 || s.a | s.b != self.ground {
                    return false;
                }
                m.rank(s.a) + m.rank(s.b) - m.full_rank()
            }
        };
        order < self.k
    }

    fn coverage(&self, s: SetSep) -> (Bits, u128) {
        match &self.rule {
            Rule::Cover { graph: Some(g), .. } => {
                let mut edges = 0u128;
                for (i, &(u, v)) in g.edges().iter().enumerate() {
                    if bits::contains(s.a, u) && bits::contains(s.a, v) {
                        edges |= 1u128 << i;
                    }
                }
                (s.a, edges)
            }
            _ => (s.a, 0),
        }
    }

    fn full_coverage(&self) -> (Bits, u128) {
        match &self.rule {
            Rule::Cover { graph: Some(g), .. } => {
                let m = g.edge_count();
                (self.ground, if m == 128 { u128::MAX } else { (1u128 << m) - 1 })
            }
            _ => (self.ground, 0),
        }
    }

    fn is_leaf_singleton(&self, s: SetSep) -> bool {
        self.bipartition && bits::len(s.b) == 1 && s.a == self.ground & !s.b
    }

    fn matroid_value(m: &Matroid, star: &[SetSep]) -> i64 {
        let sum: i64 = star.iter().map(|s| m.rank(s.b) as i64).sum();
        sum - (star.len() as i64 - 1) * m.full_rank() as i64
    }

    /// Whether `star` (a set of oriented separations) belongs to the family.
    pub fn is_member(&self, star: &[SetSep]) -> bool {
        let mut star = star.to_vec();
        star.sort();
        star.dedup();
        if star.is_empty() {
            return false;
        }
        match &self.rule {
            Rule::Bags { ground, w, max_size } => {
                is_star(&star)
                    && max_size.is_none_or(|m| star.len() <= m)
                    && bits::len(star.iter().fold(*ground, |acc, s| acc & s.b)) < *w
            }
            Rule::Cover { stars_only, .. } => {
                if star.len() == 1 && self.is_leaf_singleton(star[0]) {
                    return true;
                }
                if star.len() > 3 || (*stars_only && !is_star(&star)) {
                    return false;
                }
                let (cv, ce) = star.iter().map(|&s| self.coverage(s)).fold((0, 0), |(a, b), (x, y)| (a | x, b | y));
                (cv, ce) == self.full_coverage()
            }
            Rule::MatroidStars { matroid, k } => is_star(&star) && Self::matroid_value(matroid, &star) < *k as i64,
            Rule::Listed(list) => list.contains(&star),
        }
    }

    /// Some member of the family inside `chosen ∪ {new}` contains `new`.
    fn completes_member(&self, chosen: &[SetSep], new: SetSep) -> bool {
        match &self.rule {
            Rule::Bags { w, max_size: Some(m), .. } => {
                if bits::len(new.b) < *w {
                    return true;
                }
                *m >= 2 && chosen.iter().any(|&c| c != new && pair_is_star(c, new) && bits::len(c.b & new.b) < *w)
            }
            Rule::Bags { w, max_size: None, .. } => {
                let cands: Vec<SetSep> = chosen.iter().copied().filter(|&c| c != new && pair_is_star(c, new)).collect();
                let w = *w;
                clique_hit(&cands, new, &|r: &[SetSep]| bits::len(r.iter().fold(new.b, |acc, s| acc & s.b)) < w)
            }
            Rule::Cover { stars_only, .. } => {
                if self.is_leaf_singleton(new) {
                    return true;
                }
                let full = self.full_coverage();
                let cn = self.coverage(new);
                if cn == full {
                    return true;
                }
                let pool: Vec<(SetSep, (Bits, u128))> = chosen
                    .iter()
                    .copied()
                    .filter(|&c| c != new && (!*stars_only || pair_is_star(c, new)))
                    .map(|c| (c, self.coverage(c)))
                    .collect();
                for (i, &(ci, vi)) in pool.iter().enumerate() {
                    let two = (cn.0 | vi.0, cn.1 | vi.1);
                    if two == full {
                        return true;
                    }
                    for &(cj, vj) in &pool[i + 1..] {
                        if *stars_only && !pair_is_star(ci, cj) {
                            continue;
                        }
                        if (two.0 | vj.0, two.1 | vj.1) == full {
                            return true;
                        }
                    }
                }
                false
            }
            Rule::MatroidStars { matroid, k } => {
                let cands: Vec<SetSep> = chosen.iter().copied().filter(|&c| c != new && pair_is_star(c, new)).collect();
                let k = *k as i64;
                clique_hit(&cands, new, &|r: &[SetSep]| {
                    let mut all = r.to_vec();
                    all.push(new);
                    Self::matroid_value(matroid, &all) < k
                })
            }
            Rule::Listed(list) => list.iter().any(|m| m.contains(&new) && m.iter().all(|s| *s == new || chosen.contains(s))),
        }
    }

    /// No member of the family inside `pool`.
    pub fn avoids(&self, pool: &[SetSep]) -> bool {
        (0..pool.len()).all(|i| !self.completes_member(&pool[..i], pool[i]))
    }

    /// Independent check of an S-tree: labels in `S_k`, every node's
    /// incoming star a member. `Err` names the first problem.
    pub fn check_tree(&self, tree: &STree) -> std::result::Result<(), String> {
        for (x, y, s) in tree.oriented_edges() {
            if !self.in_system(s) {
                return Err(format!("label {s} on {x}->{y} is not in S_{}", self.k));
            }
        }
        for t in tree.nodes() {
            let star: Vec<SetSep> = tree.neighbours(t).map(|s| tree.alpha(s, t).expect("edge")).collect();
            if !self.is_member(&star) {
                return Err(format!("star at node {t} is not in the family"));
            }
        }
        Ok(())
    }

    /// Independent check of a tangle: orients `S_k`, consistent, avoids the family.
    pub fn check_tangle(&self, oriented: &[SetSep], system: &SeparationSystem) -> std::result::Result<(), String> {
        let set: HashSet<SetSep> = oriented.iter().copied().collect();
        for &s in system.elements() {
            if !self.in_system(s) {
                return Err(format!("{s} should not be in S_{}", self.k));
            }
            let has = set.contains(&s);
            let has_inv = set.contains(&inv(s));
            if !has && !has_inv {
                return Err(format!("{s} is not oriented"));
            }
            if s != inv(s) && has && has_inv {
                return Err(format!("both orientations of {s}"));
            }
        }
        if set.iter().any(|s| !system.contains(s)) {
            return Err("orientation has elements outside S_k".into());
        }
        if !is_consistent(oriented) {
            return Err("inconsistent".into());
        }
        if !self.avoids(oriented) {
            return Err("contains a member of the family".into());
        }
        Ok(())
    }

    /// Independent check of either kind of witness.
    pub fn check_witness(&self, w: &DualityWitness, system: &SeparationSystem) -> std::result::Result<(), String> {
        match w {
            DualityWitness::Tree(t) => self.check_tree(t),
            DualityWitness::Tangle(o) => self.check_tangle(&o.payloads(system), system),
        }
    }
}

/// Bron–Kerbosch over the pairwise-star graph on `cands`: is there a clique
/// `R` (possibly empty) with `hit(R)`? `hit` must be monotone under growing `R`,
/// so only maximal cliques need testing.
fn clique_hit(cands: &[SetSep], _seed: SetSep, hit: &dyn Fn(&[SetSep]) -> bool) -> bool {
    let n = cands.len();
    if hit(&[]) {
        return true;
    }
    let adj: Vec<Vec<bool>> =
        (0..n).map(|i| (0..n).map(|j| i != j && pair_is_star(cands[i], cands[j])).collect()).collect();
    fn bk(
        r: &mut Vec<usize>,
        p: Vec<usize>,
        x: Vec<usize>,
        adj: &[Vec<bool>],
        cands: &[SetSep],
        hit: &dyn Fn(&[SetSep]) -> bool,
    ) -> bool {
        if p.is_empty() && x.is_empty() {
            let members: Vec<SetSep> = r.iter().map(|&i| cands[i]).collect();
            return hit(&members);
        }
        let pivot = *p.iter().chain(x.iter()).max_by_key(|&&u| p.iter().filter(|&&v| adj[u][v]).count()).unwrap();
        let mut p = p;
        let mut x = x;
        let branch: Vec<usize> = p.iter().copied().filter(|&v| !adj[pivot][v]).collect();
        for v in branch {
            r.push(v);
            let np = p.iter().copied().filter(|&u| adj[v][u]).collect();
            let nx = x.iter().copied().filter(|&u| adj[v][u]).collect();
            if bk(r, np, nx, adj, cands, hit) {
                return true;
            }
            r.pop();
            p.retain(|&u| u != v);
            x.push(v);
        }
        false
    }
    bk(&mut Vec::new(), (0..n).collect(), Vec::new(), &adj, cands, hit)
}

// ---------------------------------------------------------------- orientation search

/// Every consistent orientation of a system with at most
/// [`ORIENTATION_CAP`] non-degenerate separations.
pub fn enumerate_consistent_orientations(system: &SeparationSystem) -> Result<Vec<Orientation>> {
    let proper: Vec<SepId> = system.separations().filter(|&s| !system.is_degenerate(s)).collect();
    if proper.len() > ORIENTATION_CAP {
        return Err(Error::Cap(format!(
            "{} separations exceed the enumeration cap of {ORIENTATION_CAP}",
            proper.len()
        )));
    }
    let fixed: Vec<SepId> = system.separations().filter(|&s| system.is_degenerate(s)).collect();
    let mut out = Vec::new();
    for mask in 0u64..(1u64 << proper.len()) {
        let mut ids = fixed.clone();
        ids.extend(proper.iter().enumerate().map(|(i, &s)| if mask >> i & 1 == 1 { system.inverse(s) } else { s }));
        let payloads: Vec<SetSep> = ids.iter().map(|&i| system.get(i)).collect();
        if is_consistent(&payloads) {
            out.push(Orientation::new(system, ids)?);
        }
    }
    Ok(out)
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Status {
    Free,
    In,
    Out,
}

struct Search<'a> {
    oracle: &'a Oracle,
    system: &'a SeparationSystem,
    below: Vec<Vec<SepId>>,
    degenerate_below: Vec<bool>,
    status: Vec<Status>,
    chosen: Vec<SetSep>,
    trail: Vec<SepId>,
    order: Vec<SepId>,
    found: Vec<Orientation>,
    limit: usize,
    nodes: u64,
}

impl<'a> Search<'a> {
    fn new(oracle: &'a Oracle, system: &'a SeparationSystem, limit: usize) -> Self {
        let n = system.len();
        let els = system.elements();
        let mut below = vec![Vec::new(); n];
        let mut degenerate_below = vec![false; n];
        for x in 0..n {
            for y in 0..n {
                if y != x && y != system.inverse(x) && leq(els[y], els[x]) {
                    below[x].push(y);
                    if els[y] == inv(els[y]) {
                        degenerate_below[x] = true;
                    }
                }
            }
        }
        // big separations first: their down-closures settle the most
        let mut order: Vec<SepId> = system.separations().collect();
        order.sort_by_key(|&s| std::cmp::Reverse(below[s].len().max(below[system.inverse(s)].len())));
        Search {
            oracle,
            system,
            below,
            degenerate_below,
            status: vec![Status::Free; n],
            chosen: Vec::new(),
            trail: Vec::new(),
            order,
            found: Vec::new(),
            limit,
            nodes: 0,
        }
    }

    /// Adds `id` with everything below it; `false` on a clash.
    fn add(&mut self, id: SepId) -> bool {
        let mut queue = vec![id];
        while let Some(x) = queue.pop() {
            match self.status[x] {
                Status::In => continue,
                Status::Out => return false,
                Status::Free => {}
            }
            let s = self.system.get(x);
            if self.degenerate_below[x] || self.oracle.completes_member(&self.chosen, s) {
                return false;
            }
            self.status[x] = Status::In;
            let xi = self.system.inverse(x);
            if xi != x {
                self.status[xi] = Status::Out;
            }
            self.chosen.push(s);
            self.trail.push(x);
            queue.extend(self.below[x].iter().copied());
        }
        true
    }

    fn undo_to(&mut self, mark: usize) {
        while self.trail.len() > mark {
            let x = self.trail.pop().unwrap();
            self.status[x] = Status::Free;
            let xi = self.system.inverse(x);
            self.status[xi] = Status::Free;
            self.chosen.pop();
        }
    }

    fn run(&mut self, pos: usize) {
        self.nodes += 1;
        if self.found.len() >= self.limit {
            return;
        }
        let Some(offset) = self.order[pos..].iter().position(|&s| self.status[s] == Status::Free) else {
            let ids: Vec<SepId> = self.system.ids().filter(|&i| self.status[i] == Status::In).collect();
            self.found.push(Orientation::new(self.system, ids).expect("complete orientation"));
            return;
        };
        let s = self.order[pos + offset];
        for x in [s, self.system.inverse(s)] {
            let mark = self.trail.len();
            if self.add(x) {
                self.run(pos + offset + 1);
            }
            self.undo_to(mark);
            if self.found.len() >= self.limit {
                return;
            }
        }
    }
}

/// Up to `limit` consistent orientations of `system` avoiding the oracle's family.
pub fn find_tangles(oracle: &Oracle, system: &SeparationSystem, limit: usize) -> Vec<Orientation> {
    let mut search = Search::new(oracle, system, limit);
    let degenerate: Vec<SepId> = system.ids().filter(|&i| system.is_degenerate(i)).collect();
    for d in degenerate {
        if !search.add(d) {
            return Vec::new();
        }
    }
    search.run(0);
    search.found
}

/// A classical tangle of the problem's `S_k`, if one exists.
pub fn brute_force_tangle(p: &Problem) -> Result<Option<Orientation>> {
    let oracle = Oracle::for_problem(p)?.classical();
    Ok(find_tangles(&oracle, &p.system, 1).pop())
}

pub fn brute_force_tangle_exists(p: &Problem) -> Result<bool> {
    brute_force_tangle(p).map(|o| o.is_some())
}

// ---------------------------------------------------------------- exact widths

/// Tree-width by the elimination-ordering recursion over vertex subsets.
pub fn treewidth_exact(g: &Graph) -> Result<usize> {
    let n = g.vertex_count();
    if n > 20 {
        return Err(Error::Cap(format!("tree-width DP over {n} vertices")));
    }
    if n == 0 {
        return Ok(0);
    }
    // vertices outside S ∪ {v} reachable from v through S
    let q = |s: Bits, v: usize| -> usize {
        let mut seen = bits::bit(v);
        let mut frontier = bits::bit(v);
        let mut reach = 0;
        while frontier != 0 {
            let mut next = 0;
            for u in bits::iter(frontier) {
                next |= g.neighbours(u);
            }
            next &= !seen;
            seen |= next;
            reach |= next & !s;
            frontier = next & s;
        }
        bits::len(reach)
    };
    let size = 1usize << n;
    let mut tw = vec![i32::MAX; size];
    tw[0] = -1;
    for s in 1..size as u64 {
        let mut best = i32::MAX;
        for v in bits::iter(s) {
            let rest = s & !bits::bit(v);
            best = best.min(tw[rest as usize].max(q(rest, v) as i32));
        }
        tw[s as usize] = best;
    }
    Ok(tw[size - 1].max(0) as usize)
}

/// Path-width as the vertex separation number, by DP over vertex subsets.
pub fn pathwidth_exact(g: &Graph) -> Result<usize> {
    let n = g.vertex_count();
    if n > 20 {
        return Err(Error::Cap(format!("path-width DP over {n} vertices")));
    }
    let size = 1usize << n;
    let mut f = vec![usize::MAX; size];
    f[0] = 0;
    for s in 1..size as u64 {
        let border = bits::iter(s).filter(|&u| !bits::is_subset(g.neighbours(u), s)).count();
        let best = bits::iter(s).map(|v| f[(s & !bits::bit(v)) as usize]).min().unwrap();
        f[s as usize] = best.max(border);
    }
    Ok(f[size - 1])
}

/// Branch-width of a symmetric set function on `n` items: the least width
/// of a cubic tree whose leaves are the items; `0` when `n <= 1`.
pub fn branch_decomposition_width(n: usize, f: impl Fn(Bits) -> usize) -> Result<usize> {
    if n > WIDTH_DP_CAP {
        return Err(Error::Cap(format!("branch-style DP over {n} items exceeds {WIDTH_DP_CAP}")));
    }
    if n <= 1 {
        return Ok(0);
    }
    let full = bits::full(n);
    let size = 1usize << n;
    let mut w = vec![usize::MAX; size];
    // subsets in increasing popcount order so parts are ready
    let mut sets: Vec<u64> = (1..full).collect();
    sets.sort_by_key(|&s| s.count_ones());
    for s in sets {
        if s.count_ones() == 1 {
            w[s as usize] = f(s);
            continue;
        }
        let low = s & s.wrapping_neg();
        let mut best = usize::MAX;
        // proper parts containing the lowest element
        let rest = s & !low;
        for sub in bits::subsets(rest) {
            let part = sub | low;
            if part == s {
                continue;
            }
            best = best.min(w[part as usize].max(w[(s & !part) as usize]));
        }
        w[s as usize] = best.max(f(s));
    }
    let mut best = usize::MAX;
    for sub in bits::subsets(full & !1) {
        let part = sub | 1;
        if part == full {
            continue;
        }
        best = best.min(w[part as usize].max(w[(full & !part) as usize]));
    }
    Ok(best)
}

/// Vertices incident with edges in `set` and with edges outside it.
fn middle(g: &Graph, set: Bits) -> usize {
    let (mut inside, mut outside) = (0, 0);
    for (i, &(u, v)) in g.edges().iter().enumerate() {
        let ends = bits::bit(u) | bits::bit(v);
        if bits::contains(set, i) {
            inside |= ends;
        } else {
            outside |= ends;
        }
    }
    bits::len(inside & outside)
}

pub fn branchwidth_exact(g: &Graph) -> Result<usize> {
    branch_decomposition_width(g.edge_count(), |set| middle(g, set))
}

pub fn carving_width_exact(g: &Graph) -> Result<usize> {
    branch_decomposition_width(g.vertex_count(), |set| {
        g.edges().iter().filter(|&&(u, v)| bits::contains(set, u) != bits::contains(set, v)).count()
    })
}

pub fn rank_width_exact(g: &Graph) -> Result<usize> {
    let all = g.vertices();
    branch_decomposition_width(g.vertex_count(), |set| {
        bits::gf2_rank(bits::iter(set).map(|u| g.neighbours(u) & all & !set))
    })
}

// ---------------------------------------------------------------- corpus

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NamedGraph {
    pub name: String,
    pub graph: Graph,
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut p: Vec<usize> = (0..n).collect();
    fn rec(k: usize, p: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if k == p.len() {
            out.push(p.clone());
            return;
        }
        for i in k..p.len() {
            p.swap(k, i);
            rec(k + 1, p, out);
            p.swap(k, i);
        }
    }
    rec(0, &mut p, &mut out);
    out
}

/// One representative of every isomorphism class of graphs on `n` vertices.
pub fn nonisomorphic_graphs(n: usize) -> Vec<Graph> {
    assert!(n <= 7, "isomorphism classes are enumerated up to 7 vertices");
    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|u| (u + 1..n).map(move |v| (u, v))).collect();
    let index = |u: usize, v: usize| pairs.iter().position(|&p| p == (u.min(v), u.max(v))).unwrap();
    let perms = permutations(n);
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    for mask in 0u64..(1u64 << pairs.len()) {
        let canon = perms
            .iter()
            .map(|p| {
                pairs
                    .iter()
                    .enumerate()
                    .filter(|(i, _)| mask >> i & 1 == 1)
                    .fold(0u64, |acc, (_, &(u, v))| acc | 1 << index(p[u], p[v]))
            })
            .min()
            .unwrap();
        if seen.insert(canon) {
            let edges = pairs.iter().enumerate().filter(|(i, _)| mask >> i & 1 == 1).map(|(_, &e)| e);
            out.push(Graph::new(n, edges).expect("graph"));
        }
    }
    out
}

/// All graphs on `1..=max_n` vertices up to isomorphism, named `g{n}-{i}`.
pub fn small_graphs(max_n: usize) -> Vec<NamedGraph> {
    (1..=max_n)
        .flat_map(|n| {
            nonisomorphic_graphs(n)
                .into_iter()
                .enumerate()
                .map(move |(i, graph)| NamedGraph { name: format!("g{n}-{i}"), graph })
        })
        .collect()
}

/// `count` random graphs on 6–7 vertices with at most 12 edges.
pub fn random_graphs(seed: u64, count: usize) -> Vec<NamedGraph> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::new();
    while out.len() < count {
        let n = rng.gen_range(6..=7);
        let pairs: Vec<(usize, usize)> = (0..n).flat_map(|u| (u + 1..n).map(move |v| (u, v))).collect();
        let edges: Vec<(usize, usize)> = pairs.into_iter().filter(|_| rng.gen_bool(0.35)).collect();
        if edges.len() > 12 {
            continue;
        }
        let graph = Graph::new(n, edges).expect("graph");
        out.push(NamedGraph { name: format!("rand{n}-s{seed}-{}", out.len()), graph });
    }
    out
}

pub fn named_graphs() -> Vec<NamedGraph> {
    let mut out = Vec::new();
    let mut add = |name: String, graph: Graph| out.push(NamedGraph { name, graph });
    for n in 2..=6 {
        add(format!("P{n}"), Graph::path(n));
    }
    for n in 3..=6 {
        add(format!("C{n}"), Graph::cycle(n));
    }
    for n in 1..=4 {
        add(format!("K1_{n}"), Graph::star(n));
    }
    for n in 2..=5 {
        add(format!("K{n}"), Graph::complete(n));
    }
    for m in 1..=3 {
        add(format!("M{m}"), Graph::matching(m));
    }
    add("BT2".into(), Graph::complete_binary_tree(2));
    out
}

/// Small graphs up to `max_n`, named graphs within `max(max_n, 7)` vertices
/// and `random` seeded random graphs.
pub fn default_corpus(max_n: usize, seed: u64, random: usize) -> Vec<NamedGraph> {
    let mut out = small_graphs(max_n.min(6));
    out.extend(named_graphs().into_iter().filter(|g| g.graph.vertex_count() <= max_n.max(5)));
    if max_n >= 6 {
        out.extend(random_graphs(seed, random));
    }
    out
}

// ---------------------------------------------------------------- dichotomy

/// One line of a suite report.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DichotomyReport {
    pub instance: String,
    pub mode: Mode,
    pub k: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub w: Option<usize>,
    pub side: String,
    pub value: String,
    pub verified: bool,
    pub ms: u64,
    #[serde(default, skip_serializing_if = "String::is_empty")]
    pub detail: String,
}

impl DichotomyReport {
    pub fn csv_header() -> &'static str {
        "instance,mode,k,side,value,verified,ms"
    }

    pub fn csv_row(&self) -> String {
        format!("{},{},{},{},{},{},{}", self.instance, self.mode, self.k, self.side, self.value, self.verified, self.ms)
    }
}

/// What the classical width says the side should be, where it says anything.
pub fn expected_tangle(graph: &Graph, mode: Mode, k: usize, w: Option<usize>) -> Result<Option<bool>> {
    Ok(match mode {
        Mode::Tree => Some(treewidth_exact(graph)? + 1 >= k),
        Mode::Adhesion if w == Some(k) => Some(treewidth_exact(graph)? + 1 >= k),
        Mode::Path => Some(pathwidth_exact(graph)? + 1 >= k),
        Mode::Branch if k == 1 => Some(true),
        Mode::Branch if k == 2 => Some(graph.edge_count() > 0),
        Mode::Branch if graph.edge_count() <= WIDTH_DP_CAP => Some(branchwidth_exact(graph)? >= k),
        Mode::Carving => Some(carving_width_exact(graph)? >= k),
        Mode::Rank => Some(rank_width_exact(graph)? >= k),
        Mode::MatroidTree if graph.is_connected() && graph.edge_count() > 0 => Some(treewidth_exact(graph)? >= k),
        _ => None,
    })
}

/// Runs the engine, validates its witness twice (with the problem's
/// validator and independently), and confirms the other side is absent:
/// by exhaustive tangle search, and by the classical width where one applies.
pub fn verify_dichotomy(name: &str, instance: &Instance, mode: Mode, k: usize, w: Option<usize>) -> DichotomyReport {
    let start = Instant::now();
    let mut report = DichotomyReport {
        instance: name.to_string(),
        mode,
        k,
        w,
        side: "error".into(),
        value: String::new(),
        verified: false,
        ms: 0,
        detail: String::new(),
    };
    let outcome = (|| -> Result<Vec<String>> {
        let p = Problem::build(instance, mode, k, w, None)?;
        let witness = p.solve()?;
        report.side = witness.side().into();
        report.value = p.interpret(witness.is_tangle());
        let mut problems = Vec::new();
        if let Err(why) = p.verify(&witness) {
            problems.push(format!("validator: {why}"));
        }
        let oracle = Oracle::for_problem(&p)?;
        let own = match &witness {
            DualityWitness::Tangle(_) => oracle.clone().classical().check_witness(&witness, &p.system),
            DualityWitness::Tree(_) => oracle.check_witness(&witness, &p.system),
        };
        if let Err(why) = own {
            problems.push(format!("independent check: {why}"));
        }
        let brute = brute_force_tangle_exists(&p)?;
        if brute != witness.is_tangle() {
            problems.push(format!("exhaustive search says tangle={brute}"));
        }
        if let Some(g) = instance.graph() {
            if let Some(expected) = expected_tangle(g, mode, k, w)? {
                if expected != witness.is_tangle() {
                    problems.push(format!("classical width says tangle={expected}"));
                }
            }
        }
        Ok(problems)
    })();
    match outcome {
        Ok(problems) => {
            report.verified = problems.is_empty();
            report.detail = problems.join("; ");
        }
        Err(e) => report.detail = e.to_string(),
    }
    report.ms = start.elapsed().as_millis() as u64;
    report
}

/// One `(instance, mode, k, w)` check of a suite.
#[derive(Clone, Debug)]
pub struct Job {
    pub name: String,
    pub instance: Instance,
    pub mode: Mode,
    pub k: usize,
    pub w: Option<usize>,
}

impl Job {
    pub fn run(&self) -> DichotomyReport {
        verify_dichotomy(&self.name, &self.instance, self.mode, self.k, self.w)
    }
}

/// Largest edge count for which the suite runs matroid mode: beyond it the
/// bipartition systems get too large for exhaustive search.
pub const MATROID_SUITE_EDGE_CAP: usize = 10;

/// Jobs for every graph, mode and `k = 1..=|V|+1`. Adhesion runs with
/// `w = k + 1`; matroid mode uses the cycle matroid and skips graphs with no
/// edges or more than [`MATROID_SUITE_EDGE_CAP`].
pub fn suite_jobs(corpus: &[NamedGraph], modes: &[Mode]) -> Vec<Job> {
    let mut jobs = Vec::new();
    for g in corpus {
        for &mode in modes {
            let edges = g.graph.edge_count();
            if mode == Mode::Custom || (mode == Mode::MatroidTree && (edges == 0 || edges > MATROID_SUITE_EDGE_CAP)) {
                continue;
            }
            for k in 1..=g.graph.vertex_count() + 1 {
                let w = (mode == Mode::Adhesion).then_some(k + 1);
                jobs.push(Job { name: g.name.clone(), instance: Instance::Graph(g.graph.clone()), mode, k, w });
            }
        }
    }
    jobs
}

// ---------------------------------------------------------------- negative controls

/// Outcome of a batch of mutated witnesses.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ControlReport {
    /// Mutants the independent oracle found invalid.
    pub invalid: usize,
    /// Of those, how many the validator rejected.
    pub rejected: usize,
    /// Mutants the oracle found valid (not counted as controls).
    pub still_valid: usize,
    /// Disagreements between the validator and the oracle.
    pub escapes: Vec<String>,
}

fn mutate(p: &Problem, witness: &DualityWitness, rng: &mut ChaCha8Rng) -> Option<DualityWitness> {
    let sys = &p.system;
    match witness {
        DualityWitness::Tangle(o) => {
            let mut ids = o.ids().to_vec();
            let flips = rng.gen_range(1..=2);
            for _ in 0..flips {
                let i = rng.gen_range(0..ids.len());
                ids[i] = sys.inverse(ids[i]);
            }
            let mut unique = ids.clone();
            unique.sort_unstable();
            unique.dedup();
            Orientation::new(sys, unique).ok().map(DualityWitness::Tangle)
        }
        DualityWitness::Tree(t) => {
            let mut edges = t.edges();
            let pick = rng.gen_range(0..edges.len());
            let random_label = |rng: &mut ChaCha8Rng| sys.get(rng.gen_range(0..sys.len()));
            match rng.gen_range(0..4) {
                0 => edges[pick].2 = edges[pick].2.inverse(),
                1 => edges[pick].2 = random_label(rng),
                2 => {
                    // a label outside S_k, when the universe has one
                    let g = p.universe.ground();
                    let a = rng.gen::<u64>() & g;
                    let b = if p.universe.is_bipartition() { g & !a } else { (rng.gen::<u64>() & g) | (g & !a) };
                    let s = SetSep::new(a, b);
                    if !p.universe.contains(s) {
                        return None;
                    }
                    edges[pick].2 = s;
                }
                _ => {
                    let nodes: Vec<usize> = t.nodes().collect();
                    let at = *nodes.choose(rng)?;
                    let fresh = t.max_node() + 1;
                    edges.push((at, fresh, random_label(rng)));
                }
            }
            STree::from_edges(edges).ok().map(DualityWitness::Tree)
        }
    }
}

/// Mutates `witness` until `count` mutants the oracle deems invalid have been
/// seen (or attempts run out) and records how the validator judged them.
pub fn negative_controls(p: &Problem, witness: &DualityWitness, count: usize, seed: u64) -> Result<ControlReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let oracle = Oracle::for_problem(p)?;
    let mut report = ControlReport::default();
    let mut attempts = 0;
    while report.invalid < count && attempts < count * 50 {
        attempts += 1;
        let Some(mutant) = mutate(p, witness, &mut rng) else { continue };
        let truth = match &mutant {
            DualityWitness::Tangle(_) => oracle.clone().classical().check_witness(&mutant, &p.system),
            DualityWitness::Tree(_) => oracle.check_witness(&mutant, &p.system),
        };
        let verdict = p.verify(&mutant);
        match (truth.is_ok(), verdict.is_ok()) {
            (false, false) => {
                report.invalid += 1;
                report.rejected += 1;
            }
            (false, true) => {
                report.invalid += 1;
                report.escapes.push(format!("accepted an invalid mutant ({})", truth.unwrap_err()));
            }
            (true, true) => report.still_valid += 1,
            (true, false) => report.escapes.push(format!("rejected a valid mutant ({})", verdict.unwrap_err())),
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn problem(g: Graph, mode: Mode, k: usize) -> Problem {
        Problem::build(&Instance::Graph(g), mode, k, None, None).unwrap()
    }

    #[test]
    fn enumeration_counts() {
        // one degenerate separation only
        let sys = SeparationSystem::new(2, [SetSep::new(3, 3)]).unwrap();
        assert_eq!(enumerate_consistent_orientations(&sys).unwrap().len(), 1);
        let sys = SeparationSystem::new(2, [SetSep::new(1, 2)]).unwrap();
        assert_eq!(enumerate_consistent_orientations(&sys).unwrap().len(), 2);
        // the same count by plain filtering over orientation choices
        let p = problem(Graph::path(3), Mode::Tree, 2);
        let listed = enumerate_consistent_orientations(&p.system).unwrap();
        let seps: Vec<SepId> = p.system.separations().collect();
        let mut recount = 0;
        for mask in (0u64..1 << seps.len()).rev() {
            let chosen: Vec<SetSep> = seps
                .iter()
                .enumerate()
                .map(|(i, &s)| p.system.get(if mask >> i & 1 == 1 { s } else { p.system.inverse(s) }))
                .collect();
            if p.system.is_consistent(&chosen.iter().map(|s| p.system.id_of(s).unwrap()).collect::<Vec<_>>()) {
                recount += 1;
            }
        }
        assert_eq!(listed.len(), recount);
        assert!(recount > 0);
    }

    #[test]
    fn search_matches_enumeration() {
        for g in [Graph::path(3), Graph::cycle(3), Graph::star(2)] {
            for k in 1..=2 {
                let p = problem(g.clone(), Mode::Tree, k);
                let oracle = Oracle::for_problem(&p).unwrap();
                let Ok(all) = enumerate_consistent_orientations(&p.system) else { continue };
                let avoiding = all.iter().filter(|o| oracle.avoids(&o.payloads(&p.system))).count();
                assert_eq!(find_tangles(&oracle, &p.system, usize::MAX).len(), avoiding, "{g:?} k={k}");
            }
        }
    }

    #[test]
    fn brute_force_examples() {
        assert!(brute_force_tangle_exists(&problem(Graph::complete(3), Mode::Tree, 3)).unwrap());
        assert!(!brute_force_tangle_exists(&problem(Graph::path(3), Mode::Tree, 3)).unwrap());
        // a family forcing both orientations of a separation
        let s = SetSep::new(0b01, 0b11);
        let sys = SeparationSystem::new(2, [s]).unwrap();
        let oracle = Oracle {
            rule: Rule::Listed(vec![vec![s], vec![s.inverse()]]),
            graph: None,
            order: OrderFunction::Vertex,
            bipartition: false,
            ground: 0b11,
            k: 5,
        };
        assert!(find_tangles(&oracle, &sys, 1).is_empty());
    }

    #[test]
    fn classical_widths() {
        for n in 2..=5 {
            assert_eq!(treewidth_exact(&Graph::complete(n)).unwrap(), n - 1);
        }
        for n in 2..=6 {
            assert_eq!(pathwidth_exact(&Graph::path(n)).unwrap(), 1);
        }
        // depth 2 is a caterpillar; depth 3 is the first with path-width 2
        assert_eq!(pathwidth_exact(&Graph::complete_binary_tree(2)).unwrap(), 1);
        assert_eq!(pathwidth_exact(&Graph::complete_binary_tree(3)).unwrap(), 2);
        assert_eq!(treewidth_exact(&Graph::cycle(5)).unwrap(), 2);
        assert_eq!(branchwidth_exact(&Graph::complete(4)).unwrap(), 3);
        assert_eq!(branchwidth_exact(&Graph::cycle(4)).unwrap(), 2);
        assert_eq!(branchwidth_exact(&Graph::star(3)).unwrap(), 1);
        assert_eq!(branchwidth_exact(&Graph::matching(2)).unwrap(), 0);
        assert_eq!(carving_width_exact(&Graph::cycle(4)).unwrap(), 2);
        assert_eq!(rank_width_exact(&Graph::complete(4)).unwrap(), 1);
        assert_eq!(rank_width_exact(&Graph::cycle(5)).unwrap(), 2);
    }

    #[test]
    fn corpus_sizes() {
        let counts: Vec<usize> = (1..=5).map(|n| nonisomorphic_graphs(n).len()).collect();
        assert_eq!(counts, vec![1, 2, 4, 11, 34]);
        assert_eq!(random_graphs(7, 5), random_graphs(7, 5));
    }

    #[test]
    fn dichotomy_examples() {
        let k3 = Instance::Graph(Graph::complete(3));
        for mode in [Mode::Tree, Mode::Path, Mode::Branch, Mode::Carving, Mode::Rank, Mode::MatroidTree] {
            for k in 1..=4 {
                let r = verify_dichotomy("K3", &k3, mode, k, None);
                assert!(r.verified, "{r:?}");
            }
        }
        let r = verify_dichotomy("P3", &Instance::Graph(Graph::path(3)), Mode::Tree, 5, None);
        assert!(r.verified && r.side == "tree");
    }

    #[test]
    fn controls_are_rejected() {
        for (g, mode, k) in [(Graph::complete(3), Mode::Tree, 3), (Graph::cycle(4), Mode::Branch, 3)] {
            let p = problem(g, mode, k);
            let w = p.solve().unwrap();
            let report = negative_controls(&p, &w, 30, 1).unwrap();
            assert!(report.escapes.is_empty(), "{report:?}");
            assert_eq!(report.rejected, report.invalid);
            assert!(report.invalid > 0);
        }
    }
}
