//! Shared generators and property checks for the integration tests.
#![allow(dead_code)]

use std::collections::{BTreeMap, VecDeque};

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use wdk_core::bits::{self, Bits};
use wdk_core::duality::{shift_map, DualityWitness};
use wdk_core::oracle::{find_tangles, Oracle};
use wdk_core::problem::{Instance, Mode, Problem};
use wdk_core::separation::SetSep;
use wdk_core::stree::STree;
use wdk_core::universe::{Graph, Matroid, Universe};

pub type Check = Result<(), String>;

pub fn random_graph(rng: &mut ChaCha8Rng, min_n: usize, max_n: usize, p: f64) -> Graph {
    let n = rng.gen_range(min_n..=max_n);
    let edges: Vec<(usize, usize)> =
        (0..n).flat_map(|u| (u + 1..n).map(move |v| (u, v))).filter(|_| rng.gen_bool(p)).collect();
    Graph::new(n, edges).unwrap()
}

/// A random vertex separation: each vertex goes left, right or into the
/// separator, and edges across are repaired by moving an end into the separator.
pub fn random_vertex_separation(rng: &mut ChaCha8Rng, g: &Graph) -> SetSep {
    let (mut a, mut b) = (0, 0);
    for v in 0..g.vertex_count() {
        match rng.gen_range(0..3) {
            0 => a |= bits::bit(v),
            1 => b |= bits::bit(v),
            _ => {
                a |= bits::bit(v);
                b |= bits::bit(v);
            }
        }
    }
    for &(u, v) in g.edges() {
        let crosses = |x: usize, y: usize, a: Bits, b: Bits| {
            bits::contains(a & !b, x) && bits::contains(b & !a, y)
        };
        if crosses(u, v, a, b) || crosses(v, u, a, b) {
            let w = if rng.gen_bool(0.5) { u } else { v };
            a |= bits::bit(w);
            b |= bits::bit(w);
        }
    }
    SetSep::new(a, b)
}

pub fn random_bipartition(rng: &mut ChaCha8Rng, n: usize) -> SetSep {
    let a = rng.gen::<u64>() & bits::full(n);
    SetSep::new(a, bits::full(n) & !a)
}

pub fn random_matroid(rng: &mut ChaCha8Rng) -> Matroid {
    if rng.gen_bool(0.5) {
        loop {
            let g = random_graph(rng, 3, 6, 0.5);
            if g.edge_count() >= 1 && g.edge_count() <= 9 {
                return Matroid::graphic(g).unwrap();
            }
        }
    }
    let rows = rng.gen_range(1..=4);
    let cols = rng.gen_range(1..=8);
    let columns = (0..cols).map(|_| rng.gen::<u64>() & bits::full(rows)).collect();
    Matroid::linear_gf2(rows, columns).unwrap()
}

/// A random universe together with a random element of it.
pub fn random_universe(rng: &mut ChaCha8Rng) -> Universe {
    let g = random_graph(rng, 2, 7, 0.4);
    match rng.gen_range(0..4) {
        0 => Universe::vertex_separations(g).unwrap(),
        1 => Universe::carving(g).unwrap(),
        2 => Universe::cut_rank(g).unwrap(),
        _ => Universe::matroid(random_matroid(rng)).unwrap(),
    }
}

pub fn random_element(rng: &mut ChaCha8Rng, u: &Universe) -> SetSep {
    match u.graph() {
        Some(g) if !u.is_bipartition() => random_vertex_separation(rng, g),
        _ => random_bipartition(rng, u.ground_size()),
    }
}

// ---------------------------------------------------------------- properties

/// `r <= s` iff `s* <= r*`, on pairs that are often comparable.
pub fn order_reversal(rng: &mut ChaCha8Rng) -> Check {
    let u = random_universe(rng);
    let s = random_element(rng, &u);
    let t = random_element(rng, &u);
    for r in [t, u.meet(s, t), u.join(s, t)] {
        for (x, y) in [(r, s), (s, r)] {
            if x.leq(y) != y.inverse().leq(x.inverse()) {
                return Err(format!("order reversal fails for {x} and {y}"));
            }
        }
    }
    Ok(())
}

/// `(r ∨ s)* = r* ∧ s*` and the dual law, with both sides in the universe.
pub fn de_morgan(rng: &mut ChaCha8Rng) -> Check {
    let u = random_universe(rng);
    let r = random_element(rng, &u);
    let s = random_element(rng, &u);
    let join = u.join(r, s);
    let meet = u.meet(r, s);
    if join.inverse() != u.meet(r.inverse(), s.inverse()) || meet.inverse() != u.join(r.inverse(), s.inverse()) {
        return Err(format!("De Morgan fails for {r}, {s}"));
    }
    if !u.contains(join) || !u.contains(meet) {
        return Err(format!("{r} and {s} have a join or meet outside the universe"));
    }
    if !(r.leq(join) && s.leq(join) && meet.leq(r) && meet.leq(s)) {
        return Err(format!("join/meet of {r}, {s} are not bounds"));
    }
    Ok(())
}

/// `ord(r) = ord(r*)` and `ord(r∨s) + ord(r∧s) <= ord(r) + ord(s)`.
pub fn order_function(rng: &mut ChaCha8Rng) -> Check {
    let u = random_universe(rng);
    let r = random_element(rng, &u);
    let s = random_element(rng, &u);
    if u.order(r) != u.order(r.inverse()) {
        return Err(format!("{} order of {r} is not symmetric", u.order_function().kind()));
    }
    let lhs = u.order(u.join(r, s)) + u.order(u.meet(r, s));
    let rhs = u.order(r) + u.order(s);
    if lhs > rhs {
        return Err(format!("{} order not submodular on {r}, {s}: {lhs} > {rhs}", u.order_function().kind()));
    }
    Ok(())
}

/// The shift at `r` towards `s0 >= r` preserves `<=` away from `r*`.
pub fn shifting_preserves_order(rng: &mut ChaCha8Rng) -> Check {
    let g = random_graph(rng, 2, 7, 0.4);
    let u = Universe::vertex_separations(g).unwrap();
    let r = random_element(rng, &u);
    let s0 = u.join(r, random_element(rng, &u));
    let in_domain = |s: SetSep| s != r.inverse() && (r.leq(s) || r.leq(s.inverse()));
    // s1 anywhere in the domain, s2 above it
    let base = random_element(rng, &u);
    let s1 = if rng.gen_bool(0.5) { u.join(r, base) } else { u.meet(r.inverse(), base) };
    let s2 = u.join(s1, random_element(rng, &u));
    let s2 = if in_domain(s2) { s2 } else { s1 };
    if !in_domain(s1) {
        return Ok(());
    }
    let f1 = shift_map(r, s0, s1).map_err(|e| e.to_string())?;
    let f2 = shift_map(r, s0, s2).map_err(|e| e.to_string())?;
    if !f1.leq(f2) {
        return Err(format!("shift at {r} to {s0} maps {s1} <= {s2} to {f1}, {f2}"));
    }
    Ok(())
}

fn distances(tree: &STree) -> BTreeMap<(usize, usize), usize> {
    let mut out = BTreeMap::new();
    for start in tree.nodes() {
        let mut queue = VecDeque::from([(start, 0)]);
        out.insert((start, start), 0);
        while let Some((x, d)) = queue.pop_front() {
            for y in tree.neighbours(x) {
                if let std::collections::btree_map::Entry::Vacant(e) = out.entry((start, y)) {
                    e.insert(d + 1);
                    queue.push_back((y, d + 1));
                }
            }
        }
    }
    out
}

/// On an irredundant tree, `(x,y) <= (u,v)` in the natural order of oriented
/// edges implies `α(x,y) <= α(u,v)`.
pub fn labels_follow_natural_order(tree: &STree) -> Check {
    let d = distances(tree);
    let edges: Vec<(usize, usize, SetSep)> = tree.oriented_edges().collect();
    for &(x, y, a) in &edges {
        for &(u, v, b) in &edges {
            let below = (x, y) == (u, v) || d[&(x, v)] == d[&(y, u)] + 2;
            if below && !a.leq(b) {
                return Err(format!("({x},{y}) <= ({u},{v}) but {a} is not <= {b}"));
            }
        }
    }
    Ok(())
}

const ENGINE_MODES: [Mode; 7] =
    [Mode::Tree, Mode::Path, Mode::Branch, Mode::Adhesion, Mode::Carving, Mode::Rank, Mode::MatroidTree];

/// A random engine-produced tree (pruned to irredundant), with its problem.
pub fn random_engine_tree(rng: &mut ChaCha8Rng) -> Option<(Problem, STree)> {
    let g = random_graph(rng, 2, 6, 0.45);
    let mode = ENGINE_MODES[rng.gen_range(0..ENGINE_MODES.len())];
    if mode == Mode::MatroidTree && (g.edge_count() == 0 || g.edge_count() > 9) {
        return None;
    }
    let k = rng.gen_range(1..=g.vertex_count() + 1);
    let w = (mode == Mode::Adhesion).then(|| k + rng.gen_range(0..=2));
    let p = Problem::build(&Instance::Graph(g), mode, k, w, None).ok()?;
    match p.solve().ok()? {
        DualityWitness::Tree(t) => {
            let start = t.nodes().next().unwrap();
            let t = if t.is_irredundant() { t } else { t.prune(start).ok()? };
            Some((p, t))
        }
        DualityWitness::Tangle(_) => None,
    }
}

pub fn engine_tree_order(rng: &mut ChaCha8Rng) -> Check {
    for _ in 0..50 {
        if let Some((p, t)) = random_engine_tree(rng) {
            return labels_follow_natural_order(&t).map_err(|e| format!("{} k={}: {e}", p.mode, p.k));
        }
    }
    Err("no engine tree produced in 50 attempts".into())
}

/// Every consistent orientation avoiding the star family avoids the full
/// covering family. Returns how many orientations were checked.
pub fn stars_suffice(g: &Graph, k: usize) -> Result<usize, String> {
    let p = Problem::build(&Instance::Graph(g.clone()), Mode::Branch, k, None, None).map_err(|e| e.to_string())?;
    let stars = Oracle::for_problem(&p).map_err(|e| e.to_string())?;
    let full = stars.clone().classical();
    let tangles = find_tangles(&stars, &p.system, 10_000);
    for o in &tangles {
        if !full.avoids(&o.payloads(&p.system)) {
            return Err(format!("{g:?} k={k}: an orientation avoiding the stars contains a covering triple"));
        }
    }
    Ok(tangles.len())
}

/// `λ(A_i) <= Σ r(B_j) − (|σ|−1)·r(M)` for a random star of bipartitions,
/// and members of the family lie in `S_k`.
pub fn matroid_star_bound(rng: &mut ChaCha8Rng) -> Check {
    let m = random_matroid(rng);
    let n = m.ground_size();
    // disjoint small sides give a star
    let parts = rng.gen_range(1..=4);
    let mut sides = vec![0u64; parts];
    for e in 0..n {
        let slot = rng.gen_range(0..=parts);
        if slot < parts {
            sides[slot] |= bits::bit(e);
        }
    }
    let star: Vec<SetSep> = sides.iter().map(|&a| SetSep::new(a, m.ground() & !a)).collect();
    check_matroid_star(&m, &star)
}

pub fn check_matroid_star(m: &Matroid, star: &[SetSep]) -> Check {
    let value: i64 = star.iter().map(|s| m.rank(s.b) as i64).sum::<i64>() - (star.len() as i64 - 1) * m.full_rank() as i64;
    for s in star {
        if m.lambda(s.a) as i64 > value {
            return Err(format!("λ({}) = {} exceeds the star order {value}", bits::fmt_set(s.a), m.lambda(s.a)));
        }
    }
    Ok(())
}

/// The bound on every node star of a random engine-produced matroid tree.
pub fn engine_matroid_stars(rng: &mut ChaCha8Rng) -> Check {
    for _ in 0..50 {
        let m = random_matroid(rng);
        let k = rng.gen_range(1..=m.full_rank() + 1);
        let Ok(p) = Problem::build(&Instance::Matroid(m.clone()), Mode::MatroidTree, k, None, None) else { continue };
        let Ok(DualityWitness::Tree(t)) = p.solve() else { continue };
        for node in t.nodes() {
            let star: Vec<SetSep> = t.oriented_star_at(node);
            check_matroid_star(&m, &star)?;
            if star.iter().any(|s| !p.system.contains(s)) {
                return Err("a node star leaves S_k".into());
            }
        }
        return Ok(());
    }
    Err("no matroid tree produced in 50 attempts".into())
}
