//! Star families for each width parameter.
//!
//! Membership is a predicate on a candidate set; nothing is materialised.
//! `find_within` searches an orientation for a forbidden member and is the
//! only place the families are enumerated.

use std::collections::HashSet;

use fixedbitset::FixedBitSet;
use serde::{Deserialize, Serialize};

use crate::bits::{self, Bits};
use crate::duality::StarFamily;
use crate::error::{usage, Error, Result};
use crate::separation::{payloads_form_star, SetSep};
use crate::universe::{Matroid, Universe};

fn in_sk(universe: &Universe, k: usize, s: SetSep) -> bool {
    universe.contains(s) && universe.order(s) < k
}

fn sorted_unique(star: &[SetSep]) -> bool {
    star.windows(2).all(|w| w[0] < w[1])
}

/// Pairwise "points towards each other" relation on a pool.
fn compatibility(pool: &[SetSep]) -> Vec<FixedBitSet> {
    let n = pool.len();
    let mut compat = vec![FixedBitSet::with_capacity(n); n];
    for i in 0..n {
        for j in i + 1..n {
            let (a, b) = (pool[i], pool[j]);
            if a.leq(b.inverse()) && b.leq(a.inverse()) {
                compat[i].insert(j);
                compat[j].insert(i);
            }
        }
    }
    compat
}

/// Tangle families: sets of at most three elements of `S_k` whose small
/// sides cover the graph (every vertex and edge inside some `G[A_i]`), or
/// cover the ground set in the bipartition setting.
#[derive(Clone, Debug)]
pub struct TangleFamily {
    universe: Universe,
    k: usize,
    stars_only: bool,
}

impl TangleFamily {
    pub fn new(universe: Universe, k: usize, stars_only: bool) -> Result<Self> {
        if k == 0 {
            return usage("k must be a positive integer");
        }
        Ok(TangleFamily { universe, k, stars_only })
    }

    fn covers(&self, sides: &[Bits]) -> bool {
        match (self.universe.is_bipartition(), self.universe.graph()) {
            (false, Some(g)) => {
                let vertices = sides.iter().fold(0, |acc, &a| acc | a);
                vertices == g.vertices()
                    && g.edges().iter().all(|&(u, v)| {
                        sides.iter().any(|&a| bits::contains(a, u) && bits::contains(a, v))
                    })
            }
            _ => sides.iter().fold(0, |acc, &a| acc | a) == self.universe.ground(),
        }
    }

    /// In the bipartition setting the leaves of a decomposition are single
    /// elements, so `{(E∖{e}, {e})}` is forbidden as well.
    fn is_leaf_singleton(&self, s: SetSep) -> bool {
        self.universe.is_bipartition() && bits::len(s.b) == 1
    }
}

impl StarFamily for TangleFamily {
    fn name(&self) -> String {
        format!("tangle{}(k={})", if self.stars_only { "*" } else { "" }, self.k)
    }

    fn contains(&self, star: &[SetSep]) -> bool {
        if star.is_empty() || star.len() > 3 || !sorted_unique(star) {
            return false;
        }
        if !star.iter().all(|&s| in_sk(&self.universe, self.k, s)) {
            return false;
        }
        if self.stars_only && !payloads_form_star(star) {
            return false;
        }
        let sides: Vec<Bits> = star.iter().map(|s| s.a).collect();
        self.covers(&sides) || (star.len() == 1 && self.is_leaf_singleton(star[0]))
    }

    fn find_within(&self, pool: &[SetSep]) -> Option<Vec<SetSep>> {
        let mut pool: Vec<SetSep> = pool.iter().copied().filter(|&s| in_sk(&self.universe, self.k, s)).collect();
        pool.sort();
        pool.dedup();
        let n = pool.len();
        for i in 0..n {
            if self.contains(&pool[i..=i]) {
                return Some(vec![pool[i]]);
            }
        }
        let compat = if self.stars_only { Some(compatibility(&pool)) } else { None };
        let ok = |i: usize, j: usize| compat.as_ref().is_none_or(|c| c[i].contains(j));
        for i in 0..n {
            for j in i + 1..n {
                if !ok(i, j) {
                    continue;
                }
                if self.covers(&[pool[i].a, pool[j].a]) {
                    return Some(vec![pool[i], pool[j]]);
                }
                for l in j + 1..n {
                    if ok(i, l) && ok(j, l) && self.covers(&[pool[i].a, pool[j].a, pool[l].a]) {
                        return Some(vec![pool[i], pool[j], pool[l]]);
                    }
                }
            }
        }
        None
    }
}

/// Stars `σ ⊆ S_k` with `|⋂ B_i| < w`, optionally of bounded size.
/// With `w = k` this is the tree-width family; size bound 2 gives path-width.
#[derive(Clone, Debug)]
pub struct BagFamily {
    universe: Universe,
    k: usize,
    w: usize,
    max_size: Option<usize>,
}

impl BagFamily {
    pub fn new(universe: Universe, k: usize, w: usize, max_size: Option<usize>) -> Result<Self> {
        if k == 0 {
            return usage("k must be a positive integer");
        }
        if w < k {
            return usage(format!("the bag bound w={w} must be at least k={k}"));
        }
        if universe.is_bipartition() {
            return usage("bag families live on vertex separations");
        }
        Ok(BagFamily { universe, k, w, max_size })
    }

    pub fn treewidth(universe: Universe, k: usize) -> Result<Self> {
        BagFamily::new(universe, k, k, None)
    }

    pub fn pathwidth(universe: Universe, k: usize) -> Result<Self> {
        BagFamily::new(universe, k, k, Some(2))
    }

    pub fn adhesion(universe: Universe, k: usize, w: usize) -> Result<Self> {
        BagFamily::new(universe, k, w, None)
    }

    pub fn w(&self) -> usize {
        self.w
    }
}

impl StarFamily for BagFamily {
    fn name(&self) -> String {
        match self.max_size {
            Some(m) => format!("bags(k={},w={},size<={m})", self.k, self.w),
            None => format!("bags(k={},w={})", self.k, self.w),
        }
    }

    fn contains(&self, star: &[SetSep]) -> bool {
        if star.is_empty() || !sorted_unique(star) || self.max_size.is_some_and(|m| star.len() > m) {
            return false;
        }
        star.iter().all(|&s| in_sk(&self.universe, self.k, s))
            && payloads_form_star(star)
            && bits::len(star.iter().fold(self.universe.ground(), |acc, s| acc & s.b)) < self.w
    }

    fn find_within(&self, pool: &[SetSep]) -> Option<Vec<SetSep>> {
        let mut pool: Vec<SetSep> = pool.iter().copied().filter(|&s| in_sk(&self.universe, self.k, s)).collect();
        pool.sort();
        pool.dedup();
        let w = self.w;
        let cost = |acc: &Bits, s: SetSep| acc & s.b;
        let size = |acc: &Bits| bits::len(*acc);
        monotone_star_search(&pool, self.universe.ground(), cost, |acc| size(acc) < w, |acc, rest| {
            size(&rest.iter().fold(*acc, |a, s| a & s.b)) >= w
        }, self.max_size)
    }
}

/// Depth-first search for a star in `pool` whose accumulated value, folded
/// with `step` from `start`, satisfies `goal`. `hopeless(acc, rest)` prunes
/// when even adding every remaining candidate cannot reach the goal. The
/// fold must be monotone: adding elements never moves away from the goal.
fn monotone_star_search<A: Copy + PartialEq>(
    pool: &[SetSep],
    start: A,
    step: impl Fn(&A, SetSep) -> A,
    goal: impl Fn(&A) -> bool,
    hopeless: impl Fn(&A, &[SetSep]) -> bool,
    max_size: Option<usize>,
) -> Option<Vec<SetSep>> {
    let compat = compatibility(pool);
    let mut all = FixedBitSet::with_capacity(pool.len());
    all.insert_range(..);
    let mut chosen = Vec::new();
    struct Ctx<'a, A, S, G, H> {
        pool: &'a [SetSep],
        compat: &'a [FixedBitSet],
        step: S,
        goal: G,
        hopeless: H,
        max_size: usize,
        _a: std::marker::PhantomData<A>,
    }
    fn go<A: Copy + PartialEq, S, G, H>(
        ctx: &Ctx<A, S, G, H>,
        acc: A,
        cand: &FixedBitSet,
        chosen: &mut Vec<usize>,
    ) -> bool
    where
        S: Fn(&A, SetSep) -> A,
        G: Fn(&A) -> bool,
        H: Fn(&A, &[SetSep]) -> bool,
    {
        for c in cand.ones() {
            let next = (ctx.step)(&acc, ctx.pool[c]);
            if !chosen.is_empty() && next == acc {
                continue;
            }
            chosen.push(c);
            if (ctx.goal)(&next) {
                return true;
            }
            if chosen.len() < ctx.max_size {
                let mut rest = cand.clone();
                rest.intersect_with(&ctx.compat[c]);
                rest.set_range(..c + 1, false);
                let rest_items: Vec<SetSep> = rest.ones().map(|i| ctx.pool[i]).collect();
                if !rest_items.is_empty() && !(ctx.hopeless)(&next, &rest_items) && go(ctx, next, &rest, chosen) {
                    return true;
                }
            }
            chosen.pop();
        }
        false
    }
    let ctx = Ctx {
        pool,
        compat: &compat,
        step,
        goal,
        hopeless,
        max_size: max_size.unwrap_or(usize::MAX),
        _a: std::marker::PhantomData,
    };
    if go(&ctx, start, &all, &mut chosen) {
        let mut out: Vec<SetSep> = chosen.iter().map(|&i| pool[i]).collect();
        out.sort();
        Some(out)
    } else {
        None
    }
}

/// Matroid tree-width family: stars `σ` of bipartitions with
/// `Σ r(B_i) − (|σ|−1)·r(M) < k`.
#[derive(Clone, Debug)]
pub struct MatroidFamily {
    universe: Universe,
    matroid: Matroid,
    k: usize,
}

impl MatroidFamily {
    pub fn new(universe: Universe, k: usize) -> Result<Self> {
        if k == 0 {
            return usage("k must be a positive integer");
        }
        let matroid = universe
            .matroid_ref()
            .cloned()
            .ok_or_else(|| Error::Usage("the matroid family needs a matroid universe".into()))?;
        Ok(MatroidFamily { universe, matroid, k })
    }

    /// `Σ r(B_i) − (|σ|−1)·r(M)`.
    pub fn star_order(&self, star: &[SetSep]) -> i64 {
        let rm = self.matroid.full_rank() as i64;
        star.iter().map(|s| self.matroid.rank(s.b) as i64).sum::<i64>() - (star.len() as i64 - 1) * rm
    }

    /// Checks `λ(A_i) <= ⟨σ⟩` for every member of a star.
    pub fn lambda_bound_holds(&self, star: &[SetSep]) -> bool {
        let value = self.star_order(star);
        star.iter().all(|s| (self.matroid.lambda(s.a) as i64) <= value)
    }
}

impl StarFamily for MatroidFamily {
    fn name(&self) -> String {
        format!("matroid(k={})", self.k)
    }

    fn contains(&self, star: &[SetSep]) -> bool {
        if star.is_empty() || !sorted_unique(star) {
            return false;
        }
        if !star.iter().all(|&s| self.universe.contains(s)) || !payloads_form_star(star) {
            return false;
        }
        let member = self.star_order(star) < self.k as i64;
        if member {
            assert!(
                self.lambda_bound_holds(star),
                "matroid star with order below k has a member of connectivity at least k"
            );
        }
        member
    }

    fn find_within(&self, pool: &[SetSep]) -> Option<Vec<SetSep>> {
        let mut pool: Vec<SetSep> = pool.iter().copied().filter(|&s| self.universe.contains(s)).collect();
        pool.sort();
        pool.dedup();
        let rm = self.matroid.full_rank() as i64;
        let k = self.k as i64;
        let m = &self.matroid;
        // accumulator: (value so far, started?)
        monotone_star_search(
            &pool,
            (0i64, false),
            |&(v, started), s| {
                let r = m.rank(s.b) as i64;
                if started { (v + r - rm, true) } else { (r, true) }
            },
            |&(v, started)| started && v < k,
            |&(v, _), rest| v + rest.iter().map(|s| m.rank(s.b) as i64 - rm).sum::<i64>() >= k,
            None,
        )
    }
}

/// A family listed explicitly.
#[derive(Clone, Debug, Default)]
pub struct ExplicitFamily {
    label: String,
    members: HashSet<Vec<SetSep>>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FamilyJson {
    #[serde(default)]
    pub name: Option<String>,
    pub stars: Vec<Vec<SetSep>>,
}

impl ExplicitFamily {
    pub fn new(label: impl Into<String>, stars: impl IntoIterator<Item = Vec<SetSep>>) -> Result<Self> {
        let mut members = HashSet::new();
        for mut star in stars {
            star.sort();
            star.dedup();
            if !payloads_form_star(&star) {
                let items: Vec<String> = star.iter().map(|s| s.to_string()).collect();
                return Err(Error::Input(format!("{{{}}} is not a star", items.join(", "))));
            }
            members.insert(star);
        }
        Ok(ExplicitFamily { label: label.into(), members })
    }

    pub fn from_json_str(text: &str) -> Result<Self> {
        let parsed: FamilyJson = serde_json::from_str(text).map_err(|e| Error::Input(format!("family JSON: {e}")))?;
        ExplicitFamily::new(parsed.name.unwrap_or_else(|| "custom".into()), parsed.stars)
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    /// The listed stars, sorted.
    pub fn members(&self) -> Vec<Vec<SetSep>> {
        let mut out: Vec<Vec<SetSep>> = self.members.iter().cloned().collect();
        out.sort();
        out
    }
}

impl StarFamily for ExplicitFamily {
    fn name(&self) -> String {
        self.label.clone()
    }

    fn contains(&self, star: &[SetSep]) -> bool {
        self.members.contains(star)
    }

    fn find_within(&self, pool: &[SetSep]) -> Option<Vec<SetSep>> {
        let set: HashSet<SetSep> = pool.iter().copied().collect();
        let mut hits: Vec<&Vec<SetSep>> = self.members.iter().filter(|m| m.iter().all(|s| set.contains(s))).collect();
        hits.sort();
        hits.first().map(|m| (*m).clone())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::universe::Graph;

    fn sep(a: &[usize], b: &[usize]) -> SetSep {
        SetSep::from_sides(a, b)
    }

    #[test]
    fn bag_family_examples() {
        let u = Universe::vertex_separations(Graph::path(3)).unwrap();
        let f = BagFamily::treewidth(u.clone(), 2).unwrap();
        let mut star = vec![sep(&[0, 1], &[1, 2]), sep(&[1, 2], &[0, 1])];
        star.sort();
        assert!(f.contains(&star));
        // singleton {(A,B)} is in F_k iff |B| < k
        assert!(f.contains(&[sep(&[0, 1, 2], &[1])]));
        assert!(!f.contains(&[sep(&[0, 1], &[1, 2])]));
        assert!(BagFamily::adhesion(u, 3, 2).is_err());
    }

    #[test]
    fn path_family_drops_three_stars() {
        let u = Universe::vertex_separations(Graph::star(3)).unwrap();
        let tw = BagFamily::treewidth(u.clone(), 2).unwrap();
        let pw = BagFamily::pathwidth(u, 2).unwrap();
        let mut three = vec![sep(&[0, 1], &[0, 2, 3]), sep(&[0, 2], &[0, 1, 3]), sep(&[0, 3], &[0, 1, 2])];
        three.sort();
        assert!(tw.contains(&three));
        assert!(!pw.contains(&three));
        assert!(pw.contains(&three[..2]) == tw.contains(&three[..2]));
    }

    #[test]
    fn k2_path_family_two_stars() {
        let u = Universe::vertex_separations(Graph::complete(2)).unwrap();
        let pw = BagFamily::pathwidth(u, 2).unwrap();
        let mut pair = vec![sep(&[0], &[0, 1]), sep(&[1], &[0, 1])];
        pair.sort();
        // B-sides are both V, so the intersection has 2 elements
        assert!(!pw.contains(&pair));
        let mut split = vec![sep(&[0, 1], &[1]), sep(&[1], &[0, 1])];
        split.sort();
        assert!(pw.contains(&split));
    }

    #[test]
    fn tangle_family_forces_small() {
        let g = Graph::path(3);
        let u = Universe::vertex_separations(g).unwrap();
        let f = TangleFamily::new(u, 2, true).unwrap();
        assert!(f.contains(&[sep(&[0, 1, 2], &[0])]));
        assert!(!f.contains(&[sep(&[0, 1], &[1, 2])]));
        let mut pair = vec![sep(&[0, 1], &[1, 2]), sep(&[1, 2], &[0, 1])];
        pair.sort();
        assert!(f.contains(&pair));
    }

    #[test]
    fn matroid_family_examples() {
        let m = Matroid::graphic(Graph::complete(3)).unwrap();
        let u = Universe::matroid(m).unwrap();
        let f1 = MatroidFamily::new(u.clone(), 1).unwrap();
        let mut whole = vec![sep(&[], &[0, 1, 2]), sep(&[0, 1, 2], &[])];
        whole.sort();
        assert_eq!(f1.star_order(&whole), 0);
        assert!(f1.contains(&whole));
        let mut two = vec![sep(&[0], &[1, 2]), sep(&[1], &[0, 2])];
        two.sort();
        let f3 = MatroidFamily::new(u.clone(), 3).unwrap();
        let f2 = MatroidFamily::new(u, 2).unwrap();
        assert_eq!(f3.star_order(&two), 2);
        assert!(f3.contains(&two));
        assert!(!f2.contains(&two));
        // singleton {(A,B)} is a member iff r(B) < k
        assert!(f3.contains(&[sep(&[0], &[1, 2])]));
        assert!(!f2.contains(&[sep(&[0], &[1, 2])]));
    }

    #[test]
    fn find_within_agrees_with_membership() {
        let g = Graph::cycle(4);
        let u = Universe::vertex_separations(g).unwrap();
        let sys = u.system_below(3).unwrap();
        let f = BagFamily::treewidth(u, 3).unwrap();
        let small: Vec<SetSep> = sys.elements().iter().copied().filter(|s| s.is_small()).collect();
        // every small separation has B = V
        assert!(f.find_within(&small).is_none());
        let big: Vec<SetSep> = small.iter().map(|s| s.inverse()).collect();
        let hit = f.find_within(&big).expect("a co-small separation with |B| < 3 exists");
        assert!(f.contains(&hit));
    }

    #[test]
    fn explicit_family_json() {
        let text = r#"{"stars": [[{"A":[0],"B":[0,1]}], [{"A":[1],"B":[0,1]},{"A":[0],"B":[0,1]}]]}"#;
        let f = ExplicitFamily::from_json_str(text).unwrap();
        assert_eq!(f.len(), 2);
        assert!(f.contains(&[sep(&[0], &[0, 1])]));
        assert!(f.find_within(&[sep(&[1], &[0, 1]), sep(&[0], &[0, 1])]).is_some());
        let bad = r#"{"stars": [[{"A":[0],"B":[1]},{"A":[0],"B":[1]}], [{"A":[0,1],"B":[1]},{"A":[0,1],"B":[0]}]]}"#;
        assert!(ExplicitFamily::from_json_str(bad).is_err());
    }
}
