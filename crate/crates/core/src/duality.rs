//! Weak and strong duality: for a standard family `F` of stars, build either
//! an S-tree over `F` or an orientation avoiding `F` (consistent, for the
//! strong version).

use fixedbitset::FixedBitSet;
use serde::{Deserialize, Serialize};

use crate::error::{usage, Error, Result};
use crate::separation::{Orientation, SepId, SeparationSystem, SetSep};
use crate::stree::{Node, STree, ValidationReport};
use crate::universe::Universe;

/// A family `F` of stars of oriented separations, given by a membership
/// predicate. Stars are passed as sorted, deduplicated payload slices.
pub trait StarFamily: Sync {
    fn name(&self) -> String;

    fn contains(&self, star: &[SetSep]) -> bool;

    /// Some member of `F` contained in `pool`, if there is one.
    fn find_within(&self, pool: &[SetSep]) -> Option<Vec<SetSep>>;
}

/// `F` together with extra singleton members `{s*}`, one per forced `s`.
pub struct Extended<'a> {
    pub base: &'a dyn StarFamily,
    pub forced_extra: Vec<SetSep>,
}

impl StarFamily for Extended<'_> {
    fn name(&self) -> String {
        format!("{} + {} singletons", self.base.name(), self.forced_extra.len())
    }

    fn contains(&self, star: &[SetSep]) -> bool {
        (star.len() == 1 && self.forced_extra.contains(&star[0].inverse())) || self.base.contains(star)
    }

    fn find_within(&self, pool: &[SetSep]) -> Option<Vec<SetSep>> {
        for &s in &self.forced_extra {
            if pool.contains(&s.inverse()) {
                return Some(vec![s.inverse()]);
            }
        }
        self.base.find_within(pool)
    }
}

/// True if no member of `F` is a subset of `pool`.
pub fn is_avoided(pool: &[SetSep], family: &dyn StarFamily) -> bool {
    family.find_within(pool).is_none()
}

/// Ids of `s` with `{s*} ∈ F`.
pub fn compute_forced(system: &SeparationSystem, family: &dyn StarFamily) -> Vec<SepId> {
    system.ids().filter(|&s| family.contains(&[system.get(system.inverse(s))])).collect()
}

/// `F` forces `r` if `{r*} ∈ F` or `r` is degenerate.
pub fn forces(system: &SeparationSystem, family: &dyn StarFamily, r: SepId) -> bool {
    system.is_degenerate(r) || family.contains(&[system.get(system.inverse(r))])
}

/// First trivial separation not forced by `F`, if any.
pub fn unforced_trivial(system: &SeparationSystem, family: &dyn StarFamily) -> Option<SepId> {
    system.ids().find(|&r| system.is_trivial(r) && !forces(system, family, r))
}

pub fn is_standard(system: &SeparationSystem, family: &dyn StarFamily) -> bool {
    unforced_trivial(system, family).is_none()
}

/// The shifting map `f↓(r)(s0)` applied to `s`. Defined when `s` or `s*`
/// lies above `r`.
pub fn shift_map(r: SetSep, s0: SetSep, s: SetSep) -> Result<SetSep> {
    if !r.leq(s0) {
        return usage(format!("{r} is not below {s0}"));
    }
    if s == r {
        Ok(s0)
    } else if s == r.inverse() {
        Ok(s0.inverse())
    } else if r.leq(s) {
        Ok(s.join(s0))
    } else if r.leq(s.inverse()) {
        Ok(s.inverse().join(s0).inverse())
    } else {
        usage(format!("{s} is outside the domain of the shift at {r}"))
    }
}

/// `s0` is linked to `r`: `r <= s0` and `s ∨ s0 ∈ S` for every `s >= r` in `S` other than `r*`.
pub fn is_linked(s0: SetSep, r: SetSep, system: &SeparationSystem) -> bool {
    r.leq(s0)
        && system
            .elements()
            .iter()
            .filter(|&&s| r.leq(s) && s != r.inverse())
            .all(|&s| system.contains(&s.join(s0)))
}

/// A minimum-order `s0` with `r <= s0 <= r2`, which must lie in `system`.
pub fn find_link(r: SetSep, r2: SetSep, system: &SeparationSystem, universe: &Universe) -> Result<SetSep> {
    if !r.leq(r2) {
        return usage(format!("{r} is not below {r2}"));
    }
    let s0 = universe
        .min_order_between(r, r2)
        .ok_or_else(|| Error::Internal(format!("no separation between {r} and {r2}")))?;
    if !system.contains(&s0) {
        return Err(Error::Internal(format!(
            "minimum-order separation {s0} between {r} and {r2} is not in the system; is the order function submodular?"
        )));
    }
    Ok(s0)
}

/// Shifts the labels of `tree` by `f↓(r)(s0)`, where `r` is the label of
/// the edge leaving leaf `x`. Every node other than `x` must keep a star
/// accepted by `family`.
pub fn shift_stree(
    tree: &STree,
    x: Node,
    s0: SetSep,
    system: &SeparationSystem,
    family: &dyn StarFamily,
) -> Result<STree> {
    if !tree.is_leaf(x) {
        return usage(format!("node {x} is not a leaf"));
    }
    let y = tree.neighbours(x).next().expect("leaf has a neighbour");
    let r = tree.alpha(x, y).expect("leaf edge");
    let rid = system.id_of(&r).ok_or_else(|| Error::Usage(format!("{r} is not in the system")))?;
    if system.is_degenerate(rid) || system.is_trivial(rid) {
        return usage(format!("leaf label {r} must be nontrivial and nondegenerate"));
    }
    if tree.oriented_edges().any(|(a, b, s)| s == r && (a, b) != (x, y)) {
        return usage(format!("label {r} occurs on more than the leaf edge"));
    }
    if !r.leq(s0) {
        return usage(format!("{s0} is not above the leaf label {r}"));
    }
    let shifted = tree.map_labels(|s| {
        let image = shift_map(r, s0, s)?;
        if system.contains(&image) {
            Ok(image)
        } else {
            Err(Error::Internal(format!("{s0} is not linked to {r}: the shift of {s} is {image}, outside S")))
        }
    })?;
    for t in shifted.nodes() {
        if t == x {
            continue;
        }
        let star = shifted.oriented_star_at(t);
        if !family.contains(&star) {
            let items: Vec<String> = star.iter().map(|s| s.to_string()).collect();
            return Err(Error::Internal(format!(
                "family {} is not closed under shifting: node {t} received {{{}}}",
                family.name(),
                items.join(", ")
            )));
        }
    }
    Ok(shifted)
}

/// The outcome of a duality computation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum DualityWitness {
    Tree(STree),
    /// An orientation avoiding `F`; consistent when produced by [`strong_duality`].
    Tangle(Orientation),
}

impl DualityWitness {
    pub fn side(&self) -> &'static str {
        match self {
            DualityWitness::Tree(_) => "tree",
            DualityWitness::Tangle(_) => "tangle",
        }
    }

    pub fn is_tangle(&self) -> bool {
        matches!(self, DualityWitness::Tangle(_))
    }
}

/// Checks a tree: labels in `S`, every associated set in `F`.
pub fn validate_tree(tree: &STree, system: &SeparationSystem, family: &dyn StarFamily) -> ValidationReport {
    tree.validate_over(system, &|star: &[SetSep]| family.contains(star))
}

/// Reasons an orientation fails to be an `F`-tangle.
pub fn tangle_violation(o: &Orientation, system: &SeparationSystem, family: &dyn StarFamily) -> Option<String> {
    if let Some((r, s)) = system.inconsistent_pair(o.ids()) {
        return Some(format!("inconsistent: contains {} and {}", system.display(r), system.display(s)));
    }
    let pool = o.payloads(system);
    family.find_within(&pool).map(|sigma| {
        let items: Vec<String> = sigma.iter().map(|s| s.to_string()).collect();
        format!("contains the forbidden star {{{}}}", items.join(", "))
    })
}

/// Like [`tangle_violation`] but without the consistency requirement.
pub fn avoidance_violation(o: &Orientation, system: &SeparationSystem, family: &dyn StarFamily) -> Option<String> {
    family.find_within(&o.payloads(system)).map(|sigma| {
        let items: Vec<String> = sigma.iter().map(|s| s.to_string()).collect();
        format!("contains the forbidden star {{{}}}", items.join(", "))
    })
}

/// Statistics of one engine run.
#[derive(Clone, Debug, Default, Serialize, Deserialize, PartialEq, Eq)]
pub struct EngineStats {
    pub calls: usize,
    pub memo_hits: usize,
    pub shifts: usize,
    pub merges: usize,
}

enum Outcome {
    Tree(STree),
    Tangle(Vec<SepId>),
}

struct Engine<'a> {
    system: &'a SeparationSystem,
    family: &'a dyn StarFamily,
    universe: Option<&'a Universe>,
    below: Vec<FixedBitSet>,
    base_forced: FixedBitSet,
    degenerate: FixedBitSet,
    memo: Vec<(FixedBitSet, STree)>,
    stats: EngineStats,
}

impl<'a> Engine<'a> {
    fn new(system: &'a SeparationSystem, family: &'a dyn StarFamily, universe: Option<&'a Universe>) -> Self {
        let n = system.len();
        let mut below = vec![FixedBitSet::with_capacity(n); n];
        for (x, row) in below.iter_mut().enumerate() {
            for y in system.ids() {
                if system.leq(y, x) {
                    row.insert(y);
                }
            }
        }
        let mut base_forced = FixedBitSet::with_capacity(n);
        for s in compute_forced(system, family) {
            base_forced.insert(s);
        }
        let mut degenerate = FixedBitSet::with_capacity(n);
        for s in system.ids().filter(|&s| system.is_degenerate(s)) {
            degenerate.insert(s);
        }
        Engine { system, family, universe, below, base_forced, degenerate, memo: Vec::new(), stats: EngineStats::default() }
    }

    fn inv(&self, s: SepId) -> SepId {
        self.system.inverse(s)
    }

    fn get(&self, s: SepId) -> SetSep {
        self.system.get(s)
    }

    fn family_with(&self, added: &FixedBitSet) -> Extended<'a> {
        Extended { base: self.family, forced_extra: added.ones().map(|s| self.system.get(s)).collect() }
    }

    /// Members of `added` whose singleton `{s*}` is used at some node.
    fn required(&self, tree: &STree, added: &FixedBitSet) -> FixedBitSet {
        let mut req = FixedBitSet::with_capacity(self.system.len());
        for t in tree.nodes() {
            let star = tree.oriented_star_at(t);
            if star.len() == 1 {
                if let Some(id) = self.system.id_of(&star[0].inverse()) {
                    if added.contains(id) {
                        req.insert(id);
                    }
                }
            }
        }
        req
    }

    fn remember(&mut self, tree: &STree, added: &FixedBitSet) {
        let req = self.required(tree, added);
        self.memo.push((req, tree.clone()));
    }

    fn recall(&mut self, added: &FixedBitSet) -> Option<STree> {
        let hit = self.memo.iter().find(|(req, _)| req.is_subset(added)).map(|(_, t)| t.clone());
        if hit.is_some() {
            self.stats.memo_hits += 1;
        }
        hit
    }

    fn antisymmetry_failure(&self, forced: &FixedBitSet) -> Option<SepId> {
        forced.ones().find(|&s| forced.contains(self.inv(s)))
    }

    /// Separations (one id each) with neither orientation forced and not degenerate.
    fn unoriented(&self, forced: &FixedBitSet) -> Vec<SepId> {
        self.system
            .ids()
            .filter(|&s| !self.degenerate.contains(s) && !forced.contains(s) && !forced.contains(self.inv(s)))
            .collect()
    }

    /// The induction start: `O⁻ ∪ D` is an orientation of all of `S`.
    fn close(&self, forced: &FixedBitSet, family: &dyn StarFamily) -> Result<Outcome> {
        let mut ids: Vec<SepId> = forced.ones().chain(self.degenerate.ones()).collect();
        ids.sort_unstable();
        ids.dedup();
        let pool: Vec<SetSep> = ids.iter().map(|&s| self.get(s)).collect();
        match family.find_within(&pool) {
            None => Ok(Outcome::Tangle(ids)),
            Some(sigma) => {
                if sigma.len() == 1 {
                    return Err(Error::Internal(format!(
                        "singleton {{{}}} in the family should have been forced",
                        sigma[0]
                    )));
                }
                for &s in &sigma {
                    if s.is_degenerate() && !family.contains(&[s]) {
                        return usage(format!(
                            "family {} contains a star with degenerate {s} but not the singleton {{{s}}}",
                            family.name()
                        ));
                    }
                }
                Ok(Outcome::Tree(STree::star(&sigma)?))
            }
        }
    }

    /// A minimal element of `candidates` that lies below `top`.
    fn minimal_below(&self, top: SepId, candidates: &FixedBitSet) -> SepId {
        let mut set = self.below[top].clone();
        set.intersect_with(candidates);
        let mut cur = top;
        loop {
            let mut lower = self.below[cur].clone();
            lower.intersect_with(&set);
            lower.set(cur, false);
            match lower.ones().next() {
                Some(next) => cur = next,
                None => return cur,
            }
        }
    }

    fn strong(&mut self, added: &FixedBitSet) -> Result<Outcome> {
        self.stats.calls += 1;
        let mut forced = self.base_forced.clone();
        forced.union_with(added);
        if let Some(s) = self.antisymmetry_failure(&forced) {
            return Ok(Outcome::Tree(STree::single_edge(self.get(s))));
        }
        if let Some(tree) = self.recall(added) {
            return Ok(Outcome::Tree(tree));
        }
        let family = self.family_with(added);
        let open = self.unoriented(&forced);
        let Some(&r0) = open.first() else {
            let out = self.close(&forced, &family)?;
            if let Outcome::Tree(t) = &out {
                self.remember(t, added);
            }
            return Ok(out);
        };
        let mut candidates = FixedBitSet::with_capacity(self.system.len());
        candidates.insert_range(..);
        candidates.difference_with(&forced);
        candidates.difference_with(&self.degenerate);
        let r1 = self.minimal_below(r0, &candidates);
        let r2_inv = self.minimal_below(self.inv(r0), &candidates);
        let r2 = self.inv(r2_inv);
        let universe = self.universe.ok_or_else(|| Error::Usage("strong duality needs a universe".into()))?;
        let s0 = find_link(self.get(r1), self.get(r2), self.system, universe)?;
        let s0_id = self.system.id_of(&s0).expect("checked by find_link");
        let s0_inv = self.inv(s0_id);

        // each side: (separation to force, its link)
        let side_one = (r1, s0_id);
        let side_two = (r2_inv, s0_inv);
        let order = if !forced.contains(s0_inv) { [side_one, side_two] } else { [side_two, side_one] };

        let mut shifted: Vec<(STree, Node)> = Vec::with_capacity(2);
        for (r, link) in order {
            if forced.contains(self.inv(r)) || forced.contains(r) {
                return Err(Error::Internal(format!(
                    "{} is already oriented; the family is not closed under shifting",
                    self.system.display(r)
                )));
            }
            let mut next = added.clone();
            next.insert(r);
            let tree = match self.strong(&next)? {
                Outcome::Tangle(o) => return Ok(Outcome::Tangle(o)),
                Outcome::Tree(t) => t,
            };
            let r_inv = self.get(self.inv(r));
            let leaf = tree.nodes().find(|&t| tree.oriented_star_at(t) == [r_inv]);
            let Some(x) = leaf else {
                self.remember(&tree, added);
                return Ok(Outcome::Tree(tree));
            };
            let tree = tree.prune(x)?.reduce_to_unique_leaf_occurrence(x, self.system)?;
            let tree = shift_stree(&tree, x, self.get(link), self.system, &family)?;
            self.stats.shifts += 1;
            // x now carries {link*}; if that singleton is already in F we are done
            if forced.contains(link) {
                self.remember(&tree, added);
                return Ok(Outcome::Tree(tree));
            }
            shifted.push((tree, x));
        }
        // shifted[i] has a leaf with {link_i*}; side one's link is s0
        let (first, second) = (&shifted[0], &shifted[1]);
        let (t1, t2) = if order[0].1 == s0_id { (first, second) } else { (second, first) };
        let tree = STree::merge_at_leaves(&t1.0, t1.1, &t2.0, t2.1, s0)?;
        self.stats.merges += 1;
        self.remember(&tree, added);
        Ok(Outcome::Tree(tree))
    }

    fn weak(&mut self, added: &FixedBitSet) -> Result<Outcome> {
        self.stats.calls += 1;
        let mut forced = self.base_forced.clone();
        forced.union_with(added);
        if let Some(s) = self.antisymmetry_failure(&forced) {
            return Ok(Outcome::Tree(STree::single_edge(self.get(s))));
        }
        if let Some(tree) = self.recall(added) {
            return Ok(Outcome::Tree(tree));
        }
        let family = self.family_with(added);
        let open = self.unoriented(&forced);
        let Some(&s0) = open.first() else {
            let out = self.close(&forced, &family)?;
            if let Outcome::Tree(t) = &out {
                self.remember(t, added);
            }
            return Ok(out);
        };
        // branch 1 adds {s0} (forcing s0*), branch 2 adds {s0*} (forcing s0)
        let mut pruned = Vec::with_capacity(2);
        for forced_id in [self.inv(s0), s0] {
            let mut next = added.clone();
            next.insert(forced_id);
            let tree = match self.weak(&next)? {
                Outcome::Tangle(o) => return Ok(Outcome::Tangle(o)),
                Outcome::Tree(t) => t,
            };
            let star = [self.get(self.inv(forced_id))];
            let Some(x) = tree.nodes().find(|&t| tree.oriented_star_at(t) == star) else {
                self.remember(&tree, added);
                return Ok(Outcome::Tree(tree));
            };
            pruned.push((tree.prune(x)?, x));
        }
        // pruned[0] carries {s0} at its leaf, pruned[1] carries {s0*}
        let s = self.get(s0);
        let tree = STree::merge_at_leaves(&pruned[1].0, pruned[1].1, &pruned[0].0, pruned[0].1, s)?;
        self.stats.merges += 1;
        self.remember(&tree, added);
        Ok(Outcome::Tree(tree))
    }

    fn finish(&self, out: Outcome) -> Result<DualityWitness> {
        match out {
            Outcome::Tree(t) => {
                let t = t.renumbered();
                let report = validate_tree(&t, self.system, self.family);
                if !report.is_ok() {
                    return Err(Error::Internal(format!("engine produced an invalid S-tree: {}", report.describe())));
                }
                Ok(DualityWitness::Tree(t))
            }
            Outcome::Tangle(ids) => Ok(DualityWitness::Tangle(Orientation::new(self.system, ids)?)),
        }
    }
}

fn check_standard(system: &SeparationSystem, family: &dyn StarFamily) -> Result<()> {
    if let Some(r) = unforced_trivial(system, family) {
        return usage(format!(
            "family {} is not standard: it does not force the trivial separation {}",
            family.name(),
            system.display(r)
        ));
    }
    Ok(())
}

/// Weak duality: an S-tree over `F` or an orientation of `S` avoiding `F`
/// (not necessarily consistent).
pub fn weak_duality(system: &SeparationSystem, family: &dyn StarFamily) -> Result<DualityWitness> {
    check_standard(system, family)?;
    let mut engine = Engine::new(system, family, None);
    let out = engine.weak(&FixedBitSet::with_capacity(system.len()))?;
    engine.finish(out)
}

/// Strong duality: an S-tree over `F` or an `F`-tangle of `S`.
pub fn strong_duality(system: &SeparationSystem, family: &dyn StarFamily, universe: &Universe) -> Result<DualityWitness> {
    strong_duality_with_stats(system, family, universe).map(|(w, _)| w)
}

pub fn strong_duality_with_stats(
    system: &SeparationSystem,
    family: &dyn StarFamily,
    universe: &Universe,
) -> Result<(DualityWitness, EngineStats)> {
    check_standard(system, family)?;
    let mut engine = Engine::new(system, family, Some(universe));
    let out = engine.strong(&FixedBitSet::with_capacity(system.len()))?;
    let witness = engine.finish(out)?;
    if let DualityWitness::Tangle(o) = &witness {
        if let Some(why) = tangle_violation(o, system, family) {
            return Err(Error::Internal(format!("engine produced an invalid tangle: {why}")));
        }
    }
    Ok((witness, engine.stats))
}
