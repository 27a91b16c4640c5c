//! Abstract separation systems realised over separations of a finite set.
//!
//! An oriented separation is an ordered pair `(A, B)` of subsets of a ground
//! set. The partial order is `(A,B) <= (C,D)` iff `A ⊆ C` and `B ⊇ D`, the
//! involution swaps the sides, and join/meet are `(A∪C, B∩D)` / `(A∩C, B∪D)`.
//! Vertex separations of a graph and bipartitions of a matroid's ground set
//! are both instances, so one payload type serves every universe.

use std::cmp::Ordering;
use std::collections::HashMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::bits::{self, Bits};
use crate::error::{usage, Error, Result};

/// One orientation `(A, B)` of a separation of a set.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub struct SetSep {
    pub a: Bits,
    pub b: Bits,
}

impl SetSep {
    pub const fn new(a: Bits, b: Bits) -> Self {
        SetSep { a, b }
    }

    pub fn from_sides(a: &[usize], b: &[usize]) -> Self {
        SetSep::new(bits::from_iter(a.iter().copied()), bits::from_iter(b.iter().copied()))
    }

    #[inline]
    pub fn inverse(self) -> Self {
        SetSep { a: self.b, b: self.a }
    }

    #[inline]
    pub fn leq(self, other: SetSep) -> bool {
        bits::is_subset(self.a, other.a) && bits::is_subset(other.b, self.b)
    }

    #[inline]
    pub fn lt(self, other: SetSep) -> bool {
        self != other && self.leq(other)
    }

    #[inline]
    pub fn join(self, other: SetSep) -> SetSep {
        SetSep::new(self.a | other.a, self.b & other.b)
    }

    #[inline]
    pub fn meet(self, other: SetSep) -> SetSep {
        SetSep::new(self.a & other.a, self.b | other.b)
    }

    #[inline]
    pub fn is_degenerate(self) -> bool {
        self.a == self.b
    }

    #[inline]
    pub fn is_small(self) -> bool {
        self.leq(self.inverse())
    }

    /// `|A ∩ B|`, the order of a vertex separation.
    #[inline]
    pub fn separator_size(self) -> usize {
        bits::len(self.a & self.b)
    }

    /// Key of the unordered separation: the smaller of the two orientations.
    pub fn key(self) -> SetSep {
        std::cmp::min(self, self.inverse())
    }

    /// True if this is a separation of the ground set `{0..n}`.
    pub fn covers(self, n: usize) -> bool {
        self.a | self.b == bits::full(n)
    }
}

impl PartialOrd for SetSep {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Canonical total order: lexicographic on the sorted member lists of `A`,
/// then of `B`. Used only for deterministic iteration and tie-breaking.
impl Ord for SetSep {
    fn cmp(&self, other: &Self) -> Ordering {
        cmp_sets(self.a, other.a).then_with(|| cmp_sets(self.b, other.b))
    }
}

fn cmp_sets(x: Bits, y: Bits) -> Ordering {
    bits::iter(x).cmp(bits::iter(y))
}

impl fmt::Display for SetSep {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", bits::fmt_set(self.a), bits::fmt_set(self.b))
    }
}

#[derive(Serialize, Deserialize)]
struct SidesJson {
    #[serde(rename = "A")]
    a: Vec<usize>,
    #[serde(rename = "B")]
    b: Vec<usize>,
}

impl Serialize for SetSep {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        SidesJson { a: bits::to_vec(self.a), b: bits::to_vec(self.b) }.serialize(s)
    }
}

impl<'de> Deserialize<'de> for SetSep {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let sides = SidesJson::deserialize(d)?;
        if sides.a.iter().chain(&sides.b).any(|&v| v >= 64) {
            return Err(serde::de::Error::custom("element index out of range"));
        }
        Ok(SetSep::from_sides(&sides.a, &sides.b))
    }
}

/// Pairwise star test on raw payloads: `r <= s*` for all distinct `r, s`.
pub fn payloads_form_star(members: &[SetSep]) -> bool {
    if members.is_empty() {
        return false;
    }
    for (i, &r) in members.iter().enumerate() {
        for &s in &members[i + 1..] {
            if r != s && !(r.leq(s.inverse()) && s.leq(r.inverse())) {
                return false;
            }
        }
    }
    true
}

/// Index of an oriented separation inside its [`SeparationSystem`].
pub type SepId = usize;

/// What [`SeparationSystem::classify`] found out about an element.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Classification {
    /// Some separation `s` with `r < s` and `r < s*`, if `r` is trivial.
    pub trivial_witness: Option<SepId>,
    pub co_trivial: bool,
    pub small: bool,
    pub degenerate: bool,
}

impl Classification {
    pub fn is_trivial(&self) -> bool {
        self.trivial_witness.is_some()
    }

    /// No flag applies.
    pub fn is_plain(&self) -> bool {
        !self.is_trivial() && !self.co_trivial && !self.small && !self.degenerate
    }
}

/// A finite set of oriented separations of a ground set, closed under
/// inversion, with the induced order and involution.
///
/// Elements are stored in canonical order, so ids are reproducible.
#[derive(Clone, Debug)]
pub struct SeparationSystem {
    ground: usize,
    seps: Vec<SetSep>,
    inverse: Vec<SepId>,
    index: HashMap<SetSep, SepId>,
}

impl SeparationSystem {
    /// Builds the system generated by `seps` (inverses are added).
    pub fn new(ground: usize, seps: impl IntoIterator<Item = SetSep>) -> Result<Self> {
        if ground > 64 {
            return Err(Error::Cap(format!("ground set of {ground} elements exceeds 64")));
        }
        let full = bits::full(ground);
        let mut all = Vec::new();
        for s in seps {
            if !bits::is_subset(s.a | s.b, full) {
                return Err(Error::Input(format!("{s} is not a separation of a {ground}-element set")));
            }
            all.push(s);
            all.push(s.inverse());
        }
        all.sort();
        all.dedup();
        let index: HashMap<SetSep, SepId> = all.iter().enumerate().map(|(i, &s)| (s, i)).collect();
        let inverse = all.iter().map(|s| index[&s.inverse()]).collect();
        Ok(SeparationSystem { ground, seps: all, inverse, index })
    }

    pub fn ground_size(&self) -> usize {
        self.ground
    }

    pub fn len(&self) -> usize {
        self.seps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.seps.is_empty()
    }

    pub fn get(&self, id: SepId) -> SetSep {
        self.seps[id]
    }

    pub fn elements(&self) -> &[SetSep] {
        &self.seps
    }

    pub fn ids(&self) -> std::ops::Range<SepId> {
        0..self.seps.len()
    }

    pub fn id_of(&self, s: &SetSep) -> Option<SepId> {
        self.index.get(s).copied()
    }

    pub fn contains(&self, s: &SetSep) -> bool {
        self.index.contains_key(s)
    }

    pub fn inverse(&self, id: SepId) -> SepId {
        self.inverse[id]
    }

    pub fn is_degenerate(&self, id: SepId) -> bool {
        self.inverse[id] == id
    }

    /// Rejects ids that do not belong to this system.
    pub fn check_id(&self, id: SepId) -> Result<()> {
        if id < self.seps.len() {
            Ok(())
        } else {
            usage(format!("separation id {id} does not belong to this system of {} elements", self.len()))
        }
    }

    pub fn leq(&self, r: SepId, s: SepId) -> bool {
        self.seps[r].leq(self.seps[s])
    }

    pub fn lt(&self, r: SepId, s: SepId) -> bool {
        r != s && self.leq(r, s)
    }

    /// Order comparison that reports foreign ids instead of panicking.
    pub fn try_leq(&self, r: SepId, s: SepId) -> Result<bool> {
        self.check_id(r)?;
        self.check_id(s)?;
        Ok(self.leq(r, s))
    }

    /// One id per unordered separation: the canonically smaller orientation.
    pub fn separations(&self) -> impl Iterator<Item = SepId> + '_ {
        self.ids().filter(move |&i| i <= self.inverse[i])
    }

    pub fn separation_count(&self) -> usize {
        self.separations().count()
    }

    pub fn classify(&self, r: SepId) -> Classification {
        let degenerate = self.is_degenerate(r);
        let small = self.leq(r, self.inverse[r]);
        let trivial_witness = self.trivial_witness(r);
        let co_trivial = self.trivial_witness(self.inverse[r]).is_some();
        Classification { trivial_witness, co_trivial, small, degenerate }
    }

    /// First (canonical) `s` with `r < s` and `r < s*`, where `s` is a
    /// separation other than `r`'s own.
    pub fn trivial_witness(&self, r: SepId) -> Option<SepId> {
        let rinv = self.inverse[r];
        self.separations().find(|&s| {
            let sinv = self.inverse[s];
            s != r && s != rinv && self.lt(r, s) && self.lt(r, sinv)
        })
    }

    pub fn is_trivial(&self, r: SepId) -> bool {
        self.trivial_witness(r).is_some()
    }

    pub fn nested(&self, r: SepId, s: SepId) -> bool {
        let (ri, si) = (self.inverse[r], self.inverse[s]);
        [r, ri].iter().any(|&x| [s, si].iter().any(|&y| self.leq(x, y) || self.leq(y, x)))
    }

    /// `r` points towards the separation of `s`.
    pub fn points_toward(&self, r: SepId, s: SepId) -> bool {
        self.leq(r, s) || self.leq(r, self.inverse[s])
    }

    pub fn is_star(&self, members: &[SepId]) -> Result<bool> {
        if members.is_empty() {
            return usage("a star must be non-empty");
        }
        for &m in members {
            self.check_id(m)?;
        }
        let payloads: Vec<SetSep> = members.iter().map(|&m| self.seps[m]).collect();
        Ok(payloads_form_star(&payloads))
    }

    /// A set is consistent unless it contains `r*` and `s` for distinct
    /// separations with `r < s`.
    pub fn is_consistent(&self, set: &[SepId]) -> bool {
        self.inconsistent_pair(set).is_none()
    }

    /// Returns `(r*, s)` drawn from `set` with `r < s` and `r`, `s` of
    /// distinct separations.
    pub fn inconsistent_pair(&self, set: &[SepId]) -> Option<(SepId, SepId)> {
        for &x in set {
            let r = self.inverse[x];
            for &s in set {
                if s != r && s != x && self.lt(r, s) {
                    return Some((x, s));
                }
            }
        }
        None
    }

    /// Sub-system of the elements satisfying `keep` (must be closed under
    /// inversion, which holds for any symmetric predicate).
    pub fn restrict(&self, keep: impl Fn(SetSep) -> bool) -> Result<SeparationSystem> {
        let kept: Vec<SetSep> = self.seps.iter().copied().filter(|&s| keep(s)).collect();
        for s in &kept {
            if !keep(s.inverse()) {
                return usage(format!("restriction predicate is not symmetric at {s}"));
            }
        }
        SeparationSystem::new(self.ground, kept)
    }

    pub fn display(&self, id: SepId) -> String {
        self.seps[id].to_string()
    }
}

/// A choice of exactly one orientation of every separation of a system.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Orientation {
    chosen: Vec<SepId>,
}

impl Orientation {
    /// Validates that `chosen` orients every separation of `system` exactly once.
    pub fn new(system: &SeparationSystem, mut chosen: Vec<SepId>) -> Result<Self> {
        chosen.sort_unstable();
        chosen.dedup();
        let mut seen = vec![false; system.len()];
        for &c in &chosen {
            system.check_id(c)?;
            let key = c.min(system.inverse(c));
            if seen[key] {
                return Err(Error::Validation(format!(
                    "both orientations of {} chosen",
                    system.display(key)
                )));
            }
            seen[key] = true;
        }
        if let Some(missing) = system.separations().find(|&s| !seen[s]) {
            return Err(Error::Validation(format!("separation {} is not oriented", system.display(missing))));
        }
        Ok(Orientation { chosen })
    }

    pub fn ids(&self) -> &[SepId] {
        &self.chosen
    }

    pub fn contains(&self, id: SepId) -> bool {
        self.chosen.binary_search(&id).is_ok()
    }

    pub fn payloads(&self, system: &SeparationSystem) -> Vec<SetSep> {
        self.chosen.iter().map(|&i| system.get(i)).collect()
    }

    pub fn is_consistent(&self, system: &SeparationSystem) -> bool {
        system.is_consistent(&self.chosen)
    }
}
