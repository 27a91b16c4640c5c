//! Small-set helpers over `u64` bitmasks.
//!
//! Every ground set handled by this crate (vertex sets, matroid ground sets)
//! is capped well below 64 elements, so a subset is a single word.

/// A subset of a ground set `{0, .., n-1}` with `n <= 64`.
pub type Bits = u64;

#[inline]
pub fn full(n: usize) -> Bits {
    if n >= 64 {
        u64::MAX
    } else {
        (1u64 << n) - 1
    }
}

#[inline]
pub fn bit(i: usize) -> Bits {
    1u64 << i
}

#[inline]
pub fn contains(set: Bits, i: usize) -> bool {
    set & bit(i) != 0
}

#[inline]
pub fn is_subset(a: Bits, b: Bits) -> bool {
    a & !b == 0
}

#[inline]
pub fn len(set: Bits) -> usize {
    set.count_ones() as usize
}

/// Iterates the members of `set` in increasing order.
pub fn iter(set: Bits) -> impl Iterator<Item = usize> {
    let mut rest = set;
    std::iter::from_fn(move || {
        if rest == 0 {
            None
        } else {
            let i = rest.trailing_zeros() as usize;
            rest &= rest - 1;
            Some(i)
        }
    })
}

pub fn from_iter<I: IntoIterator<Item = usize>>(items: I) -> Bits {
    items.into_iter().fold(0, |acc, i| acc | bit(i))
}

/// Enumerates every subset of `set`, starting with the empty set.
pub fn subsets(set: Bits) -> impl Iterator<Item = Bits> {
    let mut next = Some(0u64);
    std::iter::from_fn(move || {
        let current = next?;
        next = if current == set {
            None
        } else {
            Some((current.wrapping_sub(set)) & set)
        };
        Some(current)
    })
}

pub fn to_vec(set: Bits) -> Vec<usize> {
    iter(set).collect()
}

/// Formats a set as `{0,1,2}`.
pub fn fmt_set(set: Bits) -> String {
    let items: Vec<String> = iter(set).map(|i| i.to_string()).collect();
    format!("{{{}}}", items.join(","))
}

/// Rank over GF(2) of a list of row vectors.
pub fn gf2_rank(rows: impl IntoIterator<Item = Bits>) -> usize {
    // xor basis indexed by leading bit
    let mut basis = [0u64; 64];
    let mut rank = 0;
    for mut v in rows {
        while v != 0 {
            let top = 63 - v.leading_zeros() as usize;
            if basis[top] == 0 {
                basis[top] = v;
                rank += 1;
                break;
            }
            v ^= basis[top];
        }
    }
    rank
}
