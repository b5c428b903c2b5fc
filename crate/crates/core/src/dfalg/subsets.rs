//! Bitmask subsets of `{0..n}` with lexicographic rank/unrank and cached
//! shuffle-sign tables.

use std::collections::HashMap;
use std::sync::{Arc, OnceLock, RwLock};

/// Largest supported ambient dimension.
pub const MAX_DIM: usize = 12;

/// A subset of `{0, .., n-1}` encoded as a bitmask.
pub type Mask = u16;

const NO_RANK: u32 = u32::MAX;

/// Rank/unrank maps between `p`-subsets and their lexicographic positions.
#[derive(Debug)]
pub struct SubsetIndexTable {
    n: usize,
    p: usize,
    masks: Vec<Mask>,
    rank: Vec<u32>,
}

impl SubsetIndexTable {
    fn build(n: usize, p: usize) -> Self {
        let mut masks = Vec::with_capacity(binomial(n, p));
        let mut stack = Vec::with_capacity(p);
        lex_subsets(n, p, 0, &mut stack, &mut masks);
        let mut rank = vec![NO_RANK; 1 << n];
        for (i, &m) in masks.iter().enumerate() {
            rank[m as usize] = i as u32;
        }
        Self { n, p, masks, rank }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn len(&self) -> usize {
        self.masks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.masks.is_empty()
    }

    pub fn masks(&self) -> &[Mask] {
        &self.masks
    }

    pub fn unrank(&self, i: usize) -> Mask {
        self.masks[i]
    }

    /// Position of `mask`, or `None` if it is not a `p`-subset of `{0..n}`.
    pub fn rank(&self, mask: Mask) -> Option<usize> {
        match self.rank.get(mask as usize) {
            Some(&r) if r != NO_RANK => Some(r as usize),
            _ => None,
        }
    }
}

fn lex_subsets(n: usize, p: usize, start: usize, stack: &mut Vec<usize>, out: &mut Vec<Mask>) {
    if stack.len() == p {
        out.push(stack.iter().fold(0, |m, &i| m | (1 << i)));
        return;
    }
    let remaining = p - stack.len();
    for i in start..=(n - remaining) {
        stack.push(i);
        lex_subsets(n, p, i + 1, stack, out);
        stack.pop();
    }
}

/// Shared table for dimension `n` and subset size `p`.
pub fn subset_table(n: usize, p: usize) -> &'static SubsetIndexTable {
    static TABLES: [OnceLock<Vec<SubsetIndexTable>>; MAX_DIM + 1] = [const { OnceLock::new() }; MAX_DIM + 1];
    assert!(n <= MAX_DIM && p <= n, "subset table ({n},{p}) out of range");
    &TABLES[n].get_or_init(|| (0..=n).map(|p| SubsetIndexTable::build(n, p)).collect())[p]
}

/// Elements of a mask in increasing order.
pub fn elements(mask: Mask) -> impl Iterator<Item = usize> {
    (0..16).filter(move |i| mask & (1 << i) != 0)
}

/// Sign of the permutation taking the sorted union of `a` and `b` to the
/// concatenation `(a, b)`: `(-1)^(#{(x, y) : x in a, y in b, x > y})`.
pub fn shuffle_sign(a: Mask, b: Mask) -> f64 {
    debug_assert_eq!(a & b, 0);
    let mut inversions = 0u32;
    let mut rest = b;
    while rest != 0 {
        let y = rest.trailing_zeros();
        rest &= rest - 1;
        let above = if y >= 15 { 0 } else { a >> (y + 1) };
        inversions += above.count_ones();
    }
    if inversions % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

/// Sign of moving element `m` to the front of the sorted tuple `mask ∪ {m}`.
pub fn front_sign(m: usize, mask: Mask) -> f64 {
    let below = mask & ((1u16 << m) - 1);
    if below.count_ones() % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

/// For every `(p+r)`-subset `K` (lexicographic order), all splittings
/// `K = A ⊔ B` with `|A| = p`, `|B| = r`, stored as `(rank A, rank B, sign)`.
#[derive(Debug)]
pub struct SplitTable {
    pub per_subset: usize,
    pub entries: Vec<(u32, u32, f64)>,
}

impl SplitTable {
    fn build(n: usize, p: usize, r: usize) -> Self {
        let outer = subset_table(n, p + r);
        let ta = subset_table(n, p);
        let tb = subset_table(n, r);
        let local = subset_table(p + r, p);
        let per_subset = local.len();
        let mut entries = Vec::with_capacity(outer.len() * per_subset);
        for &k in outer.masks() {
            let elems: Vec<usize> = elements(k).collect();
            for &sel in local.masks() {
                let mut a: Mask = 0;
                for (j, &e) in elems.iter().enumerate() {
                    if sel & (1 << j) != 0 {
                        a |= 1 << e;
                    }
                }
                let b = k & !a;
                let ia = ta.rank(a).expect("p-subset") as u32;
                let ib = tb.rank(b).expect("r-subset") as u32;
                entries.push((ia, ib, shuffle_sign(a, b)));
            }
        }
        Self { per_subset, entries }
    }

    /// Splittings of the `k`-th `(p+r)`-subset.
    pub fn splits(&self, k: usize) -> &[(u32, u32, f64)] {
        &self.entries[k * self.per_subset..(k + 1) * self.per_subset]
    }
}

/// Shared split table for `(n, p, r)`.
pub fn split_table(n: usize, p: usize, r: usize) -> Arc<SplitTable> {
    static CACHE: OnceLock<RwLock<HashMap<(usize, usize, usize), Arc<SplitTable>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(Default::default);
    if let Some(t) = cache.read().expect("split cache poisoned").get(&(n, p, r)) {
        return Arc::clone(t);
    }
    let table = Arc::new(SplitTable::build(n, p, r));
    let mut w = cache.write().expect("split cache poisoned");
    Arc::clone(w.entry((n, p, r)).or_insert(table))
}

/// Exact binomial coefficient for the small arguments used here.
pub fn binomial(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1usize, |acc, i| acc * (n - i) / (i + 1))
}

/// `m!` for `m <= 20`, exact in 64-bit integers.
pub fn factorial(m: usize) -> u64 {
    assert!(m <= 20, "factorial({m}) overflows u64");
    (1..=m as u64).product()
}

/// `m!` as a float.
pub fn factf(m: usize) -> f64 {
    factorial(m) as f64
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lexicographic_order() {
        let t = subset_table(4, 2);
        let expect: Vec<Mask> = vec![0b0011, 0b0101, 0b1001, 0b0110, 0b1010, 0b1100];
        assert_eq!(t.masks(), &expect[..]);
        assert_eq!(t.rank(0b1010), Some(4));
        assert_eq!(t.rank(0b0111), None);
    }

    #[test]
    fn rank_unrank_roundtrip() {
        for n in 0..=MAX_DIM {
            for p in 0..=n {
                let t = subset_table(n, p);
                assert_eq!(t.len(), binomial(n, p));
                for i in 0..t.len() {
                    assert_eq!(t.rank(t.unrank(i)), Some(i));
                    assert_eq!(t.unrank(i).count_ones() as usize, p);
                }
            }
        }
    }

    #[test]
    fn shuffle_sign_antisymmetry() {
        let t = subset_table(7, 5);
        for &k in t.masks() {
            let local = subset_table(5, 2);
            let elems: Vec<usize> = elements(k).collect();
            for &sel in local.masks() {
                let a: Mask =
                    elems.iter().enumerate().filter(|(j, _)| sel & (1 << j) != 0).fold(0, |m, (_, &e)| m | (1 << e));
                let b = k & !a;
                // |a| |b| = 6, so the two orders agree.
                assert_eq!(shuffle_sign(a, b) * shuffle_sign(b, a), 1.0);
            }
        }
        // (|a|,|b|) = (1,1)
        assert_eq!(shuffle_sign(0b01, 0b10), 1.0);
        assert_eq!(shuffle_sign(0b10, 0b01), -1.0);
    }

    #[test]
    fn front_sign_counts_smaller_elements() {
        assert_eq!(front_sign(0, 0b110), 1.0);
        assert_eq!(front_sign(2, 0b011), 1.0);
        assert_eq!(front_sign(1, 0b101), -1.0);
    }

    #[test]
    fn split_table_sizes() {
        let s = split_table(6, 2, 2);
        assert_eq!(s.per_subset, 6);
        assert_eq!(s.entries.len(), binomial(6, 4) * 6);
    }

    #[test]
    fn factorials() {
        assert_eq!(factorial(0), 1);
        assert_eq!(factorial(12), 479_001_600);
        assert_eq!(binomial(8, 4), 70);
    }
}
