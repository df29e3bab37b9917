//! Dense membership vectors over element indices.
//!
//! Every ideal and submodule in the finite backend is an `ElemSet`. The
//! canonical order on sets is by cardinality first, then by the sorted list of
//! member indices compared lexicographically. On equal-size sets this is the
//! membership vector compared from index 0 upward with "present" ranking
//! before "absent".

use std::cmp::Ordering;
use std::fmt;

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct ElemSet {
    len: usize,
    words: Vec<u64>,
}

impl ElemSet {
    pub fn empty(len: usize) -> Self {
        ElemSet {
            len,
            words: vec![0; len.div_ceil(64)],
        }
    }

    pub fn full(len: usize) -> Self {
        let mut s = Self::empty(len);
        for i in 0..len {
            s.insert(i);
        }
        s
    }

    pub fn from_indices(len: usize, idx: impl IntoIterator<Item = usize>) -> Self {
        let mut s = Self::empty(len);
        for i in idx {
            s.insert(i);
        }
        s
    }

    pub fn from_bools(flags: &[bool]) -> Self {
        Self::from_indices(flags.len(), flags.iter().enumerate().filter(|(_, &b)| b).map(|(i, _)| i))
    }

    /// Universe size (number of elements of the ambient ring or module).
    #[inline]
    pub fn universe(&self) -> usize {
        self.len
    }

    #[inline]
    pub fn contains(&self, i: usize) -> bool {
        debug_assert!(i < self.len);
        self.words[i >> 6] >> (i & 63) & 1 == 1
    }

    #[inline]
    pub fn insert(&mut self, i: usize) -> bool {
        debug_assert!(i < self.len);
        let w = &mut self.words[i >> 6];
        let bit = 1u64 << (i & 63);
        let fresh = *w & bit == 0;
        *w |= bit;
        fresh
    }

    pub fn count(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_full(&self) -> bool {
        self.count() == self.len
    }

    pub fn is_subset(&self, other: &ElemSet) -> bool {
        self.words
            .iter()
            .zip(&other.words)
            .all(|(a, b)| a & !b == 0)
    }

    pub fn is_proper_subset(&self, other: &ElemSet) -> bool {
        self.is_subset(other) && self != other
    }

    pub fn intersect(&self, other: &ElemSet) -> ElemSet {
        ElemSet {
            len: self.len,
            words: self.words.iter().zip(&other.words).map(|(a, b)| a & b).collect(),
        }
    }

    pub fn union(&self, other: &ElemSet) -> ElemSet {
        ElemSet {
            len: self.len,
            words: self.words.iter().zip(&other.words).map(|(a, b)| a | b).collect(),
        }
    }

    pub fn union_with(&mut self, other: &ElemSet) {
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a |= b;
        }
    }

    /// `self ∩ other ⊆ within`, without allocating.
    pub fn meet_within(&self, other: &ElemSet, within: &ElemSet) -> bool {
        self.words
            .iter()
            .zip(&other.words)
            .zip(&within.words)
            .all(|((a, b), n)| a & b & !n == 0)
    }

    /// `self ∩ other == target`, without allocating.
    pub fn meet_equals(&self, other: &ElemSet, target: &ElemSet) -> bool {
        self.words
            .iter()
            .zip(&other.words)
            .zip(&target.words)
            .all(|((a, b), t)| a & b == *t)
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.words.iter().enumerate().flat_map(|(wi, &w)| {
            let mut w = w;
            std::iter::from_fn(move || {
                if w == 0 {
                    return None;
                }
                let t = w.trailing_zeros() as usize;
                w &= w - 1;
                Some(wi * 64 + t)
            })
        })
    }

    pub fn to_vec(&self) -> Vec<usize> {
        self.iter().collect()
    }

    /// Smallest member, if any.
    pub fn first(&self) -> Option<usize> {
        self.iter().next()
    }
}

impl Ord for ElemSet {
    fn cmp(&self, other: &Self) -> Ordering {
        self.count()
            .cmp(&other.count())
            .then_with(|| {
                for (a, b) in self.words.iter().zip(&other.words) {
                    let diff = a ^ b;
                    if diff != 0 {
                        let low = diff & diff.wrapping_neg();
                        // whoever holds the lowest differing index sorts first
                        return if a & low != 0 {
                            Ordering::Less
                        } else {
                            Ordering::Greater
                        };
                    }
                }
                Ordering::Equal
            })
            .then_with(|| self.len.cmp(&other.len))
    }
}

impl PartialOrd for ElemSet {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Debug for ElemSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.iter()).finish()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn order_is_cardinality_then_member_lists() {
        let a = ElemSet::from_indices(8, [0, 2]);
        let b = ElemSet::from_indices(8, [0, 4]);
        let c = ElemSet::from_indices(8, [0, 6]);
        let big = ElemSet::from_indices(8, [0, 1, 2]);
        let mut v = vec![big.clone(), c.clone(), a.clone(), b.clone()];
        v.sort();
        assert_eq!(v, vec![a, b, c, big]);
    }

    #[test]
    fn iter_crosses_word_boundaries() {
        let s = ElemSet::from_indices(200, [0, 63, 64, 127, 199]);
        assert_eq!(s.to_vec(), vec![0, 63, 64, 127, 199]);
        assert_eq!(s.count(), 5);
    }

    proptest! {
        #[test]
        fn order_matches_sorted_list_comparison(
            xs in proptest::collection::btree_set(0usize..130, 0..20),
            ys in proptest::collection::btree_set(0usize..130, 0..20),
        ) {
            let a = ElemSet::from_indices(130, xs.iter().copied());
            let b = ElemSet::from_indices(130, ys.iter().copied());
            let la: Vec<_> = xs.into_iter().collect();
            let lb: Vec<_> = ys.into_iter().collect();
            let expected = la.len().cmp(&lb.len()).then_with(|| la.cmp(&lb));
            prop_assert_eq!(a.cmp(&b), expected);
        }
    }
}
