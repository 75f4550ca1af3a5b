//! Fixed-width bit sets over activity indices. Sets that take part in the same
//! operation must have the same word count.

use std::cmp::Ordering;

use smallvec::{smallvec, SmallVec};

#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub(crate) struct BitSet(SmallVec<[u64; 2]>);

impl BitSet {
    pub fn words_for(n: usize) -> usize {
        n.div_ceil(64).max(1)
    }

    pub fn empty(words: usize) -> Self {
        BitSet(smallvec![0; words])
    }

    pub fn words(&self) -> usize {
        self.0.len()
    }

    pub fn full(n: usize) -> Self {
        let mut s = Self::empty(Self::words_for(n));
        for i in 0..n {
            s.insert(i);
        }
        s
    }

    pub fn insert(&mut self, i: usize) {
        self.0[i / 64] |= 1 << (i % 64);
    }

    #[inline]
    pub fn contains(&self, i: usize) -> bool {
        self.0[i / 64] & (1 << (i % 64)) != 0
    }

    pub fn is_empty(&self) -> bool {
        self.0.iter().all(|w| *w == 0)
    }

    pub fn len(&self) -> usize {
        self.0.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn and(&self, other: &BitSet) -> BitSet {
        BitSet(self.0.iter().zip(&other.0).map(|(a, b)| a & b).collect())
    }

    pub fn or(&self, other: &BitSet) -> BitSet {
        BitSet(self.0.iter().zip(&other.0).map(|(a, b)| a | b).collect())
    }

    pub fn and_not(&self, other: &BitSet) -> BitSet {
        BitSet(self.0.iter().zip(&other.0).map(|(a, b)| a & !b).collect())
    }

    pub fn is_subset(&self, other: &BitSet) -> bool {
        self.0.iter().zip(&other.0).all(|(a, b)| a & !b == 0)
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.0.iter().enumerate().flat_map(|(wi, &w)| {
            let mut w = w;
            std::iter::from_fn(move || {
                if w == 0 {
                    None
                } else {
                    let bit = w.trailing_zeros() as usize;
                    w &= w - 1;
                    Some(wi * 64 + bit)
                }
            })
        })
    }

    /// Elements strictly greater than `i`.
    pub fn above(&self, i: usize) -> BitSet {
        let mut s = self.clone();
        let w = i / 64;
        for word in s.0.iter_mut().take(w) {
            *word = 0;
        }
        if let Some(word) = s.0.get_mut(w) {
            let bit = i % 64;
            *word &= if bit == 63 { 0 } else { !0u64 << (bit + 1) };
        }
        s
    }

    /// Lexicographic comparison of the sorted element lists.
    pub fn lex_cmp(&self, other: &BitSet) -> Ordering {
        self.iter().cmp(other.iter())
    }
}
