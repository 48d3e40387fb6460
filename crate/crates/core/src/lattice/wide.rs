use std::fmt;

use super::Vertex;

/// Subset of `[n]` for arbitrary `n`, one bit per element in 64-bit words.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct WideSet {
    n: usize,
    words: Vec<u64>,
}

impl WideSet {
    pub fn empty(n: usize) -> Self {
        Self {
            n,
            words: vec![0; n.div_ceil(64)],
        }
    }

    pub fn full(n: usize) -> Self {
        let mut s = Self::empty(n);
        for i in 0..n {
            s.insert(i);
        }
        s
    }

    /// From 0-based positions; positions `>= n` are ignored.
    pub fn from_positions(n: usize, positions: impl IntoIterator<Item = usize>) -> Self {
        let mut s = Self::empty(n);
        for i in positions {
            if i < n {
                s.insert(i);
            }
        }
        s
    }

    pub fn from_vertex(v: Vertex, n: usize) -> Self {
        Self::from_positions(n, v.positions())
    }

    /// Narrow form when every element fits in 64 positions.
    pub fn to_vertex(&self) -> Option<Vertex> {
        if self.words.iter().skip(1).any(|&w| w != 0) {
            return None;
        }
        Some(Vertex::from_bits(self.words.first().copied().unwrap_or(0)))
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn contains(&self, i: usize) -> bool {
        i < self.n && self.words[i / 64] >> (i % 64) & 1 == 1
    }

    pub fn insert(&mut self, i: usize) {
        self.words[i / 64] |= 1 << (i % 64);
    }

    pub fn remove(&mut self, i: usize) {
        self.words[i / 64] &= !(1 << (i % 64));
    }

    pub fn weight(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_subset(&self, other: &WideSet) -> bool {
        self.words
            .iter()
            .zip(other.words.iter().chain(std::iter::repeat(&0)))
            .all(|(a, b)| a & !b == 0)
    }

    pub fn is_proper_subset(&self, other: &WideSet) -> bool {
        self != other && self.is_subset(other)
    }

    pub fn comparable(&self, other: &WideSet) -> bool {
        self.is_subset(other) || other.is_subset(self)
    }

    /// `|self \ other|`.
    pub fn difference_len(&self, other: &WideSet) -> usize {
        self.words
            .iter()
            .zip(other.words.iter().chain(std::iter::repeat(&0)))
            .map(|(a, b)| (a & !b).count_ones() as usize)
            .sum()
    }

    /// 0-based positions in increasing order.
    pub fn positions(&self) -> Vec<usize> {
        let mut out = Vec::with_capacity(self.weight());
        for (wi, &w) in self.words.iter().enumerate() {
            out.extend(crate::poset::bits(w).map(|b| wi * 64 + b));
        }
        out
    }

    /// Positions of `[n]` outside the set.
    pub fn complement_positions(&self) -> Vec<usize> {
        (0..self.n).filter(|&i| !self.contains(i)).collect()
    }
}

impl fmt::Debug for WideSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "WideSet(n={}, weight={})", self.n, self.weight())
    }
}
