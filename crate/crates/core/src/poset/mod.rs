//! Finite posets on at most 64 elements.
//!
//! Elements are dense indices `0..len` with string labels. The strict order is
//! kept transitively closed as one `u64` row per element, so comparability
//! queries are single bit tests.

mod decompose;
mod embed;
mod named;
mod saturate;

pub use decompose::{decompose, DecompositionStep, Side};
pub use embed::{find_poset_embedding, Embedding};
pub use named::NamedPoset;
pub use saturate::saturate;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const MAX_ELEMENTS: usize = 64;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Poset {
    labels: Vec<String>,
    /// `above[i]` has bit `j` set iff `i < j`.
    above: Vec<u64>,
    /// `below[i]` has bit `j` set iff `j < i`.
    below: Vec<u64>,
}

/// Cover relation: `(u, v)` means `v` covers `u`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct HasseDiagram {
    pub covers: Vec<(usize, usize)>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Analysis {
    pub height: usize,
    pub tree_hasse: bool,
    pub k_saturated: bool,
}

#[derive(Serialize, Deserialize)]
struct PosetFile {
    n: usize,
    labels: Vec<String>,
    covers: Vec<(usize, usize)>,
}

fn bit(i: usize) -> u64 {
    1u64 << i
}

pub(crate) fn bits(mut mask: u64) -> impl Iterator<Item = usize> {
    std::iter::from_fn(move || {
        if mask == 0 {
            None
        } else {
            let i = mask.trailing_zeros() as usize;
            mask &= mask - 1;
            Some(i)
        }
    })
}

impl Poset {
    /// Transitive closure of `pairs` on `element_count` elements, each pair
    /// `(a, b)` meaning `a < b`. Labels default to the element indices.
    pub fn from_relations(element_count: usize, pairs: &[(usize, usize)]) -> Result<Self> {
        let labels = (0..element_count).map(|i| i.to_string()).collect();
        Self::with_labels(labels, pairs)
    }

    pub fn with_labels(labels: Vec<String>, pairs: &[(usize, usize)]) -> Result<Self> {
        let n = labels.len();
        if n == 0 || n > MAX_ELEMENTS {
            return Err(Error::Param(format!(
                "posets need between 1 and {MAX_ELEMENTS} elements, got {n}"
            )));
        }
        for (i, a) in labels.iter().enumerate() {
            if labels[..i].contains(a) {
                return Err(Error::Param(format!("duplicate label {a:?}")));
            }
        }
        let mut above = vec![0u64; n];
        for &(a, b) in pairs {
            for index in [a, b] {
                if index >= n {
                    return Err(Error::Index { index, len: n });
                }
            }
            above[a] |= bit(b);
        }
        // Warshall on bit rows.
        for k in 0..n {
            for i in 0..n {
                if above[i] & bit(k) != 0 {
                    above[i] |= above[k];
                }
            }
        }
        if let Some(i) = (0..n).find(|&i| above[i] & bit(i) != 0) {
            return Err(Error::Cycle(i));
        }
        let mut below = vec![0u64; n];
        for (i, &row) in above.iter().enumerate() {
            for j in bits(row) {
                below[j] |= bit(i);
            }
        }
        Ok(Self {
            labels,
            above,
            below,
        })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn label(&self, i: usize) -> &str {
        &self.labels[i]
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }

    /// Strict order test `a < b`.
    pub fn less(&self, a: usize, b: usize) -> bool {
        self.above[a] & bit(b) != 0
    }

    pub fn comparable(&self, a: usize, b: usize) -> bool {
        a == b || self.less(a, b) || self.less(b, a)
    }

    pub fn above_mask(&self, a: usize) -> u64 {
        self.above[a]
    }

    pub fn below_mask(&self, a: usize) -> u64 {
        self.below[a]
    }

    pub fn strict_pairs(&self) -> Vec<(usize, usize)> {
        (0..self.len())
            .flat_map(|a| bits(self.above[a]).map(move |b| (a, b)))
            .collect()
    }

    pub fn is_minimal(&self, a: usize) -> bool {
        self.below[a] == 0
    }

    pub fn is_maximal(&self, a: usize) -> bool {
        self.above[a] == 0
    }

    pub fn is_chain(&self) -> bool {
        (0..self.len()).all(|a| (0..self.len()).all(|b| self.comparable(a, b)))
    }

    /// Subposet induced on `elements`, in the given order, labels kept.
    pub fn induced(&self, elements: &[usize]) -> Self {
        let mut above = vec![0u64; elements.len()];
        let mut below = vec![0u64; elements.len()];
        for (i, &a) in elements.iter().enumerate() {
            for (j, &b) in elements.iter().enumerate() {
                if self.less(a, b) {
                    above[i] |= bit(j);
                    below[j] |= bit(i);
                }
            }
        }
        Self {
            labels: elements.iter().map(|&e| self.labels[e].clone()).collect(),
            above,
            below,
        }
    }

    pub fn hasse(&self) -> HasseDiagram {
        let covers = self
            .strict_pairs()
            .into_iter()
            .filter(|&(a, b)| self.above[a] & self.below[b] == 0)
            .collect();
        HasseDiagram { covers }
    }

    /// Elements listed so that every element comes after everything below it.
    pub fn linear_extension(&self) -> Vec<usize> {
        let mut order: Vec<usize> = (0..self.len()).collect();
        order.sort_by_key(|&a| (self.below[a].count_ones(), a));
        order
    }

    /// Bitmask of cover-path lengths (in elements) from a minimal element up
    /// to each element. Bit `l` of entry `x` is set iff some maximal-from-below
    /// chain ending at `x` has `l` elements.
    fn chain_lengths_from_below(&self) -> Vec<u128> {
        let hasse = self.hasse();
        let mut lower_covers = vec![Vec::new(); self.len()];
        for &(a, b) in &hasse.covers {
            lower_covers[b].push(a);
        }
        let mut lens = vec![0u128; self.len()];
        for x in self.linear_extension() {
            lens[x] = if lower_covers[x].is_empty() {
                1 << 1
            } else {
                lower_covers[x].iter().fold(0, |acc, &u| acc | (lens[u] << 1))
            };
        }
        lens
    }

    /// Largest cardinality of a chain.
    pub fn height(&self) -> usize {
        self.chain_lengths_from_below()
            .into_iter()
            .map(|l| 127 - l.leading_zeros() as usize)
            .max()
            .unwrap_or(0)
    }

    /// Number of elements on the longest chain ending at each element.
    pub fn depth_from_below(&self) -> Vec<usize> {
        self.chain_lengths_from_below()
            .into_iter()
            .map(|l| 127 - l.leading_zeros() as usize)
            .collect()
    }

    /// Number of elements on the longest chain starting at each element.
    pub fn depth_from_above(&self) -> Vec<usize> {
        let mut depth = vec![1usize; self.len()];
        let mut order = self.linear_extension();
        order.reverse();
        for a in order {
            depth[a] = 1 + bits(self.above[a]).map(|b| depth[b]).max().unwrap_or(0);
        }
        depth
    }

    pub fn is_saturated(&self, k: usize) -> bool {
        let lens = self.chain_lengths_from_below();
        k < 128 && (0..self.len()).filter(|&a| self.is_maximal(a)).all(|a| lens[a] == 1 << k)
    }

    pub fn hasse_is_tree(&self) -> bool {
        self.hasse().is_tree(self.len())
    }

    pub fn analyze(&self, k: usize) -> Analysis {
        Analysis {
            height: self.height(),
            tree_hasse: self.hasse_is_tree(),
            k_saturated: self.is_saturated(k),
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: PosetFile = serde_json::from_str(text)?;
        if file.labels.len() != file.n {
            return Err(Error::Parse(format!(
                "{} labels given for n = {}",
                file.labels.len(),
                file.n
            )));
        }
        Self::with_labels(file.labels, &file.covers)
    }

    pub fn to_json(&self) -> String {
        let file = PosetFile {
            n: self.len(),
            labels: self.labels.clone(),
            covers: self.hasse().covers,
        };
        serde_json::to_string(&file).expect("poset file serializes")
    }
}

impl HasseDiagram {
    /// Undirected cover graph is a spanning tree on `element_count` vertices.
    pub fn is_tree(&self, element_count: usize) -> bool {
        if self.covers.len() + 1 != element_count {
            return false;
        }
        let mut parent: Vec<usize> = (0..element_count).collect();
        fn find(parent: &mut [usize], mut x: usize) -> usize {
            while parent[x] != x {
                parent[x] = parent[parent[x]];
                x = parent[x];
            }
            x
        }
        for &(a, b) in &self.covers {
            let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
            if ra == rb {
                return false;
            }
            parent[ra] = rb;
        }
        true
    }

    pub fn neighbors(&self, element_count: usize) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); element_count];
        for &(a, b) in &self.covers {
            adj[a].push(b);
            adj[b].push(a);
        }
        for list in &mut adj {
            list.sort_unstable();
        }
        adj
    }
}
