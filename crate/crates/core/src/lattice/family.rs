use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use super::{Band, Vertex, WideSet, MAX_N};
use crate::error::{Error, Result};

/// Deterministic membership predicate over vertices of `B_n`, `n <= 64`.
pub trait Membership {
    fn contains(&self, v: Vertex) -> bool;
}

/// Membership predicate for families at large `n`.
pub trait WideMembership {
    fn contains_wide(&self, v: &WideSet) -> bool;
}

impl<F: Fn(Vertex) -> bool> Membership for F {
    fn contains(&self, v: Vertex) -> bool {
        self(v)
    }
}

/// An explicit family: distinct vertices kept sorted, with a hash index.
#[derive(Clone, Debug, Default)]
pub struct Family {
    n: usize,
    members: Vec<Vertex>,
    index: HashSet<Vertex>,
}

impl PartialEq for Family {
    fn eq(&self, other: &Self) -> bool {
        self.n == other.n && self.members == other.members
    }
}

impl Eq for Family {}

#[derive(Serialize, Deserialize)]
struct FamilyFile {
    n: usize,
    sets: Vec<Vec<usize>>,
}

impl Family {
    pub fn new(n: usize, members: impl IntoIterator<Item = Vertex>) -> Result<Self> {
        if n > MAX_N {
            return Err(Error::Param(format!("n = {n} exceeds {MAX_N}")));
        }
        let mut members: Vec<Vertex> = members.into_iter().collect();
        if let Some(v) = members.iter().find(|v| !v.fits(n)) {
            return Err(Error::Param(format!("{v} is not a subset of [{n}]")));
        }
        members.sort_unstable();
        members.dedup();
        let index = members.iter().copied().collect();
        Ok(Self { n, members, index })
    }

    pub fn empty(n: usize) -> Self {
        Self::new(n, []).expect("empty family is valid")
    }

    /// Every vertex of `B_n`.
    pub fn all(n: usize) -> Result<Self> {
        if n > 24 {
            return Err(crate::error::size_error(format!("all of B_{n}"), 1 << 24));
        }
        Self::new(n, (0..1u64 << n).map(Vertex::from_bits))
    }

    /// All vertices whose weight lies in `weights`.
    pub fn levels(n: usize, weights: impl IntoIterator<Item = usize>) -> Result<Self> {
        let weights: Vec<usize> = weights.into_iter().collect();
        if n > 24 {
            return Err(crate::error::size_error(format!("levels of B_{n}"), 1 << 24));
        }
        Self::new(
            n,
            (0..1u64 << n)
                .map(Vertex::from_bits)
                .filter(|v| weights.contains(&v.weight())),
        )
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    /// Members in increasing bit order.
    pub fn members(&self) -> &[Vertex] {
        &self.members
    }

    pub fn iter(&self) -> impl Iterator<Item = Vertex> + '_ {
        self.members.iter().copied()
    }

    pub fn contains(&self, v: Vertex) -> bool {
        self.index.contains(&v)
    }

    pub fn with(&self, v: Vertex) -> Result<Self> {
        Self::new(self.n, self.iter().chain(std::iter::once(v)))
    }

    pub fn restrict(&self, band: &Band) -> Self {
        Self::new(self.n, self.iter().filter(|&v| band.admits(v))).expect("subfamily is valid")
    }

    pub fn to_json(&self) -> String {
        let file = FamilyFile {
            n: self.n,
            sets: self.members.iter().map(|v| v.elements()).collect(),
        };
        serde_json::to_string(&file).expect("family serializes")
    }

    /// Reads `{"n": int, "sets": [[int, ...], ...]}` with 1-based elements.
    pub fn from_json(text: &str) -> Result<Self> {
        let file: FamilyFile = serde_json::from_str(text)?;
        let members = file
            .sets
            .into_iter()
            .map(|s| Vertex::from_elements(file.n, s))
            .collect::<Result<Vec<_>>>()?;
        Self::new(file.n, members)
    }

    /// One lowercase hexadecimal bit encoding per line.
    pub fn to_hex_lines(&self) -> String {
        self.members.iter().map(|v| format!("{:x}\n", v.bits())).collect()
    }

    /// Reads the compact form; blank lines and `#` comments are skipped.
    pub fn from_hex_lines(text: &str, n: usize) -> Result<Self> {
        let members = text
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty() && !l.starts_with('#'))
            .map(|l| {
                let l = l.trim_start_matches("0x");
                u64::from_str_radix(l, 16)
                    .map(Vertex::from_bits)
                    .map_err(|e| Error::Parse(format!("bad hex line {l:?}: {e}")))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(n, members)
    }

    /// Reads either format, sniffing JSON by its leading brace.
    pub fn parse(text: &str, n_hint: Option<usize>) -> Result<Self> {
        if text.trim_start().starts_with('{') {
            Self::from_json(text)
        } else {
            let n = n_hint.ok_or_else(|| Error::Parse("hex family files need n".into()))?;
            Self::from_hex_lines(text, n)
        }
    }
}

impl Serialize for Family {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        FamilyFile {
            n: self.n,
            sets: self.members.iter().map(|v| v.elements()).collect(),
        }
        .serialize(s)
    }
}

impl Membership for Family {
    fn contains(&self, v: Vertex) -> bool {
        Family::contains(self, v)
    }
}

impl WideMembership for Family {
    fn contains_wide(&self, v: &WideSet) -> bool {
        v.to_vertex().is_some_and(|u| self.contains(u))
    }
}

/// Oracle family made of whole levels: membership depends on weight only.
#[derive(Clone, Debug)]
pub struct LevelOracle {
    weights: Vec<bool>,
}

impl LevelOracle {
    pub fn new(n: usize, weights: impl IntoIterator<Item = usize>) -> Self {
        let mut table = vec![false; n + 1];
        for w in weights {
            if w <= n {
                table[w] = true;
            }
        }
        Self { weights: table }
    }

    pub fn has_weight(&self, w: usize) -> bool {
        self.weights.get(w).copied().unwrap_or(false)
    }

    /// `(lowest, highest)` member weight, if any.
    pub fn weight_range(&self) -> Option<(usize, usize)> {
        let lo = self.weights.iter().position(|&b| b)?;
        let hi = self.weights.iter().rposition(|&b| b)?;
        Some((lo, hi))
    }
}

impl Membership for LevelOracle {
    fn contains(&self, v: Vertex) -> bool {
        self.has_weight(v.weight())
    }
}

impl WideMembership for LevelOracle {
    fn contains_wide(&self, v: &WideSet) -> bool {
        self.has_weight(v.weight())
    }
}
