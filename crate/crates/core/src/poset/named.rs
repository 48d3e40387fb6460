use std::fmt;
use std::str::FromStr;

use super::Poset;
use crate::error::{Error, Result};

/// The posets that come up repeatedly. Elements are numbered lower level
/// first, index order within a level.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NamedPoset {
    /// `k` elements in a single chain.
    Chain(usize),
    /// `A` below each of `B_1..B_k`.
    Fork(usize),
    /// `A_1, A_2` each below both of `B_1, B_2`.
    Butterfly,
    /// `A_1..A_r` each below every one of `B_1..B_s`.
    CompleteBipartite(usize, usize),
    /// `x_1..x_m` and `y_1..y_m` with `x_i < y_j` exactly when `j >= i`.
    Staircase(usize),
}

impl NamedPoset {
    pub fn build(self) -> Result<Poset> {
        match self {
            NamedPoset::Chain(k) => {
                if k == 0 {
                    return Err(Error::Param("chain needs k >= 1".into()));
                }
                let labels = (0..k)
                    .map(|i| {
                        if k <= 26 {
                            ((b'a' + i as u8) as char).to_string()
                        } else {
                            format!("c{}", i + 1)
                        }
                    })
                    .collect();
                let pairs: Vec<_> = (1..k).map(|i| (i - 1, i)).collect();
                Poset::with_labels(labels, &pairs)
            }
            NamedPoset::Fork(k) => {
                if k == 0 {
                    return Err(Error::Param("fork needs k >= 1".into()));
                }
                let mut labels = vec!["A".to_string()];
                labels.extend((1..=k).map(|i| format!("B{i}")));
                let pairs: Vec<_> = (1..=k).map(|i| (0, i)).collect();
                Poset::with_labels(labels, &pairs)
            }
            NamedPoset::Butterfly => two_level(2, 2),
            NamedPoset::CompleteBipartite(r, s) => {
                if r < 2 || s < 2 {
                    return Err(Error::Param("K_rs needs r, s >= 2".into()));
                }
                two_level(r, s)
            }
            NamedPoset::Staircase(m) => {
                if m == 0 {
                    return Err(Error::Param("H_m needs m >= 1".into()));
                }
                let mut labels: Vec<String> = (1..=m).map(|i| format!("x{i}")).collect();
                labels.extend((1..=m).map(|j| format!("y{j}")));
                let pairs: Vec<_> = (0..m)
                    .flat_map(|i| (i..m).map(move |j| (i, m + j)))
                    .collect();
                Poset::with_labels(labels, &pairs)
            }
        }
    }
}

fn two_level(r: usize, s: usize) -> Result<Poset> {
    let mut labels: Vec<String> = (1..=r).map(|i| format!("A{i}")).collect();
    labels.extend((1..=s).map(|j| format!("B{j}")));
    let pairs: Vec<_> = (0..r).flat_map(|i| (0..s).map(move |j| (i, r + j))).collect();
    Poset::with_labels(labels, &pairs)
}

impl fmt::Display for NamedPoset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NamedPoset::Chain(k) => write!(f, "chain{k}"),
            NamedPoset::Fork(k) => write!(f, "fork{k}"),
            NamedPoset::Butterfly => write!(f, "butterfly"),
            NamedPoset::CompleteBipartite(r, s) => write!(f, "k{r},{s}"),
            NamedPoset::Staircase(m) => write!(f, "hm{m}"),
        }
    }
}

/// Accepts `chainK`, `pK`, `forkK`, `vK`, `butterfly`, `kR,S`, `hmM`.
impl FromStr for NamedPoset {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim().to_ascii_lowercase();
        let num = |rest: &str| {
            rest.parse::<usize>()
                .map_err(|_| Error::Parse(format!("bad poset parameter in {s:?}")))
        };
        if s == "butterfly" {
            return Ok(NamedPoset::Butterfly);
        }
        if let Some(rest) = s.strip_prefix("chain") {
            return Ok(NamedPoset::Chain(num(rest)?));
        }
        if let Some(rest) = s.strip_prefix("fork") {
            return Ok(NamedPoset::Fork(num(rest)?));
        }
        if let Some(rest) = s.strip_prefix("hm") {
            return Ok(NamedPoset::Staircase(num(rest)?));
        }
        if let Some(rest) = s.strip_prefix('k') {
            let (r, t) = rest
                .split_once(',')
                .ok_or_else(|| Error::Parse(format!("expected kR,S, got {s:?}")))?;
            return Ok(NamedPoset::CompleteBipartite(num(r)?, num(t)?));
        }
        if let Some(rest) = s.strip_prefix('p') {
            return Ok(NamedPoset::Chain(num(rest)?));
        }
        if let Some(rest) = s.strip_prefix('v') {
            return Ok(NamedPoset::Fork(num(rest)?));
        }
        Err(Error::Parse(format!("unknown poset name {s:?}")))
    }
}
