//! The Boolean lattice `B_n` for `n <= 64`, its central weight band, explicit
//! and oracle families, forbidden zones and full chains.

mod chain;
mod family;
mod wide;

pub use chain::{
    chains_through_count, enumerate_full_chains, enumerate_sublattice_chains, factorial,
    sample_chain, subchain, FullChain, DEFAULT_CHAIN_CAP,
};
pub use family::{Family, LevelOracle, Membership, WideMembership};
pub use wide::WideSet;

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{size_error, Error, Result};

pub const MAX_N: usize = 64;

/// Default cap on the number of vertices a zone or down/up set may enumerate.
pub const DEFAULT_VERTEX_CAP: u64 = 1 << 20;

/// A subset of `[n]` as characteristic bits; bit `i` stands for element `i + 1`.
#[derive(Clone, Copy, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Vertex(u64);

impl Vertex {
    pub const EMPTY: Vertex = Vertex(0);

    pub const fn from_bits(bits: u64) -> Self {
        Vertex(bits)
    }

    pub const fn bits(self) -> u64 {
        self.0
    }

    /// `[n]` itself.
    pub fn full(n: usize) -> Self {
        assert!(n <= MAX_N, "n = {n} exceeds {MAX_N}");
        if n == 64 {
            Vertex(u64::MAX)
        } else {
            Vertex((1u64 << n) - 1)
        }
    }

    /// Builds a vertex from 1-based ground-set elements.
    pub fn from_elements(n: usize, elements: impl IntoIterator<Item = usize>) -> Result<Self> {
        let mut bits = 0u64;
        for e in elements {
            if e == 0 || e > n {
                return Err(Error::Param(format!("element {e} outside [1, {n}]")));
            }
            bits |= 1 << (e - 1);
        }
        Ok(Vertex(bits))
    }

    pub fn weight(self) -> usize {
        self.0.count_ones() as usize
    }

    /// Membership of the 0-based position `i`.
    pub fn has(self, i: usize) -> bool {
        self.0 >> i & 1 == 1
    }

    pub fn with(self, i: usize) -> Self {
        Vertex(self.0 | 1 << i)
    }

    pub fn without(self, i: usize) -> Self {
        Vertex(self.0 & !(1 << i))
    }

    pub fn is_subset(self, other: Vertex) -> bool {
        self.0 & !other.0 == 0
    }

    pub fn is_proper_subset(self, other: Vertex) -> bool {
        self != other && self.is_subset(other)
    }

    pub fn comparable(self, other: Vertex) -> bool {
        self.is_subset(other) || other.is_subset(self)
    }

    pub fn fits(self, n: usize) -> bool {
        n >= MAX_N || self.0 >> n == 0
    }

    /// 0-based positions in increasing order.
    pub fn positions(self) -> impl Iterator<Item = usize> {
        crate::poset::bits(self.0)
    }

    /// 1-based ground-set elements in increasing order.
    pub fn elements(self) -> Vec<usize> {
        self.positions().map(|i| i + 1).collect()
    }
}

impl fmt::Debug for Vertex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl fmt::Display for Vertex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, e) in self.elements().into_iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{e}")?;
        }
        write!(f, "}}")
    }
}

impl Serialize for Vertex {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        self.elements().serialize(serializer)
    }
}

/// Direction of a down-set / up-set, a chain's construction, or a zone.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    /// Descendants; forbidden zone under a vertex.
    #[serde(alias = "below")]
    Down,
    /// Ancestors; forbidden zone above a vertex.
    #[serde(alias = "above")]
    Up,
}

impl Direction {
    pub fn label(self) -> &'static str {
        match self {
            Direction::Down => "lower",
            Direction::Up => "upper",
        }
    }
}

/// Closed real interval of admissible weights.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Band {
    pub lo: f64,
    pub hi: f64,
}

impl Band {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if lo.is_nan() || hi.is_nan() || lo > hi {
            return Err(Error::Param(format!("band [{lo}, {hi}] is empty")));
        }
        Ok(Band { lo, hi })
    }

    /// `[n/2 - 2 sqrt(n ln n), n/2 + 2 sqrt(n ln n)]`, natural log.
    pub fn central(n: usize) -> Self {
        let nf = n as f64;
        let half_width = 2.0 * (nf * nf.ln()).max(0.0).sqrt();
        Band {
            lo: nf / 2.0 - half_width,
            hi: nf / 2.0 + half_width,
        }
    }

    /// Every weight `0..=n`.
    pub fn all(n: usize) -> Self {
        Band { lo: 0.0, hi: n as f64 }
    }

    pub fn contains(&self, weight: usize) -> bool {
        let w = weight as f64;
        self.lo <= w && w <= self.hi
    }

    pub fn admits(&self, v: Vertex) -> bool {
        self.contains(v.weight())
    }
}

/// The default central band for `n >= 2`.
pub fn band_bounds(n: usize) -> Band {
    Band::central(n)
}

/// `D(v)` or `U(v)` including `v`, in increasing bit order.
pub fn down_up_set(v: Vertex, direction: Direction, n: usize, cap: u64) -> Result<Vec<Vertex>> {
    let free = match direction {
        Direction::Down => v.bits(),
        Direction::Up => Vertex::full(n).bits() & !v.bits(),
    };
    let size = 1u128 << free.count_ones();
    if size > cap as u128 {
        return Err(size_error(format!("{direction:?}-set of size {size}"), cap));
    }
    let mut out: Vec<Vertex> = submasks(free)
        .map(|m| match direction {
            Direction::Down => Vertex(m),
            Direction::Up => Vertex(v.bits() | m),
        })
        .collect();
    out.sort_unstable();
    Ok(out)
}

/// All submasks of `mask`, starting with `mask` itself and ending with 0.
pub(crate) fn submasks(mask: u64) -> impl Iterator<Item = u64> {
    let mut next = Some(mask);
    std::iter::from_fn(move || {
        let cur = next?;
        next = if cur == 0 { None } else { Some((cur - 1) & mask) };
        Some(cur)
    })
}

/// Checks the placement condition for a witness set: below a vertex the
/// witnesses avoid `U(v)`, above it they avoid `D(v)`.
pub fn check_witness_placement(v: Vertex, witnesses: &[Vertex], direction: Direction) -> Result<()> {
    let bad = match direction {
        Direction::Down => witnesses.iter().any(|&s| v.is_subset(s)),
        Direction::Up => witnesses.iter().any(|&s| s.is_subset(v)),
    };
    if bad {
        Err(Error::WitnessPlacement(match direction {
            Direction::Down => "up",
            Direction::Up => "down",
        }))
    } else {
        Ok(())
    }
}

/// Membership test for the forbidden zone `D*(v, S)` (or `U*(v, S)`).
pub fn in_forbidden_zone(w: Vertex, v: Vertex, witnesses: &[Vertex], direction: Direction, band: &Band) -> bool {
    let strictly_on_side = match direction {
        Direction::Down => w.is_proper_subset(v),
        Direction::Up => v.is_proper_subset(w),
    };
    strictly_on_side && band.admits(w) && witnesses.iter().any(|&s| w.comparable(s))
}

/// The forbidden zone of `witnesses` under (`Down`) or above (`Up`) `v`,
/// intersected with `band`, in increasing bit order.
pub fn forbidden_zone(
    v: Vertex,
    witnesses: &[Vertex],
    direction: Direction,
    n: usize,
    band: &Band,
    cap: u64,
) -> Result<Vec<Vertex>> {
    check_witness_placement(v, witnesses, direction)?;
    let side = down_up_set(v, direction, n, cap)?;
    Ok(side
        .into_iter()
        .filter(|&w| in_forbidden_zone(w, v, witnesses, direction, band))
        .collect())
}
