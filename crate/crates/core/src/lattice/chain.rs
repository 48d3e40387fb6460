use num_bigint::BigUint;
use num_traits::One;
use rand::seq::SliceRandom;
use rand::Rng;

use super::{Direction, Membership, Vertex, MAX_N};
use crate::error::{size_error, Error, Result};

/// Default cap on the order of a lattice whose full chains get enumerated.
pub const DEFAULT_CHAIN_CAP: usize = 10;

/// A maximal chain of `B_n`, or of the sublattice `D(anchor)` / `U(anchor)`.
///
/// Stored as the order in which elements leave the anchor (`Down`) or join it
/// (`Up`). Vertices are always reported top to bottom.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FullChain {
    anchor: Vertex,
    order: Vec<u8>,
    direction: Direction,
}

impl FullChain {
    /// `order` must list 0-based positions: those of `anchor` for `Down`, those
    /// of `[n] \ anchor` for `Up`, each exactly once.
    pub fn new(anchor: Vertex, order: Vec<u8>, direction: Direction, n: usize) -> Result<Self> {
        let expected = match direction {
            Direction::Down => anchor,
            Direction::Up => Vertex::from_bits(Vertex::full(n).bits() & !anchor.bits()),
        };
        let mut seen = 0u64;
        for &e in &order {
            if e as usize >= MAX_N || seen >> e & 1 == 1 {
                return Err(Error::Param(format!("chain order repeats or overflows at {e}")));
            }
            seen |= 1 << e;
        }
        if seen != expected.bits() {
            return Err(Error::Param("chain order is not a permutation of the free elements".into()));
        }
        Ok(Self { anchor, order, direction })
    }

    /// The full chain of `B_n` removing elements of `[n]` in `order`.
    pub fn of_lattice(order: Vec<u8>) -> Self {
        let n = order.len();
        Self {
            anchor: Vertex::full(n),
            order,
            direction: Direction::Down,
        }
    }

    pub fn anchor(&self) -> Vertex {
        self.anchor
    }

    pub fn direction(&self) -> Direction {
        self.direction
    }

    pub fn order(&self) -> &[u8] {
        &self.order
    }

    /// Number of vertices on the chain.
    pub fn len(&self) -> usize {
        self.order.len() + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Vertices from the top of the chain to its bottom.
    pub fn vertices(&self) -> Vec<Vertex> {
        let mut out = Vec::with_capacity(self.len());
        let mut cur = self.anchor;
        out.push(cur);
        for &e in &self.order {
            cur = match self.direction {
                Direction::Down => cur.without(e as usize),
                Direction::Up => cur.with(e as usize),
            };
            out.push(cur);
        }
        if self.direction == Direction::Up {
            out.reverse();
        }
        out
    }

    pub fn top(&self) -> Vertex {
        match self.direction {
            Direction::Down => self.anchor,
            Direction::Up => *self.vertices().first().expect("nonempty"),
        }
    }

    pub fn bottom(&self) -> Vertex {
        match self.direction {
            Direction::Down => *self.vertices().last().expect("nonempty"),
            Direction::Up => self.anchor,
        }
    }

    pub fn contains(&self, v: Vertex) -> bool {
        self.vertices().contains(&v)
    }
}

/// `n!` as an arbitrary-precision integer.
pub fn factorial(n: usize) -> BigUint {
    (1..=n as u64).fold(BigUint::one(), |acc, i| acc * i)
}

/// Lexicographic successor of a permutation, in place. `false` at the last one.
fn next_permutation(p: &mut [u8]) -> bool {
    if p.len() < 2 {
        return false;
    }
    let Some(i) = (0..p.len() - 1).rev().find(|&i| p[i] < p[i + 1]) else {
        return false;
    };
    let j = (i + 1..p.len()).rev().find(|&j| p[j] > p[i]).expect("successor exists");
    p.swap(i, j);
    p[i + 1..].reverse();
    true
}

struct Permutations {
    current: Option<Vec<u8>>,
}

impl Iterator for Permutations {
    type Item = Vec<u8>;

    fn next(&mut self) -> Option<Vec<u8>> {
        let out = self.current.clone()?;
        let cur = self.current.as_mut().expect("checked above");
        if !next_permutation(cur) {
            self.current = None;
        }
        Some(out)
    }
}

/// All `n!` full chains of `B_n`, in lexicographic order of removal sequence.
pub fn enumerate_full_chains(n: usize, cap: usize) -> Result<impl Iterator<Item = FullChain>> {
    if n > cap || n > 20 {
        return Err(size_error(format!("full-chain enumeration of B_{n}"), cap as u64));
    }
    let start: Vec<u8> = (0..n as u8).collect();
    Ok(Permutations { current: Some(start) }.map(FullChain::of_lattice))
}

/// All full chains of `D(anchor)` (`Down`) or `U(anchor)` (`Up`).
pub fn enumerate_sublattice_chains(
    anchor: Vertex,
    direction: Direction,
    n: usize,
    cap: usize,
) -> Result<impl Iterator<Item = FullChain>> {
    let free: Vec<u8> = match direction {
        Direction::Down => anchor.positions().map(|i| i as u8).collect(),
        Direction::Up => (0..n as u8).filter(|&i| !anchor.has(i as usize)).collect(),
    };
    if free.len() > cap || free.len() > 20 {
        return Err(size_error(
            format!("full-chain enumeration of a sublattice of order {}", free.len()),
            cap as u64,
        ));
    }
    Ok(Permutations { current: Some(free) }.map(move |order| FullChain {
        anchor,
        order,
        direction,
    }))
}

/// A uniformly random full chain of `D(anchor)` or `U(anchor)`.
pub fn sample_chain<R: Rng + ?Sized>(anchor: Vertex, direction: Direction, n: usize, rng: &mut R) -> FullChain {
    let mut free: Vec<u8> = match direction {
        Direction::Down => anchor.positions().map(|i| i as u8).collect(),
        Direction::Up => (0..n as u8).filter(|&i| !anchor.has(i as usize)).collect(),
    };
    free.shuffle(rng);
    FullChain {
        anchor,
        order: free,
        direction,
    }
}

/// Number of full chains of `B_n` through every vertex of the strictly
/// decreasing chain `q`.
pub fn chains_through_count(q: &[Vertex], n: usize) -> Result<BigUint> {
    if q.iter().any(|v| !v.fits(n)) {
        return Err(Error::Param(format!("marker outside B_{n}")));
    }
    if q.windows(2).any(|w| !w[1].is_proper_subset(w[0])) {
        return Err(Error::NotChain);
    }
    let Some((first, last)) = q.first().zip(q.last()) else {
        return Ok(factorial(n));
    };
    let mut count = factorial(n - first.weight()) * factorial(last.weight());
    for w in q.windows(2) {
        count *= factorial(w[0].weight() - w[1].weight());
    }
    Ok(count)
}

/// The `J`-indexed family members on `chain`, counted from the top (1-based).
/// Empty when the chain hosts fewer than `max(J)` members or `J` is not
/// strictly monotone.
pub fn subchain<F: Membership + ?Sized>(chain: &FullChain, family: &F, positions: &[usize]) -> Vec<Vertex> {
    let members: Vec<Vertex> = chain.vertices().into_iter().filter(|&v| family.contains(v)).collect();
    select_positions(&members, positions)
}

pub(crate) fn select_positions(members: &[Vertex], positions: &[usize]) -> Vec<Vertex> {
    let increasing = positions.windows(2).all(|w| w[0] < w[1]);
    let decreasing = positions.windows(2).all(|w| w[0] > w[1]);
    if positions.is_empty() || !(increasing || decreasing) || positions.contains(&0) {
        return Vec::new();
    }
    let max = *positions.iter().max().expect("nonempty");
    if max > members.len() {
        return Vec::new();
    }
    positions.iter().map(|&j| members[j - 1]).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::Family;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn set(elems: &[usize]) -> Vertex {
        Vertex::from_elements(64, elems.iter().copied()).unwrap()
    }

    #[test]
    fn small_enumerations() {
        assert_eq!(enumerate_full_chains(2, 10).unwrap().count(), 2);
        let chains: Vec<_> = enumerate_full_chains(3, 10).unwrap().collect();
        assert_eq!(chains.len(), 6);
        assert!(chains.iter().all(|c| c.vertices().len() == 4));
        assert!(enumerate_full_chains(11, 10).is_err());
    }

    #[test]
    fn per_vertex_chain_counts_in_b4() {
        let mut hits = std::collections::HashMap::new();
        for c in enumerate_full_chains(4, 10).unwrap() {
            for v in c.vertices() {
                *hits.entry(v).or_insert(0u64) += 1;
            }
        }
        let fact = |k: usize| (1..=k as u64).product::<u64>();
        for bits in 0..16u64 {
            let v = Vertex::from_bits(bits);
            assert_eq!(hits[&v], fact(v.weight()) * fact(4 - v.weight()));
        }
    }

    #[test]
    fn chain_vertices_down_and_up() {
        let c = FullChain::new(set(&[1, 2, 3]), vec![1, 0, 2], Direction::Down, 4).unwrap();
        assert_eq!(c.vertices(), vec![set(&[1, 2, 3]), set(&[1, 3]), set(&[3]), set(&[])]);
        let u = FullChain::new(set(&[2]), vec![2, 0], Direction::Up, 3).unwrap();
        assert_eq!(u.vertices(), vec![set(&[1, 2, 3]), set(&[2, 3]), set(&[2])]);
        assert_eq!(u.top(), set(&[1, 2, 3]));
        assert_eq!(u.bottom(), set(&[2]));
        assert!(FullChain::new(set(&[2]), vec![1], Direction::Up, 3).is_err());
    }

    #[test]
    fn sampling_is_seeded() {
        let mut a = ChaCha8Rng::seed_from_u64(9);
        let mut b = ChaCha8Rng::seed_from_u64(9);
        let v = set(&[1, 2]);
        assert_eq!(sample_chain(v, Direction::Down, 4, &mut a), sample_chain(v, Direction::Down, 4, &mut b));
        let trivial = sample_chain(Vertex::EMPTY, Direction::Down, 5, &mut a);
        assert_eq!(trivial.vertices(), vec![Vertex::EMPTY]);
    }

    #[test]
    fn chains_through_examples() {
        assert_eq!(chains_through_count(&[set(&[1, 2]), set(&[1])], 2).unwrap(), 1u32.into());
        assert_eq!(chains_through_count(&[set(&[1, 2]), set(&[])], 2).unwrap(), 2u32.into());
        assert_eq!(chains_through_count(&[set(&[1, 2]), set(&[1])], 3).unwrap(), 1u32.into());
        assert!(matches!(
            chains_through_count(&[set(&[1]), set(&[1, 2])], 3),
            Err(Error::NotChain)
        ));
        assert!(matches!(
            chains_through_count(&[set(&[1]), set(&[2])], 3),
            Err(Error::NotChain)
        ));
    }

    #[test]
    fn chains_through_matches_enumeration() {
        let q = [set(&[1, 2, 4]), set(&[4])];
        let brute = enumerate_full_chains(5, 10)
            .unwrap()
            .filter(|c| q.iter().all(|&v| c.contains(v)))
            .count();
        assert_eq!(chains_through_count(&q, 5).unwrap(), (brute as u64).into());
    }

    #[test]
    fn subchain_selection() {
        let c = FullChain::of_lattice(vec![0, 1, 2]);
        let f = Family::all(3).unwrap();
        // vertices: {1,2,3}, {2,3}, {3}, {}
        assert_eq!(subchain(&c, &f, &[1, 3]), vec![set(&[1, 2, 3]), set(&[3])]);
        assert_eq!(subchain(&c, &f, &[2]), vec![set(&[2, 3])]);
        assert_eq!(subchain(&c, &f, &[4, 2]), vec![set(&[]), set(&[2, 3])]);
        let two = Family::new(3, [set(&[2, 3]), set(&[])]).unwrap();
        assert!(subchain(&c, &two, &[1, 3]).is_empty());
        assert!(subchain(&c, &f, &[2, 2]).is_empty());
    }
}
