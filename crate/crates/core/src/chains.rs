//! Marked chains: markers on a host chain, the marked-chain count and its
//! per-chain oracle, LYM sums, marker histograms and the density bound.

use std::collections::BTreeMap;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use serde::Serialize;

use crate::error::{size_error, Result};
use crate::lattice::{enumerate_full_chains, factorial, Family, FullChain, Membership, Vertex};

/// Default cap on the number of k-chains [`count_marked_chains`] walks.
pub const DEFAULT_KCHAIN_BUDGET: u64 = 100_000_000;

/// A host chain with a strictly nested marker chain on it (top to bottom).
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct MarkedChain {
    pub host: FullChain,
    pub markers: Vec<Vertex>,
}

/// Family members on `chain`, top to bottom. The length is `x(M)`.
pub fn markers<F: Membership + ?Sized>(chain: &FullChain, family: &F) -> Vec<Vertex> {
    chain.vertices().into_iter().filter(|&v| family.contains(v)).collect()
}

pub fn binomial(n: usize, k: usize) -> BigUint {
    if k > n {
        return BigUint::zero();
    }
    let k = k.min(n - k);
    let mut acc = BigUint::one();
    for i in 0..k {
        acc = acc * (n - i) / (i + 1);
    }
    acc
}

fn binomial_u64(n: u64, k: u64) -> u64 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1u64, |acc, i| acc * (n - i) / (i + 1))
}

pub fn to_rational(x: &BigUint) -> BigRational {
    BigRational::from_integer(BigInt::from(x.clone()))
}

/// `sum over F of 1 / C(n, |F|)`: the mean number of members on a uniform
/// full chain.
pub fn lym_sum(family: &Family) -> BigRational {
    let n = family.n();
    let mut per_weight = vec![0u64; n + 1];
    for v in family.iter() {
        per_weight[v.weight()] += 1;
    }
    per_weight
        .iter()
        .enumerate()
        .filter(|(_, &c)| c > 0)
        .map(|(w, &c)| BigRational::new(BigInt::from(c), BigInt::from(binomial(n, w))))
        .fold(BigRational::zero(), |a, b| a + b)
}

/// Number of `k`-marked chains with markers in `family`, summed over the
/// `k`-chains of the family via the number of hosts through each.
pub fn count_marked_chains(family: &Family, k: usize, budget: u64) -> Result<BigUint> {
    let n = family.n();
    if k == 0 {
        return Ok(factorial(n));
    }
    let mut members: Vec<Vertex> = family.members().to_vec();
    members.sort_by_key(|v| (std::cmp::Reverse(v.weight()), v.bits()));
    // below[i]: members strictly contained in members[i]
    let below: Vec<Vec<usize>> = members
        .iter()
        .map(|&a| {
            members
                .iter()
                .enumerate()
                .filter(|(_, &b)| b.is_proper_subset(a))
                .map(|(j, _)| j)
                .collect()
        })
        .collect();

    let facts: Vec<BigUint> = (0..=n).map(factorial).collect();
    let small = n <= 34;
    let facts_small: Vec<u128> = if small {
        facts.iter().map(|f| f.to_u128().expect("n <= 34")).collect()
    } else {
        Vec::new()
    };

    struct Walk<'a> {
        members: &'a [Vertex],
        below: &'a [Vec<usize>],
        facts: &'a [BigUint],
        facts_small: &'a [u128],
        small: bool,
        n: usize,
        k: usize,
        visited: u64,
        budget: u64,
        total: BigUint,
        pending: u128,
    }

    impl Walk<'_> {
        fn go(&mut self, chain: &mut Vec<usize>) -> bool {
            if chain.len() == self.k {
                self.visited += 1;
                if self.visited > self.budget {
                    return false;
                }
                let first = self.members[chain[0]].weight();
                let last = self.members[*chain.last().expect("k >= 1")].weight();
                if self.small {
                    let mut p = self.facts_small[self.n - first] * self.facts_small[last];
                    for w in chain.windows(2) {
                        p *= self.facts_small[self.members[w[0]].weight() - self.members[w[1]].weight()];
                    }
                    match self.pending.checked_add(p) {
                        Some(s) => self.pending = s,
                        None => {
                            self.total += self.pending;
                            self.pending = p;
                        }
                    }
                } else {
                    let mut p = &self.facts[self.n - first] * &self.facts[last];
                    for w in chain.windows(2) {
                        p *= &self.facts[self.members[w[0]].weight() - self.members[w[1]].weight()];
                    }
                    self.total += p;
                }
                return true;
            }
            let start = *chain.last().expect("seeded");
            for &next in &self.below[start] {
                chain.push(next);
                let ok = self.go(chain);
                chain.pop();
                if !ok {
                    return false;
                }
            }
            true
        }
    }

    let mut walk = Walk {
        members: &members,
        below: &below,
        facts: &facts,
        facts_small: &facts_small,
        small,
        n,
        k,
        visited: 0,
        budget,
        total: BigUint::zero(),
        pending: 0,
    };
    let mut chain = Vec::with_capacity(k);
    for first in 0..members.len() {
        chain.push(first);
        let ok = walk.go(&mut chain);
        chain.pop();
        if !ok {
            return Err(size_error(format!("{k}-chains of a family of size {}", family.len()), budget));
        }
    }
    let pending = walk.pending;
    Ok(walk.total + pending)
}

/// Reference count: `sum over all n! full chains M of C(x(M), k)`.
pub fn count_marked_chains_oracle<F: Membership + ?Sized>(family: &F, k: usize, n: usize, cap: usize) -> Result<BigUint> {
    let hist = marker_histogram(family, n, cap)?;
    Ok(hist
        .counts
        .iter()
        .map(|(&x, &c)| BigUint::from(binomial_u64(x as u64, k as u64)) * c)
        .sum())
}

/// `counts[i]` = number of full chains of `B_n` hosting exactly `i` members.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct MarkerHistogram {
    pub counts: BTreeMap<usize, u64>,
}

impl MarkerHistogram {
    pub fn total(&self) -> u64 {
        self.counts.values().sum()
    }

    /// `sum of i * C_i`.
    pub fn weighted_sum(&self) -> BigUint {
        self.counts.iter().map(|(&i, &c)| BigUint::from(i as u64) * c).sum()
    }
}

pub fn marker_histogram<F: Membership + ?Sized>(family: &F, n: usize, cap: usize) -> Result<MarkerHistogram> {
    let mut counts = BTreeMap::new();
    for chain in enumerate_full_chains(n, cap)? {
        let x = chain.vertices().into_iter().filter(|&v| family.contains(v)).count();
        *counts.entry(x).or_insert(0u64) += 1;
    }
    Ok(MarkerHistogram { counts })
}

/// Outcome of the density bound on one family.
///
/// The bound used is `(eps/k) * n!` under the hypothesis
/// `|F| >= (k - 1 + eps) * C(n, floor(n/2))`. The `printed_*` fields carry
/// the alternative reading with `k!` in place of `n!`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct DensityReport {
    pub n: usize,
    pub k: usize,
    #[serde(serialize_with = "ser_rational")]
    pub epsilon: BigRational,
    pub family_size: usize,
    #[serde(serialize_with = "ser_rational")]
    pub threshold: BigRational,
    pub hypothesis_met: bool,
    #[serde(serialize_with = "ser_biguint")]
    pub count: BigUint,
    #[serde(serialize_with = "ser_rational")]
    pub bound: BigRational,
    pub holds: bool,
    #[serde(serialize_with = "ser_rational")]
    pub printed_bound: BigRational,
    pub printed_holds: bool,
}

pub fn density_check(family: &Family, k: usize, epsilon: &BigRational, budget: u64) -> Result<DensityReport> {
    let n = family.n();
    let count = count_marked_chains(family, k, budget)?;
    let k_rat = BigRational::from_integer(BigInt::from(k));
    let threshold = (k_rat.clone() - BigRational::one() + epsilon) * to_rational(&binomial(n, n / 2));
    let size = BigRational::from_integer(BigInt::from(family.len()));
    let count_rat = to_rational(&count);
    let bound = epsilon / &k_rat * to_rational(&factorial(n));
    let printed_bound = epsilon / &k_rat * to_rational(&factorial(k));
    Ok(DensityReport {
        n,
        k,
        epsilon: epsilon.clone(),
        family_size: family.len(),
        hypothesis_met: size >= threshold,
        threshold,
        holds: count_rat >= bound,
        printed_holds: count_rat >= printed_bound,
        count,
        bound,
        printed_bound,
    })
}

pub(crate) fn ser_rational<S: serde::Serializer>(x: &BigRational, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&x.to_string())
}

pub(crate) fn ser_biguint<S: serde::Serializer>(x: &BigUint, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&x.to_string())
}

/// Parses `"p/q"` or an integer into an exact rational.
pub fn parse_rational(text: &str) -> Result<BigRational> {
    let bad = || crate::Error::Parse(format!("expected p/q, got {text:?}"));
    let (p, q) = match text.trim().split_once('/') {
        Some((p, q)) => (p.trim(), q.trim()),
        None => (text.trim(), "1"),
    };
    let p: BigInt = p.parse().map_err(|_| bad())?;
    let q: BigInt = q.parse().map_err(|_| bad())?;
    if q.is_zero() {
        return Err(bad());
    }
    Ok(BigRational::new(p, q))
}
