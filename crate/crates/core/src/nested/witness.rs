use std::collections::BTreeMap;

use rand::Rng;
use serde::Serialize;

use super::{run_batches, Estimate};
use crate::chains::MarkedChain;
use crate::error::{size_error, Error, Result};
use crate::lattice::{
    check_witness_placement, in_forbidden_zone, subchain, Band, Direction, FullChain, Membership, Vertex,
    WideMembership, WideSet,
};

/// Default cap on search nodes per witness search.
pub const DEFAULT_WITNESS_BUDGET: u64 = 10_000_000;

/// The fixed witness of each bad `(vertex, level, direction)`, relative to
/// one band.
#[derive(Clone, Debug, PartialEq)]
pub struct WitnessAssignment {
    band: Band,
    entries: BTreeMap<(Vertex, usize, Direction), Vec<Vertex>>,
}

/// One row of a witness table.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct WitnessEntry {
    pub vertex: Vertex,
    pub d: usize,
    pub direction: Direction,
    pub witness_set: Vec<Vertex>,
}

impl WitnessAssignment {
    pub fn new(band: Band) -> Self {
        Self {
            band,
            entries: BTreeMap::new(),
        }
    }

    pub fn band(&self) -> &Band {
        &self.band
    }

    /// Fixes `witness` for `(v, d, direction)`, replacing any earlier one.
    pub fn insert(&mut self, v: Vertex, d: usize, direction: Direction, witness: Vec<Vertex>) -> Result<()> {
        check_witness_placement(v, &witness, direction)?;
        self.entries.insert((v, d, direction), witness);
        Ok(())
    }

    pub fn get(&self, v: Vertex, d: usize, direction: Direction) -> Option<&[Vertex]> {
        self.entries.get(&(v, d, direction)).map(Vec::as_slice)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn table(&self) -> Vec<WitnessEntry> {
        self.entries
            .iter()
            .map(|(&(vertex, d, direction), w)| WitnessEntry {
                vertex,
                d,
                direction,
                witness_set: w.clone(),
            })
            .collect()
    }
}

/// At least `need` of `members` must fall in the zone.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub(crate) struct Requirement {
    pub members: Vec<Vertex>,
    pub need: usize,
}

fn popcount_and(a: &[u64], b: &[u64]) -> usize {
    a.iter().zip(b).map(|(x, y)| (x & y).count_ones() as usize).sum()
}

fn or_into(acc: &mut [u64], other: &[u64]) {
    for (a, b) in acc.iter_mut().zip(other) {
        *a |= b;
    }
}

/// First subset of `pool` in (size, lexicographic) order, of size at most
/// `h`, whose zone under (above) `v` satisfies every requirement.
pub(crate) fn search_witness(
    v: Vertex,
    direction: Direction,
    band: &Band,
    requirements: &[Requirement],
    pool: &[Vertex],
    h: usize,
    budget: u64,
) -> Result<Option<Vec<Vertex>>> {
    if requirements.is_empty() || requirements.iter().any(|r| r.need > r.members.len()) {
        return Ok(None);
    }
    let on_side = |w: Vertex| match direction {
        Direction::Down => w.is_proper_subset(v),
        Direction::Up => v.is_proper_subset(w),
    };
    let mut universe: Vec<Vertex> = requirements
        .iter()
        .flat_map(|r| r.members.iter().copied())
        .filter(|&w| on_side(w) && band.admits(w))
        .collect();
    universe.sort_unstable();
    universe.dedup();
    let words = universe.len().div_ceil(64).max(1);
    let mask_of = |keep: &dyn Fn(Vertex) -> bool| -> Vec<u64> {
        let mut m = vec![0u64; words];
        for (i, &u) in universe.iter().enumerate() {
            if keep(u) {
                m[i / 64] |= 1 << (i % 64);
            }
        }
        m
    };
    let reqs: Vec<(Vec<u64>, usize)> = requirements
        .iter()
        .map(|r| (mask_of(&|u| r.members.contains(&u)), r.need))
        .collect();
    let satisfied = |cov: &[u64]| reqs.iter().all(|(m, need)| popcount_and(cov, m) >= *need);
    let full = mask_of(&|_| true);
    if !satisfied(&full) {
        return Ok(None);
    }

    // Candidates whose coverage repeats an earlier one, or is empty, never
    // appear in the first witness.
    let mut cands: Vec<(Vertex, Vec<u64>)> = Vec::new();
    for &s in pool {
        if !band.admits(s) || check_witness_placement(v, &[s], direction).is_err() {
            continue;
        }
        let cover = mask_of(&|u| u.comparable(s));
        if cover.iter().all(|&w| w == 0) || cands.iter().any(|(_, c)| *c == cover) {
            continue;
        }
        cands.push((s, cover));
    }
    let mut suffix = vec![vec![0u64; words]; cands.len() + 1];
    for i in (0..cands.len()).rev() {
        suffix[i] = suffix[i + 1].clone();
        or_into(&mut suffix[i], &cands[i].1);
    }

    struct Dfs<'a> {
        cands: &'a [(Vertex, Vec<u64>)],
        suffix: &'a [Vec<u64>],
        satisfied: &'a dyn Fn(&[u64]) -> bool,
        nodes: u64,
        budget: u64,
    }
    impl Dfs<'_> {
        fn go(&mut self, size: usize, start: usize, chosen: &mut Vec<usize>, cov: &[u64]) -> Result<bool> {
            self.nodes += 1;
            if self.nodes > self.budget {
                return Err(size_error("witness search nodes", self.budget));
            }
            if chosen.len() == size {
                return Ok((self.satisfied)(cov));
            }
            let slots = size - chosen.len();
            for j in start..=self.cands.len().saturating_sub(slots) {
                let mut reach = cov.to_vec();
                or_into(&mut reach, &self.suffix[j]);
                if !(self.satisfied)(&reach) {
                    break;
                }
                let mut next = cov.to_vec();
                or_into(&mut next, &self.cands[j].1);
                chosen.push(j);
                if self.go(size, j + 1, chosen, &next)? {
                    return Ok(true);
                }
                chosen.pop();
            }
            Ok(false)
        }
    }

    let mut dfs = Dfs {
        cands: &cands,
        suffix: &suffix,
        satisfied: &satisfied,
        nodes: 0,
        budget,
    };
    for size in 1..=h.min(cands.len()) {
        let mut chosen = Vec::with_capacity(size);
        if dfs.go(size, 0, &mut chosen, &vec![0u64; words])? {
            return Ok(Some(chosen.into_iter().map(|j| cands[j].0).collect()));
        }
    }
    Ok(None)
}

/// First pool subset of size at most `h` that witnesses `v` as `d`-lower-bad
/// (`Down`) or `d`-upper-bad (`Up`) relative to `pairs`.
///
/// Only pairs whose `d`-th marker (1-based, top down) is `v` are considered.
/// Absent when no such pair exists or no pool subset works.
pub fn find_witness(
    v: Vertex,
    d: usize,
    pairs: &[MarkedChain],
    pool: &[Vertex],
    h: usize,
    direction: Direction,
    band: &Band,
) -> Result<Option<Vec<Vertex>>> {
    if d == 0 {
        return Err(Error::Param("levels are 1-based".into()));
    }
    let requirements: Vec<Requirement> = pairs
        .iter()
        .filter(|p| p.markers.get(d - 1) == Some(&v))
        .map(|p| Requirement {
            members: match direction {
                Direction::Down => p.markers[d..].to_vec(),
                Direction::Up => p.markers[..d - 1].to_vec(),
            },
            need: 1,
        })
        .collect();
    search_witness(v, direction, band, &requirements, pool, h, DEFAULT_WITNESS_BUDGET)
}

/// Whether `string` alternates fixed-witness vertices and hits of their
/// zones: `x_1 > y_1 > ...` for `Down`, `x_1 < y_1 < ...` for `Up`.
pub fn is_bad_string(string: &[Vertex], w: &WitnessAssignment, d: usize, direction: Direction) -> bool {
    !string.is_empty()
        && string.len().is_multiple_of(2)
        && string.chunks(2).all(|pair| {
            w.get(pair[0], d, direction)
                .is_some_and(|s| in_forbidden_zone(pair[1], pair[0], s, direction, w.band()))
        })
        && string.windows(2).all(|p| match direction {
            Direction::Down => p[1].is_proper_subset(p[0]),
            Direction::Up => p[0].is_proper_subset(p[1]),
        })
}

/// Whether the `positions`-selected members of `x_view` on `chain` form a
/// `d`-lower-bad (`Down`, increasing positions) or `d`-upper-bad (`Up`,
/// decreasing positions) string. Positions are 1-based from the top.
pub fn bad_string_test<X: Membership + ?Sized>(
    chain: &FullChain,
    x_view: &X,
    positions: &[usize],
    w: &WitnessAssignment,
    d: usize,
    direction: Direction,
) -> bool {
    let matching = match direction {
        Direction::Down => positions.windows(2).all(|p| p[0] < p[1]),
        Direction::Up => positions.windows(2).all(|p| p[0] > p[1]),
    };
    if !matching || positions.is_empty() || positions.len() % 2 == 1 {
        return false;
    }
    let string = subchain(chain, x_view, positions);
    string.len() == positions.len() && is_bad_string(&string, w, d, direction)
}

/// Greedy bad string of a chain and the positions locating it.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct GreedyProfile {
    pub string: Vec<Vertex>,
    /// 1-based positions among the members, counted from the top.
    pub profile: Vec<usize>,
}

/// Scans the members of `x_view` on `chain` (top down for `Down`, bottom up
/// for `Up`): each vertex that is `d`-bad relative to the chain is paired
/// with the first later member inside its zone.
///
/// A member is bad relative to the chain when it has a fixed witness and
/// sits where a `k`-chain of members can have it as `d`-th element.
pub fn greedy_profile<X: Membership + ?Sized>(
    chain: &FullChain,
    x_view: &X,
    w: &WitnessAssignment,
    d: usize,
    k: usize,
    direction: Direction,
) -> Result<GreedyProfile> {
    let members: Vec<Vertex> = chain.vertices().into_iter().filter(|&v| x_view.contains(v)).collect();
    let x = members.len();
    let scan: Vec<usize> = match direction {
        Direction::Down => (0..x).collect(),
        Direction::Up => (0..x).rev().collect(),
    };
    let bad = |idx: usize| {
        let p = idx + 1;
        p >= d && x - p + d >= k && w.get(members[idx], d, direction).is_some()
    };
    let mut out = GreedyProfile::default();
    let mut cursor = 0;
    while let Some(offset) = scan[cursor..].iter().position(|&i| bad(i)) {
        let xi = scan[cursor + offset];
        let witness = w.get(members[xi], d, direction).expect("bad vertices have witnesses");
        let after = cursor + offset + 1;
        let Some(hit) = scan[after..]
            .iter()
            .position(|&j| in_forbidden_zone(members[j], members[xi], witness, direction, w.band()))
        else {
            return Err(Error::IncompleteString { position: xi + 1 });
        };
        let yi = scan[after + hit];
        out.string.extend([members[xi], members[yi]]);
        out.profile.extend([xi + 1, yi + 1]);
        cursor = after + hit + 1;
    }
    Ok(out)
}

/// Fixed witnesses for vertices of large lattices, given by a rule.
pub trait WitnessRule: Sync {
    /// The witness of `x` at level `d`, or `None` when `x` is not bad.
    fn witness(&self, x: &WideSet, d: usize, direction: Direction) -> Option<Vec<WideSet>>;
}

/// Every vertex is bad, witnessed by one swap of itself: drop its least
/// element, add the least element it lacks. The swap has the same weight, so
/// it lies outside both `U(x)` and `D(x)`.
#[derive(Clone, Copy, Debug, Default)]
pub struct SwapWitness;

impl WitnessRule for SwapWitness {
    fn witness(&self, x: &WideSet, _d: usize, _direction: Direction) -> Option<Vec<WideSet>> {
        let out = *x.positions().first()?;
        let inn = *x.complement_positions().first()?;
        let mut s = x.clone();
        s.remove(out);
        s.insert(inn);
        Some(vec![s])
    }
}

/// Monte Carlo estimate of the probability that the `positions`-selected
/// members on a uniform full chain of `D(v)` (`Down`) or `U(v)` (`Up`) form a
/// bad string under `rule`.
///
/// Chains are walked lazily away from `v`; positions are 1-based and counted
/// from `v`, so they increase in both directions.
#[allow(clippy::too_many_arguments)]
pub fn bad_string_prob_mc<X, W, R>(
    v: &WideSet,
    positions: &[usize],
    x_oracle: &X,
    rule: &W,
    d: usize,
    direction: Direction,
    band: &Band,
    trials: u64,
    rng: &mut R,
) -> Result<Estimate>
where
    X: WideMembership + Sync + ?Sized,
    W: WitnessRule + ?Sized,
    R: Rng + ?Sized,
{
    if positions.is_empty() || positions.len() % 2 == 1 || positions.contains(&0) {
        return Err(Error::Param("positions must be a nonempty even-length 1-based sequence".into()));
    }
    if !positions.windows(2).all(|p| p[0] < p[1]) {
        return Err(Error::Param("positions must increase away from the anchor".into()));
    }
    let wanted = *positions.last().expect("nonempty");
    let free = match direction {
        Direction::Down => v.positions(),
        Direction::Up => v.complement_positions(),
    };
    let in_zone = |y: &WideSet, x: &WideSet, s: &[WideSet]| {
        let beyond = match direction {
            Direction::Down => y.is_proper_subset(x),
            Direction::Up => x.is_proper_subset(y),
        };
        beyond && band.contains(y.weight()) && s.iter().any(|t| y.comparable(t))
    };
    let trial = |rng: &mut rand_chacha::ChaCha8Rng, order: &mut Vec<usize>| -> bool {
        let mut cur = v.clone();
        let mut found: Vec<WideSet> = Vec::with_capacity(positions.len());
        let mut count = 0;
        let mut step = 0;
        loop {
            if x_oracle.contains_wide(&cur) {
                count += 1;
                if positions.contains(&count) {
                    found.push(cur.clone());
                }
                if count == wanted {
                    break;
                }
            }
            if step == order.len() {
                return false;
            }
            let pick = rng.gen_range(step..order.len());
            order.swap(step, pick);
            match direction {
                Direction::Down => cur.remove(order[step]),
                Direction::Up => cur.insert(order[step]),
            }
            step += 1;
        }
        found.chunks(2).all(|pair| {
            rule.witness(&pair[0], d, direction)
                .is_some_and(|s| in_zone(&pair[1], &pair[0], &s))
        })
    };
    let hits = run_batches(trials, rng, |rng, size| {
        let mut order = free.clone();
        (0..size).filter(|_| trial(rng, &mut order)).count() as u64
    });
    Ok(Estimate::from_hits(hits, trials))
}
