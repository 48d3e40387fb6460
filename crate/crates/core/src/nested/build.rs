use std::collections::{BTreeMap, BTreeSet, HashMap};

use itertools::Itertools;
use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Zero};
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

use super::witness::{search_witness, Requirement, WitnessAssignment};
use crate::chains::{binomial, markers, ser_biguint, ser_rational, to_rational};
use crate::error::{Error, Result};
use crate::lattice::{
    check_witness_placement, enumerate_full_chains, factorial, in_forbidden_zone, Band, Direction, Family,
    FullChain, Vertex,
};

#[derive(Clone, Debug)]
pub struct NestedConfig {
    pub k: usize,
    pub h: usize,
    pub epsilon: BigRational,
    pub band: Band,
    pub chain_cap: usize,
    pub witness_budget: u64,
}

/// Class of a chain with respect to its bad-marker ratio.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum ChainClass {
    /// No markers left.
    #[serde(rename = "empty")]
    Empty,
    /// `b(M) / x(M) <= 1/C`: bad markers are dropped, the rest kept.
    #[serde(rename = "c1")]
    Sparse,
    /// `b(M) / x(M) > 1/C`: the chain loses every marker.
    #[serde(rename = "c2")]
    Dense,
}

/// Bad markers and classes of one iteration.
#[derive(Clone, Debug)]
pub struct Classification {
    pub witnesses: WitnessAssignment,
    /// Per chain, markers that are `d`-lower-bad relative to it for some `d`.
    pub lower_bad: Vec<Vec<Vertex>>,
    pub upper_bad: Vec<Vec<Vertex>>,
    pub classes: Vec<ChainClass>,
}

impl Classification {
    /// Union of lower and upper bad markers on chain `c`.
    pub fn bad(&self, c: usize) -> BTreeSet<Vertex> {
        self.lower_bad[c].iter().chain(&self.upper_bad[c]).copied().collect()
    }
}

/// Marker sets `X_i(M)` of one iteration, listed top down per chain.
#[derive(Clone, Debug)]
pub struct NestedFamilyState {
    pub iteration: usize,
    pub markers: Vec<Vec<Vertex>>,
    /// Absent on the last iteration, which is never refined.
    pub classification: Option<Classification>,
}

impl NestedFamilyState {
    /// `|L_i| = sum over chains of C(|X_i(M)|, k)`.
    pub fn marked_chains(&self, k: usize) -> BigUint {
        self.markers.iter().map(|m| binomial(m.len(), k)).sum()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct IterationReport {
    pub i: usize,
    #[serde(serialize_with = "ser_biguint")]
    pub marked_chains: BigUint,
    /// `(eps/k) n! (1 - i/(2h))`.
    #[serde(serialize_with = "ser_rational")]
    pub bound: BigRational,
    pub holds: bool,
    /// `(eps/k) n! (1 - i/(2k))`.
    #[serde(serialize_with = "ser_rational")]
    pub prose_bound: BigRational,
    pub prose_holds: bool,
    pub nonempty_chains: usize,
    pub sparse_chains: usize,
    pub dense_chains: usize,
    pub witnessed: usize,
}

#[derive(Clone, Debug)]
pub struct NestedRun {
    pub n: usize,
    pub k: usize,
    pub h: usize,
    pub epsilon: BigRational,
    pub band: Band,
    pub pool: Vec<Vertex>,
    pub chains: Vec<FullChain>,
    pub states: Vec<NestedFamilyState>,
    pub iterations: Vec<IterationReport>,
    /// `X_1(M)` equals the family members on `M`, for every chain.
    pub initial_matches_family: bool,
    /// Nonempty `X_{i+1}(M)` keeps at least `(1 - 1/(4kh))` of `X_i(M)`.
    pub shrink_holds: bool,
}

fn chain_label(c: &FullChain) -> Vec<usize> {
    c.order().iter().map(|&e| e as usize + 1).collect()
}

impl NestedRun {
    /// `L_{i+1}` is contained in `L_i` for every iteration.
    pub fn nested(&self) -> bool {
        self.states
            .windows(2)
            .all(|w| w[0].markers.iter().zip(&w[1].markers).all(|(a, b)| b.iter().all(|v| a.contains(v))))
    }

    /// Summary without per-chain rows.
    pub fn summary(&self) -> Value {
        json!({
            "n": self.n,
            "k": self.k,
            "h": self.h,
            "epsilon": self.epsilon.to_string(),
            "band": self.band,
            "pool_restricted": true,
            "pool_size": self.pool.len(),
            "initial_matches_family": self.initial_matches_family,
            "shrink_holds": self.shrink_holds,
            "nested": self.nested(),
            "iterations": self.iterations,
        })
    }

    /// Full state dump: per iteration and chain `x(M)`, `b(M)`, class and
    /// removed markers, plus the witness table.
    pub fn dump(&self) -> Value {
        let iterations: Vec<Value> = self
            .states
            .iter()
            .map(|s| {
                let chains: Vec<Value> = (0..self.chains.len())
                    .map(|c| {
                        let x = s.markers[c].len();
                        match &s.classification {
                            Some(cl) => {
                                let bad = cl.bad(c);
                                let removed: Vec<Vertex> = match cl.classes[c] {
                                    ChainClass::Sparse => s.markers[c].iter().copied().filter(|v| bad.contains(v)).collect(),
                                    _ => s.markers[c].clone(),
                                };
                                json!({
                                    "chain": chain_label(&self.chains[c]),
                                    "x": x,
                                    "b": bad.len(),
                                    "class": cl.classes[c],
                                    "removed": removed,
                                })
                            }
                            None => json!({ "chain": chain_label(&self.chains[c]), "x": x }),
                        }
                    })
                    .collect();
                let witnesses = s.classification.as_ref().map(|c| c.witnesses.table()).unwrap_or_default();
                json!({ "i": s.iteration, "chains": chains, "witnesses": witnesses })
            })
            .collect();
        let mut out = self.summary();
        out["states"] = Value::Array(iterations);
        out
    }
}

fn classify(markers: &[Vec<Vertex>], pool: &[Vertex], cfg: &NestedConfig) -> Result<Classification> {
    let k = cfg.k;
    let mut occurrences: BTreeMap<Vertex, Vec<(usize, usize)>> = BTreeMap::new();
    for (c, m) in markers.iter().enumerate() {
        for (idx, &v) in m.iter().enumerate() {
            occurrences.entry(v).or_default().push((c, idx));
        }
    }
    let keys: Vec<(Vertex, usize, Direction)> = occurrences
        .keys()
        .flat_map(|&v| (1..=k).flat_map(move |d| [(v, d, Direction::Down), (v, d, Direction::Up)]))
        .collect();
    let found: Vec<Option<Vec<Vertex>>> = keys
        .par_iter()
        .map(|&(v, d, dir)| {
            let mut reqs = BTreeSet::new();
            for &(c, idx) in &occurrences[&v] {
                let x = markers[c].len();
                let p = idx + 1;
                if p < d || x - p < k - d {
                    continue;
                }
                let (members, fixed) = match dir {
                    Direction::Down => (markers[c][idx + 1..].to_vec(), k - d),
                    Direction::Up => (markers[c][..idx].to_vec(), d - 1),
                };
                // every `fixed`-subset of `members` must meet the zone
                let need = members.len() + 1 - fixed;
                reqs.insert(Requirement { members, need });
            }
            let reqs: Vec<Requirement> = reqs.into_iter().collect();
            search_witness(v, dir, &cfg.band, &reqs, pool, cfg.h, cfg.witness_budget)
        })
        .collect::<Result<_>>()?;
    let mut witnesses = WitnessAssignment::new(cfg.band);
    for (&(v, d, dir), w) in keys.iter().zip(found) {
        if let Some(w) = w {
            witnesses.insert(v, d, dir, w)?;
        }
    }

    let c_const = 4 * k * cfg.h;
    let mut lower_bad = Vec::with_capacity(markers.len());
    let mut upper_bad = Vec::with_capacity(markers.len());
    let mut classes = Vec::with_capacity(markers.len());
    for m in markers {
        let x = m.len();
        let bad_in = |dir: Direction| -> Vec<Vertex> {
            m.iter()
                .enumerate()
                .filter(|&(idx, &v)| {
                    let p = idx + 1;
                    (1..=k).any(|d| p >= d && x - p >= k - d && witnesses.get(v, d, dir).is_some())
                })
                .map(|(_, &v)| v)
                .collect()
        };
        let lower = bad_in(Direction::Down);
        let upper = bad_in(Direction::Up);
        let b = lower.iter().chain(&upper).collect::<BTreeSet<_>>().len();
        classes.push(if x == 0 {
            ChainClass::Empty
        } else if b * c_const <= x {
            ChainClass::Sparse
        } else {
            ChainClass::Dense
        });
        lower_bad.push(lower);
        upper_bad.push(upper);
    }
    Ok(Classification {
        witnesses,
        lower_bad,
        upper_bad,
        classes,
    })
}

/// Runs the nested-family construction over every full chain of `B_n`.
///
/// `X_1(M)` is the set of family members on `M`. Each later `X_{i+1}(M)` drops
/// the bad markers of `M` when they make up at most a `1/(4kh)` fraction of
/// `X_i(M)`, and empties the chain otherwise. Witnesses come from `pool`.
pub fn build_nested(family: &Family, pool: &Family, cfg: &NestedConfig) -> Result<NestedRun> {
    let (k, h, n) = (cfg.k, cfg.h, family.n());
    if k == 0 || h == 0 {
        return Err(Error::Param("k and h must be positive".into()));
    }
    if pool.n() != n {
        return Err(Error::Param(format!("pool lives in B_{}, family in B_{n}", pool.n())));
    }
    let chains: Vec<FullChain> = enumerate_full_chains(n, cfg.chain_cap)?.collect();
    let pool: Vec<Vertex> = pool.iter().collect();
    let first: Vec<Vec<Vertex>> = chains.iter().map(|c| markers(c, family)).collect();
    let initial_matches_family = chains
        .iter()
        .zip(&first)
        .all(|(c, m)| c.vertices().into_iter().filter(|&v| family.contains(v)).eq(m.iter().copied()));

    let mut states = Vec::with_capacity(h);
    let mut current = first;
    for i in 1..=h {
        let classification = if i < h { Some(classify(&current, &pool, cfg)?) } else { None };
        let next = classification.as_ref().map(|cl| {
            current
                .iter()
                .enumerate()
                .map(|(c, m)| match cl.classes[c] {
                    ChainClass::Sparse => {
                        let bad = cl.bad(c);
                        m.iter().copied().filter(|v| !bad.contains(v)).collect()
                    }
                    _ => Vec::new(),
                })
                .collect::<Vec<Vec<Vertex>>>()
        });
        states.push(NestedFamilyState {
            iteration: i,
            markers: current,
            classification,
        });
        match next {
            Some(next) => current = next,
            None => break,
        }
    }

    let c_const = 4 * k * h;
    let shrink_holds = states.windows(2).all(|w| {
        w[0].markers
            .iter()
            .zip(&w[1].markers)
            .all(|(a, b)| b.is_empty() || b.len() * c_const >= a.len() * (c_const - 1))
    });

    let k_rat = BigRational::from_integer(BigInt::from(k));
    let base = &cfg.epsilon / &k_rat * to_rational(&factorial(n));
    let iterations = states
        .iter()
        .map(|s| {
            let i = s.iteration;
            let count = s.marked_chains(k);
            let count_rat = to_rational(&count);
            let frac = |den: usize| BigRational::one() - BigRational::new(BigInt::from(i), BigInt::from(2 * den));
            let bound = &base * frac(h);
            let prose_bound = &base * frac(k);
            let classes = s.classification.as_ref().map(|c| c.classes.as_slice()).unwrap_or(&[]);
            IterationReport {
                i,
                holds: count_rat >= bound,
                prose_holds: count_rat >= prose_bound,
                marked_chains: count,
                bound,
                prose_bound,
                nonempty_chains: s.markers.iter().filter(|m| !m.is_empty()).count(),
                sparse_chains: classes.iter().filter(|&&c| c == ChainClass::Sparse).count(),
                dense_chains: classes.iter().filter(|&&c| c == ChainClass::Dense).count(),
                witnessed: s.classification.as_ref().map_or(0, |c| c.witnesses.len()),
            }
        })
        .collect();

    Ok(NestedRun {
        n,
        k,
        h,
        epsilon: cfg.epsilon.clone(),
        band: cfg.band,
        pool,
        chains,
        states,
        iterations,
        initial_matches_family,
        shrink_holds,
    })
}

/// Goodness of every `(M, Q)` in `L_{i+1}` relative to `L_i`, re-derived from
/// the definition: explicit marked chains and every pool subset of size at
/// most `h`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct GoodnessReport {
    pub checked_pairs: u64,
    pub vertex_levels_examined: usize,
    pub violations: u64,
    pub holds: bool,
}

/// The `k`-subsets of `markers` having `v` as their `d`-th element.
fn pairs_at(markers: &[Vertex], v: Vertex, d: usize, k: usize) -> Vec<Vec<Vertex>> {
    let Some(idx) = markers.iter().position(|&u| u == v) else {
        return Vec::new();
    };
    let (above, below) = (&markers[..idx], &markers[idx + 1..]);
    let mut out = Vec::new();
    for head in above.iter().copied().combinations(d - 1) {
        for tail in below.iter().copied().combinations(k - d) {
            let mut q = head.clone();
            q.push(v);
            q.extend(tail);
            out.push(q);
        }
    }
    out
}

fn bad_by_definition(
    run: &NestedRun,
    prev: &[Vec<Vertex>],
    v: Vertex,
    d: usize,
    direction: Direction,
) -> bool {
    let qs: BTreeSet<Vec<Vertex>> = prev.iter().flat_map(|m| pairs_at(m, v, d, run.k)).collect();
    if qs.is_empty() {
        return false;
    }
    let candidates: Vec<Vertex> = run
        .pool
        .iter()
        .copied()
        .filter(|&s| run.band.admits(s) && check_witness_placement(v, &[s], direction).is_ok())
        .collect();
    (1..=run.h).any(|size| {
        candidates.iter().copied().combinations(size).any(|s| {
            qs.iter()
                .all(|q| q.iter().any(|&u| in_forbidden_zone(u, v, &s, direction, &run.band)))
        })
    })
}

pub fn verify_goodness(run: &NestedRun) -> GoodnessReport {
    let mut checked = 0u64;
    let mut violations = 0u64;
    let mut examined = 0;
    for w in run.states.windows(2) {
        let (prev, cur) = (&w[0].markers, &w[1].markers);
        let mut memo: HashMap<(Vertex, usize), bool> = HashMap::new();
        for m in cur {
            for q in m.iter().copied().combinations(run.k) {
                checked += 1;
                let bad = q.iter().enumerate().any(|(idx, &v)| {
                    *memo.entry((v, idx + 1)).or_insert_with(|| {
                        bad_by_definition(run, prev, v, idx + 1, Direction::Down)
                            || bad_by_definition(run, prev, v, idx + 1, Direction::Up)
                    })
                });
                if bad {
                    violations += 1;
                }
            }
        }
        examined += memo.len();
    }
    GoodnessReport {
        checked_pairs: checked,
        vertex_levels_examined: examined,
        violations,
        holds: violations == 0,
    }
}

impl Default for NestedConfig {
    fn default() -> Self {
        Self {
            k: 2,
            h: 2,
            epsilon: BigRational::zero(),
            band: Band::all(0),
            chain_cap: crate::lattice::DEFAULT_CHAIN_CAP,
            witness_budget: super::DEFAULT_WITNESS_BUDGET,
        }
    }
}
