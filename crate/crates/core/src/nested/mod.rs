//! Bad vertices, witnesses and bad strings; zone-hit and bad-string
//! probability estimators; the iterated nested-family construction.
//!
//! Witness searches are pool-restricted: a witness is a subset of a supplied
//! pool of vertices, never an arbitrary subset of the band.

mod build;
mod witness;

pub use build::{
    build_nested, verify_goodness, ChainClass, Classification, GoodnessReport, IterationReport, NestedConfig,
    NestedFamilyState, NestedRun,
};
pub use witness::{
    bad_string_prob_mc, bad_string_test, find_witness, greedy_profile, is_bad_string, GreedyProfile, SwapWitness,
    WitnessAssignment, WitnessEntry, WitnessRule, DEFAULT_WITNESS_BUDGET,
};

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::ToPrimitive;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{size_error, Error, Result};
use crate::lattice::{Band, Direction, WideSet};

/// Trials per independently seeded Monte Carlo batch.
pub const MC_BATCH: u64 = 1000;

/// Largest number of free elements the exact zone-hit mode accepts.
pub const MAX_EXACT_FREE: usize = 22;

/// `27 h sqrt(n ln n) / n`.
pub fn gamma(n: usize, h: usize) -> f64 {
    let nf = n as f64;
    27.0 * h as f64 * (nf * nf.ln()).sqrt() / nf
}

/// A probability, exact or estimated.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Estimate {
    pub estimate: f64,
    /// Binomial standard error; zero in exact mode.
    pub stderr: f64,
    /// Monte Carlo trials; zero in exact mode.
    pub trials: u64,
    #[serde(serialize_with = "ser_opt_rational")]
    pub exact: Option<BigRational>,
}

impl Estimate {
    fn exact(hits: BigUint, total: BigUint) -> Self {
        let ratio = BigRational::new(BigInt::from(hits), BigInt::from(total.clone()));
        Self {
            estimate: ratio.to_f64().unwrap_or(f64::NAN),
            stderr: 0.0,
            trials: 0,
            exact: Some(ratio),
        }
    }

    pub(crate) fn from_hits(hits: u64, trials: u64) -> Self {
        let p = if trials == 0 { 0.0 } else { hits as f64 / trials as f64 };
        let stderr = if trials == 0 { 0.0 } else { (p * (1.0 - p) / trials as f64).sqrt() };
        Self {
            estimate: p,
            stderr,
            trials,
            exact: None,
        }
    }

    /// `estimate <= bound + sigmas * stderr`.
    pub fn within(&self, bound: f64, sigmas: f64) -> bool {
        self.estimate <= bound + sigmas * self.stderr
    }
}

fn ser_opt_rational<S: serde::Serializer>(x: &Option<BigRational>, s: S) -> std::result::Result<S::Ok, S::Error> {
    match x {
        Some(r) => s.serialize_str(&r.to_string()),
        None => s.serialize_none(),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ZoneMode {
    /// Exact over every full chain; `cap` bounds the number of free elements.
    Exact { cap: usize },
    MonteCarlo { trials: u64 },
}

/// Splits `trials` into seeded batches drawn from `rng`, runs them in
/// parallel and sums the hits in batch order.
pub(crate) fn run_batches<R, F>(trials: u64, rng: &mut R, batch: F) -> u64
where
    R: Rng + ?Sized,
    F: Fn(&mut ChaCha8Rng, u64) -> u64 + Sync,
{
    let batches = trials.div_ceil(MC_BATCH);
    let seeds: Vec<(u64, u64)> = (0..batches)
        .map(|b| (rng.gen::<u64>(), MC_BATCH.min(trials - b * MC_BATCH)))
        .collect();
    seeds
        .par_iter()
        .map(|&(seed, size)| batch(&mut ChaCha8Rng::seed_from_u64(seed), size))
        .collect::<Vec<_>>()
        .into_iter()
        .sum()
}

/// Per-witness counters `a = |w \ s|`, `b = |s \ w|` along a walk from `v`;
/// `w` is comparable with `s` exactly when one of them is zero.
struct ZoneWalk {
    free: Vec<usize>,
    in_witness: Vec<Vec<bool>>,
    start: Vec<(usize, usize)>,
    weight0: usize,
    direction: Direction,
    band: Band,
}

impl ZoneWalk {
    fn new(v: &WideSet, witnesses: &[WideSet], direction: Direction, band: &Band) -> Result<Self> {
        let misplaced = match direction {
            Direction::Down => witnesses.iter().any(|s| v.is_subset(s)),
            Direction::Up => witnesses.iter().any(|s| s.is_subset(v)),
        };
        if misplaced {
            return Err(Error::WitnessPlacement(match direction {
                Direction::Down => "up",
                Direction::Up => "down",
            }));
        }
        let free = match direction {
            Direction::Down => v.positions(),
            Direction::Up => v.complement_positions(),
        };
        let in_witness = witnesses
            .iter()
            .map(|s| free.iter().map(|&e| s.contains(e)).collect())
            .collect();
        let start = witnesses.iter().map(|s| (v.difference_len(s), s.difference_len(v))).collect();
        Ok(Self {
            free,
            in_witness,
            start,
            weight0: v.weight(),
            direction,
            band: *band,
        })
    }

    fn weight_after(&self, steps: usize) -> usize {
        match self.direction {
            Direction::Down => self.weight0 - steps,
            Direction::Up => self.weight0 + steps,
        }
    }

    /// Whether the walk can still reach the band after `steps` steps.
    fn band_reachable(&self, steps: usize) -> bool {
        let w = self.weight_after(steps) as f64;
        match self.direction {
            Direction::Down => w >= self.band.lo,
            Direction::Up => w <= self.band.hi,
        }
    }

    /// Applies moving free element `j` to the counters.
    fn step(&self, counters: &mut [(usize, usize)], j: usize) {
        for (c, member) in counters.iter_mut().zip(&self.in_witness) {
            match (self.direction, member[j]) {
                (Direction::Down, true) => c.1 += 1,
                (Direction::Down, false) => c.0 -= 1,
                (Direction::Up, true) => c.1 -= 1,
                (Direction::Up, false) => c.0 += 1,
            }
        }
    }

    fn hit(&self, counters: &[(usize, usize)], steps: usize) -> bool {
        self.band.contains(self.weight_after(steps)) && counters.iter().any(|&(a, b)| a == 0 || b == 0)
    }

    /// Counts removal (addition) orders meeting the zone, by dynamic
    /// programming over the set of elements already moved.
    fn exact(&self, cap: usize) -> Result<Estimate> {
        let m = self.free.len();
        if m > cap.min(MAX_EXACT_FREE) {
            return Err(size_error(format!("exact zone walk over {m} free elements"), cap.min(MAX_EXACT_FREE) as u64));
        }
        let fact: Vec<u128> = (0..=m as u128).scan(1u128, |acc, i| {
            if i > 0 {
                *acc *= i;
            }
            Some(*acc)
        })
        .collect();
        let masks: Vec<(u32, u32)> = self
            .in_witness
            .iter()
            .map(|member| {
                let inside = member.iter().enumerate().filter(|(_, &b)| b).fold(0u32, |acc, (j, _)| acc | 1 << j);
                (inside, ((1u32 << m) - 1) & !inside)
            })
            .collect();
        let hit_at = |moved: u32| -> bool {
            let steps = moved.count_ones() as usize;
            if !self.band.contains(self.weight_after(steps)) {
                return false;
            }
            self.start.iter().zip(&masks).any(|(&(a0, b0), &(inside, outside))| {
                let (a, b) = match self.direction {
                    Direction::Down => (
                        a0 - (moved & outside).count_ones() as usize,
                        b0 + (moved & inside).count_ones() as usize,
                    ),
                    Direction::Up => (
                        a0 + (moved & outside).count_ones() as usize,
                        b0 - (moved & inside).count_ones() as usize,
                    ),
                };
                a == 0 || b == 0
            })
        };
        let full = (1usize << m) - 1;
        let mut hits = vec![0u128; full + 1];
        for moved in (0..full).rev() {
            let remaining = m - moved.count_ones() as usize;
            let mut total = 0u128;
            for j in 0..m {
                if moved >> j & 1 == 0 {
                    let next = moved | 1 << j;
                    total += if hit_at(next as u32) { fact[remaining - 1] } else { hits[next] };
                }
            }
            hits[moved] = total;
        }
        Ok(Estimate::exact(BigUint::from(hits[0]), BigUint::from(fact[m])))
    }

    fn trial<R: Rng + ?Sized>(&self, rng: &mut R, order: &mut [usize], counters: &mut Vec<(usize, usize)>) -> bool {
        counters.clear();
        counters.extend_from_slice(&self.start);
        let m = order.len();
        for t in 0..m {
            if !self.band_reachable(t + 1) {
                return false;
            }
            let pick = rng.gen_range(t..m);
            order.swap(t, pick);
            self.step(counters, order[t]);
            if self.hit(counters, t + 1) {
                return true;
            }
        }
        false
    }
}

/// Probability that a uniform full chain of `D(v)` (`Down`) or `U(v)` (`Up`)
/// meets the forbidden zone of `witnesses` restricted to `band`.
pub fn zone_hit_prob<R: Rng + ?Sized>(
    v: &WideSet,
    witnesses: &[WideSet],
    direction: Direction,
    band: &Band,
    mode: ZoneMode,
    rng: &mut R,
) -> Result<Estimate> {
    let walk = ZoneWalk::new(v, witnesses, direction, band)?;
    if witnesses.is_empty() {
        return Ok(match mode {
            ZoneMode::Exact { .. } => Estimate::exact(BigUint::from(0u8), BigUint::from(1u8)),
            ZoneMode::MonteCarlo { trials } => Estimate::from_hits(0, trials),
        });
    }
    match mode {
        ZoneMode::Exact { cap } => walk.exact(cap),
        ZoneMode::MonteCarlo { trials } => {
            let hits = run_batches(trials, rng, |rng, size| {
                let mut order: Vec<usize> = (0..walk.free.len()).collect();
                let mut counters = Vec::with_capacity(walk.start.len());
                (0..size).filter(|_| walk.trial(rng, &mut order, &mut counters)).count() as u64
            });
            Ok(Estimate::from_hits(hits, trials))
        }
    }
}
