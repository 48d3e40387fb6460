//! Leaf-interval removal down to a single chain.

use serde::Serialize;

use super::{bits, Poset};
use crate::error::{Error, Result};

/// Where the removed interval sits relative to its anchor.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    /// `I = [leaf, anchor]`: the leaf is a minimal element below the anchor.
    Below,
    /// `I = [anchor, leaf]`: the leaf is a maximal element above the anchor.
    Above,
}

/// One removal `H_{i+1} = H_i \ (I - {anchor})`. All indices refer to the
/// elements of the poset handed to [`decompose`].
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct DecompositionStep {
    /// The chain interval `I`, listed top to bottom.
    pub interval: Vec<usize>,
    pub anchor: usize,
    pub leaf: usize,
    pub side: Side,
    /// `I` without the anchor, top to bottom.
    pub removed: Vec<usize>,
    /// Elements of `H_{i+1}` in increasing index order.
    pub remaining: Vec<usize>,
    #[serde(skip)]
    pub remaining_poset: Poset,
}

/// Repeatedly removes a leaf interval, keeping the remainder `k`-saturated with
/// a tree Hasse diagram, until a `k`-chain is left.
///
/// Candidates are tried in order of leaf index, then interval as a sorted index
/// list, so the output is deterministic. An empty result means the input is
/// already a chain.
pub fn decompose(p: &Poset) -> Result<Vec<DecompositionStep>> {
    let k = p.height();
    if !p.hasse_is_tree() {
        return Err(Error::NotTree);
    }
    if !p.is_saturated(k) {
        return Err(Error::NotSaturated(k));
    }

    let mut current: Vec<usize> = (0..p.len()).collect();
    let mut steps = Vec::new();
    loop {
        let sub = p.induced(&current);
        if sub.is_chain() {
            return Ok(steps);
        }
        let step = next_step(p, &current, &sub, k).ok_or(Error::Undecomposable)?;
        current = step.remaining.clone();
        steps.push(step);
    }
}

fn next_step(p: &Poset, current: &[usize], sub: &Poset, k: usize) -> Option<DecompositionStep> {
    let degree = {
        let mut d = vec![0usize; sub.len()];
        for (a, b) in sub.hasse().covers {
            d[a] += 1;
            d[b] += 1;
        }
        d
    };

    // (leaf, sorted interval, anchor, side) in local indices.
    let mut candidates = Vec::new();
    for leaf in (0..sub.len()).filter(|&v| degree[v] == 1) {
        for anchor in 0..sub.len() {
            let side = if sub.less(leaf, anchor) {
                Side::Below
            } else if sub.less(anchor, leaf) {
                Side::Above
            } else {
                continue;
            };
            let (lo, hi) = match side {
                Side::Below => (leaf, anchor),
                Side::Above => (anchor, leaf),
            };
            let between = sub.above_mask(lo) & sub.below_mask(hi);
            let mut interval: Vec<usize> = bits(between).collect();
            interval.push(lo);
            interval.push(hi);
            if interval.len() > k {
                continue;
            }
            let is_chain = interval
                .iter()
                .all(|&a| interval.iter().all(|&b| sub.comparable(a, b)));
            if !is_chain {
                continue;
            }
            interval.sort_unstable();
            candidates.push((leaf, interval, anchor, side));
        }
    }
    candidates.sort();

    for (leaf, interval, anchor, side) in candidates {
        let keep: Vec<usize> = (0..sub.len())
            .filter(|&x| x == anchor || !interval.contains(&x))
            .collect();
        let rest = sub.induced(&keep);
        if !(rest.is_saturated(k) && rest.hasse_is_tree()) {
            continue;
        }
        let mut top_down = interval.clone();
        top_down.sort_by_key(|&x| std::cmp::Reverse(sub.below_mask(x).count_ones()));
        let global = |xs: &[usize]| xs.iter().map(|&x| current[x]).collect::<Vec<_>>();
        let removed: Vec<usize> = top_down.iter().copied().filter(|&x| x != anchor).collect();
        let remaining = global(&keep);
        return Some(DecompositionStep {
            interval: global(&top_down),
            anchor: current[anchor],
            leaf: current[leaf],
            side,
            removed: global(&removed),
            remaining_poset: p.induced(&remaining),
            remaining,
        });
    }
    None
}
