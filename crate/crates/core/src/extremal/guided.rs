use std::collections::HashSet;

use rand::seq::SliceRandom;
use rand::Rng;

use super::{certify_lattice, Meter, SearchBudget, SearchOutcome, Verdict};
use crate::error::{Error, Result};
use crate::lattice::{Band, Direction, Family, Vertex};
use crate::poset::{decompose, saturate, Embedding, Poset, Side};

/// One element to place: strictly below (`Down`) or above (`Up`) the image of
/// `parent`, incomparable with the images of `avoid`, leaving room for
/// `remaining` further elements continuing in the same direction.
#[derive(Clone, Debug)]
struct Slot {
    element: usize,
    parent: Option<usize>,
    direction: Direction,
    avoid: Vec<usize>,
    remaining: usize,
}

/// Placement plan: the final chain of the decomposition top down, then every
/// removed interval re-attached in reverse removal order.
fn plan(sat: &Poset) -> Result<Vec<Slot>> {
    let steps = decompose(sat)?;
    let mut chain: Vec<usize> = match steps.last() {
        Some(s) => s.remaining.clone(),
        None => (0..sat.len()).collect(),
    };
    let depth = sat.depth_from_below();
    chain.sort_by_key(|&e| std::cmp::Reverse(depth[e]));
    let mut slots: Vec<Slot> = chain
        .iter()
        .enumerate()
        .map(|(j, &e)| Slot {
            element: e,
            parent: j.checked_sub(1).map(|p| chain[p]),
            direction: Direction::Down,
            avoid: Vec::new(),
            remaining: chain.len() - 1 - j,
        })
        .collect();
    for step in steps.iter().rev() {
        let u = step.anchor;
        let (direction, order, related): (_, Vec<usize>, Box<dyn Fn(usize) -> bool>) = match step.side {
            Side::Below => (
                Direction::Down,
                step.removed.clone(),
                Box::new(|z: usize| z == u || sat.less(u, z)),
            ),
            Side::Above => (
                Direction::Up,
                step.removed.iter().rev().copied().collect(),
                Box::new(|z: usize| z == u || sat.less(z, u)),
            ),
        };
        let avoid: Vec<usize> = step.remaining.iter().copied().filter(|&z| !related(z)).collect();
        for (j, &e) in order.iter().enumerate() {
            slots.push(Slot {
                element: e,
                parent: Some(if j == 0 { u } else { order[j - 1] }),
                direction,
                avoid: avoid.clone(),
                remaining: order.len() - 1 - j,
            });
        }
    }
    Ok(slots)
}

struct Guided<'a, R: ?Sized> {
    sat: &'a Poset,
    pattern: &'a Poset,
    pool: Vec<Vertex>,
    weights: Vec<usize>,
    slots: Vec<Slot>,
    image: Vec<Option<Vertex>>,
    used: HashSet<Vertex>,
    rng: &'a mut R,
}

impl<R: Rng + ?Sized> Guided<'_, R> {
    fn room(&self, v: Vertex, direction: Direction, remaining: usize) -> bool {
        let w = v.weight();
        let count = match direction {
            Direction::Down => self.weights.partition_point(|&u| u < w),
            Direction::Up => self.weights.len() - self.weights.partition_point(|&u| u <= w),
        };
        count >= remaining
    }

    fn candidates(&mut self, slot: &Slot) -> Vec<Vertex> {
        let parent = slot.parent.map(|p| self.image[p].expect("parents are placed first"));
        let avoid: Vec<Vertex> = slot.avoid.iter().map(|&a| self.image[a].expect("placed")).collect();
        let mut out: Vec<Vertex> = self
            .pool
            .iter()
            .copied()
            .filter(|&v| match (parent, slot.direction) {
                (None, _) => true,
                (Some(p), Direction::Down) => v.is_proper_subset(p),
                (Some(p), Direction::Up) => p.is_proper_subset(v),
            })
            .filter(|&v| !self.used.contains(&v))
            .filter(|&v| self.room(v, slot.direction, slot.remaining))
            .filter(|&v| avoid.iter().all(|&a| !v.comparable(a)))
            .collect();
        out.shuffle(self.rng);
        out
    }

    fn go(&mut self, i: usize, meter: &mut Meter) -> Option<Option<Embedding<Vertex>>> {
        if i == self.slots.len() {
            let full: Vec<Vertex> = self.image.iter().map(|v| v.expect("complete")).collect();
            let whole = certify_lattice(self.sat, full.clone()).filter(Embedding::is_induced)?;
            let original = certify_lattice(self.pattern, whole.assignment()[..self.pattern.len()].to_vec())
                .filter(Embedding::is_induced);
            return Some(original);
        }
        let slot = self.slots[i].clone();
        for v in self.candidates(&slot) {
            if !meter.tick() {
                return None;
            }
            self.image[slot.element] = Some(v);
            self.used.insert(v);
            match self.go(i + 1, meter) {
                None => return None,
                Some(Some(e)) => return Some(Some(e)),
                Some(None) => {}
            }
            self.used.remove(&v);
            self.image[slot.element] = None;
            if !meter.backtrack() {
                return None;
            }
        }
        Some(None)
    }
}

/// Searches for an induced copy of `pattern` in `family` restricted to
/// `band`, following the interval decomposition of its saturation.
///
/// The last chain of the decomposition is placed first; each removed
/// interval is then re-attached as a chain below (or above) the image of its
/// anchor, avoiding every vertex comparable with an image of an element not
/// above (not below) the anchor. Candidates are tried in random order with
/// backtracking. The finished map is validated pairwise and restricted to the
/// original pattern. Never reports absence.
pub fn find_copy_guided<R: Rng + ?Sized>(
    family: &Family,
    pattern: &Poset,
    band: &Band,
    budget: SearchBudget,
    rng: &mut R,
) -> Result<SearchOutcome<Embedding<Vertex>>> {
    let k = pattern.height();
    if k < 2 {
        return Err(Error::Param(format!("guided search needs height >= 2, got {k}")));
    }
    if !pattern.hasse_is_tree() {
        return Err(Error::NotTree);
    }
    let sat = if pattern.is_saturated(k) { pattern.clone() } else { saturate(pattern)? };
    let slots = plan(&sat)?;
    let pool: Vec<Vertex> = family.iter().filter(|&v| band.admits(v)).collect();
    let mut weights: Vec<usize> = pool.iter().map(|v| v.weight()).collect();
    weights.sort_unstable();
    weights.dedup();
    let mut meter = Meter::new(budget);
    let mut search = Guided {
        sat: &sat,
        pattern,
        pool,
        weights,
        slots,
        image: vec![None; sat.len()],
        used: HashSet::new(),
        rng,
    };
    let verdict = match search.go(0, &mut meter) {
        Some(Some(e)) => Verdict::Found(e),
        Some(None) => Verdict::Indeterminate("guided search space exhausted without a copy".into()),
        None => Verdict::Indeterminate(meter.exhausted().unwrap_or("budget").to_string()),
    };
    Ok(SearchOutcome {
        verdict,
        stats: meter.stats(),
    })
}
