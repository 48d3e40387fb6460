use super::{certify_lattice, Meter, SearchBudget, SearchOutcome, Verdict};
use crate::lattice::{Family, Vertex};
use crate::poset::{bits, Embedding, Poset};

/// Bitset over family member indices.
type Domain = Vec<u64>;

fn count(d: &Domain) -> u32 {
    d.iter().map(|w| w.count_ones()).sum()
}

fn members_of(d: &Domain) -> impl Iterator<Item = usize> + '_ {
    d.iter().enumerate().flat_map(|(wi, &w)| bits(w).map(move |b| wi * 64 + b))
}

struct Search<'a> {
    members: &'a [Vertex],
    pattern: &'a Poset,
    induced: bool,
}

impl Search<'_> {
    /// Whether pattern element `y` may sit on member `h` given `x` on `g`.
    fn compatible(&self, y: usize, h: usize, x: usize, g: usize) -> bool {
        if h == g {
            return false;
        }
        let (vh, vg) = (self.members[h], self.members[g]);
        if self.pattern.less(y, x) {
            vh.is_proper_subset(vg)
        } else if self.pattern.less(x, y) {
            vg.is_proper_subset(vh)
        } else {
            !self.induced || !vh.comparable(vg)
        }
    }

    /// Initial domains: members whose weight leaves room for the longest
    /// chains below and above the element among the family's weights.
    fn initial_domains(&self) -> Vec<Domain> {
        let words = self.members.len().div_ceil(64).max(1);
        let mut weights: Vec<usize> = self.members.iter().map(|v| v.weight()).collect();
        weights.sort_unstable();
        weights.dedup();
        let below = self.pattern.depth_from_below();
        let above = self.pattern.depth_from_above();
        (0..self.pattern.len())
            .map(|x| {
                let mut d = vec![0u64; words];
                for (i, v) in self.members.iter().enumerate() {
                    let w = v.weight();
                    let lower = weights.partition_point(|&u| u < w);
                    let upper = weights.len() - weights.partition_point(|&u| u <= w);
                    if lower + 1 >= below[x] && upper + 1 >= above[x] {
                        d[i / 64] |= 1 << (i % 64);
                    }
                }
                d
            })
            .collect()
    }

    /// `Some(true)` when the assignment completes, `None` on exhaustion.
    fn extend(&self, domains: &[Domain], assigned: &mut [Option<usize>], meter: &mut Meter) -> Option<bool> {
        let Some(x) = (0..assigned.len())
            .filter(|&x| assigned[x].is_none())
            .min_by_key(|&x| (count(&domains[x]), x))
        else {
            return Some(true);
        };
        for g in members_of(&domains[x]) {
            if !meter.tick() {
                return None;
            }
            let mut next = domains.to_vec();
            let mut dead = false;
            for y in 0..assigned.len() {
                if y == x || assigned[y].is_some() {
                    continue;
                }
                let mut d = vec![0u64; next[y].len()];
                for h in members_of(&next[y]) {
                    if self.compatible(y, h, x, g) {
                        d[h / 64] |= 1 << (h % 64);
                    }
                }
                dead |= d.iter().all(|&w| w == 0);
                next[y] = d;
                if dead {
                    break;
                }
            }
            if !dead {
                assigned[x] = Some(g);
                match self.extend(&next, assigned, meter) {
                    Some(true) => return Some(true),
                    None => return None,
                    Some(false) => assigned[x] = None,
                }
            }
            if !meter.backtrack() {
                return None;
            }
        }
        Some(false)
    }

    fn run(&self, mut domains: Vec<Domain>, meter: &mut Meter) -> Verdict<Embedding<Vertex>> {
        if self.pattern.len() > self.members.len() {
            return Verdict::Absent;
        }
        if self.pattern.is_empty() {
            return Verdict::Found(certify_lattice(self.pattern, Vec::new()).expect("empty map"));
        }
        for d in &mut domains {
            d.resize(self.members.len().div_ceil(64).max(1), 0);
        }
        let mut assigned = vec![None; self.pattern.len()];
        match self.extend(&domains, &mut assigned, meter) {
            None => Verdict::Indeterminate(meter.exhausted().unwrap_or("budget").to_string()),
            Some(false) => Verdict::Absent,
            Some(true) => {
                let image: Vec<Vertex> = assigned.iter().map(|g| self.members[g.expect("complete")]).collect();
                let e = certify_lattice(self.pattern, image).expect("search keeps the order relations");
                debug_assert!(!self.induced || e.is_induced());
                Verdict::Found(e)
            }
        }
    }
}

/// Exhaustive search for a copy of `pattern` among the members of `family`:
/// most-constrained element first, with forward checking of every
/// comparability (and, when `induced`, incomparability) constraint.
pub fn find_copy_oracle(
    family: &Family,
    pattern: &Poset,
    induced: bool,
    budget: SearchBudget,
) -> SearchOutcome<Embedding<Vertex>> {
    let mut meter = Meter::new(budget);
    let search = Search {
        members: family.members(),
        pattern,
        induced,
    };
    let verdict = search.run(search.initial_domains(), &mut meter);
    SearchOutcome {
        verdict,
        stats: meter.stats(),
    }
}

/// As [`find_copy_oracle`] over an arbitrary vertex list, with pattern
/// element `pin.0` forced onto vertex `pin.1`.
pub fn find_copy_pinned(
    members: &[Vertex],
    pattern: &Poset,
    induced: bool,
    pin: (usize, Vertex),
    budget: SearchBudget,
) -> SearchOutcome<Embedding<Vertex>> {
    let mut meter = Meter::new(budget);
    let search = Search {
        members,
        pattern,
        induced,
    };
    let Some(at) = members.iter().position(|&v| v == pin.1) else {
        return SearchOutcome {
            verdict: Verdict::Absent,
            stats: meter.stats(),
        };
    };
    let mut domains = search.initial_domains();
    let words = members.len().div_ceil(64).max(1);
    let mut only = vec![0u64; words];
    only[at / 64] |= 1 << (at % 64);
    domains[pin.0] = if members_of(&domains[pin.0]).any(|i| i == at) {
        only
    } else {
        vec![0u64; words]
    };
    let verdict = if count(&domains[pin.0]) == 0 {
        Verdict::Absent
    } else {
        search.run(domains, &mut meter)
    };
    SearchOutcome {
        verdict,
        stats: meter.stats(),
    }
}
