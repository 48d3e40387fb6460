use serde::Serialize;

use super::{find_copy_oracle, find_copy_pinned, middle_levels, Meter, SearchBudget, SearchOutcome, Verdict};
use crate::error::{Error, Result};
use crate::lattice::{Family, Vertex};
use crate::poset::Poset;

/// Largest family size avoiding a pattern, with a family attaining it.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct LaResult {
    pub value: usize,
    pub witness: Family,
}

/// Largest size of a family in `B_n` containing no copy of `pattern`
/// (induced or weak), by include/exclude depth-first search.
///
/// Vertices are visited by distance of their weight from `n/2`, then in
/// increasing bit order. The search starts from the middle-levels family of
/// `height - 1` levels, which contains no copy, and cuts any branch that
/// cannot beat the best family so far. Each inclusion is checked by a copy
/// search with some pattern element pinned to the new vertex.
pub fn la_exact(n: usize, pattern: &Poset, induced: bool, budget: SearchBudget) -> Result<SearchOutcome<LaResult>> {
    if n > 8 {
        return Err(crate::error::size_error(format!("exact La over B_{n}"), 8));
    }
    if pattern.is_empty() {
        return Err(Error::Param("pattern must be nonempty".into()));
    }
    let mut order: Vec<Vertex> = (0..1u64 << n).map(Vertex::from_bits).collect();
    order.sort_by_key(|v| ((2 * v.weight()).abs_diff(n), v.bits()));

    let mut best = Family::empty(n);
    let k = pattern.height();
    if k >= 2 {
        let seed = middle_levels(n, (k - 1).min(n + 1))?;
        if find_copy_oracle(&seed, pattern, induced, SearchBudget::unlimited()).verdict.is_absent() {
            best = seed;
        }
    }

    struct Dfs<'a> {
        order: &'a [Vertex],
        pattern: &'a Poset,
        induced: bool,
        chosen: Vec<Vertex>,
        best: Vec<Vertex>,
        improved: bool,
    }

    impl Dfs<'_> {
        fn creates_copy(&self, g: Vertex) -> bool {
            let mut members = self.chosen.clone();
            members.push(g);
            (0..self.pattern.len()).any(|x| {
                find_copy_pinned(&members, self.pattern, self.induced, (x, g), SearchBudget::unlimited())
                    .verdict
                    .found()
                    .is_some()
            })
        }

        fn go(&mut self, i: usize, meter: &mut Meter) -> bool {
            if !meter.tick() {
                return false;
            }
            if self.chosen.len() + (self.order.len() - i) <= self.best.len() {
                return true;
            }
            if i == self.order.len() {
                self.best = self.chosen.clone();
                self.improved = true;
                return true;
            }
            let g = self.order[i];
            if !self.creates_copy(g) {
                self.chosen.push(g);
                let ok = self.go(i + 1, meter);
                self.chosen.pop();
                if !ok {
                    return false;
                }
            }
            self.go(i + 1, meter)
        }
    }

    let mut meter = Meter::new(budget);
    let mut dfs = Dfs {
        order: &order,
        pattern,
        induced,
        chosen: Vec::new(),
        best: best.members().to_vec(),
        improved: false,
    };
    let complete = dfs.go(0, &mut meter);
    let verdict = if complete {
        let witness = if dfs.improved { Family::new(n, dfs.best)? } else { best };
        Verdict::Found(LaResult {
            value: witness.len(),
            witness,
        })
    } else {
        Verdict::Indeterminate(format!(
            "{}; best family found has size {}",
            meter.exhausted().unwrap_or("budget"),
            dfs.best.len()
        ))
    };
    Ok(SearchOutcome {
        verdict,
        stats: meter.stats(),
    })
}

/// Whether the `t` middle levels of `B_n` avoid `pattern` as an induced
/// subposet. An exhausted budget is an error, never a `true`.
pub fn construction_avoidance_check(n: usize, pattern: &Poset, t: usize, budget: SearchBudget) -> Result<bool> {
    let family = middle_levels(n, t)?;
    match find_copy_oracle(&family, pattern, true, budget).verdict {
        Verdict::Absent => Ok(true),
        Verdict::Found(_) => Ok(false),
        Verdict::Indeterminate(why) => Err(Error::Indeterminate(why)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poset::NamedPoset;

    fn la(n: usize, p: NamedPoset, induced: bool) -> usize {
        let out = la_exact(n, &p.build().unwrap(), induced, SearchBudget::unlimited()).unwrap();
        let res = out.verdict.found().expect("complete").clone();
        // the witness really avoids the pattern
        assert!(find_copy_oracle(&res.witness, &p.build().unwrap(), induced, SearchBudget::unlimited())
            .verdict
            .is_absent());
        res.value
    }

    #[test]
    fn sperner_and_small_values() {
        for induced in [false, true] {
            assert_eq!(la(2, NamedPoset::Chain(2), induced), 2);
            assert_eq!(la(3, NamedPoset::Chain(2), induced), 3);
        }
        assert_eq!(la(1, NamedPoset::Chain(2), false), 1);
        assert_eq!(la(3, NamedPoset::Chain(1), true), 0);
    }

    /// Brute force over all 16 families of `B_2`.
    #[test]
    fn b2_brute_force() {
        let p2 = NamedPoset::Chain(2).build().unwrap();
        let best = (0u32..16)
            .filter(|mask| {
                let f = Family::new(2, (0..4).filter(|i| mask >> i & 1 == 1).map(|i| Vertex::from_bits(i as u64))).unwrap();
                find_copy_oracle(&f, &p2, false, SearchBudget::unlimited()).verdict.is_absent()
            })
            .map(|mask| mask.count_ones())
            .max()
            .unwrap();
        assert_eq!(best, 2);
    }

    #[test]
    fn avoidance_examples() {
        let fork = NamedPoset::Fork(2).build().unwrap();
        let p3 = NamedPoset::Chain(3).build().unwrap();
        let p2 = NamedPoset::Chain(2).build().unwrap();
        let b = SearchBudget::unlimited();
        assert!(construction_avoidance_check(8, &fork, 1, b).unwrap());
        assert!(construction_avoidance_check(8, &p3, 2, b).unwrap());
        assert!(!construction_avoidance_check(8, &p2, 2, b).unwrap());
        assert!(matches!(
            construction_avoidance_check(8, &p2, 2, SearchBudget::nodes(0)),
            Err(Error::Indeterminate(_))
        ));
    }

    #[test]
    fn budget_is_respected() {
        let p3 = NamedPoset::Chain(3).build().unwrap();
        let out = la_exact(4, &p3, false, SearchBudget::nodes(10)).unwrap();
        assert!(matches!(out.verdict, Verdict::Indeterminate(_)));
    }
}
