use serde::Serialize;

use super::Poset;

/// An injective map from pattern elements to host objects.
///
/// `induced` records which containment notion was checked when the value was
/// built: order preservation only, or the full "iff" condition.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Embedding<T> {
    assignment: Vec<T>,
    induced: bool,
}

impl<T> Embedding<T> {
    /// Wraps an assignment the caller has already checked.
    pub(crate) fn certified(assignment: Vec<T>, induced: bool) -> Self {
        Self { assignment, induced }
    }

    pub fn assignment(&self) -> &[T] {
        &self.assignment
    }

    pub fn image(&self, element: usize) -> &T {
        &self.assignment[element]
    }

    pub fn is_induced(&self) -> bool {
        self.induced
    }

    pub fn into_assignment(self) -> Vec<T> {
        self.assignment
    }
}

impl Embedding<usize> {
    /// Checks `assignment` as a map `pattern -> host` and certifies the
    /// strongest notion it satisfies. `None` if it is not even an injective
    /// order-preserving map.
    pub fn certify(host: &Poset, pattern: &Poset, assignment: Vec<usize>) -> Option<Self> {
        if assignment.len() != pattern.len() || assignment.iter().any(|&g| g >= host.len()) {
            return None;
        }
        let mut induced = true;
        for a in 0..pattern.len() {
            for b in 0..pattern.len() {
                if a == b {
                    continue;
                }
                let (ga, gb) = (assignment[a], assignment[b]);
                if ga == gb {
                    return None;
                }
                match (pattern.less(a, b), host.less(ga, gb)) {
                    (true, false) => return None,
                    (false, true) => induced = false,
                    _ => {}
                }
            }
        }
        Some(Self { assignment, induced })
    }
}

/// Exhaustive backtracking search for a copy of `pattern` inside `host`.
///
/// Exponential in the worst case; meant for patterns of at most about ten
/// elements. `None` is a definitive answer.
pub fn find_poset_embedding(host: &Poset, pattern: &Poset, induced: bool) -> Option<Embedding<usize>> {
    if pattern.len() > host.len() {
        return None;
    }
    let order = search_order(pattern);
    let mut assignment = vec![usize::MAX; pattern.len()];
    let mut used = 0u64;
    if extend(host, pattern, induced, &order, 0, &mut assignment, &mut used) {
        Some(Embedding { assignment, induced })
    } else {
        None
    }
}

/// Pattern elements ordered so each one (after the first of its component) is
/// comparable to something placed earlier.
fn search_order(pattern: &Poset) -> Vec<usize> {
    let n = pattern.len();
    let mut order = Vec::with_capacity(n);
    let mut placed = vec![false; n];
    while order.len() < n {
        let start = (0..n)
            .filter(|&a| !placed[a])
            .max_by_key(|&a| ((pattern.above_mask(a) | pattern.below_mask(a)).count_ones(), usize::MAX - a))
            .expect("unplaced element");
        let mut queue = std::collections::VecDeque::from([start]);
        placed[start] = true;
        while let Some(a) = queue.pop_front() {
            order.push(a);
            for b in 0..n {
                if !placed[b] && pattern.comparable(a, b) {
                    placed[b] = true;
                    queue.push_back(b);
                }
            }
        }
    }
    order
}

fn extend(
    host: &Poset,
    pattern: &Poset,
    induced: bool,
    order: &[usize],
    depth: usize,
    assignment: &mut [usize],
    used: &mut u64,
) -> bool {
    let Some(&x) = order.get(depth) else {
        return true;
    };
    for g in 0..host.len() {
        if *used & (1 << g) != 0 {
            continue;
        }
        let fits = order[..depth].iter().all(|&y| {
            let gy = assignment[y];
            if pattern.less(x, y) {
                host.less(g, gy)
            } else if pattern.less(y, x) {
                host.less(gy, g)
            } else {
                !induced || !host.comparable(g, gy)
            }
        });
        if fits {
            assignment[x] = g;
            *used |= 1 << g;
            if extend(host, pattern, induced, order, depth + 1, assignment, used) {
                return true;
            }
            *used &= !(1 << g);
        }
    }
    assignment[x] = usize::MAX;
    false
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poset::NamedPoset;

    fn boolean_lattice_b2() -> Poset {
        // 0 = {}, 1 = {1}, 2 = {2}, 3 = {1,2}
        Poset::with_labels(
            vec!["{}".into(), "{1}".into(), "{2}".into(), "{1,2}".into()],
            &[(0, 1), (0, 2), (1, 3), (2, 3)],
        )
        .unwrap()
    }

    #[test]
    fn fork_in_b2() {
        let b2 = boolean_lattice_b2();
        let v2 = NamedPoset::Fork(2).build().unwrap();
        let e = find_poset_embedding(&b2, &v2, true).unwrap();
        assert_eq!(e.assignment(), [0, 1, 2]);
        assert!(e.is_induced());
    }

    #[test]
    fn fork_not_in_chain() {
        let p3 = NamedPoset::Chain(3).build().unwrap();
        let v2 = NamedPoset::Fork(2).build().unwrap();
        assert!(find_poset_embedding(&p3, &v2, true).is_none());
        // weakly, a chain does host a fork
        assert!(find_poset_embedding(&p3, &v2, false).is_some());
    }

    #[test]
    fn identity_embedding() {
        for name in [NamedPoset::Butterfly, NamedPoset::Staircase(3), NamedPoset::Fork(3)] {
            let h = name.build().unwrap();
            let e = find_poset_embedding(&h, &h, true).unwrap();
            assert!(Embedding::certify(&h, &h, e.assignment().to_vec()).unwrap().is_induced());
        }
    }

    #[test]
    fn certify_rejects_order_violation() {
        let p2 = NamedPoset::Chain(2).build().unwrap();
        assert!(Embedding::certify(&p2, &p2, vec![1, 0]).is_none());
        assert!(Embedding::certify(&p2, &p2, vec![0, 0]).is_none());
        let anti = Poset::from_relations(2, &[]).unwrap();
        let weak = Embedding::certify(&p2, &anti, vec![0, 1]).unwrap();
        assert!(!weak.is_induced());
    }
}
