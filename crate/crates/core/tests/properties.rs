mod common;

use num_bigint::BigUint;
use num_rational::BigRational;
use num_traits::One;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use subposet::chains::{count_marked_chains, count_marked_chains_oracle, lym_sum, marker_histogram, to_rational};
use subposet::extremal::{find_copy_oracle, la_exact, SearchBudget};
use subposet::lattice::{
    chains_through_count, enumerate_full_chains, factorial, sample_chain, Band, Direction, Family, Vertex,
};
use subposet::nested::{build_nested, verify_goodness, NestedConfig};
use subposet::poset::{decompose, find_poset_embedding, saturate, NamedPoset, Poset};

use common::random_tree_poset;

const BUDGET: u64 = 100_000_000;

fn family(n: usize) -> impl Strategy<Value = Family> {
    prop::collection::vec(any::<bool>(), 1 << n).prop_map(move |keep| {
        Family::new(n, (0..1u64 << n).filter(|&b| keep[b as usize]).map(Vertex::from_bits)).unwrap()
    })
}

fn sized_family() -> impl Strategy<Value = Family> {
    (1usize..=5).prop_flat_map(family)
}

/// A random poset: relations only go from lower to higher index.
fn dag() -> impl Strategy<Value = Poset> {
    (1usize..=7).prop_flat_map(|m| {
        prop::collection::vec(any::<bool>(), m * m).prop_map(move |bits| {
            let pairs: Vec<(usize, usize)> = (0..m)
                .flat_map(|a| (a + 1..m).map(move |b| (a, b)))
                .filter(|&(a, b)| bits[a * m + b])
                .collect();
            Poset::from_relations(m, &pairs).unwrap()
        })
    })
}

fn tree_poset() -> impl Strategy<Value = Poset> {
    any::<u64>().prop_map(|seed| random_tree_poset(&mut ChaCha8Rng::seed_from_u64(seed), 8))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn closure_is_idempotent(p in dag()) {
        let again = Poset::from_relations(p.len(), &p.strict_pairs()).unwrap();
        prop_assert_eq!(&again, &p);
        for a in 0..p.len() {
            for b in 0..p.len() {
                for c in 0..p.len() {
                    prop_assert!(!(p.less(a, b) && p.less(b, c)) || p.less(a, c));
                }
                prop_assert!(!(p.less(a, b) && p.less(b, a)));
            }
        }
    }

    #[test]
    fn hasse_diagram_generates_the_order(p in dag()) {
        let covers = p.hasse().covers;
        prop_assert_eq!(&Poset::from_relations(p.len(), &covers).unwrap(), &p);
        for &(a, b) in &covers {
            prop_assert!((0..p.len()).all(|c| !(p.less(a, c) && p.less(c, b))));
        }
        prop_assert_eq!(&Poset::from_json(&p.to_json()).unwrap(), &p);
    }

    #[test]
    fn chains_embed_weakly_iff_induced(f in sized_family(), k in 1usize..=3) {
        let chain = NamedPoset::Chain(k).build().unwrap();
        let weak = find_copy_oracle(&f, &chain, false, SearchBudget::unlimited());
        let induced = find_copy_oracle(&f, &chain, true, SearchBudget::unlimited());
        prop_assert_eq!(weak.verdict.is_absent(), induced.verdict.is_absent());
    }

    #[test]
    fn induced_copies_are_weak_copies(host in dag(), pattern in dag()) {
        if let Some(e) = find_poset_embedding(&host, &pattern, true) {
            prop_assert!(e.is_induced());
            prop_assert!(find_poset_embedding(&host, &pattern, false).is_some());
        }
    }

    #[test]
    fn saturation_invariants(p in tree_poset()) {
        let k = p.height();
        prop_assume!(k >= 2);
        let s = saturate(&p).unwrap();
        prop_assert!(s.is_saturated(k) && s.hasse_is_tree() && s.height() == k);
        prop_assert!(s.len() - p.len() <= k * p.len());
        for a in 0..p.len() {
            for b in 0..p.len() {
                prop_assert_eq!(s.less(a, b), p.less(a, b));
            }
        }
        prop_assert_eq!(saturate(&s).unwrap(), s.clone());
        let steps = decompose(&s).unwrap();
        let mut size = s.len();
        for st in &steps {
            prop_assert!(st.remaining.len() < size);
            size = st.remaining.len();
            prop_assert!(st.remaining_poset.is_saturated(k) && st.remaining_poset.hasse_is_tree());
            prop_assert!(st.removed.iter().all(|x| !st.remaining.contains(x)));
        }
        prop_assert_eq!(size, k);
    }

    #[test]
    fn counting_identity(f in sized_family(), k in 1usize..=3) {
        let n = f.n();
        prop_assert_eq!(
            count_marked_chains(&f, k, BUDGET).unwrap(),
            count_marked_chains_oracle(&f, k, n, 10).unwrap()
        );
    }

    #[test]
    fn lym_matches_histogram(f in sized_family()) {
        let n = f.n();
        let hist = marker_histogram(&f, n, 10).unwrap();
        prop_assert_eq!(BigUint::from(hist.total()), factorial(n));
        prop_assert_eq!(lym_sum(&f) * to_rational(&factorial(n)), to_rational(&hist.weighted_sum()));
    }

    #[test]
    fn lym_of_an_antichain_is_at_most_one(f in sized_family()) {
        let antichain = Family::new(
            f.n(),
            f.iter().filter(|&v| f.iter().all(|u| u == v || !u.comparable(v))),
        ).unwrap();
        prop_assert!(lym_sum(&antichain) <= BigRational::one());
    }

    #[test]
    fn marked_chains_grow_with_the_family(f in sized_family(), extra in any::<u64>(), k in 1usize..=3) {
        let n = f.n();
        let v = Vertex::from_bits(extra & ((1u64 << n) - 1));
        let bigger = f.with(v).unwrap();
        prop_assert!(count_marked_chains(&bigger, k, BUDGET).unwrap() >= count_marked_chains(&f, k, BUDGET).unwrap());
    }

    #[test]
    fn chains_through_matches_enumeration(n in 1usize..=5, picks in prop::collection::vec(any::<u64>(), 0..4)) {
        // nested vertices built from a random element order
        let mut order: Vec<usize> = (0..n).collect();
        let mut q = Vec::new();
        let mut rng = ChaCha8Rng::seed_from_u64(picks.iter().fold(0, |a: u64, &b| a.wrapping_add(b)));
        use rand::seq::SliceRandom;
        order.shuffle(&mut rng);
        for &p in &picks {
            let w = (p % (n as u64 + 1)) as usize;
            q.push(order[..w].iter().fold(Vertex::EMPTY, |acc, &e| acc.with(e)));
        }
        q.sort_by_key(|v| std::cmp::Reverse(v.weight()));
        q.dedup();
        let through = enumerate_full_chains(n, 10).unwrap().filter(|c| q.iter().all(|&v| c.contains(v))).count();
        prop_assert_eq!(chains_through_count(&q, n).unwrap(), BigUint::from(through));
    }

    #[test]
    fn sampled_chains_are_full(n in 1usize..=12, anchor in any::<u64>(), up in any::<bool>(), seed in any::<u64>()) {
        let anchor = Vertex::from_bits(anchor & ((1u64 << n) - 1));
        let dir = if up { Direction::Up } else { Direction::Down };
        let chain = sample_chain(anchor, dir, n, &mut ChaCha8Rng::seed_from_u64(seed));
        let vs = chain.vertices();
        prop_assert!(vs.contains(&anchor));
        for w in vs.windows(2) {
            prop_assert!(w[1].is_proper_subset(w[0]) && w[0].weight() == w[1].weight() + 1);
        }
        match dir {
            Direction::Down => prop_assert_eq!(vs.last().unwrap().weight(), 0),
            Direction::Up => prop_assert_eq!(vs[0].weight(), n),
        }
    }

    #[test]
    fn vertex_order_relations(a in any::<u64>(), b in any::<u64>()) {
        let (u, v) = (Vertex::from_bits(a), Vertex::from_bits(b));
        prop_assert_eq!(u.is_subset(v), (a & !b) == 0);
        prop_assert_eq!(u.comparable(v), u.is_subset(v) || v.is_subset(u));
        prop_assert_eq!(u.is_proper_subset(v), u.is_subset(v) && u != v);
        prop_assert_eq!(u.weight(), a.count_ones() as usize);
    }

    #[test]
    fn band_admits_by_weight(n in 1usize..=40, w in 0usize..=40) {
        let band = Band::central(n);
        prop_assert_eq!(band.contains(w), band.lo <= w as f64 && w as f64 <= band.hi);
        // at n = 1 the band has zero width around 1/2
        prop_assert!(n < 2 || band.contains(n / 2));
    }
}

#[test]
fn extremal_numbers_grow_with_n() {
    for pattern in [NamedPoset::Chain(2), NamedPoset::Chain(3), NamedPoset::Fork(2)] {
        let p = pattern.build().unwrap();
        for induced in [false, true] {
            let values: Vec<usize> = (1..=4)
                .map(|n| {
                    la_exact(n, &p, induced, SearchBudget::unlimited())
                        .unwrap()
                        .verdict
                        .found()
                        .expect("complete search")
                        .value
                })
                .collect();
            assert!(values.windows(2).all(|w| w[0] <= w[1]), "{pattern} {induced}: {values:?}");
        }
    }
}

#[test]
fn goodness_check_catches_unrefined_families() {
    let n = 4;
    let f = Family::all(n).unwrap();
    let cfg = NestedConfig {
        k: 2,
        h: 2,
        epsilon: BigRational::one(),
        band: Band::central(n),
        ..NestedConfig::default()
    };
    let mut run = build_nested(&f, &f, &cfg).unwrap();
    assert!(verify_goodness(&run).holds);
    // keep every marker: bad vertices are never removed
    let first = run.states[0].markers.clone();
    for s in run.states.iter_mut().skip(1) {
        s.markers = first.clone();
    }
    let report = verify_goodness(&run);
    assert!(!report.holds && report.violations > 0);
}
