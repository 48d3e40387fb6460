#![allow(dead_code)]

use std::collections::HashSet;

use itertools::Itertools;
use rand::Rng;
use subposet::poset::Poset;

/// A random tree poset on `2..=max` elements: a random recursive tree with
/// each edge oriented by a coin flip.
pub fn random_tree_poset<R: Rng>(rng: &mut R, max: usize) -> Poset {
    let m = rng.gen_range(2..=max);
    let pairs: Vec<(usize, usize)> = (1..m)
        .map(|i| {
            let j = rng.gen_range(0..i);
            if rng.gen_bool(0.5) {
                (i, j)
            } else {
                (j, i)
            }
        })
        .collect();
    Poset::from_relations(m, &pairs).expect("oriented trees are acyclic")
}

/// Relation matrix as a bit string, minimized over relabelings.
fn canonical(p: &Poset) -> u64 {
    let m = p.len();
    (0..m)
        .permutations(m)
        .map(|perm| {
            let mut code = 0u64;
            for a in 0..m {
                for b in 0..m {
                    code = code << 1 | p.less(perm[a], perm[b]) as u64;
                }
            }
            code
        })
        .min()
        .unwrap_or(0)
}

/// Every tree poset on `m` elements up to isomorphism satisfying `keep`:
/// all labeled trees (Pruefer codes) under every edge orientation.
pub fn all_tree_posets(m: usize, keep: impl Fn(&Poset) -> bool) -> Vec<Poset> {
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    let trees: Vec<Vec<(usize, usize)>> = if m == 1 {
        vec![vec![]]
    } else if m == 2 {
        vec![vec![(0, 1)]]
    } else {
        (0..m - 2)
            .map(|_| 0..m)
            .multi_cartesian_product()
            .map(|code| pruefer_edges(&code, m))
            .collect()
    };
    for edges in trees {
        for flips in 0..1u32 << edges.len() {
            let pairs: Vec<(usize, usize)> = edges
                .iter()
                .enumerate()
                .map(|(i, &(a, b))| if flips >> i & 1 == 1 { (b, a) } else { (a, b) })
                .collect();
            let p = Poset::from_relations(m, &pairs).expect("oriented trees are acyclic");
            if keep(&p) && seen.insert(canonical(&p)) {
                out.push(p);
            }
        }
    }
    out
}

fn pruefer_edges(code: &[usize], m: usize) -> Vec<(usize, usize)> {
    let mut degree = vec![1usize; m];
    for &c in code {
        degree[c] += 1;
    }
    let mut edges = Vec::with_capacity(m - 1);
    for &c in code {
        let leaf = (0..m).find(|&i| degree[i] == 1).expect("a leaf exists");
        edges.push((leaf, c));
        degree[leaf] -= 1;
        degree[c] -= 1;
    }
    let rest: Vec<usize> = (0..m).filter(|&i| degree[i] == 1).collect();
    edges.push((rest[0], rest[1]));
    edges
}

/// `binom(n, k)` by the multiplicative formula.
pub fn binom(n: u64, k: u64) -> u64 {
    (0..k).fold(1, |acc, i| acc * (n - i) / (i + 1))
}
