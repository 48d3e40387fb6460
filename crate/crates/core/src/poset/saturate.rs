//! Saturation of tree posets.
//!
//! A height-`k` poset whose Hasse diagram is a tree is extended to a
//! `k`-saturated one whose Hasse diagram is still a tree, keeping the input as
//! an induced subposet on the first `|P|` indices.
//!
//! Every element gets a rank in `0..k` with ranks strictly increasing along
//! covers. The extension then subdivides each cover whose rank gap exceeds one
//! and hangs pendant chains below minimal elements of positive rank and above
//! maximal elements of rank below `k - 1`. The rank assignment minimizing the
//! number of added elements is found by dynamic programming over the tree,
//! ties going to the lower rank. Ranking by longest chain from below adds at
//! most `(k - 1)|P|` elements, so the `k|P|` budget is never binding for
//! valid input; it is still enforced.

use super::Poset;
use crate::error::{Error, Result};

const INFEASIBLE: usize = usize::MAX / 4;

pub fn saturate(p: &Poset) -> Result<Poset> {
    let hasse = p.hasse();
    let n = p.len();
    if !hasse.is_tree(n) {
        return Err(Error::NotTree);
    }
    let k = p.height();
    if k < 2 {
        return Err(Error::Param(format!("saturation needs height >= 2, got {k}")));
    }
    if p.is_saturated(k) {
        return Ok(p.clone());
    }

    let ranks = optimal_ranks(p, &hasse.covers, k);

    let mut labels: Vec<String> = p.labels().to_vec();
    let mut pairs = Vec::new();
    let fresh = |labels: &mut Vec<String>, wanted: String| -> usize {
        let mut name = wanted;
        while labels.contains(&name) {
            name.push('\'');
        }
        labels.push(name);
        labels.len() - 1
    };

    for &(u, v) in &hasse.covers {
        let mut prev = u;
        for step in 1..ranks[v] - ranks[u] {
            let mid = fresh(&mut labels, format!("{}|{}.{step}", p.label(u), p.label(v)));
            pairs.push((prev, mid));
            prev = mid;
        }
        pairs.push((prev, v));
    }
    for x in 0..n {
        if p.is_minimal(x) {
            let mut prev = x;
            for step in 1..=ranks[x] {
                let e = fresh(&mut labels, format!("{}-{step}", p.label(x)));
                pairs.push((e, prev));
                prev = e;
            }
        }
        if p.is_maximal(x) {
            let mut prev = x;
            for step in 1..k - ranks[x] {
                let e = fresh(&mut labels, format!("{}+{step}", p.label(x)));
                pairs.push((prev, e));
                prev = e;
            }
        }
    }

    let added = labels.len() - n;
    let budget = k * n;
    if added > budget {
        return Err(Error::Budget { needed: added, budget });
    }
    let out = Poset::with_labels(labels, &pairs)?;
    debug_assert!(out.is_saturated(k) && out.hasse_is_tree());
    debug_assert!((0..n).all(|a| (0..n).all(|b| out.less(a, b) == p.less(a, b))));
    Ok(out)
}

fn own_cost(p: &Poset, x: usize, rank: usize, k: usize) -> usize {
    let mut cost = 0;
    if p.is_minimal(x) {
        cost += rank;
    }
    if p.is_maximal(x) {
        cost += k - 1 - rank;
    }
    cost
}

/// Cost of the cover edge between `x` (rank `rx`) and neighbor `y` (rank `ry`).
fn edge_cost(p: &Poset, x: usize, rx: usize, y: usize, ry: usize) -> usize {
    let (lo, hi) = if p.less(x, y) { (rx, ry) } else { (ry, rx) };
    if hi > lo {
        hi - lo - 1
    } else {
        INFEASIBLE
    }
}

fn optimal_ranks(p: &Poset, covers: &[(usize, usize)], k: usize) -> Vec<usize> {
    let n = p.len();
    let mut adj = vec![Vec::new(); n];
    for &(a, b) in covers {
        adj[a].push(b);
        adj[b].push(a);
    }
    for list in &mut adj {
        list.sort_unstable();
    }

    // Root at 0, collect a preorder.
    let mut parent = vec![usize::MAX; n];
    let mut order = vec![0];
    let mut seen = vec![false; n];
    seen[0] = true;
    let mut i = 0;
    while i < order.len() {
        let x = order[i];
        for &y in &adj[x] {
            if !seen[y] {
                seen[y] = true;
                parent[y] = x;
                order.push(y);
            }
        }
        i += 1;
    }

    // best[x][r]: minimum cost of the subtree at x given rank r for x.
    let mut best = vec![vec![INFEASIBLE; k]; n];
    for &x in order.iter().rev() {
        for r in 0..k {
            let mut total = own_cost(p, x, r, k);
            for &c in adj[x].iter().filter(|&&c| parent[c] == x) {
                let sub = (0..k)
                    .map(|rc| edge_cost(p, x, r, c, rc).saturating_add(best[c][rc]))
                    .min()
                    .unwrap_or(INFEASIBLE);
                total = total.saturating_add(sub);
            }
            best[x][r] = total.min(INFEASIBLE);
        }
    }

    let argmin = |costs: &mut dyn Iterator<Item = (usize, usize)>| {
        costs
            .min_by_key(|&(r, c)| (c, r))
            .map(|(r, _)| r)
            .expect("nonempty rank range")
    };
    let mut ranks = vec![0usize; n];
    ranks[0] = argmin(&mut (0..k).map(|r| (r, best[0][r])));
    for &x in order.iter().skip(1) {
        let px = parent[x];
        let rp = ranks[px];
        ranks[x] = argmin(
            &mut (0..k).map(|r| (r, edge_cost(p, px, rp, x, r).saturating_add(best[x][r]))),
        );
    }
    ranks
}
