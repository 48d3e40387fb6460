use rand::seq::SliceRandom;
use rand::Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::lattice::Vertex;
use crate::poset::Embedding;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct HmCertificate {
    /// `|image(y_m)| - |image(x_1)|`.
    pub spread: i64,
    /// `spread >= m - 1`.
    pub holds: bool,
}

/// Weight spread of an induced copy of the staircase `H_m` (elements
/// `x_1..x_m, y_1..y_m` in that order).
pub fn hm_certificate(e: &Embedding<Vertex>, m: usize) -> Result<HmCertificate> {
    if !e.is_induced() {
        return Err(Error::NotValidated);
    }
    if m == 0 || e.assignment().len() != 2 * m {
        return Err(Error::Param(format!("expected an embedding of H_{m} with {} elements", 2 * m)));
    }
    let spread = e.image(2 * m - 1).weight() as i64 - e.image(0).weight() as i64;
    Ok(HmCertificate {
        spread,
        holds: spread >= m as i64 - 1,
    })
}

/// A random induced copy of `H_m` in `B_n`: with distinct elements
/// `a_1..a_m, b_1..b_m` and a random core `K` off them,
/// `x_i = K + a_i` and `y_j = K + {a_1..a_j} + b_j`.
pub fn plant_staircase<R: Rng + ?Sized>(n: usize, m: usize, rng: &mut R) -> Result<Vec<Vertex>> {
    if m == 0 || 2 * m > n || n > crate::lattice::MAX_N {
        return Err(Error::Param(format!("H_{m} does not fit in B_{n} this way")));
    }
    let mut perm: Vec<usize> = (0..n).collect();
    perm.shuffle(rng);
    let (a, rest) = perm.split_at(m);
    let (b, free) = rest.split_at(m);
    let core = free
        .iter()
        .filter(|_| rng.gen_bool(0.5))
        .fold(Vertex::EMPTY, |acc, &e| acc.with(e));
    let mut out: Vec<Vertex> = a.iter().map(|&ai| core.with(ai)).collect();
    let mut prefix = core;
    for j in 0..m {
        prefix = prefix.with(a[j]);
        out.push(prefix.with(b[j]));
    }
    Ok(out)
}
