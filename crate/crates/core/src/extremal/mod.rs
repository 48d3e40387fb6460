//! Copies of a poset inside families of `B_n`: exhaustive and
//! decomposition-guided search, exact `La` / `La*` at desk scale, the
//! middle-levels construction and the staircase spread certificate.

mod guided;
mod la;
mod oracle;
mod staircase;

pub use guided::find_copy_guided;
pub use la::{construction_avoidance_check, la_exact, LaResult};
pub use oracle::{find_copy_oracle, find_copy_pinned};
pub use staircase::{hm_certificate, plant_staircase, HmCertificate};

use std::time::{Duration, Instant};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::lattice::{Family, Vertex};
use crate::poset::{Embedding, Poset};

/// Limits on a search. `None` means unlimited.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct SearchBudget {
    pub node_limit: Option<u64>,
    #[serde(serialize_with = "ser_duration")]
    pub time_limit: Option<Duration>,
    pub backtrack_limit: Option<u64>,
}

fn ser_duration<S: serde::Serializer>(d: &Option<Duration>, s: S) -> std::result::Result<S::Ok, S::Error> {
    match d {
        Some(d) => s.serialize_u64(d.as_millis() as u64),
        None => s.serialize_none(),
    }
}

impl SearchBudget {
    pub fn unlimited() -> Self {
        Self {
            node_limit: None,
            time_limit: None,
            backtrack_limit: None,
        }
    }

    pub fn nodes(limit: u64) -> Self {
        Self {
            node_limit: Some(limit),
            ..Self::unlimited()
        }
    }
}

impl Default for SearchBudget {
    fn default() -> Self {
        Self {
            node_limit: Some(200_000_000),
            time_limit: Some(Duration::from_secs(60)),
            backtrack_limit: None,
        }
    }
}

/// Tracks spending against a [`SearchBudget`].
#[derive(Debug)]
pub(crate) struct Meter {
    budget: SearchBudget,
    start: Instant,
    pub nodes: u64,
    pub backtracks: u64,
    exhausted: Option<&'static str>,
}

impl Meter {
    pub fn new(budget: SearchBudget) -> Self {
        Self {
            budget,
            start: Instant::now(),
            nodes: 0,
            backtracks: 0,
            exhausted: None,
        }
    }

    /// Counts one node; false once any limit is hit.
    pub fn tick(&mut self) -> bool {
        if self.exhausted.is_some() {
            return false;
        }
        self.nodes += 1;
        if self.budget.node_limit.is_some_and(|l| self.nodes > l) {
            self.exhausted = Some("node limit");
        } else if self.nodes.is_multiple_of(1024) && self.budget.time_limit.is_some_and(|t| self.start.elapsed() > t) {
            self.exhausted = Some("time limit");
        }
        self.exhausted.is_none()
    }

    pub fn backtrack(&mut self) -> bool {
        self.backtracks += 1;
        if self.budget.backtrack_limit.is_some_and(|l| self.backtracks > l) {
            self.exhausted.get_or_insert("backtrack limit");
        }
        self.exhausted.is_none()
    }

    pub fn exhausted(&self) -> Option<&'static str> {
        self.exhausted
    }

    pub fn stats(&self) -> SearchStats {
        SearchStats {
            nodes_expanded: self.nodes,
            backtracks: self.backtracks,
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct SearchStats {
    pub nodes_expanded: u64,
    pub backtracks: u64,
}

/// Outcome of a budgeted search. `Absent` is only ever reported after a
/// complete search.
#[derive(Clone, Debug, PartialEq)]
pub enum Verdict<T> {
    Found(T),
    Absent,
    Indeterminate(String),
}

impl<T> Verdict<T> {
    pub fn label(&self) -> &'static str {
        match self {
            Verdict::Found(_) => "found",
            Verdict::Absent => "absent",
            Verdict::Indeterminate(_) => "indeterminate",
        }
    }

    pub fn found(&self) -> Option<&T> {
        match self {
            Verdict::Found(t) => Some(t),
            _ => None,
        }
    }

    pub fn is_absent(&self) -> bool {
        matches!(self, Verdict::Absent)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SearchOutcome<T> {
    pub verdict: Verdict<T>,
    pub stats: SearchStats,
}

/// Levels `floor((n-t)/2)+1 ..= floor((n-t)/2)+t`: the `t` middle levels,
/// biased upward when the split is uneven.
pub fn middle_levels(n: usize, t: usize) -> Result<Family> {
    if t == 0 || t > n + 1 {
        return Err(Error::Param(format!("need 1 <= t <= n+1, got t={t}, n={n}")));
    }
    let lo = ((n as i64 - t as i64).div_euclid(2) + 1) as usize;
    Family::levels(n, lo..lo + t)
}

/// Checks `assignment` (pattern element -> vertex) pairwise and certifies
/// the strongest containment notion it satisfies. `None` unless it is an
/// injective order-preserving map.
pub fn certify_lattice(pattern: &Poset, assignment: Vec<Vertex>) -> Option<Embedding<Vertex>> {
    if assignment.len() != pattern.len() {
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
            match (pattern.less(a, b), ga.is_proper_subset(gb)) {
                (true, false) => return None,
                (false, true) => induced = false,
                _ => {}
            }
        }
    }
    Some(Embedding::certified(assignment, induced))
}
