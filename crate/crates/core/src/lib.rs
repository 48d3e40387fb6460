//! Machinery for forbidden induced subposets in the Boolean lattice.
//!
//! The crate is organized bottom-up:
//!
//! * [`poset`]: finite posets, Hasse diagrams, saturation and interval-removal
//!   decomposition, induced/weak poset embeddings.
//! * [`lattice`]: vertices of `B_n`, weight bands, families, forbidden zones and
//!   full chains (enumerated or sampled).
//! * [`chains`]: marked-chain counting, LYM sums, marker histograms and the
//!   density bound.
//! * [`nested`]: bad vertices, witnesses, bad strings and the nested family
//!   construction, plus Monte Carlo estimators at large `n`.
//! * [`extremal`]: copy search in families (exhaustive and decomposition
//!   guided), exact `La`/`La*` at desk scale and the `H_m` separation.
//! * [`report`]: run configuration, verification drivers and JSON/CSV output.

pub mod chains;
pub mod error;
pub mod extremal;
pub mod lattice;
pub mod nested;
pub mod poset;
pub mod report;

pub use error::{Error, Result};
