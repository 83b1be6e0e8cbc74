//! Simulation and exact verification for a noisy SIS (susceptible–infected–susceptible)
//! Markov chain on undirected multigraphs.
//!
//! The chain lives on `{0,1}^n`: at each step a vertex is chosen uniformly at
//! random, a susceptible vertex becomes infected with probability
//! `a + lambda * (# infected neighbours)`, and an infected vertex recovers with
//! probability `kappa`. The crate provides
//!
//! * [`graph`] — multigraph storage, infection states, and an edge-list format,
//! * [`random`] — Erdős–Rényi, regular configuration-model, and branching-process
//!   graph generators,
//! * [`dynamics`] — the chain itself plus the contraction/expansion constants and
//!   the mixing-time bounds they imply,
//! * [`coupling`] — two-chain couplings, coalescence times, and Monte Carlo
//!   mixing estimates,
//! * [`oracle`] — exact dense transition kernels at small `n`: stationary
//!   distributions, total-variation mixing profiles, and machine checks of the
//!   contraction and second-moment inequalities.
//!
//! Everything randomized is a pure function of an explicit `u64` seed; see
//! [`seeding`] for how replica sub-streams are derived.

pub mod coupling;
pub mod dynamics;
pub mod error;
pub mod graph;
pub mod oracle;
pub mod random;
pub mod seeding;

pub use error::{Error, Result};
