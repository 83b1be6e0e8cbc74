//! Experiment harness on top of [`nsis_core`]: validated experiment
//! configuration, an `n·ln n` least-squares fit, seeded experiment drivers
//! (size scaling, degree and self-loop concentration, regime feasibility),
//! an exact-check battery, and CSV/JSON emission for the `nsis` binary.
//!
//! Everything here is orchestration: the chain, coupling, and exact-kernel
//! mathematics live in `nsis-core`. The harness adds three guarantees on
//! top:
//!
//! - every run is a pure function of its configuration and seed — worker
//!   count (`NSIS_WORKERS`) never changes an emitted number;
//! - emitted floats use shortest-round-trip formatting, so CSV and JSON
//!   re-parse to the exact in-memory values;
//! - every output embeds its seed and parameter provenance in the header.

pub mod checks;
pub mod config;
pub mod experiments;
pub mod fit;
pub mod report;
