//! A laboratory for two-party deterministic communication protocols.
//!
//! The crate implements two execution models — the classic round model, where
//! players alternate fixed-width messages, and the synchronized bit model,
//! where a shared clock lets silence carry information — together with
//! translations between them, a family of tree- and pointer-chasing problems
//! with brute-force evaluators, the combinatorial reductions linking those
//! problems to Median, executable baseline protocols with cost accounting,
//! and a toy-scale exhaustive protocol search over explicit function
//! matrices.
//!
//! Everything is deterministic: instance generators are seeded, protocol
//! runs are reproducible bit for bit, and every reduction ships a decode map
//! that is cross-checked against an independent evaluator.

pub mod analysis;
pub mod model;
pub mod problems;
pub mod protocols;
pub mod reductions;

pub use model::{CostReport, PlayerId, RoundProtocol, Symbol, SyncProtocol};
