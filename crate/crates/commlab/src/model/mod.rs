//! The two communication models and the translations between them.
//!
//! A [`RoundProtocol`] is the standard deterministic model: players take
//! turns according to a fixed speaker schedule and each round carries one
//! message of a declared bit width. A [`SyncProtocol`] runs on a shared
//! clock for a fixed horizon; at every timestep each player emits `0`, `1`
//! or a blank, and only non-blank symbols count toward communication.
//!
//! [`translate::rounds_to_sync`] and [`translate::sync_to_rounds`] convert
//! protocols between the models while preserving outputs on every input
//! pair; the cost contracts they satisfy are spelled out on the functions.

mod round;
mod sync;
pub mod translate;

pub use round::{run_round_protocol, RoundMessage, RoundProtocol, RoundRun, RoundTranscript};
pub use sync::{run_sync_protocol, SyncEvent, SyncHistory, SyncProtocol, SyncRun};
pub use translate::{rounds_to_sync, sync_to_rounds};

use serde::{Deserialize, Serialize};
use std::fmt;
use thiserror::Error;

/// One of the two participants.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PlayerId {
    Alice,
    Bob,
}

impl PlayerId {
    /// The opposite player.
    #[must_use]
    pub fn other(self) -> Self {
        match self {
            PlayerId::Alice => PlayerId::Bob,
            PlayerId::Bob => PlayerId::Alice,
        }
    }

    /// Owner of a 1-based tree layer: Alice holds the odd layers (the root
    /// counts as layer 1), Bob the even ones.
    #[must_use]
    pub fn for_layer(layer: u32) -> Self {
        if layer % 2 == 1 {
            PlayerId::Alice
        } else {
            PlayerId::Bob
        }
    }

    /// Speaker of a 0-based round index under strict alternation starting
    /// with Alice.
    #[must_use]
    pub fn for_round(round: usize) -> Self {
        if round.is_multiple_of(2) {
            PlayerId::Alice
        } else {
            PlayerId::Bob
        }
    }
}

impl fmt::Display for PlayerId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PlayerId::Alice => write!(f, "alice"),
            PlayerId::Bob => write!(f, "bob"),
        }
    }
}

/// A channel symbol in the synchronized bit model. Blanks are free: they do
/// not count toward `nonblank_bits`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Symbol {
    #[serde(rename = "blank")]
    Blank,
    #[serde(rename = "0")]
    Zero,
    #[serde(rename = "1")]
    One,
}

impl Symbol {
    #[must_use]
    pub fn is_blank(self) -> bool {
        matches!(self, Symbol::Blank)
    }

    /// The transmitted bit, if any.
    #[must_use]
    pub fn bit(self) -> Option<u8> {
        match self {
            Symbol::Blank => None,
            Symbol::Zero => Some(0),
            Symbol::One => Some(1),
        }
    }

    #[must_use]
    pub fn from_bit(bit: u8) -> Self {
        if bit == 0 {
            Symbol::Zero
        } else {
            Symbol::One
        }
    }
}

/// Measured cost of a single protocol run.
///
/// One record covers both models: a round-model run leaves the sync fields
/// at zero and vice versa. `nonblank_bits` counts every non-blank symbol
/// from either player; blanks are free.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CostReport {
    pub rounds_used: u64,
    pub max_bits_per_round: u64,
    pub total_bits: u64,
    pub timesteps_used: u64,
    pub nonblank_bits: u64,
}

impl CostReport {
    /// Serialize as one line of JSON, the run-record wire form.
    pub fn to_json_line(&self) -> String {
        serde_json::to_string(self).expect("cost report serializes")
    }
}

/// Errors raised while constructing, translating or executing protocols.
#[derive(Debug, Error)]
pub enum ModelError {
    #[error("round {round}: {speaker} sent {value}, exceeding the {bits}-bit message budget")]
    MessageOutOfRange {
        round: usize,
        speaker: PlayerId,
        value: u64,
        bits: u32,
    },
    #[error("half-duplex violation: both players emitted a symbol at timestep {step}")]
    HalfDuplexViolation { step: usize },
    #[error("declared budget of {declared} non-blank symbols exceeded during simulation")]
    EventBudgetExceeded { declared: usize },
    #[error("sync protocol carries no event plan; sync_to_rounds needs a declared speaker order")]
    MissingEventPlan,
    #[error("sync_to_rounds requires a half-duplex protocol")]
    NotHalfDuplex,
    #[error("invalid protocol parameter: {0}")]
    InvalidParameter(String),
    #[error("input outside the protocol's domain: {0}")]
    Input(String),
}

/// `⌈log2 x⌉` for `x ≥ 1`.
#[must_use]
pub fn ceil_log2(x: u64) -> u32 {
    debug_assert!(x >= 1);
    64 - (x - 1).leading_zeros().min(64)
}
