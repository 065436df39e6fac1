//! Round-model protocols and their deterministic executor.

use super::{CostReport, ModelError, PlayerId};
use serde::Serialize;
use std::sync::Arc;

/// Message function: the scheduled speaker maps their private input and the
/// public transcript so far to a value below `2^bits_per_round`.
pub type MessageFn<In> =
    dyn Fn(PlayerId, &In, &RoundTranscript) -> Result<u64, ModelError> + Send + Sync;

/// Output function: both players derive the answer from the transcript alone.
pub type RoundOutputFn = dyn Fn(&RoundTranscript) -> u64 + Send + Sync;

/// One transmitted message.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct RoundMessage {
    pub round: usize,
    pub speaker: PlayerId,
    pub value: u64,
}

/// The public record of a round-model run, append-only while running.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct RoundTranscript {
    messages: Vec<RoundMessage>,
}

impl RoundTranscript {
    #[must_use]
    pub fn new() -> Self {
        Self::default()
    }

    #[must_use]
    pub fn len(&self) -> usize {
        self.messages.len()
    }

    #[must_use]
    pub fn is_empty(&self) -> bool {
        self.messages.is_empty()
    }

    #[must_use]
    pub fn messages(&self) -> &[RoundMessage] {
        &self.messages
    }

    /// Value of the `round`-th message.
    #[must_use]
    pub fn value(&self, round: usize) -> u64 {
        self.messages[round].value
    }

    pub(crate) fn from_messages(messages: Vec<RoundMessage>) -> Self {
        Self { messages }
    }

    fn push(&mut self, msg: RoundMessage) {
        self.messages.push(msg);
    }
}

/// A deterministic protocol in the round model.
///
/// The speaker schedule is oblivious: round `i` always belongs to
/// `speakers[i]`, independent of the inputs. Execution always runs the full
/// schedule; protocols that finish their real work early pad with zeros.
#[derive(Clone)]
pub struct RoundProtocol<In: ?Sized> {
    bits_per_round: u32,
    speakers: Arc<Vec<PlayerId>>,
    message: Arc<MessageFn<In>>,
    output: Arc<RoundOutputFn>,
}

impl<In: ?Sized> RoundProtocol<In> {
    /// Build a protocol. `bits_per_round` must stay below 64 so message
    /// ranges fit in a `u64`.
    pub fn new(
        bits_per_round: u32,
        speakers: Vec<PlayerId>,
        message: impl Fn(PlayerId, &In, &RoundTranscript) -> Result<u64, ModelError>
            + Send
            + Sync
            + 'static,
        output: impl Fn(&RoundTranscript) -> u64 + Send + Sync + 'static,
    ) -> Result<Self, ModelError> {
        if bits_per_round >= 64 {
            return Err(ModelError::InvalidParameter(format!(
                "bits_per_round {bits_per_round} does not fit a u64 message"
            )));
        }
        Ok(Self {
            bits_per_round,
            speakers: Arc::new(speakers),
            message: Arc::new(message),
            output: Arc::new(output),
        })
    }

    #[must_use]
    pub fn budget_rounds(&self) -> usize {
        self.speakers.len()
    }

    #[must_use]
    pub fn bits_per_round(&self) -> u32 {
        self.bits_per_round
    }

    #[must_use]
    pub fn speakers(&self) -> &[PlayerId] {
        &self.speakers
    }

    #[must_use]
    pub fn speaker(&self, round: usize) -> PlayerId {
        self.speakers[round]
    }

    pub(crate) fn message_fn(&self) -> Arc<MessageFn<In>> {
        Arc::clone(&self.message)
    }

    pub(crate) fn output_fn(&self) -> Arc<RoundOutputFn> {
        Arc::clone(&self.output)
    }

    pub(crate) fn speakers_arc(&self) -> Arc<Vec<PlayerId>> {
        Arc::clone(&self.speakers)
    }

    #[must_use]
    pub fn compute_output(&self, transcript: &RoundTranscript) -> u64 {
        (self.output)(transcript)
    }
}

/// Result of one round-model execution.
#[derive(Clone, Debug)]
pub struct RoundRun {
    pub output: u64,
    pub report: CostReport,
    pub transcript: RoundTranscript,
}

/// Execute a round protocol on a pair of private inputs.
///
/// The run is reproducible bit for bit: the transcript is a pure function of
/// the protocol and the inputs. A message at or above `2^bits_per_round`
/// aborts the run with [`ModelError::MessageOutOfRange`].
pub fn run_round_protocol<In: ?Sized>(
    p: &RoundProtocol<In>,
    input_alice: &In,
    input_bob: &In,
) -> Result<RoundRun, ModelError> {
    let mut transcript = RoundTranscript::new();
    let limit = 1u64 << p.bits_per_round;
    for (round, &speaker) in p.speakers.iter().enumerate() {
        let input = match speaker {
            PlayerId::Alice => input_alice,
            PlayerId::Bob => input_bob,
        };
        let value = (p.message)(speaker, input, &transcript)?;
        if value >= limit {
            return Err(ModelError::MessageOutOfRange {
                round,
                speaker,
                value,
                bits: p.bits_per_round,
            });
        }
        transcript.push(RoundMessage {
            round,
            speaker,
            value,
        });
    }
    let output = (p.output)(&transcript);
    let rounds = transcript.len() as u64;
    let report = CostReport {
        rounds_used: rounds,
        max_bits_per_round: if rounds > 0 {
            u64::from(p.bits_per_round)
        } else {
            0
        },
        total_bits: rounds * u64::from(p.bits_per_round),
        timesteps_used: 0,
        nonblank_bits: 0,
    };
    Ok(RoundRun {
        output,
        report,
        transcript,
    })
}
