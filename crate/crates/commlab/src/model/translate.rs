//! Protocol translations between the round model and the synchronized bit
//! model, preserving outputs on every input pair.

use super::round::{RoundMessage, RoundProtocol, RoundTranscript};
use super::sync::{SyncEvent, SyncHistory, SyncProtocol};
use super::{ceil_log2, ModelError, PlayerId, Symbol};
use std::sync::Arc;

/// Turn a round protocol into a half-duplex sync protocol.
///
/// Each round gets a window of `2^m + 1` consecutive timesteps, `m` the
/// round protocol's bit width; the scheduled speaker conveys their message
/// `v` by emitting a single `1` at offset `v` inside the window. Cost
/// contracts: `nonblank_bits <= budget_rounds` and
/// `horizon <= budget_rounds * (2^m + 1)` on every run.
pub fn rounds_to_sync<In: ?Sized + 'static>(p: &RoundProtocol<In>) -> SyncProtocol<In> {
    let window = (1usize << p.bits_per_round()) + 1;
    let speakers = p.speakers_arc();
    let rounds = speakers.len();
    let horizon = (rounds * window).max(1);
    let message = p.message_fn();
    let output = p.output_fn();

    let decode = {
        let speakers = Arc::clone(&speakers);
        move |history: &SyncHistory, upto: usize| -> RoundTranscript {
            let messages = (0..upto)
                .map(|round| {
                    let start = round * window;
                    let value = history
                        .event_in(speakers[round], start, start + window)
                        .map_or(0, |(step, _)| (step - start) as u64);
                    RoundMessage {
                        round,
                        speaker: speakers[round],
                        value,
                    }
                })
                .collect();
            RoundTranscript::from_messages(messages)
        }
    };

    let symbol = {
        let speakers = Arc::clone(&speakers);
        let message = Arc::clone(&message);
        let decode = decode.clone();
        move |player: PlayerId, input: &In, history: &SyncHistory| {
            let step = history.len();
            let round = step / window;
            if round >= rounds || speakers[round] != player {
                return Ok(Symbol::Blank);
            }
            let transcript = decode(history, round);
            let value = message(player, input, &transcript)?;
            Ok(if step % window == value as usize {
                Symbol::One
            } else {
                Symbol::Blank
            })
        }
    };

    let activity = {
        let speakers = Arc::clone(&speakers);
        let message = Arc::clone(&message);
        let decode = decode.clone();
        move |player: PlayerId, input: &In, history: &SyncHistory| {
            let step = history.len();
            for round in step / window..rounds {
                if speakers[round] != player {
                    continue;
                }
                let start = round * window;
                if start > step {
                    // Windows in between are not complete yet; the steps up
                    // to our next window are blank for us regardless.
                    return Ok(start);
                }
                let transcript = decode(history, round);
                let value = message(player, input, &transcript)?;
                let candidate = start + value as usize;
                if candidate >= step {
                    return Ok(candidate);
                }
            }
            Ok(horizon)
        }
    };

    let out = {
        let output = Arc::clone(&output);
        move |history: &SyncHistory| output(&decode(history, rounds))
    };

    SyncProtocol::new(horizon, true, symbol, out)
        .expect("horizon is at least 1")
        .with_event_plan(speakers.as_ref().clone())
        .with_activity_hint(activity)
}

/// Turn a half-duplex sync protocol with a declared event plan back into a
/// round protocol.
///
/// With `B` planned events, the result uses `B + 1` rounds of
/// `ceil(log2 horizon) + 1` bits. Round `i < B` carries the timestep and
/// symbol of the `i`-th non-blank emission, encoded as `2*step + bit`;
/// event timesteps strictly increase, so any value whose timestep fails to
/// increase serves as the sentinel "no further transmissions", and one
/// final round is reserved for it. A protocol that emits zero symbols on
/// some input while declaring a positive plan cannot signal the sentinel in
/// round 0 and is rejected at run time.
pub fn sync_to_rounds<In: ?Sized + 'static>(
    p: &SyncProtocol<In>,
) -> Result<RoundProtocol<In>, ModelError> {
    if !p.half_duplex() {
        return Err(ModelError::NotHalfDuplex);
    }
    let plan: Arc<Vec<PlayerId>> =
        Arc::new(p.event_plan().ok_or(ModelError::MissingEventPlan)?.to_vec());
    let horizon = p.horizon();
    let bits = ceil_log2(horizon as u64) + 1;
    if bits >= 64 {
        return Err(ModelError::InvalidParameter(format!(
            "horizon {horizon} needs {bits}-bit messages"
        )));
    }
    // The sentinel round reuses the last planned speaker, so that player's
    // own budget overflow is caught while simulating it.
    let mut speakers = plan.as_ref().clone();
    speakers.push(plan.last().copied().unwrap_or(PlayerId::Alice));

    let symbol = p.symbol_fn();
    let activity = p.activity_fn();
    let output = p.output_fn();

    let simulate_next = {
        let symbol = Arc::clone(&symbol);
        move |player: PlayerId,
              input: &In,
              events: &[SyncEvent],
              from: usize|
              -> Result<Option<(usize, Symbol)>, ModelError> {
            let mut history = SyncHistory::from_events(events.to_vec(), from);
            let mut step = from;
            while step < horizon {
                if let Some(hint) = &activity {
                    history.set_len(step);
                    let next = hint(player, input, &history)?.max(step);
                    if next >= horizon {
                        return Ok(None);
                    }
                    step = next;
                }
                history.set_len(step);
                let sym = symbol(player, input, &history)?;
                if !sym.is_blank() {
                    return Ok(Some((step, sym)));
                }
                step += 1;
            }
            Ok(None)
        }
    };

    let message = {
        let plan = Arc::clone(&plan);
        move |speaker: PlayerId, input: &In, transcript: &RoundTranscript| {
            let round = transcript.len();
            let (events, sentinel_seen) = decode_event_messages(transcript, &plan);
            if sentinel_seen {
                return Ok(0); // padding after an early sentinel
            }
            let from = events.last().map_or(0, |e| e.step + 1);
            if round < plan.len() {
                match simulate_next(speaker, input, &events, from)? {
                    Some((step, sym)) => {
                        Ok(((step as u64) << 1) | u64::from(sym.bit().unwrap_or(0)))
                    }
                    None if events.is_empty() => Err(ModelError::Input(
                        "no planned emission and the sentinel is not representable in round 0"
                            .into(),
                    )),
                    None => Ok(0), // timestep 0 fails to increase: sentinel
                }
            } else {
                // Final sentinel round; also catches this speaker exceeding
                // the declared event budget.
                if simulate_next(speaker, input, &events, from)?.is_some() {
                    return Err(ModelError::EventBudgetExceeded {
                        declared: plan.len(),
                    });
                }
                Ok(0)
            }
        }
    };

    let out = {
        let plan = Arc::clone(&plan);
        move |transcript: &RoundTranscript| {
            let (events, _) = decode_event_messages(transcript, &plan);
            output(&SyncHistory::from_events(events, horizon))
        }
    };

    RoundProtocol::new(bits, speakers, message, out)
}

/// Decode the event list carried by a back-translated transcript. Stops at
/// the first sentinel (a timestep that fails to strictly increase).
fn decode_event_messages(
    transcript: &RoundTranscript,
    plan: &[PlayerId],
) -> (Vec<SyncEvent>, bool) {
    let mut events = Vec::new();
    let mut prev: Option<usize> = None;
    for (message, &speaker) in transcript.messages().iter().zip(plan.iter()) {
        let step = (message.value >> 1) as usize;
        if prev.is_some_and(|p| step <= p) {
            return (events, true);
        }
        let sym = Symbol::from_bit((message.value & 1) as u8);
        let (alice, bob) = match speaker {
            PlayerId::Alice => (sym, Symbol::Blank),
            PlayerId::Bob => (Symbol::Blank, sym),
        };
        events.push(SyncEvent { step, alice, bob });
        prev = Some(step);
    }
    (events, false)
}
