//! Synchronized-bit protocols: a shared clock, symbols in {blank, 0, 1},
//! and only non-blank symbols counted as communication.

use super::{CostReport, ModelError, PlayerId, Symbol};
use serde::Serialize;
use std::sync::Arc;

/// Symbol function: maps the player, their private input and the public
/// two-channel history of all earlier timesteps to the symbol they emit now.
pub type SymbolFn<In> =
    dyn Fn(PlayerId, &In, &SyncHistory) -> Result<Symbol, ModelError> + Send + Sync;

/// Optional fast-forward hint: the earliest timestep `>= history.len()` at
/// which the player might emit a non-blank symbol. Every step before it is
/// promised blank for that player, which lets the executor skip silence
/// without materializing it. Returning `horizon` (or more) means "silent
/// from here on".
pub type ActivityFn<In> =
    dyn Fn(PlayerId, &In, &SyncHistory) -> Result<usize, ModelError> + Send + Sync;

/// Output function over the full public history.
pub type SyncOutputFn = dyn Fn(&SyncHistory) -> u64 + Send + Sync;

/// A timestep at which at least one player emitted a non-blank symbol.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct SyncEvent {
    pub step: usize,
    pub alice: Symbol,
    pub bob: Symbol,
}

/// The public two-channel history, stored sparsely: timesteps where both
/// players stayed blank are implicit. `len` is the number of elapsed steps;
/// all recorded events lie strictly below it.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct SyncHistory {
    len: usize,
    events: Vec<SyncEvent>,
}

impl SyncHistory {
    #[must_use]
    pub fn new() -> Self {
        Self::default()
    }

    /// Rebuild a history from non-blank events (sorted by step) and a length.
    #[must_use]
    pub fn from_events(events: Vec<SyncEvent>, len: usize) -> Self {
        debug_assert!(events.windows(2).all(|w| w[0].step < w[1].step));
        debug_assert!(events.last().is_none_or(|e| e.step < len));
        Self { len, events }
    }

    /// Number of elapsed timesteps.
    #[must_use]
    pub fn len(&self) -> usize {
        self.len
    }

    #[must_use]
    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// All timesteps with at least one non-blank symbol, in step order.
    #[must_use]
    pub fn events(&self) -> &[SyncEvent] {
        &self.events
    }

    /// Both channels at a given elapsed timestep.
    #[must_use]
    pub fn symbols_at(&self, step: usize) -> (Symbol, Symbol) {
        debug_assert!(step < self.len);
        match self.events.binary_search_by_key(&step, |e| e.step) {
            Ok(i) => (self.events[i].alice, self.events[i].bob),
            Err(_) => (Symbol::Blank, Symbol::Blank),
        }
    }

    /// The single non-blank event inside `[from, to)`, if any, on the given
    /// player's channel.
    #[must_use]
    pub fn event_in(&self, player: PlayerId, from: usize, to: usize) -> Option<(usize, Symbol)> {
        let start = self.events.partition_point(|e| e.step < from);
        self.events[start..]
            .iter()
            .take_while(|e| e.step < to)
            .find_map(|e| {
                let sym = match player {
                    PlayerId::Alice => e.alice,
                    PlayerId::Bob => e.bob,
                };
                (!sym.is_blank()).then_some((e.step, sym))
            })
    }

    /// Total non-blank symbols over both channels.
    #[must_use]
    pub fn nonblank_count(&self) -> u64 {
        self.events
            .iter()
            .map(|e| u64::from(!e.alice.is_blank()) + u64::from(!e.bob.is_blank()))
            .sum()
    }

    pub(crate) fn set_len(&mut self, len: usize) {
        debug_assert!(len >= self.len);
        self.len = len;
    }

    fn push_event(&mut self, event: SyncEvent) {
        debug_assert!(event.step >= self.len);
        self.events.push(event);
    }
}

/// A deterministic protocol in the synchronized bit model.
///
/// The horizon is fixed in advance: every run takes exactly `horizon`
/// timesteps. With `half_duplex` set, at most one player may emit a
/// non-blank symbol per timestep; the executor validates this on every
/// visited step.
///
/// `event_plan`, when present, declares the speaker order of the non-blank
/// emissions on every valid input. It is what makes the protocol
/// translatable back to the round model, where the speaker schedule must be
/// fixed before the inputs are seen.
#[derive(Clone)]
pub struct SyncProtocol<In: ?Sized> {
    horizon: usize,
    half_duplex: bool,
    event_plan: Option<Arc<Vec<PlayerId>>>,
    symbol: Arc<SymbolFn<In>>,
    activity: Option<Arc<ActivityFn<In>>>,
    output: Arc<SyncOutputFn>,
}

impl<In: ?Sized> SyncProtocol<In> {
    pub fn new(
        horizon: usize,
        half_duplex: bool,
        symbol: impl Fn(PlayerId, &In, &SyncHistory) -> Result<Symbol, ModelError>
            + Send
            + Sync
            + 'static,
        output: impl Fn(&SyncHistory) -> u64 + Send + Sync + 'static,
    ) -> Result<Self, ModelError> {
        if horizon == 0 {
            return Err(ModelError::InvalidParameter(
                "sync protocol horizon must be at least 1".into(),
            ));
        }
        Ok(Self {
            horizon,
            half_duplex,
            event_plan: None,
            symbol: Arc::new(symbol),
            activity: None,
            output: Arc::new(output),
        })
    }

    /// Declare the input-independent speaker order of non-blank emissions.
    #[must_use]
    pub fn with_event_plan(mut self, plan: Vec<PlayerId>) -> Self {
        self.event_plan = Some(Arc::new(plan));
        self
    }

    /// Attach a fast-forward hint so the executor can skip silent stretches.
    #[must_use]
    pub fn with_activity_hint(
        mut self,
        hint: impl Fn(PlayerId, &In, &SyncHistory) -> Result<usize, ModelError>
            + Send
            + Sync
            + 'static,
    ) -> Self {
        self.activity = Some(Arc::new(hint));
        self
    }

    #[must_use]
    pub fn horizon(&self) -> usize {
        self.horizon
    }

    #[must_use]
    pub fn half_duplex(&self) -> bool {
        self.half_duplex
    }

    #[must_use]
    pub fn event_plan(&self) -> Option<&[PlayerId]> {
        self.event_plan.as_deref().map(Vec::as_slice)
    }

    pub(crate) fn symbol_fn(&self) -> Arc<SymbolFn<In>> {
        Arc::clone(&self.symbol)
    }

    pub(crate) fn activity_fn(&self) -> Option<Arc<ActivityFn<In>>> {
        self.activity.as_ref().map(Arc::clone)
    }

    pub(crate) fn output_fn(&self) -> Arc<SyncOutputFn> {
        Arc::clone(&self.output)
    }

    #[must_use]
    pub fn compute_output(&self, history: &SyncHistory) -> u64 {
        (self.output)(history)
    }
}

/// Result of one synchronized-bit execution.
#[derive(Clone, Debug)]
pub struct SyncRun {
    pub output: u64,
    pub report: CostReport,
    pub history: SyncHistory,
}

/// Execute a sync protocol for exactly its horizon.
///
/// Without an activity hint every timestep queries both players. With one,
/// the executor jumps between candidate steps and trusts the hint that the
/// skipped range is blank, so a run's cost is proportional to the number of
/// events rather than the horizon.
pub fn run_sync_protocol<In: ?Sized>(
    p: &SyncProtocol<In>,
    input_alice: &In,
    input_bob: &In,
) -> Result<SyncRun, ModelError> {
    let mut history = SyncHistory::new();
    let mut step = 0usize;
    while step < p.horizon {
        let visit = match &p.activity {
            Some(hint) => {
                history.set_len(step);
                let next_a = hint(PlayerId::Alice, input_alice, &history)?.max(step);
                let next_b = hint(PlayerId::Bob, input_bob, &history)?.max(step);
                next_a.min(next_b)
            }
            None => step,
        };
        if visit >= p.horizon {
            break;
        }
        history.set_len(visit);
        let sym_a = (p.symbol)(PlayerId::Alice, input_alice, &history)?;
        let sym_b = (p.symbol)(PlayerId::Bob, input_bob, &history)?;
        if p.half_duplex && !sym_a.is_blank() && !sym_b.is_blank() {
            return Err(ModelError::HalfDuplexViolation { step: visit });
        }
        if !sym_a.is_blank() || !sym_b.is_blank() {
            history.push_event(SyncEvent {
                step: visit,
                alice: sym_a,
                bob: sym_b,
            });
        }
        step = visit + 1;
    }
    history.set_len(p.horizon);
    let output = (p.output)(&history);
    let report = CostReport {
        rounds_used: 0,
        max_bits_per_round: 0,
        total_bits: 0,
        timesteps_used: p.horizon as u64,
        nonblank_bits: history.nonblank_count(),
    };
    Ok(SyncRun {
        output,
        report,
        history,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn all_blank_protocol_costs_nothing() {
        let p: SyncProtocol<u64> =
            SyncProtocol::new(4, true, |_, _, _| Ok(Symbol::Blank), |_| 9).unwrap();
        let run = run_sync_protocol(&p, &0, &0).unwrap();
        assert_eq!(run.output, 9);
        assert_eq!(run.report.nonblank_bits, 0);
        assert_eq!(run.report.timesteps_used, 4);
        assert!(run.history.events().is_empty());
    }

    #[test]
    fn single_marker_counts_one_bit() {
        let p: SyncProtocol<u64> = SyncProtocol::new(
            5,
            true,
            |player, _, h| {
                Ok(if player == PlayerId::Alice && h.len() == 3 {
                    Symbol::One
                } else {
                    Symbol::Blank
                })
            },
            |h| h.event_in(PlayerId::Alice, 0, h.len()).map_or(0, |(s, _)| s as u64),
        )
        .unwrap();
        let run = run_sync_protocol(&p, &0, &0).unwrap();
        assert_eq!(run.report.nonblank_bits, 1);
        assert_eq!(run.report.timesteps_used, 5);
        assert_eq!(run.output, 3);
    }

    #[test]
    fn half_duplex_violation_reports_timestep() {
        let p: SyncProtocol<u64> = SyncProtocol::new(
            3,
            true,
            |_, _, h| Ok(if h.len() == 2 { Symbol::Zero } else { Symbol::Blank }),
            |_| 0,
        )
        .unwrap();
        match run_sync_protocol(&p, &0, &0).unwrap_err() {
            ModelError::HalfDuplexViolation { step } => assert_eq!(step, 2),
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn both_players_may_speak_when_full_duplex() {
        let p: SyncProtocol<u64> = SyncProtocol::new(
            3,
            false,
            |_, _, _| Ok(Symbol::One),
            |h| h.nonblank_count(),
        )
        .unwrap();
        let run = run_sync_protocol(&p, &0, &0).unwrap();
        assert_eq!(run.report.nonblank_bits, 6);
        assert_eq!(run.output, 6);
    }

    #[test]
    fn activity_hint_skips_silence_without_changing_the_run() {
        let symbol = |player: PlayerId, _: &u64, h: &SyncHistory| {
            Ok(if player == PlayerId::Bob && h.len() == 900 {
                Symbol::One
            } else {
                Symbol::Blank
            })
        };
        let dense: SyncProtocol<u64> =
            SyncProtocol::new(1000, true, symbol, |h| h.nonblank_count()).unwrap();
        let hinted = SyncProtocol::new(1000, true, symbol, |h| h.nonblank_count())
            .unwrap()
            .with_activity_hint(|player, _, h| {
                Ok(match player {
                    PlayerId::Alice => usize::MAX,
                    PlayerId::Bob => h.len().max(900),
                })
            });
        let a = run_sync_protocol(&dense, &0, &0).unwrap();
        let b = run_sync_protocol(&hinted, &0, &0).unwrap();
        assert_eq!(a.history, b.history);
        assert_eq!(a.report, b.report);
    }
}
