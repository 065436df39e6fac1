//! Executable protocol families with declared, automatically checked cost
//! laws.
//!
//! Each constructor fixes a problem size, builds the protocol, and bundles
//! it with the bounds its cost report must satisfy; `run` re-checks the law
//! after every execution. Players read only their own half of the instance
//! they are handed, so locality can be probed by mutating the other half.

use crate::model::{
    ceil_log2, run_round_protocol, run_sync_protocol, ModelError, PlayerId, RoundProtocol,
    RoundRun, Symbol, SyncProtocol, SyncRun,
};
use crate::problems::{MedianInstance, PointerJumpingInstance, StrategyInstance};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum FamilyError {
    #[error("invalid family parameter: {0}")]
    Param(String),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("cost law violated for {family}: {field} = {actual}, law requires {law}")]
    CostLaw {
        family: &'static str,
        field: &'static str,
        actual: u64,
        law: String,
    },
}

/// One bound of a cost law.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Bound {
    #[default]
    Any,
    AtMost(u64),
    Exactly(u64),
}

impl Bound {
    fn admits(self, actual: u64) -> bool {
        match self {
            Bound::Any => true,
            Bound::AtMost(b) => actual <= b,
            Bound::Exactly(b) => actual == b,
        }
    }

    fn describe(self) -> String {
        match self {
            Bound::Any => "anything".into(),
            Bound::AtMost(b) => format!("<= {b}"),
            Bound::Exactly(b) => format!("== {b}"),
        }
    }
}

/// Declared bounds on a family's cost report, checked after every run.
#[derive(Clone, Copy, Debug, Default)]
pub struct CostLaw {
    pub rounds: Bound,
    pub bits_per_round: Bound,
    pub total_bits: Bound,
    pub timesteps: Bound,
    pub nonblank: Bound,
}

impl CostLaw {
    fn check(&self, family: &'static str, report: &crate::model::CostReport) -> Result<(), FamilyError> {
        let checks = [
            ("rounds_used", self.rounds, report.rounds_used),
            (
                "max_bits_per_round",
                self.bits_per_round,
                report.max_bits_per_round,
            ),
            ("total_bits", self.total_bits, report.total_bits),
            ("timesteps_used", self.timesteps, report.timesteps_used),
            ("nonblank_bits", self.nonblank, report.nonblank_bits),
        ];
        for (field, bound, actual) in checks {
            if !bound.admits(actual) {
                return Err(FamilyError::CostLaw {
                    family,
                    field,
                    actual,
                    law: bound.describe(),
                });
            }
        }
        Ok(())
    }
}

/// A round-model protocol family instantiated at a fixed size.
pub struct RoundFamily<In: ?Sized> {
    pub name: &'static str,
    pub protocol: RoundProtocol<In>,
    pub law: CostLaw,
}

impl<In: ?Sized> RoundFamily<In> {
    /// Execute and verify the declared cost law.
    pub fn run(&self, input_alice: &In, input_bob: &In) -> Result<RoundRun, FamilyError> {
        let run = run_round_protocol(&self.protocol, input_alice, input_bob)?;
        self.law.check(self.name, &run.report)?;
        Ok(run)
    }
}

/// A synchronized-bit protocol family instantiated at a fixed size.
pub struct SyncFamily<In: ?Sized> {
    pub name: &'static str,
    pub protocol: SyncProtocol<In>,
    pub law: CostLaw,
}

impl<In: ?Sized> SyncFamily<In> {
    pub fn run(&self, input_alice: &In, input_bob: &In) -> Result<SyncRun, FamilyError> {
        let run = run_sync_protocol(&self.protocol, input_alice, input_bob)?;
        self.law.check(self.name, &run.report)?;
        Ok(run)
    }
}

/// The naive Strategy descent: `h` alternating single-bit rounds, the
/// layer's owner announcing the label at the current path vertex. Costs
/// exactly `h` rounds and `h` bits.
pub fn strategy_naive_protocol(height: u32) -> Result<RoundFamily<StrategyInstance>, FamilyError> {
    if height == 0 || height > 26 {
        return Err(FamilyError::Param(format!(
            "strategy height {height} out of range [1, 26]"
        )));
    }
    let speakers = (0..height as usize).map(PlayerId::for_round).collect();
    let protocol = RoundProtocol::new(
        1,
        speakers,
        move |_, inst: &StrategyInstance, t| {
            if inst.height != height {
                return Err(ModelError::Input(format!(
                    "instance height {} does not match protocol height {height}",
                    inst.height
                )));
            }
            let vertex = t
                .messages()
                .iter()
                .fold(1u64, |v, m| 2 * v + m.value);
            Ok(u64::from(inst.labels[(vertex - 1) as usize]))
        },
        move |t| {
            let vertex = t
                .messages()
                .iter()
                .fold(1u64, |v, m| 2 * v + m.value);
            vertex - (1 << height)
        },
    )?;
    Ok(RoundFamily {
        name: "strategy-naive",
        protocol,
        law: CostLaw {
            rounds: Bound::Exactly(u64::from(height)),
            bits_per_round: Bound::Exactly(1),
            total_bits: Bound::Exactly(u64::from(height)),
            ..CostLaw::default()
        },
    })
}

/// Block layout of the batched Strategy protocol.
#[derive(Clone, Copy)]
struct BatchLayout {
    height: u32,
    block: u32,
    blocks: u32,
    window: usize,
}

impl BatchLayout {
    fn new(height: u32, block: u32) -> Result<Self, FamilyError> {
        if height == 0 || height > 26 {
            return Err(FamilyError::Param(format!(
                "strategy height {height} out of range [1, 26]"
            )));
        }
        if block == 0 || block > height {
            return Err(FamilyError::Param(format!(
                "block size {block} out of range [1, {height}]"
            )));
        }
        let window = 1usize
            .checked_shl(
                1u32.checked_shl(block)
                    .filter(|&w| w < 63)
                    .ok_or_else(|| FamilyError::Param(format!("block size {block} overflows the window")))?,
            )
            .and_then(|w| w.checked_add(1))
            .ok_or_else(|| FamilyError::Param(format!("block size {block} overflows the window")))?;
        let blocks = height.div_ceil(block);
        (2 * blocks as usize)
            .checked_mul(window)
            .ok_or_else(|| FamilyError::Param("horizon overflows".into()))?;
        Ok(Self {
            height,
            block,
            blocks,
            window,
        })
    }

    fn horizon(self) -> usize {
        2 * self.blocks as usize * self.window
    }

    /// Layers covered by block `t` span relative depths `0..block_height`.
    fn block_height(self, t: u32) -> u32 {
        self.block.min(self.height - t * self.block)
    }

    fn window_start(self, t: u32, player: PlayerId) -> usize {
        t as usize * 2 * self.window
            + match player {
                PlayerId::Alice => 0,
                PlayerId::Bob => self.window,
            }
    }

    /// Pack the player's labels on the block-`t` subtree below `vertex`,
    /// enumerated in local heap order.
    fn encode(self, player: PlayerId, inst: &StrategyInstance, vertex: u64, t: u32) -> u64 {
        let mut value = 0u64;
        let mut index = 0u32;
        for u in 1..1u64 << self.block_height(t) {
            let rel_depth = u.ilog2();
            if PlayerId::for_layer(t * self.block + rel_depth + 1) == player {
                let global = (vertex << rel_depth) + (u - (1 << rel_depth));
                value |= u64::from(inst.labels[(global - 1) as usize]) << index;
                index += 1;
            }
        }
        value
    }

    /// Descend the block given both packed label words.
    fn descend(self, mut vertex: u64, t: u32, packed_alice: u64, packed_bob: u64) -> u64 {
        let mut u = 1u64;
        for rel_depth in 0..self.block_height(t) {
            let owner = PlayerId::for_layer(t * self.block + rel_depth + 1);
            // The current vertex's bit position in the packed word is its
            // rank among the owner's vertices in enumeration order.
            let mut index = 0;
            for prior in 1..u {
                if PlayerId::for_layer(t * self.block + prior.ilog2() + 1) == owner {
                    index += 1;
                }
            }
            let packed = match owner {
                PlayerId::Alice => packed_alice,
                PlayerId::Bob => packed_bob,
            };
            let bit = (packed >> index) & 1;
            vertex = 2 * vertex + bit;
            u = 2 * u + bit;
        }
        vertex
    }

    /// Replay the descent through the first `upto` completed blocks.
    fn replay(self, history: &crate::model::SyncHistory, upto: u32) -> u64 {
        let mut vertex = 1u64;
        for t in 0..upto {
            let offset = |player: PlayerId| {
                let start = self.window_start(t, player);
                history
                    .event_in(player, start, start + self.window)
                    .map_or(0, |(step, _)| (step - start) as u64)
            };
            vertex = self.descend(vertex, t, offset(PlayerId::Alice), offset(PlayerId::Bob));
        }
        vertex
    }
}

/// The batched Strategy protocol in the synchronized bit model.
///
/// Descent proceeds in `ceil(h/m)` blocks of `m` layers. Per block each
/// player in turn emits one non-blank symbol whose timestep offset, inside
/// a window of `2^(2^m) + 1` steps, packs all their labels on the current
/// block subtree; then both descend the block locally. Non-blank cost is
/// exactly `2*ceil(h/m)` regardless of the height.
pub fn strategy_batched_sync_protocol(
    height: u32,
    block: u32,
) -> Result<SyncFamily<StrategyInstance>, FamilyError> {
    let layout = BatchLayout::new(height, block)?;
    let blocks = layout.blocks;
    let horizon = layout.horizon();

    let guard = move |inst: &StrategyInstance| {
        if inst.height != height {
            return Err(ModelError::Input(format!(
                "instance height {} does not match protocol height {height}",
                inst.height
            )));
        }
        Ok(())
    };

    let symbol = move |player: PlayerId, inst: &StrategyInstance, h: &crate::model::SyncHistory| {
        guard(inst)?;
        let step = h.len();
        let t = (step / (2 * layout.window)) as u32;
        if t >= blocks {
            return Ok(Symbol::Blank);
        }
        let start = layout.window_start(t, player);
        if step < start || step >= start + layout.window {
            return Ok(Symbol::Blank);
        }
        let vertex = layout.replay(h, t);
        let value = layout.encode(player, inst, vertex, t) as usize;
        Ok(if step == start + value {
            Symbol::One
        } else {
            Symbol::Blank
        })
    };

    let activity = move |player: PlayerId, inst: &StrategyInstance, h: &crate::model::SyncHistory| {
        guard(inst)?;
        let step = h.len();
        for t in (step / (2 * layout.window)) as u32..blocks {
            let start = layout.window_start(t, player);
            if start + layout.window <= step {
                continue;
            }
            if step < t as usize * 2 * layout.window {
                // Earlier blocks are still in flight; everything up to our
                // window is blank for us anyway.
                return Ok(start);
            }
            let vertex = layout.replay(h, t);
            let candidate = start + layout.encode(player, inst, vertex, t) as usize;
            if candidate >= step {
                return Ok(candidate);
            }
        }
        Ok(horizon)
    };

    let output = move |h: &crate::model::SyncHistory| {
        layout.replay(h, blocks) - (1u64 << height)
    };

    let protocol = SyncProtocol::new(horizon, true, symbol, output)?
        .with_event_plan(
            (0..blocks)
                .flat_map(|_| [PlayerId::Alice, PlayerId::Bob])
                .collect(),
        )
        .with_activity_hint(activity);

    Ok(SyncFamily {
        name: "strategy-batched",
        protocol,
        law: CostLaw {
            timesteps: Bound::Exactly(horizon as u64),
            nonblank: Bound::Exactly(2 * u64::from(blocks)),
            ..CostLaw::default()
        },
    })
}

/// Rank binary search for the lower median over universe `{1..l}`.
///
/// The search interval halves once per round after a bootstrap message:
/// every message carries the direction just resolved plus the speaker's
/// element count below the next midpoint, so `ceil(log2 l) + 1` rounds of
/// `2*ceil(log2(l+1)) + 1` bits suffice. At `l = 1` the answer is forced
/// and the protocol is empty.
pub fn median_binsearch_protocol(
    universe_bound: u64,
) -> Result<RoundFamily<MedianInstance>, FamilyError> {
    if universe_bound == 0 {
        return Err(FamilyError::Param("universe bound must be >= 1".into()));
    }
    let l = universe_bound;
    if l == 1 {
        let protocol = RoundProtocol::new(1, Vec::new(), |_, _: &MedianInstance, _| Ok(0), |_| 1)?;
        return Ok(RoundFamily {
            name: "median-binsearch",
            protocol,
            law: CostLaw {
                rounds: Bound::Exactly(0),
                total_bits: Bound::Exactly(0),
                ..CostLaw::default()
            },
        });
    }

    let count_field = ceil_log2(l + 1);
    let halvings = ceil_log2(l);
    let rounds = halvings as usize + 1;
    let bits = 2 * count_field + 1;
    let mask = (1u64 << count_field) - 1;

    let halve = move |lo: u64, hi: u64, below: bool| -> (u64, u64) {
        if lo == hi {
            // Interval already pinned; later rounds are padding.
            (lo, hi)
        } else {
            let mid = (lo + hi) / 2;
            if below {
                (lo, mid)
            } else {
                (mid + 1, hi)
            }
        }
    };

    /// Direction bit carried by the round-`j` message: the final round is
    /// bare, every other one stores it just above the count field.
    fn direction(value: u64, j: usize, halvings: u32, count_field: u32) -> bool {
        if j == halvings as usize {
            value & 1 == 1
        } else {
            (value >> count_field) & 1 == 1
        }
    }

    let message = move |speaker: PlayerId, inst: &MedianInstance, t: &crate::model::RoundTranscript| {
        let own = match speaker {
            PlayerId::Alice => &inst.set_a,
            PlayerId::Bob => &inst.set_b,
        };
        let count_below = |v: u64| own.partition_point(|&x| x <= v) as u64;
        let j = t.len();
        if j == 0 {
            let mid = l.div_ceil(2);
            return Ok((own.len() as u64) << count_field | count_below(mid));
        }
        // Replay the interval through the directions already on the wire.
        let (mut lo, mut hi) = (1u64, l);
        for q in 1..j {
            let below = direction(t.value(q), q, halvings, count_field);
            (lo, hi) = halve(lo, hi, below);
        }
        let mid = (lo + hi) / 2;
        // Resolve this round's direction: the previous speaker sent their
        // count below our current midpoint.
        let other_count = t.value(j - 1) & mask;
        let size_a = t.value(0) >> count_field;
        let size_b = if j == 1 {
            own.len() as u64
        } else {
            t.value(1) >> (count_field + 1)
        };
        let weight = size_a + size_b;
        if weight == 0 {
            return Err(ModelError::Input("empty multiset union".into()));
        }
        let threshold = weight.div_ceil(2);
        let below = other_count + count_below(mid) >= threshold;
        let (lo2, hi2) = halve(lo, hi, below);
        Ok(if j == halvings as usize {
            u64::from(below)
        } else {
            let next_mid = (lo2 + hi2) / 2;
            let head = if j == 1 {
                (own.len() as u64) << (count_field + 1)
            } else {
                0
            };
            head | u64::from(below) << count_field | count_below(next_mid)
        })
    };

    let output = move |t: &crate::model::RoundTranscript| {
        let (mut lo, mut hi) = (1u64, l);
        for q in 1..=halvings as usize {
            let below = direction(t.value(q), q, halvings, count_field);
            (lo, hi) = halve(lo, hi, below);
        }
        debug_assert_eq!(lo, hi);
        lo
    };

    let speakers = (0..rounds).map(PlayerId::for_round).collect();
    let protocol = RoundProtocol::new(bits, speakers, message, output)?;
    Ok(RoundFamily {
        name: "median-binsearch",
        protocol,
        law: CostLaw {
            rounds: Bound::Exactly(rounds as u64),
            bits_per_round: Bound::Exactly(u64::from(bits)),
            total_bits: Bound::AtMost(rounds as u64 * u64::from(bits)),
            ..CostLaw::default()
        },
    })
}

/// The naive Pointer-Jumping protocol: `k` alternating rounds of
/// `ceil(log2 n)` bits, each announcing the next pointer reached.
pub fn pointer_jumping_naive_protocol(
    size: u32,
    steps: u32,
) -> Result<RoundFamily<PointerJumpingInstance>, FamilyError> {
    if size == 0 || steps == 0 {
        return Err(FamilyError::Param("size and steps must be >= 1".into()));
    }
    let bits = ceil_log2(u64::from(size));
    let message = move |speaker: PlayerId, inst: &PointerJumpingInstance, t: &crate::model::RoundTranscript| {
        if inst.size != size || inst.steps != steps {
            return Err(ModelError::Input(format!(
                "instance ({}, {}) does not match protocol ({size}, {steps})",
                inst.size, inst.steps
            )));
        }
        let list = match speaker {
            PlayerId::Alice => &inst.ptr_a,
            PlayerId::Bob => &inst.ptr_b,
        };
        let current = if t.is_empty() {
            u64::from(inst.start)
        } else {
            t.value(t.len() - 1) + 1
        };
        Ok(u64::from(list[(current - 1) as usize]) - 1)
    };
    let output = move |t: &crate::model::RoundTranscript| t.value(t.len() - 1) + 1;
    let speakers = (0..steps as usize).map(PlayerId::for_round).collect();
    let protocol = RoundProtocol::new(bits, speakers, message, output)?;
    Ok(RoundFamily {
        name: "pj-naive",
        protocol,
        law: CostLaw {
            rounds: Bound::Exactly(u64::from(steps)),
            bits_per_round: Bound::Exactly(u64::from(bits)),
            total_bits: Bound::Exactly(u64::from(steps) * u64::from(bits)),
            ..CostLaw::default()
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{rounds_to_sync, sync_to_rounds};
    use crate::problems::{
        eval_median, eval_pointer_jumping, eval_strategy, gen_median, gen_pointer_jumping,
        gen_strategy, MedianInstance, PointerJumpingInstance, StrategyInstance,
    };

    fn all_strategies(height: u32) -> impl Iterator<Item = StrategyInstance> {
        let count = (1u64 << height) - 1;
        (0..1u64 << count).map(move |bits| StrategyInstance {
            height,
            labels: (0..count).map(|i| ((bits >> i) & 1) as u8).collect(),
        })
    }

    #[test]
    fn naive_strategy_all_zero_costs_exactly_h_bits() {
        let family = strategy_naive_protocol(5).unwrap();
        let inst = StrategyInstance {
            height: 5,
            labels: vec![0; 31],
        };
        let run = family.run(&inst, &inst).unwrap();
        assert_eq!(run.output, 0);
        assert_eq!(run.report.rounds_used, 5);
        assert_eq!(run.report.total_bits, 5);
    }

    #[test]
    fn naive_strategy_matches_oracle_exhaustively() {
        for height in 1..=4u32 {
            let family = strategy_naive_protocol(height).unwrap();
            for inst in all_strategies(height) {
                let run = family.run(&inst, &inst).unwrap();
                assert_eq!(run.output, eval_strategy(&inst));
                // Transcript bits equal the labels along the reached path.
                let mut vertex = 1u64;
                for msg in run.transcript.messages() {
                    assert_eq!(msg.value, u64::from(inst.labels[(vertex - 1) as usize]));
                    vertex = 2 * vertex + msg.value;
                }
            }
        }
    }

    #[test]
    fn naive_strategy_reads_only_own_layers() {
        let inst = gen_strategy(3, 4).unwrap();
        let family = strategy_naive_protocol(4).unwrap();
        // Corrupt Bob's layers in Alice's copy and vice versa: the run must
        // not change, because each speaker reads only their own layers.
        let mut for_alice = inst.clone();
        let mut for_bob = inst.clone();
        for v in 1..for_alice.labels.len() as u64 + 1 {
            let layer = v.ilog2() + 1;
            if PlayerId::for_layer(layer) == PlayerId::Bob {
                for_alice.labels[(v - 1) as usize] ^= 1;
            } else {
                for_bob.labels[(v - 1) as usize] ^= 1;
            }
        }
        let mixed = family.run(&for_alice, &for_bob).unwrap();
        let clean = family.run(&inst, &inst).unwrap();
        assert_eq!(mixed.output, clean.output);
        assert_eq!(mixed.transcript, clean.transcript);
    }

    #[test]
    fn batched_strategy_matches_oracle_exhaustively_at_block_one() {
        for height in 1..=3u32 {
            let family = strategy_batched_sync_protocol(height, 1).unwrap();
            for inst in all_strategies(height) {
                let run = family.run(&inst, &inst).unwrap();
                assert_eq!(run.output, eval_strategy(&inst), "height {height}");
            }
        }
    }

    #[test]
    fn batched_strategy_cost_follows_the_block_count() {
        let family = strategy_batched_sync_protocol(8, 3).unwrap();
        let inst = gen_strategy(11, 8).unwrap();
        let run = family.run(&inst, &inst).unwrap();
        assert_eq!(run.output, eval_strategy(&inst));
        assert_eq!(run.report.nonblank_bits, 6);

        let family = strategy_batched_sync_protocol(12, 4).unwrap();
        let inst = gen_strategy(12, 12).unwrap();
        let run = family.run(&inst, &inst).unwrap();
        assert_eq!(run.output, eval_strategy(&inst));
        assert_eq!(run.report.nonblank_bits, 6);
        assert!(run.report.nonblank_bits < 12);
    }

    #[test]
    fn batched_strategy_rejects_oversized_blocks() {
        assert!(matches!(
            strategy_batched_sync_protocol(80, 7),
            Err(FamilyError::Param(_))
        ));
        assert!(matches!(
            strategy_batched_sync_protocol(4, 5),
            Err(FamilyError::Param(_))
        ));
    }

    #[test]
    fn batched_strategy_translates_to_rounds_within_budget() {
        let height = 8;
        let block = 3;
        let family = strategy_batched_sync_protocol(height, block).unwrap();
        let back = sync_to_rounds(&family.protocol).unwrap();
        let blocks = height.div_ceil(block) as usize;
        assert_eq!(back.budget_rounds(), 2 * blocks + 1);
        let horizon = family.protocol.horizon() as u64;
        assert_eq!(u64::from(back.bits_per_round()), u64::from(ceil_log2(horizon)) + 1);
        for seed in 0..25u64 {
            let inst = gen_strategy(seed, height).unwrap();
            let run = crate::model::run_round_protocol(&back, &inst, &inst).unwrap();
            assert_eq!(run.output, eval_strategy(&inst));
        }
    }

    #[test]
    fn median_binsearch_trivial_and_hand_cases() {
        let family = median_binsearch_protocol(2).unwrap();
        let inst = MedianInstance {
            universe_bound: 2,
            set_a: vec![1],
            set_b: vec![],
        };
        let run = family.run(&inst, &inst).unwrap();
        assert_eq!(run.output, 1);
        assert!(run.report.rounds_used <= 2);

        // The height-2 reduction instance.
        let family = median_binsearch_protocol(6).unwrap();
        let inst = MedianInstance {
            universe_bound: 6,
            set_a: vec![1],
            set_b: vec![2, 5],
        };
        let run = family.run(&inst, &inst).unwrap();
        assert_eq!(run.output, 2);
    }

    #[test]
    fn median_binsearch_matches_oracle_on_seeds() {
        for seed in 0..300u64 {
            let l = 1 + seed % 97;
            let inst = gen_median(seed, l).unwrap();
            let family = median_binsearch_protocol(l).unwrap();
            let run = family.run(&inst, &inst).unwrap();
            assert_eq!(run.output, eval_median(&inst), "seed {seed} l {l}");
            assert!(run.report.rounds_used <= u64::from(ceil_log2(l)) + 1);
        }
    }

    #[test]
    fn median_binsearch_rejects_empty_union() {
        let family = median_binsearch_protocol(4).unwrap();
        let empty = MedianInstance {
            universe_bound: 4,
            set_a: vec![],
            set_b: vec![],
        };
        assert!(matches!(
            family.run(&empty, &empty),
            Err(FamilyError::Model(ModelError::Input(_)))
        ));
    }

    #[test]
    fn median_binsearch_round_trips_through_the_sync_model() {
        for seed in 0..40u64 {
            let l = 1 + seed % 29;
            if l == 1 {
                continue;
            }
            let inst = gen_median(seed, l).unwrap();
            let family = median_binsearch_protocol(l).unwrap();
            let sync = rounds_to_sync(&family.protocol);
            let back = sync_to_rounds(&sync).unwrap();
            let direct = family.run(&inst, &inst).unwrap();
            let via_sync = crate::model::run_sync_protocol(&sync, &inst, &inst).unwrap();
            let via_back = crate::model::run_round_protocol(&back, &inst, &inst).unwrap();
            assert_eq!(direct.output, via_sync.output);
            assert_eq!(direct.output, via_back.output);
            assert!(via_sync.report.nonblank_bits <= direct.report.rounds_used);
        }
    }

    #[test]
    fn pointer_jumping_naive_follows_the_trace() {
        let inst = PointerJumpingInstance {
            size: 2,
            ptr_a: vec![2, 1],
            ptr_b: vec![1, 2],
            start: 1,
            steps: 2,
        };
        let family = pointer_jumping_naive_protocol(2, 2).unwrap();
        let run = family.run(&inst, &inst).unwrap();
        assert_eq!(run.output, 2);
        assert_eq!(run.report.rounds_used, 2);
    }

    #[test]
    fn pointer_jumping_naive_matches_oracle_on_seeds() {
        for seed in 0..200u64 {
            let size = 1 + (seed % 6) as u32;
            let steps = 1 + (seed % 4) as u32;
            let inst = gen_pointer_jumping(seed, size, steps).unwrap();
            let family = pointer_jumping_naive_protocol(size, steps).unwrap();
            let run = family.run(&inst, &inst).unwrap();
            assert_eq!(run.output, eval_pointer_jumping(&inst));
            assert_eq!(run.report.rounds_used, u64::from(steps));
        }
    }

    #[test]
    fn pointer_jumping_size_one_sends_zero_width_messages() {
        let inst = PointerJumpingInstance {
            size: 1,
            ptr_a: vec![1],
            ptr_b: vec![1],
            start: 1,
            steps: 3,
        };
        let family = pointer_jumping_naive_protocol(1, 3).unwrap();
        let run = family.run(&inst, &inst).unwrap();
        assert_eq!(run.output, 1);
        assert_eq!(run.report.rounds_used, 3);
        assert_eq!(run.report.total_bits, 0);
    }
}
