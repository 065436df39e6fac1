//! Property-based invariants over randomly generated instances and
//! protocols.

use commlab::model::{run_round_protocol, run_sync_protocol, rounds_to_sync, sync_to_rounds};
use commlab::problems::{
    eval_level_strategy, eval_median, eval_strategy, gen_level_strategy, gen_median, gen_strategy,
    MedianInstance, StrategyInstance,
};
use commlab::protocols::strategy_naive_protocol;
use commlab::reductions::{level_strategy_to_strategy, normalize_protocol, strategy_to_median};
use proptest::prelude::*;

proptest! {
    /// The median is a member of the multiset union and its rank is
    /// exactly ceil(w/2).
    #[test]
    fn median_has_the_right_rank(seed in 0u64..1u64 << 48, l in 1u64..512) {
        let inst = gen_median(seed, l).unwrap();
        let median = eval_median(&inst);
        let mut union: Vec<u64> = inst.set_a.iter().chain(&inst.set_b).copied().collect();
        union.sort_unstable();
        prop_assert!(union.contains(&median));
        let w = union.len() as u64;
        let rank = union.iter().take_while(|&&v| v < median).count() as u64;
        let ties = union.iter().filter(|&&v| v == median).count() as u64;
        let target = w.div_ceil(2);
        prop_assert!(rank < target && target <= rank + ties);
    }

    /// Identical inputs replay identical transcripts and reports.
    #[test]
    fn runs_are_deterministic(seed in 0u64..1u64 << 48, height in 1u32..7) {
        let inst = gen_strategy(seed, height).unwrap();
        let family = strategy_naive_protocol(height).unwrap();
        let a = family.run(&inst, &inst).unwrap();
        let b = family.run(&inst, &inst).unwrap();
        prop_assert_eq!(a.transcript, b.transcript);
        prop_assert_eq!(a.report, b.report);
        prop_assert_eq!(a.output, b.output);
    }

    /// Round-trip translation preserves outputs and cost contracts on
    /// random Strategy instances of larger heights than the exhaustive
    /// sweep covers.
    #[test]
    fn translations_preserve_outputs(seed in 0u64..1u64 << 48, height in 1u32..9) {
        let inst = gen_strategy(seed, height).unwrap();
        let family = strategy_naive_protocol(height).unwrap();
        let sync = rounds_to_sync(&family.protocol);
        let back = sync_to_rounds(&sync).unwrap();
        let direct = family.run(&inst, &inst).unwrap();
        let via_sync = run_sync_protocol(&sync, &inst, &inst).unwrap();
        let via_back = run_round_protocol(&back, &inst, &inst).unwrap();
        prop_assert_eq!(direct.output, via_sync.output);
        prop_assert_eq!(direct.output, via_back.output);
        prop_assert!(via_sync.report.nonblank_bits <= u64::from(height));
    }

    /// A sync protocol whose players never stay silent pays for every
    /// emission: nonblank accounting is simple counting.
    #[test]
    fn blank_free_protocols_pay_per_step(horizon in 1usize..80) {
        let p: commlab::model::SyncProtocol<u64> = commlab::model::SyncProtocol::new(
            horizon,
            false,
            |_, _, _| Ok(commlab::model::Symbol::Zero),
            |h| h.nonblank_count(),
        )
        .unwrap();
        let run = run_sync_protocol(&p, &0, &0).unwrap();
        prop_assert_eq!(run.report.nonblank_bits, 2 * horizon as u64);
        prop_assert_eq!(run.report.timesteps_used, horizon as u64);
    }

    /// Strategy -> Median on random instances beyond the exhaustive range:
    /// decode correctness, disjointness, cardinality.
    #[test]
    fn median_reduction_random_heights(seed in 0u64..1u64 << 48, height in 1u32..9) {
        let inst = gen_strategy(seed, height).unwrap();
        let (median_inst, decode, _) = strategy_to_median(&inst).unwrap();
        prop_assert_eq!(decode.apply(eval_median(&median_inst)), Some(eval_strategy(&inst)));
        let total = (median_inst.set_a.len() + median_inst.set_b.len()) as u64;
        prop_assert_eq!(total, 3u64.pow(height - 1));
        let mut union: Vec<u64> = median_inst
            .set_a
            .iter()
            .chain(&median_inst.set_b)
            .copied()
            .collect();
        union.sort_unstable();
        union.dedup();
        prop_assert_eq!(union.len() as u64, total);
    }

    /// Level-Strategy -> Strategy on random instances.
    #[test]
    fn level_strategy_reduction_random(seed in 0u64..1u64 << 48, arity in 2u32..6, height in 1u32..3) {
        let inst = gen_level_strategy(seed, arity, height).unwrap();
        let (strat, decode) = level_strategy_to_strategy(&inst).unwrap();
        prop_assert_eq!(decode.apply(eval_strategy(&strat)), Some(eval_level_strategy(&inst)));
    }

    /// Normalization to alternating single-bit form never changes outputs
    /// and lands exactly on 2 * rounds * bits alternating rounds.
    #[test]
    fn normalization_preserves_outputs(salt in any::<u64>(), rounds in 1usize..4, bits in 1u32..4) {
        use commlab::model::{PlayerId, RoundProtocol};
        let mask = (1u64 << bits) - 1;
        let speakers: Vec<PlayerId> = (0..rounds)
            .map(|r| if (salt >> r) & 1 == 0 { PlayerId::Alice } else { PlayerId::Bob })
            .collect();
        let p: RoundProtocol<u64> = RoundProtocol::new(
            bits,
            speakers,
            move |_, input, t| {
                let mixed = salt
                    .wrapping_mul(t.len() as u64 + 1)
                    .wrapping_add(*input)
                    .wrapping_add(t.messages().iter().map(|m| m.value).sum::<u64>());
                Ok(mixed & mask)
            },
            |t| t.messages().iter().fold(0, |acc, m| acc << 4 | m.value),
        )
        .unwrap();
        let norm = normalize_protocol(&p);
        prop_assert_eq!(norm.budget_rounds(), 2 * rounds * bits as usize);
        prop_assert_eq!(norm.bits_per_round(), 1);
        for a in 0..4u64 {
            for b in 0..4u64 {
                prop_assert_eq!(
                    run_round_protocol(&p, &a, &b).unwrap().output,
                    run_round_protocol(&norm, &a, &b).unwrap().output
                );
            }
        }
    }

    /// Instance JSON round-trips through serde without loss.
    #[test]
    fn instances_roundtrip_through_json(seed in 0u64..1u64 << 48) {
        let strat = gen_strategy(seed, 4).unwrap();
        let parsed: StrategyInstance =
            serde_json::from_str(&serde_json::to_string(&strat).unwrap()).unwrap();
        prop_assert_eq!(parsed, strat);

        let median = gen_median(seed, 64).unwrap();
        let parsed: MedianInstance =
            serde_json::from_str(&serde_json::to_string(&median).unwrap()).unwrap();
        prop_assert_eq!(parsed, median);
    }
}

/// The sync translation of the naive height-4 descent agrees with the
/// round-model run on every one of the 2^15 label assignments, spending one
/// non-blank bit per round.
#[test]
fn naive_strategy_sync_translation_exhaustive_height_four() {
    let height = 4u32;
    let family = strategy_naive_protocol(height).unwrap();
    let sync = rounds_to_sync(&family.protocol);
    let count = (1u64 << height) - 1;
    for bits in 0..1u64 << count {
        let inst = StrategyInstance {
            height,
            labels: (0..count).map(|i| ((bits >> i) & 1) as u8).collect(),
        };
        let direct = run_round_protocol(&family.protocol, &inst, &inst).unwrap();
        let translated = run_sync_protocol(&sync, &inst, &inst).unwrap();
        assert_eq!(direct.output, translated.output, "labels {bits:#b}");
        assert_eq!(translated.report.nonblank_bits, u64::from(height));
    }
}
