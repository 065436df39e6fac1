//! Combinatorial reductions between the problems, each with an explicit
//! decode map sending the target problem's output back to the source's.
//!
//! The chain runs Pointer-Jumping -> Level-Strategy -> Strategy -> Median.
//! Every construction here is verified against the brute-force evaluators
//! in [`crate::problems`]; the decode maps are ordinary functions exposed
//! through the CLI, never serialized closures.

use crate::model::{ModelError, PlayerId, RoundProtocol, RoundTranscript};
use crate::problems::{
    LevelStrategyInstance, MedianInstance, PointerJumpingInstance, StrategyInstance,
};
use serde::Serialize;
use std::sync::Arc;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ReductionError {
    #[error("level-strategy arity must be >= 2, got {0}")]
    ArityTooSmall(u32),
    #[error("tree height must be >= 1")]
    HeightZero,
    #[error("reduced instance would have {0} vertices, over the desk-scale cap")]
    TooLarge(u64),
    #[error("protocol is not in alternating single-bit form: {0}")]
    NotAlternating(String),
    #[error("claimed 1-bit protocol sent the non-binary message {0}")]
    MessageNotBinary(u64),
    #[error("protocol error during compilation: {0}")]
    Model(#[from] ModelError),
}

/// A pure map from the reduced problem's output back to the source
/// problem's output. Total on every output reachable from a valid reduced
/// instance; unreachable values decode to `None`.
#[derive(Clone)]
pub struct DecodeMap {
    description: String,
    func: Arc<dyn Fn(u64) -> Option<u64> + Send + Sync>,
}

impl DecodeMap {
    pub fn new(
        description: impl Into<String>,
        func: impl Fn(u64) -> Option<u64> + Send + Sync + 'static,
    ) -> Self {
        Self {
            description: description.into(),
            func: Arc::new(func),
        }
    }

    #[must_use]
    pub fn apply(&self, value: u64) -> Option<u64> {
        (self.func)(value)
    }

    #[must_use]
    pub fn description(&self) -> &str {
        &self.description
    }
}

impl std::fmt::Debug for DecodeMap {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("DecodeMap")
            .field("description", &self.description)
            .finish_non_exhaustive()
    }
}

/// Per-level bookkeeping of the Strategy -> Median construction. `w` is the
/// number of elements handed out for a subtree of that height, `l` the
/// universe bound; they satisfy `w_1 = 1`, `l_1 = 2`,
/// `l_k = 2*w_{k-1} + 2*l_{k-1}` and `w_k = 3*w_{k-1}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct TraceLevel {
    pub level: u32,
    pub w: u64,
    pub l: u64,
    /// Whether the players' roles are swapped relative to the top level.
    pub role_swapped: bool,
}

/// Full trace of a Strategy -> Median reduction.
#[derive(Clone, Debug, Serialize)]
pub struct MedianReductionTrace {
    pub levels: Vec<TraceLevel>,
    pub instance: MedianInstance,
}

/// Gadget geometry for the Level-Strategy -> Strategy reduction: each n-ary
/// vertex becomes a binary subtree of height `2*ceil(log2 n) - 1`, odd so
/// that ownership keeps alternating across the original layers. The owner
/// controls the odd levels inside the gadget and spells the son choice
/// `j - 1` in binary there; the other player's levels are pinned to 0.
#[derive(Clone, Copy, Debug)]
struct Gadget {
    /// Bits controlled by the owner, `ceil(log2 n)`.
    owner_bits: u32,
    /// Gadget height, `2 * owner_bits - 1`.
    height: u32,
}

impl Gadget {
    fn for_arity(arity: u32) -> Self {
        let owner_bits = u64::from(arity).next_power_of_two().trailing_zeros().max(1);
        Self {
            owner_bits,
            height: 2 * owner_bits - 1,
        }
    }

    /// Gadget-leaf position reached when the owner encodes `digit` (the son
    /// choice minus one): digit bits sit at even depths, zeros between.
    #[cfg(test)]
    fn spread(self, digit: u32) -> u64 {
        let mut pos = 0u64;
        for i in 0..self.owner_bits {
            let bit = u64::from((digit >> (self.owner_bits - 1 - i)) & 1);
            pos |= bit << (self.height - 1 - 2 * i);
        }
        pos
    }

    /// Inverse of [`Gadget::spread`]: recover the digit from a gadget-leaf
    /// position, or `None` if a pinned level was not zero.
    fn unspread(self, pos: u64) -> Option<u32> {
        let mut digit = 0u32;
        let mut seen = 0u64;
        for i in 0..self.owner_bits {
            let bit = (pos >> (self.height - 1 - 2 * i)) & 1;
            digit = digit << 1 | bit as u32;
            seen |= bit << (self.height - 1 - 2 * i);
        }
        (seen == pos).then_some(digit)
    }
}

/// Reduce Level-Strategy to Strategy.
///
/// Every n-ary vertex is replaced by a binary gadget (see [`Gadget`]); the
/// produced tree has height `k * (2*ceil(log2 n) - 1)`. Each player's
/// Strategy labels depend only on their own Level-Strategy labels: inside a
/// gadget the owner replicates their digit bits across each controlled
/// level and the other player holds constant zeros.
pub fn level_strategy_to_strategy(
    inst: &LevelStrategyInstance,
) -> Result<(StrategyInstance, DecodeMap), ReductionError> {
    if inst.arity < 2 {
        return Err(ReductionError::ArityTooSmall(inst.arity));
    }
    if inst.height == 0 {
        return Err(ReductionError::HeightZero);
    }
    let gadget = Gadget::for_arity(inst.arity);
    let height = inst.height * gadget.height;
    if height > 26 {
        return Err(ReductionError::TooLarge(1u64 << height));
    }

    let n = u64::from(inst.arity);
    let arity = inst.arity;
    let ls_height = inst.height;
    let mut labels = vec![0u8; (1usize << height) - 1];
    for vertex in 1..1u64 << height {
        let depth = vertex.ilog2();
        let path = vertex - (1 << depth);
        let block = depth / gadget.height;
        let rel = depth % gadget.height;

        // Which Level-Strategy vertex does this gadget belong to? Decode the
        // completed gadget blocks along the path; any invalid block means the
        // vertex is unreachable and keeps label 0.
        let mut ls_vertex = 0u64;
        let mut reachable = true;
        for b in 0..block {
            let shift = depth - (b + 1) * gadget.height;
            let slice = (path >> shift) & ((1 << gadget.height) - 1);
            match gadget.unspread(slice) {
                Some(digit) if digit < arity => {
                    ls_vertex = n * ls_vertex + u64::from(digit) + 1;
                }
                _ => {
                    reachable = false;
                    break;
                }
            }
        }
        if !reachable {
            continue;
        }
        // Owner of the original vertex controls the even relative levels.
        if !rel.is_multiple_of(2) {
            continue;
        }
        let son = inst.labels[ls_vertex as usize];
        let digit = son - 1;
        let bit_index = rel / 2;
        labels[(vertex - 1) as usize] = ((digit >> (gadget.owner_bits - 1 - bit_index)) & 1) as u8;
    }

    let decode = DecodeMap::new(
        format!(
            "strategy leaf -> level-strategy leaf via {}-bit gadget blocks",
            gadget.owner_bits
        ),
        move |leaf| {
            let mut ls_leaf = 0u64;
            for b in 0..ls_height {
                let shift = (ls_height - 1 - b) * gadget.height;
                let slice = (leaf >> shift) & ((1 << gadget.height) - 1);
                let digit = gadget.unspread(slice)?;
                if digit >= arity {
                    return None;
                }
                ls_leaf = ls_leaf * n + u64::from(digit);
            }
            Some(ls_leaf + 1)
        },
    );

    Ok((StrategyInstance { height, labels }, decode))
}

/// Reduce Pointer-Jumping to Level-Strategy: the tree of all pointer paths
/// of length `k`. The root is labeled with Alice's first jump; a depth-`d`
/// vertex that is an `i`-th son points to son `ptr(i)` of the list whose
/// turn it is at depth `d`. Each player's labels depend only on their own
/// list, so the reduction is local.
pub fn pointer_jumping_to_level_strategy(
    inst: &PointerJumpingInstance,
) -> Result<(LevelStrategyInstance, DecodeMap), ReductionError> {
    if inst.steps == 0 {
        return Err(ReductionError::HeightZero);
    }
    let count = LevelStrategyInstance::internal_count(inst.size, inst.steps);
    if count > 1 << 24 {
        return Err(ReductionError::TooLarge(count));
    }
    let n = u64::from(inst.size);
    let mut labels = Vec::with_capacity(count as usize);
    labels.push(inst.ptr_a[(inst.start - 1) as usize]);
    for vertex in 1..count {
        // Depth of a breadth-first vertex and which son of its parent it is.
        let son_index = ((vertex - 1) % n) as usize;
        let mut depth = 0u32;
        let mut first = 0u64;
        let mut width = 1u64;
        while vertex >= first + width {
            first += width;
            width *= n;
            depth += 1;
        }
        let list = if depth % 2 == 1 {
            &inst.ptr_b
        } else {
            &inst.ptr_a
        };
        labels.push(list[son_index]);
    }
    let steps = inst.steps;
    let decode = DecodeMap::new(
        "level-strategy leaf -> final pointer via its last base-n digit",
        move |leaf| {
            if leaf == 0 || leaf > n.pow(steps) {
                return None;
            }
            Some((leaf - 1) % n + 1)
        },
    );
    Ok((
        LevelStrategyInstance {
            arity: inst.size,
            height: inst.steps,
            labels,
        },
        decode,
    ))
}

/// Reduce Strategy to Median, inductively on the tree height.
///
/// A height-1 tree over universe `{1, 2}` hands Alice `{1}` or `{2}`
/// according to the root bit and Bob nothing. For height `k`, the two
/// recursive sub-reductions are embedded with the players' roles crossed
/// (the sub-roots belong to the other player), the left block shifted by
/// `w_{k-1}` and the right by `w_{k-1} + l_{k-1}`, and the root holder adds
/// `w_{k-1}` small numbers to pull the median left or the same count of
/// large numbers to push it right.
pub fn strategy_to_median(
    inst: &StrategyInstance,
) -> Result<(MedianInstance, DecodeMap, MedianReductionTrace), ReductionError> {
    if inst.height == 0 {
        return Err(ReductionError::HeightZero);
    }
    if inst.height > 16 {
        return Err(ReductionError::TooLarge(3u64.pow(inst.height)));
    }
    let h = inst.height;
    let (w_of, l_of) = counts_up_to(h);

    let (set_a, set_b) = build_sets(inst, 1, h, &w_of, &l_of);
    let instance = MedianInstance {
        universe_bound: l_of[h as usize],
        set_a,
        set_b,
    };

    let levels = (1..=h)
        .map(|level| TraceLevel {
            level,
            w: w_of[level as usize],
            l: l_of[level as usize],
            role_swapped: (h - level) % 2 == 1,
        })
        .collect();
    let trace = MedianReductionTrace {
        levels,
        instance: instance.clone(),
    };

    let decode = DecodeMap::new(
        "median value -> strategy leaf by interval descent",
        move |value| {
            let mut v = value;
            let mut leaf = 0u64;
            for k in (2..=h).rev() {
                let w = w_of[(k - 1) as usize];
                let l = l_of[(k - 1) as usize];
                if v > w && v <= w + l {
                    leaf <<= 1;
                    v -= w;
                } else if v > w + l && v <= w + 2 * l {
                    leaf = leaf << 1 | 1;
                    v -= w + l;
                } else {
                    return None;
                }
            }
            match v {
                1 => Some(leaf << 1),
                2 => Some(leaf << 1 | 1),
                _ => None,
            }
        },
    );

    Ok((instance, decode, trace))
}

/// `w_k` and `l_k` tables computed from the recurrence, index 0 unused.
fn counts_up_to(h: u32) -> (Vec<u64>, Vec<u64>) {
    let mut w = vec![0u64; (h + 1) as usize];
    let mut l = vec![0u64; (h + 1) as usize];
    w[1] = 1;
    l[1] = 2;
    for k in 2..=h as usize {
        w[k] = 3 * w[k - 1];
        l[k] = 2 * w[k - 1] + 2 * l[k - 1];
    }
    (w, l)
}

/// Sets handed to the local root holder and the other player for the
/// subtree of height `k` rooted at heap `vertex`. Both are returned sorted.
fn build_sets(
    inst: &StrategyInstance,
    vertex: u64,
    k: u32,
    w_of: &[u64],
    l_of: &[u64],
) -> (Vec<u64>, Vec<u64>) {
    let bit = inst.labels[(vertex - 1) as usize];
    if k == 1 {
        return (vec![1 + u64::from(bit)], Vec::new());
    }
    let (a_left, b_left) = build_sets(inst, 2 * vertex, k - 1, w_of, l_of);
    let (a_right, b_right) = build_sets(inst, 2 * vertex + 1, k - 1, w_of, l_of);
    let w = w_of[(k - 1) as usize];
    let l = l_of[(k - 1) as usize];
    let l_k = l_of[k as usize];

    // The root holder's set: the sub-"other" sets shifted into the middle
    // blocks, plus the steering block of w small or w large numbers.
    let mut holder = Vec::with_capacity(b_left.len() + b_right.len() + w as usize);
    if bit == 0 {
        holder.extend(1..=w);
    }
    holder.extend(b_left.iter().map(|&v| v + w));
    holder.extend(b_right.iter().map(|&v| v + w + l));
    if bit == 1 {
        holder.extend(l_k - w + 1..=l_k);
    }

    // The other player inherits the sub-holders, shifted the same way.
    let mut other = Vec::with_capacity(a_left.len() + a_right.len());
    other.extend(a_left.iter().map(|&v| v + w));
    other.extend(a_right.iter().map(|&v| v + w + l));

    (holder, other)
}

/// Compile one fixed run of an alternating single-bit protocol into a
/// Strategy instance: the label of a vertex is the bit its owner would send
/// given their input and the communication history spelled by the
/// root-to-vertex path. Histories the player's message function rejects are
/// pinned to 0. Descending the result reproduces the protocol's transcript
/// on the given input pair.
pub fn protocol_tree_to_strategy<In: ?Sized>(
    p: &RoundProtocol<In>,
    input_alice: &In,
    input_bob: &In,
) -> Result<StrategyInstance, ReductionError> {
    if p.bits_per_round() != 1 {
        return Err(ReductionError::NotAlternating(format!(
            "{} bits per round",
            p.bits_per_round()
        )));
    }
    let height = p.budget_rounds() as u32;
    if height == 0 {
        return Err(ReductionError::HeightZero);
    }
    if height > 26 {
        return Err(ReductionError::TooLarge(1u64 << height));
    }
    for (round, &speaker) in p.speakers().iter().enumerate() {
        if speaker != PlayerId::for_round(round) {
            return Err(ReductionError::NotAlternating(format!(
                "round {round} belongs to {speaker}"
            )));
        }
    }

    let message = p.message_fn();
    let mut labels = vec![0u8; (1usize << height) - 1];
    for vertex in 1..1u64 << height {
        let depth = vertex.ilog2();
        let speaker = PlayerId::for_round(depth as usize);
        let input = match speaker {
            PlayerId::Alice => input_alice,
            PlayerId::Bob => input_bob,
        };
        // The path to the vertex, read as the transcript so far.
        let transcript = RoundTranscript::from_messages(
            (0..depth)
                .map(|r| crate::model::RoundMessage {
                    round: r as usize,
                    speaker: PlayerId::for_round(r as usize),
                    value: (vertex >> (depth - 1 - r)) & 1,
                })
                .collect(),
        );
        match message(speaker, input, &transcript) {
            Ok(bit) if bit <= 1 => labels[(vertex - 1) as usize] = bit as u8,
            Ok(bad) => return Err(ReductionError::MessageNotBinary(bad)),
            // Histories outside the player's domain get an arbitrary fixed
            // message; 0 by convention.
            Err(_) => {}
        }
    }
    Ok(StrategyInstance { height, labels })
}

/// Rewrite any round protocol into alternating single-bit form.
///
/// Each original round becomes `2 * bits_per_round` alternating rounds: the
/// original speaker spells their message bit by bit (most significant
/// first) in their slots while the other player pads with zeros. Outputs
/// are preserved on every input pair and the result has exactly
/// `2 * budget_rounds * bits_per_round` rounds.
pub fn normalize_protocol<In: ?Sized + 'static>(p: &RoundProtocol<In>) -> RoundProtocol<In> {
    let bits = p.bits_per_round();
    let block = 2 * bits as usize;
    let rounds = p.budget_rounds() * block;
    let speakers_orig = p.speakers_arc();
    let message = p.message_fn();
    let output = p.output_fn();

    let rebuild = {
        let speakers_orig = Arc::clone(&speakers_orig);
        move |t: &RoundTranscript, upto: usize| -> RoundTranscript {
            let messages = (0..upto)
                .map(|r| {
                    let speaker = speakers_orig[r];
                    let mut value = 0u64;
                    for i in 0..bits as usize {
                        let slot = r * block
                            + 2 * i
                            + usize::from(speaker == PlayerId::Bob);
                        value = value << 1 | t.value(slot);
                    }
                    crate::model::RoundMessage {
                        round: r,
                        speaker,
                        value,
                    }
                })
                .collect();
            RoundTranscript::from_messages(messages)
        }
    };

    let msg = {
        let speakers_orig = Arc::clone(&speakers_orig);
        let message = Arc::clone(&message);
        let rebuild = rebuild.clone();
        move |speaker: PlayerId, input: &In, t: &RoundTranscript| {
            let q = t.len();
            let r = q / block;
            let j = q % block;
            let orig_speaker = speakers_orig[r];
            let owns_slot = j.is_multiple_of(2) == (orig_speaker == PlayerId::Alice);
            if speaker != orig_speaker || !owns_slot {
                return Ok(0); // padding slot
            }
            let value = message(speaker, input, &rebuild(t, r))?;
            let i = (j / 2) as u32;
            Ok((value >> (bits - 1 - i)) & 1)
        }
    };

    let total = p.budget_rounds();
    let out = move |t: &RoundTranscript| output(&rebuild(t, total));

    let schedule = (0..rounds).map(PlayerId::for_round).collect();
    RoundProtocol::new(1, schedule, msg, out).expect("single-bit protocol is always valid")
}
