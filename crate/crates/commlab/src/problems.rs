//! Problem instances, seeded generators, and brute-force evaluators.
//!
//! Four problems live here: Strategy (a bit-labeled full binary tree whose
//! labels steer a root-to-leaf walk), Level-Strategy (the n-ary, height-k
//! generalization), Pointer-Jumping (two pointer lists chased alternately),
//! and Median (the lower median of the multiset union of two value sets).
//! The evaluators are deliberately direct; they are the ground truth every
//! protocol and reduction is checked against.
//!
//! Tree ownership convention: the root sits on layer 1, Alice holds the odd
//! layers, Bob the even ones.

use crate::model::PlayerId;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ProblemError {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("malformed instance: {0}")]
    Malformed(String),
}

/// Strategy: a full binary tree of height `h` with a bit on every internal
/// vertex, heap-indexed with the root at 1. Leaves carry no label; the
/// output is the 0-based index of the leaf reached by descending left on 0
/// and right on 1.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StrategyInstance {
    pub height: u32,
    /// Bit labels of the `2^h - 1` internal vertices in heap order.
    pub labels: Vec<u8>,
}

impl StrategyInstance {
    /// Number of leaves, `2^h`.
    #[must_use]
    pub fn leaves(&self) -> u64 {
        1u64 << self.height
    }

    /// Owner of a heap vertex: layer parity, root on layer 1.
    #[must_use]
    pub fn owner(&self, vertex: u64) -> PlayerId {
        PlayerId::for_layer(vertex.ilog2() + 1)
    }

    pub fn validate(&self) -> Result<(), ProblemError> {
        if self.height == 0 || self.height > 32 {
            return Err(ProblemError::InvalidParameter(format!(
                "strategy height {} out of range [1, 32]",
                self.height
            )));
        }
        let expect = (1usize << self.height) - 1;
        if self.labels.len() != expect {
            return Err(ProblemError::Malformed(format!(
                "expected {expect} labels for height {}, got {}",
                self.height,
                self.labels.len()
            )));
        }
        if let Some(bad) = self.labels.iter().find(|&&b| b > 1) {
            return Err(ProblemError::Malformed(format!(
                "label {bad} is not a bit"
            )));
        }
        Ok(())
    }
}

/// Level-Strategy: an n-ary tree of height `k` whose internal vertices are
/// labeled with a son index in `[1, n]`; leaves are indexed 1-based from 1
/// to `n^k`. Arity 1 is degenerate but legal (a single path), which is what
/// the Pointer-Jumping reduction produces for one-entry lists.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LevelStrategyInstance {
    pub arity: u32,
    pub height: u32,
    /// Son choices of the internal vertices in breadth-first order.
    pub labels: Vec<u32>,
}

impl LevelStrategyInstance {
    /// Number of internal vertices, `(n^k - 1) / (n - 1)` (or `k` at n = 1).
    #[must_use]
    pub fn internal_count(arity: u32, height: u32) -> u64 {
        let n = u64::from(arity);
        if n == 1 {
            return u64::from(height);
        }
        (n.pow(height) - 1) / (n - 1)
    }

    /// Number of leaves, `n^k`.
    #[must_use]
    pub fn leaves(&self) -> u64 {
        u64::from(self.arity).pow(self.height)
    }

    pub fn validate(&self) -> Result<(), ProblemError> {
        if self.arity == 0 {
            return Err(ProblemError::InvalidParameter("arity must be >= 1".into()));
        }
        if self.height == 0 {
            return Err(ProblemError::InvalidParameter("height must be >= 1".into()));
        }
        let expect = Self::internal_count(self.arity, self.height);
        if self.labels.len() as u64 != expect {
            return Err(ProblemError::Malformed(format!(
                "expected {expect} labels, got {}",
                self.labels.len()
            )));
        }
        if let Some(bad) = self
            .labels
            .iter()
            .find(|&&l| l == 0 || l > self.arity)
        {
            return Err(ProblemError::Malformed(format!(
                "label {bad} outside [1, {}]",
                self.arity
            )));
        }
        Ok(())
    }
}

/// Pointer-Jumping: two lists of `n` pointers into each other, a marked
/// start in Alice's list, and a step count. The first jump follows Alice's
/// list.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PointerJumpingInstance {
    pub size: u32,
    pub ptr_a: Vec<u32>,
    pub ptr_b: Vec<u32>,
    pub start: u32,
    pub steps: u32,
}

impl PointerJumpingInstance {
    pub fn validate(&self) -> Result<(), ProblemError> {
        if self.size == 0 {
            return Err(ProblemError::InvalidParameter("size must be >= 1".into()));
        }
        if self.steps == 0 {
            return Err(ProblemError::InvalidParameter("steps must be >= 1".into()));
        }
        for (name, list) in [("ptr_a", &self.ptr_a), ("ptr_b", &self.ptr_b)] {
            if list.len() != self.size as usize {
                return Err(ProblemError::Malformed(format!(
                    "{name} has {} entries, expected {}",
                    list.len(),
                    self.size
                )));
            }
            if let Some(bad) = list.iter().find(|&&v| v == 0 || v > self.size) {
                return Err(ProblemError::Malformed(format!(
                    "{name} entry {bad} outside [1, {}]",
                    self.size
                )));
            }
        }
        if self.start == 0 || self.start > self.size {
            return Err(ProblemError::Malformed(format!(
                "start {} outside [1, {}]",
                self.start, self.size
            )));
        }
        Ok(())
    }
}

/// Median: a universe `{1..l}` and one sorted value set per player. The
/// sets may overlap; the union is treated as a multiset. Reduction-produced
/// instances are always disjoint.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MedianInstance {
    #[serde(rename = "l")]
    pub universe_bound: u64,
    #[serde(rename = "a")]
    pub set_a: Vec<u64>,
    #[serde(rename = "b")]
    pub set_b: Vec<u64>,
}

impl MedianInstance {
    /// Total multiset size.
    #[must_use]
    pub fn weight(&self) -> u64 {
        (self.set_a.len() + self.set_b.len()) as u64
    }

    pub fn validate(&self) -> Result<(), ProblemError> {
        if self.universe_bound == 0 {
            return Err(ProblemError::InvalidParameter(
                "universe bound must be >= 1".into(),
            ));
        }
        if self.set_a.is_empty() && self.set_b.is_empty() {
            return Err(ProblemError::Malformed("empty multiset union".into()));
        }
        for (name, set) in [("a", &self.set_a), ("b", &self.set_b)] {
            if !set.windows(2).all(|w| w[0] < w[1]) {
                return Err(ProblemError::Malformed(format!(
                    "set {name} is not strictly sorted"
                )));
            }
            if set
                .iter()
                .any(|&v| v == 0 || v > self.universe_bound)
            {
                return Err(ProblemError::Malformed(format!(
                    "set {name} leaves the universe [1, {}]",
                    self.universe_bound
                )));
            }
        }
        Ok(())
    }
}

/// Walk a Strategy instance from the root: left on 0, right on 1. Returns
/// the 0-based index of the reached leaf.
#[must_use]
pub fn eval_strategy(inst: &StrategyInstance) -> u64 {
    let mut vertex = 1u64;
    for _ in 0..inst.height {
        let bit = u64::from(inst.labels[(vertex - 1) as usize]);
        vertex = 2 * vertex + bit;
    }
    vertex - inst.leaves()
}

/// Walk a Level-Strategy instance; returns the 1-based leaf index in
/// `[1, n^k]`.
#[must_use]
pub fn eval_level_strategy(inst: &LevelStrategyInstance) -> u64 {
    let n = u64::from(inst.arity);
    let mut vertex = 0u64; // breadth-first index
    let mut leaf = 0u64;
    for _ in 0..inst.height {
        let son = u64::from(inst.labels[vertex as usize]);
        leaf = leaf * n + (son - 1);
        vertex = n * vertex + son;
    }
    leaf + 1
}

/// Chase `k` pointers starting from Alice's marked entry; odd-numbered
/// jumps use Alice's list, even ones Bob's.
#[must_use]
pub fn eval_pointer_jumping(inst: &PointerJumpingInstance) -> u64 {
    let mut v = inst.start;
    for jump in 0..inst.steps {
        let list = if jump % 2 == 0 {
            &inst.ptr_a
        } else {
            &inst.ptr_b
        };
        v = list[(v - 1) as usize];
    }
    u64::from(v)
}

/// Lower median of the multiset union: the element of rank `ceil(w/2)`.
/// The instance must have a non-empty union.
#[must_use]
pub fn eval_median(inst: &MedianInstance) -> u64 {
    let w = inst.weight();
    assert!(w >= 1, "median of an empty multiset");
    let rank = w.div_ceil(2);
    // Merge the two sorted sets up to the rank-th element.
    let (mut i, mut j) = (0usize, 0usize);
    let mut current = 0u64;
    for _ in 0..rank {
        let take_a = match (inst.set_a.get(i), inst.set_b.get(j)) {
            (Some(&a), Some(&b)) => a <= b,
            (Some(_), None) => true,
            (None, Some(_)) => false,
            (None, None) => unreachable!("rank exceeds multiset size"),
        };
        if take_a {
            current = inst.set_a[i];
            i += 1;
        } else {
            current = inst.set_b[j];
            j += 1;
        }
    }
    current
}

/// Deterministic Strategy generator: every internal label is an unbiased
/// bit drawn from a ChaCha stream seeded by `seed`.
pub fn gen_strategy(seed: u64, height: u32) -> Result<StrategyInstance, ProblemError> {
    if height == 0 || height > 32 {
        return Err(ProblemError::InvalidParameter(format!(
            "strategy height {height} out of range [1, 32]"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let labels = (0..(1usize << height) - 1)
        .map(|_| rng.gen_range(0..=1u8))
        .collect();
    Ok(StrategyInstance { height, labels })
}

/// Deterministic Level-Strategy generator; labels are uniform over `[1, n]`.
pub fn gen_level_strategy(
    seed: u64,
    arity: u32,
    height: u32,
) -> Result<LevelStrategyInstance, ProblemError> {
    if arity < 2 {
        return Err(ProblemError::InvalidParameter(format!(
            "level-strategy arity {arity} must be >= 2"
        )));
    }
    if height == 0 {
        return Err(ProblemError::InvalidParameter("height must be >= 1".into()));
    }
    let count = LevelStrategyInstance::internal_count(arity, height);
    if count > 1 << 24 {
        return Err(ProblemError::InvalidParameter(format!(
            "instance with {count} internal vertices is too large"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let labels = (0..count).map(|_| rng.gen_range(1..=arity)).collect();
    Ok(LevelStrategyInstance {
        arity,
        height,
        labels,
    })
}

/// Deterministic Pointer-Jumping generator; pointers and the start are
/// uniform over `[1, n]`.
pub fn gen_pointer_jumping(
    seed: u64,
    size: u32,
    steps: u32,
) -> Result<PointerJumpingInstance, ProblemError> {
    if size == 0 || steps == 0 {
        return Err(ProblemError::InvalidParameter(
            "size and steps must be >= 1".into(),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut draw = |_: u32| rng.gen_range(1..=size);
    let ptr_a = (0..size).map(&mut draw).collect();
    let ptr_b = (0..size).map(&mut draw).collect();
    let start = draw(0);
    Ok(PointerJumpingInstance {
        size,
        ptr_a,
        ptr_b,
        start,
        steps,
    })
}

/// Deterministic Median generator: every universe value joins each player's
/// set independently with probability 1/2, so overlaps are common. The rare
/// all-empty draw is patched by handing Alice the value 1.
pub fn gen_median(seed: u64, universe_bound: u64) -> Result<MedianInstance, ProblemError> {
    if universe_bound == 0 {
        return Err(ProblemError::InvalidParameter(
            "universe bound must be >= 1".into(),
        ));
    }
    if universe_bound > 1 << 24 {
        return Err(ProblemError::InvalidParameter(format!(
            "universe bound {universe_bound} is too large"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut set_a = Vec::new();
    let mut set_b = Vec::new();
    for v in 1..=universe_bound {
        if rng.gen::<bool>() {
            set_a.push(v);
        }
        if rng.gen::<bool>() {
            set_b.push(v);
        }
    }
    if set_a.is_empty() && set_b.is_empty() {
        set_a.push(1);
    }
    Ok(MedianInstance {
        universe_bound,
        set_a,
        set_b,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Independent Strategy evaluator: materialize the tree as a recursive
    /// structure and accumulate the leaf index from subtree sizes, with no
    /// heap-index arithmetic anywhere.
    mod reference {
        use super::StrategyInstance;

        enum Node {
            Leaf,
            Inner {
                bit: u8,
                left: Box<Node>,
                right: Box<Node>,
            },
        }

        fn build(labels: &[u8], vertex: usize, depth: u32, height: u32) -> Node {
            if depth == height {
                return Node::Leaf;
            }
            Node::Inner {
                bit: labels[vertex - 1],
                left: Box::new(build(labels, 2 * vertex, depth + 1, height)),
                right: Box::new(build(labels, 2 * vertex + 1, depth + 1, height)),
            }
        }

        fn descend(node: &Node, levels_below: u32) -> u64 {
            match node {
                Node::Leaf => 0,
                Node::Inner { bit, left, right } => {
                    if *bit == 0 {
                        descend(left, levels_below - 1)
                    } else {
                        (1u64 << (levels_below - 1)) + descend(right, levels_below - 1)
                    }
                }
            }
        }

        pub fn eval(inst: &StrategyInstance) -> u64 {
            let tree = build(&inst.labels, 1, 0, inst.height);
            descend(&tree, inst.height)
        }
    }

    fn strategy_from_bits(height: u32, bits: u64) -> StrategyInstance {
        let count = (1usize << height) - 1;
        let labels = (0..count).map(|i| ((bits >> i) & 1) as u8).collect();
        StrategyInstance { height, labels }
    }

    #[test]
    fn strategy_all_zero_reaches_leftmost_leaf() {
        let inst = StrategyInstance {
            height: 3,
            labels: vec![0; 7],
        };
        assert_eq!(eval_strategy(&inst), 0);
    }

    #[test]
    fn strategy_all_one_reaches_rightmost_leaf() {
        let inst = StrategyInstance {
            height: 3,
            labels: vec![1; 7],
        };
        assert_eq!(eval_strategy(&inst), 7);
    }

    #[test]
    fn strategy_hand_walked_path() {
        // Root 0 -> go left; left son 0 -> go left; right son label unused.
        let inst = StrategyInstance {
            height: 2,
            labels: vec![0, 0, 1],
        };
        assert_eq!(eval_strategy(&inst), 0);
    }

    #[test]
    fn strategy_agrees_with_recursive_reference_exhaustively() {
        for height in 1..=4u32 {
            let count = (1u64 << height) - 1;
            for bits in 0..1u64 << count {
                let inst = strategy_from_bits(height, bits);
                assert_eq!(eval_strategy(&inst), reference::eval(&inst));
            }
        }
    }

    #[test]
    fn level_strategy_corner_labels() {
        let all = |label: u32| LevelStrategyInstance {
            arity: 3,
            height: 2,
            labels: vec![label; 4],
        };
        assert_eq!(eval_level_strategy(&all(1)), 1);
        assert_eq!(eval_level_strategy(&all(3)), 9);
    }

    #[test]
    fn level_strategy_digit_walk() {
        // Root chooses son 2; that son chooses 3: leaf (2-1)*3 + 3 = 6.
        let mut labels = vec![1; 4];
        labels[0] = 2;
        labels[2] = 3; // second son of the root
        let inst = LevelStrategyInstance {
            arity: 3,
            height: 2,
            labels,
        };
        assert_eq!(eval_level_strategy(&inst), 6);
    }

    #[test]
    fn level_strategy_walk_matches_position_reconstruction() {
        // Second route: follow breadth-first child indices to the leaf level
        // and read the leaf off the vertex position.
        for seed in 0..50u64 {
            let inst = gen_level_strategy(seed, 3, 3).unwrap();
            let n = u64::from(inst.arity);
            let mut vertex = 0u64;
            for _ in 0..inst.height {
                vertex = n * vertex + u64::from(inst.labels[vertex as usize]);
            }
            let first_leaf = LevelStrategyInstance::internal_count(inst.arity, inst.height);
            assert_eq!(eval_level_strategy(&inst), vertex - first_leaf + 1);
        }
    }

    #[test]
    fn pointer_jumping_explicit_trace() {
        let inst = PointerJumpingInstance {
            size: 2,
            ptr_a: vec![2, 1],
            ptr_b: vec![1, 2],
            start: 1,
            steps: 2,
        };
        assert_eq!(eval_pointer_jumping(&inst), 2);
    }

    #[test]
    fn pointer_jumping_trivial_cases() {
        let one = PointerJumpingInstance {
            size: 1,
            ptr_a: vec![1],
            ptr_b: vec![1],
            start: 1,
            steps: 5,
        };
        assert_eq!(eval_pointer_jumping(&one), 1);

        let single = PointerJumpingInstance {
            size: 3,
            ptr_a: vec![3, 1, 2],
            ptr_b: vec![1, 1, 1],
            start: 2,
            steps: 1,
        };
        assert_eq!(eval_pointer_jumping(&single), 1); // ptr_a[2] = 1
    }

    #[test]
    fn median_examples() {
        let singleton = MedianInstance {
            universe_bound: 1,
            set_a: vec![1],
            set_b: vec![],
        };
        assert_eq!(eval_median(&singleton), 1);

        let inst = MedianInstance {
            universe_bound: 5,
            set_a: vec![1],
            set_b: vec![2, 5],
        };
        assert_eq!(eval_median(&inst), 2);

        let from_reduction = MedianInstance {
            universe_bound: 6,
            set_a: vec![2, 5, 6],
            set_b: vec![],
        };
        assert_eq!(eval_median(&from_reduction), 5);
    }

    #[test]
    fn median_handles_multiset_overlap() {
        let inst = MedianInstance {
            universe_bound: 4,
            set_a: vec![2, 3],
            set_b: vec![2, 4],
        };
        // Multiset {2, 2, 3, 4}: lower median is the rank-2 element.
        assert_eq!(eval_median(&inst), 2);
    }

    #[test]
    fn generators_are_seed_deterministic() {
        assert_eq!(
            gen_strategy(9, 3).unwrap(),
            gen_strategy(9, 3).unwrap()
        );
        assert_eq!(
            gen_level_strategy(9, 3, 2).unwrap(),
            gen_level_strategy(9, 3, 2).unwrap()
        );
        assert_eq!(
            gen_pointer_jumping(9, 4, 3).unwrap(),
            gen_pointer_jumping(9, 4, 3).unwrap()
        );
        assert_eq!(gen_median(9, 16).unwrap(), gen_median(9, 16).unwrap());
        assert_ne!(
            gen_strategy(9, 3).unwrap(),
            gen_strategy(10, 3).unwrap()
        );
    }

    #[test]
    fn generated_instances_validate() {
        for seed in 0..20u64 {
            gen_strategy(seed, 4).unwrap().validate().unwrap();
            gen_level_strategy(seed, 3, 3).unwrap().validate().unwrap();
            gen_pointer_jumping(seed, 5, 4).unwrap().validate().unwrap();
            gen_median(seed, 32).unwrap().validate().unwrap();
        }
    }

    #[test]
    fn generator_shape_and_parameter_errors() {
        assert_eq!(gen_strategy(1, 3).unwrap().labels.len(), 7);
        assert!(gen_level_strategy(1, 1, 2).is_err());
        assert!(gen_strategy(1, 0).is_err());
        assert!(gen_median(1, 0).is_err());
        assert!(gen_pointer_jumping(1, 0, 1).is_err());
    }

    #[test]
    fn strategy_label_frequency_is_unbiased_within_five_sigma() {
        let mut ones = 0u64;
        let mut total = 0u64;
        for seed in 0..10_000u64 {
            let inst = gen_strategy(seed, 3).unwrap();
            ones += inst.labels.iter().map(|&b| u64::from(b)).sum::<u64>();
            total += inst.labels.len() as u64;
        }
        let mean = total as f64 / 2.0;
        let sigma = (total as f64 / 4.0).sqrt();
        assert!(
            (ones as f64 - mean).abs() <= 5.0 * sigma,
            "ones = {ones} of {total}"
        );
    }

    #[test]
    fn median_json_uses_short_field_names() {
        let inst = MedianInstance {
            universe_bound: 5,
            set_a: vec![1],
            set_b: vec![2, 5],
        };
        let json = serde_json::to_string(&inst).unwrap();
        assert_eq!(json, r#"{"l":5,"a":[1],"b":[2,5]}"#);
    }
}
