//! Desk-scale analysis tools: exhaustive protocol search over explicit
//! function matrices and numeric evaluation of the round/communication
//! trade-off inequalities.
//!
//! The search decides whether a function given as a full Alice x Bob value
//! table admits a deterministic protocol within a (rounds, bits-per-round)
//! budget, by recursive rectangle decomposition with memoization. It is
//! exponential by nature and refuses inputs over its configured limits
//! rather than truncating. A deliberately naive second implementation that
//! enumerates message functions directly is kept alongside as a
//! cross-check.

use crate::model::{ModelError, PlayerId, RoundProtocol};
use serde::{Deserialize, Serialize};
use std::collections::HashMap;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum AnalysisError {
    #[error("matrix of {cells} cells exceeds the search limit of {limit}")]
    MatrixTooLarge { cells: usize, limit: usize },
    #[error("budget of {rounds} rounds x {bits} bits exceeds the search limit of {limit} total bits")]
    BudgetTooLarge { rounds: u32, bits: u32, limit: u32 },
    #[error("malformed matrix: {0}")]
    MatrixShape(String),
    #[error("witness speakers vary within a depth; no oblivious round schedule exists")]
    DynamicSpeakers,
    #[error("epsilon {0} must lie strictly between 0 and 1")]
    InvalidEpsilon(f64),
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
}

/// Hard caps for the exhaustive search.
pub const MAX_MATRIX_CELLS: usize = 256;
pub const MAX_BUDGET_BITS: u32 = 16;

/// A communication problem as an explicit table: rows are Alice's inputs,
/// columns Bob's, entries the required outputs.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct FunctionMatrix {
    entries: Vec<Vec<u64>>,
}

impl FunctionMatrix {
    pub fn new(entries: Vec<Vec<u64>>) -> Result<Self, AnalysisError> {
        if entries.is_empty() || entries[0].is_empty() {
            return Err(AnalysisError::MatrixShape("matrix must be non-empty".into()));
        }
        let width = entries[0].len();
        if entries.iter().any(|row| row.len() != width) {
            return Err(AnalysisError::MatrixShape("ragged rows".into()));
        }
        if entries.len() > 16 || width > 16 {
            return Err(AnalysisError::MatrixShape(
                "dimensions above 16x16 are not supported".into(),
            ));
        }
        Ok(Self { entries })
    }

    #[must_use]
    pub fn rows(&self) -> usize {
        self.entries.len()
    }

    #[must_use]
    pub fn cols(&self) -> usize {
        self.entries[0].len()
    }

    #[must_use]
    pub fn get(&self, row: usize, col: usize) -> u64 {
        self.entries[row][col]
    }
}

/// Who may speak at each protocol tree node.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Alternation {
    /// Speakers strictly alternate, `first` taking round 0.
    Strict { first: PlayerId },
    /// Every node picks its speaker freely.
    Free,
}

/// A found protocol, stored as its rectangle-decomposition tree.
#[derive(Clone, Debug)]
pub enum WitnessNode {
    Leaf {
        output: u64,
    },
    Split {
        speaker: PlayerId,
        /// Message value -> (mask of the speaker's inputs, subtree).
        children: Vec<(u32, WitnessNode)>,
    },
}

/// Witness protocol returned by the search; replayable directly or through
/// the round-model executor.
#[derive(Clone, Debug)]
pub struct SearchWitness {
    pub rounds: u32,
    pub bits: u32,
    root: WitnessNode,
}

impl SearchWitness {
    /// Walk the tree on a concrete input pair.
    #[must_use]
    pub fn eval(&self, row: usize, col: usize) -> u64 {
        let mut node = &self.root;
        loop {
            match node {
                WitnessNode::Leaf { output } => return *output,
                WitnessNode::Split { speaker, children } => {
                    let index = match speaker {
                        PlayerId::Alice => row,
                        PlayerId::Bob => col,
                    };
                    node = children
                        .iter()
                        .find_map(|(mask, child)| (mask >> index & 1 == 1).then_some(child))
                        .expect("witness partition covers the speaker's side");
                }
            }
        }
    }

    /// Convert to a round protocol over inputs given as row/column indices.
    ///
    /// Requires every tree depth to have a single speaker (always true for
    /// strict alternation); a free-policy witness with depth-varying
    /// speakers has no oblivious schedule and is rejected.
    pub fn to_round_protocol(&self) -> Result<RoundProtocol<u64>, AnalysisError> {
        let mut by_depth: Vec<Option<PlayerId>> = vec![None; self.rounds as usize];
        collect_speakers(&self.root, 0, &mut by_depth)?;
        let speakers: Vec<PlayerId> = by_depth
            .iter()
            .enumerate()
            .map(|(d, s)| s.unwrap_or_else(|| PlayerId::for_round(d)))
            .collect();

        let root = self.root.clone();
        let message = {
            let root = root.clone();
            move |speaker: PlayerId, input: &u64, t: &crate::model::RoundTranscript| {
                let node = walk(&root, t.messages().iter().map(|m| m.value));
                match node {
                    WitnessNode::Leaf { .. } => Ok(0),
                    WitnessNode::Split {
                        speaker: node_speaker,
                        children,
                    } => {
                        debug_assert_eq!(*node_speaker, speaker);
                        children
                            .iter()
                            .position(|(mask, _)| mask >> *input & 1 == 1)
                            .map(|i| i as u64)
                            .ok_or_else(|| {
                                ModelError::Input(format!("input {input} outside the matrix"))
                            })
                    }
                }
            }
        };
        let output = move |t: &crate::model::RoundTranscript| {
            match walk(&root, t.messages().iter().map(|m| m.value)) {
                WitnessNode::Leaf { output } => *output,
                WitnessNode::Split { .. } => 0,
            }
        };
        Ok(RoundProtocol::new(self.bits, speakers, message, output)
            .expect("search budgets stay below 64 bits"))
    }
}

fn walk(root: &WitnessNode, values: impl Iterator<Item = u64>) -> &WitnessNode {
    let mut node = root;
    for value in values {
        match node {
            WitnessNode::Leaf { .. } => break,
            WitnessNode::Split { children, .. } => {
                node = &children[value as usize].1;
            }
        }
    }
    node
}

fn collect_speakers(
    node: &WitnessNode,
    depth: usize,
    by_depth: &mut [Option<PlayerId>],
) -> Result<(), AnalysisError> {
    if let WitnessNode::Split { speaker, children } = node {
        match by_depth[depth] {
            Some(s) if s != *speaker => return Err(AnalysisError::DynamicSpeakers),
            _ => by_depth[depth] = Some(*speaker),
        }
        for (_, child) in children {
            collect_speakers(child, depth + 1, by_depth)?;
        }
    }
    Ok(())
}

struct Searcher<'a> {
    matrix: &'a FunctionMatrix,
    bits: u32,
    policy: Alternation,
    memo: HashMap<(u32, u32, u32, PlayerId), bool>,
}

impl<'a> Searcher<'a> {
    fn monochromatic(&self, rows: u32, cols: u32) -> Option<u64> {
        let mut value = None;
        for r in 0..self.matrix.rows() {
            if rows >> r & 1 == 0 {
                continue;
            }
            for c in 0..self.matrix.cols() {
                if cols >> c & 1 == 0 {
                    continue;
                }
                let entry = self.matrix.get(r, c);
                match value {
                    None => value = Some(entry),
                    Some(v) if v != entry => return None,
                    _ => {}
                }
            }
        }
        value
    }

    fn child_solvable(&mut self, rows: u32, cols: u32, rounds_left: u32, current: PlayerId) -> bool {
        match self.policy {
            Alternation::Strict { .. } => self.solvable(rows, cols, rounds_left, current.other()),
            Alternation::Free => {
                self.solvable(rows, cols, rounds_left, PlayerId::Alice)
                    || self.solvable(rows, cols, rounds_left, PlayerId::Bob)
            }
        }
    }

    /// Can the rectangle be computed with `rounds_left` more rounds,
    /// `speaker` talking first?
    fn solvable(&mut self, rows: u32, cols: u32, rounds_left: u32, speaker: PlayerId) -> bool {
        if self.monochromatic(rows, cols).is_some() {
            return true;
        }
        if rounds_left == 0 {
            return false;
        }
        let key = (rows, cols, rounds_left, speaker);
        if let Some(&hit) = self.memo.get(&key) {
            return hit;
        }
        let parts = self.min_partition(rows, cols, rounds_left, speaker).len() as u64;
        let answer = parts != 0 && parts <= 1 << self.bits;
        self.memo.insert(key, answer);
        answer
    }

    /// Minimum partition of the speaker's side into child-solvable groups;
    /// empty when none exists.
    fn min_partition(
        &mut self,
        rows: u32,
        cols: u32,
        rounds_left: u32,
        speaker: PlayerId,
    ) -> Vec<u32> {
        let side = match speaker {
            PlayerId::Alice => rows,
            PlayerId::Bob => cols,
        };
        // dp over submasks of `side`: fewest feasible groups covering the
        // mask, each group pinned to contain the mask's lowest element.
        let mut dp: HashMap<u32, (u32, u32)> = HashMap::new(); // mask -> (parts, first group)
        dp.insert(0, (0, 0));
        let mut order: Vec<u32> = subsets_of(side).collect();
        order.sort_unstable();
        for mask in order {
            if mask == 0 || dp.contains_key(&mask) {
                continue;
            }
            let low = mask & mask.wrapping_neg();
            let mut best: Option<(u32, u32)> = None;
            // All submasks of `mask` containing `low`.
            let rest = mask ^ low;
            let mut sub = rest;
            loop {
                let group = sub | low;
                let feasible = match speaker {
                    PlayerId::Alice => self.child_solvable(group, cols, rounds_left - 1, speaker),
                    PlayerId::Bob => self.child_solvable(rows, group, rounds_left - 1, speaker),
                };
                if feasible {
                    if let Some(&(parts, _)) = dp.get(&(mask ^ group)) {
                        if best.is_none_or(|(b, _)| parts + 1 < b) {
                            best = Some((parts + 1, group));
                        }
                    }
                }
                if sub == 0 {
                    break;
                }
                sub = (sub - 1) & rest;
            }
            if let Some(entry) = best {
                dp.insert(mask, entry);
            }
        }
        // Reconstruct the chosen groups.
        let mut groups = Vec::new();
        let mut mask = side;
        while mask != 0 {
            match dp.get(&mask) {
                Some(&(_, group)) => {
                    groups.push(group);
                    mask ^= group;
                }
                None => return Vec::new(),
            }
        }
        groups
    }

    fn witness(&mut self, rows: u32, cols: u32, rounds_left: u32, speaker: PlayerId) -> WitnessNode {
        if let Some(output) = self.monochromatic(rows, cols) {
            return WitnessNode::Leaf { output };
        }
        debug_assert!(rounds_left > 0);
        let groups = self.min_partition(rows, cols, rounds_left, speaker);
        debug_assert!(!groups.is_empty());
        let children = groups
            .into_iter()
            .map(|group| {
                let (child_rows, child_cols) = match speaker {
                    PlayerId::Alice => (group, cols),
                    PlayerId::Bob => (rows, group),
                };
                let next = match self.policy {
                    Alternation::Strict { .. } => speaker.other(),
                    Alternation::Free => {
                        if self.solvable(child_rows, child_cols, rounds_left - 1, PlayerId::Alice) {
                            PlayerId::Alice
                        } else {
                            PlayerId::Bob
                        }
                    }
                };
                (
                    group,
                    self.witness(child_rows, child_cols, rounds_left - 1, next),
                )
            })
            .collect();
        WitnessNode::Split { speaker, children }
    }
}

/// All submasks of `mask`, including 0 and `mask` itself.
fn subsets_of(mask: u32) -> impl Iterator<Item = u32> {
    let mut current = 0u32;
    let mut done = false;
    std::iter::from_fn(move || {
        if done {
            return None;
        }
        let out = current;
        if current == mask {
            done = true;
        } else {
            current = (current.wrapping_sub(mask)) & mask;
        }
        Some(out)
    })
}

fn check_limits(matrix: &FunctionMatrix, rounds: u32, bits: u32) -> Result<(), AnalysisError> {
    let cells = matrix.rows() * matrix.cols();
    if cells > MAX_MATRIX_CELLS {
        return Err(AnalysisError::MatrixTooLarge {
            cells,
            limit: MAX_MATRIX_CELLS,
        });
    }
    if rounds * bits > MAX_BUDGET_BITS || bits >= 16 {
        return Err(AnalysisError::BudgetTooLarge {
            rounds,
            bits,
            limit: MAX_BUDGET_BITS,
        });
    }
    Ok(())
}

/// Decide whether the matrix admits a protocol within the budget; returns a
/// replayable witness when one exists.
pub fn exhaustive_protocol_search(
    matrix: &FunctionMatrix,
    rounds: u32,
    bits: u32,
    policy: Alternation,
) -> Result<Option<SearchWitness>, AnalysisError> {
    check_limits(matrix, rounds, bits)?;
    let rows = (1u32 << matrix.rows()) - 1;
    let cols = (1u32 << matrix.cols()) - 1;
    let mut searcher = Searcher {
        matrix,
        bits,
        policy,
        memo: HashMap::new(),
    };
    let (exists, first) = match policy {
        Alternation::Strict { first } => (searcher.solvable(rows, cols, rounds, first), first),
        Alternation::Free => {
            if searcher.solvable(rows, cols, rounds, PlayerId::Alice) {
                (true, PlayerId::Alice)
            } else {
                (
                    searcher.solvable(rows, cols, rounds, PlayerId::Bob),
                    PlayerId::Bob,
                )
            }
        }
    };
    Ok(exists.then(|| SearchWitness {
        rounds,
        bits,
        root: searcher.witness(rows, cols, rounds, first),
    }))
}

/// Deliberately naive reference: enumerate the speaker's message function
/// outright at every node. Exponential in everything; the cross-check for
/// the rectangle search at toy sizes.
pub fn naive_search_exists(
    matrix: &FunctionMatrix,
    rounds: u32,
    bits: u32,
    policy: Alternation,
) -> Result<bool, AnalysisError> {
    check_limits(matrix, rounds, bits)?;
    let max_side = matrix.rows().max(matrix.cols()) as u32;
    if bits * max_side > 20 {
        return Err(AnalysisError::BudgetTooLarge {
            rounds,
            bits,
            limit: MAX_BUDGET_BITS,
        });
    }
    let rows = (1u32 << matrix.rows()) - 1;
    let cols = (1u32 << matrix.cols()) - 1;
    let start = match policy {
        Alternation::Strict { first } => Some(first),
        Alternation::Free => None,
    };
    Ok(naive_rec(matrix, rows, cols, rounds, start, bits))
}

fn naive_mono(matrix: &FunctionMatrix, rows: u32, cols: u32) -> bool {
    let mut value = None;
    for r in 0..matrix.rows() {
        for c in 0..matrix.cols() {
            if rows >> r & 1 == 1 && cols >> c & 1 == 1 {
                let entry = matrix.get(r, c);
                if *value.get_or_insert(entry) != entry {
                    return false;
                }
            }
        }
    }
    true
}

/// `speaker = None` means the node may pick either player (free policy).
fn naive_rec(
    matrix: &FunctionMatrix,
    rows: u32,
    cols: u32,
    rounds_left: u32,
    speaker: Option<PlayerId>,
    bits: u32,
) -> bool {
    if naive_mono(matrix, rows, cols) {
        return true;
    }
    if rounds_left == 0 {
        return false;
    }
    let candidates = match speaker {
        Some(s) => vec![s],
        None => vec![PlayerId::Alice, PlayerId::Bob],
    };
    let alphabet = 1usize << bits;
    for sp in candidates {
        let side = match sp {
            PlayerId::Alice => rows,
            PlayerId::Bob => cols,
        };
        let elements: Vec<u32> = (0..32).filter(|&i| side >> i & 1 == 1).collect();
        let total = alphabet.pow(elements.len() as u32);
        'function: for mut assignment in 0..total {
            let mut groups = vec![0u32; alphabet];
            for &element in &elements {
                groups[assignment % alphabet] |= 1 << element;
                assignment /= alphabet;
            }
            for group in groups.into_iter().filter(|&g| g != 0) {
                let (child_rows, child_cols) = match sp {
                    PlayerId::Alice => (group, cols),
                    PlayerId::Bob => (rows, group),
                };
                let next = speaker.map(|s| s.other());
                if !naive_rec(matrix, child_rows, child_cols, rounds_left - 1, next, bits) {
                    continue 'function;
                }
            }
            return true;
        }
    }
    false
}

/// `ceil(sqrt(n / log2 n))`, the pointer-chase depth that stresses the
/// trade-off inequalities.
#[must_use]
pub fn k_sqrt_over_log(n: u64) -> u64 {
    assert!(n >= 2);
    let x = n as f64 / (n as f64).log2();
    x.sqrt().ceil() as u64
}

/// The round-count family whose growth is being probed.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum RFamily {
    /// `r(N) = (log2 N)^(1 - epsilon)`.
    LogPow { epsilon: f64 },
    /// `r(N) = log2 N / log2 log2 N`.
    LogOverLogLog,
}

/// How the chase depth `k` is chosen per grid point.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum KChoice {
    /// `k(n) = ceil(sqrt(n / log2 n))`.
    SqrtOverLog,
    /// An explicit list of depths, crossed with the `n` grid.
    Grid(Vec<u64>),
}

#[derive(Clone, Copy, Debug)]
pub struct TradeoffParams {
    pub r_family: RFamily,
    /// The constant on the linear side of the second inequality.
    pub constant: f64,
}

impl TradeoffParams {
    pub fn new(r_family: RFamily, constant: f64) -> Result<Self, AnalysisError> {
        if let RFamily::LogPow { epsilon } = r_family {
            if !(epsilon > 0.0 && epsilon < 1.0) {
                return Err(AnalysisError::InvalidEpsilon(epsilon));
            }
        }
        if !constant.is_finite() || constant <= 0.0 {
            return Err(AnalysisError::InvalidGrid(format!(
                "constant {constant} must be positive"
            )));
        }
        Ok(Self { r_family, constant })
    }
}

/// One evaluated grid point. `i1` asks whether `r(n^k) >= k` (more rounds
/// than the chase depth); `i2` whether `r(n^k) * log2(n^k) >= c * n` (more
/// communication than the linear bound). `ratio1` and `ratio2` are the
/// corresponding quotients, below 1 exactly when the inequality fails.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct TradeoffRow {
    pub n: u64,
    pub k: u64,
    pub r_val: f64,
    pub i1: bool,
    pub i2: bool,
    pub ratio1: f64,
    pub ratio2: f64,
}

/// Evaluate the inequality system on a grid.
pub fn tradeoff_report(
    params: &TradeoffParams,
    n_grid: &[u64],
    k_choice: &KChoice,
) -> Result<Vec<TradeoffRow>, AnalysisError> {
    if n_grid.is_empty() {
        return Err(AnalysisError::InvalidGrid("empty n grid".into()));
    }
    if n_grid.iter().any(|&n| n < 2) {
        return Err(AnalysisError::InvalidGrid("n must be at least 2".into()));
    }
    if let KChoice::Grid(ks) = k_choice {
        if ks.is_empty() || ks.contains(&0) {
            return Err(AnalysisError::InvalidGrid(
                "k grid must be non-empty and positive".into(),
            ));
        }
    }
    let mut rows = Vec::new();
    for &n in n_grid {
        let ks: Vec<u64> = match k_choice {
            KChoice::SqrtOverLog => vec![k_sqrt_over_log(n)],
            KChoice::Grid(ks) => ks.clone(),
        };
        for k in ks {
            let log_n = (n as f64).log2();
            let log_big = k as f64 * log_n;
            let r_val = match params.r_family {
                RFamily::LogPow { epsilon } => log_big.powf(1.0 - epsilon),
                RFamily::LogOverLogLog => {
                    if log_big <= 1.0 {
                        f64::INFINITY
                    } else {
                        log_big / log_big.log2()
                    }
                }
            };
            let ratio1 = r_val / k as f64;
            let ratio2 = r_val * log_big / (params.constant * n as f64);
            rows.push(TradeoffRow {
                n,
                k,
                r_val,
                i1: ratio1 >= 1.0,
                i2: ratio2 >= 1.0,
                ratio1,
                ratio2,
            });
        }
    }
    Ok(rows)
}
