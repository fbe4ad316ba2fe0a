//! The per-node Update step of the Middle algorithm.
//!
//! A node with `k` in-neighbors sorts the `k` received values, drops the
//! `⌊k/3⌋` smallest (`B`) and `⌊k/3⌋` largest (`T`), and averages the
//! remaining middle values (`M`) together with its own state, all with weight
//! `1 / (|M| + 1)`. The rule never reads the fault bound `f`.

use alloc::vec::Vec;

use crate::error::MiddleError;
use crate::graph::DiGraph;
use crate::nodeset::{NodeId, NodeSet};

/// One received value and who sent it.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Entry {
    pub sender: NodeId,
    pub value: f64,
}

/// The vector `r_i[t]`: one finite value per in-neighbor.
#[derive(Clone, Debug, PartialEq)]
pub struct ReceivedVector {
    entries: Vec<Entry>,
}

impl ReceivedVector {
    pub fn new(entries: Vec<Entry>) -> Result<Self, MiddleError> {
        let mut senders = NodeSet::new();
        for e in &entries {
            if !e.value.is_finite() {
                return Err(MiddleError::NonFinite(e.sender));
            }
            if !senders.insert(e.sender) {
                return Err(MiddleError::DuplicateSender(e.sender));
            }
        }
        Ok(ReceivedVector { entries })
    }

    pub fn from_pairs<I>(pairs: I) -> Result<Self, MiddleError>
    where
        I: IntoIterator<Item = (usize, f64)>,
    {
        Self::new(
            pairs
                .into_iter()
                .map(|(s, value)| Entry {
                    sender: NodeId(s),
                    value,
                })
                .collect(),
        )
    }

    pub fn entries(&self) -> &[Entry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// The `B / M / T` split of a received vector, each part in canonical order.
#[derive(Clone, Debug, PartialEq)]
pub struct TrimPartition {
    pub bottom: Vec<Entry>,
    pub middle: Vec<Entry>,
    pub top: Vec<Entry>,
}

impl TrimPartition {
    pub fn bottom_ids(&self) -> NodeSet {
        self.bottom.iter().map(|e| e.sender).collect()
    }

    pub fn middle_ids(&self) -> NodeSet {
        self.middle.iter().map(|e| e.sender).collect()
    }

    pub fn top_ids(&self) -> NodeSet {
        self.top.iter().map(|e| e.sender).collect()
    }
}

/// Number of values trimmed from each end for in-degree `k`.
#[inline]
pub fn trim_count(k: usize) -> usize {
    k / 3
}

/// `|M| = k - 2⌊k/3⌋`.
#[inline]
pub fn middle_size(k: usize) -> usize {
    k - 2 * trim_count(k)
}

/// Sort by `(value, sender)` and slice off `⌊k/3⌋` entries at each end.
pub fn trim(received: &ReceivedVector) -> Result<TrimPartition, MiddleError> {
    if received.is_empty() {
        return Err(MiddleError::EmptyVector);
    }
    let mut sorted = received.entries.clone();
    sorted.sort_by(|a, b| a.value.total_cmp(&b.value).then(a.sender.cmp(&b.sender)));
    let k = sorted.len();
    let cut = trim_count(k);
    let top = sorted.split_off(k - cut);
    let middle = sorted.split_off(cut);
    Ok(TrimPartition {
        bottom: sorted,
        middle,
        top,
    })
}

/// The weight `a_i = 1 / (|M| + 1)` for a node of in-degree `k`.
#[inline]
pub fn weight(in_degree: usize) -> f64 {
    1.0 / (middle_size(in_degree) + 1) as f64
}

/// `α = min_i a_i` over every node of the graph.
pub fn alpha(g: &DiGraph) -> f64 {
    g.nodes()
        .map(|v| weight(g.in_degree(v)))
        .fold(1.0, f64::min)
}

/// Outcome of one Update step, kept for deep traces.
#[derive(Clone, Debug, PartialEq)]
pub struct UpdateOutcome {
    pub state: f64,
    pub weight: f64,
    /// `M`, in canonical order. Empty when the node has no in-neighbors.
    pub middle: Vec<Entry>,
}

/// New state `a_i · (own + Σ_{j∈M} w_j)`, computed as the sum divided by
/// `|M| + 1`.
///
/// The result is clamped into the hull of the averaged values so rounding can
/// never leave it. A non-finite sum (overflow) is returned unclamped so callers
/// can detect it.
pub fn update(own_state: f64, received: &ReceivedVector) -> f64 {
    update_detailed(own_state, received).state
}

pub fn update_detailed(own_state: f64, received: &ReceivedVector) -> UpdateOutcome {
    let middle = match trim(received) {
        Ok(parts) => parts.middle,
        Err(_) => Vec::new(),
    };
    let a = weight(received.len());
    let (mut lo, mut hi, mut sum) = (own_state, own_state, own_state);
    for e in &middle {
        lo = lo.min(e.value);
        hi = hi.max(e.value);
        sum += e.value;
    }
    let raw = sum / (middle.len() + 1) as f64;
    let state = if raw.is_finite() {
        raw.clamp(lo, hi)
    } else {
        raw
    };
    UpdateOutcome {
        state,
        weight: a,
        middle,
    }
}
