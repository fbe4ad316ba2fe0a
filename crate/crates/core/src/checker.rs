//! Exhaustive certification of the necessary-and-sufficient graph condition
//! for the Middle algorithm to tolerate `f` Byzantine faults:
//!
//! 1. every node has in-degree at least `3f`;
//! 2. for every partition `F, L, C, R` of the nodes with `L, R` non-empty and
//!    `|F| <= f`, either `C ∪ R ⇒ L` or `L ∪ C ⇒ R`.
//!
//! The partition condition is checked by enumerating block assignments in
//! lexicographic order of base-4 digit strings `d_0 d_1 .. d_{n-1}` (digit of
//! node 0 most significant) with `F = 0, L = 1, C = 2, R = 3`. The first
//! violating assignment in that order is the reported witness.

use alloc::vec::Vec;
use core::ops::ControlFlow;

use crate::error::CheckError;
use crate::graph::{propagates_unchecked, DiGraph, LabeledPartition};
use crate::nodeset::NodeSet;

pub const DEFAULT_MAX_N: usize = 12;

/// Above this the bitmask enumerator cannot represent node sets.
pub const HARD_MAX_N: usize = 64;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CheckOptions {
    /// Refuse to enumerate graphs with more nodes than this.
    pub max_n: usize,
    /// Collect every violating partition instead of stopping at the first.
    pub all_witnesses: bool,
}

impl Default for CheckOptions {
    fn default() -> Self {
        CheckOptions {
            max_n: DEFAULT_MAX_N,
            all_witnesses: false,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConditionReport {
    pub f: usize,
    pub degree_ok: bool,
    pub partition_ok: bool,
    /// First violating `F, L, C, R` in enumeration order; present iff
    /// `partition_ok` is false.
    pub witness: Option<LabeledPartition>,
    /// Every violating partition, in enumeration order. Filled only with
    /// [`CheckOptions::all_witnesses`].
    pub all_witnesses: Vec<LabeledPartition>,
    /// Number of assignments with `L, R` non-empty and `|F| <= f` visited.
    pub partitions_examined: u64,
}

impl ConditionReport {
    pub fn satisfied(&self) -> bool {
        self.degree_ok && self.partition_ok
    }
}

/// Minimum in-degree is at least `3f`.
pub fn check_degree(g: &DiGraph, f: usize) -> bool {
    g.min_in_degree() >= 3 * f
}

pub fn check_partition_condition(g: &DiGraph, f: usize) -> Result<ConditionReport, CheckError> {
    check_partition_condition_with(g, f, &CheckOptions::default())
}

pub fn check_partition_condition_with(
    g: &DiGraph,
    f: usize,
    opts: &CheckOptions,
) -> Result<ConditionReport, CheckError> {
    let masks = Masks::new(g, opts.max_n)?;
    let mut examined = 0u64;
    let mut witnesses = Vec::new();
    enumerate_assignments(g.n(), f, 4, |blocks| {
        let [fb, l, c, r] = [blocks[0], blocks[1], blocks[2], blocks[3]];
        if l == 0 || r == 0 {
            return ControlFlow::Continue(());
        }
        examined += 1;
        if !masks.implies(c | r, l) && !masks.implies(l | c, r) {
            witnesses.push([fb, l, c, r]);
            if !opts.all_witnesses {
                return ControlFlow::Break(());
            }
        }
        ControlFlow::Continue(())
    });
    let witnesses: Vec<LabeledPartition> = witnesses
        .into_iter()
        .map(|[fb, l, c, r]| flcr_partition(g.n(), fb, l, c, r))
        .collect();
    let witness = witnesses.first().cloned();
    Ok(ConditionReport {
        f,
        degree_ok: check_degree(g, f),
        partition_ok: witness.is_none(),
        witness,
        all_witnesses: if opts.all_witnesses {
            witnesses
        } else {
            Vec::new()
        },
        partitions_examined: examined,
    })
}

/// Both halves of the condition. The report carries both flags.
pub fn check_sufficient(g: &DiGraph, f: usize) -> Result<ConditionReport, CheckError> {
    check_sufficient_with(g, f, &CheckOptions::default())
}

pub fn check_sufficient_with(
    g: &DiGraph,
    f: usize,
    opts: &CheckOptions,
) -> Result<ConditionReport, CheckError> {
    // check_partition_condition already fills degree_ok.
    check_partition_condition_with(g, f, opts)
}

/// Search for a partition `F, L, R` (`L, R` non-empty, `|F| <= f`) with
/// neither `L ⇒ R` nor `R ⇒ L`.
pub fn claim_two_sets_counterexample(
    g: &DiGraph,
    f: usize,
    max_n: usize,
) -> Result<Option<LabeledPartition>, CheckError> {
    let masks = Masks::new(g, max_n)?;
    let mut found = None;
    enumerate_assignments(g.n(), f, 3, |blocks| {
        let [fb, l, r] = [blocks[0], blocks[1], blocks[2]];
        if l != 0 && r != 0 && !masks.implies(l, r) && !masks.implies(r, l) {
            found = Some(flcr_partition(g.n(), fb, l, 0, r));
            return ControlFlow::Break(());
        }
        ControlFlow::Continue(())
    });
    Ok(found)
}

/// Every `F, L, R` split has `L ⇒ R` or `R ⇒ L`. A theorem on graphs passing
/// [`check_sufficient`]; unconstrained elsewhere.
pub fn verify_claim_two_sets(g: &DiGraph, f: usize) -> Result<bool, CheckError> {
    Ok(claim_two_sets_counterexample(g, f, DEFAULT_MAX_N)?.is_none())
}

/// Search for a partition `A, B, F` (`A, B` non-empty, `|F| <= f`) where
/// neither side propagates to the other.
pub fn lemma_propagation_counterexample(
    g: &DiGraph,
    f: usize,
    max_n: usize,
) -> Result<Option<LabeledPartition>, CheckError> {
    Masks::new(g, max_n)?;
    let mut found = None;
    enumerate_assignments(g.n(), f, 3, |blocks| {
        let [fb, a, b] = [blocks[0], blocks[1], blocks[2]];
        if a == 0 || b == 0 {
            return ControlFlow::Continue(());
        }
        let (sa, sb) = (NodeSet::from_mask(a), NodeSet::from_mask(b));
        if propagates_unchecked(g, &sa, &sb).is_none()
            && propagates_unchecked(g, &sb, &sa).is_none()
        {
            found = Some(
                LabeledPartition::new(g.n(), [("A", sa), ("B", sb), ("F", NodeSet::from_mask(fb))])
                    .expect("enumerated blocks partition the node set"),
            );
            return ControlFlow::Break(());
        }
        ControlFlow::Continue(())
    });
    Ok(found)
}

/// Every `A, B, F` split has `A` propagating to `B` or `B` to `A`.
pub fn verify_lemma_propagation(g: &DiGraph, f: usize) -> Result<bool, CheckError> {
    Ok(lemma_propagation_counterexample(g, f, DEFAULT_MAX_N)?.is_none())
}

fn flcr_partition(n: usize, fb: u64, l: u64, c: u64, r: u64) -> LabeledPartition {
    LabeledPartition::new(
        n,
        [
            ("F", NodeSet::from_mask(fb)),
            ("L", NodeSet::from_mask(l)),
            ("C", NodeSet::from_mask(c)),
            ("R", NodeSet::from_mask(r)),
        ],
    )
    .expect("enumerated blocks partition the node set")
}

/// In-neighbor bitmasks for fast popcount evaluation of `⇒`.
struct Masks {
    in_mask: Vec<u64>,
    degree: Vec<u32>,
}

impl Masks {
    fn new(g: &DiGraph, max_n: usize) -> Result<Self, CheckError> {
        let cap = max_n.min(HARD_MAX_N);
        if g.n() > cap {
            return Err(CheckError::TooLarge { n: g.n(), cap });
        }
        Ok(Masks {
            in_mask: g
                .nodes()
                .map(|v| g.in_neighbor_set(v).to_mask().expect("n <= 64"))
                .collect(),
            degree: g.nodes().map(|v| g.in_degree(v) as u32).collect(),
        })
    }

    #[inline]
    fn implies(&self, a: u64, mut b: u64) -> bool {
        while b != 0 {
            let v = b.trailing_zeros() as usize;
            b &= b - 1;
            if 3 * (self.in_mask[v] & a).count_ones() > self.degree[v] {
                return true;
            }
        }
        false
    }
}

/// Visit every assignment of `n` nodes to `arity` blocks (block 0 is the
/// fault block, capped at `f` members) in lexicographic order of the digit
/// string, node 0 most significant. The visitor sees one bitmask per block.
fn enumerate_assignments<V>(n: usize, f: usize, arity: usize, mut visit: V)
where
    V: FnMut(&[u64]) -> ControlFlow<()>,
{
    let mut blocks = [0u64; 4];
    let _ = walk(0, n, f, arity, &mut blocks, &mut visit);
}

fn walk<V>(
    node: usize,
    n: usize,
    f_left: usize,
    arity: usize,
    blocks: &mut [u64; 4],
    visit: &mut V,
) -> ControlFlow<()>
where
    V: FnMut(&[u64]) -> ControlFlow<()>,
{
    if node == n {
        return visit(&blocks[..arity]);
    }
    let bit = 1u64 << node;
    for digit in 0..arity {
        if digit == 0 && f_left == 0 {
            continue;
        }
        blocks[digit] |= bit;
        let left = if digit == 0 { f_left - 1 } else { f_left };
        let flow = walk(node + 1, n, left, arity, blocks, visit);
        blocks[digit] &= !bit;
        flow?;
    }
    ControlFlow::Continue(())
}

/// Read the `F, L, C, R` blocks of a checker witness.
pub fn witness_blocks(w: &LabeledPartition) -> [NodeSet; 4] {
    [w.block("F"), w.block("L"), w.block("C"), w.block("R")]
}
