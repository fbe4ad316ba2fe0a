//! Directed graphs and the absorption relations used by the fault-tolerance
//! condition: `A ⇒ B`, `in(A ⇒ B)` and propagating sequences.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;

use crate::error::GraphError;
use crate::nodeset::{NodeId, NodeSet};

/// Simple directed graph: no self-loops, no parallel edges, `n >= 2`.
///
/// Immutable after construction.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DiGraph {
    n: usize,
    in_adj: Vec<Vec<NodeId>>,
    out_adj: Vec<Vec<NodeId>>,
    in_sets: Vec<NodeSet>,
}

impl DiGraph {
    pub fn from_edges<I>(n: usize, edges: I) -> Result<Self, GraphError>
    where
        I: IntoIterator<Item = (usize, usize)>,
    {
        if n < 2 {
            return Err(GraphError::TooFewNodes(n));
        }
        let mut in_sets = alloc::vec![NodeSet::new(); n];
        let mut out_sets = alloc::vec![NodeSet::new(); n];
        for (from, to) in edges {
            for node in [from, to] {
                if node >= n {
                    return Err(GraphError::NodeOutOfRange {
                        node: NodeId(node),
                        n,
                    });
                }
            }
            if from == to {
                return Err(GraphError::SelfLoop(NodeId(from)));
            }
            if !in_sets[to].insert(NodeId(from)) {
                return Err(GraphError::DuplicateEdge {
                    from: NodeId(from),
                    to: NodeId(to),
                });
            }
            out_sets[from].insert(NodeId(to));
        }
        Ok(DiGraph {
            n,
            in_adj: in_sets.iter().map(|s| s.iter().collect()).collect(),
            out_adj: out_sets.iter().map(|s| s.iter().collect()).collect(),
            in_sets,
        })
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn nodes(&self) -> impl Iterator<Item = NodeId> {
        (0..self.n).map(NodeId)
    }

    /// `N_v^-`, ascending.
    #[inline]
    pub fn in_neighbors(&self, v: NodeId) -> &[NodeId] {
        &self.in_adj[v.0]
    }

    /// `N_v^+`, ascending.
    #[inline]
    pub fn out_neighbors(&self, v: NodeId) -> &[NodeId] {
        &self.out_adj[v.0]
    }

    #[inline]
    pub fn in_neighbor_set(&self, v: NodeId) -> &NodeSet {
        &self.in_sets[v.0]
    }

    #[inline]
    pub fn in_degree(&self, v: NodeId) -> usize {
        self.in_adj[v.0].len()
    }

    pub fn min_in_degree(&self) -> usize {
        self.in_adj.iter().map(Vec::len).min().unwrap_or(0)
    }

    pub fn max_in_degree(&self) -> usize {
        self.in_adj.iter().map(Vec::len).max().unwrap_or(0)
    }

    pub fn has_edge(&self, from: NodeId, to: NodeId) -> bool {
        self.in_sets[to.0].contains(from)
    }

    /// All edges ordered by `(from, to)`.
    pub fn edges(&self) -> impl Iterator<Item = (NodeId, NodeId)> + '_ {
        self.out_adj
            .iter()
            .enumerate()
            .flat_map(|(from, outs)| outs.iter().map(move |&to| (NodeId(from), to)))
    }

    pub fn edge_count(&self) -> usize {
        self.out_adj.iter().map(Vec::len).sum()
    }

    pub fn all_nodes(&self) -> NodeSet {
        NodeSet::full(self.n)
    }

    fn check_members(&self, set: &NodeSet) -> Result<(), GraphError> {
        match set.max() {
            Some(max) if max.0 >= self.n => Err(GraphError::NodeOutOfRange {
                node: max,
                n: self.n,
            }),
            _ => Ok(()),
        }
    }

    fn check_pair(&self, a: &NodeSet, b: &NodeSet) -> Result<(), GraphError> {
        if a.is_empty() || b.is_empty() {
            return Err(GraphError::EmptySet);
        }
        self.check_members(a)?;
        self.check_members(b)?;
        if !a.is_disjoint(b) {
            return Err(GraphError::OverlappingSets);
        }
        Ok(())
    }
}

/// Whether `v` draws strictly more than a third of its in-neighbors from `a`.
///
/// Evaluated as `3·|N_v^- ∩ a| > |N_v^-|` in integers.
#[inline]
pub fn absorbs(g: &DiGraph, a: &NodeSet, v: NodeId) -> bool {
    3 * g.in_neighbor_set(v).intersection_len(a) > g.in_degree(v)
}

/// `in(A ⇒ B)` without argument validation.
pub(crate) fn in_set_unchecked(g: &DiGraph, a: &NodeSet, b: &NodeSet) -> NodeSet {
    b.iter().filter(|&v| absorbs(g, a, v)).collect()
}

/// `A ⇒ B`: some node of `b` has more than a third of its in-neighbors in `a`.
pub fn implies(g: &DiGraph, a: &NodeSet, b: &NodeSet) -> Result<bool, GraphError> {
    g.check_pair(a, b)?;
    Ok(b.iter().any(|v| absorbs(g, a, v)))
}

/// `in(A ⇒ B)`: the members of `b` absorbed by `a`. Empty exactly when `A ⇏ B`.
pub fn in_set(g: &DiGraph, a: &NodeSet, b: &NodeSet) -> Result<NodeSet, GraphError> {
    g.check_pair(a, b)?;
    Ok(in_set_unchecked(g, a, b))
}

/// Propagating sequences `A_0..A_l`, `B_0..B_l` witnessing that `A_0`
/// propagates to `B_0` in `l` steps.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PropagationSequence {
    a_sets: Vec<NodeSet>,
    b_sets: Vec<NodeSet>,
}

impl PropagationSequence {
    /// Number of absorption steps `l`.
    pub fn steps(&self) -> usize {
        self.a_sets.len() - 1
    }

    pub fn a_sets(&self) -> &[NodeSet] {
        &self.a_sets
    }

    pub fn b_sets(&self) -> &[NodeSet] {
        &self.b_sets
    }

    /// Re-derive every structural invariant of the sequence against `g`.
    pub fn validate(&self, g: &DiGraph) -> Result<(), &'static str> {
        let l = self.steps();
        if l == 0 || self.a_sets.len() != self.b_sets.len() {
            return Err("sequence must have l >= 1 and equal-length A/B lists");
        }
        if l > g.n() - 1 {
            return Err("l exceeds n - 1");
        }
        let whole = self.a_sets[0].union(&self.b_sets[0]);
        if self.a_sets[l] != whole || !self.b_sets[l].is_empty() {
            return Err("A_l must equal A ∪ B and B_l must be empty");
        }
        for tau in 0..=l {
            let (a, b) = (&self.a_sets[tau], &self.b_sets[tau]);
            if !a.is_disjoint(b) || a.union(b) != whole {
                return Err("A_τ and B_τ must partition A ∪ B");
            }
        }
        for tau in 0..l {
            let (a, b) = (&self.a_sets[tau], &self.b_sets[tau]);
            if b.is_empty() {
                return Err("B_τ must be non-empty before step l");
            }
            let absorbed = in_set_unchecked(g, a, b);
            if absorbed.is_empty() {
                return Err("A_τ must imply B_τ");
            }
            if self.a_sets[tau + 1] != a.union(&absorbed)
                || self.b_sets[tau + 1] != b.difference(&absorbed)
            {
                return Err("step does not follow the in-set recurrence");
            }
        }
        Ok(())
    }
}

/// Run the greedy absorption fixed point from `(a, b)`.
///
/// Returns the full sequence if `b` is eventually emptied, `None` if some step
/// absorbs nothing while `B_τ` is still non-empty.
pub fn propagates(
    g: &DiGraph,
    a: &NodeSet,
    b: &NodeSet,
) -> Result<Option<PropagationSequence>, GraphError> {
    g.check_pair(a, b)?;
    Ok(propagates_unchecked(g, a, b))
}

pub(crate) fn propagates_unchecked(
    g: &DiGraph,
    a: &NodeSet,
    b: &NodeSet,
) -> Option<PropagationSequence> {
    let mut a_sets = alloc::vec![a.clone()];
    let mut b_sets = alloc::vec![b.clone()];
    loop {
        let (cur_a, cur_b) = (a_sets.last()?, b_sets.last()?);
        if cur_b.is_empty() {
            return Some(PropagationSequence { a_sets, b_sets });
        }
        let absorbed = in_set_unchecked(g, cur_a, cur_b);
        if absorbed.is_empty() {
            return None;
        }
        let next_a = cur_a.union(&absorbed);
        let next_b = cur_b.difference(&absorbed);
        a_sets.push(next_a);
        b_sets.push(next_b);
    }
}

/// Disjoint cover of the vertex set by named blocks. Blocks may be empty.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LabeledPartition {
    n: usize,
    blocks: BTreeMap<String, NodeSet>,
}

impl LabeledPartition {
    pub fn new<I, S>(n: usize, blocks: I) -> Result<Self, GraphError>
    where
        I: IntoIterator<Item = (S, NodeSet)>,
        S: Into<String>,
    {
        let mut map: BTreeMap<String, NodeSet> = BTreeMap::new();
        let mut seen = NodeSet::new();
        for (name, set) in blocks {
            let name = name.into();
            if let Some(max) = set.max() {
                if max.0 >= n {
                    return Err(GraphError::NodeOutOfRange { node: max, n });
                }
            }
            if let Some(dup) = seen.intersection(&set).iter().next() {
                return Err(GraphError::PartitionOverlap(dup));
            }
            seen = seen.union(&set);
            if map.insert(name.clone(), set).is_some() {
                return Err(GraphError::InvalidBlock(name));
            }
        }
        if let Some(missing) = NodeSet::full(n).difference(&seen).iter().next() {
            return Err(GraphError::PartitionMissing(missing));
        }
        Ok(LabeledPartition { n, blocks: map })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Block by name; an absent block reads as empty.
    pub fn block(&self, name: &str) -> NodeSet {
        self.blocks.get(name).cloned().unwrap_or_default()
    }

    pub fn block_of(&self, v: NodeId) -> Option<&str> {
        self.blocks
            .iter()
            .find(|(_, set)| set.contains(v))
            .map(|(name, _)| name.as_str())
    }

    /// Blocks in name order.
    pub fn blocks(&self) -> impl Iterator<Item = (&str, &NodeSet)> {
        self.blocks.iter().map(|(k, v)| (k.as_str(), v))
    }
}
