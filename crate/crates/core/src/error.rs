use alloc::string::String;
use thiserror::Error;

use crate::nodeset::NodeId;

/// Errors raised while building graphs or evaluating set relations on them.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GraphError {
    #[error("graph needs at least 2 nodes, got {0}")]
    TooFewNodes(usize),
    #[error("self-loop on node {0}")]
    SelfLoop(NodeId),
    #[error("node {node} out of range for a graph with {n} nodes")]
    NodeOutOfRange { node: NodeId, n: usize },
    #[error("duplicate edge {from} -> {to}")]
    DuplicateEdge { from: NodeId, to: NodeId },
    #[error("node sets must be non-empty")]
    EmptySet,
    #[error("node sets must be disjoint")]
    OverlappingSets,
    #[error("partition blocks overlap on node {0}")]
    PartitionOverlap(NodeId),
    #[error("partition does not cover node {0}")]
    PartitionMissing(NodeId),
    #[error("invalid partition block `{0}`")]
    InvalidBlock(String),
}

/// Errors raised by the exhaustive condition checker.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CheckError {
    #[error("graph with {n} nodes is too large to certify (enumeration cap is {cap})")]
    TooLarge { n: usize, cap: usize },
    #[error(transparent)]
    Graph(#[from] GraphError),
}

/// Errors raised by the Middle update rule.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MiddleError {
    #[error("received vector is empty")]
    EmptyVector,
    #[error("non-finite value from sender {0}")]
    NonFinite(NodeId),
    #[error("duplicate entry from sender {0}")]
    DuplicateSender(NodeId),
}

/// Adversary configuration errors.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum AdversaryError {
    #[error("node {0} is not in the fault set")]
    NotFaulty(NodeId),
    #[error("split strategy requires x_minus ({x_minus}) < honest minimum ({lo})")]
    XMinusTooLarge { x_minus: f64, lo: f64 },
    #[error("split strategy requires x_plus ({x_plus}) > honest maximum ({hi})")]
    XPlusTooSmall { x_plus: f64, hi: f64 },
    #[error(
        "split target partition does not cover out-neighbor {receiver} of faulty node {faulty}"
    )]
    UncoveredReceiver { faulty: NodeId, receiver: NodeId },
    #[error("invalid noise range [{lo}, {hi}]")]
    InvalidRange { lo: f64, hi: f64 },
    #[error("strategy value {0} is not finite")]
    NonFinite(f64),
}

/// Simulation errors.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum SimError {
    #[error("inputs cover {got} nodes, graph has {n}")]
    InputCount { got: usize, n: usize },
    #[error("input for node {0} is not finite")]
    NonFiniteInput(NodeId),
    #[error("epsilon must be > 0, got {0}")]
    InvalidEpsilon(f64),
    #[error("default value must be finite")]
    NonFiniteDefault,
    #[error("fault set member {0} is not a node of the graph")]
    FaultOutOfRange(NodeId),
    #[error("every node is faulty")]
    NoFaultFreeNodes,
    #[error("node {node} produced a non-finite state in round {round}")]
    NonFiniteState { node: NodeId, round: usize },
    #[error("neither side of the midpoint split propagates at round {s}")]
    NoPropagation { s: usize },
    #[error("trace was recorded without deep tracing")]
    DeepTraceRequired,
    #[error("fault-set search over {n} nodes exceeds the cap of {cap}")]
    FaultSearchTooLarge { n: usize, cap: usize },
    #[error(transparent)]
    Adversary(#[from] AdversaryError),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Middle(#[from] MiddleError),
}
