//! Parameter-independent iterative approximate Byzantine consensus.
//!
//! The Middle algorithm lets every node trim the `⌊k/3⌋` smallest and largest
//! of its `k` received values and average the rest with its own state. It
//! never uses the global fault bound `f`. Whether it tolerates `f` Byzantine
//! nodes on a directed graph depends only on a combinatorial condition on the
//! graph, which [`checker`] certifies by exhaustive enumeration.
//!
//! The crate is `no_std` (it needs `alloc`). File formats, the CLI and the
//! sweep harness live in the companion `iabc` crate.

#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod adversary;
pub mod checker;
pub mod error;
pub mod generate;
pub mod graph;
pub mod middle;
pub mod nodeset;
pub mod sim;

pub use adversary::{craft, AdversaryStrategy, HonestRange, OutgoingMessages};
pub use checker::{
    check_degree, check_partition_condition, check_sufficient, verify_claim_two_sets,
    verify_lemma_propagation, CheckOptions, ConditionReport,
};
pub use error::{AdversaryError, CheckError, GraphError, MiddleError, SimError};
pub use graph::{implies, in_set, propagates, DiGraph, LabeledPartition, PropagationSequence};
pub use middle::{alpha, trim, update, weight, ReceivedVector, TrimPartition};
pub use nodeset::{NodeId, NodeSet};
pub use sim::{
    check_appendix_lemmas, check_contraction, check_validity, run, worst_fault_set,
    ContractionCheck, FaultSearch, RoundTrace, SimConfig, SimResult, Violation,
};
