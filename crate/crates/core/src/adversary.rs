//! Byzantine message crafting.
//!
//! Faulty nodes see every state and may send a different value on each
//! outgoing edge. Besides generic noise and constant attacks this module
//! carries the two constructions that show the graph condition is necessary:
//! [`AdversaryStrategy::LargeValue`] breaks validity at a node with in-degree
//! below `3f`, and [`AdversaryStrategy::SplitValue`] freezes a violating
//! `F, L, C, R` partition forever.

use alloc::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::AdversaryError;
use crate::graph::{DiGraph, LabeledPartition};
use crate::nodeset::{NodeId, NodeSet};

#[derive(Clone, Debug, PartialEq)]
pub enum AdversaryStrategy {
    /// Withhold every message; receivers substitute the default value.
    Silent,
    /// Send `c` to every out-neighbor.
    FixedValue(f64),
    /// Send `y` to every out-neighbor. `None` picks a value large enough to
    /// survive any trimming that leaves a faulty value in `M`.
    LargeValue { y: Option<f64> },
    /// `x_minus` to `L`, `x_plus` to `R`, the midpoint of the honest input
    /// range to everyone else.
    SplitValue {
        x_minus: f64,
        x_plus: f64,
        target: LabeledPartition,
    },
    /// Uniform draw in `[lo, hi]` per receiver per round.
    RandomNoise { lo: f64, hi: f64, seed: u64 },
}

impl AdversaryStrategy {
    pub fn name(&self) -> &'static str {
        match self {
            AdversaryStrategy::Silent => "silent",
            AdversaryStrategy::FixedValue(_) => "fixed_value",
            AdversaryStrategy::LargeValue { .. } => "large_value",
            AdversaryStrategy::SplitValue { .. } => "split_value",
            AdversaryStrategy::RandomNoise { .. } => "random_noise",
        }
    }

    /// Configuration-time checks against the graph, fault set and honest inputs.
    pub fn validate(
        &self,
        g: &DiGraph,
        fault_set: &NodeSet,
        honest: HonestRange,
    ) -> Result<(), AdversaryError> {
        match self {
            AdversaryStrategy::Silent => Ok(()),
            AdversaryStrategy::FixedValue(c) => finite(*c),
            AdversaryStrategy::LargeValue { y } => y.map_or(Ok(()), finite),
            AdversaryStrategy::SplitValue {
                x_minus,
                x_plus,
                target,
            } => {
                finite(*x_minus)?;
                finite(*x_plus)?;
                if *x_minus >= honest.lo {
                    return Err(AdversaryError::XMinusTooLarge {
                        x_minus: *x_minus,
                        lo: honest.lo,
                    });
                }
                if *x_plus <= honest.hi {
                    return Err(AdversaryError::XPlusTooSmall {
                        x_plus: *x_plus,
                        hi: honest.hi,
                    });
                }
                for faulty in fault_set {
                    for &receiver in g.out_neighbors(faulty) {
                        if receiver.0 >= target.n() || target.block_of(receiver).is_none() {
                            return Err(AdversaryError::UncoveredReceiver { faulty, receiver });
                        }
                    }
                }
                Ok(())
            }
            AdversaryStrategy::RandomNoise { lo, hi, .. } => {
                if lo.is_finite() && hi.is_finite() && lo <= hi {
                    Ok(())
                } else {
                    Err(AdversaryError::InvalidRange { lo: *lo, hi: *hi })
                }
            }
        }
    }
}

fn finite(v: f64) -> Result<(), AdversaryError> {
    if v.is_finite() {
        Ok(())
    } else {
        Err(AdversaryError::NonFinite(v))
    }
}

/// Minimum and maximum of the fault-free initial inputs (`x` and `X`).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HonestRange {
    pub lo: f64,
    pub hi: f64,
}

impl HonestRange {
    pub fn midpoint(&self) -> f64 {
        self.lo + (self.hi - self.lo) / 2.0
    }
}

/// What the adversary knows when crafting round `round`.
#[derive(Clone, Copy, Debug)]
pub struct AdversaryView<'a> {
    pub round: usize,
    /// States of every node at the end of the previous round.
    pub states: &'a [f64],
    pub fault_set: &'a NodeSet,
    pub honest: HonestRange,
}

/// Messages a faulty node sends this round. A missing receiver means the
/// message is withheld.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct OutgoingMessages {
    pub per_receiver: BTreeMap<NodeId, f64>,
}

impl OutgoingMessages {
    pub fn get(&self, receiver: NodeId) -> Option<f64> {
        self.per_receiver.get(&receiver).copied()
    }
}

/// Default `Y` for [`AdversaryStrategy::LargeValue`]:
/// `X + (max in-degree + 1)·(X − x + 1)`.
pub fn default_large_value(g: &DiGraph, honest: HonestRange) -> f64 {
    honest.hi + (g.max_in_degree() + 1) as f64 * (honest.hi - honest.lo + 1.0)
}

/// Stream for `(seed, node, round)`, independent of evaluation order.
fn noise_rng(seed: u64, node: NodeId, round: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(((node.0 as u64) << 32) ^ round as u64);
    rng
}

pub fn craft(
    strategy: &AdversaryStrategy,
    faulty: NodeId,
    g: &DiGraph,
    view: &AdversaryView<'_>,
) -> Result<OutgoingMessages, AdversaryError> {
    if !view.fault_set.contains(faulty) {
        return Err(AdversaryError::NotFaulty(faulty));
    }
    let receivers = g.out_neighbors(faulty);
    let per_receiver = match strategy {
        AdversaryStrategy::Silent => BTreeMap::new(),
        AdversaryStrategy::FixedValue(c) => receivers.iter().map(|&r| (r, *c)).collect(),
        AdversaryStrategy::LargeValue { y } => {
            let y = y.unwrap_or_else(|| default_large_value(g, view.honest));
            receivers.iter().map(|&r| (r, y)).collect()
        }
        AdversaryStrategy::SplitValue {
            x_minus,
            x_plus,
            target,
        } => {
            let mid = view.honest.midpoint();
            let mut out = BTreeMap::new();
            for &r in receivers {
                let value = match target.block_of(r) {
                    Some("L") => *x_minus,
                    Some("R") => *x_plus,
                    Some(_) => mid,
                    None => {
                        return Err(AdversaryError::UncoveredReceiver {
                            faulty,
                            receiver: r,
                        })
                    }
                };
                out.insert(r, value);
            }
            out
        }
        AdversaryStrategy::RandomNoise { lo, hi, seed } => {
            let mut rng = noise_rng(*seed, faulty, view.round);
            receivers
                .iter()
                .map(|&r| {
                    let v = if lo == hi {
                        *lo
                    } else {
                        rng.gen_range(*lo..=*hi)
                    };
                    (r, v)
                })
                .collect()
        }
    };
    Ok(OutgoingMessages { per_receiver })
}
