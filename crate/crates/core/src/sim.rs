//! Synchronous round engine for the Middle algorithm plus trace checks for
//! validity, the per-epoch contraction bound and the supporting inequalities.
//!
//! Round `t` is a strict barrier: every message of round `t` is computed from
//! the states at the end of round `t − 1` before any node updates.

use alloc::vec::Vec;

use crate::adversary::{craft, AdversaryStrategy, AdversaryView, HonestRange, OutgoingMessages};
use crate::error::SimError;
use crate::graph::{propagates_unchecked, DiGraph, PropagationSequence};
use crate::middle::{alpha, update_detailed, Entry, ReceivedVector, UpdateOutcome};
use crate::nodeset::{NodeId, NodeSet};

/// Absolute slack for the per-round validity comparison.
pub const VALIDITY_TOLERANCE: f64 = 1e-12;
/// Relative slack (fraction of `U[s] − μ[s]`) for the contraction bound.
pub const CONTRACTION_TOLERANCE: f64 = 1e-9;
/// Absolute slack for the per-message and per-epoch inequalities.
pub const LEMMA_TOLERANCE: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq)]
pub struct SimConfig {
    pub graph: DiGraph,
    pub fault_set: NodeSet,
    pub strategy: AdversaryStrategy,
    /// `v_i[0]` for every node, faulty ones included (their value only matters
    /// to adversaries that read it).
    pub inputs: Vec<f64>,
    pub epsilon: f64,
    pub max_rounds: usize,
    /// Substituted for withheld messages.
    pub default_value: f64,
    /// Keep every node's `M` set and weight per round.
    pub deep_trace: bool,
    /// Stop at the first round with `U − μ <= epsilon`.
    pub stop_on_convergence: bool,
}

impl SimConfig {
    /// Fault-free run with `epsilon = 1e-6`, 10 000 rounds, default value 0.
    pub fn new(graph: DiGraph, inputs: Vec<f64>) -> Self {
        SimConfig {
            graph,
            fault_set: NodeSet::new(),
            strategy: AdversaryStrategy::Silent,
            inputs,
            epsilon: 1e-6,
            max_rounds: 10_000,
            default_value: 0.0,
            deep_trace: false,
            stop_on_convergence: true,
        }
    }

    pub fn fault_free(&self) -> impl Iterator<Item = NodeId> + '_ {
        self.graph.nodes().filter(|v| !self.fault_set.contains(*v))
    }

    /// Check the configuration and return the honest input range `[x, X]`.
    pub fn validate(&self) -> Result<HonestRange, SimError> {
        let n = self.graph.n();
        if self.inputs.len() != n {
            return Err(SimError::InputCount {
                got: self.inputs.len(),
                n,
            });
        }
        if let Some(bad) = (0..n).find(|&i| !self.inputs[i].is_finite()) {
            return Err(SimError::NonFiniteInput(NodeId(bad)));
        }
        if self.epsilon.is_nan() || self.epsilon <= 0.0 {
            return Err(SimError::InvalidEpsilon(self.epsilon));
        }
        if !self.default_value.is_finite() {
            return Err(SimError::NonFiniteDefault);
        }
        if let Some(max) = self.fault_set.max() {
            if max.0 >= n {
                return Err(SimError::FaultOutOfRange(max));
            }
        }
        let honest = envelope(&self.inputs, self.fault_free())
            .map(|(lo, hi)| HonestRange { lo, hi })
            .ok_or(SimError::NoFaultFreeNodes)?;
        self.strategy
            .validate(&self.graph, &self.fault_set, honest)?;
        Ok(honest)
    }
}

/// A named invariant breach found in a trace.
#[derive(Clone, Debug, PartialEq)]
pub enum Violation {
    /// `μ[t] < μ[t−1]`.
    LowerDecreased { round: usize, prev: f64, now: f64 },
    /// `U[t] > U[t−1]`.
    UpperIncreased { round: usize, prev: f64, now: f64 },
    /// Neither side of the midpoint split at round `round` propagates.
    NoPropagation { round: usize },
    /// `v_i[t] − ψ >= a_i (w_j − ψ)` failed with `ψ = μ[t−1]`.
    LowerEnvelope {
        round: usize,
        node: NodeId,
        from: NodeId,
        lhs: f64,
        rhs: f64,
    },
    /// `Ψ − v_i[t] >= a_i (Ψ − w_j)` failed with `Ψ = U[t−1]`.
    UpperEnvelope {
        round: usize,
        node: NodeId,
        from: NodeId,
        lhs: f64,
        rhs: f64,
    },
    /// `v_i[s+τ] − μ[s] >= α^τ (x − μ[s])` failed for `i ∈ R_τ`.
    EpochLower {
        s: usize,
        tau: usize,
        node: NodeId,
        lhs: f64,
        rhs: f64,
    },
    /// `U[s] − v_i[s+τ] >= α^τ (U[s] − X)` failed for `i ∈ R_τ`.
    EpochUpper {
        s: usize,
        tau: usize,
        node: NodeId,
        lhs: f64,
        rhs: f64,
    },
}

impl Violation {
    pub fn name(&self) -> &'static str {
        match self {
            Violation::LowerDecreased { .. } => "validity_lower",
            Violation::UpperIncreased { .. } => "validity_upper",
            Violation::NoPropagation { .. } => "no_propagation",
            Violation::LowerEnvelope { .. } => "lower_envelope",
            Violation::UpperEnvelope { .. } => "upper_envelope",
            Violation::EpochLower { .. } => "epoch_lower",
            Violation::EpochUpper { .. } => "epoch_upper",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RoundTrace {
    pub t: usize,
    /// State of every node. Faulty entries hold their input and carry no meaning.
    pub states: Vec<f64>,
    /// `U[t]`, max over fault-free nodes.
    pub upper: f64,
    /// `μ[t]`, min over fault-free nodes.
    pub lower: f64,
    pub violations: Vec<Violation>,
    /// Per-node update details (`None` for faulty nodes and round 0).
    pub deep: Option<Vec<Option<UpdateOutcome>>>,
}

impl RoundTrace {
    pub fn gap(&self) -> f64 {
        self.upper - self.lower
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ContractionCheck {
    pub s: usize,
    pub l: usize,
    pub bound: f64,
    pub observed: f64,
    pub bound_ok: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SimResult {
    pub trace: Vec<RoundTrace>,
    /// First round `t >= 1` with `U[t] − μ[t] <= epsilon`.
    pub converged_at: Option<usize>,
    pub validity_held: bool,
    pub contraction_checks: Vec<ContractionCheck>,
}

impl SimResult {
    pub fn final_round(&self) -> &RoundTrace {
        self.trace.last().expect("trace always holds round 0")
    }
}

/// `(min, max)` of `values` over `nodes`.
fn envelope(values: &[f64], nodes: impl Iterator<Item = NodeId>) -> Option<(f64, f64)> {
    nodes.map(|v| values[v.0]).fold(None, |acc, x| match acc {
        None => Some((x, x)),
        Some((lo, hi)) => Some((lo.min(x), hi.max(x))),
    })
}

pub fn run(config: &SimConfig) -> Result<SimResult, SimError> {
    let honest = config.validate()?;
    let g = &config.graph;
    let faults = &config.fault_set;
    let fault_free: Vec<NodeId> = config.fault_free().collect();

    let mut states = config.inputs.clone();
    let (lower, upper) = envelope(&states, fault_free.iter().copied()).expect("validated");
    let mut trace = alloc::vec![RoundTrace {
        t: 0,
        states: states.clone(),
        upper,
        lower,
        violations: Vec::new(),
        deep: None,
    }];
    let mut converged_at = None;

    for t in 1..=config.max_rounds {
        let view = AdversaryView {
            round: t,
            states: &states,
            fault_set: faults,
            honest,
        };
        let mut crafted: Vec<Option<OutgoingMessages>> = alloc::vec![None; g.n()];
        for faulty in faults {
            crafted[faulty.0] = Some(craft(&config.strategy, faulty, g, &view)?);
        }

        let mut next = states.clone();
        let mut deep = config.deep_trace.then(|| alloc::vec![None; g.n()]);
        for &i in &fault_free {
            let entries = g
                .in_neighbors(i)
                .iter()
                .map(|&j| Entry {
                    sender: j,
                    value: match &crafted[j.0] {
                        Some(msgs) => msgs.get(i).unwrap_or(config.default_value),
                        None => states[j.0],
                    },
                })
                .collect();
            let received = ReceivedVector::new(entries)?;
            let outcome = update_detailed(states[i.0], &received);
            if !outcome.state.is_finite() {
                return Err(SimError::NonFiniteState { node: i, round: t });
            }
            next[i.0] = outcome.state;
            if let Some(deep) = deep.as_mut() {
                deep[i.0] = Some(outcome);
            }
        }
        states = next;

        let prev = trace.last().expect("non-empty");
        let (lower, upper) = envelope(&states, fault_free.iter().copied()).expect("validated");
        let mut violations = Vec::new();
        if lower < prev.lower - VALIDITY_TOLERANCE {
            violations.push(Violation::LowerDecreased {
                round: t,
                prev: prev.lower,
                now: lower,
            });
        }
        if upper > prev.upper + VALIDITY_TOLERANCE {
            violations.push(Violation::UpperIncreased {
                round: t,
                prev: prev.upper,
                now: upper,
            });
        }
        trace.push(RoundTrace {
            t,
            states: states.clone(),
            upper,
            lower,
            violations,
            deep,
        });

        if converged_at.is_none() && upper - lower <= config.epsilon {
            converged_at = Some(t);
            if config.stop_on_convergence {
                break;
            }
        }
    }

    let mut result = SimResult {
        trace,
        converged_at,
        validity_held: false,
        contraction_checks: Vec::new(),
    };
    result.validity_held = check_validity(&result);
    match check_contraction(&result, g, faults) {
        Ok(checks) => result.contraction_checks = checks,
        Err(SimError::NoPropagation { s }) => result.trace[s]
            .violations
            .push(Violation::NoPropagation { round: s }),
        Err(other) => return Err(other),
    }
    Ok(result)
}

/// `μ` non-decreasing and `U` non-increasing across every round.
pub fn check_validity(result: &SimResult) -> bool {
    check_validity_with(result, VALIDITY_TOLERANCE)
}

pub fn check_validity_with(result: &SimResult, tolerance: f64) -> bool {
    result
        .trace
        .windows(2)
        .all(|w| w[1].lower >= w[0].lower - tolerance && w[1].upper <= w[0].upper + tolerance)
}

/// One contraction epoch `[s, s + l]`: the fault-free nodes split at the
/// midpoint of `[μ[s], U[s]]`, and the side `R` that propagates to the other.
#[derive(Clone, Debug, PartialEq)]
pub struct Epoch {
    pub s: usize,
    pub sequence: PropagationSequence,
    /// `min_{j∈R} v_j[s]`.
    pub r_min: f64,
    /// `max_{j∈R} v_j[s]`.
    pub r_max: f64,
}

impl Epoch {
    pub fn l(&self) -> usize {
        self.sequence.steps()
    }

    pub fn propagating_side(&self) -> &NodeSet {
        &self.sequence.a_sets()[0]
    }
}

/// Recompute epoch boundaries from the trace. Starting at `s = 0`, split the
/// fault-free nodes into `A` (states below the midpoint) and `B` (the rest),
/// take whichever side propagates in fewer steps (`A` on ties), and advance by
/// `l`. Stops at a zero gap or when the epoch would run past the trace.
pub fn epochs(
    result: &SimResult,
    g: &DiGraph,
    fault_set: &NodeSet,
) -> Result<Vec<Epoch>, SimError> {
    let last = result.trace.len() - 1;
    let mut out = Vec::new();
    let mut s = 0;
    while s < last {
        let round = &result.trace[s];
        let gap = round.gap();
        if gap <= 0.0 {
            break;
        }
        let mid = round.lower + gap / 2.0;
        let (mut a, mut b) = (NodeSet::new(), NodeSet::new());
        for v in g.nodes().filter(|v| !fault_set.contains(*v)) {
            if round.states[v.0] < mid {
                a.insert(v);
            } else {
                b.insert(v);
            }
        }
        if a.is_empty() {
            // Gap below float resolution.
            break;
        }
        let sequence = match (
            propagates_unchecked(g, &a, &b),
            propagates_unchecked(g, &b, &a),
        ) {
            (Some(ab), Some(ba)) if ba.steps() < ab.steps() => ba,
            (Some(ab), _) => ab,
            (None, Some(ba)) => ba,
            (None, None) => return Err(SimError::NoPropagation { s }),
        };
        let l = sequence.steps();
        if s + l > last {
            break;
        }
        let (r_min, r_max) =
            envelope(&round.states, sequence.a_sets()[0].iter()).expect("non-empty side");
        out.push(Epoch {
            s,
            sequence,
            r_min,
            r_max,
        });
        s += l;
    }
    Ok(out)
}

/// Check `U[s+l] − μ[s+l] <= (1 − α^l / 2)(U[s] − μ[s])` on every epoch.
pub fn check_contraction(
    result: &SimResult,
    g: &DiGraph,
    fault_set: &NodeSet,
) -> Result<Vec<ContractionCheck>, SimError> {
    let a = alpha(g);
    Ok(epochs(result, g, fault_set)?
        .into_iter()
        .map(|e| {
            let l = e.l();
            let gap = result.trace[e.s].gap();
            let bound = (1.0 - powi(a, l) / 2.0) * gap;
            let observed = result.trace[e.s + l].gap();
            ContractionCheck {
                s: e.s,
                l,
                bound,
                observed,
                bound_ok: observed <= bound + CONTRACTION_TOLERANCE * gap,
            }
        })
        .collect())
}

/// Check the per-message envelope inequalities for every round, fault-free
/// node and `j ∈ {i} ∪ M`, and the per-epoch lower/upper growth bounds for
/// nodes in the propagating sets `R_τ`. Needs a deep trace.
pub fn check_appendix_lemmas(
    result: &SimResult,
    g: &DiGraph,
    fault_set: &NodeSet,
) -> Result<Vec<Violation>, SimError> {
    let tol = LEMMA_TOLERANCE;
    let mut violations = Vec::new();
    for w in result.trace.windows(2) {
        let (prev, cur) = (&w[0], &w[1]);
        let deep = cur.deep.as_ref().ok_or(SimError::DeepTraceRequired)?;
        let (psi, big_psi) = (prev.lower, prev.upper);
        for i in g.nodes().filter(|v| !fault_set.contains(*v)) {
            let Some(outcome) = &deep[i.0] else { continue };
            let v = cur.states[i.0];
            let a = outcome.weight;
            let own = Entry {
                sender: i,
                value: prev.states[i.0],
            };
            for e in core::iter::once(&own).chain(&outcome.middle) {
                let (lhs, rhs) = (v - psi, a * (e.value - psi));
                if lhs < rhs - tol {
                    violations.push(Violation::LowerEnvelope {
                        round: cur.t,
                        node: i,
                        from: e.sender,
                        lhs,
                        rhs,
                    });
                }
                let (lhs, rhs) = (big_psi - v, a * (big_psi - e.value));
                if lhs < rhs - tol {
                    violations.push(Violation::UpperEnvelope {
                        round: cur.t,
                        node: i,
                        from: e.sender,
                        lhs,
                        rhs,
                    });
                }
            }
        }
    }

    let epochs = match epochs(result, g, fault_set) {
        Ok(e) => e,
        Err(SimError::NoPropagation { s }) => {
            violations.push(Violation::NoPropagation { round: s });
            return Ok(violations);
        }
        Err(other) => return Err(other),
    };
    let a = alpha(g);
    for e in &epochs {
        let base = &result.trace[e.s];
        let (mu_s, u_s) = (base.lower, base.upper);
        let mut factor = 1.0;
        for (tau, r_tau) in e.sequence.a_sets().iter().enumerate() {
            let states = &result.trace[e.s + tau].states;
            for i in r_tau {
                let v = states[i.0];
                let (lhs, rhs) = (v - mu_s, factor * (e.r_min - mu_s));
                if lhs < rhs - tol {
                    violations.push(Violation::EpochLower {
                        s: e.s,
                        tau,
                        node: i,
                        lhs,
                        rhs,
                    });
                }
                let (lhs, rhs) = (u_s - v, factor * (u_s - e.r_max));
                if lhs < rhs - tol {
                    violations.push(Violation::EpochUpper {
                        s: e.s,
                        tau,
                        node: i,
                        lhs,
                        rhs,
                    });
                }
            }
            factor *= a;
        }
    }
    Ok(violations)
}

/// Largest `n` accepted by [`worst_fault_set`].
pub const FAULT_SEARCH_MAX_N: usize = 16;

/// Result of [`worst_fault_set`].
#[derive(Clone, Debug, PartialEq)]
pub struct FaultSearch {
    pub fault_set: NodeSet,
    pub validity_held: bool,
    /// `U − μ` at the last simulated round.
    pub final_gap: f64,
    /// Fault sets tried.
    pub candidates: usize,
}

/// Brute-force placement of up to `f` faulty nodes for `config`'s strategy.
/// Every fault set with `|F| <= f` that leaves a fault-free node is run; a
/// validity loss ranks above any gap, then the largest final `U − μ` wins.
/// Ties keep the set with the smallest bitmask.
pub fn worst_fault_set(config: &SimConfig, f: usize) -> Result<FaultSearch, SimError> {
    let n = config.graph.n();
    if n > FAULT_SEARCH_MAX_N {
        return Err(SimError::FaultSearchTooLarge {
            n,
            cap: FAULT_SEARCH_MAX_N,
        });
    }
    let full = (1u64 << n) - 1;
    let mut best: Option<FaultSearch> = None;
    let mut candidates = 0;
    for mask in (0..full).filter(|m| m.count_ones() as usize <= f) {
        let mut cfg = config.clone();
        cfg.fault_set = NodeSet::from_mask(mask);
        cfg.deep_trace = false;
        let res = run(&cfg)?;
        candidates += 1;
        let last = res.final_round();
        let found = FaultSearch {
            fault_set: cfg.fault_set,
            validity_held: res.validity_held,
            final_gap: last.upper - last.lower,
            candidates: 0,
        };
        let better = match &best {
            None => true,
            Some(b) => match (b.validity_held, found.validity_held) {
                (true, false) => true,
                (false, true) => false,
                _ => found.final_gap > b.final_gap,
            },
        };
        if better {
            best = Some(found);
        }
    }
    let mut best = best.expect("the empty fault set is always tried");
    best.candidates = candidates;
    Ok(best)
}

/// Rounds sufficient to reach `U − μ <= epsilon` from an initial gap, using
/// epochs of at most `n − 1` rounds each contracting by `1 − α^{n−1}/2`:
/// `(n − 1)·⌈ln(ε / gap_0) / ln(1 − α^{n−1}/2)⌉`, at least 1.
pub fn convergence_round_bound(n: usize, alpha: f64, initial_gap: f64, epsilon: f64) -> u64 {
    if initial_gap <= epsilon {
        return 1;
    }
    let per_epoch = libm::log1p(-powi(alpha, n - 1) / 2.0);
    let epochs = libm::ceil(libm::log(epsilon / initial_gap) / per_epoch);
    ((n - 1) as f64 * epochs).max(1.0) as u64
}

fn powi(base: f64, exp: usize) -> f64 {
    (0..exp).fold(1.0, |acc, _| acc * base)
}
