//! Machine-readable outputs: trace CSV, run summary JSON and checker reports.
//!
//! Every float is written with 17 significant digits so replays are bit-exact.

use std::fmt::Write as _;

use iabc_core::sim::Violation;
use iabc_core::{ConditionReport, LabeledPartition, NodeSet, SimResult};
use serde::Serialize;
use serde_json::value::RawValue;

/// `x` with 17 significant digits in scientific notation.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

/// A float serialized as a raw JSON number with 17 significant digits.
struct Exact(f64);

impl Serialize for Exact {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        if !self.0.is_finite() {
            return s.serialize_none();
        }
        RawValue::from_string(fmt_f64(self.0))
            .map_err(serde::ser::Error::custom)?
            .serialize(s)
    }
}

/// `t,node,state,U,mu`, one row per fault-free node per round.
pub fn trace_csv(result: &SimResult, fault_set: &NodeSet) -> String {
    let mut out = String::from("t,node,state,U,mu\n");
    for round in &result.trace {
        let (upper, lower) = (fmt_f64(round.upper), fmt_f64(round.lower));
        for (node, &state) in round.states.iter().enumerate() {
            if fault_set.contains(node.into()) {
                continue;
            }
            writeln!(
                out,
                "{},{},{},{},{}",
                round.t,
                node,
                fmt_f64(state),
                upper,
                lower
            )
            .expect("writing to a String");
        }
    }
    out
}

#[derive(Serialize)]
struct ContractionRow {
    s: usize,
    l: usize,
    bound: Exact,
    observed: Exact,
    bound_ok: bool,
}

#[derive(Serialize)]
struct ViolationRow {
    name: &'static str,
    detail: String,
}

#[derive(Serialize)]
struct Summary<'a> {
    n: usize,
    f: Option<usize>,
    rounds: usize,
    converged_at: Option<usize>,
    validity_held: bool,
    final_upper: Exact,
    final_lower: Exact,
    contraction_checks: Vec<ContractionRow>,
    violations: Vec<ViolationRow>,
    #[serde(skip_serializing_if = "Option::is_none")]
    appendix_violations: Option<&'a [ViolationRow]>,
}

fn violation_row(v: &Violation) -> ViolationRow {
    ViolationRow {
        name: v.name(),
        detail: format!("{v:?}"),
    }
}

/// Run summary. `appendix` carries the result of the supporting-inequality
/// check when it was run.
pub fn summary_json(
    result: &SimResult,
    n: usize,
    f: Option<usize>,
    appendix: Option<&[Violation]>,
) -> String {
    let appendix_rows: Option<Vec<ViolationRow>> =
        appendix.map(|vs| vs.iter().map(violation_row).collect());
    let last = result.final_round();
    let summary = Summary {
        n,
        f,
        rounds: last.t,
        converged_at: result.converged_at,
        validity_held: result.validity_held,
        final_upper: Exact(last.upper),
        final_lower: Exact(last.lower),
        contraction_checks: result
            .contraction_checks
            .iter()
            .map(|c| ContractionRow {
                s: c.s,
                l: c.l,
                bound: Exact(c.bound),
                observed: Exact(c.observed),
                bound_ok: c.bound_ok,
            })
            .collect(),
        violations: result
            .trace
            .iter()
            .flat_map(|r| &r.violations)
            .map(violation_row)
            .collect(),
        appendix_violations: appendix_rows.as_deref(),
    };
    let mut text = serde_json::to_string_pretty(&summary).expect("summary serializes");
    text.push('\n');
    text
}

/// Partition blocks as `{"C": [..], "F": [..], ..}`.
pub fn partition_json(p: &LabeledPartition) -> serde_json::Value {
    p.blocks()
        .map(|(name, set)| {
            (
                name.to_string(),
                serde_json::Value::from(set.iter().map(|v| v.0).collect::<Vec<_>>()),
            )
        })
        .collect::<serde_json::Map<_, _>>()
        .into()
}

pub fn report_json(report: &ConditionReport, n: usize, include_all: bool) -> String {
    let mut obj = serde_json::json!({
        "n": n,
        "f": report.f,
        "degree_ok": report.degree_ok,
        "partition_ok": report.partition_ok,
        "satisfied": report.satisfied(),
        "partitions_examined": report.partitions_examined,
        "witness": report.witness.as_ref().map(partition_json),
    });
    if include_all {
        obj["all_witnesses"] = report.all_witnesses.iter().map(partition_json).collect();
    }
    let mut text = serde_json::to_string_pretty(&obj).expect("report serializes");
    text.push('\n');
    text
}
