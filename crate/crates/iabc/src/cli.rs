//! `iabc` command-line interface.
//!
//! Exit codes: 0 success or condition satisfied, 1 condition refuted (or a
//! run that failed validity/convergence), 2 usage or input error.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use iabc_core::checker::{
    check_sufficient_with, claim_two_sets_counterexample, lemma_propagation_counterexample,
    CheckOptions, DEFAULT_MAX_N,
};
use iabc_core::generate::{complete, erdos_renyi, ring};
use iabc_core::{check_appendix_lemmas, run as simulate_run, DiGraph};

use crate::config::load_config;
use crate::format::{graph_to_edge_list, graph_to_json, read_graph};
use crate::output::{partition_json, report_json, summary_json, trace_csv};
use crate::sweep::{sweep, sweep_csv, SweepSpec};

#[derive(Debug, Parser)]
#[command(
    name = "iabc",
    version,
    about = "Iterative approximate Byzantine consensus on directed graphs"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a graph.
    Generate(GenerateArgs),
    /// Check the fault-tolerance condition for a graph and fault bound.
    Check(CheckArgs),
    /// Run the Middle algorithm from a config file.
    Simulate(SimulateArgs),
    /// Condition satisfaction rate on random G(n, p) digraphs.
    Sweep(SweepArgs),
    /// Check the two-set claim, the propagation lemma and, with a config,
    /// the per-round trace inequalities.
    Verify(VerifyArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum GraphKind {
    Complete,
    Ring,
    ErdosRenyi,
    FromFile,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum GraphFormat {
    Json,
    Edges,
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    #[arg(long, value_enum)]
    pub kind: GraphKind,
    /// Node count (ignored for from-file).
    #[arg(long)]
    pub n: Option<usize>,
    /// Edge probability for erdos-renyi.
    #[arg(long)]
    pub p: Option<f64>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Input graph for from-file.
    #[arg(long)]
    pub input: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = GraphFormat::Json)]
    pub format: GraphFormat,
    /// Write here instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct CheckArgs {
    #[arg(long)]
    pub graph: PathBuf,
    #[arg(long)]
    pub f: usize,
    /// Report every violating partition, not just the first.
    #[arg(long)]
    pub all_witnesses: bool,
    /// Largest n the enumerator accepts.
    #[arg(long, default_value_t = DEFAULT_MAX_N)]
    pub max_n: usize,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[arg(long)]
    pub config: PathBuf,
    /// Per-round CSV trace.
    #[arg(long)]
    pub trace: Option<PathBuf>,
    /// JSON summary; stdout when omitted.
    #[arg(long)]
    pub summary: Option<PathBuf>,
    /// Record per-node trim sets and check the per-round inequalities.
    #[arg(long)]
    pub deep: bool,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[arg(long)]
    pub n: usize,
    #[arg(long)]
    pub f: usize,
    /// Comma-separated edge probabilities.
    #[arg(long, value_delimiter = ',', required = true)]
    pub p: Vec<f64>,
    #[arg(long, default_value_t = 100)]
    pub trials: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = DEFAULT_MAX_N)]
    pub max_n: usize,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[arg(long)]
    pub graph: PathBuf,
    #[arg(long)]
    pub f: usize,
    /// Also simulate this config with a deep trace and check it.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long, default_value_t = DEFAULT_MAX_N)]
    pub max_n: usize,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Success,
    Refuted,
}

impl Outcome {
    fn from_ok(ok: bool) -> Self {
        if ok {
            Outcome::Success
        } else {
            Outcome::Refuted
        }
    }
}

pub fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli) {
        Ok(Outcome::Success) => ExitCode::SUCCESS,
        Ok(Outcome::Refuted) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

pub fn execute(cli: Cli) -> Result<Outcome> {
    match cli.command {
        Command::Generate(a) => generate(a),
        Command::Check(a) => check(a),
        Command::Simulate(a) => simulate(a),
        Command::Sweep(a) => run_sweep(a),
        Command::Verify(a) => verify(a),
    }
}

fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(path) => fs::write(path, text).with_context(|| format!("writing {}", path.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn load_graph(path: &Path) -> Result<DiGraph> {
    read_graph(path).with_context(|| format!("reading graph {}", path.display()))
}

fn generate(a: GenerateArgs) -> Result<Outcome> {
    let need_n = || a.n.context("--n is required for this kind");
    let g = match a.kind {
        GraphKind::Complete => complete(need_n()?)?,
        GraphKind::Ring => ring(need_n()?)?,
        GraphKind::ErdosRenyi => {
            let p = a.p.context("--p is required for erdos-renyi")?;
            erdos_renyi(need_n()?, p, a.seed)?
        }
        GraphKind::FromFile => load_graph(
            a.input
                .as_deref()
                .context("--input is required for from-file")?,
        )?,
    };
    let text = match a.format {
        GraphFormat::Json => graph_to_json(&g) + "\n",
        GraphFormat::Edges => graph_to_edge_list(&g),
    };
    emit(a.out.as_deref(), &text)?;
    Ok(Outcome::Success)
}

fn check(a: CheckArgs) -> Result<Outcome> {
    let g = load_graph(&a.graph)?;
    let opts = CheckOptions {
        max_n: a.max_n,
        all_witnesses: a.all_witnesses,
    };
    let report = check_sufficient_with(&g, a.f, &opts)?;
    emit(
        a.out.as_deref(),
        &report_json(&report, g.n(), a.all_witnesses),
    )?;
    Ok(Outcome::from_ok(report.satisfied()))
}

fn simulate(a: SimulateArgs) -> Result<Outcome> {
    let loaded = load_config(&a.config)?;
    let mut sim = loaded.sim;
    sim.deep_trace |= a.deep;
    let result = simulate_run(&sim)?;
    let appendix = if sim.deep_trace {
        Some(check_appendix_lemmas(&result, &sim.graph, &sim.fault_set)?)
    } else {
        None
    };
    if let Some(path) = &a.trace {
        emit(Some(path), &trace_csv(&result, &sim.fault_set))?;
    }
    let summary = summary_json(&result, sim.graph.n(), loaded.f, appendix.as_deref());
    emit(a.summary.as_deref(), &summary)?;
    let ok = result.validity_held
        && result.converged_at.is_some()
        && appendix.is_none_or(|v| v.is_empty());
    Ok(Outcome::from_ok(ok))
}

fn run_sweep(a: SweepArgs) -> Result<Outcome> {
    let rows = sweep(&SweepSpec {
        n: a.n,
        f: a.f,
        p_grid: a.p,
        trials: a.trials,
        seed: a.seed,
        max_n: a.max_n,
    })?;
    emit(a.out.as_deref(), &sweep_csv(&rows))?;
    Ok(Outcome::Success)
}

fn verify(a: VerifyArgs) -> Result<Outcome> {
    let g = load_graph(&a.graph)?;
    let claim = claim_two_sets_counterexample(&g, a.f, a.max_n)?;
    let lemma = lemma_propagation_counterexample(&g, a.f, a.max_n)?;
    let mut ok = claim.is_none() && lemma.is_none();
    let mut obj = serde_json::json!({
        "n": g.n(),
        "f": a.f,
        "claim_two_sets": claim.is_none(),
        "claim_counterexample": claim.as_ref().map(partition_json),
        "lemma_propagation": lemma.is_none(),
        "lemma_counterexample": lemma.as_ref().map(partition_json),
    });
    if let Some(path) = &a.config {
        let mut sim = load_config(path)?.sim;
        if sim.graph != g {
            bail!(
                "{} uses a different graph than {}",
                path.display(),
                a.graph.display()
            );
        }
        sim.deep_trace = true;
        let result = simulate_run(&sim)?;
        let violations = check_appendix_lemmas(&result, &sim.graph, &sim.fault_set)?;
        ok &= violations.is_empty();
        obj["appendix_violations"] = violations
            .iter()
            .map(|v| serde_json::json!({"name": v.name(), "detail": format!("{v:?}")}))
            .collect();
    }
    let mut text = serde_json::to_string_pretty(&obj)?;
    text.push('\n');
    emit(a.out.as_deref(), &text)?;
    Ok(Outcome::from_ok(ok))
}
