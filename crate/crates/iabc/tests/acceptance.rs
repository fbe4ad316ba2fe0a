//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.

use std::collections::BTreeSet;
use std::process::ExitCode;
use std::time::Instant;

use iabc::output::{summary_json, trace_csv};
use iabc_core::checker::{
    check_partition_condition, check_sufficient, verify_claim_two_sets, verify_lemma_propagation,
};
use iabc_core::generate::{complete, erdos_renyi, ring};
use iabc_core::sim::convergence_round_bound;
use iabc_core::{
    alpha, check_appendix_lemmas, check_validity, run, AdversaryStrategy, DiGraph,
    LabeledPartition, NodeId, NodeSet, SimConfig, SimResult,
};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const RANDOM_CONFIGS: usize = 250;
const REFUTED_GRAPHS: usize = 24;
const FREEZE_ROUNDS: usize = 100;
const N5_SAMPLE: usize = 500;

struct Line {
    id: usize,
    name: &'static str,
    ok: bool,
    detail: String,
}

fn main() -> ExitCode {
    let mut lines = Vec::new();

    let t = Instant::now();
    let pool = certified_pool();
    let configs = random_configs(&pool);
    let runs = run_population(&configs);
    let population_secs = t.elapsed().as_secs_f64();
    lines.extend(population_criteria(&runs, population_secs));

    let t = Instant::now();
    let (ok, detail) = impossibility_reproduction();
    lines.push(line(4, "impossibility reproduction", ok, detail, t));

    let t = Instant::now();
    let (ok, detail) = degree_attack();
    lines.push(line(5, "degree-condition attack", ok, detail, t));

    let t = Instant::now();
    let corpus = oracle_corpus();
    let (ok, detail) = oracle_equivalence(&corpus);
    lines.push(line(6, "oracle equivalence", ok, detail, t));

    let t = Instant::now();
    let (ok, detail) = theorems_on_corpus(&corpus);
    lines.push(line(7, "claim and propagation lemma", ok, detail, t));

    let t = Instant::now();
    let (ok, detail) = determinism(&configs);
    lines.push(line(9, "determinism", ok, detail, t));
    lines.sort_by_key(|l| l.id);

    let mut all_ok = true;
    for l in &lines {
        all_ok &= l.ok;
        println!(
            "criterion {} ({}): {} - {}",
            l.id,
            l.name,
            if l.ok { "PASS" } else { "FAIL" },
            l.detail
        );
    }
    if all_ok {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}

fn line(id: usize, name: &'static str, ok: bool, detail: String, started: Instant) -> Line {
    Line {
        id,
        name,
        ok,
        detail: format!("{detail} [{:.2}s]", started.elapsed().as_secs_f64()),
    }
}

fn set(ids: impl IntoIterator<Item = usize>) -> NodeSet {
    ids.into_iter().map(NodeId).collect()
}

// ---------------------------------------------------------------------------
// Criteria 1, 2, 3, 8: randomized runs on certified graphs.

struct Certified {
    graph: DiGraph,
    f: usize,
}

/// Graphs with `n <= 10` passing the sufficient condition for their `f`,
/// mixing rings, complete graphs and random digraphs.
fn certified_pool() -> Vec<Certified> {
    let mut pool = Vec::new();
    let rings = (2..=10).map(|n| (ring(n).unwrap(), 0));
    let cliques = [(4, 1), (5, 1), (7, 2), (10, 3)].map(|(n, f)| (complete(n).unwrap(), f));
    for (graph, f) in rings.chain(cliques) {
        assert!(check_sufficient(&graph, f).unwrap().satisfied());
        pool.push(Certified { graph, f });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(0xacce);
    let mut seed = 0u64;
    let mut per_f = [0usize; 3];
    let targets = [20, 25, 10];
    while per_f.iter().zip(&targets).any(|(have, want)| have < want) {
        seed += 1;
        let f = rng.gen_range(0..3usize);
        if per_f[f] >= targets[f] {
            continue;
        }
        let n = rng.gen_range((3 * f + 1).max(3)..=10);
        let p = match f {
            0 => rng.gen_range(0.15..0.6),
            1 => rng.gen_range(0.55..0.95),
            _ => rng.gen_range(0.85..1.0),
        };
        let g = erdos_renyi(n, p, seed).unwrap();
        if check_sufficient(&g, f).unwrap().satisfied() {
            per_f[f] += 1;
            pool.push(Certified { graph: g, f });
        }
    }
    pool
}

fn random_configs(pool: &[Certified]) -> Vec<(SimConfig, usize)> {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    (0..RANDOM_CONFIGS)
        .map(|k| {
            let c = &pool[rng.gen_range(0..pool.len())];
            let n = c.graph.n();
            let mut nodes: Vec<usize> = (0..n).collect();
            nodes.shuffle(&mut rng);
            let faults = set(nodes[..rng.gen_range(0..=c.f)].iter().copied());
            let inputs: Vec<f64> = (0..n).map(|_| rng.gen_range(0.0..=100.0)).collect();
            let strategy = match k % 5 {
                0 => AdversaryStrategy::Silent,
                1 => AdversaryStrategy::FixedValue(rng.gen_range(-1e3..1e3)),
                2 => AdversaryStrategy::LargeValue { y: None },
                3 => {
                    let mut blocks = [NodeSet::new(), NodeSet::new(), NodeSet::new()];
                    for v in (0..n).map(NodeId).filter(|v| !faults.contains(*v)) {
                        blocks[rng.gen_range(0..3)].insert(v);
                    }
                    let [l, c, r] = blocks;
                    AdversaryStrategy::SplitValue {
                        x_minus: -1.0 - rng.gen_range(0.0..100.0),
                        x_plus: 101.0 + rng.gen_range(0.0..100.0),
                        target: LabeledPartition::new(
                            n,
                            [("F", faults.clone()), ("L", l), ("C", c), ("R", r)],
                        )
                        .unwrap(),
                    }
                }
                _ => AdversaryStrategy::RandomNoise {
                    lo: -500.0,
                    hi: 600.0,
                    seed: rng.gen(),
                },
            };
            let mut cfg = SimConfig::new(c.graph.clone(), inputs);
            cfg.fault_set = faults;
            cfg.strategy = strategy;
            cfg.default_value = rng.gen_range(-1e3..1e3);
            cfg.epsilon = 1e-6;
            cfg.deep_trace = true;
            (cfg, c.f)
        })
        .collect()
}

struct RunOutcome {
    strategy: &'static str,
    result: SimResult,
    round_bound: u64,
    appendix_violations: usize,
}

fn run_population(configs: &[(SimConfig, usize)]) -> Vec<RunOutcome> {
    configs
        .iter()
        .map(|(cfg, _)| {
            let g = &cfg.graph;
            let gap0 = run_gap0(cfg);
            let round_bound = convergence_round_bound(g.n(), alpha(g), gap0, cfg.epsilon);
            let mut cfg = cfg.clone();
            cfg.max_rounds = round_bound as usize;
            let result = run(&cfg).expect("valid config");
            let appendix_violations = check_appendix_lemmas(&result, g, &cfg.fault_set)
                .expect("deep trace")
                .len();
            RunOutcome {
                strategy: cfg.strategy.name(),
                result,
                round_bound,
                appendix_violations,
            }
        })
        .collect()
}

fn run_gap0(cfg: &SimConfig) -> f64 {
    let honest: Vec<f64> = cfg.fault_free().map(|v| cfg.inputs[v.0]).collect();
    let hi = honest.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let lo = honest.iter().copied().fold(f64::INFINITY, f64::min);
    hi - lo
}

fn population_criteria(runs: &[RunOutcome], secs: f64) -> Vec<Line> {
    let n = runs.len();
    let validity_fail = runs.iter().filter(|r| !check_validity(&r.result)).count();
    let slow = runs
        .iter()
        .filter(|r| {
            r.result
                .converged_at
                .is_none_or(|t| t as u64 > r.round_bound)
        })
        .count();
    let worst_ratio = runs
        .iter()
        .filter_map(|r| {
            r.result
                .converged_at
                .map(|t| t as f64 / r.round_bound as f64)
        })
        .fold(0.0, f64::max);
    let epochs: usize = runs.iter().map(|r| r.result.contraction_checks.len()).sum();
    let bad_epochs = runs
        .iter()
        .flat_map(|r| &r.result.contraction_checks)
        .filter(|c| !c.bound_ok)
        .count();
    let missing_propagation = runs
        .iter()
        .flat_map(|r| &r.result.trace)
        .flat_map(|t| &t.violations)
        .filter(|v| v.name() == "no_propagation")
        .count();
    let appendix: usize = runs.iter().map(|r| r.appendix_violations).sum();
    let rounds: usize = runs.iter().map(|r| r.result.trace.len() - 1).sum();
    let strategies: BTreeSet<&str> = runs.iter().map(|r| r.strategy).collect();
    vec![
        Line {
            id: 1,
            name: "validity",
            ok: n >= 200 && strategies.len() == 5 && validity_fail == 0 && secs < 60.0,
            detail: format!(
                "{n} runs over {} strategies, {validity_fail} validity failures, tol 1e-12 [{secs:.2}s for the population]",
                strategies.len()
            ),
        },
        Line {
            id: 2,
            name: "convergence within round bound",
            ok: slow == 0 && secs < 120.0,
            detail: format!(
                "{n} runs, {slow} missed the bound, eps 1e-6, max converged_at/bound = {worst_ratio:.2e}"
            ),
        },
        Line {
            id: 3,
            name: "contraction bound",
            ok: bad_epochs == 0 && missing_propagation == 0 && epochs > 0,
            detail: format!(
                "{epochs} epochs, {bad_epochs} over the bound, {missing_propagation} without propagation, tol 1e-9 relative"
            ),
        },
        Line {
            id: 8,
            name: "appendix invariants",
            ok: appendix == 0,
            detail: format!("{rounds} deep-trace rounds, {appendix} violations, tol 1e-9"),
        },
    ]
}

// ---------------------------------------------------------------------------
// Criterion 4: SplitValue on checker witnesses freezes L and R.

fn refuted_graphs() -> Vec<(DiGraph, usize, LabeledPartition)> {
    let mut out = Vec::new();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut seed = 1000u64;
    while out.len() < REFUTED_GRAPHS {
        seed += 1;
        let f = if out.len() % 3 == 0 { 0 } else { 1 };
        let n = rng.gen_range(if f == 0 { 3 } else { 5 }..=9);
        let p = if f == 0 {
            rng.gen_range(0.1..0.4)
        } else {
            rng.gen_range(0.4..0.8)
        };
        let g = erdos_renyi(n, p, seed).unwrap();
        let report = check_partition_condition(&g, f).unwrap();
        // The attack needs the faulty values trimmed, i.e. the degree condition.
        if report.degree_ok && !report.partition_ok {
            out.push((g, f, report.witness.unwrap()));
        }
    }
    out
}

fn impossibility_reproduction() -> (bool, String) {
    let graphs = refuted_graphs();
    let (x, big_x) = (0.0_f64, 100.0_f64);
    let mut failures = Vec::new();
    for (idx, (g, f, w)) in graphs.iter().enumerate() {
        let (fb, l, c, r) = (w.block("F"), w.block("L"), w.block("C"), w.block("R"));
        let inputs: Vec<f64> = (0..g.n())
            .map(|i| {
                let v = NodeId(i);
                if l.contains(v) {
                    x
                } else if r.contains(v) {
                    big_x
                } else if c.contains(v) {
                    (x + big_x) / 2.0
                } else {
                    -7.0
                }
            })
            .collect();
        let mut cfg = SimConfig::new(g.clone(), inputs);
        cfg.fault_set = fb.clone();
        cfg.strategy = AdversaryStrategy::SplitValue {
            x_minus: x - 1.0,
            x_plus: big_x + 1.0,
            target: w.clone(),
        };
        cfg.max_rounds = FREEZE_ROUNDS;
        let res = run(&cfg).unwrap();
        let frozen = res.trace.iter().all(|t| {
            l.iter().all(|v| t.states[v.0].to_bits() == x.to_bits())
                && r.iter().all(|v| t.states[v.0].to_bits() == big_x.to_bits())
        });
        if !(frozen && res.converged_at.is_none() && res.trace.len() == FREEZE_ROUNDS + 1) {
            failures.push(format!("graph {idx} (n={}, f={f})", g.n()));
        }
    }
    let with_faults = graphs
        .iter()
        .filter(|(_, _, w)| !w.block("F").is_empty())
        .count();
    (
        graphs.len() >= 20 && failures.is_empty(),
        format!(
            "{} refuted graphs ({with_faults} with faulty witnesses), {FREEZE_ROUNDS} rounds, {} not frozen{}",
            graphs.len(),
            failures.len(),
            if failures.is_empty() { String::new() } else { format!(": {}", failures.join(", ")) }
        ),
    )
}

// ---------------------------------------------------------------------------
// Criterion 5: LargeValue on K_3.

fn degree_attack() -> (bool, String) {
    let mut cfg = SimConfig::new(complete(3).unwrap(), vec![0.0, 10.0, 5.0]);
    cfg.fault_set = set([2]);
    cfg.strategy = AdversaryStrategy::LargeValue { y: None };
    cfg.max_rounds = 1;
    let res = run(&cfg).unwrap();
    let (u0, u1) = (res.trace[0].upper, res.trace[1].upper);
    let degree_ok = check_sufficient(&cfg.graph, 1).unwrap().degree_ok;
    (
        u1 > u0 && !check_validity(&res) && !degree_ok,
        format!(
            "U[0] = {u0}, U[1] = {u1}, check_validity = {}",
            check_validity(&res)
        ),
    )
}

// ---------------------------------------------------------------------------
// Criteria 6, 7: independent brute-force enumerator.

/// Adjacency as `adj[from][to]`.
type Adj = Vec<Vec<bool>>;

fn adjacency(g: &DiGraph) -> Adj {
    let mut adj = vec![vec![false; g.n()]; g.n()];
    for (a, b) in g.edges() {
        adj[a.0][b.0] = true;
    }
    adj
}

fn graph_from_bits(n: usize, bits: u32) -> DiGraph {
    let pairs: Vec<(usize, usize)> = (0..n)
        .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
        .collect();
    DiGraph::from_edges(
        n,
        pairs
            .iter()
            .enumerate()
            .filter(|(k, _)| bits >> k & 1 == 1)
            .map(|(_, &e)| e),
    )
    .unwrap()
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for p in permutations(n - 1) {
        for pos in 0..=p.len() {
            let mut q = p.clone();
            q.insert(pos, n - 1);
            out.push(q);
        }
    }
    out
}

/// Smallest relabelled edge list; equal for isomorphic graphs.
fn canonical(adj: &Adj, perms: &[Vec<usize>]) -> Vec<(usize, usize)> {
    let n = adj.len();
    perms
        .iter()
        .map(|p| {
            let mut e: Vec<(usize, usize)> = (0..n)
                .flat_map(|i| (0..n).map(move |j| (i, j)))
                .filter(|&(i, j)| adj[i][j])
                .map(|(i, j)| (p[i], p[j]))
                .collect();
            e.sort_unstable();
            e
        })
        .min()
        .unwrap()
}

/// One representative per isomorphism class of digraphs on `n` nodes.
fn non_isomorphic(n: usize) -> Vec<DiGraph> {
    let perms = permutations(n);
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    for bits in 0..1u32 << (n * (n - 1)) {
        let g = graph_from_bits(n, bits);
        if seen.insert(canonical(&adjacency(&g), &perms)) {
            out.push(g);
        }
    }
    out
}

/// Some node of `b` has more than a third of its in-neighbours in `a`.
fn brute_implies(adj: &Adj, a: &[bool], b: &[bool]) -> bool {
    let n = adj.len();
    (0..n).filter(|&v| b[v]).any(|v| {
        let deg = (0..n).filter(|&u| adj[u][v]).count();
        let from_a = (0..n).filter(|&u| adj[u][v] && a[u]).count();
        3 * from_a > deg
    })
}

/// `(partition_ok, first violating labels)`; labels `F=0, L=1, C=2, R=3`,
/// node 0 the most significant digit.
fn brute_condition(g: &DiGraph, f: usize) -> (bool, Option<Vec<u8>>) {
    let adj = adjacency(g);
    let n = g.n();
    for code in 0..4u64.pow(n as u32) {
        let labels: Vec<u8> = (0..n)
            .map(|i| (code / 4u64.pow((n - 1 - i) as u32) % 4) as u8)
            .collect();
        let is = |x: u8| labels.iter().map(|&l| l == x).collect::<Vec<bool>>();
        let (fb, l, c, r) = (is(0), is(1), is(2), is(3));
        if fb.iter().filter(|&&b| b).count() > f || !l.contains(&true) || !r.contains(&true) {
            continue;
        }
        let or =
            |x: &[bool], y: &[bool]| x.iter().zip(y).map(|(a, b)| *a || *b).collect::<Vec<_>>();
        if !brute_implies(&adj, &or(&c, &r), &l) && !brute_implies(&adj, &or(&l, &c), &r) {
            return (false, Some(labels));
        }
    }
    (true, None)
}

fn witness_labels(w: &LabeledPartition) -> Vec<u8> {
    (0..w.n())
        .map(|i| match w.block_of(NodeId(i)) {
            Some("F") => 0,
            Some("L") => 1,
            Some("C") => 2,
            Some("R") => 3,
            other => panic!("unexpected block {other:?}"),
        })
        .collect()
}

struct Corpus {
    graphs: Vec<DiGraph>,
    class_counts: Vec<usize>,
}

fn oracle_corpus() -> Corpus {
    let mut graphs = Vec::new();
    let mut class_counts = Vec::new();
    for n in 2..=4 {
        let reps = non_isomorphic(n);
        class_counts.push(reps.len());
        graphs.extend(reps);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..N5_SAMPLE {
        let p = rng.gen_range(0.0..=1.0);
        graphs.push(erdos_renyi(5, p, rng.gen()).unwrap());
    }
    Corpus {
        graphs,
        class_counts,
    }
}

fn oracle_equivalence(corpus: &Corpus) -> (bool, String) {
    let mut disagreements = 0;
    let mut compared = 0;
    let mut refuted = 0;
    for g in &corpus.graphs {
        for f in [0, 1] {
            let report = check_partition_condition(g, f).unwrap();
            let (ok, witness) = brute_condition(g, f);
            compared += 1;
            refuted += usize::from(!ok);
            if report.partition_ok != ok || report.witness.as_ref().map(witness_labels) != witness {
                disagreements += 1;
            }
        }
    }
    let classes_ok = corpus.class_counts == [3, 16, 218];
    (
        classes_ok && disagreements == 0,
        format!(
            "isomorphism classes n=2,3,4: {:?}, +{N5_SAMPLE} random n=5; {compared} (graph, f) pairs, {refuted} refuted, {disagreements} disagreements (verdict and first witness)",
            corpus.class_counts
        ),
    )
}

fn theorems_on_corpus(corpus: &Corpus) -> (bool, String) {
    let mut certified = 0;
    let mut failures = 0;
    for g in &corpus.graphs {
        for f in [0, 1] {
            if !check_sufficient(g, f).unwrap().satisfied() {
                continue;
            }
            certified += 1;
            if !verify_claim_two_sets(g, f).unwrap() || !verify_lemma_propagation(g, f).unwrap() {
                failures += 1;
            }
        }
    }
    (
        certified > 0 && failures == 0,
        format!("{certified} certified (graph, f) pairs, {failures} failures"),
    )
}

// ---------------------------------------------------------------------------
// Criterion 9: byte-identical outputs on repeated runs.

fn render(cfg: &SimConfig, f: usize) -> (String, String) {
    let res = run(cfg).unwrap();
    let appendix = check_appendix_lemmas(&res, &cfg.graph, &cfg.fault_set).unwrap();
    (
        trace_csv(&res, &cfg.fault_set),
        summary_json(&res, cfg.graph.n(), Some(f), Some(&appendix)),
    )
}

fn determinism(configs: &[(SimConfig, usize)]) -> (bool, String) {
    let sample: Vec<&(SimConfig, usize)> = configs.iter().step_by(5).collect();
    let mismatches = sample
        .iter()
        .filter(|(cfg, f)| render(cfg, *f) != render(cfg, *f))
        .count();
    let regenerated = certified_pool().len() == certified_pool().len()
        && random_configs(&certified_pool()) == random_configs(&certified_pool());
    (
        mismatches == 0 && regenerated,
        format!(
            "{} configs rendered twice, {mismatches} byte mismatches; config generation replayed identically: {regenerated}",
            sample.len()
        ),
    )
}
