//! Simulation config files.
//!
//! ```json
//! {
//!   "graph": {"n": 4, "edges": [[0,1], ...]},      // or a path to a graph file
//!   "f": 1,
//!   "fault_set": [3],
//!   "strategy": {"kind": "random_noise", "params": {"lo": -50, "hi": 150}},
//!   "inputs": [0, 10, 20, 30],                      // or "input_spec"
//!   "input_spec": {"random_uniform": [0, 100]},
//!   "epsilon": 1e-6,
//!   "max_rounds": 10000,
//!   "default_value": 0.0,
//!   "seed": 7
//! }
//! ```

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use iabc_core::{AdversaryStrategy, LabeledPartition, NodeId, NodeSet, SimConfig};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Deserialize;
use thiserror::Error;

use crate::format::{self, FormatError, GraphFile};

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("invalid config JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("graph: {0}")]
    Graph(#[from] FormatError),
    #[error("{path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("exactly one of `inputs` and `input_spec` must be given")]
    Inputs,
    #[error("random_uniform range [{0}, {1}] is invalid")]
    InputRange(f64, f64),
    #[error("fault set has {size} nodes but f = {f}")]
    TooManyFaults { size: usize, f: usize },
    #[error("split_value target: {0}")]
    Target(iabc_core::GraphError),
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum GraphSource {
    Inline(GraphFile),
    Path(PathBuf),
}

#[derive(Debug, Deserialize)]
#[serde(
    tag = "kind",
    content = "params",
    rename_all = "snake_case",
    deny_unknown_fields
)]
pub enum StrategySpec {
    Silent,
    FixedValue {
        value: f64,
    },
    LargeValue {
        #[serde(default)]
        y: Option<f64>,
    },
    SplitValue {
        x_minus: f64,
        x_plus: f64,
        /// Block name -> node ids; `L` and `R` are the attacked blocks.
        target: BTreeMap<String, Vec<usize>>,
    },
    RandomNoise {
        lo: f64,
        hi: f64,
        /// Defaults to the top-level `seed`.
        #[serde(default)]
        seed: Option<u64>,
    },
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct InputSpec {
    random_uniform: [f64; 2],
}

fn default_epsilon() -> f64 {
    1e-6
}

fn default_max_rounds() -> usize {
    10_000
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConfigFile {
    graph: GraphSource,
    #[serde(default)]
    f: Option<usize>,
    #[serde(default)]
    fault_set: Vec<usize>,
    #[serde(default)]
    strategy: Option<StrategySpec>,
    #[serde(default)]
    inputs: Option<Vec<f64>>,
    #[serde(default)]
    input_spec: Option<InputSpec>,
    #[serde(default = "default_epsilon")]
    epsilon: f64,
    #[serde(default = "default_max_rounds")]
    max_rounds: usize,
    #[serde(default)]
    default_value: f64,
    #[serde(default)]
    seed: u64,
    #[serde(default)]
    deep_trace: bool,
}

/// A parsed config: the engine input plus the declared fault bound.
#[derive(Debug, Clone)]
pub struct LoadedConfig {
    pub sim: SimConfig,
    pub f: Option<usize>,
    pub seed: u64,
}

pub fn load_config(path: &Path) -> Result<LoadedConfig, ConfigError> {
    let text = fs::read_to_string(path).map_err(|source| ConfigError::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse_config(&text, path.parent().unwrap_or(Path::new(".")))
}

/// Parse a config; relative graph paths resolve against `base_dir`.
pub fn parse_config(text: &str, base_dir: &Path) -> Result<LoadedConfig, ConfigError> {
    let file: ConfigFile = serde_json::from_str(text)?;
    let graph = match file.graph {
        GraphSource::Inline(g) => g.to_graph().map_err(FormatError::from)?,
        GraphSource::Path(p) => format::read_graph(&base_dir.join(p))?,
    };
    let n = graph.n();

    let inputs = match (file.inputs, file.input_spec) {
        (Some(v), None) => v,
        (
            None,
            Some(InputSpec {
                random_uniform: [lo, hi],
            }),
        ) => {
            if !(lo.is_finite() && hi.is_finite() && lo <= hi) {
                return Err(ConfigError::InputRange(lo, hi));
            }
            let mut rng = ChaCha8Rng::seed_from_u64(file.seed);
            (0..n)
                .map(|_| if lo == hi { lo } else { rng.gen_range(lo..=hi) })
                .collect()
        }
        _ => return Err(ConfigError::Inputs),
    };

    let fault_set: NodeSet = file.fault_set.iter().copied().map(NodeId).collect();
    if let Some(f) = file.f {
        if fault_set.len() > f {
            return Err(ConfigError::TooManyFaults {
                size: fault_set.len(),
                f,
            });
        }
    }

    let strategy = match file.strategy.unwrap_or(StrategySpec::Silent) {
        StrategySpec::Silent => AdversaryStrategy::Silent,
        StrategySpec::FixedValue { value } => AdversaryStrategy::FixedValue(value),
        StrategySpec::LargeValue { y } => AdversaryStrategy::LargeValue { y },
        StrategySpec::SplitValue {
            x_minus,
            x_plus,
            target,
        } => AdversaryStrategy::SplitValue {
            x_minus,
            x_plus,
            target: target_partition(n, &target, &fault_set)?,
        },
        StrategySpec::RandomNoise { lo, hi, seed } => AdversaryStrategy::RandomNoise {
            lo,
            hi,
            seed: seed.unwrap_or(file.seed),
        },
    };

    Ok(LoadedConfig {
        sim: SimConfig {
            graph,
            fault_set,
            strategy,
            inputs,
            epsilon: file.epsilon,
            max_rounds: file.max_rounds,
            default_value: file.default_value,
            deep_trace: file.deep_trace,
            stop_on_convergence: true,
        },
        f: file.f,
        seed: file.seed,
    })
}

/// Named blocks from the file; any node not listed joins `F` if faulty, else `C`.
fn target_partition(
    n: usize,
    blocks: &BTreeMap<String, Vec<usize>>,
    fault_set: &NodeSet,
) -> Result<LabeledPartition, ConfigError> {
    let mut named: BTreeMap<String, NodeSet> = blocks
        .iter()
        .map(|(k, ids)| (k.clone(), ids.iter().copied().map(NodeId).collect()))
        .collect();
    let listed = named.values().fold(NodeSet::new(), |acc, s| acc.union(s));
    for v in (0..n).map(NodeId).filter(|v| !listed.contains(*v)) {
        let block = if fault_set.contains(v) { "F" } else { "C" };
        named.entry(block.to_string()).or_default().insert(v);
    }
    LabeledPartition::new(n, named).map_err(ConfigError::Target)
}
