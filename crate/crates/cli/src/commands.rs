use std::io::Write;

use clap::Args;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use rbtomo::bounds::{
    bound_nonclifford_fidelity, decompose_circuit, BoundConfig, CircuitGate, DecomposeOptions, LinearCombination, NonCliffordBound, T_MAX,
};
use rbtomo::channel::{average_fidelity, make_channel, pl_from_unitary, PauliLiouvilleMap};
use rbtomo::clifford::{
    greedy_spanning_set, map_rank, pl_rank, sample_uniform_clifford, single_qubit_cliffords,
    spanning_set_single_qubit, unital_span_dimension,
};
use rbtomo::io::{write_bound_curves_csv, write_decay_csv, write_scan_csv};
use rbtomo::linalg::haar_unitary;
use rbtomo::rb::{
    estimate_p as run_estimate, simulate_f_k, EstimateOptions, FloorMethod, RbConfig, RbModel, RbSource,
    SamplingMode,
};
use rbtomo::tomography::{multiqubit_noncp_scan, reconstruct_from_rb, FidelityMethod, PipelineConfig};

use crate::failure::Failure;
use crate::GlobalArgs;

type Out<'a> = &'a mut dyn Write;

/// Reads the config as JSON, applies `--seed`, and deserializes it.
///
/// Returns the parsed value and whether a seed was supplied anywhere.
fn load<T: DeserializeOwned>(g: &GlobalArgs) -> Result<(T, bool), Failure> {
    let path = g
        .config
        .as_ref()
        .ok_or_else(|| Failure::validation("this command needs --config <path>"))?;
    let text = std::fs::read_to_string(path)?;
    let (value, seeded) = with_seed(serde_json::from_str(&text)?, g.seed)?;
    Ok((serde_json::from_value(value)?, seeded))
}

fn load_optional(g: &GlobalArgs) -> Result<Option<Value>, Failure> {
    match &g.config {
        Some(path) => Ok(Some(serde_json::from_str(&std::fs::read_to_string(path)?)?)),
        None => Ok(None),
    }
}

fn with_seed(mut value: Value, seed: Option<u64>) -> Result<(Value, bool), Failure> {
    let obj = value
        .as_object_mut()
        .ok_or_else(|| Failure::validation("config must be a JSON object"))?;
    if let Some(s) = seed {
        obj.insert("seed".into(), s.into());
    }
    let seeded = obj.contains_key("seed");
    Ok((value, seeded))
}

fn require_seed(sampled: bool, seeded: bool) -> Result<(), Failure> {
    if sampled && !seeded {
        return Err(Failure::validation(
            "sampled runs need a seed: set \"seed\" in the config or pass --seed",
        ));
    }
    Ok(())
}

fn write_json<T: Serialize>(out: Out, value: &T) -> Result<(), Failure> {
    let mut bytes = serde_json::to_vec_pretty(value)?;
    bytes.push(b'\n');
    out.write_all(&bytes)?;
    Ok(())
}

fn sequences() -> u64 {
    1000
}

fn default_mode() -> SamplingMode {
    SamplingMode::Sequences
}

fn collapsed() -> SamplingMode {
    SamplingMode::Collapsed
}

#[derive(Deserialize)]
struct DecayExperiment {
    #[serde(flatten)]
    rb: RbConfig,
    lengths: Vec<usize>,
    #[serde(default = "sequences")]
    n_sequences: u64,
    #[serde(default = "default_mode")]
    mode: SamplingMode,
}

pub fn simulate_decay(g: &GlobalArgs, out: Out) -> Result<(), Failure> {
    let (mut cfg, seeded): (DecayExperiment, bool) = load(g)?;
    if g.analytic {
        cfg.mode = SamplingMode::Analytic;
    }
    require_seed(cfg.mode != SamplingMode::Analytic, seeded)?;
    if cfg.lengths.is_empty() {
        return Err(Failure::validation("lengths must not be empty"));
    }
    let model = RbModel::from_config(&cfg.rb)?;
    let records = cfg
        .lengths
        .iter()
        .map(|&k| simulate_f_k(&model, k, cfg.n_sequences, cfg.mode))
        .collect::<Result<Vec<_>, _>>()?;
    write_decay_csv(out, &records)?;
    Ok(())
}

#[derive(Deserialize)]
struct EstimateExperiment {
    #[serde(flatten)]
    rb: RbConfig,
    epsilon: f64,
    delta: f64,
    #[serde(default = "collapsed")]
    mode: SamplingMode,
    #[serde(default)]
    max_samples: Option<u64>,
    #[serde(default)]
    floor: Option<FloorMethod>,
}

pub fn estimate_p(g: &GlobalArgs, out: Out) -> Result<(), Failure> {
    let (mut cfg, seeded): (EstimateExperiment, bool) = load(g)?;
    if g.analytic {
        cfg.mode = SamplingMode::Analytic;
    }
    require_seed(cfg.mode != SamplingMode::Analytic, seeded)?;
    let mut opts = EstimateOptions::new(cfg.epsilon, cfg.delta);
    if let Some(m) = cfg.max_samples {
        opts.max_samples = m;
    }
    if let Some(f) = cfg.floor {
        opts.floor = f;
    }
    let mut src = RbSource::from_config(&cfg.rb, cfg.mode)?;
    write_json(out, &run_estimate(&mut src, &opts)?)
}

pub fn reconstruct(g: &GlobalArgs, out: Out) -> Result<(), Failure> {
    let (mut cfg, seeded): (PipelineConfig, bool) = load(g)?;
    if g.analytic {
        cfg.method = FidelityMethod::Analytic;
    }
    require_seed(cfg.method != FidelityMethod::Analytic, seeded)?;
    write_json(out, &reconstruct_from_rb(&cfg)?)
}

#[derive(Args, Debug, Default)]
pub struct BoundCurvesArgs {
    /// χ₀₀ of the noise.
    #[arg(long)]
    chi_b: Option<f64>,
    /// Grid points over χ_AB ∈ [0, 1].
    #[arg(long)]
    points: Option<usize>,
    /// Hilbert-space dimension used by the prior-work bound.
    #[arg(long)]
    dim: Option<usize>,
}

fn curve_points() -> usize {
    201
}

fn two() -> usize {
    2
}

#[derive(Deserialize)]
struct CurvesConfig {
    chi_b: f64,
    #[serde(default = "curve_points")]
    points: usize,
    #[serde(default = "two")]
    dim: usize,
}

pub fn bound_curves(g: &GlobalArgs, a: &BoundCurvesArgs, out: Out) -> Result<(), Failure> {
    let mut cfg = match load_optional(g)? {
        Some(v) => serde_json::from_value(v)?,
        None => CurvesConfig {
            chi_b: a
                .chi_b
                .ok_or_else(|| Failure::validation("give --chi-b or a config with \"chi_b\""))?,
            points: curve_points(),
            dim: two(),
        },
    };
    cfg.chi_b = a.chi_b.unwrap_or(cfg.chi_b);
    cfg.points = a.points.unwrap_or(cfg.points);
    cfg.dim = a.dim.unwrap_or(cfg.dim);
    let rows = rbtomo::bounds::bound_curves(cfg.chi_b, cfg.points, cfg.dim)?;
    write_bound_curves_csv(out, &rows)?;
    Ok(())
}

fn one() -> usize {
    1
}

fn t_max() -> usize {
    T_MAX
}

/// A bare gate list, or a gate list with its qubit count and options.
#[derive(Deserialize)]
#[serde(untagged)]
enum CircuitFile {
    Full {
        #[serde(default = "one")]
        n: usize,
        gates: Vec<CircuitGate>,
        #[serde(default = "t_max")]
        t_max: usize,
        #[serde(default)]
        merge: bool,
    },
    Gates(Vec<CircuitGate>),
}

pub fn decompose(g: &GlobalArgs, out: Out) -> Result<(), Failure> {
    let path = g
        .config
        .as_ref()
        .ok_or_else(|| Failure::validation("decompose needs --config <circuit.json>"))?;
    let file: CircuitFile = serde_json::from_str(&std::fs::read_to_string(path)?)?;
    let (n, gates, opts) = match file {
        CircuitFile::Full { n, gates, t_max, merge } => (n, gates, DecomposeOptions { t_max, merge }),
        CircuitFile::Gates(gates) => (1, gates, DecomposeOptions::default()),
    };
    write_json(out, &decompose_circuit(n, &gates, &opts)?)
}

fn merge_default() -> bool {
    true
}

#[derive(Deserialize)]
struct BoundFidelityExperiment {
    #[serde(flatten)]
    rb: BoundConfig,
    circuit: Vec<CircuitGate>,
    epsilon: f64,
    delta: f64,
    #[serde(default = "collapsed")]
    mode: SamplingMode,
    #[serde(default = "t_max")]
    t_max: usize,
    #[serde(default = "merge_default")]
    merge: bool,
}

#[derive(Serialize)]
struct BoundFidelityReport {
    #[serde(flatten)]
    bound: NonCliffordBound,
    /// `F̄(E, U)` of the simulated map, for comparison.
    simulated_fidelity: f64,
    combination: LinearCombination,
}

pub fn bound_fidelity(g: &GlobalArgs, out: Out) -> Result<(), Failure> {
    let (mut cfg, seeded): (BoundFidelityExperiment, bool) = load(g)?;
    if g.analytic {
        cfg.mode = SamplingMode::Analytic;
    }
    require_seed(cfg.mode != SamplingMode::Analytic, seeded)?;
    let opts = DecomposeOptions {
        t_max: cfg.t_max,
        merge: cfg.merge,
    };
    let combo = decompose_circuit(cfg.rb.n, &cfg.circuit, &opts)?;
    let bound = bound_nonclifford_fidelity(&cfg.rb, &combo, cfg.epsilon, cfg.delta, cfg.mode)?;
    let u = PauliLiouvilleMap::new(cfg.rb.n, combo.pl_matrix()?)?;
    let simulated_fidelity = average_fidelity(&make_channel(&cfg.rb.e_map)?, &u)?;
    write_json(
        out,
        &BoundFidelityReport {
            bound,
            simulated_fidelity,
            combination: combo,
        },
    )
}

#[derive(Args, Debug, Default)]
pub struct ScanArgs {
    #[arg(long)]
    qubits: Option<usize>,
    #[arg(long)]
    trials: Option<u64>,
}

#[derive(Deserialize)]
struct ScanConfig {
    #[serde(default = "two")]
    n: usize,
    #[serde(default = "scan_trials")]
    trials: u64,
    seed: u64,
}

fn scan_trials() -> u64 {
    500
}

fn seeded_value(g: &GlobalArgs) -> Result<(Value, bool), Failure> {
    let value = load_optional(g)?.unwrap_or_else(|| Value::Object(Default::default()));
    with_seed(value, g.seed)
}

pub fn cp_scan(g: &GlobalArgs, a: &ScanArgs, out: Out) -> Result<(), Failure> {
    let (mut value, seeded) = seeded_value(g)?;
    require_seed(true, seeded)?;
    let obj = value.as_object_mut().expect("object checked on load");
    if let Some(n) = a.qubits {
        obj.insert("n".into(), n.into());
    }
    if let Some(t) = a.trials {
        obj.insert("trials".into(), t.into());
    }
    let cfg: ScanConfig = serde_json::from_value(value)?;
    let scan = multiqubit_noncp_scan(cfg.n, cfg.trials, cfg.seed)?;
    log::info!(
        "{} of {} unital parts are not CP (fraction {:.4})",
        scan.rows.iter().filter(|r| r.noncp).count(),
        scan.rows.len(),
        scan.fraction_noncp
    );
    write_scan_csv(out, &scan.rows)?;
    Ok(())
}

#[derive(Args, Debug, Default)]
pub struct SpanArgs {
    #[arg(long)]
    qubits: Option<usize>,
    /// Uniform Cliffords drawn for two qubits.
    #[arg(long)]
    draws: Option<usize>,
}

#[derive(Deserialize)]
struct SpanConfig {
    #[serde(default = "one")]
    n: usize,
    #[serde(default = "span_draws")]
    draws: usize,
    #[serde(default = "haar_count")]
    haar: usize,
    #[serde(default)]
    seed: u64,
}

fn span_draws() -> usize {
    600
}

fn haar_count() -> usize {
    50
}

#[derive(Serialize)]
struct SpanReport {
    n: usize,
    unital_dimension: usize,
    clifford_count: usize,
    clifford_rank: usize,
    spanning_set_size: usize,
    spanning_set_rank: usize,
    haar_count: usize,
    rank_with_haar: usize,
}

pub fn span_check(g: &GlobalArgs, a: &SpanArgs, out: Out) -> Result<(), Failure> {
    let (mut value, seeded) = seeded_value(g)?;
    let obj = value.as_object_mut().expect("object checked on load");
    if let Some(n) = a.qubits {
        obj.insert("n".into(), n.into());
    }
    if let Some(d) = a.draws {
        obj.insert("draws".into(), d.into());
    }
    let cfg: SpanConfig = serde_json::from_value(value)?;
    require_seed(cfg.n > 1 || cfg.haar > 0, seeded)?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let (cliffords, spanning) = match cfg.n {
        1 => (single_qubit_cliffords(), spanning_set_single_qubit()),
        2 => {
            let drawn: Vec<_> = (0..cfg.draws).map(|_| sample_uniform_clifford(2, &mut rng)).collect();
            (drawn, greedy_spanning_set(2, &mut rng, 100_000)?)
        }
        n => return Err(rbtomo::Error::TooManyQubits { n, max: 2 }.into()),
    };
    let d = 1usize << cfg.n;
    let mut maps: Vec<PauliLiouvilleMap> = cliffords.iter().map(|c| c.pl().cloned()).collect::<Result<_, _>>()?;
    for _ in 0..cfg.haar {
        maps.push(pl_from_unitary(&haar_unitary(d, &mut rng))?);
    }
    write_json(
        out,
        &SpanReport {
            n: cfg.n,
            unital_dimension: unital_span_dimension(cfg.n),
            clifford_count: cliffords.len(),
            clifford_rank: pl_rank(&cliffords),
            spanning_set_size: spanning.len(),
            spanning_set_rank: pl_rank(&spanning),
            haar_count: cfg.haar,
            rank_with_haar: map_rank(&maps),
        },
    )
}
