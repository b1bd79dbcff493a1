//! Python bindings for the tree-encoded index-modulation toolkit.
//!
//! The module exposes the tree enumeration, the feasible set, the Huffman
//! projection, the channel bounds/asymptotics, Monte Carlo mutual
//! information, the constrained solvers, and the BLER sweep as plain
//! functions over lists and dicts. Build the cdylib and load it as the
//! module `treeim` (see `python/smoke_test.py`).

use num_bigint::BigUint;
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::PyDict;
use std::str::FromStr;

use treeim_core::channel_model::{
    exp_decay_gains as core_exp_decay_gains, ChannelState, PowerMatrix, SapCatalog, SystemConfig,
};
use treeim_core::link_sim::{run_bler, BlerSpec, CodebookMode, ConstellationKind};
use treeim_core::mapping::{
    huffman as core_huffman, project_with_report, Codebook, DistanceMetric,
};
use treeim_core::rate_opt as ro;
use treeim_core::tree_core as tc;

fn err(e: treeim_core::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

/// Catalog, channel state, and power matrix from plain arguments. The SNR
/// convention is `sigma^2 = 1`, `P = N * 10^(snr_db/10)`; powers default to
/// per-pattern waterfilling unless `uniform_power` or an explicit matrix is
/// given.
fn build_system(
    n: usize,
    k: usize,
    gains: Vec<f64>,
    snr_db: f64,
    rho: Option<Vec<Vec<f64>>>,
    uniform_power: bool,
) -> PyResult<(SapCatalog, ChannelState, PowerMatrix)> {
    let config = SystemConfig::new(n, k).map_err(err)?;
    let catalog = SapCatalog::new(&config);
    let state = ChannelState::from_snr_db(gains, snr_db).map_err(err)?;
    let powers = match rho {
        Some(rows) => PowerMatrix::new(rows, &catalog, &state).map_err(err)?,
        None if uniform_power => PowerMatrix::uniform(&catalog, &state, k),
        None => ro::allocate_powers_per_sap(&catalog, &state).map_err(err)?,
    };
    Ok((catalog, state, powers))
}

fn mi_dict<'py>(py: Python<'py>, est: &ro::MiEstimate) -> PyResult<Bound<'py, PyDict>> {
    let d = PyDict::new(py);
    d.set_item("value", est.value)?;
    d.set_item("std_error", est.std_error)?;
    d.set_item("samples", est.samples)?;
    d.set_item("seed", est.seed)?;
    Ok(d)
}

/// Catalan number c_v, the count of ordered full binary trees.
#[pyfunction]
fn catalan(v: usize) -> BigUint {
    tc::catalan(v)
}

/// Loose reduced-set bound 2^(v-1).
#[pyfunction]
fn loose_bound(v: usize) -> PyResult<BigUint> {
    if v == 0 {
        return Err(PyValueError::new_err("v must be >= 1"));
    }
    Ok(tc::loose_bound(v))
}

/// Recurrence bounds B_1..B_v_max on the reduced-set sizes.
#[pyfunction]
fn tight_bounds(v_max: usize) -> PyResult<Vec<BigUint>> {
    if v_max == 0 {
        return Err(PyValueError::new_err("v_max must be >= 1"));
    }
    Ok(tc::tight_bound_recurrence(v_max))
}

/// The reduced set of v-node trees as (leaf-counts, parenthesis) pairs.
#[pyfunction]
fn reduced_set(v: usize) -> PyResult<Vec<(Vec<u32>, String)>> {
    let set = tc::construct_reduced_set(v).map_err(err)?;
    Ok(set
        .trees()
        .iter()
        .map(|p| (p.leaf_counts().to_vec(), p.canonical_tree().paren_string()))
        .collect())
}

/// Every feasible dyadic probability vector of length c, as float rows.
#[pyfunction]
fn feasible_set(c: usize) -> PyResult<Vec<Vec<f64>>> {
    let set = tc::build_feasible_set(c).map_err(err)?;
    Ok(set.iter().map(|p| p.values()).collect())
}

/// Number of feasible vectors built from v-node trees on c patterns.
#[pyfunction]
fn feasible_class_size(c: usize, v: usize) -> PyResult<BigUint> {
    tc::feasible_class_size(c, v).map_err(err)
}

/// Activation patterns in lexicographic order, 1-based subcarrier indices.
#[pyfunction]
fn sap_catalog(n: usize, k: usize) -> PyResult<Vec<Vec<usize>>> {
    let config = SystemConfig::new(n, k).map_err(err)?;
    let catalog = SapCatalog::new(&config);
    Ok(catalog
        .sets()
        .iter()
        .map(|s| s.iter().map(|l| l + 1).collect())
        .collect())
}

/// Huffman depths for positive probabilities summing to one.
#[pyfunction]
fn huffman(probs: Vec<f64>) -> PyResult<Vec<u32>> {
    Ok(core_huffman(&probs).map_err(err)?.depths().to_vec())
}

/// Projects a relaxed vector onto the feasible set; returns the winner and
/// the whole candidate sweep.
#[pyfunction]
#[pyo3(signature = (probs, metric = "euclidean"))]
fn project<'py>(py: Python<'py>, probs: Vec<f64>, metric: &str) -> PyResult<Bound<'py, PyDict>> {
    let metric = DistanceMetric::from_str(metric).map_err(err)?;
    let report = project_with_report(&probs, metric).map_err(err)?;
    let d = PyDict::new(py);
    d.set_item("winner", report.winner().vector.values())?;
    d.set_item("distance", report.winner().distance)?;
    let candidates: Vec<(usize, Vec<f64>, f64)> = report
        .candidates
        .iter()
        .map(|c| (c.k, c.vector.values(), c.distance))
        .collect();
    d.set_item("candidates", candidates)?;
    Ok(d)
}

/// Prefix-free codebook realizing a dyadic probability vector: entries are
/// (1-based pattern, codeword string), plus the dropped patterns.
#[pyfunction]
fn codebook<'py>(py: Python<'py>, probs: Vec<f64>) -> PyResult<Bound<'py, PyDict>> {
    let exps = probs
        .iter()
        .map(|&x| {
            if x == 0.0 {
                Ok(None)
            } else if x > 0.0 {
                let q = -x.log2();
                if (q - q.round()).abs() < 1e-12 {
                    Ok(Some(q.round() as u8))
                } else {
                    Err(PyValueError::new_err(format!("{x} is not dyadic")))
                }
            } else {
                Err(PyValueError::new_err("negative probability"))
            }
        })
        .collect::<PyResult<Vec<Option<u8>>>>()?;
    let vector = tc::DyadicProbabilityVector::from_exponents(exps).map_err(err)?;
    let cb = Codebook::for_dyadic(&vector);
    let d = PyDict::new(py);
    let entries: Vec<(usize, String)> = cb
        .entries()
        .iter()
        .map(|e| (e.sap + 1, e.code_string()))
        .collect();
    d.set_item("entries", entries)?;
    d.set_item(
        "dropped",
        cb.dropped().iter().map(|s| s + 1).collect::<Vec<_>>(),
    )?;
    Ok(d)
}

/// Gains g_l = eta^(l-1).
#[pyfunction]
fn exp_decay_gains(n: usize, eta: f64) -> PyResult<Vec<f64>> {
    core_exp_decay_gains(n, eta).map_err(err)
}

/// Waterfilling power allocation over a gain set.
#[pyfunction]
fn waterfill(gains: Vec<f64>, sigma2: f64, budget: f64) -> PyResult<Vec<f64>> {
    ro::waterfill(&gains, sigma2, budget).map_err(err)
}

/// Per-pattern waterfilled power matrix (C x N rows).
#[pyfunction]
fn per_sap_powers(n: usize, k: usize, gains: Vec<f64>, snr_db: f64) -> PyResult<Vec<Vec<f64>>> {
    let (_, _, powers) = build_system(n, k, gains, snr_db, None, false)?;
    Ok(powers.rows().to_vec())
}

/// High-SNR-optimal pattern probabilities.
#[pyfunction]
#[pyo3(signature = (n, k, gains, snr_db, rho = None, uniform_power = false))]
fn high_snr_probs(
    n: usize,
    k: usize,
    gains: Vec<f64>,
    snr_db: f64,
    rho: Option<Vec<Vec<f64>>>,
    uniform_power: bool,
) -> PyResult<Vec<f64>> {
    let (catalog, state, powers) = build_system(n, k, gains, snr_db, rho, uniform_power)?;
    Ok(ro::high_snr_probs(&catalog, &powers, &state))
}

/// Low-SNR-optimal probabilities: (one-hot vector, 1-based best pattern).
#[pyfunction]
#[pyo3(signature = (n, k, gains, snr_db, rho = None, uniform_power = false))]
fn low_snr_probs(
    n: usize,
    k: usize,
    gains: Vec<f64>,
    snr_db: f64,
    rho: Option<Vec<Vec<f64>>>,
    uniform_power: bool,
) -> PyResult<(Vec<f64>, usize)> {
    let (catalog, state, powers) = build_system(n, k, gains, snr_db, rho, uniform_power)?;
    let (r, i_star) = ro::low_snr_probs(&catalog, &powers, &state);
    Ok((r, i_star + 1))
}

/// Probabilities maximizing the Jensen lower bound; raises on a singular
/// matrix (fall back to high_snr_probs then).
#[pyfunction]
#[pyo3(signature = (n, k, gains, snr_db, rho = None, uniform_power = false))]
fn jensen_optimal_probs(
    n: usize,
    k: usize,
    gains: Vec<f64>,
    snr_db: f64,
    rho: Option<Vec<Vec<f64>>>,
    uniform_power: bool,
) -> PyResult<Vec<f64>> {
    let (catalog, state, powers) = build_system(n, k, gains, snr_db, rho, uniform_power)?;
    ro::jensen_optimal_probs(&catalog, &powers, &state).map_err(err)
}

/// Jensen lower bound on the mutual information at probabilities p.
#[pyfunction]
#[pyo3(signature = (n, k, gains, snr_db, probs, rho = None, uniform_power = false))]
fn jensen_lower_bound(
    n: usize,
    k: usize,
    gains: Vec<f64>,
    snr_db: f64,
    probs: Vec<f64>,
    rho: Option<Vec<Vec<f64>>>,
    uniform_power: bool,
) -> PyResult<f64> {
    let (catalog, state, powers) = build_system(n, k, gains, snr_db, rho, uniform_power)?;
    Ok(ro::jensen_lower_bound(&probs, &catalog, &powers, &state))
}

/// Closed-form upper bound mu on the maximal mutual information.
#[pyfunction]
#[pyo3(signature = (n, k, gains, snr_db, rho = None, uniform_power = false))]
fn upper_bound_mu(
    n: usize,
    k: usize,
    gains: Vec<f64>,
    snr_db: f64,
    rho: Option<Vec<Vec<f64>>>,
    uniform_power: bool,
) -> PyResult<f64> {
    let (catalog, state, powers) = build_system(n, k, gains, snr_db, rho, uniform_power)?;
    Ok(ro::upper_bound_mu(&catalog, &powers, &state))
}

/// Monte Carlo mutual information; deterministic in (seed, partitions).
#[pyfunction]
#[pyo3(signature = (n, k, gains, snr_db, probs, samples, seed, partitions = 1, rho = None, uniform_power = false))]
#[allow(clippy::too_many_arguments)]
fn mi_monte_carlo<'py>(
    py: Python<'py>,
    n: usize,
    k: usize,
    gains: Vec<f64>,
    snr_db: f64,
    probs: Vec<f64>,
    samples: usize,
    seed: u64,
    partitions: usize,
    rho: Option<Vec<Vec<f64>>>,
    uniform_power: bool,
) -> PyResult<Bound<'py, PyDict>> {
    let (catalog, state, powers) = build_system(n, k, gains, snr_db, rho, uniform_power)?;
    let est = ro::mi_monte_carlo(&probs, &catalog, &powers, &state, samples, seed, partitions)
        .map_err(err)?;
    mi_dict(py, &est)
}

fn solution_dict<'py>(
    py: Python<'py>,
    sol: &ro::ConstrainedSolution,
) -> PyResult<Bound<'py, PyDict>> {
    let d = PyDict::new(py);
    d.set_item("probs", sol.probs.values())?;
    d.set_item("powers", sol.powers.rows().to_vec())?;
    d.set_item("mi", mi_dict(py, &sol.mi)?)?;
    d.set_item("objective", sol.objective)?;
    Ok(d)
}

/// Projection-based constrained solver.
#[pyfunction]
#[pyo3(signature = (n, k, gains, snr_db, seed, metric = "euclidean", relaxation = "high_snr", samples = 100_000, partitions = 1, uniform_power = false))]
#[allow(clippy::too_many_arguments)]
fn solve_projected<'py>(
    py: Python<'py>,
    n: usize,
    k: usize,
    gains: Vec<f64>,
    snr_db: f64,
    seed: u64,
    metric: &str,
    relaxation: &str,
    samples: usize,
    partitions: usize,
    uniform_power: bool,
) -> PyResult<Bound<'py, PyDict>> {
    let config = SystemConfig::new(n, k).map_err(err)?;
    let catalog = SapCatalog::new(&config);
    let state = ChannelState::from_snr_db(gains, snr_db).map_err(err)?;
    let metric = DistanceMetric::from_str(metric).map_err(err)?;
    let source = match relaxation {
        "high_snr" => ro::RelaxationSource::HighSnr,
        "jensen_opt" => ro::RelaxationSource::JensenOpt,
        other => {
            return Err(PyValueError::new_err(format!(
                "unknown relaxation {other:?}"
            )))
        }
    };
    let opts = ro::SolverOptions {
        mi_samples: samples,
        uniform_power,
        seed,
        partitions,
        ..Default::default()
    };
    let projected =
        ro::solve_constrained_projected(&catalog, &state, metric, source, &opts).map_err(err)?;
    let d = solution_dict(py, &projected.solution)?;
    d.set_item("relaxed", projected.relaxed)?;
    d.set_item("used_fallback", projected.used_fallback)?;
    Ok(d)
}

/// Exhaustive constrained solver over the feasible set.
#[pyfunction]
#[pyo3(signature = (n, k, gains, snr_db, seed, objective = "auto", samples = 100_000, objective_samples = 20_000, partitions = 1, uniform_power = false))]
#[allow(clippy::too_many_arguments)]
fn solve_enumerative<'py>(
    py: Python<'py>,
    n: usize,
    k: usize,
    gains: Vec<f64>,
    snr_db: f64,
    seed: u64,
    objective: &str,
    samples: usize,
    objective_samples: usize,
    partitions: usize,
    uniform_power: bool,
) -> PyResult<Bound<'py, PyDict>> {
    let config = SystemConfig::new(n, k).map_err(err)?;
    let catalog = SapCatalog::new(&config);
    let state = ChannelState::from_snr_db(gains, snr_db).map_err(err)?;
    let mode = match objective {
        "auto" => ro::ObjectiveMode::Auto,
        "high_snr" => ro::ObjectiveMode::HighSnr,
        "low_snr" => ro::ObjectiveMode::LowSnr,
        "mc" => ro::ObjectiveMode::Mc,
        other => {
            return Err(PyValueError::new_err(format!(
                "unknown objective {other:?}"
            )))
        }
    };
    let opts = ro::SolverOptions {
        mode,
        objective_samples,
        mi_samples: samples,
        uniform_power,
        seed,
        partitions,
    };
    let sol = ro::solve_constrained_enumerative(&catalog, &state, None, &opts).map_err(err)?;
    solution_dict(py, &sol)
}

/// BLER sweep under ML detection; one dict per SNR point.
#[pyfunction]
#[pyo3(signature = (n, k, gains, snr_db_grid, seed, mode = "condition_one", constellation = "bpsk", target_errors = 1_000, block_cap = 10_000_000, objective_samples = 20_000, partitions = 1))]
#[allow(clippy::too_many_arguments)]
fn bler_curve<'py>(
    py: Python<'py>,
    n: usize,
    k: usize,
    gains: Vec<f64>,
    snr_db_grid: Vec<f64>,
    seed: u64,
    mode: &str,
    constellation: &str,
    target_errors: u64,
    block_cap: u64,
    objective_samples: usize,
    partitions: usize,
) -> PyResult<Vec<Bound<'py, PyDict>>> {
    let config = SystemConfig::new(n, k).map_err(err)?;
    let catalog = SapCatalog::new(&config);
    let spec = BlerSpec {
        snr_db_grid,
        mode: CodebookMode::from_str(mode).map_err(err)?,
        constellation: ConstellationKind::from_str(constellation).map_err(err)?,
        target_errors,
        block_cap,
        objective_samples,
        seed,
        partitions,
    };
    let points = run_bler(&gains, &catalog, &spec).map_err(err)?;
    points
        .iter()
        .map(|p| {
            let d = PyDict::new(py);
            let (lo, hi) = p.wilson_ci();
            d.set_item("snr_db", p.snr_db)?;
            d.set_item("blocks", p.blocks)?;
            d.set_item("block_errors", p.block_errors)?;
            d.set_item("bler", p.bler)?;
            d.set_item("ci_low", lo)?;
            d.set_item("ci_high", hi)?;
            d.set_item("seed", p.seed)?;
            d.set_item("partial", p.partial)?;
            Ok(d)
        })
        .collect()
}

#[pymodule]
fn treeim_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    m.add_function(wrap_pyfunction!(catalan, m)?)?;
    m.add_function(wrap_pyfunction!(loose_bound, m)?)?;
    m.add_function(wrap_pyfunction!(tight_bounds, m)?)?;
    m.add_function(wrap_pyfunction!(reduced_set, m)?)?;
    m.add_function(wrap_pyfunction!(feasible_set, m)?)?;
    m.add_function(wrap_pyfunction!(feasible_class_size, m)?)?;
    m.add_function(wrap_pyfunction!(sap_catalog, m)?)?;
    m.add_function(wrap_pyfunction!(huffman, m)?)?;
    m.add_function(wrap_pyfunction!(project, m)?)?;
    m.add_function(wrap_pyfunction!(codebook, m)?)?;
    m.add_function(wrap_pyfunction!(exp_decay_gains, m)?)?;
    m.add_function(wrap_pyfunction!(waterfill, m)?)?;
    m.add_function(wrap_pyfunction!(per_sap_powers, m)?)?;
    m.add_function(wrap_pyfunction!(high_snr_probs, m)?)?;
    m.add_function(wrap_pyfunction!(low_snr_probs, m)?)?;
    m.add_function(wrap_pyfunction!(jensen_optimal_probs, m)?)?;
    m.add_function(wrap_pyfunction!(jensen_lower_bound, m)?)?;
    m.add_function(wrap_pyfunction!(upper_bound_mu, m)?)?;
    m.add_function(wrap_pyfunction!(mi_monte_carlo, m)?)?;
    m.add_function(wrap_pyfunction!(solve_projected, m)?)?;
    m.add_function(wrap_pyfunction!(solve_enumerative, m)?)?;
    m.add_function(wrap_pyfunction!(bler_curve, m)?)?;
    Ok(())
}
