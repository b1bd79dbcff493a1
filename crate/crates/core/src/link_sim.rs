//! Block-error-rate simulation of the full encode / transmit / ML-detect
//! chain with finite constellations.
//!
//! A block is one group of `N` subcarriers: a pattern is drawn from the
//! optimized dyadic distribution (equivalently, read off a uniform bit
//! stream through the codebook), `K` constellation symbols are placed on
//! its active subcarriers with uniform power, and the receiver runs
//! exhaustive maximum-likelihood detection over every admissible
//! (pattern, symbol-tuple) hypothesis. A block error is any mismatch in
//! that pair.

use num_complex::Complex64;
use rand::Rng;

use crate::channel_model::{ChannelState, PowerMatrix, SapCatalog};
use crate::error::{Error, Result};
use crate::math::wilson_interval;
use crate::rate_opt::{enumerative_search, ObjectiveMode, SolverOptions};
use crate::rng::{complex_normal, derive_seed, partition_ranges, sample_categorical, stream_rng};
use crate::tree_core::DyadicProbabilityVector;

use std::f64::consts::FRAC_1_SQRT_2;
use std::str::FromStr;

const TAG_PHASES: u64 = 0x0F45;
const TAG_POINT: u64 = 0xB1E4;
const TAG_PROBS: u64 = 0x0B0B;

// ---------------------------------------------------------------------------
// Constellations
// ---------------------------------------------------------------------------

/// Supported unit-energy constellations.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum ConstellationKind {
    Bpsk,
    Qpsk,
}

impl ConstellationKind {
    pub fn tag(self) -> &'static str {
        match self {
            ConstellationKind::Bpsk => "bpsk",
            ConstellationKind::Qpsk => "qpsk",
        }
    }
}

impl FromStr for ConstellationKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "bpsk" => Ok(ConstellationKind::Bpsk),
            "qpsk" => Ok(ConstellationKind::Qpsk),
            other => Err(Error::InvalidArgument(format!(
                "unknown constellation {other:?} (expected bpsk or qpsk)"
            ))),
        }
    }
}

/// Gray-labeled constellation points with unit average energy.
#[derive(Clone, Debug)]
pub struct Constellation {
    kind: ConstellationKind,
    points: Vec<Complex64>,
    bits_per_symbol: usize,
}

impl Constellation {
    pub fn new(kind: ConstellationKind) -> Self {
        let (points, bits) = match kind {
            ConstellationKind::Bpsk => {
                (vec![Complex64::new(1.0, 0.0), Complex64::new(-1.0, 0.0)], 1)
            }
            // Gray order 00, 01, 11, 10 around the circle
            ConstellationKind::Qpsk => (
                vec![
                    Complex64::new(FRAC_1_SQRT_2, FRAC_1_SQRT_2),
                    Complex64::new(-FRAC_1_SQRT_2, FRAC_1_SQRT_2),
                    Complex64::new(FRAC_1_SQRT_2, -FRAC_1_SQRT_2),
                    Complex64::new(-FRAC_1_SQRT_2, -FRAC_1_SQRT_2),
                ],
                2,
            ),
        };
        Self {
            kind,
            points,
            bits_per_symbol: bits,
        }
    }

    pub fn kind(&self) -> ConstellationKind {
        self.kind
    }

    pub fn points(&self) -> &[Complex64] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn bits_per_symbol(&self) -> usize {
        self.bits_per_symbol
    }
}

// ---------------------------------------------------------------------------
// Transmission and detection
// ---------------------------------------------------------------------------

/// Noiseless received vector for pattern `sap` carrying `symbols` on its
/// active subcarriers in ascending order: `sqrt(g_l) e^{j theta_l}
/// sqrt(rho_l,sap) s_k` there, zero elsewhere.
pub fn transmit_block_noiseless(
    sap: usize,
    symbols: &[Complex64],
    catalog: &SapCatalog,
    rho: &PowerMatrix,
    state: &ChannelState,
) -> Result<Vec<Complex64>> {
    let set = catalog.set(sap);
    if symbols.len() != set.len() {
        return Err(Error::InvalidArgument(format!(
            "pattern {sap} activates {} subcarriers but {} symbols were given",
            set.len(),
            symbols.len()
        )));
    }
    let mut y = vec![Complex64::ZERO; catalog.n()];
    for (slot, &l) in set.iter().enumerate() {
        let h = state.gains()[l].sqrt() * Complex64::new(0.0, state.phases()[l]).exp();
        y[l] = h * rho.rho(sap, l).sqrt() * symbols[slot];
    }
    Ok(y)
}

/// [`transmit_block_noiseless`] plus white Gaussian noise on every
/// subcarrier.
pub fn transmit_block<R: Rng + ?Sized>(
    sap: usize,
    symbols: &[Complex64],
    catalog: &SapCatalog,
    rho: &PowerMatrix,
    state: &ChannelState,
    rng: &mut R,
) -> Result<Vec<Complex64>> {
    let mut y = transmit_block_noiseless(sap, symbols, catalog, rho, state)?;
    for yl in y.iter_mut() {
        *yl += complex_normal(rng, state.noise_var());
    }
    Ok(y)
}

/// Every admissible (pattern, symbol-tuple) hypothesis with its noiseless
/// received vector, in a fixed order: patterns ascending, symbol tuples in
/// base-M counting order (last active subcarrier fastest).
#[derive(Clone, Debug)]
pub struct CandidateSet {
    /// Flattened noiseless received vectors, `len * n`.
    rx: Vec<Complex64>,
    saps: Vec<usize>,
    tuples_per_sap: usize,
    k: usize,
    m: usize,
    n: usize,
}

impl CandidateSet {
    /// Enumerates `active_saps x constellation^K`. `active_saps` must be
    /// nonempty and sorted ascending.
    pub fn new(
        active_saps: &[usize],
        constellation: &Constellation,
        catalog: &SapCatalog,
        rho: &PowerMatrix,
        state: &ChannelState,
    ) -> Result<Self> {
        if active_saps.is_empty() {
            return Err(Error::InvalidArgument("no active patterns".into()));
        }
        let k = catalog.set(active_saps[0]).len();
        let m = constellation.len();
        let tuples = m.pow(k as u32);
        let n = catalog.n();
        let mut rx = Vec::with_capacity(active_saps.len() * tuples * n);
        let mut symbols = vec![Complex64::ZERO; k];
        for &sap in active_saps {
            for t in 0..tuples {
                let mut rem = t;
                for slot in (0..k).rev() {
                    symbols[slot] = constellation.points()[rem % m];
                    rem /= m;
                }
                let y = transmit_block_noiseless(sap, &symbols, catalog, rho, state)?;
                rx.extend(y);
            }
        }
        Ok(Self {
            rx,
            saps: active_saps.to_vec(),
            tuples_per_sap: tuples,
            k,
            m,
            n,
        })
    }

    pub fn len(&self) -> usize {
        self.saps.len() * self.tuples_per_sap
    }

    pub fn is_empty(&self) -> bool {
        self.saps.is_empty()
    }

    fn rx_of(&self, cand: usize) -> &[Complex64] {
        &self.rx[cand * self.n..(cand + 1) * self.n]
    }

    /// Candidate index from a pattern slot and symbol tuple index.
    pub fn index_of(&self, sap_slot: usize, tuple: usize) -> usize {
        sap_slot * self.tuples_per_sap + tuple
    }

    /// The (pattern, symbol indices) behind a candidate index.
    pub fn hypothesis(&self, cand: usize) -> (usize, Vec<usize>) {
        let sap = self.saps[cand / self.tuples_per_sap];
        let mut rem = cand % self.tuples_per_sap;
        let mut symbols = vec![0usize; self.k];
        for slot in (0..self.k).rev() {
            symbols[slot] = rem % self.m;
            rem /= self.m;
        }
        (sap, symbols)
    }

    /// Index of the hypothesis minimizing `||y - G x||^2`; ties resolve to
    /// the earliest candidate in enumeration order.
    pub fn detect_index(&self, y: &[Complex64]) -> usize {
        let mut best = 0;
        let mut best_metric = f64::INFINITY;
        for cand in 0..self.len() {
            let rx = self.rx_of(cand);
            let mut metric = 0.0;
            for (yl, rl) in y.iter().zip(rx) {
                metric += (yl - rl).norm_sqr();
            }
            if metric < best_metric {
                best_metric = metric;
                best = cand;
            }
        }
        best
    }
}

/// Exhaustive ML detection: the (pattern, symbol indices) pair closest to
/// `y` in Euclidean distance over the candidate set.
pub fn ml_detect(y: &[Complex64], candidates: &CandidateSet) -> (usize, Vec<usize>) {
    candidates.hypothesis(candidates.detect_index(y))
}

// ---------------------------------------------------------------------------
// BLER sweeps
// ---------------------------------------------------------------------------

/// Which bit-to-pattern design the error study uses.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum CodebookMode {
    /// Rate-optimized over the full feasible set (trees with up to `C`
    /// leaves).
    ConditionOne,
    /// Rate-optimized over trees with exactly `C` leaves.
    ConditionTwo,
    /// Classic OFDM-IM: the `2^floor(log2 C)` lexicographically first
    /// patterns, equal probability.
    Benchmark,
}

impl CodebookMode {
    pub fn tag(self) -> &'static str {
        match self {
            CodebookMode::ConditionOne => "condition_one",
            CodebookMode::ConditionTwo => "condition_two",
            CodebookMode::Benchmark => "benchmark",
        }
    }
}

impl FromStr for CodebookMode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "condition_one" => Ok(CodebookMode::ConditionOne),
            "condition_two" => Ok(CodebookMode::ConditionTwo),
            "benchmark" => Ok(CodebookMode::Benchmark),
            other => Err(Error::InvalidArgument(format!(
                "unknown codebook mode {other:?}"
            ))),
        }
    }
}

/// One point of a BLER sweep.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BlerPoint {
    pub snr_db: f64,
    pub blocks: u64,
    pub block_errors: u64,
    pub bler: f64,
    pub seed: u64,
    /// True when the block cap was hit before the target error count.
    pub partial: bool,
}

impl BlerPoint {
    /// Wilson 95% confidence interval on the block-error probability.
    pub fn wilson_ci(&self) -> (f64, f64) {
        wilson_interval(self.block_errors, self.blocks)
    }
}

/// Sweep description for [`run_bler`].
#[derive(Clone, Debug)]
pub struct BlerSpec {
    pub snr_db_grid: Vec<f64>,
    pub mode: CodebookMode,
    pub constellation: ConstellationKind,
    /// Stop a point after this many block-error events.
    pub target_errors: u64,
    /// Hard per-point limit; hitting it flags the point as partial.
    pub block_cap: u64,
    /// Bank size for the rate objective that selects the pattern
    /// distribution at each SNR.
    pub objective_samples: usize,
    pub seed: u64,
    pub partitions: usize,
}

impl Default for BlerSpec {
    fn default() -> Self {
        Self {
            snr_db_grid: vec![0.0, 5.0, 10.0, 15.0, 20.0],
            mode: CodebookMode::ConditionOne,
            constellation: ConstellationKind::Bpsk,
            target_errors: 1_000,
            block_cap: 10_000_000,
            objective_samples: 20_000,
            seed: 0,
            partitions: 1,
        }
    }
}

const BATCH_BLOCKS: u64 = 4_096;

/// The pattern distribution a codebook mode uses at one channel state
/// (uniform powers, as the error study fixes them).
pub fn select_sap_distribution(
    mode: CodebookMode,
    catalog: &SapCatalog,
    state: &ChannelState,
    objective_samples: usize,
    seed: u64,
    partitions: usize,
) -> Result<DyadicProbabilityVector> {
    let c = catalog.len();
    match mode {
        CodebookMode::Benchmark => {
            let used = 1usize << c.ilog2();
            let q = c.ilog2() as u8;
            let exps = (0..c).map(|i| (i < used).then_some(q)).collect();
            DyadicProbabilityVector::from_exponents(exps)
        }
        CodebookMode::ConditionOne | CodebookMode::ConditionTwo => {
            let v_range = match mode {
                CodebookMode::ConditionTwo => Some(c - 1..=c - 1),
                _ => None,
            };
            let opts = SolverOptions {
                mode: ObjectiveMode::Mc,
                objective_samples,
                uniform_power: true,
                seed,
                partitions,
                ..Default::default()
            };
            let (probs, _, _) = enumerative_search(catalog, state, v_range, &opts)?;
            Ok(probs)
        }
    }
}

/// Runs the BLER sweep: at each SNR the pattern distribution is
/// re-optimized for the mode, blocks are simulated in deterministic batch
/// streams until `target_errors` errors (or the cap), and the channel
/// phases are drawn once per sweep (slow fading). Deterministic for fixed
/// `(seed, partitions)`.
pub fn run_bler(gains: &[f64], catalog: &SapCatalog, spec: &BlerSpec) -> Result<Vec<BlerPoint>> {
    if spec.snr_db_grid.is_empty() {
        return Err(Error::InvalidArgument("empty SNR grid".into()));
    }
    let constellation = Constellation::new(spec.constellation);
    let k = catalog.set(0).len();
    let mut phase_rng = stream_rng(derive_seed(spec.seed, TAG_PHASES), 0);
    let phases: Vec<f64> = (0..catalog.n())
        .map(|_| phase_rng.random::<f64>() * 2.0 * std::f64::consts::PI)
        .collect();

    let mut out = Vec::with_capacity(spec.snr_db_grid.len());
    for (snr_idx, &snr_db) in spec.snr_db_grid.iter().enumerate() {
        let state =
            ChannelState::from_snr_db(gains.to_vec(), snr_db)?.with_phases(phases.clone())?;
        let probs = select_sap_distribution(
            spec.mode,
            catalog,
            &state,
            spec.objective_samples,
            derive_seed(spec.seed, TAG_PROBS + snr_idx as u64),
            spec.partitions,
        )?;
        let rho = PowerMatrix::uniform(catalog, &state, k);
        let point = simulate_point(
            &probs,
            &constellation,
            catalog,
            &rho,
            &state,
            spec.target_errors,
            spec.block_cap,
            derive_seed(spec.seed, TAG_POINT + snr_idx as u64),
            spec.partitions,
        )?;
        out.push(BlerPoint { snr_db, ..point });
    }
    Ok(out)
}

#[allow(clippy::too_many_arguments)]
fn simulate_point(
    probs: &DyadicProbabilityVector,
    constellation: &Constellation,
    catalog: &SapCatalog,
    rho: &PowerMatrix,
    state: &ChannelState,
    target_errors: u64,
    block_cap: u64,
    seed: u64,
    partitions: usize,
) -> Result<BlerPoint> {
    use rayon::prelude::*;

    let support: Vec<usize> = (0..probs.len())
        .filter(|&i| probs.exponent(i).is_some())
        .collect();
    let candidates = CandidateSet::new(&support, constellation, catalog, rho, state)?;
    let values = probs.values();
    let mut cum = Vec::with_capacity(support.len());
    let mut acc = 0.0;
    for &i in &support {
        acc += values[i];
        cum.push(acc);
    }

    let mut blocks = 0u64;
    let mut errors = 0u64;
    let mut next_stream = 0u64;
    while errors < target_errors && blocks < block_cap {
        let wave = (BATCH_BLOCKS * partitions as u64).min(block_cap - blocks);
        let batches = partition_ranges(wave as usize, partitions);
        let wave_results: Vec<(u64, u64)> = batches
            .into_par_iter()
            .enumerate()
            .map(|(w, (_, len))| {
                let mut rng = stream_rng(seed, next_stream + w as u64);
                let mut errs = 0u64;
                let mut y = vec![Complex64::ZERO; catalog.n()];
                for _ in 0..len {
                    let slot = sample_categorical(&mut rng, &cum);
                    let mut tuple = 0usize;
                    for _ in 0..candidates.k {
                        tuple = tuple * candidates.m + rng.random_range(0..candidates.m);
                    }
                    let tx = candidates.index_of(slot, tuple);
                    let rx = candidates.rx_of(tx);
                    for (yl, rl) in y.iter_mut().zip(rx) {
                        *yl = rl + complex_normal(&mut rng, state.noise_var());
                    }
                    if candidates.detect_index(&y) != tx {
                        errs += 1;
                    }
                }
                (errs, len as u64)
            })
            .collect();
        for (e, b) in wave_results {
            errors += e;
            blocks += b;
        }
        next_stream += partitions as u64;
    }

    Ok(BlerPoint {
        snr_db: state.snr_db(),
        blocks,
        block_errors: errors,
        bler: errors as f64 / blocks as f64,
        seed,
        partial: errors < target_errors,
    })
}

/// A single simulated block, for instrumented tests: transmitted and
/// detected (pattern, symbol indices).
#[derive(Clone, Debug)]
pub struct BlockRecord {
    pub sap_tx: usize,
    pub symbols_tx: Vec<usize>,
    pub sap_rx: usize,
    pub symbols_rx: Vec<usize>,
}

impl BlockRecord {
    pub fn is_error(&self) -> bool {
        self.sap_tx != self.sap_rx || self.symbols_tx != self.symbols_rx
    }
}

/// Simulates one block against an explicit candidate set; the transmit
/// pattern is drawn from `cum` over the candidate set's pattern slots.
pub fn simulate_block<R: Rng + ?Sized>(
    candidates: &CandidateSet,
    cum: &[f64],
    state: &ChannelState,
    rng: &mut R,
) -> BlockRecord {
    let slot = sample_categorical(rng, cum);
    let mut tuple = 0usize;
    for _ in 0..candidates.k {
        tuple = tuple * candidates.m + rng.random_range(0..candidates.m);
    }
    let tx = candidates.index_of(slot, tuple);
    let y: Vec<Complex64> = candidates
        .rx_of(tx)
        .iter()
        .map(|rl| rl + complex_normal(rng, state.noise_var()))
        .collect();
    let detected = candidates.detect_index(&y);
    let (sap_tx, symbols_tx) = candidates.hypothesis(tx);
    let (sap_rx, symbols_rx) = candidates.hypothesis(detected);
    BlockRecord {
        sap_tx,
        symbols_tx,
        sap_rx,
        symbols_rx,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel_model::{exp_decay_gains, SystemConfig};
    use crate::mapping::Codebook;

    fn system(n: usize, k: usize, eta: f64, snr_db: f64) -> (SapCatalog, ChannelState) {
        let config = SystemConfig::new(n, k).unwrap();
        let catalog = SapCatalog::new(&config);
        let state = ChannelState::from_snr_db(exp_decay_gains(n, eta).unwrap(), snr_db).unwrap();
        (catalog, state)
    }

    #[test]
    fn constellations_have_unit_energy_and_gray_labels() {
        for kind in [ConstellationKind::Bpsk, ConstellationKind::Qpsk] {
            let c = Constellation::new(kind);
            assert_eq!(c.len(), 1 << c.bits_per_symbol());
            let avg: f64 = c.points().iter().map(|p| p.norm_sqr()).sum::<f64>() / c.len() as f64;
            assert!((avg - 1.0).abs() < 1e-12);
            // Gray labeling: nearest neighbors differ in exactly one bit
            for (i, a) in c.points().iter().enumerate() {
                let mut best = (f64::INFINITY, 0usize);
                for (j, b) in c.points().iter().enumerate() {
                    if i != j {
                        let d = (a - b).norm_sqr();
                        if d < best.0 - 1e-12 {
                            best = (d, j);
                        }
                    }
                }
                if c.len() > 2 {
                    assert_eq!((i ^ best.1).count_ones(), 1, "{i} vs {}", best.1);
                }
            }
        }
    }

    #[test]
    fn noiseless_transmit_recovers_scaled_symbols() {
        let (catalog, _) = system(4, 2, 1.0, 0.0);
        let state = ChannelState::new(vec![1.0; 4], vec![0.0; 4], 1.0, 2.0).unwrap();
        let rho = PowerMatrix::uniform(&catalog, &state, 2);
        let syms = [Complex64::new(1.0, 0.0), Complex64::new(-1.0, 0.0)];
        let y = transmit_block_noiseless(0, &syms, &catalog, &rho, &state).unwrap();
        assert!((y[0] - syms[0]).norm() < 1e-12); // sqrt(g * rho) = 1
        assert!((y[1] - syms[1]).norm() < 1e-12);
        assert_eq!(y[2], Complex64::ZERO);
        assert_eq!(y[3], Complex64::ZERO);
        assert!(transmit_block_noiseless(0, &syms[..1], &catalog, &rho, &state).is_err());
    }

    #[test]
    fn received_power_matches_moments() {
        let (catalog, state) = system(4, 2, 0.7, 6.0);
        let rho = PowerMatrix::uniform(&catalog, &state, 2);
        let constellation = Constellation::new(ConstellationKind::Qpsk);
        let mut rng = stream_rng(3, 0);
        let m = 100_000;
        let mut acc = vec![0.0; 4];
        for _ in 0..m {
            let s0 = constellation.points()[rng.random_range(0..4)];
            let s1 = constellation.points()[rng.random_range(0..4)];
            let y = transmit_block(1, &[s0, s1], &catalog, &rho, &state, &mut rng).unwrap();
            for (l, yl) in y.iter().enumerate() {
                acc[l] += yl.norm_sqr();
            }
        }
        for l in 0..4 {
            let expected = if catalog.is_active(1, l) {
                state.gains()[l] * rho.rho(1, l) + state.noise_var()
            } else {
                state.noise_var() // noise-only slot
            };
            let mean = acc[l] / m as f64;
            assert!(
                (mean - expected).abs() < 4.0 * expected / (m as f64).sqrt(),
                "subcarrier {l}: {mean} vs {expected}"
            );
        }
    }

    #[test]
    fn detection_of_noiseless_candidates_is_exact() {
        let (catalog, state) = system(4, 2, 0.7, 10.0);
        let rho = PowerMatrix::uniform(&catalog, &state, 2);
        let constellation = Constellation::new(ConstellationKind::Qpsk);
        let cands =
            CandidateSet::new(&[0, 1, 2, 3, 4, 5], &constellation, &catalog, &rho, &state).unwrap();
        assert_eq!(cands.len(), 6 * 16);
        for cand in 0..cands.len() {
            assert_eq!(cands.detect_index(cands.rx_of(cand)), cand);
        }
        let (sap, syms) = ml_detect(cands.rx_of(17), &cands);
        assert_eq!(cands.hypothesis(17), (sap, syms));
    }

    #[test]
    fn deep_noise_detection_approaches_uniform_guessing() {
        let (catalog, state) = system(4, 2, 1.0, -40.0);
        let rho = PowerMatrix::uniform(&catalog, &state, 2);
        let constellation = Constellation::new(ConstellationKind::Bpsk);
        let support = [0, 1, 2, 3, 4, 5];
        let cands = CandidateSet::new(&support, &constellation, &catalog, &rho, &state).unwrap();
        let cum: Vec<f64> = (1..=6).map(|i| i as f64 / 6.0).collect();
        let mut rng = stream_rng(8, 0);
        let blocks = 60_000;
        let mut errors = 0;
        for _ in 0..blocks {
            if simulate_block(&cands, &cum, &state, &mut rng).is_error() {
                errors += 1;
            }
        }
        let bler = errors as f64 / blocks as f64;
        let expected = 1.0 - 1.0 / cands.len() as f64;
        assert!(
            (bler - expected).abs() / expected < 0.10,
            "{bler} vs {expected}"
        );
    }

    #[test]
    fn single_channel_bpsk_matches_awgn_oracle() {
        // K = N = 1, one pattern: BLER = Q(sqrt(2 g rho / sigma^2))
        let config = SystemConfig::new(1, 1).unwrap();
        let catalog = SapCatalog::new(&config);
        let state = ChannelState::from_snr_db(vec![1.0], 3.0).unwrap();
        let rho = PowerMatrix::uniform(&catalog, &state, 1);
        let constellation = Constellation::new(ConstellationKind::Bpsk);
        let cands = CandidateSet::new(&[0], &constellation, &catalog, &rho, &state).unwrap();
        let mut rng = stream_rng(5, 0);
        let blocks = 200_000u64;
        let mut errors = 0u64;
        for _ in 0..blocks {
            if simulate_block(&cands, &[1.0], &state, &mut rng).is_error() {
                errors += 1;
            }
        }
        let snr = state.gains()[0] * rho.rho(0, 0) / state.noise_var();
        let q = 0.5 * statrs::function::erf::erfc(snr.sqrt());
        let bler = errors as f64 / blocks as f64;
        let sigma = (q * (1.0 - q) / blocks as f64).sqrt();
        assert!(
            (bler - q).abs() < 3.0 * sigma,
            "{bler} vs {q} (sigma {sigma})"
        );
    }

    #[test]
    fn benchmark_distribution_is_lexicographic_uniform() {
        let (catalog, state) = system(4, 2, 0.2, 10.0);
        let p =
            select_sap_distribution(CodebookMode::Benchmark, &catalog, &state, 100, 0, 1).unwrap();
        assert_eq!(p.values(), vec![0.25, 0.25, 0.25, 0.25, 0.0, 0.0]);
    }

    #[test]
    fn condition_two_uses_all_patterns() {
        let (catalog, state) = system(4, 2, 0.2, 5.0);
        let p = select_sap_distribution(CodebookMode::ConditionTwo, &catalog, &state, 4_000, 7, 2)
            .unwrap();
        assert_eq!(p.support_size(), 6);
    }

    #[test]
    fn bler_sweep_is_deterministic_and_monotone_in_noise() {
        let config = SystemConfig::new(4, 2).unwrap();
        let catalog = SapCatalog::new(&config);
        let gains = exp_decay_gains(4, 0.2).unwrap();
        let spec = BlerSpec {
            snr_db_grid: vec![0.0, 10.0],
            target_errors: 400,
            block_cap: 200_000,
            objective_samples: 2_000,
            seed: 21,
            partitions: 2,
            ..Default::default()
        };
        let a = run_bler(&gains, &catalog, &spec).unwrap();
        let b = run_bler(&gains, &catalog, &spec).unwrap();
        assert_eq!(a, b);
        assert!(a[0].bler >= a[1].bler);
        for p in &a {
            assert!(!p.partial);
            let (lo, hi) = p.wilson_ci();
            assert!(lo <= p.bler && p.bler <= hi);
        }
    }

    #[test]
    fn bler_partial_flag_on_tiny_cap() {
        let config = SystemConfig::new(4, 2).unwrap();
        let catalog = SapCatalog::new(&config);
        let gains = exp_decay_gains(4, 0.7).unwrap();
        let spec = BlerSpec {
            snr_db_grid: vec![30.0],
            target_errors: 1_000,
            block_cap: 2_000,
            objective_samples: 1_000,
            seed: 4,
            partitions: 1,
            ..Default::default()
        };
        let points = run_bler(&gains, &catalog, &spec).unwrap();
        assert_eq!(points[0].blocks, 2_000);
        assert!(points[0].partial);
    }

    #[test]
    fn bit_accounting_on_error_free_blocks() {
        // decoded bits equal transmitted bits exactly when the block is
        // error-free: index bits from the codebook depth plus K*m symbol
        // bits
        let (catalog, state) = system(4, 2, 0.2, 15.0);
        let rho = PowerMatrix::uniform(&catalog, &state, 2);
        let p = select_sap_distribution(CodebookMode::ConditionOne, &catalog, &state, 2_000, 3, 1)
            .unwrap();
        let codebook = Codebook::for_dyadic(&p);
        let support: Vec<usize> = (0..p.len()).filter(|&i| p.exponent(i).is_some()).collect();
        let constellation = Constellation::new(ConstellationKind::Qpsk);
        let cands = CandidateSet::new(&support, &constellation, &catalog, &rho, &state).unwrap();
        let values = p.values();
        let mut cum = Vec::new();
        let mut acc = 0.0;
        for &i in &support {
            acc += values[i];
            cum.push(acc);
        }
        let mut rng = stream_rng(17, 0);
        let m_bits = constellation.bits_per_symbol();
        for _ in 0..2_000 {
            let rec = simulate_block(&cands, &cum, &state, &mut rng);
            let sent_bits = codebook.depth_of(rec.sap_tx).unwrap() + 2 * m_bits;
            let decoded_bits = codebook.depth_of(rec.sap_rx).unwrap() + 2 * m_bits;
            if !rec.is_error() {
                assert_eq!(sent_bits, decoded_bits);
                assert_eq!(rec.symbols_tx, rec.symbols_rx);
            }
            // the depth is the exact index-bit count for this pattern
            let q = p.exponent(rec.sap_tx).unwrap() as usize;
            assert_eq!(codebook.depth_of(rec.sap_tx).unwrap(), q);
        }
    }
}
