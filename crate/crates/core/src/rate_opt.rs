//! Achievable-rate estimation and optimization.
//!
//! The mutual information of the pattern/symbol mixture channel,
//! `I(p, rho, sigma^2) = h(Y) - N ln(pi e sigma^2)`, has no closed form, so
//! this module provides a Monte Carlo estimator together with the analytic
//! handles that make optimization tractable: a Jensen lower bound with its
//! closed-form maximizing probabilities, high- and low-SNR asymptotics, the
//! waterfilling power rule, a block-coordinate-descent solver for the
//! relaxed problem, and the two constrained solvers (exhaustive enumeration
//! of the feasible set, and projection of the relaxed solution onto it).
//!
//! Everything stochastic is a deterministic function of `(seed,
//! partitions)`; candidate comparisons reuse common random numbers so that
//! equal inputs produce exactly equal estimates.

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

use crate::channel_model::{ChannelState, PowerMatrix, SapCatalog};
use crate::error::{Error, Result};
use crate::mapping::{project_to_feasible, DistanceMetric};
use crate::math::{check_simplex, logsumexp, project_to_simplex};
use crate::rng::{complex_normal, derive_seed, partition_ranges, sample_categorical, stream_rng};
use crate::tree_core::{visit_feasible, DyadicProbabilityVector};

/// Singularity threshold on the condition estimate of the Jensen matrix.
const MAX_CONDITION: f64 = 1e10;

/// Capacity guard for the enumerative solver; the feasible set is streamed,
/// but its size still grows superexponentially in `C`.
pub const MAX_ENUMERATIVE_C: usize = 15;

const TAG_SOLUTION_MI: u64 = 0x501;
const TAG_BANK: u64 = 0xBA9C;

// ---------------------------------------------------------------------------
// Monte Carlo mutual information
// ---------------------------------------------------------------------------

/// A Monte Carlo mutual-information estimate in nats.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MiEstimate {
    pub value: f64,
    pub std_error: f64,
    pub samples: usize,
    pub seed: u64,
}

/// Estimates `I = -mean_m ln f_Y(y_m) - N ln(pi e sigma^2)` from `samples`
/// mixture draws. Work is split into `partitions` ChaCha streams and
/// reduced in partition order, so the estimate is bit-identical for a fixed
/// `(seed, partitions)` under any thread count.
pub fn mi_monte_carlo(
    p: &[f64],
    catalog: &SapCatalog,
    rho: &PowerMatrix,
    state: &ChannelState,
    samples: usize,
    seed: u64,
    partitions: usize,
) -> Result<MiEstimate> {
    check_simplex(p, 1e-9)?;
    if p.len() != catalog.len() {
        return Err(Error::InvalidProbability(format!(
            "probability vector length {} for {} patterns",
            p.len(),
            catalog.len()
        )));
    }
    if samples < 100 {
        return Err(Error::NotEnoughSamples {
            got: samples,
            min: 100,
        });
    }
    let n = catalog.n();
    let xi = rho.xi_matrix(catalog, state);
    let ln_norm: Vec<f64> = xi
        .iter()
        .map(|row| row.iter().map(|nu| (std::f64::consts::PI * nu).ln()).sum())
        .collect();
    let support: Vec<usize> = (0..p.len()).filter(|&i| p[i] > 0.0).collect();
    let ln_p: Vec<f64> = support.iter().map(|&i| p[i].ln()).collect();
    let mut cum = Vec::with_capacity(p.len());
    let mut acc = 0.0;
    for &pi in p {
        acc += pi;
        cum.push(acc);
    }
    let h_z = n as f64 * (std::f64::consts::PI * std::f64::consts::E * state.noise_var()).ln();

    let partials: Vec<(f64, f64)> = partition_ranges(samples, partitions)
        .into_par_iter()
        .enumerate()
        .map(|(part, (_, len))| {
            let mut rng = stream_rng(seed, part as u64);
            let mut terms = vec![0.0; support.len()];
            let mut esq = vec![0.0; n];
            let mut sum = 0.0;
            let mut sumsq = 0.0;
            for _ in 0..len {
                let u = sample_categorical(&mut rng, &cum);
                for e in esq.iter_mut() {
                    *e = complex_normal(&mut rng, 1.0).norm_sqr();
                }
                // y_l | u has variance xi[u][l]; evaluate every mixture term
                for (t, &j) in terms.iter_mut().zip(&support) {
                    let mut quad = 0.0;
                    for l in 0..n {
                        quad += xi[u][l] * esq[l] / xi[j][l];
                    }
                    *t = -quad - ln_norm[j];
                }
                for (t, &lp) in terms.iter_mut().zip(&ln_p) {
                    *t += lp;
                }
                let value = -logsumexp(&terms) - h_z;
                sum += value;
                sumsq += value * value;
            }
            (sum, sumsq)
        })
        .collect();

    let mut sum = 0.0;
    let mut sumsq = 0.0;
    for (s, s2) in partials {
        sum += s;
        sumsq += s2;
    }
    let m = samples as f64;
    let mean = sum / m;
    let var = ((sumsq - m * mean * mean) / (m - 1.0)).max(0.0);
    Ok(MiEstimate {
        value: mean,
        std_error: (var / m).sqrt(),
        samples,
        seed,
    })
}

// ---------------------------------------------------------------------------
// Jensen lower bound and its maximizing probabilities
// ---------------------------------------------------------------------------

fn log_dets(catalog: &SapCatalog, rho: &PowerMatrix, state: &ChannelState) -> Vec<Vec<f64>> {
    let xi = rho.xi_matrix(catalog, state);
    let c = catalog.len();
    let mut out = vec![vec![0.0; c]; c];
    for i in 0..c {
        for j in i..c {
            let v: f64 = (0..catalog.n()).map(|l| (xi[i][l] + xi[j][l]).ln()).sum();
            out[i][j] = v;
            out[j][i] = v;
        }
    }
    out
}

/// Jensen lower bound on the mutual information,
/// `-ln(sum_ij p_i p_j / det(Xi_i + Xi_j)) - N ln(e sigma^2)`, accumulated
/// in the log domain so high-SNR determinants cannot overflow.
pub fn jensen_lower_bound(
    p: &[f64],
    catalog: &SapCatalog,
    rho: &PowerMatrix,
    state: &ChannelState,
) -> f64 {
    let ld = log_dets(catalog, rho, state);
    let mut terms = Vec::new();
    for (i, &pi) in p.iter().enumerate() {
        if pi <= 0.0 {
            continue;
        }
        for (j, &pj) in p.iter().enumerate() {
            if pj <= 0.0 {
                continue;
            }
            terms.push(pi.ln() + pj.ln() - ld[i][j]);
        }
    }
    let n = catalog.n() as f64;
    -logsumexp(&terms) - n * (std::f64::consts::E * state.noise_var()).ln()
}

/// The matrix `A` with `a_ij = 1/det(Xi_i + Xi_j)` behind the Jensen bound,
/// held in the log domain, and its (scaled) inverse when well conditioned.
#[derive(Clone, Debug)]
pub struct JensenMatrices {
    log_a: Vec<Vec<f64>>,
    shift: f64,
    cond: f64,
    /// `A^{-1} 1` up to a positive scale; what the probability formula uses.
    row_sums: Option<DVector<f64>>,
    scaled_inverse: Option<DMatrix<f64>>,
}

impl JensenMatrices {
    pub fn new(catalog: &SapCatalog, rho: &PowerMatrix, state: &ChannelState) -> Self {
        let ld = log_dets(catalog, rho, state);
        let c = catalog.len();
        // ln a_ij = -ln det; factor out the largest entry so the SVD sees a
        // well-scaled matrix (the probabilities are scale-invariant)
        let shift = ld.iter().flatten().copied().fold(f64::INFINITY, f64::min);
        let scaled = DMatrix::from_fn(c, c, |i, j| (shift - ld[i][j]).exp());
        let svd = scaled.clone().svd(true, true);
        let smax = svd.singular_values.iter().copied().fold(0.0, f64::max);
        let smin = svd
            .singular_values
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min);
        let cond = if smin > 0.0 {
            smax / smin
        } else {
            f64::INFINITY
        };
        let (row_sums, scaled_inverse) = if cond.is_finite() && cond <= MAX_CONDITION {
            let ones = DVector::from_element(c, 1.0);
            let solution = svd.solve(&ones, 0.0).ok();
            let inverse = scaled.clone().try_inverse();
            (solution, inverse)
        } else {
            (None, None)
        };
        let log_a = ld
            .iter()
            .map(|row| row.iter().map(|&v| -v).collect())
            .collect();
        Self {
            log_a,
            shift,
            cond,
            row_sums,
            scaled_inverse,
        }
    }

    /// `ln a_ij`.
    pub fn log_a(&self) -> &[Vec<f64>] {
        &self.log_a
    }

    /// `A` in natural scale. Entries can underflow to zero at extreme SNR;
    /// the probability computation works on the scaled form instead.
    pub fn a(&self) -> DMatrix<f64> {
        let c = self.log_a.len();
        DMatrix::from_fn(c, c, |i, j| self.log_a[i][j].exp())
    }

    /// `B = A^{-1}` in natural scale when representable and well
    /// conditioned.
    pub fn b(&self) -> Option<DMatrix<f64>> {
        let inv = self.scaled_inverse.as_ref()?;
        let scale = self.shift.exp();
        let b = inv.map(|x| x * scale);
        b.iter().all(|x| x.is_finite()).then_some(b)
    }

    /// Condition estimate (ratio of extreme singular values).
    pub fn condition(&self) -> f64 {
        self.cond
    }

    pub fn is_singular(&self) -> bool {
        !(self.cond.is_finite() && self.cond <= MAX_CONDITION)
    }
}

/// Probabilities maximizing the Jensen bound: the solution of
/// `min p^T A p` on the simplex. When `A^{-1} 1` is entrywise nonnegative
/// this is exactly `p_i = (sum_j b_ij)^+` normalized; otherwise that
/// formula violates the KKT conditions, so the negative-coefficient
/// patterns are dropped and the reduced system re-solved, with a projected
/// gradient polish to certify stationarity. Errors with the condition
/// estimate when `A` is singular or nearly so; callers fall back to
/// [`high_snr_probs`].
pub fn jensen_optimal_probs(
    catalog: &SapCatalog,
    rho: &PowerMatrix,
    state: &ChannelState,
) -> Result<Vec<f64>> {
    let m = JensenMatrices::new(catalog, rho, state);
    if m.is_singular() || m.row_sums.is_none() {
        return Err(Error::SingularMatrix { cond: m.cond });
    }
    let c = catalog.len();
    let scaled = DMatrix::from_fn(c, c, |i, j| (m.shift + m.log_a[i][j]).exp());

    // active-set sweep: drop patterns whose coefficient goes negative
    let mut support: Vec<usize> = (0..c).collect();
    let mut coeffs = vec![0.0; c];
    loop {
        let sub = scaled.select_rows(&support).select_columns(&support);
        let ones = DVector::from_element(support.len(), 1.0);
        let x = sub
            .svd(true, true)
            .solve(&ones, 0.0)
            .map_err(|_| Error::SingularMatrix { cond: m.cond })?;
        if x.iter().all(|&v| v >= 0.0) {
            coeffs.fill(0.0);
            for (slot, &i) in support.iter().enumerate() {
                coeffs[i] = x[slot];
            }
            break;
        }
        support = support
            .iter()
            .zip(x.iter())
            .filter(|(_, &v)| v > 0.0)
            .map(|(&i, _)| i)
            .collect();
        if support.is_empty() {
            return Err(Error::SingularMatrix { cond: m.cond });
        }
    }
    let total: f64 = coeffs.iter().sum();
    if !crate::math::is_positive(total) {
        return Err(Error::SingularMatrix { cond: m.cond });
    }
    let mut p: Vec<f64> = coeffs.into_iter().map(|x| x / total).collect();

    // projected gradient descent on p^T A p certifies the simplex optimum
    // (scale-invariant, so the well-conditioned scaled matrix serves)
    let quad = |p: &[f64]| {
        let v = DVector::from_column_slice(p);
        (v.transpose() * &scaled * v)[(0, 0)]
    };
    let mut value = quad(&p);
    let mut step = 1.0 / scaled.norm();
    for _ in 0..500 {
        let v = DVector::from_column_slice(&p);
        let grad = &scaled * v * 2.0;
        let mut improved = false;
        while step > 1e-18 {
            let trial: Vec<f64> = p
                .iter()
                .zip(grad.iter())
                .map(|(&x, &g)| x - step * g)
                .collect();
            let trial = project_to_simplex(&trial);
            let tv = quad(&trial);
            if tv < value - 1e-16 * value.abs().max(1e-300) {
                p = trial;
                value = tv;
                step *= 1.5;
                improved = true;
                break;
            }
            step *= 0.5;
        }
        if !improved {
            break;
        }
    }
    Ok(p)
}

// ---------------------------------------------------------------------------
// Closed-form asymptotics
// ---------------------------------------------------------------------------

/// Per-pattern log received-power products `sum_{l in S_i} ln(g_l rho_li +
/// sigma^2)`.
fn pattern_log_products(catalog: &SapCatalog, rho: &PowerMatrix, state: &ChannelState) -> Vec<f64> {
    let s2 = state.noise_var();
    (0..catalog.len())
        .map(|i| {
            catalog
                .set(i)
                .iter()
                .map(|&l| (state.gains()[l] * rho.rho(i, l) + s2).ln())
                .sum()
        })
        .collect()
}

/// Per-pattern capacity scores `sum_{l in S_i} ln(1 + g_l rho_li /
/// sigma^2)`.
pub fn pattern_capacity_scores(
    catalog: &SapCatalog,
    rho: &PowerMatrix,
    state: &ChannelState,
) -> Vec<f64> {
    let s2 = state.noise_var();
    (0..catalog.len())
        .map(|i| {
            catalog
                .set(i)
                .iter()
                .map(|&l| (1.0 + state.gains()[l] * rho.rho(i, l) / s2).ln())
                .sum()
        })
        .collect()
}

/// High-SNR-optimal pattern probabilities `q_i` proportional to
/// `prod_{l in S_i} (g_l rho_li + sigma^2)`, computed in the log domain.
pub fn high_snr_probs(catalog: &SapCatalog, rho: &PowerMatrix, state: &ChannelState) -> Vec<f64> {
    softmax(&pattern_log_products(catalog, rho, state))
}

fn softmax(scores: &[f64]) -> Vec<f64> {
    let z = logsumexp(scores);
    scores.iter().map(|s| (s - z).exp()).collect()
}

/// Closed-form upper bound on the maximal mutual information,
/// `mu = ln sum_i prod_{l in S_i} (1 + g_l rho_li / sigma^2)`, tight at
/// high SNR.
pub fn upper_bound_mu(catalog: &SapCatalog, rho: &PowerMatrix, state: &ChannelState) -> f64 {
    logsumexp(&pattern_capacity_scores(catalog, rho, state))
}

/// First index attaining the maximum (ties resolve to the lowest index).
pub(crate) fn argmax_lowest(xs: &[f64]) -> usize {
    let mut best = 0;
    for (i, &x) in xs.iter().enumerate().skip(1) {
        if x > xs[best] {
            best = i;
        }
    }
    best
}

/// Low-SNR-optimal probabilities: all mass on the pattern of the `K`
/// strongest subcarriers, `i* = argmax_i sum_{l in S_i} ln(1 + g_l rho_li /
/// sigma^2)`. Returns the one-hot vector and `i*`.
pub fn low_snr_probs(
    catalog: &SapCatalog,
    rho: &PowerMatrix,
    state: &ChannelState,
) -> (Vec<f64>, usize) {
    let scores = pattern_capacity_scores(catalog, rho, state);
    let i_star = argmax_lowest(&scores);
    let mut r = vec![0.0; catalog.len()];
    r[i_star] = 1.0;
    (r, i_star)
}

// ---------------------------------------------------------------------------
// Waterfilling
// ---------------------------------------------------------------------------

/// Waterfilling over a set of gains: `rho_l = (mu - sigma^2/g_l)^+` with the
/// water level `mu` meeting the budget exactly. Zero-gain entries receive
/// zero power.
pub fn waterfill(gains: &[f64], sigma2: f64, budget: f64) -> Result<Vec<f64>> {
    if !crate::math::is_positive(budget) || !crate::math::is_positive(sigma2) {
        return Err(Error::InvalidArgument(
            "waterfilling needs a positive budget and noise variance".into(),
        ));
    }
    let mut active: Vec<usize> = (0..gains.len()).filter(|&l| gains[l] > 0.0).collect();
    if active.is_empty() {
        return Err(Error::AllGainsZero);
    }
    loop {
        let inv_sum: f64 = active.iter().map(|&l| sigma2 / gains[l]).sum();
        let mu = (budget + inv_sum) / active.len() as f64;
        let before = active.len();
        active.retain(|&l| sigma2 / gains[l] < mu);
        if active.is_empty() {
            // the strongest channel alone always gets positive power
            unreachable!("waterfilling always keeps the strongest subcarrier");
        }
        if active.len() == before {
            let mut rho = vec![0.0; gains.len()];
            for &l in &active {
                rho[l] = mu - sigma2 / gains[l];
            }
            return Ok(rho);
        }
    }
}

/// Per-pattern waterfilling: each pattern fills its own `K` subcarriers with
/// the full budget (the high/low-SNR-optimal rule; the objective is
/// increasing in every power, so the per-pattern constraints bind).
pub fn allocate_powers_per_sap(catalog: &SapCatalog, state: &ChannelState) -> Result<PowerMatrix> {
    let rows = (0..catalog.len())
        .map(|i| {
            let set = catalog.set(i);
            let sub_gains: Vec<f64> = set.iter().map(|&l| state.gains()[l]).collect();
            let filled = waterfill(&sub_gains, state.noise_var(), state.power_budget())?;
            let mut row = vec![0.0; catalog.n()];
            for (slot, &l) in set.iter().enumerate() {
                row[l] = filled[slot];
            }
            Ok(row)
        })
        .collect::<Result<Vec<_>>>()?;
    PowerMatrix::new(rows, catalog, state)
}

// ---------------------------------------------------------------------------
// Common-random-number sample bank
// ---------------------------------------------------------------------------

/// Squared magnitudes of i.i.d. `CN(0, 1)` draws, shared across every
/// candidate evaluated by the solvers: conditioned on pattern `i`, sample
/// `m` has `|y_l|^2 = xi_il * esq[m][l]`, so one bank serves all strata,
/// all probability vectors, and all power matrices.
pub(crate) struct SampleBank {
    esq: Vec<f64>,
    samples: usize,
    n: usize,
}

impl SampleBank {
    pub(crate) fn generate(samples: usize, n: usize, seed: u64, partitions: usize) -> Self {
        let ranges = partition_ranges(samples, partitions);
        let chunks: Vec<Vec<f64>> = ranges
            .into_par_iter()
            .enumerate()
            .map(|(part, (_, len))| {
                let mut rng = stream_rng(seed, part as u64);
                (0..len * n)
                    .map(|_| complex_normal(&mut rng, 1.0).norm_sqr())
                    .collect()
            })
            .collect();
        let mut esq = Vec::with_capacity(samples * n);
        for c in chunks {
            esq.extend(c);
        }
        Self { esq, samples, n }
    }
}

/// Conditional log densities `ln f_{Y|j}(y^(i)_m)` for every pattern pair,
/// materialized once per power matrix; mutual-information values and
/// gradients for any probability vector are then cheap deterministic sums.
pub(crate) struct CondTable {
    /// layout: `((i * samples + m) * c + j)`
    vals: Vec<f64>,
    c: usize,
    samples: usize,
    h_z: f64,
}

impl CondTable {
    pub(crate) fn build(
        bank: &SampleBank,
        catalog: &SapCatalog,
        rho: &PowerMatrix,
        state: &ChannelState,
    ) -> Self {
        let c = catalog.len();
        let n = bank.n;
        let m = bank.samples;
        let xi = rho.xi_matrix(catalog, state);
        let ln_norm: Vec<f64> = xi
            .iter()
            .map(|row| row.iter().map(|nu| (std::f64::consts::PI * nu).ln()).sum())
            .collect();
        // inner loop over j reads xi ratios; precompute xi_i[l] / xi_j[l]
        let mut ratio = vec![0.0; c * c * n];
        for i in 0..c {
            for j in 0..c {
                for l in 0..n {
                    ratio[(i * c + j) * n + l] = xi[i][l] / xi[j][l];
                }
            }
        }
        let vals: Vec<f64> = (0..c * m)
            .into_par_iter()
            .flat_map_iter(|im| {
                let i = im / m;
                let mm = im % m;
                let esq = &bank.esq[mm * n..(mm + 1) * n];
                let ratio = &ratio;
                let ln_norm = &ln_norm;
                (0..c).map(move |j| {
                    let r = &ratio[(i * c + j) * n..(i * c + j + 1) * n];
                    let mut quad = 0.0;
                    for l in 0..n {
                        quad += r[l] * esq[l];
                    }
                    -quad - ln_norm[j]
                })
            })
            .collect();
        let h_z = n as f64 * (std::f64::consts::PI * std::f64::consts::E * state.noise_var()).ln();
        Self {
            vals,
            c,
            samples: m,
            h_z,
        }
    }

    /// Sample-average mutual information at `p` (nats).
    pub(crate) fn mi(&self, p: &[f64]) -> f64 {
        let (c, m) = (self.c, self.samples);
        let support: Vec<usize> = (0..c).filter(|&i| p[i] > 0.0).collect();
        let ln_p: Vec<f64> = support.iter().map(|&i| p[i].ln()).collect();
        let mut acc = 0.0;
        let mut terms = vec![0.0; support.len()];
        for &i in &support {
            let mut stratum = 0.0;
            for mm in 0..m {
                let row = &self.vals[(i * m + mm) * c..(i * m + mm + 1) * c];
                for ((t, &j), &lp) in terms.iter_mut().zip(&support).zip(&ln_p) {
                    *t = lp + row[j];
                }
                stratum += logsumexp(&terms);
            }
            acc += p[i] * stratum / m as f64;
        }
        -acc - self.h_z
    }

    /// Gradient of [`CondTable::mi`] with respect to `p` (no simplex
    /// projection applied). The `-E_{Y|k}[ln f]` term exists for every
    /// pattern, including those currently at zero probability, so boundary
    /// iterates can move back into the interior.
    pub(crate) fn mi_grad(&self, p: &[f64]) -> Vec<f64> {
        let (c, m) = (self.c, self.samples);
        let support: Vec<usize> = (0..c).filter(|&i| p[i] > 0.0).collect();
        let ln_p: Vec<f64> = support.iter().map(|&i| p[i].ln()).collect();
        let mut grad = vec![0.0; c];
        let mut terms = vec![0.0; support.len()];
        for i in 0..c {
            let mut mean_ln = 0.0;
            let mut resp = vec![0.0; c];
            let weighted = p[i] > 0.0;
            for mm in 0..m {
                let row = &self.vals[(i * m + mm) * c..(i * m + mm + 1) * c];
                for ((t, &j), &lp) in terms.iter_mut().zip(&support).zip(&ln_p) {
                    *t = lp + row[j];
                }
                let lse = logsumexp(&terms);
                mean_ln += lse;
                if weighted {
                    for (k, r) in resp.iter_mut().enumerate() {
                        *r += (row[k] - lse).exp();
                    }
                }
            }
            grad[i] -= mean_ln / m as f64;
            if weighted {
                for (k, r) in resp.iter().enumerate() {
                    grad[k] -= p[i] * r / m as f64;
                }
            }
        }
        grad
    }
}

// ---------------------------------------------------------------------------
// Block coordinate descent on the relaxed problem
// ---------------------------------------------------------------------------

/// Options for [`bcd_optimize`].
#[derive(Clone, Debug)]
pub struct BcdOptions {
    /// Common-random-number bank size (samples per pattern stratum).
    pub bank_samples: usize,
    /// Full probability/power cycles before giving up.
    pub max_cycles: usize,
    /// Stop once a full cycle improves the objective by less than this.
    pub tol_nats: f64,
    /// Optimize the powers too; otherwise they stay at their initial value.
    pub optimize_powers: bool,
    /// Starting probabilities (uniform when absent).
    pub init_probs: Option<Vec<f64>>,
    /// Starting powers (per-pattern waterfilling when optimizing powers,
    /// uniform otherwise).
    pub init_powers: Option<PowerMatrix>,
    /// Samples for the final independent estimate of the achieved rate.
    pub mi_samples: usize,
    pub seed: u64,
    pub partitions: usize,
}

impl Default for BcdOptions {
    fn default() -> Self {
        Self {
            bank_samples: 20_000,
            max_cycles: 30,
            tol_nats: 1e-3,
            optimize_powers: true,
            init_probs: None,
            init_powers: None,
            mi_samples: 200_000,
            seed: 0,
            partitions: 1,
        }
    }
}

/// Outcome of [`bcd_optimize`].
#[derive(Clone, Debug)]
pub struct BcdResult {
    pub probs: Vec<f64>,
    pub powers: PowerMatrix,
    /// Independent Monte Carlo estimate at the returned iterate.
    pub mi: MiEstimate,
    /// Sample-average objective value at the returned iterate.
    pub objective: f64,
    pub converged: bool,
    pub cycles: usize,
}

/// Block coordinate descent for the relaxed problem: alternately maximizes
/// the sample-average mutual information over `p` (concave; projected
/// gradient ascent) and over each pattern's power row (compass search on
/// the budget simplex, seeded at per-pattern waterfilling). One fixed bank
/// of common random numbers serves every evaluation, so the surrogate is a
/// smooth deterministic function and the routine is reproducible.
///
/// Guarded to `N <= 4`: the surrogate needs `C^2 * bank_samples` density
/// evaluations per power candidate, which is only viable for small groups.
pub fn bcd_optimize(
    catalog: &SapCatalog,
    state: &ChannelState,
    opts: &BcdOptions,
) -> Result<BcdResult> {
    if catalog.n() > 4 {
        return Err(Error::CapacityExceeded {
            what: "BCD group size N",
            value: catalog.n(),
            max: 4,
        });
    }
    let c = catalog.len();
    let k = catalog.set(0).len();
    let mut p = match &opts.init_probs {
        Some(init) => {
            check_simplex(init, 1e-9)?;
            init.clone()
        }
        None => vec![1.0 / c as f64; c],
    };
    let mut rho = match &opts.init_powers {
        Some(m) => m.clone(),
        None if opts.optimize_powers => allocate_powers_per_sap(catalog, state)?,
        None => PowerMatrix::uniform(catalog, state, k),
    };

    let bank = SampleBank::generate(
        opts.bank_samples.max(100),
        catalog.n(),
        derive_seed(opts.seed, TAG_BANK),
        opts.partitions,
    );
    let mut table = CondTable::build(&bank, catalog, &rho, state);
    let mut objective = table.mi(&p);
    let mut converged = false;
    let mut cycles = 0;

    for _cycle in 0..opts.max_cycles {
        cycles += 1;
        let start = objective;

        // probability step: concave, projected gradient ascent
        (p, objective) = ascend_probs(&table, p, objective);

        // power step: per-pattern compass search over the budget split
        if opts.optimize_powers && k > 1 {
            for i in 0..c {
                let improved = improve_power_row(&bank, catalog, state, &mut rho, i, &p, objective);
                if let Some((new_table, new_obj)) = improved {
                    table = new_table;
                    objective = new_obj;
                }
            }
        }

        if objective - start < opts.tol_nats {
            converged = true;
            break;
        }
    }

    let mi = mi_monte_carlo(
        &p,
        catalog,
        &rho,
        state,
        opts.mi_samples,
        derive_seed(opts.seed, TAG_SOLUTION_MI),
        opts.partitions,
    )?;
    Ok(BcdResult {
        probs: p,
        powers: rho,
        mi,
        objective,
        converged,
        cycles,
    })
}

fn ascend_probs(table: &CondTable, mut p: Vec<f64>, mut value: f64) -> (Vec<f64>, f64) {
    let mut step = 1.0;
    for _ in 0..600 {
        let grad = table.mi_grad(&p);
        let mut improved = false;
        while step > 1e-14 {
            let trial: Vec<f64> = p.iter().zip(&grad).map(|(&x, &g)| x + step * g).collect();
            let trial = project_to_simplex(&trial);
            let tv = table.mi(&trial);
            if tv > value + 1e-12 {
                let gain = tv - value;
                p = trial;
                value = tv;
                step *= 1.6;
                improved = true;
                if gain < 1e-9 {
                    return (p, value);
                }
                break;
            }
            step *= 0.5;
        }
        if !improved {
            break;
        }
    }
    (p, value)
}

/// Compass search over one pattern's power split; returns the rebuilt table
/// and objective when an improvement was found.
fn improve_power_row(
    bank: &SampleBank,
    catalog: &SapCatalog,
    state: &ChannelState,
    rho: &mut PowerMatrix,
    i: usize,
    p: &[f64],
    mut objective: f64,
) -> Option<(CondTable, f64)> {
    let set: Vec<usize> = catalog.set(i).to_vec();
    let budget = state.power_budget();
    let mut best_rows = rho.rows().to_vec();
    let mut improved_any = false;
    let mut delta = budget / 4.0;
    while delta > budget * 1e-3 {
        let mut improved = false;
        'moves: for &from in &set {
            for &to in &set {
                if from == to || best_rows[i][from] < delta {
                    continue;
                }
                let mut rows = best_rows.clone();
                rows[i][from] -= delta;
                rows[i][to] += delta;
                let trial = PowerMatrix::new(rows, catalog, state).expect("valid move");
                let table = CondTable::build(bank, catalog, &trial, state);
                let value = table.mi(p);
                if value > objective + 1e-12 {
                    best_rows = trial.rows().to_vec();
                    objective = value;
                    improved = true;
                    improved_any = true;
                    break 'moves;
                }
            }
        }
        if !improved {
            delta *= 0.5;
        }
    }
    if improved_any {
        *rho = PowerMatrix::new(best_rows, catalog, state).expect("valid rows");
        let table = CondTable::build(bank, catalog, rho, state);
        let value = table.mi(p);
        Some((table, value))
    } else {
        None
    }
}

// ---------------------------------------------------------------------------
// Constrained solvers
// ---------------------------------------------------------------------------

/// How candidate probability vectors are scored.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum ObjectiveMode {
    /// High-SNR closed form at and above 10 dB, Monte Carlo below.
    Auto,
    /// `mu - KL(p || q)`: the high-SNR asymptotic rate.
    HighSnr,
    /// `-ln sum_i p_i e^{-s_i}`: the low-SNR asymptotic rate.
    LowSnr,
    /// Sample-average mutual information on a common-random-number bank.
    Mc,
}

/// Options shared by the constrained solvers.
#[derive(Clone, Debug)]
pub struct SolverOptions {
    pub mode: ObjectiveMode,
    /// Bank size for the Monte Carlo objective.
    pub objective_samples: usize,
    /// Samples for the final estimate of the winning pair.
    pub mi_samples: usize,
    /// Uniform powers instead of per-pattern waterfilling (the error-rate
    /// study fixes uniform powers).
    pub uniform_power: bool,
    pub seed: u64,
    pub partitions: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            mode: ObjectiveMode::Auto,
            objective_samples: 20_000,
            mi_samples: 200_000,
            uniform_power: false,
            seed: 0,
            partitions: 1,
        }
    }
}

/// A feasible solution of the constrained problem.
#[derive(Clone, Debug)]
pub struct ConstrainedSolution {
    pub probs: DyadicProbabilityVector,
    pub powers: PowerMatrix,
    pub mi: MiEstimate,
    /// Objective value the winner was selected with (mode-dependent).
    pub objective: f64,
}

fn solver_powers(
    catalog: &SapCatalog,
    state: &ChannelState,
    opts: &SolverOptions,
) -> Result<PowerMatrix> {
    if opts.uniform_power {
        Ok(PowerMatrix::uniform(catalog, state, catalog.set(0).len()))
    } else {
        allocate_powers_per_sap(catalog, state)
    }
}

enum Objective {
    HighSnr { mu: f64, ln_q: Vec<f64> },
    LowSnr { scores: Vec<f64> },
    Mc { table: CondTable },
}

impl Objective {
    fn new(
        mode: ObjectiveMode,
        catalog: &SapCatalog,
        rho: &PowerMatrix,
        state: &ChannelState,
        opts: &SolverOptions,
    ) -> Self {
        let mode = match mode {
            ObjectiveMode::Auto => {
                if state.snr_db() >= 10.0 {
                    ObjectiveMode::HighSnr
                } else {
                    ObjectiveMode::Mc
                }
            }
            m => m,
        };
        match mode {
            ObjectiveMode::HighSnr => {
                let log_products = pattern_log_products(catalog, rho, state);
                let z = logsumexp(&log_products);
                Objective::HighSnr {
                    mu: upper_bound_mu(catalog, rho, state),
                    ln_q: log_products.iter().map(|s| s - z).collect(),
                }
            }
            ObjectiveMode::LowSnr => Objective::LowSnr {
                scores: pattern_capacity_scores(catalog, rho, state),
            },
            ObjectiveMode::Mc => {
                let bank = SampleBank::generate(
                    opts.objective_samples.max(100),
                    catalog.n(),
                    derive_seed(opts.seed, TAG_BANK),
                    opts.partitions,
                );
                Objective::Mc {
                    table: CondTable::build(&bank, catalog, rho, state),
                }
            }
            ObjectiveMode::Auto => unreachable!(),
        }
    }

    fn score(&self, p: &[f64]) -> f64 {
        match self {
            Objective::HighSnr { mu, ln_q } => {
                let kl: f64 = p
                    .iter()
                    .zip(ln_q)
                    .filter(|(&pi, _)| pi > 0.0)
                    .map(|(&pi, &lq)| pi * (pi.ln() - lq))
                    .sum();
                mu - kl
            }
            Objective::LowSnr { scores } => {
                let terms: Vec<f64> = p
                    .iter()
                    .zip(scores)
                    .filter(|(&pi, _)| pi > 0.0)
                    .map(|(&pi, &s)| pi.ln() - s)
                    .collect();
                -logsumexp(&terms)
            }
            Objective::Mc { table } => table.mi(p),
        }
    }
}

/// Exhaustive search over the feasible set: per-pattern waterfilling powers
/// (uniform on request), then every dyadic vector reachable with trees of
/// `v` in `v_range` is scored and the best pair returned. `v_range = None`
/// sweeps the whole set `v = 0..=C-1`; the error-rate study's restricted
/// condition passes `Some(C-1..=C-1)` (trees with exactly `C` leaves).
pub fn solve_constrained_enumerative(
    catalog: &SapCatalog,
    state: &ChannelState,
    v_range: Option<std::ops::RangeInclusive<usize>>,
    opts: &SolverOptions,
) -> Result<ConstrainedSolution> {
    let (probs, powers, score) = enumerative_search(catalog, state, v_range, opts)?;
    let mi = mi_monte_carlo(
        &probs.values(),
        catalog,
        &powers,
        state,
        opts.mi_samples,
        derive_seed(opts.seed, TAG_SOLUTION_MI),
        opts.partitions,
    )?;
    Ok(ConstrainedSolution {
        probs,
        powers,
        mi,
        objective: score,
    })
}

/// The search behind [`solve_constrained_enumerative`], without the final
/// Monte Carlo estimate: returns the winning vector, the powers it was
/// scored with, and its objective value.
pub fn enumerative_search(
    catalog: &SapCatalog,
    state: &ChannelState,
    v_range: Option<std::ops::RangeInclusive<usize>>,
    opts: &SolverOptions,
) -> Result<(DyadicProbabilityVector, PowerMatrix, f64)> {
    let c = catalog.len();
    if c > MAX_ENUMERATIVE_C {
        return Err(Error::CapacityExceeded {
            what: "enumerative solver pattern count C",
            value: c,
            max: MAX_ENUMERATIVE_C,
        });
    }
    let rho = solver_powers(catalog, state, opts)?;
    let objective = Objective::new(opts.mode, catalog, &rho, state, opts);
    let v_range = v_range.unwrap_or(0..=c - 1);

    let mut best: Option<(DyadicProbabilityVector, f64)> = None;
    visit_feasible(c, v_range, |cand| {
        let score = objective.score(&cand.values());
        let replace = match &best {
            Some((_, s)) => score > *s,
            None => true,
        };
        if replace {
            best = Some((cand, score));
        }
    })?;
    let (probs, score) = best.expect("feasible set is nonempty");
    Ok((probs, rho, score))
}

/// Where the relaxed probability vector comes from.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum RelaxationSource {
    /// High-SNR asymptotic probabilities (the default).
    HighSnr,
    /// Jensen-bound-optimal probabilities; falls back to the high-SNR form
    /// when the matrix is singular.
    JensenOpt,
}

/// Projection output: the feasible solution plus the relaxed vector it came
/// from.
#[derive(Clone, Debug)]
pub struct ProjectedSolution {
    pub solution: ConstrainedSolution,
    pub relaxed: Vec<f64>,
    /// True when the Jensen matrix was singular and the high-SNR
    /// probabilities were used instead.
    pub used_fallback: bool,
}

/// Heuristic constrained solver: per-pattern waterfilling powers, a relaxed
/// probability vector from the chosen closed form, and a projection onto
/// the feasible set under `metric`.
pub fn solve_constrained_projected(
    catalog: &SapCatalog,
    state: &ChannelState,
    metric: DistanceMetric,
    source: RelaxationSource,
    opts: &SolverOptions,
) -> Result<ProjectedSolution> {
    let rho = solver_powers(catalog, state, opts)?;
    let (relaxed, used_fallback) = match source {
        RelaxationSource::HighSnr => (high_snr_probs(catalog, &rho, state), false),
        RelaxationSource::JensenOpt => match jensen_optimal_probs(catalog, &rho, state) {
            Ok(p) => (p, false),
            Err(Error::SingularMatrix { .. }) => (high_snr_probs(catalog, &rho, state), true),
            Err(e) => return Err(e),
        },
    };
    let probs = project_to_feasible(&relaxed, metric)?;
    let mi = mi_monte_carlo(
        &probs.values(),
        catalog,
        &rho,
        state,
        opts.mi_samples,
        derive_seed(opts.seed, TAG_SOLUTION_MI),
        opts.partitions,
    )?;
    let objective = mi.value;
    Ok(ProjectedSolution {
        solution: ConstrainedSolution {
            probs,
            powers: rho,
            mi,
            objective,
        },
        relaxed,
        used_fallback,
    })
}

/// Initial probabilities for a perturbed BCD start: uniform tilted toward
/// `index` by `weight`, renormalized.
pub fn perturbed_uniform(c: usize, index: usize, weight: f64) -> Vec<f64> {
    let mut p = vec![1.0; c];
    p[index] += weight * c as f64;
    let sum: f64 = p.iter().sum();
    p.iter_mut().for_each(|x| *x /= sum);
    p
}
