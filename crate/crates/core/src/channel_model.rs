//! The N-subcarrier frequency-domain channel with K-of-N index modulation.
//!
//! One group of `N` parallel subcarriers is modeled after the DFT/cyclic
//! prefix front end has been stripped away: `Y_l = sqrt(g_l) e^{j theta_l}
//! X_l + Z_l` on active subcarriers and `Y_l = Z_l` on nulled ones, with
//! `Z_l ~ CN(0, sigma^2)`. Conditioned on the pattern, the inputs are
//! `X_l ~ CN(0, rho_li)`, so the received vector is a Gaussian mixture over
//! the `C = C(N, K)` activation patterns. Mutual-information computations
//! are phase-invariant and may leave the phases at zero; only the ML
//! detection study uses them.

use num_complex::Complex64;
use rand::Rng;
use serde::Deserialize;

use crate::error::{Error, Result};
use crate::math::{binomial_u128, check_simplex, k_subsets};
use crate::rng::{complex_normal, sample_categorical};

/// Group geometry: `N` subcarriers, `K` active, `C = C(N, K)` patterns.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub struct SystemConfig {
    n: usize,
    k: usize,
    c: usize,
}

impl SystemConfig {
    /// Requires `1 <= K <= N`. `K = N` is the conventional-OFDM degenerate
    /// case (a single pattern); see [`SystemConfig::is_conventional`].
    pub fn new(n: usize, k: usize) -> Result<Self> {
        if n == 0 || k == 0 || k > n {
            return Err(Error::InvalidArgument(format!(
                "need 1 <= K <= N, got N = {n}, K = {k}"
            )));
        }
        let c = binomial_u128(n, k);
        let c = usize::try_from(c)
            .map_err(|_| Error::InvalidArgument("pattern count C(N, K) overflows".into()))?;
        Ok(Self { n, k, c })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.k
    }

    /// Number of activation patterns.
    pub fn c(&self) -> usize {
        self.c
    }

    /// True for `K = N`: conventional OFDM with a single pattern.
    pub fn is_conventional(&self) -> bool {
        self.k == self.n
    }
}

/// The `C` activation patterns in lexicographic order, with 0-based
/// subcarrier indices.
#[derive(Clone, Debug)]
pub struct SapCatalog {
    sets: Vec<Vec<usize>>,
    masks: Vec<Vec<bool>>,
    n: usize,
}

impl SapCatalog {
    pub fn new(config: &SystemConfig) -> Self {
        let sets = k_subsets(config.n, config.k);
        debug_assert_eq!(sets.len(), config.c);
        let masks = sets
            .iter()
            .map(|s| {
                let mut m = vec![false; config.n];
                for &l in s {
                    m[l] = true;
                }
                m
            })
            .collect();
        Self {
            sets,
            masks,
            n: config.n,
        }
    }

    pub fn len(&self) -> usize {
        self.sets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sets.is_empty()
    }

    /// Active subcarriers of pattern `i`, ascending.
    pub fn set(&self, i: usize) -> &[usize] {
        &self.sets[i]
    }

    pub fn sets(&self) -> &[Vec<usize>] {
        &self.sets
    }

    /// True when subcarrier `l` is active under pattern `i`.
    pub fn is_active(&self, i: usize, l: usize) -> bool {
        self.masks[i][l]
    }

    pub fn n(&self) -> usize {
        self.n
    }
}

/// Channel knowledge for one group: linear power gains, phases, noise
/// variance, and the per-pattern transmit power budget.
#[derive(Clone, Debug)]
pub struct ChannelState {
    gains: Vec<f64>,
    phases: Vec<f64>,
    noise_var: f64,
    power_budget: f64,
}

impl ChannelState {
    pub fn new(
        gains: Vec<f64>,
        phases: Vec<f64>,
        noise_var: f64,
        power_budget: f64,
    ) -> Result<Self> {
        if gains.is_empty() || gains.len() != phases.len() {
            return Err(Error::InvalidArgument(
                "gains and phases must be equal-length and nonempty".into(),
            ));
        }
        if gains.iter().any(|&g| g < 0.0 || !g.is_finite()) {
            return Err(Error::InvalidArgument(
                "gains must be finite and >= 0".into(),
            ));
        }
        if !crate::math::is_positive(noise_var) || !crate::math::is_positive(power_budget) {
            return Err(Error::InvalidArgument(
                "noise variance and power budget must be strictly positive".into(),
            ));
        }
        Ok(Self {
            gains,
            phases,
            noise_var,
            power_budget,
        })
    }

    /// Zero-phase state at a given average transmit SNR per subcarrier,
    /// `SNR = P / (N sigma^2)`, with the noise normalized to
    /// `sigma^2 = 1` so `P = N * 10^(snr_db / 10)`.
    pub fn from_snr_db(gains: Vec<f64>, snr_db: f64) -> Result<Self> {
        let n = gains.len();
        let phases = vec![0.0; n];
        let power = n as f64 * crate::math::db_to_linear(snr_db);
        Self::new(gains, phases, 1.0, power)
    }

    pub fn gains(&self) -> &[f64] {
        &self.gains
    }

    pub fn phases(&self) -> &[f64] {
        &self.phases
    }

    pub fn noise_var(&self) -> f64 {
        self.noise_var
    }

    pub fn power_budget(&self) -> f64 {
        self.power_budget
    }

    pub fn n(&self) -> usize {
        self.gains.len()
    }

    /// Average transmit SNR per subcarrier, `P / (N sigma^2)`, in dB.
    pub fn snr_db(&self) -> f64 {
        crate::math::linear_to_db(self.power_budget / (self.n() as f64 * self.noise_var))
    }

    pub fn with_phases(mut self, phases: Vec<f64>) -> Result<Self> {
        if phases.len() != self.gains.len() {
            return Err(Error::InvalidArgument(
                "phase vector length mismatch".into(),
            ));
        }
        self.phases = phases;
        Ok(self)
    }

    /// Loads from JSON: `{"gains": [...], "phases": [...]?,`
    /// `"noise_var": x | "snr_db": x, "power_budget": P?}`. With `snr_db`
    /// the budget, unless given, follows from `SNR = P/(N sigma^2)` with
    /// unit noise.
    pub fn from_json(text: &str) -> Result<Self> {
        #[derive(Deserialize)]
        struct Doc {
            gains: Vec<f64>,
            phases: Option<Vec<f64>>,
            noise_var: Option<f64>,
            snr_db: Option<f64>,
            power_budget: Option<f64>,
        }
        let doc: Doc =
            serde_json::from_str(text).map_err(|e| Error::Parse(format!("channel JSON: {e}")))?;
        let n = doc.gains.len();
        let phases = doc.phases.unwrap_or_else(|| vec![0.0; n]);
        let (noise_var, power) = match (doc.noise_var, doc.snr_db, doc.power_budget) {
            (Some(nv), None, Some(p)) => (nv, p),
            (None, Some(snr), p) => {
                let power = p.unwrap_or(n as f64 * crate::math::db_to_linear(snr));
                (power / (n as f64 * crate::math::db_to_linear(snr)), power)
            }
            _ => {
                return Err(Error::Parse(
                    "specify either noise_var with power_budget, or snr_db".into(),
                ))
            }
        };
        Self::new(doc.gains, phases, noise_var, power)
    }

    /// Loads per-subcarrier rows `gain[,phase]` (optional `gain,phase`
    /// header) plus an explicit noise/power choice.
    pub fn from_csv(text: &str, noise: NoiseSpec, power_budget: Option<f64>) -> Result<Self> {
        let mut gains = Vec::new();
        let mut phases = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            if lineno == 0 && line.chars().next().is_some_and(|c| c.is_alphabetic()) {
                continue; // header
            }
            let mut parts = line.split(',');
            let gain: f64 = parts
                .next()
                .unwrap()
                .trim()
                .parse()
                .map_err(|e| Error::Parse(format!("line {}: {e}", lineno + 1)))?;
            let phase = match parts.next() {
                Some(p) => p
                    .trim()
                    .parse()
                    .map_err(|e| Error::Parse(format!("line {}: {e}", lineno + 1)))?,
                None => 0.0,
            };
            gains.push(gain);
            phases.push(phase);
        }
        let n = gains.len();
        let (noise_var, power) = match noise {
            NoiseSpec::NoiseVar(nv) => {
                let p = power_budget.ok_or_else(|| {
                    Error::Parse("power_budget required with an explicit noise variance".into())
                })?;
                (nv, p)
            }
            NoiseSpec::SnrDb(snr) => {
                let power = power_budget.unwrap_or(n as f64 * crate::math::db_to_linear(snr));
                (power / (n as f64 * crate::math::db_to_linear(snr)), power)
            }
        };
        Self::new(gains, phases, noise_var, power)
    }
}

/// How the noise level is specified when loading a channel state.
#[derive(Clone, Copy, Debug)]
pub enum NoiseSpec {
    NoiseVar(f64),
    /// Average transmit SNR per subcarrier in dB, `SNR = P/(N sigma^2)`.
    SnrDb(f64),
}

/// Exponentially decaying gain profile `g_l = eta^(l-1)`.
pub fn exp_decay_gains(n: usize, eta: f64) -> Result<Vec<f64>> {
    if !(eta > 0.0 && eta <= 1.0) {
        return Err(Error::InvalidArgument(format!(
            "eta must lie in (0, 1], got {eta}"
        )));
    }
    Ok((0..n).map(|l| eta.powi(l as i32)).collect())
}

/// Per-pattern, per-subcarrier transmit powers `rho[i][l]`, zero off the
/// pattern support with each row within the power budget.
#[derive(Clone, Debug, PartialEq)]
pub struct PowerMatrix {
    rho: Vec<Vec<f64>>,
}

impl PowerMatrix {
    /// Validates support and budget against the catalog and state.
    pub fn new(rho: Vec<Vec<f64>>, catalog: &SapCatalog, state: &ChannelState) -> Result<Self> {
        if rho.len() != catalog.len() {
            return Err(Error::InvalidArgument(format!(
                "power matrix has {} rows for {} patterns",
                rho.len(),
                catalog.len()
            )));
        }
        for (i, row) in rho.iter().enumerate() {
            if row.len() != catalog.n() {
                return Err(Error::InvalidArgument(format!(
                    "power row {i} has length {} for {} subcarriers",
                    row.len(),
                    catalog.n()
                )));
            }
            let mut sum = 0.0;
            for (l, &p) in row.iter().enumerate() {
                if !(p >= 0.0) || !p.is_finite() {
                    return Err(Error::InvalidArgument(format!(
                        "negative or nonfinite power at pattern {i}, subcarrier {l}"
                    )));
                }
                if p > 0.0 && !catalog.is_active(i, l) {
                    return Err(Error::InvalidArgument(format!(
                        "power on inactive subcarrier {l} of pattern {i}"
                    )));
                }
                sum += p;
            }
            if sum > state.power_budget() + 1e-9 {
                return Err(Error::InvalidArgument(format!(
                    "pattern {i} power {sum} exceeds the budget {}",
                    state.power_budget()
                )));
            }
        }
        Ok(Self { rho })
    }

    /// Uniform allocation: `P/K` on each active subcarrier.
    pub fn uniform(catalog: &SapCatalog, state: &ChannelState, k: usize) -> Self {
        let per = state.power_budget() / k as f64;
        let rho = (0..catalog.len())
            .map(|i| {
                (0..catalog.n())
                    .map(|l| if catalog.is_active(i, l) { per } else { 0.0 })
                    .collect()
            })
            .collect();
        Self { rho }
    }

    pub fn rho(&self, i: usize, l: usize) -> f64 {
        self.rho[i][l]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.rho[i]
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.rho
    }

    /// Received per-subcarrier variances `xi[i][l] = g_l rho_li + sigma^2`
    /// on active subcarriers, `sigma^2` elsewhere.
    pub fn xi_matrix(&self, catalog: &SapCatalog, state: &ChannelState) -> Vec<Vec<f64>> {
        let s2 = state.noise_var();
        self.rho
            .iter()
            .enumerate()
            .map(|(i, row)| {
                row.iter()
                    .enumerate()
                    .map(|(l, &p)| {
                        if catalog.is_active(i, l) {
                            state.gains()[l] * p + s2
                        } else {
                            s2
                        }
                    })
                    .collect()
            })
            .collect()
    }
}

/// `ln f_CN(t; nu) = -|t|^2/nu - ln(pi nu)` summed over the subcarriers:
/// the log density of the received vector conditioned on pattern `i`.
pub fn conditional_log_density(
    y: &[Complex64],
    i: usize,
    catalog: &SapCatalog,
    rho: &PowerMatrix,
    state: &ChannelState,
) -> f64 {
    debug_assert_eq!(y.len(), catalog.n());
    let s2 = state.noise_var();
    let mut acc = 0.0;
    for (l, yl) in y.iter().enumerate() {
        let nu = if catalog.is_active(i, l) {
            state.gains()[l] * rho.rho(i, l) + s2
        } else {
            s2
        };
        acc += -yl.norm_sqr() / nu - (std::f64::consts::PI * nu).ln();
    }
    acc
}

/// Log of the mixture density `f_Y(y) = sum_i p_i f_{Y|U=i}(y)`, evaluated
/// as a log-sum-exp; zero-probability components are skipped.
pub fn mixture_log_density(
    y: &[Complex64],
    p: &[f64],
    catalog: &SapCatalog,
    rho: &PowerMatrix,
    state: &ChannelState,
) -> Result<f64> {
    if p.len() != catalog.len() {
        return Err(Error::InvalidProbability(format!(
            "probability vector length {} for {} patterns",
            p.len(),
            catalog.len()
        )));
    }
    let terms: Vec<f64> = p
        .iter()
        .enumerate()
        .filter(|(_, &pi)| pi > 0.0)
        .map(|(i, &pi)| pi.ln() + conditional_log_density(y, i, catalog, rho, state))
        .collect();
    if terms.is_empty() {
        return Err(Error::EmptyMixture);
    }
    Ok(crate::math::logsumexp(&terms))
}

/// Draws `U ~ p` and then the received vector `y` given `U`; the returned
/// pair is a deterministic function of the RNG state.
pub fn sample_output<R: Rng + ?Sized>(
    p: &[f64],
    catalog: &SapCatalog,
    rho: &PowerMatrix,
    state: &ChannelState,
    rng: &mut R,
) -> (usize, Vec<Complex64>) {
    debug_assert!(check_simplex(p, 1e-6).is_ok());
    let mut cum = Vec::with_capacity(p.len());
    let mut acc = 0.0;
    for &pi in p {
        acc += pi;
        cum.push(acc);
    }
    let u = sample_categorical(rng, &cum);
    let y = sample_output_given(u, catalog, rho, state, rng);
    (u, y)
}

/// The received vector conditioned on pattern `u`. Conditionally Gaussian
/// inputs make `y_l ~ CN(0, g_l rho_lu + sigma^2)` on active subcarriers and
/// `CN(0, sigma^2)` elsewhere; the samples are drawn through the physical
/// `sqrt(g) e^{j theta} x + z` form so moments can be checked against it.
pub fn sample_output_given<R: Rng + ?Sized>(
    u: usize,
    catalog: &SapCatalog,
    rho: &PowerMatrix,
    state: &ChannelState,
    rng: &mut R,
) -> Vec<Complex64> {
    let s2 = state.noise_var();
    (0..catalog.n())
        .map(|l| {
            let z = complex_normal(rng, s2);
            if catalog.is_active(u, l) {
                let x = complex_normal(rng, rho.rho(u, l));
                let h = state.gains()[l].sqrt() * Complex64::new(0.0, state.phases()[l]).exp();
                h * x + z
            } else {
                z
            }
        })
        .collect()
}
