//! Acceptance suite: one test per criterion, each printing a PASS line on
//! success (failures surface as ordinary test failures).
//!
//! Run with `cargo test -p treeim-cli --test acceptance -- --nocapture`.

use std::collections::BTreeSet;
use std::process::Command;
use std::time::{Duration, Instant};

use num_bigint::BigUint;
use rand::Rng;
use treeim_core::channel_model::{
    exp_decay_gains, ChannelState, PowerMatrix, SapCatalog, SystemConfig,
};
use treeim_core::link_sim::{run_bler, BlerPoint, BlerSpec, CodebookMode, ConstellationKind};
use treeim_core::mapping::{project_to_feasible, DistanceMetric};
use treeim_core::rate_opt::{
    allocate_powers_per_sap, bcd_optimize, high_snr_probs, jensen_lower_bound, low_snr_probs,
    mi_monte_carlo, pattern_capacity_scores, perturbed_uniform, solve_constrained_enumerative,
    solve_constrained_projected, upper_bound_mu, BcdOptions, MiEstimate, ObjectiveMode,
    RelaxationSource, SolverOptions,
};
use treeim_core::rng::stream_rng;
use treeim_core::tree_core::{
    build_feasible_set, catalan, feasible_class_size, loose_bound, reduced_sets_up_to,
    DyadicProbabilityVector,
};

const PARTITIONS: usize = 8;

fn pass(criterion: u32, detail: &str) {
    println!("acceptance {criterion:02}: PASS - {detail}");
}

fn system(n: usize, k: usize, eta: f64, snr_db: f64) -> (SapCatalog, ChannelState) {
    let config = SystemConfig::new(n, k).unwrap();
    let catalog = SapCatalog::new(&config);
    let state = ChannelState::from_snr_db(exp_decay_gains(n, eta).unwrap(), snr_db).unwrap();
    (catalog, state)
}

fn treeim_binary() -> Command {
    Command::new(env!("CARGO_BIN_EXE_treeim"))
}

// ---------------------------------------------------------------------------
// 1. tree enumeration: speed, recurrence exactness, bound chain, paper values
// ---------------------------------------------------------------------------

#[test]
fn acceptance_01_tree_enumeration() {
    let start = Instant::now();
    let out = treeim_binary()
        .args(["trees", "--v-max", "20"])
        .output()
        .expect("binary runs");
    let elapsed = start.elapsed();
    assert!(out.status.success());
    assert!(
        elapsed < Duration::from_secs(10),
        "cmd_trees(20) took {elapsed:?}"
    );

    let text = String::from_utf8(out.stdout).unwrap();
    let mut rows = Vec::new();
    for line in text.lines().skip(1).filter(|l| !l.starts_with('#')) {
        let f: Vec<BigUint> = line.split(',').map(|t| t.parse().unwrap()).collect();
        rows.push(f);
    }
    assert_eq!(rows.len(), 20);
    for row in &rows {
        let (v, t, loose, tight, cat) = (&row[0], &row[1], &row[2], &row[3], &row[4]);
        let v_usize = usize::try_from(v).unwrap();
        assert!(t <= tight, "T_v > tight bound at v = {v}");
        assert!(tight <= loose, "tight > loose at v = {v}");
        assert!(loose <= cat, "loose > catalan at v = {v}");
        if v_usize <= 9 {
            assert_eq!(t, tight, "recurrence not exact at v = {v}");
        }
        assert_eq!(*loose, loose_bound(v_usize));
        assert_eq!(*cat, catalan(v_usize));
    }
    assert_eq!(rows[2][1], BigUint::from(2u32), "T_3");
    assert_eq!(rows[2][4], BigUint::from(5u32), "c_3");
    pass(
        1,
        &format!("20-row table in {elapsed:?}, T_v = recurrence through v = 9"),
    );
}

// ---------------------------------------------------------------------------
// 2. construction equals brute-force profile deduplication for v <= 7
// ---------------------------------------------------------------------------

fn ordered_tree_profiles(v: usize) -> Vec<Vec<u32>> {
    if v == 0 {
        return vec![vec![1]];
    }
    let mut out = Vec::new();
    for left_v in 0..v {
        for left in ordered_tree_profiles(left_v) {
            for right in ordered_tree_profiles(v - 1 - left_v) {
                let depth = left.len().max(right.len()) + 1;
                let mut merged = vec![0u32; depth];
                for (d, &n) in left.iter().enumerate() {
                    merged[d + 1] += n;
                }
                for (d, &n) in right.iter().enumerate() {
                    merged[d + 1] += n;
                }
                out.push(merged);
            }
        }
    }
    out
}

#[test]
fn acceptance_02_brute_force_oracle_equivalence() {
    let start = Instant::now();
    let sets = reduced_sets_up_to(7).unwrap();
    for set in &sets {
        let v = set.v();
        let all = ordered_tree_profiles(v);
        assert_eq!(BigUint::from(all.len() as u64), catalan(v));
        let brute: BTreeSet<Vec<u32>> = all.into_iter().map(|p| p[1..].to_vec()).collect();
        let constructed: BTreeSet<Vec<u32>> = set
            .trees()
            .iter()
            .map(|t| t.leaf_counts().to_vec())
            .collect();
        assert_eq!(constructed, brute, "set mismatch at v = {v}");
    }
    let elapsed = start.elapsed();
    assert!(elapsed < Duration::from_secs(60));
    pass(2, &format!("exact set equality for v <= 7 in {elapsed:?}"));
}

// ---------------------------------------------------------------------------
// 3. Fig. 7 projection golden values
// ---------------------------------------------------------------------------

#[test]
fn acceptance_03_projection_golden() {
    let p = [0.51, 0.26, 0.18, 0.05];
    let expect = |values: &[f64]| {
        let exps = values
            .iter()
            .map(|&v| (v > 0.0).then(|| (-v.log2()).round() as u8))
            .collect();
        DyadicProbabilityVector::from_exponents(exps).unwrap()
    };
    assert_eq!(
        project_to_feasible(&p, DistanceMetric::Euclidean).unwrap(),
        expect(&[0.5, 0.25, 0.25, 0.0])
    );
    assert_eq!(
        project_to_feasible(&p, DistanceMetric::TotalVariation).unwrap(),
        expect(&[0.5, 0.25, 0.25, 0.0])
    );
    assert_eq!(
        project_to_feasible(&p, DistanceMetric::Kl).unwrap(),
        expect(&[0.5, 0.25, 0.125, 0.125])
    );
    pass(
        3,
        "(0.5,0.25,0.25,0) euclidean/tv and (0.5,0.25,0.125,0.125) kl",
    );
}

// ---------------------------------------------------------------------------
// 4. feasible-set cardinalities against the exhaustive dyadic oracle
// ---------------------------------------------------------------------------

fn dyadic_composition_oracle(c: usize) -> BTreeSet<Vec<Option<u8>>> {
    fn recurse(
        c: usize,
        q_cap: u8,
        remaining: u128,
        current: &mut Vec<Option<u8>>,
        out: &mut BTreeSet<Vec<Option<u8>>>,
    ) {
        if current.len() == c {
            if remaining == 0 {
                out.insert(current.clone());
            }
            return;
        }
        current.push(None);
        recurse(c, q_cap, remaining, current, out);
        current.pop();
        for q in 0..=q_cap {
            let w = 1u128 << (q_cap - q);
            if w <= remaining {
                current.push(Some(q));
                recurse(c, q_cap, remaining - w, current, out);
                current.pop();
            }
        }
    }
    let q_cap = (2 * c) as u8;
    let mut out = BTreeSet::new();
    recurse(c, q_cap, 1 << q_cap, &mut Vec::new(), &mut out);
    out
}

#[test]
fn acceptance_04_feasible_set_cardinality() {
    assert_eq!(feasible_class_size(4, 2).unwrap(), BigUint::from(12u32));
    for c in 2..=6 {
        let feasible: BTreeSet<Vec<Option<u8>>> = build_feasible_set(c)
            .unwrap()
            .iter()
            .map(|p| p.exponents().to_vec())
            .collect();
        assert_eq!(
            feasible,
            dyadic_composition_oracle(c),
            "mismatch at c = {c}"
        );
    }
    pass(
        4,
        "|P_2| = 12 for C = 4; exhaustive oracle equality for C <= 6",
    );
}

// ---------------------------------------------------------------------------
// 5. bound ordering over 100 seeded random configurations
// ---------------------------------------------------------------------------

#[test]
fn acceptance_05_bound_ordering() {
    let start = Instant::now();
    let etas = [0.2, 0.7, 1.0];
    let snrs = [-10.0, 0.0, 10.0, 30.0];
    let mut rng = stream_rng(0xACC5, 0);
    for case in 0..100u64 {
        let eta = etas[(case % 3) as usize];
        let snr = snrs[((case / 3) % 4) as usize];
        let (catalog, state) = system(4, 2, eta, snr);
        let rho = allocate_powers_per_sap(&catalog, &state).unwrap();
        let raw: Vec<f64> = (0..6)
            .map(|_| -rng.random::<f64>().max(1e-12).ln())
            .collect();
        let sum: f64 = raw.iter().sum();
        let p: Vec<f64> = raw.iter().map(|x| x / sum).collect();

        let bound = jensen_lower_bound(&p, &catalog, &rho, &state);
        let est =
            mi_monte_carlo(&p, &catalog, &rho, &state, 100_000, 1000 + case, PARTITIONS).unwrap();
        assert!(
            bound <= est.value + 3.0 * est.std_error,
            "case {case} (eta {eta}, {snr} dB): jensen {bound} > {} + 3s",
            est.value
        );

        let q = high_snr_probs(&catalog, &rho, &state);
        let mu = upper_bound_mu(&catalog, &rho, &state);
        let est_q =
            mi_monte_carlo(&q, &catalog, &rho, &state, 100_000, 2000 + case, PARTITIONS).unwrap();
        assert!(
            est_q.value <= mu + 3.0 * est_q.std_error,
            "case {case}: MI(q) {} > mu {mu} + 3s",
            est_q.value
        );
    }
    let elapsed = start.elapsed();
    assert!(elapsed < Duration::from_secs(600), "took {elapsed:?}");
    pass(5, &format!("100 configs x 1e5 samples in {elapsed:?}"));
}

// ---------------------------------------------------------------------------
// 6. asymptotic tightness at both SNR extremes
// ---------------------------------------------------------------------------

#[test]
fn acceptance_06_asymptotic_tightness() {
    let gap_at = |snr: f64, seed: u64| {
        let (catalog, state) = system(4, 2, 0.2, snr);
        let rho = allocate_powers_per_sap(&catalog, &state).unwrap();
        let q = high_snr_probs(&catalog, &rho, &state);
        let mu = upper_bound_mu(&catalog, &rho, &state);
        let est = mi_monte_carlo(&q, &catalog, &rho, &state, 100_000, seed, PARTITIONS).unwrap();
        mu - est.value
    };
    let gap_10 = gap_at(10.0, 61);
    let gap_30 = gap_at(30.0, 62);
    assert!(
        gap_30 < gap_10,
        "upper-bound gap did not shrink: {gap_30} at 30 dB vs {gap_10} at 10 dB"
    );

    let (catalog, state) = system(4, 2, 0.2, -20.0);
    let rho = allocate_powers_per_sap(&catalog, &state).unwrap();
    let (r, i_star) = low_snr_probs(&catalog, &rho, &state);
    let closed = pattern_capacity_scores(&catalog, &rho, &state)[i_star];
    let est = mi_monte_carlo(&r, &catalog, &rho, &state, 400_000, 63, PARTITIONS).unwrap();
    assert!(
        (est.value - closed).abs() < 3.0 * est.std_error,
        "low-SNR equivalence: {} vs {closed} (3s = {})",
        est.value,
        3.0 * est.std_error
    );
    pass(
        6,
        &format!(
            "gap {gap_30:.4} @30dB < {gap_10:.4} @10dB; low-SNR dev {:.4}",
            est.value - closed
        ),
    );
}

// ---------------------------------------------------------------------------
// 7. BCD reaches the uniform optimum on equal-gain channels
// ---------------------------------------------------------------------------

#[test]
fn acceptance_07_equal_gain_bcd_optimum() {
    for (n, k) in [(3usize, 1usize), (4, 2)] {
        let config = SystemConfig::new(n, k).unwrap();
        let catalog = SapCatalog::new(&config);
        let state = ChannelState::from_snr_db(vec![1.0; n], 10.0).unwrap();
        let uniform_rho = PowerMatrix::uniform(&catalog, &state, k);
        let c = config.c();
        for init in [None, Some(perturbed_uniform(c, 0, 0.35))] {
            let start = Instant::now();
            let opts = BcdOptions {
                bank_samples: 30_000,
                optimize_powers: false,
                init_powers: Some(uniform_rho.clone()),
                init_probs: init.clone(),
                mi_samples: 20_000,
                seed: 71,
                partitions: PARTITIONS,
                ..Default::default()
            };
            let res = bcd_optimize(&catalog, &state, &opts).unwrap();
            let elapsed = start.elapsed();
            assert!(
                elapsed < Duration::from_secs(300),
                "case ({n},{k}) took {elapsed:?}"
            );
            let dev = res
                .probs
                .iter()
                .map(|x| (x - 1.0 / c as f64).abs())
                .fold(0.0, f64::max);
            assert!(
                dev <= 1e-2,
                "({n},{k}) init {init:?}: max deviation {dev} from uniform"
            );
        }
    }
    pass(
        7,
        "N = 3 and N = 4 reach uniform p within 1e-2 from both starts",
    );
}

// ---------------------------------------------------------------------------
// 8. constrained vs relaxed at high SNR
// ---------------------------------------------------------------------------

/// NOTE: this criterion is not fully attainable at eta = 0.2 and fails
/// honestly (see the decisions ledger). The dyadic feasibility constraint
/// itself costs 0.24 nats against the relaxed I(q) at 30 dB: even an
/// exhaustive search of the whole feasible set with a Monte Carlo
/// objective lands 0.239 nats below the relaxed rate (the one-hot
/// maximizer), so the 0.1-nat clause cannot hold there for any correct
/// implementation. The solver below runs in its spec-default mode (the
/// high-SNR closed-form objective at these SNRs); the assertions are kept
/// exactly as stated and the full measurements are printed either way.
#[test]
fn acceptance_08_constrained_vs_relaxed() {
    let mut violations = Vec::new();
    for (idx, snr) in [20.0, 30.0].into_iter().enumerate() {
        let (catalog, state) = system(4, 2, 0.2, snr);
        let rho = allocate_powers_per_sap(&catalog, &state).unwrap();
        let opts = SolverOptions {
            mode: ObjectiveMode::Auto,
            objective_samples: 100_000,
            mi_samples: 100_000,
            seed: 81 + idx as u64,
            partitions: PARTITIONS,
            ..Default::default()
        };
        let enumerative = solve_constrained_enumerative(&catalog, &state, None, &opts).unwrap();
        let projected = solve_constrained_projected(
            &catalog,
            &state,
            DistanceMetric::Euclidean,
            RelaxationSource::HighSnr,
            &opts,
        )
        .unwrap();

        let q = high_snr_probs(&catalog, &rho, &state);
        let relaxed = mi_monte_carlo(
            &q,
            &catalog,
            &rho,
            &state,
            100_000,
            880 + idx as u64,
            PARTITIONS,
        )
        .unwrap();

        let e = enumerative.mi;
        let p = projected.solution.mi;
        println!(
            "  {snr} dB: relaxed I(q) {:.4}({:.4}), enumerative {:.4}({:.4}) at {:?}, \
             projected {:.4}({:.4}) at {:?}",
            relaxed.value,
            relaxed.std_error,
            e.value,
            e.std_error,
            enumerative.probs.values(),
            p.value,
            p.std_error,
            projected.solution.probs.values()
        );

        // first clause: enumerative constrained MI within 0.1 nats of the
        // relaxed I(q)
        let gap = (e.value - relaxed.value).abs();
        if gap >= 0.1 {
            violations.push(format!(
                "{snr} dB: enumerative constrained MI is {gap:.4} nats from the relaxed I(q) \
                 (feasibility penalty; 0.239 nats is the exhaustive-search floor at 30 dB)"
            ));
        }

        // second clause: projected within 2 combined std errors of the
        // enumerative result at every grid point
        let margin = 2.0 * e.std_error.hypot(p.std_error);
        let diff = (e.value - p.value).abs();
        if diff > margin {
            violations.push(format!(
                "{snr} dB: |projected - enumerative| = {diff:.4} > 2 combined std errors \
                 ({margin:.4})"
            ));
        }
    }
    assert!(
        violations.is_empty(),
        "criterion 8 violations (see decisions ledger):\n  {}",
        violations.join("\n  ")
    );
    pass(
        8,
        "enumerative within 0.1 nats of relaxed; projected within 2 combined std errors",
    );
}

// ---------------------------------------------------------------------------
// 9. optimized design dominates the lexicographic benchmark
// ---------------------------------------------------------------------------

#[test]
fn acceptance_09_benchmark_dominance() {
    let mut margins = Vec::new();
    for (idx, snr) in [0.0, 10.0, 20.0, 30.0].into_iter().enumerate() {
        let (catalog, state) = system(4, 2, 0.2, snr);
        let opts = SolverOptions {
            mi_samples: 100_000,
            seed: 91 + idx as u64,
            partitions: PARTITIONS,
            ..Default::default()
        };
        let projected = solve_constrained_projected(
            &catalog,
            &state,
            DistanceMetric::Euclidean,
            RelaxationSource::HighSnr,
            &opts,
        )
        .unwrap()
        .solution
        .mi;

        let bench_p = [0.25, 0.25, 0.25, 0.25, 0.0, 0.0];
        let uniform = PowerMatrix::uniform(&catalog, &state, 2);
        let bench: MiEstimate = mi_monte_carlo(
            &bench_p,
            &catalog,
            &uniform,
            &state,
            100_000,
            990 + idx as u64,
            PARTITIONS,
        )
        .unwrap();

        let margin = 3.0 * projected.std_error.hypot(bench.std_error);
        assert!(
            projected.value > bench.value + margin,
            "{snr} dB: projected {} vs benchmark {} (3 combined s = {margin})",
            projected.value,
            bench.value
        );
        margins.push(projected.value - bench.value);
    }
    pass(
        9,
        &format!(
            "margins {:.3}/{:.3}/{:.3}/{:.3} nats at 0/10/20/30 dB",
            margins[0], margins[1], margins[2], margins[3]
        ),
    );
}

// ---------------------------------------------------------------------------
// 10. BLER properties under ML detection
// ---------------------------------------------------------------------------

fn interval_significantly_above(a: &BlerPoint, b: &BlerPoint) -> bool {
    a.wilson_ci().0 > b.wilson_ci().1
}

#[test]
fn acceptance_10_bler_properties() {
    let config = SystemConfig::new(4, 2).unwrap();
    let catalog = SapCatalog::new(&config);
    let gains = exp_decay_gains(4, 0.2).unwrap();
    for constellation in [ConstellationKind::Bpsk, ConstellationKind::Qpsk] {
        let start = Instant::now();
        let sweep = |mode| {
            let spec = BlerSpec {
                snr_db_grid: vec![0.0, 5.0, 10.0, 15.0, 20.0],
                mode,
                constellation,
                target_errors: 1_000,
                block_cap: 2_000_000,
                objective_samples: 20_000,
                seed: 101,
                partitions: PARTITIONS,
            };
            run_bler(&gains, &catalog, &spec).unwrap()
        };
        let c1 = sweep(CodebookMode::ConditionOne);
        let c2 = sweep(CodebookMode::ConditionTwo);
        let bench = sweep(CodebookMode::Benchmark);

        for points in [&c1, &c2, &bench] {
            for pair in points.windows(2) {
                assert!(
                    !interval_significantly_above(&pair[1], &pair[0]),
                    "{} BLER increased with SNR: {:?} -> {:?}",
                    constellation.tag(),
                    pair[0],
                    pair[1]
                );
            }
        }
        for (a, b) in c1.iter().zip(&c2) {
            assert!(
                !interval_significantly_above(a, b),
                "{} condition_one above condition_two at {} dB",
                constellation.tag(),
                a.snr_db
            );
        }
        let elapsed = start.elapsed();
        assert!(
            elapsed < Duration::from_secs(900),
            "{} took {elapsed:?}",
            constellation.tag()
        );
        println!("  {} sweeps in {elapsed:?}", constellation.tag());
    }

    // closed-form AWGN oracle: K = N = 1 BPSK block errors are symbol errors
    let config = SystemConfig::new(1, 1).unwrap();
    let catalog = SapCatalog::new(&config);
    let spec = BlerSpec {
        snr_db_grid: vec![3.0],
        mode: CodebookMode::ConditionOne,
        constellation: ConstellationKind::Bpsk,
        target_errors: 1_000,
        block_cap: 2_000_000,
        objective_samples: 1_000,
        seed: 105,
        partitions: PARTITIONS,
    };
    let point = &run_bler(&[1.0], &catalog, &spec).unwrap()[0];
    let snr = treeim_core::math::db_to_linear(3.0);
    let q = 0.5 * statrs::function::erf::erfc(snr.sqrt());
    let sigma = (q * (1.0 - q) / point.blocks as f64).sqrt();
    assert!(
        (point.bler - q).abs() < 3.0 * sigma,
        "AWGN oracle: {} vs {q} (3s = {})",
        point.bler,
        3.0 * sigma
    );
    pass(
        10,
        "monotone sweeps, condition_one <= condition_two, AWGN oracle",
    );
}

// ---------------------------------------------------------------------------
// 11. byte-identical reruns of every stochastic command
// ---------------------------------------------------------------------------

#[test]
fn acceptance_11_byte_identical_reruns() {
    let dir = tempfile::tempdir().unwrap();
    let run = |args: &[&str], path: &std::path::Path| {
        let status = treeim_binary()
            .args(args)
            .arg("--out")
            .arg(path)
            .status()
            .expect("binary runs");
        assert!(status.code() == Some(0) || status.code() == Some(3));
        std::fs::read(path).unwrap()
    };

    let mi_args = [
        "mi-curve",
        "--n",
        "4",
        "--k",
        "2",
        "--eta",
        "0.2",
        "--snr-db",
        "0:10:20",
        "--methods",
        "mc,upper,enumerative,projected_euclidean,benchmark",
        "--samples",
        "5000",
        "--objective-samples",
        "2000",
        "--seed",
        "202",
        "--threads",
        "4",
    ];
    let a = run(&mi_args, &dir.path().join("mi_a.csv"));
    let b = run(&mi_args, &dir.path().join("mi_b.csv"));
    assert_eq!(a, b, "mi-curve rerun differs");

    let bler_args = [
        "bler",
        "--n",
        "4",
        "--k",
        "2",
        "--eta",
        "0.2",
        "--snr-db",
        "0:10:10",
        "--constellation",
        "qpsk",
        "--target-errors",
        "50",
        "--block-cap",
        "20000",
        "--objective-samples",
        "2000",
        "--seed",
        "202",
        "--threads",
        "4",
    ];
    let a = run(&bler_args, &dir.path().join("bler_a.csv"));
    let b = run(&bler_args, &dir.path().join("bler_b.csv"));
    assert_eq!(a, b, "bler rerun differs");

    let opt_args = [
        "optimize",
        "--n",
        "4",
        "--k",
        "2",
        "--eta",
        "0.2",
        "--snr-db",
        "10",
        "--solver",
        "enumerative",
        "--objective",
        "mc",
        "--samples",
        "5000",
        "--objective-samples",
        "2000",
        "--seed",
        "202",
        "--threads",
        "4",
    ];
    let a = run(&opt_args, &dir.path().join("opt_a.csv"));
    let b = run(&opt_args, &dir.path().join("opt_b.csv"));
    assert_eq!(a, b, "optimize rerun differs");

    pass(11, "mi-curve, bler, and optimize reruns are byte-identical");
}
