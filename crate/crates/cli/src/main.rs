//! `treeim`: command-line experiments for tree-encoded index modulation.
//!
//! Subcommands mirror the library surface: `trees` tabulates the reduced
//! tree sets and their bounds, `project` runs the relaxation projection,
//! `mi-curve` sweeps mutual-information methods over an SNR grid, `bler`
//! runs the ML-detection error study, and `optimize` solves the constrained
//! problem at one operating point. All CSV output carries a trailing
//! metadata comment with the canonical invocation, seed, and version, and
//! stochastic runs are byte-identical for a fixed seed and thread count.

use std::fmt::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand};

use treeim_core::channel_model::{
    exp_decay_gains, ChannelState, PowerMatrix, SapCatalog, SystemConfig,
};
use treeim_core::link_sim::{run_bler, BlerSpec, CodebookMode, ConstellationKind};
use treeim_core::mapping::{project_with_report, DistanceMetric};
use treeim_core::rate_opt::{
    allocate_powers_per_sap, high_snr_probs, jensen_lower_bound, jensen_optimal_probs,
    low_snr_probs, mi_monte_carlo, solve_constrained_enumerative, solve_constrained_projected,
    upper_bound_mu, ObjectiveMode, RelaxationSource, SolverOptions,
};
use treeim_core::rng::derive_seed;
use treeim_core::tree_core::{catalan, loose_bound, reduced_sets_up_to, tight_bound_recurrence};

const VERSION: &str = env!("CARGO_PKG_VERSION");
/// Partial results (a BLER point stopped at the block cap) exit with 3.
const EXIT_PARTIAL: u8 = 3;

#[derive(Parser)]
#[command(
    name = "treeim",
    version,
    about = "Tree-encoded index modulation experiments"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Tabulate reduced-set sizes, bounds, and Catalan numbers.
    Trees(TreesArgs),
    /// Project a relaxed probability vector onto the feasible set.
    Project(ProjectArgs),
    /// Mutual information vs. SNR for a set of methods.
    MiCurve(MiCurveArgs),
    /// Block-error rate vs. SNR under ML detection.
    Bler(BlerArgs),
    /// Solve the constrained problem at one SNR and print the solution.
    Optimize(OptimizeArgs),
}

#[derive(Args)]
struct TreesArgs {
    /// Largest number of internal nodes to tabulate.
    #[arg(long, default_value_t = 20)]
    v_max: usize,
    /// Allow v_max beyond the default guard of 20.
    #[arg(long)]
    force: bool,
    /// Output CSV path (stdout when omitted).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ProjectArgs {
    /// Relaxed probabilities, comma separated, summing to one.
    #[arg(long, value_delimiter = ',', required = true)]
    probs: Vec<f64>,
    /// Distance metric: euclidean, kl, or tv.
    #[arg(long, default_value = "euclidean")]
    metric: String,
    /// Optional CSV path for the candidate table.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Clone)]
struct ChannelArgs {
    /// Subcarriers per group.
    #[arg(long)]
    n: usize,
    /// Active subcarriers per group.
    #[arg(long)]
    k: usize,
    /// Exponential gain decay, g_l = eta^(l-1).
    #[arg(long, conflicts_with = "gains")]
    eta: Option<f64>,
    /// Explicit linear gains, comma separated.
    #[arg(long, value_delimiter = ',')]
    gains: Option<Vec<f64>>,
}

impl ChannelArgs {
    fn resolve(&self) -> treeim_core::Result<(SystemConfig, SapCatalog, Vec<f64>)> {
        let config = SystemConfig::new(self.n, self.k)?;
        let catalog = SapCatalog::new(&config);
        let gains = match (&self.gains, self.eta) {
            (Some(g), None) => {
                if g.len() != self.n {
                    return Err(treeim_core::Error::InvalidArgument(format!(
                        "{} gains given for N = {}",
                        g.len(),
                        self.n
                    )));
                }
                g.clone()
            }
            (None, Some(eta)) => exp_decay_gains(self.n, eta)?,
            (None, None) => {
                return Err(treeim_core::Error::InvalidArgument(
                    "specify --eta or --gains".into(),
                ))
            }
            (Some(_), Some(_)) => unreachable!("clap conflicts_with"),
        };
        Ok((config, catalog, gains))
    }

    fn describe(&self) -> String {
        let mut s = format!("--n {} --k {}", self.n, self.k);
        if let Some(eta) = self.eta {
            let _ = write!(s, " --eta {eta}");
        }
        if let Some(gains) = &self.gains {
            let _ = write!(s, " --gains {}", join_floats(gains));
        }
        s
    }
}

#[derive(Args)]
struct MiCurveArgs {
    #[command(flatten)]
    channel: ChannelArgs,
    /// SNR grid in dB: "start:step:stop", a comma list, or one value.
    #[arg(long, allow_hyphen_values = true)]
    snr_db: String,
    /// Comma-separated method tags (default: every method).
    #[arg(long, value_delimiter = ',')]
    methods: Option<Vec<String>>,
    /// Monte Carlo samples per estimate (0 allowed for closed-form-only
    /// runs).
    #[arg(long, default_value_t = 100_000)]
    samples: usize,
    /// Bank size for the enumerative solver's Monte Carlo objective.
    #[arg(long, default_value_t = 20_000)]
    objective_samples: usize,
    #[arg(long)]
    seed: u64,
    /// Worker/partition count; results depend on it deterministically.
    #[arg(long, default_value_t = 1)]
    threads: usize,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct BlerArgs {
    #[command(flatten)]
    channel: ChannelArgs,
    /// SNR grid in dB: "start:step:stop", a comma list, or one value.
    #[arg(long, allow_hyphen_values = true)]
    snr_db: String,
    /// bpsk or qpsk.
    #[arg(long, default_value = "bpsk")]
    constellation: String,
    /// Comma-separated codebook modes (default: all three).
    #[arg(long, value_delimiter = ',')]
    modes: Option<Vec<String>>,
    /// Block-error events collected per SNR point.
    #[arg(long, default_value_t = 1_000)]
    target_errors: u64,
    /// Hard per-point block limit; hitting it flags the point partial.
    #[arg(long, default_value_t = 10_000_000)]
    block_cap: u64,
    /// Bank size for the per-SNR pattern-distribution optimization.
    #[arg(long, default_value_t = 20_000)]
    objective_samples: usize,
    #[arg(long)]
    seed: u64,
    #[arg(long, default_value_t = 1)]
    threads: usize,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct OptimizeArgs {
    #[command(flatten)]
    channel: ChannelArgs,
    /// Operating SNR in dB.
    #[arg(long, allow_hyphen_values = true)]
    snr_db: f64,
    /// projected or enumerative.
    #[arg(long, default_value = "projected")]
    solver: String,
    /// Projection metric: euclidean, kl, or tv.
    #[arg(long, default_value = "euclidean")]
    metric: String,
    /// Relaxation for the projected solver: high_snr or jensen_opt.
    #[arg(long, default_value = "high_snr")]
    relaxation: String,
    /// Enumerative objective: auto, high_snr, low_snr, or mc.
    #[arg(long, default_value = "auto")]
    objective: String,
    /// Uniform power allocation instead of per-pattern waterfilling.
    #[arg(long)]
    uniform_power: bool,
    #[arg(long, default_value_t = 200_000)]
    samples: usize,
    #[arg(long, default_value_t = 20_000)]
    objective_samples: usize,
    #[arg(long)]
    seed: u64,
    #[arg(long, default_value_t = 1)]
    threads: usize,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Trees(args) => cmd_trees(args),
        Command::Project(args) => cmd_project(args),
        Command::MiCurve(args) => cmd_mi_curve(args),
        Command::Bler(args) => cmd_bler(args),
        Command::Optimize(args) => cmd_optimize(args),
    };
    match outcome {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}

// ---------------------------------------------------------------------------
// Output plumbing
// ---------------------------------------------------------------------------

fn join_floats(xs: &[f64]) -> String {
    xs.iter()
        .map(|x| x.to_string())
        .collect::<Vec<_>>()
        .join(",")
}

/// Writes the finished document to the path or stdout.
fn emit(out: &Option<PathBuf>, body: &str) -> treeim_core::Result<()> {
    match out {
        Some(path) => std::fs::write(path, body)
            .map_err(|e| treeim_core::Error::InvalidArgument(format!("writing {path:?}: {e}"))),
        None => {
            print!("{body}");
            Ok(())
        }
    }
}

fn metadata_line(invocation: &str) -> String {
    format!("# invocation=\"{invocation}\" version={VERSION}\n")
}

/// Parses "start:step:stop" (inclusive of stop when it lands on the grid),
/// a comma-separated list, or a single value.
fn parse_snr_grid(s: &str) -> treeim_core::Result<Vec<f64>> {
    let parse = |t: &str| {
        t.trim()
            .parse::<f64>()
            .map_err(|e| treeim_core::Error::Parse(format!("bad SNR value {t:?}: {e}")))
    };
    if s.contains(':') {
        let parts: Vec<&str> = s.split(':').collect();
        if parts.len() != 3 {
            return Err(treeim_core::Error::Parse(format!(
                "SNR grid {s:?} must be start:step:stop"
            )));
        }
        let (start, step, stop) = (parse(parts[0])?, parse(parts[1])?, parse(parts[2])?);
        if step <= 0.0 || stop < start {
            return Err(treeim_core::Error::Parse(
                "SNR grid needs step > 0 and stop >= start".into(),
            ));
        }
        let mut grid = Vec::new();
        let mut k = 0u32;
        loop {
            let value = start + f64::from(k) * step;
            if value > stop + 1e-9 * step {
                break;
            }
            grid.push(value);
            k += 1;
        }
        Ok(grid)
    } else {
        let grid: treeim_core::Result<Vec<f64>> = s.split(',').map(parse).collect();
        let grid = grid?;
        if grid.is_empty() {
            return Err(treeim_core::Error::Parse("empty SNR grid".into()));
        }
        Ok(grid)
    }
}

fn init_thread_pool(threads: usize) {
    // later calls are no-ops; partition counts, not the pool, drive results
    let _ = rayon::ThreadPoolBuilder::new()
        .num_threads(threads.max(1))
        .build_global();
}

// ---------------------------------------------------------------------------
// trees
// ---------------------------------------------------------------------------

fn cmd_trees(args: TreesArgs) -> treeim_core::Result<ExitCode> {
    if args.v_max > 20 && !args.force {
        return Err(treeim_core::Error::CapacityExceeded {
            what: "trees table v_max (pass --force to override)",
            value: args.v_max,
            max: 20,
        });
    }
    if args.v_max == 0 {
        return Err(treeim_core::Error::InvalidArgument(
            "v_max must be >= 1".into(),
        ));
    }
    let sets = reduced_sets_up_to(args.v_max)?;
    let tight = tight_bound_recurrence(args.v_max);
    let mut body = String::from("v,t_v,loose_bound,tight_bound,catalan\n");
    for (set, bound) in sets.iter().zip(&tight) {
        let v = set.v();
        let _ = writeln!(
            body,
            "{v},{},{},{},{}",
            set.len(),
            loose_bound(v),
            bound,
            catalan(v)
        );
    }
    let mut invocation = format!("treeim trees --v-max {}", args.v_max);
    if args.force {
        invocation.push_str(" --force");
    }
    body.push_str(&metadata_line(&invocation));
    emit(&args.out, &body)?;
    Ok(ExitCode::SUCCESS)
}

// ---------------------------------------------------------------------------
// project
// ---------------------------------------------------------------------------

fn cmd_project(args: ProjectArgs) -> treeim_core::Result<ExitCode> {
    let metric = DistanceMetric::from_str(&args.metric)?;
    let report = project_with_report(&args.probs, metric)?;
    println!("relaxed p' = ({})", join_floats(&args.probs));
    println!("metric     = {metric}");
    println!("candidates:");
    for (idx, cand) in report.candidates.iter().enumerate() {
        let marker = if idx == report.winner {
            " <- winner"
        } else {
            ""
        };
        println!(
            "  k={}: ({})  distance {}{marker}",
            cand.k,
            join_floats(&cand.vector.values()),
            cand.distance
        );
    }
    let winner = report.winner();
    println!("projected p* = ({})", join_floats(&winner.vector.values()));

    if args.out.is_some() {
        let mut body = String::from("k,candidate,distance,winner\n");
        for (idx, cand) in report.candidates.iter().enumerate() {
            let _ = writeln!(
                body,
                "{},\"{}\",{},{}",
                cand.k,
                join_floats(&cand.vector.values()),
                cand.distance,
                idx == report.winner
            );
        }
        let invocation = format!(
            "treeim project --probs {} --metric {}",
            join_floats(&args.probs),
            metric
        );
        body.push_str(&metadata_line(&invocation));
        emit(&args.out, &body)?;
    }
    Ok(ExitCode::SUCCESS)
}

// ---------------------------------------------------------------------------
// mi-curve
// ---------------------------------------------------------------------------

const ALL_METHODS: [&str; 11] = [
    "mc",
    "jensen",
    "jensen_opt",
    "high_snr",
    "low_snr",
    "upper",
    "enumerative",
    "projected_euclidean",
    "projected_kl",
    "projected_tv",
    "benchmark",
];

fn method_is_closed_form(tag: &str) -> bool {
    matches!(tag, "jensen" | "upper")
}

fn cmd_mi_curve(args: MiCurveArgs) -> treeim_core::Result<ExitCode> {
    init_thread_pool(args.threads);
    let (config, catalog, gains) = args.channel.resolve()?;
    let grid = parse_snr_grid(&args.snr_db)?;
    let methods: Vec<String> = match &args.methods {
        Some(m) => m.clone(),
        None => ALL_METHODS.iter().map(|s| s.to_string()).collect(),
    };
    for m in &methods {
        if !ALL_METHODS.contains(&m.as_str()) {
            return Err(treeim_core::Error::InvalidArgument(format!(
                "unknown method tag {m:?}"
            )));
        }
        if args.samples == 0 && !method_is_closed_form(m) {
            return Err(treeim_core::Error::InvalidArgument(format!(
                "method {m:?} needs --samples > 0"
            )));
        }
    }

    let mut body = String::from("snr_db,method,mi_nats,std_err,samples,seed\n");
    for (snr_idx, &snr_db) in grid.iter().enumerate() {
        let state = ChannelState::from_snr_db(gains.clone(), snr_db)?;
        let waterfilled = allocate_powers_per_sap(&catalog, &state)?;
        for (method_idx, method) in methods.iter().enumerate() {
            let row_seed = derive_seed(args.seed, ((snr_idx as u64) << 8) | method_idx as u64);
            let opts = SolverOptions {
                objective_samples: args.objective_samples,
                mi_samples: args.samples,
                seed: row_seed,
                partitions: args.threads,
                ..Default::default()
            };
            let row = match method.as_str() {
                "mc" => {
                    let p = vec![1.0 / config.c() as f64; config.c()];
                    let est = mi_monte_carlo(
                        &p,
                        &catalog,
                        &waterfilled,
                        &state,
                        args.samples,
                        row_seed,
                        args.threads,
                    )?;
                    Some((est.value, est.std_error, est.samples, est.seed))
                }
                "jensen" => {
                    let q = high_snr_probs(&catalog, &waterfilled, &state);
                    let bound = jensen_lower_bound(&q, &catalog, &waterfilled, &state);
                    Some((bound, 0.0, 0, args.seed))
                }
                "jensen_opt" => match jensen_optimal_probs(&catalog, &waterfilled, &state) {
                    Ok(p) => {
                        let est = mi_monte_carlo(
                            &p,
                            &catalog,
                            &waterfilled,
                            &state,
                            args.samples,
                            row_seed,
                            args.threads,
                        )?;
                        Some((est.value, est.std_error, est.samples, est.seed))
                    }
                    // singular matrix: the data point is omitted, as in the
                    // reference curves
                    Err(treeim_core::Error::SingularMatrix { .. }) => None,
                    Err(e) => return Err(e),
                },
                "high_snr" => {
                    let q = high_snr_probs(&catalog, &waterfilled, &state);
                    let est = mi_monte_carlo(
                        &q,
                        &catalog,
                        &waterfilled,
                        &state,
                        args.samples,
                        row_seed,
                        args.threads,
                    )?;
                    Some((est.value, est.std_error, est.samples, est.seed))
                }
                "low_snr" => {
                    let (r, _) = low_snr_probs(&catalog, &waterfilled, &state);
                    let est = mi_monte_carlo(
                        &r,
                        &catalog,
                        &waterfilled,
                        &state,
                        args.samples,
                        row_seed,
                        args.threads,
                    )?;
                    Some((est.value, est.std_error, est.samples, est.seed))
                }
                "upper" => {
                    let mu = upper_bound_mu(&catalog, &waterfilled, &state);
                    Some((mu, 0.0, 0, args.seed))
                }
                "enumerative" => {
                    let sol = solve_constrained_enumerative(&catalog, &state, None, &opts)?;
                    Some((sol.mi.value, sol.mi.std_error, sol.mi.samples, sol.mi.seed))
                }
                "projected_euclidean" | "projected_kl" | "projected_tv" => {
                    let metric = DistanceMetric::from_str(&method["projected_".len()..])?;
                    let sol = solve_constrained_projected(
                        &catalog,
                        &state,
                        metric,
                        RelaxationSource::HighSnr,
                        &opts,
                    )?;
                    let mi = sol.solution.mi;
                    Some((mi.value, mi.std_error, mi.samples, mi.seed))
                }
                "benchmark" => {
                    let used = 1usize << config.c().ilog2();
                    let mut p = vec![0.0; config.c()];
                    for slot in p.iter_mut().take(used) {
                        *slot = 1.0 / used as f64;
                    }
                    let uniform = PowerMatrix::uniform(&catalog, &state, config.k());
                    let est = mi_monte_carlo(
                        &p,
                        &catalog,
                        &uniform,
                        &state,
                        args.samples,
                        row_seed,
                        args.threads,
                    )?;
                    Some((est.value, est.std_error, est.samples, est.seed))
                }
                _ => unreachable!("validated above"),
            };
            if let Some((mi, std_err, samples, seed)) = row {
                let _ = writeln!(body, "{snr_db},{method},{mi},{std_err},{samples},{seed}");
            }
        }
    }

    let invocation = format!(
        "treeim mi-curve {} --snr-db {} --methods {} --samples {} --objective-samples {} --seed {} --threads {}",
        args.channel.describe(),
        args.snr_db,
        methods.join(","),
        args.samples,
        args.objective_samples,
        args.seed,
        args.threads
    );
    body.push_str(&metadata_line(&invocation));
    emit(&args.out, &body)?;
    Ok(ExitCode::SUCCESS)
}

// ---------------------------------------------------------------------------
// bler
// ---------------------------------------------------------------------------

fn cmd_bler(args: BlerArgs) -> treeim_core::Result<ExitCode> {
    init_thread_pool(args.threads);
    let (_, catalog, gains) = args.channel.resolve()?;
    let grid = parse_snr_grid(&args.snr_db)?;
    let constellation = ConstellationKind::from_str(&args.constellation)?;
    let modes: Vec<CodebookMode> = match &args.modes {
        Some(tags) => tags
            .iter()
            .map(|t| CodebookMode::from_str(t))
            .collect::<treeim_core::Result<_>>()?,
        None => vec![
            CodebookMode::ConditionOne,
            CodebookMode::ConditionTwo,
            CodebookMode::Benchmark,
        ],
    };

    let mut any_partial = false;
    let mut body = String::from(
        "snr_db,mode,constellation,blocks,block_errors,bler,ci_low,ci_high,seed,partial\n",
    );
    for &mode in &modes {
        let spec = BlerSpec {
            snr_db_grid: grid.clone(),
            mode,
            constellation,
            target_errors: args.target_errors,
            block_cap: args.block_cap,
            objective_samples: args.objective_samples,
            seed: args.seed,
            partitions: args.threads,
        };
        for point in run_bler(&gains, &catalog, &spec)? {
            let (lo, hi) = point.wilson_ci();
            any_partial |= point.partial;
            let _ = writeln!(
                body,
                "{},{},{},{},{},{},{},{},{},{}",
                point.snr_db,
                mode.tag(),
                constellation.tag(),
                point.blocks,
                point.block_errors,
                point.bler,
                lo,
                hi,
                args.seed,
                point.partial
            );
        }
    }

    let invocation = format!(
        "treeim bler {} --snr-db {} --constellation {} --modes {} --target-errors {} --block-cap {} --objective-samples {} --seed {} --threads {}",
        args.channel.describe(),
        args.snr_db,
        constellation.tag(),
        modes.iter().map(|m| m.tag()).collect::<Vec<_>>().join(","),
        args.target_errors,
        args.block_cap,
        args.objective_samples,
        args.seed,
        args.threads
    );
    body.push_str(&metadata_line(&invocation));
    emit(&args.out, &body)?;
    Ok(if any_partial {
        ExitCode::from(EXIT_PARTIAL)
    } else {
        ExitCode::SUCCESS
    })
}

// ---------------------------------------------------------------------------
// optimize
// ---------------------------------------------------------------------------

fn cmd_optimize(args: OptimizeArgs) -> treeim_core::Result<ExitCode> {
    init_thread_pool(args.threads);
    let (config, catalog, gains) = args.channel.resolve()?;
    let state = ChannelState::from_snr_db(gains, args.snr_db)?;
    let metric = DistanceMetric::from_str(&args.metric)?;
    let mode = match args.objective.as_str() {
        "auto" => ObjectiveMode::Auto,
        "high_snr" => ObjectiveMode::HighSnr,
        "low_snr" => ObjectiveMode::LowSnr,
        "mc" => ObjectiveMode::Mc,
        other => {
            return Err(treeim_core::Error::InvalidArgument(format!(
                "unknown objective {other:?}"
            )))
        }
    };
    let opts = SolverOptions {
        mode,
        objective_samples: args.objective_samples,
        mi_samples: args.samples,
        uniform_power: args.uniform_power,
        seed: args.seed,
        partitions: args.threads,
    };

    let (solution, note) = match args.solver.as_str() {
        "enumerative" => (
            solve_constrained_enumerative(&catalog, &state, None, &opts)?,
            String::new(),
        ),
        "projected" => {
            let source = match args.relaxation.as_str() {
                "high_snr" => RelaxationSource::HighSnr,
                "jensen_opt" => RelaxationSource::JensenOpt,
                other => {
                    return Err(treeim_core::Error::InvalidArgument(format!(
                        "unknown relaxation {other:?}"
                    )))
                }
            };
            let projected = solve_constrained_projected(&catalog, &state, metric, source, &opts)?;
            let mut note = format!("relaxed p' = ({})\n", join_floats(&projected.relaxed));
            if projected.used_fallback {
                note.push_str("note: Jensen matrix singular; high-SNR relaxation used\n");
            }
            (projected.solution, note)
        }
        other => {
            return Err(treeim_core::Error::InvalidArgument(format!(
                "unknown solver {other:?}"
            )))
        }
    };

    print!("{note}");
    println!("p* = ({})", join_floats(&solution.probs.values()));
    println!("powers (pattern x subcarrier):");
    for i in 0..config.c() {
        let set: Vec<String> = catalog.set(i).iter().map(|l| (l + 1).to_string()).collect();
        println!(
            "  pattern {} {{{}}}: ({})",
            i + 1,
            set.join(","),
            join_floats(solution.powers.row(i))
        );
    }
    println!(
        "mi = {} nats (std err {}, {} samples, seed {})",
        solution.mi.value, solution.mi.std_error, solution.mi.samples, solution.mi.seed
    );

    if args.out.is_some() {
        let mut body = String::from("sap,probability,powers\n");
        let values = solution.probs.values();
        for i in 0..config.c() {
            let _ = writeln!(
                body,
                "{},{},\"{}\"",
                i + 1,
                values[i],
                join_floats(solution.powers.row(i))
            );
        }
        let _ = writeln!(
            body,
            "# mi={} std_err={} samples={} seed={}",
            solution.mi.value, solution.mi.std_error, solution.mi.samples, solution.mi.seed
        );
        let invocation = format!(
            "treeim optimize {} --snr-db {} --solver {} --metric {} --relaxation {} --objective {} --samples {} --objective-samples {} --seed {} --threads {}{}",
            args.channel.describe(),
            args.snr_db,
            args.solver,
            args.metric,
            args.relaxation,
            args.objective,
            args.samples,
            args.objective_samples,
            args.seed,
            args.threads,
            if args.uniform_power { " --uniform-power" } else { "" }
        );
        body.push_str(&metadata_line(&invocation));
        emit(&args.out, &body)?;
    }
    Ok(ExitCode::SUCCESS)
}
