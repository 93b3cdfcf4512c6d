//! `mklab` — one binary over the whole library: non-crossing partition
//! dumps, exact verification suites, Weingarten tables, and seeded Monte
//! Carlo concentration experiments.
//!
//! Conventions, stable for scripting:
//! - human-readable text goes to standard output; machine formats (JSON,
//!   CSV) go to files named by `--out` / `--out-prefix` only;
//! - every emitted file embeds the fully resolved configuration, seed
//!   included, so a run can be reproduced from its own output;
//! - exit codes: 0 everything passed, 1 a verification or precondition
//!   failure, 2 a runtime, numerical, or I/O failure;
//! - the environment variable `MKLAB_THREADS` caps worker parallelism
//!   (experiment trials are deterministic regardless of its value).

use clap::{Args, Parser, Subcommand};
use mklab_core::nc::{self, NonCrossingPartition};
use mklab_core::sim::{
    run_concentration_experiment, EnsembleFamily, EnsembleSpec, ExperimentResult, MomentRow,
    SimError,
};
use mklab_core::verify::{
    decomposition_count_suite, group_isomorphism_suite, mobius_suite, moment_identity_suite,
    weingarten_asymptotics_suite, SuiteReport,
};
use mklab_core::weingarten;
use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::str::FromStr;

const EXIT_PASS: u8 = 0;
const EXIT_VERIFY: u8 = 1;
const EXIT_RUNTIME: u8 = 2;

/// A command failure carrying the exit code it maps to.
struct Failure {
    code: u8,
    message: String,
}

fn usage(message: impl Into<String>) -> Failure {
    Failure {
        code: EXIT_VERIFY,
        message: message.into(),
    }
}

fn runtime(message: impl Into<String>) -> Failure {
    Failure {
        code: EXIT_RUNTIME,
        message: message.into(),
    }
}

type CmdResult = Result<u8, Failure>;

#[derive(Parser)]
#[command(
    name = "mklab",
    version,
    about = "Non-crossing partition combinatorics, Weingarten calculus, and \
             Rayleigh-measure concentration experiments"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Dump non-crossing partition data in canonical form
    Nc(NcArgs),
    /// Run an exact verification suite and exit 0 iff it passes
    Verify(VerifyArgs),
    /// Solve and print a Weingarten table
    Wg(WgArgs),
    /// Run a Monte Carlo concentration experiment
    Sim(SimArgs),
}

#[derive(Args)]
struct NcArgs {
    /// Ground-set size
    #[arg(long)]
    k: usize,
    /// Also write the result as JSON to this file
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    action: NcAction,
}

#[derive(Subcommand)]
enum NcAction {
    /// List NC(k), one partition per line, in enumeration order
    Enumerate,
    /// Kreweras complement of a partition
    Kreweras {
        /// Partition in canonical form, e.g. "{1,7|2,5,6|3|4|8,9}"
        #[arg(long)]
        partition: String,
    },
    /// All Kreweras decompositions of a partition, one per line
    Decompositions {
        #[arg(long)]
        partition: String,
    },
    /// Möbius value of the interval [nu, rho]
    Mobius {
        #[arg(long)]
        nu: String,
        #[arg(long)]
        rho: String,
    },
}

#[derive(Args)]
struct VerifyArgs {
    #[command(subcommand)]
    suite: SuiteCmd,
}

#[derive(Subcommand)]
enum SuiteCmd {
    /// Rayleigh-moment identity: lattice sum vs recursion vs complement route
    MomentIdentity {
        #[arg(long, default_value_t = 8)]
        kmax: usize,
        /// Random exact-rational cumulant sequences per order
        #[arg(long, default_value_t = 100)]
        sequences: u32,
        #[arg(long, default_value_t = 1729)]
        seed: u64,
    },
    /// Every partition has exactly |rho|-1 Kreweras decompositions
    Decompositions {
        #[arg(long, default_value_t = 9)]
        kmax: usize,
    },
    /// Möbius identities: deltas, diagonal, signed Catalan top values
    Mobius {
        #[arg(long, default_value_t = 6)]
        kmax: usize,
        #[arg(long, default_value_t = 1729)]
        seed: u64,
    },
    /// Weingarten error contraction per doubling plus order-2 closed forms
    WeingartenAsym {
        #[arg(long, default_value_t = 5)]
        kmax: usize,
    },
    /// Lattice-group dictionary: order, Möbius transport, complement
    GroupIso {
        #[arg(long, default_value_t = 7)]
        kmax: usize,
    },
}

#[derive(Args)]
struct WgArgs {
    /// Tensor order
    #[arg(long)]
    k: usize,
    /// Matrix dimension (requires N >= k)
    #[arg(long)]
    n: u64,
    /// Also write the table as JSON to this file
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SimArgs {
    /// Key=value config file; flags override its entries
    #[arg(long)]
    config: Option<PathBuf>,
    /// Ensemble family: gue, fixed, or wishart
    #[arg(long)]
    ensemble: Option<String>,
    /// Matrix dimension
    #[arg(long)]
    n: Option<usize>,
    /// Highest moment order to estimate
    #[arg(long)]
    kmax: Option<usize>,
    /// Monte Carlo trials
    #[arg(long)]
    trials: Option<u64>,
    /// Base seed; trial t draws from stream t of this seed
    #[arg(long)]
    seed: Option<u64>,
    /// Wishart ratio c = samples/N (samples is rounded from c*N)
    #[arg(long)]
    c: Option<f64>,
    /// Wishart sample count; takes precedence over --c
    #[arg(long)]
    samples: Option<usize>,
    /// Fixed ensemble: comma-separated spectrum with exactly N entries
    #[arg(long)]
    spectrum: Option<String>,
    /// Fixed ensemble: constant spectrum of this value
    #[arg(long)]
    spectrum_const: Option<f64>,
    /// Write <prefix>.csv and <prefix>.json
    #[arg(long)]
    out_prefix: Option<PathBuf>,
    /// Largest |z| accepted before exiting with a verification failure
    #[arg(long)]
    z_gate: Option<f64>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = init_threads().and_then(|()| run(&cli.command));
    match outcome {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

fn init_threads() -> Result<(), Failure> {
    if let Ok(raw) = std::env::var("MKLAB_THREADS") {
        let threads: usize = raw
            .parse()
            .ok()
            .filter(|&t| t >= 1)
            .ok_or_else(|| runtime(format!("MKLAB_THREADS must be a positive integer, got {raw:?}")))?;
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .map_err(|e| runtime(format!("thread pool: {e}")))?;
    }
    Ok(())
}

fn run(command: &Command) -> CmdResult {
    match command {
        Command::Nc(args) => cmd_nc(args),
        Command::Verify(args) => cmd_verify(args),
        Command::Wg(args) => cmd_wg(args),
        Command::Sim(args) => cmd_sim(args),
    }
}

// ---------------------------------------------------------------- nc

fn parse_partition(k: usize, text: &str) -> Result<NonCrossingPartition, Failure> {
    let p: NonCrossingPartition = text.parse().map_err(|e| usage(format!("{e}")))?;
    if p.k() != k {
        return Err(usage(format!(
            "partition {p} lives on {} points but --k is {k}",
            p.k()
        )));
    }
    Ok(p)
}

fn cmd_nc(args: &NcArgs) -> CmdResult {
    let k = args.k;
    let json = match &args.action {
        NcAction::Enumerate => {
            let list = nc::enumerate_nc(k).map_err(|e| usage(e.to_string()))?;
            for p in &list {
                println!("{p}");
            }
            serde_json::json!({
                "k": k,
                "count": list.len(),
                "partitions": list.iter().map(|p| p.to_string()).collect::<Vec<_>>(),
            })
        }
        NcAction::Kreweras { partition } => {
            let p = parse_partition(k, partition)?;
            let complement = p.kreweras();
            println!("{complement}");
            serde_json::json!({
                "k": k,
                "partition": p.to_string(),
                "complement": complement.to_string(),
            })
        }
        NcAction::Decompositions { partition } => {
            let p = parse_partition(k, partition)?;
            let decomps = p.kreweras_decompositions();
            for d in &decomps {
                println!("p={} inner={} outer={}", d.insertion_point, d.inner, d.outer);
            }
            serde_json::json!({
                "k": k,
                "partition": p.to_string(),
                "count": decomps.len(),
                "decompositions": decomps.iter().map(|d| serde_json::json!({
                    "insertion_point": d.insertion_point,
                    "inner": d.inner.to_string(),
                    "outer": d.outer.to_string(),
                })).collect::<Vec<_>>(),
            })
        }
        NcAction::Mobius { nu, rho } => {
            let nu = parse_partition(k, nu)?;
            let rho = parse_partition(k, rho)?;
            let value = nc::mobius_nc(&nu, &rho).map_err(|e| usage(e.to_string()))?;
            println!("{value}");
            serde_json::json!({
                "k": k,
                "nu": nu.to_string(),
                "rho": rho.to_string(),
                "value": value,
            })
        }
    };
    if let Some(path) = &args.out {
        write_json(path, &json)?;
    }
    Ok(EXIT_PASS)
}

// ---------------------------------------------------------------- verify

fn check_kmax(kmax: usize, lo: usize, hi: usize, suite: &str) -> Result<(), Failure> {
    if kmax < lo || kmax > hi {
        return Err(usage(format!(
            "suite {suite} supports --kmax {lo}..={hi}, got {kmax}"
        )));
    }
    Ok(())
}

fn cmd_verify(args: &VerifyArgs) -> CmdResult {
    let report: SuiteReport = match &args.suite {
        SuiteCmd::MomentIdentity { kmax, sequences, seed } => {
            check_kmax(*kmax, 1, 10, "moment-identity")?;
            moment_identity_suite(*kmax, *sequences, *seed)
        }
        SuiteCmd::Decompositions { kmax } => {
            check_kmax(*kmax, 2, 12, "decompositions")?;
            decomposition_count_suite(*kmax)
        }
        SuiteCmd::Mobius { kmax, seed } => {
            check_kmax(*kmax, 1, 10, "mobius")?;
            mobius_suite(*kmax, *seed)
        }
        SuiteCmd::WeingartenAsym { kmax } => {
            check_kmax(*kmax, 1, 8, "weingarten-asym")?;
            weingarten_asymptotics_suite(*kmax)
        }
        SuiteCmd::GroupIso { kmax } => {
            check_kmax(*kmax, 1, 8, "group-iso")?;
            group_isomorphism_suite(*kmax)
        }
    };
    print!("{report}");
    Ok(if report.passed { EXIT_PASS } else { EXIT_VERIFY })
}

// ---------------------------------------------------------------- wg

fn cmd_wg(args: &WgArgs) -> CmdResult {
    let table = weingarten::build_table(args.k, args.n).map_err(|e| usage(e.to_string()))?;
    println!("Weingarten table k={} N={}", table.k(), table.n());
    for (cycle_type, value) in table.entries() {
        println!("{cycle_type}: {value}");
    }
    if let Some(path) = &args.out {
        write_json(path, &table.to_json())?;
    }
    Ok(EXIT_PASS)
}

// ---------------------------------------------------------------- sim

/// Parses a `key=value` config file: one pair per line, `#` comments and
/// blank lines ignored, keys spelled exactly like the long flags.
fn parse_config(path: &Path) -> Result<BTreeMap<String, String>, Failure> {
    const KEYS: [&str; 11] = [
        "ensemble", "n", "kmax", "trials", "seed", "c", "samples", "spectrum",
        "spectrum-const", "out-prefix", "z-gate",
    ];
    let text = std::fs::read_to_string(path)
        .map_err(|e| runtime(format!("cannot read config {}: {e}", path.display())))?;
    let mut map = BTreeMap::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| {
            usage(format!(
                "config line {} is not key=value: {raw:?}",
                lineno + 1
            ))
        })?;
        let key = key.trim();
        if !KEYS.contains(&key) {
            return Err(usage(format!(
                "unknown config key {key:?} on line {}; known keys: {}",
                lineno + 1,
                KEYS.join(", ")
            )));
        }
        map.insert(key.to_string(), value.trim().to_string());
    }
    Ok(map)
}

fn config_value<T: FromStr>(
    map: &BTreeMap<String, String>,
    key: &str,
) -> Result<Option<T>, Failure> {
    match map.get(key) {
        None => Ok(None),
        Some(raw) => raw
            .parse()
            .map(Some)
            .map_err(|_| usage(format!("config value {key}={raw:?} does not parse"))),
    }
}

/// Fully resolved experiment parameters, flags taking precedence over the
/// config file, defaults filling the rest.
struct SimResolved {
    spec: EnsembleSpec,
    kmax: usize,
    trials: u64,
    z_gate: f64,
    out_prefix: Option<PathBuf>,
    /// `key=value` echo of everything above, embedded in emitted files.
    echo: Vec<(String, String)>,
}

fn resolve_sim(args: &SimArgs) -> Result<SimResolved, Failure> {
    let file = match &args.config {
        Some(path) => parse_config(path)?,
        None => BTreeMap::new(),
    };

    let ensemble = args
        .ensemble
        .clone()
        .or_else(|| file.get("ensemble").cloned())
        .ok_or_else(|| usage("--ensemble (or an ensemble= config entry) is required"))?;
    let n = args
        .n
        .or(config_value(&file, "n")?)
        .ok_or_else(|| usage("--n (or an n= config entry) is required"))?;
    let kmax = args.kmax.or(config_value(&file, "kmax")?).unwrap_or(6);
    let trials = args.trials.or(config_value(&file, "trials")?).unwrap_or(200);
    let seed = args.seed.or(config_value(&file, "seed")?).unwrap_or(42);
    let z_gate = args.z_gate.or(config_value(&file, "z-gate")?).unwrap_or(5.0);
    let c = match args.c {
        Some(v) => Some(v),
        None => config_value(&file, "c")?,
    };
    let samples = match args.samples {
        Some(v) => Some(v),
        None => config_value(&file, "samples")?,
    };
    let spectrum_text = args
        .spectrum
        .clone()
        .or_else(|| file.get("spectrum").cloned());
    let spectrum_const = match args.spectrum_const {
        Some(v) => Some(v),
        None => config_value(&file, "spectrum-const")?,
    };
    let out_prefix = args
        .out_prefix
        .clone()
        .or_else(|| file.get("out-prefix").map(PathBuf::from));

    let mut echo = vec![
        ("ensemble".to_string(), ensemble.clone()),
        ("n".to_string(), n.to_string()),
        ("kmax".to_string(), kmax.to_string()),
        ("trials".to_string(), trials.to_string()),
        ("seed".to_string(), seed.to_string()),
        ("z-gate".to_string(), z_gate.to_string()),
    ];

    let family = match ensemble.as_str() {
        "gue" => EnsembleFamily::Gue,
        "wishart" => {
            let samples = match (samples, c) {
                (Some(m), _) => m,
                (None, Some(c)) => {
                    if !(c.is_finite() && c > 0.0) {
                        return Err(usage(format!("wishart ratio c must be positive, got {c}")));
                    }
                    (c * n as f64).round() as usize
                }
                (None, None) => {
                    return Err(usage("wishart needs --samples or --c"));
                }
            };
            echo.push(("samples".to_string(), samples.to_string()));
            echo.push(("c".to_string(), (samples as f64 / n as f64).to_string()));
            EnsembleFamily::Wishart { samples }
        }
        "fixed" => {
            let spectrum: Vec<f64> = if let Some(text) = &spectrum_text {
                echo.push(("spectrum".to_string(), text.clone()));
                text.split(',')
                    .map(|tok| {
                        tok.trim()
                            .parse()
                            .map_err(|_| usage(format!("bad spectrum entry {tok:?}")))
                    })
                    .collect::<Result<_, _>>()?
            } else if let Some(v) = spectrum_const {
                echo.push(("spectrum-const".to_string(), v.to_string()));
                vec![v; n]
            } else {
                return Err(usage("fixed ensemble needs --spectrum or --spectrum-const"));
            };
            EnsembleFamily::FixedSpectrumRotated { spectrum }
        }
        other => {
            return Err(usage(format!(
                "unknown ensemble {other:?} (expected gue, fixed, or wishart)"
            )));
        }
    };

    let spec = EnsembleSpec::new(family, n, seed).map_err(|e| usage(e.to_string()))?;
    Ok(SimResolved {
        spec,
        kmax,
        trials,
        z_gate,
        out_prefix,
        echo,
    })
}

fn cmd_sim(args: &SimArgs) -> CmdResult {
    let resolved = resolve_sim(args)?;
    let result = run_concentration_experiment(&resolved.spec, resolved.kmax, resolved.trials)
        .map_err(map_sim_error)?;

    print_sim_table(&resolved, &result);

    if let Some(prefix) = &resolved.out_prefix {
        let csv_path = PathBuf::from(format!("{}.csv", prefix.display()));
        let json_path = PathBuf::from(format!("{}.json", prefix.display()));
        write_text(&csv_path, &render_csv(&resolved.echo, &result.rows))?;
        let config: serde_json::Map<String, serde_json::Value> = resolved
            .echo
            .iter()
            .map(|(k, v)| (k.clone(), serde_json::Value::String(v.clone())))
            .collect();
        let payload = serde_json::json!({
            "config": config,
            "result": result.to_json(),
        });
        write_json(&json_path, &payload)?;
    }

    let max_z = result.max_abs_z();
    let pass = max_z <= resolved.z_gate;
    println!(
        "max |z| = {max_z:.3} (gate {}): {}",
        resolved.z_gate,
        if pass { "PASS" } else { "FAIL" }
    );
    Ok(if pass { EXIT_PASS } else { EXIT_VERIFY })
}

fn map_sim_error(e: SimError) -> Failure {
    match e {
        SimError::InvalidSpec(_) => usage(e.to_string()),
        _ => runtime(e.to_string()),
    }
}

fn print_sim_table(resolved: &SimResolved, result: &ExperimentResult) {
    let line: Vec<String> = resolved
        .echo
        .iter()
        .map(|(k, v)| format!("{k}={v}"))
        .collect();
    println!("{}", line.join(" "));
    println!(
        "{:>2} {:>14} {:>12} {:>14} {:>8} {:>14} {:>8}",
        "k", "mean", "stderr", "pred_l1", "z1", "pred_l2", "z2"
    );
    for r in &result.rows {
        println!(
            "{:>2} {:>14.8} {:>12.3e} {:>14.8} {:>8.2} {:>14.8} {:>8.2}",
            r.k, r.mean, r.stderr, r.pred_l1, r.z1, r.pred_l2, r.z2
        );
    }
}

fn render_csv(echo: &[(String, String)], rows: &[MomentRow]) -> String {
    let mut out = String::new();
    for (key, value) in echo {
        let _ = writeln!(out, "# {key}={value}");
    }
    let _ = writeln!(out, "k,mean,var,stderr,pred_l1,pred_l2,z1,z2");
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            r.k, r.mean, r.var, r.stderr, r.pred_l1, r.pred_l2, r.z1, r.z2
        );
    }
    out
}

// ---------------------------------------------------------------- output

fn write_text(path: &Path, text: &str) -> Result<(), Failure> {
    std::fs::write(path, text)
        .map_err(|e| runtime(format!("cannot write {}: {e}", path.display())))
}

fn write_json(path: &Path, value: &serde_json::Value) -> Result<(), Failure> {
    let mut text = serde_json::to_string_pretty(value)
        .map_err(|e| runtime(format!("serialization: {e}")))?;
    text.push('\n');
    write_text(path, &text)
}
