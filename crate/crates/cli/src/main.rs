//! `postcap`: closed-form and numerical capacities of POST channels, Table I
//! reproduction, sweeps for plotting, and verification suites.
//!
//! Exit codes: 0 success, 1 numerical failure, 2 usage or parameter error.

mod verify;

use std::fs;
use std::io::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use postcap::capacity::{feedback_capacity_dp, maximize_di_feedback, OptimizerConfig};
use postcap::channel::PostChannelSpec;
use postcap::closed_form::{binary_dmc_capacity, mary_feedback_capacity, post_alpha_capacity};
use postcap::report;
use postcap::tolerance::{self, ToleranceConfig};

#[derive(Parser)]
#[command(name = "postcap", version, about = "Capacity of POST channels with and without feedback")]
struct Cli {
    /// Tolerance overrides, one `key=value` per line (pmf, round_trip,
    /// negative_entry, dead_branch, support, stochastic_row).
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Closed-form capacity of one channel.
    Capacity {
        #[command(subcommand)]
        target: CapacityTarget,
    },
    /// Reproduce the m-ary capacity table.
    Table1(Table1Args),
    /// Capacity over a parameter grid, as CSV.
    Sweep {
        #[command(subcommand)]
        target: SweepTarget,
    },
    /// Run a verification suite.
    Verify(verify::VerifyArgs),
}

#[derive(Args, Clone, Copy)]
struct NumericCheck {
    /// Also optimize numerically and compare.
    #[arg(long)]
    numeric_check: bool,
    /// Block length of the feedback optimizer.
    #[arg(long, default_value_t = 4)]
    n: usize,
    /// Largest accepted gap in bits per channel use.
    #[arg(long, default_value_t = 1e-4)]
    tol: f64,
}

#[derive(Subcommand)]
enum CapacityTarget {
    /// POST(α): Z channel in state 0, S channel in state 1.
    PostAlpha {
        #[arg(long)]
        alpha: f64,
        #[command(flatten)]
        check: NumericCheck,
    },
    /// POST(a,b): p(0|0)=a, p(1|1)=b in state 0, mirrored in state 1.
    PostAb {
        #[arg(long)]
        a: f64,
        #[arg(long)]
        b: f64,
        #[command(flatten)]
        check: NumericCheck,
    },
    /// Feedback capacity of the (m+1)-ary channel.
    Mary {
        #[arg(long)]
        m: usize,
        #[command(flatten)]
        check: NumericCheck,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Args)]
struct Table1Args {
    /// Block length of the no-feedback upper bound.
    #[arg(long, default_value_t = 6)]
    n: usize,
    #[arg(long, default_value_t = 1024)]
    max_m: usize,
    /// Largest m whose upper bound is computed (8 needs --big).
    #[arg(long, default_value_t = 4)]
    upper_bound_max_m: usize,
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
    /// Exit 1 if a row disagrees with the published table.
    #[arg(long)]
    check: bool,
    /// Allow the m = 8 upper bound (several minutes, a few GB of memory).
    #[arg(long)]
    big: bool,
}

#[derive(Subcommand)]
enum SweepTarget {
    /// `alpha,capacity` on an even grid of [0, 1].
    Alpha {
        #[arg(long, default_value_t = 101)]
        points: usize,
        #[arg(long, value_name = "PATH")]
        out: Option<PathBuf>,
    },
    /// `a,b,capacity,gamma` on an even grid of [0, 1]^2.
    Ab {
        #[arg(long, default_value_t = 21)]
        points: usize,
        #[arg(long, value_name = "PATH")]
        out: Option<PathBuf>,
    },
}

pub(crate) enum Failure {
    /// Bad flags or parameters.
    Usage(String),
    /// A numerical check did not pass.
    Numeric(String),
}

impl From<postcap::Error> for Failure {
    fn from(e: postcap::Error) -> Self {
        Failure::Usage(e.to_string())
    }
}

pub(crate) type Outcome = Result<(), Failure>;

fn emit(text: &str, out: Option<&PathBuf>) -> Outcome {
    match out {
        Some(path) => fs::write(path, text).map_err(|e| Failure::Numeric(format!("cannot write {}: {e}", path.display()))),
        None => {
            let _ = std::io::stdout().write_all(text.as_bytes());
            Ok(())
        }
    }
}

fn numeric_gap(spec: &PostChannelSpec, closed: f64, check: NumericCheck) -> Outcome {
    if !(check.tol > 0.0) {
        return Err(Failure::Usage(format!("--tol must be positive, got {}", check.tol)));
    }
    let dp = feedback_capacity_dp(spec, &OptimizerConfig { objective_tolerance: 1e-9, max_iterations: 100_000, ..Default::default() })?;
    println!("value_iteration_lower: {:.6}", dp.lower_bits);
    println!("value_iteration_upper: {:.6}", dp.upper_bits);
    let mut gap = (dp.estimate_bits() - closed).abs();
    let mut certified = dp.converged;
    if !matches!(spec, PostChannelSpec::MaryPost { .. }) {
        // for the binary families every block length reaches the capacity
        let opt = maximize_di_feedback(spec, check.n, 0, &OptimizerConfig::default())?;
        println!("optimizer_n: {}", check.n);
        println!("optimizer_per_symbol: {:.6}", opt.per_symbol_bits());
        println!("kkt_passed: {}", opt.kkt.passed);
        gap = gap.max((opt.per_symbol_bits() - closed).abs());
        certified &= opt.kkt.passed;
    }
    println!("gap: {gap:.3e}");
    if gap > check.tol || !certified {
        return Err(Failure::Numeric(format!("numeric check failed: gap {gap:.3e}, tolerance {:.1e}", check.tol)));
    }
    Ok(())
}

fn capacity(target: CapacityTarget) -> Outcome {
    match target {
        CapacityTarget::PostAlpha { alpha, check } => {
            let s = post_alpha_capacity(alpha)?;
            println!("capacity: {:.6}", s.capacity_bits);
            println!("c: {:.6}", s.c);
            println!("input_pmf: {:.6} {:.6}", s.input_pmf[0], s.input_pmf[1]);
            println!("output_markov_transition: {:.6}", s.output_markov_transition);
            if check.numeric_check {
                numeric_gap(&PostChannelSpec::post_alpha(alpha)?, s.capacity_bits, check)?;
            }
        }
        CapacityTarget::PostAb { a, b, check } => {
            let s = binary_dmc_capacity(a, b)?;
            println!("capacity: {:.6}", s.capacity_bits);
            println!("gamma: {:.6}", s.gamma);
            println!("input_pmf: {:.6} {:.6}", s.input_pmf[0], s.input_pmf[1]);
            println!("output_pmf: {:.6} {:.6}", s.output_pmf[0], s.output_pmf[1]);
            println!("relabeled: {}", s.relabeled);
            println!("degenerate: {}", s.degenerate);
            if check.numeric_check && !s.degenerate {
                numeric_gap(&PostChannelSpec::post_ab(a, b)?, s.capacity_bits, check)?;
            }
        }
        CapacityTarget::Mary { m, check } => {
            let s = mary_feedback_capacity(m)?;
            println!("capacity: {:.6}", s.capacity_bits);
            println!("gamma: {:.6}", s.gamma_star);
            println!("delta: {:.6}", s.delta_star);
            if check.numeric_check {
                numeric_gap(&PostChannelSpec::mary(m)?, s.capacity_bits, check)?;
            }
        }
    }
    Ok(())
}

fn round6(v: f64) -> f64 {
    (v * 1e6).round() / 1e6
}

fn table1(args: Table1Args) -> Outcome {
    if args.upper_bound_max_m > 8 {
        return Err(Failure::Usage(format!(
            "--upper-bound-max-m {} is beyond desk scale (at most 8)",
            args.upper_bound_max_m
        )));
    }
    if args.upper_bound_max_m > 4 && !args.big {
        return Err(Failure::Usage("--upper-bound-max-m above 4 needs --big".into()));
    }
    if args.n == 0 || args.n > 8 {
        return Err(Failure::Usage(format!("--n {} must lie in 1..=8", args.n)));
    }
    let cfg = OptimizerConfig { objective_tolerance: 1e-7, max_iterations: 200_000, ..Default::default() };
    let rows = report::table_one(args.max_m, args.upper_bound_max_m, args.n, &cfg)?;
    let text = match args.format {
        Format::Csv => report::table_csv(&rows),
        Format::Json => {
            let items: Vec<_> = rows
                .iter()
                .map(|r| {
                    serde_json::json!({
                        "m": r.m,
                        "upper_bound": r.upper_bound.map(round6),
                        "scheme_rate": round6(r.scheme_rate),
                        "feedback_capacity": round6(r.feedback_capacity),
                    })
                })
                .collect();
            let mut s = serde_json::to_string_pretty(&serde_json::json!({ "n": args.n, "rows": items }))
                .expect("table serializes");
            s.push('\n');
            s
        }
    };
    emit(&text, args.out.as_ref())?;
    if args.check {
        // the published upper bounds are for n = 6
        let rows: Vec<_> = rows
            .into_iter()
            .map(|mut r| {
                if args.n != 6 {
                    r.upper_bound = None;
                }
                r
            })
            .collect();
        let bad = report::check_table(&rows);
        for m in &bad {
            eprintln!(
                "m = {}: {} = {:.6}, published {:.4} (tolerance {:.0e})",
                m.m, m.column, m.computed, m.published, m.tolerance
            );
        }
        if !bad.is_empty() {
            return Err(Failure::Numeric(format!("{} value(s) outside tolerance", bad.len())));
        }
    }
    Ok(())
}

fn sweep(target: SweepTarget) -> Outcome {
    match target {
        SweepTarget::Alpha { points, out } => emit(&report::sweep_alpha_csv(&report::sweep_alpha(points)?), out.as_ref()),
        SweepTarget::Ab { points, out } => emit(&report::sweep_ab_csv(&report::sweep_ab(points)?), out.as_ref()),
    }
}

fn setup(cli: &Cli) -> Outcome {
    if let Ok(v) = std::env::var("POSTCAP_THREADS") {
        let threads: usize = v
            .parse()
            .ok()
            .filter(|&t| t > 0)
            .ok_or_else(|| Failure::Usage(format!("POSTCAP_THREADS must be a positive integer, got `{v}`")))?;
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .map_err(|e| Failure::Usage(e.to_string()))?;
    }
    if let Some(path) = &cli.config {
        let text = fs::read_to_string(path).map_err(|e| Failure::Usage(format!("cannot read {}: {e}", path.display())))?;
        tolerance::install(ToleranceConfig::from_key_values(&text)?);
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = setup(&cli).and_then(|()| match cli.command {
        Command::Capacity { target } => capacity(target),
        Command::Table1(args) => table1(args),
        Command::Sweep { target } => sweep(target),
        Command::Verify(args) => verify::run(args),
    });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Numeric(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
