use std::fs;
use std::path::PathBuf;

use clap::{Args, ValueEnum};
use postcap::capacity::{corollary_output_match, maximize_di_feedback, OptimizerConfig};
use postcap::channel::{build_sequence_kernel, PostChannelSpec};
use postcap::construction::{
    beta_interval_alpha, beta_intervals_ab, induction_step_check, verify_appendix_inequalities, Family,
};
use postcap::directed::concavity_probe;
use postcap::probability::{Delay, StepPolicy};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::{Failure, Outcome};

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Suite {
    Kkt,
    Construction,
    Inequalities,
    Concavity,
    All,
}

#[derive(Clone, Copy, ValueEnum)]
pub enum FamilyArg {
    PostAlpha,
    PostAb,
    Mary,
}

#[derive(Args)]
pub struct VerifyArgs {
    #[arg(value_enum)]
    suite: Suite,
    #[arg(long, value_enum, default_value = "post-alpha")]
    family: FamilyArg,
    #[arg(long, default_value_t = 0.5)]
    alpha: f64,
    #[arg(long, default_value_t = 0.9)]
    a: f64,
    #[arg(long, default_value_t = 0.7)]
    b: f64,
    #[arg(long, default_value_t = 1)]
    m: usize,
    /// Channel description file (`family = ...` lines); overrides --family.
    #[arg(long, value_name = "PATH")]
    channel: Option<PathBuf>,
    #[arg(long, default_value_t = 3)]
    n: usize,
    #[arg(long, default_value_t = 0)]
    s0: usize,
    /// Grid size per axis for the inequality suite.
    #[arg(long, default_value_t = 200)]
    grid: usize,
    /// Random input pairs for the concavity suite.
    #[arg(long, default_value_t = 100)]
    samples: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
}

impl VerifyArgs {
    fn spec(&self) -> Result<PostChannelSpec, Failure> {
        if let Some(path) = &self.channel {
            let text =
                fs::read_to_string(path).map_err(|e| Failure::Usage(format!("cannot read {}: {e}", path.display())))?;
            return Ok(text.parse()?);
        }
        Ok(match self.family {
            FamilyArg::PostAlpha => PostChannelSpec::post_alpha(self.alpha)?,
            FamilyArg::PostAb => PostChannelSpec::post_ab(self.a, self.b)?,
            FamilyArg::Mary => PostChannelSpec::mary(self.m)?,
        })
    }
}

fn kkt(args: &VerifyArgs, spec: &PostChannelSpec) -> Result<bool, Failure> {
    let opt = maximize_di_feedback(spec, args.n, args.s0, &OptimizerConfig::default())?;
    println!("[kkt]");
    println!("channel: {}", spec.label());
    println!("iterations: {}", opt.iterations);
    println!("converged: {}", opt.converged);
    println!("per_symbol_bits: {:.9}", opt.per_symbol_bits());
    print!("{}", opt.kkt.to_text());
    Ok(opt.converged && opt.kkt.passed)
}

fn construction(args: &VerifyArgs, spec: &PostChannelSpec) -> Result<bool, Failure> {
    println!("[construction]");
    let (family, beta) = match *spec {
        PostChannelSpec::PostAlpha { alpha } if alpha > 0.0 && alpha < 1.0 => {
            let i = beta_interval_alpha(alpha)?;
            println!("beta_interval: {i}");
            (Family::Alpha(alpha), Some(i.lo))
        }
        PostChannelSpec::PostAB { a, b } => {
            let set = beta_intervals_ab(a, b)?;
            println!("{}", set.describe());
            (Family::AB(a, b), set.nonempty_witness)
        }
        _ => {
            println!("skipped: open-loop construction needs a nondegenerate binary POST channel");
            return Ok(true);
        }
    };
    let mut ok = true;
    match beta {
        Some(beta) => {
            let holds = induction_step_check(family, beta, args.n)?;
            println!("beta: {beta:.6}");
            println!("induction_holds: {holds}");
            ok &= holds;
        }
        None => {
            println!("beta: none");
            ok = false;
        }
    }
    for s0 in 0..2 {
        let r = corollary_output_match(spec, args.n, s0)?;
        print!("{}", r.to_text());
        ok &= r.passed;
    }
    Ok(ok)
}

fn inequalities(args: &VerifyArgs) -> Result<bool, Failure> {
    let r = verify_appendix_inequalities(args.grid)?;
    println!("[inequalities]");
    print!("{}", r.to_text());
    Ok(r.passed())
}

fn concavity(args: &VerifyArgs, spec: &PostChannelSpec) -> Result<bool, Failure> {
    let channel = build_sequence_kernel(spec, args.n, args.s0)?.to_dense()?;
    let (xa, ya) = (spec.input_alphabet(), spec.output_alphabet());
    let mut rng = ChaCha8Rng::seed_from_u64(args.seed);
    let mut worst = f64::INFINITY;
    for _ in 0..args.samples {
        let p1 = StepPolicy::random(xa, ya, args.n, Delay::One, 0.0, &mut rng).compose();
        let p2 = StepPolicy::random(xa, ya, args.n, Delay::One, 0.0, &mut rng).compose();
        let (lhs, rhs) = concavity_probe(&channel, &p1, &p2, 0.5)?;
        worst = worst.min(lhs - rhs);
    }
    println!("[concavity]");
    println!("channel: {}", spec.label());
    println!("samples: {}", args.samples);
    println!("worst_margin: {worst:.6e}");
    Ok(args.samples == 0 || worst >= -1e-12)
}

pub fn run(args: VerifyArgs) -> Outcome {
    let spec = args.spec()?;
    if args.n == 0 {
        return Err(Failure::Usage("--n must be positive".into()));
    }
    let every = args.suite == Suite::All;
    let mut passed = true;
    if every || args.suite == Suite::Kkt {
        passed &= kkt(&args, &spec)?;
    }
    if every || args.suite == Suite::Construction {
        passed &= construction(&args, &spec)?;
    }
    if every || args.suite == Suite::Inequalities {
        passed &= inequalities(&args)?;
    }
    if every || args.suite == Suite::Concavity {
        passed &= concavity(&args, &spec)?;
    }
    println!("result: {}", if passed { "pass" } else { "fail" });
    if passed {
        Ok(())
    } else {
        Err(Failure::Numeric("verification failed".into()))
    }
}
