use std::f64::consts::LN_2;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::kkt::certificate;
use super::{Initialization, KktReport, OptimizerConfig, Unrolled};
use crate::channel::PostChannelSpec;
use crate::error::{Error, Result};
use crate::probability::{pow, CausalKernel, Delay, NeumaierSum, StepPolicy};

#[derive(Debug, Clone)]
pub struct FeedbackOptimum {
    pub policy: StepPolicy,
    pub kernel: CausalKernel,
    /// `I(X^n -> Y^n)` at the returned policy, bits.
    pub value_bits: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Objective after every iteration, bits. Nondecreasing.
    pub history: Vec<f64>,
    pub kkt: KktReport,
}

impl FeedbackOptimum {
    pub fn per_symbol_bits(&self) -> f64 {
        self.value_bits / self.kkt.n as f64
    }
}

/// Maximizes `I(X^n -> Y^n | s_0)` over feedback policies by alternating
/// maximization: the posterior `q(x^n | y^n)` is refreshed from the current
/// joint, then every step conditional is refit by a backward recursion.
///
/// Stops once the certificate passes at `kkt_tolerance` and the certified
/// gap is within `objective_tolerance`, or after `max_iterations`.
pub fn maximize_di_feedback(spec: &PostChannelSpec, n: usize, s0: usize, cfg: &OptimizerConfig) -> Result<FeedbackOptimum> {
    if cfg.max_iterations == 0 || cfg.check_every == 0 {
        return Err(Error::InvalidParameter("iteration counts must be positive".into()));
    }
    let ch = Unrolled::new(spec, n, s0)?;
    let (xa, ya) = (ch.xa, ch.ya);
    let mut policy = match cfg.initialization {
        Initialization::Uniform => StepPolicy::uniform(xa, ya, n, Delay::One),
        Initialization::Random(seed) => StepPolicy::random(xa, ya, n, Delay::One, 0.05, &mut ChaCha8Rng::seed_from_u64(seed)),
    };
    let mut history: Vec<f64> = Vec::new();
    let mut iterations = 0;
    loop {
        let kernel = policy.compose();
        let (value, log_q) = posterior(&ch, kernel.values());
        let value = value / LN_2;
        if let Some(&last) = history.last() {
            // alternating maximization never decreases the objective
            debug_assert!(value >= last - 1e-12, "objective fell from {last} to {value}");
        }
        history.push(value);
        let check = iterations % cfg.check_every == 0 || iterations == cfg.max_iterations;
        if check {
            let report = certificate(&ch, &kernel, cfg.kkt_tolerance);
            let gap_bits = report.upper_bound_bits - report.directed_information_bits;
            if (report.passed && gap_bits <= cfg.objective_tolerance) || iterations == cfg.max_iterations {
                let converged = report.passed && gap_bits <= cfg.objective_tolerance;
                return Ok(FeedbackOptimum {
                    policy,
                    value_bits: report.directed_information_bits,
                    kernel,
                    iterations,
                    converged,
                    history,
                    kkt: report,
                });
            }
        }
        policy = refit(&ch, &log_q);
        iterations += 1;
    }
}

/// Directed information (nats) and `ln q(x^n | y^n)`, indexed
/// `x^n * |Y|^n + y^n`. Entries with zero channel weight are left at 0.
fn posterior(ch: &Unrolled, k: &[f64]) -> (f64, Vec<f64>) {
    let (xs, ys) = (ch.xs(), ch.ys());
    let py = ch.output_pmf(k);
    let mut log_q = vec![0.0; xs * ys];
    let mut di = NeumaierSum::new();
    for x in 0..xs {
        for y in 0..ys {
            let w = ch.w[x * ys + y];
            if w > 0.0 && py[y] > 0.0 {
                let joint = w * k[(y / ch.ya) * xs + x];
                log_q[x * ys + y] = if joint > 0.0 {
                    di.add(joint * (w / py[y]).ln());
                    (joint / py[y]).ln()
                } else {
                    f64::NEG_INFINITY
                };
            }
        }
    }
    (di.value(), log_q)
}

/// The policy maximizing `E[ln q(X^n | Y^n) - ln p(X^n || Y^{n-1})]`.
fn refit(ch: &Unrolled, log_q: &[f64]) -> StepPolicy {
    let (xa, ya, n) = (ch.xa, ch.ya, ch.n);
    let mut steps = vec![Vec::new(); n];
    // v is V_{i+1} indexed x^i * Y^i + y^i
    let mut v = log_q.to_vec();
    for i in (1..=n).rev() {
        let (xp_n, yp_n) = (pow(xa, i - 1), pow(ya, i - 1));
        let yi = yp_n * ya;
        let mut table = vec![0.0; xp_n * yp_n * xa];
        let mut up = vec![0.0; xp_n * yp_n];
        let mut a = vec![0.0; xa];
        for xp in 0..xp_n {
            for yp in 0..yp_n {
                let state = ch.state(i, yp);
                for (x, slot) in a.iter_mut().enumerate() {
                    let base = (xp * xa + x) * yi + yp * ya;
                    *slot = ch.trans.of(state, x).iter().map(|&(y, w)| w * v[base + y]).sum();
                }
                let best = a.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                let row = &mut table[(xp * yp_n + yp) * xa..][..xa];
                if best == f64::NEG_INFINITY || best.is_nan() {
                    row.fill(1.0 / xa as f64);
                    up[xp * yp_n + yp] = f64::NEG_INFINITY;
                    continue;
                }
                let mut total = 0.0;
                for (slot, &ax) in row.iter_mut().zip(&a) {
                    *slot = (ax - best).exp();
                    total += *slot;
                }
                row.iter_mut().for_each(|p| *p /= total);
                up[xp * yp_n + yp] = best + total.ln();
            }
        }
        steps[i - 1] = table;
        v = up;
    }
    StepPolicy::new(xa, ya, Delay::One, steps).expect("refit rows are normalized")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn z_channel_single_letter() {
        let spec = PostChannelSpec::post_alpha(0.5).unwrap();
        let opt = maximize_di_feedback(&spec, 1, 0, &OptimizerConfig::default()).unwrap();
        assert!(opt.converged, "{}", opt.kkt.to_text());
        assert!((opt.value_bits - 0.321_928_094_887_362_3).abs() < 1e-8);
        assert!(opt.history.windows(2).all(|w| w[1] >= w[0] - 1e-12));
    }
}
