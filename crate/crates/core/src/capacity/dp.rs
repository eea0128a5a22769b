use std::f64::consts::LN_2;

use super::OptimizerConfig;
use crate::channel::{PostChannelSpec, StepKernel};
use crate::error::{Error, Result};

/// Feedback capacity as an average-reward problem on the state `y_{i-1}`,
/// which encoder and decoder both know.
#[derive(Debug, Clone, PartialEq)]
pub struct DpCapacity {
    /// Certified bracket on the feedback capacity, bits per use.
    pub lower_bits: f64,
    pub upper_bits: f64,
    /// Stationary policy `p(x | s)`, one row per state.
    pub policy: Vec<Vec<f64>>,
    pub iterations: usize,
    pub converged: bool,
}

impl DpCapacity {
    pub fn estimate_bits(&self) -> f64 {
        0.5 * (self.lower_bits + self.upper_bits)
    }
}

/// Largest `I(X;Y) + sum_x p(x) b(x)` over input pmfs, nats, by the
/// Blahut-Arimoto iteration with a linear term. Returns `(lower, upper)` and
/// updates `p` in place.
fn tilted_capacity(w: &StepKernel, b: &[f64], p: &mut [f64], max_iterations: usize, tol: f64) -> (f64, f64) {
    let (xs, ys) = (w.inputs(), w.outputs());
    let mut score = vec![0.0; xs];
    let mut q = vec![0.0; ys];
    let mut bounds = (f64::NEG_INFINITY, f64::INFINITY);
    for _ in 0..max_iterations.max(1) {
        q.iter_mut().for_each(|v| *v = 0.0);
        for (x, &px) in p.iter().enumerate() {
            for (y, acc) in q.iter_mut().enumerate() {
                *acc += px * w.get(y, x);
            }
        }
        for (x, s) in score.iter_mut().enumerate() {
            let mut d = 0.0;
            for (y, &qy) in q.iter().enumerate() {
                let v = w.get(y, x);
                if v > 0.0 {
                    d += v * (v / qy).ln();
                }
            }
            *s = d + b[x];
        }
        let lower: f64 = p.iter().zip(&score).map(|(pv, s)| if *pv > 0.0 { pv * s } else { 0.0 }).sum();
        let upper = score.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        bounds = (lower, upper);
        if upper - lower <= tol {
            break;
        }
        let mut total = 0.0;
        for (pv, s) in p.iter_mut().zip(&score) {
            *pv *= (s - upper).exp();
            total += *pv;
        }
        p.iter_mut().for_each(|v| *v /= total);
    }
    bounds
}

/// Damped value iteration `V <- (T V + V) / 2`, which keeps the iteration
/// aperiodic. Each sweep brackets the average reward of the damped problem
/// between the smallest and largest change of `V`; doubling gives the bracket
/// on the capacity.
pub fn feedback_capacity_dp(spec: &PostChannelSpec, cfg: &OptimizerConfig) -> Result<DpCapacity> {
    spec.validate()?;
    if cfg.max_iterations == 0 {
        return Err(Error::InvalidParameter("iteration count must be positive".into()));
    }
    let kernels = spec.step_kernels();
    let states = kernels.len();
    let xs = spec.input_alphabet();
    let mut policy = vec![vec![1.0 / xs as f64; xs]; states];
    let mut v = vec![0.0; states];
    let tol_nats = cfg.objective_tolerance * LN_2;
    let mut bracket = (f64::NEG_INFINITY, f64::INFINITY);
    for iteration in 1..=cfg.max_iterations {
        let mut next = vec![0.0; states];
        let mut slack = 0.0f64;
        for (s, w) in kernels.iter().enumerate() {
            let b: Vec<f64> = (0..xs).map(|x| (0..states).map(|y| w.get(y, x) * v[y]).sum()).collect();
            let (lo, hi) = tilted_capacity(w, &b, &mut policy[s], 10_000, 0.1 * tol_nats);
            slack = slack.max(hi - lo);
            next[s] = 0.5 * (lo + v[s]);
        }
        let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
        for (a, b) in next.iter().zip(&v) {
            lo = lo.min(a - b);
            hi = hi.max(a - b);
        }
        // the damped problem earns half the rate; its one-step bound moves
        // by at most half the inner slack
        bracket = ((2.0 * lo).max(0.0) / LN_2, (2.0 * hi + slack) / LN_2);
        // keep V bounded
        let base = next[0];
        v = next.iter().map(|x| x - base).collect();
        if bracket.1 - bracket.0 <= cfg.objective_tolerance {
            return Ok(DpCapacity { lower_bits: bracket.0, upper_bits: bracket.1, policy, iterations: iteration, converged: true });
        }
    }
    Ok(DpCapacity {
        lower_bits: bracket.0,
        upper_bits: bracket.1,
        policy,
        iterations: cfg.max_iterations,
        converged: false,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::closed_form::{mary_feedback_capacity, post_alpha_capacity};

    fn cfg() -> OptimizerConfig {
        OptimizerConfig { objective_tolerance: 1e-8, max_iterations: 100_000, ..Default::default() }
    }

    #[test]
    fn matches_post_alpha() {
        for alpha in [0.2, 0.5, 0.8] {
            let dp = feedback_capacity_dp(&PostChannelSpec::post_alpha(alpha).unwrap(), &cfg()).unwrap();
            let c = post_alpha_capacity(alpha).unwrap().capacity_bits;
            assert!(dp.converged && dp.lower_bits <= c + 1e-9 && c <= dp.upper_bits + 1e-9, "{dp:?} vs {c}");
        }
    }

    #[test]
    fn matches_mary_formula() {
        for m in [1, 2, 4, 8] {
            let dp = feedback_capacity_dp(&PostChannelSpec::mary(m).unwrap(), &cfg()).unwrap();
            let c = mary_feedback_capacity(m).unwrap().capacity_bits;
            assert!(dp.converged, "{dp:?}");
            assert!((dp.estimate_bits() - c).abs() < 1e-6, "m = {m}: {} vs {c}", dp.estimate_bits());
        }
    }
}
