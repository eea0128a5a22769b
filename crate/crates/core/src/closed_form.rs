//! Analytic capacities: POST(α), the binary DMC / POST(a,b), the m-ary
//! feedback capacity with its stationary chain, the simple scheme rate and the
//! i.i.d.-state comparison constants.

use crate::error::{Error, Result};
use crate::probability::{binary_entropy, entropy};

/// Below this `|a + b - 1|` the binary channel is treated as useless.
pub const DEGENERATE_EPS: f64 = 1e-9;

/// `α^{α/(1-α)}`, with its limits 1 at α = 0 and 1/e at α = 1.
pub fn alpha_power(alpha: f64) -> f64 {
    if alpha <= 0.0 {
        1.0
    } else if alpha >= 1.0 {
        (-1.0f64).exp()
    } else {
        (alpha * alpha.ln() / (1.0 - alpha)).exp()
    }
}

/// `α^{1/(1-α)} = α · α^{α/(1-α)}`.
pub fn alpha_power_one(alpha: f64) -> f64 {
    alpha.clamp(0.0, 1.0) * alpha_power(alpha)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PostAlphaSolution {
    pub alpha: f64,
    /// `(1 + (1-α) α^{α/(1-α)})^{-1}`.
    pub c: f64,
    pub capacity_bits: f64,
    /// `(P(x=0), P(x=1))` in state 0.
    pub input_pmf: [f64; 2],
    /// Probability that the output changes from one symbol to the next.
    pub output_markov_transition: f64,
}

pub fn post_alpha_capacity(alpha: f64) -> Result<PostAlphaSolution> {
    if !(0.0..=1.0).contains(&alpha) {
        return Err(Error::InvalidParameter(format!("alpha = {alpha} must lie in [0, 1]")));
    }
    let pw = alpha_power(alpha);
    let c = 1.0 / (1.0 + (1.0 - alpha) * pw);
    let p1 = if alpha >= 1.0 { 0.5 } else { c * pw };
    Ok(PostAlphaSolution {
        alpha,
        c,
        // adding zero turns -0 (at alpha = 1) into 0
        capacity_bits: -c.log2() + 0.0,
        input_pmf: [1.0 - p1, p1],
        output_markov_transition: c * (1.0 - alpha) * pw,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PostABSolution {
    /// Parameters after normalization to `a + b - 1 >= 0`.
    pub a: f64,
    pub b: f64,
    pub capacity_bits: f64,
    /// `2^{(H(b) - H(a)) / (a + b - 1)}` of the normalized parameters.
    pub gamma: f64,
    /// Capacity-achieving input of the normalized channel.
    pub input_pmf: [f64; 2],
    pub output_pmf: [f64; 2],
    /// True when `a + b < 1` and `(1-a, 1-b)` was used instead.
    pub relabeled: bool,
    /// True when `|a + b - 1|` is within [`DEGENERATE_EPS`]: output independent of input.
    pub degenerate: bool,
}

/// `log2(2^u + 2^v)` without overflow.
fn log2_sum_exp2(u: f64, v: f64) -> f64 {
    let (hi, lo) = if u >= v { (u, v) } else { (v, u) };
    hi + (1.0 + (lo - hi).exp2()).log2()
}

/// Capacity of the binary DMC with `p(0|0) = a`, `p(1|1) = b`, which is also
/// the capacity of POST(a,b) with and without feedback.
pub fn binary_dmc_capacity(a: f64, b: f64) -> Result<PostABSolution> {
    for (name, v) in [("a", a), ("b", b)] {
        if !(0.0..=1.0).contains(&v) {
            return Err(Error::InvalidParameter(format!("{name} = {v} must lie in [0, 1]")));
        }
    }
    let relabeled = a + b - 1.0 < -DEGENERATE_EPS;
    let (a, b) = if relabeled { (1.0 - a, 1.0 - b) } else { (a, b) };
    let d = a + b - 1.0;
    if d.abs() <= DEGENERATE_EPS {
        return Ok(PostABSolution {
            a,
            b,
            capacity_bits: 0.0,
            gamma: 1.0,
            input_pmf: [0.5, 0.5],
            output_pmf: [(a + 1.0 - b) / 2.0, (1.0 - a + b) / 2.0],
            relabeled,
            degenerate: true,
        });
    }
    let (ha, hb) = (binary_entropy(a), binary_entropy(b));
    let capacity = log2_sum_exp2(((1.0 - a) * hb - b * ha) / d, ((1.0 - b) * ha - a * hb) / d).max(0.0);
    let log_gamma = (hb - ha) / d;
    let gamma = log_gamma.exp2();
    // Scale by 1/γ when γ is large so neither form overflows.
    let (raw0, raw1, out0, out1) = if log_gamma <= 0.0 {
        (b * gamma - (1.0 - b), a - (1.0 - a) * gamma, gamma, 1.0)
    } else {
        let inv = (-log_gamma).exp2();
        (b - (1.0 - b) * inv, a * inv - (1.0 - a), 1.0, inv)
    };
    let (raw0, raw1) = (raw0.max(0.0), raw1.max(0.0));
    let total = raw0 + raw1;
    Ok(PostABSolution {
        a,
        b,
        capacity_bits: capacity,
        gamma,
        input_pmf: [raw0 / total, raw1 / total],
        output_pmf: [out0 / (out0 + out1), out1 / (out0 + out1)],
        relabeled,
        degenerate: false,
    })
}

/// `γ = 2^{(H(b) - H(a)) / (a + b - 1)}` for `a + b > 1`.
pub fn gamma_ab(a: f64, b: f64) -> f64 {
    ((binary_entropy(b) - binary_entropy(a)) / (a + b - 1.0)).exp2()
}

#[derive(Debug, Clone, PartialEq)]
pub struct MaryFeedbackSolution {
    pub m: usize,
    /// `P(x = m | y_prev < m)` at the optimum.
    pub gamma_star: f64,
    /// `P(x = m | y_prev = m)` at the optimum.
    pub delta_star: f64,
    pub capacity_bits: f64,
    /// Stationary output distribution over the `m + 1` symbols.
    pub stationary_pi: Vec<f64>,
}

/// Per-symbol directed information of the symmetric stationary policy
/// `(γ, δ)` on the m-ary channel.
pub fn mary_objective(m: usize, gamma: f64, delta: f64) -> f64 {
    let denom = 2.0 * delta + 1.0 + gamma;
    let busy = (1.0 - gamma) / 2.0 * (m as f64).log2() + binary_entropy((1.0 + gamma) / 2.0) - (1.0 - gamma);
    2.0 * delta / denom * busy + (1.0 + gamma) / denom * binary_entropy(delta)
}

/// Same quantity written with the entropy of the full `(m + 1)`-point output
/// distribution in the busy states instead of the collapsed `log2 m` term.
pub fn mary_objective_entropy_form(m: usize, gamma: f64, delta: f64) -> f64 {
    let mut out = vec![(1.0 - gamma) / (2 * m) as f64; m];
    out.push((1.0 + gamma) / 2.0);
    let denom = 2.0 * delta + 1.0 + gamma;
    2.0 * delta / denom * (entropy(&out) - (1.0 - gamma)) + (1.0 + gamma) / denom * binary_entropy(delta)
}

/// Output transition matrix `[from][to]` induced by the symmetric policy.
pub fn mary_output_chain(m: usize, gamma: f64, delta: f64) -> Vec<Vec<f64>> {
    let k = m + 1;
    let mut chain = vec![vec![0.0; k]; k];
    for (from, row) in chain.iter_mut().enumerate() {
        if from < m {
            for slot in row.iter_mut().take(m) {
                *slot = (1.0 - gamma) / (2 * m) as f64;
            }
            row[m] = (1.0 + gamma) / 2.0;
        } else {
            row[0] = delta;
            row[m] = 1.0 - delta;
        }
    }
    chain
}

/// Closed-form stationary distribution of [`mary_output_chain`].
pub fn mary_stationary(m: usize, gamma: f64, delta: f64) -> Vec<f64> {
    let mf = m as f64;
    let denom = 2.0 * delta + 1.0 + gamma;
    let mut pi = Vec::with_capacity(m + 1);
    pi.push(delta * ((mf - 1.0) * gamma + mf + 1.0) / (mf * denom));
    pi.extend(std::iter::repeat(delta * (1.0 - gamma) / (mf * denom)).take(m - 1));
    pi.push((1.0 + gamma) / denom);
    pi
}

/// `max_k |(π P)_k - π_k|` together with `|Σπ - 1|`.
pub fn mary_balance_residual(m: usize, gamma: f64, delta: f64, pi: &[f64]) -> f64 {
    let chain = mary_output_chain(m, gamma, delta);
    let mut worst = (pi.iter().sum::<f64>() - 1.0).abs();
    for to in 0..=m {
        let flow: f64 = (0..=m).map(|from| pi[from] * chain[from][to]).sum();
        worst = worst.max((flow - pi[to]).abs());
    }
    worst
}

const GRID: usize = 201;
const REFINE_TOL: f64 = 1e-8;

/// Feedback capacity of the m-ary channel: a 201 x 201 grid over `(γ, δ)`
/// followed by a compass search down to step 1e-8.
pub fn mary_feedback_capacity(m: usize) -> Result<MaryFeedbackSolution> {
    if m == 0 {
        return Err(Error::InvalidParameter("m must be at least 1".into()));
    }
    let f = |g: f64, d: f64| mary_objective(m, g, d);
    let step0 = 1.0 / (GRID - 1) as f64;
    let (mut g, mut d, mut best) = (0.0, 0.0, f64::NEG_INFINITY);
    for i in 0..GRID {
        for j in 0..GRID {
            let (gi, dj) = (i as f64 * step0, j as f64 * step0);
            let v = f(gi, dj);
            if v > best {
                (g, d, best) = (gi, dj, v);
            }
        }
    }
    let mut step = step0;
    while step > REFINE_TOL {
        let mut moved = false;
        for (dg, dd) in [(1.0, 0.0), (-1.0, 0.0), (0.0, 1.0), (0.0, -1.0), (1.0, 1.0), (-1.0, -1.0), (1.0, -1.0), (-1.0, 1.0)] {
            let (gn, dn) = ((g + dg * step).clamp(0.0, 1.0), (d + dd * step).clamp(0.0, 1.0));
            let v = f(gn, dn);
            if v > best {
                (g, d, best) = (gn, dn, v);
                moved = true;
            }
        }
        if !moved {
            step /= 2.0;
        }
    }
    Ok(MaryFeedbackSolution {
        m,
        gamma_star: g,
        delta_star: d,
        capacity_bits: best,
        stationary_pi: mary_stationary(m, g, d),
    })
}

/// Rate of the scheme that signals only after a busy output: `log2(m) / 3`.
pub fn mary_scheme_rate(m: usize) -> Result<f64> {
    if m == 0 {
        return Err(Error::InvalidParameter("m must be at least 1".into()));
    }
    Ok((m as f64).log2() / 3.0)
}

/// Capacities of the i.i.d.-state comparison channel without and with
/// feedback: `H_b(1/4) - 1/2` and `-log2 0.8`.
pub fn iid_state_example() -> (f64, f64) {
    (binary_entropy(0.25) - 0.5, -(0.8f64).log2())
}
