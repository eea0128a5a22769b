//! Open-loop constructions showing feedback does not help on binary POST
//! channels: the Markov output pmf, the input recursions that induce it, the
//! β-interval machinery guaranteeing those inputs are nonnegative, and grid
//! checks of the supporting inequalities.

mod inequalities;
mod intervals;

pub use inequalities::{verify_appendix_inequalities, InequalityCheck, InequalityReport};
pub use intervals::{beta_interval_alpha, beta_intervals_ab, Interval, IntervalSet};

use crate::closed_form::{alpha_power, alpha_power_one, gamma_ab, DEGENERATE_EPS};
use crate::error::{Error, Result};
use crate::probability::SequencePmf;

/// A binary POST family with an open-loop construction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Family {
    Alpha(f64),
    AB(f64, f64),
}

/// `p(y^n | s_0)` of the symmetric binary Markov chain that flips with
/// probability `delta`.
pub fn output_markov_pmf(delta: f64, n: usize, s0: usize) -> Result<SequencePmf> {
    if !(0.0..=1.0).contains(&delta) {
        return Err(Error::InvalidParameter(format!("delta = {delta} must lie in [0, 1]")));
    }
    if s0 > 1 {
        return Err(Error::StateOutOfRange { state: s0, alphabet: 2 });
    }
    // P_s(y^n) = [p(0|s) P_0(y^{n-1}); p(1|s) P_1(y^{n-1})]
    let mut p = [vec![1.0], vec![1.0]];
    for _ in 0..n {
        let next0 = [p[0].iter().map(|v| (1.0 - delta) * v).collect::<Vec<_>>(), p[1].iter().map(|v| delta * v).collect()].concat();
        let next1 = [p[0].iter().map(|v| delta * v).collect::<Vec<_>>(), p[1].iter().map(|v| (1.0 - delta) * v).collect()].concat();
        p = [next0, next1];
    }
    let [p0, p1] = p;
    SequencePmf::from_raw(2, n, if s0 == 0 { p0 } else { p1 })
}

/// One step of a linear two-state recursion: with `u = P_0(x^{n-1})` and
/// `v = P_1(x^{n-1})`, block `x_1` of `P_s(x^n)` is `m[s][x_1] · (u, v)`.
fn linear_recursion(coef: [[[f64; 2]; 2]; 2], n: usize) -> [Vec<f64>; 2] {
    let mut p = [vec![1.0], vec![1.0]];
    for _ in 0..n {
        p = std::array::from_fn(|s| {
            let mut out = Vec::with_capacity(p[0].len() * 2);
            for [cu, cv] in coef[s] {
                out.extend(p[0].iter().zip(&p[1]).map(|(u, v)| cu * u + cv * v));
            }
            out
        });
    }
    p
}

fn alpha_coefficients(alpha: f64) -> Result<[[[f64; 2]; 2]; 2]> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::InvalidParameter(format!("alpha = {alpha} must lie in (0, 1)")));
    }
    let c = 1.0 / (1.0 + (1.0 - alpha) * alpha_power(alpha));
    let (pa, p1) = (alpha_power(alpha), alpha_power_one(alpha));
    Ok([[[c, -c * p1], [0.0, c * pa]], [[c * pa, 0.0], [-c * p1, c]]])
}

/// Normalized parameters: returns `(a, b, flipped)` with `a + b > 1`, where
/// `flipped` means the inputs were relabeled `0 <-> 1`.
pub(crate) fn normalize_ab(a: f64, b: f64) -> Result<(f64, f64, bool)> {
    if !((0.0..=1.0).contains(&a) && (0.0..=1.0).contains(&b)) {
        return Err(Error::InvalidParameter(format!("(a, b) = ({a}, {b}) must lie in [0, 1]^2")));
    }
    let d = a + b - 1.0;
    if d.abs() <= DEGENERATE_EPS {
        return Err(Error::SingularChannel(format!("a + b - 1 = {d:.3e}")));
    }
    // Swapping input labels maps POST(a,b) onto POST(1-b, 1-a) with the same
    // output (and state) labels.
    Ok(if d > 0.0 { (a, b, false) } else { (1.0 - b, 1.0 - a, true) })
}

fn ab_coefficients(a: f64, b: f64) -> [[[f64; 2]; 2]; 2] {
    let g = gamma_ab(a, b);
    let k = 1.0 / ((a + b - 1.0) * (g + 1.0));
    let (na, nb) = (1.0 - a, 1.0 - b);
    [[[k * b * g, -k * nb], [-k * na * g, k * a]], [[k * a, -k * na * g], [-k * nb, k * b * g]]]
}

fn flip_inputs(values: Vec<f64>) -> Vec<f64> {
    let mut v = values;
    v.reverse();
    v
}

fn recursion_pair(family: Family, n: usize) -> Result<[Vec<f64>; 2]> {
    Ok(match family {
        Family::Alpha(alpha) => linear_recursion(alpha_coefficients(alpha)?, n),
        Family::AB(a, b) => {
            let (a, b, flipped) = normalize_ab(a, b)?;
            let [p0, p1] = linear_recursion(ab_coefficients(a, b), n);
            if flipped {
                [flip_inputs(p0), flip_inputs(p1)]
            } else {
                [p0, p1]
            }
        }
    })
}

fn pick(pair: [Vec<f64>; 2], n: usize, s0: usize) -> Result<SequencePmf> {
    if s0 > 1 {
        return Err(Error::StateOutOfRange { state: s0, alphabet: 2 });
    }
    let [p0, p1] = pair;
    SequencePmf::from_raw(2, n, if s0 == 0 { p0 } else { p1 })
}

/// Open-loop input for POST(α) that induces the capacity-achieving Markov
/// output. Returned unvalidated so callers can inspect negative entries.
pub fn recursive_input_alpha(alpha: f64, n: usize, s0: usize) -> Result<SequencePmf> {
    pick(recursion_pair(Family::Alpha(alpha), n)?, n, s0)
}

/// Open-loop input for POST(a,b). Parameters with `a + b < 1` are handled by
/// relabeling the inputs.
pub fn recursive_input_ab(a: f64, b: f64, n: usize, s0: usize) -> Result<SequencePmf> {
    pick(recursion_pair(Family::AB(a, b), n)?, n, s0)
}

/// `(P_0(x^n) + P_1(x^n)) / 2`: the open-loop input when the initial state is
/// drawn from the stationary (uniform) distribution of the output chain.
pub fn state_averaged_input(family: Family, n: usize) -> Result<SequencePmf> {
    let [p0, p1] = recursion_pair(family, n)?;
    SequencePmf::from_raw(2, n, p0.iter().zip(&p1).map(|(u, v)| 0.5 * (u + v)).collect())
}

/// Flip probability of the capacity-achieving output chain.
pub fn markov_transition(family: Family) -> Result<f64> {
    match family {
        Family::Alpha(alpha) => Ok(crate::closed_form::post_alpha_capacity(alpha)?.output_markov_transition),
        Family::AB(a, b) => {
            let (a, b, _) = normalize_ab(a, b)?;
            Ok(1.0 / (1.0 + gamma_ab(a, b)))
        }
    }
}

/// Checks `β P_1(x^k) >= P_0(x^k)` and `β P_0(x^k) >= P_1(x^k)` for every
/// `x^k`, `k = 1..=n`, on the recursion outputs.
pub fn induction_step_check(family: Family, beta: f64, n: usize) -> Result<bool> {
    Ok(induction_margin(family, beta, n)? >= -1e-12)
}

/// Smallest `β P_s - P_{1-s}` over all entries and lengths up to `n`.
pub fn induction_margin(family: Family, beta: f64, n: usize) -> Result<f64> {
    let mut worst = f64::INFINITY;
    for k in 1..=n {
        let [p0, p1] = recursion_pair(family, k)?;
        for (u, v) in p0.iter().zip(&p1) {
            worst = worst.min(beta * v - u).min(beta * u - v);
        }
    }
    Ok(worst)
}

/// Largest gap between the length-`i` suffix and prefix marginals, over all
/// `i < n`. Zero for a stationary sequence pmf.
pub fn stationarity_defect(pmf: &SequencePmf) -> f64 {
    (1..pmf.len())
        .map(|i| pmf.suffix_marginal(i).max_abs_diff(&pmf.prefix_marginal(i)))
        .fold(0.0, f64::max)
}
