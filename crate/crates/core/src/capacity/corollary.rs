use std::fmt::Write as _;

use crate::channel::{solve_sequence_kernel, PostChannelSpec};
use crate::closed_form::{binary_dmc_capacity, post_alpha_capacity};
use crate::construction::{markov_transition, output_markov_pmf, Family};
use crate::directed::mutual_information_given_state;
use crate::error::{Error, Result};
use crate::probability::SequencePmf;

/// Result of the output-matching route: invert the channel on the optimal
/// feedback output pmf and check that the resulting open-loop input is a pmf
/// reaching the feedback capacity.
#[derive(Debug, Clone, PartialEq)]
pub struct MatchReport {
    pub n: usize,
    pub s0: usize,
    pub input: SequencePmf,
    pub min_entry: f64,
    pub sum: f64,
    /// `I(X^n; Y^n | s_0)` of the open-loop input, bits.
    pub mutual_information_bits: f64,
    /// `n` times the feedback capacity, bits.
    pub target_bits: f64,
    pub gap: f64,
    /// Whether the stationary feedback optimum puts positive mass on every
    /// input in every state. The matching argument assumes it.
    pub feedback_optimum_positive: bool,
    pub passed: bool,
}

impl MatchReport {
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "n: {}", self.n);
        let _ = writeln!(out, "s0: {}", self.s0);
        let _ = writeln!(out, "min_entry: {:.3e}", self.min_entry);
        let _ = writeln!(out, "sum: {:.12}", self.sum);
        let _ = writeln!(out, "mutual_information_bits: {:.9}", self.mutual_information_bits);
        let _ = writeln!(out, "target_bits: {:.9}", self.target_bits);
        let _ = writeln!(out, "gap: {:.3e}", self.gap);
        let _ = writeln!(out, "feedback_optimum_positive: {}", self.feedback_optimum_positive);
        let _ = writeln!(out, "passed: {}", self.passed);
        out
    }
}

pub fn corollary_output_match(spec: &PostChannelSpec, n: usize, s0: usize) -> Result<MatchReport> {
    let (family, capacity, positive) = match *spec {
        PostChannelSpec::PostAlpha { alpha } => {
            let s = post_alpha_capacity(alpha)?;
            (Family::Alpha(alpha), s.capacity_bits, s.input_pmf.iter().all(|&p| p > 0.0))
        }
        PostChannelSpec::PostAB { a, b } => {
            let s = binary_dmc_capacity(a, b)?;
            (Family::AB(a, b), s.capacity_bits, s.input_pmf.iter().all(|&p| p > 0.0))
        }
        _ => {
            return Err(Error::InvalidParameter(format!(
                "output matching needs a binary POST channel, got {}",
                spec.label()
            )))
        }
    };
    let delta = markov_transition(family)?;
    let target = output_markov_pmf(delta, n, s0)?;
    let x = solve_sequence_kernel(spec, n, s0, target.values())?;
    let min_entry = x.iter().copied().fold(f64::INFINITY, f64::min);
    let sum: f64 = x.iter().sum();
    let input = SequencePmf::from_raw(2, n, x)?;
    let target_bits = n as f64 * capacity;
    let (mi, gap) = if min_entry >= -1e-10 {
        let clipped = SequencePmf::from_raw(2, n, input.values().iter().map(|v| v.max(0.0)).collect())?;
        let mi = mutual_information_given_state(spec, n, s0, &clipped)?;
        (mi, (target_bits - mi).abs())
    } else {
        (f64::NAN, f64::INFINITY)
    };
    Ok(MatchReport {
        n,
        s0,
        input,
        min_entry,
        sum,
        mutual_information_bits: mi,
        target_bits,
        gap,
        feedback_optimum_positive: positive,
        passed: min_entry >= -1e-10 && (sum - 1.0).abs() <= 1e-9 && gap <= 1e-8,
    })
}
