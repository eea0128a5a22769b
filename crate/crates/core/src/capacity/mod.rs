//! Numerical capacity: Blahut-Arimoto style maximization of directed
//! information (feedback) and mutual information (no feedback), optimality
//! certificates, the output-matching route to feedback-free optimality, and
//! the feedback capacity as an average-reward problem on the channel state.

mod corollary;
mod dp;
mod feedback;
mod kkt;
mod nofeedback;

pub use corollary::{corollary_output_match, MatchReport};
pub use dp::{feedback_capacity_dp, DpCapacity};
pub use feedback::{maximize_di_feedback, FeedbackOptimum};
pub use kkt::{kkt_check, KktReport};
pub use nofeedback::{maximize_mi_nofeedback, upper_bound, NoFeedbackOptimum, StateBound, UpperBound};

use crate::channel::{build_sequence_kernel_with, PostChannelSpec, StorageMode, Transitions, DEFAULT_DENSE_CAP};
use crate::error::{Error, Result};
use crate::probability::pow;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Initialization {
    Uniform,
    /// Random policy rows, reproducible from the seed.
    Random(u64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OptimizerConfig {
    pub max_iterations: usize,
    /// Largest certificate violation accepted, in nats.
    pub kkt_tolerance: f64,
    /// Largest accepted gap between the certified upper bound and the
    /// achieved value, in bits.
    pub objective_tolerance: f64,
    pub initialization: Initialization,
    /// Iterations between certificate evaluations.
    pub check_every: usize,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        Self {
            max_iterations: 20_000,
            kkt_tolerance: 1e-7,
            objective_tolerance: 1e-9,
            initialization: Initialization::Uniform,
            check_every: 10,
        }
    }
}

/// A channel unrolled to length `n` from a fixed initial state, with the
/// dense sequence matrix stored as `w[x^n * |Y|^n + y^n]`.
pub(crate) struct Unrolled {
    pub xa: usize,
    pub ya: usize,
    pub n: usize,
    pub s0: usize,
    pub trans: Transitions,
    pub w: Vec<f64>,
}

impl Unrolled {
    pub fn new(spec: &PostChannelSpec, n: usize, s0: usize) -> Result<Self> {
        let channel = build_sequence_kernel_with(spec, n, s0, StorageMode::Dense, DEFAULT_DENSE_CAP)?;
        let dense = channel.as_dense().ok_or_else(|| Error::Infeasible("dense channel expected".into()))?;
        Ok(Self {
            xa: spec.input_alphabet(),
            ya: spec.output_alphabet(),
            n,
            s0,
            trans: Transitions::new(&spec.step_kernels()),
            w: dense.values().to_vec(),
        })
    }

    pub fn xs(&self) -> usize {
        pow(self.xa, self.n)
    }

    pub fn ys(&self) -> usize {
        pow(self.ya, self.n)
    }

    /// Channel state seen at step `i` (1-based) given `y^{i-1}`.
    #[inline]
    pub fn state(&self, i: usize, y_prefix: usize) -> usize {
        if i == 1 {
            self.s0
        } else {
            y_prefix % self.ya
        }
    }

    /// `p(y^n)` under the kernel `k[y^{n-1} * |X|^n + x^n]`.
    pub fn output_pmf(&self, k: &[f64]) -> Vec<f64> {
        let (xs, ys) = (self.xs(), self.ys());
        let mut py = vec![0.0; ys];
        for x in 0..xs {
            let w = &self.w[x * ys..(x + 1) * ys];
            for (y, (acc, &wv)) in py.iter_mut().zip(w).enumerate() {
                if wv > 0.0 {
                    *acc += wv * k[(y / self.ya) * xs + x];
                }
            }
        }
        py
    }
}
