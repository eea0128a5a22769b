//! Sequence-indexed probability vectors, causal-conditioning kernels and the
//! information measures built on them.
//!
//! Sequences are indexed lexicographically with the first symbol most
//! significant: `index(a^n) = sum_i a_i * A^(n-i)`.

mod entropy;
mod kernel;
mod policy;

pub use entropy::{binary_entropy, compensated_sum, entropy, kl_divergence, NeumaierSum};
pub use kernel::{chain_join, CausalKernel, Delay, ValidationReport, Violation, ViolationKind};
pub use policy::StepPolicy;
pub(crate) use kernel::joint_matrix;

use crate::error::{Error, Result};
use crate::tolerance;

/// `base^exp` for alphabet arithmetic.
#[inline]
pub fn pow(base: usize, exp: usize) -> usize {
    base.pow(exp as u32)
}

/// Lexicographic index of a symbol sequence.
pub fn sequence_index(symbols: &[usize], alphabet: usize) -> usize {
    symbols.iter().fold(0, |acc, &s| acc * alphabet + s)
}

/// Inverse of [`sequence_index`].
pub fn sequence_symbols(mut index: usize, alphabet: usize, len: usize) -> Vec<usize> {
    let mut out = vec![0; len];
    for slot in out.iter_mut().rev() {
        *slot = index % alphabet;
        index /= alphabet;
    }
    out
}

/// A pmf over length-`len` sequences of an `alphabet`-ary symbol set.
#[derive(Debug, Clone, PartialEq)]
pub struct SequencePmf {
    alphabet: usize,
    len: usize,
    values: Vec<f64>,
}

impl SequencePmf {
    /// Validates shape, entry signs and normalization against the global
    /// tolerances.
    pub fn new(alphabet: usize, len: usize, values: Vec<f64>) -> Result<Self> {
        let pmf = Self::from_raw(alphabet, len, values)?;
        let tol = tolerance::global();
        if let Some((i, v)) = pmf
            .values
            .iter()
            .enumerate()
            .find(|(_, v)| !(**v >= -tol.negative_entry))
        {
            return Err(Error::InvalidPmf(format!("entry {i} is {v}")));
        }
        let total = pmf.total();
        if (total - 1.0).abs() > tol.pmf {
            return Err(Error::InvalidPmf(format!("entries sum to {total}")));
        }
        Ok(pmf)
    }

    /// Checks only the shape. Used for intermediate vectors (recursion
    /// outputs) whose validity is itself under test.
    pub fn from_raw(alphabet: usize, len: usize, values: Vec<f64>) -> Result<Self> {
        if alphabet == 0 {
            return Err(Error::InvalidPmf("alphabet must be positive".into()));
        }
        if values.len() != pow(alphabet, len) {
            return Err(Error::DimensionMismatch(format!(
                "{} values for alphabet {alphabet} and length {len}",
                values.len()
            )));
        }
        Ok(Self { alphabet, len, values })
    }

    pub fn uniform(alphabet: usize, len: usize) -> Self {
        let size = pow(alphabet, len);
        Self { alphabet, len, values: vec![1.0 / size as f64; size] }
    }

    pub fn point_mass(alphabet: usize, len: usize, index: usize) -> Self {
        let mut values = vec![0.0; pow(alphabet, len)];
        values[index] = 1.0;
        Self { alphabet, len, values }
    }

    pub fn alphabet(&self) -> usize {
        self.alphabet
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    /// Probability of sequence `index`, with tiny negative round-off read as 0.
    pub fn prob(&self, index: usize) -> f64 {
        self.values[index].max(0.0)
    }

    pub fn prob_of(&self, symbols: &[usize]) -> f64 {
        self.prob(sequence_index(symbols, self.alphabet))
    }

    pub fn total(&self) -> f64 {
        compensated_sum(self.values.iter().copied())
    }

    pub fn min_entry(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// Pmf of the first `i` symbols.
    pub fn prefix_marginal(&self, i: usize) -> SequencePmf {
        assert!(i <= self.len);
        let block = pow(self.alphabet, self.len - i);
        let values = self.values.chunks(block).map(|c| c.iter().sum()).collect();
        SequencePmf { alphabet: self.alphabet, len: i, values }
    }

    /// Pmf of the last `i` symbols.
    pub fn suffix_marginal(&self, i: usize) -> SequencePmf {
        assert!(i <= self.len);
        let size = pow(self.alphabet, i);
        let mut values = vec![0.0; size];
        for (idx, v) in self.values.iter().enumerate() {
            values[idx % size] += v;
        }
        SequencePmf { alphabet: self.alphabet, len: i, values }
    }

    /// Sup-norm distance to another pmf of the same shape.
    pub fn max_abs_diff(&self, other: &SequencePmf) -> f64 {
        assert_eq!(self.values.len(), other.values.len());
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}
