use std::fmt;

use super::{pow, sequence_symbols, SequencePmf};
use crate::error::{Error, Result};

/// The lag `d` in `p(a^n || b^{n-d})`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Delay {
    /// `p(a^n || b^n)`: channels, `p(y^n || x^n)`.
    Zero,
    /// `p(a^n || b^{n-1})`: feedback input policies, `p(x^n || y^{n-1})`.
    One,
}

impl Delay {
    pub fn lag(self) -> usize {
        match self {
            Delay::Zero => 0,
            Delay::One => 1,
        }
    }
}

/// Matrix form of a causal-conditioning distribution `p(a^n || b^{n-d})`.
///
/// Rows are indexed by `a^n`, columns by the conditioning sequence `b^{n-d}`;
/// every column is a pmf over `a^n`. Storage is column-major.
#[derive(Debug, Clone, PartialEq)]
pub struct CausalKernel {
    out_alphabet: usize,
    in_alphabet: usize,
    n: usize,
    delay: Delay,
    values: Vec<f64>,
}

impl CausalKernel {
    /// Builds a kernel, checking only its shape. Use [`CausalKernel::validate`]
    /// for membership in the causal-conditioning polyhedron.
    pub fn new(
        out_alphabet: usize,
        in_alphabet: usize,
        n: usize,
        delay: Delay,
        values: Vec<f64>,
    ) -> Result<Self> {
        if out_alphabet == 0 || in_alphabet == 0 || n == 0 {
            return Err(Error::InvalidKernel(
                "alphabets and sequence length must be positive".into(),
            ));
        }
        let expected = pow(out_alphabet, n) * pow(in_alphabet, n - delay.lag());
        if values.len() != expected {
            return Err(Error::DimensionMismatch(format!(
                "kernel needs {expected} entries, got {}",
                values.len()
            )));
        }
        Ok(Self { out_alphabet, in_alphabet, n, delay, values })
    }

    /// A feedback-free input: every column equals `pmf`.
    pub fn from_input_pmf(pmf: &SequencePmf, feedback_alphabet: usize) -> Result<Self> {
        if pmf.is_empty() {
            return Err(Error::InvalidKernel("input pmf has length 0".into()));
        }
        let cols = pow(feedback_alphabet, pmf.len() - 1);
        let mut values = Vec::with_capacity(cols * pmf.values().len());
        for _ in 0..cols {
            values.extend_from_slice(pmf.values());
        }
        Self::new(pmf.alphabet(), feedback_alphabet, pmf.len(), Delay::One, values)
    }

    pub fn out_alphabet(&self) -> usize {
        self.out_alphabet
    }

    pub fn in_alphabet(&self) -> usize {
        self.in_alphabet
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn delay(&self) -> Delay {
        self.delay
    }

    pub fn rows(&self) -> usize {
        pow(self.out_alphabet, self.n)
    }

    pub fn cols(&self) -> usize {
        pow(self.in_alphabet, self.context_len())
    }

    /// Length of the conditioning sequence, `n - d`.
    pub fn context_len(&self) -> usize {
        self.n - self.delay.lag()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.values[col * self.rows() + row]
    }

    pub fn column(&self, col: usize) -> &[f64] {
        let rows = self.rows();
        &self.values[col * rows..(col + 1) * rows]
    }

    /// `sum_{a_{i+1}^n} K[a^n, col]` for every `a^i` and column, laid out as
    /// `col * A^i + prefix`. Level 0 gives the column totals.
    pub fn prefix_sums(&self, level: usize) -> Vec<f64> {
        assert!(level <= self.n);
        let block = pow(self.out_alphabet, self.n - level);
        self.values.chunks(block).map(|c| c.iter().sum()).collect()
    }

    /// The representative column sharing the first `len` conditioning symbols
    /// with `col` (remaining symbols zero).
    pub(crate) fn canonical_column(&self, col: usize, len: usize) -> usize {
        let tail = pow(self.in_alphabet, self.context_len() - len.min(self.context_len()));
        (col / tail) * tail
    }

    /// Checks the linear description of the causal-conditioning polyhedron:
    /// nonnegativity, unit column sums, and for each level `i` that
    /// `sum_{a_{i+1}^n} K` depends on the column only through `b^{i-d}`.
    pub fn validate(&self, tol: f64) -> ValidationReport {
        let mut report = ValidationReport { max_violation: 0.0, violations: Vec::new(), tolerance: tol };
        let rows = self.rows();
        for (idx, &v) in self.values.iter().enumerate() {
            let excess = if v.is_nan() { f64::INFINITY } else { (-v).max(0.0) };
            report.record(excess, || ViolationKind::Negative { row: idx % rows, col: idx / rows });
        }
        for (col, total) in self.prefix_sums(0).into_iter().enumerate() {
            let err = if total.is_nan() { f64::INFINITY } else { (total - 1.0).abs() };
            report.record(err, || ViolationKind::Normalization { col });
        }
        for level in 1..self.n {
            let width = pow(self.out_alphabet, level);
            let sums = self.prefix_sums(level);
            let shared = level.saturating_sub(self.delay.lag());
            for col in 0..self.cols() {
                let reference = self.canonical_column(col, shared);
                if reference == col {
                    continue;
                }
                for prefix in 0..width {
                    let err = (sums[col * width + prefix] - sums[reference * width + prefix]).abs();
                    let err = if err.is_nan() { f64::INFINITY } else { err };
                    report.record(err, || ViolationKind::PrefixConsistency {
                        level,
                        prefix,
                        col,
                        reference,
                    });
                }
            }
        }
        report
    }

    /// `theta * self + (1 - theta) * other`.
    pub fn mix(&self, other: &CausalKernel, theta: f64) -> Result<CausalKernel> {
        if !self.same_shape(other) {
            return Err(Error::DimensionMismatch("kernels differ in shape".into()));
        }
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| theta * a + (1.0 - theta) * b)
            .collect();
        Ok(CausalKernel { values, ..*self })
    }

    pub fn same_shape(&self, other: &CausalKernel) -> bool {
        self.out_alphabet == other.out_alphabet
            && self.in_alphabet == other.in_alphabet
            && self.n == other.n
            && self.delay == other.delay
    }

    pub fn max_abs_diff(&self, other: &CausalKernel) -> f64 {
        assert!(self.same_shape(other));
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

/// Which constraint of the polyhedron a violation belongs to.
#[derive(Debug, Clone, PartialEq)]
pub enum ViolationKind {
    Negative { row: usize, col: usize },
    Normalization { col: usize },
    /// Partial sum over `a_{level+1}^n` differs between `col` and the column
    /// `reference` that agrees with it on the conditioning prefix.
    PrefixConsistency { level: usize, prefix: usize, col: usize, reference: usize },
}

impl fmt::Display for ViolationKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ViolationKind::Negative { row, col } => write!(f, "negative entry at row {row}, column {col}"),
            ViolationKind::Normalization { col } => write!(f, "column {col} does not sum to 1"),
            ViolationKind::PrefixConsistency { level, prefix, col, reference } => write!(
                f,
                "level-{level} partial sum for prefix {prefix} differs between columns {col} and {reference}"
            ),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Violation {
    pub kind: ViolationKind,
    pub magnitude: f64,
}

/// Outcome of [`CausalKernel::validate`].
#[derive(Debug, Clone, PartialEq)]
pub struct ValidationReport {
    /// Largest violation over every checked constraint.
    pub max_violation: f64,
    /// Constraints violated by more than `tolerance`.
    pub violations: Vec<Violation>,
    pub tolerance: f64,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.max_violation <= self.tolerance
    }

    fn record(&mut self, magnitude: f64, kind: impl FnOnce() -> ViolationKind) {
        if magnitude > self.max_violation {
            self.max_violation = magnitude;
        }
        if magnitude > self.tolerance {
            self.violations.push(Violation { kind: kind(), magnitude });
        }
    }
}

pub(crate) fn check_pair(input: &CausalKernel, channel: &CausalKernel) -> Result<()> {
    if input.delay != Delay::One || channel.delay != Delay::Zero {
        return Err(Error::DimensionMismatch(
            "expected an input kernel with delay 1 and a channel kernel with delay 0".into(),
        ));
    }
    if input.n != channel.n
        || input.out_alphabet != channel.in_alphabet
        || input.in_alphabet != channel.out_alphabet
    {
        return Err(Error::DimensionMismatch(format!(
            "input (|X|={}, |Y|={}, n={}) does not match channel (|X|={}, |Y|={}, n={})",
            input.out_alphabet, input.in_alphabet, input.n, channel.in_alphabet, channel.out_alphabet, channel.n
        )));
    }
    Ok(())
}

/// `p(x^n, y^n) = p(x^n || y^{n-1}) p(y^n || x^n)` laid out as `x * |Y|^n + y`.
pub(crate) fn joint_matrix(input: &CausalKernel, channel: &CausalKernel) -> Result<Vec<f64>> {
    check_pair(input, channel)?;
    let n = input.n;
    let y_alpha = channel.out_alphabet;
    let xs = input.rows();
    let ys = channel.rows();
    let mut joint = vec![0.0; xs * ys];
    for x in 0..xs {
        let channel_col = channel.column(x);
        let row = &mut joint[x * ys..(x + 1) * ys];
        for y in 0..ys {
            let w = channel_col[y];
            if w != 0.0 {
                // y^{n-1} is the prefix of y^n
                row[y] = input.get(x, y / y_alpha) * w;
            }
        }
    }
    debug_assert_eq!(pow(y_alpha, n), ys);
    Ok(joint)
}

/// Joint pmf of the pair sequence `((x_1,y_1), ..., (x_n,y_n))`, with pair
/// symbol `x * |Y| + y`.
pub fn chain_join(input: &CausalKernel, channel: &CausalKernel) -> Result<SequencePmf> {
    let joint = joint_matrix(input, channel)?;
    let n = input.n;
    let (xa, ya) = (input.out_alphabet, channel.out_alphabet);
    let ys = channel.rows();
    let mut values = vec![0.0; joint.len()];
    for (idx, &p) in joint.iter().enumerate() {
        let xs = sequence_symbols(idx / ys, xa, n);
        let yv = sequence_symbols(idx % ys, ya, n);
        let pair = xs.iter().zip(&yv).fold(0, |acc, (&x, &y)| acc * xa * ya + x * ya + y);
        values[pair] = p;
    }
    SequencePmf::new(xa * ya, n, values)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn canonical_column_keeps_prefix() {
        let k = CausalKernel::new(2, 2, 3, Delay::One, vec![0.125; 32]).unwrap();
        assert_eq!(k.cols(), 4);
        assert_eq!(k.canonical_column(3, 1), 2);
        assert_eq!(k.canonical_column(3, 0), 0);
        assert_eq!(k.canonical_column(3, 2), 3);
    }

    #[test]
    fn perturbed_entry_names_the_broken_constraint() {
        // n = 2, d = 1: two columns y_1 in {0,1}; p(x_1) must agree across them.
        let mut values = vec![0.3, 0.2, 0.25, 0.25, 0.1, 0.4, 0.25, 0.25];
        let good = CausalKernel::new(2, 2, 2, Delay::One, values.clone()).unwrap();
        assert!(good.validate(1e-9).passed());

        values[4] += 1e-3;
        values[5] -= 1e-3;
        let ok_shift = CausalKernel::new(2, 2, 2, Delay::One, values.clone()).unwrap();
        // moving mass inside the x_1 = 0 block keeps the polyhedron
        assert!(ok_shift.validate(1e-9).passed());

        values[5] += 1e-3;
        values[6] -= 1e-3;
        let bad = CausalKernel::new(2, 2, 2, Delay::One, values).unwrap();
        let report = bad.validate(1e-9);
        assert!(!report.passed());
        assert!((report.max_violation - 1e-3).abs() < 1e-12);
        assert!(report.violations.iter().any(|v| matches!(
            v.kind,
            ViolationKind::PrefixConsistency { level: 1, prefix: 0, col: 1, reference: 0 }
        )));
    }

    #[test]
    fn negative_and_unnormalized_columns_are_reported() {
        let k = CausalKernel::new(2, 2, 1, Delay::One, vec![1.2, -0.1]).unwrap();
        let report = k.validate(1e-9);
        assert!(report.violations.iter().any(|v| matches!(v.kind, ViolationKind::Negative { row: 1, col: 0 })));
        assert!(report.violations.iter().any(|v| matches!(v.kind, ViolationKind::Normalization { col: 0 })));
    }

    #[test]
    fn chain_join_single_letter() {
        let input = CausalKernel::new(2, 2, 1, Delay::One, vec![0.6, 0.4]).unwrap();
        // Z channel with parameter 1/2: columns x=0 -> (1,0), x=1 -> (.5,.5)
        let channel = CausalKernel::new(2, 2, 1, Delay::Zero, vec![1.0, 0.0, 0.5, 0.5]).unwrap();
        let joint = chain_join(&input, &channel).unwrap();
        assert_eq!(joint.values(), &[0.6, 0.0, 0.2, 0.2]);
    }

    #[test]
    fn shape_errors() {
        assert!(CausalKernel::new(2, 2, 2, Delay::One, vec![0.0; 7]).is_err());
        assert!(CausalKernel::new(2, 2, 0, Delay::One, vec![]).is_err());
        let input = CausalKernel::new(2, 2, 1, Delay::One, vec![0.5, 0.5]).unwrap();
        let channel = CausalKernel::new(3, 2, 1, Delay::Zero, vec![1.0, 0.0, 0.0, 0.0, 1.0, 0.0]).unwrap();
        assert!(matches!(chain_join(&input, &channel), Err(Error::DimensionMismatch(_))));
    }
}
