use std::borrow::Cow;

use rayon::prelude::*;

use super::{PostChannelSpec, StepKernel};
use crate::error::{Error, Result};
use crate::probability::{pow, CausalKernel, Delay, SequencePmf};

/// Largest dense sequence kernel (in matrix entries) built by default.
pub const DEFAULT_DENSE_CAP: usize = 1 << 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StorageMode {
    Dense,
    Sparse,
    /// Dense when under the cap, sparse otherwise.
    Auto,
}

/// Compressed sparse columns: column `x^n` holds the reachable `y^n` and their
/// probabilities, rows in increasing order.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseKernel {
    rows: usize,
    col_ptr: Vec<usize>,
    row_idx: Vec<u32>,
    values: Vec<f64>,
}

impl SparseKernel {
    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.col_ptr.len() - 1
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    /// Row indices and values of column `col`.
    #[inline]
    pub fn column(&self, col: usize) -> (&[u32], &[f64]) {
        let range = self.col_ptr[col]..self.col_ptr[col + 1];
        (&self.row_idx[range.clone()], &self.values[range])
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        let (rows, vals) = self.column(col);
        rows.binary_search(&(row as u32)).map_or(0.0, |k| vals[k])
    }

    pub fn max_column_nnz(&self) -> usize {
        self.col_ptr.windows(2).map(|w| w[1] - w[0]).max().unwrap_or(0)
    }

    fn from_dense(kernel: &CausalKernel) -> Self {
        let mut col_ptr = vec![0];
        let mut row_idx = Vec::new();
        let mut values = Vec::new();
        for col in 0..kernel.cols() {
            for (row, &v) in kernel.column(col).iter().enumerate() {
                if v != 0.0 {
                    row_idx.push(row as u32);
                    values.push(v);
                }
            }
            col_ptr.push(values.len());
        }
        Self { rows: kernel.rows(), col_ptr, row_idx, values }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ChannelStorage {
    Dense(CausalKernel),
    Sparse(SparseKernel),
}

/// `P_{n,s0}`: the channel `p(y^n || x^n, s_0)` as a delay-0 causal kernel.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelMatrix {
    spec: PostChannelSpec,
    n: usize,
    s0: usize,
    storage: ChannelStorage,
}

impl ChannelMatrix {
    pub fn spec(&self) -> &PostChannelSpec {
        &self.spec
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn initial_state(&self) -> usize {
        self.s0
    }

    pub fn storage(&self) -> &ChannelStorage {
        &self.storage
    }

    pub fn is_sparse(&self) -> bool {
        matches!(self.storage, ChannelStorage::Sparse(_))
    }

    pub fn rows(&self) -> usize {
        pow(self.spec.output_alphabet(), self.n)
    }

    pub fn cols(&self) -> usize {
        pow(self.spec.input_alphabet(), self.n)
    }

    /// `p(y^n || x^n)` with `row = y^n`, `col = x^n`.
    pub fn get(&self, row: usize, col: usize) -> f64 {
        match &self.storage {
            ChannelStorage::Dense(k) => k.get(row, col),
            ChannelStorage::Sparse(s) => s.get(row, col),
        }
    }

    /// The dense kernel, if this matrix was built dense.
    pub fn as_dense(&self) -> Option<&CausalKernel> {
        match &self.storage {
            ChannelStorage::Dense(k) => Some(k),
            ChannelStorage::Sparse(_) => None,
        }
    }

    /// A dense copy, subject to the dense cap.
    pub fn to_dense(&self) -> Result<CausalKernel> {
        match &self.storage {
            ChannelStorage::Dense(k) => Ok(k.clone()),
            ChannelStorage::Sparse(s) => {
                let entries = s.rows() * s.cols();
                if entries > DEFAULT_DENSE_CAP {
                    return Err(Error::DenseCapExceeded { entries, cap: DEFAULT_DENSE_CAP });
                }
                let mut values = vec![0.0; entries];
                for col in 0..s.cols() {
                    let (rows, vals) = s.column(col);
                    for (&r, &v) in rows.iter().zip(vals) {
                        values[col * s.rows() + r as usize] = v;
                    }
                }
                CausalKernel::new(self.spec.output_alphabet(), self.spec.input_alphabet(), self.n, Delay::Zero, values)
            }
        }
    }

    pub fn sparse(&self) -> Cow<'_, SparseKernel> {
        match &self.storage {
            ChannelStorage::Dense(k) => Cow::Owned(SparseKernel::from_dense(k)),
            ChannelStorage::Sparse(s) => Cow::Borrowed(s),
        }
    }
}

/// Nonzero `(y, p)` pairs per `(state, x)`.
pub(crate) struct Transitions {
    inputs: usize,
    table: Vec<Vec<(usize, f64)>>,
}

impl Transitions {
    pub(crate) fn new(kernels: &[StepKernel]) -> Self {
        let inputs = kernels[0].inputs();
        let table = kernels.iter().flat_map(|k| (0..inputs).map(move |x| k.support(x))).collect();
        Self { inputs, table }
    }

    #[inline]
    pub(crate) fn of(&self, state: usize, x: usize) -> &[(usize, f64)] {
        &self.table[state * self.inputs + x]
    }
}

/// Reachable `(y^n, p)` pairs of column `x^n`, in increasing `y^n`.
fn column_entries(trans: &Transitions, outputs: usize, n: usize, s0: usize, xs: &[usize]) -> Vec<(u32, f64)> {
    let mut out = Vec::new();
    // depth-first in increasing y keeps rows sorted
    fn walk(
        trans: &Transitions,
        outputs: usize,
        xs: &[usize],
        depth: usize,
        state: usize,
        row: usize,
        p: f64,
        out: &mut Vec<(u32, f64)>,
    ) {
        if depth == xs.len() {
            out.push((row as u32, p));
            return;
        }
        for &(y, w) in trans.of(state, xs[depth]) {
            walk(trans, outputs, xs, depth + 1, y, row * outputs + y, p * w, out);
        }
    }
    debug_assert_eq!(xs.len(), n);
    walk(trans, outputs, xs, 0, s0, 0, 1.0, &mut out);
    out
}

/// Builds `P_{n,s0}` densely when it fits under [`DEFAULT_DENSE_CAP`],
/// sparsely otherwise.
pub fn build_sequence_kernel(spec: &PostChannelSpec, n: usize, s0: usize) -> Result<ChannelMatrix> {
    build_sequence_kernel_with(spec, n, s0, StorageMode::Auto, DEFAULT_DENSE_CAP)
}

/// Builds `P_{n,s0}` from the recursion: the block for `(y_1, x_1)` is
/// `p(y_1 | x_1, s_0) * P_{n-1, y_1}`, with `P_0 = 1`.
pub fn build_sequence_kernel_with(
    spec: &PostChannelSpec,
    n: usize,
    s0: usize,
    mode: StorageMode,
    dense_cap: usize,
) -> Result<ChannelMatrix> {
    spec.validate()?;
    if n == 0 {
        return Err(Error::InvalidParameter("sequence length must be at least 1".into()));
    }
    let (xa, ya) = (spec.input_alphabet(), spec.output_alphabet());
    if s0 >= ya {
        return Err(Error::StateOutOfRange { state: s0, alphabet: ya });
    }
    let cols = xa.checked_pow(n as u32).filter(|&c| c <= u32::MAX as usize);
    let rows = ya.checked_pow(n as u32).filter(|&r| r <= u32::MAX as usize);
    let (Some(cols), Some(rows)) = (cols, rows) else {
        return Err(Error::Infeasible(format!("{} with n = {n} is too large to index", spec.label())));
    };
    let entries = rows.saturating_mul(cols);
    let dense = match mode {
        StorageMode::Dense if entries > dense_cap => {
            return Err(Error::DenseCapExceeded { entries, cap: dense_cap });
        }
        StorageMode::Dense => true,
        StorageMode::Sparse => false,
        StorageMode::Auto => entries <= dense_cap,
    };
    let trans = Transitions::new(&spec.step_kernels());
    let columns: Vec<Vec<(u32, f64)>> = (0..cols)
        .into_par_iter()
        .map(|col| {
            let xs = crate::probability::sequence_symbols(col, xa, n);
            column_entries(&trans, ya, n, s0, &xs)
        })
        .collect();
    let storage = if dense {
        let mut values = vec![0.0; entries];
        for (col, entries) in columns.iter().enumerate() {
            for &(r, p) in entries {
                values[col * rows + r as usize] = p;
            }
        }
        ChannelStorage::Dense(CausalKernel::new(ya, xa, n, Delay::Zero, values)?)
    } else {
        let nnz = columns.iter().map(Vec::len).sum();
        let mut col_ptr = Vec::with_capacity(cols + 1);
        let mut row_idx = Vec::with_capacity(nnz);
        let mut values = Vec::with_capacity(nnz);
        col_ptr.push(0);
        for entries in columns {
            for (r, p) in entries {
                row_idx.push(r);
                values.push(p);
            }
            col_ptr.push(values.len());
        }
        ChannelStorage::Sparse(SparseKernel { rows, col_ptr, row_idx, values })
    };
    Ok(ChannelMatrix { spec: spec.clone(), n, s0, storage })
}

/// `p(y^n) = sum_{x^n} p(y^n || x^n) p(x^n || y^{n-1})`.
pub fn induced_output_pmf(spec: &PostChannelSpec, n: usize, s0: usize, input: &CausalKernel) -> Result<SequencePmf> {
    let (xa, ya) = (spec.input_alphabet(), spec.output_alphabet());
    if input.delay() != Delay::One || input.n() != n || input.out_alphabet() != xa || input.in_alphabet() != ya {
        return Err(Error::DimensionMismatch(format!(
            "input kernel (|X|={}, |Y|={}, n={}) does not fit {} at n = {n}",
            input.out_alphabet(),
            input.in_alphabet(),
            input.n(),
            spec.label()
        )));
    }
    let channel = build_sequence_kernel_with(spec, n, s0, StorageMode::Sparse, 0)?;
    let sparse = channel.sparse();
    let mut out = vec![0.0; channel.rows()];
    for x in 0..channel.cols() {
        let (rows, vals) = sparse.column(x);
        for (&y, &w) in rows.iter().zip(vals) {
            let y = y as usize;
            out[y] += input.get(x, y / ya) * w;
        }
    }
    SequencePmf::new(ya, n, out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::probability::StepPolicy;

    fn post(alpha: f64) -> PostChannelSpec {
        PostChannelSpec::post_alpha(alpha).unwrap()
    }

    #[test]
    fn single_step_is_the_state_kernel() {
        let p = build_sequence_kernel(&post(0.5), 1, 0).unwrap();
        let k = p.as_dense().unwrap();
        assert_eq!(k.values(), &[1.0, 0.0, 0.5, 0.5]);
    }

    #[test]
    fn two_step_post_alpha_table() {
        let a = 0.3;
        let ab = 1.0 - a;
        let p = build_sequence_kernel(&post(a), 2, 0).unwrap();
        // rows y^2 = 00, 01, 10, 11; columns x^2 = 00, 01, 10, 11
        let expected = [
            [1.0, a, a, a * a],
            [0.0, ab, 0.0, a * ab],
            [0.0, 0.0, ab * ab, 0.0],
            [0.0, 0.0, ab * a, ab],
        ];
        for (y, row) in expected.iter().enumerate() {
            for (x, &v) in row.iter().enumerate() {
                assert!((p.get(y, x) - v).abs() < 1e-15, "y={y} x={x}");
            }
        }
    }

    #[test]
    fn top_left_block_repeats_the_shorter_kernel() {
        let spec = post(0.35);
        for n in 2..=6 {
            let big = build_sequence_kernel(&spec, n, 0).unwrap();
            let small = build_sequence_kernel(&spec, n - 1, 0).unwrap();
            for y in 0..small.rows() {
                for x in 0..small.cols() {
                    assert_eq!(big.get(y, x), small.get(y, x));
                }
            }
        }
    }

    #[test]
    fn mary_matches_brute_force_paths() {
        let spec = PostChannelSpec::mary(1).unwrap();
        let p = build_sequence_kernel(&spec, 2, 0).unwrap();
        let k = spec.step_kernels();
        for x in 0..4 {
            for y in 0..4 {
                let (x1, x2, y1, y2) = (x / 2, x % 2, y / 2, y % 2);
                let brute = k[0].get(y1, x1) * k[y1].get(y2, x2);
                assert_eq!(p.get(y, x), brute);
            }
        }
    }

    #[test]
    fn sparse_and_dense_agree() {
        for spec in [post(0.2), PostChannelSpec::post_ab(0.8, 0.6).unwrap(), PostChannelSpec::mary(3).unwrap()] {
            for s0 in 0..spec.output_alphabet() {
                let d = build_sequence_kernel_with(&spec, 4, s0, StorageMode::Dense, usize::MAX).unwrap();
                let s = build_sequence_kernel_with(&spec, 4, s0, StorageMode::Sparse, 0).unwrap();
                assert!(s.is_sparse() && !d.is_sparse());
                assert_eq!(s.to_dense().unwrap(), d.to_dense().unwrap());
                let dk = d.as_dense().unwrap();
                assert!(dk.validate(1e-12).passed());
            }
        }
    }

    #[test]
    fn mary_columns_have_few_nonzeros() {
        let n = 5;
        let p = build_sequence_kernel_with(&PostChannelSpec::mary(4).unwrap(), n, 4, StorageMode::Sparse, 0).unwrap();
        assert!(p.sparse().max_column_nnz() <= 1 << n);
        for col in 0..p.cols() {
            let total: f64 = p.sparse().column(col).1.iter().sum();
            assert!((total - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn dense_cap_is_enforced() {
        let err = build_sequence_kernel_with(&post(0.5), 11, 0, StorageMode::Dense, DEFAULT_DENSE_CAP).unwrap_err();
        assert!(matches!(err, Error::DenseCapExceeded { .. }));
        assert!(build_sequence_kernel(&post(0.5), 11, 0).unwrap().is_sparse());
        assert!(build_sequence_kernel(&post(0.5), 2, 2).is_err());
    }

    #[test]
    fn output_of_z_channel_input() {
        let input = CausalKernel::new(2, 2, 1, Delay::One, vec![0.6, 0.4]).unwrap();
        let out = induced_output_pmf(&post(0.5), 1, 0, &input).unwrap();
        assert!((out.values()[0] - 0.8).abs() < 1e-15 && (out.values()[1] - 0.2).abs() < 1e-15);
    }

    #[test]
    fn point_mass_input_gives_a_channel_column() {
        let spec = PostChannelSpec::post_ab(0.9, 0.7).unwrap();
        let p = build_sequence_kernel(&spec, 3, 1).unwrap();
        let pmf = SequencePmf::point_mass(2, 3, 5);
        let input = CausalKernel::from_input_pmf(&pmf, 2).unwrap();
        let out = induced_output_pmf(&spec, 3, 1, &input).unwrap();
        for y in 0..8 {
            assert_eq!(out.values()[y], p.get(y, 5));
        }
    }

    #[test]
    fn stationary_policy_output_is_markov() {
        // p(x_i = 1 | y_{i-1} = 0) = 0.4, mirrored, s_0 = 0
        let policy = StepPolicy::from_fn(2, 2, 3, Delay::One, |step, _, y| {
            let state = if step == 1 { 0 } else { y % 2 };
            if state == 0 { vec![0.6, 0.4] } else { vec![0.4, 0.6] }
        })
        .unwrap();
        let out = induced_output_pmf(&post(0.5), 3, 0, &policy.compose()).unwrap();
        for y in 0..8usize {
            let mut prev = 0;
            let mut p = 1.0;
            for i in (0..3).rev() {
                let bit = (y >> i) & 1;
                p *= if bit == prev { 0.8 } else { 0.2 };
                prev = bit;
            }
            assert!((out.values()[y] - p).abs() < 1e-15);
        }
    }
}
