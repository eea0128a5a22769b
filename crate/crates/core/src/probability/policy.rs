use rand::Rng;

use super::{pow, CausalKernel, Delay};
use crate::error::{Error, Result};
use crate::tolerance;

/// Per-step conditionals `p(a_i | a^{i-1}, b^{i-d})`, `i = 1..n`.
///
/// Step `i` (1-based) is stored as a flat table indexed by
/// `(a_prefix * B^{i-d} + b_prefix) * A + a_i`.
#[derive(Debug, Clone, PartialEq)]
pub struct StepPolicy {
    out_alphabet: usize,
    in_alphabet: usize,
    delay: Delay,
    steps: Vec<Vec<f64>>,
}

impl StepPolicy {
    pub fn new(out_alphabet: usize, in_alphabet: usize, delay: Delay, steps: Vec<Vec<f64>>) -> Result<Self> {
        if steps.is_empty() {
            return Err(Error::InvalidKernel("a policy needs at least one step".into()));
        }
        for (k, table) in steps.iter().enumerate() {
            let expected = Self::table_len(out_alphabet, in_alphabet, delay, k + 1);
            if table.len() != expected {
                return Err(Error::DimensionMismatch(format!(
                    "step {} has {} entries, expected {expected}",
                    k + 1,
                    table.len()
                )));
            }
        }
        let policy = Self { out_alphabet, in_alphabet, delay, steps };
        policy.check_rows(tolerance::global().stochastic_row)?;
        Ok(policy)
    }

    fn table_len(out_alphabet: usize, in_alphabet: usize, delay: Delay, step: usize) -> usize {
        pow(out_alphabet, step) * pow(in_alphabet, step.saturating_sub(delay.lag()))
    }

    /// Builds a policy from `f(step, a_prefix, b_prefix) -> row`, with
    /// `step` 1-based and prefixes given as sequence indices.
    pub fn from_fn(
        out_alphabet: usize,
        in_alphabet: usize,
        n: usize,
        delay: Delay,
        mut f: impl FnMut(usize, usize, usize) -> Vec<f64>,
    ) -> Result<Self> {
        let mut steps = Vec::with_capacity(n);
        for step in 1..=n {
            let b_contexts = pow(in_alphabet, step.saturating_sub(delay.lag()));
            let mut table = Vec::with_capacity(Self::table_len(out_alphabet, in_alphabet, delay, step));
            for a_prefix in 0..pow(out_alphabet, step - 1) {
                for b_prefix in 0..b_contexts {
                    let row = f(step, a_prefix, b_prefix);
                    if row.len() != out_alphabet {
                        return Err(Error::DimensionMismatch(format!(
                            "row for step {step} has {} entries, expected {out_alphabet}",
                            row.len()
                        )));
                    }
                    table.extend(row);
                }
            }
            steps.push(table);
        }
        Self::new(out_alphabet, in_alphabet, delay, steps)
    }

    pub fn uniform(out_alphabet: usize, in_alphabet: usize, n: usize, delay: Delay) -> Self {
        let p = 1.0 / out_alphabet as f64;
        let steps = (1..=n)
            .map(|step| vec![p; Self::table_len(out_alphabet, in_alphabet, delay, step)])
            .collect();
        Self { out_alphabet, in_alphabet, delay, steps }
    }

    /// Rows drawn uniformly from `[floor, 1]` and normalized.
    pub fn random<R: Rng>(
        out_alphabet: usize,
        in_alphabet: usize,
        n: usize,
        delay: Delay,
        floor: f64,
        rng: &mut R,
    ) -> Self {
        let steps = (1..=n)
            .map(|step| {
                let mut table: Vec<f64> = (0..Self::table_len(out_alphabet, in_alphabet, delay, step))
                    .map(|_| rng.gen_range(floor..=1.0))
                    .collect();
                for row in table.chunks_mut(out_alphabet) {
                    let total: f64 = row.iter().sum();
                    row.iter_mut().for_each(|v| *v /= total);
                }
                table
            })
            .collect();
        Self { out_alphabet, in_alphabet, delay, steps }
    }

    pub fn n(&self) -> usize {
        self.steps.len()
    }

    pub fn out_alphabet(&self) -> usize {
        self.out_alphabet
    }

    pub fn in_alphabet(&self) -> usize {
        self.in_alphabet
    }

    pub fn delay(&self) -> Delay {
        self.delay
    }

    pub fn step_table(&self, step: usize) -> &[f64] {
        &self.steps[step - 1]
    }

    /// `p(a_i | a^{i-1}, b^{i-d})` for 1-based `step`.
    #[inline]
    pub fn prob(&self, step: usize, a_prefix: usize, b_prefix: usize, a: usize) -> f64 {
        let b_contexts = pow(self.in_alphabet, step.saturating_sub(self.delay.lag()));
        self.steps[step - 1][(a_prefix * b_contexts + b_prefix) * self.out_alphabet + a]
    }

    fn check_rows(&self, tol: f64) -> Result<()> {
        for (k, table) in self.steps.iter().enumerate() {
            for (r, row) in table.chunks(self.out_alphabet).enumerate() {
                if row.iter().any(|v| !(-tol..=1.0 + tol).contains(v)) {
                    return Err(Error::InvalidKernel(format!("step {} row {r} has entries outside [0,1]", k + 1)));
                }
                let total: f64 = row.iter().sum();
                if (total - 1.0).abs() > tol {
                    return Err(Error::InvalidKernel(format!("step {} row {r} sums to {total}", k + 1)));
                }
            }
        }
        Ok(())
    }

    /// The causal-conditioning kernel `prod_i p(a_i | a^{i-1}, b^{i-d})`.
    pub fn compose(&self) -> CausalKernel {
        let n = self.n();
        let (oa, ia) = (self.out_alphabet, self.in_alphabet);
        let rows = pow(oa, n);
        let cols = pow(ia, n - self.delay.lag());
        let mut values = vec![0.0; rows * cols];
        for col in 0..cols {
            let column = &mut values[col * rows..(col + 1) * rows];
            // Expand the tree one step at a time: after step i the first
            // A^i slots hold the prefix products.
            let mut prefix = vec![1.0];
            for step in 1..=n {
                let b_prefix = col / pow(ia, n - step);
                let mut next = Vec::with_capacity(prefix.len() * oa);
                for (a_prefix, &mass) in prefix.iter().enumerate() {
                    for a in 0..oa {
                        next.push(mass * self.prob(step, a_prefix, b_prefix, a));
                    }
                }
                prefix = next;
            }
            column.copy_from_slice(&prefix);
        }
        CausalKernel::new(oa, ia, n, self.delay, values).expect("policy shape is consistent")
    }

    /// Recovers the per-step conditionals as ratios of partial sums. Branches
    /// whose prefix mass is at most the dead-branch tolerance get a uniform
    /// conditional.
    pub fn factorize(kernel: &CausalKernel) -> Result<Self> {
        let tol = tolerance::global();
        let report = kernel.validate(tol.pmf);
        if !report.passed() {
            return Err(Error::InvalidKernel(format!(
                "not a causal-conditioning kernel (max violation {:.3e})",
                report.max_violation
            )));
        }
        Ok(Self::factorize_unchecked(kernel, tol.dead_branch))
    }

    pub(crate) fn factorize_unchecked(kernel: &CausalKernel, dead_branch: f64) -> Self {
        let n = kernel.n();
        let (oa, ia) = (kernel.out_alphabet(), kernel.in_alphabet());
        let lag = kernel.delay().lag();
        let mut steps = Vec::with_capacity(n);
        let mut parent = kernel.prefix_sums(0);
        for step in 1..=n {
            let sums = kernel.prefix_sums(step);
            let parent_width = pow(oa, step - 1);
            let width = parent_width * oa;
            let b_len = step.saturating_sub(lag);
            let b_contexts = pow(ia, b_len);
            let tail = pow(ia, kernel.context_len() - b_len);
            let mut table = vec![0.0; pow(oa, step - 1) * b_contexts * oa];
            for a_prefix in 0..parent_width {
                for b_prefix in 0..b_contexts {
                    let col = b_prefix * tail;
                    let denom = parent[col * parent_width + a_prefix];
                    let row = &mut table[(a_prefix * b_contexts + b_prefix) * oa..][..oa];
                    if denom > dead_branch {
                        for (a, slot) in row.iter_mut().enumerate() {
                            *slot = (sums[col * width + a_prefix * oa + a] / denom).max(0.0);
                        }
                        let total: f64 = row.iter().sum();
                        row.iter_mut().for_each(|v| *v /= total);
                    } else {
                        row.fill(1.0 / oa as f64);
                    }
                }
            }
            steps.push(table);
            parent = sums;
        }
        Self { out_alphabet: oa, in_alphabet: ia, delay: kernel.delay(), steps }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_step_kernel_is_the_row() {
        let policy = StepPolicy::from_fn(2, 2, 1, Delay::One, |_, _, _| vec![0.4, 0.6]).unwrap();
        assert_eq!(policy.compose().values(), &[0.4, 0.6]);
    }

    #[test]
    fn stationary_feedback_policy_two_steps() {
        // p(x_i = 1 | y_{i-1} = 0) = 0.4, mirrored for y_{i-1} = 1; s_0 = 0.
        let policy = StepPolicy::from_fn(2, 2, 2, Delay::One, |step, _, y_prefix| {
            let state = if step == 1 { 0 } else { y_prefix % 2 };
            if state == 0 { vec![0.6, 0.4] } else { vec![0.4, 0.6] }
        })
        .unwrap();
        let k = policy.compose();
        assert_eq!((k.rows(), k.cols()), (4, 2));
        let expected_y0 = [0.36, 0.24, 0.24, 0.16];
        let expected_y1 = [0.24, 0.36, 0.16, 0.24];
        for x in 0..4 {
            assert!((k.get(x, 0) - expected_y0[x]).abs() < 1e-15);
            assert!((k.get(x, 1) - expected_y1[x]).abs() < 1e-15);
        }
        assert!(k.validate(1e-12).passed());
    }

    #[test]
    fn deterministic_policy_copies_feedback() {
        // x_1 = 0, x_i = y_{i-1}
        let policy = StepPolicy::from_fn(2, 2, 3, Delay::One, |step, _, y_prefix| {
            let target = if step == 1 { 0 } else { y_prefix % 2 };
            let mut row = vec![0.0, 0.0];
            row[target] = 1.0;
            row
        })
        .unwrap();
        let k = policy.compose();
        for col in 0..k.cols() {
            let ones: Vec<usize> = (0..k.rows()).filter(|&r| k.get(r, col) == 1.0).collect();
            assert_eq!(ones, vec![col]); // x^3 = (0, y_1, y_2)
            assert_eq!(k.column(col).iter().filter(|&&v| v == 0.0).count(), 7);
        }
    }

    #[test]
    fn dead_branch_gets_uniform_conditional() {
        let policy = StepPolicy::from_fn(2, 2, 2, Delay::One, |step, x_prefix, _| match (step, x_prefix) {
            (1, _) => vec![1.0, 0.0],
            (_, 0) => vec![0.3, 0.7],
            _ => vec![0.9, 0.1],
        })
        .unwrap();
        let kernel = policy.compose();
        let back = StepPolicy::factorize(&kernel).unwrap();
        assert_eq!(back.prob(2, 1, 0, 0), 0.5);
        assert_eq!(back.prob(2, 1, 1, 1), 0.5);
        assert!((back.prob(2, 0, 1, 1) - 0.7).abs() < 1e-15);
        assert!(back.compose().max_abs_diff(&kernel) < 1e-15);
    }

    #[test]
    fn rejects_bad_rows_and_shapes() {
        assert!(StepPolicy::from_fn(2, 2, 1, Delay::One, |_, _, _| vec![0.5, 0.6]).is_err());
        assert!(StepPolicy::from_fn(2, 2, 1, Delay::One, |_, _, _| vec![1.0]).is_err());
        assert!(StepPolicy::new(2, 2, Delay::One, vec![vec![0.5, 0.5], vec![0.5; 3]]).is_err());
        let bad = CausalKernel::new(2, 2, 2, Delay::One, vec![0.5, 0.5, 0.0, 0.0, 0.0, 0.0, 0.5, 0.5]).unwrap();
        assert!(matches!(StepPolicy::factorize(&bad), Err(Error::InvalidKernel(_))));
    }
}
