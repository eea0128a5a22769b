//! Entropy, divergence and compensated accumulation. Everything returned is
//! in bits.

use std::f64::consts::LN_2;

/// Neumaier's variant of Kahan summation.
#[derive(Debug, Default, Clone, Copy)]
pub struct NeumaierSum {
    sum: f64,
    compensation: f64,
}

impl NeumaierSum {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.compensation += (self.sum - t) + x;
        } else {
            self.compensation += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.compensation
    }
}

pub fn compensated_sum(values: impl IntoIterator<Item = f64>) -> f64 {
    let mut acc = NeumaierSum::new();
    for v in values {
        acc.add(v);
    }
    acc.value()
}

/// `-p log2 p` with the 0 log 0 = 0 convention.
#[inline]
pub(crate) fn plogp_bits(p: f64) -> f64 {
    if p > 0.0 {
        -p * p.log2()
    } else {
        0.0
    }
}

pub fn binary_entropy(p: f64) -> f64 {
    plogp_bits(p) + plogp_bits(1.0 - p)
}

pub fn entropy(pmf: &[f64]) -> f64 {
    compensated_sum(pmf.iter().map(|&p| plogp_bits(p)))
}

/// `D(p || q)` in bits; `+inf` when `p` puts mass where `q` has none.
pub fn kl_divergence(p: &[f64], q: &[f64]) -> f64 {
    assert_eq!(p.len(), q.len(), "kl_divergence needs equal lengths");
    let mut acc = NeumaierSum::new();
    for (&pi, &qi) in p.iter().zip(q) {
        if pi <= 0.0 {
            continue;
        }
        if qi <= 0.0 {
            return f64::INFINITY;
        }
        acc.add(pi * (pi / qi).ln());
    }
    acc.value() / LN_2
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn binary_entropy_values() {
        assert_eq!(binary_entropy(0.5), 1.0);
        assert_eq!(binary_entropy(0.0), 0.0);
        assert_eq!(binary_entropy(1.0), 0.0);
        assert!((binary_entropy(0.25) - 0.811_278_124_459_132_9).abs() < 1e-12);
        // capacity of the i.i.d.-state comparison channel without feedback
        // printed as 0.3111 although the value rounds to 0.3113
        assert!((binary_entropy(0.25) - 0.5 - 0.3111).abs() < 2e-4);
    }

    #[test]
    fn entropy_and_divergence() {
        assert!((entropy(&[0.25; 4]) - 2.0).abs() < 1e-15);
        assert_eq!(kl_divergence(&[0.5, 0.5], &[0.5, 0.5]), 0.0);
        assert_eq!(kl_divergence(&[0.5, 0.5], &[1.0, 0.0]), f64::INFINITY);
        assert_eq!(kl_divergence(&[1.0, 0.0], &[0.5, 0.5]), 1.0);
    }

    #[test]
    fn compensated_sum_keeps_small_terms() {
        let mut v = vec![1.0];
        v.extend(std::iter::repeat(1e-16).take(10_000));
        v.push(-1.0);
        assert!((compensated_sum(v) - 1e-12).abs() < 1e-20);
    }
}
