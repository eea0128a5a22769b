use std::f64::consts::LN_2;

use rayon::prelude::*;

use super::OptimizerConfig;
use crate::channel::{build_sequence_kernel_with, PostChannelSpec, SparseKernel, StorageMode};
use crate::error::{Error, Result};
use crate::probability::{NeumaierSum, SequencePmf};

#[derive(Debug, Clone)]
pub struct NoFeedbackOptimum {
    pub input: SequencePmf,
    /// `I(X^n; Y^n | s_0)` at `input`, bits.
    pub value_bits: f64,
    /// `max_x D(P(.|x) || p_Y)`: an upper bound on the optimum, bits.
    pub upper_bits: f64,
    pub iterations: usize,
    pub converged: bool,
    /// False if the objective ever decreased between iterations.
    pub monotone: bool,
}

/// Blahut-Arimoto on the sparse sequence channel. Stops when the gap between
/// the achieved rate and `max_x D(P(.|x) || p_Y)` is within
/// `objective_tolerance` bits.
pub fn maximize_mi_nofeedback(
    spec: &PostChannelSpec,
    n: usize,
    s0: usize,
    cfg: &OptimizerConfig,
) -> Result<NoFeedbackOptimum> {
    if cfg.max_iterations == 0 {
        return Err(Error::InvalidParameter("iteration count must be positive".into()));
    }
    let channel = build_sequence_kernel_with(spec, n, s0, StorageMode::Sparse, 0)?;
    let w = channel.sparse();
    let cols = w.cols();
    // c(x) = sum_y W ln W
    let c: Vec<f64> = (0..cols)
        .into_par_iter()
        .map(|x| {
            let (_, vals) = w.column(x);
            vals.iter().filter(|&&v| v > 0.0).map(|&v| v * v.ln()).sum()
        })
        .collect();
    let mut p = vec![1.0 / cols as f64; cols];
    let mut monotone = true;
    let mut last = f64::NEG_INFINITY;
    let mut iterations = 0;
    loop {
        let d = divergences(&w, &c, &p);
        let mut lower = NeumaierSum::new();
        for (&pv, &dv) in p.iter().zip(&d) {
            if pv > 0.0 {
                lower.add(pv * dv);
            }
        }
        let lower = lower.value().max(0.0) / LN_2;
        let upper = d.iter().copied().fold(f64::NEG_INFINITY, f64::max) / LN_2;
        if lower < last - 1e-12 {
            monotone = false;
        }
        last = lower;
        let converged = upper - lower <= cfg.objective_tolerance;
        if converged || iterations == cfg.max_iterations {
            return Ok(NoFeedbackOptimum {
                input: SequencePmf::from_raw(spec.input_alphabet(), n, p)?,
                value_bits: lower,
                upper_bits: upper,
                iterations,
                converged,
                monotone,
            });
        }
        let top = upper * LN_2;
        let mut total = 0.0;
        for (pv, &dv) in p.iter_mut().zip(&d) {
            *pv *= (dv - top).exp();
            total += *pv;
        }
        p.iter_mut().for_each(|v| *v /= total);
        iterations += 1;
    }
}

/// `D(x) = sum_y W(y|x) ln(W(y|x) / p_Y(y))` for every input sequence.
fn divergences(w: &SparseKernel, c: &[f64], p: &[f64]) -> Vec<f64> {
    let mut py = vec![0.0; w.rows()];
    for (x, &px) in p.iter().enumerate() {
        if px > 0.0 {
            let (rows, vals) = w.column(x);
            for (&y, &v) in rows.iter().zip(vals) {
                py[y as usize] += px * v;
            }
        }
    }
    let log_py: Vec<f64> = py.iter().map(|&v| if v > 0.0 { v.ln() } else { f64::NEG_INFINITY }).collect();
    (0..w.cols())
        .into_par_iter()
        .map(|x| {
            let (rows, vals) = w.column(x);
            let cross: f64 = rows.iter().zip(vals).filter(|(_, &v)| v > 0.0).map(|(&y, &v)| v * log_py[y as usize]).sum();
            c[x] - cross
        })
        .collect()
}

/// Non-feedback optimum from one initial state.
#[derive(Debug, Clone, PartialEq)]
pub struct StateBound {
    pub s0: usize,
    pub value_bits: f64,
    pub upper_bits: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// `max_{s0} max_{p(x^n)} I(X^n; Y^n | s_0) / n`, an upper bound on the
/// feedback-free capacity of a POST channel.
#[derive(Debug, Clone, PartialEq)]
pub struct UpperBound {
    pub n: usize,
    /// Best achieved per-symbol rate over initial states, bits.
    pub per_symbol_bits: f64,
    /// Per-symbol bound guaranteed by the optimizer gap, bits.
    pub certified_bits: f64,
    pub best_s0: usize,
    pub per_state: Vec<StateBound>,
}

/// Evaluates [`UpperBound`] at length `n`. For the m-ary family the states
/// `0..m` are equivalent under relabeling, so only `0` and `m` are optimized.
pub fn upper_bound(spec: &PostChannelSpec, n: usize, cfg: &OptimizerConfig) -> Result<UpperBound> {
    let states: Vec<usize> = match *spec {
        PostChannelSpec::MaryPost { m } => vec![0, m],
        _ => (0..spec.output_alphabet()).collect(),
    };
    let per_state = states
        .into_par_iter()
        .map(|s0| {
            let opt = maximize_mi_nofeedback(spec, n, s0, cfg)?;
            Ok(StateBound {
                s0,
                value_bits: opt.value_bits,
                upper_bits: opt.upper_bits,
                iterations: opt.iterations,
                converged: opt.converged,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let best = per_state
        .iter()
        .max_by(|a, b| a.value_bits.total_cmp(&b.value_bits))
        .expect("at least one state");
    let certified = per_state.iter().map(|s| s.upper_bits).fold(f64::NEG_INFINITY, f64::max);
    Ok(UpperBound {
        n,
        per_symbol_bits: best.value_bits / n as f64,
        certified_bits: certified / n as f64,
        best_s0: best.s0,
        per_state,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bsc_single_letter() {
        let spec = PostChannelSpec::post_ab(0.9, 0.9).unwrap();
        let opt = maximize_mi_nofeedback(&spec, 1, 0, &OptimizerConfig::default()).unwrap();
        assert!(opt.converged && opt.monotone);
        assert!((opt.value_bits - 0.531_004_406_410_718_5).abs() < 1e-8);
    }
}
