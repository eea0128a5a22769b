//! Directed information `I(X^n -> Y^n)` and mutual information over sequence
//! channels. Everything returned is in bits.

use std::f64::consts::LN_2;

use crate::channel::{build_sequence_kernel_with, PostChannelSpec, StorageMode};
use crate::error::{Error, Result};
use crate::probability::{pow, CausalKernel, NeumaierSum, SequencePmf};

/// Joint `p(x^n, y^n)` plus the output marginal, both dense.
struct Joint {
    ys: usize,
    joint: Vec<f64>,
    py: Vec<f64>,
}

fn joint(input: &CausalKernel, channel: &CausalKernel) -> Result<Joint> {
    let joint = crate::probability::joint_matrix(input, channel)?;
    let ys = channel.rows();
    let mut py = vec![0.0; ys];
    for row in joint.chunks(ys) {
        for (acc, &p) in py.iter_mut().zip(row) {
            *acc += p;
        }
    }
    Ok(Joint { ys, joint, py })
}

/// `sum p(x^n,y^n) log2( p(y^n||x^n) / p(y^n) )`.
pub fn directed_information(input: &CausalKernel, channel: &CausalKernel) -> Result<f64> {
    let Joint { ys, joint, py } = joint(input, channel)?;
    let mut acc = NeumaierSum::new();
    for (x, row) in joint.chunks(ys).enumerate() {
        let w = channel.column(x);
        for (y, &p) in row.iter().enumerate() {
            if p > 0.0 {
                acc.add(p * (w[y] / py[y]).ln());
            }
        }
    }
    Ok(acc.value() / LN_2)
}

/// The terms `I(X^i; Y_i | Y^{i-1})`, `i = 1..n`.
pub fn directed_information_stepwise(input: &CausalKernel, channel: &CausalKernel) -> Result<Vec<f64>> {
    let Joint { ys, joint, .. } = joint(input, channel)?;
    let n = input.n();
    let (xa, ya) = (input.out_alphabet(), channel.out_alphabet());
    let xs = input.rows();
    let mut terms = Vec::with_capacity(n);
    for i in 1..=n {
        // marginal p(x^i, y^i), indexed x^i * |Y|^i + y^i
        let (xi, yi) = (pow(xa, i), pow(ya, i));
        let (xdrop, ydrop) = (xs / xi, ys / yi);
        let mut m = vec![0.0; xi * yi];
        for (x, row) in joint.chunks(ys).enumerate() {
            let base = (x / xdrop) * yi;
            for (y, &p) in row.iter().enumerate() {
                m[base + y / ydrop] += p;
            }
        }
        let mut p_y = vec![0.0; yi];
        let mut p_x_yprev = vec![0.0; xi * yi / ya];
        for (idx, &p) in m.iter().enumerate() {
            p_y[idx % yi] += p;
            p_x_yprev[idx / ya] += p;
        }
        let mut p_yprev = vec![0.0; yi / ya];
        for (y, &p) in p_y.iter().enumerate() {
            p_yprev[y / ya] += p;
        }
        let mut acc = NeumaierSum::new();
        for (idx, &p) in m.iter().enumerate() {
            if p > 0.0 {
                let y = idx % yi;
                acc.add(p * (p * p_yprev[y / ya] / (p_x_yprev[idx / ya] * p_y[y])).ln());
            }
        }
        terms.push((acc.value() / LN_2).max(0.0));
    }
    Ok(terms)
}

/// `I(X^n; Y^n | s_0)` for a feedback-free input pmf. Works on the sparse
/// channel, so it scales to the m-ary family.
pub fn mutual_information_given_state(spec: &PostChannelSpec, n: usize, s0: usize, input: &SequencePmf) -> Result<f64> {
    if input.alphabet() != spec.input_alphabet() || input.len() != n {
        return Err(Error::DimensionMismatch(format!(
            "input pmf over {}-ary sequences of length {} does not fit {} at n = {n}",
            input.alphabet(),
            input.len(),
            spec.label()
        )));
    }
    let channel = build_sequence_kernel_with(spec, n, s0, StorageMode::Sparse, 0)?;
    let sparse = channel.sparse();
    let mut py = vec![0.0; sparse.rows()];
    for (x, &px) in input.values().iter().enumerate() {
        if px > 0.0 {
            let (rows, vals) = sparse.column(x);
            for (&y, &w) in rows.iter().zip(vals) {
                py[y as usize] += px * w;
            }
        }
    }
    let mut acc = NeumaierSum::new();
    for (x, &px) in input.values().iter().enumerate() {
        if px > 0.0 {
            let (rows, vals) = sparse.column(x);
            for (&y, &w) in rows.iter().zip(vals) {
                acc.add(px * w * (w / py[y as usize]).ln());
            }
        }
    }
    Ok((acc.value() / LN_2).max(0.0))
}

/// `(DI(theta p1 + (1-theta) p2), theta DI(p1) + (1-theta) DI(p2))`. Concavity
/// in the input kernel means the first is never below the second.
pub fn concavity_probe(
    channel: &CausalKernel,
    p1: &CausalKernel,
    p2: &CausalKernel,
    theta: f64,
) -> Result<(f64, f64)> {
    if !(0.0..=1.0).contains(&theta) {
        return Err(Error::InvalidParameter(format!("theta = {theta} must lie in [0, 1]")));
    }
    let mixed = p1.mix(p2, theta)?;
    let lhs = directed_information(&mixed, channel)?;
    let rhs = theta * directed_information(p1, channel)? + (1.0 - theta) * directed_information(p2, channel)?;
    Ok((lhs, rhs))
}
