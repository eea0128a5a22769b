//! Closed-form inverses of binary POST sequence kernels.
//!
//! Since the `(y_1, x_1)` block of `P_{n,s}` is `W_s(y_1|x_1) P_{n-1,y_1}`,
//! the `(x_1, y_1)` block of the inverse is `W_s^{-1}[x_1][y_1] P_{n-1,y_1}^{-1}`.
//! For POST(a,b) this is the familiar `1/(a+b-1)` recursion.

use super::PostChannelSpec;
use crate::error::{Error, Result};

const SINGULAR_EPS: f64 = 1e-9;

/// `W_s^{-1}` for both states, row-major `[x][y]`.
fn state_inverses(spec: &PostChannelSpec) -> Result<[[f64; 4]; 2]> {
    match spec {
        PostChannelSpec::PostAlpha { .. } | PostChannelSpec::PostAB { .. } => {}
        PostChannelSpec::Custom { .. } if spec.output_alphabet() == 2 && spec.input_alphabet() == 2 => {}
        _ => {
            return Err(Error::InvalidChannel(format!(
                "closed-form inverse is only available for binary channels, not {}",
                spec.label()
            )))
        }
    }
    let mut out = [[0.0; 4]; 2];
    for (s, slot) in out.iter_mut().enumerate() {
        let w = spec.step_kernel(s)?;
        let det = w.get(0, 0) * w.get(1, 1) - w.get(0, 1) * w.get(1, 0);
        if det.abs() <= SINGULAR_EPS {
            return Err(Error::SingularChannel(format!(
                "state {s} kernel of {} has determinant {det:.3e}",
                spec.label()
            )));
        }
        *slot = [w.get(1, 1) / det, -w.get(0, 1) / det, -w.get(1, 0) / det, w.get(0, 0) / det];
    }
    Ok(out)
}

/// `P_{n,s0}^{-1}` as a row-major `2^n x 2^n` matrix (rows `x^n`, columns
/// `y^n`), assembled block by block.
pub fn invert_sequence_kernel(spec: &PostChannelSpec, n: usize, s0: usize) -> Result<Vec<f64>> {
    let inv = state_inverses(spec)?;
    if s0 > 1 {
        return Err(Error::StateOutOfRange { state: s0, alphabet: 2 });
    }
    // level[s] holds P_{k,s}^{-1}
    let mut level = [vec![1.0], vec![1.0]];
    for k in 1..=n {
        let half = 1usize << (k - 1);
        let dim = half * 2;
        let next = std::array::from_fn(|s| {
            let mut m = vec![0.0; dim * dim];
            for x1 in 0..2 {
                for y1 in 0..2 {
                    let coef = inv[s][x1 * 2 + y1];
                    let sub = &level[y1];
                    for r in 0..half {
                        let dst = &mut m[(x1 * half + r) * dim + y1 * half..][..half];
                        for (d, &v) in dst.iter_mut().zip(&sub[r * half..(r + 1) * half]) {
                            *d = coef * v;
                        }
                    }
                }
            }
            m
        });
        level = next;
    }
    let [zero, one] = level;
    Ok(if s0 == 0 { zero } else { one })
}

/// Solves `P_{n,s0} x = rhs` without forming the inverse, in `O(n 2^n)`.
pub fn solve_sequence_kernel(spec: &PostChannelSpec, n: usize, s0: usize, rhs: &[f64]) -> Result<Vec<f64>> {
    let inv = state_inverses(spec)?;
    if s0 > 1 {
        return Err(Error::StateOutOfRange { state: s0, alphabet: 2 });
    }
    if rhs.len() != 1 << n {
        return Err(Error::DimensionMismatch(format!("right-hand side has {} entries, expected {}", rhs.len(), 1 << n)));
    }
    fn solve(inv: &[[f64; 4]; 2], s: usize, rhs: &[f64]) -> Vec<f64> {
        if rhs.len() == 1 {
            return rhs.to_vec();
        }
        let half = rhs.len() / 2;
        let z0 = solve(inv, 0, &rhs[..half]);
        let z1 = solve(inv, 1, &rhs[half..]);
        let w = &inv[s];
        let mut out = Vec::with_capacity(rhs.len());
        out.extend(z0.iter().zip(&z1).map(|(a, b)| w[0] * a + w[1] * b));
        out.extend(z0.iter().zip(&z1).map(|(a, b)| w[2] * a + w[3] * b));
        out
    }
    Ok(solve(&inv, s0, rhs))
}
