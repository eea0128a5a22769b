use std::f64::consts::LN_2;
use std::fmt::Write as _;

use super::Unrolled;
use crate::channel::PostChannelSpec;
use crate::error::{Error, Result};
use crate::probability::{pow, sequence_symbols, CausalKernel, Delay, NeumaierSum, StepPolicy};
use crate::tolerance;

/// Optimality certificate for a feedback input `p(x^n || y^{n-1})`.
///
/// The gradient of directed information (nats) is
/// `g(x^n, y^{n-1}) = sum_{y_n} p(y^n || x^n) ln(p(y^n || x^n) / (e p(y^n)))`.
/// Over the causal-conditioning polytope the linear function `<g, K>` is
/// maximized by a backward max-recursion over the policy tree. The input is
/// optimal iff at every live context all supported actions attain that
/// maximum; the certified bound is `I <= (max <g, K> + 1) / ln 2` bits.
///
/// `beta` and the literal residuals come from the simpler per-`y^{n-1}`
/// condition (gradient constant on the support of every column). It ignores
/// the tree structure and is generally not zero at the optimum once `n >= 2`.
#[derive(Debug, Clone, PartialEq)]
pub struct KktReport {
    pub n: usize,
    pub s0: usize,
    pub tolerance: f64,
    /// `beta[y^{n-1}] = sum_x K(x^n, y^{n-1}) g(x^n, y^{n-1})`, in nats.
    pub beta: Vec<f64>,
    /// Tree certificate: worst `|U - mean|` over supported actions (nats).
    pub max_violation_support: f64,
    /// Tree certificate: worst `U - mean` over unsupported actions (nats).
    pub max_violation_offsupport: f64,
    /// Per-column condition: worst `|g - beta|` on the support (nats).
    pub literal_support_residual: f64,
    /// Per-column condition: worst `g - beta` off the support (nats).
    pub literal_offsupport_residual: f64,
    pub directed_information_bits: f64,
    /// `(sum beta + 1) / ln 2`.
    pub implied_capacity_bits: f64,
    /// `implied_capacity_bits - directed_information_bits`; zero up to rounding.
    pub identity_offset: f64,
    /// Certified upper bound on the `n`-letter directed information, bits.
    pub upper_bound_bits: f64,
    /// `max <g, K> - <g, K_input>` in nats.
    pub fw_gap: f64,
    pub worst_location: Option<String>,
    pub passed: bool,
}

impl KktReport {
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "n: {}", self.n);
        let _ = writeln!(out, "s0: {}", self.s0);
        let _ = writeln!(out, "tolerance: {:.3e}", self.tolerance);
        let _ = writeln!(out, "directed_information_bits: {:.9}", self.directed_information_bits);
        let _ = writeln!(out, "implied_capacity_bits: {:.9}", self.implied_capacity_bits);
        let _ = writeln!(out, "identity_offset: {:.3e}", self.identity_offset);
        let _ = writeln!(out, "upper_bound_bits: {:.9}", self.upper_bound_bits);
        let _ = writeln!(out, "fw_gap_nats: {:.3e}", self.fw_gap);
        let _ = writeln!(out, "max_violation_support: {:.3e}", self.max_violation_support);
        let _ = writeln!(out, "max_violation_offsupport: {:.3e}", self.max_violation_offsupport);
        let _ = writeln!(out, "literal_support_residual: {:.3e}", self.literal_support_residual);
        let _ = writeln!(out, "literal_offsupport_residual: {:.3e}", self.literal_offsupport_residual);
        if let Some(loc) = &self.worst_location {
            let _ = writeln!(out, "worst_location: {loc}");
        }
        let _ = writeln!(out, "passed: {}", self.passed);
        out
    }
}

/// Certificate for `input` on `spec` unrolled to length `n` from `s0`.
/// `tol` bounds both tree violations, in nats.
pub fn kkt_check(input: &CausalKernel, spec: &PostChannelSpec, n: usize, s0: usize, tol: f64) -> Result<KktReport> {
    if input.delay() != Delay::One
        || input.n() != n
        || input.out_alphabet() != spec.input_alphabet()
        || input.in_alphabet() != spec.output_alphabet()
    {
        return Err(Error::DimensionMismatch(format!(
            "input kernel (|X|={}, |Y|={}, n={}) does not fit {} at n = {n}",
            input.out_alphabet(),
            input.in_alphabet(),
            input.n(),
            spec.label()
        )));
    }
    let ch = Unrolled::new(spec, n, s0)?;
    Ok(certificate(&ch, input, tol))
}

fn describe(x: &[usize], y: &[usize]) -> String {
    let show = |v: &[usize]| if v.is_empty() { "-".to_string() } else { v.iter().map(|s| s.to_string()).collect() };
    format!("x = {}, y = {}", show(x), show(y))
}

pub(crate) fn certificate(ch: &Unrolled, input: &CausalKernel, tol: f64) -> KktReport {
    let (xa, ya, n) = (ch.xa, ch.ya, ch.n);
    let (xs, ys) = (ch.xs(), ch.ys());
    let cols = ys / ya;
    let k = input.values();
    let support = tolerance::global().support;
    let py = ch.output_pmf(k);

    // g and the directed information
    let mut g = vec![0.0; xs * cols];
    let mut di = NeumaierSum::new();
    for x in 0..xs {
        let w = &ch.w[x * ys..(x + 1) * ys];
        for col in 0..cols {
            let kv = k[col * xs + x];
            let mut acc = 0.0;
            for y in col * ya..(col + 1) * ya {
                let wv = w[y];
                if wv > 0.0 {
                    if py[y] > 0.0 {
                        let l = (wv / py[y]).ln();
                        acc += wv * (l - 1.0);
                        if kv > 0.0 {
                            di.add(kv * wv * l);
                        }
                    } else {
                        acc = f64::INFINITY;
                    }
                }
            }
            g[x * cols + col] = acc;
        }
    }
    let di_nats = di.value();

    // per-column condition
    let mut beta = vec![0.0; cols];
    let (mut lit_sup, mut lit_off) = (0.0f64, 0.0f64);
    for (col, b) in beta.iter_mut().enumerate() {
        let mut acc = NeumaierSum::new();
        for x in 0..xs {
            let kv = k[col * xs + x];
            if kv > 0.0 {
                acc.add(kv * g[x * cols + col]);
            }
        }
        *b = acc.value();
        for x in 0..xs {
            let d = g[x * cols + col] - *b;
            if k[col * xs + x] > support {
                lit_sup = lit_sup.max(d.abs());
            } else {
                lit_off = lit_off.max(d);
            }
        }
    }
    let implied = (beta.iter().sum::<f64>() + 1.0) / LN_2;

    // tree certificate
    let policy = StepPolicy::factorize_unchecked(input, tolerance::global().dead_branch);
    // mass[i] indexed x^i * Y^{i-1} + y^{i-1}
    let mut mass = vec![vec![1.0]];
    for i in 1..=n {
        let (xp_n, yp_n) = (pow(xa, i - 1), pow(ya, i - 1));
        let parent = &mass[i - 1];
        let mut next = vec![0.0; xp_n * xa * yp_n];
        for xp in 0..xp_n {
            for yp in 0..yp_n {
                let m = if i == 1 { 1.0 } else { parent[xp * (yp_n / ya) + yp / ya] };
                for a in 0..xa {
                    next[(xp * xa + a) * yp_n + yp] = m * policy.prob(i, xp, yp, a);
                }
            }
        }
        mass.push(next);
    }
    let (mut sup, mut off) = (0.0f64, 0.0f64);
    let mut worst: Option<(f64, String)> = None;
    let mut note = |v: f64, i: usize, xp: usize, yp: usize, a: usize| {
        if worst.as_ref().map_or(true, |(w, _)| v > *w) {
            let mut x = sequence_symbols(xp, xa, i - 1);
            x.push(a);
            worst = Some((v, describe(&x, &sequence_symbols(yp, ya, i - 1))));
        }
    };
    // u is U_i indexed x^i * Y^{i-1} + y^{i-1}
    let mut u = g;
    let mut top = f64::NEG_INFINITY;
    for i in (1..=n).rev() {
        let (xp_n, yp_n) = (pow(xa, i - 1), pow(ya, i - 1));
        let mut up = vec![0.0; xp_n * (yp_n / ya).max(1)];
        for xp in 0..xp_n {
            for yp in 0..yp_n {
                let ctx_mass = if i == 1 { 1.0 } else { mass[i - 1][xp * (yp_n / ya) + yp / ya] };
                let vals: Vec<f64> = (0..xa).map(|a| u[(xp * xa + a) * yp_n + yp]).collect();
                let best = vals.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                if ctx_mass > support {
                    let mean: f64 = (0..xa)
                        .map(|a| policy.prob(i, xp, yp, a))
                        .zip(&vals)
                        .filter(|(p, _)| *p > 0.0)
                        .map(|(p, v)| p * v)
                        .sum();
                    for (a, &v) in vals.iter().enumerate() {
                        if mass[i][(xp * xa + a) * yp_n + yp] > support {
                            let d = (v - mean).abs();
                            if d > sup {
                                sup = d;
                                note(d, i, xp, yp, a);
                            }
                        } else if v - mean > off {
                            off = v - mean;
                            note(off, i, xp, yp, a);
                        }
                    }
                }
                if i == 1 {
                    top = best;
                } else {
                    up[xp * (yp_n / ya) + yp / ya] += best;
                }
            }
        }
        u = up;
    }
    let sup = if sup.is_nan() { f64::INFINITY } else { sup };
    let off = if off.is_nan() { f64::INFINITY } else { off };
    let fw_gap = (top - (di_nats - 1.0)).max(0.0);
    KktReport {
        n,
        s0: ch.s0,
        tolerance: tol,
        beta,
        max_violation_support: sup,
        max_violation_offsupport: off,
        literal_support_residual: lit_sup,
        literal_offsupport_residual: lit_off,
        directed_information_bits: di_nats / LN_2,
        implied_capacity_bits: implied,
        identity_offset: implied - di_nats / LN_2,
        upper_bound_bits: (top + 1.0) / LN_2,
        fw_gap,
        worst_location: worst.map(|(_, s)| s),
        passed: sup <= tol && off <= tol,
    }
}
