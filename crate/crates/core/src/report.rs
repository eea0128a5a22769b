//! Table and sweep data in plain CSV form, plus the published Table I values
//! used to check a reproduction.

use std::fmt::Write as _;

use rayon::prelude::*;

use crate::capacity::{upper_bound, OptimizerConfig};
use crate::channel::PostChannelSpec;
use crate::closed_form::{binary_dmc_capacity, mary_feedback_capacity, mary_scheme_rate, post_alpha_capacity};
use crate::error::{Error, Result};

/// Published rows `(m, upper bound, scheme rate, feedback capacity)`.
pub const PUBLISHED_TABLE: [(usize, f64, f64, f64); 11] = [
    (1, 0.7918, 0.0, 0.7595),
    (2, 0.8568, 0.3333, 0.8325),
    (4, 0.9803, 0.6667, 1.0000),
    (8, 1.1711, 1.0000, 1.2599),
    (16, 1.3865, 1.3333, 1.5366),
    (32, 1.6098, 1.6667, 1.8260),
    (64, 1.8374, 2.0000, 2.1252),
    (128, 2.0683, 2.3333, 2.4319),
    (256, 2.3019, 2.6667, 2.7444),
    (512, 2.5376, 3.0000, 3.0614),
    (1024, 2.7751, 3.3333, 3.3818),
];

/// Allowed distance from the published upper-bound column.
pub const UPPER_BOUND_TOL: f64 = 1e-3;
/// Published values carry four decimals.
pub const SCHEME_TOL: f64 = 5e-5;
pub const FEEDBACK_TOL: f64 = 5e-4;

#[derive(Debug, Clone, PartialEq)]
pub struct TableRow {
    pub m: usize,
    /// `None` beyond the size where the bound is computed.
    pub upper_bound: Option<f64>,
    pub scheme_rate: f64,
    pub feedback_capacity: f64,
}

/// Rows for `m = 1, 2, 4, ..., max_m`; the upper bound at length `n` only for
/// `m <= upper_bound_max_m`.
pub fn table_one(max_m: usize, upper_bound_max_m: usize, n: usize, cfg: &OptimizerConfig) -> Result<Vec<TableRow>> {
    if max_m == 0 || !max_m.is_power_of_two() {
        return Err(Error::InvalidParameter(format!("max m = {max_m} must be a power of two")));
    }
    let ms: Vec<usize> = std::iter::successors(Some(1usize), |m| Some(m * 2)).take_while(|&m| m <= max_m).collect();
    // the bound rows are the expensive ones; run them sequentially so each
    // gets the whole thread pool
    let mut bounds = Vec::new();
    for &m in &ms {
        bounds.push(if m <= upper_bound_max_m {
            Some(upper_bound(&PostChannelSpec::mary(m)?, n, cfg)?.per_symbol_bits)
        } else {
            None
        });
    }
    ms.into_par_iter()
        .zip(bounds)
        .map(|(m, ub)| {
            Ok(TableRow {
                m,
                upper_bound: ub,
                scheme_rate: mary_scheme_rate(m)?,
                feedback_capacity: mary_feedback_capacity(m)?.capacity_bits,
            })
        })
        .collect()
}

pub fn table_csv(rows: &[TableRow]) -> String {
    let mut out = String::from("m,upper_bound,scheme_rate,feedback_capacity\n");
    for r in rows {
        let ub = r.upper_bound.map(|v| format!("{v:.6}")).unwrap_or_default();
        let _ = writeln!(out, "{},{ub},{:.6},{:.6}", r.m, r.scheme_rate, r.feedback_capacity);
    }
    out
}

/// One disagreement with the published table.
#[derive(Debug, Clone, PartialEq)]
pub struct Mismatch {
    pub m: usize,
    pub column: &'static str,
    pub computed: f64,
    pub published: f64,
    pub tolerance: f64,
}

/// Compares rows against [`PUBLISHED_TABLE`]; rows with `m` not in it are
/// skipped.
pub fn check_table(rows: &[TableRow]) -> Vec<Mismatch> {
    let mut out = Vec::new();
    for r in rows {
        let Some(&(_, ub, scheme, fb)) = PUBLISHED_TABLE.iter().find(|p| p.0 == r.m) else {
            continue;
        };
        let mut cmp = |column, computed: f64, published: f64, tolerance: f64| {
            if !((computed - published).abs() <= tolerance) {
                out.push(Mismatch { m: r.m, column, computed, published, tolerance });
            }
        };
        if let Some(v) = r.upper_bound {
            cmp("upper_bound", v, ub, UPPER_BOUND_TOL);
        }
        cmp("scheme_rate", r.scheme_rate, scheme, SCHEME_TOL);
        cmp("feedback_capacity", r.feedback_capacity, fb, FEEDBACK_TOL);
    }
    out
}

fn grid(points: usize) -> Result<Vec<f64>> {
    if points < 2 {
        return Err(Error::InvalidParameter(format!("need at least 2 points, got {points}")));
    }
    Ok((0..points).map(|i| i as f64 / (points - 1) as f64).collect())
}

/// `(α, C(α))` on `points` evenly spaced values of `[0, 1]`.
pub fn sweep_alpha(points: usize) -> Result<Vec<(f64, f64)>> {
    grid(points)?.into_iter().map(|a| Ok((a, post_alpha_capacity(a)?.capacity_bits))).collect()
}

/// `(a, b, C, γ)` on a `points × points` grid of `[0, 1]^2`. `γ` refers to
/// the normalized parameters and is 1 on the degenerate line `a + b = 1`.
pub fn sweep_ab(points: usize) -> Result<Vec<(f64, f64, f64, f64)>> {
    let g = grid(points)?;
    let mut out = Vec::with_capacity(points * points);
    for &a in &g {
        for &b in &g {
            let s = binary_dmc_capacity(a, b)?;
            out.push((a, b, s.capacity_bits, s.gamma));
        }
    }
    Ok(out)
}

pub fn sweep_alpha_csv(rows: &[(f64, f64)]) -> String {
    let mut out = String::from("alpha,capacity\n");
    for (a, c) in rows {
        let _ = writeln!(out, "{a:.6},{c:.6}");
    }
    out
}

pub fn sweep_ab_csv(rows: &[(f64, f64, f64, f64)]) -> String {
    let mut out = String::from("a,b,capacity,gamma\n");
    for (a, b, c, g) in rows {
        let _ = writeln!(out, "{a:.6},{b:.6},{c:.6},{g:.6}");
    }
    out
}
