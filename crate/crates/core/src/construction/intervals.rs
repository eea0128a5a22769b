use std::fmt;

use super::normalize_ab;
use crate::closed_form::{alpha_power, alpha_power_one, gamma_ab};
use crate::error::{Error, Result};

/// Closed interval `[lo, hi]`; either end may be infinite.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    /// `None` when `lo > hi`.
    fn new(lo: f64, hi: f64) -> Option<Self> {
        (lo <= hi).then_some(Self { lo, hi })
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lo <= x && x <= self.hi
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{:.6}, {:.6}]", self.lo, self.hi)
    }
}

/// Relative slack when intersecting intervals; the intersection can shrink to
/// a single point (e.g. `a = b`).
const SLACK: f64 = 1e-12;

fn intersect(parts: &[Option<Interval>]) -> Option<Interval> {
    let mut lo = f64::NEG_INFINITY;
    let mut hi = f64::INFINITY;
    for p in parts {
        let p = (*p)?;
        lo = lo.max(p.lo);
        hi = hi.min(p.hi);
    }
    if lo <= hi {
        Some(Interval { lo, hi })
    } else if lo - hi <= SLACK * lo.abs().max(1.0) {
        Some(Interval { lo: hi, hi: lo })
    } else {
        None
    }
}

/// Roots of `A β² - B β + C` with `A, C >= 0`, `B > 0`, computed without
/// cancellation. `None` if the discriminant is clearly negative.
fn roots(a: f64, b: f64, c: f64) -> Option<(f64, f64)> {
    let mut disc = b * b - 4.0 * a * c;
    if disc < 0.0 {
        if disc < -1e-12 * b * b {
            return None;
        }
        disc = 0.0;
    }
    let q = b + disc.sqrt();
    Some((2.0 * c / q, q / (2.0 * a)))
}

/// `[lo, hi]` of admissible β for POST(α).
pub fn beta_interval_alpha(alpha: f64) -> Result<Interval> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::InvalidParameter(format!("alpha = {alpha} must lie in (0, 1)")));
    }
    let (pa, p1) = (alpha_power(alpha), alpha_power_one(alpha));
    let disc = 1.0 - 4.0 * pa * p1;
    assert!(disc >= -1e-15, "negative discriminant {disc} at alpha = {alpha}");
    let num = 1.0 + disc.max(0.0).sqrt();
    Ok(Interval { lo: num / (2.0 * pa), hi: num / (2.0 * p1) })
}

/// The intervals `L_0 ... L_6` for POST(a,b) and a β in their admissible
/// intersection.
#[derive(Debug, Clone, PartialEq)]
pub struct IntervalSet {
    /// Normalized parameters (`a + b > 1`).
    pub a: f64,
    pub b: f64,
    pub relabeled: bool,
    pub gamma: f64,
    /// `l[k]` is `L_k`; `None` when empty.
    pub l: [Option<Interval>; 7],
    pub nonempty_witness: Option<f64>,
    /// `(i, j)` such that the witness lies in `L_i ∩ L_j ∩ L_0`.
    pub witness_from: Option<(usize, usize)>,
}

impl IntervalSet {
    pub fn describe(&self) -> String {
        let mut out = format!("a = {}, b = {}, gamma = {:.6}", self.a, self.b, self.gamma);
        for (k, l) in self.l.iter().enumerate() {
            match l {
                Some(i) => out.push_str(&format!("\nL{k} = {i}")),
                None => out.push_str(&format!("\nL{k} = empty")),
            }
        }
        out
    }
}

pub fn beta_intervals_ab(a: f64, b: f64) -> Result<IntervalSet> {
    let (a, b, relabeled) = normalize_ab(a, b)?;
    let g = gamma_ab(a, b);
    let (na, nb) = (1.0 - a, 1.0 - b);
    let ratio_ab = na / nb * g; // āγ/b̄
    let ratio_ba = b * g / a; // bγ/a
    // b̄β² - γ(ā+b)β + a and aβ² - γ(ā+b)β + b̄
    let r1 = roots(nb, g * (na + b), a);
    let r5 = roots(a, g * (na + b), nb);
    // bγβ² - (a+b̄)β + āγ and āγβ² - (a+b̄)β + bγ
    let r2 = roots(b * g, a + nb, na * g);
    let r6 = roots(na * g, a + nb, b * g);
    let l1 = r1.and_then(|(lo, hi)| Interval::new(lo.max(ratio_ab), hi));
    let l2 = r2.and_then(|(_, lo)| Interval::new(lo, ratio_ab));
    let l3 = r2.and_then(|(hi, _)| Interval::new(f64::NEG_INFINITY, hi.min(ratio_ab)));
    let l4 = r5.and_then(|(hi, _)| Interval::new(f64::NEG_INFINITY, hi.min(ratio_ba)));
    let l5 = r5.and_then(|(_, lo)| Interval::new(lo, ratio_ba));
    let l6 = r6.and_then(|(lo, hi)| Interval::new(lo.max(ratio_ba), hi));
    let l0 = Interval::new(1.0, (a / (na * g)).min(b * g / nb));
    let l = [l0, l1, l2, l3, l4, l5, l6];

    let preferred = if a * na <= b * nb { (1, 5) } else { (2, 6) };
    let mut order = vec![preferred];
    order.extend((1..=3).flat_map(|i| (4..=6).map(move |j| (i, j))).filter(|&p| p != preferred));
    let found = order.into_iter().find_map(|(i, j)| intersect(&[l[i], l[j], l[0]]).map(|iv| (iv, (i, j))));
    let (nonempty_witness, witness_from) = match found {
        Some((iv, from)) => {
            let w = if iv.hi.is_finite() { 0.5 * (iv.lo + iv.hi) } else { iv.lo };
            (Some(w), Some(from))
        }
        None => (None, None),
    };
    Ok(IntervalSet { a, b, relabeled, gamma: g, l, nonempty_witness, witness_from })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn alpha_half() {
        let i = beta_interval_alpha(0.5).unwrap();
        assert!((i.lo - (1.0 + 0.5f64.sqrt())).abs() < 1e-12);
        assert!((i.hi - 2.0 * (1.0 + 0.5f64.sqrt())).abs() < 1e-12);
    }

    #[test]
    fn z_channel_intervals() {
        let s = beta_intervals_ab(1.0, 0.5).unwrap();
        assert!((s.gamma - 4.0).abs() < 1e-12);
        let l0 = s.l[0].unwrap();
        assert!((l0.lo - 1.0).abs() < 1e-15 && (l0.hi - 4.0).abs() < 1e-12);
        assert!(s.nonempty_witness.is_some());
        assert_eq!(s.witness_from, Some((1, 5)));
    }

    #[test]
    fn symmetric_case_witness_is_one() {
        let s = beta_intervals_ab(0.8, 0.8).unwrap();
        assert!((s.gamma - 1.0).abs() < 1e-12);
        assert!((s.nonempty_witness.unwrap() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn stable_roots() {
        let (lo, hi) = roots(1.0, 1e8, 1.0).unwrap();
        assert!((lo - 1e-8).abs() < 1e-20 && (hi - 1e8).abs() < 1e-4);
        assert!(roots(1.0, 1.0, 1.0).is_none());
        assert_eq!(roots(0.0, 2.0, 1.0).unwrap(), (0.5, f64::INFINITY));
    }
}
