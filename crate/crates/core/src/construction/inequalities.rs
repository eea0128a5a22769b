use std::fmt::Write as _;

use super::beta_interval_alpha;
use crate::closed_form::{alpha_power, alpha_power_one, gamma_ab};
use crate::error::{Error, Result};

/// Margins down to this value count as holding.
pub const SLACK: f64 = 1e-12;

/// Worst case of one inequality over a grid. `margin >= 0` means it holds.
#[derive(Debug, Clone, PartialEq)]
pub struct InequalityCheck {
    pub name: &'static str,
    pub statement: &'static str,
    pub hypothesis: &'static str,
    pub points: usize,
    pub worst_margin: f64,
    /// Grid point of the worst margin: `(α, NaN)` or `(a, b)`.
    pub worst_at: (f64, f64),
}

impl InequalityCheck {
    pub fn passed(&self) -> bool {
        self.worst_margin >= -SLACK
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct InequalityReport {
    pub grid_size: usize,
    pub checks: Vec<InequalityCheck>,
}

impl InequalityReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(InequalityCheck::passed)
    }

    /// `key: value` lines, one block per inequality.
    pub fn to_text(&self) -> String {
        let mut out = format!("grid_size: {}\npassed: {}\n", self.grid_size, self.passed());
        for c in &self.checks {
            let _ = write!(
                out,
                "\n[{}]\nstatement: {}\nhypothesis: {}\npoints: {}\nworst_margin: {:.6e}\nworst_at: {}\npassed: {}\n",
                c.name,
                c.statement,
                c.hypothesis,
                c.points,
                c.worst_margin,
                fmt_point(c.worst_at),
                c.passed()
            );
        }
        out
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("name,hypothesis,points,worst_margin,worst_x,worst_y,passed\n");
        for c in &self.checks {
            let y = if c.worst_at.1.is_nan() { String::new() } else { format!("{:.6}", c.worst_at.1) };
            let _ = writeln!(
                out,
                "{},\"{}\",{},{:.6e},{:.6},{},{}",
                c.name,
                c.hypothesis,
                c.points,
                c.worst_margin,
                c.worst_at.0,
                y,
                c.passed()
            );
        }
        out
    }
}

fn fmt_point((x, y): (f64, f64)) -> String {
    if y.is_nan() {
        format!("alpha = {x:.6}")
    } else {
        format!("a = {x:.6}, b = {y:.6}")
    }
}

struct Tracker {
    check: InequalityCheck,
}

impl Tracker {
    fn new(name: &'static str, statement: &'static str, hypothesis: &'static str) -> Self {
        Self {
            check: InequalityCheck { name, statement, hypothesis, points: 0, worst_margin: f64::INFINITY, worst_at: (f64::NAN, f64::NAN) },
        }
    }

    fn see(&mut self, margin: f64, at: (f64, f64)) {
        self.check.points += 1;
        // NaN must never pass silently
        let margin = if margin.is_nan() { f64::NEG_INFINITY } else { margin };
        if margin < self.check.worst_margin {
            self.check.worst_margin = margin;
            self.check.worst_at = at;
        }
    }
}

/// Evaluates the supporting inequalities on open uniform grids: `α = i/(G+1)`
/// and `(a, b) = (i/(G+1), j/(G+1))` with `a + b > 1`, each restricted to its
/// stated hypotheses.
pub fn verify_appendix_inequalities(grid_size: usize) -> Result<InequalityReport> {
    if grid_size < 10 {
        return Err(Error::InvalidParameter(format!("grid size {grid_size} is below 10")));
    }
    let step = 1.0 / (grid_size + 1) as f64;
    let mut b1 = Tracker::new("B1", "alpha^(1/(1-alpha)) <= 1", "0 < alpha < 1");
    let mut b2 = Tracker::new("B2", "4 alpha^((1+alpha)/(1-alpha)) <= 1", "0 < alpha < 1");
    let mut b3 = Tracker::new("B3", "(1 + sqrt(1 - 4 alpha^((1+alpha)/(1-alpha)))) / (2 alpha^(alpha/(1-alpha))) >= 1", "0 < alpha < 1");
    let mut b4 = Tracker::new("B4", "beta interval upper end <= alpha^(-1/(1-alpha))", "0 < alpha < 1");
    for i in 1..=grid_size {
        let alpha = i as f64 * step;
        let at = (alpha, f64::NAN);
        let (pa, p1) = (alpha_power(alpha), alpha_power_one(alpha));
        b1.see(1.0 - p1, at);
        b2.see(1.0 - 4.0 * pa * p1, at);
        let iv = beta_interval_alpha(alpha)?;
        b3.see(iv.lo - 1.0, at);
        b4.see((1.0 / p1 - iv.hi) * p1, at);
    }

    let mut d1 = Tracker::new("D1", "gamma^2 (1-a+b)^2 - 4 a (1-b) >= 0", "a + b > 1");
    let mut d1s = Tracker::new("D1'", "(a+1-b)^2 - 4 (1-a) b gamma^2 >= 0", "a + b > 1");
    let mut d2 = Tracker::new("D2", "a >= b", "a + b > 1, a(1-a) <= b(1-b)");
    let mut d3 = Tracker::new(
        "D3",
        "gamma(1-a+b) - sqrt(gamma^2 (1-a+b)^2 - 4 a (1-b)) <= 2 (1-b)",
        "a + b > 1, a(1-a) <= b(1-b)",
    );
    let mut d4 = Tracker::new("D4", "b gamma / a >= 1", "a + b > 1, a(1-a) <= b(1-b)");
    let mut d5 = Tracker::new("D5", "gamma^2 <= a^2 / (b (1-a))", "a + b > 1");
    let mut d6 = Tracker::new("D6", "gamma (1-a+b) / (2 (1-b)) >= 1", "a + b > 1, a(1-a) <= b(1-b)");
    let mut d7a = Tracker::new("D7a", "gamma >= (1-b)/b", "a + b > 1");
    let mut d7b = Tracker::new("D7b", "gamma <= a/(1-a)", "a + b > 1");
    for i in 1..=grid_size {
        for j in 1..=grid_size {
            if i + j <= grid_size + 1 {
                continue;
            }
            let (a, b) = (i as f64 * step, j as f64 * step);
            let at = (a, b);
            let (na, nb) = (1.0 - a, 1.0 - b);
            let g = gamma_ab(a, b);
            let disc1 = g * g * (na + b).powi(2) - 4.0 * a * nb;
            d1.see(disc1, at);
            d1s.see((a + nb).powi(2) - 4.0 * na * b * g * g, at);
            d5.see(a * a / (b * na) - g * g, at);
            d7a.see(g - nb / b, at);
            d7b.see(a / na - g, at);
            if a * na <= b * nb {
                d2.see(a - b, at);
                d3.see(2.0 * nb - (g * (na + b) - disc1.max(0.0).sqrt()), at);
                d4.see(b * g / a - 1.0, at);
                d6.see(g * (na + b) / (2.0 * nb) - 1.0, at);
            }
        }
    }
    let checks = [b1, b2, b3, b4, d1, d1s, d2, d3, d4, d5, d6, d7a, d7b].into_iter().map(|t| t.check).collect();
    Ok(InequalityReport { grid_size, checks })
}
