//! Numerical tolerances shared by the whole crate.
//!
//! A single [`ToleranceConfig`] is installed process-wide (once) and read by
//! the validators. Library entry points that take an explicit tolerance do not
//! consult it.

use std::sync::OnceLock;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ToleranceConfig {
    /// Allowed deviation of a pmf (or kernel column) total from 1.
    pub pmf: f64,
    /// Allowed entrywise error of compose/factorize round trips.
    pub round_trip: f64,
    /// Entries down to `-negative_entry` are accepted and read as 0.
    pub negative_entry: f64,
    /// Prefix masses at or below this are treated as dead branches.
    pub dead_branch: f64,
    /// Support threshold used when reading optimality certificates.
    pub support: f64,
    /// Row-sum tolerance for step policies and step kernels.
    pub stochastic_row: f64,
}

impl Default for ToleranceConfig {
    fn default() -> Self {
        Self {
            pmf: 1e-9,
            round_trip: 1e-10,
            negative_entry: 1e-12,
            dead_branch: 1e-12,
            support: 1e-8,
            stochastic_row: 1e-12,
        }
    }
}

impl ToleranceConfig {
    /// Parses `key=value` lines. Blank lines and `#` comments are skipped;
    /// unknown keys are an error so typos do not pass silently.
    pub fn from_key_values(text: &str) -> Result<Self> {
        let mut cfg = Self::default();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| Error::Config {
                line: i + 1,
                message: format!("expected key=value, got `{line}`"),
            })?;
            let value: f64 = value.trim().parse().map_err(|_| Error::Config {
                line: i + 1,
                message: format!("`{}` is not a number", value.trim()),
            })?;
            if !(value > 0.0 && value.is_finite()) {
                return Err(Error::Config {
                    line: i + 1,
                    message: "tolerances must be positive".into(),
                });
            }
            let slot = match key.trim() {
                "pmf" => &mut cfg.pmf,
                "round_trip" => &mut cfg.round_trip,
                "negative_entry" => &mut cfg.negative_entry,
                "dead_branch" => &mut cfg.dead_branch,
                "support" => &mut cfg.support,
                "stochastic_row" => &mut cfg.stochastic_row,
                other => {
                    return Err(Error::Config {
                        line: i + 1,
                        message: format!("unknown tolerance `{other}`"),
                    })
                }
            };
            *slot = value;
        }
        Ok(cfg)
    }
}

static GLOBAL: OnceLock<ToleranceConfig> = OnceLock::new();

/// The process-wide tolerances (defaults unless [`install`] ran first).
pub fn global() -> &'static ToleranceConfig {
    GLOBAL.get_or_init(ToleranceConfig::default)
}

/// Installs process-wide tolerances. Returns false if they were already fixed.
pub fn install(cfg: ToleranceConfig) -> bool {
    GLOBAL.set(cfg).is_ok()
}
