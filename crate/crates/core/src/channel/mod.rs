//! POST channel families, their one-step kernels and the sequence-level
//! channel matrices `P(y^n || x^n, s_0)`.

mod inverse;
mod sequence;

use std::fmt;
use std::str::FromStr;

pub use inverse::{invert_sequence_kernel, solve_sequence_kernel};
pub use sequence::{
    build_sequence_kernel, build_sequence_kernel_with, induced_output_pmf, ChannelMatrix, ChannelStorage,
    SparseKernel, StorageMode, DEFAULT_DENSE_CAP,
};
pub(crate) use sequence::Transitions;

use crate::error::{Error, Result};
use crate::tolerance;

/// A one-step channel `p(y | x)` stored with rows indexed by `y` and columns
/// by `x`, so every column is a pmf.
#[derive(Debug, Clone, PartialEq)]
pub struct StepKernel {
    inputs: usize,
    outputs: usize,
    values: Vec<f64>,
}

impl StepKernel {
    /// `rows[y][x] = p(y | x)`.
    pub fn from_rows(rows: Vec<Vec<f64>>) -> Result<Self> {
        let outputs = rows.len();
        let inputs = rows.first().map_or(0, Vec::len);
        if outputs == 0 || inputs == 0 || rows.iter().any(|r| r.len() != inputs) {
            return Err(Error::InvalidChannel("step kernel rows must be nonempty and equally long".into()));
        }
        let kernel = Self { inputs, outputs, values: rows.concat() };
        kernel.check(tolerance::global().stochastic_row)?;
        Ok(kernel)
    }

    fn check(&self, tol: f64) -> Result<()> {
        for x in 0..self.inputs {
            let mut total = 0.0;
            for y in 0..self.outputs {
                let p = self.get(y, x);
                if !(0.0..=1.0).contains(&p) {
                    return Err(Error::InvalidChannel(format!("p(y={y}|x={x}) = {p} is not a probability")));
                }
                total += p;
            }
            if (total - 1.0).abs() > tol {
                return Err(Error::InvalidChannel(format!("column x={x} sums to {total}")));
            }
        }
        Ok(())
    }

    pub fn inputs(&self) -> usize {
        self.inputs
    }

    pub fn outputs(&self) -> usize {
        self.outputs
    }

    /// `p(y | x)`.
    #[inline]
    pub fn get(&self, y: usize, x: usize) -> f64 {
        self.values[y * self.inputs + x]
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        self.values.chunks(self.inputs).map(<[f64]>::to_vec).collect()
    }

    /// Nonzero `(y, p(y|x))` pairs for input `x`, in increasing `y`.
    pub fn support(&self, x: usize) -> Vec<(usize, f64)> {
        (0..self.outputs).map(|y| (y, self.get(y, x))).filter(|&(_, p)| p > 0.0).collect()
    }
}

/// A member of one of the POST channel families.
#[derive(Debug, Clone, PartialEq)]
pub enum PostChannelSpec {
    /// Z channel in state 0, S channel in state 1.
    PostAlpha { alpha: f64 },
    /// Binary channel with parameters `(a, b)` in state 0 and `(b, a)` in state 1.
    PostAB { a: f64, b: f64 },
    /// The `(m+1)`-ary channel where feedback increases capacity for large `m`.
    /// The erasure-like symbol is `m`.
    MaryPost { m: usize },
    /// One step kernel per state; the state is the previous output.
    Custom { states: Vec<StepKernel> },
}

fn check_unit(name: &str, v: f64) -> Result<()> {
    if (0.0..=1.0).contains(&v) {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("{name} = {v} must lie in [0, 1]")))
    }
}

impl PostChannelSpec {
    pub fn post_alpha(alpha: f64) -> Result<Self> {
        check_unit("alpha", alpha)?;
        Ok(Self::PostAlpha { alpha })
    }

    pub fn post_ab(a: f64, b: f64) -> Result<Self> {
        check_unit("a", a)?;
        check_unit("b", b)?;
        Ok(Self::PostAB { a, b })
    }

    pub fn mary(m: usize) -> Result<Self> {
        if m == 0 {
            return Err(Error::InvalidParameter("m must be at least 1".into()));
        }
        Ok(Self::MaryPost { m })
    }

    pub fn custom(states: Vec<StepKernel>) -> Result<Self> {
        let spec = Self::Custom { states };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            Self::PostAlpha { alpha } => check_unit("alpha", *alpha),
            Self::PostAB { a, b } => check_unit("a", *a).and(check_unit("b", *b)),
            Self::MaryPost { m } => Self::mary(*m).map(|_| ()),
            Self::Custom { states } => {
                let first = states
                    .first()
                    .ok_or_else(|| Error::InvalidChannel("custom channel needs at least one state".into()))?;
                if states.len() != first.outputs {
                    return Err(Error::InvalidChannel(format!(
                        "{} state kernels for an output alphabet of {}",
                        states.len(),
                        first.outputs
                    )));
                }
                for k in states {
                    if k.inputs != first.inputs || k.outputs != first.outputs {
                        return Err(Error::InvalidChannel("state kernels differ in shape".into()));
                    }
                    k.check(tolerance::global().stochastic_row)?;
                }
                Ok(())
            }
        }
    }

    pub fn input_alphabet(&self) -> usize {
        match self {
            Self::PostAlpha { .. } | Self::PostAB { .. } => 2,
            Self::MaryPost { m } => m + 1,
            Self::Custom { states } => states[0].inputs,
        }
    }

    /// Also the number of states.
    pub fn output_alphabet(&self) -> usize {
        match self {
            Self::PostAlpha { .. } | Self::PostAB { .. } => 2,
            Self::MaryPost { m } => m + 1,
            Self::Custom { states } => states[0].outputs,
        }
    }

    /// `p(y | x, s)` for state `s`.
    pub fn step_kernel(&self, state: usize) -> Result<StepKernel> {
        let alphabet = self.output_alphabet();
        if state >= alphabet {
            return Err(Error::StateOutOfRange { state, alphabet });
        }
        let kernel = match *self {
            Self::PostAlpha { alpha } => {
                let rows = if state == 0 {
                    vec![vec![1.0, alpha], vec![0.0, 1.0 - alpha]]
                } else {
                    vec![vec![1.0 - alpha, 0.0], vec![alpha, 1.0]]
                };
                StepKernel { inputs: 2, outputs: 2, values: rows.concat() }
            }
            Self::PostAB { a, b } => {
                let (p, q) = if state == 0 { (a, b) } else { (b, a) };
                StepKernel { inputs: 2, outputs: 2, values: vec![p, 1.0 - q, 1.0 - p, q] }
            }
            Self::MaryPost { m } => {
                let k = m + 1;
                let mut values = vec![0.0; k * k];
                let mut set = |y: usize, x: usize, p: f64| values[y * k + x] = p;
                if state < m {
                    for x in 0..m {
                        set(x, x, 0.5);
                        set(m, x, 0.5);
                    }
                    set(m, m, 1.0);
                } else {
                    for x in 0..m {
                        set(m, x, 1.0);
                    }
                    set(0, m, 1.0);
                }
                StepKernel { inputs: k, outputs: k, values }
            }
            Self::Custom { ref states } => states[state].clone(),
        };
        Ok(kernel)
    }

    /// All state kernels, indexed by state.
    pub fn step_kernels(&self) -> Vec<StepKernel> {
        (0..self.output_alphabet())
            .map(|s| self.step_kernel(s).expect("state in range"))
            .collect()
    }

    /// Short human-readable name, e.g. `POST(0.5)`.
    pub fn label(&self) -> String {
        match self {
            Self::PostAlpha { alpha } => format!("POST({alpha})"),
            Self::PostAB { a, b } => format!("POST({a},{b})"),
            Self::MaryPost { m } => format!("POST-m({m})"),
            Self::Custom { states } => format!("custom({} states)", states.len()),
        }
    }
}

/// Plain-text `key = value` form. Floats use the shortest representation that
/// parses back to the same value.
impl fmt::Display for PostChannelSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::PostAlpha { alpha } => write!(f, "family = post-alpha\nalpha = {alpha}\n"),
            Self::PostAB { a, b } => write!(f, "family = post-ab\na = {a}\nb = {b}\n"),
            Self::MaryPost { m } => write!(f, "family = mary\nm = {m}\n"),
            Self::Custom { states } => {
                writeln!(f, "family = custom")?;
                for (s, k) in states.iter().enumerate() {
                    let rows: Vec<String> = k
                        .rows()
                        .iter()
                        .map(|r| r.iter().map(f64::to_string).collect::<Vec<_>>().join(" "))
                        .collect();
                    writeln!(f, "state{s} = {}", rows.join("; "))?;
                }
                Ok(())
            }
        }
    }
}

impl FromStr for PostChannelSpec {
    type Err = Error;

    fn from_str(text: &str) -> Result<Self> {
        let mut pairs = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| Error::Config {
                line: i + 1,
                message: format!("expected key = value, got `{line}`"),
            })?;
            pairs.push((i + 1, k.trim().to_string(), v.trim().to_string()));
        }
        let lookup = |key: &str| pairs.iter().find(|(_, k, _)| k == key);
        let number = |key: &str| -> Result<f64> {
            let (line, _, v) = lookup(key).ok_or_else(|| Error::Config { line: 0, message: format!("missing `{key}`") })?;
            v.parse().map_err(|_| Error::Config { line: *line, message: format!("`{v}` is not a number") })
        };
        let (_, _, family) =
            lookup("family").ok_or_else(|| Error::Config { line: 0, message: "missing `family`".into() })?;
        let allowed: &[&str] = match family.as_str() {
            "post-alpha" => &["family", "alpha"],
            "post-ab" => &["family", "a", "b"],
            "mary" => &["family", "m"],
            "custom" => &["family"],
            other => {
                return Err(Error::Config { line: 0, message: format!("unknown family `{other}`") });
            }
        };
        for (line, k, _) in &pairs {
            let custom_state = family == "custom" && k.starts_with("state");
            if !allowed.contains(&k.as_str()) && !custom_state {
                return Err(Error::Config { line: *line, message: format!("unexpected key `{k}`") });
            }
        }
        match family.as_str() {
            "post-alpha" => Self::post_alpha(number("alpha")?),
            "post-ab" => Self::post_ab(number("a")?, number("b")?),
            "mary" => {
                let (line, _, v) = lookup("m").ok_or_else(|| Error::Config { line: 0, message: "missing `m`".into() })?;
                let m = v.parse().map_err(|_| Error::Config { line: *line, message: format!("`{v}` is not an integer") })?;
                Self::mary(m)
            }
            _ => {
                let mut states = Vec::new();
                for s in 0.. {
                    let Some((line, _, v)) = lookup(&format!("state{s}")) else { break };
                    let rows = v
                        .split(';')
                        .map(|row| row.split_whitespace().map(str::parse).collect::<std::result::Result<Vec<f64>, _>>())
                        .collect::<std::result::Result<Vec<_>, _>>()
                        .map_err(|_| Error::Config { line: *line, message: "bad number in state kernel".into() })?;
                    states.push(StepKernel::from_rows(rows)?);
                }
                Self::custom(states)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn post_alpha_state_kernels() {
        let spec = PostChannelSpec::post_alpha(0.3).unwrap();
        assert_eq!(spec.step_kernel(0).unwrap().rows(), vec![vec![1.0, 0.3], vec![0.0, 0.7]]);
        let s = spec.step_kernel(1).unwrap();
        assert!((s.get(0, 0) - 0.7).abs() < 1e-15 && s.get(1, 1) == 1.0);
        assert!(matches!(spec.step_kernel(2), Err(Error::StateOutOfRange { state: 2, alphabet: 2 })));
    }

    #[test]
    fn post_ab_state_kernels() {
        let spec = PostChannelSpec::post_ab(0.9, 0.6).unwrap();
        let k0 = spec.step_kernel(0).unwrap();
        let k1 = spec.step_kernel(1).unwrap();
        let close = |a: f64, b: f64| (a - b).abs() < 1e-15;
        assert!(close(k0.get(0, 0), 0.9) && close(k0.get(0, 1), 0.4) && close(k0.get(1, 0), 0.1));
        assert!(close(k1.get(0, 0), 0.6) && close(k1.get(0, 1), 0.1) && close(k1.get(1, 1), 0.9));
    }

    #[test]
    fn mary_kernel_reproduces_the_symmetric_policy_chain() {
        // Under p(x=m | y<m) = g, p(x=m | y=m) = d and uniform elsewhere, the
        // output chain must be the one used for the feedback capacity formula.
        for m in [1usize, 2, 3, 5] {
            let spec = PostChannelSpec::mary(m).unwrap();
            let (g, d) = (0.3, 0.45);
            for s in 0..=m {
                let k = spec.step_kernel(s).unwrap();
                let policy: Vec<f64> = (0..=m)
                    .map(|x| match (s < m, x == m) {
                        (true, true) => g,
                        (true, false) => (1.0 - g) / m as f64,
                        (false, true) => d,
                        (false, false) => (1.0 - d) / m as f64,
                    })
                    .collect();
                let out: Vec<f64> = (0..=m).map(|y| (0..=m).map(|x| k.get(y, x) * policy[x]).sum()).collect();
                for (y, &p) in out.iter().enumerate() {
                    let expected = match (s < m, y) {
                        (true, y) if y == m => (1.0 + g) / 2.0,
                        (true, _) => (1.0 - g) / (2 * m) as f64,
                        (false, y) if y == m => 1.0 - d,
                        (false, 0) => d,
                        (false, _) => 0.0,
                    };
                    assert!((p - expected).abs() < 1e-15, "m={m} s={s} y={y}");
                }
            }
        }
    }

    #[test]
    fn config_round_trip_is_exact() {
        let specs = vec![
            PostChannelSpec::post_alpha(0.1 + 0.2).unwrap(),
            PostChannelSpec::post_ab(0.9, 1.0 / 3.0).unwrap(),
            PostChannelSpec::mary(16).unwrap(),
            PostChannelSpec::custom(vec![
                StepKernel::from_rows(vec![vec![0.25, 1.0], vec![0.75, 0.0]]).unwrap(),
                StepKernel::from_rows(vec![vec![1.0, 0.1], vec![0.0, 0.9]]).unwrap(),
            ])
            .unwrap(),
        ];
        for spec in specs {
            let text = spec.to_string();
            assert_eq!(text.parse::<PostChannelSpec>().unwrap(), spec, "{text}");
        }
    }

    #[test]
    fn config_rejects_bad_input() {
        assert!("family = post-alpha\nalpha = 1.5".parse::<PostChannelSpec>().is_err());
        assert!("family = post-alpha\nbeta = 0.5".parse::<PostChannelSpec>().is_err());
        assert!("family = bsc\np = 0.1".parse::<PostChannelSpec>().is_err());
        assert!("alpha = 0.5".parse::<PostChannelSpec>().is_err());
        assert!("family = mary\nm = 0".parse::<PostChannelSpec>().is_err());
        assert!(StepKernel::from_rows(vec![vec![0.5, 0.5], vec![0.4, 0.5]]).is_err());
    }
}
