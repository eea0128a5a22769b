//! WebAssembly bindings behind `www/index.html`. The plain functions in
//! [`demo`] do the work and are what the native tests exercise; the exports
//! only convert errors.

use wasm_bindgen::prelude::*;

pub mod demo {
    use postcap::capacity::{feedback_capacity_dp, OptimizerConfig};
    use postcap::channel::PostChannelSpec;
    use postcap::closed_form::{binary_dmc_capacity, mary_feedback_capacity, mary_scheme_rate, post_alpha_capacity};

    /// Largest grid the page may request per axis.
    pub const MAX_POINTS: usize = 401;

    fn check_points(points: usize) -> Result<(), String> {
        if (2..=MAX_POINTS).contains(&points) {
            Ok(())
        } else {
            Err(format!("points = {points} must lie in 2..={MAX_POINTS}"))
        }
    }

    fn grid(points: usize) -> impl Iterator<Item = f64> {
        (0..points).map(move |i| i as f64 / (points - 1) as f64)
    }

    /// Capacity of POST(α) at `points` evenly spaced α in [0, 1].
    pub fn post_alpha_curve(points: usize) -> Result<Vec<f64>, String> {
        check_points(points)?;
        grid(points)
            .map(|a| post_alpha_capacity(a).map(|s| s.capacity_bits).map_err(|e| e.to_string()))
            .collect()
    }

    /// `[capacity, p(x=0), p(x=1), output flip probability]` for POST(α).
    pub fn post_alpha_point(alpha: f64) -> Result<Vec<f64>, String> {
        let s = post_alpha_capacity(alpha).map_err(|e| e.to_string())?;
        Ok(vec![s.capacity_bits, s.input_pmf[0], s.input_pmf[1], s.output_markov_transition])
    }

    /// Capacity of POST(a,b) on a `points x points` grid, row `i` holding
    /// `a = i / (points - 1)`.
    pub fn post_ab_field(points: usize) -> Result<Vec<f64>, String> {
        check_points(points)?;
        let mut out = Vec::with_capacity(points * points);
        for a in grid(points) {
            for b in grid(points) {
                out.push(binary_dmc_capacity(a, b).map_err(|e| e.to_string())?.capacity_bits);
            }
        }
        Ok(out)
    }

    /// `[capacity, gamma, p(x=0), p(x=1)]` for POST(a,b).
    pub fn post_ab_point(a: f64, b: f64) -> Result<Vec<f64>, String> {
        let s = binary_dmc_capacity(a, b).map_err(|e| e.to_string())?;
        Ok(vec![s.capacity_bits, s.gamma, s.input_pmf[0], s.input_pmf[1]])
    }

    /// `[closed-form feedback capacity, scheme rate, value-iteration lower,
    /// value-iteration upper]` for the m-ary channel.
    pub fn mary_compare(m: usize) -> Result<Vec<f64>, String> {
        if m > 64 {
            return Err(format!("m = {m} is too large for the page (at most 64)"));
        }
        let closed = mary_feedback_capacity(m).map_err(|e| e.to_string())?;
        let scheme = mary_scheme_rate(m).map_err(|e| e.to_string())?;
        let spec = PostChannelSpec::mary(m).map_err(|e| e.to_string())?;
        let cfg = OptimizerConfig { objective_tolerance: 1e-7, max_iterations: 20_000, ..Default::default() };
        let dp = feedback_capacity_dp(&spec, &cfg).map_err(|e| e.to_string())?;
        Ok(vec![closed.capacity_bits, scheme, dp.lower_bits, dp.upper_bits])
    }
}

fn js(r: Result<Vec<f64>, String>) -> Result<Vec<f64>, JsError> {
    r.map_err(|e| JsError::new(&e))
}

#[wasm_bindgen(js_name = postAlphaCurve)]
pub fn post_alpha_curve(points: usize) -> Result<Vec<f64>, JsError> {
    js(demo::post_alpha_curve(points))
}

#[wasm_bindgen(js_name = postAlphaPoint)]
pub fn post_alpha_point(alpha: f64) -> Result<Vec<f64>, JsError> {
    js(demo::post_alpha_point(alpha))
}

#[wasm_bindgen(js_name = postAbField)]
pub fn post_ab_field(points: usize) -> Result<Vec<f64>, JsError> {
    js(demo::post_ab_field(points))
}

#[wasm_bindgen(js_name = postAbPoint)]
pub fn post_ab_point(a: f64, b: f64) -> Result<Vec<f64>, JsError> {
    js(demo::post_ab_point(a, b))
}

#[wasm_bindgen(js_name = maryCompare)]
pub fn mary_compare(m: usize) -> Result<Vec<f64>, JsError> {
    js(demo::mary_compare(m))
}
