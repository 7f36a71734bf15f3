//! WebAssembly bindings for the browser demo in `www/`.
//!
//! Each export returns a JSON string; errors surface as JS exceptions.

pub mod demo;

use serde::Serialize;
use wasm_bindgen::prelude::*;

fn to_js<T: Serialize>(value: majorant_newton::Result<T>) -> Result<String, JsValue> {
    let value = value.map_err(|e| JsValue::from_str(&e.to_string()))?;
    serde_json::to_string(&value).map_err(|e| JsValue::from_str(&e.to_string()))
}

/// Radii and curves for the Hölder majorant with constants `k`, `p`.
#[wasm_bindgen(js_name = holderRadii)]
pub fn holder_radii(k: f64, p: f64, samples: usize) -> Result<String, JsValue> {
    to_js(demo::holder_view(k, p, samples))
}

/// Newton errors against the majorant sequence for a registry problem.
#[wasm_bindgen(js_name = newtonEnvelope)]
pub fn newton_envelope(problem: &str, fraction: f64, angle: f64) -> Result<String, JsValue> {
    to_js(demo::envelope_view(problem, fraction, angle))
}

/// Newton orbit on the worst-case instance from `fraction·ρ`.
#[wasm_bindgen(js_name = worstCaseOrbit)]
pub fn worst_case_orbit(k: f64, p: f64, fraction: f64, iters: usize) -> Result<String, JsValue> {
    to_js(demo::worst_case_orbit(k, p, fraction, iters))
}
