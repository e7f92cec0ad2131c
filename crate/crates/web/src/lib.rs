//! Browser bindings. Every export returns a JSON string; `www/index.html`
//! draws it on a canvas.

use serde_json::{json, Value};
use wasm_bindgen::prelude::*;

use rta_core::adversary::{default_sequence, fuzz_instance, run_adversary};
use rta_core::engine::AlgorithmKind;
use rta_core::math::{self, CONSTANTS};
use rta_core::report::{run_instance, DEFAULT_SLACK};

fn to_js(r: Result<Value, String>) -> Result<String, JsError> {
    r.map(|v| v.to_string()).map_err(|e| JsError::new(&e))
}

fn algorithm(id: &str) -> Result<AlgorithmKind, String> {
    id.parse().map_err(|e: rta_core::Error| e.to_string())
}

/// Threshold, its integral, and the marking budget sampled on `samples` points.
pub fn curves_json(samples: usize) -> Result<Value, String> {
    if samples < 2 {
        return Err("need at least 2 samples".into());
    }
    let c = *CONSTANTS;
    let xs: Vec<f64> = (0..samples).map(|i| i as f64 / (samples - 1) as f64).collect();
    let ys = |f: fn(f64) -> rta_core::Result<f64>, xs: &[f64]| -> Vec<f64> {
        xs.iter().map(|&x| f(x).expect("in domain")).collect()
    };
    let budget_x: Vec<f64> = (0..samples)
        .map(|i| c.phi + (0.5 - c.phi) * i as f64 / (samples - 1) as f64)
        .collect();
    Ok(json!({
        "constants": c,
        "x": xs,
        "threshold": ys(math::threshold, &xs),
        "threshold_integral": ys(math::threshold_integral, &xs),
        "budget_x": budget_x,
        "marking_budget": ys(math::marking_budget, &budget_x),
    }))
}

/// One seeded random stream run through an algorithm: final bins and report.
pub fn simulate_json(
    alg: &str,
    n: usize,
    length: usize,
    mix: [f64; 3],
    seed: u64,
) -> Result<Value, String> {
    let kind = algorithm(alg)?;
    let inst = fuzz_instance(n, length, mix, seed).map_err(|e| e.to_string())?;
    let (outcome, report) = run_instance(kind, &inst, DEFAULT_SLACK).map_err(|e| e.to_string())?;
    let bins: Vec<Value> = outcome
        .snapshot
        .bins
        .iter()
        .map(|b| {
            json!({
                "label": b.label,
                "sizes": b.contents.iter().map(|it| it.size).collect::<Vec<_>>(),
            })
        })
        .collect();
    Ok(json!({ "bins": bins, "report": report }))
}

/// The phase adversary against an algorithm: phase sizes and outcome.
pub fn duel_json(alg: &str, n: usize) -> Result<Value, String> {
    let kind = algorithm(alg)?;
    let seq = default_sequence(n).map_err(|e| e.to_string())?;
    let mut a = kind.build(n).map_err(|e| e.to_string())?;
    let t = run_adversary(&seq, a.as_mut()).map_err(|e| e.to_string())?;
    Ok(json!({
        "n": n,
        "sizes": seq.s,
        "accepting_phases": t.j,
        "ratio": t.ratio,
        "theoretical_u": seq.theoretical_u().0,
        "ratio_limit": math::ratio(),
    }))
}

#[wasm_bindgen]
pub fn curves(samples: usize) -> Result<String, JsError> {
    to_js(curves_json(samples))
}

#[wasm_bindgen]
pub fn simulate(
    alg: &str,
    n: usize,
    length: usize,
    small: f64,
    medium: f64,
    large: f64,
    seed: u32,
) -> Result<String, JsError> {
    to_js(simulate_json(alg, n, length, [small, medium, large], seed as u64))
}

#[wasm_bindgen]
pub fn duel(alg: &str, n: usize) -> Result<String, JsError> {
    to_js(duel_json(alg, n))
}
