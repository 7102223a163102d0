//! Browser bindings for three interactive views: kernel weight profiles, KPSS
//! sensitivity to the bandwidth, and a structural VAR impulse-response and
//! variance-decomposition explorer on simulated data.
//!
//! Each exported function returns a JSON string; the plain Rust functions
//! underneath are what the native tests exercise.

use serde::Serialize;
use wasm_bindgen::prelude::*;

use structvar::dynamics;
use structvar::hac::{self, Bandwidth, KernelKind, KernelSpec};
use structvar::linalg;
use structvar::pipeline::{self, Dgp};
use structvar::reference;
use structvar::sim;
use structvar::svar::{self, RestrictionPattern};
use structvar::unitroot::{self, KpssSpec};
use structvar::varkit;

fn kernel_kind(name: &str) -> Result<KernelKind, String> {
    match name {
        "bartlett" => Ok(KernelKind::Bartlett),
        "qs" | "quadratic_spectral" => Ok(KernelKind::QuadraticSpectral),
        "truncated" => Ok(KernelKind::Truncated),
        other => Err(format!("unknown kernel {other:?}")),
    }
}

#[derive(Serialize)]
pub struct KernelProfile {
    pub lags: Vec<usize>,
    pub weights: Vec<f64>,
}

/// Weights `k(j / bw)` for lags `0..=max_lag`.
pub fn kernel_profile(kind: &str, bandwidth: f64, max_lag: usize) -> Result<KernelProfile, String> {
    let kind = kernel_kind(kind)?;
    if !(bandwidth.is_finite() && bandwidth > 0.0) {
        return Err("bandwidth must be positive".into());
    }
    let lags: Vec<usize> = (0..=max_lag).collect();
    let weights = lags.iter().map(|&j| hac::kernel_weight(kind, j as f64 / bandwidth)).collect();
    Ok(KernelProfile { lags, weights })
}

#[derive(Serialize)]
pub struct KpssSweep {
    pub nobs: usize,
    pub lags: Vec<usize>,
    pub statistics: Vec<f64>,
    pub critical_5pct: f64,
    pub auto_bandwidth: f64,
    pub auto_statistic: f64,
}

/// KPSS statistic across Bartlett truncation lags `0..=max_lag`, plus the
/// automatic-bandwidth value, for a simulated AR(1) series (`phi = 1` gives a
/// random walk).
pub fn kpss_sweep(phi: f64, t: usize, seed: u64, trend: bool, max_lag: usize) -> Result<KpssSweep, String> {
    if t < 20 {
        return Err("use at least 20 observations".into());
    }
    let mut r = sim::rng(seed);
    let y = if (phi - 1.0).abs() < 1e-12 {
        sim::random_walk(&mut r, t)
    } else {
        sim::ar1(&mut r, t, phi, 100)
    };
    let spec = if trend { KpssSpec::Trend } else { KpssSpec::Level };
    let lags: Vec<usize> = (0..=max_lag.min(t - 2)).collect();
    let statistics = lags
        .iter()
        .map(|&l| unitroot::kpss_values(&y, spec, KernelSpec::bartlett_lags(l)).map(|k| k.statistic))
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| e.to_string())?;
    let auto = KernelSpec::new(KernelKind::Bartlett, Bandwidth::NeweyWestAuto).map_err(|e| e.to_string())?;
    let a = unitroot::kpss_values(&y, spec, auto).map_err(|e| e.to_string())?;
    Ok(KpssSweep {
        nobs: t,
        lags,
        statistics,
        critical_5pct: unitroot::critical_value(spec, 0.05).map_err(|e| e.to_string())?,
        auto_bandwidth: a.bandwidth_used,
        auto_statistic: a.statistic,
    })
}

#[derive(Serialize)]
pub struct SvarExploration {
    pub names: Vec<String>,
    pub shocks: Vec<String>,
    pub listing: String,
    pub overid_pvalue: f64,
    /// `responses[i][j][h]`: response of variable `i` to shock `j` at horizon `h`.
    pub responses: Vec<Vec<Vec<f64>>>,
    pub fevd: Vec<Vec<f64>>,
    pub fevd_horizon: usize,
    pub long_run: Option<Vec<Vec<f64>>>,
}

/// Simulate the bundled four-variable system, fit a VAR(1) and the
/// over-identified AB model, and return its dynamics.
pub fn explore_svar(t: usize, seed: u64, h: usize, fevd_horizon: usize) -> Result<SvarExploration, String> {
    let err = |e: structvar::Error| e.to_string();
    let ds = pipeline::synth_generate(&Dgp::PaperSystem11, t, seed).map_err(err)?;
    let var = varkit::var_fit(&ds, 1).map_err(err)?;
    let grid = |rows: &[&str]| rows.iter().map(|s| s.to_string()).collect::<Vec<_>>();
    let pattern = RestrictionPattern::parse(&grid(&reference::PATTERN_A), &grid(&reference::PATTERN_B)).map_err(err)?;
    let fit = svar::svar_ml_fit(&var, &pattern)
        .and_then(|f| f.with_shock_names(reference::SHOCKS.iter().map(|s| s.to_string()).collect()))
        .map_err(err)?;
    let lr = svar::overid_lr_test(&fit, &var).map_err(err)?;
    let set = dynamics::impulse_responses(&fit, &var, h);
    let k = var.k;
    let responses = (0..k)
        .map(|i| (0..k).map(|j| set.phis.iter().map(|p| p[(i, j)]).collect()).collect())
        .collect();
    let fevd = dynamics::fevd(&fit, &var, fevd_horizon.max(1)).map_err(err)?;
    Ok(SvarExploration {
        names: var.names.clone(),
        shocks: fit.shocks.clone(),
        listing: fit.system_listing(),
        overid_pvalue: lr.pvalue,
        responses,
        fevd: linalg::to_rows(&fevd.shares),
        fevd_horizon: fevd.horizon,
        long_run: dynamics::long_run_impact(&fit, &var).ok().map(|m| linalg::to_rows(&m)),
    })
}

fn to_js<T: Serialize>(r: Result<T, String>) -> Result<String, JsValue> {
    r.and_then(|v| serde_json::to_string(&v).map_err(|e| e.to_string()))
        .map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen(js_name = kernelWeights)]
pub fn kernel_weights_js(kind: &str, bandwidth: f64, max_lag: usize) -> Result<String, JsValue> {
    to_js(kernel_profile(kind, bandwidth, max_lag))
}

#[wasm_bindgen(js_name = kpssBandwidthSweep)]
pub fn kpss_sweep_js(phi: f64, t: usize, seed: u64, trend: bool, max_lag: usize) -> Result<String, JsValue> {
    to_js(kpss_sweep(phi, t, seed, trend, max_lag))
}

#[wasm_bindgen(js_name = exploreSvar)]
pub fn explore_svar_js(t: usize, seed: u64, h: usize, fevd_horizon: usize) -> Result<String, JsValue> {
    to_js(explore_svar(t, seed, h, fevd_horizon))
}
