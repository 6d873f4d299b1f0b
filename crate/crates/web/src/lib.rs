//! WebAssembly bindings for the static demo page in `www/`.
//!
//! Every export takes plain numbers and returns a JSON string, so the page
//! needs no generated TypeScript types and the same functions run natively
//! under `cargo test`.

use fourier_grover::analysis::{estimate_nm, expected_nm, first_maximum, PeakTrace};
use fourier_grover::cavity::{pulse_energies, run_search, CavityConfig};
use fourier_grover::config::ConfigFile;
use fourier_grover::field::half_max_center;
use fourier_grover::grover::{optimal_iterations, phase_matching_scan, success_trace};
use serde::Serialize;
use serde_json::json;
use wasm_bindgen::prelude::*;

/// Half-width of the profile window sent to the page.
const WINDOW: f64 = 0.8e-3;

#[derive(Debug, Serialize)]
pub struct Profile {
    pub iteration_count: f64,
    pub peak_value: f64,
    pub intensity: Vec<f64>,
}

#[derive(Debug, Serialize)]
pub struct SearchView {
    pub x_um: Vec<f64>,
    pub profiles: Vec<Profile>,
    pub first_maximum: Option<f64>,
    pub estimate_nm: Option<f64>,
    pub expected_nm: f64,
    pub peak_center_um: Option<f64>,
}

#[derive(Debug, Serialize)]
pub struct TrainView {
    pub iteration_count: Vec<f64>,
    pub slit_energy: Vec<f64>,
    pub total_energy: Vec<f64>,
}

#[derive(Debug, Serialize)]
pub struct PhaseView {
    pub phase_diffusion: Vec<f64>,
    pub best_success: Vec<f64>,
    pub matched_trace: Vec<f64>,
    pub optimal_iterations: f64,
}

fn cavity(overlay: serde_json::Value) -> Result<CavityConfig, String> {
    let file = ConfigFile::parse(&overlay.to_string()).map_err(|e| e.to_string())?;
    Ok(file.resolve().map_err(|e| e.to_string())?.cavity)
}

/// Cavity search with the paper-42um preset as the base.
pub fn search_view(
    flat_width_um: f64,
    phase_rad: f64,
    iaa_ramp_um: f64,
    n_pulses: usize,
) -> Result<SearchView, String> {
    let config = cavity(json!({
        "n_pulses": n_pulses,
        "oracle": {"flat_width_um": flat_width_um, "phase_rad": phase_rad},
        "iaa": {"ramp_width_um": iaa_ramp_um, "phase_rad": phase_rad},
    }))?;
    let trace = run_search(&config).map_err(|e| e.to_string())?;
    let grid = trace.grid;
    let keep: Vec<usize> = (0..grid.n_samples())
        .filter(|&i| grid.coordinate(i).abs() <= WINDOW)
        .step_by(2)
        .collect();
    let profiles = trace
        .pulses
        .iter()
        .map(|p| {
            let i = p.compensated_intensity();
            Profile {
                iteration_count: p.iteration_count,
                peak_value: p.peak.value,
                intensity: keep.iter().map(|&k| i[k]).collect(),
            }
        })
        .collect();
    let k = first_maximum(&PeakTrace::from_search(&trace)).ok();
    let peak_center_um = k
        .and_then(|k| {
            trace.pulses.iter().min_by(|a, b| {
                (a.iteration_count - k)
                    .abs()
                    .total_cmp(&(b.iteration_count - k).abs())
            })
        })
        .and_then(|p| half_max_center(&p.field).ok())
        .map(|x| x * 1e6);
    Ok(SearchView {
        x_um: keep.iter().map(|&i| grid.coordinate(i) * 1e6).collect(),
        profiles,
        first_maximum: k,
        estimate_nm: k.map(|k| estimate_nm(k, phase_rad)),
        expected_nm: expected_nm(config.input_fwhm, config.oracle.flat_width()),
        peak_center_um,
    })
}

/// Slit energies behind the oracle position, without loss compensation.
pub fn train_view(
    flat_width_um: f64,
    plates: bool,
    slit_width_um: f64,
) -> Result<TrainView, String> {
    let phase = if plates { -1.1 } else { 0.0 };
    let config = cavity(json!({
        "loss_compensation": false,
        "oracle": {"flat_width_um": flat_width_um, "phase_rad": phase},
        "iaa": {"phase_rad": phase},
        "slit": {"width_um": slit_width_um},
    }))?;
    let trace = run_search(&config).map_err(|e| e.to_string())?;
    let train = pulse_energies(&trace, &config.slit);
    Ok(TrainView {
        iteration_count: train.iter().map(|p| p.iteration_count).collect(),
        slit_energy: train.iter().map(|p| p.slit_energy).collect(),
        total_energy: trace.pulses.iter().map(|p| p.total_energy).collect(),
    })
}

/// Best reachable success probability as the diffusion phase is detuned.
pub fn phase_view(n_over_m: f64, phase_oracle_rad: f64) -> Result<PhaseView, String> {
    let scan = phase_matching_scan(n_over_m, 1.0, phase_oracle_rad, 0.05, 30)
        .map_err(|e| e.to_string())?;
    let k_opt =
        optimal_iterations(n_over_m, 1.0, 0.5 * phase_oracle_rad).map_err(|e| e.to_string())?;
    let horizon = (3.0 * k_opt).ceil() as usize;
    let matched = success_trace(n_over_m, 1.0, phase_oracle_rad, phase_oracle_rad, horizon)
        .map_err(|e| e.to_string())?;
    Ok(PhaseView {
        phase_diffusion: scan.iter().map(|p| p.0).collect(),
        best_success: scan.iter().map(|p| p.1).collect(),
        matched_trace: matched,
        optimal_iterations: k_opt,
    })
}

fn to_json<T: Serialize>(v: Result<T, String>) -> Result<String, String> {
    v.and_then(|v| serde_json::to_string(&v).map_err(|e| e.to_string()))
}

#[wasm_bindgen]
pub fn search(
    flat_width_um: f64,
    phase_rad: f64,
    iaa_ramp_um: f64,
    n_pulses: usize,
) -> Result<String, String> {
    to_json(search_view(flat_width_um, phase_rad, iaa_ramp_um, n_pulses))
}

#[wasm_bindgen]
pub fn pulse_train(flat_width_um: f64, plates: bool, slit_width_um: f64) -> Result<String, String> {
    to_json(train_view(flat_width_um, plates, slit_width_um))
}

#[wasm_bindgen]
pub fn phase_matching(n_over_m: f64, phase_oracle_rad: f64) -> Result<String, String> {
    to_json(phase_view(n_over_m, phase_oracle_rad))
}
