//! Quantities derived from search traces and beam geometry.

use std::cmp::Ordering;
use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::cavity::SearchTrace;
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PeakSample {
    pub iteration_count: f64,
    pub peak_value: f64,
    pub peak_position: f64,
}

/// Peak height and position per pulse, in increasing iteration order.
#[derive(Clone, Debug, PartialEq, Default, Serialize, Deserialize)]
pub struct PeakTrace {
    samples: Vec<PeakSample>,
}

impl PeakTrace {
    pub fn new(samples: Vec<PeakSample>) -> Result<Self> {
        if samples.windows(2).any(|w| {
            w[1].iteration_count.partial_cmp(&w[0].iteration_count) != Some(Ordering::Greater)
        }) {
            return Err(Error::Measurement(
                "iteration counts must be strictly increasing".into(),
            ));
        }
        Ok(Self { samples })
    }

    /// Build from `(iteration_count, peak_value)` pairs with unknown positions.
    pub fn from_values(points: impl IntoIterator<Item = (f64, f64)>) -> Result<Self> {
        Self::new(
            points
                .into_iter()
                .map(|(iteration_count, peak_value)| PeakSample {
                    iteration_count,
                    peak_value,
                    peak_position: f64::NAN,
                })
                .collect(),
        )
    }

    pub fn from_search(trace: &SearchTrace) -> Self {
        Self {
            samples: trace
                .pulses
                .iter()
                .map(|p| PeakSample {
                    iteration_count: p.iteration_count,
                    peak_value: p.peak.value,
                    peak_position: trace.reported_position(p),
                })
                .collect(),
        }
    }

    pub fn samples(&self) -> &[PeakSample] {
        &self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }
}

/// Iteration count of the first local maximum of the peak height, refined by
/// the vertex of the parabola through the maximum and its two neighbours.
pub fn first_maximum(trace: &PeakTrace) -> Result<f64> {
    let s = trace.samples();
    if s.len() < 3 {
        return Err(Error::Measurement(format!(
            "need at least 3 pulses to locate a maximum, got {}",
            s.len()
        )));
    }
    let i = (1..s.len() - 1)
        .find(|&i| s[i].peak_value > s[i - 1].peak_value && s[i].peak_value >= s[i + 1].peak_value)
        .ok_or_else(|| {
            Error::Measurement("peak height has no interior maximum; run more pulses".into())
        })?;
    Ok(parabola_vertex(
        (s[i - 1].iteration_count, s[i - 1].peak_value),
        (s[i].iteration_count, s[i].peak_value),
        (s[i + 1].iteration_count, s[i + 1].peak_value),
    ))
}

fn parabola_vertex((x0, y0): (f64, f64), (x1, y1): (f64, f64), (x2, y2): (f64, f64)) -> f64 {
    let d01 = (y1 - y0) / (x1 - x0);
    let d12 = (y2 - y1) / (x2 - x1);
    let curvature = (d12 - d01) / (x2 - x0);
    if curvature == 0.0 {
        return x1;
    }
    // y = y1 + d * (x - x1) + c (x - x1)^2 with d the slope at x1
    let slope = d01 + curvature * (x1 - x0);
    x1 - slope / (2.0 * curvature)
}

/// `N/m` implied by a first maximum at `k_star` iterations with per-pass
/// plate phase `phase_pass`: `(4 sin|φ| k* / π)²`. Use `π/2` for the
/// ideal-phase inversion.
pub fn estimate_nm(k_star: f64, phase_pass: f64) -> f64 {
    let r = 4.0 * phase_pass.abs().sin() * k_star / PI;
    r * r
}

/// Geometric `N/m`: beam FWHM over oracle line width.
pub fn expected_nm(beam_fwhm: f64, flat_width: f64) -> f64 {
    beam_fwhm / flat_width
}

/// Rayleigh resolution `0.61 λ / NA`.
pub fn rayleigh_resolution(wavelength: f64, numerical_aperture: f64) -> f64 {
    0.61 * wavelength / numerical_aperture
}

/// Number of resolvable positions, `(D / δ)^dims`.
pub fn max_database_size(beam_diameter: f64, resolution: f64, dims: u32) -> Result<f64> {
    check_dims(dims)?;
    Ok((beam_diameter / resolution).powi(dims as i32))
}

/// Qubits needed to index the same number of positions, `dims · log₂(D / δ)`.
pub fn equivalent_qubits(beam_diameter: f64, resolution: f64, dims: u32) -> Result<f64> {
    check_dims(dims)?;
    Ok(f64::from(dims) * (beam_diameter / resolution).log2())
}

fn check_dims(dims: u32) -> Result<()> {
    if dims == 1 || dims == 2 {
        Ok(())
    } else {
        Err(Error::config("dims", format!("must be 1 or 2, got {dims}")))
    }
}
