//! The search cavity: oracle plate, lens, IAA plate in the focal plane, lens,
//! end mirror, and back.
//!
//! Everything is propagated on a single spatial grid (the oracle plane) and a
//! single focal-plane grid built from `f1`. The telescope magnification
//! `-f2/f1` only rescales reported coordinates.
//!
//! A forward half pass maps the oracle plane onto the output mirror as
//! `F Φf F Φo`, which images the beam with a spatial inversion (`F² = P`).
//! Recorded pulses are flipped back so every profile in a [`SearchTrace`] is
//! expressed in oracle-plane orientation, with the sought item at `+x₀`.

use crate::error::{Error, Result};
use crate::field::{
    dft_centered, gaussian_input, idft_centered, peak_of_profile, ComplexField, FourierGrid,
    Grid1D, Peak,
};
use crate::optics::{
    apply_phase_passes, apply_plate, apply_roundtrip_loss, slit_energy, LossModel, Slit,
    TrapezoidPhasePlate,
};

pub const DEFAULT_WAVELENGTH: f64 = 532e-9;
pub const DEFAULT_INPUT_FWHM: f64 = 1.33e-3;
pub const DEFAULT_FOCAL_LENGTH_1: f64 = 0.4;
pub const DEFAULT_FOCAL_LENGTH_2: f64 = 0.6;
pub const DEFAULT_OUTPUT_TRANSMISSION: f64 = 0.02;
pub const DEFAULT_N_SAMPLES: usize = 16384;
pub const DEFAULT_PITCH: f64 = 2e-6;
pub const DEFAULT_N_PULSES: usize = 12;
pub const DEFAULT_ORACLE_CENTER: f64 = 0.15e-3;
pub const DEFAULT_PHASE: f64 = -1.1;

/// Complete physical description of one cavity run.
#[derive(Clone, Debug, PartialEq)]
pub struct CavityConfig {
    pub wavelength: f64,
    pub input_fwhm: f64,
    pub oracle: TrapezoidPhasePlate,
    pub iaa: TrapezoidPhasePlate,
    pub focal_length_1: f64,
    pub focal_length_2: f64,
    pub loss: LossModel,
    pub output_mirror_transmission: f64,
    pub slit: Slit,
    pub grid: Grid1D,
    pub n_pulses: usize,
    pub loss_compensation: bool,
    /// Report coordinates in the physical output plane (scaled by `-f2/f1`).
    pub report_magnification: bool,
}

impl CavityConfig {
    pub fn fourier_grid(&self) -> Result<FourierGrid> {
        FourierGrid::new(self.grid, self.wavelength, self.focal_length_1)
    }

    pub fn validate(&self) -> Result<()> {
        let positive = |key: &str, v: f64| {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(Error::config(key, format!("must be positive, got {v}")))
            }
        };
        positive("wavelength", self.wavelength)?;
        positive("input_fwhm", self.input_fwhm)?;
        positive("focal_length_1", self.focal_length_1)?;
        positive("focal_length_2", self.focal_length_2)?;
        if !(self.output_mirror_transmission > 0.0 && self.output_mirror_transmission <= 1.0) {
            return Err(Error::config(
                "output_mirror_transmission",
                format!(
                    "must lie in (0, 1], got {}",
                    self.output_mirror_transmission
                ),
            ));
        }
        if self.n_pulses == 0 {
            return Err(Error::config("n_pulses", "must be at least 1"));
        }
        if self.input_fwhm >= self.grid.extent() / 2.0 {
            return Err(Error::config(
                "input_fwhm",
                format!(
                    "beam FWHM {:e} m does not fit a grid of extent {:e} m",
                    self.input_fwhm,
                    self.grid.extent()
                ),
            ));
        }
        self.oracle
            .check_fits(&self.grid)
            .map_err(|e| rename(e, "oracle"))?;
        self.iaa
            .check_fits(self.fourier_grid()?.target())
            .map_err(|e| rename(e, "iaa"))?;
        Ok(())
    }

    /// Output-plane coordinate scale applied when reporting.
    pub fn reporting_scale(&self) -> f64 {
        if self.report_magnification {
            -self.focal_length_2 / self.focal_length_1
        } else {
            1.0
        }
    }
}

fn rename(err: Error, key: &str) -> Error {
    match err {
        Error::Config { message, .. } => Error::config(key, message),
        other => other,
    }
}

/// One traversal from the input mirror to the output mirror:
/// oracle, lens, IAA plate, lens, each plate passed once, with half a
/// roundtrip of loss. The result is the parity-inverted image on the
/// spatial grid.
pub fn half_pass_forward(field: &ComplexField, config: &CavityConfig) -> Result<ComplexField> {
    let fg = config.fourier_grid()?;
    let e = apply_plate(field, &config.oracle, 1)?;
    let e = dft_centered(&e, &fg)?;
    let e = apply_plate(&e, &config.iaa, 1)?;
    let e = dft_centered(&e, &fg.reversed())?;
    apply_roundtrip_loss(&e, &config.loss, 0.5)
}

/// One full roundtrip in oracle-plane coordinates:
/// `F⁻¹ Φf² F Φo²` followed by one roundtrip of loss.
pub fn grover_iterate(field: &ComplexField, config: &CavityConfig) -> Result<ComplexField> {
    let fg = config.fourier_grid()?;
    grover_iterate_with(field, config, &fg)
}

fn grover_iterate_with(
    field: &ComplexField,
    config: &CavityConfig,
    fg: &FourierGrid,
) -> Result<ComplexField> {
    let e = apply_plate(field, &config.oracle, 2)?;
    let e = dft_centered(&e, fg)?;
    let e = apply_plate(&e, &config.iaa, 2)?;
    let e = idft_centered(&e, fg)?;
    apply_roundtrip_loss(&e, &config.loss, 1.0)
}

/// A pulse coupled out through the output mirror.
#[derive(Clone, Debug)]
pub struct PulseRecord {
    /// `j - 0.5` for the `j`-th pulse.
    pub iteration_count: f64,
    /// Transmitted field in oracle-plane orientation, without loss compensation.
    pub field: ComplexField,
    /// Factor applied to the intensity when loss compensation is on, else 1.
    pub compensation: f64,
    /// Maximum of the (compensated, when enabled) intensity profile.
    pub peak: Peak,
    pub peak_at_edge: bool,
    /// Energy of the transmitted pulse, uncompensated.
    pub total_energy: f64,
}

impl PulseRecord {
    pub fn intensity(&self) -> Vec<f64> {
        self.field.intensity()
    }

    pub fn compensated_intensity(&self) -> Vec<f64> {
        self.field
            .intensity()
            .into_iter()
            .map(|v| v * self.compensation)
            .collect()
    }
}

/// Output of [`run_search`]: one record per pulse, all on one grid.
#[derive(Clone, Debug)]
pub struct SearchTrace {
    pub grid: Grid1D,
    /// Multiplier from oracle-plane to reported coordinates.
    pub coordinate_scale: f64,
    pub pulses: Vec<PulseRecord>,
}

impl SearchTrace {
    pub fn reported_coordinates(&self) -> Vec<f64> {
        self.grid
            .coordinates()
            .into_iter()
            .map(|x| x * self.coordinate_scale)
            .collect()
    }

    pub fn reported_position(&self, pulse: &PulseRecord) -> f64 {
        pulse.peak.position * self.coordinate_scale
    }

    /// Intensity of every pulse at the sample nearest `x` (oracle-plane metres),
    /// compensated when enabled.
    pub fn intensity_at(&self, x: f64) -> Vec<f64> {
        let idx = ((x / self.grid.pitch()).round() + self.grid.center_index() as f64)
            .clamp(0.0, (self.grid.n_samples() - 1) as f64) as usize;
        self.pulses
            .iter()
            .map(|p| p.field.amplitudes()[idx].norm_sqr() * p.compensation)
            .collect()
    }
}

/// Runs the full cavity experiment.
///
/// The circulating field is kept in the oracle frame just before the oracle's
/// double pass, so each roundtrip is exactly [`grover_iterate`]. Pulse `j` is
/// the forward half pass of that field after its `j - 1`-th roundtrip.
pub fn run_search(config: &CavityConfig) -> Result<SearchTrace> {
    config.validate()?;
    let fg = config.fourier_grid()?;
    let input = gaussian_input(config.grid, config.input_fwhm)?;
    // undo one oracle pass: the launched pulse meets the oracle only once
    // before its first output
    let mut circulating = apply_phase_passes(&input, &config.oracle, -1)?;
    let transmission = config.output_mirror_transmission.sqrt();

    let mut pulses = Vec::with_capacity(config.n_pulses);
    for j in 1..=config.n_pulses {
        let at_input_mirror = apply_phase_passes(&circulating, &config.oracle, 1)?;
        let output = half_pass_forward(&at_input_mirror, config)?;
        let field = output.parity().scaled(transmission);

        let iteration_count = j as f64 - 0.5;
        let compensation = if config.loss_compensation {
            config.loss.energy_factor(-iteration_count)
        } else {
            1.0
        };
        let shown: Vec<f64> = field
            .intensity()
            .into_iter()
            .map(|v| v * compensation)
            .collect();
        let peak = peak_of_profile(&config.grid, &shown);
        pulses.push(PulseRecord {
            iteration_count,
            peak_at_edge: peak.at_edge(&config.grid),
            total_energy: field.total_energy(),
            compensation,
            peak,
            field,
        });
        if j < config.n_pulses {
            circulating = grover_iterate_with(&circulating, config, &fg)?;
        }
    }
    Ok(SearchTrace {
        grid: config.grid,
        coordinate_scale: config.reporting_scale(),
        pulses,
    })
}

/// Slit energy of one pulse.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PulseEnergy {
    pub iteration_count: f64,
    pub slit_energy: f64,
}

/// Energy behind `slit` for each uncompensated output pulse. The slit centre
/// is given in oracle-plane coordinates.
pub fn pulse_train(config: &CavityConfig, slit: &Slit) -> Result<Vec<PulseEnergy>> {
    let trace = run_search(config)?;
    Ok(pulse_energies(&trace, slit))
}

/// [`pulse_train`] on an existing trace.
pub fn pulse_energies(trace: &SearchTrace, slit: &Slit) -> Vec<PulseEnergy> {
    trace
        .pulses
        .iter()
        .map(|p| PulseEnergy {
            iteration_count: p.iteration_count,
            slit_energy: slit_energy(&p.field, slit),
        })
        .collect()
}
