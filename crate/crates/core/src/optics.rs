//! Cavity elements acting on sampled fields.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{ComplexField, Grid1D};

/// Line-shaped phase step with a trapezoidal cross-section.
///
/// The phase equals `phase_depth` on the flat top
/// `[center - flat/2, center + flat/2]`, falls linearly to zero across a ramp
/// of `ramp_width` on each side, and is zero elsewhere. `phase_depth` is the
/// shift imprinted by a single pass.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrapezoidPhasePlate {
    center: f64,
    flat_width: f64,
    ramp_width: f64,
    phase_depth: f64,
}

impl TrapezoidPhasePlate {
    pub fn new(center: f64, flat_width: f64, ramp_width: f64, phase_depth: f64) -> Result<Self> {
        if !center.is_finite() {
            return Err(Error::config("center", "must be finite"));
        }
        if !(flat_width.is_finite() && flat_width > 0.0) {
            return Err(Error::config(
                "flat_width",
                format!("must be positive, got {flat_width}"),
            ));
        }
        if !(ramp_width.is_finite() && ramp_width >= 0.0) {
            return Err(Error::config(
                "ramp_width",
                format!("must be non-negative, got {ramp_width}"),
            ));
        }
        if !(phase_depth.is_finite() && phase_depth.abs() <= PI) {
            return Err(Error::config(
                "phase",
                format!("must satisfy |phase| <= pi, got {phase_depth}"),
            ));
        }
        Ok(Self {
            center,
            flat_width,
            ramp_width,
            phase_depth,
        })
    }

    pub fn center(&self) -> f64 {
        self.center
    }

    pub fn flat_width(&self) -> f64 {
        self.flat_width
    }

    pub fn ramp_width(&self) -> f64 {
        self.ramp_width
    }

    pub fn phase_depth(&self) -> f64 {
        self.phase_depth
    }

    /// Copy with a different per-pass phase.
    pub fn with_phase_depth(&self, phase_depth: f64) -> Result<Self> {
        Self::new(self.center, self.flat_width, self.ramp_width, phase_depth)
    }

    /// Outer edges of the nonzero region.
    pub fn support(&self) -> (f64, f64) {
        let half = 0.5 * self.flat_width + self.ramp_width;
        (self.center - half, self.center + half)
    }

    /// Phase at a single coordinate.
    pub fn phase_at(&self, x: f64) -> f64 {
        let d = (x - self.center).abs() - 0.5 * self.flat_width;
        if d <= 0.0 {
            self.phase_depth
        } else if d >= self.ramp_width {
            0.0
        } else {
            self.phase_depth * (1.0 - d / self.ramp_width)
        }
    }

    /// Errors when the plate's support is not contained in the grid.
    pub fn check_fits(&self, grid: &Grid1D) -> Result<()> {
        let (lo, hi) = self.support();
        if lo < grid.min_coordinate() || hi > grid.max_coordinate() {
            return Err(Error::config(
                "plate",
                format!(
                    "support [{lo:e}, {hi:e}] m exceeds grid [{:e}, {:e}] m",
                    grid.min_coordinate(),
                    grid.max_coordinate()
                ),
            ));
        }
        Ok(())
    }
}

/// Aggregate roundtrip energy transmission of the cavity.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LossModel {
    roundtrip_energy_factor: f64,
}

impl LossModel {
    pub const DEFAULT_FACTOR: f64 = 0.75;

    pub fn new(roundtrip_energy_factor: f64) -> Result<Self> {
        if !(roundtrip_energy_factor > 0.0 && roundtrip_energy_factor <= 1.0) {
            return Err(Error::config(
                "roundtrip_energy_factor",
                format!("must lie in (0, 1], got {roundtrip_energy_factor}"),
            ));
        }
        Ok(Self {
            roundtrip_energy_factor,
        })
    }

    pub fn lossless() -> Self {
        Self {
            roundtrip_energy_factor: 1.0,
        }
    }

    pub fn factor(&self) -> f64 {
        self.roundtrip_energy_factor
    }

    /// Energy transmission after `fraction` of a roundtrip.
    pub fn energy_factor(&self, fraction: f64) -> f64 {
        self.roundtrip_energy_factor.powf(fraction)
    }
}

impl Default for LossModel {
    fn default() -> Self {
        Self {
            roundtrip_energy_factor: Self::DEFAULT_FACTOR,
        }
    }
}

/// Detection slit in front of the photodiode.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Slit {
    center: f64,
    width: f64,
}

impl Slit {
    pub const DEFAULT_WIDTH: f64 = 55e-6;

    pub fn new(center: f64, width: f64) -> Result<Self> {
        if !center.is_finite() {
            return Err(Error::config("slit.center", "must be finite"));
        }
        if !(width.is_finite() && width > 0.0) {
            return Err(Error::config(
                "slit.width",
                format!("must be positive, got {width}"),
            ));
        }
        Ok(Self { center, width })
    }

    pub fn center(&self) -> f64 {
        self.center
    }

    pub fn width(&self) -> f64 {
        self.width
    }
}

/// Per-sample phase of `plate` on `grid`, in radians.
pub fn phase_profile(plate: &TrapezoidPhasePlate, grid: &Grid1D) -> Result<Vec<f64>> {
    plate.check_fits(grid)?;
    Ok(grid
        .coordinates()
        .into_iter()
        .map(|x| plate.phase_at(x))
        .collect())
}

/// Multiplies by `exp(i * passes * Φ(x))` for any signed pass count.
pub(crate) fn apply_phase_passes(
    field: &ComplexField,
    plate: &TrapezoidPhasePlate,
    passes: i32,
) -> Result<ComplexField> {
    let phases = phase_profile(plate, field.grid())?;
    let scale = f64::from(passes);
    let mask: Vec<Complex64> = phases
        .into_iter()
        .map(|p| Complex64::from_polar(1.0, scale * p))
        .collect();
    field.multiplied(&mask)
}

/// Imprints the plate's phase `passes` times (one or two traversals).
pub fn apply_plate(
    field: &ComplexField,
    plate: &TrapezoidPhasePlate,
    passes: u32,
) -> Result<ComplexField> {
    if !(1..=2).contains(&passes) {
        return Err(Error::config(
            "passes",
            format!("must be 1 or 2, got {passes}"),
        ));
    }
    apply_phase_passes(field, plate, passes as i32)
}

/// Uniform attenuation by `fraction` of a roundtrip: energy scales by
/// `factor^fraction`.
pub fn apply_roundtrip_loss(
    field: &ComplexField,
    loss: &LossModel,
    fraction_of_roundtrip: f64,
) -> Result<ComplexField> {
    if !(fraction_of_roundtrip > 0.0 && fraction_of_roundtrip <= 1.0) {
        return Err(Error::config(
            "fraction_of_roundtrip",
            format!("must lie in (0, 1], got {fraction_of_roundtrip}"),
        ));
    }
    Ok(field.scaled(loss.energy_factor(fraction_of_roundtrip).sqrt()))
}

/// Energy passing the slit. Each sample stands for a cell of one pitch
/// centred on its coordinate and contributes in proportion to the part of
/// that cell inside the slit window.
pub fn slit_energy(field: &ComplexField, slit: &Slit) -> f64 {
    slit_energy_of_profile(field.grid(), &field.intensity(), slit)
}

pub(crate) fn slit_energy_of_profile(grid: &Grid1D, intensity: &[f64], slit: &Slit) -> f64 {
    let p = grid.pitch();
    let lo = slit.center() - 0.5 * slit.width();
    let hi = slit.center() + 0.5 * slit.width();
    let c = grid.center_index() as f64;
    // cells overlapping [lo, hi]: x_i + p/2 > lo and x_i - p/2 < hi
    let first = (lo / p + c - 0.5).floor().max(0.0);
    let last = (hi / p + c + 0.5).ceil().min(intensity.len() as f64 - 1.0);
    if first > last {
        return 0.0;
    }
    let (first, last) = (first as usize, last as usize);
    intensity[first..=last]
        .iter()
        .zip(first..)
        .map(|(v, i)| {
            let x = grid.coordinate(i);
            v * ((x + 0.5 * p).min(hi) - (x - 0.5 * p).max(lo)).max(0.0)
        })
        .sum()
}

/// Focal-plane position of spatial frequency `nu` (cycles per metre): `λ f ν`.
pub fn fourier_plane_coordinate(nu: f64, wavelength: f64, focal_length: f64) -> f64 {
    wavelength * focal_length * nu
}
