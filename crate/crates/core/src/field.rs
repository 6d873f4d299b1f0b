//! Sampled one-dimensional fields and the centered lens transform.
//!
//! Both the object plane and the Fourier plane are sampled on a [`Grid1D`]
//! whose zero coordinate sits at index `n / 2`. With that convention the
//! centered DFT squares to the index reflection `i -> (n - i) mod n`, which is
//! what lets a double lens pass act as an exact spatial inversion.

use std::cell::RefCell;
use std::f64::consts::LN_2;

use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Relative tolerance used when deciding whether two grids describe the same
/// lattice. Pitches derived through `λ f / extent` round-trip with a few ulps
/// of error, so bitwise equality is too strict.
const GRID_RTOL: f64 = 1e-9;

/// Uniform sampling lattice, `x_i = (i - n/2) * pitch`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Grid1D {
    n_samples: usize,
    pitch: f64,
}

impl Grid1D {
    pub const MIN_SAMPLES: usize = 16;

    pub fn new(n_samples: usize, pitch: f64) -> Result<Self> {
        if n_samples < Self::MIN_SAMPLES || !n_samples.is_power_of_two() {
            return Err(Error::config(
                "n_samples",
                format!(
                    "must be a power of two >= {}, got {n_samples}",
                    Self::MIN_SAMPLES
                ),
            ));
        }
        if !(pitch.is_finite() && pitch > 0.0) {
            return Err(Error::config(
                "pitch",
                format!("must be positive, got {pitch}"),
            ));
        }
        Ok(Self { n_samples, pitch })
    }

    pub fn n_samples(&self) -> usize {
        self.n_samples
    }

    pub fn pitch(&self) -> f64 {
        self.pitch
    }

    pub fn extent(&self) -> f64 {
        self.n_samples as f64 * self.pitch
    }

    /// Index of the zero coordinate.
    pub fn center_index(&self) -> usize {
        self.n_samples / 2
    }

    pub fn coordinate(&self, index: usize) -> f64 {
        (index as f64 - self.center_index() as f64) * self.pitch
    }

    pub fn coordinates(&self) -> Vec<f64> {
        (0..self.n_samples).map(|i| self.coordinate(i)).collect()
    }

    pub fn min_coordinate(&self) -> f64 {
        self.coordinate(0)
    }

    pub fn max_coordinate(&self) -> f64 {
        self.coordinate(self.n_samples - 1)
    }

    /// Same sample count and pitch up to round-off.
    pub fn matches(&self, other: &Grid1D) -> bool {
        self.n_samples == other.n_samples
            && (self.pitch - other.pitch).abs() <= GRID_RTOL * self.pitch.max(other.pitch)
    }

    /// Index reflection about the center sample.
    pub fn parity_index(&self, index: usize) -> usize {
        (self.n_samples - index) % self.n_samples
    }
}

/// Complex amplitude samples on a grid.
#[derive(Clone, Debug, PartialEq)]
pub struct ComplexField {
    grid: Grid1D,
    amplitudes: Vec<Complex64>,
}

impl ComplexField {
    pub fn new(grid: Grid1D, amplitudes: Vec<Complex64>) -> Result<Self> {
        if amplitudes.len() != grid.n_samples() {
            return Err(Error::Dimension(format!(
                "{} amplitudes for a grid of {} samples",
                amplitudes.len(),
                grid.n_samples()
            )));
        }
        Ok(Self { grid, amplitudes })
    }

    pub fn zeros(grid: Grid1D) -> Self {
        Self {
            grid,
            amplitudes: vec![Complex64::new(0.0, 0.0); grid.n_samples()],
        }
    }

    /// Builds a field by evaluating `f` at every grid coordinate.
    pub fn from_fn(grid: Grid1D, mut f: impl FnMut(f64) -> Complex64) -> Self {
        let amplitudes = (0..grid.n_samples())
            .map(|i| f(grid.coordinate(i)))
            .collect();
        Self { grid, amplitudes }
    }

    pub fn grid(&self) -> &Grid1D {
        &self.grid
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn into_amplitudes(self) -> Vec<Complex64> {
        self.amplitudes
    }

    pub fn intensity(&self) -> Vec<f64> {
        self.amplitudes.iter().map(|a| a.norm_sqr()).collect()
    }

    pub fn total_energy(&self) -> f64 {
        total_energy(self)
    }

    /// Uniform amplitude scaling.
    pub fn scaled(&self, factor: f64) -> Self {
        self.map(|_, a| a * factor)
    }

    /// Pointwise map over `(coordinate, amplitude)`.
    pub fn map(&self, mut f: impl FnMut(f64, Complex64) -> Complex64) -> Self {
        let amplitudes = self
            .amplitudes
            .iter()
            .enumerate()
            .map(|(i, &a)| f(self.grid.coordinate(i), a))
            .collect();
        Self {
            grid: self.grid,
            amplitudes,
        }
    }

    /// Pointwise product with a mask sampled on the same grid.
    pub fn multiplied(&self, mask: &[Complex64]) -> Result<Self> {
        if mask.len() != self.amplitudes.len() {
            return Err(Error::Dimension(format!(
                "mask of length {} applied to field of length {}",
                mask.len(),
                self.amplitudes.len()
            )));
        }
        let amplitudes = self
            .amplitudes
            .iter()
            .zip(mask)
            .map(|(a, m)| a * m)
            .collect();
        Ok(Self {
            grid: self.grid,
            amplitudes,
        })
    }

    /// Reflection `x -> -x` on the sample lattice.
    pub fn parity(&self) -> Self {
        let amplitudes = (0..self.grid.n_samples())
            .map(|i| self.amplitudes[self.grid.parity_index(i)])
            .collect();
        Self {
            grid: self.grid,
            amplitudes,
        }
    }
}

/// Lens Fourier transform geometry: maps a spatial grid onto the focal plane
/// of a lens with focal length `f` at wavelength `λ`.
///
/// The focal-plane pitch is `λ f / extent(source)`. [`FourierGrid::reversed`]
/// describes the same lens traversed from the focal plane outwards.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FourierGrid {
    source: Grid1D,
    target: Grid1D,
    wavelength: f64,
    focal_length: f64,
}

impl FourierGrid {
    pub fn new(source: Grid1D, wavelength: f64, focal_length: f64) -> Result<Self> {
        if !(wavelength.is_finite() && wavelength > 0.0) {
            return Err(Error::config(
                "wavelength",
                format!("must be positive, got {wavelength}"),
            ));
        }
        if !(focal_length.is_finite() && focal_length > 0.0) {
            return Err(Error::config(
                "focal_length",
                format!("must be positive, got {focal_length}"),
            ));
        }
        let pitch = wavelength * focal_length / source.extent();
        let target = Grid1D::new(source.n_samples(), pitch)?;
        Ok(Self {
            source,
            target,
            wavelength,
            focal_length,
        })
    }

    pub fn source(&self) -> &Grid1D {
        &self.source
    }

    pub fn target(&self) -> &Grid1D {
        &self.target
    }

    pub fn wavelength(&self) -> f64 {
        self.wavelength
    }

    pub fn focal_length(&self) -> f64 {
        self.focal_length
    }

    /// Focal-plane sample pitch `Δx′`.
    pub fn fourier_pitch(&self) -> f64 {
        self.target.pitch()
    }

    /// The same lens seen from the focal plane.
    pub fn reversed(&self) -> Self {
        Self {
            source: self.target,
            target: self.source,
            ..*self
        }
    }
}

/// Gaussian beam with the given intensity FWHM, zero phase, unit energy.
pub fn gaussian_input(grid: Grid1D, fwhm: f64) -> Result<ComplexField> {
    if !(fwhm.is_finite() && fwhm > 0.0 && fwhm < grid.extent() / 2.0) {
        return Err(Error::config(
            "input_fwhm",
            format!(
                "must lie in (0, {:e}) m for this grid, got {fwhm:e}",
                grid.extent() / 2.0
            ),
        ));
    }
    // |E|^2 = exp(-4 ln2 x^2 / w^2)
    let k = 2.0 * LN_2 / (fwhm * fwhm);
    let raw = ComplexField::from_fn(grid, |x| Complex64::new((-k * x * x).exp(), 0.0));
    let norm = raw.total_energy().sqrt();
    Ok(raw.scaled(1.0 / norm))
}

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

#[derive(Clone, Copy)]
enum Direction {
    Forward,
    Inverse,
}

/// Unitary centered DFT of raw samples: zero index at `n / 2` on both sides.
fn centered_transform(input: &[Complex64], direction: Direction) -> Vec<Complex64> {
    let n = input.len();
    let mut buffer = input.to_vec();
    buffer.rotate_left(n / 2);
    PLANNER.with(|planner| {
        let mut planner = planner.borrow_mut();
        let fft = match direction {
            Direction::Forward => planner.plan_fft_forward(n),
            Direction::Inverse => planner.plan_fft_inverse(n),
        };
        fft.process(&mut buffer);
    });
    buffer.rotate_left(n / 2);
    let scale = 1.0 / (n as f64).sqrt();
    buffer.iter_mut().for_each(|a| *a *= scale);
    buffer
}

/// Unitary centered forward DFT on bare sample vectors (no grid bookkeeping).
pub fn unitary_dft(samples: &[Complex64]) -> Vec<Complex64> {
    centered_transform(samples, Direction::Forward)
}

/// Inverse of [`unitary_dft`].
pub fn unitary_idft(samples: &[Complex64]) -> Vec<Complex64> {
    centered_transform(samples, Direction::Inverse)
}

fn transform_between(
    field: &ComplexField,
    from: &Grid1D,
    to: &Grid1D,
    direction: Direction,
) -> Result<ComplexField> {
    if !field.grid().matches(from) {
        return Err(Error::Dimension(format!(
            "field grid {:?} does not match transform input grid {:?}",
            field.grid(),
            from
        )));
    }
    // Sample-amplitude rescaling keeps Σ|a|² · pitch invariant across planes.
    let rescale = (from.pitch() / to.pitch()).sqrt();
    let mut amplitudes = centered_transform(field.amplitudes(), direction);
    amplitudes.iter_mut().for_each(|a| *a *= rescale);
    ComplexField::new(*to, amplitudes)
}

/// Lens transform from `fgrid.source()` onto `fgrid.target()`.
pub fn dft_centered(field: &ComplexField, fgrid: &FourierGrid) -> Result<ComplexField> {
    transform_between(field, fgrid.source(), fgrid.target(), Direction::Forward)
}

/// Exact inverse of [`dft_centered`]: from `fgrid.target()` back to `fgrid.source()`.
pub fn idft_centered(field: &ComplexField, fgrid: &FourierGrid) -> Result<ComplexField> {
    transform_between(field, fgrid.target(), fgrid.source(), Direction::Inverse)
}

/// Discrete `∫|E|² dx`.
pub fn total_energy(field: &ComplexField) -> f64 {
    field.amplitudes().iter().map(|a| a.norm_sqr()).sum::<f64>() * field.grid().pitch()
}

/// Location and height of the global intensity maximum.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Peak {
    pub index: usize,
    pub position: f64,
    pub value: f64,
}

impl Peak {
    /// True when the maximum sits on the first or last sample.
    pub fn at_edge(&self, grid: &Grid1D) -> bool {
        self.index == 0 || self.index + 1 == grid.n_samples()
    }
}

/// Global intensity maximum. Ties resolve to the smaller coordinate.
pub fn peak(field: &ComplexField) -> Peak {
    peak_of_profile(field.grid(), &field.intensity())
}

pub(crate) fn peak_of_profile(grid: &Grid1D, intensity: &[f64]) -> Peak {
    let mut index = 0;
    let mut value = f64::NEG_INFINITY;
    for (i, &v) in intensity.iter().enumerate() {
        if v > value {
            index = i;
            value = v;
        }
    }
    Peak {
        index,
        position: grid.coordinate(index),
        value,
    }
}

/// Midpoint of the half-maximum crossings bracketing the global maximum.
///
/// For flat-topped images on a sloping background the argmax drifts to one
/// edge of the plateau; this midpoint stays on the feature centre.
pub fn half_max_center(field: &ComplexField) -> Result<f64> {
    half_max_center_of_profile(field.grid(), &field.intensity())
}

pub(crate) fn half_max_center_of_profile(grid: &Grid1D, intensity: &[f64]) -> Result<f64> {
    let top = peak_of_profile(grid, intensity);
    if !(top.value.is_finite() && top.value > 0.0) {
        return Err(Error::Measurement("profile has no positive maximum".into()));
    }
    let half = top.value / 2.0;
    let n = intensity.len();
    let mut lo = top.index;
    while lo > 0 && intensity[lo - 1] >= half {
        lo -= 1;
    }
    let mut hi = top.index;
    while hi + 1 < n && intensity[hi + 1] >= half {
        hi += 1;
    }
    if lo == 0 || hi + 1 == n {
        return Err(Error::Measurement(
            "half-maximum region reaches the grid edge".into(),
        ));
    }
    let cross = |inside: usize, outside: usize| {
        let (a, b) = (intensity[inside], intensity[outside]);
        let t = (a - half) / (a - b);
        grid.coordinate(inside) + t * (grid.coordinate(outside) - grid.coordinate(inside))
    };
    Ok(0.5 * (cross(lo, lo - 1) + cross(hi, hi + 1)))
}

/// Full width at half maximum of `|E|²`, linearly interpolated between the
/// samples bracketing each half-maximum crossing.
///
/// A flat-topped maximum spanning adjacent samples counts as one maximum;
/// separated samples sharing the maximum value are rejected.
pub fn intensity_fwhm(field: &ComplexField) -> Result<f64> {
    let intensity = field.intensity();
    let grid = field.grid();
    let n = intensity.len();
    let max = intensity.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if !(max.is_finite() && max > 0.0) {
        return Err(Error::Measurement("profile has no positive maximum".into()));
    }
    let tie = max * (1.0 - 1e-12);
    let at_max: Vec<usize> = (0..n).filter(|&i| intensity[i] >= tie).collect();
    let (first, last) = (at_max[0], at_max[at_max.len() - 1]);
    if last - first + 1 != at_max.len() {
        return Err(Error::Measurement(format!(
            "{} separated samples share the maximum intensity",
            at_max.len()
        )));
    }
    if first == 0 || last == n - 1 {
        return Err(Error::Measurement(
            "maximum lies on the grid boundary (profile clipped)".into(),
        ));
    }
    let half = 0.5 * max;

    let mut left = first;
    while intensity[left] >= half {
        if left == 0 {
            return Err(Error::Measurement(
                "half maximum not reached before the left grid edge".into(),
            ));
        }
        left -= 1;
    }
    let mut right = last;
    while intensity[right] >= half {
        if right == n - 1 {
            return Err(Error::Measurement(
                "half maximum not reached before the right grid edge".into(),
            ));
        }
        right += 1;
    }
    // crossing between left (below) and left + 1 (at or above)
    let crossing = |below: usize, above: usize| {
        let (yb, ya) = (intensity[below], intensity[above]);
        let t = (half - yb) / (ya - yb);
        let (xb, xa) = (grid.coordinate(below), grid.coordinate(above));
        xb + t * (xa - xb)
    };
    Ok(crossing(right, right - 1) - crossing(left, left + 1))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid(n: usize, pitch: f64) -> Grid1D {
        Grid1D::new(n, pitch).unwrap()
    }

    #[test]
    fn grid_rejects_bad_sizes() {
        assert!(Grid1D::new(8, 1e-6).is_err());
        assert!(Grid1D::new(1000, 1e-6).is_err());
        assert!(Grid1D::new(1024, 0.0).is_err());
        assert!(Grid1D::new(1024, -1.0).is_err());
        assert!(Grid1D::new(1024, f64::NAN).is_err());
    }

    #[test]
    fn coordinates_increase_and_center_is_zero() {
        let g = grid(64, 0.5);
        let xs = g.coordinates();
        assert!(xs.windows(2).all(|w| w[1] > w[0]));
        assert_eq!(xs[32], 0.0);
        assert_eq!(xs[0], -16.0);
        assert_eq!(xs[63], 15.5);
        for i in 1..64 {
            assert_eq!(g.coordinate(i), -g.coordinate(g.parity_index(i)));
        }
    }

    #[test]
    fn fourier_pitch_follows_lens_scaling() {
        let g = grid(16384, 2e-6);
        let fg = FourierGrid::new(g, 532e-9, 0.4).unwrap();
        let expected = 532e-9 * 0.4 / g.extent();
        assert!((fg.fourier_pitch() - expected).abs() < 1e-18);
        assert!((fg.target().extent() - 532e-9 * 0.4 / g.pitch()).abs() < 1e-12);
        assert!(fg.reversed().target().matches(&g));
    }

    #[test]
    fn gaussian_fwhm_matches_request() {
        let g = grid(16384, 2e-6);
        let e = gaussian_input(g, 1.33e-3).unwrap();
        let w = intensity_fwhm(&e).unwrap();
        assert!((w - 1.33e-3).abs() <= g.pitch(), "fwhm {w}");
    }

    #[test]
    fn gaussian_is_normalized_near_quarter_extent() {
        let g = grid(1024, 10e-6);
        let e = gaussian_input(g, g.extent() / 4.0 * 0.999).unwrap();
        assert!((e.total_energy() - 1.0).abs() < 1e-12);
        assert!(e.amplitudes().iter().all(|a| a.im == 0.0));
    }

    #[test]
    fn gaussian_peaks_at_center_index() {
        let g = grid(1024, 10e-6);
        let e = gaussian_input(g, 1e-3).unwrap();
        let p = peak(&e);
        assert_eq!(p.index, 512);
        let max = e.intensity().into_iter().fold(0.0, f64::max);
        assert_eq!(p.value, max);
    }

    #[test]
    fn gaussian_rejects_out_of_range_width() {
        let g = grid(1024, 10e-6);
        for w in [0.0, -1e-3, g.extent() / 2.0, f64::INFINITY] {
            match gaussian_input(g, w) {
                Err(Error::Config { key, .. }) => assert_eq!(key, "input_fwhm"),
                other => panic!("expected config error, got {other:?}"),
            }
        }
    }

    #[test]
    fn impulse_transforms_to_flat_spectrum() {
        let g = grid(256, 1e-6);
        let mut amps = vec![Complex64::new(0.0, 0.0); 256];
        amps[128] = Complex64::new(1.0, 0.0);
        let out = unitary_dft(&amps);
        for a in out {
            assert!((a.norm() - 1.0 / 16.0).abs() < 1e-14);
        }
        // lens with a self-dual grid: n * pitch^2 = λ f
        let fg = FourierGrid::new(g, 256e-12, 1.0).unwrap();
        assert!(fg.target().matches(&g));
        let f = ComplexField::new(g, amps).unwrap();
        let out = dft_centered(&f, &fg).unwrap();
        for a in out.amplitudes() {
            assert!((a.norm() - 1.0 / 16.0).abs() < 1e-12);
        }
    }

    #[test]
    fn constant_inverts_to_center_impulse() {
        let g = grid(64, 1e-6);
        let fg = FourierGrid::new(g, 532e-9, 0.1).unwrap();
        let c = ComplexField::from_fn(*fg.target(), |_| Complex64::new(1.0, 0.0));
        let out = idft_centered(&c, &fg).unwrap();
        let p = peak(&out);
        assert_eq!(p.index, 32);
        for (i, a) in out.amplitudes().iter().enumerate() {
            if i != 32 {
                assert!(a.norm() < 1e-12 * p.value.sqrt());
            }
        }
    }

    #[test]
    fn transform_rejects_foreign_grid() {
        let g = grid(64, 1e-6);
        let fg = FourierGrid::new(g, 532e-9, 0.1).unwrap();
        let other = ComplexField::zeros(grid(64, 2e-6));
        assert!(matches!(
            dft_centered(&other, &fg),
            Err(Error::Dimension(_))
        ));
        assert!(matches!(
            idft_centered(&other, &fg),
            Err(Error::Dimension(_))
        ));
        assert!(ComplexField::new(g, vec![Complex64::new(0.0, 0.0); 3]).is_err());
    }

    #[test]
    fn zero_field_has_zero_energy() {
        assert_eq!(ComplexField::zeros(grid(32, 1.0)).total_energy(), 0.0);
    }

    #[test]
    fn energy_scales_quadratically() {
        let g = grid(1024, 2e-6);
        let e = gaussian_input(g, 3e-4).unwrap();
        let s = e.scaled(0.75f64.sqrt());
        assert!((s.total_energy() - 0.75 * e.total_energy()).abs() < 1e-12);
    }

    #[test]
    fn top_hat_fwhm() {
        let g = grid(4096, 1e-6);
        let w = 300.3e-6;
        let f = ComplexField::from_fn(g, |x| {
            Complex64::new(if x.abs() <= w / 2.0 { 1.0 } else { 0.0 }, 0.0)
        });
        let measured = intensity_fwhm(&f).unwrap();
        assert!((measured - w).abs() <= g.pitch(), "{measured}");
    }

    #[test]
    fn twin_maxima_are_rejected() {
        let g = grid(256, 1e-6);
        let f = ComplexField::from_fn(g, |x| {
            let a = (-((x - 40e-6) / 5e-6).powi(2)).exp() + (-((x + 40e-6) / 5e-6).powi(2)).exp();
            Complex64::new(a, 0.0)
        });
        assert!(matches!(intensity_fwhm(&f), Err(Error::Measurement(_))));
    }

    #[test]
    fn clipped_profile_is_rejected() {
        let g = grid(64, 1.0);
        let f = ComplexField::from_fn(g, |x| Complex64::new((-x - 32.0).exp(), 0.0));
        assert!(matches!(intensity_fwhm(&f), Err(Error::Measurement(_))));
    }

    #[test]
    fn peak_locates_offset_impulse() {
        let g = grid(1024, 2e-6);
        let f = ComplexField::from_fn(g, |x| {
            Complex64::new(if (x - 0.2e-3).abs() < 1e-9 { 1.0 } else { 0.0 }, 0.0)
        });
        let p = peak(&f);
        assert!((p.position - 0.2e-3).abs() < 1e-12);
    }

    #[test]
    fn peak_ties_go_to_smaller_coordinate() {
        let g = grid(32, 1.0);
        let f = ComplexField::from_fn(g, |x| {
            Complex64::new(if x == -3.0 || x == 5.0 { 2.0 } else { 0.0 }, 0.0)
        });
        assert_eq!(peak(&f).position, -3.0);
        assert!(!peak(&f).at_edge(&g));
    }
}
