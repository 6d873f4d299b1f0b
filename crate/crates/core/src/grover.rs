//! Discrete amplitude amplification with generalized phases.
//!
//! Two engines: a reduced two-amplitude model (one amplitude shared by every
//! marked item, one by every unmarked item) that accepts non-integer database
//! sizes, and a full state vector used to cross-check it.
//!
//! Operators, for marked set `w` and uniform state `|s⟩`:
//!
//! ```text
//! O(φo) = I + (e^{iφo} - 1) Σ_{j∈w} |j⟩⟨j|
//! D(φd) = (1 - e^{iφd}) |s⟩⟨s| - I
//! ```
//!
//! so `D(π) = 2|s⟩⟨s| - I` is the inversion about the average. One iteration
//! applies `O` then `D`.
//!
//! One cavity roundtrip passes each plate twice, so a plate with per-pass
//! phase `φ` drives these operators with `φo = φd = 2φ`.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Marked/unmarked amplitude pair for a uniformly initialized search.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GroverReducedState {
    n_items: f64,
    n_marked: f64,
    marked: Complex64,
    unmarked: Complex64,
}

impl GroverReducedState {
    /// Uniform superposition over `n_items` items of which `n_marked` are marked.
    pub fn uniform(n_items: f64, n_marked: f64) -> Result<Self> {
        check_sizes(n_items, n_marked)?;
        let a = Complex64::new(1.0 / n_items.sqrt(), 0.0);
        Ok(Self {
            n_items,
            n_marked,
            marked: a,
            unmarked: a,
        })
    }

    pub fn n_items(&self) -> f64 {
        self.n_items
    }

    pub fn n_marked(&self) -> f64 {
        self.n_marked
    }

    /// Amplitude of each marked item.
    pub fn marked(&self) -> Complex64 {
        self.marked
    }

    /// Amplitude of each unmarked item.
    pub fn unmarked(&self) -> Complex64 {
        self.unmarked
    }

    pub fn norm_sqr(&self) -> f64 {
        self.n_marked * self.marked.norm_sqr()
            + (self.n_items - self.n_marked) * self.unmarked.norm_sqr()
    }

    /// Probability of measuring any marked item.
    pub fn success_probability(&self) -> f64 {
        self.n_marked * self.marked.norm_sqr()
    }
}

fn check_sizes(n_items: f64, n_marked: f64) -> Result<()> {
    if !(n_items.is_finite() && n_items > 0.0) {
        return Err(Error::config(
            "n_items",
            format!("must be positive, got {n_items}"),
        ));
    }
    if !(n_marked > 0.0 && n_marked <= n_items) {
        return Err(Error::config(
            "n_marked",
            format!("must lie in (0, n_items], got {n_marked}"),
        ));
    }
    Ok(())
}

/// One generalized Grover iteration on the reduced state.
pub fn reduced_iterate(
    state: &GroverReducedState,
    phase_oracle: f64,
    phase_diffusion: f64,
) -> GroverReducedState {
    let marked = state.marked * Complex64::from_polar(1.0, phase_oracle);
    let n = state.n_items;
    let m = state.n_marked;
    let average = (marked * m + state.unmarked * (n - m)) / n;
    let reflected =
        average * (Complex64::new(1.0, 0.0) - Complex64::from_polar(1.0, phase_diffusion));
    GroverReducedState {
        marked: reflected - marked,
        unmarked: reflected - state.unmarked,
        ..*state
    }
}

/// Full state vector over an integer number of items.
#[derive(Clone, Debug, PartialEq)]
pub struct FullGroverState {
    amplitudes: Vec<Complex64>,
    marked: Vec<bool>,
}

impl FullGroverState {
    /// Uniform superposition with the given marked item indices.
    pub fn uniform(n_items: usize, marked_items: &[usize]) -> Result<Self> {
        if n_items == 0 {
            return Err(Error::config("n_items", "must be at least 1"));
        }
        let mut marked = vec![false; n_items];
        for &j in marked_items {
            if j >= n_items {
                return Err(Error::config(
                    "marked",
                    format!("index {j} out of range for {n_items} items"),
                ));
            }
            marked[j] = true;
        }
        if !marked.iter().any(|&b| b) {
            return Err(Error::config("marked", "at least one item must be marked"));
        }
        let a = Complex64::new(1.0 / (n_items as f64).sqrt(), 0.0);
        Ok(Self {
            amplitudes: vec![a; n_items],
            marked,
        })
    }

    pub fn n_items(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn n_marked(&self) -> usize {
        self.marked.iter().filter(|&&b| b).count()
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn is_marked(&self, index: usize) -> bool {
        self.marked[index]
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn success_probability(&self) -> f64 {
        self.amplitudes
            .iter()
            .zip(&self.marked)
            .filter(|(_, &m)| m)
            .map(|(a, _)| a.norm_sqr())
            .sum()
    }
}

/// One generalized Grover iteration on the full vector.
pub fn full_iterate(
    state: &FullGroverState,
    phase_oracle: f64,
    phase_diffusion: f64,
) -> FullGroverState {
    let kick = Complex64::from_polar(1.0, phase_oracle);
    let mut amplitudes: Vec<Complex64> = state
        .amplitudes
        .iter()
        .zip(&state.marked)
        .map(|(&a, &m)| if m { a * kick } else { a })
        .collect();
    let n = amplitudes.len() as f64;
    let average = amplitudes.iter().sum::<Complex64>() / n;
    let reflected =
        average * (Complex64::new(1.0, 0.0) - Complex64::from_polar(1.0, phase_diffusion));
    for a in amplitudes.iter_mut() {
        *a = reflected - *a;
    }
    FullGroverState {
        amplitudes,
        marked: state.marked.clone(),
    }
}

/// Rotation angle `θ = arcsin √(m/N)` of the ideal search.
pub fn rotation_angle(n_items: f64, n_marked: f64) -> f64 {
    (n_marked / n_items).sqrt().asin()
}

/// Ideal-phase success probability after `k` iterations: `sin²((2k+1)θ)`.
pub fn success_probability(iterations: f64, n_items: f64, n_marked: f64) -> f64 {
    let theta = rotation_angle(n_items, n_marked);
    ((2.0 * iterations + 1.0) * theta).sin().powi(2)
}

/// Success probability after each of `0..=max_iterations` generalized iterations.
pub fn success_trace(
    n_items: f64,
    n_marked: f64,
    phase_oracle: f64,
    phase_diffusion: f64,
    max_iterations: usize,
) -> Result<Vec<f64>> {
    let mut state = GroverReducedState::uniform(n_items, n_marked)?;
    let mut out = Vec::with_capacity(max_iterations + 1);
    out.push(state.success_probability());
    for _ in 0..max_iterations {
        state = reduced_iterate(&state, phase_oracle, phase_diffusion);
        out.push(state.success_probability());
    }
    Ok(out)
}

/// Iterations to the first maximum when each plate imprints `phase_pass` per
/// pass: `π / (4 sin|φ|) · √(N/m)`.
pub fn optimal_iterations(n_items: f64, n_marked: f64, phase_pass: f64) -> Result<f64> {
    check_sizes(n_items, n_marked)?;
    let phi = phase_pass.abs();
    if !(phi > 0.0 && phi <= FRAC_PI_2 + 1e-12) {
        return Err(Error::config(
            "phase",
            format!("per-pass phase magnitude must lie in (0, pi/2], got {phase_pass}"),
        ));
    }
    Ok(FRAC_PI_4 / phi.sin() * (n_items / n_marked).sqrt())
}

/// Find/unfind period of the ideal search, `(π/2) √(N/m)`.
pub fn oscillation_period(n_items: f64, n_marked: f64) -> f64 {
    FRAC_PI_2 * (n_items / n_marked).sqrt()
}

/// Best success probability reachable within `max_iterations` for the given
/// phase pair.
pub fn best_success(
    n_items: f64,
    n_marked: f64,
    phase_oracle: f64,
    phase_diffusion: f64,
    max_iterations: usize,
) -> Result<f64> {
    Ok(success_trace(
        n_items,
        n_marked,
        phase_oracle,
        phase_diffusion,
        max_iterations,
    )?
    .into_iter()
    .fold(0.0, f64::max))
}

/// Scans `phase_diffusion` over `phase_oracle + j * step` for
/// `j = -half_steps..=half_steps` and returns `(phase_diffusion, best_success)`
/// pairs. The iteration budget is three times the phase-corrected optimum for
/// the matched pair (per-pass phase `phase_oracle / 2`).
pub fn phase_matching_scan(
    n_items: f64,
    n_marked: f64,
    phase_oracle: f64,
    step: f64,
    half_steps: usize,
) -> Result<Vec<(f64, f64)>> {
    let k_opt = optimal_iterations(n_items, n_marked, 0.5 * wrap_phase(phase_oracle))?;
    let budget = (3.0 * k_opt).ceil() as usize;
    let h = half_steps as i64;
    (-h..=h)
        .map(|j| {
            let pd = phase_oracle + j as f64 * step;
            best_success(n_items, n_marked, phase_oracle, pd, budget).map(|p| (pd, p))
        })
        .collect()
}

fn wrap_phase(phi: f64) -> f64 {
    (phi + PI).rem_euclid(2.0 * PI) - PI
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn four_items_one_iteration_finds_the_item() {
        let s = GroverReducedState::uniform(4.0, 1.0).unwrap();
        let s = reduced_iterate(&s, PI, PI);
        assert!((s.success_probability() - 1.0).abs() < 1e-12);

        let f = FullGroverState::uniform(4, &[2]).unwrap();
        let f = full_iterate(&f, PI, PI);
        assert!((f.success_probability() - 1.0).abs() < 1e-12);
        assert!((f.amplitudes()[2].norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn inert_oracle_leaves_intensities_alone() {
        let s0 = GroverReducedState::uniform(37.0, 3.0).unwrap();
        let mut s = s0;
        for _ in 0..10 {
            s = reduced_iterate(&s, 0.0, PI);
            assert!((s.marked().norm_sqr() - s0.marked().norm_sqr()).abs() < 1e-12);
            assert!((s.unmarked().norm_sqr() - s0.unmarked().norm_sqr()).abs() < 1e-12);
        }
    }

    #[test]
    fn zero_iterations_gives_prior() {
        assert!((success_probability(0.0, 31.7, 1.0) - 1.0 / 31.7).abs() < 1e-14);
        let s = GroverReducedState::uniform(31.7, 1.0).unwrap();
        assert!((s.success_probability() - 1.0 / 31.7).abs() < 1e-14);
        assert_eq!(success_probability(1.0, 4.0, 1.0).round(), 1.0);
        assert!((success_probability(1.0, 4.0, 1.0) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn all_marked_is_certain_from_the_start() {
        let f = FullGroverState::uniform(8, &(0..8).collect::<Vec<_>>()).unwrap();
        assert!((f.success_probability() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn unmarked_amplitudes_stay_equal() {
        let mut f = FullGroverState::uniform(64, &[3, 17, 40]).unwrap();
        for _ in 0..20 {
            f = full_iterate(&f, -2.2, -2.2);
            let reference = f
                .amplitudes()
                .iter()
                .zip(0..)
                .find(|(_, j)| !f.is_marked(*j))
                .map(|(a, _)| *a)
                .unwrap();
            for (j, a) in f.amplitudes().iter().enumerate() {
                if !f.is_marked(j) {
                    assert!((a - reference).norm() < 1e-13);
                }
            }
        }
    }

    #[test]
    fn reduced_matches_full_for_seven_marked() {
        let marked: Vec<usize> = vec![1, 100, 200, 333, 512, 700, 1023];
        let mut f = FullGroverState::uniform(1024, &marked).unwrap();
        let mut r = GroverReducedState::uniform(1024.0, 7.0).unwrap();
        for _ in 0..50 {
            f = full_iterate(&f, PI, PI);
            r = reduced_iterate(&r, PI, PI);
            assert!((f.amplitudes()[100] - r.marked()).norm() < 1e-12);
            assert!((f.amplitudes()[0] - r.unmarked()).norm() < 1e-12);
        }
    }

    #[test]
    fn optimal_iterations_values() {
        let ideal = optimal_iterations(32.0, 1.0, FRAC_PI_2).unwrap();
        assert!((ideal - 4.44).abs() < 0.01, "{ideal}");
        let measured = optimal_iterations(32.0, 1.0, 1.1).unwrap();
        assert!((measured - 4.99).abs() < 0.02, "{measured}");
        let one = optimal_iterations(5.0, 5.0, FRAC_PI_2).unwrap();
        assert!((one - FRAC_PI_4).abs() < 1e-15);
        assert!(optimal_iterations(32.0, 1.0, 0.0).is_err());
        assert!(optimal_iterations(32.0, 1.0, 2.0).is_err());
        assert!(optimal_iterations(1.0, 2.0, 1.0).is_err());
    }

    #[test]
    fn oscillation_period_values() {
        assert!((oscillation_period(16.0, 1.0) - 2.0 * PI).abs() < 1e-12);
        assert!((oscillation_period(31.7, 1.0) - 8.84).abs() < 0.01);
    }

    #[test]
    fn period_from_brute_force_trace() {
        let trace = success_trace(100.0, 1.0, PI, PI, 40).unwrap();
        let maxima: Vec<usize> = (1..trace.len() - 1)
            .filter(|&k| trace[k] > trace[k - 1] && trace[k] >= trace[k + 1])
            .collect();
        let spacing = (maxima[1] - maxima[0]) as f64;
        let expected = (FRAC_PI_2 * 10.0).round();
        assert!((spacing - expected).abs() <= 1.0, "{maxima:?}");
    }

    #[test]
    fn invalid_sizes_rejected() {
        assert!(GroverReducedState::uniform(0.0, 0.0).is_err());
        assert!(GroverReducedState::uniform(4.0, 5.0).is_err());
        assert!(FullGroverState::uniform(4, &[4]).is_err());
        assert!(FullGroverState::uniform(4, &[]).is_err());
    }
}
