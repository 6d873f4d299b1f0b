//! Running configured experiments and rendering their output files.
//!
//! Every run produces a set of named text files held in memory
//! ([`RunOutput`]) before anything touches the disk, so identical
//! configurations yield byte-identical files regardless of scheduling.

use std::fmt::Write as _;
use std::path::Path;

use rayon::prelude::*;
use serde_json::{json, Map, Value};

use crate::analysis::{
    equivalent_qubits, estimate_nm, expected_nm, first_maximum, max_database_size,
    rayleigh_resolution, PeakTrace,
};
use crate::cavity::{pulse_energies, run_search};
use crate::config::{sorted, ConfigFile, ExperimentConfig, Mode};
use crate::error::{Error, Result};
use crate::field::half_max_center;
use crate::grover::{
    best_success, full_iterate, optimal_iterations, oscillation_period, success_probability,
    success_trace, FullGroverState,
};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Largest integer database for which the reference table includes the
/// full state-vector column.
const FULL_MODEL_LIMIT: f64 = 65536.0;

/// Nine significant digits, scientific notation.
pub fn fmt9(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.8e}")
    } else {
        "NaN".to_string()
    }
}

/// JSON number rounded to nine significant digits (`null` if not finite).
pub fn num9(x: f64) -> Value {
    if x.is_finite() {
        let rounded: f64 = fmt9(x).parse().expect("formatted float parses");
        json!(rounded)
    } else {
        Value::Null
    }
}

/// Files produced by one run, in write order.
#[derive(Clone, Debug, PartialEq)]
pub struct RunOutput {
    pub files: Vec<(String, String)>,
    pub summary: Value,
}

impl RunOutput {
    fn new(mut files: Vec<(String, String)>, summary: Value) -> Self {
        let summary = sorted(&summary);
        let mut text = serde_json::to_string_pretty(&summary).expect("summary serializes");
        text.push('\n');
        files.push(("summary.json".to_string(), text));
        Self { files, summary }
    }

    pub fn file(&self, name: &str) -> Option<&str> {
        self.files
            .iter()
            .find(|(n, _)| n == name)
            .map(|(_, t)| t.as_str())
    }

    pub fn write_to(&self, dir: &Path) -> Result<()> {
        write_files(&self.files, dir)
    }
}

fn write_files(files: &[(String, String)], dir: &Path) -> Result<()> {
    let io = |path: &Path, source| Error::Io {
        path: path.display().to_string(),
        source,
    };
    std::fs::create_dir_all(dir).map_err(|e| io(dir, e))?;
    for (name, text) in files {
        let path = dir.join(name);
        std::fs::write(&path, text).map_err(|e| io(&path, e))?;
    }
    Ok(())
}

fn base_summary(config: &ExperimentConfig) -> Map<String, Value> {
    let c = &config.cavity;
    let mut s = Map::new();
    s.insert("artifact_version".into(), json!(VERSION));
    s.insert("mode".into(), json!(config.mode.as_str()));
    s.insert("config".into(), config.echo());
    let rayleigh = rayleigh_resolution(c.wavelength, config.numerical_aperture);
    let n_over_m = expected_nm(c.input_fwhm, c.oracle.flat_width());
    s.insert("expected_nm".into(), num9(n_over_m));
    s.insert("rayleigh_resolution_m".into(), num9(rayleigh));
    s.insert(
        "max_database_size".into(),
        num9(max_database_size(c.input_fwhm, rayleigh, 1).expect("1D")),
    );
    s.insert(
        "equivalent_qubits".into(),
        num9(equivalent_qubits(c.input_fwhm, rayleigh, 1).expect("1D")),
    );
    s.insert(
        "oscillation_period".into(),
        num9(oscillation_period(n_over_m, 1.0)),
    );
    let phase = c.oracle.phase_depth();
    let opt = optimal_iterations(n_over_m.max(1.0), 1.0, phase)
        .map(num9)
        .unwrap_or(Value::Null);
    s.insert("optimal_iterations".into(), opt);
    s
}

/// Executes the configured mode and renders its outputs.
pub fn run(config: &ExperimentConfig) -> Result<RunOutput> {
    match config.mode {
        Mode::Search => run_search_mode(config),
        Mode::PulseTrain => run_pulse_train_mode(config),
        Mode::Reference => run_reference_mode(config),
        Mode::Analyze => Ok(RunOutput::new(
            Vec::new(),
            Value::Object(base_summary(config)),
        )),
    }
}

fn run_search_mode(config: &ExperimentConfig) -> Result<RunOutput> {
    let trace = run_search(&config.cavity)?;
    let xs = trace.reported_coordinates();

    let mut profiles = String::from("iteration_count,x_m,intensity,compensated_intensity\n");
    for pulse in &trace.pulses {
        let count = fmt9(pulse.iteration_count);
        for (x, a) in xs.iter().zip(pulse.field.amplitudes()) {
            let i = a.norm_sqr();
            let _ = writeln!(
                profiles,
                "{count},{},{},{}",
                fmt9(*x),
                fmt9(i),
                fmt9(i * pulse.compensation)
            );
        }
    }

    let peaks = PeakTrace::from_search(&trace);
    let mut peak_table = String::from("iteration_count,peak_position_m,peak_value,peak_center_m\n");
    for (s, pulse) in peaks.samples().iter().zip(&trace.pulses) {
        let centre = half_max_center(&pulse.field)
            .map(|x| x * trace.coordinate_scale)
            .unwrap_or(f64::NAN);
        let _ = writeln!(
            peak_table,
            "{},{},{},{}",
            fmt9(s.iteration_count),
            fmt9(s.peak_position),
            fmt9(s.peak_value),
            fmt9(centre)
        );
    }

    let mut summary = base_summary(config);
    let phase = config.cavity.oracle.phase_depth();
    // a trace without an interior maximum is a failed measurement, not a null
    let k = first_maximum(&peaks)?;
    summary.insert("first_maximum".into(), num9(k));
    summary.insert("estimate_nm".into(), num9(estimate_nm(k, phase)));
    let edge: Vec<Value> = trace
        .pulses
        .iter()
        .filter(|p| p.peak_at_edge)
        .map(|p| num9(p.iteration_count))
        .collect();
    summary.insert("peak_at_edge".into(), Value::Array(edge));

    Ok(RunOutput::new(
        vec![
            ("profiles.csv".into(), profiles),
            ("peaks.csv".into(), peak_table),
        ],
        Value::Object(summary),
    ))
}

fn run_pulse_train_mode(config: &ExperimentConfig) -> Result<RunOutput> {
    let trace = run_search(&config.cavity)?;
    let train = pulse_energies(&trace, &config.cavity.slit);
    let mut table = String::from("iteration_count,slit_energy,total_energy\n");
    for (p, pulse) in train.iter().zip(&trace.pulses) {
        let _ = writeln!(
            table,
            "{},{},{}",
            fmt9(p.iteration_count),
            fmt9(p.slit_energy),
            fmt9(pulse.total_energy)
        );
    }
    let mut summary = base_summary(config);
    let ratios: Vec<f64> = train
        .windows(2)
        .filter(|w| w[0].slit_energy > 0.0)
        .map(|w| w[1].slit_energy / w[0].slit_energy)
        .collect();
    let mean_ratio = if ratios.is_empty() {
        f64::NAN
    } else {
        ratios.iter().sum::<f64>() / ratios.len() as f64
    };
    summary.insert("mean_energy_ratio".into(), num9(mean_ratio));
    let (k_max, e_max) = train.iter().fold((f64::NAN, f64::NEG_INFINITY), |acc, p| {
        if p.slit_energy > acc.1 {
            (p.iteration_count, p.slit_energy)
        } else {
            acc
        }
    });
    summary.insert("max_slit_energy".into(), num9(e_max));
    summary.insert("max_slit_energy_iteration".into(), num9(k_max));
    Ok(RunOutput::new(
        vec![("pulse_train.csv".into(), table)],
        Value::Object(summary),
    ))
}

fn run_reference_mode(config: &ExperimentConfig) -> Result<RunOutput> {
    let r = config.reference;
    let budget = r.iterations.max(1);
    let reduced = success_trace(
        r.n_items,
        r.n_marked,
        r.phase_oracle,
        r.phase_diffusion,
        budget,
    )?;

    let integral = r.n_items.fract() == 0.0 && r.n_marked.fract() == 0.0;
    let full: Option<Vec<f64>> = if integral && r.n_items <= FULL_MODEL_LIMIT {
        let marked: Vec<usize> = (0..r.n_marked as usize).collect();
        let mut state = FullGroverState::uniform(r.n_items as usize, &marked)?;
        let mut out = vec![state.success_probability()];
        for _ in 0..budget {
            state = full_iterate(&state, r.phase_oracle, r.phase_diffusion);
            out.push(state.success_probability());
        }
        Some(out)
    } else {
        None
    };

    let mut table = String::from(
        "k,ideal_success_probability,reduced_success_probability,full_success_probability\n",
    );
    for k in 0..=budget {
        let full_col = full.as_ref().map(|f| fmt9(f[k])).unwrap_or_default();
        let _ = writeln!(
            table,
            "{k},{},{},{full_col}",
            fmt9(success_probability(k as f64, r.n_items, r.n_marked)),
            fmt9(reduced[k])
        );
    }

    let mut summary = base_summary(config);
    summary.insert(
        "success_probability".into(),
        num9(reduced[r.iterations.min(budget)]),
    );
    summary.insert(
        "ideal_success_probability".into(),
        num9(success_probability(
            r.iterations as f64,
            r.n_items,
            r.n_marked,
        )),
    );
    let pass = 0.5 * r.phase_oracle.abs();
    let horizon = optimal_iterations(
        r.n_items,
        r.n_marked,
        pass.clamp(1e-6, std::f64::consts::FRAC_PI_2),
    )?;
    let horizon = (3.0 * horizon).ceil() as usize;
    summary.insert(
        "best_success_probability".into(),
        num9(best_success(
            r.n_items,
            r.n_marked,
            r.phase_oracle,
            r.phase_diffusion,
            horizon,
        )?),
    );
    summary.insert(
        "reference_oscillation_period".into(),
        num9(oscillation_period(r.n_items, r.n_marked)),
    );
    Ok(RunOutput::new(
        vec![("reference.csv".into(), table)],
        Value::Object(summary),
    ))
}

/// One grid point of a sweep.
#[derive(Clone, Debug, PartialEq)]
pub struct SweepPoint {
    pub values: Vec<f64>,
    pub output: RunOutput,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepOutput {
    pub parameters: Vec<String>,
    pub points: Vec<SweepPoint>,
    pub files: Vec<(String, String)>,
}

impl SweepOutput {
    pub fn file(&self, name: &str) -> Option<&str> {
        self.files
            .iter()
            .find(|(n, _)| n == name)
            .map(|(_, t)| t.as_str())
    }

    pub fn write_to(&self, dir: &Path) -> Result<()> {
        write_files(&self.files, dir)
    }

    /// Column of a numeric summary field across points, in grid order.
    pub fn column(&self, key: &str) -> Vec<Option<f64>> {
        self.points
            .iter()
            .map(|p| p.output.summary.get(key).and_then(Value::as_f64))
            .collect()
    }
}

fn cartesian(axes: &[Vec<f64>]) -> Vec<Vec<f64>> {
    axes.iter().fold(vec![Vec::new()], |acc, values| {
        acc.into_iter()
            .flat_map(|prefix| {
                values.iter().map(move |v| {
                    let mut p = prefix.clone();
                    p.push(*v);
                    p
                })
            })
            .collect()
    })
}

/// Runs every point of the Cartesian product of the configured sweep axes.
///
/// With no axes this is a single [`run`] and writes exactly its files.
/// Points run on up to `config.workers` threads; results are assembled in
/// grid order (last axis fastest).
pub fn sweep(config: &ExperimentConfig) -> Result<SweepOutput> {
    if config.sweep.is_empty() {
        let output = run(config)?;
        return Ok(SweepOutput {
            parameters: Vec::new(),
            files: output.files.clone(),
            points: vec![SweepPoint {
                values: Vec::new(),
                output,
            }],
        });
    }
    let parameters: Vec<String> = config.sweep.iter().map(|a| a.parameter.clone()).collect();
    let grid = cartesian(
        &config
            .sweep
            .iter()
            .map(|a| a.values.clone())
            .collect::<Vec<_>>(),
    );
    let base = {
        let mut f = config.file().clone();
        f.sweep = Some(Vec::new());
        f
    };
    let point_config = |values: &[f64]| -> Result<ExperimentConfig> {
        let mut f: ConfigFile = base.clone();
        for (p, v) in parameters.iter().zip(values) {
            f = f.with_parameter(p, *v)?;
        }
        f.resolve()
    };
    // resolve serially so configuration errors surface deterministically
    let configs: Vec<ExperimentConfig> = grid
        .iter()
        .map(|v| point_config(v))
        .collect::<Result<_>>()?;

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.workers)
        .build()
        .map_err(|e| Error::config("workers", e.to_string()))?;
    let outputs: Vec<Result<RunOutput>> = pool.install(|| configs.par_iter().map(run).collect());
    let mut points = Vec::with_capacity(grid.len());
    for (values, output) in grid.into_iter().zip(outputs) {
        points.push(SweepPoint {
            values,
            output: output?,
        });
    }

    let metrics: Vec<String> = points[0]
        .output
        .summary
        .as_object()
        .map(|m| {
            m.iter()
                .filter(|(_, v)| v.is_number() || v.is_null())
                .map(|(k, _)| k.clone())
                .collect()
        })
        .unwrap_or_default();
    let mut table = String::new();
    let header: Vec<&str> = parameters
        .iter()
        .map(String::as_str)
        .chain(metrics.iter().map(String::as_str))
        .collect();
    table.push_str(&header.join(","));
    table.push('\n');
    for p in &points {
        let mut cells: Vec<String> = p.values.iter().map(|v| fmt9(*v)).collect();
        for m in &metrics {
            cells.push(
                p.output
                    .summary
                    .get(m)
                    .and_then(Value::as_f64)
                    .map(fmt9)
                    .unwrap_or_default(),
            );
        }
        table.push_str(&cells.join(","));
        table.push('\n');
    }
    let summaries = Value::Array(
        points
            .iter()
            .map(|p| {
                let mut m = Map::new();
                for (name, v) in parameters.iter().zip(&p.values) {
                    m.insert(name.clone(), num9(*v));
                }
                json!({ "point": Value::Object(m), "summary": p.output.summary })
            })
            .collect(),
    );
    let mut summary_text = serde_json::to_string_pretty(&summaries).expect("serializes");
    summary_text.push('\n');
    Ok(SweepOutput {
        parameters,
        points,
        files: vec![
            ("sweep.csv".into(), table),
            ("sweep_summary.json".into(), summary_text),
        ],
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn quick(text: &str) -> ExperimentConfig {
        ConfigFile::parse(text).unwrap().resolve().unwrap()
    }

    #[test]
    fn nine_significant_digits() {
        assert_eq!(fmt9(0.5), "5.00000000e-1");
        assert_eq!(fmt9(1.0 / 3.0), "3.33333333e-1");
        assert_eq!(fmt9(f64::NAN), "NaN");
        assert_eq!(num9(1.0 / 3.0), json!(0.333333333));
        assert_eq!(num9(f64::INFINITY), Value::Null);
    }

    #[test]
    fn cartesian_order_last_axis_fastest() {
        let g = cartesian(&[vec![1.0, 2.0], vec![10.0, 20.0, 30.0]]);
        assert_eq!(g.len(), 6);
        assert_eq!(g[0], vec![1.0, 10.0]);
        assert_eq!(g[1], vec![1.0, 20.0]);
        assert_eq!(g[3], vec![2.0, 10.0]);
    }

    #[test]
    fn reference_mode_four_items() {
        let c = quick(
            r#"{"mode": "reference", "reference": {"n_items": 4, "n_marked": 1, "iterations": 1}}"#,
        );
        let out = run(&c).unwrap();
        let p = out.summary["success_probability"].as_f64().unwrap();
        assert!((p - 1.0).abs() < 1e-9);
        let table = out.file("reference.csv").unwrap();
        assert_eq!(table.lines().count(), 3);
        assert!(table
            .lines()
            .nth(2)
            .unwrap()
            .starts_with("1,1.00000000e0,1.00000000e0,1.00000000e0"));
    }

    #[test]
    fn analyze_mode_writes_only_summary() {
        let c = quick(r#"{"mode": "analyze"}"#);
        let out = run(&c).unwrap();
        assert_eq!(out.files.len(), 1);
        let r = out.summary["rayleigh_resolution_m"].as_f64().unwrap();
        assert!((10e-6..=11e-6).contains(&r));
        assert!(out.summary["config"].is_object());
        assert_eq!(out.summary["artifact_version"], json!(VERSION));
    }

    #[test]
    fn small_search_produces_tables() {
        let c = quick(r#"{"grid": {"n_samples": 2048}, "n_pulses": 8}"#);
        let out = run(&c).unwrap();
        let profiles = out.file("profiles.csv").unwrap();
        assert_eq!(profiles.lines().count(), 1 + 8 * 2048);
        let peaks = out.file("peaks.csv").unwrap();
        assert_eq!(peaks.lines().count(), 9);
        assert!(peaks.lines().nth(1).unwrap().starts_with("5.00000000e-1,"));
        assert!(out.summary["first_maximum"].is_number());
    }

    #[test]
    fn too_few_pulses_is_a_measurement_error() {
        let c = quick(r#"{"grid": {"n_samples": 2048}, "n_pulses": 3}"#);
        let e = run(&c).unwrap_err();
        assert!(matches!(e, Error::Measurement(_)));
        assert_eq!(e.exit_code(), 3);
    }

    #[test]
    fn empty_sweep_is_a_plain_run() {
        let c = quick(r#"{"mode": "reference"}"#);
        let s = sweep(&c).unwrap();
        assert_eq!(s.files, run(&c).unwrap().files);
    }

    #[test]
    fn sweep_rows_follow_grid_order() {
        let c = quick(
            r#"{"mode": "reference", "workers": 3,
                "reference": {"n_items": 32, "phase_oracle_rad": -1.1, "phase_diffusion_rad": -1.1},
                "sweep": [{"parameter": "n_items", "values": [16, 32]},
                          {"parameter": "phase_diffusion_rad", "values": [-1.2, -1.1, -1.0]}]}"#,
        );
        let s = sweep(&c).unwrap();
        assert_eq!(s.points.len(), 6);
        let table = s.file("sweep.csv").unwrap();
        let rows: Vec<&str> = table.lines().collect();
        assert!(rows[0].starts_with("n_items,phase_diffusion_rad,"));
        assert!(rows[1].starts_with("1.60000000e1,-1.20000000e0,"));
        assert!(rows[6].starts_with("3.20000000e1,-1.00000000e0,"));
        let serial = sweep(&quick(
            &serde_json::to_string(&{
                let mut v = c.echo();
                v["workers"] = json!(1);
                v
            })
            .unwrap(),
        ))
        .unwrap();
        assert_eq!(serial.file("sweep.csv"), s.file("sweep.csv"));
    }
}
