//! Experiment configuration files.
//!
//! Configurations are JSON objects. Every physical quantity carries its unit
//! in the key name (`wavelength_nm`, `flat_width_um`, ...). Unknown keys are
//! rejected. A file names a preset (default `paper-42um`); keys present in the
//! file override the preset's values, nested objects key by key.

use std::f64::consts::PI;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::cavity::CavityConfig;
use crate::error::{Error, Result};
use crate::field::Grid1D;
use crate::optics::{LossModel, Slit, TrapezoidPhasePlate};

pub const DEFAULT_PRESET: &str = "paper-42um";

const PRESETS: &[(&str, &str)] = &[
    ("paper-42um", include_str!("../presets/paper-42um.json")),
    ("paper-84um", include_str!("../presets/paper-84um.json")),
    ("paper-126um", include_str!("../presets/paper-126um.json")),
    ("ideal", include_str!("../presets/ideal.json")),
];

pub fn preset_names() -> impl Iterator<Item = &'static str> {
    PRESETS.iter().map(|(name, _)| *name)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    Search,
    PulseTrain,
    Reference,
    Analyze,
}

impl Mode {
    pub fn as_str(&self) -> &'static str {
        match self {
            Mode::Search => "search",
            Mode::PulseTrain => "pulse-train",
            Mode::Reference => "reference",
            Mode::Analyze => "analyze",
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlateFile {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub center_um: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub flat_width_um: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ramp_width_um: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub phase_rad: Option<f64>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SlitFile {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub center_um: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub width_um: Option<f64>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridFile {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_samples: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub pitch_um: Option<f64>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReferenceFile {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_items: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_marked: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub iterations: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub phase_oracle_rad: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub phase_diffusion_rad: Option<f64>,
}

/// One sweep axis: a parameter path and the values it takes.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepAxis {
    pub parameter: String,
    pub values: Vec<f64>,
}

/// Serialized configuration, as read from disk. All keys optional.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub preset: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mode: Option<Mode>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub wavelength_nm: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub input_fwhm_um: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub focal_length_1_mm: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub focal_length_2_mm: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub roundtrip_energy_factor: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub output_mirror_transmission: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub numerical_aperture: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_pulses: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub loss_compensation: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub report_magnification: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub workers: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub grid: Option<GridFile>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub oracle: Option<PlateFile>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub iaa: Option<PlateFile>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub slit: Option<SlitFile>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reference: Option<ReferenceFile>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sweep: Option<Vec<SweepAxis>>,
}

fn from_json_error(err: serde_json::Error) -> Error {
    use serde_json::error::Category;
    match err.classify() {
        Category::Syntax | Category::Eof | Category::Io => Error::Parse {
            line: err.line(),
            column: err.column(),
            message: err.to_string(),
        },
        Category::Data => Error::config("schema", err.to_string()),
    }
}

impl ConfigFile {
    pub fn parse(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(from_json_error)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::parse(&text)
    }

    pub fn preset(name: &str) -> Result<Self> {
        let text = PRESETS
            .iter()
            .find(|(n, _)| *n == name)
            .map(|(_, t)| *t)
            .ok_or_else(|| {
                Error::config(
                    "preset",
                    format!(
                        "unknown preset `{name}` (expected one of: {})",
                        preset_names().collect::<Vec<_>>().join(", ")
                    ),
                )
            })?;
        let mut file = Self::parse(text)?;
        file.preset = Some(name.to_string());
        Ok(file)
    }

    pub fn to_value(&self) -> Value {
        serde_json::to_value(self).expect("config serializes")
    }

    fn from_value(value: Value) -> Result<Self> {
        serde_json::from_value(value).map_err(from_json_error)
    }

    /// Overlays `self` on its preset, producing a file with every key set.
    pub fn expanded(&self) -> Result<Self> {
        let name = self.preset.as_deref().unwrap_or(DEFAULT_PRESET);
        let mut merged = Self::preset(name)?.to_value();
        merge(&mut merged, self.to_value());
        let mut out = Self::from_value(merged)?;
        out.preset = Some(name.to_string());
        Ok(out)
    }

    /// Returns a copy with the numeric value at `parameter` replaced.
    ///
    /// `parameter` is a dotted path (`oracle.flat_width_um`). A bare name is
    /// looked up at the top level, then under `oracle`, then under `reference`.
    pub fn with_parameter(&self, parameter: &str, value: f64) -> Result<Self> {
        let mut root = self.expanded()?.to_value();
        let path = resolve_path(&root, parameter)?;
        let number = if value.fract() == 0.0 && value.abs() < 9.0e15 {
            Value::from(value as i64)
        } else {
            serde_json::Number::from_f64(value)
                .map(Value::Number)
                .ok_or_else(|| Error::config(parameter, "sweep values must be finite"))?
        };
        let mut slot = &mut root;
        for part in &path {
            slot = slot
                .get_mut(part.as_str())
                .ok_or_else(|| Error::config(parameter, "no such parameter"))?;
        }
        if !slot.is_number() {
            return Err(Error::config(parameter, "parameter is not numeric"));
        }
        *slot = number;
        Self::from_value(root).map_err(|e| match e {
            Error::Config { message, .. } => Error::config(parameter, message),
            other => other,
        })
    }

    pub fn resolve(&self) -> Result<ExperimentConfig> {
        ExperimentConfig::from_file(self)
    }
}

fn merge(base: &mut Value, overlay: Value) {
    match (base, overlay) {
        (Value::Object(b), Value::Object(o)) => {
            for (k, v) in o {
                match b.get_mut(&k) {
                    Some(slot) if slot.is_object() && v.is_object() => merge(slot, v),
                    _ => {
                        b.insert(k, v);
                    }
                }
            }
        }
        (slot, v) => *slot = v,
    }
}

fn resolve_path(root: &Value, parameter: &str) -> Result<Vec<String>> {
    let unknown = || Error::config(parameter, "unknown sweep parameter");
    if parameter.contains('.') {
        let parts: Vec<String> = parameter.split('.').map(str::to_string).collect();
        let mut v = root;
        for p in &parts {
            v = v.get(p.as_str()).ok_or_else(unknown)?;
        }
        return Ok(parts);
    }
    let top = root.as_object().ok_or_else(unknown)?;
    if top.get(parameter).is_some_and(Value::is_number) {
        return Ok(vec![parameter.to_string()]);
    }
    for section in ["oracle", "reference"] {
        if top
            .get(section)
            .and_then(|s| s.get(parameter))
            .is_some_and(Value::is_number)
        {
            return Ok(vec![section.to_string(), parameter.to_string()]);
        }
    }
    Err(unknown())
}

/// Parameters of the discrete reference model.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ReferenceParams {
    pub n_items: f64,
    pub n_marked: f64,
    pub iterations: usize,
    pub phase_oracle: f64,
    pub phase_diffusion: f64,
}

/// Validated, fully populated experiment description.
#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    pub preset: String,
    pub mode: Mode,
    pub output_dir: PathBuf,
    pub cavity: CavityConfig,
    pub numerical_aperture: f64,
    pub reference: ReferenceParams,
    pub sweep: Vec<SweepAxis>,
    pub workers: usize,
    file: ConfigFile,
}

fn required<T: Copy>(value: Option<T>, key: &str) -> Result<T> {
    value.ok_or_else(|| Error::config(key, "missing value"))
}

fn positive(value: Option<f64>, key: &str) -> Result<f64> {
    let v = required(value, key)?;
    if v.is_finite() && v > 0.0 {
        Ok(v)
    } else {
        Err(Error::config(key, format!("must be positive, got {v}")))
    }
}

fn finite(value: Option<f64>, key: &str) -> Result<f64> {
    let v = required(value, key)?;
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::config(key, format!("must be finite, got {v}")))
    }
}

fn plate(file: &Option<PlateFile>, section: &str) -> Result<TrapezoidPhasePlate> {
    let p = file.clone().unwrap_or_default();
    let key = |k: &str| format!("{section}.{k}");
    let center = finite(p.center_um, &key("center_um"))? * 1e-6;
    let flat = positive(p.flat_width_um, &key("flat_width_um"))? * 1e-6;
    let ramp = required(p.ramp_width_um, &key("ramp_width_um"))?;
    if !(ramp.is_finite() && ramp >= 0.0) {
        return Err(Error::config(
            key("ramp_width_um"),
            format!("must be non-negative, got {ramp}"),
        ));
    }
    let phase = finite(p.phase_rad, &key("phase_rad"))?;
    if phase.abs() > PI {
        return Err(Error::config(
            key("phase_rad"),
            format!("must satisfy |phase| <= pi, got {phase}"),
        ));
    }
    TrapezoidPhasePlate::new(center, flat, ramp * 1e-6, phase)
}

impl ExperimentConfig {
    pub fn preset(name: &str) -> Result<Self> {
        ConfigFile::preset(name)?.resolve()
    }

    pub fn from_file(file: &ConfigFile) -> Result<Self> {
        let f = file.expanded()?;

        let grid_file = f.grid.clone().unwrap_or_default();
        let n_samples = required(grid_file.n_samples, "grid.n_samples")?;
        let pitch = positive(grid_file.pitch_um, "grid.pitch_um")? * 1e-6;
        let grid = Grid1D::new(n_samples, pitch).map_err(|e| match e {
            Error::Config { message, .. } => Error::config("grid.n_samples", message),
            other => other,
        })?;

        let slit_file = f.slit.clone().unwrap_or_default();
        let slit = Slit::new(
            finite(slit_file.center_um, "slit.center_um")? * 1e-6,
            positive(slit_file.width_um, "slit.width_um")? * 1e-6,
        )?;

        let factor = positive(f.roundtrip_energy_factor, "roundtrip_energy_factor")?;
        let loss = LossModel::new(factor).map_err(|e| match e {
            Error::Config { message, .. } => Error::config("roundtrip_energy_factor", message),
            other => other,
        })?;
        let transmission = positive(f.output_mirror_transmission, "output_mirror_transmission")?;
        if transmission > 1.0 {
            return Err(Error::config(
                "output_mirror_transmission",
                format!("must not exceed 1, got {transmission}"),
            ));
        }
        let n_pulses = required(f.n_pulses, "n_pulses")?;
        if n_pulses == 0 {
            return Err(Error::config("n_pulses", "must be at least 1"));
        }

        let cavity = CavityConfig {
            wavelength: positive(f.wavelength_nm, "wavelength_nm")? * 1e-9,
            input_fwhm: positive(f.input_fwhm_um, "input_fwhm_um")? * 1e-6,
            oracle: plate(&f.oracle, "oracle")?,
            iaa: plate(&f.iaa, "iaa")?,
            focal_length_1: positive(f.focal_length_1_mm, "focal_length_1_mm")? * 1e-3,
            focal_length_2: positive(f.focal_length_2_mm, "focal_length_2_mm")? * 1e-3,
            loss,
            output_mirror_transmission: transmission,
            slit,
            grid,
            n_pulses,
            loss_compensation: required(f.loss_compensation, "loss_compensation")?,
            report_magnification: required(f.report_magnification, "report_magnification")?,
        };
        cavity.validate().map_err(|e| match e {
            Error::Config { key, message } => Error::config(
                match key.as_str() {
                    "input_fwhm" => "input_fwhm_um".to_string(),
                    "oracle" => "oracle.flat_width_um".to_string(),
                    "iaa" => "iaa.flat_width_um".to_string(),
                    _ => key,
                },
                message,
            ),
            other => other,
        })?;

        let r = f.reference.clone().unwrap_or_default();
        let n_items = positive(r.n_items, "reference.n_items")?;
        let n_marked = positive(r.n_marked, "reference.n_marked")?;
        if n_marked > n_items {
            return Err(Error::config(
                "reference.n_marked",
                format!("must not exceed n_items = {n_items}, got {n_marked}"),
            ));
        }
        let reference = ReferenceParams {
            n_items,
            n_marked,
            iterations: required(r.iterations, "reference.iterations")?,
            phase_oracle: finite(r.phase_oracle_rad, "reference.phase_oracle_rad")?,
            phase_diffusion: finite(r.phase_diffusion_rad, "reference.phase_diffusion_rad")?,
        };

        let workers = required(f.workers, "workers")?;
        if workers == 0 {
            return Err(Error::config("workers", "must be at least 1"));
        }
        let sweep = f.sweep.clone().unwrap_or_default();
        for axis in &sweep {
            if axis.values.is_empty() {
                return Err(Error::config(
                    format!("sweep.{}", axis.parameter),
                    "axis has no values",
                ));
            }
            resolve_path(&f.to_value(), &axis.parameter)?;
        }

        Ok(Self {
            preset: f.preset.clone().unwrap_or_else(|| DEFAULT_PRESET.into()),
            mode: required(f.mode, "mode")?,
            output_dir: PathBuf::from(f.output_dir.clone().unwrap_or_else(|| "out".into())),
            numerical_aperture: positive(f.numerical_aperture, "numerical_aperture")?,
            cavity,
            reference,
            sweep,
            workers,
            file: f,
        })
    }

    /// Fully expanded configuration as written back into summaries.
    pub fn file(&self) -> &ConfigFile {
        &self.file
    }

    pub fn echo(&self) -> Value {
        self.file.to_value()
    }
}

/// Reads and validates a configuration file.
pub fn load_config(path: &Path) -> Result<ExperimentConfig> {
    ConfigFile::load(path)?.resolve()
}

/// Recursively sorted copy, for stable output.
pub(crate) fn sorted(value: &Value) -> Value {
    match value {
        Value::Object(map) => {
            let mut keys: Vec<&String> = map.keys().collect();
            keys.sort();
            let mut out = Map::new();
            for k in keys {
                out.insert(k.clone(), sorted(&map[k]));
            }
            Value::Object(out)
        }
        Value::Array(items) => Value::Array(items.iter().map(sorted).collect()),
        other => other.clone(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_PI_2;

    #[test]
    fn every_preset_resolves() {
        for name in preset_names() {
            let c = ExperimentConfig::preset(name).unwrap();
            assert_eq!(c.preset, name);
            assert_eq!(c.mode, Mode::Search);
        }
    }

    #[test]
    fn paper_42_preset_values() {
        let c = ExperimentConfig::preset("paper-42um").unwrap().cavity;
        assert!((c.oracle.flat_width() - 42e-6).abs() < 1e-15);
        assert!((c.oracle.ramp_width() - 4e-6).abs() < 1e-15);
        assert_eq!(c.oracle.phase_depth(), -1.1);
        assert_eq!(c.iaa.phase_depth(), -1.1);
        assert!((c.iaa.flat_width() - 136e-6).abs() < 1e-15);
        assert!((c.input_fwhm - 1.33e-3).abs() < 1e-15);
        assert_eq!(c.loss.factor(), 0.75);
        assert!((c.wavelength - 532e-9).abs() < 1e-20);
        assert_eq!(c.grid.n_samples(), 16384);
        assert_eq!(c.n_pulses, 12);
    }

    #[test]
    fn other_paper_presets() {
        let c = ExperimentConfig::preset("paper-84um").unwrap().cavity;
        assert!((c.oracle.flat_width() - 84e-6).abs() < 1e-15);
        assert!((c.oracle.ramp_width() - 8e-6).abs() < 1e-15);
        let c = ExperimentConfig::preset("paper-126um").unwrap().cavity;
        assert!((c.oracle.flat_width() - 126e-6).abs() < 1e-15);
        assert!((c.oracle.ramp_width() - 37e-6).abs() < 1e-15);
    }

    #[test]
    fn empty_object_with_ideal_preset() {
        let c = ConfigFile::parse(r#"{"preset": "ideal"}"#)
            .unwrap()
            .resolve()
            .unwrap();
        assert_eq!(c.cavity.oracle.ramp_width(), 0.0);
        assert_eq!(c.cavity.iaa.ramp_width(), 0.0);
        assert_eq!(c.cavity.oracle.phase_depth(), -FRAC_PI_2);
        assert_eq!(c.cavity.iaa.phase_depth(), -FRAC_PI_2);
        assert_eq!(c.cavity.loss.factor(), 1.0);
    }

    #[test]
    fn empty_object_uses_default_preset() {
        let c = ConfigFile::parse("{}").unwrap().resolve().unwrap();
        assert_eq!(c.preset, DEFAULT_PRESET);
    }

    #[test]
    fn negative_wavelength_names_key() {
        let err = ConfigFile::parse(r#"{"wavelength_nm": -1}"#)
            .unwrap()
            .resolve()
            .unwrap_err();
        match err {
            Error::Config { key, .. } => assert_eq!(key, "wavelength_nm"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn unknown_key_is_rejected() {
        let err = ConfigFile::parse(r#"{"wavelenght_nm": 532}"#).unwrap_err();
        assert!(matches!(&err, Error::Config { .. }), "{err:?}");
        assert!(err.to_string().contains("wavelenght_nm"));
        let err = ConfigFile::parse(r#"{"oracle": {"width_um": 3}}"#).unwrap_err();
        assert!(err.to_string().contains("width_um"));
    }

    #[test]
    fn syntax_error_reports_position() {
        match ConfigFile::parse("{\n  \"n_pulses\": 12,\n  oops\n}") {
            Err(Error::Parse { line, column, .. }) => {
                assert_eq!(line, 3);
                assert!(column > 0);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn overrides_merge_into_nested_sections() {
        let c = ConfigFile::parse(r#"{"preset": "paper-84um", "oracle": {"phase_rad": -0.9}}"#)
            .unwrap()
            .resolve()
            .unwrap();
        assert_eq!(c.cavity.oracle.phase_depth(), -0.9);
        assert!((c.cavity.oracle.flat_width() - 84e-6).abs() < 1e-15);
    }

    #[test]
    fn plate_wider_than_fourier_grid_is_rejected() {
        let err = ConfigFile::parse(r#"{"iaa": {"flat_width_um": 200000}}"#)
            .unwrap()
            .resolve()
            .unwrap_err();
        match err {
            Error::Config { key, .. } => assert_eq!(key, "iaa.flat_width_um"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn unknown_preset_is_rejected() {
        assert!(matches!(
            ConfigFile::parse(r#"{"preset": "paper-43um"}"#)
                .unwrap()
                .resolve(),
            Err(Error::Config { .. })
        ));
    }

    #[test]
    fn echo_round_trips() {
        let c = ConfigFile::parse(r#"{"preset": "paper-126um", "n_pulses": 7}"#)
            .unwrap()
            .resolve()
            .unwrap();
        let text = serde_json::to_string(&c.echo()).unwrap();
        let again = ConfigFile::parse(&text).unwrap().resolve().unwrap();
        assert_eq!(again, c);
    }

    #[test]
    fn sweep_parameter_paths() {
        let f = ConfigFile::default();
        let g = f.with_parameter("flat_width_um", 84.0).unwrap();
        assert_eq!(g.oracle.unwrap().flat_width_um, Some(84.0));
        let g = f.with_parameter("iaa.ramp_width_um", 3.5).unwrap();
        assert_eq!(g.iaa.unwrap().ramp_width_um, Some(3.5));
        let g = f.with_parameter("n_pulses", 20.0).unwrap();
        assert_eq!(g.n_pulses, Some(20));
        let g = f.with_parameter("phase_diffusion_rad", -1.0).unwrap();
        assert_eq!(g.reference.unwrap().phase_diffusion_rad, Some(-1.0));
        assert!(f.with_parameter("nonsense", 1.0).is_err());
        assert!(f.with_parameter("oracle", 1.0).is_err());
        assert!(f.with_parameter("n_pulses", 2.5).is_err());
    }

    #[test]
    fn sweep_axes_are_checked() {
        let bad = ConfigFile::parse(r#"{"sweep": [{"parameter": "bogus", "values": [1]}]}"#)
            .unwrap()
            .resolve();
        assert!(bad.is_err());
        let empty = ConfigFile::parse(r#"{"sweep": [{"parameter": "n_pulses", "values": []}]}"#)
            .unwrap()
            .resolve();
        assert!(empty.is_err());
    }
}
