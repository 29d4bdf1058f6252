//! Run configuration: TOML sections plus `section.key=value` overrides.
//!
//! Angles are given in units of π. Every physical value is validated
//! against the core constructors before any computation starts.

use std::fs;
use std::path::{Path, PathBuf};

use chiral_array_core::lattice::default_interface;
use chiral_array_core::phases::{InterfaceAssignment, Thresholds};
use chiral_array_core::{ArrayGeometry, ChiralCoupling, DriveField};
use serde::{Deserialize, Serialize};

use crate::error::CliError;

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub geometry: GeometryConfig,
    pub coupling: CouplingConfig,
    pub drive: DriveConfig,
    pub thresholds: ThresholdsConfig,
    pub output: OutputConfig,
    pub sweep: SweepConfig,
    pub critical: CriticalConfig,
    pub fit: FitConfig,
}

/// Interface index: an explicit 1-based site or `"ceil-half"`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum InterfaceRule {
    Index(usize),
    Named(NamedInterface),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum NamedInterface {
    #[serde(rename = "ceil-half")]
    CeilHalf,
}

impl InterfaceRule {
    pub fn resolve(self, n: usize) -> usize {
        match self {
            InterfaceRule::Index(m) => m,
            InterfaceRule::Named(NamedInterface::CeilHalf) => default_interface(n),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GeometryConfig {
    pub n: usize,
    pub m: InterfaceRule,
    pub xi1: f64,
    pub xi2: f64,
}

impl Default for GeometryConfig {
    fn default() -> Self {
        GeometryConfig {
            n: 100,
            m: InterfaceRule::Named(NamedInterface::CeilHalf),
            xi1: 0.02,
            xi2: 0.8,
        }
    }
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CouplingConfig {
    pub d: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DriveConfig {
    pub rabi: f64,
    pub theta: f64,
    /// Uniform detuning applied to every site.
    pub detuning: f64,
    /// Per-site detunings; overrides `detuning`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub detunings: Option<Vec<f64>>,
    /// File with one detuning per line; overrides `detuning`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub detunings_file: Option<PathBuf>,
}

impl Default for DriveConfig {
    fn default() -> Self {
        DriveConfig {
            rabi: DriveField::DEFAULT_RABI,
            theta: 0.5,
            detuning: 0.0,
            detunings: None,
            detunings_file: None,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ThresholdsConfig {
    pub outer_excited: f64,
    pub outer_hole: f64,
    pub inner_spike: f64,
    pub inner_spike_extended: f64,
    pub inner_hole: f64,
    pub inner_window: usize,
    pub co_modulation: f64,
    pub cfd_fraction: f64,
    pub cfd_linearity: f64,
    pub pi_tolerance: f64,
    /// One of `left`, `right`, `shared`, `excluded`.
    pub interface_assignment: String,
}

impl Default for ThresholdsConfig {
    fn default() -> Self {
        let t = Thresholds::default();
        ThresholdsConfig {
            outer_excited: t.outer_excited,
            outer_hole: t.outer_hole,
            inner_spike: t.inner_spike,
            inner_spike_extended: t.inner_spike_extended,
            inner_hole: t.inner_hole,
            inner_window: t.inner_window,
            co_modulation: t.co_modulation,
            cfd_fraction: t.cfd_fraction,
            cfd_linearity: t.cfd_linearity,
            pi_tolerance: t.pi_tolerance,
            interface_assignment: InterfaceAssignment::default().as_str().to_string(),
        }
    }
}

impl ThresholdsConfig {
    pub fn thresholds(&self) -> Result<Thresholds, CliError> {
        let t = Thresholds {
            outer_excited: self.outer_excited,
            outer_hole: self.outer_hole,
            inner_spike: self.inner_spike,
            inner_spike_extended: self.inner_spike_extended,
            inner_hole: self.inner_hole,
            inner_window: self.inner_window,
            co_modulation: self.co_modulation,
            cfd_fraction: self.cfd_fraction,
            cfd_linearity: self.cfd_linearity,
            pi_tolerance: self.pi_tolerance,
        };
        t.validate().map_err(|e| CliError::from_core("thresholds", e))?;
        Ok(t)
    }

    pub fn assignment(&self) -> Result<InterfaceAssignment, CliError> {
        InterfaceAssignment::parse(&self.interface_assignment).ok_or_else(|| {
            CliError::validation(
                "thresholds.interface_assignment",
                format!("expected left, right, shared or excluded, got `{}`", self.interface_assignment),
            )
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Csv,
    Json,
}

impl OutputFormat {
    pub fn extension(self) -> &'static str {
        match self {
            OutputFormat::Csv => "csv",
            OutputFormat::Json => "json",
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputConfig {
    pub directory: PathBuf,
    pub format: OutputFormat,
    /// Digits after the decimal point.
    pub precision: usize,
}

impl Default for OutputConfig {
    fn default() -> Self {
        OutputConfig {
            directory: PathBuf::from("out"),
            format: OutputFormat::Csv,
            precision: 12,
        }
    }
}

/// Explicit values or an inclusive linear range.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Axis {
    Values(Vec<f64>),
    Range(AxisRange),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AxisRange {
    pub start: f64,
    pub stop: f64,
    pub count: usize,
}

impl Axis {
    pub fn values(&self, name: &'static str) -> Result<Vec<f64>, CliError> {
        match self {
            Axis::Values(v) if v.is_empty() => Err(CliError::validation(name, "axis has no values")),
            Axis::Values(v) => Ok(v.clone()),
            Axis::Range(r) if r.count == 0 => Err(CliError::validation(name, "count must be positive")),
            Axis::Range(r) if r.count == 1 => Ok(vec![r.start]),
            Axis::Range(r) => Ok((0..r.count)
                .map(|k| r.start + (r.stop - r.start) * k as f64 / (r.count - 1) as f64)
                .collect()),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SweepConfig {
    /// `ξ₂/π` axis.
    pub xi2: Axis,
    /// Directionality axis.
    pub d: Axis,
}

impl Default for SweepConfig {
    fn default() -> Self {
        SweepConfig {
            xi2: Axis::Range(AxisRange {
                start: 0.01,
                stop: 1.0,
                count: 100,
            }),
            d: Axis::Values(vec![0.0]),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EvaluatorChoice {
    Numeric,
    ClosedForm,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CriticalConfig {
    pub n_values: Vec<usize>,
    pub evaluator: EvaluatorChoice,
    /// Bisection tolerance in units of π.
    pub tolerance: f64,
    pub prescan: usize,
    /// Search bracket in units of π.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bracket: Option<[f64; 2]>,
}

impl Default for CriticalConfig {
    fn default() -> Self {
        CriticalConfig {
            n_values: vec![100, 200, 500, 1000, 2000],
            evaluator: EvaluatorChoice::ClosedForm,
            tolerance: 1e-4,
            prescan: 64,
            bracket: None,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FitConfig {
    /// `[N, critical ξ₂/π]` pairs.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub points: Option<Vec<[f64; 2]>>,
    /// CSV with `N` and `critical_xi2_over_pi` columns, as written by `critical`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub input: Option<PathBuf>,
    pub exponent_gap: f64,
    pub residual_ceiling: f64,
}

impl Default for FitConfig {
    fn default() -> Self {
        let o = chiral_array_core::scan::FitOptions::default();
        FitConfig {
            points: None,
            input: None,
            exponent_gap: o.exponent_gap,
            residual_ceiling: o.residual_ceiling,
        }
    }
}

impl RunConfig {
    /// Reads `path` (if any) and applies overrides in order.
    pub fn load(path: Option<&Path>, overrides: &[String]) -> Result<Self, CliError> {
        let mut table = match path {
            Some(p) => {
                let text = fs::read_to_string(p).map_err(|e| CliError::io(p, e))?;
                text.parse::<toml::Table>()
                    .map_err(|e| CliError::validation("config", format!("{}: {e}", p.display())))?
            }
            None => toml::Table::new(),
        };
        for item in overrides {
            apply_override(&mut table, item)?;
        }
        RunConfig::deserialize(toml::Value::Table(table)).map_err(|e| CliError::validation("config", e.to_string()))
    }

    pub fn interface(&self, n: usize) -> usize {
        self.geometry.m.resolve(n)
    }

    pub fn geometry(&self) -> Result<ArrayGeometry, CliError> {
        let g = &self.geometry;
        ArrayGeometry::new(g.n, self.interface(g.n), g.xi1 * std::f64::consts::PI, g.xi2 * std::f64::consts::PI)
            .map_err(|e| CliError::from_core("geometry", e))
    }

    pub fn coupling(&self) -> Result<ChiralCoupling, CliError> {
        ChiralCoupling::new(self.coupling.d).map_err(|e| CliError::from_core("coupling", e))
    }

    pub fn detunings(&self, n: usize) -> Result<Vec<f64>, CliError> {
        let d = &self.drive;
        let values = if let Some(list) = &d.detunings {
            list.clone()
        } else if let Some(path) = &d.detunings_file {
            read_detunings(path)?
        } else {
            vec![d.detuning; n]
        };
        if values.len() != n {
            return Err(CliError::validation(
                "drive.detunings",
                format!("expected {n} values, got {}", values.len()),
            ));
        }
        Ok(values)
    }

    pub fn drive(&self, n: usize) -> Result<DriveField, CliError> {
        let d = &self.drive;
        DriveField::new(d.rabi, d.theta * std::f64::consts::PI, self.detunings(n)?)
            .map_err(|e| CliError::from_core("drive", e))
    }

    /// Copy with defaults filled in, `m` made explicit and file-backed
    /// detunings inlined.
    pub fn resolved(&self) -> Result<RunConfig, CliError> {
        let mut r = self.clone();
        r.geometry.m = InterfaceRule::Index(self.interface(self.geometry.n));
        if self.drive.detunings_file.is_some() {
            r.drive.detunings = Some(self.detunings(self.geometry.n)?);
            r.drive.detunings_file = None;
        }
        Ok(r)
    }

    pub fn to_toml(&self) -> Result<String, CliError> {
        toml::to_string_pretty(self).map_err(|e| CliError::validation("config", e.to_string()))
    }
}

fn read_detunings(path: &Path) -> Result<Vec<f64>, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    text.lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(|l| {
            l.parse::<f64>()
                .map_err(|_| CliError::validation("drive.detunings_file", format!("cannot parse `{l}` as a number")))
        })
        .collect()
}

/// Applies `section.key=value`, reading `value` as a TOML literal and
/// falling back to a bare string.
pub fn apply_override(table: &mut toml::Table, item: &str) -> Result<(), CliError> {
    let (key, raw) = item
        .split_once('=')
        .ok_or_else(|| CliError::validation("set", format!("expected key=value, got `{item}`")))?;
    let key = key.trim();
    let raw = raw.trim();
    let value = format!("v = {raw}")
        .parse::<toml::Table>()
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| toml::Value::String(raw.to_string()));

    let mut parts: Vec<&str> = key.split('.').collect();
    let last = parts
        .pop()
        .filter(|s| !s.is_empty())
        .ok_or_else(|| CliError::validation("set", format!("empty key in `{item}`")))?;
    let mut node = table;
    for part in parts {
        let entry = node
            .entry(part.to_string())
            .or_insert_with(|| toml::Value::Table(toml::Table::new()));
        node = entry
            .as_table_mut()
            .ok_or_else(|| CliError::validation("set", format!("`{part}` is not a section")))?;
    }
    node.insert(last.to_string(), value);
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_round_trip() {
        let c = RunConfig::default();
        let text = c.to_toml().unwrap();
        let table: toml::Table = text.parse().unwrap();
        let back = RunConfig::deserialize(toml::Value::Table(table)).unwrap();
        assert_eq!(back.to_toml().unwrap(), text);
    }

    #[test]
    fn ceil_half_interface() {
        let mut c = RunConfig::default();
        c.geometry.n = 101;
        assert_eq!(c.interface(101), 51);
        c.geometry.m = InterfaceRule::Index(30);
        assert_eq!(c.interface(101), 30);
    }

    #[test]
    fn overrides_parse_literals() {
        let mut t = toml::Table::new();
        apply_override(&mut t, "geometry.n=64").unwrap();
        apply_override(&mut t, "geometry.m=ceil-half").unwrap();
        apply_override(&mut t, "output.format = json").unwrap();
        apply_override(&mut t, "sweep.d=[0.0, 0.5]").unwrap();
        let c = RunConfig::deserialize(toml::Value::Table(t)).unwrap();
        assert_eq!(c.geometry.n, 64);
        assert_eq!(c.output.format, OutputFormat::Json);
        assert_eq!(c.sweep.d, Axis::Values(vec![0.0, 0.5]));
    }

    #[test]
    fn unknown_keys_rejected() {
        let mut t = toml::Table::new();
        apply_override(&mut t, "geometry.spacing=0.2").unwrap();
        assert!(RunConfig::deserialize(toml::Value::Table(t)).is_err());
    }

    #[test]
    fn axis_ranges() {
        let a = Axis::Range(AxisRange {
            start: 0.0,
            stop: 1.0,
            count: 5,
        });
        assert_eq!(a.values("x").unwrap(), vec![0.0, 0.25, 0.5, 0.75, 1.0]);
        assert!(Axis::Values(vec![]).values("x").is_err());
    }
}
