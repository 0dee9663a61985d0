//! Line-oriented scenario configuration.
//!
//! ```text
//! # comment
//! [measurement]
//! epsilon = 1 MHz
//! lo = bichromatic
//! [pulse]
//! powers = 200, 100, 50 uW
//! ```
//!
//! Every dimensioned value carries its unit. Rates of the atomic medium
//! (`gamma_e`, `gamma_0`) are written as ordinary frequencies and converted
//! to rad/s by the caller. Keys not given keep their defaults, which follow
//! the experiment (ε = 1 MHz, RBW = 100 kHz, d = 4, 200/100/50 µW, 10 µs
//! pulses). Unknown sections or keys are errors.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use eitsq_core::measurement::LoKind;
use eitsq_core::pulse::GateShape;

use crate::error::CliError;

#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub(crate) enum Dim {
    Frequency,
    Time,
    Power,
    Decibel,
    Scalar,
}

impl Dim {
    fn canonical(self) -> &'static str {
        match self {
            Dim::Frequency => "Hz",
            Dim::Time => "s",
            Dim::Power => "W",
            Dim::Decibel => "dB",
            Dim::Scalar => "",
        }
    }

    /// Decimal exponent of `unit` relative to the canonical unit.
    fn exponent(self, unit: &str) -> Option<i32> {
        let k = match (self, unit) {
            (Dim::Frequency, "Hz") => 0,
            (Dim::Frequency, "kHz") => 3,
            (Dim::Frequency, "MHz") => 6,
            (Dim::Frequency, "GHz") => 9,
            (Dim::Time, "s") => 0,
            (Dim::Time, "ms") => -3,
            (Dim::Time, "us" | "µs") => -6,
            (Dim::Time, "ns") => -9,
            (Dim::Power, "W") => 0,
            (Dim::Power, "mW") => -3,
            (Dim::Power, "uW" | "µW") => -6,
            (Dim::Power, "nW") => -9,
            (Dim::Decibel, "dB") => 0,
            (Dim::Scalar, "") => 0,
            _ => return None,
        };
        Some(k)
    }
}

/// `v·10^k`, dividing for negative `k` so that `200 uW` is exactly `2e-4`.
fn rescale(v: f64, k: i32) -> f64 {
    if k >= 0 {
        v * 10f64.powi(k)
    } else {
        v / 10f64.powi(-k)
    }
}

#[derive(Copy, Clone, Debug, PartialEq)]
pub enum Method {
    Deterministic,
    MonteCarlo,
}

impl Method {
    fn name(self) -> &'static str {
        match self {
            Method::Deterministic => "deterministic",
            Method::MonteCarlo => "monte-carlo",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SourceConfig {
    pub sqz_target_db: f64,
    pub antisqz_target_db: f64,
    pub target_detuning: f64,
    pub gamma_hwhm: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct MediumConfig {
    pub optical_depth: f64,
    /// Hz; the medium uses `2π·gamma_e`.
    pub gamma_e: f64,
    /// Hz; the medium uses `2π·gamma_0`.
    pub gamma_0: f64,
    /// Control power for the CW scans, W.
    pub control_power: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct MeasurementConfig {
    pub lo: LoKind,
    pub epsilon: f64,
    pub rbw: f64,
    pub vbw: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ScanConfig {
    pub transmission_max: f64,
    pub transmission_step: f64,
    pub control_max: f64,
    pub control_step: f64,
    pub theta_points: usize,
    pub grid_points: usize,
    pub grid_spacing: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PulseConfig {
    pub shape: GateShape,
    pub fwhm: f64,
    pub center: f64,
    pub floor: f64,
    pub n_samples: usize,
    pub span: f64,
    pub vbw: f64,
    pub powers: Vec<f64>,
    pub method: Method,
    pub mc_samples: usize,
    pub seed: u64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CalibrationConfig {
    pub record: PathBuf,
    pub resonance_target_db: f64,
    pub resonance_power: f64,
    pub delay_target: f64,
    pub delay_power: f64,
    pub max_window: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct OutputConfig {
    pub dir: PathBuf,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Config {
    pub source: SourceConfig,
    pub medium: MediumConfig,
    pub measurement: MeasurementConfig,
    pub scan: ScanConfig,
    pub pulse: PulseConfig,
    pub calibration: CalibrationConfig,
    pub output: OutputConfig,
}

impl Default for Config {
    fn default() -> Self {
        Self {
            source: SourceConfig {
                sqz_target_db: -1.60,
                antisqz_target_db: 3.71,
                target_detuning: 1e6,
                gamma_hwhm: 5e6,
            },
            medium: MediumConfig { optical_depth: 4.0, gamma_e: 2.9e6, gamma_0: 1e3, control_power: 100e-6 },
            measurement: MeasurementConfig { lo: LoKind::Bichromatic, epsilon: 1e6, rbw: 100e3, vbw: 100e3 },
            scan: ScanConfig {
                transmission_max: 1e6,
                transmission_step: 5e3,
                control_max: 2.5e6,
                control_step: 25e3,
                theta_points: 181,
                grid_points: 1024,
                grid_spacing: 5e3,
            },
            pulse: PulseConfig {
                shape: GateShape::RaisedCosine,
                fwhm: 10e-6,
                center: 60e-6,
                floor: 0.0,
                n_samples: 4096,
                span: 200e-6,
                vbw: 1e6,
                powers: vec![200e-6, 100e-6, 50e-6],
                method: Method::Deterministic,
                mc_samples: 10_000,
                seed: 1,
            },
            calibration: CalibrationConfig {
                record: PathBuf::from("calibration.rec"),
                resonance_target_db: -0.44,
                resonance_power: 100e-6,
                delay_target: 3.1e-6,
                delay_power: 50e-6,
                max_window: 1e6,
            },
            output: OutputConfig { dir: PathBuf::from("out") },
        }
    }
}

/// One `key = value` line of a parsed document.
#[derive(Clone, Debug)]
pub(crate) struct Entry {
    pub line: usize,
    pub section: String,
    pub key: String,
    pub value: String,
}

/// Split a document into entries. Sections and keys are not checked here.
pub(crate) fn parse_entries(text: &str) -> Result<Vec<Entry>, CliError> {
    let mut section = String::new();
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let body = raw.split('#').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        if let Some(name) = body.strip_prefix('[') {
            let name = name
                .strip_suffix(']')
                .ok_or_else(|| CliError::config(line, body, "unterminated section header"))?;
            section = name.trim().to_string();
            continue;
        }
        let (key, value) =
            body.split_once('=').ok_or_else(|| CliError::config(line, body, "expected `key = value`"))?;
        let key = key.trim();
        if section.is_empty() {
            return Err(CliError::config(line, key, "key outside of any [section]"));
        }
        if key.is_empty() {
            return Err(CliError::config(line, body, "empty key"));
        }
        out.push(Entry { line, section: section.clone(), key: key.to_string(), value: value.trim().to_string() });
    }
    Ok(out)
}

fn split_unit(value: &str) -> (&str, &str) {
    match value.rsplit_once(char::is_whitespace) {
        Some((num, unit)) if unit.parse::<f64>().is_err() => (num.trim(), unit.trim()),
        _ => (value.trim(), ""),
    }
}

fn number(e: &Entry, text: &str) -> Result<f64, CliError> {
    let v: f64 = text.trim().parse().map_err(|_| CliError::config(e.line, &e.key, format!("`{text}` is not a number")))?;
    if !v.is_finite() {
        return Err(CliError::config(e.line, &e.key, "value must be finite"));
    }
    Ok(v)
}

pub(crate) fn quantity(e: &Entry, dim: Dim) -> Result<f64, CliError> {
    let (num, unit) = split_unit(&e.value);
    let scale = dim.exponent(unit).ok_or_else(|| {
        if unit.is_empty() {
            CliError::config(e.line, &e.key, format!("missing unit, expected {}", dim.canonical()))
        } else {
            CliError::config(e.line, &e.key, format!("unit `{unit}` does not fit, expected {}", dim.canonical()))
        }
    })?;
    Ok(rescale(number(e, num)?, scale))
}

fn quantity_list(e: &Entry, dim: Dim) -> Result<Vec<f64>, CliError> {
    let (nums, unit) = split_unit(&e.value);
    let scale = dim
        .exponent(unit)
        .ok_or_else(|| CliError::config(e.line, &e.key, format!("unit `{unit}` does not fit, expected {}", dim.canonical())))?;
    let list = nums
        .split(',')
        .map(|s| number(e, s).map(|v| rescale(v, scale)))
        .collect::<Result<Vec<_>, _>>()?;
    if list.is_empty() {
        return Err(CliError::config(e.line, &e.key, "empty list"));
    }
    Ok(list)
}

fn count(e: &Entry) -> Result<usize, CliError> {
    e.value.parse().map_err(|_| CliError::config(e.line, &e.key, format!("`{}` is not a non-negative integer", e.value)))
}

fn resolve(base: &Path, p: &str) -> PathBuf {
    let p = PathBuf::from(p);
    if p.is_absolute() {
        p
    } else {
        base.join(p)
    }
}

impl Config {
    /// Parse `text`; relative paths are taken relative to `base`.
    pub fn parse(text: &str, base: &Path) -> Result<Self, CliError> {
        let mut c = Config::default();
        c.calibration.record = resolve(base, "calibration.rec");
        c.output.dir = resolve(base, "out");
        let mut seen: Vec<(String, String)> = Vec::new();
        for e in parse_entries(text)? {
            let id = (e.section.clone(), e.key.clone());
            if seen.contains(&id) {
                return Err(CliError::config(e.line, &e.key, format!("duplicate key in [{}]", e.section)));
            }
            seen.push(id);
            c.apply(&e, base)?;
        }
        c.validate()?;
        Ok(c)
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|err| CliError::config(0, &path.display().to_string(), format!("cannot read: {err}")))?;
        let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
        let base = if base.as_os_str().is_empty() { PathBuf::from(".") } else { base };
        let base = base.canonicalize().unwrap_or(base);
        Self::parse(&text, &base)
    }

    fn apply(&mut self, e: &Entry, base: &Path) -> Result<(), CliError> {
        use Dim::*;
        match (e.section.as_str(), e.key.as_str()) {
            ("source", "sqz_target") => self.source.sqz_target_db = quantity(e, Decibel)?,
            ("source", "antisqz_target") => self.source.antisqz_target_db = quantity(e, Decibel)?,
            ("source", "target_detuning") => self.source.target_detuning = quantity(e, Frequency)?,
            ("source", "gamma_hwhm") => self.source.gamma_hwhm = quantity(e, Frequency)?,

            ("medium", "optical_depth") => self.medium.optical_depth = quantity(e, Scalar)?,
            ("medium", "gamma_e") => self.medium.gamma_e = quantity(e, Frequency)?,
            ("medium", "gamma_0") => self.medium.gamma_0 = quantity(e, Frequency)?,
            ("medium", "control_power") => self.medium.control_power = quantity(e, Power)?,

            ("measurement", "lo") => {
                self.measurement.lo = match e.value.as_str() {
                    "monochromatic" => LoKind::Monochromatic,
                    "bichromatic" => LoKind::Bichromatic,
                    v => return Err(CliError::config(e.line, &e.key, format!("unknown LO `{v}`"))),
                }
            }
            ("measurement", "epsilon") => self.measurement.epsilon = quantity(e, Frequency)?,
            ("measurement", "rbw") => self.measurement.rbw = quantity(e, Frequency)?,
            ("measurement", "vbw") => self.measurement.vbw = quantity(e, Frequency)?,

            ("scan", "transmission_max") => self.scan.transmission_max = quantity(e, Frequency)?,
            ("scan", "transmission_step") => self.scan.transmission_step = quantity(e, Frequency)?,
            ("scan", "control_max") => self.scan.control_max = quantity(e, Frequency)?,
            ("scan", "control_step") => self.scan.control_step = quantity(e, Frequency)?,
            ("scan", "theta_points") => self.scan.theta_points = count(e)?,
            ("scan", "grid_points") => self.scan.grid_points = count(e)?,
            ("scan", "grid_spacing") => self.scan.grid_spacing = quantity(e, Frequency)?,

            ("pulse", "shape") => {
                self.pulse.shape = GateShape::parse(&e.value)
                    .ok_or_else(|| CliError::config(e.line, &e.key, format!("unknown gate shape `{}`", e.value)))?
            }
            ("pulse", "fwhm") => self.pulse.fwhm = quantity(e, Time)?,
            ("pulse", "center") => self.pulse.center = quantity(e, Time)?,
            ("pulse", "floor") => self.pulse.floor = quantity(e, Scalar)?,
            ("pulse", "n_samples") => self.pulse.n_samples = count(e)?,
            ("pulse", "span") => self.pulse.span = quantity(e, Time)?,
            ("pulse", "vbw") => self.pulse.vbw = quantity(e, Frequency)?,
            ("pulse", "powers") => self.pulse.powers = quantity_list(e, Power)?,
            ("pulse", "method") => {
                self.pulse.method = match e.value.as_str() {
                    "deterministic" => Method::Deterministic,
                    "monte-carlo" => Method::MonteCarlo,
                    v => return Err(CliError::config(e.line, &e.key, format!("unknown method `{v}`"))),
                }
            }
            ("pulse", "mc_samples") => self.pulse.mc_samples = count(e)?,
            ("pulse", "seed") => {
                self.pulse.seed =
                    e.value.parse().map_err(|_| CliError::config(e.line, &e.key, "seed must be a u64"))?
            }

            ("calibration", "record") => self.calibration.record = resolve(base, &e.value),
            ("calibration", "resonance_target") => self.calibration.resonance_target_db = quantity(e, Decibel)?,
            ("calibration", "resonance_power") => self.calibration.resonance_power = quantity(e, Power)?,
            ("calibration", "delay_target") => self.calibration.delay_target = quantity(e, Time)?,
            ("calibration", "delay_power") => self.calibration.delay_power = quantity(e, Power)?,
            ("calibration", "max_window") => self.calibration.max_window = quantity(e, Frequency)?,

            ("output", "dir") => self.output.dir = resolve(base, &e.value),

            (s, _) if !SECTIONS.contains(&s) => {
                return Err(CliError::config(e.line, &e.key, format!("unknown section [{s}]")))
            }
            (s, k) => return Err(CliError::config(e.line, k, format!("unknown key in [{s}]"))),
        }
        Ok(())
    }

    fn validate(&self) -> Result<(), CliError> {
        let positive = [
            ("gamma_hwhm", self.source.gamma_hwhm),
            ("gamma_e", self.medium.gamma_e),
            ("epsilon", self.measurement.epsilon),
            ("rbw", self.measurement.rbw),
            ("vbw", self.measurement.vbw),
            ("transmission_max", self.scan.transmission_max),
            ("transmission_step", self.scan.transmission_step),
            ("control_step", self.scan.control_step),
            ("grid_spacing", self.scan.grid_spacing),
            ("fwhm", self.pulse.fwhm),
            ("span", self.pulse.span),
            ("pulse.vbw", self.pulse.vbw),
            ("delay_target", self.calibration.delay_target),
            ("delay_power", self.calibration.delay_power),
            ("resonance_power", self.calibration.resonance_power),
            ("max_window", self.calibration.max_window),
        ];
        for (k, v) in positive {
            if v <= 0.0 {
                return Err(CliError::config(0, k, "must be > 0"));
            }
        }
        let nonneg = [
            ("optical_depth", self.medium.optical_depth),
            ("gamma_0", self.medium.gamma_0),
            ("control_power", self.medium.control_power),
            ("control_max", self.scan.control_max),
        ];
        for (k, v) in nonneg {
            if v < 0.0 {
                return Err(CliError::config(0, k, "must be >= 0"));
            }
        }
        if self.pulse.powers.iter().any(|&p| p <= 0.0) {
            return Err(CliError::config(0, "powers", "control powers must be > 0"));
        }
        if self.scan.theta_points < 2 {
            return Err(CliError::config(0, "theta_points", "need at least 2"));
        }
        if self.scan.grid_points < 2 || self.scan.grid_points % 2 != 0 {
            return Err(CliError::config(0, "grid_points", "must be even and >= 2"));
        }
        Ok(())
    }

    /// Canonical text form: every key, SI units, absolute paths.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let q = |s: &mut String, k: &str, v: f64, d: Dim| {
            let u = d.canonical();
            if u.is_empty() {
                writeln!(s, "{k} = {v}").unwrap();
            } else {
                writeln!(s, "{k} = {v} {u}").unwrap();
            }
        };
        s.push_str("[source]\n");
        q(&mut s, "sqz_target", self.source.sqz_target_db, Dim::Decibel);
        q(&mut s, "antisqz_target", self.source.antisqz_target_db, Dim::Decibel);
        q(&mut s, "target_detuning", self.source.target_detuning, Dim::Frequency);
        q(&mut s, "gamma_hwhm", self.source.gamma_hwhm, Dim::Frequency);
        s.push_str("[medium]\n");
        q(&mut s, "optical_depth", self.medium.optical_depth, Dim::Scalar);
        q(&mut s, "gamma_e", self.medium.gamma_e, Dim::Frequency);
        q(&mut s, "gamma_0", self.medium.gamma_0, Dim::Frequency);
        q(&mut s, "control_power", self.medium.control_power, Dim::Power);
        s.push_str("[measurement]\n");
        let lo = match self.measurement.lo {
            LoKind::Monochromatic => "monochromatic",
            LoKind::Bichromatic => "bichromatic",
        };
        writeln!(s, "lo = {lo}").unwrap();
        q(&mut s, "epsilon", self.measurement.epsilon, Dim::Frequency);
        q(&mut s, "rbw", self.measurement.rbw, Dim::Frequency);
        q(&mut s, "vbw", self.measurement.vbw, Dim::Frequency);
        s.push_str("[scan]\n");
        q(&mut s, "transmission_max", self.scan.transmission_max, Dim::Frequency);
        q(&mut s, "transmission_step", self.scan.transmission_step, Dim::Frequency);
        q(&mut s, "control_max", self.scan.control_max, Dim::Frequency);
        q(&mut s, "control_step", self.scan.control_step, Dim::Frequency);
        writeln!(s, "theta_points = {}", self.scan.theta_points).unwrap();
        writeln!(s, "grid_points = {}", self.scan.grid_points).unwrap();
        q(&mut s, "grid_spacing", self.scan.grid_spacing, Dim::Frequency);
        s.push_str("[pulse]\n");
        writeln!(s, "shape = {}", self.pulse.shape.name()).unwrap();
        q(&mut s, "fwhm", self.pulse.fwhm, Dim::Time);
        q(&mut s, "center", self.pulse.center, Dim::Time);
        q(&mut s, "floor", self.pulse.floor, Dim::Scalar);
        writeln!(s, "n_samples = {}", self.pulse.n_samples).unwrap();
        q(&mut s, "span", self.pulse.span, Dim::Time);
        q(&mut s, "vbw", self.pulse.vbw, Dim::Frequency);
        let powers: Vec<String> = self.pulse.powers.iter().map(|p| p.to_string()).collect();
        writeln!(s, "powers = {} W", powers.join(", ")).unwrap();
        writeln!(s, "method = {}", self.pulse.method.name()).unwrap();
        writeln!(s, "mc_samples = {}", self.pulse.mc_samples).unwrap();
        writeln!(s, "seed = {}", self.pulse.seed).unwrap();
        s.push_str("[calibration]\n");
        writeln!(s, "record = {}", self.calibration.record.display()).unwrap();
        q(&mut s, "resonance_target", self.calibration.resonance_target_db, Dim::Decibel);
        q(&mut s, "resonance_power", self.calibration.resonance_power, Dim::Power);
        q(&mut s, "delay_target", self.calibration.delay_target, Dim::Time);
        q(&mut s, "delay_power", self.calibration.delay_power, Dim::Power);
        q(&mut s, "max_window", self.calibration.max_window, Dim::Frequency);
        s.push_str("[output]\n");
        writeln!(s, "dir = {}", self.output.dir.display()).unwrap();
        s
    }
}

const SECTIONS: [&str; 7] = ["source", "medium", "measurement", "scan", "pulse", "calibration", "output"];
