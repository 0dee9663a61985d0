//! Calibration record, stored in the same `key = value` format as the
//! configuration.

use std::fmt::Write as _;
use std::path::Path;
use std::time::{SystemTime, UNIX_EPOCH};

use eitsq_core::opo::OpoParams;

use crate::config::{parse_entries, quantity, Dim, Entry};
use crate::error::CliError;

/// Tolerances the fitted anchors must meet.
pub const SQZ_TOL_DB: f64 = 0.02;
pub const RESONANCE_TOL_DB: f64 = 0.09;
pub const DELAY_TOL: f64 = 0.15e-6;

#[derive(Clone, Debug, PartialEq)]
pub struct Residuals {
    pub sqz_db: f64,
    pub antisqz_db: f64,
    pub resonance_db: f64,
    pub delay: f64,
    /// Transparency window FWHM at the resonance power, Hz (a constraint,
    /// not a residual).
    pub window: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CalibrationRecord {
    pub opo: OpoParams,
    pub eta_path: f64,
    /// (rad/s)² per W.
    pub kappa: f64,
    /// Hz.
    pub gamma_0: f64,
    pub fitted_at: u64,
    pub residuals: Residuals,
}

pub(crate) fn now() -> u64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0)
}

impl CalibrationRecord {
    pub fn within_tolerance(&self) -> bool {
        let r = &self.residuals;
        r.sqz_db.abs() <= SQZ_TOL_DB
            && r.antisqz_db.abs() <= SQZ_TOL_DB
            && r.resonance_db.abs() <= RESONANCE_TOL_DB
            && r.delay.abs() <= DELAY_TOL
    }

    /// Fitted parameters and residuals without the timestamp.
    pub fn body_text(&self) -> String {
        let mut s = String::new();
        s.push_str("[calibration]\n");
        writeln!(s, "x = {}", self.opo.x).unwrap();
        writeln!(s, "gamma_hwhm = {} Hz", self.opo.gamma_hwhm).unwrap();
        writeln!(s, "eta_esc = {}", self.opo.eta_esc).unwrap();
        writeln!(s, "eta_path = {}", self.eta_path).unwrap();
        writeln!(s, "kappa = {} rad2/s2/W", self.kappa).unwrap();
        writeln!(s, "gamma_0 = {} Hz", self.gamma_0).unwrap();
        s.push_str("[residuals]\n");
        writeln!(s, "sqz = {} dB", self.residuals.sqz_db).unwrap();
        writeln!(s, "antisqz = {} dB", self.residuals.antisqz_db).unwrap();
        writeln!(s, "resonance = {} dB", self.residuals.resonance_db).unwrap();
        writeln!(s, "delay = {} s", self.residuals.delay).unwrap();
        writeln!(s, "window = {} Hz", self.residuals.window).unwrap();
        s
    }

    pub fn to_text(&self) -> String {
        format!("# eitsq calibration record\n[meta]\nfitted_at = {}\n{}", self.fitted_at, self.body_text())
    }

    pub fn parse(text: &str) -> Result<Self, CliError> {
        let entries = parse_entries(text)?;
        let get = |section: &str, key: &str| -> Result<&Entry, CliError> {
            entries
                .iter()
                .find(|e| e.section == section && e.key == key)
                .ok_or_else(|| CliError::config(0, key, format!("missing from [{section}]")))
        };
        let plain = |e: &Entry| -> Result<f64, CliError> {
            e.value.parse().map_err(|_| CliError::config(e.line, &e.key, "not a number"))
        };
        let kappa = {
            let e = get("calibration", "kappa")?;
            let v = e
                .value
                .strip_suffix("rad2/s2/W")
                .ok_or_else(|| CliError::config(e.line, "kappa", "expected unit rad2/s2/W"))?;
            v.trim().parse().map_err(|_| CliError::config(e.line, "kappa", "not a number"))?
        };
        let fitted = get("meta", "fitted_at")?;
        Ok(Self {
            opo: OpoParams {
                x: plain(get("calibration", "x")?)?,
                gamma_hwhm: quantity(get("calibration", "gamma_hwhm")?, Dim::Frequency)?,
                eta_esc: plain(get("calibration", "eta_esc")?)?,
            },
            eta_path: plain(get("calibration", "eta_path")?)?,
            kappa,
            gamma_0: quantity(get("calibration", "gamma_0")?, Dim::Frequency)?,
            fitted_at: fitted
                .value
                .parse()
                .map_err(|_| CliError::config(fitted.line, "fitted_at", "not a timestamp"))?,
            residuals: Residuals {
                sqz_db: quantity(get("residuals", "sqz")?, Dim::Decibel)?,
                antisqz_db: quantity(get("residuals", "antisqz")?, Dim::Decibel)?,
                resonance_db: quantity(get("residuals", "resonance")?, Dim::Decibel)?,
                delay: quantity(get("residuals", "delay")?, Dim::Time)?,
                window: quantity(get("residuals", "window")?, Dim::Frequency)?,
            },
        })
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let missing = |reason: String| CliError::MissingCalibration { path: path.to_path_buf(), reason };
        let text = std::fs::read_to_string(path).map_err(|e| missing(e.to_string()))?;
        let rec = Self::parse(&text).map_err(|e| missing(e.to_string()))?;
        rec.opo.validate().map_err(|e| missing(e.to_string()))?;
        Ok(rec)
    }
}
