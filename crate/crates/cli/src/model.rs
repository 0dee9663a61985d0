//! Builds core objects from a configuration and a calibration.

use std::f64::consts::{FRAC_PI_2, TAU};

use eitsq_core::eit::{ControlCalibration, EitParams, rabi_from_power};
use eitsq_core::measurement::{
    noise_scan_vs_control_detuning, AnalyzerConfig, ChannelSpec, LoConfig, LoKind, ScanPoint, TransferFunction,
};
use eitsq_core::opo::{opo_spectrum, OpoParams};
use eitsq_core::pulse::{mc_oracle, simulate_trace, GateFunction, NoiseTrace, PulseSetup, TimeGrid};
use eitsq_core::spectral::{FrequencyGrid, SqueezingSpectrum};

use crate::config::{Config, Method};
use crate::error::CliError;
use crate::record::CalibrationRecord;

/// Fitted quantities a scenario needs.
#[derive(Clone, Debug)]
pub struct Model {
    pub opo: OpoParams,
    pub eta_path: f64,
    pub kappa: f64,
    /// Hz.
    pub gamma_0: f64,
}

impl From<&CalibrationRecord> for Model {
    fn from(r: &CalibrationRecord) -> Self {
        Self { opo: r.opo, eta_path: r.eta_path, kappa: r.kappa, gamma_0: r.gamma_0 }
    }
}

pub struct Trace {
    pub trace: NoiseTrace,
    pub sigma: Option<(Vec<f64>, Vec<f64>)>,
}

impl Model {
    pub fn omega_c(&self, power: f64) -> Result<f64, CliError> {
        Ok(rabi_from_power(power, &ControlCalibration::new(self.kappa)?)?)
    }

    pub fn eit(&self, cfg: &Config, omega_c: f64) -> EitParams {
        EitParams {
            d: cfg.medium.optical_depth,
            gamma_e: TAU * cfg.medium.gamma_e,
            gamma_0: TAU * self.gamma_0,
            omega_c,
            delta_c: 0.0,
        }
    }

    pub fn eit_at_power(&self, cfg: &Config, power: f64) -> Result<EitParams, CliError> {
        Ok(self.eit(cfg, self.omega_c(power)?))
    }

    pub fn cw_source(&self, cfg: &Config) -> Result<SqueezingSpectrum, CliError> {
        let grid = FrequencyGrid::new(cfg.scan.grid_points, cfg.scan.grid_spacing)?;
        Ok(opo_spectrum(&self.opo, grid)?)
    }

    /// RBW-averaged `θ = 0` and `π/2` noise behind the medium at each
    /// control offset.
    pub fn control_scan(
        &self,
        cfg: &Config,
        eit: &EitParams,
        eta_path: f64,
        offsets: &[f64],
    ) -> Result<Vec<ScanPoint>, CliError> {
        let source = self.cw_source(cfg)?;
        Ok(noise_scan_vs_control_detuning(&source, eit, eta_path, &lo(cfg, 0.0)?, &analyzer(cfg)?, offsets)?)
    }

    pub fn pulse_setup(&self, cfg: &Config, channel: ChannelSpec) -> Result<PulseSetup, CliError> {
        let grid = time_grid(cfg)?;
        let source = opo_spectrum(&self.opo, grid.frequency_grid())?;
        let gate = GateFunction::new(cfg.pulse.shape, cfg.pulse.fwhm, cfg.pulse.center, cfg.pulse.floor)?;
        let an = AnalyzerConfig::new(cfg.measurement.rbw, cfg.pulse.vbw)?;
        Ok(PulseSetup::new(&source, gate, channel, lo(cfg, 0.0)?, an, grid)?)
    }

    /// No atoms, path loss only.
    pub fn reference_channel(&self) -> Result<ChannelSpec, CliError> {
        Ok(ChannelSpec::new(TransferFunction::Unity, self.eta_path)?)
    }

    pub fn medium_channel(&self, eit: EitParams) -> Result<ChannelSpec, CliError> {
        Ok(ChannelSpec::new(TransferFunction::Eit(eit), self.eta_path)?)
    }

    pub fn run_trace(&self, cfg: &Config, channel: ChannelSpec, method: Method, seed: u64) -> Result<Trace, CliError> {
        let setup = self.pulse_setup(cfg, channel)?;
        Ok(match method {
            Method::Deterministic => Trace { trace: simulate_trace(&setup)?, sigma: None },
            Method::MonteCarlo => {
                let mc = mc_oracle(&setup, seed, cfg.pulse.mc_samples)?;
                Trace { trace: mc.trace, sigma: Some((mc.sigma0, mc.sigma90)) }
            }
        })
    }
}

pub fn lo(cfg: &Config, theta: f64) -> Result<LoConfig, CliError> {
    Ok(LoConfig::new(cfg.measurement.lo, cfg.measurement.epsilon, theta)?)
}

pub fn lo_kind(cfg: &Config, kind: LoKind, theta: f64) -> Result<LoConfig, CliError> {
    Ok(LoConfig::new(kind, cfg.measurement.epsilon, theta)?)
}

pub fn analyzer(cfg: &Config) -> Result<AnalyzerConfig, CliError> {
    Ok(AnalyzerConfig::new(cfg.measurement.rbw, cfg.measurement.vbw)?)
}

pub fn time_grid(cfg: &Config) -> Result<TimeGrid, CliError> {
    Ok(TimeGrid::new(cfg.pulse.n_samples, cfg.pulse.span / cfg.pulse.n_samples as f64)?)
}

/// `k·step` for `k = −K ..= K`, `K = round(max/step)`.
pub fn symmetric_axis(max: f64, step: f64) -> Vec<f64> {
    let k = (max / step).round() as i64;
    (-k..=k).map(|i| i as f64 * step).collect()
}

pub fn theta_axis(points: usize) -> Vec<f64> {
    (0..points).map(|i| 2.0 * FRAC_PI_2 * i as f64 / (points - 1) as f64).collect()
}
