//! Sequential fit of the free parameters to the three anchors.
//!
//! 1. OPO `(x, η_esc)` from the squeezed / anti-squeezed levels.
//! 2. `κ` so the pulse at the delay power is delayed by the target. The
//!    excess-flux centroid is independent of `η_path`, so this stage does
//!    not need it.
//! 3. `η_path` so the bichromatic `θ = 0` noise at the two-photon resonance
//!    equals the target. Excess noise is linear in `η_path`, so this is a
//!    single division.
//!
//! `γ₀` is taken from the configuration and checked against the window
//! limit.

use eitsq_core::eit::window_fwhm;
use eitsq_core::opo::calibrate_opo;
use eitsq_core::pulse::{extract_delay, NoiseTrace};
use eitsq_core::spectral::{from_db, to_db};

use crate::config::{Config, Method};
use crate::error::CliError;
use crate::model::Model;
use crate::record::{now, CalibrationRecord, Residuals, DELAY_TOL, RESONANCE_TOL_DB};

fn stage(stage: &'static str) -> impl Fn(CliError) -> CliError {
    move |e| match e {
        CliError::Infeasible { .. } => e,
        other => CliError::Infeasible { stage, msg: other.to_string() },
    }
}

/// Centroid delay of the pulse at `power` relative to the no-atom pulse.
pub fn pulse_delay(cfg: &Config, model: &Model, power: f64) -> Result<f64, CliError> {
    delay_against(cfg, model, &reference_trace(cfg, model)?, power)
}

fn reference_trace(cfg: &Config, model: &Model) -> Result<NoiseTrace, CliError> {
    let unit = Model { eta_path: 1.0, ..model.clone() };
    Ok(unit.run_trace(cfg, unit.reference_channel()?, Method::Deterministic, 0)?.trace)
}

fn delay_against(cfg: &Config, model: &Model, reference: &NoiseTrace, power: f64) -> Result<f64, CliError> {
    let unit = Model { eta_path: 1.0, ..model.clone() };
    let eit = unit.eit_at_power(cfg, power)?;
    let delayed = unit.run_trace(cfg, unit.medium_channel(eit)?, Method::Deterministic, 0)?;
    Ok(extract_delay(&delayed.trace, reference)?)
}

fn fit_kappa(cfg: &Config, base: &Model) -> Result<(f64, f64), CliError> {
    let target = cfg.calibration.delay_target;
    let power = cfg.calibration.delay_power;
    let eit = base.eit(cfg, 0.0);
    // Ideal-window estimate τ = 2dΓ/Ω² as the starting point.
    let mut kappa = 2.0 * eit.d * eit.gamma_e / target / power;
    let reference = reference_trace(cfg, base)?;
    let delay = |k: f64| delay_against(cfg, &Model { kappa: k, ..base.clone() }, &reference, power);
    let mut tau = delay(kappa)?;
    let mut prev: Option<(f64, f64)> = None;
    let mut best = (f64::INFINITY, kappa, tau);
    for _ in 0..40 {
        let r = tau - target;
        if r.abs() < best.0 {
            best = (r.abs(), kappa, tau);
        }
        if r.abs() < 1e-4 * target {
            return Ok((kappa, tau));
        }
        // Secant step in (ln κ, ln τ); slope −1 until two points exist.
        let slope = match prev {
            Some((k0, t0)) if (k0 - kappa).abs() > 0.0 && t0 > 0.0 => {
                let s = (tau.ln() - t0.ln()) / (kappa.ln() - k0.ln());
                if s < -0.05 { s } else { -1.0 }
            }
            _ => -1.0,
        };
        if !(tau > 0.0) {
            return Err(CliError::Infeasible { stage: "kappa", msg: format!("non-positive delay {tau} s") });
        }
        prev = Some((kappa, tau));
        let step = ((target.ln() - tau.ln()) / slope).clamp(-2.0, 2.0);
        kappa *= step.exp();
        tau = delay(kappa)?;
    }
    if best.0 <= DELAY_TOL {
        return Ok((best.1, best.2));
    }
    Err(CliError::Infeasible {
        stage: "kappa",
        msg: format!("best delay {:.4} us against {:.4} us", best.2 * 1e6, target * 1e6),
    })
}

pub fn calibrate(cfg: &Config) -> Result<CalibrationRecord, CliError> {
    let s = &cfg.source;
    let opo = calibrate_opo(s.sqz_target_db, s.antisqz_target_db, s.target_detuning, s.gamma_hwhm)
        .map_err(|e| CliError::Infeasible { stage: "opo", msg: e.to_string() })?;
    let (sq, anti) = opo.quadratures(s.target_detuning);
    let sqz_res = to_db(sq)? - s.sqz_target_db;
    let anti_res = to_db(anti)? - s.antisqz_target_db;

    let base = Model { opo, eta_path: 1.0, kappa: 1.0, gamma_0: cfg.medium.gamma_0 };
    let (kappa, tau) = fit_kappa(cfg, &base).map_err(stage("kappa"))?;
    let model = Model { kappa, ..base };

    let c = &cfg.calibration;
    let eit = model.eit_at_power(cfg, c.resonance_power).map_err(stage("gamma_0"))?;
    let window = window_fwhm(&eit).map_err(|e| stage("gamma_0")(e.into()))?;
    if window >= c.max_window {
        return Err(CliError::Infeasible {
            stage: "gamma_0",
            msg: format!("window FWHM {window:.0} Hz at {} W exceeds {} Hz", c.resonance_power, c.max_window),
        });
    }

    let unit = model.control_scan(cfg, &eit, 1.0, &[0.0]).map_err(stage("eta_path"))?[0].s0.s;
    let target = from_db(c.resonance_target_db);
    let eta_path = (target - 1.0) / (unit - 1.0);
    if !(eta_path > 0.0 && eta_path <= 1.0) {
        let best = to_db(unit)? - c.resonance_target_db;
        return Err(CliError::Infeasible {
            stage: "eta_path",
            msg: format!("needs eta_path = {eta_path:.4}; best residual with eta_path = 1 is {best:.4} dB"),
        });
    }
    let model = Model { eta_path, ..model };
    let reached = model.control_scan(cfg, &eit, eta_path, &[0.0]).map_err(stage("eta_path"))?[0].s0.s;
    let res_db = to_db(reached)? - c.resonance_target_db;
    if res_db.abs() > RESONANCE_TOL_DB {
        return Err(CliError::Infeasible { stage: "eta_path", msg: format!("residual {res_db} dB") });
    }

    Ok(CalibrationRecord {
        opo,
        eta_path,
        kappa,
        gamma_0: cfg.medium.gamma_0,
        fitted_at: now(),
        residuals: Residuals {
            sqz_db: sqz_res,
            antisqz_db: anti_res,
            resonance_db: res_db,
            delay: tau - c.delay_target,
            window,
        },
    })
}
