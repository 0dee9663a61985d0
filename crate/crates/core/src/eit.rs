//! Λ-system EIT medium as a complex amplitude transfer function.
//!
//! The probe is one-photon resonant; only the two-photon detuning
//! `δ̃ = 2π·δ − δ_c` matters. With `z = Γ(γ₀ + iδ̃)` and `c = Ω²/4`,
//!
//! ```text
//! t(δ) = exp[ −(d/2) · z / (z + c) ]
//! ```
//!
//! so the control-off medium transmits `e^{−d}` in intensity and the
//! phase slope at the window center is `−2dΓ/Ω²` (for `γ₀ = 0`). A negative
//! phase slope is a positive delay in the `e^{+iωt}` convention used by the
//! pulse simulation.

use std::f64::consts::TAU;

use num_complex::Complex64 as C64;

use crate::error::{invalid, Error, Result};
use crate::spectral::{Detuning, FrequencyGrid};

/// Half of the Rb D1 natural linewidth, rad/s.
pub const RB87_D1_GAMMA: f64 = TAU * 2.9e6;

#[derive(Copy, Clone, Debug, PartialEq)]
pub struct EitParams {
    /// Resonant optical depth, intensity convention.
    pub d: f64,
    /// Excited-state decay half-width, rad/s.
    pub gamma_e: f64,
    /// Ground-state decoherence rate, rad/s.
    pub gamma_0: f64,
    /// Control Rabi frequency, rad/s.
    pub omega_c: f64,
    /// Control-induced offset of the two-photon resonance, rad/s.
    pub delta_c: f64,
}

impl EitParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.d >= 0.0 && self.d.is_finite()) {
            return Err(invalid("d", format!("must be >= 0, got {}", self.d)));
        }
        if !(self.gamma_e > 0.0 && self.gamma_e.is_finite()) {
            return Err(invalid("gamma_e", format!("must be > 0, got {}", self.gamma_e)));
        }
        if !(self.gamma_0 >= 0.0 && self.gamma_0.is_finite()) {
            return Err(invalid("gamma_0", format!("must be >= 0, got {}", self.gamma_0)));
        }
        if !(self.omega_c >= 0.0 && self.omega_c.is_finite()) {
            return Err(invalid("omega_c", format!("must be >= 0, got {}", self.omega_c)));
        }
        if !self.delta_c.is_finite() {
            return Err(invalid("delta_c", "must be finite"));
        }
        Ok(())
    }

    pub fn with_omega_c(self, omega_c: f64) -> Self {
        Self { omega_c, ..self }
    }

    pub fn with_delta_c(self, delta_c: f64) -> Self {
        Self { delta_c, ..self }
    }

    /// `−(d/2)·z/(z + c)` at two-photon detuning `two_photon` (rad/s).
    pub(crate) fn exponent(&self, two_photon: f64) -> C64 {
        let z = C64::new(self.gamma_e * self.gamma_0, self.gamma_e * two_photon);
        let c = 0.25 * self.omega_c * self.omega_c;
        let w = if c == 0.0 { C64::new(1.0, 0.0) } else { z / (z + c) };
        w * (-0.5 * self.d)
    }

    /// Intensity transmission at two-photon detuning `two_photon` (rad/s).
    pub fn intensity_at(&self, two_photon: f64) -> f64 {
        (2.0 * self.exponent(two_photon).re).exp()
    }

    /// Rate scale of the transparency window, `γ₀ + Ω²/(4Γ)`, rad/s.
    pub fn window_rate(&self) -> f64 {
        self.gamma_0 + 0.25 * self.omega_c * self.omega_c / self.gamma_e
    }
}

/// Complex amplitude transmission for a probe component at `delta`.
pub fn eit_transfer(params: &EitParams, delta: Detuning) -> C64 {
    params.exponent(delta.angular() - params.delta_c).exp()
}

/// `(δ, |t(δ)|²)` over the grid, from `-max` to `+max` inclusive.
pub fn transmission_scan(params: &EitParams, grid: &FrequencyGrid) -> Result<Vec<(f64, f64)>> {
    params.validate()?;
    let half = (grid.n_points() / 2) as i64;
    Ok((-half..=half)
        .map(|k| {
            let delta = k as f64 * grid.spacing();
            (delta, params.intensity_at(TAU * delta - params.delta_c))
        })
        .collect())
}

/// Group delay at the center of the transparency window, seconds.
///
/// Central finite difference of the transmitted phase, step `10⁻⁴` of the
/// window rate.
pub fn group_delay(params: &EitParams) -> Result<f64> {
    params.validate()?;
    if params.omega_c <= 0.0 {
        return Err(Error::UndefinedDelay("control Rabi frequency is zero".into()));
    }
    let h = 1e-4 * params.window_rate();
    let phase = |x: f64| params.exponent(x).im;
    Ok(-(phase(h) - phase(-h)) / (2.0 * h))
}

/// Full width (Hz) of the transparency window, measured where `|t|²` sits
/// halfway between its peak and the far-detuned background `e^{−d}`.
pub fn window_fwhm(params: &EitParams) -> Result<f64> {
    params.validate()?;
    if params.omega_c <= 0.0 || params.d == 0.0 {
        return Err(invalid("omega_c", "no transparency window without control and atoms"));
    }
    let peak = params.intensity_at(0.0);
    let floor = (-params.d).exp();
    let level = 0.5 * (peak + floor);
    let mut hi = params.window_rate();
    while params.intensity_at(hi) > level {
        hi *= 2.0;
    }
    let mut lo = 0.0;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if params.intensity_at(mid) > level {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(2.0 * 0.5 * (lo + hi) / TAU)
}

/// Converts control power (W) to a Rabi frequency, `Ω = sqrt(κ·P)`.
#[derive(Copy, Clone, Debug, PartialEq)]
pub struct ControlCalibration {
    /// (rad/s)² per W.
    pub kappa: f64,
}

impl ControlCalibration {
    pub fn new(kappa: f64) -> Result<Self> {
        if kappa > 0.0 && kappa.is_finite() {
            Ok(Self { kappa })
        } else {
            Err(invalid("kappa", format!("must be > 0, got {kappa}")))
        }
    }
}

pub fn rabi_from_power(power: f64, calib: &ControlCalibration) -> Result<f64> {
    if !(power >= 0.0 && power.is_finite()) {
        return Err(invalid("power", format!("must be >= 0 W, got {power}")));
    }
    Ok((calib.kappa * power).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn params(omega_c: f64) -> EitParams {
        EitParams { d: 4.0, gamma_e: RB87_D1_GAMMA, gamma_0: 0.0, omega_c, delta_c: 0.0 }
    }

    #[test]
    fn ideal_resonance_is_transparent() {
        let t = eit_transfer(&params(TAU * 1e6), Detuning::hz(0.0).unwrap());
        assert_eq!(t, C64::new(1.0, 0.0));
    }

    #[test]
    fn control_off_resonance() {
        let t = eit_transfer(&params(0.0), Detuning::hz(0.0).unwrap());
        assert_relative_eq!(t.norm(), (-2.0f64).exp(), epsilon = 1e-15);
        assert!((t.norm_sqr() - 0.0183).abs() < 1e-4);
    }

    #[test]
    fn far_detuned_limit() {
        let t = eit_transfer(&params(TAU * 1e6), Detuning::hz(1e12).unwrap());
        assert_relative_eq!(t.norm(), (-2.0f64).exp(), epsilon = 1e-9);
    }

    #[test]
    fn scan_shapes() {
        let grid = FrequencyGrid::new(200, 5e3).unwrap();
        let scan = transmission_scan(&params(TAU * 1e6), &grid).unwrap();
        let peak = scan.iter().map(|p| p.1).fold(0.0, f64::max);
        assert_eq!(peak, 1.0);
        let n = scan.len();
        for i in 0..n {
            assert_relative_eq!(scan[i].1, scan[n - 1 - i].1, epsilon = 1e-14);
        }
        let off = transmission_scan(&params(0.0), &grid).unwrap();
        assert!(off.iter().all(|p| (p.1 - (-4.0f64).exp()).abs() < 1e-15));
    }

    #[test]
    fn scan_symmetric_about_control_offset() {
        let p = params(TAU * 1e6).with_delta_c(TAU * 150e3);
        for x in [1e3, 3e4, 2e5] {
            let a = eit_transfer(&p, Detuning::hz(150e3 + x).unwrap());
            let b = eit_transfer(&p, Detuning::hz(150e3 - x).unwrap());
            assert_relative_eq!(a.re, b.re, epsilon = 1e-12);
            assert_relative_eq!(a.im, -b.im, epsilon = 1e-12);
        }
    }

    #[test]
    fn numeric_delay_matches_expansion() {
        let p = params(TAU * 1e6);
        let analytic = 2.0 * p.d * p.gamma_e / p.omega_c.powi(2);
        let tau = group_delay(&p).unwrap();
        assert!((tau / analytic - 1.0).abs() < 5e-3);
        let p2 = p.with_omega_c(p.omega_c * 2f64.sqrt());
        assert!((group_delay(&p2).unwrap() / tau - 0.5).abs() < 1e-2);
        assert!(matches!(group_delay(&params(0.0)), Err(Error::UndefinedDelay(_))));
    }

    #[test]
    fn decoherence_opens_a_resonance_loss() {
        let p = EitParams { gamma_0: TAU * 5e3, ..params(TAU * 1e6) };
        assert!(eit_transfer(&p, Detuning::hz(0.0).unwrap()).norm() < 1.0);
    }

    #[test]
    fn window_grows_with_control() {
        let a = window_fwhm(&params(TAU * 0.5e6)).unwrap();
        let b = window_fwhm(&params(TAU * 1e6)).unwrap();
        assert!(b > a);
    }

    #[test]
    fn power_to_rabi() {
        let cal = ControlCalibration::new(4e17).unwrap();
        assert_eq!(rabi_from_power(0.0, &cal).unwrap(), 0.0);
        let a = rabi_from_power(50e-6, &cal).unwrap();
        let b = rabi_from_power(100e-6, &cal).unwrap();
        assert_relative_eq!(b / a, 2f64.sqrt(), epsilon = 1e-14);
        assert!(rabi_from_power(-1e-6, &cal).is_err());
        assert!(ControlCalibration::new(0.0).is_err());
    }
}
